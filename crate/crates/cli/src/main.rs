mod experiments;
mod output;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use curlmesh::gpr_model::{JDissipation, ModelParams};
use curlmesh::prolong::ProlongMode;
use curlmesh::weno::Limiter;
use curlmesh::Error;
use experiments::{CurlMode, Report, VortexOptions};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

/// Curl-preserving reconstruction, prolongation and scheme experiments.
#[derive(Parser, Debug)]
#[command(name = "curlmesh", version, args_override_self = true)]
struct Cli {
    /// Directory for CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CURLMESH_THREADS")]
    threads: Option<usize>,
    /// RNG seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = "0x5EED", value_parser = parse_seed)]
    seed: u64,
    /// Flat `key = value` file; keys are long flag names, flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Curl identity and edge traces of random 2D reconstructions.
    #[command(name = "recon-verify-2d")]
    ReconVerify2d(ReconArgs),
    /// Curl identity and edge traces of random 3D reconstructions.
    #[command(name = "recon-verify-3d")]
    ReconVerify3d(ReconArgs),
    /// Prolongation error table of the periodic gradient test field.
    ProlongTable {
        #[arg(long, value_enum, default_value = "touchup")]
        mode: ProlongArg,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "16,32")]
        meshes: Vec<usize>,
    },
    /// Fourier-symbol spectral radius of the first-order edge scheme.
    StabilityScan {
        #[arg(long, default_value_t = 0.45)]
        cfl: f64,
        #[arg(long, default_value_t = 16)]
        v_angles: usize,
        #[arg(long, default_value_t = 64)]
        k_angles: usize,
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "2,3,4,8,16")]
        wavelengths: Vec<f64>,
    },
    /// Stationary vortex error table.
    VortexConvergence {
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "2,3")]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "32,64")]
        meshes: Vec<usize>,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        #[command(flatten)]
        vortex: VortexArgs,
    },
    /// Curl error and quadratic energy of the vortex over a long run.
    VortexLongrun {
        #[arg(long, value_delimiter = ',', action = ArgAction::Set, default_value = "2,3,4")]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1.0)]
        sample_dt: f64,
        #[command(flatten)]
        vortex: VortexArgs,
    },
}

#[derive(Args, Debug)]
struct ReconArgs {
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
}

#[derive(Args, Debug)]
struct VortexArgs {
    #[arg(long, value_enum, default_value = "linear")]
    limiter: LimiterArg,
    #[arg(long, value_enum, default_value = "shear")]
    j_dissipation: DissipationArg,
    /// Overrides the order's default CFL number.
    #[arg(long, allow_hyphen_values = true)]
    cfl: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho0: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Free,
    Preserving,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProlongArg {
    Naive,
    Touchup,
    Exact,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LimiterArg {
    Linear,
    Weno,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DissipationArg {
    Advective,
    Acoustic,
    Shear,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| e.to_string())
}

impl VortexArgs {
    fn options(&self) -> VortexOptions {
        let d = ModelParams::default();
        VortexOptions {
            params: ModelParams {
                gamma: self.gamma.unwrap_or(d.gamma),
                c0: self.c0.unwrap_or(d.c0),
                a: self.amplitude.unwrap_or(d.a),
                r0: self.r0.unwrap_or(d.r0),
                sigma: self.sigma.unwrap_or(d.sigma),
                rho0: self.rho0.unwrap_or(d.rho0),
            },
            limiter: match self.limiter {
                LimiterArg::Linear => Limiter::Linear,
                LimiterArg::Weno => Limiter::Weno,
            },
            dissipation: match self.j_dissipation {
                DissipationArg::Advective => JDissipation::Advective,
                DissipationArg::Acoustic => JDissipation::Acoustic,
                DissipationArg::Shear => JDissipation::Shear,
            },
            cfl: self.cfl,
        }
    }
}

const SUBCOMMANDS: [&str; 6] = [
    "recon-verify-2d",
    "recon-verify-3d",
    "prolong-table",
    "stability-scan",
    "vortex-convergence",
    "vortex-longrun",
];

/// Splices the config file's `--key value` pairs in right after the
/// subcommand and moves everything the user typed behind them, so that
/// command-line flags win.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let s: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < s.len() {
        let a = &s[i];
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else if a == "--config" {
            config = s.get(i + 1).cloned();
            i += 1;
        } else if ["--out", "--threads", "--seed"].contains(&a.as_str()) {
            i += 1;
        } else if sub.is_none() && SUBCOMMANDS.contains(&a.as_str()) {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, sub) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = output::parse_config(&text).map_err(|e| format!("{path}: {e}"))?;
    let mut out = vec![argv[0].clone(), argv[sub].clone()];
    for (k, v) in entries {
        out.push(format!("--{k}={v}").into());
    }
    out.extend(argv[1..sub].iter().cloned());
    out.extend(argv[sub + 1..].iter().cloned());
    Ok(out)
}

fn modes(m: ModeArg) -> Vec<CurlMode> {
    match m {
        ModeArg::Free => vec![CurlMode::Free],
        ModeArg::Preserving => vec![CurlMode::Preserving],
        ModeArg::Both => vec![CurlMode::Free, CurlMode::Preserving],
    }
}

fn run(cli: &Cli) -> curlmesh::Result<(&'static str, Report)> {
    Ok(match &cli.cmd {
        Cmd::ReconVerify2d(a) => ("recon-verify-2d", experiments::recon_verify_2d(a.order, a.trials, cli.seed, &modes(a.mode))?),
        Cmd::ReconVerify3d(a) => ("recon-verify-3d", experiments::recon_verify_3d(a.order, a.trials, cli.seed, &modes(a.mode))?),
        Cmd::ProlongTable { mode, order, meshes } => {
            let m = match mode {
                ProlongArg::Naive => ProlongMode::Naive,
                ProlongArg::Touchup => ProlongMode::TouchUp,
                ProlongArg::Exact => ProlongMode::ExactRecon,
            };
            ("prolong-table", experiments::prolong_table(m, *order, meshes)?)
        }
        Cmd::StabilityScan { cfl, v_angles, k_angles, wavelengths } => {
            ("stability-scan", experiments::stability_scan(*cfl, *v_angles, *k_angles, wavelengths)?)
        }
        Cmd::VortexConvergence { orders, meshes, t_end, vortex } => {
            ("vortex-convergence", experiments::vortex_convergence(orders, meshes, *t_end, &vortex.options())?)
        }
        Cmd::VortexLongrun { orders, n, t_end, sample_dt, vortex } => {
            ("vortex-longrun", experiments::vortex_longrun(orders, *n, *t_end, *sample_dt, &vortex.options())?)
        }
    })
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidOrder { .. } | Error::MomentAboveOrder { .. } | Error::InvalidMesh(_) | Error::InvalidParameter(_)
    )
}

fn main() -> ExitCode {
    let argv = match merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        curlmesh::init_threads(n);
        curlmesh::set_parallel(n > 1);
    }
    let (name, report) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_usage_error(&e) { 2 } else { 1 });
        }
    };
    let mut settings = BTreeMap::new();
    settings.insert("command".to_string(), format!("{:?}", cli.cmd));
    settings.insert("seed".to_string(), cli.seed.to_string());
    let hash = output::config_hash(&settings);
    let path = cli.out.join(format!("{name}.csv"));
    if let Err(e) = output::write_csv(&path, &report.table, &hash) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(1);
    }
    println!("wrote {}", path.display());
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail);
    }
    if let Some(c) = report.checks.iter().find(|c| !c.passed) {
        eprintln!("invariant failed: {} ({})", c.name, c.detail);
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
