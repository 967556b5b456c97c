//! One driver per subcommand. Each returns a table and the invariant checks
//! it ran; the caller writes the table and turns failed checks into exit 1.

use curlmesh::gpr_model::{self, JDissipation, ModelParams, SolverConfig};
use curlmesh::prolong::{self, ProlongMode};
use curlmesh::recon2d::{self, Closure, CurlMoments2D, EdgeMoments2D, ZoneModes2D};
use curlmesh::recon3d::{self, CurlComponent, CurlMoments3D, EdgeMoments3D, Mode};
use curlmesh::weno::Limiter;
use curlmesh::{legendre, scheme, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub struct Report {
    pub table: Table,
    pub checks: Vec<Check>,
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

/// Scientific notation with 9 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurlMode {
    Free,
    Preserving,
}

impl CurlMode {
    fn name(self) -> &'static str {
        match self {
            CurlMode::Free => "curl-free",
            CurlMode::Preserving => "curl-preserving",
        }
    }
}

fn u(r: &mut ChaCha8Rng) -> f64 {
    r.gen_range(-1.0..1.0)
}

/// Random 2D inputs of the given order. Curl-free inputs have zero
/// circulation and zero curl moments; fourth-order inputs satisfy the
/// least-squares closure's compatibility condition on `R_xy`.
fn inputs2d(r: &mut ChaCha8Rng, order: usize, mode: CurlMode) -> (EdgeMoments2D, CurlMoments2D, ZoneModes2D) {
    let mut e = EdgeMoments2D::default();
    for m in e.x.iter_mut().chain(e.y.iter_mut()) {
        for v in m.iter_mut().take(order) {
            *v = u(r);
        }
    }
    let mut z = ZoneModes2D::default();
    if order == 4 {
        z = ZoneModes2D { m10: u(r), m9: u(r) };
    }
    let mut c = CurlMoments2D::default();
    match mode {
        CurlMode::Free => {
            e.y[1][0] = e.y[0][0] - e.x[0][0] + e.x[1][0];
            z = ZoneModes2D { m10: z.m10, m9: z.m10 };
        }
        CurlMode::Preserving => {
            let mut g = |deg: usize| if deg < order { u(r) } else { 0.0 };
            c = CurlMoments2D {
                x: g(1),
                y: g(1),
                xx: g(2),
                yy: g(2),
                xy: g(2),
                xxx: g(3),
                yyy: g(3),
                xxy: g(3),
                xyy: g(3),
            };
            if order == 4 {
                c.xy = -70.0 * (z.m10 - z.m9) / 23.0;
            }
        }
    }
    (e, c, z)
}

pub fn recon_verify_2d(order: usize, trials: usize, seed: u64, modes: &[CurlMode]) -> Result<Report> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &mode in modes {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (mut curl_res, mut trace_res): (f64, f64) = (0.0, 0.0);
        for _ in 0..trials {
            let (e, c, z) = inputs2d(&mut r, order, mode);
            let rec = recon2d::reconstruct2d_with(order, &e, &c, Some(z), Closure::LeastSquares)?;
            let scale = rec.input_scale();
            for _ in 0..25 {
                let (x, y) = (0.5 * u(&mut r), 0.5 * u(&mut r));
                let want = if mode == CurlMode::Free { 0.0 } else { rec.target_curl(x, y) };
                curl_res = curl_res.max((rec.curl_unchecked(x, y) - want).abs() / scale);
            }
            for k in 0..=8 {
                let t = -0.5 + k as f64 / 8.0;
                let pairs = [
                    (rec.eval_unchecked(t, -0.5)[0], legendre::eval(&e.x[0], t)),
                    (rec.eval_unchecked(t, 0.5)[0], legendre::eval(&e.x[1], t)),
                    (rec.eval_unchecked(-0.5, t)[1], legendre::eval(&e.y[0], t)),
                    (rec.eval_unchecked(0.5, t)[1], legendre::eval(&e.y[1], t)),
                ];
                for (a, b) in pairs {
                    trace_res = trace_res.max((a - b).abs() / scale);
                }
            }
        }
        rows.push(vec![order.to_string(), mode.name().into(), trials.to_string(), sci(curl_res), sci(trace_res)]);
        checks.push(check(format!("curl identity ({}, order {order})", mode.name()), curl_res <= 1e-13, sci(curl_res)));
        checks.push(check(format!("edge traces ({}, order {order})", mode.name()), trace_res <= 1e-13, sci(trace_res)));
    }
    Ok(Report {
        table: Table { header: vec!["order", "mode", "trials", "max_curl_residual", "max_trace_residual"], rows },
        checks,
    })
}

fn set_free_moments(c: &mut CurlComponent, a: usize, order: usize, r: &mut ChaCha8Rng) {
    let lin: [&mut f64; 3] = [&mut c.x, &mut c.y, &mut c.z];
    for (q, v) in lin.into_iter().enumerate() {
        if q != a && order >= 2 {
            *v = u(r);
        }
    }
    let diag: [&mut f64; 3] = [&mut c.xx, &mut c.yy, &mut c.zz];
    for (q, v) in diag.into_iter().enumerate() {
        if q != a && order >= 3 {
            *v = u(r);
        }
    }
    if order >= 3 {
        c.xy = u(r);
        c.yz = u(r);
        c.xz = u(r);
    }
}

pub fn recon_verify_3d(order: usize, trials: usize, seed: u64, modes: &[CurlMode]) -> Result<Report> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &mode in modes {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (mut curl_res, mut trace_res): (f64, f64) = (0.0, 0.0);
        for _ in 0..trials {
            let mut e = EdgeMoments3D::default();
            for v in e.e.iter_mut().flatten() {
                for m in v.iter_mut().take(order) {
                    *m = u(&mut r);
                }
            }
            let mut c = CurlMoments3D::default();
            let lib_mode = match mode {
                CurlMode::Free => Mode::CurlFree,
                CurlMode::Preserving => {
                    for (a, comp) in c.r.iter_mut().enumerate() {
                        set_free_moments(comp, a, order, &mut r);
                    }
                    Mode::CurlPreserving
                }
            };
            let rec = recon3d::reconstruct3d(order, &e, &c, lib_mode)?;
            let scale = rec.input_scale();
            for _ in 0..50 {
                let p = [0.5 * u(&mut r), 0.5 * u(&mut r), 0.5 * u(&mut r)];
                let got = rec.curl_unchecked(p);
                let want = rec.target_curl(p);
                for a in 0..3 {
                    curl_res = curl_res.max((got[a] - want[a]).abs() / scale);
                }
            }
            for a in 0..3 {
                let (b, cc) = ((a + 1) % 3, (a + 2) % 3);
                for (i, (sb, sc)) in [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)].into_iter().enumerate() {
                    let m = e.e[a][i];
                    for k in 0..=8 {
                        let t = -0.5 + k as f64 / 8.0;
                        let mut p = [0.0; 3];
                        p[a] = t;
                        p[b] = sb;
                        p[cc] = sc;
                        let want = legendre::eval(&[m[0], m[1], m[2], 0.0], t);
                        trace_res = trace_res.max((rec.eval_unchecked(p)[a] - want).abs() / scale);
                    }
                }
            }
        }
        rows.push(vec![order.to_string(), mode.name().into(), trials.to_string(), sci(curl_res), sci(trace_res)]);
        checks.push(check(format!("curl identity ({}, order {order})", mode.name()), curl_res <= 1e-13, sci(curl_res)));
        checks.push(check(format!("edge traces ({}, order {order})", mode.name()), trace_res <= 1e-13, sci(trace_res)));
    }
    Ok(Report {
        table: Table { header: vec!["order", "mode", "trials", "max_curl_residual", "max_trace_residual"], rows },
        checks,
    })
}

pub fn prolong_table(mode: ProlongMode, order: usize, meshes: &[usize]) -> Result<Report> {
    let rows = prolong::prolong_table(mode, order, meshes)?;
    let mut checks = Vec::new();
    let mut out = Vec::new();
    for row in &rows {
        if mode != ProlongMode::Naive {
            checks.push(check(
                format!("fine circulation ({} order {order}, N={})", mode.name(), row.n_coarse),
                row.max_circulation <= 1e-12,
                sci(row.max_circulation),
            ));
        }
        out.push(vec![
            mode.name().to_string(),
            order.to_string(),
            row.n_coarse.to_string(),
            sci(row.l1),
            opt(row.l1_order),
            sci(row.linf),
            opt(row.linf_order),
            sci(row.max_circulation),
        ]);
    }
    Ok(Report {
        table: Table {
            header: vec!["mode", "order", "N_coarse", "L1", "L1_order", "Linf", "Linf_order", "max_circulation"],
            rows: out,
        },
        checks,
    })
}

pub fn stability_scan(cfl: f64, v_angles: usize, k_angles: usize, wavelengths: &[f64]) -> Result<Report> {
    let scan = scheme::stability_scan(cfl, v_angles, k_angles, wavelengths)?;
    let worst = scan.iter().map(|r| r.spectral_radius).fold(0.0, f64::max);
    let checks = vec![check(format!("spectral radius at CFL {cfl}"), worst <= 1.0 + 1e-12, sci(worst))];
    let rows = scan
        .iter()
        .map(|r| {
            vec![
                format!("{:.6}", r.v_angle),
                format!("{:.6}", r.k_angle),
                format!("{}", r.cells_per_wavelength),
                format!("{}", r.cfl),
                sci(r.spectral_radius),
            ]
        })
        .collect();
    Ok(Report {
        table: Table { header: vec!["v_angle", "k_angle", "cells_per_wavelength", "cfl", "spectral_radius"], rows },
        checks,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct VortexOptions {
    pub params: ModelParams,
    pub limiter: Limiter,
    pub dissipation: JDissipation,
    pub cfl: Option<f64>,
}

impl VortexOptions {
    fn config(&self, order: usize) -> SolverConfig {
        let mut c = SolverConfig::new(order);
        c.limiter = self.limiter;
        c.j_dissipation = self.dissipation;
        if let Some(cfl) = self.cfl {
            c.cfl = cfl;
        }
        c
    }
}

/// Largest `|J|` of the exact vortex, the scale for curl checks.
fn j_scale(p: &ModelParams) -> f64 {
    (0..4000).map(|k| p.j_r(k as f64 * 2e-3)).fold(0.0, f64::max)
}

pub fn vortex_convergence(orders: &[usize], meshes: &[usize], t_end: f64, o: &VortexOptions) -> Result<Report> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let scale = j_scale(&o.params);
    for &order in orders {
        for row in gpr_model::convergence_study(o.params, o.config(order), meshes, t_end)? {
            checks.push(check(
                format!("curl preservation (O{order}, {0}x{0})", row.n),
                row.max_curl_error <= 1e-12 * scale,
                sci(row.max_curl_error),
            ));
            rows.push(vec![
                format!("O{order}"),
                format!("{0}x{0}", row.n),
                sci(row.l1),
                opt(row.l1_order),
                sci(row.linf),
                opt(row.linf_order),
                sci(row.max_curl_error),
                row.steps.to_string(),
            ]);
        }
    }
    Ok(Report {
        table: Table {
            header: vec!["Method", "NxNy", "L1", "L1_order", "Linf", "Linf_order", "max_curl_error", "steps"],
            rows,
        },
        checks,
    })
}

pub fn vortex_longrun(orders: &[usize], n: usize, t_end: f64, sample_dt: f64, o: &VortexOptions) -> Result<Report> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let scale = j_scale(&o.params);
    for &order in orders {
        let samples = gpr_model::vortex_longrun(o.params, o.config(order), n, t_end, sample_dt)?;
        let worst = samples.iter().map(|s| s.curl_error).fold(0.0, f64::max);
        checks.push(check(format!("curl preservation (O{order}, {n}x{n})"), worst <= 1e-12 * scale, sci(worst)));
        for s in samples {
            rows.push(vec![format!("O{order}"), format!("{:.6}", s.time), sci(s.curl_error), sci(s.energy)]);
        }
    }
    Ok(Report { table: Table { header: vec!["Method", "time", "curl_error", "energy"], rows }, checks })
}
