#![allow(clippy::needless_range_loop)]

mod common;

use common::{rng, uniform};
use curlmesh::gpr_model::*;
use curlmesh::mesh::{Boundary, Mesh2, MeshSpec};
use curlmesh::scheme::{self, EdgeState};
use curlmesh::Error;
use nalgebra::Matrix4;
use proptest::prelude::*;
use std::f64::consts::PI;

fn periodic(n: usize, h: f64) -> Mesh2 {
    MeshSpec::new([n, n], [h, h], [0.0, 0.0], Boundary::Periodic).unwrap()
}

/// Smooth periodic data on the unit square with nonzero velocity.
fn wavy(n: usize) -> FluidState {
    let tau = 2.0 * PI;
    FluidState::from_fields(
        periodic(n, 1.0 / n as f64),
        |x, y| 1.0 + 0.2 * (tau * x).sin() * (tau * y).cos(),
        |x, y| [0.3 + 0.1 * (tau * y).sin(), -0.2 + 0.1 * (tau * x).cos()],
        |x, y| 0.05 * (tau * x).sin() * (tau * y).sin() + 0.03 * (tau * (x + y)).cos(),
    )
    .unwrap()
}

#[test]
fn radial_field_peaks_at_r0() {
    let p = ModelParams::default();
    let peak = 2.0 * 0.2 / (PI.sqrt() * 0.5);
    assert!((p.j_r(2.0) - peak).abs() < 1e-15);
    assert!((peak - 0.4514).abs() < 1e-4);
    assert!(p.j_r(0.0) < 1e-6 && p.j_r(7.0) < 1e-40);
    // J_r is the derivative of the potential
    let h = 1e-4;
    for r in [0.7, 1.9, 2.3, 3.1] {
        let d = (p.potential(r - 2.0 * h) - 8.0 * p.potential(r - h) + 8.0 * p.potential(r + h) - p.potential(r + 2.0 * h)) / (12.0 * h);
        assert!((d - p.j_r(r)).abs() < 1e-11, "{r}");
    }
}

#[test]
fn profile_satisfies_the_radial_balance() {
    let p = ModelParams::default();
    let prof = stationary_profile(p, 8.0, 40_000).unwrap();
    let (g2, c2) = (p.gamma * p.gamma, p.c0 * p.c0);
    let total = |r: f64| g2 * prof.rho_at(r) + c2 * prof.rho_at(r) * p.j_r(r).powi(2);
    let h = prof.dr;
    let mut worst: f64 = 0.0;
    let mut worst_ode: f64 = 0.0;
    for k in (400..39_000).step_by(97) {
        let r = k as f64 * h;
        let d = (total(r - 2.0 * h) - 8.0 * total(r - h) + 8.0 * total(r + h) - total(r + 2.0 * h)) / (12.0 * h);
        worst = worst.max((d + c2 * prof.rho_at(r) * p.j_r(r).powi(2) / r).abs());
        let rho = &prof.rho;
        let drho = (rho[k - 2] - 8.0 * rho[k - 1] + 8.0 * rho[k + 1] - rho[k + 2]) / (12.0 * h);
        let j = p.j_r(r);
        let rhs = -rho[k] * j * c2 / (g2 + j * j * c2) * (2.0 * p.dj_r(r) + j / r);
        worst_ode = worst_ode.max((drho - rhs).abs());
    }
    assert!(worst <= 1e-8, "{worst}");
    assert!(worst_ode <= 1e-10, "{worst_ode}");
    // flat tails
    assert!((prof.rho_at(0.0) - 2.0).abs() < 1e-12);
    assert!((prof.rho_at(7.0) - prof.rho_at(7.9)).abs() < 1e-14);
    assert!(prof.rho_at(7.0) < 2.0);
}

#[test]
fn profile_validates_inputs() {
    let p = ModelParams::default();
    assert!(stationary_profile(p, 8.0, 100).is_err());
    assert!(stationary_profile(p, -1.0, 20_000).is_err());
    let bad = ModelParams { rho0: -1.0, ..p };
    assert!(matches!(stationary_profile(bad, 8.0, 20_000), Err(Error::InvalidParameter(_))));
    let bad = ModelParams { gamma: 0.0, ..p };
    assert!(bad.validate().is_err());
}

#[test]
fn flux_examples() {
    let p = ModelParams::default();
    let rest = PointState { rho: 3.0, v: [0.0, 0.0], j: [0.0, 0.0] };
    assert_eq!(flux(&p, &rest, 0).unwrap(), [0.0, 12.0, 0.0]);
    assert_eq!(flux(&p, &rest, 1).unwrap(), [0.0, 0.0, 12.0]);
    let moving = PointState { rho: 2.0, v: [1.0, 0.0], j: [0.0, 0.0] };
    assert_eq!(flux(&p, &moving, 0).unwrap()[1], 10.0);
    let s = PointState { rho: 1.5, v: [0.2, -0.4], j: [0.3, 0.7] };
    let f = flux(&p, &s, 1).unwrap();
    assert!((f[1] - (1.5 * -0.4 * 0.2 + 1.5 * 4.0 * 0.7 * 0.3)).abs() < 1e-15);
    assert!(flux(&p, &PointState { rho: 0.0, ..s }, 0).is_err());
}

#[test]
fn vortex_momentum_flux_is_divergence_free_pointwise() {
    let p = ModelParams::default();
    let prof = stationary_profile(p, 8.0, 40_000).unwrap();
    let state = |x: f64, y: f64| PointState { rho: prof.rho_at(x.hypot(y)), v: [0.0, 0.0], j: prof.j_at(x, y) };
    let h = 1e-3;
    let d4 = |f: &dyn Fn(f64) -> f64| (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
    for (x, y) in [(1.3, 0.9), (-2.0, 0.4), (0.1, -2.5), (2.9, 1.1)] {
        for c in 1..3 {
            let dx = d4(&|t| flux(&p, &state(x + t, y), 0).unwrap()[c]);
            let dy = d4(&|t| flux(&p, &state(x, y + t), 1).unwrap()[c]);
            assert!((dx + dy).abs() < 1e-8, "({x}, {y}) {c}: {}", dx + dy);
        }
    }
}

/// Jacobian of the x-flux of `(rho, m_x, m_y, J_x)` with `J_y` frozen.
fn x_jacobian(p: &ModelParams, rho: f64, v: [f64; 2], j: [f64; 2]) -> Matrix4<f64> {
    let (c2, g2) = (p.c0 * p.c0, p.gamma * p.gamma);
    let (vx, vy) = (v[0], v[1]);
    let (jx, jy) = (j[0], j[1]);
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -vx * vx + g2 + c2 * jx * jx, 2.0 * vx, 0.0, 2.0 * rho * c2 * jx,
        -vx * vy + c2 * jx * jy, vy, vx, rho * c2 * jy,
        -(vx * jx + vy * jy) / rho, jx / rho, jy / rho, vx,
    )
}

proptest! {
    #[test]
    fn signal_speed_is_the_largest_eigenvalue(
        rho in 0.1f64..5.0, vx in -3.0f64..3.0, vy in -3.0f64..3.0,
        jx in -2.0f64..2.0, jy in -2.0f64..2.0, gamma in 0.2f64..3.0, c0 in 0.2f64..3.0,
    ) {
        let p = ModelParams { gamma, c0, ..ModelParams::default() };
        let eig = x_jacobian(&p, rho, [vx, vy], [jx, jy]).complex_eigenvalues();
        let lam = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = p.signal_speed([vx, vy], [jx, jy], 0);
        prop_assert!(lam <= s * (1.0 + 1e-8) + 1e-8, "{lam} > {s}");
        let top = eig.iter().map(|z| (z.re - vx).abs()).fold(0.0, f64::max);
        prop_assert!((top + vx.abs() - s).abs() < 1e-6 * s);
        // the y-speed is the x-speed of the transposed state
        prop_assert_eq!(p.signal_speed([vy, vx], [jy, jx], 0), p.signal_speed([vx, vy], [jx, jy], 1));
    }
}

#[test]
fn vertex_potential_consistency() {
    let p = ModelParams::default();
    let t = VertexTraces { v: [[0.3, -0.2]; 4], jx: [0.5, 0.5], jy: [-0.1, -0.1] };
    let chi = 0.3 * 0.5 + 0.2 * 0.1;
    assert!((vertex_riemann_j(&p, &t) - chi).abs() < 1e-16);
    assert!((vertex_riemann_j_advective(&t) - chi).abs() < 1e-16);
    // at rest only the acoustic jump terms survive
    let rest = VertexTraces { v: [[0.0; 2]; 4], jx: [0.4, 0.1], jy: [0.2, 0.3] };
    assert_eq!(vertex_riemann_j_advective(&rest), 0.0);
    let mut s = [0.0f64; 2];
    for q in 0..4 {
        for (a, sa) in s.iter_mut().enumerate() {
            *sa = sa.max(p.signal_speed([0.0; 2], rest.corner_j(q), a));
        }
    }
    let expect = -0.5 * s[0] * 0.3 - 0.5 * s[1] * -0.1;
    assert!((vertex_riemann_j(&p, &rest) - expect).abs() < 1e-15);
}

#[test]
fn constant_velocity_potential_matches_linear_scheme() {
    let mesh = MeshSpec::new([6, 5], [0.3, 0.2], [0.0; 2], Boundary::Periodic).unwrap();
    let mut r = rng(5);
    let mut e = EdgeState::uniform(mesh, [0.0, 0.0]);
    for a in 0..2 {
        for v in e.j[a].iter_mut() {
            *v = uniform(&mut r, 1.0);
        }
    }
    let idx = |i: usize, j: usize| i % 6 + 6 * (j % 5);
    for v in [[0.4, -0.7], [-1.0, 0.2], [0.0, 0.5]] {
        for (i, j) in [(0, 0), (3, 2), (5, 4)] {
            let t = VertexTraces {
                v: [v; 4],
                jx: [e.j[0][idx(i, j)], e.j[0][idx(i + 5, j)]],
                jy: [e.j[1][idx(i, j)], e.j[1][idx(i, j + 4)]],
            };
            let want = scheme::vertex_potential_llf(&e, v, [i, j]);
            assert!((vertex_riemann_j_advective(&t) - want).abs() < 1e-15);
        }
    }
}

#[test]
fn uniform_states_are_fixed_points() {
    let p = ModelParams::default();
    for order in 2..=4 {
        for (v, j) in [([0.0, 0.0], [0.0, 0.0]), ([0.3, -0.1], [0.2, 0.4])] {
            let s = FluidState::uniform(periodic(8, 0.125), 1.0, v, j).unwrap();
            let next = step(&s, &p, order, 0.4).unwrap();
            for k in 0..s.u[0].len() {
                for c in 0..3 {
                    assert!((next.u[c][k] - s.u[c][k]).abs() < 1e-14, "order {order}");
                }
                assert!((next.jx[k] - s.jx[k]).abs() < 1e-15);
                assert!((next.jy[k] - s.jy[k]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn mass_is_conserved_and_circulations_are_frozen() {
    let p = ModelParams::default();
    for order in 2..=4 {
        let mut s = wavy(16);
        let solver = Solver::new(p, SolverConfig::new(order), &s).unwrap();
        let mut m0 = s.mass();
        let scale = s.max_abs_j();
        assert!(curl_error(&s) <= 1e-14 * scale * 16.0);
        for _ in 0..10 {
            let dt = solver.dt(&s);
            s = solver.step(&s, dt).unwrap();
            let m = s.mass();
            assert!(((m - m0) / m0).abs() <= 1e-13, "order {order}: {}", (m - m0) / m0);
            m0 = m;
            assert!(curl_error(&s) <= 1e-12 * scale, "order {order}: {}", curl_error(&s));
        }
        // the data is not steady, so something must have moved
        assert!((s.jx[s.index(3, 3)] - wavy(16).jx[s.index(3, 3)]).abs() > 1e-6);
    }
}

#[test]
fn rotational_data_keeps_its_circulation() {
    let p = ModelParams::default();
    let mut s = wavy(12);
    let mut r = rng(9);
    for v in s.jx.iter_mut().chain(s.jy.iter_mut()) {
        *v += 0.01 * uniform(&mut r, 1.0);
    }
    let solver = Solver::new(p, SolverConfig::new(3), &s).unwrap();
    solver.fill_ghosts(&mut s);
    let circ = |s: &FluidState, i: isize, j: isize| {
        let k = s.index(i, j);
        let [px, _] = s.padded();
        s.jx[k] - s.jx[k + px] + s.jy[k + 1] - s.jy[k]
    };
    let before: Vec<f64> = (0..12).flat_map(|j| (0..12).map(move |i| (i, j))).map(|(i, j)| circ(&s, i, j)).collect();
    for _ in 0..5 {
        let dt = solver.dt(&s);
        s = solver.step(&s, dt).unwrap();
    }
    let after: Vec<f64> = (0..12).flat_map(|j| (0..12).map(move |i| (i, j))).map(|(i, j)| circ(&s, i, j)).collect();
    for (a, b) in before.iter().zip(&after) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn energy_and_curl_diagnostics() {
    let zero = FluidState::uniform(periodic(4, 0.25), 1.0, [0.0; 2], [0.0; 2]).unwrap();
    assert_eq!(energy_total(&zero), 0.0);
    let unit = FluidState::uniform(periodic(4, 0.25), 1.0, [0.0; 2], [1.0, 0.0]).unwrap();
    assert!((energy_total(&unit) - 1.0).abs() < 1e-15);
    assert_eq!(curl_error(&unit), 0.0);
    let mut bump = FluidState::uniform(periodic(5, 1.0), 1.0, [0.0; 2], [0.0; 2]).unwrap();
    let k = bump.index(2, 2);
    bump.jx[k] += 1e-3;
    assert!((curl_error(&bump) - 1e-3).abs() < 1e-18);
    // only the two zones sharing that edge see it
    let [px, _] = bump.padded();
    let circ = |s: &FluidState, k: usize| s.jx[k] - s.jx[k + px] + s.jy[k + 1] - s.jy[k];
    assert_eq!(circ(&bump, k), 1e-3);
    assert_eq!(circ(&bump, k - px), -1e-3);
    assert_eq!(circ(&bump, k + 1), 0.0);
}

#[test]
fn vortex_initial_data_is_curl_free_with_exact_ghosts() {
    let p = ModelParams::default();
    let prof = profile_for(p, 10.0 / 32.0).unwrap();
    let s = FluidState::vortex(vortex_mesh(32).unwrap(), &prof).unwrap();
    assert!(curl_error(&s) <= 1e-14 * s.max_abs_j() * 32.0);
    assert!(energy_total(&s) > 0.0);
    let solver = Solver::new(p, SolverConfig::new(3), &s).unwrap();
    let mut t = s.clone();
    for v in t.u[0].iter_mut() {
        *v = 7.0;
    }
    solver.fill_ghosts(&mut t);
    assert_eq!(t.u[0][0], s.u[0][0]);
    assert_eq!(t.u[0][t.index(5, 5)], 7.0);
}

#[test]
fn vortex_is_near_steady_and_improves_with_resolution() {
    let p = ModelParams::default();
    let prof = profile_for(p, 10.0 / 128.0).unwrap();
    let residual = |n: usize, order: usize| {
        let s = FluidState::vortex(vortex_mesh(n).unwrap(), &prof).unwrap();
        let solver = Solver::new(p, SolverConfig::new(order), &s).unwrap();
        let (du, _, _) = solver.rhs(&s).unwrap();
        du[0].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    for order in [2, 3, 4] {
        let (a, b) = (residual(64, order), residual(128, order));
        assert!(a / b > 4.0, "order {order}: {a} -> {b}");
    }
}

#[test]
fn vortex_short_run_keeps_curl_at_rounding() {
    let p = ModelParams::default();
    for order in 2..=4 {
        let rows = convergence_study(p, SolverConfig::new(order), &[24], 0.5).unwrap();
        assert!(rows[0].max_curl_error <= 1e-12 * 0.46, "order {order}");
        assert!(rows[0].l1 > 0.0 && rows[0].l1 < 0.05);
    }
}

#[test]
fn invalid_settings_are_rejected() {
    let p = ModelParams::default();
    let s = FluidState::uniform(periodic(8, 0.125), 1.0, [0.0; 2], [0.0; 2]).unwrap();
    assert!(matches!(step(&s, &p, 5, 0.4), Err(Error::InvalidOrder { .. })));
    assert!(step(&s, &p, 1, 0.4).is_err());
    assert!(step(&s, &p, 3, 0.5).is_err());
    assert!(FluidState::uniform(periodic(8, 0.125), 0.0, [0.0; 2], [0.0; 2]).is_err());
}

#[test]
fn collapsing_density_fails_the_step() {
    let p = ModelParams::default();
    let mut s = FluidState::uniform(periodic(8, 0.125), 1.0, [0.0; 2], [0.0; 2]).unwrap();
    let solver = Solver::new(p, SolverConfig::new(2), &s).unwrap();
    // strong outflow from one zone
    let k = s.index(4, 4);
    s.u[0][k] = 1e-3;
    let (e, w, n, so) = (s.index(5, 4), s.index(3, 4), s.index(4, 5), s.index(4, 3));
    s.u[1][e] = 5.0;
    s.u[1][w] = -5.0;
    s.u[2][n] = 5.0;
    s.u[2][so] = -5.0;
    let err = solver.step(&s, 0.05).unwrap_err();
    assert!(matches!(err, Error::StepFailure { .. } | Error::NonPositiveDensity { .. }), "{err}");
}
