//! The rayon and sequential paths must agree bit for bit. The switch is
//! global, so this lives in its own test binary.

use curlmesh::gpr_model::{self, FluidState, ModelParams, Solver, SolverConfig};
use curlmesh::mesh::{Boundary, Mesh3};
use curlmesh::prolong::{self, ProlongMode};
use curlmesh::set_parallel;

fn vortex_run(order: usize) -> FluidState {
    let p = ModelParams::default();
    let profile = gpr_model::profile_for(p, 10.0 / 24.0).unwrap();
    let s = FluidState::vortex(gpr_model::vortex_mesh(24).unwrap(), &profile).unwrap();
    let solver = Solver::new(p, SolverConfig::new(order), &s).unwrap();
    solver.run(s, 0.3, |_| {}).unwrap()
}

#[test]
fn sequential_path_is_bit_identical() {
    for order in 2..=4 {
        set_parallel(true);
        let a = vortex_run(order);
        set_parallel(false);
        let b = vortex_run(order);
        assert_eq!(a.u, b.u, "order {order}");
        assert_eq!(a.jx, b.jx);
        assert_eq!(a.jy, b.jy);
        assert_eq!(gpr_model::energy_total(&a).to_bits(), gpr_model::energy_total(&b).to_bits());
    }
    let coarse = prolong::init_gradient_field(Mesh3::cube(8, 0.0, 1.0, Boundary::Periodic).unwrap()).unwrap();
    for mode in [ProlongMode::Naive, ProlongMode::TouchUp, ProlongMode::ExactRecon] {
        set_parallel(true);
        let a = prolong::prolong_field(&coarse, 3, mode).unwrap();
        set_parallel(false);
        let b = prolong::prolong_field(&coarse, 3, mode).unwrap();
        assert_eq!(a.e, b.e, "{}", mode.name());
    }
    set_parallel(true);
}
