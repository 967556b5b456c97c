//! First-order, multidimensionally upwinded, curl-free update of edge fields
//! advected by a constant velocity, plus a Fourier-symbol stability scan.
//!
//! Every edge is updated from the difference of the two vertex potentials at
//! its ends, and every vertex carries one potential shared by all its edges,
//! so face circulations are preserved by telescoping.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::{Boundary, MeshSpec};
use crate::par;

/// Constant-velocity advection on a periodic mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectionConfig<const D: usize> {
    pub velocity: [f64; D],
    pub cfl: f64,
    pub mesh: MeshSpec<D>,
}

impl<const D: usize> AdvectionConfig<D> {
    pub fn new(velocity: [f64; D], cfl: f64, mesh: MeshSpec<D>) -> Result<Self> {
        if !(cfl > 0.0) {
            return Err(Error::InvalidParameter(format!("cfl must be positive, got {cfl}")));
        }
        if mesh.boundary != Boundary::Periodic {
            return Err(Error::InvalidMesh("advection needs a periodic mesh".into()));
        }
        Ok(AdvectionConfig { velocity, cfl, mesh })
    }

    /// Largest stable step `cfl * min(h_a / |v_a|)`; infinite at rest.
    pub fn dt(&self) -> f64 {
        (0..D)
            .filter(|&a| self.velocity[a] != 0.0)
            .map(|a| self.cfl * self.mesh.spacing[a] / self.velocity[a].abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Edge values `j[a]`, indexed by start vertex with axis 0 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeState<const D: usize> {
    pub mesh: MeshSpec<D>,
    pub j: [Vec<f64>; D],
}

#[inline]
fn unravel<const D: usize>(n: [usize; D], mut z: usize) -> [usize; D] {
    let mut p = [0; D];
    for a in 0..D {
        p[a] = z % n[a];
        z /= n[a];
    }
    p
}

#[inline]
fn ravel<const D: usize>(n: [usize; D], p: [usize; D]) -> usize {
    let mut z = 0;
    for a in (0..D).rev() {
        z = z * n[a] + p[a];
    }
    z
}

#[inline]
fn shifted<const D: usize>(n: [usize; D], p: [usize; D], a: usize, by: isize) -> usize {
    let mut q = p;
    q[a] = (p[a] as isize + by).rem_euclid(n[a] as isize) as usize;
    ravel(n, q)
}

impl<const D: usize> EdgeState<D> {
    /// Edge means of `grad phi` from vertex differences.
    pub fn from_potential(mesh: MeshSpec<D>, phi: impl Fn([f64; D]) -> f64 + Sync) -> Result<Self> {
        if mesh.boundary != Boundary::Periodic {
            return Err(Error::InvalidMesh("advection needs a periodic mesh".into()));
        }
        let n = mesh.dims;
        let total: usize = n.iter().product();
        let x = |p: [usize; D]| std::array::from_fn(|a| mesh.origin[a] + p[a] as f64 * mesh.spacing[a]);
        let v = par::map(total, |z| phi(x(unravel(n, z))));
        let j = std::array::from_fn(|a| {
            par::map(total, |z| (v[shifted(n, unravel(n, z), a, 1)] - v[z]) / mesh.spacing[a])
        });
        Ok(EdgeState { mesh, j })
    }

    pub fn uniform(mesh: MeshSpec<D>, value: [f64; D]) -> Self {
        let total: usize = mesh.dims.iter().product();
        EdgeState { mesh, j: std::array::from_fn(|a| vec![value[a]; total]) }
    }

    pub fn max_abs(&self) -> f64 {
        self.j.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Line integral around the face spanned by axes `a < b` with lower
    /// corner `p`, divided by the mean of the two spacings.
    pub fn circulation(&self, a: usize, b: usize, p: [usize; D]) -> f64 {
        let n = self.mesh.dims;
        let (ha, hb) = (self.mesh.spacing[a], self.mesh.spacing[b]);
        let z = ravel(n, p);
        let line = (self.j[a][z] - self.j[a][shifted(n, p, b, 1)]) * ha
            + (self.j[b][shifted(n, p, a, 1)] - self.j[b][z]) * hb;
        line / (0.5 * (ha + hb))
    }

    /// Largest absolute face circulation.
    pub fn max_circulation(&self) -> f64 {
        let n = self.mesh.dims;
        let total: usize = n.iter().product();
        par::max_of(total, |z| {
            let p = unravel(n, z);
            let mut m: f64 = 0.0;
            for a in 0..D {
                for b in a + 1..D {
                    m = m.max(self.circulation(a, b, p).abs());
                }
            }
            m
        })
    }
}

/// Vertex potential: a centered average of `v . J` minus `|v|/2` times the
/// jump of each component across the vertex.
pub fn vertex_potential_llf<const D: usize>(state: &EdgeState<D>, velocity: [f64; D], vertex: [usize; D]) -> f64 {
    let n = state.mesh.dims;
    let z = ravel(n, vertex);
    let mut phi = 0.0;
    for a in 0..D {
        let hi = state.j[a][z];
        let lo = state.j[a][shifted(n, vertex, a, -1)];
        phi += 0.5 * velocity[a] * (hi + lo) - 0.5 * velocity[a].abs() * (hi - lo);
    }
    phi
}

/// Outcome of one forward-Euler step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<const D: usize> {
    pub state: EdgeState<D>,
    /// True when `dt` exceeded `cfg.dt()`; the step is taken anyway.
    pub unstable_dt: bool,
}

/// One forward-Euler step of the potential form.
pub fn step<const D: usize>(state: &EdgeState<D>, cfg: &AdvectionConfig<D>, dt: f64) -> Step<D> {
    let n = state.mesh.dims;
    let total: usize = n.iter().product();
    let phi = par::map(total, |z| vertex_potential_llf(state, cfg.velocity, unravel(n, z)));
    let j = std::array::from_fn(|a| {
        let r = dt / state.mesh.spacing[a];
        par::map(total, |z| state.j[a][z] - r * (phi[shifted(n, unravel(n, z), a, 1)] - phi[z]))
    });
    Step { state: EdgeState { mesh: state.mesh, j }, unstable_dt: dt > cfg.dt() * (1.0 + 1e-12) }
}

pub fn step2d(state: &EdgeState<2>, cfg: &AdvectionConfig<2>, dt: f64) -> Step<2> {
    step(state, cfg, dt)
}

pub fn step3d(state: &EdgeState<3>, cfg: &AdvectionConfig<3>, dt: f64) -> Step<3> {
    step(state, cfg, dt)
}

/// One forward-Euler step of the transcribed form: every component is
/// upwinded along every axis on its own. Equals [`step`] on curl-free data.
pub fn step_upwind<const D: usize>(state: &EdgeState<D>, cfg: &AdvectionConfig<D>, dt: f64) -> EdgeState<D> {
    let n = state.mesh.dims;
    let total: usize = n.iter().product();
    let j = std::array::from_fn(|a| {
        par::map(total, |z| {
            let p = unravel(n, z);
            let mut d = 0.0;
            for b in 0..D {
                let v = cfg.velocity[b];
                let diff = if v >= 0.0 {
                    state.j[a][z] - state.j[a][shifted(n, p, b, -1)]
                } else {
                    state.j[a][shifted(n, p, b, 1)] - state.j[a][z]
                };
                d += v * dt / state.mesh.spacing[b] * diff;
            }
            state.j[a][z] - d
        })
    });
    EdgeState { mesh: state.mesh, j }
}

/// Amplification matrix of one 2D step on the mode
/// `J^x ~ X e^{i k.(x_edge)}`, `J^y ~ Y e^{i k.(y_edge)}`: `G = I - u w^T`.
pub fn fourier_symbol(cfg: &AdvectionConfig<2>, k: [f64; 2]) -> [[Complex64; 2]; 2] {
    fourier_symbol_dt(cfg, k, cfg.dt())
}

pub fn fourier_symbol_dt(cfg: &AdvectionConfig<2>, k: [f64; 2], dt: f64) -> [[Complex64; 2]; 2] {
    let (u, w) = symbol_factors(cfg, k, dt);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut g = [[zero; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            g[r][c] = if r == c { one } else { zero } - u[r] * w[c];
        }
    }
    g
}

fn symbol_factors(cfg: &AdvectionConfig<2>, k: [f64; 2], dt: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let i = Complex64::i();
    let dt = if dt.is_finite() { dt } else { 0.0 };
    let mut u = [Complex64::new(0.0, 0.0); 2];
    let mut w = [Complex64::new(0.0, 0.0); 2];
    for a in 0..2 {
        let h = cfg.mesh.spacing[a];
        let half = 0.5 * k[a] * h;
        let v = cfg.velocity[a];
        w[a] = v * half.cos() - i * v.abs() * half.sin();
        u[a] = 2.0 * i * half.sin() * dt / h;
    }
    (u, w)
}

/// Eigenvalues of [`fourier_symbol`] from its rank-one structure: `1` for
/// the circulation mode and `1 - w.u` for the gradient mode.
pub fn symbol_eigenvalues(cfg: &AdvectionConfig<2>, k: [f64; 2]) -> [Complex64; 2] {
    let (u, w) = symbol_factors(cfg, k, cfg.dt());
    [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0) - (w[0] * u[0] + w[1] * u[1])]
}

/// Largest eigenvalue modulus of a 2x2 complex matrix. Loses about
/// `sqrt(eps)` near a double eigenvalue.
pub fn spectral_radius(g: &[[Complex64; 2]; 2]) -> f64 {
    let tr = g[0][0] + g[1][1];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    ((tr + disc) * 0.5).norm().max(((tr - disc) * 0.5).norm())
}

/// One row of the stability scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub v_angle: f64,
    pub k_angle: f64,
    pub cells_per_wavelength: f64,
    pub cfl: f64,
    pub spectral_radius: f64,
}

/// Spectral radius on a unit square mesh for unit speed at `v_angles`
/// directions, `k_angles` wave directions and the given wavelengths (in
/// cells), all angles uniform on `[0, 2 pi)`.
pub fn stability_scan(cfl: f64, v_angles: usize, k_angles: usize, wavelengths: &[f64]) -> Result<Vec<ScanRow>> {
    use std::f64::consts::PI;
    let mesh = MeshSpec::new([8, 8], [1.0, 1.0], [0.0, 0.0], Boundary::Periodic)?;
    let mut rows = Vec::with_capacity(v_angles * k_angles * wavelengths.len());
    for iv in 0..v_angles {
        let va = 2.0 * PI * iv as f64 / v_angles as f64;
        let cfg = AdvectionConfig::new([va.cos(), va.sin()], cfl, mesh)?;
        for ik in 0..k_angles {
            let ka = 2.0 * PI * ik as f64 / k_angles as f64;
            for &cells in wavelengths {
                let kk = 2.0 * PI / cells;
                let ev = symbol_eigenvalues(&cfg, [kk * ka.cos(), kk * ka.sin()]);
                rows.push(ScanRow {
                    v_angle: va,
                    k_angle: ka,
                    cells_per_wavelength: cells,
                    cfl,
                    spectral_radius: ev[0].norm().max(ev[1].norm()),
                });
            }
        }
    }
    Ok(rows)
}

/// Largest CFL at which the scan stays within `1 + 1e-12`, by bisection on
/// `[lo, hi]`.
pub fn sharp_cfl(v_angles: usize, k_angles: usize, wavelengths: &[f64], mut lo: f64, mut hi: f64) -> Result<f64> {
    let stable = |c: f64| -> Result<bool> {
        Ok(stability_scan(c, v_angles, k_angles, wavelengths)?.iter().all(|r| r.spectral_radius <= 1.0 + 1e-12))
    };
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if stable(m)? {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_wavenumber_is_identity() {
        let mesh = MeshSpec::new([4, 4], [1.0, 1.0], [0.0; 2], Boundary::Periodic).unwrap();
        let cfg = AdvectionConfig::new([0.3, -0.7], 0.45, mesh).unwrap();
        let g = fourier_symbol(&cfg, [0.0, 0.0]);
        assert_eq!(g[0][0], Complex64::new(1.0, 0.0));
        assert_eq!(g[0][1], Complex64::new(0.0, 0.0));
        assert!((spectral_radius(&g) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rest_state_has_infinite_dt() {
        let mesh = MeshSpec::new([4, 4], [1.0, 1.0], [0.0; 2], Boundary::Periodic).unwrap();
        let cfg = AdvectionConfig::new([0.0, 0.0], 0.45, mesh).unwrap();
        assert!(cfg.dt().is_infinite());
        assert!(AdvectionConfig::new([1.0, 0.0], 0.0, mesh).is_err());
    }
}
