//! Finite-volume solver for a 2D model system of density, momentum and a
//! curl-free vector field `J`, with the stationary-vortex test problem.
//!
//! Density and momentum are zone averages updated by LLF face fluxes. `J`
//! lives on edges as edge means and each edge is updated from the difference
//! of the potential `chi = v . J` at its two vertices. One `chi` per vertex
//! is shared by all four adjacent edges, so zone circulations are unchanged
//! by every stage up to rounding.
//!
//! Storage is padded: every array covers `(nx + 2G) x (ny + 2G)` entries with
//! `G` ghost layers. Zone `(i, j)` owns its lower x-edge, its left y-edge and
//! its lower-left vertex, all at the same padded index.

use std::f64::consts::PI;

use crate::error::{check_order, Error, Result};
use crate::legendre;
use crate::mesh::{Boundary, Mesh2};
use crate::par;
use crate::recon2d::{self, Closure, CurlMoments2D, EdgeMoments2D};
use crate::weno::{self, Limiter};

/// Ghost layers around the mesh.
pub const GHOST: usize = 4;

/// Physical constants and vortex parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Pressure constant, `p = gamma^2 rho`.
    pub gamma: f64,
    pub c0: f64,
    pub a: f64,
    pub r0: f64,
    pub sigma: f64,
    pub rho0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { gamma: 2.0, c0: 2.0, a: 0.2, r0: 2.0, sigma: 0.5, rho0: 2.0 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("c0", self.c0), ("sigma", self.sigma), ("rho0", self.rho0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.a.is_finite() || !self.r0.is_finite() {
            return Err(Error::InvalidParameter("vortex amplitude and radius must be finite".into()));
        }
        Ok(())
    }

    /// Vortex potential `A erf((r - R0) / sigma)`.
    pub fn potential(&self, r: f64) -> f64 {
        self.a * libm::erf((r - self.r0) / self.sigma)
    }

    /// Radial component `d phi / dr`.
    pub fn j_r(&self, r: f64) -> f64 {
        let s = (r - self.r0) / self.sigma;
        2.0 * self.a / (PI.sqrt() * self.sigma) * (-s * s).exp()
    }

    pub fn dj_r(&self, r: f64) -> f64 {
        -2.0 * (r - self.r0) / (self.sigma * self.sigma) * self.j_r(r)
    }

    /// Largest characteristic speed along `axis`.
    ///
    /// With `mu = lambda - v_n` the nontrivial speeds solve
    /// `mu^4 - B mu^2 + C = 0`, `B = gamma^2 + c0^2 (3 J_n^2 + J_t^2)`,
    /// `C = c0^2 J_t^2 (gamma^2 - c0^2 J_n^2)`.
    pub fn signal_speed(&self, v: [f64; 2], j: [f64; 2], axis: usize) -> f64 {
        let (jn, jt) = (j[axis], j[1 - axis]);
        let g2 = self.gamma * self.gamma;
        let c2 = self.c0 * self.c0;
        let b = g2 + c2 * (3.0 * jn * jn + jt * jt);
        let c = c2 * jt * jt * (g2 - c2 * jn * jn);
        let disc = (b * b - 4.0 * c).max(0.0).sqrt();
        v[axis].abs() + (0.5 * (b + disc)).sqrt()
    }
}

/// Radial density profile of the stationary vortex on a uniform table.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexProfile {
    pub params: ModelParams,
    pub dr: f64,
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
}

fn profile_rhs(p: &ModelParams, r: f64, rho: f64) -> f64 {
    let j = p.j_r(r);
    let c2 = p.c0 * p.c0;
    // j / r is taken as 0 at the origin; j(0) is a Gaussian tail of order 1e-8
    let j_over_r = if r > 0.0 { j / r } else { 0.0 };
    -rho * j * c2 / (p.gamma * p.gamma + j * j * c2) * (2.0 * p.dj_r(r) + j_over_r)
}

/// Integrates the radial equilibrium for the density with classical RK4 from
/// `rho(0) = rho0` out to `r_max` on `n_radial` intervals.
pub fn stationary_profile(params: ModelParams, r_max: f64, n_radial: usize) -> Result<VortexProfile> {
    params.validate()?;
    if n_radial < 10_000 {
        return Err(Error::InvalidParameter(format!("n_radial must be at least 1e4, got {n_radial}")));
    }
    if !(r_max > 0.0) {
        return Err(Error::InvalidParameter(format!("r_max must be positive, got {r_max}")));
    }
    let h = r_max / n_radial as f64;
    let f = |r: f64, y: f64| profile_rhs(&params, r, y);
    let mut rho = Vec::with_capacity(n_radial + 1);
    let mut drho = Vec::with_capacity(n_radial + 1);
    let mut y = params.rho0;
    for k in 0..=n_radial {
        let r = k as f64 * h;
        if !(y > 0.0) {
            return Err(Error::NonPositiveDensity { value: y, location: format!("r = {r}") });
        }
        rho.push(y);
        drho.push(f(r, y));
        let k1 = f(r, y);
        let k2 = f(r + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(r + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(VortexProfile { params, dr: h, rho, drho })
}

impl VortexProfile {
    pub fn r_max(&self) -> f64 {
        self.dr * (self.rho.len() - 1) as f64
    }

    /// Cubic Hermite interpolant of the table; constant beyond `r_max`.
    pub fn rho_at(&self, r: f64) -> f64 {
        let n = self.rho.len() - 1;
        let s = r / self.dr;
        if s >= n as f64 {
            return self.rho[n];
        }
        let k = (s.floor() as usize).min(n - 1);
        let t = s - k as f64;
        let (y0, y1) = (self.rho[k], self.rho[k + 1]);
        let (d0, d1) = (self.drho[k] * self.dr, self.drho[k + 1] * self.dr);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }

    /// Vortex field `J = J_r e_r` at a point.
    pub fn j_at(&self, x: f64, y: f64) -> [f64; 2] {
        let r = x.hypot(y);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let jr = self.params.j_r(r);
        [jr * x / r, jr * y / r]
    }
}

/// Primitive state at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointState {
    pub rho: f64,
    pub v: [f64; 2],
    pub j: [f64; 2],
}

/// Flux of `(rho, rho v_x, rho v_y)` along `axis`.
pub fn flux(params: &ModelParams, s: &PointState, axis: usize) -> Result<[f64; 3]> {
    if !(s.rho > 0.0) {
        return Err(Error::NonPositiveDensity { value: s.rho, location: "flux evaluation".into() });
    }
    Ok(flux_unchecked(params, s.rho, [s.rho * s.v[0], s.rho * s.v[1]], s.j, axis))
}

#[inline]
fn flux_unchecked(p: &ModelParams, rho: f64, m: [f64; 2], j: [f64; 2], axis: usize) -> [f64; 3] {
    let vn = m[axis] / rho;
    let cj = rho * p.c0 * p.c0 * j[axis];
    let mut f = [m[axis], vn * m[0] + cj * j[0], vn * m[1] + cj * j[1]];
    f[1 + axis] += p.gamma * p.gamma * rho;
    f
}

/// Traces meeting at a vertex. Corners are ordered NE, NW, SW, SE; `jx` is
/// `[east, west]` (ends of the two x-edges), `jy` is `[north, south]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VertexTraces {
    pub v: [[f64; 2]; 4],
    pub jx: [f64; 2],
    pub jy: [f64; 2],
}

impl VertexTraces {
    /// `J` seen from corner zone `q`.
    #[inline]
    pub fn corner_j(&self, q: usize) -> [f64; 2] {
        let east = q == 0 || q == 3;
        let north = q < 2;
        [self.jx[if east { 0 } else { 1 }], self.jy[if north { 0 } else { 1 }]]
    }
}

/// `chi*`: the corner average of `v . J` minus `s_a / 2` times the jump of
/// `J^a` across the vertex, for each axis `a`.
#[inline]
pub fn vertex_potential(t: &VertexTraces, s: [f64; 2]) -> f64 {
    let mut avg = 0.0;
    for q in 0..4 {
        let j = t.corner_j(q);
        avg += t.v[q][0] * j[0] + t.v[q][1] * j[1];
    }
    0.25 * avg - 0.5 * s[0] * (t.jx[0] - t.jx[1]) - 0.5 * s[1] * (t.jy[0] - t.jy[1])
}

/// Vertex potential with per-axis LLF speeds from the four corner states.
pub fn vertex_riemann_j(params: &ModelParams, t: &VertexTraces) -> f64 {
    let mut s = [0.0f64; 2];
    for q in 0..4 {
        let j = t.corner_j(q);
        for (a, sa) in s.iter_mut().enumerate() {
            *sa = sa.max(params.signal_speed(t.v[q], j, a));
        }
    }
    vertex_potential(t, s)
}

/// Vertex speeds for the jump terms of the `J` update; all reduce to the
/// linear advection potential when `c0`-waves are absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JDissipation {
    /// `s_a = max |v_a|` over the four corners.
    Advective,
    /// `s_a` = the largest characteristic speed along `a` over the corners.
    Acoustic,
    /// `s_a = max |v_a| + c0 max |J|` over the corners.
    #[default]
    Shear,
}

/// Vertex potential with `s_a = max |v_a|` over the four corners.
pub fn vertex_riemann_j_advective(t: &VertexTraces) -> f64 {
    let mut s = [0.0f64; 2];
    for v in &t.v {
        s[0] = s[0].max(v[0].abs());
        s[1] = s[1].max(v[1].abs());
    }
    vertex_potential(t, s)
}

/// Vertex potential with `s_a = max |v_a| + c0 max |J|` over the corners.
pub fn vertex_riemann_j_shear(params: &ModelParams, t: &VertexTraces) -> f64 {
    let mut s = [0.0f64; 2];
    let mut jm: f64 = 0.0;
    for (q, v) in t.v.iter().enumerate() {
        s[0] = s[0].max(v[0].abs());
        s[1] = s[1].max(v[1].abs());
        let j = t.corner_j(q);
        jm = jm.max(j[0] * j[0] + j[1] * j[1]);
    }
    let sj = params.c0 * jm.sqrt();
    vertex_potential(t, [s[0] + sj, s[1] + sj])
}

/// Time derivatives `(du, djx, djy)` laid out like the state arrays.
pub type Rates = ([Vec<f64>; 3], Vec<f64>, Vec<f64>);

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Spatial order, 2..=4.
    pub order: usize,
    pub cfl: f64,
    pub limiter: Limiter,
    pub closure: Closure,
    pub j_dissipation: JDissipation,
    /// At order 4 the step is scaled by `min(1, (h / h_ref)^(1/3))`.
    pub o4_reference_spacing: f64,
}

impl SolverConfig {
    pub fn new(order: usize) -> Self {
        SolverConfig {
            order,
            cfl: 0.4,
            limiter: Limiter::Linear,
            closure: Closure::default(),
            j_dissipation: JDissipation::default(),
            o4_reference_spacing: 10.0 / 64.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.order, 2, 4)?;
        if !(self.cfl > 0.0 && self.cfl <= 0.4) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 0.4], got {}", self.cfl)));
        }
        if !(self.o4_reference_spacing > 0.0) {
            return Err(Error::InvalidParameter("o4_reference_spacing must be positive".into()));
        }
        Ok(())
    }

    /// SSP Runge-Kutta stages: 2 at order 2, 3 above.
    pub fn rk_stages(&self) -> usize {
        if self.order == 2 {
            2
        } else {
            3
        }
    }
}

/// Zone-centered `(rho, rho v_x, rho v_y)` and edge-centered `J`, padded.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub mesh: Mesh2,
    pub time: f64,
    pub u: [Vec<f64>; 3],
    pub jx: Vec<f64>,
    pub jy: Vec<f64>,
}

impl FluidState {
    /// Padded row length and column count.
    #[inline]
    pub fn padded(&self) -> [usize; 2] {
        padded(&self.mesh)
    }

    #[inline]
    pub fn index(&self, i: isize, j: isize) -> usize {
        let [px, _] = self.padded();
        (i + GHOST as isize) as usize + px * (j + GHOST as isize) as usize
    }

    fn zeros(mesh: Mesh2) -> Self {
        let [px, py] = padded(&mesh);
        let n = px * py;
        FluidState { mesh, time: 0.0, u: [vec![0.0; n], vec![0.0; n], vec![0.0; n]], jx: vec![0.0; n], jy: vec![0.0; n] }
    }

    /// Uniform density, velocity and `J`.
    pub fn uniform(mesh: Mesh2, rho: f64, v: [f64; 2], j: [f64; 2]) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity { value: rho, location: "initial data".into() });
        }
        let mut s = Self::zeros(mesh);
        s.u[0].fill(rho);
        s.u[1].fill(rho * v[0]);
        s.u[2].fill(rho * v[1]);
        s.jx.fill(j[0]);
        s.jy.fill(j[1]);
        Ok(s)
    }

    /// Density, momentum and `J = grad phi` from point functions; zone
    /// averages by 4x4 Gauss quadrature and exact edge means of `J`.
    pub fn from_fields(
        mesh: Mesh2,
        rho: impl Fn(f64, f64) -> f64 + Sync,
        momentum: impl Fn(f64, f64) -> [f64; 2] + Sync,
        phi: impl Fn(f64, f64) -> f64 + Sync,
    ) -> Result<Self> {
        let [px, py] = padded(&mesh);
        let (dx, dy) = (mesh.spacing[0], mesh.spacing[1]);
        let corner = |k: usize| -> [f64; 2] {
            let i = (k % px) as f64 - GHOST as f64;
            let j = (k / px) as f64 - GHOST as f64;
            [mesh.origin[0] + i * dx, mesh.origin[1] + j * dy]
        };
        let (gx, gw) = legendre::gauss(4);
        let avg = |k: usize| -> [f64; 3] {
            let [x0, y0] = corner(k);
            let mut out = [0.0; 3];
            for (&ty, &wy) in gx.iter().zip(gw) {
                for (&tx, &wx) in gx.iter().zip(gw) {
                    let x = x0 + (0.5 + tx) * dx;
                    let y = y0 + (0.5 + ty) * dy;
                    let m = momentum(x, y);
                    let w = wx * wy;
                    out[0] += w * rho(x, y);
                    out[1] += w * m[0];
                    out[2] += w * m[1];
                }
            }
            out
        };
        let zones = par::map(px * py, avg);
        let mut s = Self::zeros(mesh);
        for (k, z) in zones.iter().enumerate() {
            if !(z[0] > 0.0) {
                return Err(Error::NonPositiveDensity { value: z[0], location: format!("padded zone {k}") });
            }
            for c in 0..3 {
                s.u[c][k] = z[c];
            }
        }
        let vphi = par::map(px * py, |k| {
            let [x, y] = corner(k);
            phi(x, y)
        });
        for k in 0..px * py {
            let (i, j) = (k % px, k / px);
            if i + 1 < px {
                s.jx[k] = (vphi[k + 1] - vphi[k]) / dx;
            }
            if j + 1 < py {
                s.jy[k] = (vphi[k + px] - vphi[k]) / dy;
            }
        }
        Ok(s)
    }

    /// The stationary vortex at rest.
    pub fn vortex(mesh: Mesh2, profile: &VortexProfile) -> Result<Self> {
        let p = profile.params;
        Self::from_fields(mesh, |x, y| profile.rho_at(x.hypot(y)), |_, _| [0.0, 0.0], |x, y| p.potential(x.hypot(y)))
    }

    /// Zones `0..nx` by `0..ny` in padded index form.
    fn owned_zones(&self) -> impl Iterator<Item = usize> + '_ {
        let [nx, ny] = self.mesh.dims;
        (0..ny).flat_map(move |j| (0..nx).map(move |i| self.index(i as isize, j as isize)))
    }

    /// `sum rho dx dy` over the mesh.
    pub fn mass(&self) -> f64 {
        let area = self.mesh.spacing[0] * self.mesh.spacing[1];
        self.owned_zones().map(|k| self.u[0][k]).sum::<f64>() * area
    }

    /// Largest `|J|` over the edges of the mesh.
    pub fn max_abs_j(&self) -> f64 {
        let [nx, ny] = self.mesh.dims;
        let mut m: f64 = 0.0;
        for j in 0..=ny as isize {
            for i in 0..=nx as isize {
                let k = self.index(i, j);
                if (i as usize) < nx {
                    m = m.max(self.jx[k].abs());
                }
                if (j as usize) < ny {
                    m = m.max(self.jy[k].abs());
                }
            }
        }
        m
    }
}

#[inline]
fn padded(mesh: &Mesh2) -> [usize; 2] {
    [mesh.dims[0] + 2 * GHOST, mesh.dims[1] + 2 * GHOST]
}

/// `sum (J_x^2 + J_y^2) dx dy` with zone values averaged from the two
/// parallel edges.
pub fn energy_total(state: &FluidState) -> f64 {
    let [px, _] = state.padded();
    let area = state.mesh.spacing[0] * state.mesh.spacing[1];
    state
        .owned_zones()
        .map(|k| {
            let jx = 0.5 * (state.jx[k] + state.jx[k + px]);
            let jy = 0.5 * (state.jy[k] + state.jy[k + 1]);
            jx * jx + jy * jy
        })
        .sum::<f64>()
        * area
}

/// Largest `|circulation| / area` over the zones.
pub fn curl_error(state: &FluidState) -> f64 {
    let [px, _] = state.padded();
    let (dx, dy) = (state.mesh.spacing[0], state.mesh.spacing[1]);
    state
        .owned_zones()
        .map(|k| {
            let c = (state.jx[k] - state.jx[k + px]) * dx + (state.jy[k + 1] - state.jy[k]) * dy;
            (c / (dx * dy)).abs()
        })
        .fold(0.0, f64::max)
}

/// Gauss points per face for an order.
fn face_points(order: usize) -> usize {
    if order == 2 {
        1
    } else {
        2
    }
}

/// Point values around one zone.
#[derive(Clone, Copy, Default)]
struct ZoneTrace {
    /// Conserved variables at Gauss points of the east, west, north, south faces.
    face: [[[f64; 3]; 2]; 4],
    /// Normal `J` at the same points, from the zone reconstruction.
    jn: [[f64; 2]; 4],
    /// Velocity at corners NE, NW, SW, SE.
    corner_v: [[f64; 2]; 4],
    /// Smallest density among the face and corner points; NaN if the zone
    /// could not be reconstructed.
    min_rho: f64,
}

/// The semi-discrete right-hand side and the time integrator.
pub struct Solver {
    pub params: ModelParams,
    pub config: SolverConfig,
    boundary: Option<FluidState>,
}

impl Solver {
    /// For `DirichletExact` meshes the ghost data is copied from `reference`.
    pub fn new(params: ModelParams, config: SolverConfig, reference: &FluidState) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        let m = &reference.mesh;
        if m.dims.iter().any(|&n| n < 2) {
            return Err(Error::InvalidMesh("need at least 2 zones per axis".into()));
        }
        let boundary = match m.boundary {
            Boundary::Periodic => None,
            Boundary::DirichletExact => Some(reference.clone()),
        };
        Ok(Solver { params, config, boundary })
    }

    /// Refreshes ghost zones and ghost edges.
    pub fn fill_ghosts(&self, s: &mut FluidState) {
        let [nx, ny] = s.mesh.dims;
        let [px, py] = s.padded();
        let g = GHOST as isize;
        let wrap = |k: isize, n: usize| (k - g).rem_euclid(n as isize) + g;
        for jp in 0..py as isize {
            for ip in 0..px as isize {
                let k = ip as usize + px * jp as usize;
                let (i, j) = (ip - g, jp - g);
                let zone_in = i >= 0 && i < nx as isize && j >= 0 && j < ny as isize;
                match &self.boundary {
                    None => {
                        let src = wrap(ip, nx) as usize + px * wrap(jp, ny) as usize;
                        if src != k {
                            for c in 0..3 {
                                s.u[c][k] = s.u[c][src];
                            }
                            s.jx[k] = s.jx[src];
                            s.jy[k] = s.jy[src];
                        }
                    }
                    Some(b) => {
                        if !zone_in {
                            for c in 0..3 {
                                s.u[c][k] = b.u[c][k];
                            }
                        }
                        let jx_in = i >= 0 && i < nx as isize && j >= 0 && j <= ny as isize;
                        let jy_in = i >= 0 && i <= nx as isize && j >= 0 && j < ny as isize;
                        if !jx_in {
                            s.jx[k] = b.jx[k];
                        }
                        if !jy_in {
                            s.jy[k] = b.jy[k];
                        }
                    }
                }
            }
        }
    }

    /// Largest characteristic speed over the mesh from zone values.
    pub fn max_speed(&self, s: &FluidState) -> f64 {
        let [px, _] = s.padded();
        let p = &self.params;
        s.owned_zones()
            .map(|k| {
                let rho = s.u[0][k];
                let v = [s.u[1][k] / rho, s.u[2][k] / rho];
                let j = [0.5 * (s.jx[k] + s.jx[k + px]), 0.5 * (s.jy[k] + s.jy[k + 1])];
                p.signal_speed(v, j, 0).max(p.signal_speed(v, j, 1))
            })
            .fold(0.0, f64::max)
    }

    /// Stable time step for the current state.
    pub fn dt(&self, s: &FluidState) -> f64 {
        let h = s.mesh.spacing[0].min(s.mesh.spacing[1]);
        let mut dt = self.config.cfl * h / self.max_speed(s);
        if self.config.order == 4 {
            dt *= (h / self.config.o4_reference_spacing).powf(1.0 / 3.0).min(1.0);
        }
        dt
    }

    /// Time derivatives `(du, djx, djy)` on owned zones and edges; ghosts of
    /// `s` must be current. Entries outside the owned ranges are zero.
    pub fn rhs(&self, s: &FluidState) -> Result<Rates> {
        let order = self.config.order;
        let lim = self.config.limiter;
        let r = weno::radius(order) as isize;
        let [nx, ny] = s.mesh.dims;
        let [px, py] = s.padded();
        let total = px * py;
        let (dx, dy) = (s.mesh.spacing[0], s.mesh.spacing[1]);
        let p = self.params;
        let g = GHOST as isize;
        let (gx, gw) = legendre::gauss(face_points(order));
        let ng = gx.len();
        // padded (i, j) of every storage index
        let at: Vec<[i32; 2]> = (0..py).flat_map(|j| (0..px).map(move |i| [i as i32, j as i32])).collect();
        let inside = |k: usize, lo: isize, hi_x: isize, hi_y: isize| {
            let (i, j) = (at[k][0] as isize - g, at[k][1] as isize - g);
            i >= lo && i < nx as isize + hi_x && j >= lo && j < ny as isize + hi_y
        };
        let stencil = |v: &[f64], k: usize, step: usize| -> [f64; 4] {
            let mut buf = [0.0; 5];
            for (o, b) in (-r..=r).zip(buf.iter_mut()) {
                *b = v[(k as isize + o * step as isize) as usize];
            }
            weno::reconstruct(&buf[..(2 * r + 1) as usize], order, lim)
        };

        // a stencil along `axis` fits inside the padded range
        let fits = |k: usize, axis: usize| {
            let (i, n) = (at[k][axis] as isize, [nx, ny][axis]);
            i >= r && i < n as isize + 2 * g - r
        };

        // line averages of the conserved variables on the four faces of each zone
        let line = par::map(total, |k| {
            let mut out = [[0.0; 3]; 4];
            for c in 0..3 {
                if fits(k, 0) {
                    let mx = stencil(&s.u[c], k, 1);
                    out[0][c] = legendre::eval(&mx, 0.5);
                    out[1][c] = legendre::eval(&mx, -0.5);
                }
                if fits(k, 1) {
                    let my = stencil(&s.u[c], k, px);
                    out[2][c] = legendre::eval(&my, 0.5);
                    out[3][c] = legendre::eval(&my, -0.5);
                }
            }
            out
        });

        // edge polynomials of J along their own direction
        let edge = par::map(total, |k| {
            let ex = if fits(k, 0) { stencil(&s.jx, k, 1) } else { [0.0; 4] };
            let ey = if fits(k, 1) { stencil(&s.jy, k, px) } else { [0.0; 4] };
            (ex, ey)
        });
        let edges_of = |k: usize| EdgeMoments2D {
            x: [edge[k].0, edge[k + px].0],
            y: [edge[k].1, edge[k + 1].1],
        };
        let zero_curl = CurlMoments2D::default();
        let zone_avg_j = if order == 4 {
            par::map(total, |k| {
                if inside(k, -2, 2, 2) {
                    recon2d::zone_average2d(order, &edges_of(k), &zero_curl)
                } else {
                    [0.0; 2]
                }
            })
        } else {
            Vec::new()
        };

        // point values on faces and corners of zones -1..=n
        let traces = par::map(total, |k| {
            let mut t = ZoneTrace { min_rho: f64::INFINITY, ..Default::default() };
            if !inside(k, -1, 1, 1) {
                return t;
            }
            let mut corner_u = [[0.0; 3]; 4];
            for f in 0..4 {
                let step = if f < 2 { px } else { 1 };
                for c in 0..3 {
                    let mut buf = [0.0; 5];
                    for (o, b) in (-r..=r).zip(buf.iter_mut()) {
                        *b = line[(k as isize + o * step as isize) as usize][f][c];
                    }
                    let m = weno::reconstruct(&buf[..(2 * r + 1) as usize], order, lim);
                    for q in 0..ng {
                        t.face[f][q][c] = legendre::eval(&m, gx[q]);
                    }
                    if c == 0 {
                        for q in 0..ng {
                            t.min_rho = t.min_rho.min(t.face[f][q][0]);
                        }
                    }
                    // east face gives NE (top) and SE, west face NW and SW
                    match f {
                        0 => {
                            corner_u[0][c] = legendre::eval(&m, 0.5);
                            corner_u[3][c] = legendre::eval(&m, -0.5);
                        }
                        1 => {
                            corner_u[1][c] = legendre::eval(&m, 0.5);
                            corner_u[2][c] = legendre::eval(&m, -0.5);
                        }
                        _ => {}
                    }
                }
            }
            for q in 0..4 {
                let rho = corner_u[q][0];
                t.min_rho = t.min_rho.min(rho);
                t.corner_v[q] = [corner_u[q][1] / rho, corner_u[q][2] / rho];
            }
            if !(t.min_rho > 0.0) {
                return t;
            }
            let modes = if order == 4 {
                let mut ax = [[0.0; 3]; 3];
                let mut ay = [[0.0; 3]; 3];
                for (jj, (rx, ry)) in ax.iter_mut().zip(ay.iter_mut()).enumerate() {
                    for ii in 0..3 {
                        let kk = k + ii + px * jj - 1 - px;
                        rx[ii] = zone_avg_j[kk][0];
                        ry[ii] = zone_avg_j[kk][1];
                    }
                }
                Some(recon2d::zone_modes_fv(&ax, &ay))
            } else {
                None
            };
            let Ok(rec) = recon2d::reconstruct2d_with(order, &edges_of(k), &zero_curl, modes, self.config.closure) else {
                t.min_rho = f64::NAN;
                return t;
            };
            for q in 0..ng {
                t.jn[0][q] = rec.eval_unchecked(0.5, gx[q])[0];
                t.jn[1][q] = rec.eval_unchecked(-0.5, gx[q])[0];
                t.jn[2][q] = rec.eval_unchecked(gx[q], 0.5)[1];
                t.jn[3][q] = rec.eval_unchecked(gx[q], -0.5)[1];
            }
            t
        });
        if let Some(k) = traces.iter().position(|t| !(t.min_rho > 0.0)) {
            return Err(Error::NonPositiveDensity {
                value: traces[k].min_rho,
                location: format!("face or corner point of padded zone {k}"),
            });
        }

        // LLF fluxes through the left face (axis 0) and lower face (axis 1) of zones 0..=n
        let faces = par::map(total, |k| {
            let mut out = [[0.0; 3]; 2];
            if !inside(k, 0, 1, 1) {
                return out;
            }
            for axis in 0..2 {
                let (lo, hi_face, lo_face, tang) = if axis == 0 {
                    (k - 1, 0, 1, &edge[k].1)
                } else {
                    (k - px, 2, 3, &edge[k].0)
                };
                for q in 0..ng {
                    let ul = traces[lo].face[hi_face][q];
                    let ur = traces[k].face[lo_face][q];
                    let jt = legendre::eval(tang, gx[q]);
                    let mut jl = [0.0; 2];
                    let mut jr = [0.0; 2];
                    jl[axis] = traces[lo].jn[hi_face][q];
                    jr[axis] = traces[k].jn[lo_face][q];
                    jl[1 - axis] = jt;
                    jr[1 - axis] = jt;
                    let ml = [ul[1], ul[2]];
                    let mr = [ur[1], ur[2]];
                    let fl = flux_unchecked(&p, ul[0], ml, jl, axis);
                    let fr = flux_unchecked(&p, ur[0], mr, jr, axis);
                    let sl = p.signal_speed([ml[0] / ul[0], ml[1] / ul[0]], jl, axis);
                    let sr = p.signal_speed([mr[0] / ur[0], mr[1] / ur[0]], jr, axis);
                    let sp = sl.max(sr);
                    for c in 0..3 {
                        out[axis][c] += gw[q] * (0.5 * (fl[c] + fr[c]) - 0.5 * sp * (ur[c] - ul[c]));
                    }
                }
            }
            out
        });

        // vertex potentials at vertices 0..=n
        let jdiss = self.config.j_dissipation;
        let chi = par::map(total, |k| {
            if !inside(k, 0, 1, 1) {
                return 0.0;
            }
            let t = VertexTraces {
                v: [
                    traces[k].corner_v[2],
                    traces[k - 1].corner_v[3],
                    traces[k - 1 - px].corner_v[0],
                    traces[k - px].corner_v[1],
                ],
                jx: [legendre::eval(&edge[k].0, -0.5), legendre::eval(&edge[k - 1].0, 0.5)],
                jy: [legendre::eval(&edge[k].1, -0.5), legendre::eval(&edge[k - px].1, 0.5)],
            };
            match jdiss {
                JDissipation::Advective => vertex_riemann_j_advective(&t),
                JDissipation::Acoustic => vertex_riemann_j(&p, &t),
                JDissipation::Shear => vertex_riemann_j_shear(&p, &t),
            }
        });

        let periodic = self.boundary.is_none();
        let extra = if periodic { 0 } else { 1 };
        let du = par::map(total, |k| {
            if !inside(k, 0, 0, 0) {
                return [0.0; 3];
            }
            let mut d = [0.0; 3];
            for c in 0..3 {
                d[c] = -(faces[k + 1][0][c] - faces[k][0][c]) / dx - (faces[k + px][1][c] - faces[k][1][c]) / dy;
            }
            d
        });
        let djx = par::map(total, |k| if inside(k, 0, 0, extra) { -(chi[k + 1] - chi[k]) / dx } else { 0.0 });
        let djy = par::map(total, |k| if inside(k, 0, extra, 0) { -(chi[k + px] - chi[k]) / dy } else { 0.0 });
        let mut out = [vec![0.0; total], vec![0.0; total], vec![0.0; total]];
        for (k, d) in du.iter().enumerate() {
            for c in 0..3 {
                out[c][k] = d[c];
            }
        }
        Ok((out, djx, djy))
    }

    /// `a * x + b * (y + dt L(y))`, ghosts refreshed.
    fn stage(&self, x: &FluidState, y: &FluidState, a: f64, b: f64, dt: f64) -> Result<FluidState> {
        let (mut du, mut djx, mut djy) = self.rhs(y)?;
        let comb = |xo: &[f64], yo: &[f64], d: &mut [f64]| {
            for k in 0..d.len() {
                d[k] = a * xo[k] + b * (yo[k] + dt * d[k]);
            }
        };
        for c in 0..3 {
            comb(&x.u[c], &y.u[c], &mut du[c]);
        }
        comb(&x.jx, &y.jx, &mut djx);
        comb(&x.jy, &y.jy, &mut djy);
        let mut out = FluidState { mesh: y.mesh, time: y.time, u: du, jx: djx, jy: djy };
        self.fill_ghosts(&mut out);
        Ok(out)
    }

    /// One SSP-RK step of size `dt`.
    pub fn step(&self, s: &FluidState, dt: f64) -> Result<FluidState> {
        let mut s0 = s.clone();
        self.fill_ghosts(&mut s0);
        let s1 = self.stage(&s0, &s0, 0.0, 1.0, dt)?;
        let mut out = if self.config.rk_stages() == 2 {
            self.stage(&s0, &s1, 0.5, 0.5, dt)?
        } else {
            let s2 = self.stage(&s0, &s1, 0.75, 0.25, dt)?;
            self.stage(&s0, &s2, 1.0 / 3.0, 2.0 / 3.0, dt)?
        };
        out.time = s.time + dt;
        check_state(&out)?;
        Ok(out)
    }

    /// Advances to `t_end`, calling `monitor` after every step.
    pub fn run(
        &self,
        mut s: FluidState,
        t_end: f64,
        mut monitor: impl FnMut(&FluidState),
    ) -> Result<FluidState> {
        self.fill_ghosts(&mut s);
        while s.time < t_end * (1.0 - 1e-14) {
            let dt = self.dt(&s).min(t_end - s.time);
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::StepFailure { time: s.time, reason: format!("time step {dt}") });
            }
            s = self.step(&s, dt)?;
            monitor(&s);
        }
        Ok(s)
    }
}

fn check_state(s: &FluidState) -> Result<()> {
    for k in s.owned_zones() {
        let rho = s.u[0][k];
        if !(rho > 0.0) {
            return Err(Error::StepFailure { time: s.time, reason: format!("density {rho} in padded zone {k}") });
        }
        if !s.u[1][k].is_finite() || !s.u[2][k].is_finite() || !s.jx[k].is_finite() || !s.jy[k].is_finite() {
            return Err(Error::StepFailure { time: s.time, reason: format!("non-finite value in padded zone {k}") });
        }
    }
    Ok(())
}

/// One step with default settings at the given order and CFL.
pub fn step(state: &FluidState, params: &ModelParams, order: usize, cfl: f64) -> Result<FluidState> {
    let mut cfg = SolverConfig::new(order);
    cfg.cfl = cfl;
    let solver = Solver::new(*params, cfg, state)?;
    let mut s = state.clone();
    solver.fill_ghosts(&mut s);
    let dt = solver.dt(&s);
    solver.step(&s, dt)
}

/// The vortex mesh `[-5, 5]^2` with `n x n` zones and exact ghosts.
pub fn vortex_mesh(n: usize) -> Result<Mesh2> {
    Mesh2::new([n, n], [10.0 / n as f64, 10.0 / n as f64], [-5.0, -5.0], Boundary::DirichletExact)
}

/// A profile fine enough for meshes down to `h_min`: spacing at most
/// `h_min / 50` and at least 1e4 intervals, out past the ghost layers.
pub fn profile_for(params: ModelParams, h_min: f64) -> Result<VortexProfile> {
    let r_max = (5.0 + (GHOST as f64 + 1.0) * 10.0 / 16.0) * 2f64.sqrt();
    let n = ((r_max / (h_min / 50.0)).ceil() as usize).max(10_000);
    stationary_profile(params, r_max, n)
}

/// Mean absolute (L1) and max errors of `J_x` edge means on the mesh.
pub fn jx_errors(state: &FluidState, exact: &FluidState) -> (f64, f64) {
    let [nx, ny] = state.mesh.dims;
    let (mut l1, mut linf) = (0.0, 0.0f64);
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let k = state.index(i, j);
            let e = (state.jx[k] - exact.jx[k]).abs();
            l1 += e;
            linf = linf.max(e);
        }
    }
    (l1 / (nx * ny) as f64, linf)
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub order: usize,
    pub n: usize,
    pub l1: f64,
    pub l1_order: Option<f64>,
    pub linf: f64,
    pub linf_order: Option<f64>,
    pub max_curl_error: f64,
    pub steps: usize,
}

/// Runs the vortex to `t_end` on each `n x n` mesh and reports `J_x` errors
/// against the initial (exact) edge means.
pub fn convergence_study(
    params: ModelParams,
    config: SolverConfig,
    meshes: &[usize],
    t_end: f64,
) -> Result<Vec<ConvergenceRow>> {
    params.validate()?;
    config.validate()?;
    let n_max = meshes.iter().copied().max().unwrap_or(1);
    let profile = profile_for(params, 10.0 / n_max as f64)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in meshes {
        let exact = FluidState::vortex(vortex_mesh(n)?, &profile)?;
        let solver = Solver::new(params, config, &exact)?;
        let mut steps = 0;
        let mut curl: f64 = 0.0;
        let end = solver.run(exact.clone(), t_end, |s| {
            steps += 1;
            curl = curl.max(curl_error(s));
        })?;
        let (l1, linf) = jx_errors(&end, &exact);
        let rate = |prev: f64, cur: f64, np: usize| (prev / cur).ln() / (n as f64 / np as f64).ln();
        let (l1_order, linf_order) = match rows.last() {
            Some(p) => (Some(rate(p.l1, l1, p.n)), Some(rate(p.linf, linf, p.n))),
            None => (None, None),
        };
        rows.push(ConvergenceRow { order: config.order, n, l1, l1_order, linf, linf_order, max_curl_error: curl, steps });
    }
    Ok(rows)
}

/// One sample of a long run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongRunSample {
    pub time: f64,
    pub curl_error: f64,
    pub energy: f64,
}

/// Runs the vortex on an `n x n` mesh to `t_end`, sampling curl error and
/// energy at `t = 0` and at every multiple of `sample_dt` (and at the end).
pub fn vortex_longrun(
    params: ModelParams,
    config: SolverConfig,
    n: usize,
    t_end: f64,
    sample_dt: f64,
) -> Result<Vec<LongRunSample>> {
    if !(sample_dt > 0.0) {
        return Err(Error::InvalidParameter(format!("sample interval must be positive, got {sample_dt}")));
    }
    let profile = profile_for(params, 10.0 / n as f64)?;
    let init = FluidState::vortex(vortex_mesh(n)?, &profile)?;
    let solver = Solver::new(params, config, &init)?;
    let sample = |s: &FluidState| LongRunSample { time: s.time, curl_error: curl_error(s), energy: energy_total(s) };
    let mut out = vec![sample(&init)];
    let mut s = init;
    let mut next = sample_dt;
    while s.time < t_end * (1.0 - 1e-14) {
        let target = next.min(t_end);
        s = solver.run(s, target, |_| {})?;
        out.push(sample(&s));
        next += sample_dt;
    }
    Ok(out)
}
