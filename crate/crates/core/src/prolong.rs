//! Curl-preserving prolongation of edge fields with refinement ratio 2.
//!
//! Fine edges fall into three types: type 1 lie on coarse edges, type 2 lie
//! inside coarse faces, type 3 lie inside coarse zones. Type-1 values are
//! half-edge means of the 1D WENO reconstruction along the coarse edge.
//! Type-2 and type-3 values come from a dimension-by-dimension FV WENO
//! reconstruction of the zone averages. The touch-up then moves type-2 values
//! (per coarse face) and type-3 values (per coarse zone) to the closest values
//! that give every fine face its target circulation.
//!
//! Circulations are signed sums of edge values with no length factor, so the
//! four fine faces of a coarse face add up to twice its circulation.
//!
//! [`prolong_field`] uses the optimal (linear) weights of the central WENO
//! reconstruction; [`prolong_field_with`] takes the limiter explicitly.

use std::sync::OnceLock;

use nalgebra::{SMatrix, SVector};

use crate::error::{check_order, Error, Result};
use crate::legendre;
use crate::mesh::{Boundary, Mesh2, Mesh3};
use crate::par;
use crate::recon2d::{self, CurlMoments2D, EdgeMoments2D};
use crate::recon3d::{self, CurlMoments3D, EdgeMoments3D, Mode};
use crate::weno::{self, Limiter};

/// Edge means on a periodic 3D mesh, `e[a]` indexed by the edge's start
/// vertex `i + n0 (j + n1 k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseField {
    pub mesh: Mesh3,
    pub e: [Vec<f64>; 3],
}

/// The scalar potential used by the prolongation tables, on the unit cube.
pub fn table_potential(x: f64, y: f64, z: f64) -> f64 {
    use std::f64::consts::PI;
    let tp = 2.0 * PI;
    (tp * x).sin() + 3.2 * (3.0 * tp * y).cos() - 2.2 * (2.0 * tp * z).sin()
        + 1.5 * (2.0 * tp * y).cos() * (tp * z).sin()
        - 2.3 * (2.0 * tp * x).sin() * (3.0 * tp * z).sin()
        + 1.8 * (3.0 * tp * x).cos() * (3.0 * tp * y).sin()
}

fn require_periodic<const D: usize>(mesh: &crate::mesh::MeshSpec<D>) -> Result<()> {
    if mesh.boundary != Boundary::Periodic {
        return Err(Error::InvalidMesh("prolongation needs a periodic mesh".into()));
    }
    Ok(())
}

#[inline]
fn idx3(n: [usize; 3], i: usize, j: usize, k: usize) -> usize {
    i + n[0] * (j + n[1] * k)
}

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

#[inline]
fn shift(n: [usize; 3], p: [usize; 3], axis: usize, by: isize) -> [usize; 3] {
    let mut q = p;
    q[axis] = wrap(p[axis] as isize + by, n[axis]);
    q
}

#[inline]
fn unravel(n: [usize; 3], z: usize) -> [usize; 3] {
    [z % n[0], (z / n[0]) % n[1], z / (n[0] * n[1])]
}

#[inline]
fn at(n: [usize; 3], p: [usize; 3]) -> usize {
    idx3(n, p[0], p[1], p[2])
}

impl CoarseField {
    /// Edge values `(phi(end) - phi(start)) / h` from a vertex potential.
    pub fn from_potential(mesh: Mesh3, phi: impl Fn(f64, f64, f64) -> f64 + Sync) -> Result<Self> {
        require_periodic(&mesh)?;
        let n = mesh.dims;
        let vert = |p: [usize; 3]| {
            phi(
                mesh.origin[0] + p[0] as f64 * mesh.spacing[0],
                mesh.origin[1] + p[1] as f64 * mesh.spacing[1],
                mesh.origin[2] + p[2] as f64 * mesh.spacing[2],
            )
        };
        let total = n[0] * n[1] * n[2];
        let v = par::map(total, |z| vert(unravel(n, z)));
        let e = [0, 1, 2].map(|a| {
            par::map(total, |z| {
                let p = unravel(n, z);
                (v[at(n, shift(n, p, a, 1))] - v[z]) / mesh.spacing[a]
            })
        });
        Ok(CoarseField { mesh, e })
    }

    pub fn value(&self, axis: usize, p: [usize; 3]) -> f64 {
        self.e[axis][at(self.mesh.dims, p)]
    }

    /// Circulation of the face normal to `a` whose lower corner is `p`.
    #[inline]
    pub fn face_circulation(&self, a: usize, p: [usize; 3]) -> f64 {
        let n = self.mesh.dims;
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        self.e[b][at(n, p)] + self.e[c][at(n, shift(n, p, b, 1))]
            - self.e[b][at(n, shift(n, p, c, 1))]
            - self.e[c][at(n, p)]
    }

    /// Largest absolute face circulation.
    pub fn max_circulation(&self) -> f64 {
        let n = self.mesh.dims;
        let total = n[0] * n[1] * n[2];
        par::max_of(total, |z| {
            let p = unravel(n, z);
            (0..3).map(|a| self.face_circulation(a, p).abs()).fold(0.0, f64::max)
        })
    }

    /// Largest absolute edge value.
    pub fn max_abs(&self) -> f64 {
        self.e.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

/// Coarse field of the table potential on an `n^3` periodic unit cube.
pub fn init_gradient_field(mesh: Mesh3) -> Result<CoarseField> {
    CoarseField::from_potential(mesh, table_potential)
}

pub fn max_circulation(field: &CoarseField) -> f64 {
    field.max_circulation()
}

/// Which of the three prolongation variants to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProlongMode {
    /// FV WENO values only; not curl-preserving.
    Naive,
    /// FV WENO values followed by the 2D and 3D touch-up.
    TouchUp,
    /// Fine-edge means of the per-zone curl-free reconstruction (orders 2, 3).
    ExactRecon,
}

impl ProlongMode {
    pub fn name(self) -> &'static str {
        match self {
            ProlongMode::Naive => "naive",
            ProlongMode::TouchUp => "touchup",
            ProlongMode::ExactRecon => "exact",
        }
    }
}

/// Fine-edge classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeType {
    /// On a coarse edge.
    OnCoarseEdge,
    /// Inside a coarse face.
    InCoarseFace,
    /// Inside a coarse zone.
    InCoarseZone,
}

/// Type of the fine edge along `axis` starting at fine vertex `p`.
pub fn edge_type(axis: usize, p: [usize; 3]) -> EdgeType {
    let b = (axis + 1) % 3;
    let c = (axis + 2) % 3;
    match (p[b] % 2, p[c] % 2) {
        (0, 0) => EdgeType::OnCoarseEdge,
        (1, 1) => EdgeType::InCoarseZone,
        _ => EdgeType::InCoarseFace,
    }
}

// ---------------------------------------------------------------------------
// 2D touch-up

/// Inputs of the touch-up inside one coarse face (2D zone).
///
/// Fine zones 1..4 are lower-left, lower-right, upper-left, upper-right.
/// `vx[r][h]` is the bottom (`r = 0`) or top (`r = 1`) x-edge, left or right
/// half `h`; `vy[c][h]` is the left (`c = 0`) or right (`c = 1`) y-edge,
/// lower or upper half `h`. `fv` holds the candidates for the interior
/// halves `[V_xc1, V_xc2, V_yc1, V_yc2]` (x-halves at `y = 0`, y-halves at
/// `x = 0`). `r` are the target circulations of fine zones 1..3.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TouchUpTargets2D {
    pub vx: [[f64; 2]; 2],
    pub vy: [[f64; 2]; 2],
    pub fv: [f64; 4],
    pub r: [f64; 3],
}

impl TouchUpTargets2D {
    /// Target of fine zone 4 implied by the boundary values.
    pub fn r4(&self) -> f64 {
        let (vx, vy) = (&self.vx, &self.vy);
        vx[0][0] + vx[0][1] - vx[1][0] - vx[1][1] - vy[0][0] - vy[0][1] + vy[1][0] + vy[1][1]
            - self.r[0]
            - self.r[1]
            - self.r[2]
    }

    /// Circulations of fine zones 1..4 for interior values `c`.
    pub fn circulations(&self, c: &[f64; 4]) -> [f64; 4] {
        let (vx, vy) = (&self.vx, &self.vy);
        [
            vx[0][0] - vy[0][0] - c[0] + c[2],
            vx[0][1] + vy[1][0] - c[1] - c[2],
            -vx[1][0] - vy[0][1] + c[0] + c[3],
            c[1] + vy[1][1] - vx[1][1] - c[3],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchUp2D {
    /// `[V_xc1, V_xc2, V_yc1, V_yc2]`
    pub values: [f64; 4],
    /// `V_xc2 - V_xc1 - (V_x12 + V_x22 - V_x11 - V_x21)/2`
    pub alpha: f64,
}

/// Interior values satisfying the three circulation targets, parametrized by
/// `alpha`.
pub fn touchup2d_at(t: &TouchUpTargets2D, alpha: f64) -> [f64; 4] {
    let [[x11, x12], [x21, x22]] = t.vx;
    let [[y11, y12], [y21, _]] = t.vy;
    let [r1, r2, r3] = t.r;
    [
        -0.5 * (r1 + r2) + 0.75 * x11 + 0.25 * (x12 + x21 - x22) - 0.5 * (y11 - y21) - 0.5 * alpha,
        -0.5 * (r1 + r2) + 0.25 * (x11 - x21 + x22) + 0.75 * x12 - 0.5 * (y11 - y21) + 0.5 * alpha,
        0.5 * (r1 - r2) + 0.25 * (-x11 + x12 + x21 - x22) + 0.5 * (y11 + y21) - 0.5 * alpha,
        0.5 * (r1 + r2) + r3 + 0.25 * (-3.0 * x11 - x12 + 3.0 * x21 + x22) + 0.5 * y11 + y12 - 0.5 * y21
            + 0.5 * alpha,
    ]
}

/// Least-squares touch-up of the four interior fine-edge values.
pub fn touchup2d(t: &TouchUpTargets2D) -> TouchUp2D {
    let [[x11, _], [_, x22]] = t.vx;
    let [[_, y12], [y21, _]] = t.vy;
    let f = &t.fv;
    let alpha = 0.5 * (x11 - x22 - f[0] + f[1] - y12 + y21 - f[2] + f[3]) - 0.5 * (t.r[1] + t.r[2]);
    TouchUp2D { values: touchup2d_at(t, alpha), alpha }
}

// ---------------------------------------------------------------------------
// 3D touch-up

/// The 54 fine edges in the closure of one coarse zone. `v[a][jb][kc][s]` is
/// the fine edge along axis `a`, half `s`, at positions `jb`, `kc` in
/// `{0, 1, 2}` (for `-1/2, 0, +1/2`) along the cyclic axes `b = a+1`,
/// `c = a+2`. Entries with `jb = kc = 1` are the six type-3 edges; on input
/// they hold the FV candidates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Block3 {
    pub v: [[[[f64; 2]; 3]; 3]; 3],
}

/// Index of the type-3 unknown `(a, s)` in `[xc1, xc2, yc1, yc2, zc1, zc2]`.
#[inline]
fn unknown(a: usize, s: usize) -> usize {
    2 * a + s
}

/// Index of the internal fine face normal to `a` in quadrant `(hb, hc)`.
#[inline]
pub fn internal_face(a: usize, hb: usize, hc: usize) -> usize {
    4 * a + 2 * hb + hc
}

/// Rows of five internal faces whose circulations are independent: two
/// normal to z, two normal to x, one normal to y.
pub const INDEPENDENT_FACES: [usize; 5] = [8, 9, 0, 1, 5];

type CMat = SMatrix<f64, 12, 6>;
type PMat = SMatrix<f64, 6, 12>;

fn constraint_matrix() -> &'static (CMat, PMat) {
    static M: OnceLock<(CMat, PMat)> = OnceLock::new();
    M.get_or_init(|| {
        let mut c = CMat::zeros();
        for a in 0..3 {
            let (b, cc) = ((a + 1) % 3, (a + 2) % 3);
            for hb in 0..2 {
                for hc in 0..2 {
                    let row = internal_face(a, hb, hc);
                    c[(row, unknown(cc, hc))] += if hb == 0 { 1.0 } else { -1.0 };
                    c[(row, unknown(b, hb))] += if hc == 0 { -1.0 } else { 1.0 };
                }
            }
        }
        let p = c.pseudo_inverse(1e-12).expect("svd");
        (c, p)
    })
}

impl Block3 {
    pub fn type3(&self) -> [f64; 6] {
        let mut u = [0.0; 6];
        for a in 0..3 {
            for s in 0..2 {
                u[unknown(a, s)] = self.v[a][1][1][s];
            }
        }
        u
    }

    pub fn set_type3(&mut self, u: &[f64; 6]) {
        for a in 0..3 {
            for s in 0..2 {
                self.v[a][1][1][s] = u[unknown(a, s)];
            }
        }
    }

    /// Circulations of the 12 internal fine faces.
    pub fn internal_circulations(&self) -> [f64; 12] {
        let v = &self.v;
        let mut out = [0.0; 12];
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for hb in 0..2 {
                for hc in 0..2 {
                    // V^c's frame is (c, a, b); V^b's frame is (b, c, a).
                    out[internal_face(a, hb, hc)] = v[c][1][hb + 1][hc] - v[c][1][hb][hc]
                        - v[b][hc + 1][1][hb]
                        + v[b][hc][1][hb];
                }
            }
        }
        out
    }

    /// `(V_xc2 - V_xc1) - sum_i (V_xi2 - V_xi1) / 4` over the four coarse
    /// x-edges.
    pub fn beta(&self) -> f64 {
        let v = &self.v[0];
        let mut s = 0.0;
        for jb in [0, 2] {
            for kc in [0, 2] {
                s += v[jb][kc][1] - v[jb][kc][0];
            }
        }
        v[1][1][1] - v[1][1][0] - 0.25 * s
    }

    fn scale(&self) -> f64 {
        self.v.iter().flatten().flatten().flatten().fold(1.0, |m: f64, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchUp3D {
    /// `[V_xc1, V_xc2, V_yc1, V_yc2, V_zc1, V_zc2]`
    pub values: [f64; 6],
    pub beta: f64,
}

/// The one direction in which the six interior values can move without
/// changing any internal circulation.
pub const NULL_DIRECTION: [f64; 6] = [-0.5, 0.5, -0.5, 0.5, -0.5, 0.5];

fn solve3d(block: &Block3, targets: &[f64; 12]) -> ([f64; 6], [f64; 12]) {
    let (c, p) = constraint_matrix();
    let cand = SVector::<f64, 6>::from_row_slice(&block.type3());
    let now = SVector::<f64, 12>::from_row_slice(&block.internal_circulations());
    let t = SVector::<f64, 12>::from_row_slice(targets);
    let u = cand + p * (t - now);
    let mut achieved = [0.0; 12];
    let delta = c * (u - cand);
    for i in 0..12 {
        achieved[i] = now[i] + delta[i];
    }
    let mut out = [0.0; 6];
    out.copy_from_slice(u.as_slice());
    (out, achieved)
}

/// Moves the six type-3 values (candidates in `block`) to the closest values
/// in the least-squares sense that give the 12 internal faces the circulations
/// `targets`. Targets must be consistent with the boundary edges of the
/// block; otherwise `InconsistentTargets` is returned.
pub fn touchup3d(block: &Block3, targets: &[f64; 12]) -> Result<TouchUp3D> {
    let (u, achieved) = solve3d(block, targets);
    let scale = block.scale().max(targets.iter().fold(0.0, |m: f64, x| m.max(x.abs())));
    let residual = achieved.iter().zip(targets).fold(0.0, |m: f64, (a, t)| m.max((a - t).abs()));
    if residual > 1e-11 * scale {
        return Err(Error::InconsistentTargets { residual });
    }
    let mut b = *block;
    b.set_type3(&u);
    Ok(TouchUp3D { values: u, beta: b.beta() })
}

/// Same as [`touchup3d`] but projects the targets onto the consistent set
/// instead of rejecting them. Returns the solution and the achieved
/// circulations.
pub fn touchup3d_projected(block: &Block3, targets: &[f64; 12]) -> (TouchUp3D, [f64; 12]) {
    let (u, achieved) = solve3d(block, targets);
    let mut b = *block;
    b.set_type3(&u);
    (TouchUp3D { values: u, beta: b.beta() }, achieved)
}

/// [`touchup3d`] with targets given on the five faces of
/// [`INDEPENDENT_FACES`].
pub fn touchup3d_independent(block: &Block3, independent: &[f64; 5]) -> Result<TouchUp3D> {
    touchup3d(block, &expand_targets(block, independent))
}

/// Full set of 12 internal targets from the five independent ones, given the
/// boundary edges of `block`.
pub fn expand_targets(block: &Block3, independent: &[f64; 5]) -> [f64; 12] {
    let (c, _) = constraint_matrix();
    let mut sub = SMatrix::<f64, 5, 6>::zeros();
    for (r, &row) in INDEPENDENT_FACES.iter().enumerate() {
        sub.set_row(r, &c.row(row));
    }
    let psub = sub.pseudo_inverse(1e-12).expect("svd");
    let now = block.internal_circulations();
    let mut rhs = SVector::<f64, 5>::zeros();
    for (r, &row) in INDEPENDENT_FACES.iter().enumerate() {
        rhs[r] = independent[r] - now[row];
    }
    let du = psub * rhs;
    let delta = c * du;
    let mut out = [0.0; 12];
    for i in 0..12 {
        out[i] = now[i] + delta[i];
    }
    out
}

// ---------------------------------------------------------------------------
// 3D pipeline

/// Per-zone FV values for one component `a`, half `s`, at cross-section
/// positions `(t_b, t_c)` = `(0,0), (-1/2,0), (1/2,0), (0,-1/2), (0,1/2)`.
type FvZone = [[f64; 5]; 2];

fn gather(arr: &[f64], n: [usize; 3], p: [usize; 3], axis: usize, r: usize, buf: &mut [f64; 5]) {
    for (k, o) in (-(r as isize)..=r as isize).enumerate() {
        buf[k] = arr[at(n, shift(n, p, axis, o))];
    }
}

fn moments_along(arr: &[f64], n: [usize; 3], axis: usize, order: usize, lim: Limiter) -> Vec<[f64; 4]> {
    let r = weno::radius(order);
    par::map(arr.len(), |z| {
        let mut buf = [0.0; 5];
        gather(arr, n, unravel(n, z), axis, r, &mut buf);
        weno::reconstruct(&buf[..2 * r + 1], order, lim)
    })
}

fn edge_moments3(m: &[[f64; 4]; 3], order: usize) -> [f64; 3] {
    let mut out = [m[0][0], m[0][1], m[0][2]];
    for k in order.min(3)..3 {
        out[k] = 0.0;
    }
    out
}

/// Intermediate data shared by all modes.
struct Stage {
    n: [usize; 3],
    order: usize,
    /// 1D WENO moments along each coarse edge.
    m: [Vec<[f64; 4]>; 3],
}

impl Stage {
    fn new(field: &CoarseField, order: usize, lim: Limiter) -> Self {
        let n = field.mesh.dims;
        let m = [0, 1, 2].map(|a| moments_along(&field.e[a], n, a, order, lim));
        Stage { n, order, m }
    }

    fn edges_of_zone(&self, p: [usize; 3]) -> EdgeMoments3D {
        let n = self.n;
        let mut e = EdgeMoments3D::default();
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for (l, (ob, oc)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                let q = shift(n, shift(n, p, b, ob), c, oc);
                let full = self.m[a][at(n, q)];
                e.e[a][l] = edge_moments3(&[full, [0.0; 4], [0.0; 4]], self.order);
            }
        }
        e
    }

    /// Type-1 value: half `s` of the coarse edge along `a` starting at `q`.
    #[inline]
    fn type1(&self, a: usize, q: [usize; 3], s: usize) -> f64 {
        legendre::half_mean(&self.m[a][at(self.n, q)], s == 1)
    }
}

/// Free curl moments for zone averages: `R^c` slope along `b` for every
/// component, from face circulations normalized to reference units.
fn zone_curl_slopes(field: &CoarseField, order: usize, lim: Limiter) -> Vec<CurlMoments3D> {
    let n = field.mesh.dims;
    let total = n[0] * n[1] * n[2];
    let circ: [Vec<f64>; 3] = [0, 1, 2].map(|a| par::map(total, |z| field.face_circulation(a, unravel(n, z))));
    let tol = 1e-12 * field.max_abs().max(1.0);
    if circ.iter().all(|c| c.iter().all(|v| v.abs() < tol)) {
        return vec![CurlMoments3D::default(); total];
    }
    let ord = order.min(3);
    let r = weno::radius(ord);
    par::map(total, |z| {
        let p = unravel(n, z);
        let mut out = CurlMoments3D::default();
        let mut buf = [0.0; 5];
        for comp in 0..3 {
            for q in 0..3 {
                if q == comp {
                    continue;
                }
                let mut slope = 0.0;
                for face in [p, shift(n, p, comp, 1)] {
                    gather(&circ[comp], n, face, q, r, &mut buf);
                    slope += 0.5 * weno::reconstruct(&buf[..2 * r + 1], ord, lim)[1];
                }
                match q {
                    0 => out.r[comp].x = slope,
                    1 => out.r[comp].y = slope,
                    _ => out.r[comp].z = slope,
                }
            }
        }
        out
    })
}

/// Dimension-by-dimension FV values of every component in every zone.
fn fv_values(avg: &[Vec<f64>; 3], n: [usize; 3], order: usize, lim: Limiter) -> [Vec<FvZone>; 3] {
    let r = weno::radius(order);
    let w = 2 * r + 1;
    [0, 1, 2].map(|a| {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let total = avg[a].len();
        // half means along a
        let h: [Vec<f64>; 2] = {
            let both = par::map(total, |z| {
                let mut buf = [0.0; 5];
                gather(&avg[a], n, unravel(n, z), a, r, &mut buf);
                let m = weno::reconstruct(&buf[..w], order, lim);
                [legendre::half_mean(&m, false), legendre::half_mean(&m, true)]
            });
            [both.iter().map(|v| v[0]).collect(), both.iter().map(|v| v[1]).collect()]
        };
        // point values along b at -1/2, 0, 1/2
        let pb: [[Vec<f64>; 3]; 2] = [0, 1].map(|s| {
            let vals = par::map(total, |z| {
                let mut buf = [0.0; 5];
                gather(&h[s], n, unravel(n, z), b, r, &mut buf);
                let m = weno::reconstruct(&buf[..w], order, lim);
                [legendre::eval(&m, -0.5), legendre::eval(&m, 0.0), legendre::eval(&m, 0.5)]
            });
            [0, 1, 2].map(|k| vals.iter().map(|v| v[k]).collect())
        });
        // point values along c
        par::map(total, |z| {
            let p = unravel(n, z);
            let mut buf = [0.0; 5];
            let mut out = [[0.0; 5]; 2];
            for s in 0..2 {
                let mut pc = |arr: &Vec<f64>, ts: &[f64]| {
                    gather(arr, n, p, c, r, &mut buf);
                    let m = weno::reconstruct(&buf[..w], order, lim);
                    ts.iter().map(|&t| legendre::eval(&m, t)).collect::<Vec<_>>()
                };
                let mid = pc(&pb[s][1], &[0.0, -0.5, 0.5]);
                let lo = pc(&pb[s][0], &[0.0]);
                let hi = pc(&pb[s][2], &[0.0]);
                out[s] = [mid[0], lo[0], hi[0], mid[1], mid[2]];
            }
            out
        })
    })
}

/// Result of a 3D prolongation.
#[derive(Debug, Clone)]
pub struct Prolongation {
    pub fine: CoarseField,
    /// Touch-up parameter per coarse face, `alpha[a][zone]` for the face
    /// normal to `a` at the zone's lower side (TouchUp mode only).
    pub alpha: [Vec<f64>; 3],
    /// Touch-up parameter per coarse zone (TouchUp mode only).
    pub beta: Vec<f64>,
}

/// Prolongs a periodic coarse field to the mesh refined by 2.
pub fn prolong_field(coarse: &CoarseField, order: usize, mode: ProlongMode) -> Result<CoarseField> {
    Ok(prolong_field_with(coarse, order, mode, Limiter::Linear)?.fine)
}

pub fn prolong_field_with(coarse: &CoarseField, order: usize, mode: ProlongMode, lim: Limiter) -> Result<Prolongation> {
    require_periodic(&coarse.mesh)?;
    match mode {
        ProlongMode::ExactRecon => check_order(order, 2, 3)?,
        _ => check_order(order, 2, 4)?,
    }
    let n = coarse.mesh.dims;
    let total = n[0] * n[1] * n[2];
    let stage = Stage::new(coarse, order, lim);
    let fine_mesh = Mesh3::new(
        [2 * n[0], 2 * n[1], 2 * n[2]],
        [coarse.mesh.spacing[0] / 2.0, coarse.mesh.spacing[1] / 2.0, coarse.mesh.spacing[2] / 2.0],
        coarse.mesh.origin,
        Boundary::Periodic,
    )?;

    // Blocks of owned fine edges per coarse zone, plus alpha/beta.
    let blocks: Vec<Block3>;
    let mut alpha = [Vec::new(), Vec::new(), Vec::new()];
    let mut beta = Vec::new();
    if mode == ProlongMode::ExactRecon {
        blocks = par::map(total, |z| exact_block(&stage, unravel(n, z)));
    } else {
        let curl = zone_curl_slopes(coarse, order, lim);
        let avg: [Vec<f64>; 3] = {
            let all = par::map(total, |z| recon3d::zone_average3d(&stage.edges_of_zone(unravel(n, z)), &curl[z]));
            [0, 1, 2].map(|a| all.iter().map(|v| v[a]).collect())
        };
        let fv = fv_values(&avg, n, order, lim);
        let candidate_blocks = par::map(total, |z| fv_block(&stage, &fv, unravel(n, z)));
        if mode == ProlongMode::Naive {
            blocks = candidate_blocks;
        } else {
            // 2D touch-up on the lower face of every zone, for each normal.
            let faces: [Vec<TouchUp2D>; 3] = [0, 1, 2].map(|nrm| {
                par::map(total, |z| {
                    let t = face_targets(coarse, &stage, &candidate_blocks, nrm, unravel(n, z), lim);
                    touchup2d(&t)
                })
            });
            for a in 0..3 {
                alpha[a] = faces[a].iter().map(|f| f.alpha).collect();
            }
            let done = par::map(total, |z| {
                let p = unravel(n, z);
                let mut blk = candidate_blocks[z];
                apply_face_values(&mut blk, &faces, n, p);
                let targets = internal_targets(coarse, &blk, p, lim);
                let (res, _) = touchup3d_projected(&blk, &targets);
                blk.set_type3(&res.values);
                (blk, res.beta)
            });
            beta = done.iter().map(|d| d.1).collect();
            blocks = done.into_iter().map(|d| d.0).collect();
        }
    }
    let fine = scatter(&blocks, n, fine_mesh);
    Ok(Prolongation { fine, alpha, beta })
}

/// Fine-edge mean of the curl-free reconstruction, 3-point Gauss.
fn exact_block(stage: &Stage, p: [usize; 3]) -> Block3 {
    let e = stage.edges_of_zone(p);
    let rec = recon3d::reconstruct3d(stage.order, &e, &CurlMoments3D::default(), Mode::CurlFree)
        .expect("orders checked by caller");
    let (gx, gw) = legendre::gauss(3);
    let mut blk = Block3::default();
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        for jb in 0..3 {
            for kc in 0..3 {
                for s in 0..2 {
                    let mut acc = 0.0;
                    for (&t, &w) in gx.iter().zip(gw) {
                        let mut x = [0.0; 3];
                        x[a] = 0.5 * t + if s == 0 { -0.25 } else { 0.25 };
                        x[b] = 0.5 * jb as f64 - 0.5;
                        x[c] = 0.5 * kc as f64 - 0.5;
                        acc += w * rec.eval_unchecked(x)[a];
                    }
                    blk.v[a][jb][kc][s] = acc;
                }
            }
        }
    }
    blk
}

/// Block with type-1 values from the edge moments and FV values elsewhere.
/// Type-2 entries average the two zones sharing the coarse face.
fn fv_block(stage: &Stage, fv: &[Vec<FvZone>; 3], p: [usize; 3]) -> Block3 {
    let n = stage.n;
    let mut blk = Block3::default();
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let own = &fv[a][at(n, p)];
        for s in 0..2 {
            for jb in 0..3 {
                for kc in 0..3 {
                    blk.v[a][jb][kc][s] = match (jb, kc) {
                        (1, 1) => own[s][0],
                        (1, _) => {
                            // inside the face normal to c at t_c = kc/2 - 1/2
                            let (other, mine, theirs) = if kc == 0 { (shift(n, p, c, -1), 3, 4) } else { (shift(n, p, c, 1), 4, 3) };
                            0.5 * (own[s][mine] + fv[a][at(n, other)][s][theirs])
                        }
                        (_, 1) => {
                            let (other, mine, theirs) = if jb == 0 { (shift(n, p, b, -1), 1, 2) } else { (shift(n, p, b, 1), 2, 1) };
                            0.5 * (own[s][mine] + fv[a][at(n, other)][s][theirs])
                        }
                        _ => {
                            let q = shift(n, shift(n, p, b, jb as isize / 2), c, kc as isize / 2);
                            stage.type1(a, q, s)
                        }
                    };
                }
            }
        }
    }
    blk
}

/// Reference-unit slopes of the circulation of faces normal to `nrm` at the
/// face with lower corner `p`, along the two in-plane axes.
fn face_circ_slopes(coarse: &CoarseField, nrm: usize, p: [usize; 3], lim: Limiter) -> (f64, f64, f64) {
    let n = coarse.mesh.dims;
    let (u, v) = ((nrm + 1) % 3, (nrm + 2) % 3);
    let c0 = coarse.face_circulation(nrm, p);
    let nb = |axis: usize, o: isize| coarse.face_circulation(nrm, shift(n, p, axis, o));
    let su = weno::reconstruct(&[nb(u, -1), c0, nb(u, 1)], 2, lim)[1];
    let sv = weno::reconstruct(&[nb(v, -1), c0, nb(v, 1)], 2, lim)[1];
    (c0, su, sv)
}

/// Fine-face targets in quadrant `(su, sv)` (each -1 or +1) of a coarse face.
#[inline]
fn quadrant_target(c0: f64, gu: f64, gv: f64, su: f64, sv: f64) -> f64 {
    0.5 * (c0 + 0.25 * (su * gu + sv * gv))
}

/// Touch-up inputs for the face normal to `nrm` at the lower side of zone `p`.
fn face_targets(coarse: &CoarseField, stage: &Stage, blocks: &[Block3], nrm: usize, p: [usize; 3], lim: Limiter) -> TouchUpTargets2D {
    let n = stage.n;
    let (u, v) = ((nrm + 1) % 3, (nrm + 2) % 3);
    let mut t = TouchUpTargets2D::default();
    for s in 0..2 {
        t.vx[0][s] = stage.type1(u, p, s);
        t.vx[1][s] = stage.type1(u, shift(n, p, v, 1), s);
        t.vy[0][s] = stage.type1(v, p, s);
        t.vy[1][s] = stage.type1(v, shift(n, p, u, 1), s);
    }
    // Candidates: u-edges are component u with frame (u, v, nrm): jb = 1
    // (t_v = 0), kc = 0 (t_nrm = -1/2). v-edges are component v with frame
    // (v, nrm, u): jb = 0 (t_nrm = -1/2), kc = 1 (t_u = 0).
    let blk = &blocks[at(n, p)];
    t.fv = [blk.v[u][1][0][0], blk.v[u][1][0][1], blk.v[v][0][1][0], blk.v[v][0][1][1]];
    let (c0, gu, gv) = face_circ_slopes(coarse, nrm, p, lim);
    t.r = [
        quadrant_target(c0, gu, gv, -1.0, -1.0),
        quadrant_target(c0, gu, gv, 1.0, -1.0),
        quadrant_target(c0, gu, gv, -1.0, 1.0),
    ];
    t
}

/// Writes touched-up type-2 values of all six faces of zone `p` into `blk`.
fn apply_face_values(blk: &mut Block3, faces: &[Vec<TouchUp2D>; 3], n: [usize; 3], p: [usize; 3]) {
    for nrm in 0..3 {
        let (u, v) = ((nrm + 1) % 3, (nrm + 2) % 3);
        for (side, q) in [(0usize, p), (2usize, shift(n, p, nrm, 1))] {
            let vals = faces[nrm][at(n, q)].values;
            // u-edge: component u, frame (u, v, nrm): jb = 1, kc = side
            blk.v[u][1][side].copy_from_slice(&vals[..2]);
            // v-edge: component v, frame (v, nrm, u): jb = side, kc = 1
            blk.v[v][side][1].copy_from_slice(&vals[2..]);
        }
    }
}

/// Desired circulations of the internal faces of zone `p`: the mean of the
/// matching quadrant targets on the zone's two faces with the same normal.
fn internal_targets(coarse: &CoarseField, _blk: &Block3, p: [usize; 3], lim: Limiter) -> [f64; 12] {
    let n = coarse.mesh.dims;
    let mut out = [0.0; 12];
    for a in 0..3 {
        let lo = face_circ_slopes(coarse, a, p, lim);
        let hi = face_circ_slopes(coarse, a, shift(n, p, a, 1), lim);
        for hb in 0..2 {
            for hc in 0..2 {
                let (su, sv) = (if hb == 0 { -1.0 } else { 1.0 }, if hc == 0 { -1.0 } else { 1.0 });
                out[internal_face(a, hb, hc)] =
                    0.5 * (quadrant_target(lo.0, lo.1, lo.2, su, sv) + quadrant_target(hi.0, hi.1, hi.2, su, sv));
            }
        }
    }
    out
}

/// Writes owned block entries (`jb, kc` in `{0, 1}`) into fine arrays.
fn scatter(blocks: &[Block3], n: [usize; 3], mesh: Mesh3) -> CoarseField {
    let nf = mesh.dims;
    let mut e = [vec![0.0; nf[0] * nf[1] * nf[2]], vec![0.0; nf[0] * nf[1] * nf[2]], vec![0.0; nf[0] * nf[1] * nf[2]]];
    for (z, blk) in blocks.iter().enumerate() {
        let p = unravel(n, z);
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            for jb in 0..2 {
                for kc in 0..2 {
                    for s in 0..2 {
                        let mut q = [2 * p[0], 2 * p[1], 2 * p[2]];
                        q[a] += s;
                        q[b] += jb;
                        q[c] += kc;
                        e[a][at(nf, q)] = blk.v[a][jb][kc][s];
                    }
                }
            }
        }
    }
    CoarseField { mesh, e }
}

/// Which fine edges enter the error norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorNorm {
    /// x-edges only.
    #[default]
    XComponent,
    /// Every edge of every axis.
    AllEdges,
}

/// `(L1, Linf)` of `field - reference`; L1 is the mean absolute error.
pub fn errors(field: &CoarseField, reference: &CoarseField, norm: ErrorNorm) -> (f64, f64) {
    let axes = match norm {
        ErrorNorm::XComponent => 0..1,
        ErrorNorm::AllEdges => 0..3,
    };
    let mut l1 = 0.0;
    let mut li: f64 = 0.0;
    let mut count = 0usize;
    for a in axes {
        for (x, y) in field.e[a].iter().zip(&reference.e[a]) {
            let d = (x - y).abs();
            l1 += d;
            li = li.max(d);
            count += 1;
        }
    }
    (l1 / count as f64, li)
}

/// One row of a prolongation table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub mode: ProlongMode,
    pub order: usize,
    pub n_coarse: usize,
    pub l1: f64,
    pub l1_order: Option<f64>,
    pub linf: f64,
    pub linf_order: Option<f64>,
    pub max_circulation: f64,
}

/// Prolongs the table potential from each `n^3` coarse mesh and compares with
/// the potential differenced on the fine mesh.
pub fn prolong_table(mode: ProlongMode, order: usize, sizes: &[usize]) -> Result<Vec<TableRow>> {
    prolong_table_with(mode, order, sizes, Limiter::Linear, ErrorNorm::XComponent)
}

pub fn prolong_table_with(
    mode: ProlongMode,
    order: usize,
    sizes: &[usize],
    lim: Limiter,
    norm: ErrorNorm,
) -> Result<Vec<TableRow>> {
    let mut rows: Vec<TableRow> = Vec::new();
    for &nc in sizes {
        let coarse = init_gradient_field(Mesh3::cube(nc, 0.0, 1.0, Boundary::Periodic)?)?;
        let fine = prolong_field_with(&coarse, order, mode, lim)?.fine;
        let exact = init_gradient_field(fine.mesh)?;
        let (l1, linf) = errors(&fine, &exact, norm);
        let prev = rows.last();
        let rate = |e0: f64, e1: f64, n0: usize| (e0 / e1).ln() / (nc as f64 / n0 as f64).ln();
        rows.push(TableRow {
            mode,
            order,
            n_coarse: nc,
            l1,
            l1_order: prev.map(|r| rate(r.l1, l1, r.n_coarse)),
            linf,
            linf_order: prev.map(|r| rate(r.linf, linf, r.n_coarse)),
            max_circulation: fine.max_circulation(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// 2D pipeline

/// Edge means on a periodic 2D mesh, `e[a]` indexed by start vertex `i + n0 j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseField2 {
    pub mesh: Mesh2,
    pub e: [Vec<f64>; 2],
}

impl CoarseField2 {
    pub fn from_potential(mesh: Mesh2, phi: impl Fn(f64, f64) -> f64) -> Result<Self> {
        require_periodic(&mesh)?;
        let n = mesh.dims;
        let vert = |i: usize, j: usize| {
            phi(mesh.origin[0] + i as f64 * mesh.spacing[0], mesh.origin[1] + j as f64 * mesh.spacing[1])
        };
        let mut e = [vec![0.0; n[0] * n[1]], vec![0.0; n[0] * n[1]]];
        for j in 0..n[1] {
            for i in 0..n[0] {
                let v0 = vert(i, j);
                e[0][i + n[0] * j] = (vert(i + 1, j) - v0) / mesh.spacing[0];
                e[1][i + n[0] * j] = (vert(i, j + 1) - v0) / mesh.spacing[1];
            }
        }
        Ok(CoarseField2 { mesh, e })
    }

    #[inline]
    fn id(&self, i: isize, j: isize) -> usize {
        let n = self.mesh.dims;
        wrap(i, n[0]) + n[0] * wrap(j, n[1])
    }

    pub fn circulation(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i as isize, j as isize);
        self.e[0][self.id(i, j)] - self.e[0][self.id(i, j + 1)] + self.e[1][self.id(i + 1, j)]
            - self.e[1][self.id(i, j)]
    }

    pub fn max_circulation(&self) -> f64 {
        let n = self.mesh.dims;
        let mut m: f64 = 0.0;
        for j in 0..n[1] {
            for i in 0..n[0] {
                m = m.max(self.circulation(i, j).abs());
            }
        }
        m
    }
}

/// Builds the touch-up inputs of every coarse zone of a 2D field from FV
/// WENO values of the zone averages.
pub fn prolong_targets_2d(coarse: &CoarseField2, order: usize, lim: Limiter) -> Result<Vec<TouchUpTargets2D>> {
    require_periodic(&coarse.mesh)?;
    check_order(order, 2, 4)?;
    let n = coarse.mesh.dims;
    let r = weno::radius(order);
    let w = 2 * r + 1;
    let line = |arr: &[f64], i: isize, j: isize, axis: usize| -> [f64; 4] {
        let mut buf = [0.0; 5];
        for (k, o) in (-(r as isize)..=r as isize).enumerate() {
            buf[k] = if axis == 0 { arr[coarse.id(i + o, j)] } else { arr[coarse.id(i, j + o)] };
        }
        weno::reconstruct(&buf[..w], order, lim)
    };
    let total = n[0] * n[1];
    let ij = |z: usize| ((z % n[0]) as isize, (z / n[0]) as isize);
    let m: [Vec<[f64; 4]>; 2] = [0, 1].map(|a| (0..total).map(|z| { let (i, j) = ij(z); line(&coarse.e[a], i, j, a) }).collect());
    let circ: Vec<f64> = (0..total).map(|z| { let (i, j) = ij(z); coarse.circulation(i as usize, j as usize) }).collect();
    let curl_free = circ.iter().all(|c| c.abs() < 1e-12);
    let mut r0 = [[0.0; 5]; 5];
    let avg: Vec<[f64; 2]> = (0..total)
        .map(|z| {
            let (i, j) = ij(z);
            let em = |a: usize, di: isize, dj: isize| {
                let mm = m[a][coarse.id(i + di, j + dj)];
                let mut out = [mm[0], mm[1], mm[2], mm[3]];
                for k in order..4 {
                    out[k] = 0.0;
                }
                out
            };
            let e = EdgeMoments2D { x: [em(0, 0, 0), em(0, 0, 1)], y: [em(1, 0, 0), em(1, 1, 0)] };
            let cm = if curl_free {
                CurlMoments2D::default()
            } else {
                let ro = weno::radius(order) as isize;
                for dj in -ro..=ro {
                    for di in -ro..=ro {
                        r0[(dj + ro) as usize][(di + ro) as usize] = circ[coarse.id(i + di, j + dj)];
                    }
                }
                let full = recon2d::circulation_moments_fv(order, &r0, lim).expect("order checked");
                CurlMoments2D { x: full.x, y: full.y, ..Default::default() }
            };
            recon2d::zone_average2d(order, &e, &cm)
        })
        .collect();
    let ax: Vec<f64> = avg.iter().map(|v| v[0]).collect();
    let ay: Vec<f64> = avg.iter().map(|v| v[1]).collect();
    // x-halves at y = -1/2, 0, 1/2 of each zone, and y-halves at x = ...
    let fvx: Vec<[[f64; 3]; 2]> = {
        let h: Vec<[f64; 2]> = (0..total).map(|z| { let (i, j) = ij(z); let mm = line(&ax, i, j, 0); [legendre::half_mean(&mm, false), legendre::half_mean(&mm, true)] }).collect();
        (0..total)
            .map(|z| {
                let (i, j) = ij(z);
                [0, 1].map(|s| {
                    let col: Vec<f64> = h.iter().map(|v| v[s]).collect();
                    let mm = line(&col, i, j, 1);
                    [legendre::eval(&mm, -0.5), legendre::eval(&mm, 0.0), legendre::eval(&mm, 0.5)]
                })
            })
            .collect()
    };
    let fvy: Vec<[[f64; 3]; 2]> = {
        let h: Vec<[f64; 2]> = (0..total).map(|z| { let (i, j) = ij(z); let mm = line(&ay, i, j, 1); [legendre::half_mean(&mm, false), legendre::half_mean(&mm, true)] }).collect();
        (0..total)
            .map(|z| {
                let (i, j) = ij(z);
                [0, 1].map(|s| {
                    let row: Vec<f64> = h.iter().map(|v| v[s]).collect();
                    let mm = line(&row, i, j, 0);
                    [legendre::eval(&mm, -0.5), legendre::eval(&mm, 0.0), legendre::eval(&mm, 0.5)]
                })
            })
            .collect()
    };
    Ok((0..total)
        .map(|z| {
            let (i, j) = ij(z);
            let mut t = TouchUpTargets2D::default();
            for s in 0..2 {
                t.vx[0][s] = legendre::half_mean(&m[0][coarse.id(i, j)], s == 1);
                t.vx[1][s] = legendre::half_mean(&m[0][coarse.id(i, j + 1)], s == 1);
                t.vy[0][s] = legendre::half_mean(&m[1][coarse.id(i, j)], s == 1);
                t.vy[1][s] = legendre::half_mean(&m[1][coarse.id(i + 1, j)], s == 1);
            }
            t.fv = [fvx[z][0][1], fvx[z][1][1], fvy[z][0][1], fvy[z][1][1]];
            let c0 = circ[z];
            let gu = weno::reconstruct(&[circ[coarse.id(i - 1, j)], c0, circ[coarse.id(i + 1, j)]], 2, lim)[1];
            let gv = weno::reconstruct(&[circ[coarse.id(i, j - 1)], c0, circ[coarse.id(i, j + 1)]], 2, lim)[1];
            t.r = [
                quadrant_target(c0, gu, gv, -1.0, -1.0),
                quadrant_target(c0, gu, gv, 1.0, -1.0),
                quadrant_target(c0, gu, gv, -1.0, 1.0),
            ];
            t
        })
        .collect())
}

/// 2D prolongation by 2 (Naive or TouchUp).
pub fn prolong_field_2d(coarse: &CoarseField2, order: usize, mode: ProlongMode) -> Result<CoarseField2> {
    if mode == ProlongMode::ExactRecon {
        return Err(Error::InvalidParameter("2D prolongation supports naive and touchup modes".into()));
    }
    let targets = prolong_targets_2d(coarse, order, Limiter::Linear)?;
    let n = coarse.mesh.dims;
    let nf = [2 * n[0], 2 * n[1]];
    let mesh = Mesh2::new(nf, [coarse.mesh.spacing[0] / 2.0, coarse.mesh.spacing[1] / 2.0], coarse.mesh.origin, Boundary::Periodic)?;
    let mut e = [vec![0.0; nf[0] * nf[1]], vec![0.0; nf[0] * nf[1]]];
    for (z, t) in targets.iter().enumerate() {
        let (i, j) = (z % n[0], z / n[0]);
        let vals = if mode == ProlongMode::TouchUp { touchup2d(t).values } else { t.fv };
        let (fi, fj) = (2 * i, 2 * j);
        for s in 0..2 {
            e[0][(fi + s) + nf[0] * fj] = t.vx[0][s];
            e[0][(fi + s) + nf[0] * (fj + 1)] = vals[s];
            e[1][fi + nf[0] * (fj + s)] = t.vy[0][s];
            e[1][(fi + 1) + nf[0] * (fj + s)] = vals[2 + s];
        }
    }
    Ok(CoarseField2 { mesh, e })
}
