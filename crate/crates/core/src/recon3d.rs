//! Curl-free and curl-preserving reconstruction in a 3D zone, orders 1 to 3.
//!
//! Everything is written once in a cyclic frame. For component `a` the other
//! two axes are `b = a+1` and `c = a+2` (mod 3), so x uses (y, z), y uses
//! (z, x) and z uses (x, y). The four edges carrying component `a` are
//! labelled by their position in the `(b, c)` plane:
//!
//! | label | b    | c    |
//! |-------|------|------|
//! | 1     | -1/2 | -1/2 |
//! | 2     | +1/2 | -1/2 |
//! | 3     | -1/2 | +1/2 |
//! | 4     | +1/2 | +1/2 |
//!
//! With this map the circulation of the `a = +1/2` face is
//! `V_b^3 - V_b^4 + V_c^4 - V_c^2`, so for x: `V_y^3 + V_z^4 - V_y^4 - V_z^2`.
//! The face tests pin the map down.

use crate::error::{check_order, check_ref, Error, Result};
use crate::legendre;

/// `[mean, P1, P2]` moments of the twelve edges, `e[axis][label - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeMoments3D {
    pub e: [[[f64; 3]; 4]; 3],
}

/// Discrete circulations of the six faces with outward `+axis` normals:
/// `lo[a]` on `a = -1/2`, `hi[a]` on `a = +1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaceCirculations {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl FaceCirculations {
    /// `sum_a (hi[a] - lo[a])`, zero for any edge data.
    pub fn dependency_residual(&self) -> f64 {
        (0..3).map(|a| self.hi[a] - self.lo[a]).sum()
    }
}

/// Free moments of one curl component. Quadratic diagonal terms use `P2`
/// except along the component's own axis, where the term is `(t^2 - 1/4)` so
/// that face averages stay equal to the face circulations.
///
/// The constant and the own-axis linear term are fixed by the edge means and
/// must be left at zero; so must the own-axis diagonal term unless it already
/// satisfies the divergence constraint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurlComponent {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub yz: f64,
    pub xz: f64,
}

impl CurlComponent {
    pub fn lin(&self, q: usize) -> f64 {
        [self.x, self.y, self.z][q]
    }

    pub fn diag(&self, q: usize) -> f64 {
        [self.xx, self.yy, self.zz][q]
    }

    /// Mixed coefficient of `t_p t_q`, `p != q`.
    pub fn mixed(&self, p: usize, q: usize) -> f64 {
        match (p.min(q), p.max(q)) {
            (0, 1) => self.xy,
            (1, 2) => self.yz,
            (0, 2) => self.xz,
            _ => panic!("mixed index"),
        }
    }

    fn set_diag(&mut self, q: usize, v: f64) {
        match q {
            0 => self.xx = v,
            1 => self.yy = v,
            _ => self.zz = v,
        }
    }

    fn set_lin(&mut self, q: usize, v: f64) {
        match q {
            0 => self.x = v,
            1 => self.y = v,
            _ => self.z = v,
        }
    }

    fn degree_values(&self) -> [(&'static str, f64, usize); 9] {
        [
            ("x", self.x, 1),
            ("y", self.y, 1),
            ("z", self.z, 1),
            ("xx", self.xx, 2),
            ("yy", self.yy, 2),
            ("zz", self.zz, 2),
            ("xy", self.xy, 2),
            ("yz", self.yz, 2),
            ("xz", self.xz, 2),
        ]
    }
}

/// Curl moments `r[a]` for `R^x, R^y, R^z`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurlMoments3D {
    pub r: [CurlComponent; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    CurlFree,
    #[default]
    CurlPreserving,
}

/// Correction coefficients of one component in its cyclic frame. With
/// `B(t) = 1 - 4t^2`, the correction is
/// `B(b) (k0 + k2 c + k4 b + k6 bc + k8 a) + B(c) (k1 + k3 b + k5 c + k7 bc + k9 a)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coeffs3D {
    pub k: [f64; 10],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recon3D {
    pub order: usize,
    pub mode: Mode,
    pub edges: EdgeMoments3D,
    /// Completed curl moments, including the own-axis linear and diagonal
    /// terms.
    pub curl: CurlMoments3D,
    pub coeffs: [Coeffs3D; 3],
}

#[inline]
fn nb(a: usize) -> usize {
    (a + 1) % 3
}

#[inline]
fn nc(a: usize) -> usize {
    (a + 2) % 3
}

/// Constant term of `R^a` and its own-axis slope, from edge means.
#[inline]
pub fn fixed_curl_terms(e: &EdgeMoments3D, a: usize) -> (f64, f64) {
    let vb = &e.e[nb(a)];
    let vc = &e.e[nc(a)];
    let c0 = 0.5 * (vb[0][0] - vb[1][0] + vb[2][0] - vb[3][0] - vc[0][0] - vc[1][0] + vc[2][0] + vc[3][0]);
    let l = -vb[0][0] + vb[1][0] + vb[2][0] - vb[3][0] + vc[0][0] - vc[1][0] - vc[2][0] + vc[3][0];
    (c0, l)
}

/// Six face circulations from the edge means.
pub fn face_circulations(e: &EdgeMoments3D) -> FaceCirculations {
    let mut f = FaceCirculations::default();
    for a in 0..3 {
        let vb = &e.e[nb(a)];
        let vc = &e.e[nc(a)];
        f.lo[a] = vb[0][0] - vb[1][0] + vc[2][0] - vc[0][0];
        f.hi[a] = vb[2][0] - vb[3][0] + vc[3][0] - vc[1][0];
    }
    f
}

fn check_edges(order: usize, e: &EdgeMoments3D) -> Result<()> {
    const NAMES: [&str; 3] = ["edge mean", "edge P1 moment", "edge P2 moment"];
    for axis in &e.e {
        for m in axis {
            for k in order..3 {
                if m[k] != 0.0 {
                    return Err(Error::MomentAboveOrder { name: NAMES[k], order });
                }
            }
        }
    }
    Ok(())
}

fn input_scale(e: &EdgeMoments3D, c: &CurlMoments3D) -> f64 {
    let mut s: f64 = 1.0;
    for axis in &e.e {
        for m in axis {
            for v in m {
                s = s.max(v.abs());
            }
        }
    }
    for comp in &c.r {
        for (_, v, _) in comp.degree_values() {
            s = s.max(v.abs());
        }
    }
    s
}

/// Fills in the own-axis linear and diagonal curl terms. Rejects moments
/// above the order, a caller-set own-axis linear term, and an own-axis
/// diagonal term that contradicts the divergence constraint.
pub fn complete_curl(order: usize, e: &EdgeMoments3D, curl: &CurlMoments3D) -> Result<CurlMoments3D> {
    let mut out = *curl;
    for (a, comp) in curl.r.iter().enumerate() {
        for (name, v, deg) in comp.degree_values() {
            if deg >= order && v != 0.0 {
                return Err(Error::MomentAboveOrder { name, order });
            }
        }
        if comp.lin(a) != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "own-axis linear moment of curl component {a} is fixed by the edge means"
            )));
        }
    }
    let scale = input_scale(e, curl);
    for a in 0..3 {
        let (_, l) = fixed_curl_terms(e, a);
        out.r[a].set_lin(a, l);
        if order >= 3 {
            let (b, c) = (nb(a), nc(a));
            let want = -0.5 * (curl.r[b].mixed(a, b) + curl.r[c].mixed(a, c));
            let given = curl.r[a].diag(a);
            if given != 0.0 && (given - want).abs() > 1e-12 * scale {
                return Err(Error::DivergenceConstraint { residual: given - want });
            }
            out.r[a].set_diag(a, want);
        }
    }
    Ok(out)
}

/// Reconstructs a zone at order 1..=3.
pub fn reconstruct3d(order: usize, edges: &EdgeMoments3D, curl: &CurlMoments3D, mode: Mode) -> Result<Recon3D> {
    check_order(order, 1, 3)?;
    check_edges(order, edges)?;
    if mode == Mode::CurlFree {
        for comp in &curl.r {
            for (name, v, _) in comp.degree_values() {
                if v != 0.0 {
                    return Err(Error::NotCurlFree { name, value: v });
                }
            }
        }
    }
    let full = complete_curl(order, edges, curl)?;
    let mut coeffs = [Coeffs3D::default(); 3];
    if order >= 2 {
        for a in 0..3 {
            coeffs[a] = component_coeffs(order, edges, &full, a);
        }
    }
    Ok(Recon3D { order, mode, edges: *edges, curl: full, coeffs })
}

fn component_coeffs(order: usize, e: &EdgeMoments3D, r: &CurlMoments3D, a: usize) -> Coeffs3D {
    let (b, c) = (nb(a), nc(a));
    let vb = &e.e[b];
    let vc = &e.e[c];
    let rb = &r.r[b];
    let rc = &r.r[c];
    let d = |v: &[[f64; 3]; 4], i: usize, k: usize| v[i][k];
    let mut k = [0.0; 10];
    k[0] = (2.0 * rc.lin(b) + d(vb, 0, 1) + d(vb, 1, 1) - d(vb, 2, 1) - d(vb, 3, 1)) / 16.0;
    k[1] = -(2.0 * rb.lin(c) - d(vc, 0, 1) + d(vc, 1, 1) - d(vc, 2, 1) + d(vc, 3, 1)) / 16.0;
    k[2] = (rc.mixed(b, c) - d(vb, 0, 1) + d(vb, 1, 1) + d(vb, 2, 1) - d(vb, 3, 1)) / 8.0;
    k[3] = -(rb.mixed(b, c) + d(vc, 0, 1) - d(vc, 1, 1) - d(vc, 2, 1) + d(vc, 3, 1)) / 8.0;
    if order >= 3 {
        k[4] = (2.0 * rc.diag(b) + d(vb, 0, 2) + d(vb, 1, 2) - d(vb, 2, 2) - d(vb, 3, 2)) / 24.0;
        k[5] = -(2.0 * rb.diag(c) - d(vc, 0, 2) + d(vc, 1, 2) - d(vc, 2, 2) + d(vc, 3, 2)) / 24.0;
        k[6] = -(d(vb, 0, 2) - d(vb, 1, 2) - d(vb, 2, 2) + d(vb, 3, 2)) / 12.0;
        k[7] = -(d(vc, 0, 2) - d(vc, 1, 2) - d(vc, 2, 2) + d(vc, 3, 2)) / 12.0;
        k[8] = rc.mixed(a, b) / 16.0;
        k[9] = -rb.mixed(a, c) / 16.0;
    }
    Coeffs3D { k }
}

impl Recon3D {
    pub fn input_scale(&self) -> f64 {
        input_scale(&self.edges, &self.curl)
    }

    /// Value of component `a` and its derivatives along its `b` and `c`
    /// axes, at frame coordinates `(ta, tb, tc)`.
    #[inline]
    fn component(&self, a: usize, ta: f64, tb: f64, tc: f64) -> (f64, f64, f64) {
        let edges = &self.edges.e[a];
        let k = &self.coeffs[a].k;
        let (mb, pb, mc, pc) = (0.5 - tb, 0.5 + tb, 0.5 - tc, 0.5 + tc);
        let bil = [mb * mc, pb * mc, mb * pc, pb * pc];
        let dbil_b = [-mc, mc, -pc, pc];
        let dbil_c = [-mb, -pb, mb, pb];
        let mut v = 0.0;
        let mut db = 0.0;
        let mut dc = 0.0;
        for i in 0..4 {
            let m = &edges[i];
            let ev = m[0] + m[1] * ta + m[2] * (ta * ta - 1.0 / 12.0);
            v += ev * bil[i];
            db += ev * dbil_b[i];
            dc += ev * dbil_c[i];
        }
        let bb = 1.0 - 4.0 * tb * tb;
        let bc = 1.0 - 4.0 * tc * tc;
        let p = k[0] + k[2] * tc + k[4] * tb + k[6] * tb * tc + k[8] * ta;
        let q = k[1] + k[3] * tb + k[5] * tc + k[7] * tb * tc + k[9] * ta;
        v += bb * p + bc * q;
        db += -8.0 * tb * p + bb * (k[4] + k[6] * tc) + bc * (k[3] + k[7] * tc);
        dc += bb * (k[2] + k[6] * tb) - 8.0 * tc * q + bc * (k[5] + k[7] * tb);
        (v, db, dc)
    }

    #[inline]
    pub fn eval_unchecked(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for a in 0..3 {
            out[a] = self.component(a, p[a], p[nb(a)], p[nc(a)]).0;
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
        check_ref(x)?;
        check_ref(y)?;
        check_ref(z)?;
        Ok(self.eval_unchecked([x, y, z]))
    }

    pub fn curl_unchecked(&self, p: [f64; 3]) -> [f64; 3] {
        // parts[a] = (V^a, dV^a/d t_b, dV^a/d t_c)
        let mut parts = [(0.0, 0.0, 0.0); 3];
        for a in 0..3 {
            parts[a] = self.component(a, p[a], p[nb(a)], p[nc(a)]);
        }
        let mut out = [0.0; 3];
        for a in 0..3 {
            let (b, c) = (nb(a), nc(a));
            // V^c's frame is (c, a, b): d/dt_b is its third slot.
            // V^b's frame is (b, c, a): d/dt_c is its second slot.
            out[a] = parts[c].2 - parts[b].1;
        }
        out
    }

    pub fn curl(&self, x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
        check_ref(x)?;
        check_ref(y)?;
        check_ref(z)?;
        Ok(self.curl_unchecked([x, y, z]))
    }

    /// The target curl polynomial.
    pub fn target_curl(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for a in 0..3 {
            let (c0, _) = fixed_curl_terms(&self.edges, a);
            let r = &self.curl.r[a];
            let mut s = c0;
            for q in 0..3 {
                s += r.lin(q) * p[q];
                let quad = if q == a { p[q] * p[q] - 0.25 } else { legendre::p(2, p[q]) };
                s += r.diag(q) * quad;
            }
            s += r.xy * p[0] * p[1] + r.yz * p[1] * p[2] + r.xz * p[0] * p[2];
            out[a] = s;
        }
        out
    }

    pub fn zone_average(&self) -> [f64; 3] {
        zone_average3d(&self.edges, &self.curl)
    }
}

pub fn eval3d(r: &Recon3D, x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
    r.eval(x, y, z)
}

pub fn curl3d(r: &Recon3D, x: f64, y: f64, z: f64) -> Result<[f64; 3]> {
    r.curl(x, y, z)
}

/// Closed-form zone averages:
/// `<V^a> = sum_i V_a^i / 4 + (R^c_b - R^b_c)/12`
/// `      + (dV_b^1 + dV_b^2 - dV_b^3 - dV_b^4 + dV_c^1 - dV_c^2 + dV_c^3 - dV_c^4)/24`.
/// Exact for the reconstruction at every order; unset moments count as zero.
pub fn zone_average3d(e: &EdgeMoments3D, curl: &CurlMoments3D) -> [f64; 3] {
    let mut out = [0.0; 3];
    for a in 0..3 {
        let (b, c) = (nb(a), nc(a));
        let va = &e.e[a];
        let vb = &e.e[b];
        let vc = &e.e[c];
        out[a] = 0.25 * (va[0][0] + va[1][0] + va[2][0] + va[3][0])
            + (curl.r[c].lin(b) - curl.r[b].lin(c)) / 12.0
            + (vb[0][1] + vb[1][1] - vb[2][1] - vb[3][1] + vc[0][1] - vc[1][1] + vc[2][1] - vc[3][1]) / 24.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_face_circulations() {
        let mut e = EdgeMoments3D::default();
        e.e[1][2][0] = 1.0;
        let f = face_circulations(&e);
        assert_eq!(f.hi, [1.0, 0.0, 0.0]);
        assert_eq!(f.lo, [0.0, 0.0, 1.0]);
        assert_eq!(f.dependency_residual(), 0.0);
    }

    #[test]
    fn uniform_field_order1() {
        let mut e = EdgeMoments3D::default();
        for i in 0..4 {
            e.e[0][i][0] = 1.0;
        }
        let r = reconstruct3d(1, &e, &CurlMoments3D::default(), Mode::CurlFree).unwrap();
        assert_eq!(r.eval(0.3, -0.2, 0.1).unwrap(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_order_and_constraint_violations() {
        let e = EdgeMoments3D::default();
        let c = CurlMoments3D::default();
        assert!(matches!(reconstruct3d(4, &e, &c, Mode::CurlFree), Err(Error::InvalidOrder { .. })));
        let mut c2 = c;
        c2.r[0].xx = 1.0;
        assert!(matches!(reconstruct3d(3, &e, &c2, Mode::CurlPreserving), Err(Error::DivergenceConstraint { .. })));
        let mut c3 = c;
        c3.r[0].y = 1.0;
        assert!(matches!(reconstruct3d(2, &e, &c3, Mode::CurlFree), Err(Error::NotCurlFree { .. })));
        let mut c4 = c;
        c4.r[2].z = 1.0;
        assert!(matches!(reconstruct3d(2, &e, &c4, Mode::CurlPreserving), Err(Error::InvalidParameter(_))));
    }
}
