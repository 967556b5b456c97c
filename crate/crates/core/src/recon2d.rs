//! Curl-free and curl-preserving reconstruction of an edge-collocated vector
//! field inside a 2D zone, orders 1 through 4.
//!
//! Coordinates are reference coordinates `(x, y)` in `[-1/2, 1/2]^2`. The
//! field on each edge is the modal polynomial `V + dV P1 + ddV P2 + dddV P3`
//! along that edge. The zone polynomial is the bilinear blend of the edge
//! polynomials plus correction terms that vanish on the edges carrying the
//! same component. Their coefficients make the curl of the reconstruction
//! equal to the prescribed curl polynomial
//!
//! `R = R0 + Rx x + Ry y + Rxx P2(x) + Ryy P2(y) + Rxy xy`
//! `    + Rxxx P3(x) + Ryyy P3(y) + Rxxy y P2(x) + Rxyy x P2(y)`,
//!
//! where `R0 = V_x^1 - V_x^2 + V_y^2 - V_y^1` is the discrete circulation.

use crate::error::{check_order, check_ref, Error, Result};
use crate::legendre;
use crate::weno::{self, Limiter};

/// Modal moments of the four edges of a zone.
///
/// `x[0]`, `x[1]` are the bottom and top x-edges (`V_x^1`, `V_x^2`); `y[0]`,
/// `y[1]` the left and right y-edges (`V_y^1`, `V_y^2`). Each entry is
/// `[mean, P1, P2, P3]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgeMoments2D {
    pub x: [[f64; 4]; 2],
    pub y: [[f64; 4]; 2],
}

/// Higher modal moments of the curl. The mean `R0` is not stored; it always
/// comes from the edge means.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurlMoments2D {
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub xxx: f64,
    pub yyy: f64,
    pub xxy: f64,
    pub xyy: f64,
}

/// Zone-centered modes used at fourth order: `m10` is the coefficient of
/// `x P2(y)` in `V^x`, `m9` the coefficient of `y P2(x)` in `V^y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZoneModes2D {
    pub m10: f64,
    pub m9: f64,
}

/// How the fourth-order zone-centered coefficients are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// Honors both zone modes; the curl matches through cubic order and the
    /// two quartic curl modes are minimized in least squares.
    #[default]
    LeastSquares,
    /// Matches the curl exactly; the zone modes enter only through their mean.
    Symmetric,
}

/// Correction coefficients. `a_*` multiply terms of `V^x` (all carrying the
/// factor `1 - 4y^2`), `b_*` terms of `V^y` (factor `1 - 4x^2`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coeffs2D {
    /// `(1 - 4y^2)`
    pub a_yy: f64,
    /// `y (1 - 4y^2)`
    pub a_yyy: f64,
    /// `y^2 (1 - 4y^2)`
    pub a_yyyy: f64,
    /// `x^2 (1 - 4y^2)`
    pub a_xxy: f64,
    /// `x (1 - 4y^2)`, third order only
    pub a_xyy: f64,
    /// `x y^2 (1 - 4y^2)`
    pub a_xyyy: f64,
    /// `x (1 - 4x^2)(1 - 4y^2)`
    pub a_bub: f64,
    /// `(1 - 4x^2)`
    pub b_xx: f64,
    /// `x (1 - 4x^2)`
    pub b_xxx: f64,
    /// `x^2 (1 - 4x^2)`
    pub b_xxxx: f64,
    /// `y^2 (1 - 4x^2)`
    pub b_xyy: f64,
    /// `y (1 - 4x^2)`, third order only
    pub b_xxy: f64,
    /// `x^2 y (1 - 4x^2)`
    pub b_xxyy: f64,
    /// `y (1 - 4y^2)(1 - 4x^2)`
    pub b_bub: f64,
}

/// A reconstructed zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recon2D {
    pub order: usize,
    pub edges: EdgeMoments2D,
    pub curl: CurlMoments2D,
    pub zone_modes: ZoneModes2D,
    pub coeffs: Coeffs2D,
}

fn check_edges(order: usize, e: &EdgeMoments2D) -> Result<()> {
    const NAMES: [&str; 4] = ["edge mean", "edge P1 moment", "edge P2 moment", "edge P3 moment"];
    for m in e.x.iter().chain(e.y.iter()) {
        for k in order..4 {
            if m[k] != 0.0 {
                return Err(Error::MomentAboveOrder { name: NAMES[k], order });
            }
        }
    }
    Ok(())
}

fn check_curl(order: usize, c: &CurlMoments2D) -> Result<()> {
    let by_degree: [(&'static str, f64, usize); 9] = [
        ("x", c.x, 1),
        ("y", c.y, 1),
        ("xx", c.xx, 2),
        ("yy", c.yy, 2),
        ("xy", c.xy, 2),
        ("xxx", c.xxx, 3),
        ("yyy", c.yyy, 3),
        ("xxy", c.xxy, 3),
        ("xyy", c.xyy, 3),
    ];
    for (name, v, deg) in by_degree {
        if deg >= order && v != 0.0 {
            return Err(Error::MomentAboveOrder { name, order });
        }
    }
    Ok(())
}

/// Reconstructs with the default fourth-order closure.
pub fn reconstruct2d(
    order: usize,
    edges: &EdgeMoments2D,
    curl: &CurlMoments2D,
    zone_modes: Option<ZoneModes2D>,
) -> Result<Recon2D> {
    reconstruct2d_with(order, edges, curl, zone_modes, Closure::default())
}

/// Reconstructs a zone of the given order (1..=4).
///
/// Zone modes are only meaningful at order 4; `None` means zero modes.
pub fn reconstruct2d_with(
    order: usize,
    edges: &EdgeMoments2D,
    curl: &CurlMoments2D,
    zone_modes: Option<ZoneModes2D>,
    closure: Closure,
) -> Result<Recon2D> {
    check_order(order, 1, 4)?;
    check_edges(order, edges)?;
    check_curl(order, curl)?;
    let zm = zone_modes.unwrap_or_default();
    if order < 4 && (zm.m10 != 0.0 || zm.m9 != 0.0) {
        return Err(Error::MomentAboveOrder { name: "zone mode", order });
    }
    let coeffs = coefficients(order, edges, curl, &zm, closure);
    Ok(Recon2D { order, edges: *edges, curl: *curl, zone_modes: zm, coeffs })
}

fn coefficients(
    order: usize,
    e: &EdgeMoments2D,
    r: &CurlMoments2D,
    zm: &ZoneModes2D,
    closure: Closure,
) -> Coeffs2D {
    let mut c = Coeffs2D::default();
    if order < 2 {
        return c;
    }
    let (x1, x2, y1, y2) = (&e.x[0], &e.x[1], &e.y[0], &e.y[1]);
    if order >= 3 {
        c.a_yyy = (r.yy + y1[2] - y2[2]) / 12.0;
        c.b_xxx = (-r.xx + x1[2] - x2[2]) / 12.0;
    }
    if order == 3 {
        c.a_xyy = r.xy / 16.0;
        c.b_xxy = -r.xy / 16.0;
    }
    if order >= 4 {
        c.a_yyyy = (r.yyy + y1[3] - y2[3]) / 16.0;
        c.b_xxxx = (-r.xxx + x1[3] - x2[3]) / 16.0;
        c.a_xxy = r.xxy / 8.0;
        c.b_xyy = -r.xyy / 8.0;
        let vbar = -35.0 * (zm.m10 + zm.m9) / 132.0;
        match closure {
            Closure::LeastSquares => {
                let p = (25.0 * r.xy - 70.0 * zm.m10 + 70.0 * zm.m9) / 384.0;
                c.a_bub = vbar + p;
                c.b_bub = vbar - p;
                c.a_xyyy = 56.0 * vbar / 5.0 + 7.0 * (17.0 * zm.m10 + 7.0 * zm.m9) / 24.0
                    + 35.0 * r.xy / 48.0;
                c.b_xxyy = 56.0 * vbar / 5.0 + 7.0 * (7.0 * zm.m10 + 17.0 * zm.m9) / 24.0
                    - 35.0 * r.xy / 48.0;
            }
            Closure::Symmetric => {
                c.a_bub = vbar + r.xy / 8.0;
                c.b_bub = vbar - r.xy / 8.0;
                c.a_xyyy = -2.0 * c.b_bub;
                c.b_xxyy = -2.0 * c.a_bub;
            }
        }
    }
    c.a_yy = (r.y + y1[1] - y2[1]) / 8.0 - c.a_yyyy / 20.0 - c.a_xxy / 12.0;
    c.b_xx = (-r.x + x1[1] - x2[1]) / 8.0 - c.b_xxxx / 20.0 - c.b_xyy / 12.0;
    c
}

impl Recon2D {
    /// Discrete circulation `R0`.
    pub fn r0(&self) -> f64 {
        circulation(&self.edges)
    }

    /// `max(1, max |input moment|)`, the scale for absolute tolerances.
    pub fn input_scale(&self) -> f64 {
        let e = &self.edges;
        let r = &self.curl;
        let mut s: f64 = 1.0;
        for m in e.x.iter().chain(e.y.iter()) {
            for v in m {
                s = s.max(v.abs());
            }
        }
        for v in [r.x, r.y, r.xx, r.yy, r.xy, r.xxx, r.yyy, r.xxy, r.xyy, self.zone_modes.m10, self.zone_modes.m9] {
            s = s.max(v.abs());
        }
        s
    }

    /// Field value without domain checks.
    #[inline]
    pub fn eval_unchecked(&self, x: f64, y: f64) -> [f64; 2] {
        let e = &self.edges;
        let c = &self.coeffs;
        let bx = 1.0 - 4.0 * x * x;
        let by = 1.0 - 4.0 * y * y;
        let ex1 = legendre::eval(&e.x[0], x);
        let ex2 = legendre::eval(&e.x[1], x);
        let ey1 = legendre::eval(&e.y[0], y);
        let ey2 = legendre::eval(&e.y[1], y);
        let vx = ex1 * (0.5 - y)
            + ex2 * (0.5 + y)
            + by * (c.a_yy
                + y * (c.a_yyy + y * c.a_yyyy)
                + x * (c.a_xyy + x * c.a_xxy + y * y * c.a_xyyy + bx * c.a_bub));
        let vy = ey1 * (0.5 - x)
            + ey2 * (0.5 + x)
            + bx * (c.b_xx
                + x * (c.b_xxx + x * c.b_xxxx)
                + y * (c.b_xxy + y * c.b_xyy + x * x * c.b_xxyy + by * c.b_bub));
        [vx, vy]
    }

    /// Field value at reference coordinates.
    pub fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        check_ref(x)?;
        check_ref(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    /// `dV^y/dx - dV^x/dy` without domain checks.
    pub fn curl_unchecked(&self, x: f64, y: f64) -> f64 {
        let e = &self.edges;
        let c = &self.coeffs;
        let bx = 1.0 - 4.0 * x * x;
        let by = 1.0 - 4.0 * y * y;
        // d/dx V^y
        let qy = c.b_xx + x * (c.b_xxx + x * c.b_xxxx) + y * (c.b_xxy + y * c.b_xyy + x * x * c.b_xxyy + by * c.b_bub);
        let dqy = c.b_xxx + 2.0 * x * c.b_xxxx + 2.0 * x * y * c.b_xxyy;
        let dvy_dx = legendre::eval(&e.y[1], y) - legendre::eval(&e.y[0], y) - 8.0 * x * qy + bx * dqy;
        // d/dy V^x
        let qx = c.a_yy + y * (c.a_yyy + y * c.a_yyyy) + x * (c.a_xyy + x * c.a_xxy + y * y * c.a_xyyy + bx * c.a_bub);
        let dqx = c.a_yyy + 2.0 * y * c.a_yyyy + 2.0 * x * y * c.a_xyyy;
        let dvx_dy = legendre::eval(&e.x[1], x) - legendre::eval(&e.x[0], x) - 8.0 * y * qx + by * dqx;
        dvy_dx - dvx_dy
    }

    /// Curl at reference coordinates.
    pub fn curl(&self, x: f64, y: f64) -> Result<f64> {
        check_ref(x)?;
        check_ref(y)?;
        Ok(self.curl_unchecked(x, y))
    }

    /// The target curl polynomial evaluated at a point.
    pub fn target_curl(&self, x: f64, y: f64) -> f64 {
        let r = &self.curl;
        let p2x = legendre::p(2, x);
        let p2y = legendre::p(2, y);
        self.r0()
            + r.x * x
            + r.y * y
            + r.xx * p2x
            + r.yy * p2y
            + r.xy * x * y
            + r.xxx * legendre::p(3, x)
            + r.yyy * legendre::p(3, y)
            + r.xxy * y * p2x
            + r.xyy * x * p2y
    }

    /// Zone averages `(<V^x>, <V^y>)` in closed form.
    pub fn zone_average(&self) -> [f64; 2] {
        zone_average2d(self.order, &self.edges, &self.curl)
    }
}

/// Free-function form of [`Recon2D::eval`].
pub fn eval2d(recon: &Recon2D, x: f64, y: f64) -> Result<[f64; 2]> {
    recon.eval(x, y)
}

/// Free-function form of [`Recon2D::curl`].
pub fn curl2d(recon: &Recon2D, x: f64, y: f64) -> Result<f64> {
    recon.curl(x, y)
}

/// Discrete circulation `V_x^1 - V_x^2 + V_y^2 - V_y^1` of a zone.
#[inline]
pub fn circulation(e: &EdgeMoments2D) -> f64 {
    e.x[0][0] - e.x[1][0] + e.y[1][0] - e.y[0][0]
}

/// Closed-form zone averages of the reconstruction:
/// `<V^x> = (V_x^1 + V_x^2)/2 + (dV_y^1 - dV_y^2 + Ry)/12` and
/// `<V^y> = (V_y^1 + V_y^2)/2 + (dV_x^1 - dV_x^2 - Rx)/12`.
pub fn zone_average2d(order: usize, e: &EdgeMoments2D, r: &CurlMoments2D) -> [f64; 2] {
    let mut ax = 0.5 * (e.x[0][0] + e.x[1][0]);
    let mut ay = 0.5 * (e.y[0][0] + e.y[1][0]);
    if order >= 2 {
        ax += (e.y[0][1] - e.y[1][1] + r.y) / 12.0;
        ay += (e.x[0][1] - e.x[1][1] - r.x) / 12.0;
    }
    [ax, ay]
}

/// Curl moments from a `(2r+1) x (2r+1)` stencil of zone circulations, with
/// `r = weno::radius(order)`. `r0[j][i]` holds the zone at offset
/// `(i - r, j - r)`; the target zone is the center.
pub fn circulation_moments_fv(order: usize, r0: &[[f64; 5]; 5], limiter: Limiter) -> Result<CurlMoments2D> {
    check_order(order, 1, 4)?;
    let mut out = CurlMoments2D::default();
    if order == 1 {
        return Ok(out);
    }
    let r = weno::radius(order);
    let w = 2 * r + 1;
    let mut rows = [[0.0; 4]; 5];
    let mut cols = [[0.0; 4]; 5];
    let mut buf = [0.0; 5];
    for j in 0..w {
        rows[j] = weno::reconstruct(&r0[j][..w], order, limiter);
    }
    for i in 0..w {
        for j in 0..w {
            buf[j] = r0[j][i];
        }
        cols[i] = weno::reconstruct(&buf[..w], order, limiter);
    }
    let mx = rows[r];
    let my = cols[r];
    out.x = mx[1];
    out.y = my[1];
    if order >= 3 {
        out.xx = mx[2];
        out.yy = my[2];
        for j in 0..w {
            buf[j] = rows[j][1];
        }
        out.xy = weno::reconstruct(&buf[..w], order, limiter)[1];
    }
    if order >= 4 {
        out.xxx = mx[3];
        out.yyy = my[3];
        for j in 0..w {
            buf[j] = rows[j][2];
        }
        out.xxy = weno::reconstruct(&buf[..w], order, limiter)[1];
        for i in 0..w {
            buf[i] = cols[i][2];
        }
        out.xyy = weno::reconstruct(&buf[..w], order, limiter)[1];
    }
    Ok(out)
}

/// Zone modes for finite-volume use, from 3x3 stencils of zone averages of
/// `V^x` and `V^y` (`avg[j][i]` at offset `(i - 1, j - 1)`).
///
/// `m10` is the x-slope of the `P2(y)` coefficients of `<V^x>`, `m9` the
/// y-slope of the `P2(x)` coefficients of `<V^y>`; both central.
pub fn zone_modes_fv(avg_x: &[[f64; 3]; 3], avg_y: &[[f64; 3]; 3]) -> ZoneModes2D {
    let c2_col = |i: usize| 0.5 * (avg_x[2][i] - 2.0 * avg_x[1][i] + avg_x[0][i]);
    let c2_row = |j: usize| 0.5 * (avg_y[j][2] - 2.0 * avg_y[j][1] + avg_y[j][0]);
    ZoneModes2D {
        m10: 0.5 * (c2_col(2) - c2_col(0)),
        m9: 0.5 * (c2_row(2) - c2_row(0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order2_curl_example() {
        let curl = CurlMoments2D { x: 8.0, ..Default::default() };
        let r = reconstruct2d(2, &EdgeMoments2D::default(), &curl, None).unwrap();
        assert_eq!(r.coeffs.b_xx, -1.0);
        for (x, y) in [(0.1, 0.2), (-0.4, 0.33), (0.5, -0.5)] {
            assert!((r.curl(x, y).unwrap() - 8.0 * x).abs() < 1e-14);
        }
    }

    #[test]
    fn order3_eval_center() {
        let edges = EdgeMoments2D {
            y: [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, -12.0, 0.0]],
            ..Default::default()
        };
        let r = reconstruct2d(3, &edges, &CurlMoments2D::default(), None).unwrap();
        assert_eq!(r.coeffs.a_yyy, 1.0);
        let edges = EdgeMoments2D {
            y: [[0.0, 0.0, 0.0, 0.0], [0.0, -8.0, 0.0, 0.0]],
            ..Default::default()
        };
        let r = reconstruct2d(3, &edges, &CurlMoments2D::default(), None).unwrap();
        // V^y = -8 y (1/2 + x); a_yy = 1 and V^x(0,0) = a_yy
        assert_eq!(r.coeffs.a_yy, 1.0);
        assert_eq!(r.eval(0.0, 0.0).unwrap()[0], 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = EdgeMoments2D::default();
        let c = CurlMoments2D::default();
        assert!(matches!(reconstruct2d(5, &e, &c, None), Err(Error::InvalidOrder { .. })));
        assert!(matches!(reconstruct2d(0, &e, &c, None), Err(Error::InvalidOrder { .. })));
        let c2 = CurlMoments2D { xx: 1.0, ..Default::default() };
        assert!(matches!(reconstruct2d(2, &e, &c2, None), Err(Error::MomentAboveOrder { .. })));
        let mut e2 = e;
        e2.y[1][3] = 1.0;
        assert!(matches!(reconstruct2d(3, &e2, &c, None), Err(Error::MomentAboveOrder { .. })));
        let r = reconstruct2d(2, &e, &c, None).unwrap();
        assert!(matches!(r.eval(0.6, 0.0), Err(Error::OutOfZone { .. })));
    }

    #[test]
    fn fv_moments_of_linear_data() {
        let mut r0 = [[0.0; 5]; 5];
        for j in 0..3 {
            r0[j][..3].copy_from_slice(&[-2.5, 0.0, 2.5]);
        }
        let m = circulation_moments_fv(3, &r0, Limiter::Weno).unwrap();
        assert!((m.x - 2.5).abs() < 1e-12 && m.y.abs() < 1e-15 && m.xy.abs() < 1e-15);
    }
}
