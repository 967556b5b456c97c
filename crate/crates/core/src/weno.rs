//! One-dimensional central WENO reconstruction of modal moments from cell
//! (or edge) means.
//!
//! The result is the Legendre expansion `m[0] + m[1] P1 + m[2] P2 + m[3] P3`
//! of the reconstruction on the central cell, in undivided reference
//! coordinates. Order `k` keeps the moments of degree `< k`. Orders 2 and 3
//! combine a central quadratic with two one-sided linears; order 4 combines a
//! central quartic with three quadratics. Nonlinear weights are WENO-JS with
//! `EPS`.

/// Regularization in the nonlinear weights.
pub const EPS: f64 = 1e-12;

/// How the candidate polynomials are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Limiter {
    /// Nonlinear WENO-JS weights.
    #[default]
    Weno,
    /// The central (optimal) polynomial, unlimited.
    Linear,
}

/// Number of neighbors needed on each side for an order.
pub fn radius(order: usize) -> usize {
    match order {
        0 | 1 => 0,
        2 | 3 => 1,
        _ => 2,
    }
}

/// Smoothness indicator `sum_l int (d^l p)^2` of `c1 P1 + .. + c4 P4`.
#[inline]
pub fn smoothness(c1: f64, c2: f64, c3: f64, c4: f64) -> f64 {
    c1 * c1
        + 13.0 / 3.0 * c2 * c2
        + (3.0 / 50.0 + 39.0) * c3 * c3
        + (278.0 / 245.0 + 624.0) * c4 * c4
        + 0.2 * c1 * c3
        + 82.0 / 35.0 * c2 * c4
}

#[inline]
fn js(gamma: f64, beta: f64) -> f64 {
    let d = EPS + beta;
    gamma / (d * d)
}

/// Reconstructs moments from `u`, the means of cells `-r..=r` around the
/// target cell (`r = radius(order)`).
#[inline]
pub fn reconstruct(u: &[f64], order: usize, limiter: Limiter) -> [f64; 4] {
    debug_assert_eq!(u.len(), 2 * radius(order) + 1);
    match order {
        0 | 1 => [u[0], 0.0, 0.0, 0.0],
        2 | 3 => {
            let (um, u0, up) = (u[0], u[1], u[2]);
            let c1 = 0.5 * (up - um);
            let c2 = 0.5 * (up - 2.0 * u0 + um);
            let (s1, s2) = match limiter {
                Limiter::Linear => (c1, c2),
                Limiter::Weno => {
                    let sl = u0 - um;
                    let sr = up - u0;
                    let a0 = js(0.5, smoothness(c1, c2, 0.0, 0.0));
                    let al = js(0.25, sl * sl);
                    let ar = js(0.25, sr * sr);
                    let s = a0 + al + ar;
                    // central candidate P0 = (Popt - (PL + PR)/4) / (1/2)
                    let p0c1 = 2.0 * (c1 - 0.25 * (sl + sr));
                    let p0c2 = 2.0 * c2;
                    ((a0 * p0c1 + al * sl + ar * sr) / s, a0 * p0c2 / s)
                }
            };
            if order == 2 {
                [u0, s1, 0.0, 0.0]
            } else {
                [u0, s1, s2, 0.0]
            }
        }
        _ => {
            let (umm, um, u0, up, upp) = (u[0], u[1], u[2], u[3], u[4]);
            // central quartic
            let d1 = 0.5 * (up - um);
            let d2 = 0.5 * (upp - umm);
            let s1 = 0.5 * (up + um) - u0;
            let s2 = 0.5 * (upp + umm) - u0;
            let c3 = (d2 - 2.0 * d1) / 6.0;
            let c1 = d1 - 1.1 * c3;
            let c4 = (s2 - 4.0 * s1) / 12.0;
            let c2 = s1 - 9.0 / 7.0 * c4;
            match limiter {
                Limiter::Linear => [u0, c1, c2, c3],
                Limiter::Weno => {
                    // quadratics on {-2,-1,0}, {-1,0,1}, {0,1,2}
                    let l2 = 0.5 * (umm - 2.0 * um + u0);
                    let l1 = 0.5 * (umm - 4.0 * um + 3.0 * u0);
                    let m2 = s1;
                    let m1 = d1;
                    let r2 = 0.5 * (u0 - 2.0 * up + upp);
                    let r1 = 0.5 * (-3.0 * u0 + 4.0 * up - upp);
                    const G0: f64 = 0.75;
                    const GL: f64 = 0.0625;
                    const GC: f64 = 0.125;
                    const GR: f64 = 0.0625;
                    let a0 = js(G0, smoothness(c1, c2, c3, c4));
                    let al = js(GL, smoothness(l1, l2, 0.0, 0.0));
                    let ac = js(GC, smoothness(m1, m2, 0.0, 0.0));
                    let ar = js(GR, smoothness(r1, r2, 0.0, 0.0));
                    let s = a0 + al + ac + ar;
                    let p0 = |c: f64, l: f64, m: f64, r: f64| (c - GL * l - GC * m - GR * r) / G0;
                    let q1 = a0 * p0(c1, l1, m1, r1) + al * l1 + ac * m1 + ar * r1;
                    let q2 = a0 * p0(c2, l2, m2, r2) + al * l2 + ac * m2 + ar * r2;
                    let q3 = a0 * c3 / G0;
                    [u0, q1 / s, q2 / s, q3 / s]
                }
            }
        }
    }
}

/// Reconstructs the moments of cell `i` of a periodic sequence.
pub fn reconstruct_periodic(u: &[f64], i: usize, order: usize, limiter: Limiter) -> [f64; 4] {
    let n = u.len() as isize;
    let r = radius(order) as isize;
    let mut buf = [0.0; 5];
    for (k, o) in (-r..=r).enumerate() {
        buf[k] = u[(i as isize + o).rem_euclid(n) as usize];
    }
    reconstruct(&buf[..(2 * r + 1) as usize], order, limiter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre;

    fn cell_means(f: impl Fn(f64) -> f64, r: usize) -> Vec<f64> {
        (-(r as isize)..=r as isize)
            .map(|m| legendre::integrate(5, |t| f(m as f64 + t)))
            .collect()
    }

    #[test]
    fn smoothness_matches_quadrature() {
        let c = [0.7, -1.3, 0.4, 2.1];
        let m = [0.0, c[0], c[1], c[2]];
        // derivatives of the quartic part handled explicitly
        let d1 = |x: f64| legendre::eval_deriv(&m, x) + c[3] * legendre::dp(4, x);
        let d2 = |x: f64| 2.0 * c[1] + 6.0 * c[2] * x + c[3] * (12.0 * x * x - 3.0 / 7.0);
        let d3 = |x: f64| 6.0 * c[2] + 24.0 * c[3] * x;
        let q = legendre::integrate(5, |x| d1(x).powi(2) + d2(x).powi(2) + d3(x).powi(2))
            + 576.0 * c[3] * c[3];
        assert!((q - smoothness(c[0], c[1], c[2], c[3])).abs() < 1e-12 * q);
    }

    #[test]
    fn linear_reconstruction_exact_for_polynomials() {
        // cubic: order 4 recovers all moments exactly
        let f = |x: f64| 0.3 - 1.1 * x + 0.8 * x * x + 0.25 * x * x * x;
        let u = cell_means(f, 2);
        let m = reconstruct(&u, 4, Limiter::Linear);
        for k in 0..4 {
            let exact = legendre::integrate(5, |x| f(x) * legendre::p(k, x))
                / legendre::integrate(5, |x| legendre::p(k, x).powi(2));
            assert!((m[k] - exact).abs() < 1e-13, "k={k}: {} vs {exact}", m[k]);
        }
        let f2 = |x: f64| 1.0 + 2.0 * x - 0.5 * x * x;
        let u = cell_means(f2, 1);
        let m = reconstruct(&u, 3, Limiter::Linear);
        assert!((m[1] - 2.0).abs() < 1e-14 && (m[2] + 0.5).abs() < 1e-14);
    }

    #[test]
    fn weno_reproduces_linear_data() {
        for order in 2..=4 {
            let r = radius(order);
            let u: Vec<f64> = (0..2 * r + 1).map(|k| 3.0 * k as f64 - 1.0).collect();
            let m = reconstruct(&u, order, Limiter::Weno);
            assert!((m[1] - 3.0).abs() < 1e-12, "order {order}: {m:?}");
        }
    }

    #[test]
    fn weno_nonoscillatory_at_step() {
        let u = [0.0, 0.0, 0.0, 1.0, 1.0];
        let m = reconstruct(&u, 4, Limiter::Weno);
        let right = legendre::eval(&m, 0.5);
        assert!(right.abs() < 1e-3, "{m:?}");
    }
}
