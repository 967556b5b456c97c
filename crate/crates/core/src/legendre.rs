//! Shifted Legendre polynomials on the reference interval [-1/2, 1/2] and
//! Gauss-Legendre rules on the same interval.

/// `P_n(x)` for `n <= 4`, normalized so the leading coefficient is 1:
/// `1, x, x^2 - 1/12, x^3 - 3x/20, x^4 - 3x^2/14 + 3/560`.
#[inline]
pub fn p(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        2 => x * x - 1.0 / 12.0,
        3 => x * (x * x - 0.15),
        4 => {
            let x2 = x * x;
            x2 * x2 - 3.0 / 14.0 * x2 + 3.0 / 560.0
        }
        _ => panic!("Legendre degree {n} not supported"),
    }
}

/// Derivative of [`p`].
#[inline]
pub fn dp(n: usize, x: f64) -> f64 {
    match n {
        0 => 0.0,
        1 => 1.0,
        2 => 2.0 * x,
        3 => 3.0 * x * x - 0.15,
        4 => 4.0 * x * x * x - 3.0 / 7.0 * x,
        _ => panic!("Legendre degree {n} not supported"),
    }
}

/// Evaluates `sum_k m[k] P_k(x)`.
#[inline]
pub fn eval(m: &[f64; 4], x: f64) -> f64 {
    m[0] + x * m[1] + p(2, x) * m[2] + p(3, x) * m[3]
}

/// Derivative of [`eval`] with respect to `x`.
#[inline]
pub fn eval_deriv(m: &[f64; 4], x: f64) -> f64 {
    m[1] + 2.0 * x * m[2] + dp(3, x) * m[3]
}

/// Mean of the modal expansion over the left (`[-1/2, 0]`) or right
/// (`[0, 1/2]`) half of the interval.
#[inline]
pub fn half_mean(m: &[f64; 4], right: bool) -> f64 {
    // mean of x over a half is +-1/4, of P2 is 0, of P3 is -+1/160
    let s = if right { 1.0 } else { -1.0 };
    m[0] + s * (0.25 * m[1] - m[3] / 160.0)
}

/// Gauss-Legendre nodes and weights on [-1/2, 1/2] (weights sum to 1).
pub fn gauss(n: usize) -> (&'static [f64], &'static [f64]) {
    const X1: [f64; 1] = [0.0];
    const W1: [f64; 1] = [1.0];
    const X2: [f64; 2] = [-0.288_675_134_594_812_9, 0.288_675_134_594_812_9];
    const W2: [f64; 2] = [0.5, 0.5];
    const X3: [f64; 3] = [-0.387_298_334_620_741_7, 0.0, 0.387_298_334_620_741_7];
    const W3: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    const X4: [f64; 4] = [
        -0.430_568_155_797_026_3,
        -0.169_990_521_792_428_1,
        0.169_990_521_792_428_1,
        0.430_568_155_797_026_3,
    ];
    const W4: [f64; 4] = [
        0.173_927_422_568_726_9,
        0.326_072_577_431_273_1,
        0.326_072_577_431_273_1,
        0.173_927_422_568_726_9,
    ];
    const X5: [f64; 5] = [
        -0.453_089_922_969_332,
        -0.269_234_655_052_841_6,
        0.0,
        0.269_234_655_052_841_6,
        0.453_089_922_969_332,
    ];
    const W5: [f64; 5] = [
        0.118_463_442_528_094_5,
        0.239_314_335_249_683_2,
        0.284_444_444_444_444_4,
        0.239_314_335_249_683_2,
        0.118_463_442_528_094_5,
    ];
    match n {
        1 => (&X1, &W1),
        2 => (&X2, &W2),
        3 => (&X3, &W3),
        4 => (&X4, &W4),
        5 => (&X5, &W5),
        _ => panic!("Gauss rule with {n} points not tabulated"),
    }
}

/// Integral over [-1/2, 1/2] of a function, by an `n`-point Gauss rule.
pub fn integrate<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
    let (x, w) = gauss(n);
    x.iter().zip(w).map(|(&x, &w)| w * f(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rules_integrate_monomials() {
        for n in 1..=5 {
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 * 0.5f64.powi(k as i32 + 1) / (k as f64 + 1.0)
                };
                let got = integrate(n, |x| x.powi(k as i32));
                assert!((got - exact).abs() < 1e-15, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn legendre_orthogonal() {
        for a in 0..=4 {
            for b in 0..a {
                let ip = integrate(5, |x| p(a, x) * p(b, x));
                assert!(ip.abs() < 1e-15, "P{a} P{b} -> {ip}");
            }
        }
    }

    #[test]
    fn half_means() {
        let m = [0.3, -1.2, 0.7, 2.5];
        for right in [false, true] {
            let (lo, hi) = if right { (0.0, 0.5) } else { (-0.5, 0.0) };
            let q = 2.0 * 0.5 * integrate(4, |t| eval(&m, lo + (hi - lo) * (t + 0.5)));
            assert!((q - half_mean(&m, right)).abs() < 1e-14);
        }
    }
}
