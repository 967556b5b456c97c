//! Test-side oracles: an independent dense tensor-product polynomial algebra
//! on `[-1/2, 1/2]^D`, Gauss-Legendre rules built by Newton iteration, and
//! shifted Legendre projections. None of this calls into the library.

#![allow(dead_code)]

pub mod recon2d;
pub mod recon3d;
pub mod touchup;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    rng.gen_range(-scale..scale)
}

/// Gauss-Legendre nodes and weights on [-1/2, 1/2], weights summing to 1.
pub fn gauss(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * x, 0.5 * w));
    }
    out
}

/// Shifted Legendre polynomial in monomial coefficients (ascending).
pub fn legendre_coeffs(k: usize) -> Vec<f64> {
    match k {
        0 => vec![1.0],
        1 => vec![0.0, 1.0],
        2 => vec![-1.0 / 12.0, 0.0, 1.0],
        3 => vec![0.0, -3.0 / 20.0, 0.0, 1.0],
        4 => vec![3.0 / 560.0, 0.0, -3.0 / 14.0, 0.0, 1.0],
        _ => panic!("degree"),
    }
}

pub fn leg(k: usize, x: f64) -> f64 {
    legendre_coeffs(k).iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Modal coefficient of `P_k` of `f` on [-1/2, 1/2].
pub fn modal_1d(f: impl Fn(f64) -> f64, k: usize) -> f64 {
    let g = gauss(10);
    let num: f64 = g.iter().map(|&(x, w)| w * f(x) * leg(k, x)).sum();
    let den: f64 = g.iter().map(|&(x, w)| w * leg(k, x) * leg(k, x)).sum();
    num / den
}

/// First four modal coefficients.
pub fn modes4(f: impl Fn(f64) -> f64) -> [f64; 4] {
    [modal_1d(&f, 0), modal_1d(&f, 1), modal_1d(&f, 2), modal_1d(&f, 3)]
}

/// Dense polynomial in `D` variables with per-variable degree `< n`,
/// coefficient of `prod x_d^{e_d}` stored at `sum e_d n^d`.
#[derive(Clone, Debug)]
pub struct Poly<const D: usize> {
    pub n: usize,
    pub c: Vec<f64>,
}

impl<const D: usize> Poly<D> {
    pub fn zero(n: usize) -> Self {
        Poly { n, c: vec![0.0; n.pow(D as u32)] }
    }

    fn exps(&self, mut idx: usize) -> [usize; D] {
        let mut e = [0; D];
        for d in 0..D {
            e[d] = idx % self.n;
            idx /= self.n;
        }
        e
    }

    pub fn eval(&self, x: [f64; D]) -> f64 {
        let mut s = 0.0;
        for (i, &c) in self.c.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let e = self.exps(i);
            let mut t = c;
            for d in 0..D {
                t *= x[d].powi(e[d] as i32);
            }
            s += t;
        }
        s
    }

    /// Interpolates `f` exactly if it lies in the space.
    pub fn fit(n: usize, f: impl Fn([f64; D]) -> f64) -> Self {
        let nodes: Vec<f64> = (0..n).map(|i| -0.45 + 0.9 * i as f64 / (n - 1) as f64).collect();
        let m = n.pow(D as u32);
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut b = DVector::<f64>::zeros(m);
        let proto = Poly::<D>::zero(n);
        for r in 0..m {
            let pe = proto.exps(r);
            let mut x = [0.0; D];
            for d in 0..D {
                x[d] = nodes[pe[d]];
            }
            b[r] = f(x);
            for col in 0..m {
                let e = proto.exps(col);
                let mut t = 1.0;
                for d in 0..D {
                    t *= x[d].powi(e[d] as i32);
                }
                a[(r, col)] = t;
            }
        }
        let sol = a.lu().solve(&b).expect("vandermonde");
        Poly { n, c: sol.iter().copied().collect() }
    }

    pub fn deriv(&self, axis: usize) -> Self {
        let mut out = Poly::zero(self.n);
        for (i, &c) in self.c.iter().enumerate() {
            let e = self.exps(i);
            if e[axis] == 0 {
                continue;
            }
            let mut e2 = e;
            e2[axis] -= 1;
            let mut j = 0;
            for d in (0..D).rev() {
                j = j * self.n + e2[d];
            }
            out.c[j] += c * e[axis] as f64;
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        Poly { n: self.n, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    /// Exact mean over the unit cell.
    pub fn mean(&self) -> f64 {
        let mono = |k: usize| if k % 2 == 1 { 0.0 } else { 0.5f64.powi(k as i32) / (k as f64 + 1.0) };
        self.c
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let e = self.exps(i);
                c * e.iter().map(|&k| mono(k)).product::<f64>()
            })
            .sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Modal coefficient of `prod_d P_{k_d}(x_d)` of `f` over the unit cell.
pub fn modal<const D: usize>(f: impl Fn([f64; D]) -> f64, k: [usize; D]) -> f64 {
    let g = gauss(8);
    let m = g.len().pow(D as u32);
    let mut num = 0.0;
    let mut den = 1.0;
    for d in 0..D {
        den *= g.iter().map(|&(x, w)| w * leg(k[d], x).powi(2)).sum::<f64>();
    }
    for idx in 0..m {
        let mut r = idx;
        let mut x = [0.0; D];
        let mut w = 1.0;
        let mut l = 1.0;
        for d in 0..D {
            let (xi, wi) = g[r % g.len()];
            r /= g.len();
            x[d] = xi;
            w *= wi;
            l *= leg(k[d], xi);
        }
        num += w * f(x) * l;
    }
    num / den
}
