use super::{rng, uniform};
use curlmesh::prolong::*;

/// Minimizer of a convex quadratic `f` on `[lo, hi]` by bisection on the
/// sign of a centered difference.
pub fn argmin(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        let slope = f(m + 1e-3) - f(m - 1e-3);
        if slope > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    0.5 * (lo + hi)
}

pub fn random_targets2d(seed: u64) -> TouchUpTargets2D {
    let mut r = rng(seed);
    let mut t = TouchUpTargets2D::default();
    for row in 0..2 {
        for h in 0..2 {
            t.vx[row][h] = uniform(&mut r, 1.0);
            t.vy[row][h] = uniform(&mut r, 1.0);
        }
    }
    for v in t.fv.iter_mut() {
        *v = uniform(&mut r, 1.0);
    }
    for v in t.r.iter_mut() {
        *v = uniform(&mut r, 0.5);
    }
    t
}

/// Interior values for a free `xc1`, solved directly from the three
/// sub-zone circulation conditions.
pub fn feasible2d(t: &TouchUpTargets2D, xc1: f64) -> [f64; 4] {
    let [[x11, x12], [x21, _]] = t.vx;
    let [[y11, y12], [y21, _]] = t.vy;
    let yc1 = t.r[0] - x11 + y11 + xc1;
    let xc2 = x12 + y21 - t.r[1] - yc1;
    let yc2 = t.r[2] + x21 + y12 - xc1;
    [xc1, xc2, yc1, yc2]
}

pub fn ls(v: &[f64], c: &[f64]) -> f64 {
    v.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn get(b: &Block3, a: usize, p: [usize; 3]) -> f64 {
    b.v[a][p[(a + 1) % 3]][p[(a + 2) % 3]][p[a]]
}

/// Circulation of the fine face normal to `a` with lower corner `p`, from the
/// local fine-vertex lattice.
pub fn face(b: &Block3, a: usize, p: [usize; 3]) -> f64 {
    let (bb, cc) = ((a + 1) % 3, (a + 2) % 3);
    let mut pb = p;
    pb[bb] += 1;
    let mut pc = p;
    pc[cc] += 1;
    get(b, bb, p) + get(b, cc, pb) - get(b, bb, pc) - get(b, cc, p)
}

pub fn internal(b: &Block3) -> [f64; 12] {
    let mut out = [0.0; 12];
    for a in 0..3 {
        for hb in 0..2 {
            for hc in 0..2 {
                let mut p = [0; 3];
                p[a] = 1;
                p[(a + 1) % 3] = hb;
                p[(a + 2) % 3] = hc;
                out[internal_face(a, hb, hc)] = face(b, a, p);
            }
        }
    }
    out
}

pub fn random_block(seed: u64) -> Block3 {
    let mut r = rng(seed);
    let mut b = Block3::default();
    for v in b.v.iter_mut().flatten().flatten().flatten() {
        *v = uniform(&mut r, 1.0);
    }
    b
}

pub fn with_type3(b: &Block3, u: &[f64; 6]) -> Block3 {
    let mut out = *b;
    for a in 0..3 {
        for s in 0..2 {
            out.v[a][1][1][s] = u[2 * a + s];
        }
    }
    out
}

pub fn beta_of(b: &Block3) -> f64 {
    let x = &b.v[0];
    let outer: f64 = [(0, 0), (0, 2), (2, 0), (2, 2)].iter().map(|&(j, k)| x[j][k][1] - x[j][k][0]).sum();
    x[1][1][1] - x[1][1][0] - 0.25 * outer
}
