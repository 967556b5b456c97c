use super::{leg, Poly};
use curlmesh::recon3d::*;

pub fn set(c: &mut CurlComponent, name: &str, v: f64) {
    match name {
        "x" => c.x = v,
        "y" => c.y = v,
        "z" => c.z = v,
        "xx" => c.xx = v,
        "yy" => c.yy = v,
        "zz" => c.zz = v,
        "xy" => c.xy = v,
        "yz" => c.yz = v,
        "xz" => c.xz = v,
        _ => unreachable!(),
    }
}

pub const AXIS: [&str; 3] = ["x", "y", "z"];

pub fn random_inputs(seed: u64, order: usize, curl_free: bool) -> (EdgeMoments3D, CurlMoments3D) {
    let mut r = super::rng(seed);
    let mut e = EdgeMoments3D::default();
    for a in 0..3 {
        for i in 0..4 {
            for k in 0..order {
                e.e[a][i][k] = super::uniform(&mut r, 1.0);
            }
        }
    }
    let mut c = CurlMoments3D::default();
    if !curl_free {
        for a in 0..3 {
            for q in 0..3 {
                if q != a && order >= 2 {
                    set(&mut c.r[a], AXIS[q], super::uniform(&mut r, 1.0));
                }
                if q != a && order >= 3 {
                    set(&mut c.r[a], &format!("{}{}", AXIS[q], AXIS[q]), super::uniform(&mut r, 1.0));
                }
            }
            if order >= 3 {
                for m in ["xy", "yz", "xz"] {
                    set(&mut c.r[a], m, super::uniform(&mut r, 1.0));
                }
            }
        }
    }
    (e, c)
}

/// Face circulations written out edge by edge.
pub fn faces_by_hand(e: &EdgeMoments3D) -> ([f64; 3], [f64; 3]) {
    let v = |a: usize, i: usize| e.e[a][i - 1][0];
    let (x, y, z) = (0, 1, 2);
    let hi = [
        v(y, 3) + v(z, 4) - v(y, 4) - v(z, 2),
        v(z, 3) + v(x, 4) - v(z, 4) - v(x, 2),
        v(x, 3) + v(y, 4) - v(x, 4) - v(y, 2),
    ];
    let lo = [
        v(y, 1) + v(z, 3) - v(y, 2) - v(z, 1),
        v(z, 1) + v(x, 3) - v(z, 2) - v(x, 1),
        v(x, 1) + v(y, 3) - v(x, 2) - v(y, 1),
    ];
    (lo, hi)
}

pub fn get(c: &CurlComponent, name: &str) -> f64 {
    match name {
        "x" => c.x,
        "y" => c.y,
        "z" => c.z,
        "xx" => c.xx,
        "yy" => c.yy,
        "zz" => c.zz,
        "xy" => c.xy,
        "yz" => c.yz,
        "xz" => c.xz,
        _ => unreachable!(),
    }
}

pub fn mixed_name(p: usize, q: usize) -> &'static str {
    match (p.min(q), p.max(q)) {
        (0, 1) => "xy",
        (1, 2) => "yz",
        _ => "xz",
    }
}

/// Target curl built from the caller's moments and the face circulations.
pub fn target(e: &EdgeMoments3D, c: &CurlMoments3D, p: [f64; 3]) -> [f64; 3] {
    let (lo, hi) = faces_by_hand(e);
    let mut out = [0.0; 3];
    for a in 0..3 {
        let r = &c.r[a];
        let mut s = 0.5 * (hi[a] + lo[a]) + (hi[a] - lo[a]) * p[a];
        let mut own_diag = 0.0;
        for q in 0..3 {
            if q != a {
                s += get(r, AXIS[q]) * p[q];
                s += get(r, &format!("{}{}", AXIS[q], AXIS[q])) * leg(2, p[q]);
                own_diag -= 0.5 * get(&c.r[q], mixed_name(a, q));
            }
        }
        s += own_diag * (p[a] * p[a] - 0.25);
        s += r.xy * p[0] * p[1] + r.yz * p[1] * p[2] + r.xz * p[0] * p[2];
        out[a] = s;
    }
    out
}

pub fn fit(r: &Recon3D) -> [Poly<3>; 3] {
    [0, 1, 2].map(|a| Poly::<3>::fit(4, |p| r.eval(p[0], p[1], p[2]).unwrap()[a]))
}

pub fn oracle_curl(v: &[Poly<3>; 3]) -> [Poly<3>; 3] {
    [
        v[2].deriv(1).sub(&v[1].deriv(2)),
        v[0].deriv(2).sub(&v[2].deriv(0)),
        v[1].deriv(0).sub(&v[0].deriv(1)),
    ]
}

pub fn points(seed: u64, n: usize) -> Vec<[f64; 3]> {
    let mut r = super::rng(seed);
    (0..n).map(|_| [0; 3].map(|_| super::uniform(&mut r, 0.5))).collect()
}
