use super::leg;
use curlmesh::recon2d::*;

pub fn random_inputs(seed: u64, order: usize) -> (EdgeMoments2D, CurlMoments2D, ZoneModes2D) {
    let mut r = super::rng(seed);
    let mut e = EdgeMoments2D::default();
    for m in e.x.iter_mut().chain(e.y.iter_mut()) {
        for k in 0..order {
            m[k] = super::uniform(&mut r, 1.0);
        }
    }
    let mut u = |deg: usize| if deg < order { super::uniform(&mut r, 1.0) } else { 0.0 };
    let c = CurlMoments2D {
        x: u(1),
        y: u(1),
        xx: u(2),
        yy: u(2),
        xy: u(2),
        xxx: u(3),
        yyy: u(3),
        xxy: u(3),
        xyy: u(3),
    };
    let z = if order == 4 {
        ZoneModes2D { m10: u(3), m9: u(3) }
    } else {
        ZoneModes2D::default()
    };
    (e, c, z)
}

pub fn target(e: &EdgeMoments2D, c: &CurlMoments2D, x: f64, y: f64) -> f64 {
    let r0 = e.x[0][0] - e.x[1][0] + e.y[1][0] - e.y[0][0];
    r0 + c.x * leg(1, x)
        + c.y * leg(1, y)
        + c.xx * leg(2, x)
        + c.yy * leg(2, y)
        + c.xy * x * y
        + c.xxx * leg(3, x)
        + c.yyy * leg(3, y)
        + c.xxy * y * leg(2, x)
        + c.xyy * x * leg(2, y)
}
