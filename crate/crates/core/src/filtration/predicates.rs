//! Exact geometric predicate signs and floating-point circumsphere
//! constructions.
//!
//! Predicate signs are exact for f64 inputs (adaptive-precision evaluation);
//! circumcenters and radii are ordinary floating point, which is fine
//! because downstream consumers only need them to be consistent, not exact.

use robust::{insphere, orient3d, Coord3D};

use crate::pointcloud::Point3;

fn c3(p: &Point3) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

/// Exact sign of the orientation determinant. Positive when `d` is on the
/// side of plane (a, b, c) that makes the tetrahedron (a, b, c, d)
/// positively oriented in this crate's convention.
pub fn orient_sign(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> i8 {
    sign(orient3d(c3(a), c3(b), c3(c), c3(d)))
}

/// Exact sign of the in-sphere test: positive when `e` lies strictly inside
/// the circumsphere of (a, b, c, d), which must be positively oriented.
pub fn insphere_sign(a: &Point3, b: &Point3, c: &Point3, d: &Point3, e: &Point3) -> i8 {
    debug_assert!(orient_sign(a, b, c, d) > 0, "insphere needs positive orientation");
    sign(insphere(c3(a), c3(b), c3(c), c3(d), c3(e)))
}

/// Exact collinearity test for three 3D points: they are collinear iff all
/// three coordinate-plane projections are collinear, and each projected
/// orientation is a component of the cross product.
pub fn collinear(a: &Point3, b: &Point3, c: &Point3) -> bool {
    use robust::{orient2d, Coord};
    let proj = |f: fn(&Point3) -> (f64, f64)| {
        let (ax, ay) = f(a);
        let (bx, by) = f(b);
        let (cx, cy) = f(c);
        orient2d(
            Coord { x: ax, y: ay },
            Coord { x: bx, y: by },
            Coord { x: cx, y: cy },
        )
    };
    proj(|p| (p.x, p.y)) == 0.0 && proj(|p| (p.y, p.z)) == 0.0 && proj(|p| (p.z, p.x)) == 0.0
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Circumcenter and squared circumradius of a tetrahedron (floating point).
/// Returns None when the tetrahedron is numerically flat.
pub fn circumsphere_tet(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> Option<(Point3, f64)> {
    let u = b.sub(a);
    let v = c.sub(a);
    let w = d.sub(a);
    let det = 2.0 * u.dot(&v.cross(&w));
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let uu = u.dot(&u);
    let vv = v.dot(&v);
    let ww = w.dot(&w);
    let x = v.cross(&w).mul(uu);
    let y = w.cross(&u).mul(vv);
    let z = u.cross(&v).mul(ww);
    let offset = x.add(&y).add(&z).mul(1.0 / det);
    let center = a.add(&offset);
    let r2 = offset.dot(&offset);
    if !(center.is_finite() && r2.is_finite()) {
        return None;
    }
    Some((center, r2))
}

/// Circumcenter (in the triangle plane) and squared circumradius of a
/// triangle embedded in 3-space.
pub fn circumsphere_tri(a: &Point3, b: &Point3, c: &Point3) -> Option<(Point3, f64)> {
    let u = b.sub(a);
    let v = c.sub(a);
    let n = u.cross(&v);
    let nn = n.dot(&n);
    if nn == 0.0 || !nn.is_finite() {
        return None;
    }
    let uu = u.dot(&u);
    let vv = v.dot(&v);
    let offset = v.cross(&n).mul(uu).add(&n.cross(&u).mul(vv)).mul(1.0 / (2.0 * nn));
    let center = a.add(&offset);
    let r2 = offset.dot(&offset);
    if !(center.is_finite() && r2.is_finite()) {
        return None;
    }
    Some((center, r2))
}

/// Midpoint and squared half-length of an edge.
pub fn circumsphere_edge(a: &Point3, b: &Point3) -> (Point3, f64) {
    let center = Point3::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0, (a.z + b.z) / 2.0);
    let half = b.sub(a).mul(0.5);
    (center, half.dot(&half))
}
