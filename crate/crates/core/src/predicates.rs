//! Exact adaptive geometric predicates.
//!
//! Thin wrappers over the `robust` port of Shewchuk's predicates, fixed to
//! the sign convention used throughout this crate:
//!
//! * `orient3d(a, b, c, d) > 0` iff `d` lies on the positive side of the
//!   plane through `a`, `b`, `c`, where the positive side is the one the
//!   right-handed normal `(b - a) x (c - a)` points into.
//! * `insphere(a, b, c, d, e) > 0` iff `e` lies strictly inside the
//!   circumsphere of the positively oriented tetrahedron `(a, b, c, d)`.

use crate::geom::Vec3;
use robust::Coord3D;

fn c3(p: Vec3) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

pub fn orient3d(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    // robust::orient3d is positive when d is "below" the CCW plane, which is
    // the opposite side of the right-handed normal.
    -robust::orient3d(c3(a), c3(b), c3(c), c3(d))
}

/// Requires `orient3d(a, b, c, d) > 0`.
pub fn insphere(a: Vec3, b: Vec3, c: Vec3, d: Vec3, e: Vec3) -> f64 {
    // robust::insphere expects its own positive orientation, which is the
    // mirror of ours; swapping two vertices flips it back.
    robust::insphere(c3(b), c3(a), c3(c), c3(d), c3(e))
}
