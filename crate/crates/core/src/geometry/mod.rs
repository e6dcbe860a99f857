//! True domain, element classification and the surrogate boundary.

mod classify;
mod domain;
mod polyline;
mod surrogate;

pub use classify::{classify_elements, ElementClass};
pub use domain::{Bc, Boundary, Curve, Outer, Projection, TrueDomain};
pub use polyline::{read_polyline, signed_area, write_polyline};
pub use surrogate::{
    build_surrogate, BoundaryPoint, Segment, SegmentKind, Side, Surrogate,
};

pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}
