use serde::{Deserialize, Serialize};

use super::polyline::{polygon_contains, segment_hits_box, segments_intersect, signed_area};
use super::{dot, norm, sub, Point};
use crate::{Error, Result};

/// Boundary condition tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Circle { center: Point, radius: f64 },
    /// Closed polyline; the closing edge is implicit.
    Polyline(Vec<Point>),
}

/// An immersed closed boundary curve.
#[derive(Debug, Clone)]
pub struct Boundary {
    pub curve: Curve,
    pub bc: Bc,
    /// Inner boundary: the domain lies outside the curve.
    pub hole: bool,
    /// Outward (w.r.t. the domain) unit normals of polyline edges.
    edge_normals: Vec<Point>,
    /// Averaged normals at polyline vertices.
    vertex_normals: Vec<Point>,
}

impl Boundary {
    fn new(curve: Curve, bc: Bc, hole: bool) -> Result<Self> {
        let curve = match curve {
            Curve::Circle { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Geometry(format!("circle radius must be positive, got {radius}")));
                }
                Curve::Circle { center, radius }
            }
            Curve::Polyline(mut pts) => {
                if pts.len() < 3 {
                    return Err(Error::Geometry("polyline needs at least 3 vertices".into()));
                }
                check_simple(&pts)?;
                // outer boundaries counter-clockwise, holes clockwise
                let ccw = signed_area(&pts) > 0.0;
                if ccw == hole {
                    pts.reverse();
                }
                Curve::Polyline(pts)
            }
        };
        let (edge_normals, vertex_normals) = match &curve {
            Curve::Polyline(pts) => {
                let n = pts.len();
                let en: Vec<Point> = (0..n)
                    .map(|i| {
                        let d = sub(pts[(i + 1) % n], pts[i]);
                        let l = norm(d);
                        [d[1] / l, -d[0] / l]
                    })
                    .collect();
                let vn = (0..n)
                    .map(|i| {
                        let (a, b) = (en[(i + n - 1) % n], en[i]);
                        let s = [a[0] + b[0], a[1] + b[1]];
                        let l = norm(s);
                        if l < 1e-14 {
                            b
                        } else {
                            [s[0] / l, s[1] / l]
                        }
                    })
                    .collect();
                (en, vn)
            }
            Curve::Circle { .. } => (Vec::new(), Vec::new()),
        };
        Ok(Self {
            curve,
            bc,
            hole,
            edge_normals,
            vertex_normals,
        })
    }

    /// Whether `p` lies inside the closed curve.
    pub fn encloses(&self, p: Point) -> bool {
        match &self.curve {
            Curve::Circle { center, radius } => norm(sub(p, *center)) < *radius,
            Curve::Polyline(pts) => polygon_contains(pts, p),
        }
    }

    /// Whether the curve meets the closed box `[x0, x1] x [y0, y1]` grown by `tol`.
    pub fn meets_box(&self, b: [f64; 4], tol: f64) -> bool {
        let b = [b[0] - tol, b[1] + tol, b[2] - tol, b[3] + tol];
        match &self.curve {
            Curve::Circle { center, radius } => {
                let cx = center[0].clamp(b[0], b[1]);
                let cy = center[1].clamp(b[2], b[3]);
                let dmin = (center[0] - cx).hypot(center[1] - cy);
                let dmax = (center[0] - b[0])
                    .abs()
                    .max((center[0] - b[1]).abs())
                    .hypot((center[1] - b[2]).abs().max((center[1] - b[3]).abs()));
                dmin <= *radius && dmax >= *radius
            }
            Curve::Polyline(pts) => {
                let n = pts.len();
                (0..n).any(|i| {
                    let (a, c) = (pts[i], pts[(i + 1) % n]);
                    a[0].max(c[0]) >= b[0]
                        && a[0].min(c[0]) <= b[1]
                        && a[1].max(c[1]) >= b[2]
                        && a[1].min(c[1]) <= b[3]
                        && segment_hits_box(a, c, b)
                })
            }
        }
    }

    /// Nearest point on the curve, its distance and the domain's outward normal there.
    fn nearest(&self, p: Point) -> (Point, f64, Point) {
        match &self.curve {
            Curve::Circle { center, radius } => {
                let v = sub(p, *center);
                let l = norm(v);
                // the centre itself is equidistant: pick angle zero
                let u = if l < 1e-300 { [1.0, 0.0] } else { [v[0] / l, v[1] / l] };
                let x = [center[0] + radius * u[0], center[1] + radius * u[1]];
                let n = if self.hole { [-u[0], -u[1]] } else { u };
                (x, (l - radius).abs(), n)
            }
            Curve::Polyline(pts) => {
                let n = pts.len();
                let mut best = (pts[0], f64::INFINITY, [0.0, 0.0]);
                for i in 0..n {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    let ab = sub(b, a);
                    let t = (dot(sub(p, a), ab) / dot(ab, ab)).clamp(0.0, 1.0);
                    let x = [a[0] + t * ab[0], a[1] + t * ab[1]];
                    let dist = norm(sub(x, p));
                    // strict comparison keeps the smallest segment index on ties
                    if dist < best.1 {
                        let nrm = if t <= 1e-12 {
                            self.vertex_normals[i]
                        } else if t >= 1.0 - 1e-12 {
                            self.vertex_normals[(i + 1) % n]
                        } else {
                            self.edge_normals[i]
                        };
                        best = (x, dist, nrm);
                    }
                }
                best
            }
        }
    }

    /// Points on the curve spaced roughly `h` apart (vertices included for polylines).
    pub fn sample(&self, h: f64) -> Vec<Point> {
        match &self.curve {
            Curve::Circle { center, radius } => {
                let m = ((std::f64::consts::TAU * radius / h).ceil() as usize).max(16);
                (0..m)
                    .map(|k| {
                        let a = std::f64::consts::TAU * k as f64 / m as f64;
                        [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                    })
                    .collect()
            }
            Curve::Polyline(pts) => {
                let n = pts.len();
                let mut out = Vec::new();
                for i in 0..n {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    let m = ((norm(sub(b, a)) / h).ceil() as usize).max(1);
                    for k in 0..m {
                        let t = k as f64 / m as f64;
                        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    }
                }
                out
            }
        }
    }

    fn bbox(&self) -> [f64; 4] {
        match &self.curve {
            Curve::Circle { center, radius } => [
                center[0] - radius,
                center[0] + radius,
                center[1] - radius,
                center[1] + radius,
            ],
            Curve::Polyline(pts) => pts.iter().fold(
                [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
                |b, p| [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])],
            ),
        }
    }
}

fn check_simple(pts: &[Point]) -> Result<()> {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        if norm(sub(b, a)) == 0.0 {
            return Err(Error::Geometry(format!("polyline has a repeated vertex at index {i}")));
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(a, b, pts[j], pts[(j + 1) % n]) {
                return Err(Error::Geometry(format!(
                    "polyline self-intersects between edges {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

/// How the outer boundary is represented.
#[derive(Debug, Clone, PartialEq)]
pub enum Outer {
    /// The background rectangle itself, with conditions imposed by Nitsche's method.
    BodyFitted(Bc),
    /// A closed curve strictly inside the background rectangle.
    Immersed(Curve, Bc),
}

/// Closest-point projection of a surrogate point onto the true boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub x: Point,
    /// `x - x_tilde`
    pub d: Point,
    /// Unit outward normal of the domain at `x`.
    pub n: Point,
    /// Index into [`TrueDomain::boundaries`].
    pub boundary: usize,
    pub bc: Bc,
}

/// The physical domain: an outer boundary and zero or more holes.
#[derive(Debug, Clone)]
pub struct TrueDomain {
    bounds: [f64; 4],
    body_fitted: Option<Bc>,
    boundaries: Vec<Boundary>,
}

impl TrueDomain {
    /// Domain inside the background rectangle `bounds = [x0, x1, y0, y1]`.
    pub fn new(bounds: [f64; 4], outer: Outer) -> Result<Self> {
        if !(bounds[1] > bounds[0] && bounds[3] > bounds[2]) {
            return Err(Error::Geometry(format!("empty background rectangle {bounds:?}")));
        }
        let mut d = Self {
            bounds,
            body_fitted: None,
            boundaries: Vec::new(),
        };
        match outer {
            Outer::BodyFitted(bc) => d.body_fitted = Some(bc),
            Outer::Immersed(curve, bc) => {
                let b = Boundary::new(curve, bc, false)?;
                d.check_inside_bounds(&b)?;
                d.boundaries.push(b);
            }
        }
        Ok(d)
    }

    pub fn unit_square(bc: Bc) -> Self {
        Self::new([0.0, 1.0, 0.0, 1.0], Outer::BodyFitted(bc)).expect("unit square is valid")
    }

    /// Adds a hole. It must lie strictly inside the domain and not touch other holes.
    pub fn with_hole(mut self, curve: Curve, bc: Bc) -> Result<Self> {
        let b = Boundary::new(curve, bc, true)?;
        self.check_inside_bounds(&b)?;
        let h = {
            let bb = b.bbox();
            (bb[1] - bb[0]).max(bb[3] - bb[2]) / 256.0
        };
        for p in b.sample(h) {
            if !self.contains(p) {
                return Err(Error::Geometry(format!(
                    "hole boundary point ({:.4}, {:.4}) is outside the domain",
                    p[0], p[1]
                )));
            }
        }
        for other in &self.boundaries {
            let hh = {
                let bb = other.bbox();
                (bb[1] - bb[0]).max(bb[3] - bb[2]) / 256.0
            };
            if other.sample(hh).into_iter().any(|p| b.encloses(p)) {
                return Err(Error::Geometry("hole overlaps another boundary".into()));
            }
        }
        self.boundaries.push(b);
        Ok(self)
    }

    fn check_inside_bounds(&self, b: &Boundary) -> Result<()> {
        let bb = b.bbox();
        let o = self.bounds;
        if !(bb[0] > o[0] && bb[1] < o[1] && bb[2] > o[2] && bb[3] < o[3]) {
            return Err(Error::Geometry(format!(
                "immersed boundary {bb:?} must lie strictly inside the background {o:?}"
            )));
        }
        Ok(())
    }

    pub fn bounds(&self) -> [f64; 4] {
        self.bounds
    }

    /// Condition on the background rectangle when it is the outer boundary.
    pub fn body_fitted(&self) -> Option<Bc> {
        self.body_fitted
    }

    /// Immersed boundaries; the immersed outer boundary, if any, comes first.
    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn is_immersed(&self) -> bool {
        !self.boundaries.is_empty()
    }

    /// Strict interior test.
    pub fn contains(&self, p: Point) -> bool {
        let o = self.bounds;
        if !(p[0] > o[0] && p[0] < o[1] && p[1] > o[2] && p[1] < o[3]) {
            return false;
        }
        self.boundaries
            .iter()
            .all(|b| b.encloses(p) != b.hole)
    }

    /// Whether any immersed boundary meets the box grown by `tol`.
    pub fn cuts(&self, b: [f64; 4], tol: f64) -> bool {
        self.boundaries.iter().any(|c| c.meets_box(b, tol))
    }

    /// Closest point on the immersed boundaries. Ties go to the boundary with
    /// the smallest index. `None` when nothing is immersed.
    pub fn closest_point(&self, p: Point) -> Option<Projection> {
        let mut best: Option<(f64, Projection)> = None;
        for (i, b) in self.boundaries.iter().enumerate() {
            let (x, dist, n) = b.nearest(p);
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((
                    dist,
                    Projection {
                        x,
                        d: sub(x, p),
                        n,
                        boundary: i,
                        bc: b.bc,
                    },
                ));
            }
        }
        best.map(|(_, p)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_domain() -> TrueDomain {
        TrueDomain::new(
            [0.0, 1.0, 0.0, 1.0],
            Outer::Immersed(
                Curve::Circle {
                    center: [0.5, 0.5],
                    radius: 0.47,
                },
                Bc::Dirichlet,
            ),
        )
        .unwrap()
    }

    #[test]
    fn radial_projection() {
        let d = circle_domain();
        let p = d.closest_point([0.8, 0.5]).unwrap();
        assert!((p.x[0] - 0.97).abs() < 1e-15 && (p.x[1] - 0.5).abs() < 1e-15);
        assert!((p.d[0] - 0.17).abs() < 1e-14 && p.d[1] == 0.0);
        assert_eq!(p.n, [1.0, 0.0]);
        let on = d.closest_point([0.5, 0.97]).unwrap();
        assert!(norm(on.d) < 1e-15);
    }

    #[test]
    fn hole_normals_point_into_the_hole() {
        let d = TrueDomain::unit_square(Bc::Dirichlet)
            .with_hole(
                Curve::Circle {
                    center: [0.5, 0.5],
                    radius: 0.15,
                },
                Bc::Neumann,
            )
            .unwrap();
        let p = d.closest_point([0.8, 0.5]).unwrap();
        assert_eq!(p.n, [-1.0, 0.0]);
        assert_eq!(p.bc, Bc::Neumann);
        assert!(!d.contains([0.5, 0.5]));
        assert!(d.contains([0.1, 0.1]));
    }

    #[test]
    fn polyline_orientation_is_normalised() {
        let sq = vec![[0.3, 0.3], [0.3, 0.7], [0.7, 0.7], [0.7, 0.3]];
        let d = TrueDomain::new([0.0, 1.0, 0.0, 1.0], Outer::Immersed(Curve::Polyline(sq.clone()), Bc::Dirichlet))
            .unwrap();
        let Curve::Polyline(pts) = &d.boundaries()[0].curve else { unreachable!() };
        assert!(signed_area(pts) > 0.0);
        let p = d.closest_point([0.5, 0.6]).unwrap();
        assert!((p.x[1] - 0.7).abs() < 1e-15);
        assert_eq!(p.n, [0.0, 1.0]);

        let h = TrueDomain::unit_square(Bc::Dirichlet)
            .with_hole(Curve::Polyline(sq), Bc::Neumann)
            .unwrap();
        let p = h.closest_point([0.5, 0.8]).unwrap();
        assert_eq!(p.n, [0.0, -1.0]);
        // corner: averaged normal
        let c = h.closest_point([0.8, 0.8]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c.n[0] + s).abs() < 1e-15 && (c.n[1] + s).abs() < 1e-15);
    }

    #[test]
    fn invalid_domains_are_rejected() {
        let big = Curve::Circle {
            center: [0.5, 0.5],
            radius: 0.6,
        };
        assert!(TrueDomain::new([0.0, 1.0, 0.0, 1.0], Outer::Immersed(big, Bc::Dirichlet)).is_err());
        let bow = vec![[0.2, 0.2], [0.8, 0.8], [0.8, 0.2], [0.2, 0.8]];
        assert!(TrueDomain::new([0.0, 1.0, 0.0, 1.0], Outer::Immersed(Curve::Polyline(bow), Bc::Dirichlet))
            .is_err());
        let c = |r| Curve::Circle { center: [0.5, 0.5], radius: r };
        let d = TrueDomain::unit_square(Bc::Dirichlet).with_hole(c(0.2), Bc::Dirichlet).unwrap();
        assert!(d.with_hole(c(0.1), Bc::Neumann).is_err());
    }

    #[test]
    fn circle_box_cut_test() {
        let d = circle_domain();
        assert!(d.cuts([0.95, 1.0, 0.45, 0.55], 0.0));
        assert!(!d.cuts([0.4, 0.6, 0.4, 0.6], 0.0));
        assert!(!d.cuts([0.0, 0.05, 0.0, 0.05], 0.0));
        // tangent from inside: x = 0.97 edge
        assert!(d.cuts([0.9, 0.97, 0.45, 0.55], 1e-12));
    }
}
