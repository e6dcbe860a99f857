use super::{classify_elements, Bc, ElementClass, Point, Projection, TrueDomain};
use crate::par::{self, Execution};
use crate::quadrature::gauss_on;
use crate::thb::HierarchicalSpace;
use crate::{Error, Result};

/// Element side, named by its outward direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn normal(self) -> Point {
        match self {
            Side::Bottom => [0.0, -1.0],
            Side::Right => [1.0, 0.0],
            Side::Top => [0.0, 1.0],
            Side::Left => [-1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// Edge facing cut or outside elements; conditions are shifted to the true boundary.
    Surrogate(Bc),
    /// Edge on the background rectangle, which is itself the true boundary.
    BodyFitted(Bc),
}

impl SegmentKind {
    pub fn bc(self) -> Bc {
        match self {
            SegmentKind::Surrogate(b) | SegmentKind::BodyFitted(b) => b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: Point,
    pub weight: f64,
    /// Closest-point data; `None` on body-fitted edges.
    pub proj: Option<Projection>,
}

/// A straight piece of the surrogate boundary lying on one side of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub element: usize,
    pub side: Side,
    pub kind: SegmentKind,
    pub points: Vec<BoundaryPoint>,
}

impl Segment {
    /// Outward normal of the surrogate domain.
    pub fn normal(&self) -> Point {
        self.side.normal()
    }

    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }
}

/// Surrogate domain (the inside elements) and its boundary.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub classes: Vec<ElementClass>,
    pub segments: Vec<Segment>,
}

impl Surrogate {
    /// Classifies the active mesh and builds the surrogate.
    pub fn build(space: &HierarchicalSpace, domain: &TrueDomain, exec: Execution) -> Result<Self> {
        let classes = classify_elements(space, domain, exec);
        build_surrogate(space, domain, classes, exec)
    }

    pub fn is_active(&self, e: usize) -> bool {
        self.classes[e] == ElementClass::Inside
    }

    pub fn active_elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.classes.len()).filter(|&e| self.is_active(e))
    }

    pub fn count(&self, class: ElementClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Segments whose shifted condition matches `which` (all surrogate
    /// segments when `None`); body-fitted edges are excluded.
    pub fn shifted_segments(&self, which: Option<Bc>) -> impl Iterator<Item = &Segment> + '_ {
        self.segments.iter().filter(move |s| match s.kind {
            SegmentKind::Surrogate(b) => which.is_none_or(|w| w == b),
            SegmentKind::BodyFitted(_) => false,
        })
    }

    /// Largest distance between a surrogate quadrature point and its projection.
    pub fn max_shift(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| &s.points)
            .filter_map(|p| p.proj)
            .map(|p| p.d[0].hypot(p.d[1]))
            .fold(0.0, f64::max)
    }

    /// Active functions supported on at least one surrogate element, ascending.
    pub fn supported_functions(&self, space: &HierarchicalSpace) -> Vec<usize> {
        let mut used = vec![false; space.num_dofs()];
        for e in self.active_elements() {
            for &f in space.element_functions(e) {
                used[f as usize] = true;
            }
        }
        (0..used.len()).filter(|&f| used[f]).collect()
    }
}

struct Draft {
    a: Point,
    b: Point,
    element: usize,
    side: Side,
    body_fitted: bool,
}

/// Builds the surrogate boundary from a classification: the surrogate domain is
/// the set of inside elements and its boundary is every edge piece shared with a
/// non-inside element or the background boundary.
pub fn build_surrogate(
    space: &HierarchicalSpace,
    domain: &TrueDomain,
    classes: Vec<ElementClass>,
    exec: Execution,
) -> Result<Surrogate> {
    let inside: Vec<bool> = classes.iter().map(|&c| c == ElementClass::Inside).collect();
    if !inside.iter().any(|&b| b) {
        return Err(Error::Geometry(
            "no element lies inside the domain; the mesh is too coarse for the geometry".into(),
        ));
    }
    check_connected(space, &inside)?;

    let cells = space.cells();
    let (nx, ny) = (cells.nx(), cells.ny());
    let bx = &cells.breaks_x;
    let by = &cells.breaks_y;
    let mut drafts = Vec::new();
    for (e, el) in space.elements().iter().enumerate() {
        if !inside[e] {
            continue;
        }
        let ((x0, x1), (y0, y1)) = cells.cells_of([el.x.0, el.x.1, el.y.0, el.y.1]);
        for side in Side::ALL {
            // units along the side in counter-clockwise order, with the neighbour cell
            let units: Vec<(Point, Point, Option<(usize, usize)>)> = match side {
                Side::Bottom => (x0..x1)
                    .map(|c| ([bx[c], by[y0]], [bx[c + 1], by[y0]], (y0 > 0).then(|| (c, y0 - 1))))
                    .collect(),
                Side::Right => (y0..y1)
                    .map(|c| ([bx[x1], by[c]], [bx[x1], by[c + 1]], (x1 < nx).then_some((x1, c))))
                    .collect(),
                Side::Top => (x0..x1)
                    .rev()
                    .map(|c| ([bx[c + 1], by[y1]], [bx[c], by[y1]], (y1 < ny).then_some((c, y1))))
                    .collect(),
                Side::Left => (y0..y1)
                    .rev()
                    .map(|c| ([bx[x0], by[c + 1]], [bx[x0], by[c]], (x0 > 0).then(|| (x0 - 1, c))))
                    .collect(),
            };
            let mut open: Option<Draft> = None;
            for (a, b, nb) in units {
                let boundary = match nb {
                    None => Some(domain.body_fitted().is_some()),
                    Some((cx, cy)) => (!inside[cells.owner(cx, cy)]).then_some(false),
                };
                match (boundary, open.as_mut()) {
                    (Some(bf), Some(d)) if d.body_fitted == bf => d.b = b,
                    (Some(bf), _) => {
                        drafts.extend(open.take());
                        open = Some(Draft {
                            a,
                            b,
                            element: e,
                            side,
                            body_fitted: bf,
                        });
                    }
                    (None, _) => drafts.extend(open.take()),
                }
            }
            drafts.extend(open);
        }
    }

    let built = par::map(exec, &drafts, |d| finish(space, domain, d));
    let segments = built.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Surrogate { classes, segments })
}

fn finish(space: &HierarchicalSpace, domain: &TrueDomain, d: &Draft) -> Result<Segment> {
    let nq = space.quadrature_degree(d.element) + 1;
    let len = (d.b[0] - d.a[0]).hypot(d.b[1] - d.a[1]);
    let mut points = Vec::with_capacity(nq);
    for (t, w) in gauss_on(nq, 0.0, 1.0) {
        let x = [d.a[0] + t * (d.b[0] - d.a[0]), d.a[1] + t * (d.b[1] - d.a[1])];
        let proj = if d.body_fitted {
            None
        } else {
            Some(domain.closest_point(x).ok_or_else(|| {
                Error::Geometry("surrogate edge found but the domain has no immersed boundary".into())
            })?)
        };
        points.push(BoundaryPoint {
            x,
            weight: w * len,
            proj,
        });
    }
    let kind = if d.body_fitted {
        SegmentKind::BodyFitted(domain.body_fitted().expect("body-fitted edge"))
    } else {
        let bc = points[0].proj.expect("projected").bc;
        if let Some(p) = points.iter().filter_map(|p| p.proj).find(|p| p.bc != bc) {
            return Err(Error::Geometry(format!(
                "surrogate edge from ({:.6}, {:.6}) to ({:.6}, {:.6}) projects onto both {bc:?} and {:?} boundaries",
                d.a[0], d.a[1], d.b[0], d.b[1], p.bc
            )));
        }
        SegmentKind::Surrogate(bc)
    };
    Ok(Segment {
        a: d.a,
        b: d.b,
        element: d.element,
        side: d.side,
        kind,
        points,
    })
}

fn check_connected(space: &HierarchicalSpace, inside: &[bool]) -> Result<()> {
    let cells = space.cells();
    let n = inside.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for cy in 0..cells.ny() {
        for cx in 0..cells.nx() {
            let a = cells.owner(cx, cy);
            if !inside[a] {
                continue;
            }
            for (nx, ny) in [(cx + 1, cy), (cx, cy + 1)] {
                if nx < cells.nx() && ny < cells.ny() {
                    let b = cells.owner(nx, ny);
                    if inside[b] {
                        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = (0..n).filter(|&e| inside[e]).map(|e| find(&mut parent, e)).collect();
    roots.sort_unstable();
    roots.dedup();
    if roots.len() > 1 {
        return Err(Error::Geometry(format!(
            "surrogate domain splits into {} disconnected pieces; refine the background mesh",
            roots.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::geometry::{Curve, Outer};
    use crate::splines::TensorSpace;
    use crate::thb::Strategy;

    fn circle(r: f64) -> Curve {
        Curve::Circle { center: [0.5, 0.5], radius: r }
    }

    fn key(p: Point) -> (i64, i64) {
        ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64)
    }

    fn assert_watertight(s: &Surrogate) {
        let mut deg: HashMap<(i64, i64), i32> = HashMap::new();
        for seg in &s.segments {
            *deg.entry(key(seg.a)).or_default() += 1;
            *deg.entry(key(seg.b)).or_default() -= 1;
        }
        // every vertex has as many outgoing as incoming segments
        assert!(deg.values().all(|&d| d == 0));
    }

    #[test]
    fn body_fitted_square_has_only_body_fitted_edges() {
        let space = HierarchicalSpace::new(TensorSpace::uniform_unit(4, 2)).unwrap();
        let s = Surrogate::build(&space, &TrueDomain::unit_square(Bc::Neumann), Execution::Sequential).unwrap();
        assert_eq!(s.shifted_segments(None).count(), 0);
        let len: f64 = s.segments.iter().map(Segment::length).sum();
        assert!((len - 4.0).abs() < 1e-14);
        assert!(s.segments.iter().all(|g| g.kind == SegmentKind::BodyFitted(Bc::Neumann)));
        assert_watertight(&s);
    }

    #[test]
    fn hole_gives_a_closed_staircase() {
        let space = HierarchicalSpace::new(TensorSpace::uniform_unit(20, 2)).unwrap();
        let domain = TrueDomain::unit_square(Bc::Dirichlet)
            .with_hole(circle(0.15), Bc::Dirichlet)
            .unwrap();
        let s = Surrogate::build(&space, &domain, Execution::Parallel).unwrap();
        assert_watertight(&s);
        let inner: Vec<_> = s.shifted_segments(None).collect();
        assert!(!inner.is_empty());
        for seg in &inner {
            for p in &seg.points {
                let pr = p.proj.unwrap();
                let r = (pr.x[0] - 0.5).hypot(pr.x[1] - 0.5);
                assert!((r - 0.15).abs() < 1e-12);
                // projection lies between the surrogate point and the hole centre
                assert!(pr.d[0].hypot(pr.d[1]) <= 2.0 * 0.05 * 2f64.sqrt());
                let u = [(pr.x[0] - 0.5) / 0.15, (pr.x[1] - 0.5) / 0.15];
                assert!((pr.n[0] + u[0]).abs() < 1e-12 && (pr.n[1] + u[1]).abs() < 1e-12);
            }
            // neighbour across the segment is not inside
            assert!(s.is_active(seg.element));
        }
        let seq = Surrogate::build(&space, &domain, Execution::Sequential).unwrap();
        assert_eq!(seq.segments, s.segments);
    }

    #[test]
    fn surrogate_approaches_the_boundary_under_refinement() {
        let domain = TrueDomain::new([0.0, 1.0, 0.0, 1.0], Outer::Immersed(circle(0.47), Bc::Neumann)).unwrap();
        let mut last = f64::INFINITY;
        for n in [10, 20, 40, 80, 160] {
            let space = HierarchicalSpace::new(TensorSpace::uniform_unit(n, 1)).unwrap();
            let s = Surrogate::build(&space, &domain, Execution::Parallel).unwrap();
            assert_watertight(&s);
            let m = s.max_shift();
            assert!(m <= last + 1e-15, "n={n}: {m} > {last}");
            assert!(m <= 2.0 * 2f64.sqrt() / n as f64);
            last = m;
        }
    }

    #[test]
    fn annulus_tags_follow_the_boundaries() {
        let domain = TrueDomain::new([0.0, 1.0, 0.0, 1.0], Outer::Immersed(circle(0.47), Bc::Neumann))
            .unwrap()
            .with_hole(circle(0.1), Bc::Dirichlet)
            .unwrap();
        let space = HierarchicalSpace::new(TensorSpace::uniform_unit(40, 2)).unwrap();
        let s = Surrogate::build(&space, &domain, Execution::Parallel).unwrap();
        for seg in s.shifted_segments(Some(Bc::Neumann)) {
            let c = [(seg.a[0] + seg.b[0]) / 2.0 - 0.5, (seg.a[1] + seg.b[1]) / 2.0 - 0.5];
            assert!(c[0].hypot(c[1]) > 0.3);
        }
        assert!(s.shifted_segments(Some(Bc::Dirichlet)).count() > 0);
        assert_watertight(&s);
    }

    #[test]
    fn refined_hierarchy_surrogate_is_watertight() {
        let domain = TrueDomain::unit_square(Bc::Dirichlet)
            .with_hole(circle(0.15), Bc::Neumann)
            .unwrap();
        let space = HierarchicalSpace::new(TensorSpace::uniform_unit(20, 2)).unwrap();
        let fine = space
            .refine(&space.mark_within(&[[0.25, 0.75, 0.25, 0.75]]), Strategy::H)
            .unwrap();
        let a = Surrogate::build(&space, &domain, Execution::Parallel).unwrap();
        let b = Surrogate::build(&fine, &domain, Execution::Parallel).unwrap();
        assert_watertight(&b);
        assert!(b.max_shift() < a.max_shift());
    }

    #[test]
    fn too_coarse_mesh_is_reported() {
        let domain = TrueDomain::new([0.0, 1.0, 0.0, 1.0], Outer::Immersed(circle(0.2), Bc::Dirichlet)).unwrap();
        let space = HierarchicalSpace::new(TensorSpace::uniform_unit(2, 1)).unwrap();
        assert!(matches!(
            Surrogate::build(&space, &domain, Execution::Sequential),
            Err(Error::Geometry(_))
        ));
    }
}
