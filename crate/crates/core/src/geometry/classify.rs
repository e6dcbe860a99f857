use super::TrueDomain;
use crate::par::{self, Execution};
use crate::thb::HierarchicalSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementClass {
    Inside,
    Outside,
    Cut,
}

/// Relative tolerance (times the element size) under which a boundary
/// touching an element counts as cutting it.
pub(crate) const TANGENCY_TOL: f64 = 1e-10;

/// Classifies every active element against the true domain. An element is cut
/// when any immersed boundary meets its closed box; otherwise its centre decides.
pub fn classify_elements(space: &HierarchicalSpace, domain: &TrueDomain, exec: Execution) -> Vec<ElementClass> {
    par::map(exec, space.elements(), |e| {
        let b = [e.x.0, e.x.1, e.y.0, e.y.1];
        if domain.cuts(b, TANGENCY_TOL * e.size()) {
            ElementClass::Cut
        } else if domain.contains([0.5 * (b[0] + b[1]), 0.5 * (b[2] + b[3])]) {
            ElementClass::Inside
        } else {
            ElementClass::Outside
        }
    })
}
