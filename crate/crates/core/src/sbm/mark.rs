use serde::{Deserialize, Serialize};

use crate::geometry::{Bc, Surrogate};
use crate::thb::{HierarchicalSpace, MarkedSet};

/// Which shifted boundary portion drives refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkWhich {
    Dirichlet,
    Neumann,
    Both,
}

impl MarkWhich {
    fn selects(self, bc: Bc) -> bool {
        matches!(
            (self, bc),
            (MarkWhich::Both, _) | (MarkWhich::Dirichlet, Bc::Dirichlet) | (MarkWhich::Neumann, Bc::Neumann)
        )
    }
}

/// Finest-level untruncated functions that are non-zero on the selected
/// shifted segments, i.e. those supported on a segment's owning element.
pub fn mark_surrogate_functions(space: &HierarchicalSpace, surrogate: &Surrogate, which: MarkWhich) -> MarkedSet {
    let mut hit = vec![false; space.num_dofs()];
    for seg in surrogate.shifted_segments(None) {
        if which.selects(seg.kind.bc()) {
            for &f in space.element_functions(seg.element) {
                hit[f as usize] = true;
            }
        }
    }
    space.mark_functions(|id, f| hit[id] && !f.is_truncated())
}
