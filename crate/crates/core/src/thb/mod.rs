//! Truncated hierarchical B-splines with h-, p- and k-refined levels.
//!
//! Every active function stores its (possibly truncated) shape as a sparse
//! expansion over the tensor basis of a single level, so evaluation and
//! differentiation reduce to weighted sums of ordinary tensor B-splines.

mod dump;
mod eval;
mod hierarchy;

pub use eval::PointBasis;
pub use hierarchy::{
    ActiveFunction, Element, Expansion, HierarchicalSpace, Level, LevelOrigin, MarkedSet,
};

use serde::{Deserialize, Serialize};

/// How a level is derived from its predecessor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// knot insertion (bisect every span)
    H,
    /// degree elevation keeping continuity
    P,
    /// degree elevation followed by knot insertion
    K,
}

impl Strategy {
    pub fn apply(self, space: &crate::splines::TensorSpace) -> crate::splines::TensorSpace {
        match self {
            Strategy::H => space.h_refined(),
            Strategy::P => space.p_refined(),
            Strategy::K => space.k_refined(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::H => "h",
            Strategy::P => "p",
            Strategy::K => "k",
        }
    }
}

/// Index of the break equal to `v`, within [`KNOT_TOL`](crate::splines::KNOT_TOL) scaled
/// to the mesh; `v` must be a breakpoint.
pub(crate) fn break_index(breaks: &[f64], v: f64) -> usize {
    let i = breaks.partition_point(|&b| b < v - 1e-10);
    debug_assert!(
        i < breaks.len() && (breaks[i] - v).abs() <= 1e-10,
        "{v} is not a breakpoint"
    );
    i.min(breaks.len() - 1)
}

/// Cell index containing `v` (half-open, last cell closed).
pub(crate) fn cell_index(breaks: &[f64], v: f64) -> usize {
    let n = breaks.len() - 1;
    let i = breaks.partition_point(|&b| b <= v);
    i.saturating_sub(1).min(n - 1)
}
