//! B-spline bases on open knot vectors and their refinement relations.

mod basis;
mod knots;
mod two_scale;

pub use basis::{cox_de_boor, cox_de_boor_derivatives, LocalBasisFunction};
pub use knots::{KnotVector, KNOT_TOL};
pub use two_scale::{
    tensor_two_scale, two_scale_coeffs, CanonicalKey, TwoScaleCache, TwoScaleMap,
};

/// A pair of univariate knot vectors spanning a tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSpace {
    pub x: KnotVector,
    pub y: KnotVector,
}

impl TensorSpace {
    pub fn new(x: KnotVector, y: KnotVector) -> Self {
        Self { x, y }
    }

    /// Open uniform space with `n` spans and degree `p` in both directions on `[0,1]^2`.
    pub fn uniform_unit(n: usize, p: usize) -> Self {
        let kv = KnotVector::uniform(n, p, 0.0, 1.0);
        Self { x: kv.clone(), y: kv }
    }

    pub fn num_basis(&self) -> (usize, usize) {
        (self.x.num_basis(), self.y.num_basis())
    }

    pub fn len(&self) -> usize {
        self.x.num_basis() * self.y.num_basis()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Highest per-direction degree.
    pub fn degree(&self) -> usize {
        self.x.degree().max(self.y.degree())
    }

    pub fn h_refined(&self) -> Self {
        Self::new(self.x.h_refine(), self.y.h_refine())
    }

    pub fn p_refined(&self) -> Self {
        Self::new(self.x.p_refine(), self.y.p_refine())
    }

    /// Degree elevation followed by knot insertion.
    pub fn k_refined(&self) -> Self {
        self.p_refined().h_refined()
    }

    /// Tensor basis value `N_i(x) M_j(y)`.
    pub fn eval(&self, i: usize, j: usize, x: f64, y: f64) -> crate::Result<f64> {
        Ok(self.x.eval(i, x)? * self.y.eval(j, y)?)
    }
}
