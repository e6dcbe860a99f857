//! Relative L2 and H1 errors over the surrogate domain.

use crate::geometry::Surrogate;
use crate::manufactured::Manufactured;
use crate::par::{self, Execution};
use crate::quadrature::gauss_on;
use crate::thb::HierarchicalSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2_rel: f64,
    pub h1_rel: f64,
    /// Absolute values before normalisation.
    pub l2_abs: f64,
    pub h1_abs: f64,
}

/// Errors of the field `sum_i coeffs[i] phi_i` against `exact`, integrated
/// over the surrogate elements with `(q + 1)^2` Gauss points, `q` being the
/// element's quadrature degree. `coeffs` is indexed by active function id.
/// The H1 norm includes the L2 part.
pub fn compute_errors(
    space: &HierarchicalSpace,
    surrogate: &Surrogate,
    coeffs: &[f64],
    exact: &Manufactured,
    exec: Execution,
) -> ErrorNorms {
    let elements: Vec<usize> = surrogate.active_elements().collect();
    // (err_l2^2, err_grad^2, u_l2^2, u_grad^2) per element, summed in order
    let parts = par::map(exec, &elements, |&e| {
        let el = &space.elements()[e];
        let nq = el.quad_degree + 1;
        let gx = gauss_on(nq, el.x.0, el.x.1);
        let gy = gauss_on(nq, el.y.0, el.y.1);
        let mut acc = [0.0; 4];
        for &(y, wy) in &gy {
            for &(x, wx) in &gx {
                let w = wx * wy;
                let pb = space.eval_on_element(e, x, y, 1);
                let (mut v, mut g) = (0.0, [0.0; 2]);
                for (r, &f) in pb.ids.iter().enumerate() {
                    let c = coeffs[f as usize];
                    v += c * pb.value(r);
                    let d = pb.grad(r);
                    g[0] += c * d[0];
                    g[1] += c * d[1];
                }
                let u = exact.u(x, y);
                let du = exact.grad(x, y);
                acc[0] += w * (v - u).powi(2);
                acc[1] += w * ((g[0] - du[0]).powi(2) + (g[1] - du[1]).powi(2));
                acc[2] += w * u * u;
                acc[3] += w * (du[0] * du[0] + du[1] * du[1]);
            }
        }
        acc
    });
    let mut s = [0.0; 4];
    for p in parts {
        for k in 0..4 {
            s[k] += p[k];
        }
    }
    let l2 = s[0].sqrt();
    let h1 = (s[0] + s[1]).sqrt();
    ErrorNorms {
        l2_abs: l2,
        h1_abs: h1,
        l2_rel: l2 / s[2].sqrt(),
        h1_rel: h1 / (s[2] + s[3]).sqrt(),
    }
}
