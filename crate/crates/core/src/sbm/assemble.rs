use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use super::shift::{gradient_weights, value_weights, ShiftConfig};
use crate::geometry::{Bc, SegmentKind, Surrogate};
use crate::manufactured::Manufactured;
use crate::par::{self, Execution};
use crate::quadrature::gauss_on;
use crate::thb::{HierarchicalSpace, PointBasis};
use crate::{Error, Result};

/// Nitsche parameters. The default is the penalty-free variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NitscheConfig {
    pub theta: f64,
    pub alpha: f64,
}

impl Default for NitscheConfig {
    fn default() -> Self {
        Self {
            theta: -1.0,
            alpha: 0.0,
        }
    }
}

impl NitscheConfig {
    pub fn validate(&self) -> Result<()> {
        if self.theta != 1.0 && self.theta != -1.0 {
            return Err(Error::Config(format!("nitsche.theta must be 1 or -1, got {}", self.theta)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("nitsche.alpha must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Global system over the functions supported on the surrogate domain.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    /// Active function id of every unknown.
    pub dofs: Vec<usize>,
    /// Number of active functions in the space.
    pub num_functions: usize,
    /// Boundary points with `n~ . n` below 0.1.
    pub grazing_points: usize,
}

impl AssembledSystem {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// Coefficients indexed by active function id; unused functions get zero.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_functions];
        for (k, &f) in self.dofs.iter().enumerate() {
            out[f] = x[k];
        }
        out
    }
}

/// Dense local block: rows are test functions, columns trial functions.
struct Local {
    dofs: Vec<usize>,
    mat: Vec<f64>,
    rhs: Vec<f64>,
    grazing: usize,
}

impl Local {
    fn new(dofs: Vec<usize>) -> Self {
        let n = dofs.len();
        Self {
            dofs,
            mat: vec![0.0; n * n],
            rhs: vec![0.0; n],
            grazing: 0,
        }
    }
}

/// Assembles the shifted-boundary Nitsche system for `-lap u = f`.
///
/// Volume terms are integrated over the surrogate elements. On surrogate
/// edges the Dirichlet and Neumann conditions are transferred with Taylor
/// shifts built from each function's own degree; body-fitted edges of the
/// background rectangle use plain Nitsche terms with the same parameters.
/// Local blocks are computed independently and summed in a fixed order.
pub fn assemble(
    space: &HierarchicalSpace,
    surrogate: &Surrogate,
    exact: &Manufactured,
    shift: &ShiftConfig,
    nitsche: &NitscheConfig,
    exec: Execution,
) -> Result<AssembledSystem> {
    nitsche.validate()?;
    let dofs = surrogate.supported_functions(space);
    if dofs.is_empty() {
        return Err(Error::Assembly("no active function is supported on the surrogate domain".into()));
    }
    let mut index = vec![usize::MAX; space.num_dofs()];
    for (k, &f) in dofs.iter().enumerate() {
        index[f] = k;
    }

    let elements: Vec<usize> = surrogate.active_elements().collect();
    let volume = par::map(exec, &elements, |&e| volume_block(space, e, exact, &index));
    let edges = par::map(exec, &surrogate.segments, |s| {
        edge_block(space, s, exact, shift, nitsche, &index)
    });

    let n = dofs.len();
    let mut rhs = vec![0.0; n];
    let mut triplets = Vec::new();
    let mut grazing = 0;
    for block in volume.into_iter().chain(edges.into_iter().collect::<Result<Vec<_>>>()?) {
        let m = block.dofs.len();
        for (i, &gi) in block.dofs.iter().enumerate() {
            rhs[gi] += block.rhs[i];
            for (j, &gj) in block.dofs.iter().enumerate() {
                let v = block.mat[i * m + j];
                if v != 0.0 {
                    triplets.push(Triplet::new(gi, gj, v));
                }
            }
        }
        grazing += block.grazing;
    }
    if grazing > 0 {
        log::warn!("{grazing} boundary points have n~ . n < 0.1; Neumann transfer is poorly conditioned there");
    }
    let matrix = SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Assembly(format!("sparse matrix construction failed: {e:?}")))?;
    Ok(AssembledSystem {
        matrix,
        rhs,
        dofs,
        num_functions: space.num_dofs(),
        grazing_points: grazing,
    })
}

fn local_dofs(pb: &PointBasis, index: &[usize]) -> Vec<usize> {
    pb.ids.iter().map(|&f| index[f as usize]).collect()
}

fn volume_block(space: &HierarchicalSpace, e: usize, exact: &Manufactured, index: &[usize]) -> Local {
    let el = &space.elements()[e];
    let nq = el.quad_degree + 1;
    let gx = gauss_on(nq, el.x.0, el.x.1);
    let gy = gauss_on(nq, el.y.0, el.y.1);
    let mut local: Option<Local> = None;
    for &(y, wy) in &gy {
        for &(x, wx) in &gx {
            let w = wx * wy;
            let pb = space.eval_on_element(e, x, y, 1);
            let l = local.get_or_insert_with(|| Local::new(local_dofs(&pb, index)));
            let m = pb.len();
            let f = exact.f(x, y);
            for i in 0..m {
                let gi = pb.grad(i);
                l.rhs[i] += w * f * pb.value(i);
                for j in 0..m {
                    let gj = pb.grad(j);
                    l.mat[i * m + j] += w * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
            }
        }
    }
    local.expect("at least one quadrature point")
}

fn edge_block(
    space: &HierarchicalSpace,
    seg: &crate::geometry::Segment,
    exact: &Manufactured,
    shift: &ShiftConfig,
    nitsche: &NitscheConfig,
    index: &[usize],
) -> Result<Local> {
    let e = seg.element;
    let order = space.quadrature_degree(e);
    let nt = seg.normal();
    let h = space.elements()[e].size();
    let (theta, alpha) = (nitsche.theta, nitsche.alpha);
    let mut local: Option<Local> = None;
    for pt in &seg.points {
        let pb = space.eval_on_element(e, pt.x[0], pt.x[1], order);
        if pb.is_empty() {
            return Err(Error::Assembly(format!(
                "no active function on the boundary segment at ({:.6}, {:.6})",
                pt.x[0], pt.x[1]
            )));
        }
        let l = local.get_or_insert_with(|| Local::new(local_dofs(&pb, index)));
        let m = pb.len();
        let w = pt.weight;
        let value: Vec<f64> = (0..m).map(|r| pb.value(r)).collect();
        let dn: Vec<f64> = (0..m)
            .map(|r| {
                let g = pb.grad(r);
                g[0] * nt[0] + g[1] * nt[1]
            })
            .collect();
        let degree = |r: usize| space.functions()[pb.ids[r] as usize].degree;

        match (seg.kind, pt.proj) {
            (SegmentKind::BodyFitted(Bc::Dirichlet), _) => {
                let ud = exact.u(pt.x[0], pt.x[1]);
                for i in 0..m {
                    l.rhs[i] += w * (-theta * ud * dn[i] + alpha / h * ud * value[i]);
                    for j in 0..m {
                        l.mat[i * m + j] +=
                            w * (-dn[j] * value[i] - theta * value[j] * dn[i] + alpha / h * value[j] * value[i]);
                    }
                }
            }
            (SegmentKind::BodyFitted(Bc::Neumann), _) => {
                let t = exact.flux(pt.x[0], pt.x[1], nt);
                for i in 0..m {
                    l.rhs[i] += w * t * value[i];
                }
            }
            (SegmentKind::Surrogate(Bc::Dirichlet), Some(p)) => {
                let ud = exact.u(p.x[0], p.x[1]);
                let shifted: Vec<f64> = (0..m)
                    .map(|r| {
                        value_weights(shift.dirichlet_kind(degree(r)), p.d)
                            .into_iter()
                            .map(|(a, b, c)| c * pb.deriv(r, a, b))
                            .sum()
                    })
                    .collect();
                for i in 0..m {
                    l.rhs[i] += w * (-theta * ud * dn[i] + alpha / h * ud * value[i]);
                    for j in 0..m {
                        l.mat[i * m + j] +=
                            w * (-dn[j] * value[i] - theta * shifted[j] * dn[i] + alpha / h * shifted[j] * value[i]);
                    }
                }
            }
            (SegmentKind::Surrogate(Bc::Neumann), Some(p)) => {
                let nn = nt[0] * p.n[0] + nt[1] * p.n[1];
                if nn < 0.1 {
                    l.grazing += 1;
                }
                let t = exact.flux(p.x[0], p.x[1], p.n);
                let shifted_flux: Vec<f64> = (0..m)
                    .map(|r| {
                        let [wx, wy] = gradient_weights(shift.neumann_kind(degree(r)), p.d);
                        let gx: f64 = wx.into_iter().map(|(a, b, c)| c * pb.deriv(r, a + 1, b)).sum();
                        let gy: f64 = wy.into_iter().map(|(a, b, c)| c * pb.deriv(r, a, b + 1)).sum();
                        gx * p.n[0] + gy * p.n[1]
                    })
                    .collect();
                for i in 0..m {
                    l.rhs[i] += w * t * nn * value[i];
                    for j in 0..m {
                        l.mat[i * m + j] += w * (-dn[j] + shifted_flux[j] * nn) * value[i];
                    }
                }
            }
            (SegmentKind::Surrogate(_), None) => {
                return Err(Error::Assembly("surrogate point without a projection".into()));
            }
        }
    }
    local.ok_or_else(|| Error::Assembly("boundary segment without quadrature points".into()))
}
