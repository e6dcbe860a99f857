use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use faer::linalg::solvers::SolveLstsq;
use faer::prelude::*;

use super::{KnotVector, LocalBasisFunction, KNOT_TOL};
use crate::{Error, Result};

/// Shape-only identity of a parent/children configuration: knots translated so
/// the parent starts at 0, scaled by the parent's smallest positive span and
/// rounded to 12 decimals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalKey {
    parent_degree: usize,
    child_degree: usize,
    parent: Vec<i64>,
    children: Vec<Vec<i64>>,
}

impl CanonicalKey {
    pub fn new(parent: &LocalBasisFunction, children: &[LocalBasisFunction]) -> Self {
        let pk = parent.knots();
        let shift = pk[0];
        let scale = pk
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > KNOT_TOL)
            .fold(f64::INFINITY, f64::min);
        let norm = |k: f64| ((k - shift) / scale * 1e12).round() as i64;
        Self {
            parent_degree: parent.degree(),
            child_degree: children.first().map_or(parent.degree(), |c| c.degree()),
            parent: pk.iter().copied().map(norm).collect(),
            children: children
                .iter()
                .map(|c| c.knots().iter().copied().map(norm).collect())
                .collect(),
        }
    }
}

fn solve_at(
    parent: &LocalBasisFunction,
    children: &[LocalBasisFunction],
    samples: &[f64],
) -> Option<Vec<f64>> {
    let n = children.len();
    let m = samples.len();
    let a = Mat::<f64>::from_fn(m, n, |r, c| children[c].eval(samples[r]));
    let b = Col::<f64>::from_fn(m, |r| parent.eval(samples[r]));
    let x = if m == n {
        let lu = a.partial_piv_lu();
        let mut x = lu.solve(&b);
        let r = &b - &a * &x;
        x += lu.solve(&r);
        x
    } else {
        let qr = a.qr();
        let mut x = qr.solve_lstsq(&b);
        let r = &b - &a * &x;
        x += qr.solve_lstsq(&r);
        x
    };
    let coeffs: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return None;
    }
    // verify on points not used by the solve
    let (lo, hi) = parent.support();
    let m = 4 * n + 7;
    for k in 0..m {
        let t = lo + (hi - lo) * (k as f64 + 0.37) / m as f64;
        let rec: f64 = children.iter().zip(&coeffs).map(|(c, w)| w * c.eval(t)).sum();
        let pv = parent.eval(t);
        if (rec - pv).abs() > 1e-11 * pv.abs().max(1.0) {
            return None;
        }
    }
    Some(coeffs)
}

/// Coefficients `lambda` with `parent = sum_j lambda_j child_j`, found by
/// collocation inside the parent support.
///
/// The primary system is overdetermined, with Gauss points on every knot span
/// of the children, and is solved in the least-squares sense. Square
/// collocation at the children's Greville abscissae is the fallback. Failure of
/// both means the child set does not span the parent.
pub fn two_scale_coeffs(
    parent: &LocalBasisFunction,
    children: &[LocalBasisFunction],
) -> Result<Vec<f64>> {
    let singular = || Error::SingularTwoScale {
        parent: parent.knots().to_vec(),
        children: children.len(),
    };
    let n = children.len();
    if n == 0 || children.iter().any(|c| !c.support_within(parent)) {
        return Err(singular());
    }
    let mut breaks: Vec<f64> = children
        .iter()
        .flat_map(|c| c.knots().iter().copied())
        .chain(parent.knots().iter().copied())
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= KNOT_TOL);
    let q = children[0].degree().max(parent.degree()) + 1;
    let samples: Vec<f64> = breaks
        .windows(2)
        .flat_map(|w| crate::quadrature::gauss_on(q, w[0], w[1]).into_iter().map(|(x, _)| x))
        .collect();
    if samples.len() >= n {
        if let Some(c) = solve_at(parent, children, &samples) {
            return Ok(c);
        }
    }
    let greville: Vec<f64> = children
        .iter()
        .map(|c| {
            let k = c.knots();
            let p = c.degree();
            let g = if p == 0 {
                0.5 * (k[0] + k[1])
            } else {
                k[1..=p].iter().sum::<f64>() / p as f64
            };
            // nudge off the support ends where every child may vanish
            let (a, b) = c.support();
            g.clamp(a + 1e-3 * (b - a), b - 1e-3 * (b - a))
        })
        .collect();
    solve_at(parent, children, &greville).ok_or_else(singular)
}

/// Memoised two-scale coefficients keyed by [`CanonicalKey`]. Safe for
/// concurrent readers and writers.
#[derive(Debug, Default)]
pub struct TwoScaleCache {
    map: RwLock<HashMap<CanonicalKey, Arc<[f64]>>>,
}

impl TwoScaleCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("two-scale cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coeffs(
        &self,
        parent: &LocalBasisFunction,
        children: &[LocalBasisFunction],
    ) -> Result<Arc<[f64]>> {
        let key = CanonicalKey::new(parent, children);
        if let Some(c) = self.map.read().expect("two-scale cache poisoned").get(&key) {
            return Ok(c.clone());
        }
        let c: Arc<[f64]> = two_scale_coeffs(parent, children)?.into();
        let mut w = self.map.write().expect("two-scale cache poisoned");
        Ok(w.entry(key).or_insert(c).clone())
    }
}

/// Sparse coarse-to-fine coefficient matrix: row `i` lists `(j, lambda_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoScaleMap {
    n_fine: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Coefficients below this magnitude are treated as structural zeros.
const COEFF_DROP: f64 = 1e-13;

impl TwoScaleMap {
    pub fn from_rows(n_fine: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        Self { n_fine, rows }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_fine: n,
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Builds the relation between two nested univariate spaces. Children of a
    /// coarse function are the fine functions whose support it contains.
    pub fn between(coarse: &KnotVector, fine: &KnotVector, cache: &TwoScaleCache) -> Result<Self> {
        let pc = coarse.degree();
        let pf = fine.degree();
        let mut rows = Vec::with_capacity(coarse.num_basis());
        for i in 0..coarse.num_basis() {
            let parent = LocalBasisFunction::new(coarse.local_knots(i).to_vec(), pc)?;
            let (a, b) = coarse.support(i);
            let idx: Vec<usize> = (0..fine.num_basis())
                .filter(|&j| {
                    let (c, d) = fine.support(j);
                    c >= a - KNOT_TOL && d <= b + KNOT_TOL
                })
                .collect();
            let children = idx
                .iter()
                .map(|&j| LocalBasisFunction::new(fine.local_knots(j).to_vec(), pf))
                .collect::<Result<Vec<_>>>()?;
            let coeffs = cache.coeffs(&parent, &children)?;
            rows.push(
                idx.into_iter()
                    .zip(coeffs.iter().copied())
                    .filter(|(_, c)| c.abs() > COEFF_DROP)
                    .collect(),
            );
        }
        Ok(Self {
            n_fine: fine.num_basis(),
            rows,
        })
    }

    pub fn n_coarse(&self) -> usize {
        self.rows.len()
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map_or(0.0, |(_, c)| *c)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Kronecker product: entry `((i1, i2), (j1, j2)) = a[i1, j1] * b[i2, j2]`,
/// with row index `i1 * b.n_coarse() + i2` and column `j1 * b.n_fine() + j2`.
pub fn tensor_two_scale(a: &TwoScaleMap, b: &TwoScaleMap) -> TwoScaleMap {
    let mut rows = Vec::with_capacity(a.n_coarse() * b.n_coarse());
    for ra in &a.rows {
        for rb in &b.rows {
            let mut row = Vec::with_capacity(ra.len() * rb.len());
            for &(ja, ca) in ra {
                for &(jb, cb) in rb {
                    row.push((ja * b.n_fine + jb, ca * cb));
                }
            }
            rows.push(row);
        }
    }
    TwoScaleMap {
        n_fine: a.n_fine * b.n_fine,
        rows,
    }
}
