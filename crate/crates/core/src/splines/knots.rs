use crate::{Error, Result};

/// Absolute tolerance for comparing knot values.
pub const KNOT_TOL: f64 = 1e-12;

/// Open, non-decreasing knot vector together with its degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots cannot hold an open vector of degree {degree}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be non-decreasing".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if last - first <= KNOT_TOL {
            return Err(Error::InvalidKnots("empty parameter interval".into()));
        }
        let head = knots.iter().take_while(|&&k| (k - first).abs() <= KNOT_TOL).count();
        let tail = knots.iter().rev().take_while(|&&k| (k - last).abs() <= KNOT_TOL).count();
        if head != degree + 1 || tail != degree + 1 {
            return Err(Error::InvalidKnots(format!(
                "end multiplicities {head}/{tail}, open vector of degree {degree} needs {}",
                degree + 1
            )));
        }
        let kv = Self { knots, degree };
        if let Some(m) = kv.multiplicities().iter().map(|(_, m)| *m).max() {
            if m > degree + 1 {
                return Err(Error::InvalidKnots(format!(
                    "knot multiplicity {m} exceeds degree + 1"
                )));
            }
        }
        Ok(kv)
    }

    /// Open uniform vector with `spans` equal spans on `[a, b]`.
    pub fn uniform(spans: usize, degree: usize, a: f64, b: f64) -> Self {
        assert!(spans > 0 && b > a);
        let mut knots = vec![a; degree + 1];
        for i in 1..spans {
            knots.push(a + (b - a) * i as f64 / spans as f64);
        }
        knots.extend(std::iter::repeat_n(b, degree + 1));
        Self { knots, degree }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Distinct knot values with their multiplicities.
    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((v, m)) if (k - *v).abs() <= KNOT_TOL => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Distinct knot values (the breakpoints of the mesh).
    pub fn breaks(&self) -> Vec<f64> {
        self.multiplicities().into_iter().map(|(k, _)| k).collect()
    }

    /// Number of non-empty knot spans.
    pub fn num_spans(&self) -> usize {
        self.breaks().len() - 1
    }

    /// The `p + 2` knots defining function `i`.
    pub fn local_knots(&self, i: usize) -> &[f64] {
        &self.knots[i..i + self.degree + 2]
    }

    /// Support interval `[xi_i, xi_{i+p+1}]`.
    pub fn support(&self, i: usize) -> (f64, f64) {
        (self.knots[i], self.knots[i + self.degree + 1])
    }

    /// Knot index `k` of the span `[xi_k, xi_{k+1})` containing `t`; the last
    /// non-empty span is closed on the right.
    pub fn find_span(&self, t: f64) -> usize {
        let n = self.num_basis();
        let p = self.degree;
        if t >= self.knots[n] {
            return n - 1;
        }
        if t <= self.knots[p] {
            return p;
        }
        // first index with knots[idx] > t, minus one
        let idx = self.knots.partition_point(|&k| k <= t);
        idx - 1
    }

    /// Like [`find_span`](Self::find_span), but when `t` sits on a breakpoint the
    /// span on the side of `toward` is chosen. Used to evaluate one-sided
    /// derivatives on element edges.
    pub fn find_span_toward(&self, t: f64, toward: f64) -> usize {
        let mut s = self.find_span(t);
        let p = self.degree;
        let n = self.num_basis();
        if toward < t && (t - self.knots[s]).abs() <= KNOT_TOL && s > p {
            // step back to the previous non-empty span
            let mut k = s - 1;
            while k > p && self.knots[k + 1] - self.knots[k] <= KNOT_TOL {
                k -= 1;
            }
            if self.knots[k + 1] - self.knots[k] > KNOT_TOL {
                s = k;
            }
        } else if toward > t && (self.knots[s + 1] - t).abs() <= KNOT_TOL && s + 1 < n {
            let mut k = s + 1;
            while k < n - 1 && self.knots[k + 1] - self.knots[k] <= KNOT_TOL {
                k += 1;
            }
            if self.knots[k + 1] - self.knots[k] > KNOT_TOL {
                s = k;
            }
        }
        s
    }

    pub(crate) fn check_param(&self, t: f64) -> Result<()> {
        let (lo, hi) = (self.first(), self.last());
        if !(t >= lo - KNOT_TOL && t <= hi + KNOT_TOL) {
            return Err(Error::ParameterOutOfRange { value: t, lo, hi });
        }
        Ok(())
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.num_basis() {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: self.num_basis(),
            });
        }
        Ok(())
    }

    /// Bisects every non-empty span; degree unchanged.
    pub fn h_refine(&self) -> Self {
        let mut knots = Vec::with_capacity(self.knots.len() * 2);
        for w in self.knots.windows(2) {
            knots.push(w[0]);
            if w[1] - w[0] > KNOT_TOL {
                knots.push(0.5 * (w[0] + w[1]));
            }
        }
        knots.push(self.last());
        Self {
            knots,
            degree: self.degree,
        }
    }

    /// Raises the degree by one and every knot multiplicity by one, so the
    /// breakpoints and inter-element continuity are preserved.
    pub fn p_refine(&self) -> Self {
        let mut knots = Vec::with_capacity(self.knots.len() + self.num_spans() + 1);
        for (k, m) in self.multiplicities() {
            knots.extend(std::iter::repeat_n(k, m + 1));
        }
        Self {
            knots,
            degree: self.degree + 1,
        }
    }

    /// Cox–de Boor evaluation of `N_{i,p}(t)`.
    pub fn eval(&self, i: usize, t: f64) -> Result<f64> {
        self.check_index(i)?;
        self.check_param(t)?;
        let t = t.clamp(self.first(), self.last());
        Ok(super::cox_de_boor(&self.knots, i, self.degree, t, Some(self.last())))
    }

    /// `[N, N', ..., N^(k)]` of function `i` at `t`. Orders above the degree are 0.
    pub fn eval_derivatives(&self, i: usize, t: f64, k: usize) -> Result<Vec<f64>> {
        self.check_index(i)?;
        self.check_param(t)?;
        let t = t.clamp(self.first(), self.last());
        Ok(super::cox_de_boor_derivatives(
            &self.knots,
            i,
            self.degree,
            t,
            k,
            Some(self.last()),
        ))
    }

    /// Values and derivatives up to order `k` of the `p + 1` functions that are
    /// non-zero on knot span `span`, evaluated at `t`.
    ///
    /// Returns a `(k + 1) x (p + 1)` row-major table: entry `[m][r]` is the
    /// `m`-th derivative of function `span - p + r`.
    pub fn span_derivatives(&self, span: usize, t: f64, k: usize) -> Vec<f64> {
        let p = self.degree;
        let u = &self.knots;
        let cols = p + 1;
        // ndu holds basis values (upper triangle incl. diagonal) and knot differences.
        let mut ndu = vec![0.0; cols * cols];
        let mut left = vec![0.0; cols];
        let mut right = vec![0.0; cols];
        ndu[0] = 1.0;
        for j in 1..=p {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                // lower triangle
                ndu[j * cols + r] = right[r + 1] + left[j - r];
                let temp = ndu[r * cols + j - 1] / ndu[j * cols + r];
                ndu[r * cols + j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j * cols + j] = saved;
        }
        let mut ders = vec![0.0; (k + 1) * cols];
        for j in 0..=p {
            ders[j] = ndu[j * cols + p];
        }
        let kmax = k.min(p);
        let mut a = vec![0.0; 2 * cols];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0] = 1.0;
            for m in 1..=kmax {
                let mut d = 0.0;
                let rk = r as isize - m as isize;
                let pk = p - m;
                if r >= m {
                    let rk = rk as usize;
                    a[s2 * cols] = a[s1 * cols] / ndu[(pk + 1) * cols + rk];
                    d = a[s2 * cols] * ndu[rk * cols + pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize) - 1 <= pk as isize { m - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2 * cols + j] =
                        (a[s1 * cols + j] - a[s1 * cols + j - 1]) / ndu[(pk + 1) * cols + idx];
                    d += a[s2 * cols + j] * ndu[idx * cols + pk];
                }
                if r <= pk {
                    a[s2 * cols + m] = -a[s1 * cols + m - 1] / ndu[(pk + 1) * cols + r];
                    d += a[s2 * cols + m] * ndu[r * cols + pk];
                }
                ders[m * cols + r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = p as f64;
        for m in 1..=kmax {
            for r in 0..=p {
                ders[m * cols + r] *= factor;
            }
            factor *= (p - m) as f64;
        }
        ders
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_open_vectors() {
        assert!(KnotVector::new(vec![0.0, 0.5, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0, 1.0, 0.5, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0, 0.5, 0.5, 1.0, 1.0], 1).is_ok());
    }

    #[test]
    fn h_refine_bisects_nonzero_spans() {
        let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(kv.h_refine().knots(), &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
        let kv = KnotVector::new(vec![0.0, 0.0, 1.0, 2.0, 2.0], 1).unwrap();
        assert_eq!(kv.h_refine().knots(), &[0.0, 0.0, 0.5, 1.0, 1.5, 2.0, 2.0]);
        // repeated interior knot: zero-length span gains nothing
        let kv = KnotVector::new(vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0], 1).unwrap();
        assert_eq!(
            kv.h_refine().knots(),
            &[0.0, 0.0, 0.5, 1.0, 1.0, 1.5, 2.0, 2.0]
        );
        assert!(KnotVector::new(kv.h_refine().knots().to_vec(), 1).is_ok());
    }

    #[test]
    fn p_refine_raises_every_multiplicity() {
        let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap();
        let r = kv.p_refine();
        assert_eq!(r.knots(), &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(r.degree(), 3);
        let kv = KnotVector::new(vec![0.0, 0.0, 1.0, 2.0, 2.0], 1).unwrap();
        let r = kv.p_refine();
        assert_eq!(r.knots(), &[0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        assert_eq!(r.degree(), 2);
        assert_eq!(kv.breaks(), r.breaks());
        assert!(KnotVector::new(r.knots().to_vec(), 2).is_ok());
    }

    #[test]
    fn span_lookup_closes_the_last_span() {
        let kv = KnotVector::uniform(4, 2, 0.0, 1.0);
        assert_eq!(kv.find_span(0.0), 2);
        assert_eq!(kv.find_span(0.25), 3);
        assert_eq!(kv.find_span(1.0), 5);
        assert_eq!(kv.find_span_toward(0.25, 0.0), 2);
        assert_eq!(kv.find_span_toward(0.25, 1.0), 3);
        assert_eq!(kv.find_span_toward(0.0, 1.0), 2);
    }

    #[test]
    fn out_of_range_arguments_are_errors() {
        let kv = KnotVector::uniform(3, 2, 0.0, 1.0);
        assert!(matches!(kv.eval(5, 0.5), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(kv.eval(0, 1.5), Err(Error::ParameterOutOfRange { .. })));
        assert!(kv.eval_derivatives(0, -0.1, 1).is_err());
    }
}
