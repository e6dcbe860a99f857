use crate::{Error, Result};

fn degree_zero(knots: &[f64], i: usize, t: f64, closed_at: Option<f64>) -> f64 {
    let (a, b) = (knots[i], knots[i + 1]);
    if a <= t && t < b {
        return 1.0;
    }
    match closed_at {
        Some(end) if t == end && b == end && a < b => 1.0,
        _ => 0.0,
    }
}

/// Cox–de Boor recursion for `N_{i,p}(t)` over an arbitrary knot slice.
///
/// Spans are half-open; passing `closed_at = Some(end)` closes the span that
/// ends at `end` so the basis keeps partition of unity at the right boundary.
/// Terms with a zero denominator vanish.
pub fn cox_de_boor(knots: &[f64], i: usize, p: usize, t: f64, closed_at: Option<f64>) -> f64 {
    // triangular table over the p + 1 degree-zero functions i..=i+p
    let mut n: Vec<f64> = (0..=p).map(|j| degree_zero(knots, i + j, t, closed_at)).collect();
    for q in 1..=p {
        for j in 0..=(p - q) {
            let k = i + j;
            let mut v = 0.0;
            let den1 = knots[k + q] - knots[k];
            if den1 != 0.0 {
                v += (t - knots[k]) / den1 * n[j];
            }
            let den2 = knots[k + q + 1] - knots[k + 1];
            if den2 != 0.0 {
                v += (knots[k + q + 1] - t) / den2 * n[j + 1];
            }
            n[j] = v;
        }
    }
    n[0]
}

/// Derivatives `[N, N', ..., N^(k)]` of `N_{i,p}` via the recursive derivative
/// formula. Entries above order `p` are exactly zero.
pub fn cox_de_boor_derivatives(
    knots: &[f64],
    i: usize,
    p: usize,
    t: f64,
    k: usize,
    closed_at: Option<f64>,
) -> Vec<f64> {
    fn rec(knots: &[f64], i: usize, p: usize, t: f64, k: usize, c: Option<f64>) -> f64 {
        if k == 0 {
            return cox_de_boor(knots, i, p, t, c);
        }
        if k > p {
            return 0.0;
        }
        let mut v = 0.0;
        let den1 = knots[i + p] - knots[i];
        if den1 != 0.0 {
            v += rec(knots, i, p - 1, t, k - 1, c) / den1;
        }
        let den2 = knots[i + p + 1] - knots[i + 1];
        if den2 != 0.0 {
            v -= rec(knots, i + 1, p - 1, t, k - 1, c) / den2;
        }
        p as f64 * v
    }
    (0..=k).map(|m| rec(knots, i, p, t, m, closed_at)).collect()
}

/// A single B-spline given by its `p + 2` local knots.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasisFunction {
    knots: Vec<f64>,
    degree: usize,
}

impl LocalBasisFunction {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        if knots.len() != degree + 2 {
            return Err(Error::InvalidKnots(format!(
                "local function of degree {degree} needs {} knots, got {}",
                degree + 2,
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) || knots[degree + 1] <= knots[0] {
            return Err(Error::InvalidKnots("local knots must be non-decreasing with non-empty support".into()));
        }
        Ok(Self { knots, degree })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.degree + 1])
    }

    pub fn eval(&self, t: f64) -> f64 {
        cox_de_boor(&self.knots, 0, self.degree, t, Some(self.knots[self.degree + 1]))
    }

    /// Support of `self` lies inside the support of `other`.
    pub fn support_within(&self, other: &Self) -> bool {
        let (a, b) = self.support();
        let (c, d) = other.support();
        a >= c - super::KNOT_TOL && b <= d + super::KNOT_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::super::KnotVector;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_hat_values() {
        let kv = KnotVector::new(vec![0.0, 0.0, 1.0, 1.0], 1).unwrap();
        assert!((kv.eval(0, 0.25).unwrap() - 0.75).abs() < 1e-15);
        let d = kv.eval_derivatives(0, 0.5, 1).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn cardinal_quadratic_peak() {
        // hand evaluation of Cox–de Boor for knots 0,1,2,3 at 1.5 gives 3/4
        let knots = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let v = cox_de_boor(&knots, 0, 2, 1.5, None);
        assert!((v - 0.75).abs() < 1e-15);
        let v = cox_de_boor(&knots, 1, 2, 2.5, None);
        assert!((v - 0.75).abs() < 1e-15);
    }

    #[test]
    fn right_end_is_closed() {
        let kv = KnotVector::uniform(3, 2, 0.0, 1.0);
        assert_eq!(kv.eval(kv.num_basis() - 1, 1.0).unwrap(), 1.0);
        let sum: f64 = (0..kv.num_basis()).map(|i| kv.eval(i, 1.0).unwrap()).sum();
        assert_eq!(sum, 1.0);
    }

    #[test]
    fn derivative_above_degree_is_zero() {
        let kv = KnotVector::uniform(5, 3, 0.0, 1.0);
        for i in 0..kv.num_basis() {
            let d = kv.eval_derivatives(i, 0.37, 5).unwrap();
            assert_eq!(d[4], 0.0);
            assert_eq!(d[5], 0.0);
        }
    }

    #[test]
    fn cubic_derivatives_match_central_differences() {
        let kv = KnotVector::uniform(6, 3, 0.0, 1.0);
        let h = 1e-5;
        for &t in &[0.21, 0.43, 0.58, 0.77] {
            for i in 2..5 {
                let d = kv.eval_derivatives(i, t, 2).unwrap();
                let f = |s: f64| kv.eval(i, s).unwrap();
                let fd1 = (f(t + h) - f(t - h)) / (2.0 * h);
                let fd2 = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                let d1p = kv.eval_derivatives(i, t + h, 1).unwrap()[1];
                let d1m = kv.eval_derivatives(i, t - h, 1).unwrap()[1];
                let fd2b = (d1p - d1m) / (2.0 * h);
                assert!((d[1] - fd1).abs() <= 1e-6 * d[1].abs().max(1.0), "d1 {i} {t}");
                assert!((d[2] - fd2b).abs() <= 1e-6 * d[2].abs().max(1.0), "d2 {i} {t}");
                assert!((d[2] - fd2).abs() <= 1e-3 * d[2].abs().max(1.0));
            }
        }
    }

    fn arb_knot_vector() -> impl Strategy<Value = KnotVector> {
        (0usize..=5, 1usize..=7, proptest::collection::vec(0.05f64..1.0, 7)).prop_map(
            |(p, spans, widths)| {
                let mut knots = vec![0.0; p + 1];
                let mut x = 0.0;
                for w in widths.iter().take(spans - 1) {
                    x += w;
                    knots.push(x);
                }
                x += widths[spans - 1];
                knots.extend(std::iter::repeat_n(x, p + 1));
                KnotVector::new(knots, p).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn partition_of_unity_and_local_support(kv in arb_knot_vector(), s in 0.0f64..=1.0) {
            let t = kv.first() + s * (kv.last() - kv.first());
            let mut sum = 0.0;
            for i in 0..kv.num_basis() {
                let v = kv.eval(i, t).unwrap();
                prop_assert!(v >= 0.0);
                let (a, b) = kv.support(i);
                if t < a || t > b { prop_assert_eq!(v, 0.0); }
                sum += v;
            }
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        #[test]
        fn span_table_agrees_with_single_function_route(kv in arb_knot_vector(), s in 0.0f64..=1.0) {
            let t = kv.first() + s * (kv.last() - kv.first());
            let p = kv.degree();
            let span = kv.find_span(t);
            let k = p + 1;
            let table = kv.span_derivatives(span, t, k);
            for r in 0..=p {
                let i = span - p + r;
                let single = kv.eval_derivatives(i, t, k).unwrap();
                for m in 0..=k {
                    let a = table[m * (p + 1) + r];
                    prop_assert!((a - single[m]).abs() <= 1e-9 * single[m].abs().max(1.0),
                        "order {} fn {}: {} vs {}", m, i, a, single[m]);
                }
            }
        }

        #[test]
        fn derivatives_match_finite_differences(kv in arb_knot_vector(), s in 0.02f64..0.98) {
            let p = kv.degree();
            prop_assume!(p >= 1);
            let t = kv.first() + s * (kv.last() - kv.first());
            // keep the stencil inside one span so the derivative is smooth there
            let span = kv.find_span(t);
            let w = kv.knots()[span + 1] - kv.knots()[span];
            let h = 1e-4 * w;
            prop_assume!(t - h > kv.knots()[span] && t + h < kv.knots()[span + 1]);
            for i in (span - p)..=span {
                let d = kv.eval_derivatives(i, t, 1).unwrap();
                let f0 = kv.eval(i, t - h).unwrap();
                let f1 = kv.eval(i, t + h).unwrap();
                let fd = (f1 - f0) / (2.0 * h);
                // derivatives scale like 1/w on a span of width w
                prop_assert!((d[1] - fd).abs() <= 1e-6 * d[1].abs().max(1.0 / w));
            }
        }
    }
}
