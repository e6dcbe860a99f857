use serde::{Deserialize, Serialize};

/// Which Taylor operator to apply to Neumann data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeumannRule {
    /// Enhanced for functions of degree at most 2, standard above.
    #[default]
    Automatic,
    ForceStandard,
    ForceEnhanced,
}

/// Shift-operator settings. Orders are capped per function at `p` (values)
/// and `p - 1` (gradients), `p` being the function's own degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftConfig {
    pub dirichlet_order: Option<usize>,
    pub neumann_order: Option<usize>,
    pub enhanced_dirichlet: bool,
    pub neumann_rule: NeumannRule,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        Self {
            dirichlet_order: None,
            neumann_order: None,
            enhanced_dirichlet: true,
            neumann_rule: NeumannRule::Automatic,
        }
    }
}

/// A Taylor operator: truncated by total order, or by order per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    /// Terms with `a + b <= order`.
    Standard { order: usize },
    /// Terms with `a <= degree` and `b <= degree`.
    Enhanced { degree: usize },
}

impl ShiftConfig {
    /// Value operator for a function of degree `p`.
    pub fn dirichlet_kind(&self, p: usize) -> ShiftKind {
        if self.enhanced_dirichlet {
            ShiftKind::Enhanced { degree: p }
        } else {
            ShiftKind::Standard {
                order: self.dirichlet_order.unwrap_or(p).min(p),
            }
        }
    }

    /// Gradient operator for a function of degree `p`.
    pub fn neumann_kind(&self, p: usize) -> ShiftKind {
        let enhanced = match self.neumann_rule {
            NeumannRule::Automatic => p <= 2,
            NeumannRule::ForceStandard => false,
            NeumannRule::ForceEnhanced => true,
        };
        if enhanced {
            ShiftKind::Enhanced { degree: p }
        } else {
            let cap = p.saturating_sub(1);
            ShiftKind::Standard {
                order: self.neumann_order.unwrap_or(cap).min(cap),
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Term of the `i`-th directional derivative for multi-index `(a, b)`:
/// `i! / (a! b!) * deriv * dx^a * dy^b` with `i = a + b`.
pub fn directional_term(a: usize, b: usize, deriv: f64, d: [f64; 2]) -> f64 {
    factorial(a + b) / (factorial(a) * factorial(b)) * deriv * d[0].powi(a as i32) * d[1].powi(b as i32)
}

/// `d^alpha / alpha!` for every retained multi-index of a value shift.
pub fn value_weights(kind: ShiftKind, d: [f64; 2]) -> Vec<(usize, usize, f64)> {
    let (amax, bmax, total) = match kind {
        ShiftKind::Standard { order } => (order, order, order),
        ShiftKind::Enhanced { degree } => (degree, degree, 2 * degree),
    };
    weights(amax, bmax, total, d)
}

/// Weights for the two gradient components. The enhanced box keeps per
/// direction the orders the differentiated function still carries.
pub fn gradient_weights(kind: ShiftKind, d: [f64; 2]) -> [Vec<(usize, usize, f64)>; 2] {
    match kind {
        ShiftKind::Standard { order } => {
            let w = weights(order, order, order, d);
            [w.clone(), w]
        }
        ShiftKind::Enhanced { degree } => {
            let q = degree.saturating_sub(1);
            [
                weights(q, degree, q + degree, d),
                weights(degree, q, q + degree, d),
            ]
        }
    }
}

fn weights(amax: usize, bmax: usize, total: usize, d: [f64; 2]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for a in 0..=amax {
        for b in 0..=bmax.min(total.saturating_sub(a)) {
            if a + b > total {
                continue;
            }
            let w = d[0].powi(a as i32) * d[1].powi(b as i32) / (factorial(a) * factorial(b));
            out.push((a, b, w));
        }
    }
    out
}

/// Shifted value from partial derivatives `deriv(a, b)` at the surrogate point.
pub fn shift_value(deriv: impl Fn(usize, usize) -> f64, kind: ShiftKind, d: [f64; 2]) -> f64 {
    value_weights(kind, d)
        .into_iter()
        .map(|(a, b, w)| w * deriv(a, b))
        .sum()
}

/// `f + sum_{i=1..m} D^i_d f / i!`, written with directional derivatives.
pub fn shift_value_standard(deriv: impl Fn(usize, usize) -> f64, d: [f64; 2], m: usize) -> f64 {
    let mut s = deriv(0, 0);
    for i in 1..=m {
        let di: f64 = (0..=i).map(|a| directional_term(a, i - a, deriv(a, i - a), d)).sum();
        s += di / factorial(i);
    }
    s
}

/// Tensor-truncated Taylor sum over `0 <= a, b <= p`.
pub fn shift_value_enhanced(deriv: impl Fn(usize, usize) -> f64, d: [f64; 2], p: usize) -> f64 {
    shift_value(deriv, ShiftKind::Enhanced { degree: p }, d)
}

/// Shifted gradient from partial derivatives `deriv(a, b)`.
pub fn shift_gradient(deriv: impl Fn(usize, usize) -> f64, kind: ShiftKind, d: [f64; 2]) -> [f64; 2] {
    let [wx, wy] = gradient_weights(kind, d);
    [
        wx.into_iter().map(|(a, b, w)| w * deriv(a + 1, b)).sum(),
        wy.into_iter().map(|(a, b, w)| w * deriv(a, b + 1)).sum(),
    ]
}
