//! Closed-form solutions with hand-derived gradients and forcing terms.

use serde::{Deserialize, Serialize};

/// Identifier of a manufactured solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionId {
    /// `1 + 2x + 3y`, harmonic.
    Linear,
    /// `x^2 - y^2 + xy`, harmonic.
    HarmonicQuadratic,
    /// `x^2 + y^2`, `f = -4`.
    Paraboloid,
    /// `x y cosh(x) sin(y)`.
    XyCoshSin,
    /// Product of bubbles and hyperbolic sines plus a quadratic offset.
    SinhBubble,
}

impl SolutionId {
    pub const ALL: [SolutionId; 5] = [
        SolutionId::Linear,
        SolutionId::HarmonicQuadratic,
        SolutionId::Paraboloid,
        SolutionId::XyCoshSin,
        SolutionId::SinhBubble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolutionId::Linear => "linear",
            SolutionId::HarmonicQuadratic => "harmonic_quadratic",
            SolutionId::Paraboloid => "paraboloid",
            SolutionId::XyCoshSin => "xy_cosh_sin",
            SolutionId::SinhBubble => "sinh_bubble",
        }
    }

    pub fn solution(self) -> Manufactured {
        Manufactured::new(self)
    }
}

/// Exact solution `u`, its gradient and `f = -lap u`.
#[derive(Debug, Clone, Copy)]
pub struct Manufactured {
    pub id: SolutionId,
    u: fn(f64, f64) -> f64,
    grad: fn(f64, f64) -> [f64; 2],
    hess_diag: fn(f64, f64) -> [f64; 2],
}

impl Manufactured {
    pub fn new(id: SolutionId) -> Self {
        let (u, grad, hess_diag): (fn(f64, f64) -> f64, fn(f64, f64) -> [f64; 2], fn(f64, f64) -> [f64; 2]) =
            match id {
                SolutionId::Linear => (|x, y| 1.0 + 2.0 * x + 3.0 * y, |_, _| [2.0, 3.0], |_, _| [0.0, 0.0]),
                SolutionId::HarmonicQuadratic => (
                    |x, y| x * x - y * y + x * y,
                    |x, y| [2.0 * x + y, -2.0 * y + x],
                    |_, _| [2.0, -2.0],
                ),
                SolutionId::Paraboloid => (|x, y| x * x + y * y, |x, y| [2.0 * x, 2.0 * y], |_, _| [2.0, 2.0]),
                SolutionId::XyCoshSin => (xcs_u, xcs_grad, xcs_hess),
                SolutionId::SinhBubble => (sb_u, sb_grad, sb_hess),
            };
        Self { id, u, grad, hess_diag }
    }

    pub fn u(&self, x: f64, y: f64) -> f64 {
        (self.u)(x, y)
    }

    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        (self.grad)(x, y)
    }

    /// Forcing term `-lap u`.
    pub fn f(&self, x: f64, y: f64) -> f64 {
        let [a, b] = (self.hess_diag)(x, y);
        -(a + b)
    }

    /// Neumann datum `grad u . n`.
    pub fn flux(&self, x: f64, y: f64, n: [f64; 2]) -> f64 {
        let g = self.grad(x, y);
        g[0] * n[0] + g[1] * n[1]
    }
}

fn xcs_u(x: f64, y: f64) -> f64 {
    x * y * x.cosh() * y.sin()
}

fn xcs_grad(x: f64, y: f64) -> [f64; 2] {
    [
        y * y.sin() * (x.cosh() + x * x.sinh()),
        x * x.cosh() * (y.sin() + y * y.cos()),
    ]
}

fn xcs_hess(x: f64, y: f64) -> [f64; 2] {
    [
        y * y.sin() * (2.0 * x.sinh() + x * x.cosh()),
        x * x.cosh() * (2.0 * y.cos() - y * y.sin()),
    ]
}

// u = g S + 10 (b^2 + c^2), g = P(x) P(y), P(t) = t (1 - t),
// b = (1 - x)(1 - y), c = x y, S = sinh(10 b) + sinh(10 c)
struct SbParts {
    g: f64,
    gx: f64,
    gy: f64,
    gxx: f64,
    gyy: f64,
    b: f64,
    c: f64,
    bx: f64,
    by: f64,
    cx: f64,
    cy: f64,
}

fn sb_parts(x: f64, y: f64) -> SbParts {
    let p = |t: f64| t * (1.0 - t);
    let dp = |t: f64| 1.0 - 2.0 * t;
    SbParts {
        g: p(x) * p(y),
        gx: dp(x) * p(y),
        gy: p(x) * dp(y),
        gxx: -2.0 * p(y),
        gyy: -2.0 * p(x),
        b: (1.0 - x) * (1.0 - y),
        c: x * y,
        bx: -(1.0 - y),
        by: -(1.0 - x),
        cx: y,
        cy: x,
    }
}

fn sb_u(x: f64, y: f64) -> f64 {
    let s = sb_parts(x, y);
    s.g * ((10.0 * s.b).sinh() + (10.0 * s.c).sinh()) + 10.0 * (s.b * s.b + s.c * s.c)
}

fn sb_grad(x: f64, y: f64) -> [f64; 2] {
    let s = sb_parts(x, y);
    let sh = (10.0 * s.b).sinh() + (10.0 * s.c).sinh();
    let (chb, chc) = ((10.0 * s.b).cosh(), (10.0 * s.c).cosh());
    let sx = 10.0 * (chb * s.bx + chc * s.cx);
    let sy = 10.0 * (chb * s.by + chc * s.cy);
    [
        s.gx * sh + s.g * sx + 20.0 * (s.b * s.bx + s.c * s.cx),
        s.gy * sh + s.g * sy + 20.0 * (s.b * s.by + s.c * s.cy),
    ]
}

fn sb_hess(x: f64, y: f64) -> [f64; 2] {
    let s = sb_parts(x, y);
    let (shb, shc) = ((10.0 * s.b).sinh(), (10.0 * s.c).sinh());
    let (chb, chc) = ((10.0 * s.b).cosh(), (10.0 * s.c).cosh());
    let sh = shb + shc;
    let sx = 10.0 * (chb * s.bx + chc * s.cx);
    let sy = 10.0 * (chb * s.by + chc * s.cy);
    let sxx = 100.0 * (shb * s.bx * s.bx + shc * s.cx * s.cx);
    let syy = 100.0 * (shb * s.by * s.by + shc * s.cy * s.cy);
    [
        s.gxx * sh + 2.0 * s.gx * sx + s.g * sxx + 20.0 * (s.bx * s.bx + s.cx * s.cx),
        s.gyy * sh + 2.0 * s.gy * sy + s.g * syy + 20.0 * (s.by * s.by + s.cy * s.cy),
    ]
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;

    #[test]
    fn forcing_matches_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let h = 1e-4;
        for id in SolutionId::ALL {
            let m = id.solution();
            for _ in 0..100 {
                let (x, y) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
                let u0 = m.u(x, y);
                let lap = (m.u(x + h, y) + m.u(x - h, y) + m.u(x, y + h) + m.u(x, y - h) - 4.0 * u0) / (h * h);
                let f = m.f(x, y);
                assert!((-lap - f).abs() <= 1e-4 * f.abs().max(1.0), "{}: {} vs {}", id.name(), -lap, f);
                let g = m.grad(x, y);
                // fourth-order stencil; the hyperbolic solutions have large third derivatives
                let k = 1e-3;
                let d4 = |f: &dyn Fn(f64) -> f64| (-f(2.0 * k) + 8.0 * f(k) - 8.0 * f(-k) + f(-2.0 * k)) / (12.0 * k);
                let gx = d4(&|s| m.u(x + s, y));
                let gy = d4(&|s| m.u(x, y + s));
                assert!((gx - g[0]).abs() <= 1e-6 * g[0].abs().max(1.0), "{}: {gx} vs {}", id.name(), g[0]);
                assert!((gy - g[1]).abs() <= 1e-6 * g[1].abs().max(1.0), "{}: {gy} vs {}", id.name(), g[1]);
            }
        }
    }

    #[test]
    fn sinh_bubble_boundary_values() {
        let m = SolutionId::SinhBubble.solution();
        // on x = 0 the bubble vanishes and u = 10 (1 - y)^2
        assert!((m.u(0.0, 0.3) - 10.0 * 0.49).abs() < 1e-12);
        assert!((m.u(1.0, 1.0) - 10.0).abs() < 1e-12);
    }
}
