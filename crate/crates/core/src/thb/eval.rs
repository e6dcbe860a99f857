use super::HierarchicalSpace;
use crate::Result;

/// Derivatives of the active functions supported on one element, at one point.
///
/// For local function `r` the table holds `d^(a+b) / dx^a dy^b` for
/// `a, b <= order`.
#[derive(Debug, Clone)]
pub struct PointBasis {
    pub element: usize,
    pub ids: Vec<u32>,
    pub order: usize,
    data: Vec<f64>,
}

impl PointBasis {
    fn stride(&self) -> usize {
        (self.order + 1) * (self.order + 1)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// `d^(a+b) phi_r / dx^a dy^b`; zero when `a` or `b` exceeds the stored order.
    pub fn deriv(&self, r: usize, a: usize, b: usize) -> f64 {
        if a > self.order || b > self.order {
            return 0.0;
        }
        self.data[r * self.stride() + a * (self.order + 1) + b]
    }

    pub fn value(&self, r: usize) -> f64 {
        self.deriv(r, 0, 0)
    }

    pub fn grad(&self, r: usize) -> [f64; 2] {
        [self.deriv(r, 1, 0), self.deriv(r, 0, 1)]
    }
}

impl HierarchicalSpace {
    /// Evaluates all functions active on element `e` at `(x, y)`, with
    /// derivatives up to `order` in each direction. Points on the element
    /// boundary use the polynomial pieces of `e`.
    pub fn eval_on_element(&self, e: usize, x: f64, y: f64, order: usize) -> PointBasis {
        let el = &self.elements()[e];
        let (cx, cy) = el.center();
        let ids = self.element_functions(e).to_vec();
        let k = order;
        let stride = (k + 1) * (k + 1);
        let mut data = vec![0.0; ids.len() * stride];

        // per-level univariate tables, built lazily
        let nlev = self.levels().len();
        let mut tables: Vec<Option<LevelTable>> = vec![None; nlev];
        for (r, &fid) in ids.iter().enumerate() {
            let f = &self.functions()[fid as usize];
            let l = f.expansion.level;
            let t = tables[l].get_or_insert_with(|| {
                let s = &self.levels()[l].space;
                let sx = s.x.find_span_toward(x, cx);
                let sy = s.y.find_span_toward(y, cy);
                LevelTable {
                    sx,
                    sy,
                    px: s.x.degree(),
                    py: s.y.degree(),
                    nx: s.x.span_derivatives(sx, x.clamp(s.x.first(), s.x.last()), k),
                    ny: s.y.span_derivatives(sy, y.clamp(s.y.first(), s.y.last()), k),
                }
            });
            let out = &mut data[r * stride..(r + 1) * stride];
            for &((i, j), c) in &f.expansion.terms {
                let (Some(ri), Some(rj)) = (t.local_x(i), t.local_y(j)) else {
                    continue;
                };
                for a in 0..=k {
                    let vx = c * t.nx[a * (t.px + 1) + ri];
                    if vx == 0.0 {
                        continue;
                    }
                    for b in 0..=k {
                        out[a * (k + 1) + b] += vx * t.ny[b * (t.py + 1) + rj];
                    }
                }
            }
        }
        PointBasis {
            element: e,
            ids,
            order,
            data,
        }
    }

    /// Locates `(x, y)` and evaluates the functions active there.
    pub fn eval_at(&self, x: f64, y: f64, order: usize) -> Result<PointBasis> {
        let e = self.locate(x, y)?;
        Ok(self.eval_on_element(e, x, y, order))
    }

    /// Value of active function `f` at `(x, y)`.
    pub fn eval_function(&self, f: usize, x: f64, y: f64) -> Result<f64> {
        let pb = self.eval_at(x, y, 0)?;
        Ok(pb
            .ids
            .iter()
            .position(|&g| g as usize == f)
            .map_or(0.0, |r| pb.value(r)))
    }
}

#[derive(Debug, Clone)]
struct LevelTable {
    sx: usize,
    sy: usize,
    px: usize,
    py: usize,
    nx: Vec<f64>,
    ny: Vec<f64>,
}

impl LevelTable {
    fn local_x(&self, i: usize) -> Option<usize> {
        (i + self.px >= self.sx && i <= self.sx).then(|| i + self.px - self.sx)
    }

    fn local_y(&self, j: usize) -> Option<usize> {
        (j + self.py >= self.sy && j <= self.sy).then(|| j + self.py - self.sy)
    }
}
