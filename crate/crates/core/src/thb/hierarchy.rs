use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{break_index, cell_index, Strategy};
use crate::splines::{KnotVector, TensorSpace, TwoScaleCache, TwoScaleMap};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelOrigin {
    Root,
    Refined(Strategy),
}

/// One level of the hierarchy: a tensor spline space and its mesh.
#[derive(Debug, Clone)]
pub struct Level {
    pub index: usize,
    pub space: TensorSpace,
    pub origin: LevelOrigin,
    pub breaks_x: Vec<f64>,
    pub breaks_y: Vec<f64>,
    /// Two-scale maps to the next level, once it exists.
    pub(crate) to_next: Option<Arc<(TwoScaleMap, TwoScaleMap)>>,
    /// Refinement domain of this level as a mask over the previous level's
    /// elements (row-major, x fastest). `None` on the root.
    pub(crate) region: Option<Vec<bool>>,
}

impl Level {
    fn new(index: usize, space: TensorSpace, origin: LevelOrigin) -> Self {
        let breaks_x = space.x.breaks();
        let breaks_y = space.y.breaks();
        Self {
            index,
            space,
            origin,
            breaks_x,
            breaks_y,
            to_next: None,
            region: None,
        }
    }

    pub fn num_elements(&self) -> (usize, usize) {
        (self.breaks_x.len() - 1, self.breaks_y.len() - 1)
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    /// Element index ranges `[x0, x1) x [y0, y1)` covered by tensor function `(i, j)`.
    pub fn support_elements(&self, i: usize, j: usize) -> ((usize, usize), (usize, usize)) {
        let (a, b) = self.space.x.support(i);
        let (c, d) = self.space.y.support(j);
        (
            (break_index(&self.breaks_x, a), break_index(&self.breaks_x, b)),
            (break_index(&self.breaks_y, c), break_index(&self.breaks_y, d)),
        )
    }

    pub fn support_box(&self, i: usize, j: usize) -> [f64; 4] {
        let (a, b) = self.space.x.support(i);
        let (c, d) = self.space.y.support(j);
        [a, b, c, d]
    }

    /// Whether this level's refinement region contains the previous-level element.
    pub fn region_contains(&self, ex: usize, ey: usize, prev_nx: usize) -> bool {
        self.region
            .as_ref()
            .is_some_and(|m| m[ey * prev_nx + ex])
    }
}

/// Sparse expansion over the tensor basis of `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub level: usize,
    pub terms: Vec<((usize, usize), f64)>,
}

/// A function of the THB basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveFunction {
    pub level: usize,
    pub index: (usize, usize),
    pub degree: usize,
    pub expansion: Expansion,
}

impl ActiveFunction {
    pub fn is_truncated(&self) -> bool {
        !(self.expansion.level == self.level
            && self.expansion.terms.len() == 1
            && self.expansion.terms[0] == (self.index, 1.0))
    }
}

/// An active element `(level, span box)` with its quadrature degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub level: usize,
    pub index: (usize, usize),
    pub x: (f64, f64),
    pub y: (f64, f64),
    /// Highest degree among active functions supported here.
    pub quad_degree: usize,
}

impl Element {
    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x.0 + self.x.1), 0.5 * (self.y.0 + self.y.1))
    }

    pub fn width(&self) -> f64 {
        self.x.1 - self.x.0
    }

    pub fn height(&self) -> f64 {
        self.y.1 - self.y.0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Largest edge length.
    pub fn size(&self) -> f64 {
        self.width().max(self.height())
    }
}

/// Finest-level functions selected for refinement.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarkedSet {
    pub level: usize,
    pub functions: BTreeSet<usize>,
}

impl MarkedSet {
    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }
}

/// Finest-mesh lookup from cell to owning active element.
#[derive(Debug, Clone)]
pub(crate) struct CellGrid {
    pub breaks_x: Vec<f64>,
    pub breaks_y: Vec<f64>,
    pub owner: Vec<u32>,
}

impl CellGrid {
    pub fn nx(&self) -> usize {
        self.breaks_x.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.breaks_y.len() - 1
    }

    pub fn owner(&self, cx: usize, cy: usize) -> usize {
        self.owner[cy * self.nx() + cx] as usize
    }

    /// Cell ranges covered by a box whose corners are breakpoints.
    pub fn cells_of(&self, b: [f64; 4]) -> ((usize, usize), (usize, usize)) {
        (
            (break_index(&self.breaks_x, b[0]), break_index(&self.breaks_x, b[1])),
            (break_index(&self.breaks_y, b[2]), break_index(&self.breaks_y, b[3])),
        )
    }
}

/// THB-spline space: the level hierarchy, the active basis and the active mesh.
#[derive(Debug, Clone)]
pub struct HierarchicalSpace {
    levels: Vec<Level>,
    functions: Vec<ActiveFunction>,
    elements: Vec<Element>,
    cells: CellGrid,
    element_functions: Vec<Vec<u32>>,
    cache: Arc<TwoScaleCache>,
}

impl HierarchicalSpace {
    /// Single-level hierarchy over `root`.
    pub fn new(root: TensorSpace) -> Result<Self> {
        Self::with_cache(root, Arc::new(TwoScaleCache::new()))
    }

    pub fn with_cache(root: TensorSpace, cache: Arc<TwoScaleCache>) -> Result<Self> {
        let level = Level::new(0, root, LevelOrigin::Root);
        let (nbx, nby) = level.space.num_basis();
        let degree = level.degree();
        let functions = (0..nby)
            .flat_map(|j| (0..nbx).map(move |i| (i, j)))
            .map(|(i, j)| ActiveFunction {
                level: 0,
                index: (i, j),
                degree,
                expansion: Expansion {
                    level: 0,
                    terms: vec![((i, j), 1.0)],
                },
            })
            .collect();
        let mut space = Self {
            levels: vec![level],
            functions,
            elements: Vec::new(),
            cells: CellGrid {
                breaks_x: Vec::new(),
                breaks_y: Vec::new(),
                owner: Vec::new(),
            },
            element_functions: Vec::new(),
            cache,
        };
        space.rebuild_mesh()?;
        Ok(space)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn finest_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn functions(&self) -> &[ActiveFunction] {
        &self.functions
    }

    pub fn num_dofs(&self) -> usize {
        self.functions.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Active functions supported on element `e`, in ascending id order.
    pub fn element_functions(&self, e: usize) -> &[u32] {
        &self.element_functions[e]
    }

    pub fn cache(&self) -> &Arc<TwoScaleCache> {
        &self.cache
    }

    pub(crate) fn cells(&self) -> &CellGrid {
        &self.cells
    }

    /// Background rectangle `[x0, x1] x [y0, y1]`.
    pub fn bounds(&self) -> [f64; 4] {
        let s = &self.levels[0].space;
        [s.x.first(), s.x.last(), s.y.first(), s.y.last()]
    }

    /// Highest degree among active functions.
    pub fn max_degree(&self) -> usize {
        self.functions.iter().map(|f| f.degree).max().unwrap_or(0)
    }

    /// Largest element edge.
    pub fn h_char(&self) -> f64 {
        self.elements.iter().map(Element::size).fold(0.0, f64::max)
    }

    /// Active element containing `(x, y)` (half-open cells, closed at the far edge).
    pub fn locate(&self, x: f64, y: f64) -> Result<usize> {
        let [x0, x1, y0, y1] = self.bounds();
        let tol = 1e-12;
        if !(x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol) {
            return Err(Error::PointOutsideDomain(x, y));
        }
        let cx = cell_index(&self.cells.breaks_x, x);
        let cy = cell_index(&self.cells.breaks_y, y);
        Ok(self.cells.owner(cx, cy))
    }

    /// Element ids intersecting the box (corners on breakpoints), deduplicated, ascending.
    pub(crate) fn elements_in_box(&self, b: [f64; 4]) -> Vec<usize> {
        let ((x0, x1), (y0, y1)) = self.cells.cells_of(b);
        let mut out = Vec::new();
        for cy in y0..y1 {
            for cx in x0..x1 {
                out.push(self.cells.owner(cx, cy));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Selects finest-level functions satisfying `pred`.
    pub fn mark_functions<F>(&self, pred: F) -> MarkedSet
    where
        F: Fn(usize, &ActiveFunction) -> bool,
    {
        let level = self.finest_level();
        MarkedSet {
            level,
            functions: self
                .functions
                .iter()
                .enumerate()
                .filter(|(id, f)| f.level == level && pred(*id, f))
                .map(|(id, _)| id)
                .collect(),
        }
    }

    /// Finest-level functions whose support lies inside the union of `boxes`.
    pub fn mark_within(&self, boxes: &[[f64; 4]]) -> MarkedSet {
        let lvl = &self.levels[self.finest_level()];
        let tol = 1e-12;
        let inside = |x: f64, y: f64| {
            boxes
                .iter()
                .any(|b| x >= b[0] - tol && x <= b[1] + tol && y >= b[2] - tol && y <= b[3] + tol)
        };
        self.mark_functions(|_, f| {
            if f.is_truncated() {
                return false;
            }
            // test every finest element of the support by its centre
            let ((x0, x1), (y0, y1)) = lvl.support_elements(f.index.0, f.index.1);
            (y0..y1).all(|ey| {
                (x0..x1).all(|ex| {
                    let cx = 0.5 * (lvl.breaks_x[ex] + lvl.breaks_x[ex + 1]);
                    let cy = 0.5 * (lvl.breaks_y[ey] + lvl.breaks_y[ey + 1]);
                    inside(cx, cy)
                })
            })
        })
    }

    /// Support of an active function as a list of boxes (one per expansion term).
    pub fn support_boxes(&self, f: &ActiveFunction) -> Vec<[f64; 4]> {
        let lvl = &self.levels[f.expansion.level];
        f.expansion
            .terms
            .iter()
            .map(|&((i, j), _)| lvl.support_box(i, j))
            .collect()
    }

    /// Union of supports of the marked functions, as a mask over finest-level elements.
    pub fn refinement_region(&self, marked: &MarkedSet) -> Result<Vec<bool>> {
        let lvl = &self.levels[self.finest_level()];
        let (nx, ny) = lvl.num_elements();
        let mut mask = vec![false; nx * ny];
        for &id in &marked.functions {
            let f = self.functions.get(id).ok_or_else(|| {
                Error::Hierarchy(format!("marked function {id} is not active"))
            })?;
            if f.level != lvl.index || f.is_truncated() {
                return Err(Error::Hierarchy(format!(
                    "marked function {id} is not an untruncated finest-level function"
                )));
            }
            let ((x0, x1), (y0, y1)) = lvl.support_elements(f.index.0, f.index.1);
            for ey in y0..y1 {
                for ex in x0..x1 {
                    mask[ey * nx + ex] = true;
                }
            }
        }
        Ok(mask)
    }

    /// Adds one level built with `strategy` over the union of supports of the
    /// marked functions. Functions whose support lies inside that region are
    /// replaced by their children; remaining functions with active children are
    /// truncated. An empty marked set leaves the hierarchy unchanged.
    pub fn refine(&self, marked: &MarkedSet, strategy: Strategy) -> Result<Self> {
        if marked.is_empty() {
            return Ok(self.clone());
        }
        let finest = self.finest_level();
        if marked.level != finest {
            return Err(Error::Hierarchy(format!(
                "marked set refers to level {} but the finest level is {finest}",
                marked.level
            )));
        }
        let mask = self.refinement_region(marked)?;

        let mut levels = self.levels.clone();
        let coarse = &levels[finest].space;
        let fine_space = strategy.apply(coarse);
        let maps = (
            TwoScaleMap::between(&coarse.x, &fine_space.x, &self.cache)?,
            TwoScaleMap::between(&coarse.y, &fine_space.y, &self.cache)?,
        );
        levels[finest].to_next = Some(Arc::new(maps));
        let mut new_level = Level::new(finest + 1, fine_space, LevelOrigin::Refined(strategy));
        new_level.region = Some(mask.clone());
        levels.push(new_level);
        let new_index = finest + 1;
        let (nx, _) = levels[finest].num_elements();

        // region membership of a box given in coordinates of any coarser-or-equal level
        let coarse_lvl = &levels[finest];
        let covered = |b: [f64; 4]| -> (bool, bool) {
            let x0 = break_index(&coarse_lvl.breaks_x, b[0]);
            let x1 = break_index(&coarse_lvl.breaks_x, b[1]);
            let y0 = break_index(&coarse_lvl.breaks_y, b[2]);
            let y1 = break_index(&coarse_lvl.breaks_y, b[3]);
            let (mut all, mut any) = (true, false);
            for ey in y0..y1 {
                for ex in x0..x1 {
                    let m = mask[ey * nx + ex];
                    all &= m;
                    any |= m;
                }
            }
            (all, any)
        };

        let mut deactivated = Vec::new();
        let mut kept = Vec::new();
        for (id, f) in self.functions.iter().enumerate() {
            let lvl = &levels[f.expansion.level];
            let (mut all, mut any) = (true, false);
            for &((i, j), _) in &f.expansion.terms {
                let (a, b) = covered(lvl.support_box(i, j));
                all &= a;
                any |= b;
            }
            if all {
                deactivated.push(id);
            } else {
                kept.push((id, any));
            }
        }
        for &id in &marked.functions {
            if !deactivated.contains(&id) {
                return Err(Error::Hierarchy(format!(
                    "marked function {id} is not inside its own refinement region"
                )));
            }
        }

        // children of deactivated functions become active
        let mut new_active: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &id in &deactivated {
            let lifted = lift(&levels, &self.functions[id].expansion, new_index)?;
            for ((i, j), _) in lifted.terms {
                new_active.insert((j, i));
            }
        }

        let mut functions = Vec::with_capacity(kept.len() + new_active.len());
        for (id, overlaps) in kept {
            let f = &self.functions[id];
            if !overlaps {
                functions.push(f.clone());
                continue;
            }
            let lifted = lift(&levels, &f.expansion, new_index)?;
            let before = lifted.terms.len();
            let terms: Vec<_> = lifted
                .terms
                .into_iter()
                .filter(|((i, j), _)| !new_active.contains(&(*j, *i)))
                .collect();
            let mut g = f.clone();
            if terms.len() != before {
                if terms.is_empty() {
                    return Err(Error::Hierarchy(format!(
                        "function {id} truncated to zero but was not deactivated"
                    )));
                }
                g.expansion = Expansion {
                    level: new_index,
                    terms,
                };
            }
            functions.push(g);
        }
        let degree = levels[new_index].degree();
        for (j, i) in new_active {
            functions.push(ActiveFunction {
                level: new_index,
                index: (i, j),
                degree,
                expansion: Expansion {
                    level: new_index,
                    terms: vec![((i, j), 1.0)],
                },
            });
        }

        let mut out = Self {
            levels,
            functions,
            elements: Vec::new(),
            cells: self.cells.clone(),
            element_functions: Vec::new(),
            cache: self.cache.clone(),
        };
        out.rebuild_mesh()?;
        Ok(out)
    }

    /// Recomputes active elements, the cell lookup and element-to-function lists.
    fn rebuild_mesh(&mut self) -> Result<()> {
        let mut elements = Vec::new();
        let nlev = self.levels.len();
        for l in 0..nlev {
            let lvl = &self.levels[l];
            let (nx, ny) = lvl.num_elements();
            let prev = (l > 0).then(|| &self.levels[l - 1]);
            let next = self.levels.get(l + 1);
            for ey in 0..ny {
                for ex in 0..nx {
                    let x = (lvl.breaks_x[ex], lvl.breaks_x[ex + 1]);
                    let y = (lvl.breaks_y[ey], lvl.breaks_y[ey + 1]);
                    if let Some(p) = prev {
                        let px = cell_index(&p.breaks_x, 0.5 * (x.0 + x.1));
                        let py = cell_index(&p.breaks_y, 0.5 * (y.0 + y.1));
                        if !lvl.region_contains(px, py, p.num_elements().0) {
                            continue;
                        }
                    }
                    if let Some(n) = next {
                        if n.region_contains(ex, ey, nx) {
                            continue;
                        }
                    }
                    elements.push(Element {
                        level: l,
                        index: (ex, ey),
                        x,
                        y,
                        quad_degree: 0,
                    });
                }
            }
        }

        let finest = &self.levels[nlev - 1];
        let breaks_x = finest.breaks_x.clone();
        let breaks_y = finest.breaks_y.clone();
        let cnx = breaks_x.len() - 1;
        let cny = breaks_y.len() - 1;
        let mut owner = vec![u32::MAX; cnx * cny];
        let mut cells = CellGrid {
            breaks_x,
            breaks_y,
            owner: Vec::new(),
        };
        for (id, e) in elements.iter().enumerate() {
            let ((x0, x1), (y0, y1)) = cells.cells_of([e.x.0, e.x.1, e.y.0, e.y.1]);
            for cy in y0..y1 {
                for cx in x0..x1 {
                    let slot = &mut owner[cy * cnx + cx];
                    if *slot != u32::MAX {
                        return Err(Error::Hierarchy(format!(
                            "active elements overlap at cell ({cx}, {cy})"
                        )));
                    }
                    *slot = id as u32;
                }
            }
        }
        if owner.contains(&u32::MAX) {
            return Err(Error::Hierarchy("active elements leave a gap".into()));
        }
        cells.owner = owner;
        self.cells = cells;
        self.elements = elements;

        let mut element_functions: Vec<Vec<u32>> = vec![Vec::new(); self.elements.len()];
        for (fid, f) in self.functions.iter().enumerate() {
            let mut touched = Vec::new();
            for b in self.support_boxes(f) {
                touched.extend(self.elements_in_box(b));
            }
            touched.sort_unstable();
            touched.dedup();
            for e in touched {
                element_functions[e].push(fid as u32);
            }
        }
        for (e, fs) in element_functions.iter().enumerate() {
            self.elements[e].quad_degree = fs
                .iter()
                .map(|&f| self.functions[f as usize].degree)
                .max()
                .unwrap_or(0);
        }
        self.element_functions = element_functions;
        Ok(())
    }

    /// Expansion of function `f` over the tensor basis of level `target`.
    pub fn expansion_at(&self, f: usize, target: usize) -> Result<Expansion> {
        lift(&self.levels, &self.functions[f].expansion, target)
    }

    pub fn quadrature_degree(&self, element: usize) -> usize {
        self.elements[element].quad_degree
    }

    /// Univariate knot vectors of level `l`.
    pub fn level_knots(&self, l: usize) -> (&KnotVector, &KnotVector) {
        let s = &self.levels[l].space;
        (&s.x, &s.y)
    }
}

/// Re-expresses `exp` on level `target` by chaining two-scale relations.
pub(crate) fn lift(levels: &[Level], exp: &Expansion, target: usize) -> Result<Expansion> {
    if target < exp.level {
        return Err(Error::Hierarchy(format!(
            "cannot lift level {} expansion down to level {target}",
            exp.level
        )));
    }
    let mut cur = exp.clone();
    while cur.level < target {
        let maps = levels[cur.level].to_next.as_ref().ok_or_else(|| {
            Error::Hierarchy(format!("level {} has no two-scale map", cur.level))
        })?;
        let (mx, my) = (&maps.0, &maps.1);
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &((i, j), c) in &cur.terms {
            for &(ci, lx) in mx.row(i) {
                for &(cj, ly) in my.row(j) {
                    *acc.entry((cj, ci)).or_insert(0.0) += c * lx * ly;
                }
            }
        }
        cur = Expansion {
            level: cur.level + 1,
            terms: acc
                .into_iter()
                .filter(|(_, c)| c.abs() > 1e-14)
                .map(|((j, i), c)| ((i, j), c))
                .collect(),
        };
    }
    Ok(cur)
}
