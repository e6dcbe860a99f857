//! Convergence-study driver and CSV output.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::geometry::{Surrogate, TrueDomain};
use crate::manufactured::SolutionId;
use crate::norms::{compute_errors, ErrorNorms};
use crate::par::Execution;
use crate::sbm::{assemble, mark_surrogate_functions, MarkWhich, NitscheConfig, ShiftConfig};
use crate::solver::solve;
use crate::splines::TensorSpace;
use crate::thb::{HierarchicalSpace, Strategy};
use crate::{Error, Result};

/// Boundary refinement applied before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Refinement {
    None,
    H,
    P,
    K,
}

impl Refinement {
    pub fn name(self) -> &'static str {
        match self {
            Refinement::None => "none",
            Refinement::H => "h",
            Refinement::P => "p",
            Refinement::K => "k",
        }
    }

    pub fn strategy(self) -> Option<Strategy> {
        match self {
            Refinement::None => None,
            Refinement::H => Some(Strategy::H),
            Refinement::P => Some(Strategy::P),
            Refinement::K => Some(Strategy::K),
        }
    }
}

/// Mesh sequence of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Schedule {
    /// One extra span per direction per step.
    Step { start: usize, end: usize },
    /// Spans doubled at each step.
    Halve { start: usize, end: usize },
}

impl Schedule {
    pub fn spans(&self) -> Vec<usize> {
        match *self {
            Schedule::Step { start, end } => (start..=end).collect(),
            Schedule::Halve { start, end } => {
                let mut v = Vec::new();
                let mut n = start;
                while n <= end && n > 0 {
                    v.push(n);
                    n *= 2;
                }
                v
            }
        }
    }
}

/// Everything that defines a boundary-value problem apart from the mesh.
#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: TrueDomain,
    pub solution: SolutionId,
    pub shift: ShiftConfig,
    pub nitsche: NitscheConfig,
    /// Boundary portion whose functions are refined.
    pub refine_on: MarkWhich,
}

/// Result of one solve.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub h_char: f64,
    pub dofs: usize,
    pub errors: ErrorNorms,
    pub relative_residual: f64,
    pub marked: usize,
    pub space: HierarchicalSpace,
    pub surrogate: Surrogate,
    pub coefficients: Vec<f64>,
}

/// Builds the mesh and surrogate and, unless `refinement` is `None`, refines
/// the functions on the selected shifted boundary by one level. Returns the
/// number of marked functions as well.
pub fn build_space(
    problem: &Problem,
    degree: usize,
    n_spans: usize,
    refinement: Refinement,
    exec: Execution,
) -> Result<(HierarchicalSpace, Surrogate, usize)> {
    if !(1..=5).contains(&degree) {
        return Err(Error::Config(format!("degree must be in 1..=5, got {degree}")));
    }
    if n_spans == 0 {
        return Err(Error::Config("number of spans must be positive".into()));
    }
    let [x0, x1, y0, y1] = problem.domain.bounds();
    let root = TensorSpace::new(
        crate::splines::KnotVector::uniform(n_spans, degree, x0, x1),
        crate::splines::KnotVector::uniform(n_spans, degree, y0, y1),
    );
    let mut space = HierarchicalSpace::new(root)?;
    let mut surrogate = Surrogate::build(&space, &problem.domain, exec)?;
    let mut marked = 0;
    if let Some(strategy) = refinement.strategy() {
        let m = mark_surrogate_functions(&space, &surrogate, problem.refine_on);
        marked = m.len();
        if !m.is_empty() {
            space = space.refine(&m, strategy)?;
            surrogate = Surrogate::build(&space, &problem.domain, exec)?;
        }
    }
    Ok((space, surrogate, marked))
}

/// [`build_space`], then assembles, solves and measures the error.
pub fn run_single(
    problem: &Problem,
    degree: usize,
    n_spans: usize,
    refinement: Refinement,
    exec: Execution,
) -> Result<RunOutcome> {
    let (space, surrogate, marked) = build_space(problem, degree, n_spans, refinement, exec)?;
    let exact = problem.solution.solution();
    let system = assemble(&space, &surrogate, &exact, &problem.shift, &problem.nitsche, exec)?;
    let sol = solve(&system)?;
    let coefficients = system.expand(&sol.x);
    let errors = compute_errors(&space, &surrogate, &coefficients, &exact, exec);
    Ok(RunOutcome {
        h_char: space.h_char(),
        dofs: system.len(),
        errors,
        relative_residual: sol.relative_residual,
        marked,
        space,
        surrogate,
        coefficients,
    })
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub run_id: String,
    pub geometry: String,
    pub bc_case: String,
    pub strategy: Refinement,
    pub degree: usize,
    pub n_spans: usize,
    pub h_char: f64,
    pub dofs: usize,
    pub err_l2_rel: f64,
    pub err_h1_rel: f64,
    pub wall_time_s: f64,
    /// Why the datapoint failed, if it did; errors are NaN then.
    pub failure: Option<String>,
}

/// A study: the problem, the degrees and strategies to sweep, and the schedule.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub name: String,
    pub geometry: String,
    pub bc_case: String,
    pub problem: Problem,
    pub degrees: Vec<usize>,
    pub strategies: Vec<Refinement>,
    pub schedule: Schedule,
}

/// Runs every (degree, strategy, mesh) combination in schedule order. A
/// failing datapoint is recorded with its reason and the study continues.
pub fn run_study(spec: &StudySpec, exec: Execution) -> Vec<StudyRecord> {
    let mut out = Vec::new();
    for &degree in &spec.degrees {
        for &strategy in &spec.strategies {
            for n in spec.schedule.spans() {
                let run_id = format!("{}-{}-p{}-n{}", spec.name, strategy.name(), degree, n);
                let t0 = Instant::now();
                let res = run_single(&spec.problem, degree, n, strategy, exec);
                let wall = t0.elapsed().as_secs_f64();
                let rec = match res {
                    Ok(o) => {
                        log::info!(
                            "{run_id}: dofs {} L2 {:.3e} H1 {:.3e} ({wall:.2}s)",
                            o.dofs,
                            o.errors.l2_rel,
                            o.errors.h1_rel
                        );
                        StudyRecord {
                            run_id,
                            geometry: spec.geometry.clone(),
                            bc_case: spec.bc_case.clone(),
                            strategy,
                            degree,
                            n_spans: n,
                            h_char: o.h_char,
                            dofs: o.dofs,
                            err_l2_rel: o.errors.l2_rel,
                            err_h1_rel: o.errors.h1_rel,
                            wall_time_s: wall,
                            failure: None,
                        }
                    }
                    Err(e) => {
                        log::error!("{run_id}: {e}");
                        StudyRecord {
                            run_id,
                            geometry: spec.geometry.clone(),
                            bc_case: spec.bc_case.clone(),
                            strategy,
                            degree,
                            n_spans: n,
                            h_char: 1.0 / n as f64,
                            dofs: 0,
                            err_l2_rel: f64::NAN,
                            err_h1_rel: f64::NAN,
                            wall_time_s: wall,
                            failure: Some(e.to_string()),
                        }
                    }
                };
                out.push(rec);
            }
        }
    }
    out
}

pub const CSV_HEADER: &str =
    "run_id,geometry,bc_case,strategy,degree,n_spans,h_char,dofs,err_l2_rel,err_h1_rel,wall_time_s";

/// Writes the records. Wall times are written as zero unless `timing` is set,
/// so that repeated runs produce identical files.
pub fn write_csv<W: Write>(mut w: W, records: &[StudyRecord], timing: bool) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{:e},{},{:e},{:e},{:e}",
            r.run_id,
            r.geometry,
            r.bc_case,
            r.strategy.name(),
            r.degree,
            r.n_spans,
            r.h_char,
            r.dofs,
            r.err_l2_rel,
            r.err_h1_rel,
            if timing { r.wall_time_s } else { 0.0 }
        )?;
    }
    Ok(())
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fit_slope(h: &[f64], err: &[f64]) -> f64 {
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Slope over the last three points.
pub fn tail_slope(h: &[f64], err: &[f64]) -> f64 {
    let k = h.len().saturating_sub(3);
    fit_slope(&h[k..], &err[k..])
}
