//! TOML run configuration.
//!
//! ```toml
//! name = "neumann-hole"
//!
//! [geometry]
//! bounds = [0.0, 1.0, 0.0, 1.0]
//! outer = { kind = "rectangle", bc = "dirichlet" }
//! holes = [{ kind = "circle", center = [0.5, 0.5], radius = 0.15, bc = "neumann" }]
//!
//! [problem]
//! solution = "xy_cosh_sin"
//! refine_on = "neumann"
//!
//! [discretization]
//! degrees = [1, 2]
//! strategies = ["none", "h", "p", "k"]
//!
//! [schedule]
//! kind = "halve"
//! start = 20
//! end = 160
//! ```
//!
//! Unknown keys are rejected. Relative polyline paths are resolved against the
//! directory of the configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::{read_polyline, Bc, Curve, Outer, TrueDomain};
use crate::manufactured::SolutionId;
use crate::sbm::{MarkWhich, NitscheConfig, ShiftConfig};
use crate::study::{Problem, Refinement, Schedule, StudySpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub geometry: GeometryConfig,
    pub problem: ProblemConfig,
    pub discretization: DiscretizationConfig,
    pub schedule: Schedule,
    #[serde(default)]
    pub shift: ShiftConfig,
    #[serde(default)]
    pub nitsche: NitscheConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "unit_bounds")]
    pub bounds: [f64; 4],
    pub outer: OuterConfig,
    #[serde(default)]
    pub holes: Vec<HoleConfig>,
}

fn unit_bounds() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}

/// Outer boundary: the background rectangle (body-fitted) or an immersed curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OuterConfig {
    Rectangle { bc: Bc },
    Circle { center: [f64; 2], radius: f64, bc: Bc },
    Polyline { file: PathBuf, bc: Bc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HoleConfig {
    Circle { center: [f64; 2], radius: f64, bc: Bc },
    Polyline { file: PathBuf, bc: Bc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub solution: SolutionId,
    #[serde(default = "default_refine_on")]
    pub refine_on: MarkWhich,
}

fn default_refine_on() -> MarkWhich {
    MarkWhich::Neumann
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub degrees: Vec<usize>,
    pub strategies: Vec<Refinement>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// CSV file name, relative to the output directory.
    pub csv: Option<String>,
    /// Write measured wall times instead of zeros.
    pub timing: bool,
}

impl RunConfig {
    /// Parses and validates a configuration. `base` resolves relative file paths.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(base) = base {
            cfg.resolve_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, Some(base)).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let OuterConfig::Polyline { file, .. } = &mut self.geometry.outer {
            fix(file);
        }
        for h in &mut self.geometry.holes {
            if let HoleConfig::Polyline { file, .. } = h {
                fix(file);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("key `{key}`: {msg}")));
        if self.name.is_empty() || self.name.contains([',', '\n']) {
            return bad("name", "must be non-empty without commas".into());
        }
        let d = &self.discretization;
        if d.degrees.is_empty() {
            return bad("discretization.degrees", "must not be empty".into());
        }
        if let Some(p) = d.degrees.iter().find(|p| !(1..=5).contains(*p)) {
            return bad("discretization.degrees", format!("degree {p} outside 1..=5"));
        }
        if d.strategies.is_empty() {
            return bad("discretization.strategies", "must not be empty".into());
        }
        let (start, end) = match self.schedule {
            Schedule::Step { start, end } | Schedule::Halve { start, end } => (start, end),
        };
        if start == 0 || start > end {
            return bad("schedule", format!("need 0 < start <= end, got {start}..{end}"));
        }
        let b = self.geometry.bounds;
        if !(b[1] > b[0] && b[3] > b[2]) {
            return bad("geometry.bounds", format!("empty rectangle {b:?}"));
        }
        self.nitsche.validate()
    }

    /// Builds the true domain, reading polyline files.
    pub fn domain(&self) -> Result<TrueDomain> {
        let g = &self.geometry;
        let outer = match &g.outer {
            OuterConfig::Rectangle { bc } => Outer::BodyFitted(*bc),
            OuterConfig::Circle { center, radius, bc } => Outer::Immersed(
                Curve::Circle {
                    center: *center,
                    radius: *radius,
                },
                *bc,
            ),
            OuterConfig::Polyline { file, bc } => Outer::Immersed(Curve::Polyline(read_polyline(file)?), *bc),
        };
        let mut dom = TrueDomain::new(g.bounds, outer)?;
        for h in &g.holes {
            dom = match h {
                HoleConfig::Circle { center, radius, bc } => dom.with_hole(
                    Curve::Circle {
                        center: *center,
                        radius: *radius,
                    },
                    *bc,
                )?,
                HoleConfig::Polyline { file, bc } => dom.with_hole(Curve::Polyline(read_polyline(file)?), *bc)?,
            };
        }
        Ok(dom)
    }

    /// Short geometry label for CSV output.
    pub fn geometry_label(&self) -> String {
        let g = &self.geometry;
        let outer = match &g.outer {
            OuterConfig::Rectangle { .. } => "rectangle",
            OuterConfig::Circle { .. } => "circle",
            OuterConfig::Polyline { .. } => "polyline",
        };
        if g.holes.is_empty() {
            outer.to_string()
        } else {
            format!("{outer}+{}hole", g.holes.len())
        }
    }

    /// Boundary conditions, outer first, e.g. `dirichlet/neumann`.
    pub fn bc_label(&self) -> String {
        let g = &self.geometry;
        let mut tags = vec![match &g.outer {
            OuterConfig::Rectangle { bc } | OuterConfig::Circle { bc, .. } | OuterConfig::Polyline { bc, .. } => *bc,
        }];
        for h in &g.holes {
            tags.push(match h {
                HoleConfig::Circle { bc, .. } | HoleConfig::Polyline { bc, .. } => *bc,
            });
        }
        tags.iter()
            .map(|b| match b {
                Bc::Dirichlet => "dirichlet",
                Bc::Neumann => "neumann",
            })
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            domain: self.domain()?,
            solution: self.problem.solution,
            shift: self.shift,
            nitsche: self.nitsche,
            refine_on: self.problem.refine_on,
        })
    }

    pub fn study(&self) -> Result<StudySpec> {
        Ok(StudySpec {
            name: self.name.clone(),
            geometry: self.geometry_label(),
            bc_case: self.bc_label(),
            problem: self.problem()?,
            degrees: self.discretization.degrees.clone(),
            strategies: self.discretization.strategies.clone(),
            schedule: self.schedule,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "annulus"

[geometry]
outer = { kind = "circle", center = [0.5, 0.5], radius = 0.47, bc = "neumann" }
holes = [{ kind = "circle", center = [0.5, 0.5], radius = 0.1, bc = "dirichlet" }]

[problem]
solution = "xy_cosh_sin"
refine_on = "neumann"

[discretization]
degrees = [1, 2]
strategies = ["none", "h", "p", "k"]

[schedule]
kind = "halve"
start = 20
end = 160

[shift]
neumann_rule = "force_standard"

[nitsche]
theta = -1.0
alpha = 0.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(SAMPLE, None).unwrap();
        assert_eq!(cfg.discretization.degrees, vec![1, 2]);
        assert_eq!(cfg.schedule.spans(), vec![20, 40, 80, 160]);
        assert_eq!(cfg.bc_label(), "neumann/dirichlet");
        let again = RunConfig::from_toml(&cfg.to_toml(), None).unwrap();
        assert_eq!(cfg, again);
        let dom = cfg.domain().unwrap();
        assert_eq!(dom.boundaries().len(), 2);
    }

    #[test]
    fn unknown_keys_name_the_key() {
        let text = SAMPLE.replace("refine_on", "refine_onn");
        let e = RunConfig::from_toml(&text, None).unwrap_err().to_string();
        assert!(e.contains("refine_onn"), "{e}");
        let text = SAMPLE.replace("radius = 0.47", "radius = 0.47, colour = 1");
        let e = RunConfig::from_toml(&text, None).unwrap_err().to_string();
        assert!(e.contains("colour"), "{e}");
    }

    #[test]
    fn invalid_values_name_the_key() {
        let text = SAMPLE.replace("degrees = [1, 2]", "degrees = [1, 7]");
        let e = RunConfig::from_toml(&text, None).unwrap_err().to_string();
        assert!(e.contains("discretization.degrees"), "{e}");
        let text = SAMPLE.replace("start = 20", "start = 200");
        let e = RunConfig::from_toml(&text, None).unwrap_err().to_string();
        assert!(e.contains("schedule"), "{e}");
        let text = SAMPLE.replace("strategies = [\"none\", \"h\", \"p\", \"k\"]", "strategies = []");
        let e = RunConfig::from_toml(&text, None).unwrap_err().to_string();
        assert!(e.contains("strategies"), "{e}");
    }

    #[test]
    fn missing_bc_is_rejected() {
        let text = SAMPLE.replace(", bc = \"dirichlet\"", "");
        let e = RunConfig::from_toml(&text, None).unwrap_err().to_string();
        assert!(e.contains("bc"), "{e}");
    }
}
