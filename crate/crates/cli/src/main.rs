use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use thb_sbm::config::RunConfig;
use thb_sbm::par::Execution;
use thb_sbm::study::{build_space, run_single, run_study, tail_slope, write_csv, Refinement, StudyRecord};
use thb_sbm::validation;

/// Isogeometric shifted boundary solver on THB-splines.
#[derive(Parser, Debug)]
#[command(name = "thb-sbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, env = "THB_SBM_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One solve and an error report.
    Run(RunArgs),
    /// Every degree, strategy and mesh of the schedule; writes a CSV.
    Study(ConfigArg),
    /// Invariant suite: partition of unity, two-scale relations, DOF fixtures, patch tests.
    Validate(OptionalConfig),
    /// Writes the active functions and elements of the hierarchy as CSV.
    DumpBasis(RunArgs),
}

#[derive(Args, Debug)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct OptionalConfig {
    /// Accepted for symmetry with the other commands; checked for validity only.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Degree; defaults to the first configured one.
    #[arg(long)]
    degree: Option<usize>,
    /// Strategy (none, h, p, k); defaults to the first configured one.
    #[arg(long)]
    strategy: Option<String>,
    /// Spans per direction; defaults to the start of the schedule.
    #[arg(long)]
    spans: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let exec = match cli.threads {
        Some(0) => bail!("--threads must be positive"),
        Some(1) => Execution::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the thread pool")?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    match cli.command {
        Command::Run(a) => run(&a, exec),
        Command::Study(a) => study(&a.config, &cli.out, exec),
        Command::Validate(a) => validate(a.config.as_deref(), exec),
        Command::DumpBasis(a) => dump(&a, &cli.out, exec),
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    Ok(RunConfig::load(path)?)
}

struct Single {
    degree: usize,
    strategy: Refinement,
    spans: usize,
}

fn pick(cfg: &RunConfig, a: &RunArgs) -> Result<Single> {
    let strategy = match a.strategy.as_deref() {
        None => cfg.discretization.strategies[0],
        Some("none") => Refinement::None,
        Some("h") => Refinement::H,
        Some("p") => Refinement::P,
        Some("k") => Refinement::K,
        Some(s) => bail!("--strategy: expected none, h, p or k, got `{s}`"),
    };
    Ok(Single {
        degree: a.degree.unwrap_or(cfg.discretization.degrees[0]),
        strategy,
        spans: a.spans.unwrap_or(cfg.schedule.spans()[0]),
    })
}

fn run(a: &RunArgs, exec: Execution) -> Result<ExitCode> {
    let cfg = load(&a.config)?;
    let s = pick(&cfg, a)?;
    let problem = cfg.problem()?;
    let o = run_single(&problem, s.degree, s.spans, s.strategy, exec)?;
    println!(
        "{} p={} n={} strategy={}: dofs {} marked {} h {:.4e}",
        cfg.name,
        s.degree,
        s.spans,
        s.strategy.name(),
        o.dofs,
        o.marked,
        o.h_char
    );
    println!("L2 relative {:.6e}", o.errors.l2_rel);
    println!("H1 relative {:.6e}", o.errors.h1_rel);
    println!("residual    {:.3e}", o.relative_residual);
    Ok(ExitCode::SUCCESS)
}

fn study(config: &Path, out: &Path, exec: Execution) -> Result<ExitCode> {
    let cfg = load(config)?;
    let spec = cfg.study()?;
    let records = run_study(&spec, exec);
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let name = cfg.output.csv.clone().unwrap_or_else(|| format!("{}.csv", cfg.name));
    let path = out.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(BufWriter::new(f), &records, cfg.output.timing)?;
    print_slopes(&records);
    println!("wrote {}", path.display());
    let failed = records.iter().filter(|r| r.failure.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} datapoint(s) failed");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_slopes(records: &[StudyRecord]) {
    let mut keys: Vec<(usize, Refinement)> = records.iter().map(|r| (r.degree, r.strategy)).collect();
    keys.dedup();
    for (p, st) in keys {
        let rs: Vec<&StudyRecord> = records
            .iter()
            .filter(|r| r.degree == p && r.strategy == st && r.failure.is_none())
            .collect();
        if rs.len() < 2 {
            continue;
        }
        let h: Vec<f64> = rs.iter().map(|r| r.h_char).collect();
        let l2: Vec<f64> = rs.iter().map(|r| r.err_l2_rel).collect();
        let h1: Vec<f64> = rs.iter().map(|r| r.err_h1_rel).collect();
        println!(
            "p={p} {:<4} L2 slope {:5.2}  H1 slope {:5.2}",
            st.name(),
            tail_slope(&h, &l2),
            tail_slope(&h, &h1)
        );
    }
}

fn validate(config: Option<&Path>, exec: Execution) -> Result<ExitCode> {
    if let Some(c) = config {
        load(c)?;
    }
    let checks = validation::run_all(exec)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dump(a: &RunArgs, out: &Path, exec: Execution) -> Result<ExitCode> {
    let cfg = load(&a.config)?;
    let s = pick(&cfg, a)?;
    let problem = cfg.problem()?;
    let (space, surrogate, marked) = build_space(&problem, s.degree, s.spans, s.strategy, exec)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let fpath = out.join(format!("{}-functions.csv", cfg.name));
    let epath = out.join(format!("{}-elements.csv", cfg.name));
    space.write_functions_csv(BufWriter::new(File::create(&fpath)?))?;
    space.write_elements_csv(BufWriter::new(File::create(&epath)?))?;
    print!("{}", space.summary());
    println!(
        "marked {marked}, surrogate: {} active elements, {} segments",
        surrogate.active_elements().count(),
        surrogate.segments.len()
    );
    println!("wrote {} and {}", fpath.display(), epath.display());
    Ok(ExitCode::SUCCESS)
}
