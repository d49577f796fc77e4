use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cstar_core::approx::{
    compression_schedule, model, quasicentral_approximation, residual_curve, write_curve_csv, CompressionSchedule,
    Cutoff, ModelKind,
};
use cstar_core::matcalc::{DEFAULT_TOL_EQ, DEFAULT_TOL_PSD};
use cstar_core::relations::{check_all, parse_assignment, parse_relations};
use cstar_core::verify::{self, Ensemble, EnsembleKind, ExperimentReport, PowerFn, SearchDomain};
use cstar_core::{Assignment64, Policy64, System64};

/// Check C*-relations on matrices, run finite-rank approximation schedules,
/// and reproduce operator-norm inequalities on random matrices.
#[derive(Parser, Debug)]
#[command(name = "cstar", version, about)]
struct Cli {
    #[command(flatten)]
    opts: Opts,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Opts {
    /// Equality tolerance, relative to the input scale
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_EQ)]
    tol_eq: f64,

    /// Positivity tolerance, relative to the input scale
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_PSD)]
    tol_psd: f64,

    /// Master seed for random ensembles and searches
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Matrix dimension
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..=512))]
    dim: Option<u16>,

    /// Number of random samples
    #[arg(long, global = true)]
    count: Option<usize>,

    /// Evaluation budget for searches
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Output file for CSV or JSON-lines reports (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Truncation ranks, e.g. "4,8,16"
    #[arg(long, global = true)]
    schedule: Option<String>,

    /// Cutoff shape: sharp or ramp:W
    #[arg(long, global = true, default_value = "sharp")]
    cutoff: String,

    /// Record wall time in reports (makes them non-reproducible)
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check every relation of a relation file on an assignment file
    Check { relations: PathBuf, assignment: PathBuf },
    /// Run an approximation schedule and write the residual curve as CSV
    Approx {
        relations: PathBuf,
        /// Assignment file; alternatively use --model
        assignment: Option<PathBuf>,
        /// Comma-separated model operators assigned to the declared variables in order
        #[arg(long, conflicts_with = "assignment")]
        model: Option<String>,
        #[arg(long, value_enum, default_value_t = Procedure::Quasicentral)]
        procedure: Procedure,
    },
    /// Run one named experiment and write a JSON-lines report
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        /// Exponent for the monotonicity experiment
        #[arg(long, default_value_t = 0.5)]
        power: f64,
        /// Relation file for the positivity screen
        #[arg(long)]
        rel: Option<PathBuf>,
        /// Treat a found violation as the expected outcome
        #[arg(long)]
        expect_violation: bool,
    },
    /// Run the full experiment suite with default sizes and print a summary
    Reproduce,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Procedure {
    Loewner,
    Quasicentral,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentName {
    Expnorm,
    Heinz,
    Commutator,
    CommutatorLattice,
    Monotone,
    Positivity,
    Softtorus,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Violation,
    Usage(anyhow::Error),
    Parse(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let parse = e.chain().any(|c| {
            c.downcast_ref::<cstar_core::ParseError>().is_some()
                || matches!(c.downcast_ref::<cstar_core::Error>(), Some(cstar_core::Error::Parse(_)))
        });
        if parse {
            Failure::Parse(e)
        } else {
            Failure::Usage(e)
        }
    }
}

impl From<cstar_core::Error> for Failure {
    fn from(e: cstar_core::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Parse(e)) => {
            let msg: Vec<String> = e.chain().map(ToString::to_string).collect();
            eprintln!("{}", msg.join(":"));
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let o = &cli.opts;
    let pol = Policy64::new(o.tol_eq, o.tol_psd)?;
    match &cli.cmd {
        Cmd::Check { relations, assignment } => check(relations, assignment, &pol),
        Cmd::Approx { relations, assignment, model, procedure } => {
            approx(o, relations, assignment.as_deref(), model.as_deref(), *procedure, &pol)
        }
        Cmd::Experiment { name, power, rel, expect_violation } => {
            let seed = o.seed.ok_or_else(|| anyhow!("experiments need --seed"))?;
            let started = Instant::now();
            let mut report = experiment(o, *name, *power, rel.as_deref(), seed, &pol)?;
            if *expect_violation {
                report = report.expecting_violation();
            }
            if o.timing {
                report.runtime_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            emit_reports(o.out.as_deref(), std::slice::from_ref(&report))?;
            let mut human: Box<dyn Write> = if o.out.is_some() { Box::new(io::stdout()) } else { Box::new(io::stderr()) };
            writeln!(human, "{}", summary_line(&report)).ok();
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Violation)
            }
        }
        Cmd::Reproduce => {
            let seed = o.seed.unwrap_or(verify::DEFAULT_SEED);
            let started = Instant::now();
            let reports = verify::reproduce_suite(seed, &pol)?;
            if let Some(out) = &o.out {
                emit_reports(Some(out), &reports)?;
            }
            for r in &reports {
                println!("{}", summary_line(r));
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            print!("{} of {} experiments passed", reports.len() - failed, reports.len());
            if o.timing {
                print!(" in {:.1}s", started.elapsed().as_secs_f64());
            }
            println!();
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Violation)
            }
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_system(path: &Path) -> anyhow::Result<System64> {
    let text = read(path)?;
    parse_relations(&text).with_context(|| path.display().to_string())
}

fn load_assignment(path: &Path) -> anyhow::Result<Assignment64> {
    let text = read(path)?;
    parse_assignment(&text).with_context(|| path.display().to_string())
}

/// Compact decimal for tables: six decimals with trailing zeros dropped,
/// scientific notation for tiny nonzero values.
fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        return format!("{v:.3e}");
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn check(relations: &Path, assignment: &Path, pol: &Policy64) -> Result<(), Failure> {
    let sys = load_system(relations)?;
    let a = load_assignment(assignment)?;
    for v in sys.vars.names() {
        a.get(v).with_context(|| format!("{} does not assign `{v}`", assignment.display()))?;
    }
    let rels = sys.relations();
    let report = check_all(&rels, &a, pol)?;
    println!("{:<6} {:>12} {:>12}  relation", "status", "margin", "residual");
    for (r, v) in rels.iter().zip(&report.members) {
        let status = if v.satisfied { "ok" } else { "FAIL" };
        println!("{status:<6} {:>12} {:>12}  {r}", num(v.margin), num(v.residual));
    }
    let v = &report.verdict;
    println!("{}: residual {}, {}", if v.satisfied { "satisfied" } else { "violated" }, num(v.residual), v.detail);
    if v.satisfied {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn approx(
    o: &Opts,
    relations: &Path,
    assignment: Option<&Path>,
    models: Option<&str>,
    procedure: Procedure,
    pol: &Policy64,
) -> Result<(), Failure> {
    let sys = load_system(relations)?;
    let a = match (assignment, models) {
        (Some(path), _) => load_assignment(path)?,
        (None, Some(models)) => {
            let dim = o.dim.map(usize::from).ok_or_else(|| anyhow!("--model needs --dim"))?;
            let kinds: Vec<ModelKind> = models.split(',').map(|k| k.trim().parse()).collect::<Result<_, _>>()?;
            let names: Vec<&str> = sys.vars.names().collect();
            if kinds.len() != names.len() {
                return Err(anyhow!("{} models given for {} declared variables", kinds.len(), names.len()).into());
            }
            let pairs = names.iter().zip(kinds).map(|(n, k)| Ok((*n, model(k, dim)?))).collect::<cstar_core::Result<Vec<_>>>()?;
            Assignment64::from_pairs(pairs)?
        }
        (None, None) => return Err(anyhow!("give an assignment file or --model").into()),
    };
    let cutoff: Cutoff = o.cutoff.parse()?;
    let schedule = match &o.schedule {
        Some(s) => CompressionSchedule::parse(s, cutoff)?,
        None => CompressionSchedule::full(a.dim(), cutoff)?,
    };
    let steps = match procedure {
        Procedure::Loewner => compression_schedule(&a, &schedule)?,
        Procedure::Quasicentral => quasicentral_approximation(&a, &sys.stated, &schedule, pol)?,
    };
    let rows = residual_curve(&steps, &sys.relations(), pol)?;
    match &o.out {
        Some(path) => {
            let f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            write_curve_csv(&rows, f).context("writing CSV")?;
        }
        None => write_curve_csv(&rows, io::stdout().lock()).context("writing CSV")?,
    }
    Ok(())
}

fn dims_or(o: &Opts, default: &[usize]) -> Vec<usize> {
    o.dim.map_or_else(|| default.to_vec(), |d| vec![usize::from(d)])
}

fn experiment(
    o: &Opts,
    name: ExperimentName,
    power: f64,
    rel: Option<&Path>,
    seed: u64,
    pol: &Policy64,
) -> Result<ExperimentReport, Failure> {
    let count = |default: usize| o.count.unwrap_or(default);
    Ok(match name {
        ExperimentName::Expnorm => {
            let e = Ensemble::with_dims(EnsembleKind::General, dims_or(o, &[6]), seed, count(1000))?;
            verify::exp_norm_experiment(&e, pol)?
        }
        ExperimentName::Heinz => {
            let e = Ensemble::with_dims(EnsembleKind::Positive, dims_or(o, &[3, 4, 5, 6]), seed, count(500))?;
            verify::heinz_experiment(&e, &verify::default_nu_grid(), pol)?
        }
        ExperimentName::Commutator => {
            let dom = SearchDomain::Continuous { dims: dims_or(o, &[2, 3, 4, 5, 6]), steps_per_restart: 200 };
            verify::commutator_sqrt_search(&dom, o.budget.unwrap_or(100_000), seed, pol)?.report
        }
        ExperimentName::CommutatorLattice => {
            let budget = o.budget.unwrap_or_else(|| verify::lattice::points().len());
            verify::commutator_sqrt_search(&SearchDomain::Lattice, budget, seed, pol)?.report
        }
        ExperimentName::Monotone => {
            let e = Ensemble::with_dims(EnsembleKind::OrderPair, dims_or(o, &[4]), seed, count(1000))?;
            verify::monotone_experiment(PowerFn(power), &e, pol)?
        }
        ExperimentName::Positivity => {
            let path = rel.ok_or_else(|| anyhow!("the positivity screen needs --rel FILE"))?;
            let sys = load_system(path)?;
            verify::positivity_transfer_check(&sys, &dims_or(o, &[2, 3, 4, 5, 6, 7, 8]), count(300), seed, pol)?
        }
        ExperimentName::Softtorus => verify::soft_torus_experiment(&dims_or(o, &[2, 4, 8, 16]), 1e-10, pol)?,
    })
}

fn emit_reports(out: Option<&Path>, reports: &[ExperimentReport]) -> anyhow::Result<()> {
    let mut text = String::new();
    for r in reports {
        text.push_str(&r.to_json_line());
        text.push('\n');
    }
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing report"),
    }
}

fn summary_line(r: &ExperimentReport) -> String {
    let verdict = if r.passed { "PASS" } else { "FAIL" };
    let expect = if r.expect_violation { " (violation expected)" } else { "" };
    let extra: Vec<String> = r.stats.iter().map(|(k, v)| format!("{k} {}", num(*v))).collect();
    let mut line = format!(
        "{verdict} {:<11} samples {:>6}  max violation {:>12}  threshold {}{expect}",
        r.id,
        r.samples,
        num(r.max_violation),
        num(r.threshold)
    );
    if !extra.is_empty() {
        line.push_str("  ");
        line.push_str(&extra.join(", "));
    }
    if let Some(ms) = r.runtime_ms {
        line.push_str(&format!("  {ms:.0} ms"));
    }
    line
}
