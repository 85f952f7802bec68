//! Command-line front end for `qwcount-core`.
//!
//! Every command produces one [`output::Table`], written as CSV or JSON.
//! Exit codes: 0 on success, 1 for invalid input or I/O failure, 2 when a
//! verification or threshold check fails.

pub mod config;
pub mod output;

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use qwcount_core::analysis::{corrupt_oracle, run_sweep, verify_suite, Comparison, Tolerances};
use qwcount_core::counting::{
    full_count_exact_with, full_count_trials, partial_count_exact_with, partial_count_trials,
    partial_phase_distribution, Engine, EVENT_SLACK,
};
use qwcount_core::phase::{circuit_distribution, exact_distribution, PhaseDistribution};
use qwcount_core::reduced::{eigenphase_table, spectral_decomposition, WalkAngles};
use qwcount_core::walk::{BipartiteInstance, Part};

use crate::output::{Format, Table};

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "QWCOUNT_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qwcount_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// What a command produced, plus whether its checks passed.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qwcount", version, about = "Exact simulation of quantum counting on complete bipartite graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Walk angles, eigenphases and initial-state overlaps of the reduced operator.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact phase-estimation outcome distribution.
    Distribution {
        #[command(flatten)]
        graph: GraphArgs,
        /// Phase register size in qubits.
        #[arg(long)]
        p: u32,
        #[arg(long, value_enum, default_value_t = EngineArg::Analytic)]
        engine: EngineArg,
        /// Use the part-restricted operator `S C R_j` instead of the full walk.
        #[arg(long, value_parser = ["0", "1"])]
        part: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Count marked vertices in one part or both.
    Count {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value = "both", value_parser = ["0", "1", "both"])]
        part: String,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Number of sampled runs.
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Seed for sampled runs; generated and reported when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = EngineArg::Analytic)]
        engine: EngineArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact bound-satisfaction masses over a parameter grid.
    Sweep {
        /// Sweep configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the file's `format` key.
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run every structural, spectral and distributional check on one instance.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        p: u32,
        /// Negate the oracle entry of this arc (negative control).
        #[arg(long)]
        corrupt_oracle: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub n0: usize,
    #[arg(long)]
    pub n1: usize,
    /// Number of marked vertices in V0 (marks 0..k0).
    #[arg(long, conflicts_with = "marked0")]
    pub k0: Option<usize>,
    /// Number of marked vertices in V1 (marks 0..k1).
    #[arg(long, conflicts_with = "marked1")]
    pub k1: Option<usize>,
    /// Explicit marked vertices of V0, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub marked0: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub marked1: Option<Vec<usize>>,
}

impl GraphArgs {
    pub fn instance(&self) -> Result<BipartiteInstance, CliError> {
        let marks = |k: Option<usize>, list: &Option<Vec<usize>>, n: usize, name: &str| match list {
            Some(v) => {
                let set: BTreeSet<usize> = v.iter().copied().collect();
                if set.len() != v.len() {
                    return Err(CliError::Usage(format!("duplicate vertex in --{name}")));
                }
                Ok(set)
            }
            None => {
                let k = k.unwrap_or(0);
                if k > n {
                    return Err(CliError::Usage(format!("k = {k} exceeds the part size {n}")));
                }
                Ok((0..k).collect())
            }
        };
        let m0 = marks(self.k0, &self.marked0, self.n0, "marked0")?;
        let m1 = marks(self.k1, &self.marked1, self.n1, "marked1")?;
        Ok(BipartiteInstance::new(self.n0, self.n1, m0, m1)?)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Analytic,
    Circuit,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Analytic => Engine::Analytic,
            EngineArg::Circuit => Engine::Circuit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Sampled,
}

fn part_arg(s: &str) -> Result<Part, CliError> {
    let bit = s.parse::<usize>().map_err(|_| CliError::Usage(format!("invalid part '{s}'")))?;
    Ok(Part::from_bit(bit)?)
}

/// Sets the global rayon pool size from [`THREADS_ENV`] when present.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure worker threads: {e}")))
}

pub fn execute(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Spectrum { graph, out } => {
            let inst = graph.instance()?;
            Ok(done(spectrum_table(&inst), out, true))
        }
        Command::Distribution { graph, p, engine, part, out } => {
            let inst = graph.instance()?;
            let dist = match part {
                Some(j) => partial_phase_distribution(&inst, part_arg(&j)?, p, engine.into())?,
                None => walk_distribution(&inst, p, engine.into())?,
            };
            Ok(done(distribution_table(&dist), out, true))
        }
        Command::Count { graph, p, part, mode, trials, seed, engine, out } => {
            let inst = graph.instance()?;
            let part = if part == "both" { None } else { Some(part_arg(&part)?) };
            let table = match mode {
                Mode::Exact => {
                    if seed.is_some() {
                        info!("--seed has no effect in exact mode");
                    }
                    exact_count_table(&inst, part, p, engine.into())?
                }
                Mode::Sampled => {
                    if engine != EngineArg::Analytic {
                        return Err(CliError::Usage("sampled mode always uses the analytic engine".into()));
                    }
                    let seed = seed.unwrap_or_else(|| {
                        let s = rand::random::<u64>();
                        eprintln!("seed: {s}");
                        s
                    });
                    sampled_count_table(&inst, part, p, seed, trials)?
                }
            };
            Ok(done(table, out, true))
        }
        Command::Sweep { config, format, output } => {
            let text = std::fs::read_to_string(&config)?;
            let file =
                config::parse_sweep_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
            let records = run_sweep(&file.config)?;
            let failures = records.iter().filter(|r| !r.passed()).count();
            eprintln!("{} grid points, {failures} below threshold", records.len());
            let table = sweep_table(&records);
            let format = format.or(file.format).unwrap_or_default();
            Ok(Outcome { table, format, output, passed: failures == 0 })
        }
        Command::Verify { graph, p, corrupt_oracle: corrupt, out } => {
            let inst = graph.instance()?;
            let oracle = corrupt.map(|idx| corrupt_oracle(&inst.build_oracle(), idx)).transpose()?;
            let report = verify_suite(&inst, p, &Tolerances::default(), oracle.as_ref())?;
            for failure in report.failures() {
                eprintln!("FAIL {}: measured {:e}, threshold {:e}", failure.name, failure.measured, failure.threshold);
            }
            let mut table = Table::new(&["check", "measured", "comparison", "threshold", "passed"]);
            for c in &report.checks {
                let cmp = match c.comparison {
                    Comparison::AtMost => "<=",
                    Comparison::AtLeast => ">=",
                };
                table.push(vec![
                    c.name.clone().into(),
                    c.measured.into(),
                    cmp.into(),
                    c.threshold.into(),
                    c.passed.into(),
                ]);
            }
            Ok(done(table, out, report.passed()))
        }
    }
}

fn done(table: Table, out: OutputArgs, passed: bool) -> Outcome {
    Outcome { table, format: out.format, output: out.output, passed }
}

/// Parses `argv`, runs the command and writes its output. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let outcome = match execute(cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = output::write_output(&outcome.table.render(outcome.format), outcome.output.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    outcome.exit_code()
}

fn walk_distribution(inst: &BipartiteInstance, p: u32, engine: Engine) -> Result<PhaseDistribution, CliError> {
    Ok(match engine {
        Engine::Analytic => exact_distribution(&eigenphase_table(&WalkAngles::from_instance(inst)), p)?,
        Engine::Circuit => {
            let u = inst.build_evolution(&inst.build_oracle())?;
            circuit_distribution(&u, &inst.uniform_state(), p)?
        }
    })
}

pub fn spectrum_table(inst: &BipartiteInstance) -> Table {
    let angles = WalkAngles::from_instance(inst);
    let spec = spectral_decomposition(&angles);
    let mut t = Table::new(&[
        "n0",
        "n1",
        "k0",
        "k1",
        "theta0",
        "theta1",
        "mu",
        "sigma",
        "label",
        "eigenvalue_re",
        "eigenvalue_im",
        "eigenphase_radians",
        "overlap",
    ]);
    for pair in &spec.pairs {
        t.push(vec![
            inst.n0().into(),
            inst.n1().into(),
            inst.k0().into(),
            inst.k1().into(),
            angles.theta0.into(),
            angles.theta1.into(),
            angles.mu.into(),
            angles.sigma.into(),
            pair.label.name().into(),
            pair.eigenvalue.re.into(),
            pair.eigenvalue.im.into(),
            pair.eigenphase.into(),
            pair.initial_overlap.into(),
        ]);
    }
    t
}

pub fn distribution_table(dist: &PhaseDistribution) -> Table {
    let mut t = Table::new(&["p", "omega_index", "omega_radians", "mass"]);
    for m in 0..dist.grid_size() {
        t.push(vec![dist.qubits().into(), m.into(), dist.omega(m).into(), dist.mass(m).into()]);
    }
    t
}

fn exact_count_table(inst: &BipartiteInstance, part: Option<Part>, p: u32, engine: Engine) -> Result<Table, CliError> {
    let mut t = Table::new(&["part", "p", "k_true", "k_est", "mass", "within_bound", "bound", "oracle_queries"]);
    let (label, k_true, bound, queries, values) = match part {
        Some(part) => {
            let d = partial_count_exact_with(inst, part, p, engine)?;
            (part.bit().to_string(), inst.marked_count(part), d.bound, d.oracle_queries, d.aggregated())
        }
        None => {
            let d = full_count_exact_with(inst, p, engine)?;
            ("both".to_string(), inst.k_total(), d.bound, d.oracle_queries, d.aggregated())
        }
    };
    for (k_est, mass) in values {
        let within = (k_est - k_true as f64).abs() <= bound + EVENT_SLACK;
        t.push(vec![
            label.as_str().into(),
            p.into(),
            k_true.into(),
            k_est.into(),
            mass.into(),
            within.into(),
            bound.into(),
            queries.into(),
        ]);
    }
    Ok(t)
}

fn sampled_count_table(
    inst: &BipartiteInstance,
    part: Option<Part>,
    p: u32,
    seed: u64,
    trials: usize,
) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "trial",
        "seed",
        "part",
        "p",
        "k_est",
        "k_rounded",
        "k_est_part0",
        "k_est_part1",
        "bound",
        "oracle_queries",
    ]);
    match part {
        Some(part) => {
            for (i, e) in partial_count_trials(inst, part, p, seed, trials)?.into_iter().enumerate() {
                let (k0, k1) = if part == Part::V0 { (Some(e.k_est), None) } else { (None, Some(e.k_est)) };
                t.push(vec![
                    i.into(),
                    seed.into(),
                    part.bit().to_string().into(),
                    p.into(),
                    e.k_est.into(),
                    e.k_rounded.into(),
                    k0.into(),
                    k1.into(),
                    e.bound.into(),
                    e.oracle_queries.into(),
                ]);
            }
        }
        None => {
            for (i, e) in full_count_trials(inst, p, seed, trials)?.into_iter().enumerate() {
                t.push(vec![
                    i.into(),
                    seed.into(),
                    "both".into(),
                    p.into(),
                    e.k_est.into(),
                    e.k_rounded.into(),
                    e.parts[0].k_est.into(),
                    e.parts[1].k_est.into(),
                    e.bound.into(),
                    e.oracle_queries.into(),
                ]);
            }
        }
    }
    Ok(t)
}

pub fn sweep_table(records: &[qwcount_core::analysis::SweepRecord]) -> Table {
    let mut t = Table::new(&[
        "n0",
        "n1",
        "k0",
        "k1",
        "p",
        "theta0",
        "theta1",
        "mu",
        "sigma",
        "partial_mass_part0",
        "partial_mass_part1",
        "joint_mass",
        "partial_bound_part0",
        "partial_bound_part1",
        "joint_bound",
        "good_estimate_part0",
        "good_estimate_part1",
        "product_lower_bound",
        "pass_part0",
        "pass_part1",
        "pass_joint",
    ]);
    for r in records {
        t.push(vec![
            r.n0.into(),
            r.n1.into(),
            r.k0.into(),
            r.k1.into(),
            r.p.into(),
            r.angles.theta0.into(),
            r.angles.theta1.into(),
            r.angles.mu.into(),
            r.angles.sigma.into(),
            r.partial[0].satisfied_mass.into(),
            r.partial[1].satisfied_mass.into(),
            r.joint.satisfied_mass.into(),
            r.partial[0].bound_value.into(),
            r.partial[1].bound_value.into(),
            r.joint.bound_value.into(),
            r.partial[0].good_estimate_mass.into(),
            r.partial[1].good_estimate_mass.into(),
            r.product_lower_bound.into(),
            r.partial_pass[0].into(),
            r.partial_pass[1].into(),
            r.joint_pass.into(),
        ]);
    }
    t
}
