use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rpsched_core::harness::bench::{run_bench, write_report, Algo, BenchConfig, Sweep};
use rpsched_core::harness::gen::{generate, EligibilityKind, GenParams};
use rpsched_core::harness::io::{parse_instance, write_instance, write_trace, SolutionFile};
use rpsched_core::relax::DEFAULT_TOL;
use rpsched_core::{brute_force_opt, ecsemrpp, fdr, lfj, lfm, solve_relaxation, OracleBudget};

#[derive(Parser)]
#[command(name = "rpsched", version, about = "Energy-minimal scheduling on restricted parallel processors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Generate(GenerateArgs),
    /// Solve an instance file with one algorithm.
    Solve(SolveArgs),
    /// Run a benchmark sweep and write one CSV row per cell, repeat and algorithm.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Eligibility {
    Random,
    Inclusive,
}

impl From<Eligibility> for EligibilityKind {
    fn from(e: Eligibility) -> Self {
        match e {
            Eligibility::Random => EligibilityKind::Random,
            Eligibility::Inclusive => EligibilityKind::Inclusive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Frac,
    Opt,
    Fdr,
    Lfj,
    Lfm,
    Ecsemrpp,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Frac => Algo::Frac,
            AlgoArg::Opt => Algo::Opt,
            AlgoArg::Fdr => Algo::Fdr,
            AlgoArg::Lfj => Algo::Lfj,
            AlgoArg::Lfm => Algo::Lfm,
            AlgoArg::Ecsemrpp => Algo::Ecsemrpp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    #[value(name = "C")]
    C,
    Eta,
    Eligibility,
}

#[derive(clap::Args)]
struct InstanceArgs {
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 27)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    w_lo: u64,
    #[arg(long, default_value_t = 10_000)]
    w_hi: u64,
    #[arg(long, value_enum, default_value = "random")]
    eligibility: Eligibility,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Common deadline.
    #[arg(long = "c", short = 'C', default_value_t = 1.0)]
    deadline: f64,
    /// Speed cap; defaults to the value that guarantees FDR feasibility.
    #[arg(long)]
    s_max: Option<f64>,
}

impl InstanceArgs {
    fn params(&self) -> GenParams {
        GenParams {
            m: self.m,
            n: self.n,
            w_range: (self.w_lo, self.w_hi),
            eligibility: self.eligibility.into(),
            seed: self.seed,
            alpha: self.alpha,
            deadline: self.deadline,
            s_max: self.s_max,
        }
    }
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[arg(long = "in")]
    input: PathBuf,
    /// Relative convergence tolerance of the relaxation (frac, fdr).
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write the rounding trace here (fdr only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Maximum number of assignments the opt oracle may enumerate.
    #[arg(long, default_value_t = OracleBudget::default().max_states)]
    budget: u64,
    /// Solution file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    sweep: SweepArg,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Deadline multipliers for `--sweep C`.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
    factors: Vec<f64>,
    /// Task counts for `--sweep eta`; defaults to m, 2m, 3m and 4m.
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["frac", "opt", "fdr", "lfj", "lfm"])]
    algos: Vec<AlgoArg>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = OracleBudget::default().max_states)]
    budget: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Report 0 for every runtime so reruns produce identical files.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out_csv: PathBuf,
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let inst = generate(&args.instance.params())?;
    match &args.out {
        Some(p) => write_instance(&inst, p)?,
        None => print!("{}", rpsched_core::harness::io::instance_to_string(&inst)),
    }
    Ok(())
}

/// Returns whether the produced solution is feasible.
fn cmd_solve(args: &SolveArgs) -> anyhow::Result<bool> {
    let inst = parse_instance(&args.input)?;
    if args.trace.is_some() && !matches!(args.algo, AlgoArg::Fdr) {
        bail!("--trace is only produced by --algo fdr");
    }
    let name = Algo::from(args.algo).as_str();
    let budget = OracleBudget::new(args.budget)?;
    let solution = match args.algo {
        AlgoArg::Frac => {
            let (x, _) = solve_relaxation(&inst, args.tol)?;
            SolutionFile::fractional(&inst, &x)
        }
        AlgoArg::Fdr => {
            let s = fdr(&inst, args.tol)?;
            if let Some(p) = &args.trace {
                write_trace(&s.trace, p)?;
            }
            SolutionFile::integral(&inst, name, &s.assignment)?
        }
        AlgoArg::Opt => SolutionFile::integral(&inst, name, &brute_force_opt(&inst, budget)?)?,
        AlgoArg::Lfj => SolutionFile::integral(&inst, name, &lfj(&inst)?)?,
        AlgoArg::Lfm => SolutionFile::integral(&inst, name, &lfm(&inst)?)?,
        AlgoArg::Ecsemrpp => SolutionFile::integral(&inst, name, &ecsemrpp(&inst)?)?,
    };
    emit(args.out.as_deref(), &solution.to_json())?;
    for v in &solution.violations {
        eprintln!("violation: {v}");
    }
    Ok(solution.feasible)
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let base = args.instance.params();
    let sweep = match args.sweep {
        SweepArg::C => Sweep::Deadline(args.factors.clone()),
        SweepArg::Eta if args.ns.is_empty() => Sweep::Eta((1..=4).map(|k| k * base.m).collect()),
        SweepArg::Eta => Sweep::Eta(args.ns.clone()),
        SweepArg::Eligibility => Sweep::Eligibility,
    };
    let mut cfg = BenchConfig::new(base, sweep);
    cfg.algos = args.algos.iter().map(|&a| a.into()).collect();
    cfg.repeats = args.repeats;
    cfg.budget = OracleBudget::new(args.budget)?;
    cfg.tol = args.tol;
    cfg.timing = !args.no_timing;
    let report = run_bench(&cfg)?;
    write_report(&report, &args.out_csv)?;
    println!("{:<14} {:<9} {:>14} {:>10} {:>10} {:>5}", "cell", "algo", "mean_energy", "mean_ratio", "max_ratio", "base");
    for s in report.summaries() {
        let base = if s.frac_based > 0 { "frac" } else { "opt" };
        println!(
            "{:<14} {:<9} {:>14.6e} {:>10.6} {:>10.6} {:>5}",
            s.cell, s.algo, s.mean_energy, s.mean_ratio, s.max_ratio, base
        );
    }
    Ok(())
}

fn is_infeasible(e: &anyhow::Error) -> bool {
    e.downcast_ref::<rpsched_core::Error>()
        .is_some_and(|e| e.is_infeasibility())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // keep 2 reserved for infeasibility
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a).map(|()| true),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_infeasible(&e) { 2 } else { 1 })
        }
    }
}
