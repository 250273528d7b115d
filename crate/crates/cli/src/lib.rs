//! Command-line front end. [`run`] does all the work and returns an exit
//! code, so the binary is a thin shell and tests can call it in-process.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use fairclust::checks::{bicriteria_checks, outcome_checks, pipeline_checks, LemmaCheck, CHECK_TOLERANCE};
use fairclust::format::{instance_to_json, read_instance};
use fairclust::generators::{gap_t, gen_gap_instance, gen_random, Geometry, RandomSpec, WeightDist};
use fairclust::lp::{build_basic_lp, build_cluster_lp, check_feasibility, solve_lp};
use fairclust::oracle::{binomial, bicriteria_with_guessing, brute_force_opt, run_with_guessing, GuessedRun};
use fairclust::rounding::Pipeline;
use fairclust::{bicriteria_round, run_main, AlgorithmParams, FairError, MetricInstance, RoundingOutcome};
use sha2::{Digest, Sha256};

use report::{BudgetField, GapSummary, ReportParams, RunReport};

/// Reference optimum is computed when there are at most this many k-subsets.
pub const OPT_REPORT_LIMIT: u128 = 100_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Approx,
    Bicriteria,
    Brute,
    LpOnly,
    GapDemo,
    Gen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Random,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    EuclideanPlane,
    MetricCompletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Unit,
    Uniform,
}

#[derive(Debug, Parser)]
#[command(name = "fairclust", version, about = "Socially fair k-clustering via LP rounding")]
pub struct Cli {
    /// Instance file (JSON).
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "approx")]
    pub mode: Mode,
    /// Overrides the instance's exponent.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed budget; without it the budget is guessed.
    #[arg(long)]
    pub z: Option<f64>,
    /// Number of centers for `gap-demo` and `gen`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of points for `gen`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of groups for `gen`.
    #[arg(long, default_value_t = 2)]
    pub ell: usize,
    #[arg(long, value_enum, default_value = "euclidean-plane")]
    pub geometry: GeometryArg,
    #[arg(long, value_enum, default_value = "uniform")]
    pub weights: WeightsArg,
    #[arg(long, value_enum, default_value = "random")]
    pub family: Family,
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a summary table to stderr.
    #[arg(long)]
    pub pretty: bool,
}

impl Cli {
    fn params(&self) -> AlgorithmParams {
        AlgorithmParams {
            gamma: self.gamma,
            lambda: self.lambda,
            epsilon: self.epsilon,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Maps a library error to a process exit code.
pub fn exit_code(err: &FairError) -> i32 {
    if err.is_validation() || matches!(err, FairError::OracleBudgetExceeded { .. }) {
        EXIT_INVALID
    } else {
        EXIT_SOLVER
    }
}

/// Parses `argv` (including the program name) and executes it.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INVALID;
        }
    };
    let result = pool.install(|| match cli.mode {
        Mode::Gen => generate(&cli).map(Output::Text),
        _ => solve(&cli).map(|r| Output::Report(Box::new(r))),
    });
    emit(&cli, result, stdout, stderr)
}

/// Pool sized from `FAIRCLUST_THREADS`, defaulting to rayon's choice.
fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FAIRCLUST_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("FAIRCLUST_THREADS must be a positive integer, got {v:?}"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| e.to_string())
}

fn emit(cli: &Cli, result: Result<Output, Failed>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (code, output) = match result {
        Ok(out) => (EXIT_OK, Some(out)),
        Err((e, partial)) => {
            let _ = writeln!(stderr, "error: {e}");
            (exit_code(&e), partial.map(Output::Report))
        }
    };
    let Some(output) = output else {
        return code;
    };
    let text = match &output {
        Output::Text(t) => t.clone(),
        Output::Report(r) => serde_json::to_string_pretty(r).expect("report serializes"),
    };
    if let (true, Output::Report(r)) = (cli.pretty, &output) {
        let _ = write!(stderr, "{}", r.table());
    }
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => {
            let _ = writeln!(stdout, "{text}");
        }
    }
    code
}

enum Output {
    Text(String),
    Report(Box<RunReport>),
}

/// An error, plus the report to emit anyway (the fallback on rounding
/// failure).
type Failed = (FairError, Option<Box<RunReport>>);

fn fail(e: FairError) -> Failed {
    (e, None)
}

fn generate(cli: &Cli) -> Result<String, Failed> {
    let k = cli.k.ok_or_else(|| fail(FairError::InvalidParams("gen needs --k".into())))?;
    let p = cli.p.unwrap_or(1.0);
    let inst = match cli.family {
        Family::Gap => gen_gap_instance(k, p).map_err(fail)?,
        Family::Random => {
            let n = cli.n.ok_or_else(|| fail(FairError::InvalidParams("gen needs --n".into())))?;
            let spec = RandomSpec {
                n,
                k,
                groups: cli.ell,
                p,
                geometry: match cli.geometry {
                    GeometryArg::EuclideanPlane => Geometry::EuclideanPlane,
                    GeometryArg::MetricCompletion => Geometry::MetricCompletion,
                },
                weights: match cli.weights {
                    WeightsArg::Unit => WeightDist::Unit,
                    WeightsArg::Uniform => WeightDist::Uniform,
                },
            };
            gen_random(cli.seed, &spec).map_err(fail)?
        }
    };
    Ok(instance_to_json(&inst))
}

fn load(cli: &Cli) -> Result<MetricInstance, Failed> {
    let path = cli
        .instance
        .as_ref()
        .ok_or_else(|| fail(FairError::InvalidParams("--instance is required for this mode".into())))?;
    let inst = read_instance(path).map_err(fail)?;
    match cli.p {
        Some(p) => inst.with_p(p).map_err(fail),
        None => Ok(inst),
    }
}

fn digest(inst: &MetricInstance) -> String {
    hex::encode(Sha256::digest(instance_to_json(inst).as_bytes()))
}

fn blank_report(cli: &Cli, inst: &MetricInstance, mode: &str, z_g: Option<BudgetField>) -> RunReport {
    RunReport {
        mode: mode.to_string(),
        instance_sha256: digest(inst),
        n: inst.n(),
        k: inst.k(),
        p: inst.p(),
        groups: inst.num_groups(),
        params: ReportParams {
            gamma: cli.gamma,
            lambda: cli.lambda,
            epsilon: cli.epsilon,
            seed: cli.seed,
            z_g,
        },
        budget: None,
        lp_objective: None,
        support_size: None,
        trials: None,
        feasible_trials: None,
        num_centers: None,
        centers: None,
        cost_wprime: None,
        cost_w: None,
        opt: None,
        fallback: false,
        feasibility: None,
        gap: None,
        checks: Vec::new(),
    }
}

/// Optimum for the report, when enumeration is cheap.
fn small_opt(inst: &MetricInstance) -> Result<Option<f64>, Failed> {
    if binomial(inst.n(), inst.k()) > OPT_REPORT_LIMIT {
        return Ok(None);
    }
    Ok(Some(brute_force_opt(inst).map_err(fail)?.cost))
}

fn fill_outcome(r: &mut RunReport, outcome: &RoundingOutcome) {
    r.num_centers = Some(outcome.centers.len());
    r.centers = Some(outcome.centers.as_slice().to_vec());
    r.cost_wprime = Some(outcome.cost_wprime);
    r.cost_w = Some(outcome.cost_w);
}

fn fill_pipeline(r: &mut RunReport, pl: &Pipeline) {
    r.budget = Some(pl.budget);
    r.lp_objective = Some(pl.lp.objective);
    r.support_size = Some(pl.support().len());
}

fn solve(cli: &Cli) -> Result<RunReport, Failed> {
    if cli.mode == Mode::GapDemo {
        return gap_demo(cli);
    }
    let inst = load(cli)?;
    let params = cli.params();
    params.validate().map_err(fail)?;
    let z_g = match cli.z {
        Some(z) if !(z >= 0.0 && z.is_finite()) => {
            return Err(fail(FairError::InvalidParams(format!("--z = {z} must be finite and non-negative"))))
        }
        Some(z) => Some(BudgetField::Fixed(z)),
        None => None,
    };
    match cli.mode {
        Mode::Approx | Mode::Bicriteria => {
            let z_g = z_g.or(Some(BudgetField::guessed()));
            let mut report = blank_report(cli, &inst, mode_name(cli.mode), z_g);
            let opt = small_opt(&inst)?;
            report.opt = opt;
            let bicriteria = cli.mode == Mode::Bicriteria;
            let solved = match cli.z {
                Some(z) => fixed_budget(&inst, &params, z, bicriteria, opt),
                None => guessed_budget(&inst, &params, bicriteria, opt),
            };
            match solved {
                Ok(f) => {
                    f(&mut report);
                    Ok(report)
                }
                Err(FairError::RoundingFailed { trials, fallback }) => {
                    report.trials = Some(trials);
                    report.feasible_trials = Some(0);
                    report.fallback = true;
                    fill_outcome(&mut report, &fallback);
                    Err((FairError::RoundingFailed { trials, fallback }, Some(Box::new(report))))
                }
                Err(e) => Err(fail(e)),
            }
        }
        Mode::Brute => {
            let mut report = blank_report(cli, &inst, "brute", None);
            let best = brute_force_opt(&inst).map_err(fail)?;
            report.opt = Some(best.cost);
            report.num_centers = Some(best.centers.len());
            report.centers = Some(best.centers.as_slice().to_vec());
            report.cost_w = Some(best.cost);
            Ok(report)
        }
        Mode::LpOnly => lp_only(cli, &inst, &params, z_g),
        Mode::GapDemo | Mode::Gen => unreachable!(),
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Approx => "approx",
        Mode::Bicriteria => "bicriteria",
        Mode::Brute => "brute",
        Mode::LpOnly => "lp-only",
        Mode::GapDemo => "gap-demo",
        Mode::Gen => "gen",
    }
}

type Filler = Box<dyn FnOnce(&mut RunReport)>;

fn fixed_budget(
    inst: &MetricInstance,
    params: &AlgorithmParams,
    z: f64,
    bicriteria: bool,
    opt: Option<f64>,
) -> fairclust::Result<Filler> {
    if bicriteria {
        let run = bicriteria_round(inst, params, z)?;
        let mut checks = pipeline_checks(inst, &run.pipeline)?;
        checks.extend(bicriteria_checks(inst, &run.pipeline, &run.outcome, opt));
        Ok(Box::new(move |r: &mut RunReport| {
            fill_pipeline(r, &run.pipeline);
            fill_outcome(r, &run.outcome);
            r.checks = checks;
        }))
    } else {
        let run = run_main(inst, params, z)?;
        let mut checks = pipeline_checks(inst, &run.pipeline)?;
        checks.extend(outcome_checks(inst, &run.pipeline, &run.outcome, opt));
        Ok(Box::new(move |r: &mut RunReport| {
            fill_pipeline(r, &run.pipeline);
            fill_outcome(r, &run.outcome);
            r.trials = Some(run.trials);
            r.feasible_trials = Some(run.feasible_trials);
            r.checks = checks;
        }))
    }
}

fn guessed_budget(
    inst: &MetricInstance,
    params: &AlgorithmParams,
    bicriteria: bool,
    opt: Option<f64>,
) -> fairclust::Result<Filler> {
    let run: GuessedRun = if bicriteria {
        bicriteria_with_guessing(inst, params)?
    } else {
        run_with_guessing(inst, params)?
    };
    let mut checks: Vec<LemmaCheck> = Vec::new();
    if let Some(pl) = &run.pipeline {
        checks = pipeline_checks(inst, pl)?;
        if bicriteria {
            checks.extend(bicriteria_checks(inst, pl, &run.outcome, opt));
        } else {
            checks.extend(outcome_checks(inst, pl, &run.outcome, opt));
        }
    }
    Ok(Box::new(move |r: &mut RunReport| {
        if let Some(pl) = &run.pipeline {
            fill_pipeline(r, pl);
        }
        r.budget = run.budget;
        fill_outcome(r, &run.outcome);
        if !bicriteria {
            r.trials = Some(run.trials);
            r.feasible_trials = Some(run.feasible_trials);
        }
        r.checks = checks;
    }))
}

fn lp_only(
    cli: &Cli,
    inst: &MetricInstance,
    params: &AlgorithmParams,
    z_g: Option<BudgetField>,
) -> Result<RunReport, Failed> {
    let mut report = blank_report(cli, inst, "lp-only", z_g);
    let (model, z, lambda) = match cli.z {
        Some(z) => (build_cluster_lp(inst, z, params.lambda).map_err(fail)?, z, params.lambda),
        None => (build_basic_lp(inst).map_err(fail)?, 1.0, f64::INFINITY),
    };
    let sol = solve_lp(inst, &model, params.lp_tolerance).map_err(fail)?;
    let feas = check_feasibility(inst, &sol, z.max(f64::MIN_POSITIVE), lambda, CHECK_TOLERANCE).map_err(fail)?;
    report.budget = cli.z;
    report.lp_objective = Some(sol.objective);
    report.checks.push(LemmaCheck::new("lp_feasibility", feas.worst(), 0.0));
    if let Some(z) = cli.z {
        report.checks.push(LemmaCheck::new("lp_below_budget", sol.objective, z));
    }
    report.feasibility = Some(feas);
    Ok(report)
}

fn gap_demo(cli: &Cli) -> Result<RunReport, Failed> {
    let k = cli.k.unwrap_or(4);
    let inst = gen_gap_instance(k, cli.p.unwrap_or(1.0)).map_err(fail)?;
    let params = cli.params();
    params.validate().map_err(fail)?;
    let z = cli.z.unwrap_or(1.0);
    let mut report = blank_report(cli, &inst, "gap-demo", Some(BudgetField::Fixed(z)));
    let lp = solve_lp(&inst, &build_cluster_lp(&inst, z, params.lambda).map_err(fail)?, params.lp_tolerance)
        .map_err(fail)?;
    let basic = solve_lp(&inst, &build_basic_lp(&inst).map_err(fail)?, params.lp_tolerance).map_err(fail)?;
    let best = brute_force_opt(&inst).map_err(fail)?;
    report.budget = Some(z);
    report.lp_objective = Some(lp.objective);
    report.opt = Some(best.cost);
    report.num_centers = Some(best.centers.len());
    report.centers = Some(best.centers.as_slice().to_vec());
    report.cost_w = Some(best.cost);
    report.checks.push(LemmaCheck::new("lp_below_optimum", lp.objective, best.cost));
    report.gap = Some(GapSummary {
        k,
        t: gap_t(k),
        lp_objective: lp.objective,
        basic_lp_objective: basic.objective,
        opt: best.cost,
        ratio: if lp.objective > 0.0 { best.cost / lp.objective } else { f64::INFINITY },
    });
    Ok(report)
}
