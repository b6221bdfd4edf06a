//! `tave`: solve, analyse and benchmark tensor absolute value equations.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 the solver did not
//! converge.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tave_core::analysis::{
    condition_report, falsify_structure, ConditionOptions, ConditionReport, FalsifierOptions, FalsifierVerdict,
    StructureProperty,
};
use tave_core::campaign::{
    generate_instance, parse_campaign_file, run_campaign_with, CampaignRow, Scenario, ScenarioSpec, TableFormat,
};
use tave_core::io::{tensor_from_json, tensor_to_json, vector_from_json, vector_to_json};
use tave_core::{solve, DenseTensor, Execution, SolveStatus, SolverConfig, TaveProblem, Vector};

#[derive(Parser)]
#[command(name = "tave", version, about = "Tensor absolute value equations: A x^(p-1) + B|x|^(q-1) = b")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem given as JSON files with the generalized Newton method.
    Solve(SolveArgs),
    /// Existence checks, bounds and structure falsifiers.
    Check(CheckArgs),
    /// Run seeded benchmark campaigns.
    Bench(BenchArgs),
    /// Write one generated instance to a directory.
    Gen(GenArgs),
}

#[derive(Args)]
struct LoadArgs {
    /// Tensor file for A.
    #[arg(long = "a", value_name = "FILE")]
    a: PathBuf,
    /// Load tensors as given instead of semi-symmetrizing them.
    #[arg(long)]
    no_symmetrize: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    load: LoadArgs,
    /// Tensor file for B.
    #[arg(long = "b-tensor", value_name = "FILE")]
    b_tensor: PathBuf,
    /// Vector file for the right-hand side b.
    #[arg(long, value_name = "FILE")]
    rhs: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Start point: a vector file, or `ones`.
    #[arg(long, value_name = "FILE|ones", default_value = "ones")]
    x0: String,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    load: LoadArgs,
    /// Tensor file for B. Needed for the condition report and for
    /// `assumption31`.
    #[arg(long = "b-tensor", value_name = "FILE")]
    b_tensor: Option<PathBuf>,
    /// Right-hand side, enables the solution norm bounds.
    #[arg(long, value_name = "FILE")]
    rhs: Option<PathBuf>,
    /// One of strictly-copositive (copositive), p-tensor, h-plus, wh-plus,
    /// nonsingular, assumption31.
    #[arg(long, value_name = "NAME")]
    property: Option<String>,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Falsifier violation tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Residual level for the upper solution bound.
    #[arg(long, default_value_t = 1e-5)]
    sigma: f64,
    #[arg(long, default_value_t = 32)]
    lambda_restarts: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Campaign file: one spec object or an array of them.
    #[arg(long, value_name = "FILE", conflicts_with = "scenario")]
    spec: Option<PathBuf>,
    #[command(flatten)]
    inline: InlineSpec,
    #[arg(long, default_value = "tsv", value_parser = ["tsv", "json", "markdown"])]
    format: String,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Run trials one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct InlineSpec {
    /// MM, MG, GM or GG.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, requires = "scenario")]
    p: Option<usize>,
    #[arg(long, requires = "scenario")]
    q: Option<usize>,
    #[arg(long, requires = "scenario")]
    n: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct SolveOutput {
    status: SolveStatus,
    iterations: usize,
    err: f64,
    x_final: Vector,
    residual_history: Vec<f64>,
    elapsed_seconds: f64,
}

#[derive(Serialize)]
struct CheckOutput {
    report: Option<ConditionReport>,
    falsifier: Option<FalsifierVerdict>,
}

#[derive(Serialize)]
struct GenOutput {
    scenario: Scenario,
    p: usize,
    q: usize,
    n: usize,
    seed: u64,
    trial: u64,
    files: Vec<String>,
    residual_at_x_star: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Check(args) => cmd_check(args).map(|()| ExitCode::SUCCESS),
        Command::Bench(args) => cmd_bench(args).map(|()| ExitCode::SUCCESS),
        Command::Gen(args) => cmd_gen(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_tensor(path: &Path, symmetrize: bool) -> Result<DenseTensor> {
    let t = tensor_from_json(&read_text(path)?).with_context(|| format!("in {}", path.display()))?;
    Ok(if symmetrize { t.semi_symmetrize()? } else { t })
}

fn load_vector(path: &Path) -> Result<Vector> {
    vector_from_json(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let sym = !args.load.no_symmetrize;
    let a = load_tensor(&args.load.a, sym)?;
    let b = load_tensor(&args.b_tensor, sym)?;
    let rhs = load_vector(&args.rhs)?;
    let problem = TaveProblem::new_unsymmetrized(a, b, rhs)?;
    let x0 = match args.x0.as_str() {
        "ones" => None,
        path => Some(load_vector(Path::new(path))?),
    };
    let cfg = SolverConfig {
        tol: args.tol,
        max_iter: args.max_iter,
        x0,
        ..SolverConfig::default()
    };
    let report = solve(&problem, &cfg)?;
    let out = SolveOutput {
        status: report.status,
        iterations: report.iterations,
        err: report.final_residual(),
        x_final: report.x_final.clone(),
        residual_history: report.residual_history.clone(),
        elapsed_seconds: report.elapsed_seconds,
    };
    emit(&to_json(&out)?, args.out.as_deref())?;
    Ok(if report.converged() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let sym = !args.load.no_symmetrize;
    let property = args.property.as_deref().map(str::parse::<StructureProperty>).transpose()?;
    let a = load_tensor(&args.load.a, sym)?;
    let b = args.b_tensor.as_deref().map(|p| load_tensor(p, sym)).transpose()?;
    let rhs = args.rhs.as_deref().map(load_vector).transpose()?;
    if b.is_none() && property.is_none() {
        bail!("nothing to check: pass --b-tensor for the condition report or --property for a falsifier");
    }
    if rhs.is_some() && b.is_none() {
        bail!("--rhs needs --b-tensor");
    }
    let report = match &b {
        Some(b) => Some(condition_report(
            &a,
            b,
            rhs.as_ref(),
            &ConditionOptions {
                lambda_restarts: args.lambda_restarts,
                seed: args.seed,
                sigma: args.sigma,
                ..ConditionOptions::default()
            },
        )?),
        None => None,
    };
    let falsifier = match property {
        Some(property) => Some(falsify_structure(
            &a,
            b.as_ref(),
            property,
            &FalsifierOptions {
                samples: args.samples,
                seed: args.seed,
                tol: args.tol,
                ..FalsifierOptions::default()
            },
        )?),
        None => None,
    };
    emit(&to_json(&CheckOutput { report, falsifier })?, None)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let specs = match (&args.spec, &args.inline.scenario) {
        (Some(path), _) => parse_campaign_file(&read_text(path)?).with_context(|| format!("in {}", path.display()))?,
        (None, Some(name)) => {
            let s = &args.inline;
            let (Some(p), Some(q), Some(n)) = (s.p, s.q, s.n) else {
                bail!("inline campaigns need --p, --q and --n");
            };
            let mut spec = ScenarioSpec::new(name.parse()?, p, q, n);
            spec.trials = s.trials;
            spec.epsilon = s.epsilon;
            spec.seed = s.seed;
            spec.solver.tol = s.tol;
            spec.solver.max_iter = s.max_iter;
            spec.validate()?;
            vec![spec]
        }
        (None, None) => bail!("pass --spec FILE or an inline campaign (--scenario, --p, --q, --n)"),
    };
    let format: TableFormat = args.format.parse()?;
    let execution = if args.sequential { Execution::Sequential } else { Execution::Parallel };
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let stats = run_campaign_with(&spec, execution)?;
        rows.push(CampaignRow { spec, stats });
    }
    emit(&tave_core::campaign::emit_table(&rows, format)?, args.out.as_deref())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let scenario: Scenario = args.scenario.parse()?;
    let spec = ScenarioSpec {
        epsilon: args.epsilon,
        seed: args.seed,
        trials: 1,
        ..ScenarioSpec::new(scenario, args.p, args.q, args.n)
    };
    let (problem, x_star) = generate_instance(&spec, args.trial)?;
    let dir = &args.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let files = [
        ("a.json", tensor_to_json(problem.a())),
        ("b_tensor.json", tensor_to_json(problem.b())),
        ("rhs.json", vector_to_json(problem.rhs())),
        ("x_star.json", vector_to_json(&x_star)),
    ];
    for (name, text) in &files {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let out = GenOutput {
        scenario,
        p: args.p,
        q: args.q,
        n: args.n,
        seed: args.seed,
        trial: args.trial,
        files: files.iter().map(|(name, _)| dir.join(name).display().to_string()).collect(),
        residual_at_x_star: problem.residual(&x_star)?.norm(),
    };
    emit(&to_json(&out)?, None)
}
