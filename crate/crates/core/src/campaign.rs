//! Randomized benchmark campaigns on planted-solution instances.
//!
//! Trial `k` of a campaign draws everything from the stream
//! `rng::stream(seed, k)` in a fixed order: the tensor behind `A`, the
//! tensor behind `B`, then `x*`. Uniform draws are half-open `[low, high)`.
//!
//! Means over iterations, time and final residual are taken over successful
//! trials only. `k_min`, `k_max`, `t_min`, `t_max` are over successes too.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::rng;
use crate::solver::{solve, SolveStatus, SolverConfig, TaveProblem};
use crate::tensor::DenseTensor;
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Both tensors are M-tensors.
    MM,
    /// `A` is an M-tensor, `B` general.
    MG,
    /// `A` general, `B` an M-tensor.
    GM,
    GG,
}

/// How a tensor is built in a scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Construction {
    /// `zeta I - C` with `C` uniform in `[low, high)`.
    MTensor { low: f64, high: f64 },
    Uniform { low: f64, high: f64 },
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::MM, Scenario::MG, Scenario::GM, Scenario::GG];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::MM => "MM",
            Scenario::MG => "MG",
            Scenario::GM => "GM",
            Scenario::GG => "GG",
        }
    }

    /// Constructions for `(A, B)`.
    pub fn constructions(self) -> (Construction, Construction) {
        use Construction::*;
        match self {
            Scenario::MM => (MTensor { low: 0.0, high: 1.0 }, MTensor { low: -1.0, high: 1.0 }),
            Scenario::MG => (MTensor { low: 0.0, high: 2.0 }, Uniform { low: -1.0, high: 0.0 }),
            Scenario::GM => (Uniform { low: -1.0, high: 0.0 }, MTensor { low: -0.5, high: 0.5 }),
            Scenario::GG => (Uniform { low: 0.0, high: 1.0 }, Uniform { low: -4.0, high: 1.0 }),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mm" | "i" => Ok(Scenario::MM),
            "mg" | "ii" => Ok(Scenario::MG),
            "gm" | "iii" => Ok(Scenario::GM),
            "gg" | "iv" => Ok(Scenario::GG),
            _ => Err(Error::Unknown {
                kind: "scenario",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetrization {
    /// Average over the trailing indices only.
    #[default]
    Semi,
    /// Average over all indices.
    Full,
}

fn default_trials() -> usize {
    100
}

fn default_epsilon() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub symmetrization: Symmetrization,
    #[serde(flatten)]
    pub solver: SolverConfig,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario, p: usize, q: usize, n: usize) -> Self {
        ScenarioSpec {
            scenario,
            p,
            q,
            n,
            trials: default_trials(),
            epsilon: default_epsilon(),
            seed: 0,
            symmetrization: Symmetrization::Semi,
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.q < 2 {
            return Err(Error::InvalidConfig(format!(
                "scenario orders must be at least 2, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        if self.n < 1 {
            return Err(Error::InvalidConfig("scenario dimension n must be at least 1".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidConfig(format!("epsilon must be finite and nonnegative, got {}", self.epsilon)));
        }
        self.solver.validate()
    }

    pub fn label(&self) -> String {
        format!("({},{},{})", self.p, self.q, self.n)
    }
}

/// Parses a campaign file holding one spec object or an array of them.
pub fn parse_campaign_file(text: &str) -> Result<Vec<ScenarioSpec>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("campaign file: {e}")))?;
    let specs = match value {
        serde_json::Value::Array(_) => serde_json::from_value::<Vec<ScenarioSpec>>(value),
        _ => serde_json::from_value::<ScenarioSpec>(value).map(|s| vec![s]),
    }
    .map_err(|e| Error::Parse(format!("campaign file: {e}")))?;
    if specs.is_empty() {
        return Err(Error::Parse("campaign file: no scenarios listed".into()));
    }
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

/// `zeta I - C` for `C` uniform in `[low, high)`, where
/// `zeta = (1 + epsilon) * max_i sum_{i2..im} c_{i i2 .. im}`.
pub fn make_m_tensor(m: usize, n: usize, low: f64, high: f64, epsilon: f64, rng: &mut impl Rng) -> Result<DenseTensor> {
    m_tensor_from(&uniform_tensor(m, n, low, high, rng)?, epsilon)
}

/// `zeta I - C` for a given `C`.
pub fn m_tensor_from(c: &DenseTensor, epsilon: f64) -> Result<DenseTensor> {
    let (m, n) = (c.order(), c.dim());
    let zeta = (1.0 + epsilon)
        * (0..n)
            .map(|i| c.row(i).iter().sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
    DenseTensor::unit(m, n)?.scaled(zeta).sub(c)
}

pub fn uniform_tensor(m: usize, n: usize, low: f64, high: f64, rng: &mut impl Rng) -> Result<DenseTensor> {
    if !(low < high) {
        return Err(Error::InvalidConfig(format!("entry range needs low < high, got [{low}, {high})")));
    }
    let len = crate::tensor::checked_len(m, n, crate::tensor::DEFAULT_ELEMENT_CAP)?;
    let dist = Uniform::new(low, high);
    DenseTensor::new(m, n, (0..len).map(|_| dist.sample(rng)).collect())
}

fn build(c: Construction, m: usize, n: usize, epsilon: f64, rng: &mut impl Rng) -> Result<DenseTensor> {
    match c {
        Construction::MTensor { low, high } => make_m_tensor(m, n, low, high, epsilon, rng),
        Construction::Uniform { low, high } => uniform_tensor(m, n, low, high, rng),
    }
}

/// Raw (unsymmetrized) tensors of trial `trial`, in draw order.
pub fn draw_raw_tensors(spec: &ScenarioSpec, trial: u64) -> Result<(DenseTensor, DenseTensor, rng::StreamRng)> {
    let mut r = rng::stream(spec.seed, trial);
    let (ca, cb) = spec.scenario.constructions();
    let a = build(ca, spec.p, spec.n, spec.epsilon, &mut r)?;
    let b = build(cb, spec.q, spec.n, spec.epsilon, &mut r)?;
    Ok((a, b, r))
}

/// Instance of trial `trial` and its planted solution `x*`, with
/// `b = A x*^{p-1} + B|x*|^{q-1}`.
pub fn generate_instance(spec: &ScenarioSpec, trial: u64) -> Result<(TaveProblem, Vector)> {
    spec.validate()?;
    let (a, b, mut r) = draw_raw_tensors(spec, trial)?;
    let (a, b) = match spec.symmetrization {
        Symmetrization::Semi => (a.semi_symmetrize()?, b.semi_symmetrize()?),
        Symmetrization::Full => (a.symmetrize(), b.symmetrize()),
    };
    let dist = Uniform::new(-1.0, 1.0);
    let x_star = Vector::from_vec_unchecked((0..spec.n).map(|_| dist.sample(&mut r)).collect());
    let ax = a.contract_to_vector(&x_star)?;
    let bx = b.contract_to_vector(&x_star.abs())?;
    let rhs = ax.add(&bx)?;
    Ok((TaveProblem::new_unsymmetrized(a, b, rhs)?, x_star))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkStats {
    pub trials: usize,
    pub successes: usize,
    pub mean_iter: Option<f64>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub mean_time: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub mean_err: Option<f64>,
    pub success_rate: f64,
    pub failures_by_cause: BTreeMap<SolveStatus, usize>,
}

impl BenchmarkStats {
    /// Aggregates outcomes after sorting them by trial index, so the
    /// floating-point sums do not depend on completion order.
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> BenchmarkStats {
        let mut sorted: Vec<&TrialOutcome> = outcomes.iter().collect();
        sorted.sort_by_key(|o| o.trial);
        let ok: Vec<&TrialOutcome> = sorted.iter().copied().filter(|o| o.status == SolveStatus::Converged).collect();
        let mut failures_by_cause = BTreeMap::new();
        for o in sorted.iter().filter(|o| o.status != SolveStatus::Converged) {
            *failures_by_cause.entry(o.status).or_insert(0) += 1;
        }
        let mean = |f: &dyn Fn(&TrialOutcome) -> f64| {
            (!ok.is_empty()).then(|| ok.iter().map(|o| f(o)).sum::<f64>() / ok.len() as f64)
        };
        let min_f = |f: &dyn Fn(&TrialOutcome) -> f64| ok.iter().map(|o| f(o)).reduce(f64::min);
        let max_f = |f: &dyn Fn(&TrialOutcome) -> f64| ok.iter().map(|o| f(o)).reduce(f64::max);
        BenchmarkStats {
            trials: sorted.len(),
            successes: ok.len(),
            mean_iter: mean(&|o| o.iterations as f64),
            k_min: ok.iter().map(|o| o.iterations).min(),
            k_max: ok.iter().map(|o| o.iterations).max(),
            mean_time: mean(&|o| o.seconds),
            t_min: min_f(&|o| o.seconds),
            t_max: max_f(&|o| o.seconds),
            mean_err: mean(&|o| o.final_residual),
            success_rate: if sorted.is_empty() { 0.0 } else { ok.len() as f64 / sorted.len() as f64 },
            failures_by_cause,
        }
    }
}

pub fn run_trial(spec: &ScenarioSpec, trial: usize) -> Result<TrialOutcome> {
    let (problem, _) = generate_instance(spec, trial as u64)?;
    let start = Instant::now();
    let report = solve(&problem, &spec.solver)?;
    Ok(TrialOutcome {
        trial,
        status: report.status,
        iterations: report.iterations,
        final_residual: report.final_residual(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_trials(spec: &ScenarioSpec, execution: Execution) -> Result<Vec<TrialOutcome>> {
    spec.validate()?;
    map_indexed(spec.trials, execution, |k| run_trial(spec, k)).into_iter().collect()
}

pub fn run_campaign(spec: &ScenarioSpec) -> Result<BenchmarkStats> {
    run_campaign_with(spec, Execution::default())
}

pub fn run_campaign_with(spec: &ScenarioSpec, execution: Execution) -> Result<BenchmarkStats> {
    Ok(BenchmarkStats::from_outcomes(&run_trials(spec, execution)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub spec: ScenarioSpec,
    pub stats: BenchmarkStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Tsv,
    Json,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(TableFormat::Tsv),
            "json" => Ok(TableFormat::Json),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            _ => Err(Error::Unknown {
                kind: "table format",
                name: s.to_string(),
            }),
        }
    }
}

pub const TSV_HEADER: [&str; 15] = [
    "scenario",
    "p",
    "q",
    "n",
    "trials",
    "successes",
    "mean_iter",
    "k_min",
    "k_max",
    "mean_time",
    "t_min",
    "t_max",
    "mean_err",
    "success_rate",
    "failures",
];

fn fixed2(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

fn sci2(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.1e}"))
}

fn secs(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

fn int(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn failures(map: &BTreeMap<SolveStatus, usize>) -> String {
    if map.is_empty() {
        return "-".into();
    }
    map.iter().map(|(k, v)| format!("{}={v}", k.as_str())).collect::<Vec<_>>().join(",")
}

/// Renders campaign results.
///
/// * `tsv`: [`TSV_HEADER`] then one row per configuration.
/// * `json`: an array of [`CampaignRow`].
/// * `markdown`: one table per scenario with the columns
///   `(p,q,n) | Iter. (k_min / k_max) | Time (t_min / t_max) | Err | SR`.
///
/// Iterations and SR use 2 decimals, Err 2 significant digits in
/// scientific notation, times 4 decimals. Means are over successful trials;
/// `-` marks a configuration without any.
pub fn emit_table(rows: &[CampaignRow], format: TableFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("cannot render an empty result grid".into()));
    }
    let mut out = String::new();
    match format {
        TableFormat::Json => {
            out = serde_json::to_string_pretty(rows).map_err(|e| Error::Parse(e.to_string()))?;
            out.push('\n');
        }
        TableFormat::Tsv => {
            out.push_str(&TSV_HEADER.join("\t"));
            out.push('\n');
            for r in rows {
                let s = &r.stats;
                let fields = [
                    r.spec.scenario.to_string(),
                    r.spec.p.to_string(),
                    r.spec.q.to_string(),
                    r.spec.n.to_string(),
                    s.trials.to_string(),
                    s.successes.to_string(),
                    fixed2(s.mean_iter),
                    int(s.k_min),
                    int(s.k_max),
                    secs(s.mean_time),
                    secs(s.t_min),
                    secs(s.t_max),
                    sci2(s.mean_err),
                    format!("{:.2}", s.success_rate),
                    failures(&s.failures_by_cause),
                ];
                out.push_str(&fields.join("\t"));
                out.push('\n');
            }
        }
        TableFormat::Markdown => {
            let mut scenarios: Vec<Scenario> = Vec::new();
            for r in rows {
                if !scenarios.contains(&r.spec.scenario) {
                    scenarios.push(r.spec.scenario);
                }
            }
            for (bi, sc) in scenarios.iter().enumerate() {
                if bi > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "### Scenario {sc}\n");
                out.push_str("| (p,q,n) | Iter. (k_min / k_max) | Time (t_min / t_max) | Err | SR |\n");
                out.push_str("|---|---|---|---|---|\n");
                for r in rows.iter().filter(|r| r.spec.scenario == *sc) {
                    let s = &r.stats;
                    let _ = writeln!(
                        out,
                        "| {} | {} ({} / {}) | {} ({} / {}) | {} | {:.2} |",
                        r.spec.label(),
                        fixed2(s.mean_iter),
                        int(s.k_min),
                        int(s.k_max),
                        secs(s.mean_time),
                        secs(s.t_min),
                        secs(s.t_max),
                        sci2(s.mean_err),
                        s.success_rate
                    );
                }
            }
            out.push_str("\nMeans are over successful trials.\n");
        }
    }
    Ok(out)
}
