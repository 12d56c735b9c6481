//! The `normconst` command line.
//!
//! Results go to stdout (or `--out`), diagnostics to stderr. Exit codes:
//! 0 success, 1 invalid input (including a failed `--check`), 2 numerical
//! failure. JSON outputs carry `schema_version`; tabular outputs are CSV.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{self, HkOptions, QmcOptions, Regime, TailForm};
use crate::discrepancy::{self, DEFAULT_WORK_BUDGET};
use crate::error::{Error, Result};
use crate::experiments::{self, CurvatureSource, ExperimentConfig};
use crate::integrate::{self, mode_region_with_meta, TSpec, TruncationPolicy};
use crate::marginal::{self, GaussianLmm, LmmSpec, MarginalConfig, Method};
use crate::model::{CurvatureMeta, GaussianConjugate, PosteriorModel};
use crate::sequences::{self, PointSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "normconst",
    version,
    about = "Truncated MC/QMC normalizing constants, error bounds and marginal likelihoods"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Halton or seeded uniform point set as CSV (columns x1..xp).
    GenSeq(GenSeqArgs),
    /// Star discrepancy of a point set, or a Halton bound, as JSON.
    Discrepancy(DiscrepancyArgs),
    /// Truncated MC/QMC estimate of a model's normalizing constant, as JSON.
    Integrate(IntegrateArgs),
    /// Evaluate one error bound, as JSON.
    Bounds(BoundsArgs),
    /// Approximate MMLE for a simulated Gaussian random-intercept model, as JSON.
    Mmle(MmleArgs),
    /// Run the relative-error study and write CSV (p,n,m,mean_mc,q025_mc,q975_mc,mean_qmc).
    ReproduceTables(TablesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeqKind {
    Halton,
    Uniform,
}

#[derive(Debug, Args)]
pub struct GenSeqArgs {
    #[arg(long, value_enum)]
    pub kind: SeqKind,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub p: usize,
    /// First Halton index.
    #[arg(long, default_value_t = 0)]
    pub start_index: u64,
    /// Seed for the uniform grid.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiscMethod {
    /// Exact (closed form for p = 1, brute force otherwise).
    Exact,
    /// Explicit Halton bound; needs --m and --p.
    Atanassov,
    /// Asymptotic Halton envelope; needs --m and --p (p >= 2).
    Asymptotic,
}

#[derive(Debug, Args)]
pub struct DiscrepancyArgs {
    /// CSV point set (one row per point, optional header).
    #[arg(long, conflicts_with = "kind")]
    pub input: Option<PathBuf>,
    /// Generate the point set instead of reading it.
    #[arg(long, value_enum)]
    pub kind: Option<SeqKind>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub start_index: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: DiscMethod,
    /// Work budget for the brute-force search, in elementary operations.
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    pub budget: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliPolicy {
    #[value(alias = "fixed_p")]
    FixedP,
    #[value(alias = "high_dim")]
    HighDim,
}

impl From<CliPolicy> for TruncationPolicy {
    fn from(p: CliPolicy) -> Self {
        match p {
            CliPolicy::FixedP => TruncationPolicy::FixedP,
            CliPolicy::HighDim => TruncationPolicy::HighDim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliMethod {
    Mc,
    Qmc,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::Mc => Method::Mc,
            CliMethod::Qmc => Method::Qmc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliCurvature {
    Likelihood,
    Posterior,
}

/// Parses `theorem`, `sqrt-log`, `log` or a positive number (fixed `t`).
pub fn parse_t_spec(s: &str) -> std::result::Result<TSpec, String> {
    match s {
        "theorem" => Ok(TSpec::Theorem),
        "sqrt-log" | "sqrt_log" => Ok(TSpec::SqrtLog),
        "log" => Ok(TSpec::Log),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(TSpec::Fixed)
            .ok_or_else(|| format!("expected theorem, sqrt-log, log or a positive number, got {other:?}")),
    }
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// Model JSON: {"model": "gaussian", "n", "p", "sigma", "sigma_p", "seed"}
    /// or {"model": "gaussian", "data": [[..], ..], "sigma", "sigma_p"}.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "qmc")]
    pub method: CliMethod,
    #[arg(long)]
    pub m: usize,
    /// MC seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// MC replicates; more than one adds replicate statistics.
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, value_enum, default_value = "high-dim")]
    pub policy: CliPolicy,
    /// t(n): theorem, sqrt-log, log, or a fixed positive value.
    #[arg(long, default_value = "theorem", value_parser = parse_t_spec)]
    pub t_spec: TSpec,
    /// Curvature used for the radius.
    #[arg(long, value_enum, default_value = "posterior")]
    pub curvature: CliCurvature,
    /// First Halton index for QMC.
    #[arg(long, default_value_t = 1)]
    pub start_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundName {
    Truncation,
    McTail,
    McRate,
    QmcRate,
    HkVariation,
    Kh,
    Crossover,
    Lipschitz,
    L2Truncation,
    Bell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliRegime {
    #[value(alias = "fixed_p")]
    FixedP,
    #[value(alias = "high_dim")]
    HighDim,
    #[value(alias = "gaussian_special")]
    GaussianSpecial,
    Classical,
}

impl From<CliRegime> for Regime {
    fn from(r: CliRegime) -> Self {
        match r {
            CliRegime::FixedP => Regime::FixedP,
            CliRegime::HighDim => Regime::HighDim,
            CliRegime::GaussianSpecial => Regime::GaussianSpecial,
            CliRegime::Classical => Regime::Classical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliTailForm {
    Theorem,
    Concentration,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: BoundName,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum, default_value = "fixed-p")]
    pub regime: CliRegime,
    /// Absolute instead of relative error.
    #[arg(long)]
    pub absolute: bool,
    #[arg(long, default_value_t = 1.0)]
    pub eta1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta2: f64,
    /// Derivative bound D.
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    /// Tail-decay exponent of the truncation bound.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value = "theorem", value_parser = parse_t_spec)]
    pub t_spec: TSpec,
    /// Error threshold for mc-tail.
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long, value_enum, default_value = "theorem")]
    pub form: CliTailForm,
    /// Cube half-width for hk-variation and kh.
    #[arg(long)]
    pub gamma_prime: Option<f64>,
    /// Skip B_p on the full-partition term of hk-variation.
    #[arg(long)]
    pub no_bell_last: bool,
    /// Star discrepancy for kh; defaults to the exact value of the Halton set.
    #[arg(long)]
    pub discrepancy: Option<f64>,
    /// Base C of the C^p factor.
    #[arg(long, default_value_t = 1.0)]
    pub c_const: f64,
    /// Observation scale for the gaussian-special rate.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// epsilon of the L2 truncation bound.
    #[arg(long, default_value_t = 0.1)]
    pub l2_epsilon: f64,
    /// Index for bell.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MmleArgs {
    /// k=K,ni=N,sigma=S,tau=T,theta0=TH,seed=SEED (missing keys take defaults k=5,ni=6,sigma=1,tau=0.5,theta0=0,seed=0).
    #[arg(long, value_parser = parse_lmm)]
    pub lmm: LmmSpec,
    #[arg(long, value_enum, default_value = "qmc")]
    pub method: CliMethod,
    #[arg(long, default_value_t = 4096)]
    pub m: usize,
    /// Frozen MC seed for the objective.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed t for the per-group truncation; by default t = 4 ln m.
    #[arg(long)]
    pub group_t: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

/// Parses the comma-separated `key=value` LMM description.
pub fn parse_lmm(s: &str) -> std::result::Result<LmmSpec, String> {
    let mut spec = LmmSpec::default();
    for part in s.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let bad = |e: &dyn std::fmt::Display| format!("bad value for {k}: {e}");
        match k.trim() {
            "k" => spec.k = v.parse().map_err(|e| bad(&e))?,
            "ni" => spec.ni = v.parse().map_err(|e| bad(&e))?,
            "sigma" => spec.sigma = v.parse().map_err(|e| bad(&e))?,
            "tau" => spec.tau = v.parse().map_err(|e| bad(&e))?,
            "theta0" => spec.theta0 = v.parse().map_err(|e| bad(&e))?,
            "seed" => spec.seed = v.parse().map_err(|e| bad(&e))?,
            other => return Err(format!("unknown key {other:?}")),
        }
    }
    Ok(spec)
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// JSON config; keys override defaults, flags override the file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the trend checks and exit 1 if any fails.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_t_spec)]
    pub t_spec: Option<TSpec>,
    #[arg(long, value_enum)]
    pub curvature: Option<CliCurvature>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::invalid("--threads must be >= 1")),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| run(&cli.command, &mut o, &mut e));
                let _ = out.write_all(&o);
                let _ = err.write_all(&e);
                r
            }
            Err(e) => Err(Error::Numerical(format!("could not build thread pool: {e}"))),
        },
        None => run(&cli.command, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(out: &mut dyn Write, mut v: Value) -> Result<()> {
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    emit(out, None, &text)
}

fn run(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::GenSeq(a) => gen_seq(a, out),
        Command::Discrepancy(a) => discrepancy_cmd(a, out),
        Command::Integrate(a) => integrate_cmd(a, out),
        Command::Bounds(a) => bounds_cmd(a, out),
        Command::Mmle(a) => mmle_cmd(a, out),
        Command::ReproduceTables(a) => tables_cmd(a, out, err),
    }
}

fn generate(kind: SeqKind, m: usize, p: usize, start_index: u64, seed: u64) -> Result<PointSet> {
    match kind {
        SeqKind::Halton => sequences::halton(m, p, start_index),
        SeqKind::Uniform => sequences::uniform_grid(m, p, seed),
    }
}

/// Header `x1,..,xp` then one row per point, shortest round-trip floats.
pub fn point_set_csv(ps: &PointSet) -> String {
    let mut s = (1..=ps.p()).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for row in ps.rows() {
        s.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Reads a point set written by [`point_set_csv`] (header optional).
pub fn read_point_set_csv(text: &str) -> Result<PointSet> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::invalid(format!("line {}: {e}", i + 1))),
        }
    }
    PointSet::from_rows(&rows)
}

fn gen_seq(a: &GenSeqArgs, out: &mut dyn Write) -> Result<i32> {
    let ps = generate(a.kind, a.m, a.p, a.start_index, a.seed)?;
    emit(out, a.out.as_ref(), &point_set_csv(&ps))?;
    Ok(0)
}

fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("--{flag} is required here")))
}

fn discrepancy_cmd(a: &DiscrepancyArgs, out: &mut dyn Write) -> Result<i32> {
    let report = match a.method {
        DiscMethod::Exact => {
            let ps = match (&a.input, a.kind) {
                (Some(path), _) => read_point_set_csv(&fs::read_to_string(path)?)?,
                (None, Some(kind)) => generate(kind, require(a.m, "m")?, require(a.p, "p")?, a.start_index, a.seed)?,
                (None, None) => return Err(Error::invalid("exact discrepancy needs --input or --kind")),
            };
            if ps.p() == 1 {
                discrepancy::star_discrepancy_1d(&ps)?
            } else {
                discrepancy::star_discrepancy_exact_with_budget(&ps, a.budget)?
            }
        }
        DiscMethod::Atanassov => discrepancy::halton_bound_explicit(require(a.m, "m")?, require(a.p, "p")?)?,
        DiscMethod::Asymptotic => {
            let (m, p) = (require(a.m, "m")?, require(a.p, "p")?);
            let value = discrepancy::halton_bound_asymptotic(m, p)?;
            discrepancy::DiscrepancyReport {
                value,
                method: discrepancy::DiscrepancyMethod::AsymptoticBound,
                m,
                p,
                witness: None,
            }
        }
    };
    emit_json(out, serde_json::to_value(&report)?)?;
    Ok(0)
}

/// Model description accepted by `integrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "one")]
    pub sigma_p: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub data: Option<Vec<Vec<f64>>>,
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build(&self) -> Result<GaussianConjugate> {
        if self.model != "gaussian" {
            return Err(Error::invalid(format!("unknown model {:?}; only \"gaussian\" is built in", self.model)));
        }
        match &self.data {
            Some(rows) => GaussianConjugate::new(rows, self.sigma, self.sigma_p),
            None => GaussianConjugate::simulate(
                require(self.n, "n (model file)")?,
                require(self.p, "p (model file)")?,
                self.sigma,
                self.sigma_p,
                self.seed,
            ),
        }
    }
}

fn integrate_cmd(a: &IntegrateArgs, out: &mut dyn Write) -> Result<i32> {
    let spec: ModelSpec = serde_json::from_str(&fs::read_to_string(&a.model)?)?;
    let model = spec.build()?;
    let meta = match a.curvature {
        CliCurvature::Likelihood => model.likelihood_meta(),
        CliCurvature::Posterior => model.meta(),
    };
    let region = mode_region_with_meta(&model, &meta, a.policy.into(), a.t_spec)?;
    let p = model.dim();
    let ps = match a.method {
        CliMethod::Qmc => sequences::halton(a.m, p, a.start_index)?,
        CliMethod::Mc => sequences::uniform_grid(a.m, p, a.seed)?,
    };
    let report = integrate::estimate_normalizer(&model, &region, &ps)?;
    let mut v = serde_json::to_value(&report)?;
    v["oracle_log_normalizer"] = json!(model.oracle_log_normalizer());
    if a.method == CliMethod::Mc && a.replicates > 1 {
        let stats = integrate::run_mc_replicates(&model, &region, a.m, a.replicates, a.seed)?;
        v["replicates"] = serde_json::to_value(&stats)?;
    }
    emit_json(out, v)?;
    Ok(0)
}

fn bounds_cmd(a: &BoundsArgs, out: &mut dyn Write) -> Result<i32> {
    let meta = || CurvatureMeta::new(a.eta1, a.eta2, a.d, a.epsilon, 1.0);
    let relative = !a.absolute;
    let regime: Regime = a.regime.into();
    let policy = match regime {
        Regime::HighDim => TruncationPolicy::HighDim,
        _ => TruncationPolicy::FixedP,
    };
    let n = || require(a.n, "n");
    let m = || require(a.m, "m");
    let p = || require(a.p, "p");
    let v = match a.kind {
        BoundName::Truncation => {
            serde_json::to_value(bounds::truncation_error_bound(n()?, p()?, &meta()?, a.t_spec, relative)?)?
        }
        BoundName::McTail => {
            let form = match a.form {
                CliTailForm::Theorem => TailForm::Theorem,
                CliTailForm::Concentration => TailForm::Concentration,
            };
            serde_json::to_value(bounds::mc_tail_bound(
                require(a.zeta, "zeta")?,
                n()?,
                m()?,
                p()?,
                &meta()?,
                a.t_spec,
                regime,
                form,
                relative,
            )?)?
        }
        BoundName::McRate => {
            serde_json::to_value(bounds::mc_error_rate(n()?, m()?, p()?, &meta()?, regime, relative)?)?
        }
        BoundName::QmcRate => serde_json::to_value(bounds::qmc_error_rate(
            n()?,
            m()?,
            p()?,
            regime,
            relative,
            QmcOptions { c_const: a.c_const, sigma: a.sigma },
        )?)?,
        BoundName::HkVariation => serde_json::to_value(bounds::hk_variation_bound(
            n()?,
            p()?,
            &meta()?,
            require(a.gamma_prime, "gamma-prime")?,
            HkOptions { bell_on_last_term: !a.no_bell_last },
        )?)?,
        BoundName::Kh => {
            let (n, p) = (n()?, p()?);
            let hk = bounds::hk_variation_bound(
                n,
                p,
                &meta()?,
                require(a.gamma_prime, "gamma-prime")?,
                HkOptions { bell_on_last_term: !a.no_bell_last },
            )?;
            let d = match a.discrepancy {
                Some(value) => {
                    if !(value >= 0.0) {
                        return Err(Error::invalid("--discrepancy must be nonnegative"));
                    }
                    discrepancy::DiscrepancyReport {
                        value,
                        method: discrepancy::DiscrepancyMethod::ExactBruteForce,
                        m: a.m.unwrap_or(0),
                        p,
                        witness: None,
                    }
                }
                None => {
                    let ps = sequences::halton(m()?, p, 0)?;
                    if p == 1 {
                        discrepancy::star_discrepancy_1d(&ps)?
                    } else {
                        discrepancy::star_discrepancy_exact(&ps)?
                    }
                }
            };
            serde_json::to_value(bounds::kh_error_bound(&hk, &d)?)?
        }
        BoundName::Crossover => {
            let c = bounds::crossover(n()?, m()?, p()?, regime, a.c_const)?;
            serde_json::to_value(c)?
        }
        BoundName::Lipschitz => {
            serde_json::to_value(bounds::lipschitz_constant(n()?, p()?, &meta()?, a.t_spec, policy)?)?
        }
        BoundName::L2Truncation => serde_json::to_value(bounds::l2_truncation_bound(
            n()?,
            p()?,
            &meta()?,
            a.t_spec,
            policy,
            relative,
            a.l2_epsilon,
        )?)?,
        BoundName::Bell => {
            let k = require(a.k, "k")?;
            json!({ "kind": "bell", "k": k, "value": bounds::bell_number(k)? })
        }
    };
    emit_json(out, v)?;
    Ok(0)
}

fn mmle_cmd(a: &MmleArgs, out: &mut dyn Write) -> Result<i32> {
    let lmm = GaussianLmm::simulate(&a.lmm)?;
    if a.m < 16 {
        return Err(Error::invalid("--m must be >= 16"));
    }
    let search = marginal::default_search(&lmm, a.tol);
    let oracle = lmm.gls_theta();
    let base = MarginalConfig {
        method: a.method.into(),
        m: a.m,
        seed: a.seed,
        t_spec: a.group_t.map(TSpec::Fixed),
        ..Default::default()
    };
    let mut trace = Vec::new();
    for mm in [a.m / 16, a.m / 4, a.m] {
        let r = marginal::mmle(&lmm, &MarginalConfig { m: mm, ..base }, &search)?;
        trace.push(json!({ "m": mm, "theta_tilde": r.theta_tilde[0], "gap": (r.theta_tilde[0] - oracle).abs() }));
    }
    let r = marginal::mmle(&lmm, &base, &search)?;
    let at_opt = marginal::marginal_loglik(&lmm, &r.theta_tilde, &base)?;
    let v = json!({
        "theta_tilde": r.theta_tilde[0],
        "oracle_mmle": oracle,
        "gap": (r.theta_tilde[0] - oracle).abs(),
        "log_marginal_at_opt": r.log_marginal_at_opt,
        "oracle_log_marginal_at_opt": lmm.oracle_log_marginal(r.theta_tilde[0])?,
        "per_group_logs": at_opt.per_group_logs,
        "method": base.method,
        "m": a.m,
        "per_m_trace": trace,
    });
    emit_json(out, v)?;
    Ok(0)
}

/// Merges defaults, the optional config file and flags, in that order.
pub fn tables_config(a: &TablesArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if let Some(s) = a.seed {
        cfg.base_seed = s;
    }
    if let Some(v) = &a.p_list {
        cfg.p_list = v.clone();
    }
    if let Some(v) = &a.n_list {
        cfg.n_list = v.clone();
    }
    if let Some(v) = &a.m_list {
        cfg.m_list = v.clone();
    }
    if let Some(t) = a.t_spec {
        cfg.t_spec = t;
    }
    if let Some(c) = a.curvature {
        cfg.curvature = match c {
            CliCurvature::Likelihood => CurvatureSource::Likelihood,
            CliCurvature::Posterior => CurvatureSource::Posterior,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn tables_cmd(a: &TablesArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = tables_config(a)?;
    let rows = experiments::reproduce_tables(&cfg)?;
    for r in &rows {
        if let Some(d) = &r.diagnostic {
            let _ = writeln!(err, "cell p={} n={} m={}: {d}", r.p, r.n, r.m);
        }
    }
    emit(out, a.out.as_ref(), &experiments::to_csv(&rows))?;
    if a.check {
        let report = experiments::trend_checks(&rows);
        let _ = writeln!(err, "{}", serde_json::to_string_pretty(&report)?);
        if !report.all_passed {
            return Ok(1);
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("normconst").chain(args.iter().copied());
        let code = dispatch(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn van_der_corput_csv() {
        let (code, out, _) = call(&["gen-seq", "--kind", "halton", "--m", "4", "--p", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "x1\n0\n0.5\n0.25\n0.75\n");
    }

    #[test]
    fn classical_crossover() {
        let (code, out, _) =
            call(&["bounds", "--kind", "crossover", "--regime", "classical", "--n", "10", "--m", "55", "--p", "1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["qmc_wins"], json!(true));
        assert!((v["ratio"].as_f64().unwrap() - 55f64.ln() / 55f64.sqrt()).abs() < 1e-14);
        assert_eq!(v["schema_version"], json!(SCHEMA_VERSION));
    }

    #[test]
    fn missing_flag_is_validation_error() {
        let (code, out, err) = call(&["gen-seq", "--kind", "halton", "--m", "4"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.contains("--p"));
        assert!(err.contains("Usage"));
    }

    #[test]
    fn help_exits_zero() {
        for sub in ["gen-seq", "discrepancy", "integrate", "bounds", "mmle", "reproduce-tables"] {
            let (code, out, _) = call(&[sub, "--help"]);
            assert_eq!(code, 0, "{sub}");
            assert!(out.contains("Usage"));
        }
    }

    #[test]
    fn unknown_flag_rejected() {
        assert_eq!(call(&["gen-seq", "--kind", "halton", "--m", "4", "--p", "1", "--bogus"]).0, 1);
    }

    #[test]
    fn budget_refusal_is_validation_error() {
        let (code, _, err) = call(&["discrepancy", "--kind", "halton", "--m", "100", "--p", "3", "--budget", "1000"]);
        assert_eq!(code, 1);
        assert!(err.contains("budget"));
    }

    #[test]
    fn lmm_parser() {
        let s = parse_lmm("k=3,ni=4,sigma=2,tau=0.1,theta0=-1,seed=9").unwrap();
        assert_eq!(s, LmmSpec { k: 3, ni: 4, sigma: 2.0, tau: 0.1, theta0: -1.0, seed: 9 });
        assert_eq!(parse_lmm("k=2").unwrap().ni, 6);
        assert!(parse_lmm("q=2").is_err());
        assert!(parse_lmm("k").is_err());
    }

    #[test]
    fn t_spec_parser() {
        assert_eq!(parse_t_spec("log").unwrap(), TSpec::Log);
        assert_eq!(parse_t_spec("2.5").unwrap(), TSpec::Fixed(2.5));
        assert!(parse_t_spec("-1").is_err());
    }

    #[test]
    fn point_set_csv_round_trip() {
        let ps = sequences::halton(20, 3, 0).unwrap();
        let back = read_point_set_csv(&point_set_csv(&ps)).unwrap();
        assert_eq!(back.as_slice(), ps.as_slice());
    }
}
