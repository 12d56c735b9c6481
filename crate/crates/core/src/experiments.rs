//! Simulation harness for the conjugate Gaussian study: relative errors of
//! truncated MC and QMC estimates over a `(p, n, m)` grid, CSV output, and
//! trend diagnostics.
//!
//! Each cell `(p, n, m)` derives its seed from `base_seed`; replicate `r`
//! draws its data from `derive_seed(cell, [r, 0])` and its MC grid from
//! `derive_seed(cell, [r, 1])`. All streams are ChaCha8, so outputs are
//! reproducible across platforms and thread counts.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{log_truncated_estimate, mode_region_with_meta, relative_error, TSpec, TruncationPolicy};
use crate::model::{GaussianConjugate, PosteriorModel};
use crate::numerics::{derive_seed, mean, quantile_sorted};
use crate::sequences::{halton, uniform_grid, PointSet};

/// Which curvature scale sets the truncation radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureSource {
    /// `η = 1/σ²`, the likelihood curvature per observation.
    #[default]
    Likelihood,
    /// `η = (n/σ² + 1/σ_p²)/n`, the full posterior curvature.
    Posterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p_list: Vec<usize>,
    pub n_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub replicates: usize,
    pub base_seed: u64,
    pub sigma: f64,
    pub sigma_p: f64,
    pub t_spec: TSpec,
    pub policy: TruncationPolicy,
    pub curvature: CurvatureSource,
    /// First Halton index; 1 skips the origin.
    pub start_index: u64,
    /// Cells not started within this many seconds are reported as NaN rows.
    pub budget_secs: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p_list: vec![1, 2, 4, 8],
            n_list: vec![8, 16, 32, 64],
            m_list: vec![400, 800, 1600, 3200],
            replicates: 1000,
            base_seed: 20_240_917,
            sigma: 1.0,
            sigma_p: 1.0,
            t_spec: TSpec::Log,
            policy: TruncationPolicy::HighDim,
            curvature: CurvatureSource::Likelihood,
            start_index: 1,
            budget_secs: Some(900.0),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("p_list", &self.p_list), ("n_list", &self.n_list), ("m_list", &self.m_list)] {
            if list.is_empty() {
                return Err(Error::invalid(format!("{name} must be nonempty")));
            }
            if list.contains(&0) {
                return Err(Error::invalid(format!("{name} entries must be positive")));
            }
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(Error::invalid("n_list entries must be >= 2"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be >= 1"));
        }
        if !(self.sigma > 0.0 && self.sigma_p > 0.0) {
            return Err(Error::invalid("sigma and sigma_p must be positive"));
        }
        if self.policy == TruncationPolicy::Custom {
            return Err(Error::invalid("experiments need the fixed_p or high_dim policy"));
        }
        Ok(())
    }

    pub fn cell_seed(&self, p: usize, n: usize, m: usize) -> u64 {
        derive_seed(self.base_seed, &[p as u64, n as u64, m as u64])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub p: usize,
    pub n: usize,
    pub m: usize,
    pub mean_mc: f64,
    pub q025_mc: f64,
    pub q975_mc: f64,
    pub mean_qmc: f64,
    #[serde(skip)]
    pub diagnostic: Option<String>,
}

impl TableRow {
    fn failed(p: usize, n: usize, m: usize, why: String) -> Self {
        TableRow {
            p,
            n,
            m,
            mean_mc: f64::NAN,
            q025_mc: f64::NAN,
            q975_mc: f64::NAN,
            mean_qmc: f64::NAN,
            diagnostic: Some(why),
        }
    }

    pub fn mc_width(&self) -> f64 {
        self.q975_mc - self.q025_mc
    }

    pub fn is_finite(&self) -> bool {
        [self.mean_mc, self.q025_mc, self.q975_mc, self.mean_qmc].iter().all(|v| v.is_finite())
    }
}

/// One replicate: MC and QMC relative errors on freshly simulated data.
fn replicate(
    cfg: &ExperimentConfig,
    p: usize,
    n: usize,
    m: usize,
    cell: u64,
    r: usize,
    qmc: &PointSet,
) -> Result<(f64, f64)> {
    let model = GaussianConjugate::simulate(n, p, cfg.sigma, cfg.sigma_p, derive_seed(cell, &[r as u64, 0]))?;
    let meta = match cfg.curvature {
        CurvatureSource::Likelihood => model.likelihood_meta(),
        CurvatureSource::Posterior => model.meta(),
    };
    let region = mode_region_with_meta(&model, &meta, cfg.policy, cfg.t_spec)?;
    let oracle = model.oracle_log_normalizer().expect("gaussian model has an oracle");
    let mc = uniform_grid(m, p, derive_seed(cell, &[r as u64, 1]))?;
    let mc_err = relative_error(log_truncated_estimate(&model, &region, &mc)?, oracle);
    let qmc_err = relative_error(log_truncated_estimate(&model, &region, qmc)?, oracle);
    Ok((mc_err, qmc_err))
}

/// Runs one `(p, n, m)` cell. Identical to the corresponding row of
/// [`reproduce_tables`] under the same config.
pub fn run_cell(cfg: &ExperimentConfig, p: usize, n: usize, m: usize) -> Result<TableRow> {
    cfg.validate()?;
    let cell = cfg.cell_seed(p, n, m);
    let qmc = halton(m, p, cfg.start_index)?;
    let errs = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| replicate(cfg, p, n, m, cell, r, &qmc))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (mc, qmc): (Vec<f64>, Vec<f64>) = errs.into_iter().unzip();
    if mc.iter().chain(&qmc).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite relative error in cell p={p} n={n} m={m}")));
    }
    let mut sorted = mc.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(TableRow {
        p,
        n,
        m,
        mean_mc: mean(&mc),
        q025_mc: quantile_sorted(&sorted, 0.025),
        q975_mc: quantile_sorted(&sorted, 0.975),
        mean_qmc: mean(&qmc),
        diagnostic: None,
    })
}

/// All cells, ordered by `p`, then `n`, then `m` (fastest). A failing cell
/// yields a NaN row with a diagnostic and the run continues.
pub fn reproduce_tables(cfg: &ExperimentConfig) -> Result<Vec<TableRow>> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rows = Vec::with_capacity(cfg.p_list.len() * cfg.n_list.len() * cfg.m_list.len());
    for &p in &cfg.p_list {
        for &n in &cfg.n_list {
            for &m in &cfg.m_list {
                if let Some(budget) = cfg.budget_secs {
                    if start.elapsed().as_secs_f64() > budget {
                        rows.push(TableRow::failed(p, n, m, format!("wall-clock budget of {budget} s exceeded")));
                        continue;
                    }
                }
                rows.push(run_cell(cfg, p, n, m).unwrap_or_else(|e| TableRow::failed(p, n, m, e.to_string())));
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "p,n,m,mean_mc,q025_mc,q975_mc,mean_qmc";

fn fmt6(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.6}")
    }
}

/// CSV with values pinned to six decimals.
pub fn to_csv(rows: &[TableRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.p,
            r.n,
            r.m,
            fmt6(r.mean_mc),
            fmt6(r.q025_mc),
            fmt6(r.q975_mc),
            fmt6(r.mean_qmc)
        );
    }
    s
}

pub fn from_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::invalid(format!("unexpected CSV header: {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub name: String,
    pub passed: bool,
    /// Violations, empty when passed.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub checks: Vec<TrendCheck>,
    pub all_passed: bool,
}

impl TrendReport {
    pub fn check(&self, name: &str) -> Option<&TrendCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn find(rows: &[TableRow], p: usize, n: usize, m: usize) -> Option<&TableRow> {
    rows.iter().find(|r| r.p == p && r.n == n && r.m == m)
}

fn sorted_unique(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Walks consecutive pairs along one axis and records pairs violating `ok`.
fn along<F, K>(rows: &[TableRow], groups: &[(usize, usize)], axis: &[usize], key: K, ok: F, label: &str) -> Vec<String>
where
    F: Fn(&TableRow, &TableRow) -> bool,
    K: Fn(usize, usize, usize) -> (usize, usize, usize),
{
    let mut bad = Vec::new();
    for &(a, b) in groups {
        let series: Vec<&TableRow> = axis
            .iter()
            .filter_map(|&x| {
                let (p, n, m) = key(a, b, x);
                find(rows, p, n, m)
            })
            .filter(|r| r.is_finite())
            .collect();
        for w in series.windows(2) {
            if !ok(w[0], w[1]) {
                bad.push(format!("{label}: ({},{},{}) -> ({},{},{})", w[0].p, w[0].n, w[0].m, w[1].p, w[1].n, w[1].m));
            }
        }
    }
    bad
}

/// Trend diagnostics:
///
/// - `a`: for `p ∈ {1, 2}`, `|mean_qmc|` is nonincreasing in `n` at fixed `m`;
/// - `b`: the MC interval width decreases in `m` at fixed `(p, n)` for `p ≤ 4`;
/// - `c`: `mean_qmc < 0` for `p ≤ 2`;
/// - `d`: the MC interval width increases in `p` at fixed `(n, m)`.
///
/// Checks with no applicable rows pass.
pub fn trend_checks(rows: &[TableRow]) -> TrendReport {
    let ps = sorted_unique(rows.iter().map(|r| r.p));
    let ns = sorted_unique(rows.iter().map(|r| r.n));
    let ms = sorted_unique(rows.iter().map(|r| r.m));
    let pairs = |xs: &[usize], ys: &[usize]| -> Vec<(usize, usize)> {
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
    };

    let low_p: Vec<usize> = ps.iter().copied().filter(|&p| p <= 2).collect();
    let a = along(
        rows,
        &pairs(&low_p, &ms),
        &ns,
        |p, m, n| (p, n, m),
        |x, y| y.mean_qmc.abs() <= x.mean_qmc.abs(),
        "|mean_qmc| increased with n",
    );

    let mid_p: Vec<usize> = ps.iter().copied().filter(|&p| p <= 4).collect();
    let b = along(
        rows,
        &pairs(&mid_p, &ns),
        &ms,
        |p, n, m| (p, n, m),
        |x, y| y.mc_width() < x.mc_width(),
        "MC width did not shrink with m",
    );

    let c: Vec<String> = rows
        .iter()
        .filter(|r| r.p <= 2 && r.is_finite() && !(r.mean_qmc < 0.0))
        .map(|r| format!("mean_qmc >= 0 at ({},{},{})", r.p, r.n, r.m))
        .collect();

    let d = along(
        rows,
        &pairs(&ns, &ms),
        &ps,
        |n, m, p| (p, n, m),
        |x, y| y.mc_width() > x.mc_width(),
        "MC width did not grow with p",
    );

    let checks: Vec<TrendCheck> = [("a", a), ("b", b), ("c", c), ("d", d)]
        .into_iter()
        .map(|(name, violations)| TrendCheck { name: name.to_string(), passed: violations.is_empty(), violations })
        .collect();
    let all_passed = checks.iter().all(|c| c.passed);
    TrendReport { checks, all_passed }
}

/// A published row of the relative-error study on the default grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub p: usize,
    pub n: usize,
    pub m: usize,
    pub mean_mc: f64,
    pub q025_mc: f64,
    pub q975_mc: f64,
    pub mean_qmc: f64,
}

impl From<&ReferenceRow> for TableRow {
    fn from(r: &ReferenceRow) -> Self {
        TableRow {
            p: r.p,
            n: r.n,
            m: r.m,
            mean_mc: r.mean_mc,
            q025_mc: r.q025_mc,
            q975_mc: r.q975_mc,
            mean_qmc: r.mean_qmc,
            diagnostic: None,
        }
    }
}

pub fn reference_rows(p: usize) -> Vec<TableRow> {
    REFERENCE_ROWS.iter().filter(|r| r.p == p).map(TableRow::from).collect()
}

pub fn reference_row(p: usize, n: usize, m: usize) -> Option<&'static ReferenceRow> {
    REFERENCE_ROWS.iter().find(|r| r.p == p && r.n == n && r.m == m)
}

/// Published relative errors (1000 replicates) on the default grid.
#[rustfmt::skip]
pub const REFERENCE_ROWS: &[ReferenceRow] = &[
    ReferenceRow { p: 1, n: 8, m: 400, mean_mc: -0.125982, q025_mc: -0.153374, q975_mc: -0.099533, mean_qmc: -0.125993 },
    ReferenceRow { p: 1, n: 8, m: 800, mean_mc: -0.126218, q025_mc: -0.145385, q975_mc: -0.107493, mean_qmc: -0.126104 },
    ReferenceRow { p: 1, n: 8, m: 1600, mean_mc: -0.126335, q025_mc: -0.139115, q975_mc: -0.112837, mean_qmc: -0.126132 },
    ReferenceRow { p: 1, n: 8, m: 3200, mean_mc: -0.126235, q025_mc: -0.136057, q975_mc: -0.117153, mean_qmc: -0.126138 },
    ReferenceRow { p: 1, n: 16, m: 400, mean_mc: -0.086792, q025_mc: -0.121971, q975_mc: -0.053978, mean_qmc: -0.085939 },
    ReferenceRow { p: 1, n: 16, m: 800, mean_mc: -0.085430, q025_mc: -0.111019, q975_mc: -0.061461, mean_qmc: -0.086059 },
    ReferenceRow { p: 1, n: 16, m: 1600, mean_mc: -0.086590, q025_mc: -0.103454, q975_mc: -0.068063, mean_qmc: -0.086088 },
    ReferenceRow { p: 1, n: 16, m: 3200, mean_mc: -0.086273, q025_mc: -0.098045, q975_mc: -0.074845, mean_qmc: -0.086095 },
    ReferenceRow { p: 1, n: 32, m: 400, mean_mc: -0.058232, q025_mc: -0.097963, q975_mc: -0.018753, mean_qmc: -0.058531 },
    ReferenceRow { p: 1, n: 32, m: 800, mean_mc: -0.058703, q025_mc: -0.084621, q975_mc: -0.029519, mean_qmc: -0.058652 },
    ReferenceRow { p: 1, n: 32, m: 1600, mean_mc: -0.058622, q025_mc: -0.077740, q975_mc: -0.037699, mean_qmc: -0.058680 },
    ReferenceRow { p: 1, n: 32, m: 3200, mean_mc: -0.058873, q025_mc: -0.073355, q975_mc: -0.044722, mean_qmc: -0.058687 },
    ReferenceRow { p: 1, n: 64, m: 400, mean_mc: -0.040983, q025_mc: -0.086923, q975_mc: 0.006367, mean_qmc: -0.039708 },
    ReferenceRow { p: 1, n: 64, m: 800, mean_mc: -0.039621, q025_mc: -0.072574, q975_mc: -0.005467, mean_qmc: -0.039824 },
    ReferenceRow { p: 1, n: 64, m: 1600, mean_mc: -0.039285, q025_mc: -0.064280, q975_mc: -0.015697, mean_qmc: -0.039851 },
    ReferenceRow { p: 1, n: 64, m: 3200, mean_mc: -0.039527, q025_mc: -0.056466, q975_mc: -0.022456, mean_qmc: -0.039857 },
    ReferenceRow { p: 2, n: 8, m: 400, mean_mc: -0.059646, q025_mc: -0.129644, q975_mc: 0.017436, mean_qmc: -0.056819 },
    ReferenceRow { p: 2, n: 8, m: 800, mean_mc: -0.059564, q025_mc: -0.113554, q975_mc: -0.009089, mean_qmc: -0.057973 },
    ReferenceRow { p: 2, n: 8, m: 1600, mean_mc: -0.059759, q025_mc: -0.097967, q975_mc: -0.020003, mean_qmc: -0.059975 },
    ReferenceRow { p: 2, n: 8, m: 3200, mean_mc: -0.060711, q025_mc: -0.086297, q975_mc: -0.033685, mean_qmc: -0.060136 },
    ReferenceRow { p: 2, n: 16, m: 400, mean_mc: -0.031025, q025_mc: -0.126524, q975_mc: 0.058450, mean_qmc: -0.025944 },
    ReferenceRow { p: 2, n: 16, m: 800, mean_mc: -0.030583, q025_mc: -0.095416, q975_mc: 0.036938, mean_qmc: -0.027276 },
    ReferenceRow { p: 2, n: 16, m: 1600, mean_mc: -0.030507, q025_mc: -0.077855, q975_mc: 0.017280, mean_qmc: -0.030106 },
    ReferenceRow { p: 2, n: 16, m: 3200, mean_mc: -0.030091, q025_mc: -0.063221, q975_mc: 0.003664, mean_qmc: -0.030202 },
    ReferenceRow { p: 2, n: 32, m: 400, mean_mc: -0.016414, q025_mc: -0.130159, q975_mc: 0.101234, mean_qmc: -0.009653 },
    ReferenceRow { p: 2, n: 32, m: 800, mean_mc: -0.014486, q025_mc: -0.091230, q975_mc: 0.064283, mean_qmc: -0.011323 },
    ReferenceRow { p: 2, n: 32, m: 1600, mean_mc: -0.014516, q025_mc: -0.067956, q975_mc: 0.043124, mean_qmc: -0.014956 },
    ReferenceRow { p: 2, n: 32, m: 3200, mean_mc: -0.014922, q025_mc: -0.053751, q975_mc: 0.024186, mean_qmc: -0.014958 },
    ReferenceRow { p: 2, n: 64, m: 400, mean_mc: -0.008859, q025_mc: -0.129531, q975_mc: 0.118252, mean_qmc: -0.000824 },
    ReferenceRow { p: 2, n: 64, m: 800, mean_mc: -0.008666, q025_mc: -0.095414, q975_mc: 0.085371, mean_qmc: -0.003026 },
    ReferenceRow { p: 2, n: 64, m: 1600, mean_mc: -0.007485, q025_mc: -0.071800, q975_mc: 0.055850, mean_qmc: -0.007394 },
    ReferenceRow { p: 2, n: 64, m: 3200, mean_mc: -0.007334, q025_mc: -0.053565, q975_mc: 0.039549, mean_qmc: -0.007274 },
    ReferenceRow { p: 4, n: 8, m: 400, mean_mc: -0.008929, q025_mc: -0.266980, q975_mc: 0.278155, mean_qmc: 0.045932 },
    ReferenceRow { p: 4, n: 8, m: 800, mean_mc: -0.006475, q025_mc: -0.189544, q975_mc: 0.180882, mean_qmc: 0.008732 },
    ReferenceRow { p: 4, n: 8, m: 1600, mean_mc: -0.010506, q025_mc: -0.142256, q975_mc: 0.134897, mean_qmc: -0.012457 },
    ReferenceRow { p: 4, n: 8, m: 3200, mean_mc: -0.006877, q025_mc: -0.099015, q975_mc: 0.093834, mean_qmc: -0.015314 },
    ReferenceRow { p: 4, n: 16, m: 400, mean_mc: -0.002282, q025_mc: -0.325366, q975_mc: 0.396144, mean_qmc: 0.086599 },
    ReferenceRow { p: 4, n: 16, m: 800, mean_mc: 0.000427, q025_mc: -0.229492, q975_mc: 0.266101, mean_qmc: 0.027705 },
    ReferenceRow { p: 4, n: 16, m: 1600, mean_mc: -0.001236, q025_mc: -0.178641, q975_mc: 0.180994, mean_qmc: -0.006613 },
    ReferenceRow { p: 4, n: 16, m: 3200, mean_mc: -0.002734, q025_mc: -0.124856, q975_mc: 0.117629, mean_qmc: -0.012749 },
    ReferenceRow { p: 4, n: 32, m: 400, mean_mc: 0.000894, q025_mc: -0.393482, q975_mc: 0.511684, mean_qmc: 0.118669 },
    ReferenceRow { p: 4, n: 32, m: 800, mean_mc: -0.002124, q025_mc: -0.273851, q975_mc: 0.325494, mean_qmc: 0.040281 },
    ReferenceRow { p: 4, n: 32, m: 1600, mean_mc: 0.001899, q025_mc: -0.210273, q975_mc: 0.223822, mean_qmc: -0.006128 },
    ReferenceRow { p: 4, n: 32, m: 3200, mean_mc: 0.000415, q025_mc: -0.138241, q975_mc: 0.167645, mean_qmc: -0.015105 },
    ReferenceRow { p: 4, n: 64, m: 400, mean_mc: -0.005731, q025_mc: -0.468204, q975_mc: 0.596599, mean_qmc: 0.140998 },
    ReferenceRow { p: 4, n: 64, m: 800, mean_mc: -0.006463, q025_mc: -0.345192, q975_mc: 0.402549, mean_qmc: 0.047082 },
    ReferenceRow { p: 4, n: 64, m: 1600, mean_mc: -0.000577, q025_mc: -0.227556, q975_mc: 0.275430, mean_qmc: -0.008002 },
    ReferenceRow { p: 4, n: 64, m: 3200, mean_mc: -0.000274, q025_mc: -0.185032, q975_mc: 0.200968, mean_qmc: -0.019148 },
    ReferenceRow { p: 8, n: 8, m: 400, mean_mc: 0.084861, q025_mc: -0.953905, q975_mc: 4.936026, mean_qmc: -0.465240 },
    ReferenceRow { p: 8, n: 8, m: 800, mean_mc: 0.025032, q025_mc: -0.891627, q975_mc: 3.540811, mean_qmc: -0.414345 },
    ReferenceRow { p: 8, n: 8, m: 1600, mean_mc: 0.046622, q025_mc: -0.790689, q975_mc: 2.524881, mean_qmc: -0.442301 },
    ReferenceRow { p: 8, n: 8, m: 3200, mean_mc: -0.002301, q025_mc: -0.716486, q975_mc: 1.639213, mean_qmc: -0.137481 },
    ReferenceRow { p: 8, n: 16, m: 400, mean_mc: -0.170066, q025_mc: -0.990298, q975_mc: 4.704067, mean_qmc: -0.673619 },
    ReferenceRow { p: 8, n: 16, m: 800, mean_mc: 0.017445, q025_mc: -0.957049, q975_mc: 4.610040, mean_qmc: -0.643797 },
    ReferenceRow { p: 8, n: 16, m: 1600, mean_mc: 0.011627, q025_mc: -0.922310, q975_mc: 4.030156, mean_qmc: -0.616550 },
    ReferenceRow { p: 8, n: 16, m: 3200, mean_mc: 0.046587, q025_mc: -0.861213, q975_mc: 3.451607, mean_qmc: -0.291093 },
    ReferenceRow { p: 8, n: 32, m: 400, mean_mc: 0.088609, q025_mc: -0.997090, q975_mc: 7.635046, mean_qmc: -0.824456 },
    ReferenceRow { p: 8, n: 32, m: 800, mean_mc: -0.014428, q025_mc: -0.989544, q975_mc: 4.928271, mean_qmc: -0.811912 },
    ReferenceRow { p: 8, n: 32, m: 1600, mean_mc: -0.115838, q025_mc: -0.970739, q975_mc: 3.956533, mean_qmc: -0.763803 },
    ReferenceRow { p: 8, n: 32, m: 3200, mean_mc: 0.106969, q025_mc: -0.929065, q975_mc: 4.795452, mean_qmc: -0.467314 },
    ReferenceRow { p: 8, n: 64, m: 400, mean_mc: 0.197498, q025_mc: -0.999515, q975_mc: 13.943347, mean_qmc: -0.915594 },
    ReferenceRow { p: 8, n: 64, m: 800, mean_mc: 0.059107, q025_mc: -0.997255, q975_mc: 7.343841, mean_qmc: -0.912046 },
    ReferenceRow { p: 8, n: 64, m: 1600, mean_mc: 0.020557, q025_mc: -0.990012, q975_mc: 7.198481, mean_qmc: -0.868250 },
    ReferenceRow { p: 8, n: 64, m: 3200, mean_mc: 0.007722, q025_mc: -0.966710, q975_mc: 4.848322, mean_qmc: -0.629245 },
];
