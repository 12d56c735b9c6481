//! Truncation regions and the truncated MC / QMC estimator of the
//! mode-relative normalizing constant
//!
//! ```text
//! Ẑ = (2γ)^p / m · Σ_i exp{ l(2γ(x_i − 1/2) + θ̂) − l(θ̂) }
//! ```
//!
//! evaluated on the log scale with a log-sum-exp over the `m` terms.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{find_mode, CurvatureMeta, PosteriorModel};
use crate::numerics::{derive_seed, log_sum_exp, mean, quantile_sorted};
use crate::sequences::{affine, uniform_grid, GridDescriptor, PointSet};

/// Choice of the truncation sequence `t(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum TSpec {
    /// `t(n)² = η₂ log(n) / η₁`.
    #[default]
    Theorem,
    /// `t(n)² = log(n)`.
    SqrtLog,
    /// `t(n) = log(n)`.
    Log,
    /// A fixed value independent of `n`.
    Fixed(f64),
}

impl TSpec {
    pub fn value(&self, n: f64, meta: &CurvatureMeta) -> f64 {
        match *self {
            TSpec::Theorem => (meta.eta2 * n.ln() / meta.eta1).sqrt(),
            TSpec::SqrtLog => n.ln().sqrt(),
            TSpec::Log => n.ln(),
            TSpec::Fixed(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    /// `γ_n² = t(n) / (η₂ n)`.
    FixedP,
    /// `γ'_n = √p · γ_n`.
    #[default]
    HighDim,
    /// Radius supplied directly.
    Custom,
}

/// Radius and the `t(n)` used for it. `Custom` has no formula and is rejected.
pub fn truncation_radius(
    n: usize,
    p: usize,
    meta: &CurvatureMeta,
    policy: TruncationPolicy,
    t_spec: TSpec,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid("truncation radius requires n >= 2 so that log n > 0"));
    }
    if p == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    meta.validate()?;
    let t = t_spec.value(n as f64, meta);
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t(n) must be positive and finite, got {t}")));
    }
    let gamma = (t / (meta.eta2 * n as f64)).sqrt();
    let radius = match policy {
        TruncationPolicy::FixedP => gamma,
        TruncationPolicy::HighDim => (p as f64).sqrt() * gamma,
        TruncationPolicy::Custom => {
            return Err(Error::invalid("custom policy has no radius formula; use TruncationRegion::custom"))
        }
    };
    Ok((radius, t))
}

/// Hypercube `[center − radius, center + radius]^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRegion {
    pub center: Vec<f64>,
    pub radius: f64,
    pub policy: TruncationPolicy,
    /// `t(n)` used to build the radius; `None` for custom regions.
    pub t_value: Option<f64>,
}

impl TruncationRegion {
    pub fn new(
        center: Vec<f64>,
        n: usize,
        meta: &CurvatureMeta,
        policy: TruncationPolicy,
        t_spec: TSpec,
    ) -> Result<Self> {
        let (radius, t) = truncation_radius(n, center.len(), meta, policy, t_spec)?;
        Ok(TruncationRegion { center, radius, policy, t_value: Some(t) })
    }

    pub fn custom(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius must be positive and finite"));
        }
        if center.is_empty() {
            return Err(Error::invalid("center must have dimension >= 1"));
        }
        Ok(TruncationRegion { center, radius, policy: TruncationPolicy::Custom, t_value: None })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `log` of the cube volume `(2γ)^p`.
    pub fn log_cube_volume(&self) -> f64 {
        self.dim() as f64 * (2.0 * self.radius).ln()
    }

    /// `log` of the volume of the L² ball with the same radius.
    pub fn log_ball_volume(&self) -> f64 {
        let p = self.dim() as f64;
        0.5 * p * std::f64::consts::PI.ln() + p * self.radius.ln() - libm::lgamma(0.5 * p + 1.0)
    }
}

/// Builds a region centered at the model's mode (closed form when the model
/// provides one, Newton otherwise) with the model's own metadata.
pub fn mode_region<M: PosteriorModel + ?Sized>(
    model: &M,
    policy: TruncationPolicy,
    t_spec: TSpec,
) -> Result<TruncationRegion> {
    mode_region_with_meta(model, &model.meta(), policy, t_spec)
}

/// As [`mode_region`] with caller-supplied curvature metadata.
pub fn mode_region_with_meta<M: PosteriorModel + ?Sized>(
    model: &M,
    meta: &CurvatureMeta,
    policy: TruncationPolicy,
    t_spec: TSpec,
) -> Result<TruncationRegion> {
    let center = match model.exact_mode() {
        Some(m) => m,
        None => {
            let r = find_mode(model, &vec![0.0; model.dim()], 1e-10, 200)?;
            if !r.converged {
                return Err(Error::Numerical(format!(
                    "mode search did not converge (|grad| = {:.3e} after {} iterations)",
                    r.grad_norm, r.iterations
                )));
            }
            r.theta_hat
        }
    };
    TruncationRegion::new(center, model.sample_size(), meta, policy, t_spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// `log` of the truncated-integral estimate, mode-relative.
    pub log_estimate: f64,
    pub grid: GridDescriptor,
    pub region: TruncationRegion,
    /// `exp(log_estimate − oracle) − 1` when the model has an oracle.
    pub rel_error: Option<f64>,
    pub log_cube_volume: f64,
    pub log_ball_volume: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// `exp(log_estimate − oracle_log) − 1`.
pub fn relative_error(log_estimate: f64, oracle_log: f64) -> f64 {
    (log_estimate - oracle_log).exp_m1()
}

/// Log of the truncated estimator. The reference value is `l(region.center)`,
/// so the region must be centered at the mode for the result to be
/// mode-relative.
pub fn log_truncated_estimate<M: PosteriorModel + ?Sized>(
    model: &M,
    region: &TruncationRegion,
    ps: &PointSet,
) -> Result<f64> {
    let p = model.dim();
    if ps.p() != p {
        return Err(Error::DimensionMismatch { expected: p, actual: ps.p() });
    }
    if region.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, actual: region.dim() });
    }
    let reference = model.log_post(&region.center);
    if !reference.is_finite() {
        return Err(Error::Numerical("log posterior at the region center is not finite".into()));
    }
    let mut theta = vec![0.0; p];
    let terms: Vec<f64> = ps
        .rows()
        .map(|x| {
            for ((t, &xi), &c) in theta.iter_mut().zip(x).zip(&region.center) {
                *t = affine(xi, c, region.radius);
            }
            model.log_post(&theta) - reference
        })
        .collect();
    Ok(region.log_cube_volume() - (ps.m() as f64).ln() + log_sum_exp(&terms))
}

/// Truncated MC/QMC estimate of the normalizing constant.
pub fn estimate_normalizer<M: PosteriorModel + ?Sized>(
    model: &M,
    region: &TruncationRegion,
    ps: &PointSet,
) -> Result<EstimateReport> {
    let start = Instant::now();
    let log_estimate = log_truncated_estimate(model, region, ps)?;
    let diagnostic = (log_estimate == f64::NEG_INFINITY)
        .then(|| "every summand underflowed; the truncation region misses the posterior mass".to_string());
    let rel_error = model.oracle_log_normalizer().map(|o| relative_error(log_estimate, o));
    Ok(EstimateReport {
        log_estimate,
        grid: ps.descriptor(),
        region: region.clone(),
        rel_error,
        log_cube_volume: region.log_cube_volume(),
        log_ball_volume: region.log_ball_volume(),
        diagnostic,
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicateStatistic {
    RelativeError,
    /// Model had no oracle; statistics are over `log_estimate`.
    LogEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateStats {
    pub statistic: ReplicateStatistic,
    pub mean_rel_error: f64,
    pub q025: f64,
    pub q975: f64,
    pub n_replicates: usize,
    pub per_replicate_seeds: Vec<u64>,
}

impl ReplicateStats {
    /// Mean and type-7 2.5% / 97.5% quantiles of `values`.
    pub fn from_values(statistic: ReplicateStatistic, values: &[f64], seeds: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("at least one replicate is required"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(ReplicateStats {
            statistic,
            mean_rel_error: mean(values),
            q025: quantile_sorted(&sorted, 0.025),
            q975: quantile_sorted(&sorted, 0.975),
            n_replicates: values.len(),
            per_replicate_seeds: seeds,
        })
    }
}

/// Seed of replicate `r` under a base seed.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, &[r as u64])
}

/// Log estimates of `replicates` independent uniform-grid runs, paired with
/// their grid seeds. Replicates run in parallel; results are in replicate order.
pub fn mc_log_estimates<M: PosteriorModel + ?Sized>(
    model: &M,
    region: &TruncationRegion,
    m: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<(u64, f64)>> {
    if replicates == 0 {
        return Err(Error::invalid("replicates must be >= 1"));
    }
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let s = replicate_seed(seed, r);
            let ps = uniform_grid(m, model.dim(), s)?;
            Ok((s, log_truncated_estimate(model, region, &ps)?))
        })
        .collect()
}

/// MC replicate statistics of the relative error (or of the log estimate
/// when the model has no oracle).
pub fn run_mc_replicates<M: PosteriorModel + ?Sized>(
    model: &M,
    region: &TruncationRegion,
    m: usize,
    replicates: usize,
    seed: u64,
) -> Result<ReplicateStats> {
    let runs = mc_log_estimates(model, region, m, replicates, seed)?;
    let seeds: Vec<u64> = runs.iter().map(|r| r.0).collect();
    match model.oracle_log_normalizer() {
        Some(oracle) => {
            let rel: Vec<f64> = runs.iter().map(|r| relative_error(r.1, oracle)).collect();
            ReplicateStats::from_values(ReplicateStatistic::RelativeError, &rel, seeds)
        }
        None => {
            let logs: Vec<f64> = runs.iter().map(|r| r.1).collect();
            ReplicateStats::from_values(ReplicateStatistic::LogEstimate, &logs, seeds)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GaussianConjugate;
    use crate::sequences::halton;
    use nalgebra::DMatrix;

    struct Flat {
        p: usize,
    }

    impl PosteriorModel for Flat {
        fn dim(&self) -> usize {
            self.p
        }
        fn sample_size(&self) -> usize {
            10
        }
        fn log_post(&self, _t: &[f64]) -> f64 {
            -4.2
        }
        fn grad(&self, _t: &[f64]) -> Vec<f64> {
            vec![0.0; self.p]
        }
        fn hess(&self, _t: &[f64]) -> DMatrix<f64> {
            DMatrix::zeros(self.p, self.p)
        }
        fn meta(&self) -> CurvatureMeta {
            CurvatureMeta::from_curvature(1.0, 1.0).unwrap()
        }
    }

    #[test]
    fn radius_examples() {
        let meta = CurvatureMeta::from_curvature(1.0, 1.0).unwrap();
        let n_e4 = std::f64::consts::E.powi(4);
        // Not an integer n, so evaluate the formula through TSpec directly.
        let t = TSpec::Theorem.value(n_e4, &meta);
        assert!((t - 2.0).abs() < 1e-12);
        let gamma = (t / n_e4).sqrt();
        assert!((gamma - 2f64.sqrt() * (-2.0f64).exp()).abs() < 1e-12);

        let (fixed, _) = truncation_radius(55, 4, &meta, TruncationPolicy::FixedP, TSpec::Theorem).unwrap();
        let (hd, _) = truncation_radius(55, 4, &meta, TruncationPolicy::HighDim, TSpec::Theorem).unwrap();
        assert!((hd - 2.0 * fixed).abs() < 1e-15);

        let n = 40usize;
        let (g1, t1) = truncation_radius(n, 1, &meta, TruncationPolicy::FixedP, TSpec::Theorem).unwrap();
        let (g4, t4) = truncation_radius(4 * n, 1, &meta, TruncationPolicy::FixedP, TSpec::Theorem).unwrap();
        assert!((g4 / g1 - (t4 / (4.0 * t1)).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn radius_rejects_small_n_and_custom() {
        let meta = CurvatureMeta::from_curvature(1.0, 1.0).unwrap();
        assert!(truncation_radius(1, 1, &meta, TruncationPolicy::FixedP, TSpec::Theorem).is_err());
        assert!(truncation_radius(10, 1, &meta, TruncationPolicy::Custom, TSpec::Theorem).is_err());
        assert!(truncation_radius(10, 1, &meta, TruncationPolicy::FixedP, TSpec::Fixed(-1.0)).is_err());
    }

    #[test]
    fn high_dim_radius_squared_is_p_times_fixed() {
        let meta = CurvatureMeta::from_curvature(0.5, 2.0).unwrap();
        for p in 1..6 {
            let (g, _) = truncation_radius(100, p, &meta, TruncationPolicy::FixedP, TSpec::SqrtLog).unwrap();
            let (gp, _) = truncation_radius(100, p, &meta, TruncationPolicy::HighDim, TSpec::SqrtLog).unwrap();
            assert!((gp * gp - p as f64 * g * g).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_integrand_gives_cube_volume() {
        for p in 1..4 {
            let model = Flat { p };
            let region = TruncationRegion::custom(vec![0.3; p], 0.7).unwrap();
            let ps = halton(37, p, 0).unwrap();
            let r = estimate_normalizer(&model, &region, &ps).unwrap();
            assert!((r.log_estimate - p as f64 * 1.4f64.ln()).abs() < 1e-14);
            assert!(r.rel_error.is_none());
        }
    }

    #[test]
    fn single_center_point() {
        let model = GaussianConjugate::simulate(12, 3, 1.0, 1.0, 1).unwrap();
        let region = mode_region(&model, TruncationPolicy::HighDim, TSpec::Theorem).unwrap();
        let ps = PointSet::from_rows(&[vec![0.5; 3]]).unwrap();
        let r = estimate_normalizer(&model, &region, &ps).unwrap();
        assert!((r.log_estimate - 3.0 * (2.0 * region.radius).ln()).abs() < 1e-13);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(1.3, 1.3), 0.0);
        assert!((relative_error(1.3 + 2f64.ln(), 1.3) - 1.0).abs() < 1e-15);
        assert!((relative_error(1.3 - 2f64.ln(), 1.3) + 0.5).abs() < 1e-15);
        assert_eq!(relative_error(-800.0, 0.0), -1.0);
    }

    /// Support is `[-1e-3, 1e-3]`; `-inf` elsewhere.
    struct Spike;

    impl PosteriorModel for Spike {
        fn dim(&self) -> usize {
            1
        }
        fn sample_size(&self) -> usize {
            10
        }
        fn log_post(&self, t: &[f64]) -> f64 {
            if t[0].abs() <= 1e-3 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
        fn grad(&self, _t: &[f64]) -> Vec<f64> {
            vec![0.0]
        }
        fn hess(&self, _t: &[f64]) -> DMatrix<f64> {
            DMatrix::zeros(1, 1)
        }
        fn meta(&self) -> CurvatureMeta {
            CurvatureMeta::from_curvature(1.0, 1.0).unwrap()
        }
        fn oracle_log_normalizer(&self) -> Option<f64> {
            Some(2e-3f64.ln())
        }
    }

    #[test]
    fn underflow_reports_neg_infinity() {
        let region = TruncationRegion::custom(vec![0.0], 1.0).unwrap();
        let ps = PointSet::from_rows(&[vec![0.0], vec![0.999]]).unwrap();
        let r = estimate_normalizer(&Spike, &region, &ps).unwrap();
        assert_eq!(r.log_estimate, f64::NEG_INFINITY);
        assert!(r.diagnostic.is_some());
        assert_eq!(r.rel_error, Some(-1.0));
    }

    #[test]
    fn tiny_summands_stay_finite_in_log_space() {
        let model = GaussianConjugate::new(&vec![vec![0.0]; 4], 1.0, 1.0).unwrap();
        let region = TruncationRegion::custom(vec![0.0], 1e6).unwrap();
        let ps = PointSet::from_rows(&[vec![0.0], vec![0.999]]).unwrap();
        let r = estimate_normalizer(&model, &region, &ps).unwrap();
        assert!(r.log_estimate.is_finite() && r.log_estimate < -1e9);
        assert!(r.diagnostic.is_none());
    }

    #[test]
    fn dimension_mismatch() {
        let model = GaussianConjugate::simulate(12, 2, 1.0, 1.0, 1).unwrap();
        let region = mode_region(&model, TruncationPolicy::HighDim, TSpec::Theorem).unwrap();
        let ps = halton(4, 3, 0).unwrap();
        assert!(estimate_normalizer(&model, &region, &ps).is_err());
    }

    #[test]
    fn replicate_edge_cases() {
        let model = GaussianConjugate::simulate(8, 1, 1.0, 1.0, 2).unwrap();
        let region = mode_region(&model, TruncationPolicy::HighDim, TSpec::Theorem).unwrap();
        let one = run_mc_replicates(&model, &region, 50, 1, 9).unwrap();
        assert_eq!(one.q025, one.mean_rel_error);
        assert_eq!(one.q975, one.mean_rel_error);
        assert_eq!(one.n_replicates, 1);
        assert!(run_mc_replicates(&model, &region, 50, 0, 9).is_err());

        let flat = Flat { p: 2 };
        let region = TruncationRegion::custom(vec![0.0, 0.0], 1.0).unwrap();
        let s = run_mc_replicates(&flat, &region, 20, 30, 4).unwrap();
        assert_eq!(s.statistic, ReplicateStatistic::LogEstimate);
        assert_eq!(s.q025, s.q975);
        assert!((s.mean_rel_error - 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn region_volumes() {
        let r = TruncationRegion::custom(vec![0.0; 2], 0.5).unwrap();
        assert!((r.log_cube_volume() - 0.0).abs() < 1e-15);
        assert!((r.log_ball_volume() - (std::f64::consts::PI * 0.25).ln()).abs() < 1e-14);
    }
}
