//! Marginal likelihoods of grouped models as sums of per-group truncated
//! integrals over the random effects, and the approximate MMLE.
//!
//! The Gaussian random-intercept model
//! `y_ij = θ + u_i + ε_ij`, `u_i ~ N(0, τ²)`, `ε_ij ~ N(0, σ²)`
//! is provided with a closed-form marginal and GLS maximizer.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{log_truncated_estimate, mode_region, TSpec, TruncationPolicy};
use crate::model::{CurvatureMeta, PosteriorModel};
use crate::numerics::{derive_seed, pairwise_sum};
use crate::sequences::{halton, uniform_grid, PointSet};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A model whose likelihood integrates independent per-group random effects.
///
/// `group_model(θ, i)` returns the joint log density of group `i`'s data
/// and its random effect as a function of the random effect, including all
/// normalizing constants, so that its integral is the group's marginal.
pub trait GroupedModel: Send + Sync {
    type Group: PosteriorModel;

    fn n_groups(&self) -> usize;

    /// Dimension of each random effect.
    fn random_dim(&self) -> usize;

    /// Dimension of the fixed parameter.
    fn fixed_dim(&self) -> usize;

    fn group_model(&self, theta: &[f64], i: usize) -> Result<Self::Group>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    #[default]
    Qmc,
}

/// Per-group truncation and grid settings, shared by every group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalConfig {
    pub method: Method,
    pub m: usize,
    /// MC base seed; group `i` uses `derive_seed(seed, [i])`.
    pub seed: u64,
    pub policy: TruncationPolicy,
    /// Per-group `t`; `None` ties it to the grid size, see [`grid_matched_t`].
    pub t_spec: Option<TSpec>,
    pub start_index: u64,
}

/// Multiplier of `ln m` in [`grid_matched_t`].
pub const GRID_T_FACTOR: f64 = 4.0;

/// `t = 4 ln m`. For a Gaussian group the cube half-width is `√t` posterior
/// standard deviations, so the truncated mass is `O(m⁻²)` and the bias
/// shrinks with the grid instead of leaving a fixed floor.
pub fn grid_matched_t(m: usize) -> f64 {
    GRID_T_FACTOR * (m.max(2) as f64).ln()
}

impl MarginalConfig {
    pub fn effective_t_spec(&self) -> TSpec {
        self.t_spec.unwrap_or_else(|| TSpec::Fixed(grid_matched_t(self.m)))
    }
}

impl Default for MarginalConfig {
    fn default() -> Self {
        MarginalConfig {
            method: Method::Qmc,
            m: 4096,
            seed: 0,
            policy: TruncationPolicy::HighDim,
            t_spec: None,
            start_index: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEval {
    pub theta: Vec<f64>,
    pub log_marginal: f64,
    pub per_group_logs: Vec<f64>,
    pub method: Method,
    pub m: usize,
    pub seed: Option<u64>,
    /// Groups whose estimate underflowed to `-inf`.
    pub failed_groups: Vec<usize>,
}

/// Order-independent sum: sorting first makes the result invariant to the
/// group order.
fn sum_logs(logs: &[f64]) -> f64 {
    let mut sorted = logs.to_vec();
    sorted.sort_by(f64::total_cmp);
    pairwise_sum(&sorted)
}

/// `log ∫ exp(l_i(u)) du` for one group: mode value plus the mode-relative
/// truncated estimate.
fn group_log_marginal<M: PosteriorModel>(model: &M, cfg: &MarginalConfig, ps: &PointSet) -> Result<f64> {
    let region = mode_region(model, cfg.policy, cfg.effective_t_spec())?;
    let offset = model.log_post(&region.center);
    Ok(offset + log_truncated_estimate(model, &region, ps)?)
}

/// Approximate log marginal likelihood at `theta`.
pub fn marginal_loglik<G: GroupedModel>(gm: &G, theta: &[f64], cfg: &MarginalConfig) -> Result<MarginalEval> {
    if cfg.m == 0 {
        return Err(Error::invalid("m must be >= 1"));
    }
    if theta.len() != gm.fixed_dim() {
        return Err(Error::DimensionMismatch { expected: gm.fixed_dim(), actual: theta.len() });
    }
    let k = gm.n_groups();
    let q = gm.random_dim();
    let shared = match cfg.method {
        Method::Qmc => Some(halton(cfg.m, q, cfg.start_index)?),
        Method::Mc => None,
    };
    let per_group_logs = (0..k)
        .into_par_iter()
        .map(|i| {
            let model = gm.group_model(theta, i)?;
            match &shared {
                Some(ps) => group_log_marginal(&model, cfg, ps),
                None => {
                    let ps = uniform_grid(cfg.m, q, derive_seed(cfg.seed, &[i as u64]))?;
                    group_log_marginal(&model, cfg, &ps)
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let failed_groups: Vec<usize> =
        per_group_logs.iter().enumerate().filter(|(_, v)| **v == f64::NEG_INFINITY).map(|(i, _)| i).collect();
    let log_marginal = if failed_groups.is_empty() { sum_logs(&per_group_logs) } else { f64::NEG_INFINITY };
    Ok(MarginalEval {
        theta: theta.to_vec(),
        log_marginal,
        per_group_logs,
        method: cfg.method,
        m: cfg.m,
        seed: (cfg.method == Method::Mc).then_some(cfg.seed),
        failed_groups,
    })
}

/// One group of the random-intercept model, as a density in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterceptGroup {
    n: usize,
    /// `Σ (y_j − θ)`.
    sum_resid: f64,
    /// `Σ (y_j − θ)²`.
    ss_resid: f64,
    sigma: f64,
    tau: f64,
}

impl InterceptGroup {
    fn precision(&self) -> f64 {
        self.n as f64 / (self.sigma * self.sigma) + 1.0 / (self.tau * self.tau)
    }

    /// Exact `log ∫ exp(l(u)) du`.
    pub fn exact_log_marginal(&self) -> f64 {
        let u = self.exact_mode().unwrap()[0];
        self.log_post(&[u]) + 0.5 * (LN_2PI - self.precision().ln())
    }
}

impl PosteriorModel for InterceptGroup {
    fn dim(&self) -> usize {
        1
    }

    fn sample_size(&self) -> usize {
        self.n
    }

    fn log_post(&self, u: &[f64]) -> f64 {
        let (s2, t2) = (self.sigma * self.sigma, self.tau * self.tau);
        let n = self.n as f64;
        let u = u[0];
        // Σ (r_j − u)² = Σ r_j² − 2u Σ r_j + n u²
        let rss = self.ss_resid - 2.0 * u * self.sum_resid + n * u * u;
        -0.5 * n * (LN_2PI + s2.ln()) - 0.5 * rss / s2 - 0.5 * (LN_2PI + t2.ln()) - 0.5 * u * u / t2
    }

    fn grad(&self, u: &[f64]) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        vec![self.sum_resid / s2 - self.precision() * u[0]]
    }

    fn hess(&self, _u: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -self.precision())
    }

    fn meta(&self) -> CurvatureMeta {
        let eta = self.precision() / self.n as f64;
        CurvatureMeta { eta1: eta, eta2: eta, deriv_bound_d: eta, epsilon: 1.0, delta_np: 1.0 }
    }

    fn oracle_log_normalizer(&self) -> Option<f64> {
        Some(0.5 * (LN_2PI - self.precision().ln()))
    }

    fn exact_mode(&self) -> Option<Vec<f64>> {
        Some(vec![self.sum_resid / (self.sigma * self.sigma) / self.precision()])
    }
}

/// Gaussian random-intercept linear mixed model with known `σ` and `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianLmm {
    pub groups: Vec<Vec<f64>>,
    pub sigma: f64,
    pub tau: f64,
}

/// Simulation settings for [`GaussianLmm::simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmmSpec {
    pub k: usize,
    pub ni: usize,
    pub sigma: f64,
    pub tau: f64,
    pub theta0: f64,
    pub seed: u64,
}

impl Default for LmmSpec {
    fn default() -> Self {
        LmmSpec { k: 5, ni: 6, sigma: 1.0, tau: 0.5, theta0: 0.0, seed: 0 }
    }
}

impl GaussianLmm {
    pub fn new(groups: Vec<Vec<f64>>, sigma: f64, tau: f64) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::invalid("at least one group is required"));
        }
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::invalid("every group must be nonempty"));
        }
        if groups.iter().flatten().any(|y| !y.is_finite()) {
            return Err(Error::invalid("observations must be finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) || !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::invalid("covariance is not positive definite: need sigma > 0 and tau >= 0"));
        }
        Ok(GaussianLmm { groups, sigma, tau })
    }

    /// Draws `u_i` then `y_ij` from one seeded ChaCha8 stream.
    pub fn simulate(spec: &LmmSpec) -> Result<Self> {
        if spec.k == 0 || spec.ni == 0 {
            return Err(Error::invalid("k and ni must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut groups = Vec::with_capacity(spec.k);
        for _ in 0..spec.k {
            let z: f64 = StandardNormal.sample(&mut rng);
            let u = spec.tau * z;
            let g = (0..spec.ni)
                .map(|_| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    spec.theta0 + u + spec.sigma * e
                })
                .collect();
            groups.push(g);
        }
        Self::new(groups, spec.sigma, spec.tau)
    }

    /// Exact log marginal likelihood via the compound-symmetry identities
    /// `|Σ| = σ^{2(n−1)} (σ² + nτ²)` and
    /// `r'Σ⁻¹r = (Σr² − τ²(Σr)²/(σ² + nτ²)) / σ²`.
    pub fn oracle_log_marginal(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        let (s2, t2) = (self.sigma * self.sigma, self.tau * self.tau);
        let logs: Vec<f64> = self
            .groups
            .iter()
            .map(|g| {
                let n = g.len() as f64;
                let r: Vec<f64> = g.iter().map(|y| y - theta).collect();
                let sr = pairwise_sum(&r);
                let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
                let ss = pairwise_sum(&sq);
                let c = s2 + n * t2;
                let logdet = (n - 1.0) * s2.ln() + c.ln();
                let quad = (ss - t2 * sr * sr / c) / s2;
                -0.5 * (n * LN_2PI + logdet + quad)
            })
            .collect();
        Ok(sum_logs(&logs))
    }

    /// Maximizer of the exact marginal: the GLS mean
    /// `Σ_i S_i/(σ² + n_i τ²) / Σ_i n_i/(σ² + n_i τ²)`.
    pub fn gls_theta(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        let t2 = self.tau * self.tau;
        let (num, den): (Vec<f64>, Vec<f64>) = self
            .groups
            .iter()
            .map(|g| {
                let n = g.len() as f64;
                let w = 1.0 / (s2 + n * t2);
                (pairwise_sum(g) * w, n * w)
            })
            .unzip();
        pairwise_sum(&num) / pairwise_sum(&den)
    }

    pub fn total_observations(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

impl GroupedModel for GaussianLmm {
    type Group = InterceptGroup;

    fn n_groups(&self) -> usize {
        self.groups.len()
    }

    fn random_dim(&self) -> usize {
        1
    }

    fn fixed_dim(&self) -> usize {
        1
    }

    fn group_model(&self, theta: &[f64], i: usize) -> Result<InterceptGroup> {
        if self.tau <= 0.0 {
            return Err(Error::invalid("integrating the random effect requires tau > 0"));
        }
        let g = self.groups.get(i).ok_or_else(|| Error::invalid(format!("group index {i} out of range")))?;
        let r: Vec<f64> = g.iter().map(|y| y - theta[0]).collect();
        let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
        Ok(InterceptGroup {
            n: g.len(),
            sum_resid: pairwise_sum(&r),
            ss_resid: pairwise_sum(&sq),
            sigma: self.sigma,
            tau: self.tau,
        })
    }
}

/// Search settings for [`mmle`]. `lower`/`upper` bracket the maximizer for
/// one fixed parameter; for more, `(lower + upper)/2` starts a Nelder–Mead
/// simplex with edge `(upper − lower)/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl SearchConfig {
    pub fn bracket(lower: f64, upper: f64, tol: f64) -> Self {
        SearchConfig { lower: vec![lower], upper: vec![upper], tol, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best point after each iteration.
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_section_max<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<OptimResult> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::invalid("golden section needs lo < hi and tol > 0"));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut trace = Vec::new();
    let mut it = 0;
    while (b - a) > tol && it < max_iter {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        it += 1;
        let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
        trace.push((vec![x], v));
    }
    let x = 0.5 * (a + b);
    let value = f(x)?;
    Ok(OptimResult { x: vec![x], value, iterations: it, converged: (b - a) <= tol, trace })
}

/// Nelder–Mead maximization with standard coefficients.
pub fn nelder_mead_max<F: FnMut(&[f64]) -> Result<f64>>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<OptimResult> {
    let q = x0.len();
    if q == 0 || step.len() != q {
        return Err(Error::invalid("nelder-mead needs a nonempty start and matching step"));
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for j in 0..q {
        let mut v = x0.to_vec();
        v[j] += step[j];
        simplex.push(v);
    }
    // Minimize -f.
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x).map(|v| -v)).collect::<Result<_>>()?;
    let mut trace = Vec::new();
    let mut it = 0;
    let mut converged = false;
    while it < max_iter {
        let mut order: Vec<usize> = (0..=q).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        trace.push((simplex[0].clone(), -vals[0]));
        let size = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size <= tol {
            converged = true;
            break;
        }
        it += 1;
        let centroid: Vec<f64> = (0..q).map(|j| simplex[..q].iter().map(|v| v[j]).sum::<f64>() / q as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[q]).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = -f(&xr)?;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = -f(&xe)?;
            if fe < fr {
                simplex[q] = xe;
                vals[q] = fe;
            } else {
                simplex[q] = xr;
                vals[q] = fr;
            }
        } else if fr < vals[q - 1] {
            simplex[q] = xr;
            vals[q] = fr;
        } else {
            let (xc, fc) = if fr < vals[q] {
                let x = along(-0.5);
                let v = -f(&x)?;
                (x, v)
            } else {
                let x = along(0.5);
                let v = -f(&x)?;
                (x, v)
            };
            if fc < vals[q].min(fr) {
                simplex[q] = xc;
                vals[q] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=q {
                    simplex[i] = best.iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    vals[i] = -f(&simplex[i])?;
                }
            }
        }
    }
    let best = (0..=q).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    Ok(OptimResult { x: simplex[best].clone(), value: -vals[best], iterations: it, converged, trace })
}

fn maximize<F: FnMut(&[f64]) -> Result<f64>>(mut f: F, search: &SearchConfig) -> Result<OptimResult> {
    let q = search.lower.len();
    if q == 0 || search.upper.len() != q {
        return Err(Error::invalid("search bounds must be nonempty and of equal length"));
    }
    let r = if q == 1 {
        golden_section_max(|x| f(&[x]), search.lower[0], search.upper[0], search.tol, search.max_iter)?
    } else {
        let x0: Vec<f64> = search.lower.iter().zip(&search.upper).map(|(l, u)| 0.5 * (l + u)).collect();
        let step: Vec<f64> = search.lower.iter().zip(&search.upper).map(|(l, u)| 0.25 * (u - l)).collect();
        nelder_mead_max(f, &x0, &step, search.tol, search.max_iter)?
    };
    if !r.converged {
        let tail: Vec<String> = r.trace.iter().rev().take(5).map(|(x, v)| format!("{x:?} -> {v:.6}")).collect();
        return Err(Error::Numerical(format!(
            "maximizer did not converge in {} iterations; last iterates: {}",
            r.iterations,
            tail.join("; ")
        )));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmleResult {
    pub theta_tilde: Vec<f64>,
    pub log_marginal_at_opt: f64,
    pub iterations: usize,
}

/// Approximate MMLE: maximizes [`marginal_loglik`] with a frozen grid (and
/// frozen MC seed) so the objective is deterministic.
pub fn mmle<G: GroupedModel>(gm: &G, cfg: &MarginalConfig, search: &SearchConfig) -> Result<MmleResult> {
    if search.lower.len() != gm.fixed_dim() {
        return Err(Error::DimensionMismatch { expected: gm.fixed_dim(), actual: search.lower.len() });
    }
    let r = maximize(|th| marginal_loglik(gm, th, cfg).map(|e| e.log_marginal), search)?;
    Ok(MmleResult { theta_tilde: r.x, log_marginal_at_opt: r.value, iterations: r.iterations })
}

/// MMLE of the exact LMM marginal, for optimizer checks.
pub fn mmle_oracle(lmm: &GaussianLmm, search: &SearchConfig) -> Result<MmleResult> {
    let r = maximize(|th| lmm.oracle_log_marginal(th[0]), search)?;
    Ok(MmleResult { theta_tilde: r.x, log_marginal_at_opt: r.value, iterations: r.iterations })
}

/// Default search bracket around the data: grand mean ± 10 (σ + τ).
pub fn default_search(lmm: &GaussianLmm, tol: f64) -> SearchConfig {
    let all: Vec<f64> = lmm.groups.iter().flatten().copied().collect();
    let center = pairwise_sum(&all) / all.len() as f64;
    let half = 10.0 * (lmm.sigma + lmm.tau);
    SearchConfig::bracket(center - half, center + half, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::estimate_normalizer;
    use crate::numerics::normal_central_mass;

    fn spec() -> LmmSpec {
        LmmSpec { k: 5, ni: 6, sigma: 1.0, tau: 0.5, theta0: 0.3, seed: 11 }
    }

    /// Adaptive Simpson on `[a, b]`.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
    }

    #[test]
    fn oracle_without_random_effect_is_independent_normals() {
        let lmm = GaussianLmm::new(vec![vec![0.1, -0.4], vec![1.2]], 1.5, 0.0).unwrap();
        let theta = 0.2;
        let expected: f64 = [0.1, -0.4, 1.2]
            .iter()
            .map(|y: &f64| -0.5 * (LN_2PI + 2.25f64.ln()) - 0.5 * (y - theta).powi(2) / 2.25)
            .sum();
        assert!((lmm.oracle_log_marginal(theta).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn oracle_single_observation() {
        let lmm = GaussianLmm::new(vec![vec![0.7]], 1.0, 0.5).unwrap();
        let v = 1.25;
        let expected = -0.5 * (LN_2PI + f64::ln(v)) - 0.5 * (0.7f64 - 0.1).powi(2) / v;
        assert!((lmm.oracle_log_marginal(0.1).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn oracle_matches_quadrature() {
        let lmm = GaussianLmm::new(vec![vec![0.3, -1.1, 0.8], vec![2.0, 1.4, 1.9]], 0.8, 1.3).unwrap();
        let theta = 0.45;
        let mut total = 0.0;
        for i in 0..2 {
            let g = lmm.group_model(&[theta], i).unwrap();
            let u0 = g.exact_mode().unwrap()[0];
            let l0 = g.log_post(&[u0]);
            let sd = g.precision().sqrt().recip();
            let f = |u: f64| (g.log_post(&[u]) - l0).exp();
            let integral = simpson(&f, u0 - 15.0 * sd, u0 + 15.0 * sd, 1e-13);
            total += l0 + integral.ln();
        }
        assert!((lmm.oracle_log_marginal(theta).unwrap() - total).abs() < 1e-8);
    }

    #[test]
    fn group_model_exact_marginals_sum_to_oracle() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        for theta in [-1.0, 0.0, 0.7] {
            let sum: f64 =
                (0..lmm.n_groups()).map(|i| lmm.group_model(&[theta], i).unwrap().exact_log_marginal()).sum();
            assert!((sum - lmm.oracle_log_marginal(theta).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn group_derivatives_match_finite_differences() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let g = lmm.group_model(&[0.2], 1).unwrap();
        assert!(crate::model::finite_diff_check(&g, &[0.37], 1e-4).unwrap() < 1e-4);
    }

    #[test]
    fn single_group_is_one_normalizer_call_plus_offset() {
        let lmm = GaussianLmm::new(vec![vec![0.3, -0.2, 0.9, 0.1]], 1.0, 0.5).unwrap();
        let cfg = MarginalConfig { m: 256, ..Default::default() };
        let eval = marginal_loglik(&lmm, &[0.1], &cfg).unwrap();
        let g = lmm.group_model(&[0.1], 0).unwrap();
        let region = mode_region(&g, cfg.policy, cfg.effective_t_spec()).unwrap();
        let ps = halton(256, 1, 1).unwrap();
        let est = estimate_normalizer(&g, &region, &ps).unwrap();
        let expected = g.log_post(&region.center) + est.log_estimate;
        assert_eq!(eval.log_marginal, expected);
        assert_eq!(eval.per_group_logs, vec![expected]);
    }

    #[test]
    fn qmc_marginal_close_to_oracle() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let cfg = MarginalConfig::default();
        let eval = marginal_loglik(&lmm, &[0.3], &cfg).unwrap();
        let oracle = lmm.oracle_log_marginal(0.3).unwrap();
        assert!((eval.log_marginal - oracle).abs() < 1e-3);
        assert!((eval.log_marginal - pairwise_sum(&eval.per_group_logs)).abs() < 1e-12);
        assert!(eval.seed.is_none());
    }

    #[test]
    fn group_permutation_invariance() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let mut rev = lmm.clone();
        rev.groups.reverse();
        let cfg = MarginalConfig { m: 512, ..Default::default() };
        let a = marginal_loglik(&lmm, &[0.1], &cfg).unwrap().log_marginal;
        let b = marginal_loglik(&rev, &[0.1], &cfg).unwrap().log_marginal;
        assert_eq!(a, b);
    }

    #[test]
    fn mc_is_deterministic_per_seed() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let cfg = MarginalConfig { method: Method::Mc, m: 300, seed: 5, ..Default::default() };
        let a = marginal_loglik(&lmm, &[0.1], &cfg).unwrap();
        let b = marginal_loglik(&lmm, &[0.1], &cfg).unwrap();
        assert_eq!(a, b);
        let c = marginal_loglik(&lmm, &[0.1], &MarginalConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a.log_marginal, c.log_marginal);
        assert_eq!(a.seed, Some(5));
    }

    #[test]
    fn mc_group_estimate_unbiased() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let cfg = MarginalConfig { method: Method::Mc, m: 50, t_spec: Some(TSpec::Fixed(4.0)), ..Default::default() };
        let g = lmm.group_model(&[0.3], 2).unwrap();
        let region = mode_region(&g, cfg.policy, cfg.effective_t_spec()).unwrap();
        // Truncated Gaussian mass over ±√t posterior standard deviations.
        let truth = g.log_post(&region.center)
            + g.oracle_log_normalizer().unwrap()
            + normal_central_mass(region.radius * g.precision().sqrt()).ln();
        let reps = 500;
        let vals: Vec<f64> = (0..reps)
            .map(|r| {
                let ps = uniform_grid(cfg.m, 1, derive_seed(99, &[r])).unwrap();
                (group_log_marginal(&g, &cfg, &ps).unwrap() - truth).exp()
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean ratio {mean}, se {se}");
    }

    #[test]
    fn far_theta_stays_finite() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let cfg = MarginalConfig { m: 16, ..Default::default() };
        let e = marginal_loglik(&lmm, &[1e3], &cfg).unwrap();
        assert!(e.log_marginal.is_finite());
        assert!(e.failed_groups.is_empty());
        let oracle = lmm.oracle_log_marginal(1e3).unwrap();
        assert!(((e.log_marginal - oracle) / oracle).abs() < 1e-9);
    }

    #[test]
    fn oracle_mmle_is_gls() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let r = mmle_oracle(&lmm, &default_search(&lmm, 1e-9)).unwrap();
        assert!((r.theta_tilde[0] - lmm.gls_theta()).abs() < 1e-6);
    }

    #[test]
    fn gls_is_stationary_point_of_oracle() {
        let lmm = GaussianLmm::simulate(&LmmSpec { ni: 4, tau: 0.9, ..spec() }).unwrap();
        let mut groups = lmm.groups.clone();
        groups[0].push(2.0);
        let lmm = GaussianLmm::new(groups, lmm.sigma, lmm.tau).unwrap();
        let t = lmm.gls_theta();
        let h = 1e-5;
        let d = (lmm.oracle_log_marginal(t + h).unwrap() - lmm.oracle_log_marginal(t - h).unwrap()) / (2.0 * h);
        assert!(d.abs() < 1e-7);
    }

    #[test]
    fn approximate_mmle_close_to_gls() {
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        let r = mmle(&lmm, &MarginalConfig::default(), &default_search(&lmm, 1e-6)).unwrap();
        assert!((r.theta_tilde[0] - lmm.gls_theta()).abs() <= 1e-2);
    }

    #[test]
    fn nelder_mead_finds_quadratic_max() {
        let f = |x: &[f64]| Ok(-(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2) - 0.5 * x[0] * x[1]);
        let r = nelder_mead_max(f, &[0.0, 0.0], &[0.5, 0.5], 1e-9, 2000).unwrap();
        // Stationary point of the quadratic.
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 4.0]);
        let b = nalgebra::DVector::from_vec(vec![2.0, -2.0]);
        let x = a.lu().solve(&b).unwrap();
        assert!((r.x[0] - x[0]).abs() < 1e-6 && (r.x[1] - x[1]).abs() < 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn non_convergence_is_reported() {
        let s = SearchConfig { lower: vec![-1.0], upper: vec![1.0], tol: 1e-12, max_iter: 3 };
        let lmm = GaussianLmm::simulate(&spec()).unwrap();
        match mmle_oracle(&lmm, &s) {
            Err(Error::Numerical(msg)) => assert!(msg.contains("did not converge")),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_covariance_rejected() {
        assert!(GaussianLmm::new(vec![vec![1.0]], 0.0, 1.0).is_err());
        assert!(GaussianLmm::new(vec![vec![1.0]], 1.0, -0.1).is_err());
        assert!(GaussianLmm::new(vec![vec![]], 1.0, 1.0).is_err());
        let lmm = GaussianLmm::new(vec![vec![1.0, 2.0]], 1.0, 0.0).unwrap();
        assert!(marginal_loglik(&lmm, &[0.0], &MarginalConfig::default()).is_err());
    }
}
