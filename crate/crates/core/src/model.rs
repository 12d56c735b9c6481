//! Posterior models: the log-posterior abstraction with derivatives and
//! curvature metadata, the conjugate Gaussian model with closed-form
//! normalizers, and a damped Newton mode finder.
//!
//! All normalizing constants are expressed relative to the mode value,
//! i.e. as `log ∫ exp(l(θ) − l(θ̂)) dθ`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_central_mass, pairwise_sum};

/// Curvature and regularity constants of a posterior.
///
/// `eta1 · n` and `eta2 · n` bound the eigenvalues of the negative Hessian,
/// `deriv_bound_d · n` bounds the partial derivatives on the truncation cube,
/// `epsilon` is the tail-decay exponent and `delta_np` the locality radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureMeta {
    pub eta1: f64,
    pub eta2: f64,
    pub deriv_bound_d: f64,
    pub epsilon: f64,
    pub delta_np: f64,
}

impl CurvatureMeta {
    pub fn new(eta1: f64, eta2: f64, deriv_bound_d: f64, epsilon: f64, delta_np: f64) -> Result<Self> {
        let meta = CurvatureMeta { eta1, eta2, deriv_bound_d, epsilon, delta_np };
        meta.validate()?;
        Ok(meta)
    }

    /// Metadata with `D = 1`, `ε = 1` and unit locality radius.
    pub fn from_curvature(eta1: f64, eta2: f64) -> Result<Self> {
        Self::new(eta1, eta2, 1.0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("eta1", self.eta1)?;
        positive("eta2", self.eta2)?;
        positive("D", self.deriv_bound_d)?;
        positive("epsilon", self.epsilon)?;
        positive("delta_np", self.delta_np)?;
        if self.eta1 > self.eta2 {
            return Err(Error::invalid(format!("eta1 ({}) must not exceed eta2 ({})", self.eta1, self.eta2)));
        }
        Ok(())
    }
}

/// A log-posterior `l_n(θ) = L_n(θ) + log π(θ)` with first and second
/// derivatives. Implementations must be reentrant.
pub trait PosteriorModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of observations `n`.
    fn sample_size(&self) -> usize;

    fn log_post(&self, theta: &[f64]) -> f64;

    fn grad(&self, theta: &[f64]) -> Vec<f64>;

    fn hess(&self, theta: &[f64]) -> DMatrix<f64>;

    fn meta(&self) -> CurvatureMeta;

    /// Exact `log ∫ exp(l(θ) − l(θ̂)) dθ` when available.
    fn oracle_log_normalizer(&self) -> Option<f64> {
        None
    }

    /// Closed-form mode when available.
    fn exact_mode(&self) -> Option<Vec<f64>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub theta_hat: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Step used along the gradient when the Hessian is not negative definite.
const GRADIENT_FALLBACK_STEP: f64 = 0.1;
const MAX_HALVINGS: usize = 60;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton ascent on `log_post` with step-halving line search.
///
/// Converged iff `‖∇l‖₂ <= tol` within `max_iter` iterations. A Hessian that
/// is not negative definite triggers a damped gradient step instead of an
/// error; non-convergence is reported in the result.
pub fn find_mode<M: PosteriorModel + ?Sized>(model: &M, init: &[f64], tol: f64, max_iter: usize) -> Result<ModeResult> {
    let p = model.dim();
    if init.len() != p {
        return Err(Error::DimensionMismatch { expected: p, actual: init.len() });
    }
    if init.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("find_mode: initial point must be finite"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("find_mode: tolerance must be positive"));
    }

    let mut theta = init.to_vec();
    let mut value = model.log_post(&theta);
    let mut g = model.grad(&theta);
    let mut iterations = 0;

    while norm2(&g) > tol && iterations < max_iter {
        let neg_h = -model.hess(&theta);
        let gv = DVector::from_column_slice(&g);
        let direction: Vec<f64> = match neg_h.cholesky() {
            Some(chol) => chol.solve(&gv).as_slice().to_vec(),
            None => g.iter().map(|x| GRADIENT_FALLBACK_STEP * x).collect(),
        };

        let mut step = 1.0;
        let mut candidate: Vec<f64> = theta.iter().zip(&direction).map(|(t, d)| t + d).collect();
        let mut cand_value = model.log_post(&candidate);
        let mut halvings = 0;
        while !(cand_value >= value) && halvings < MAX_HALVINGS {
            step *= 0.5;
            for ((c, t), d) in candidate.iter_mut().zip(&theta).zip(&direction) {
                *c = t + step * d;
            }
            cand_value = model.log_post(&candidate);
            halvings += 1;
        }
        iterations += 1;
        if !(cand_value >= value) {
            // No ascent along the direction at any tested step.
            break;
        }
        theta = candidate;
        value = cand_value;
        g = model.grad(&theta);
    }

    let grad_norm = norm2(&g);
    Ok(ModeResult { theta_hat: theta, grad_norm, iterations, converged: grad_norm <= tol })
}

/// Largest absolute deviation between the model's analytic gradient/Hessian
/// and central finite differences of `log_post` with step `h`.
pub fn finite_diff_check<M: PosteriorModel + ?Sized>(model: &M, theta: &[f64], h: f64) -> Result<f64> {
    let p = model.dim();
    if theta.len() != p {
        return Err(Error::DimensionMismatch { expected: p, actual: theta.len() });
    }
    if !(h > 0.0) {
        return Err(Error::invalid("finite_diff_check: step must be positive"));
    }
    let f = |shift: &[(usize, f64)]| {
        let mut t = theta.to_vec();
        for &(j, d) in shift {
            t[j] += d;
        }
        model.log_post(&t)
    };
    let g = model.grad(theta);
    let hm = model.hess(theta);
    let mut worst: f64 = 0.0;
    for j in 0..p {
        let fd = (f(&[(j, h)]) - f(&[(j, -h)])) / (2.0 * h);
        worst = worst.max((fd - g[j]).abs());
        for k in 0..p {
            let fd2 = if j == k {
                (f(&[(j, h)]) - 2.0 * f(&[]) + f(&[(j, -h)])) / (h * h)
            } else {
                (f(&[(j, h), (k, h)]) - f(&[(j, h), (k, -h)]) - f(&[(j, -h), (k, h)]) + f(&[(j, -h), (k, -h)]))
                    / (4.0 * h * h)
            };
            worst = worst.max((fd2 - hm[(j, k)]).abs());
        }
    }
    Ok(worst)
}

/// Conjugate Gaussian location model: `y_i ~ N(μ, σ² I_p)`, prior
/// `μ ~ N(0, σ_p² I_p)`. The data enter only through `n`, the sample mean
/// and the within-sample sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianConjugate {
    n: usize,
    p: usize,
    ybar: Vec<f64>,
    within_ss: f64,
    sigma: f64,
    sigma_p: f64,
    meta: CurvatureMeta,
}

impl GaussianConjugate {
    /// Builds the model from `n` rows of length `p`.
    pub fn new(data: &[Vec<f64>], sigma: f64, sigma_p: f64) -> Result<Self> {
        let n = data.len();
        if n == 0 {
            return Err(Error::invalid("gaussian model needs at least one observation"));
        }
        let p = data[0].len();
        let mut flat = Vec::with_capacity(n * p);
        for row in data {
            if row.len() != p {
                return Err(Error::DimensionMismatch { expected: p, actual: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(&flat, n, p, sigma, sigma_p)
    }

    /// Builds the model from row-major `n × p` data.
    pub fn from_flat(data: &[f64], n: usize, p: usize, sigma: f64, sigma_p: f64) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::invalid("gaussian model needs n >= 1 and p >= 1"));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch { expected: n * p, actual: data.len() });
        }
        if !(sigma > 0.0 && sigma.is_finite() && sigma_p > 0.0 && sigma_p.is_finite()) {
            return Err(Error::invalid("sigma and sigma_p must be positive and finite"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("gaussian model data must be finite"));
        }
        let mut ybar = vec![0.0; p];
        let mut column = vec![0.0; n];
        for (j, yb) in ybar.iter_mut().enumerate() {
            for (i, c) in column.iter_mut().enumerate() {
                *c = data[i * p + j];
            }
            *yb = pairwise_sum(&column) / n as f64;
        }
        let devs: Vec<f64> =
            data.chunks_exact(p).flat_map(|row| row.iter().zip(&ybar).map(|(y, m)| (y - m) * (y - m))).collect();
        let within_ss = pairwise_sum(&devs);

        let precision = n as f64 / (sigma * sigma) + 1.0 / (sigma_p * sigma_p);
        let eta = precision / n as f64;
        // Default high-dimensional radius: γ'² = p · t / (η n), t = sqrt(log n).
        let t = (n as f64).ln().max(0.0).sqrt();
        let gamma_hd = (p as f64 * t / (eta * n as f64)).sqrt();
        let delta_np = if gamma_hd > 0.0 { 2.0 * (p as f64).sqrt() * gamma_hd } else { 1.0 };
        let meta =
            CurvatureMeta { eta1: eta, eta2: eta, deriv_bound_d: eta * gamma_hd.max(1.0), epsilon: 1.0, delta_np };
        Ok(GaussianConjugate { n, p, ybar, within_ss, sigma, sigma_p, meta })
    }

    /// Draws `n` observations from `N(0, I_p)` with a seeded ChaCha8 stream.
    pub fn simulate(n: usize, p: usize, sigma: f64, sigma_p: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self::from_flat(&data, n, p, sigma, sigma_p)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    pub fn sample_mean(&self) -> &[f64] {
        &self.ybar
    }

    /// Posterior precision per coordinate, `n/σ² + 1/σ_p²`.
    pub fn precision(&self) -> f64 {
        self.n as f64 / (self.sigma * self.sigma) + 1.0 / (self.sigma_p * self.sigma_p)
    }

    /// Posterior variance per coordinate.
    pub fn posterior_variance(&self) -> f64 {
        1.0 / self.precision()
    }

    /// Closed-form mode `(n/σ²) v ȳ`.
    pub fn mode(&self) -> Vec<f64> {
        let scale = self.n as f64 / (self.sigma * self.sigma) * self.posterior_variance();
        self.ybar.iter().map(|y| scale * y).collect()
    }

    /// Curvature of the likelihood alone (`η₁ = η₂ = 1/σ²`), with `D` and
    /// `δ` carried over from [`PosteriorModel::meta`].
    pub fn likelihood_meta(&self) -> CurvatureMeta {
        let eta = 1.0 / (self.sigma * self.sigma);
        CurvatureMeta { eta1: eta, eta2: eta, ..self.meta }
    }

    /// Normalized derivative bound on a cube of the given radius around the
    /// mode: first derivatives reach `precision · radius`, second
    /// derivatives equal `precision`, higher ones vanish.
    pub fn derivative_bound(&self, radius: f64) -> f64 {
        self.precision() / self.n as f64 * radius.max(1.0)
    }

    /// Copy of the model whose metadata uses [`Self::derivative_bound`] at `radius`.
    pub fn with_radius_meta(&self, radius: f64) -> Self {
        let mut out = self.clone();
        out.meta.deriv_bound_d = self.derivative_bound(radius);
        out
    }
}

impl PosteriorModel for GaussianConjugate {
    fn dim(&self) -> usize {
        self.p
    }

    fn sample_size(&self) -> usize {
        self.n
    }

    fn log_post(&self, mu: &[f64]) -> f64 {
        let s2 = self.sigma * self.sigma;
        let sp2 = self.sigma_p * self.sigma_p;
        let mut dev = 0.0;
        let mut prior = 0.0;
        for (m, yb) in mu.iter().zip(&self.ybar) {
            dev += (yb - m) * (yb - m);
            prior += m * m;
        }
        -(self.within_ss + self.n as f64 * dev) / (2.0 * s2) - prior / (2.0 * sp2)
    }

    fn grad(&self, mu: &[f64]) -> Vec<f64> {
        let s2 = self.sigma * self.sigma;
        let sp2 = self.sigma_p * self.sigma_p;
        mu.iter().zip(&self.ybar).map(|(m, yb)| self.n as f64 * (yb - m) / s2 - m / sp2).collect()
    }

    fn hess(&self, _mu: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal_element(self.p, self.p, -self.precision())
    }

    fn meta(&self) -> CurvatureMeta {
        self.meta
    }

    fn oracle_log_normalizer(&self) -> Option<f64> {
        Some(gaussian_log_normalizer(self))
    }

    fn exact_mode(&self) -> Option<Vec<f64>> {
        Some(self.mode())
    }
}

/// `log ∫ exp(l(μ) − l(μ̂)) dμ = (p/2) log(2π v)`, `v = (n/σ² + 1/σ_p²)⁻¹`.
pub fn gaussian_log_normalizer(model: &GaussianConjugate) -> f64 {
    0.5 * model.p as f64 * (2.0 * std::f64::consts::PI * model.posterior_variance()).ln()
}

/// Exact mode-relative log integral of the Gaussian posterior over the cube
/// `[center − radius, center + radius]^p`.
///
/// Each coordinate contributes `√(2πv) · P(a < Z < b)`; for a cube centered at
/// the mode this is `√(2πv) · (2Φ(radius/√v) − 1)`.
pub fn truncated_normalizer_oracle(model: &GaussianConjugate, center: &[f64], radius: f64) -> Result<f64> {
    if center.len() != model.p {
        return Err(Error::DimensionMismatch { expected: model.p, actual: center.len() });
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    let v = model.posterior_variance();
    let sd = v.sqrt();
    let log_full_1d = 0.5 * (2.0 * std::f64::consts::PI * v).ln();
    let mode = model.mode();
    let mut total = 0.0;
    for (c, mhat) in center.iter().zip(&mode) {
        let lo = (c - radius - mhat) / sd;
        let hi = (c + radius - mhat) / sd;
        let mass = if (lo + hi).abs() <= f64::EPSILON * hi.abs().max(1.0) {
            normal_central_mass(hi)
        } else if lo >= 0.0 {
            normal_cdf(-lo) - normal_cdf(-hi)
        } else {
            normal_cdf(hi) - normal_cdf(lo)
        };
        total += log_full_1d + mass.ln();
    }
    Ok(total)
}
