//! Evaluators for the error bounds of truncated MC and QMC integration:
//! truncation error, MC concentration tails and rates, the Hardy–Krause
//! variation bound, the Koksma–Hlawka product, QMC rates and the MC-vs-QMC
//! crossover ratios.
//!
//! Everything is evaluated on the log scale. Envelopes stated only up to a
//! constant are evaluated with constant 1 and carry the `rate_only` flag;
//! bounds with explicit constants use them verbatim.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::discrepancy::DiscrepancyReport;
use crate::error::{Error, Result};
use crate::integrate::{TSpec, TruncationPolicy};
use crate::model::CurvatureMeta;
use crate::numerics::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    TruncationAbs,
    TruncationRel,
    McTailAbs,
    McTailRel,
    McRateAbs,
    McRateRel,
    QmcRateAbs,
    QmcRateRel,
    HkVariation,
    KhProduct,
    Crossover,
    Lipschitz,
    L2TruncationAbs,
    L2TruncationRel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[default]
    FixedP,
    HighDim,
    GaussianSpecial,
    /// Fixed-integrand comparison `log(m)^p / √m`; crossover only.
    Classical,
}

/// A named factor or summand of a bound, on the log scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub log_value: f64,
}

impl Component {
    fn new(name: &str, log_value: f64) -> Self {
        Component { name: name.to_string(), log_value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub log_value: f64,
    /// Factors (multiplicative kinds) or summands (HK variation) that compose `value`.
    pub components: Vec<Component>,
    /// Quantities reported alongside the bound that do not enter `value`,
    /// e.g. the failure probability of a high-probability rate.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub extras: Vec<Component>,
    pub regime: Regime,
    pub flags: Vec<String>,
}

impl BoundReport {
    fn from_log(kind: BoundKind, regime: Regime, log_value: f64, components: Vec<Component>) -> Self {
        BoundReport {
            kind,
            value: log_value.exp(),
            log_value,
            components,
            extras: Vec::new(),
            regime,
            flags: Vec::new(),
        }
    }

    fn flag(mut self, f: &str) -> Self {
        self.flags.push(f.to_string());
        self
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|c| c.name == name).map(|c| c.log_value)
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.iter().find(|c| c.name == name).map(|c| c.log_value)
    }
}

pub const FLAG_RATE_ONLY: &str = "rate_only";
pub const FLAG_EXCLUDES_H: &str = "excludes_h_term";
pub const FLAG_CASE2_EMPTY: &str = "case2_empty_p_lt_3";
pub const FLAG_ABS_FROM_REL: &str = "abs_scaled_from_rel";

fn require_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::invalid(format!("n must be >= {min}, got {n}")));
    }
    Ok(())
}

fn require_m(m: usize, min: usize) -> Result<()> {
    if m < min {
        return Err(Error::invalid(format!("m must be >= {min}, got {m}")));
    }
    Ok(())
}

fn require_p(p: usize, min: usize) -> Result<()> {
    if p < min {
        return Err(Error::invalid(format!("p must be >= {min}, got {p}")));
    }
    Ok(())
}

fn t_of(n: usize, meta: &CurvatureMeta, t_spec: TSpec) -> Result<f64> {
    let t = t_spec.value(n as f64, meta);
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t(n) must be positive and finite, got {t}")));
    }
    Ok(t)
}

/// Truncation-error envelope outside the `γ_n` ball:
/// relative `exp(−min{n^ε, p t(n)/2})`, absolute additionally `n^{−p/2}`.
pub fn truncation_error_bound(
    n: usize,
    p: usize,
    meta: &CurvatureMeta,
    t_spec: TSpec,
    relative: bool,
) -> Result<BoundReport> {
    require_n(n, 2)?;
    require_p(p, 1)?;
    meta.validate()?;
    let t = t_of(n, meta, t_spec)?;
    let nf = n as f64;
    let exponent = -(nf.powf(meta.epsilon)).min(p as f64 * t / 2.0);
    let mut comps = vec![Component::new("tail", exponent)];
    let (kind, log_value) = if relative {
        (BoundKind::TruncationRel, exponent)
    } else {
        let scale = -0.5 * p as f64 * nf.ln();
        comps.push(Component::new("n_scaling", scale));
        (BoundKind::TruncationAbs, exponent + scale)
    };
    Ok(BoundReport::from_log(kind, Regime::FixedP, log_value, comps).flag(FLAG_RATE_ONLY))
}

/// Which displayed form of the MC concentration tail to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TailForm {
    /// Tail as stated in the MC theorems.
    #[default]
    Theorem,
    /// The Lipschitz concentration inequality the corollaries are derived
    /// from; its absolute fixed-p form lacks the leading 1/4.
    Concentration,
}

/// Coefficient `K` with `P(error > ζ) <= 2 exp(−K ζ²)`.
#[allow(clippy::too_many_arguments)]
pub fn mc_tail_coefficient(
    n: usize,
    m: usize,
    p: usize,
    meta: &CurvatureMeta,
    t_spec: TSpec,
    regime: Regime,
    form: TailForm,
    relative: bool,
) -> Result<f64> {
    require_n(n, 2)?;
    require_m(m, 1)?;
    require_p(p, 1)?;
    meta.validate()?;
    let t = t_of(n, meta, t_spec)?;
    let (nf, mf, pf) = (n as f64, m as f64, p as f64);
    let (e1, e2) = (meta.eta1, meta.eta2);
    let ln_t_pow = (pf + 1.0) * t.ln();
    let ln_k = match (regime, relative) {
        (Regime::FixedP, false) => {
            let quarter = if form == TailForm::Concentration { 0.0 } else { -(4f64.ln()) };
            quarter + e1.ln() + (pf - 2.0) * e2.ln() + mf.ln() + (pf - 1.0) * nf.ln()
                - pf * 4f64.ln()
                - ln_t_pow
                - pf.ln()
        }
        (Regime::FixedP, true) => {
            -(4f64.ln()) + pf * (2.0 * PI / 4.0).ln() + e1.ln() + (2.0 * pf - 2.0) * e2.ln() + mf.ln()
                - ln_t_pow
                - nf.ln()
                - pf.ln()
        }
        (Regime::HighDim, false) => {
            -pf * 4f64.ln() + e1.ln() + (pf - 2.0) * e2.ln() + mf.ln() + (pf - 1.0) * nf.ln()
                - ln_t_pow
                - (pf + 2.0) * pf.ln()
        }
        (Regime::HighDim, true) => {
            -(4f64.ln()) + pf * (2.0 * PI / 4.0).ln() + e1.ln() + (2.0 * pf - 2.0) * e2.ln() + mf.ln()
                - ln_t_pow
                - nf.ln()
                - (pf + 2.0) * pf.ln()
        }
        (r, _) => return Err(Error::invalid(format!("MC tail bound has no {r:?} regime"))),
    };
    Ok(ln_k.exp())
}

/// `P(error > ζ) <= 2 exp(−K ζ²)`, clamped to `[0, 1]`. The additive
/// `h(δ, n, p)` term has no constructive form and is omitted (flagged).
#[allow(clippy::too_many_arguments)]
pub fn mc_tail_bound(
    zeta: f64,
    n: usize,
    m: usize,
    p: usize,
    meta: &CurvatureMeta,
    t_spec: TSpec,
    regime: Regime,
    form: TailForm,
    relative: bool,
) -> Result<BoundReport> {
    if !(zeta > 0.0) {
        return Err(Error::invalid("zeta must be positive"));
    }
    let k = mc_tail_coefficient(n, m, p, meta, t_spec, regime, form, relative)?;
    let exponent = -k * zeta * zeta;
    let log_value = (LN_2 + exponent).min(0.0);
    let kind = if relative { BoundKind::McTailRel } else { BoundKind::McTailAbs };
    let comps = vec![Component::new("prefactor", LN_2), Component::new("exponential", exponent)];
    let mut r = BoundReport::from_log(kind, regime, log_value, comps).flag(FLAG_EXCLUDES_H);
    if log_value == 0.0 {
        r = r.flag("clamped_to_one");
    }
    Ok(r)
}

/// Threshold `ζ` at which the tail bound equals `prob`.
#[allow(clippy::too_many_arguments)]
pub fn mc_tail_threshold(
    prob: f64,
    n: usize,
    m: usize,
    p: usize,
    meta: &CurvatureMeta,
    t_spec: TSpec,
    regime: Regime,
    form: TailForm,
    relative: bool,
) -> Result<f64> {
    if !(prob > 0.0 && prob < 2.0) {
        return Err(Error::invalid("probability must lie in (0, 2)"));
    }
    let k = mc_tail_coefficient(n, m, p, meta, t_spec, regime, form, relative)?;
    Ok(((2.0 / prob).ln() / k).sqrt())
}

/// High-probability MC error rate with the explicit constants:
///
/// - relative: `c_p (4/2π)^{p/2} (η₂/η₁)^{3/2} √(n log(n)^{p+1} log(m) / m)` with
///   `c_p = 2√p` (fixed p) or `2 p^{p/2+1}` (high dim);
/// - absolute: `2^p s_p (η₂/η₁)^{3/2} √(log(n)^{p+1} log(m) / (n^{p−1} m))` with
///   `s_p = √p` or `p^{p/2+1}`.
///
/// Holds with probability `1 − 2/m` (reported in `extras`).
pub fn mc_error_rate(
    n: usize,
    m: usize,
    p: usize,
    meta: &CurvatureMeta,
    regime: Regime,
    relative: bool,
) -> Result<BoundReport> {
    require_n(n, 3)?;
    require_m(m, 3)?;
    require_p(p, 1)?;
    meta.validate()?;
    let (nf, mf, pf) = (n as f64, m as f64, p as f64);
    let ln_p_factor = match regime {
        Regime::FixedP => 0.5 * pf.ln(),
        Regime::HighDim => (pf / 2.0 + 1.0) * pf.ln(),
        r => return Err(Error::invalid(format!("MC rate has no {r:?} regime"))),
    };
    let ln_eta = 1.5 * (meta.eta2 / meta.eta1).ln();
    let ln_logs = (pf + 1.0) * nf.ln().ln() + mf.ln().ln() - mf.ln();
    let (kind, prefactor, rate) = if relative {
        (
            BoundKind::McRateRel,
            LN_2 + ln_p_factor + 0.5 * pf * (4.0 / (2.0 * PI)).ln() + ln_eta,
            0.5 * (nf.ln() + ln_logs),
        )
    } else {
        (BoundKind::McRateAbs, pf * LN_2 + ln_p_factor + ln_eta, 0.5 * (ln_logs - (pf - 1.0) * nf.ln()))
    };
    let comps = vec![Component::new("constant_prefactor", prefactor), Component::new("main", rate)];
    let mut r = BoundReport::from_log(kind, regime, prefactor + rate, comps).flag(FLAG_EXCLUDES_H);
    r.extras.push(Component::new("failure_probability", (2.0 / mf).ln()));
    Ok(r)
}

/// Largest `k` for which [`bell_number`] is exact in `u64`.
pub const BELL_MAX: usize = 25;

/// Bell number `B_k` via the Bell triangle.
pub fn bell_number(k: usize) -> Result<u64> {
    if k > BELL_MAX {
        return Err(Error::invalid(format!("bell_number supports k <= {BELL_MAX}, got {k}")));
    }
    // Rows hold values up to B_{k+1}, which overflows u64 at k = 25.
    let mut row: Vec<u128> = vec![1];
    for _ in 0..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let v = *next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    Ok(row[0] as u64)
}

/// `ln B_k` for any `k`, via the Bell triangle in log space.
pub fn ln_bell_number(k: usize) -> f64 {
    let mut row: Vec<f64> = vec![0.0];
    for _ in 0..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let v = crate::numerics::log_add(*next.last().unwrap(), x);
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// `ln ∏_{i=⌊p/2⌋}^{p} i`; `-inf` when the product contains zero (`p = 1`).
pub fn ln_upper_half_product(p: usize) -> f64 {
    (p / 2..=p).map(|i| (i as f64).ln()).sum()
}

/// Options for [`hk_variation_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HkOptions {
    /// Multiply the full-partition summand by `B_p`.
    pub bell_on_last_term: bool,
}

impl Default for HkOptions {
    fn default() -> Self {
        HkOptions { bell_on_last_term: true }
    }
}

/// Hardy–Krause variation bound of the rescaled likelihood on the cube of
/// half-width `gamma_prime`:
///
/// ```text
/// (2γ')^p { D √(η₂ p³ log n) / n^{p(p−1)−1/2}
///         + B_p D^{p−1} (η₂ π p)^{(p+2)/2} / (2^{(p−1)/2} n)
///         + B_p (D√π)^p ∏_{i=⌊p/2⌋}^{p} i }
/// ```
///
/// For `p < 3` the middle summand (subsets with `1 < |α| < p`) is empty and
/// is dropped.
pub fn hk_variation_bound(
    n: usize,
    p: usize,
    meta: &CurvatureMeta,
    gamma_prime: f64,
    opts: HkOptions,
) -> Result<BoundReport> {
    require_n(n, 2)?;
    require_p(p, 1)?;
    meta.validate()?;
    if !(gamma_prime > 0.0) {
        return Err(Error::invalid("gamma_prime must be positive"));
    }
    let (nf, pf) = (n as f64, p as f64);
    let d = meta.deriv_bound_d;
    let eta2 = meta.eta2;
    let ln_bell = ln_bell_number(p);

    let case1 = d.ln() + 0.5 * (eta2 * pf.powi(3) * nf.ln()).ln() - (pf * (pf - 1.0) - 0.5) * nf.ln();
    let case2 = if p >= 3 {
        ln_bell + (pf - 1.0) * d.ln() + 0.5 * (pf + 2.0) * (eta2 * PI * pf).ln() - 0.5 * (pf - 1.0) * LN_2 - nf.ln()
    } else {
        f64::NEG_INFINITY
    };
    let case3 =
        if opts.bell_on_last_term { ln_bell } else { 0.0 } + pf * (d * PI.sqrt()).ln() + ln_upper_half_product(p);
    let cube = pf * (2.0 * gamma_prime).ln();
    let log_value = cube + log_sum_exp(&[case1, case2, case3]);
    let comps = vec![
        Component::new("cube_factor", cube),
        Component::new("case1", case1),
        Component::new("case2", case2),
        Component::new("case3", case3),
    ];
    let mut r = BoundReport::from_log(BoundKind::HkVariation, Regime::FixedP, log_value, comps);
    if p < 3 {
        r = r.flag(FLAG_CASE2_EMPTY);
    }
    if !opts.bell_on_last_term {
        r = r.flag("no_bell_on_case3");
    }
    Ok(r)
}

/// Koksma–Hlawka product `D* · V_HK`.
pub fn kh_error_bound(hk: &BoundReport, dstar: &DiscrepancyReport) -> Result<BoundReport> {
    if !(hk.value >= 0.0) || !(dstar.value >= 0.0) {
        return Err(Error::invalid("Koksma–Hlawka factors must be nonnegative"));
    }
    let ln_d = dstar.value.ln();
    let log_value = hk.log_value + ln_d;
    let comps = vec![Component::new("hk_variation", hk.log_value), Component::new("star_discrepancy", ln_d)];
    let mut r = BoundReport::from_log(BoundKind::KhProduct, hk.regime, log_value, comps);
    r.flags.extend(hk.flags.iter().cloned());
    Ok(r)
}

/// Tuning constants for the QMC envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcOptions {
    /// Base `C` of the `C^p` factor in the high-dimensional rate and crossover.
    pub c_const: f64,
    /// Observation scale `σ` in the Gaussian-specialized rate.
    pub sigma: f64,
}

impl Default for QmcOptions {
    fn default() -> Self {
        QmcOptions { c_const: 1.0, sigma: 1.0 }
    }
}

/// QMC error-rate envelopes (unit constants):
///
/// - fixed p: relative `log(m)^p log(n)^{p/2} / m`, absolute × `n^{−p/2}`;
/// - high dim: relative `C^p (log(m)^p/m) p^{(3p+5)/2} log(n)^{p/2} / (log(p+1)^{p−1} n)`,
///   absolute `C^p (log(m)^p/m) p^{(3p+5)/2} / (log(p+1)^{p−1} n^{p/2+1})`;
/// - Gaussian: relative `(8e)^p log(m)^p log(p) p^{p/2+3/2} log(n)^{p/2} / (m n) · (1 + √(pπ)/(√2 σ³))^p`,
///   absolute × `n^{−p/2}`.
pub fn qmc_error_rate(
    n: usize,
    m: usize,
    p: usize,
    regime: Regime,
    relative: bool,
    opts: QmcOptions,
) -> Result<BoundReport> {
    require_n(n, 3)?;
    require_m(m, 3)?;
    require_p(p, 1)?;
    let (nf, mf, pf) = (n as f64, m as f64, p as f64);
    let ln_disc = pf * mf.ln().ln() - mf.ln();
    let kind = if relative { BoundKind::QmcRateRel } else { BoundKind::QmcRateAbs };
    let mut comps = vec![Component::new("discrepancy_rate", ln_disc)];
    let mut flags = vec![FLAG_RATE_ONLY];
    match regime {
        Regime::FixedP => {
            comps.push(Component::new("log_n_factor", 0.5 * pf * nf.ln().ln()));
            if !relative {
                comps.push(Component::new("n_scaling", -0.5 * pf * nf.ln()));
            }
        }
        Regime::HighDim => {
            if !(opts.c_const > 0.0) {
                return Err(Error::invalid("C must be positive"));
            }
            comps.push(Component::new("c_power", pf * opts.c_const.ln()));
            comps
                .push(Component::new("p_factor", 0.5 * (3.0 * pf + 5.0) * pf.ln() - (pf - 1.0) * (pf + 1.0).ln().ln()));
            if relative {
                comps.push(Component::new("n_factor", 0.5 * pf * nf.ln().ln() - nf.ln()));
            } else {
                comps.push(Component::new("n_factor", -(0.5 * pf + 1.0) * nf.ln()));
            }
        }
        Regime::GaussianSpecial => {
            require_p(p, 2)?;
            if !(opts.sigma > 0.0) {
                return Err(Error::invalid("sigma must be positive"));
            }
            comps.push(Component::new(
                "p_factor",
                pf * (8.0 * std::f64::consts::E).ln() + pf.ln().ln() + (0.5 * pf + 1.5) * pf.ln(),
            ));
            comps.push(Component::new("n_factor", 0.5 * pf * nf.ln().ln() - nf.ln()));
            let s3 = opts.sigma.powi(3);
            comps.push(Component::new("curvature_factor", pf * ((pf * PI).sqrt() / (2f64.sqrt() * s3)).ln_1p()));
            if !relative {
                comps.push(Component::new("n_scaling", -0.5 * pf * nf.ln()));
                flags.push(FLAG_ABS_FROM_REL);
            }
        }
        Regime::Classical => return Err(Error::invalid("classical regime applies to crossover only")),
    }
    let log_value = comps.iter().map(|c| c.log_value).sum();
    let mut r = BoundReport::from_log(kind, regime, log_value, comps);
    r.flags = flags.into_iter().map(String::from).collect();
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub qmc_wins: bool,
    pub ratio: f64,
    pub log_ratio: f64,
    pub regime: Regime,
}

/// `ln` of the QMC/MC rate ratio:
///
/// - fixed p: `log(m)^{p−1/2} / √(m n log n)`;
/// - classical: `log(m)^p / √m`;
/// - high dim: `C^p (log(m)^{p−1/2}/√m) p^{p+2} / (log(p+1)^p √(log n) n^{3/2})`.
pub fn crossover_log_ratio(n: usize, m: usize, p: usize, regime: Regime, c_const: f64) -> Result<f64> {
    require_n(n, 3)?;
    require_m(m, 3)?;
    require_p(p, 1)?;
    let (nf, mf, pf) = (n as f64, m as f64, p as f64);
    let lln_m = mf.ln().ln();
    Ok(match regime {
        Regime::FixedP => (pf - 0.5) * lln_m - 0.5 * (mf.ln() + nf.ln() + nf.ln().ln()),
        Regime::Classical => pf * lln_m - 0.5 * mf.ln(),
        Regime::HighDim => {
            if !(c_const > 0.0) {
                return Err(Error::invalid("C must be positive"));
            }
            pf * c_const.ln() + (pf - 0.5) * lln_m - 0.5 * mf.ln() + (pf + 2.0) * pf.ln()
                - pf * (pf + 1.0).ln().ln()
                - 0.5 * nf.ln().ln()
                - 1.5 * nf.ln()
        }
        Regime::GaussianSpecial => return Err(Error::invalid("no crossover for the gaussian_special regime")),
    })
}

/// QMC beats MC iff the rate ratio is below one.
pub fn crossover(n: usize, m: usize, p: usize, regime: Regime, c_const: f64) -> Result<Crossover> {
    let log_ratio = crossover_log_ratio(n, m, p, regime, c_const)?;
    Ok(Crossover { qmc_wins: log_ratio < 0.0, ratio: log_ratio.exp(), log_ratio, regime })
}

/// The crossover as a [`BoundReport`] with `value = ratio`.
pub fn crossover_report(n: usize, m: usize, p: usize, regime: Regime, c_const: f64) -> Result<BoundReport> {
    let c = crossover(n, m, p, regime, c_const)?;
    let mut r =
        BoundReport::from_log(BoundKind::Crossover, regime, c.log_ratio, vec![Component::new("ratio", c.log_ratio)])
            .flag(FLAG_RATE_ONLY);
    r.flags.push(format!("qmc_wins={}", c.qmc_wins));
    Ok(r)
}

/// Lipschitz constant of `exp{l(θ) − l(θ̂)}` on the truncation cube:
/// `η₂ √(t p n / η₁)` for `γ_n` and `p η₂ √(t n / η₁)` for `γ'_n`.
pub fn lipschitz_constant(
    n: usize,
    p: usize,
    meta: &CurvatureMeta,
    t_spec: TSpec,
    policy: TruncationPolicy,
) -> Result<BoundReport> {
    require_n(n, 1)?;
    require_p(p, 1)?;
    meta.validate()?;
    let t = t_of(n, meta, t_spec)?;
    let (nf, pf) = (n as f64, p as f64);
    let base = meta.eta2.ln() + 0.5 * (t * nf / meta.eta1).ln();
    let p_factor = match policy {
        TruncationPolicy::FixedP => 0.5 * pf.ln(),
        TruncationPolicy::HighDim => pf.ln(),
        TruncationPolicy::Custom => return Err(Error::invalid("lipschitz constant needs fixed_p or high_dim policy")),
    };
    let regime = if policy == TruncationPolicy::HighDim { Regime::HighDim } else { Regime::FixedP };
    let comps = vec![Component::new("curvature", base), Component::new("p_factor", p_factor)];
    Ok(BoundReport::from_log(BoundKind::Lipschitz, regime, base + p_factor, comps))
}

/// L² truncation envelope with decaying exponent: relative
/// `exp{−p t(n)/(2+ε)}` (times `(η₁/η₂)^p` for `γ'_n`), absolute × `n^{−p/2}`.
pub fn l2_truncation_bound(
    n: usize,
    p: usize,
    meta: &CurvatureMeta,
    t_spec: TSpec,
    policy: TruncationPolicy,
    relative: bool,
    eps: f64,
) -> Result<BoundReport> {
    require_n(n, 2)?;
    require_p(p, 1)?;
    meta.validate()?;
    if !(eps > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let t = t_of(n, meta, t_spec)?;
    let pf = p as f64;
    let mut comps = vec![Component::new("tail", -pf * t / (2.0 + eps))];
    let regime = match policy {
        TruncationPolicy::FixedP => Regime::FixedP,
        TruncationPolicy::HighDim => {
            comps.push(Component::new("curvature_ratio", pf * (meta.eta1 / meta.eta2).ln()));
            Regime::HighDim
        }
        TruncationPolicy::Custom => return Err(Error::invalid("l2 truncation bound needs fixed_p or high_dim policy")),
    };
    let kind = if relative {
        BoundKind::L2TruncationRel
    } else {
        comps.push(Component::new("n_scaling", -0.5 * pf * (n as f64).ln()));
        BoundKind::L2TruncationAbs
    };
    let log_value = comps.iter().map(|c| c.log_value).sum();
    Ok(BoundReport::from_log(kind, regime, log_value, comps).flag(FLAG_RATE_ONLY))
}
