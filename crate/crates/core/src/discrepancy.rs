//! Local and star discrepancy of point sets, and explicit / asymptotic upper
//! bounds for the star discrepancy of Halton sets.
//!
//! Star discrepancy here is `sup_a |δ(a)|` over anchored boxes `[0, a)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_factorial, log_add};
use crate::sequences::{first_n_primes, nth_prime, PointSet};

/// Default cap on `m^p · m · p` for the brute-force search.
pub const DEFAULT_WORK_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyMethod {
    ExactBruteForce,
    Exact1d,
    AtanassovBound,
    AsymptoticBound,
}

impl DiscrepancyMethod {
    pub fn is_exact(self) -> bool {
        matches!(self, DiscrepancyMethod::ExactBruteForce | DiscrepancyMethod::Exact1d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub value: f64,
    pub method: DiscrepancyMethod,
    pub m: usize,
    pub p: usize,
    /// Maximizing anchor; present only for exact methods.
    pub witness: Option<Vec<f64>>,
}

/// `δ(a) = #{x_i ∈ [0,a)}/m − ∏ a_j`.
pub fn local_discrepancy(ps: &PointSet, a: &[f64]) -> Result<f64> {
    if a.len() != ps.p() {
        return Err(Error::DimensionMismatch { expected: ps.p(), actual: a.len() });
    }
    if let Some(bad) = a.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
        return Err(Error::invalid(format!("anchor coordinates must lie in (0,1], got {bad}")));
    }
    let inside = ps.rows().filter(|x| x.iter().zip(a).all(|(xi, ai)| xi < ai)).count();
    let vol: f64 = a.iter().product();
    Ok(inside as f64 / ps.m() as f64 - vol)
}

/// Closed form for `p = 1`: `max_i max(i/m − x_(i), x_(i) − (i−1)/m)` over
/// the sorted coordinates.
pub fn star_discrepancy_1d(ps: &PointSet) -> Result<DiscrepancyReport> {
    if ps.p() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, actual: ps.p() });
    }
    let m = ps.m();
    let mut xs = ps.as_slice().to_vec();
    xs.sort_by(f64::total_cmp);
    let mf = m as f64;
    let mut best = f64::NEG_INFINITY;
    let mut witness = 1.0;
    for (k, &x) in xs.iter().enumerate() {
        let i = (k + 1) as f64;
        let cand = (i / mf - x).max(x - (i - 1.0) / mf);
        if cand > best {
            best = cand;
            witness = x;
        }
    }
    Ok(DiscrepancyReport { value: best, method: DiscrepancyMethod::Exact1d, m, p: 1, witness: Some(vec![witness]) })
}

/// Work estimate `m^p · m · p` used for the budget check.
pub fn brute_force_work(m: usize, p: usize) -> f64 {
    (m as f64).powi(p as i32) * m as f64 * p as f64
}

#[derive(Debug, Clone)]
struct Best {
    value: f64,
    anchor: Vec<f64>,
}

impl Best {
    fn none() -> Self {
        Best { value: f64::NEG_INFINITY, anchor: Vec::new() }
    }

    fn offer(&mut self, value: f64, anchor: &[f64]) {
        if value > self.value {
            self.value = value;
            self.anchor.clear();
            self.anchor.extend_from_slice(anchor);
        }
    }
}

struct Search<'a> {
    ps: &'a PointSet,
    candidates: Vec<Vec<f64>>,
}

impl Search<'_> {
    /// Depth-first walk of the critical-box grid. `closed` holds points with
    /// `x_j <= a_j` in the dimensions fixed so far, `open` those with `x_j < a_j`.
    fn walk(&self, dim: usize, closed: &[usize], open: &[usize], vol: f64, anchor: &mut Vec<f64>, best: &mut Best) {
        let p = self.ps.p();
        let mf = self.ps.m() as f64;
        if dim == p {
            let over = closed.len() as f64 / mf - vol;
            let under = vol - open.len() as f64 / mf;
            best.offer(over.max(under), anchor);
            return;
        }
        let mut next_closed = Vec::with_capacity(closed.len());
        let mut next_open = Vec::with_capacity(open.len());
        for &c in &self.candidates[dim] {
            next_closed.clear();
            next_closed.extend(closed.iter().copied().filter(|&i| self.ps.row(i)[dim] <= c));
            next_open.clear();
            next_open.extend(open.iter().copied().filter(|&i| self.ps.row(i)[dim] < c));
            anchor.push(c);
            self.walk(dim + 1, &next_closed, &next_open, vol * c, anchor, best);
            anchor.pop();
        }
    }
}

/// Exact star discrepancy with the default work budget.
pub fn star_discrepancy_exact(ps: &PointSet) -> Result<DiscrepancyReport> {
    star_discrepancy_exact_with_budget(ps, DEFAULT_WORK_BUDGET)
}

/// Exact star discrepancy by enumerating the critical-box grid (coordinates
/// drawn from the points and 1). Each grid anchor is scored with both the
/// closed count (`x <= a`, the limit from above) and the strict count
/// (`x < a`), which together attain the supremum over half-open boxes.
///
/// The top-level dimension is split across threads; the reduction keeps the
/// first maximum in lexicographic anchor order, so the witness does not
/// depend on the thread count.
pub fn star_discrepancy_exact_with_budget(ps: &PointSet, budget: f64) -> Result<DiscrepancyReport> {
    let (m, p) = (ps.m(), ps.p());
    let required = brute_force_work(m, p);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let candidates: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut c: Vec<f64> = ps.rows().map(|r| r[j]).collect();
            c.push(1.0);
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let search = Search { ps, candidates };
    let all: Vec<usize> = (0..m).collect();

    let per_top: Vec<Best> = search.candidates[0]
        .par_iter()
        .map(|&c| {
            let closed: Vec<usize> = all.iter().copied().filter(|&i| ps.row(i)[0] <= c).collect();
            let open: Vec<usize> = all.iter().copied().filter(|&i| ps.row(i)[0] < c).collect();
            let mut best = Best::none();
            let mut anchor = vec![c];
            search.walk(1, &closed, &open, c, &mut anchor, &mut best);
            best
        })
        .collect();

    let mut best = Best::none();
    for b in &per_top {
        best.offer(b.value, &b.anchor);
    }
    Ok(DiscrepancyReport {
        value: best.value.clamp(0.0, 1.0),
        method: DiscrepancyMethod::ExactBruteForce,
        m,
        p,
        witness: Some(best.anchor),
    })
}

/// Natural log of the explicit Halton bound on `m · D*` for the first `m`
/// points in the first `p` prime bases.
fn ln_halton_bound_times_m(m: usize, p: usize) -> f64 {
    let ln_m = (m as f64).ln();
    let c = first_n_primes(p);
    let pf = p as f64;

    let mut first = pf * std::f64::consts::LN_2 - ln_factorial(p as u64);
    for &ci in &c {
        let cf = ci as f64;
        first += ((cf - 1.0) * ln_m / (2.0 * cf.ln()) + pf).ln();
    }

    // c_1 + Σ_{k=1}^{p-1} (c_{k+1}/k!) Π_{i=1}^{k} (⌊c_i/2⌋ ln m / ln c_i + k)
    let mut inner = (c[0] as f64).ln();
    for k in 1..p {
        let kf = k as f64;
        let mut term = (c[k] as f64).ln() - ln_factorial(k as u64);
        for &ci in &c[..k] {
            let cf = ci as f64;
            term += ((ci / 2) as f64 * ln_m / cf.ln() + kf).ln();
        }
        inner = log_add(inner, term);
    }
    let second = pf * std::f64::consts::LN_2 + inner;
    log_add(first, second)
}

/// Explicit upper bound on the star discrepancy of the first `m` Halton
/// points in dimension `p`, evaluated in log space. May exceed 1.
pub fn halton_bound_explicit(m: usize, p: usize) -> Result<DiscrepancyReport> {
    if m < 2 || p == 0 {
        return Err(Error::invalid("halton_bound_explicit requires m >= 2 and p >= 1"));
    }
    let value = (ln_halton_bound_times_m(m, p) - (m as f64).ln()).exp();
    Ok(DiscrepancyReport { value, method: DiscrepancyMethod::AtanassovBound, m, p, witness: None })
}

/// Rate-only envelope `(4e)^p p^{3/2} log(p) log(m)^p / m` (unit constant).
pub fn halton_bound_asymptotic(m: usize, p: usize) -> Result<f64> {
    if m < 3 || p < 2 {
        return Err(Error::invalid("halton_bound_asymptotic requires m >= 3 and p >= 2"));
    }
    Ok(halton_bound_asymptotic_real(m as f64, p))
}

/// Same envelope with a real-valued point count.
pub fn halton_bound_asymptotic_real(m: f64, p: usize) -> f64 {
    let pf = p as f64;
    let ln_val = pf * (4.0 * std::f64::consts::E).ln() + 1.5 * pf.ln() + pf.ln().ln() + pf * m.ln().ln() - m.ln();
    ln_val.exp()
}

/// Rosser-type bounds on the `j`-th prime: `j ln j <= c_j` for all `j`, and
/// `c_j <= j ln j + j ln ln j + 2` checked for `j >= 3` (where `ln ln j > 0`).
pub fn prime_bounds_check(j: usize) -> Result<bool> {
    let c = nth_prime(j)? as f64;
    let jf = j as f64;
    let lower_ok = jf * jf.ln() <= c;
    let upper_ok = if j >= 3 { c <= jf * jf.ln() + jf * jf.ln().ln() + 2.0 } else { true };
    Ok(lower_ok && upper_ok)
}
