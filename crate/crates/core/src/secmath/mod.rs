//! Closed-form security machinery: the delay/power security condition, the
//! maximum tolerable adversarial power, probabilistic corruption sampling,
//! the binomial security probability and derived searches.
//!
//! Everything here is pure and reentrant; samplers take explicit seeds.

mod special;

pub use special::{beta_inc, ln_binomial_pmf, ln_gamma};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::CorruptionSpec;

/// Validator population mix: `(corruption probability, type frequency)`
/// pairs with frequencies summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    entries: Vec<(f64, f64)>,
}

impl Characterization {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("characterization must be non-empty"));
        }
        let mut total = 0.0;
        for &(q, c) in &entries {
            if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&c) {
                return Err(Error::domain("characterization entries must lie in [0,1]"));
            }
            total += c;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "type frequencies must sum to 1, got {total}"
            )));
        }
        Ok(Characterization { entries })
    }

    /// A single validator type corrupted with probability `q`.
    pub fn uniform(q: f64) -> Result<Self> {
        Characterization::new(vec![(q, 1.0)])
    }

    pub fn from_spec(spec: &CorruptionSpec) -> Result<Self> {
        match spec {
            CorruptionSpec::Value(p) => Characterization::uniform(*p),
            CorruptionSpec::Mixture(entries) => Characterization::new(entries.clone()),
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }
}

/// Decision of the security condition for a concrete `(beta, rho, delta, e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityVerdict {
    pub secure: bool,
    /// Left-hand side `f(beta) * rho * delta`; infinite at or past the pole.
    pub lhs: f64,
    /// Largest tolerable adversarial power for the same `(rho, delta, e)`.
    pub beta_max: f64,
}

/// `f(beta) = e * beta * (1 - beta) / (1 - beta * (1 + e))`.
///
/// Strictly increasing on `[0, 1/(1+e))` with `f(0) = 0` and a pole at
/// `1/(1+e)`.
pub fn f_beta(beta: f64, e: f64) -> Result<f64> {
    check_e(e)?;
    let pole = 1.0 / (1.0 + e);
    if !(0.0..1.0).contains(&beta) || beta >= pole {
        return Err(Error::domain(format!(
            "beta must lie in [0, {pole}), got {beta}"
        )));
    }
    Ok(e * beta * (1.0 - beta) / (1.0 - beta * (1.0 + e)))
}

/// Decide the security condition `e*beta < (1-beta) / (1 + (1-beta)*rho*delta)`.
pub fn is_secure(beta: f64, rho: f64, delta_s: f64, e: f64) -> Result<SecurityVerdict> {
    check_e(e)?;
    check_rho(rho)?;
    check_delta(delta_s)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [0,1), got {beta}")));
    }
    let pole = 1.0 / (1.0 + e);
    let lhs = if beta < pole {
        f_beta(beta, e)? * rho * delta_s
    } else {
        f64::INFINITY
    };
    Ok(SecurityVerdict {
        secure: lhs < 1.0,
        lhs,
        beta_max: beta_max(rho, delta_s, e)?,
    })
}

/// Largest adversarial power satisfying the security condition:
/// the relevant root of `C*b^2 - (C+1+e)*b + 1 = 0` with `C = e*rho*delta`.
///
/// Evaluated as `2 / (B + sqrt(B^2 - 4C))`, `B = C+1+e`, which is free of
/// cancellation for small `C` and yields the analytic limit `1/(1+e)` at
/// `delta = 0`.
pub fn beta_max(rho: f64, delta_s: f64, e: f64) -> Result<f64> {
    check_e(e)?;
    check_rho(rho)?;
    check_delta(delta_s)?;
    let c = e * rho * delta_s;
    let b = c + 1.0 + e;
    // discriminant = C^2 + 2C(e-1) + (1+e)^2 > 0 for e >= 1
    Ok(2.0 / (b + (b * b - 4.0 * c).sqrt()))
}

/// Marginal corruption probability `p* = sum c_i * q_i`.
pub fn effective_p_star(ch: &Characterization) -> f64 {
    ch.entries.iter().map(|&(q, c)| q * c).sum()
}

/// Run the corruption experiment: each of `n_val` validators draws a type
/// from the frequency distribution, then is corrupted with that type's
/// probability. Deterministic given the seed.
pub fn sample_corruption(n_val: u64, ch: &Characterization, seed: u64) -> (u64, f64) {
    assert!(n_val >= 1, "n_val must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corrupted = 0u64;
    if let [(q, _)] = ch.entries[..] {
        for _ in 0..n_val {
            if rng.gen::<f64>() < q {
                corrupted += 1;
            }
        }
    } else {
        for _ in 0..n_val {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut q = ch.entries[ch.entries.len() - 1].0;
            for &(qi, ci) in &ch.entries {
                acc += ci;
                if u < acc {
                    q = qi;
                    break;
                }
            }
            if rng.gen::<f64>() < q {
                corrupted += 1;
            }
        }
    }
    (corrupted, corrupted as f64 / n_val as f64)
}

/// Threshold above which the binomial CDF switches from direct log-space
/// summation to the deviance-anchored evaluation. The term recursion drifts
/// coherently with the number of summed increments and stays below 1e-10
/// relative error only up to about this size.
const BINOMIAL_SUM_LIMIT: u64 = 10_000;

/// Cumulative binomial `F(k; n, p)`, numerically stable up to `n = 10^9`.
pub fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    assert!(n >= 1, "n must be >= 1");
    assert!((0.0..=1.0).contains(&p), "p must lie in [0,1]");
    if k >= n {
        return 1.0;
    }
    if p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return 0.0; // k < n corrupted-count n occurs surely
    }
    if n <= BINOMIAL_SUM_LIMIT {
        binomial_cdf_sum(k, n, p)
    } else {
        binomial_cdf_large(k, n, p)
    }
}

/// Sum of pmf terms carried in log space, accumulated with Kahan summation.
fn binomial_cdf_sum(k: u64, n: u64, p: f64) -> f64 {
    let ln_odds = p.ln() - (1.0 - p).ln();
    let mut ln_term = n as f64 * (1.0 - p).ln();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..=k {
        let y = ln_term.exp() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        ln_term += ((n - i) as f64 / (i + 1) as f64).ln() + ln_odds;
    }
    sum.min(1.0)
}

/// Large-n evaluation: anchor one pmf term through its deviance form and
/// accumulate the geometric neighbor-ratio series toward the nearer tail.
/// The term count is bounded by a few dozen standard deviations, so this
/// stays fast and ~1e-12 accurate up to n = 10^9.
fn binomial_cdf_large(k: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    let mean = n as f64 * p;
    if (k as f64) < mean {
        // F = pmf(k) * (1 + r_k + r_k r_{k-1} + ...), descending
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut i = k;
        while i >= 1 {
            let r = i as f64 * q / ((n - i + 1) as f64 * p);
            term *= r;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            i -= 1;
        }
        (ln_binomial_pmf(k, n, p).exp() * sum).min(1.0)
    } else {
        // complement of the upper sum starting at k+1, ascending
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut i = k + 1;
        while i < n {
            let r = (n - i) as f64 * p / ((i + 1) as f64 * q);
            term *= r;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            i += 1;
        }
        (1.0 - ln_binomial_pmf(k + 1, n, p).exp() * sum).clamp(0.0, 1.0)
    }
}

/// `g(n) = floor(beta_max * n_val)`, the minimum number of corrupted
/// validators that threatens security.
pub fn nakamoto_coefficient(n_val: u64, rho: f64, delta_s: f64, e: f64) -> Result<u64> {
    if n_val < 1 {
        return Err(Error::domain("n_val must be >= 1"));
    }
    let bm = beta_max(rho, delta_s, e)?;
    Ok(((bm * n_val as f64).floor() as u64).min(n_val))
}

/// Probability that the sampled adversarial fraction stays within the
/// tolerable bound: `F(g(n); n_val, p*)`.
pub fn security_probability(n_val: u64, p_star: f64, rho: f64, delta_s: f64, e: f64) -> Result<f64> {
    if n_val < 1 {
        return Err(Error::domain("n_val must be >= 1"));
    }
    if !(0.0..=1.0).contains(&p_star) {
        return Err(Error::domain(format!("p_star must lie in [0,1], got {p_star}")));
    }
    let g = nakamoto_coefficient(n_val, rho, delta_s, e)?;
    Ok(binomial_cdf(g, n_val, p_star))
}

/// Concentration bound `2 * exp(-n * eps^2 / (3 p*))`, clamped to `[0, 1]`
/// for reporting.
pub fn chernoff_bound(n_val: u64, p_star: f64, eps: f64) -> Result<f64> {
    if !(p_star > 0.0 && p_star <= 1.0) {
        return Err(Error::domain(format!("p_star must lie in (0,1], got {p_star}")));
    }
    if !(0.0..1.0).contains(&eps) || eps >= p_star {
        return Err(Error::domain(format!(
            "eps must satisfy 0 <= eps < p_star, got eps={eps} p_star={p_star}"
        )));
    }
    let raw = 2.0 * (-(n_val as f64) * eps * eps / (3.0 * p_star)).exp();
    Ok(raw.min(1.0))
}

/// Upper bound on the delay under a network attack adding `nt_max_s`
/// seconds on top of the benign log fit: `max(a*ln(n) + b + nt, 0)`.
pub fn adversarial_delay(n: u64, fit: (f64, f64), nt_max_s: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("n must be >= 1"));
    }
    if nt_max_s < 0.0 {
        return Err(Error::domain("nt_max_s must be >= 0"));
    }
    let (a, b) = fit;
    Ok((a * (n as f64).ln() + b + nt_max_s).max(0.0))
}

/// Grid resolution used by [`turnaround`]: points per decade of `n`.
const TURNAROUND_POINTS_PER_DECADE: u32 = 20;

/// Scan a log-spaced grid of validator counts and return the one maximizing
/// the security probability, together with the peak value. Ties break
/// toward the larger `n`.
pub fn turnaround(
    p_star: f64,
    rho: f64,
    e: f64,
    delay_fn: impl Fn(u64) -> f64,
    n_range: (u64, u64),
) -> Result<(u64, f64)> {
    let (lo, hi) = n_range;
    if lo < 1 || lo > hi {
        return Err(Error::domain(format!("empty or invalid range [{lo}, {hi}]")));
    }
    let mut best_n = 0u64;
    let mut best_p = f64::NEG_INFINITY;
    for n in log_grid(lo, hi, TURNAROUND_POINTS_PER_DECADE) {
        let p = security_probability(n, p_star, rho, delay_fn(n), e)?;
        if p >= best_p {
            best_p = p;
            best_n = n;
        }
    }
    Ok((best_n, best_p))
}

/// Log-spaced integer grid over `[lo, hi]` including both endpoints.
pub fn log_grid(lo: u64, hi: u64, points_per_decade: u32) -> Vec<u64> {
    assert!(lo >= 1 && lo <= hi);
    let lg_lo = (lo as f64).log10();
    let lg_hi = (hi as f64).log10();
    let steps = ((lg_hi - lg_lo) * points_per_decade as f64).ceil() as u64;
    let mut out = Vec::with_capacity(steps as usize + 2);
    for j in 0..=steps {
        let lg = lg_lo + j as f64 / points_per_decade as f64;
        let n = (10f64.powf(lg)).round() as u64;
        out.push(n.clamp(lo, hi));
    }
    out.push(hi);
    out.dedup();
    out
}

/// Result of the maximum-tolerable-delay search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayBound {
    /// Every delay keeps the security probability above the target.
    Unbounded,
    /// Largest delay (seconds) meeting the target, to 1 ms.
    Bounded(f64),
    /// The target cannot be met even at zero delay.
    Unreachable,
}

impl DelayBound {
    /// Collapse to a number for CSV reporting: `inf`, the bound, or 0.
    pub fn as_seconds(self) -> f64 {
        match self {
            DelayBound::Unbounded => f64::INFINITY,
            DelayBound::Bounded(d) => d,
            DelayBound::Unreachable => 0.0,
        }
    }
}

/// Absolute tolerance of the delay bisection, in seconds (1 ms).
const DELAY_TOLERANCE_S: f64 = 1e-3;

/// Largest delay `D` such that `security_probability(n, p*, rho, D, e)`
/// stays at or above `target`, found by bisection to 1 ms.
pub fn max_tolerable_delay(
    n_val: u64,
    p_star: f64,
    rho: f64,
    e: f64,
    target: f64,
) -> Result<DelayBound> {
    if !(0.0 < target && target < 1.0) {
        return Err(Error::domain(format!("target must lie in (0,1), got {target}")));
    }
    // As delay grows the tolerable corrupted count falls to zero, so the
    // probability floor is F(0) = (1-p*)^n; above the target no delay hurts.
    let floor = binomial_cdf(0, n_val, p_star);
    if floor >= target {
        return Ok(DelayBound::Unbounded);
    }
    if security_probability(n_val, p_star, rho, 0.0, e)? < target {
        return Ok(DelayBound::Unreachable);
    }
    let mut hi = 1.0f64;
    while security_probability(n_val, p_star, rho, hi, e)? >= target {
        hi *= 2.0;
    }
    let mut lo = 0.0f64;
    while hi - lo > DELAY_TOLERANCE_S {
        let mid = 0.5 * (lo + hi);
        if security_probability(n_val, p_star, rho, mid, e)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DelayBound::Bounded(lo))
}

fn check_e(e: f64) -> Result<()> {
    if !(e >= 1.0) {
        return Err(Error::domain(format!("e must be >= 1, got {e}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) {
        return Err(Error::domain(format!("rho must be > 0, got {rho}")));
    }
    Ok(())
}

fn check_delta(delta_s: f64) -> Result<()> {
    if !(delta_s >= 0.0) {
        return Err(Error::domain(format!("delta must be >= 0, got {delta_s}")));
    }
    Ok(())
}

/// Published benign log-fit constants `(a, b)` in seconds per ln-unit for
/// the maximum delay of each chain; see `experiments::published_fits`.
#[cfg(test)]
pub(crate) const CARDANO_MAX_FIT: (f64, f64) = (3.65, -7.37);
