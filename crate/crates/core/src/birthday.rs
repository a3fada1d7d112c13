//! Monte Carlo estimators for red/blue balls thrown into bins.
//!
//! `r = ⌈C·L^s⌉` red and `b = ⌈C·L^t⌉` blue balls (`s + t = 1`) land
//! uniformly in `L` bins. Event *H*: some bin holds both colours. Event *T*:
//! some bin holds exactly one red and exactly one blue ball.
//!
//! Each trial draws red and blue positions from two separate child streams,
//! so adding balls of either colour only appends draws. That couples runs
//! with different `C` and makes *H* monotone in `C` trial by trial.

use rand::{Rng, RngCore, SeedableRng};
use thiserror::Error;

use crate::math::ceil_tol;
use crate::seed::{derive, SimRng};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BirthdayError {
    #[error("bin count must be positive")]
    NoBins,
    #[error("exponent s = {0} must lie in (0, 1)")]
    BadExponent(f64),
    #[error("constant C = {0} must be positive and finite")]
    BadConstant(f64),
    #[error("both colours need at least one ball")]
    NoBalls,
    #[error("at least one trial is required")]
    NoTrials,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthdayParams {
    pub bins: usize,
    pub s: f64,
    pub t: f64,
    pub c: f64,
    pub red: usize,
    pub blue: usize,
}

impl BirthdayParams {
    /// Counts `⌈C·L^s⌉` and `⌈C·L^(1−s)⌉`.
    pub fn new(bins: usize, s: f64, c: f64) -> Result<Self, BirthdayError> {
        if bins == 0 {
            return Err(BirthdayError::NoBins);
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(BirthdayError::BadExponent(s));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(BirthdayError::BadConstant(c));
        }
        let t = 1.0 - s;
        let l = bins as f64;
        let red = ceil_tol(c * l.powf(s)).max(1);
        let blue = ceil_tol(c * l.powf(t)).max(1);
        Ok(Self { bins, s, t, c, red, blue })
    }

    /// Explicit ball counts; `s`, `t` and `C` are left as NaN.
    pub fn from_counts(bins: usize, red: usize, blue: usize) -> Result<Self, BirthdayError> {
        if bins == 0 {
            return Err(BirthdayError::NoBins);
        }
        if red == 0 || blue == 0 {
            return Err(BirthdayError::NoBalls);
        }
        Ok(Self { bins, s: f64::NAN, t: f64::NAN, c: f64::NAN, red, blue })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    /// Event H.
    pub any_shared_bin: bool,
    /// Event T.
    pub exclusive_pair_bin: bool,
}

fn throw(bins: usize, count: usize, rng: &mut SimRng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..count).map(|_| rng.gen_range(0..bins)).collect();
    v.sort_unstable();
    v
}

/// Runs of equal values as `(value, multiplicity)`.
fn runs(sorted: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut i = 0;
    std::iter::from_fn(move || {
        let &v = sorted.get(i)?;
        let start = i;
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
        Some((v, i - start))
    })
}

/// Throws one batch of balls and reports both events.
pub fn run_trial<R: RngCore + ?Sized>(p: &BirthdayParams, rng: &mut R) -> TrialOutcome {
    let mut red_rng = SimRng::seed_from_u64(rng.next_u64());
    let mut blue_rng = SimRng::seed_from_u64(rng.next_u64());
    let red = throw(p.bins, p.red, &mut red_rng);
    let blue = throw(p.bins, p.blue, &mut blue_rng);

    let mut out = TrialOutcome::default();
    let mut blue_runs = runs(&blue).peekable();
    for (bin, reds) in runs(&red) {
        while blue_runs.next_if(|&(b, _)| b < bin).is_some() {}
        if let Some(&(b, blues)) = blue_runs.peek() {
            if b == bin {
                out.any_shared_bin = true;
                if reds == 1 && blues == 1 {
                    out.exclusive_pair_bin = true;
                    break;
                }
            }
        }
    }
    out
}

/// A Bernoulli proportion with a 99% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub trials: usize,
    pub hits: usize,
    pub p: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn from_counts(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        let half_width = Z99 * (p * (1.0 - p) / trials as f64).sqrt();
        Self { trials, hits, p, half_width }
    }

    pub fn lower(&self) -> f64 {
        self.p - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.p + self.half_width
    }
}

/// Event H and event T estimates from the same throws.
///
/// Trial `k` uses the stream seeded with `derive(seed, [k])`.
pub fn estimate_events(
    p: &BirthdayParams,
    trials: usize,
    seed: u64,
) -> Result<(Estimate, Estimate), BirthdayError> {
    if trials == 0 {
        return Err(BirthdayError::NoTrials);
    }
    let (mut h, mut t) = (0, 0);
    for k in 0..trials {
        let mut rng = SimRng::seed_from_u64(derive(seed, &[k as u64]));
        let o = run_trial(p, &mut rng);
        h += o.any_shared_bin as usize;
        t += o.exclusive_pair_bin as usize;
    }
    Ok((Estimate::from_counts(h, trials), Estimate::from_counts(t, trials)))
}

pub fn estimate_prob_h(p: &BirthdayParams, trials: usize, seed: u64) -> Result<Estimate, BirthdayError> {
    estimate_events(p, trials, seed).map(|(h, _)| h)
}

pub fn estimate_prob_t(p: &BirthdayParams, trials: usize, seed: u64) -> Result<Estimate, BirthdayError> {
    estimate_events(p, trials, seed).map(|(_, t)| t)
}
