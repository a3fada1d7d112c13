use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriftError {
    #[error("no clock speeds given")]
    NoNodes,
    #[error("clock speed {0} must be positive and finite")]
    BadSpeed(f64),
    #[error("speed ratio {ratio} exceeds the bound c = {c}")]
    RatioTooLarge { ratio: f64, c: f64 },
    #[error("c = {0} must be at least 1")]
    BadRatioBound(f64),
    #[error("transmission time {0} must be positive")]
    BadTransmission(f64),
}

/// Clock speeds with a bounded ratio.
///
/// Node `i` ticks `τ_i` times per unit of global time and counts
/// `k_i = 2cτ_iτ_trans` ticks as one step.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftParams {
    pub speeds: Vec<f64>,
    pub c: f64,
    pub tau_trans: f64,
}

impl DriftParams {
    pub fn new(speeds: Vec<f64>, c: f64, tau_trans: f64) -> Result<Self, DriftError> {
        if speeds.is_empty() {
            return Err(DriftError::NoNodes);
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(DriftError::BadRatioBound(c));
        }
        if !(tau_trans > 0.0 && tau_trans.is_finite()) {
            return Err(DriftError::BadTransmission(tau_trans));
        }
        if let Some(&bad) = speeds.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
            return Err(DriftError::BadSpeed(bad));
        }
        let (lo, hi) = min_max(&speeds);
        let ratio = hi / lo;
        if ratio > c * (1.0 + 1e-12) {
            return Err(DriftError::RatioTooLarge { ratio, c });
        }
        Ok(Self { speeds, c, tau_trans })
    }

    /// Speeds uniform in `[1, c]`.
    pub fn random<R: Rng + ?Sized>(n: usize, c: f64, tau_trans: f64, rng: &mut R) -> Result<Self, DriftError> {
        let speeds = (0..n).map(|_| if c > 1.0 { rng.gen_range(1.0..=c) } else { 1.0 }).collect();
        Self::new(speeds, c, tau_trans)
    }

    pub fn n(&self) -> usize {
        self.speeds.len()
    }

    /// Ticks `k_i` per step.
    pub fn ticks_per_step(&self, i: usize) -> f64 {
        2.0 * self.c * self.speeds[i] * self.tau_trans
    }

    pub fn s_max(&self) -> f64 {
        (0..self.n()).map(|i| drift_time_step(self, i)).fold(0.0, f64::max)
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Global duration `s_i` of one step of node `i`: `k_i` ticks of `1/τ_i`.
pub fn drift_time_step(p: &DriftParams, i: usize) -> f64 {
    p.ticks_per_step(i) / p.speeds[i]
}

/// Length `5·s_max` of one global time unit.
pub fn unit_length(p: &DriftParams) -> f64 {
    5.0 * p.s_max()
}

/// Longest intersection of one complete step of each node inside a unit.
///
/// Node `i` starts at `zeta_i ∈ [0, s_i)` and works in back-to-back steps of
/// length `s_i`; only steps ending by `unit` count.
pub fn max_step_overlap(s_i: f64, zeta_i: f64, s_j: f64, zeta_j: f64, unit: f64) -> f64 {
    let steps = |s: f64, z: f64| {
        let count = ((unit - z) / s + 1e-12).floor().max(0.0) as usize;
        (0..count).map(move |a| (z + a as f64 * s, z + (a + 1) as f64 * s))
    };
    let mut best = 0.0_f64;
    for (a0, a1) in steps(s_i, zeta_i) {
        for (b0, b1) in steps(s_j, zeta_j) {
            best = best.max(a1.min(b1) - a0.max(b0));
        }
    }
    best
}

/// [`max_step_overlap`] for nodes `i` and `j` of `p`.
pub fn check_unit_overlap(p: &DriftParams, i: usize, j: usize, zeta_i: f64, zeta_j: f64) -> f64 {
    max_step_overlap(drift_time_step(p, i), zeta_i, drift_time_step(p, j), zeta_j, unit_length(p))
}

/// The threshold `min(s_i, s_j)/2` a meeting needs.
pub fn required_overlap(p: &DriftParams, i: usize, j: usize) -> f64 {
    drift_time_step(p, i).min(drift_time_step(p, j)) / 2.0
}

/// Start phase of node `i` inside a unit, uniform in `[0, s_i)`.
pub fn sample_phase<R: Rng + ?Sized>(p: &DriftParams, i: usize, rng: &mut R) -> f64 {
    rng.gen_range(0.0..drift_time_step(p, i))
}
