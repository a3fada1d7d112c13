//! Discrete-time radio model.
//!
//! Time advances in global units. Nodes awake in the same unit can talk:
//! under [`Medium::Broadcast`] everyone hears everyone, under
//! [`Medium::Interference`] a listener decodes only a lone transmitter, and
//! each unit is split into back-off slots where nodes flip a fair coin to
//! transmit or listen.
//!
//! The [`drift`](self::drift) functions model clocks running at bounded
//! relative speeds and check that two nodes awake in the same unit still
//! share half a step.

mod drift;
mod radio;

use thiserror::Error;

use crate::math::{ceil_log2, ceil_tol};
use crate::randsched::OffsetPattern;

pub use drift::{
    check_unit_overlap, drift_time_step, max_step_overlap, required_overlap, sample_phase,
    unit_length, DriftError, DriftParams,
};
pub use radio::{
    backoff_transmit_decision, default_backoff_rounds, resolve, step, Action, Medium, Message,
    RadioEvent, Reception,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("d must be at least 1")]
    ZeroD,
    #[error("set either n or beta")]
    NoSize,
    #[error("n = {0} is below 2")]
    TooFewNodes(usize),
    #[error("beta = {0} must be positive and finite")]
    BadBeta(f64),
    #[error("{name} = {value} must be positive")]
    NotPositive { name: &'static str, value: f64 },
    #[error("D must be at least 1")]
    ZeroRounds,
}

/// Bounded-drift settings; speeds are drawn per run in `[1, c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSpec {
    pub c: f64,
    pub tau_trans: f64,
}

/// Parameters of one simulated run.
///
/// `None` fields take the protocol's derived defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub d: usize,
    pub n: Option<usize>,
    pub beta: Option<f64>,
    /// Density constant of every block row.
    pub c: f64,
    /// Blocks per amplified round; `max(11, ⌈30/log₂ N⌉)` when unset.
    pub k: Option<usize>,
    /// Target minimum degree of the meeting graph.
    pub ell: usize,
    /// Synchronization rounds; `⌈log₂ n⌉ + 10` scaled by `d_multiplier` when unset.
    pub big_d: Option<usize>,
    pub d_multiplier: f64,
    /// Exponent `e` of the `⌈log₂ N⌉^(e−1)` amplification.
    pub tilde_exponent: u32,
    /// Block width as a multiple of `d`.
    pub width_factor: usize,
    pub exclusive: bool,
    pub backoff_rounds: Option<usize>,
    pub delta_tr: i64,
    pub offsets: OffsetPattern,
    pub drift: Option<DriftSpec>,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            d: 1024,
            n: None,
            beta: Some(0.5),
            c: 1.82,
            k: None,
            ell: 10,
            big_d: None,
            d_multiplier: 1.0,
            tilde_exponent: 2,
            width_factor: 4,
            exclusive: false,
            backoff_rounds: None,
            delta_tr: 0,
            offsets: OffsetPattern::Uniform,
            drift: None,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// An explicit `n` wins over `beta`; otherwise `n = ⌈d^β⌉`.
    pub fn resolve_n(&self) -> Result<usize, ConfigError> {
        match (self.n, self.beta) {
            (Some(n), _) => Ok(n),
            (None, Some(beta)) => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(ConfigError::BadBeta(beta));
                }
                Ok(ceil_tol((self.d as f64).powf(beta)))
            }
            (None, None) => Err(ConfigError::NoSize),
        }
    }

    /// `β = ln n / ln d`, as given or implied by `n`.
    pub fn resolve_beta(&self) -> Result<f64, ConfigError> {
        match (self.n, self.beta) {
            (None, Some(b)) => Ok(b),
            _ => {
                let n = self.resolve_n()?;
                Ok(if self.d > 1 { (n as f64).ln() / (self.d as f64).ln() } else { 1.0 })
            }
        }
    }

    pub fn medium(&self) -> Medium {
        if self.exclusive {
            Medium::Interference
        } else {
            Medium::Broadcast
        }
    }

    /// `⌈log₂ n⌉ + 10`, times the safety multiplier, unless `big_d` is set.
    pub fn rounds(&self) -> Result<usize, ConfigError> {
        let n = self.resolve_n()?;
        Ok(self
            .big_d
            .unwrap_or_else(|| ceil_tol((ceil_log2(n.max(1)) + 10) as f64 * self.d_multiplier).max(1)))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.d == 0 {
            return Err(ConfigError::ZeroD);
        }
        let n = self.resolve_n()?;
        if n < 2 {
            return Err(ConfigError::TooFewNodes(n));
        }
        for (name, value) in [
            ("c", self.c),
            ("d_multiplier", self.d_multiplier),
            ("ell", self.ell as f64),
            ("width_factor", self.width_factor as f64),
            ("tilde_exponent", self.tilde_exponent as f64),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::NotPositive { name, value });
            }
        }
        if let Some(k) = self.k {
            if k == 0 {
                return Err(ConfigError::NotPositive { name: "k", value: 0.0 });
            }
        }
        if let Some(r) = self.backoff_rounds {
            if r == 0 {
                return Err(ConfigError::NotPositive { name: "backoff_rounds", value: 0.0 });
            }
        }
        if let Some(drift) = self.drift {
            if drift.c.is_nan() || drift.c < 1.0 {
                return Err(ConfigError::NotPositive { name: "drift.c - 1", value: drift.c - 1.0 });
            }
            if drift.tau_trans.is_nan() || drift.tau_trans <= 0.0 {
                return Err(ConfigError::NotPositive { name: "drift.tau_trans", value: drift.tau_trans });
            }
        }
        if self.rounds()? == 0 {
            return Err(ConfigError::ZeroRounds);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_resolution() {
        let cfg = SimConfig { d: 1024, beta: Some(0.5), ..SimConfig::default() };
        assert_eq!(cfg.resolve_n(), Ok(32));
        assert_eq!(cfg.rounds(), Ok(15));
        let cfg = SimConfig { n: Some(7), ..cfg };
        assert_eq!(cfg.resolve_n(), Ok(7));
        assert!((cfg.resolve_beta().unwrap() - 7f64.ln() / 1024f64.ln()).abs() < 1e-12);
        let cfg = SimConfig { n: None, beta: None, ..cfg };
        assert_eq!(cfg.resolve_n(), Err(ConfigError::NoSize));
    }

    #[test]
    fn validation() {
        assert!(SimConfig::default().validate().is_ok());
        assert_eq!(SimConfig { d: 0, ..SimConfig::default() }.validate(), Err(ConfigError::ZeroD));
        assert_eq!(
            SimConfig { n: Some(1), ..SimConfig::default() }.validate(),
            Err(ConfigError::TooFewNodes(1))
        );
        assert!(SimConfig { c: -1.0, ..SimConfig::default() }.validate().is_err());
        assert_eq!(
            SimConfig { big_d: Some(0), ..SimConfig::default() }.validate(),
            Err(ConfigError::ZeroRounds)
        );
        let drift = Some(DriftSpec { c: 0.5, tau_trans: 1.0 });
        assert!(SimConfig { drift, ..SimConfig::default() }.validate().is_err());
    }
}
