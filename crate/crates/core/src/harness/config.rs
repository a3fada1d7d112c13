use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::netsim::{DriftSpec, SimConfig};
use crate::randsched::OffsetPattern;

/// Flat key-value settings file; every key mirrors a [`SimConfig`] field.
///
/// ```toml
/// d = 4096
/// beta = 0.5
/// exclusive = true
/// drift_c = 2.0
/// seed = 7
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub beta: Option<f64>,
    pub c: Option<f64>,
    pub k: Option<usize>,
    pub ell: Option<usize>,
    pub big_d: Option<usize>,
    pub d_multiplier: Option<f64>,
    pub tilde_exponent: Option<u32>,
    pub width_factor: Option<usize>,
    pub exclusive: Option<bool>,
    pub backoff_rounds: Option<usize>,
    pub delta_tr: Option<i64>,
    pub offsets: Option<OffsetPattern>,
    pub drift_c: Option<f64>,
    pub tau_trans: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid config file")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Keys set in `over` win; the rest fall back to `self`.
    pub fn merged(&self, over: &ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFile { $($f: over.$f.clone().or_else(|| self.$f.clone())),* } };
        }
        pick!(
            d, n, beta, c, k, ell, big_d, d_multiplier, tilde_exponent, width_factor, exclusive,
            backoff_rounds, delta_tr, offsets, drift_c, tau_trans, seed, trials
        )
    }

    /// `cfg` with every key present here replaced.
    pub fn apply(&self, mut cfg: SimConfig) -> SimConfig {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(d, c, ell, d_multiplier, tilde_exponent, width_factor, exclusive, delta_tr, offsets, seed);
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if self.beta.is_some() {
            cfg.beta = self.beta;
            if self.n.is_none() {
                cfg.n = None;
            }
        }
        if self.k.is_some() {
            cfg.k = self.k;
        }
        if self.big_d.is_some() {
            cfg.big_d = self.big_d;
        }
        if self.backoff_rounds.is_some() {
            cfg.backoff_rounds = self.backoff_rounds;
        }
        if let Some(c) = self.drift_c {
            let tau_trans = self.tau_trans.or(cfg.drift.map(|s| s.tau_trans)).unwrap_or(1.0);
            cfg.drift = Some(DriftSpec { c, tau_trans });
        } else if let (Some(t), Some(s)) = (self.tau_trans, cfg.drift.as_mut()) {
            s.tau_trans = t;
        }
        cfg
    }
}
