use std::collections::BTreeMap;

use thiserror::Error;

use crate::math::{ceil_log2, ceil_tol};
use crate::netsim::{ConfigError, SimConfig};
use crate::randsched::gen_offsets;
use crate::seed::{derive, rng_for, tag};

use super::params::{assign_ids, build_pipeline_matrix, default_rounds, PipelineParams};
use super::sync::{init_states, run_sync, SyncOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("the true n must be at least 1")]
    NoNodes,
    #[error("{remaining} nodes still undecided after the last guess")]
    Exhausted { remaining: usize },
}

/// One guess of the size-estimation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub index: usize,
    pub guess: usize,
    /// Nodes still running at the start of the epoch.
    pub active: usize,
    /// Nodes that accepted the guess.
    pub accepted: usize,
    /// Sizes of the groups sharing a maximum, largest first.
    pub tree_sizes: Vec<usize>,
    /// Global units `[start, end)` in which any node of the epoch can be awake.
    pub span: (usize, usize),
    /// Largest per-node cost within the epoch.
    pub max_cost: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    /// Guess accepted by the first group to terminate.
    pub estimate: usize,
    pub accepted_epoch: usize,
    /// Fraction of all nodes that terminated with `estimate`.
    pub synchronized_fraction: f64,
    /// Summed cost per node over the epochs it took part in.
    pub per_node_cost: Vec<usize>,
    pub epochs: Vec<EpochRecord>,
}

impl EstimateResult {
    pub fn total_max_cost(&self) -> usize {
        self.per_node_cost.iter().copied().max().unwrap_or(0)
    }

    /// Largest per-node cost in the accepting epoch.
    pub fn final_epoch_cost(&self) -> usize {
        self.epochs[self.accepted_epoch].max_cost
    }

    /// Whether consecutive epoch spans are separated.
    pub fn epochs_isolated(&self) -> bool {
        self.epochs.windows(2).all(|w| w[0].span.1 < w[1].span.0)
    }
}

/// Runs size estimation with `true_n` nodes that know only `d`.
///
/// Epoch `i` guesses `n_i = ⌈d/2^i⌉` and runs the full synchronization sized
/// for it: row density from `β_i = log_d n_i`, repetition counts and rounds
/// from `d` itself, the largest size the nodes could face. Each node then
/// counts the nodes that ended with its maximum; groups of at least `n_i`
/// stop with `n_i`, the rest move on. Epochs start more than `d` units apart
/// on every local clock so no two epochs share a global unit.
pub fn estimate_n(cfg: &SimConfig, true_n: usize) -> Result<EstimateResult, EstimateError> {
    if true_n == 0 {
        return Err(EstimateError::NoNodes);
    }
    let probe = SimConfig { n: Some(true_n.max(2)), ..cfg.clone() };
    probe.validate()?;

    let d = cfg.d;
    let ids = assign_ids(true_n, &mut rng_for(cfg.seed, &[tag::IDS]));
    let offsets = gen_offsets(true_n, d, cfg.offsets, &mut rng_for(cfg.seed, &[tag::OFFSETS]));
    let rounds = cfg.big_d.unwrap_or_else(|| ceil_tol(default_rounds(d) as f64 * cfg.d_multiplier).max(1));

    let mut active: Vec<usize> = (0..true_n).collect();
    let mut per_node_cost = vec![0; true_n];
    let mut decided: Vec<Option<usize>> = vec![None; true_n];
    let mut epochs = Vec::new();
    let mut epoch_start = 0;
    let mut first_accept = None;

    for index in 0..=ceil_log2(d) {
        if active.is_empty() {
            break;
        }
        let guess = d.div_ceil(1 << index).max(1);
        let beta = if d > 1 { (guess as f64).ln() / (d as f64).ln() } else { 1.0 };
        let mut params = PipelineParams::sized(cfg, guess, beta, d, rounds);
        params.n = active.len();
        let epoch_seed = derive(cfg.seed, &[tag::EPOCH, index as u64]);

        let starts: Vec<usize> = active.iter().map(|&v| offsets[v]).collect();
        let matrix = build_pipeline_matrix(&params, &starts, epoch_seed);
        let act_ids: Vec<u64> = active.iter().map(|&v| ids[v]).collect();
        let mut states = init_states(&act_ids, &starts, None);
        let opts = SyncOptions {
            medium: cfg.medium(),
            backoff_rounds: params.backoff_rounds,
            rounds,
            delta_tr: cfg.delta_tr,
            drift: None,
            time_origin: epoch_start,
            seed: epoch_seed,
        };
        let out = run_sync(&matrix, &mut states, &opts, None);

        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (slot, s) in states.iter().enumerate() {
            groups.entry(s.max_seen).or_default().push(slot);
        }
        let mut tree_sizes: Vec<usize> = groups.values().map(Vec::len).collect();
        tree_sizes.sort_unstable_by(|a, b| b.cmp(a));

        let mut accepted = 0;
        for members in groups.values().filter(|m| m.len() >= guess) {
            for &slot in members {
                decided[active[slot]] = Some(guess);
                accepted += 1;
            }
        }
        for (slot, &v) in active.iter().enumerate() {
            per_node_cost[v] += out.per_node_cost[slot];
        }
        if accepted > 0 && first_accept.is_none() {
            first_accept = Some((epochs.len(), guess));
        }
        let epoch_len = params.period_width() * rounds;
        epochs.push(EpochRecord {
            index,
            guess,
            active: active.len(),
            accepted,
            tree_sizes,
            span: (epoch_start, epoch_start + epoch_len + d),
            max_cost: out.per_node_cost.iter().copied().max().unwrap_or(0),
        });
        active.retain(|&v| decided[v].is_none());
        epoch_start += epoch_len + d + 1;
    }

    if !active.is_empty() {
        return Err(EstimateError::Exhausted { remaining: active.len() });
    }
    let (accepted_epoch, estimate) = first_accept.expect("every node decided");
    let agreeing = decided.iter().filter(|&&g| g == Some(estimate)).count();
    Ok(EstimateResult {
        estimate,
        accepted_epoch,
        synchronized_fraction: agreeing as f64 / true_n as f64,
        per_node_cost,
        epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_population_accepts_first_guess() {
        let cfg = SimConfig { d: 16, seed: 1, ..SimConfig::default() };
        let r = estimate_n(&cfg, 16).unwrap();
        assert_eq!((r.accepted_epoch, r.estimate), (0, 16));
        assert_eq!(r.synchronized_fraction, 1.0);
        assert_eq!(r.epochs.len(), 1);
    }

    #[test]
    fn small_population_descends() {
        let cfg = SimConfig { d: 256, seed: 5, ..SimConfig::default() };
        let r = estimate_n(&cfg, 16).unwrap();
        assert!(r.estimate >= 8 && r.estimate <= 32, "{r:?}");
        assert!(r.synchronized_fraction >= 8.0 / 9.0);
        assert!(r.epochs_isolated());
        let guesses: Vec<_> = r.epochs.iter().map(|e| e.guess).collect();
        assert_eq!(&guesses[..5], &[256, 128, 64, 32, 16][..guesses.len().min(5)]);
        assert!(r.total_max_cost() <= 4 * r.final_epoch_cost());
    }

    #[test]
    fn rejects_empty_population() {
        assert_eq!(estimate_n(&SimConfig::default(), 0), Err(EstimateError::NoNodes));
    }
}
