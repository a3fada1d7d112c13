use std::collections::HashSet;

use rand::Rng;

use crate::bitstrings::BitSchedule;
use crate::math::{ceil_log2, ceil_tol};
use crate::netsim::{default_backoff_rounds, ConfigError, SimConfig};
use crate::randsched::{density_for, ScheduleMatrix};
use crate::seed::{rng_for, tag};

/// Every size the pipeline derives from a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub d: usize,
    pub n: usize,
    /// `max(log₂(n − 1), 1)`, the `log N` of the block counts.
    pub log_n: f64,
    /// Exponent of the row density, `(1 − β)/2` clamped to `[0, 1/2]`.
    pub alpha: f64,
    /// Width `L` of one block.
    pub block_width: usize,
    /// Ones drawn per block row, `⌈C·L^α⌉`.
    pub ones_per_block: usize,
    pub k: usize,
    /// Blocks per amplified round, `⌈K·log N⌉`.
    pub blocks_per_hat: usize,
    /// Amplified rounds per period, `⌈log N⌉^(e−1)`.
    pub hats: usize,
    /// Period copies run by the synchronization, `D`.
    pub rounds: usize,
    pub backoff_rounds: usize,
}

impl PipelineParams {
    /// Sizes for `cfg` with its own `n`.
    pub fn new(cfg: &SimConfig) -> Result<Self, ConfigError> {
        let n = cfg.resolve_n()?;
        let beta = cfg.resolve_beta()?;
        let rounds = cfg.rounds()?;
        Ok(Self::sized(cfg, n, beta, n, rounds))
    }

    /// Sizes with the row density taken from `beta` and the logarithmic
    /// repetition counts from `scale_n`.
    pub fn sized(cfg: &SimConfig, n: usize, beta: f64, scale_n: usize, rounds: usize) -> Self {
        let log_n = ((scale_n.max(2) - 1) as f64).log2().max(1.0);
        let k = cfg.k.unwrap_or_else(|| 11.max(ceil_tol(30.0 / log_n)));
        let alpha = ((1.0 - beta) / 2.0).clamp(0.0, 0.5);
        let block_width = cfg.width_factor * cfg.d;
        Self {
            d: cfg.d,
            n,
            log_n,
            alpha,
            block_width,
            ones_per_block: density_for(block_width, alpha, cfg.c),
            k,
            blocks_per_hat: ceil_tol(k as f64 * log_n),
            hats: ceil_tol(log_n).pow(cfg.tilde_exponent.saturating_sub(1)),
            rounds,
            backoff_rounds: cfg.backoff_rounds.unwrap_or_else(|| default_backoff_rounds(n)),
        }
    }

    pub fn blocks_per_period(&self) -> usize {
        self.blocks_per_hat * self.hats
    }

    /// Width of one period, the matrix repeated `rounds` times.
    pub fn period_width(&self) -> usize {
        self.blocks_per_period() * self.block_width
    }
}

/// A row made of `blocks` independent block draws.
fn block_row<R: Rng>(p: &PipelineParams, blocks: usize, rng: &mut R) -> BitSchedule {
    let l = p.block_width;
    let mut ones = Vec::with_capacity(blocks * p.ones_per_block);
    for b in 0..blocks {
        let start = ones.len();
        ones.extend((0..p.ones_per_block).map(|_| b * l + rng.gen_range(0..l)));
        ones[start..].sort_unstable();
    }
    ones.dedup();
    BitSchedule::new(blocks * l, ones).expect("blocks are laid out in order")
}

/// The first `blocks` blocks of every node's row.
///
/// Node `i` draws from the stream `(seed, MATRIX, i)`, so a shorter matrix is
/// a prefix of a longer one.
pub fn build_block_matrix(
    p: &PipelineParams,
    offsets: &[usize],
    seed: u64,
    blocks: usize,
) -> ScheduleMatrix {
    let rows = (0..offsets.len())
        .map(|i| block_row(p, blocks, &mut rng_for(seed, &[tag::MATRIX, i as u64])))
        .collect();
    ScheduleMatrix::new(rows)
        .and_then(|m| m.with_offsets(offsets.to_vec(), p.d))
        .expect("rows share a width and offsets are bounded by d")
}

/// One amplified round: `⌈K·log N⌉` blocks.
pub fn build_hat_matrix(p: &PipelineParams, offsets: &[usize], seed: u64) -> ScheduleMatrix {
    build_block_matrix(p, offsets, seed, p.blocks_per_hat)
}

/// One full period: `⌈log N⌉^(e−1)` amplified rounds.
pub fn build_pipeline_matrix(p: &PipelineParams, offsets: &[usize], seed: u64) -> ScheduleMatrix {
    build_block_matrix(p, offsets, seed, p.blocks_per_period())
}

/// Distinct random 64-bit IDs; a repeated draw is replaced.
pub fn assign_ids<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u64> {
    let mut seen = HashSet::with_capacity(n);
    (0..n)
        .map(|_| loop {
            let id = rng.gen::<u64>();
            if seen.insert(id) {
                break id;
            }
        })
        .collect()
}

/// `⌈log₂ n⌉ + 10`.
pub fn default_rounds(n: usize) -> usize {
    ceil_log2(n.max(1)) + 10
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    #[test]
    fn sizes_at_reference_point() {
        let cfg = SimConfig { d: 1024, beta: Some(0.5), ..SimConfig::default() };
        let p = PipelineParams::new(&cfg).unwrap();
        assert_eq!(p.n, 32);
        assert!((p.log_n - 31f64.log2()).abs() < 1e-12);
        assert_eq!(p.k, 11);
        assert_eq!(p.blocks_per_hat, 55);
        assert_eq!(p.hats, 5);
        assert_eq!(p.block_width, 4096);
        assert_eq!(p.ones_per_block, 15);
        assert_eq!(p.rounds, 15);
        assert_eq!(p.backoff_rounds, 25);
    }

    #[test]
    fn degenerate_sizes() {
        let cfg = SimConfig { d: 64, n: Some(2), ..SimConfig::default() };
        let p = PipelineParams::new(&cfg).unwrap();
        assert_eq!((p.log_n, p.k, p.blocks_per_hat, p.hats), (1.0, 30, 30, 1));
        let cfg = SimConfig { d: 64, beta: Some(1.2), ..SimConfig::default() };
        let p = PipelineParams::new(&cfg).unwrap();
        assert_eq!(p.alpha, 0.0);
        assert_eq!(p.ones_per_block, 2);
        let cfg = SimConfig { tilde_exponent: 3, ..SimConfig::default() };
        assert_eq!(PipelineParams::new(&cfg).unwrap().hats, 25);
    }

    #[test]
    fn hat_is_prefix_of_period() {
        let cfg = SimConfig { d: 64, beta: Some(0.5), ..SimConfig::default() };
        let p = PipelineParams::new(&cfg).unwrap();
        let offsets = vec![0, 5, 64, 9, 1, 2, 3, 4];
        let hat = build_hat_matrix(&p, &offsets, 3);
        let full = build_pipeline_matrix(&p, &offsets, 3);
        assert_eq!(full.width(), p.period_width());
        for (h, f) in hat.rows().iter().zip(full.rows()) {
            let prefix: Vec<_> = f.ones().iter().copied().take_while(|&x| x < hat.width()).collect();
            assert_eq!(h.ones(), prefix.as_slice());
        }
    }

    #[test]
    fn ids_are_distinct() {
        let ids = assign_ids(1000, &mut rng_for(0, &[]));
        let set: HashSet<_> = ids.iter().collect();
        assert_eq!(set.len(), 1000);
    }
}
