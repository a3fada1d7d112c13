use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstrings::BitSchedule;
use crate::math::ceil_tol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("a matrix needs at least one row")]
    NoRows,
    #[error("row {row} has length {len}, expected {width}")]
    RowWidth { row: usize, len: usize, width: usize },
    #[error("{offsets} offsets supplied for {rows} rows")]
    OffsetCount { offsets: usize, rows: usize },
    #[error("offset {offset} of row {row} exceeds the bound {bound}")]
    OffsetTooLarge { row: usize, offset: usize, bound: usize },
    #[error("block {block} has {rows} rows, expected {expected}")]
    RowCountMismatch { block: usize, rows: usize, expected: usize },
    #[error("block {block} carries different offsets from block 0")]
    OffsetMismatch { block: usize },
    #[error("nothing to concatenate")]
    NoBlocks,
    #[error("{0} rows exceed the supported maximum")]
    TooManyRows(usize),
}

/// Rows that fit the packed scan key.
pub const MAX_ROWS: usize = 1 << NODE_BITS;
const NODE_BITS: u32 = 20;
const NODE_MASK: u64 = (1 << NODE_BITS) - 1;

/// `n` wake-up rows of a common width, each started at its own global offset.
///
/// Row `r` is awake at global column `offsets[r] + p` for every one `p`.
/// Repeating the matrix `copies` times in time puts copy `c` at
/// `offsets[r] + c·width + p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleMatrix {
    width: usize,
    rows: Vec<BitSchedule>,
    offsets: Vec<usize>,
    max_offset: usize,
}

impl ScheduleMatrix {
    /// A matrix with all offsets zero.
    pub fn new(rows: Vec<BitSchedule>) -> Result<Self, MatrixError> {
        let width = rows.first().ok_or(MatrixError::NoRows)?.length();
        if rows.len() > MAX_ROWS {
            return Err(MatrixError::TooManyRows(rows.len()));
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.length() != width) {
            return Err(MatrixError::RowWidth { row, len: r.length(), width });
        }
        let n = rows.len();
        Ok(Self { width, rows, offsets: vec![0; n], max_offset: 0 })
    }

    /// Sets the start offsets; each must be at most `bound`.
    pub fn with_offsets(mut self, offsets: Vec<usize>, bound: usize) -> Result<Self, MatrixError> {
        if offsets.len() != self.rows.len() {
            return Err(MatrixError::OffsetCount { offsets: offsets.len(), rows: self.rows.len() });
        }
        if let Some((row, &offset)) = offsets.iter().enumerate().find(|(_, &o)| o > bound) {
            return Err(MatrixError::OffsetTooLarge { row, offset, bound });
        }
        self.offsets = offsets;
        self.max_offset = bound;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[BitSchedule] {
        &self.rows
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// The declared offset bound `d`.
    pub fn max_offset(&self) -> usize {
        self.max_offset
    }

    /// Whether `row` is awake at global column `t` when the matrix is
    /// repeated `copies` times.
    pub fn awake_at(&self, row: usize, t: usize, copies: usize) -> bool {
        let Some(local) = t.checked_sub(self.offsets[row]) else {
            return false;
        };
        let copy = local / self.width;
        copy < copies && self.rows[row].is_awake(local % self.width)
    }

    /// Rows awake at global column `t`.
    pub fn awake_set(&self, t: usize, copies: usize) -> Vec<usize> {
        (0..self.n()).filter(|&r| self.awake_at(r, t, copies)).collect()
    }

    /// Last global column plus one over `copies` repetitions.
    pub fn horizon(&self, copies: usize) -> usize {
        copies * self.width + self.offsets.iter().copied().max().unwrap_or(0)
    }

    /// Calls `f(t, awake)` for every global column with at least one awake
    /// row, in increasing `t`, over `copies` repetitions. `awake` is sorted.
    ///
    /// One copy is sorted once. Its keys are bucketed by the window of
    /// `width` columns they land in (offsets push keys into later windows),
    /// and global window `w` is the merge of bucket `q` from copy `w − q`.
    pub fn scan_columns<F: FnMut(usize, &[usize])>(&self, copies: usize, mut f: F) {
        let mut keys: Vec<u64> = self
            .rows
            .iter()
            .zip(&self.offsets)
            .enumerate()
            .flat_map(|(node, (row, &off))| {
                row.ones().iter().map(move |&p| (((p + off) as u64) << NODE_BITS) | node as u64)
            })
            .collect();
        keys.sort_unstable();
        if keys.is_empty() || copies == 0 {
            return;
        }
        let width = self.width as u64;
        let window_of = |k: u64| (k >> NODE_BITS) / width;
        let spill = window_of(*keys.last().expect("non-empty")) as usize;
        let mut buckets: Vec<&[u64]> = Vec::with_capacity(spill + 1);
        let mut rest = keys.as_slice();
        for q in 0..=spill as u64 {
            let cut = rest.partition_point(|&k| window_of(k) == q);
            let (bucket, tail) = rest.split_at(cut);
            buckets.push(bucket);
            rest = tail;
        }

        let mut awake = Vec::new();
        let mut merged = Vec::new();
        let mut scratch = Vec::new();
        for w in 0..(copies + spill) as u64 {
            merged.clear();
            for (q, bucket) in buckets.iter().enumerate() {
                let q = q as u64;
                if q > w || w - q >= copies as u64 || bucket.is_empty() {
                    continue;
                }
                let shift = ((w - q) * width) << NODE_BITS;
                scratch.clear();
                merge_into(&merged, bucket.iter().map(|&k| k + shift), &mut scratch);
                std::mem::swap(&mut merged, &mut scratch);
            }
            let mut current = None;
            for &k in &merged {
                let t = (k >> NODE_BITS) as usize;
                if current != Some(t) {
                    if let Some(prev) = current {
                        f(prev, &awake);
                    }
                    awake.clear();
                    current = Some(t);
                }
                awake.push((k & NODE_MASK) as usize);
            }
            if let Some(prev) = current {
                f(prev, &awake);
            }
        }
    }
}

fn merge_into(a: &[u64], b: impl Iterator<Item = u64>, out: &mut Vec<u64>) {
    let mut i = 0;
    for y in b {
        while i < a.len() && a[i] <= y {
            out.push(a[i]);
            i += 1;
        }
        out.push(y);
    }
    out.extend_from_slice(&a[i..]);
}

/// `⌈C·L^α⌉`, clamped to `1..=L`.
pub fn density_for(width: usize, alpha: f64, c: f64) -> usize {
    ceil_tol(c * (width as f64).powf(alpha)).clamp(1, width)
}

/// A row of `width` with `k` positions drawn uniformly with replacement.
pub fn gen_row<R: Rng + ?Sized>(width: usize, k: usize, rng: &mut R) -> BitSchedule {
    assert!(width >= 1 && k >= 1 && k <= width, "need 1 ≤ k ≤ L");
    BitSchedule::from_positions(width, (0..k).map(|_| rng.gen_range(0..width)))
        .expect("draws lie in range")
}

/// `n` independent rows of density `⌈C·L^α⌉`, offsets zero.
pub fn gen_matrix<R: Rng + ?Sized>(
    n: usize,
    width: usize,
    alpha: f64,
    c: f64,
    rng: &mut R,
) -> ScheduleMatrix {
    assert!(n >= 1, "need at least one row");
    assert!((0.0..=1.0).contains(&alpha), "α must lie in [0, 1]");
    let k = density_for(width, alpha, c);
    ScheduleMatrix::new((0..n).map(|_| gen_row(width, k, rng)).collect())
        .expect("rows share the width")
}

/// Appends blocks left to right. Offsets come from the first block, and
/// every block must carry the same offsets.
pub fn concat_in_time(blocks: &[ScheduleMatrix]) -> Result<ScheduleMatrix, MatrixError> {
    let first = blocks.first().ok_or(MatrixError::NoBlocks)?;
    let n = first.n();
    for (block, m) in blocks.iter().enumerate().skip(1) {
        if m.n() != n {
            return Err(MatrixError::RowCountMismatch { block, rows: m.n(), expected: n });
        }
        if m.offsets != first.offsets {
            return Err(MatrixError::OffsetMismatch { block });
        }
    }
    let width: usize = blocks.iter().map(ScheduleMatrix::width).sum();
    let rows = (0..n)
        .map(|r| {
            let mut start = 0;
            let mut ones = Vec::new();
            for m in blocks {
                ones.extend(m.rows[r].ones().iter().map(|p| p + start));
                start += m.width;
            }
            BitSchedule::new(width, ones).expect("blocks are placed in order")
        })
        .collect();
    ScheduleMatrix::new(rows)?.with_offsets(first.offsets.clone(), first.max_offset)
}

/// `copies` identical blocks in time.
pub fn repeat_in_time(m: &ScheduleMatrix, copies: usize) -> Result<ScheduleMatrix, MatrixError> {
    concat_in_time(&vec![m.clone(); copies])
}

/// Start-offset presets for the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetPattern {
    /// Independent uniform values in `0..=d`.
    #[default]
    Uniform,
    /// Every node starts together.
    Zero,
    /// Each node starts at `0` or `d`, by a fair coin.
    Extremes,
    /// Evenly spread across `0..=d` in node order.
    Spread,
}

impl std::str::FromStr for OffsetPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "zero" => Ok(Self::Zero),
            "extremes" => Ok(Self::Extremes),
            "spread" => Ok(Self::Spread),
            other => Err(format!("unknown offset pattern {other:?}")),
        }
    }
}

pub fn gen_offsets<R: Rng + ?Sized>(n: usize, d: usize, pattern: OffsetPattern, rng: &mut R) -> Vec<usize> {
    match pattern {
        OffsetPattern::Uniform => (0..n).map(|_| rng.gen_range(0..=d)).collect(),
        OffsetPattern::Zero => vec![0; n],
        OffsetPattern::Extremes => (0..n).map(|_| if rng.gen() { d } else { 0 }).collect(),
        OffsetPattern::Spread => (0..n).map(|i| if n == 1 { 0 } else { i * d / (n - 1) }).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;
    use proptest::prelude::*;

    fn columns(m: &ScheduleMatrix, copies: usize) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        m.scan_columns(copies, |t, a| out.push((t, a.to_vec())));
        out
    }

    /// Column-by-column oracle built from `awake_set`.
    fn columns_naive(m: &ScheduleMatrix, copies: usize) -> Vec<(usize, Vec<usize>)> {
        (0..m.horizon(copies))
            .map(|t| (t, m.awake_set(t, copies)))
            .filter(|(_, a)| !a.is_empty())
            .collect()
    }

    #[test]
    fn row_draws() {
        let mut rng = rng_for(1, &[]);
        assert_eq!(gen_row(50, 1, &mut rng).density(), 1);
        let mean = (0..200).map(|_| gen_row(1000, 1000, &mut rng).density()).sum::<usize>() as f64 / 200.0;
        // 1000·(1 − (1 − 1/1000)^1000) ≈ 632.3
        assert!((mean - 632.3).abs() < 3.0, "{mean}");
        assert_eq!(gen_row(64, 9, &mut rng_for(4, &[])), gen_row(64, 9, &mut rng_for(4, &[])));
    }

    #[test]
    fn matrix_density() {
        let m = gen_matrix(5, 100, 0.0, 1.82, &mut rng_for(2, &[]));
        assert!(m.rows().iter().all(|r| r.density() <= 2 && r.density() >= 1));
        assert_eq!(density_for(4 * 4096, 0.25, 1.82), 21);
        let a = gen_matrix(8, 4096, 0.25, 1.82, &mut rng_for(1, &[]));
        let b = gen_matrix(8, 4096, 0.25, 1.82, &mut rng_for(2, &[]));
        assert_ne!(a, b);
    }

    #[test]
    fn offsets_are_checked() {
        let m = gen_matrix(3, 10, 0.5, 1.0, &mut rng_for(0, &[]));
        assert!(matches!(
            m.clone().with_offsets(vec![0, 6, 1], 5),
            Err(MatrixError::OffsetTooLarge { row: 1, offset: 6, bound: 5 })
        ));
        assert!(matches!(m.with_offsets(vec![0], 5), Err(MatrixError::OffsetCount { .. })));
    }

    #[test]
    fn concat_examples() {
        let mut rng = rng_for(3, &[]);
        let a = gen_matrix(4, 20, 0.5, 1.0, &mut rng);
        assert_eq!(concat_in_time(std::slice::from_ref(&a)).unwrap(), a);
        let b = gen_matrix(3, 20, 0.5, 1.0, &mut rng);
        assert!(matches!(
            concat_in_time(&[a.clone(), b]),
            Err(MatrixError::RowCountMismatch { block: 1, rows: 3, expected: 4 })
        ));
        let shifted = a.clone().with_offsets(vec![1, 2, 3, 4], 4).unwrap();
        assert_eq!(concat_in_time(&[a, shifted]), Err(MatrixError::OffsetMismatch { block: 1 }));
    }

    #[test]
    fn offset_patterns() {
        let mut rng = rng_for(0, &[]);
        assert_eq!(gen_offsets(3, 9, OffsetPattern::Zero, &mut rng), vec![0, 0, 0]);
        assert_eq!(gen_offsets(4, 9, OffsetPattern::Spread, &mut rng), vec![0, 3, 6, 9]);
        assert!(gen_offsets(50, 9, OffsetPattern::Extremes, &mut rng).iter().all(|&o| o == 0 || o == 9));
        assert!(gen_offsets(50, 9, OffsetPattern::Uniform, &mut rng).iter().all(|&o| o <= 9));
    }

    proptest! {
        #[test]
        fn scan_matches_naive_columns(seed in any::<u64>(), n in 1usize..6, width in 1usize..30, d in 0usize..40, copies in 0usize..4) {
            let mut rng = rng_for(seed, &[]);
            let k = width.min(4);
            let m = ScheduleMatrix::new((0..n).map(|_| gen_row(width, k, &mut rng)).collect()).unwrap();
            let m = m.with_offsets(gen_offsets(n, d, OffsetPattern::Uniform, &mut rng), d).unwrap();
            prop_assert_eq!(columns(&m, copies), columns_naive(&m, copies));
        }

        #[test]
        fn repeat_matches_multi_copy_scan(seed in any::<u64>(), n in 1usize..5, width in 1usize..20, d in 0usize..30, copies in 1usize..4) {
            let mut rng = rng_for(seed, &[]);
            let m = ScheduleMatrix::new((0..n).map(|_| gen_row(width, width.min(3), &mut rng)).collect()).unwrap();
            let m = m.with_offsets(gen_offsets(n, d, OffsetPattern::Uniform, &mut rng), d).unwrap();
            let r = repeat_in_time(&m, copies).unwrap();
            prop_assert_eq!(columns(&r, 1), columns(&m, copies));
        }
    }
}
