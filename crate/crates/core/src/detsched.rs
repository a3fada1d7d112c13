//! Deterministic wake-up schedule for two processors.
//!
//! With `r = ⌊√d⌋` and `m = ⌊2√d + 2⌋` the schedule is awake at time units
//! `i·r` and `i·(r + 1)` for `i = 1..=m`. For a shift `σ ∈ 1..=d` pick
//! `i ∈ 1..=r` with `i ≡ −σ (mod r)`; then `j = i + (σ + i)/r` gives
//! `j·r − i·(r + 1) = σ`, and `d < (r + 1)²` keeps `j ≤ m`. So the string
//! overlaps its shifted copy at every such `σ`. [`verify_self_overlap`]
//! checks this exactly.
//!
//! Time units are one-based in the construction and stored zero-based.

use std::fmt;

use crate::bitstrings::BitSchedule;
use crate::math::{ceil_sqrt, isqrt};

/// Derived sizes for a given `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoProcParams {
    pub d: usize,
    /// Window length `2d + 4⌈√d⌉ + 2`.
    pub window: usize,
    /// Largest index `⌊2√d + 2⌋`.
    pub max_index: usize,
    /// Integer slope `⌊√d⌋`.
    pub slope: usize,
}

impl TwoProcParams {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "d must be positive");
        Self {
            d,
            window: 2 * d + 4 * ceil_sqrt(d) + 2,
            max_index: 2 + isqrt(4 * d),
            slope: isqrt(d),
        }
    }

    /// The radio-cost bound `4⌈√d⌉ + 4`.
    pub fn cost_bound(&self) -> usize {
        4 * ceil_sqrt(self.d) + 4
    }
}

/// How `i·√d` becomes an integer position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Families `i·⌊√d⌋` and `i·(⌊√d⌋ + 1)`; covers every shift.
    #[default]
    IntegerSlope,
    /// Families `⌈i√d⌉` and `⌈i√d⌉ + i`. Leaves gaps for many
    /// non-square `d` and is kept as a known-bad variant.
    CeilReal,
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rounding::IntegerSlope => "integer-slope",
            Rounding::CeilReal => "ceil-real",
        })
    }
}

/// The two-processor schedule for uncertainty `d`.
pub fn build_two_proc_schedule(d: usize) -> BitSchedule {
    build_two_proc_schedule_with(d, Rounding::IntegerSlope)
}

/// As [`build_two_proc_schedule`], with an explicit rounding rule.
///
/// The string has length `window` unless the rounding pushes a one past it.
pub fn build_two_proc_schedule_with(d: usize, rounding: Rounding) -> BitSchedule {
    let p = TwoProcParams::new(d);
    let times: Vec<usize> = match rounding {
        Rounding::IntegerSlope => (1..=p.max_index)
            .flat_map(|i| [i * p.slope, i * (p.slope + 1)])
            .collect(),
        Rounding::CeilReal => {
            let root = (d as f64).sqrt();
            (1..=p.max_index)
                .flat_map(|i| {
                    let base = if p.slope * p.slope == d {
                        i * p.slope
                    } else {
                        (i as f64 * root).ceil() as usize
                    };
                    [base, base + i]
                })
                .collect()
        }
    };
    let last = times.iter().copied().max().unwrap_or(0);
    BitSchedule::from_positions(p.window.max(last), times.into_iter().map(|t| t - 1))
        .expect("positions fit the window")
}

/// The smallest shift in `1..=d` at which `s` misses its own copy.
pub fn first_uncovered_shift(s: &BitSchedule, d: usize) -> Option<usize> {
    let mut covered = vec![false; d + 1];
    let ones = s.ones();
    for (a, &p) in ones.iter().enumerate() {
        for &q in ones[..a].iter().rev() {
            let diff = p - q;
            if diff > d {
                break;
            }
            covered[diff] = true;
        }
    }
    (1..=d).find(|&sigma| !covered[sigma])
}

/// True iff `s` overlaps itself at every shift `0..=d`.
pub fn verify_self_overlap(s: &BitSchedule, d: usize) -> bool {
    s.density() > 0 && first_uncovered_shift(s, d).is_none()
}

/// Number of awake time units.
pub fn radio_cost(s: &BitSchedule) -> usize {
    s.density()
}
