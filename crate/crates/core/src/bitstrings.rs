//! Wake-up strings and the overlap algebra between them.
//!
//! A [`BitSchedule`] is a finite string of time units with the awake units
//! stored as sorted positions. Two strings *overlap* at shift `i` when some
//! one of the first coincides with a one of the second moved right by `i`.
//!
//! [`find_non_overlap_shift`] finds the smallest shift avoiding every
//! difference `p − q`, and [`pack_non_overlapping`] applies it sequentially
//! against the running union of already placed strings.
//! [`brute_force_min_overlap_shift`] is the exhaustive oracle for both.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::math::ceil_tol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("schedule length must be positive")]
    ZeroLength,
    #[error("position {position} is out of range for length {len}")]
    OutOfRange { position: usize, len: usize },
    #[error("positions must be strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },
    #[error("{shifts} shifts supplied for {strings} strings")]
    ShiftCountMismatch { shifts: usize, strings: usize },
    #[error("shift {shift} exceeds the bound {bound}")]
    ShiftOutOfBound { shift: usize, bound: usize },
    #[error("cannot place {ones} ones in a string of length {len}")]
    TooDense { ones: usize, len: usize },
    #[error("malformed schedule text: {0}")]
    Parse(String),
}

/// A finite wake-up string: `length` time units, awake at `ones`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSchedule {
    length: usize,
    ones: Vec<usize>,
}

impl BitSchedule {
    /// Builds a schedule from strictly increasing positions.
    pub fn new(length: usize, ones: Vec<usize>) -> Result<Self, ScheduleError> {
        if length == 0 {
            return Err(ScheduleError::ZeroLength);
        }
        for (index, w) in ones.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(ScheduleError::NotIncreasing { index: index + 1 });
            }
        }
        if let Some(&position) = ones.last() {
            if position >= length {
                return Err(ScheduleError::OutOfRange { position, len: length });
            }
        }
        Ok(Self { length, ones })
    }

    /// Builds a schedule from arbitrary positions; duplicates collapse.
    pub fn from_positions(
        length: usize,
        positions: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ScheduleError> {
        let mut ones: Vec<usize> = positions.into_iter().collect();
        ones.sort_unstable();
        ones.dedup();
        Self::new(length, ones)
    }

    pub fn empty(length: usize) -> Result<Self, ScheduleError> {
        Self::new(length, Vec::new())
    }

    pub fn full(length: usize) -> Result<Self, ScheduleError> {
        Self::new(length, (0..length).collect())
    }

    /// Number of time units in the string.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Awake positions in increasing order.
    pub fn ones(&self) -> &[usize] {
        &self.ones
    }

    /// Number of awake units.
    pub fn density(&self) -> usize {
        self.ones.len()
    }

    pub fn is_awake(&self, t: usize) -> bool {
        self.ones.binary_search(&t).is_ok()
    }

    /// The same ones moved right by `shift`, in a string of `length`.
    pub fn shifted(&self, shift: usize, length: usize) -> Result<Self, ScheduleError> {
        Self::new(length, self.ones.iter().map(|p| p + shift).collect())
    }
}

impl fmt::Display for BitSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "L={}", self.length)?;
        let mut first = true;
        for p in &self.ones {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        writeln!(f)
    }
}

impl FromStr for BitSchedule {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| ScheduleError::Parse("missing `L=<length>` line".into()))?;
        let length = header
            .trim()
            .strip_prefix("L=")
            .ok_or_else(|| ScheduleError::Parse(format!("expected `L=<length>`, got {header:?}")))?
            .parse::<usize>()
            .map_err(|e| ScheduleError::Parse(format!("bad length: {e}")))?;
        let ones = match lines.next() {
            Some(line) => line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|e| ScheduleError::Parse(format!("bad position {tok:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
            return Err(ScheduleError::Parse(format!("unexpected trailing line {extra:?}")));
        }
        Self::new(length, ones)
    }
}

/// Draws a string of `length` with exactly `ones` distinct awake positions.
pub fn random_schedule<R: Rng + ?Sized>(
    length: usize,
    ones: usize,
    rng: &mut R,
) -> Result<BitSchedule, ScheduleError> {
    if ones > length {
        return Err(ScheduleError::TooDense { ones, len: length });
    }
    BitSchedule::from_positions(length, index::sample(rng, length, ones))
}

/// Per-string shifts, each at most `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftAssignment {
    shifts: Vec<usize>,
    bound: usize,
}

impl ShiftAssignment {
    pub fn new(shifts: Vec<usize>, bound: usize) -> Result<Self, ScheduleError> {
        if let Some(&shift) = shifts.iter().find(|&&s| s > bound) {
            return Err(ScheduleError::ShiftOutOfBound { shift, bound });
        }
        Ok(Self { shifts, bound })
    }

    /// All-zero shifts for `count` strings.
    pub fn zero(count: usize) -> Self {
        Self { shifts: vec![0; count], bound: 0 }
    }

    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    pub fn bound(&self) -> usize {
        self.bound
    }
}

/// Which shifts a search may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftDirection {
    /// Only non-negative ("left") shifts `0..=bound`.
    #[default]
    Left,
    /// Shifts in `-bound..=bound`, doubling the search range.
    Both,
}

/// True iff some `p ∈ a` and `q ∈ b` satisfy `p = q + shift`.
pub fn overlaps_at(a: &BitSchedule, b: &BitSchedule, shift: usize) -> bool {
    let (pa, qb) = (a.ones(), b.ones());
    let (mut i, mut j) = (0, 0);
    while i < pa.len() && j < qb.len() {
        match pa[i].cmp(&(qb[j] + shift)) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => return true,
        }
    }
    false
}

/// Bitwise OR of the strings, each moved right by its shift.
///
/// Fails if a shifted position does not fit in `length`.
pub fn union(
    strings: &[BitSchedule],
    assignment: &ShiftAssignment,
    length: usize,
) -> Result<BitSchedule, ScheduleError> {
    if strings.len() != assignment.shifts().len() {
        return Err(ScheduleError::ShiftCountMismatch {
            shifts: assignment.shifts().len(),
            strings: strings.len(),
        });
    }
    let positions = strings
        .iter()
        .zip(assignment.shifts())
        .flat_map(|(s, &shift)| s.ones().iter().map(move |p| p + shift));
    BitSchedule::from_positions(length, positions)
}

/// Smallest `i ∈ 0..=bound` that is not a difference `p − q` (`p ∈ a`,
/// `q ∈ b`), so that `overlaps_at(a, b, i)` is false. `None` when every
/// shift in range is a difference.
pub fn find_non_overlap_shift(a: &BitSchedule, b: &BitSchedule, bound: usize) -> Option<usize> {
    let mut hit = vec![false; bound + 2];
    for &p in a.ones() {
        // q ranges over b's ones with p - bound <= q <= p
        let lo = b.ones().partition_point(|&q| q + bound < p);
        for &q in b.ones()[lo..].iter().take_while(|&&q| q <= p) {
            hit[p - q] = true;
        }
    }
    hit[..=bound].iter().position(|h| !h)
}

/// Like [`find_non_overlap_shift`] but searching `direction`'s range.
///
/// Negative results mean `a` is moved right instead of `b`. Candidates are
/// tried in order `0, 1, −1, 2, −2, …`.
pub fn find_non_overlap_shift_in(
    a: &BitSchedule,
    b: &BitSchedule,
    bound: usize,
    direction: ShiftDirection,
) -> Option<i64> {
    match direction {
        ShiftDirection::Left => find_non_overlap_shift(a, b, bound).map(|i| i as i64),
        ShiftDirection::Both => {
            let forward = differences_up_to(a, b, bound);
            let backward = differences_up_to(b, a, bound);
            (0..=bound).find_map(|i| {
                if !forward[i] {
                    Some(i as i64)
                } else if i > 0 && !backward[i] {
                    Some(-(i as i64))
                } else {
                    None
                }
            })
        }
    }
}

fn differences_up_to(a: &BitSchedule, b: &BitSchedule, bound: usize) -> Vec<bool> {
    let mut hit = vec![false; bound + 1];
    for &p in a.ones() {
        for &q in b.ones().iter().take_while(|&&q| q <= p) {
            if p - q <= bound {
                hit[p - q] = true;
            }
        }
    }
    hit
}

/// Returned when packing runs out of shift budget.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("no strings to pack")]
    Empty,
    #[error("string {index} overlaps the union of the previous strings at every shift up to {bound}")]
    NotFound { index: usize, bound: usize },
}

/// Places strings one by one, each at the smallest shift `≤ bound` that
/// avoids the union of all previously placed strings.
pub fn pack_non_overlapping(
    strings: &[BitSchedule],
    bound: usize,
) -> Result<ShiftAssignment, PackError> {
    let first = strings.first().ok_or(PackError::Empty)?;
    let span = strings.iter().map(BitSchedule::length).max().unwrap_or(1) + bound;
    let mut placed = BitSchedule::new(span, first.ones().to_vec()).expect("first string fits its span");
    let mut shifts = vec![0];
    for (index, s) in strings.iter().enumerate().skip(1) {
        let shift =
            find_non_overlap_shift(&placed, s, bound).ok_or(PackError::NotFound { index, bound })?;
        let moved = s.ones().iter().map(|p| p + shift);
        placed = BitSchedule::from_positions(span, placed.ones().iter().copied().chain(moved))
            .expect("shifted string fits its span");
        shifts.push(shift);
    }
    Ok(ShiftAssignment::new(shifts, bound).expect("shifts never exceed the bound"))
}

/// Exhaustive oracle: the smallest shift in `0..=bound` at which `a` and `b`
/// do not overlap, testing each shift with [`overlaps_at`].
pub fn brute_force_min_overlap_shift(
    a: &BitSchedule,
    b: &BitSchedule,
    bound: usize,
) -> Option<usize> {
    (0..=bound).find(|&i| !overlaps_at(a, b, i))
}

/// Shift budget `⌈L/(2C²)⌉` for a string against its own copy.
pub fn self_shift_budget(length: usize, c: f64) -> usize {
    ceil_tol(length as f64 / (2.0 * c * c))
}

/// Shift budget `⌈L/C²⌉ + 1` for two strings of different densities.
pub fn pair_shift_budget(length: usize, c: f64) -> usize {
    ceil_tol(length as f64 / (c * c)) + 1
}
