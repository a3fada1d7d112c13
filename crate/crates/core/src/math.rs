//! Integer rounding helpers shared by the schedule builders.
//!
//! Real-valued quantities (`C·L^α`, `L/C²`, `√d`) are rounded up to integers.
//! Products such as `1.82 * 100.0` land a few ulps above the integer they
//! represent, so the ceiling ignores an absolute slack of [`CEIL_SLACK`].

/// Absolute slack below which a fractional part is treated as float noise.
pub const CEIL_SLACK: f64 = 1e-9;

/// `⌈x⌉`, ignoring fractional parts smaller than [`CEIL_SLACK`].
pub fn ceil_tol(x: f64) -> usize {
    let c = (x - CEIL_SLACK).ceil();
    if c <= 0.0 {
        0
    } else {
        c as usize
    }
}

/// `⌊√n⌋` computed exactly.
pub fn isqrt(n: usize) -> usize {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as usize;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// `⌈√n⌉` computed exactly.
pub fn ceil_sqrt(n: usize) -> usize {
    let r = isqrt(n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// `⌈log₂ n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1, "ceil_log2 of zero");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_absorbs_float_noise() {
        assert_eq!(ceil_tol(1.82 * 100.0), 182);
        assert_eq!(ceil_tol(14.56), 15);
        assert_eq!(ceil_tol(0.0), 0);
        assert_eq!(ceil_tol(-3.0), 0);
    }

    #[test]
    fn integer_roots() {
        for n in 0..10_000usize {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "isqrt({n})");
            let c = ceil_sqrt(n);
            assert!(c * c >= n && (c == 0 || (c - 1) * (c - 1) < n), "ceil_sqrt({n})");
        }
        assert_eq!(isqrt(usize::MAX), 4_294_967_295);
    }

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(32), 5);
        assert_eq!(ceil_log2(33), 6);
    }
}
