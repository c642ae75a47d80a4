//! Bracketing root finders for monotone scalar maps.

/// Hard cap on bisection steps.
pub const MAX_BISECTIONS: usize = 200;

/// Bisection on a bracket `[inside, outside]` of a predicate that holds at
/// `inside` and fails at `outside`. The bracket may be given in either order.
///
/// Returns the final `(inside, outside)` pair once the two ends are adjacent
/// floats or [`MAX_BISECTIONS`] halvings were done.
pub fn bisect_predicate<F>(mut inside: f64, mut outside: f64, mut holds: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if holds(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    (inside, outside)
}

/// Root of a continuous `f` with `f(lo)` and `f(hi)` of opposite signs
/// (zero counts as either sign). Returns the midpoint of the final bracket.
pub fn bisect_sign<F>(lo: f64, hi: f64, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let lo_positive = f(lo) > 0.0;
    let (a, b) = bisect_predicate(lo, hi, |x| (f(x) > 0.0) == lo_positive);
    0.5 * (a + b)
}
