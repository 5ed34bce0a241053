//! Bracketing root finders.

/// Bisection for a nondecreasing `f` with `f(lo) <= 0 <= f(hi)`.
///
/// Stops when the bracket is narrower than `tol` or after `max_iter` halvings
/// and returns the midpoint.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64 {
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
