/// Relative slack under which two candidate values count as tied.
pub(crate) const TIE_EPS: f64 = 1e-12;

pub(crate) fn tie_tolerance(best: f64) -> f64 {
    TIE_EPS * best.abs().max(1.0)
}

/// Returns the first `(key, value)` whose value is within the tie tolerance of
/// the minimum. Callers pass keys in ascending order so ties go to the lowest.
pub(crate) fn argmin_lowest<K: Copy>(candidates: &[(K, f64)]) -> Option<(K, f64)> {
    let best = candidates
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return candidates.first().copied();
    }
    let tol = tie_tolerance(best);
    candidates.iter().copied().find(|&(_, v)| v <= best + tol)
}
