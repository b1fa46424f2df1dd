//! Small shared statistics helpers.

/// Linear-interpolation quantile (the "type 7" rule): at fractional rank
/// `h = (n - 1) q`, interpolate between the order statistics that bracket h.
///
/// Uses quickselect rather than a full sort; the slice is reordered in place.
pub(crate) fn quantile_type7(values: &mut [f64], q: f64) -> f64 {
    debug_assert!(!values.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let n = values.len();
    if n == 1 {
        return values[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, lo_val, rest) = values.select_nth_unstable_by(lo, |a, b| a.total_cmp(b));
    let lo_val = *lo_val;
    if frac == 0.0 {
        lo_val
    } else {
        let hi_val = rest.iter().copied().fold(f64::INFINITY, f64::min);
        lo_val + frac * (hi_val - lo_val)
    }
}
