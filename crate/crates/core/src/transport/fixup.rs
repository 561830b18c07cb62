//! Zero-and-scale negative flux fixup.

/// Zeros negative nodal values and rescales the positive ones so that
/// `sum_i c_i m_i` is unchanged, where `m_i` are the nodal volume weights.
/// A non-positive total leaves the element identically zero. Returns whether
/// anything changed.
pub fn zero_and_scale(c: &mut [f64], m: &[f64]) -> bool {
    if c.iter().all(|&v| v >= 0.0) {
        return false;
    }
    let total: f64 = c.iter().zip(m).map(|(a, b)| a * b).sum();
    let positive: f64 = c.iter().zip(m).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * b).sum();
    if total <= 0.0 || positive <= 0.0 {
        c.iter_mut().for_each(|v| *v = 0.0);
        return true;
    }
    let scale = total / positive;
    for v in c.iter_mut() {
        *v = if *v > 0.0 { *v * scale } else { 0.0 };
    }
    true
}
