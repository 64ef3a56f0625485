use core::f64::consts::PI;

/// Strongest periodic component of a series by direct DFT.
///
/// Searches bins `1..=N/2` (or `0..=N/2` when `exclude_dc` is false) and
/// returns the bin with the largest magnitude together with the amplitude of
/// the matching sinusoid (`2|X_k|/N`, or `|X_k|/N` at DC and Nyquist). Ties go
/// to the lowest bin. A series with no energy in the searched bins yields the
/// sentinel `(0, 0.0)`.
pub fn dominant_frequency(series: &[f64], exclude_dc: bool) -> (usize, f64) {
    let n = series.len();
    if n < 2 {
        return (0, 0.0);
    }
    let scale: f64 = series.iter().map(|x| x.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let first = usize::from(exclude_dc);
    let mut best = (0usize, 0.0f64);
    for k in first..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, x) in series.iter().enumerate() {
            // Reduce k*t mod n first to keep the angle small.
            let angle = 2.0 * PI * ((k * t) % n) as f64 / n as f64;
            re += x * libm::cos(angle);
            im -= x * libm::sin(angle);
        }
        let mag = libm::hypot(re, im);
        if mag > best.1 * (1.0 + 1e-9) + scale * 1e-12 {
            best = (k, mag);
        }
    }
    if best.1 <= scale * 1e-12 {
        return (0, 0.0);
    }
    let (k, mag) = best;
    let amplitude = if k == 0 || 2 * k == n { mag / n as f64 } else { 2.0 * mag / n as f64 };
    (k, amplitude)
}
