//! Brute-force oracles for derived plotting values.

use rand::Rng;

fn decimal(units: i64, k: i32) -> f64 {
    if k >= 0 {
        units as f64 * 10f64.powi(k)
    } else {
        units as f64 / 10f64.powi(-k)
    }
}

/// Brute-force tick selection: scan every candidate step from far below the
/// span up to the largest finite power of ten, in increasing order; for each,
/// walk the multiples outward from zero to the covering run; keep the
/// strictly closest count. Returns the tick values.
pub fn nice_ticks_oracle(min: f64, max: f64, target: usize) -> Option<Vec<f64>> {
    let mut best: Option<(usize, i64, i64, i64, i32)> = None;
    let base = ((max - min) / target as f64).log10().floor() as i32;
    for k in base - 6..=308 {
        for m in [1i64, 2, 5] {
            let step = decimal(m, k);
            if !step.is_finite() || (min / step).abs() > 4e15 || (max / step).abs() > 4e15 {
                continue;
            }
            let tick = |i: i64| decimal(i * m, k);
            // Coarse jump, then unit walks.
            let mut lo = (min / step) as i64;
            while tick(lo) > min {
                lo -= 1;
            }
            while tick(lo + 1) <= min {
                lo += 1;
            }
            let mut hi = lo + 1;
            hi = hi.max((max / step) as i64 - 1);
            while tick(hi) < max {
                hi += 1;
            }
            while hi - 1 > lo && tick(hi - 1) >= max {
                hi -= 1;
            }
            if lo.abs() > 1 << 52 || hi.abs() > 1 << 52 || !tick(hi).is_finite() {
                continue;
            }
            let distance = ((hi - lo + 1) as usize).abs_diff(target);
            if best.is_none_or(|(d, ..)| distance < d) {
                best = Some((distance, lo, hi, m, k));
            }
        }
    }
    best.map(|(_, lo, hi, m, k)| (lo..=hi).map(|i| decimal(i * m, k)).collect())
}

/// A random `[min, max]` spanning many magnitudes, offsets and widths.
pub fn random_range<R: Rng>(rng: &mut R) -> (f64, f64) {
    let scale = 10f64.powi(rng.gen_range(-8..9));
    let min = rng.gen_range(-1000.0..1000.0) * scale;
    let span = rng.gen_range(0.001..1000.0) * 10f64.powi(rng.gen_range(-4..5)) * scale;
    (min, min + span)
}
