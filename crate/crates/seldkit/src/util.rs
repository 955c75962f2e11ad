//! Small numeric helpers shared across modules.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Normalized-argument sinc: sin(pi x) / (pi x).
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Hann-windowed sinc interpolation kernel with the given half-width in
/// samples. Zero outside `|x| >= half_width`.
pub(crate) fn windowed_sinc(x: f64, half_width: f64) -> f64 {
    if x.abs() >= half_width {
        return 0.0;
    }
    let window = 0.5 * (1.0 + (std::f64::consts::PI * x / half_width).cos());
    sinc(x) * window
}

/// SplitMix64-style mixer used to derive independent RNG streams from a base
/// seed, so each event/noise source is reproducible regardless of how much
/// randomness its neighbours consumed.
pub(crate) fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Full linear convolution via zero-padded FFT, `len = a.len() + b.len() - 1`.
pub(crate) fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let fft_len = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(fft_len);
    let inverse = planner.plan_fft_inverse(fft_len);

    let mut fa: Vec<Complex64> = a
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(fft_len)
        .collect();
    let mut fb: Vec<Complex64> = b
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(fft_len)
        .collect();
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (va, vb) in fa.iter_mut().zip(&fb) {
        *va *= vb;
    }
    inverse.process(&mut fa);
    // rustfft is unnormalized: forward+inverse scales by fft_len.
    let scale = 1.0 / fft_len as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Converts decibels to a linear amplitude gain.
pub(crate) fn db_to_gain(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Sine of an angle in degrees, with symmetry-based argument reduction.
///
/// The reduction `180 - x` is exact in floating point (Sterbenz), so mirror
/// pairs `az` and `180 - az` produce bit-identical sines. Downstream this is
/// what makes stereo downmixes of mirrored sources sample-exact rather than
/// merely close.
pub(crate) fn sin_deg(x: f64) -> f64 {
    let mut x = crate::ambisonics::wrap_azimuth_deg(x);
    if x > 90.0 {
        x = 180.0 - x;
    } else if x < -90.0 {
        x = -180.0 - x;
    }
    x.to_radians().sin()
}

/// Cosine of an angle in degrees; even symmetry plus the same reduction as
/// [`sin_deg`], so `cos_deg(180 - x) == -cos_deg(x)` exactly.
pub(crate) fn cos_deg(x: f64) -> f64 {
    let mut x = crate::ambisonics::wrap_azimuth_deg(x).abs();
    let mut sign = 1.0;
    if x > 90.0 {
        x = 180.0 - x;
        sign = -1.0;
    }
    if x == 90.0 {
        // cos(pi/2) rounds to 6.1e-17; the exact zero keeps antisymmetry at
        // the self-mirror point.
        return 0.0;
    }
    sign * x.to_radians().cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sinc_at_zero_and_integers() {
        assert_eq!(sinc(0.0), 1.0);
        for k in 1..8 {
            assert_abs_diff_eq!(sinc(k as f64), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn windowed_sinc_vanishes_outside_support() {
        assert_eq!(windowed_sinc(16.0, 16.0), 0.0);
        assert_eq!(windowed_sinc(-17.3, 16.0), 0.0);
        assert!(windowed_sinc(0.5, 16.0).abs() > 0.5);
    }

    #[test]
    fn derive_seed_separates_streams() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(42, 0));
    }

    #[test]
    fn degree_trig_matches_radian_trig() {
        for az in -179..180 {
            let az = az as f64;
            assert_abs_diff_eq!(sin_deg(az), az.to_radians().sin(), epsilon = 1e-15);
            assert_abs_diff_eq!(cos_deg(az), az.to_radians().cos(), epsilon = 1e-15);
        }
    }

    #[test]
    fn degree_trig_mirror_is_bit_exact() {
        // Holds whenever the two angles form an exactly representable mirror
        // pair. Construct pairs from the side where the subtraction is
        // Sterbenz-exact: 180 - t for t in [90, 180], -180 - t for t in
        // [-180, -90].
        let mut t = 90.0;
        while t < 180.0 {
            let m = 180.0 - t;
            assert_eq!(sin_deg(t), sin_deg(m), "t={t}");
            assert_eq!(cos_deg(t), -cos_deg(m), "t={t}");
            let (tn, mn) = (-t, -180.0 + t);
            assert_eq!(sin_deg(tn), sin_deg(mn), "t={tn}");
            assert_eq!(cos_deg(tn), -cos_deg(mn), "t={tn}");
            t += 0.473;
        }
        // Integer-degree grids are exact under the naive 180 - az form.
        for az in -179..=180i32 {
            let az = az as f64;
            assert_eq!(sin_deg(az), sin_deg(180.0 - az), "az={az}");
        }
    }

    #[test]
    fn fft_convolve_matches_direct() {
        let a = [1.0, 2.0, -1.0, 0.5];
        let b = [0.5, -0.25, 3.0];
        let got = fft_convolve(&a, &b);
        let mut want = vec![0.0; a.len() + b.len() - 1];
        for (i, &va) in a.iter().enumerate() {
            for (j, &vb) in b.iter().enumerate() {
                want[i + j] += va * vb;
            }
        }
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }
}
