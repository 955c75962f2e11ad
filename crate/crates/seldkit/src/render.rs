//! FOA-to-two-channel renderers: the fixed stereo downmix and a spherical
//! head model binaural renderer.
//!
//! Both renderers intentionally collapse elevation and keep the front/back
//! ambiguity of a two-channel pickup: a source at `az` and its mirror at
//! `180 - az` produce the same inter-channel cues. The stereo path is exact
//! (mirrored sources are sample-identical); the binaural path preserves the
//! ambiguity through its symmetric ITD/ILD model.

use crate::ambisonics::FoaBuffer;
use crate::error::{Result, SeldError};
use crate::util::{sin_deg, windowed_sinc};

/// Two-channel audio, equal-length left/right.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoBuffer {
    left: Vec<f64>,
    right: Vec<f64>,
    sample_rate_hz: u32,
}

impl StereoBuffer {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(SeldError::invalid("stereo channels must have equal lengths"));
        }
        if sample_rate_hz == 0 {
            return Err(SeldError::invalid("sample rate must be nonzero"));
        }
        Ok(StereoBuffer {
            left,
            right,
            sample_rate_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn into_channels(self) -> (Vec<f64>, Vec<f64>) {
        (self.left, self.right)
    }
}

/// Mid/side stereo downmix: `L = W + Y`, `R = W - Y`.
///
/// No gain compensation is applied; the +6 dB center build-up is part of the
/// fixed definition. Because only W and Y contribute, sources at `az` and
/// `180 - az` are *sample-exact* duplicates in the output.
pub fn foa_to_stereo(foa: &FoaBuffer) -> StereoBuffer {
    let left = foa.w().iter().zip(foa.y()).map(|(w, y)| w + y).collect();
    let right = foa.w().iter().zip(foa.y()).map(|(w, y)| w - y).collect();
    StereoBuffer {
        left,
        right,
        sample_rate_hz: foa.sample_rate_hz(),
    }
}

/// First-order high-shelf cut applied to the ear facing away from a source.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadShadowConfig {
    /// Shelf corner frequency in Hz.
    pub corner_hz: f64,
    /// Shelf depth at full lateral displacement (|sin lateral| = 1), in dB.
    pub max_attenuation_db: f64,
}

impl Default for HeadShadowConfig {
    fn default() -> Self {
        HeadShadowConfig {
            corner_hz: 1200.0,
            max_attenuation_db: 9.0,
        }
    }
}

/// Geometry and model parameters of the binaural renderer.
#[derive(Debug, Clone, PartialEq)]
pub struct BinauralRendererConfig {
    /// Spherical head radius in meters.
    pub head_radius_m: f64,
    /// Speed of sound in m/s.
    pub speed_of_sound_mps: f64,
    /// Horizontal virtual loudspeaker ring, azimuths in degrees.
    pub virtual_speaker_azimuths_deg: Vec<f64>,
    /// Contralateral head-shadow shelf.
    pub head_shadow: HeadShadowConfig,
}

impl Default for BinauralRendererConfig {
    fn default() -> Self {
        BinauralRendererConfig {
            head_radius_m: 0.0875,
            speed_of_sound_mps: 343.0,
            virtual_speaker_azimuths_deg: (0..8).map(|k| k as f64 * 45.0).collect(),
            head_shadow: HeadShadowConfig::default(),
        }
    }
}

impl BinauralRendererConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.head_radius_m > 0.0) {
            return Err(SeldError::InvalidConfig("head radius must be positive".into()));
        }
        if !(self.speed_of_sound_mps > 0.0) {
            return Err(SeldError::InvalidConfig(
                "speed of sound must be positive".into(),
            ));
        }
        if self.virtual_speaker_azimuths_deg.is_empty() {
            return Err(SeldError::InvalidConfig(
                "virtual speaker ring must not be empty".into(),
            ));
        }
        if !(self.head_shadow.corner_hz > 0.0) || self.head_shadow.max_attenuation_db < 0.0 {
            return Err(SeldError::InvalidConfig("invalid head shadow shelf".into()));
        }
        Ok(())
    }

    /// Woodworth interaural time difference for a horizontal source, in
    /// seconds. Positive means the left ear leads. The azimuth is folded to
    /// its lateral angle first, so front/back mirrors share an ITD.
    pub fn woodworth_itd_s(&self, azimuth_deg: f64) -> f64 {
        let lateral_rad = sin_deg(azimuth_deg).clamp(-1.0, 1.0).asin();
        let mag = lateral_rad.abs() + lateral_rad.abs().sin();
        (self.head_radius_m / self.speed_of_sound_mps) * mag * lateral_rad.signum()
    }

    /// Largest possible ITD magnitude under this geometry (source at ±90°).
    pub fn max_itd_s(&self) -> f64 {
        (self.head_radius_m / self.speed_of_sound_mps) * (std::f64::consts::FRAC_PI_2 + 1.0)
    }
}

/// Half-width of the fractional-delay interpolation kernel, in samples.
const DELAY_KERNEL_HALF_WIDTH: usize = 16;

/// Applies a constant fractional delay (in samples, >= half-width) with a
/// Hann-windowed sinc FIR, accumulating into `out`.
fn delay_into(input: &[f64], delay_samples: f64, gain: f64, out: &mut [f64]) {
    let h = DELAY_KERNEL_HALF_WIDTH as isize;
    let base = delay_samples.floor() as isize;
    let mut taps = [0.0f64; 2 * DELAY_KERNEL_HALF_WIDTH];
    for (t, tap) in taps.iter_mut().enumerate() {
        let x = (base - h + 1 + t as isize) as f64 - delay_samples;
        *tap = windowed_sinc(x, DELAY_KERNEL_HALF_WIDTH as f64) * gain;
    }
    let start = base - h + 1;
    debug_assert!(start >= 0, "delay too small for kernel half-width");
    for (i, &v) in input.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let j0 = i as isize + start;
        for (t, &tap) in taps.iter().enumerate() {
            let j = (j0 + t as isize) as usize;
            if j < out.len() {
                out[j] += v * tap;
            }
        }
    }
}

/// One-pole, one-zero high-shelf filter applied in place. Unity gain at DC,
/// `gain_linear` at Nyquist, transition around `corner_hz`.
fn high_shelf_in_place(signal: &mut [f64], corner_hz: f64, gain_linear: f64, sample_rate_hz: f64) {
    let k = (std::f64::consts::PI * (corner_hz / sample_rate_hz).min(0.499)).tan();
    let b0 = (k + gain_linear) / (k + 1.0);
    let b1 = (k - gain_linear) / (k + 1.0);
    let a1 = (k - 1.0) / (k + 1.0);
    let mut x1 = 0.0;
    let mut y1 = 0.0;
    for v in signal.iter_mut() {
        let x0 = *v;
        let y0 = b0 * x0 + b1 * x1 - a1 * y1;
        *v = y0;
        x1 = x0;
        y1 = y0;
    }
}

/// Renders FOA to binaural stereo through a ring of virtual loudspeakers.
///
/// Each speaker gets a first-order mode-matching feed
/// `(W + 2 sin(a) Y + 2 cos(a) X) / N`, then reaches the two ears with a
/// symmetric ±ITD/2 split (Woodworth model, windowed-sinc fractional delays)
/// and a head-shadow shelf on the contralateral ear. Elevation (Z) is
/// discarded: the ring is horizontal. Front/back mirrors produce identical
/// cue sets by construction.
///
/// Output length equals input length; the model's constant latency is left
/// in place and identical on both ears.
pub fn foa_to_binaural(foa: &FoaBuffer, config: &BinauralRendererConfig) -> Result<StereoBuffer> {
    config.validate()?;
    let n = foa.len();
    let sr = foa.sample_rate_hz() as f64;
    let ring = &config.virtual_speaker_azimuths_deg;
    let num = ring.len() as f64;

    // Base delay floats every tap index into valid range: kernel half-width
    // plus half the largest ITD.
    let max_half_itd = config.max_itd_s() * sr / 2.0;
    let base_delay = DELAY_KERNEL_HALF_WIDTH as f64 + max_half_itd;
    let scratch_len = n + base_delay.ceil() as usize + 2 * DELAY_KERNEL_HALF_WIDTH;

    let mut left = vec![0.0f64; scratch_len];
    let mut right = vec![0.0f64; scratch_len];
    let mut feed = vec![0.0f64; n];
    let mut delayed = vec![0.0f64; scratch_len];

    for &speaker_az in ring {
        let gy = 2.0 * sin_deg(speaker_az);
        let gx = 2.0 * crate::util::cos_deg(speaker_az);
        for (i, f) in feed.iter_mut().enumerate() {
            *f = (foa.w()[i] + gy * foa.y()[i] + gx * foa.x()[i]) / num;
        }

        let itd_samples = config.woodworth_itd_s(speaker_az) * sr;
        let lateral_sin = sin_deg(speaker_az);
        let shadow_db = config.head_shadow.max_attenuation_db * lateral_sin.abs();
        let shadow_gain = crate::util::db_to_gain(-shadow_db);

        // Positive ITD = left leads = left-ear delay shrinks.
        for (ear, out) in [(0, &mut left), (1, &mut right)] {
            let delay = if ear == 0 {
                base_delay - itd_samples / 2.0
            } else {
                base_delay + itd_samples / 2.0
            };
            delayed.fill(0.0);
            delay_into(&feed, delay, 1.0, &mut delayed);
            let contralateral = (ear == 0 && lateral_sin < 0.0) || (ear == 1 && lateral_sin > 0.0);
            if contralateral && shadow_db > 0.0 {
                high_shelf_in_place(&mut delayed, config.head_shadow.corner_hz, shadow_gain, sr);
            }
            for (o, d) in out.iter_mut().zip(&delayed) {
                *o += d;
            }
        }
    }

    left.truncate(n);
    right.truncate(n);
    StereoBuffer::new(left, right, foa.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambisonics::{encode_point_source, Direction};
    use approx::assert_abs_diff_eq;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn stereo_downmix_formulas() {
        let s = noise(128, 1);
        let foa = encode_point_source(&s, Direction::horizontal(90.0), 24000).unwrap();
        let st = foa_to_stereo(&foa);
        // az = +90: Y == W, so L = 2W and R = 0 (up to encoder rounding).
        for i in 0..s.len() {
            assert_abs_diff_eq!(st.left()[i], 2.0 * s[i], epsilon = 1e-12);
            assert_abs_diff_eq!(st.right()[i], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn stereo_front_source_is_centered() {
        let s = noise(64, 2);
        let foa = encode_point_source(&s, Direction::horizontal(0.0), 24000).unwrap();
        let st = foa_to_stereo(&foa);
        assert_eq!(st.left(), st.right());
        assert_eq!(st.left(), &s[..]);
    }

    #[test]
    fn stereo_mirror_identity_is_sample_exact() {
        let s = noise(256, 3);
        for az in [-137.0, -30.5, 10.0, 45.0, 89.9, 120.0] {
            let a = encode_point_source(&s, Direction::horizontal(az), 24000).unwrap();
            let b = encode_point_source(&s, Direction::horizontal(180.0 - az), 24000).unwrap();
            assert_eq!(foa_to_stereo(&a), foa_to_stereo(&b), "az={az}");
        }
    }

    #[test]
    fn woodworth_itd_matches_formula() {
        let cfg = BinauralRendererConfig::default();
        // Oracle: (r/c)(pi/2 + 1) at full lateral displacement.
        let expect = 0.0875 / 343.0 * (std::f64::consts::FRAC_PI_2 + 1.0);
        assert_abs_diff_eq!(cfg.woodworth_itd_s(90.0), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(cfg.woodworth_itd_s(-90.0), -expect, epsilon = 1e-12);
        assert_eq!(cfg.woodworth_itd_s(0.0), 0.0);
        // Front/back fold: 150 degrees has the lateral angle of 30.
        assert_abs_diff_eq!(
            cfg.woodworth_itd_s(150.0),
            cfg.woodworth_itd_s(30.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(cfg.max_itd_s(), expect, epsilon = 1e-15);
    }

    #[test]
    fn binaural_front_source_is_symmetric() {
        let s = noise(2048, 4);
        let foa = encode_point_source(&s, Direction::horizontal(0.0), 24000).unwrap();
        let out = foa_to_binaural(&foa, &BinauralRendererConfig::default()).unwrap();
        assert_eq!(out.len(), foa.len());
        for (l, r) in out.left().iter().zip(out.right()) {
            assert_abs_diff_eq!(l, r, epsilon = 1e-12);
        }
    }

    /// Cross-correlates two signals over +-40 samples and returns the argmax
    /// lag under "positive = left leads" (right delayed).
    fn xcorr_peak_lag(left: &[f64], right: &[f64]) -> i64 {
        let mut best = (f64::NEG_INFINITY, 0i64);
        for lag in -40i64..=40 {
            let mut acc = 0.0;
            for i in 0..left.len() as i64 {
                let j = i + lag;
                if j >= 0 && (j as usize) < right.len() {
                    acc += left[i as usize] * right[j as usize];
                }
            }
            if acc > best.0 {
                best = (acc, lag);
            }
        }
        best.1
    }

    #[test]
    fn binaural_lateral_source_leads_in_the_near_ear() {
        let s = noise(24000, 5);
        let cfg = BinauralRendererConfig::default();
        let foa = encode_point_source(&s, Direction::horizontal(90.0), 24000).unwrap();
        let out = foa_to_binaural(&foa, &cfg).unwrap();
        let lag = xcorr_peak_lag(out.left(), out.right());
        // The ring smears the single-source ITD across speaker images; the
        // peak must still be clearly positive (left leads) and bounded by the
        // maximum Woodworth ITD.
        let max_lag = cfg.max_itd_s() * 24000.0;
        assert!(lag > 4, "expected left to lead, got lag {lag}");
        assert!((lag as f64) <= max_lag + 1.0, "lag {lag} beyond ITD bound");
        // Level also favors the near ear (head shadow + feed gains).
        let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        assert!(energy(out.left()) > energy(out.right()));
    }

    #[test]
    fn binaural_mirror_pairs_share_cues() {
        let s = noise(12000, 6);
        let cfg = BinauralRendererConfig::default();
        let front = encode_point_source(&s, Direction::horizontal(30.0), 24000).unwrap();
        let back = encode_point_source(&s, Direction::horizontal(150.0), 24000).unwrap();
        let out_f = foa_to_binaural(&front, &cfg).unwrap();
        let out_b = foa_to_binaural(&back, &cfg).unwrap();
        // Same lateral angle, so the interaural lag matches.
        assert_eq!(
            xcorr_peak_lag(out_f.left(), out_f.right()),
            xcorr_peak_lag(out_b.left(), out_b.right())
        );
    }

    #[test]
    fn head_shadow_attenuates_contralateral_highs() {
        // Broadband noise from the left: the far (right) ear must come out
        // quieter than a no-shadow render, while the near ear barely moves.
        // Noise keeps the comparison free of single-tone interference.
        let sr = 24000u32;
        let foa = encode_point_source(&noise(24000, 7), Direction::horizontal(90.0), sr).unwrap();
        let with_shadow = foa_to_binaural(&foa, &BinauralRendererConfig::default()).unwrap();
        let mut cfg = BinauralRendererConfig::default();
        cfg.head_shadow.max_attenuation_db = 0.0;
        let without = foa_to_binaural(&foa, &cfg).unwrap();
        let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        assert!(energy(with_shadow.right()) < 0.8 * energy(without.right()));
        // The near ear only sees the shadow through the weak far-side speaker
        // feeds, so its level barely moves.
        let (l_with, l_without) = (energy(with_shadow.left()), energy(without.left()));
        assert!((l_with - l_without).abs() < 0.1 * l_without);
    }

    #[test]
    fn binaural_config_validation() {
        let mut cfg = BinauralRendererConfig::default();
        cfg.virtual_speaker_azimuths_deg.clear();
        assert!(foa_to_binaural(&FoaBuffer::zeros(64, 24000), &cfg).is_err());
        let mut cfg = BinauralRendererConfig::default();
        cfg.head_radius_m = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn stereo_buffer_rejects_mismatched_lengths() {
        assert!(StereoBuffer::new(vec![0.0; 3], vec![0.0; 4], 24000).is_err());
    }
}
