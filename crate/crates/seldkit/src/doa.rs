//! Classical DOA estimators over the feature tensors, and the conversion of
//! per-frame estimates into event annotations.
//!
//! Two estimator families:
//!
//! * **FOA intensity**: energy-weighted mean of the Mel-band intensity
//!   vectors; unambiguous over the full circle.
//! * **Two-channel TDOA/ILD**: reads the GCC-PHAT correlogram (binaural) or
//!   the inter-channel level difference (stereo, whose coincident downmix
//!   carries no usable time cue) and folds every answer into the frontal
//!   hemisphere. Each estimate carries its front/back mirror as an explicit
//!   [`Ambiguity`], resolved later by a [`ResolutionPolicy`].

use crate::ambisonics::wrap_azimuth_deg;
use crate::annotation::{EventAnnotation, LABEL_FRAME_SECONDS};
use crate::error::{Result, SeldError};
use crate::features::FeatureTensor;
use crate::util::{derive_seed, sin_deg};

/// Confidence gate for FOA intensity estimates.
pub const DEFAULT_FOA_CONFIDENCE_THRESHOLD: f64 = 0.1;

/// Confidence gate for two-channel estimates.
pub const DEFAULT_TDOA_CONFIDENCE_THRESHOLD: f64 = 0.3;

/// Default distance between the two pickups of the binaural head, meters.
pub const DEFAULT_EAR_SEPARATION_M: f64 = 0.175;

/// Frames of correlogram smoothing (moving average, centered) before the
/// two-channel readout.
pub const DEFAULT_SMOOTHING_FRAMES: usize = 9;

/// Whether an estimate pins down the direction or leaves a mirror option.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ambiguity {
    None,
    /// A two-channel estimate: the true source is either at `azimuth_deg` or
    /// at this front/back mirror.
    FrontBack { alternate_azimuth_deg: f64 },
}

/// One per-frame direction estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaEstimate {
    pub frame_index: usize,
    pub azimuth_deg: f64,
    /// Estimator-specific quality in [0, 1]-ish range; compared against a
    /// threshold before an estimate becomes an event.
    pub confidence: f64,
    pub ambiguity: Ambiguity,
}

/// Folds an azimuth into the frontal hemisphere `[-90, 90]`, preserving
/// laterality: the lateral angle `asin(sin az)`.
pub fn fold_to_front(azimuth_deg: f64) -> f64 {
    sin_deg(azimuth_deg).clamp(-1.0, 1.0).asin().to_degrees()
}

/// The front/back mirror of an azimuth.
pub fn front_back_mirror(azimuth_deg: f64) -> f64 {
    wrap_azimuth_deg(180.0 - azimuth_deg)
}

/// FOA intensity-vector estimator.
///
/// `intensity` is `frames x bands x 3` (from
/// [`crate::features::intensity_vectors`]); `band_power` is
/// `frames x bands x 1` linear W-channel Mel power used as the weighting.
/// The azimuth is `atan2` of the power-weighted mean (Ix, Iy); confidence is
/// the resultant length of that mean vector.
pub fn estimate_doa_foa(
    intensity: &FeatureTensor,
    band_power: &FeatureTensor,
) -> Result<Vec<DoaEstimate>> {
    if intensity.channels() != 3 {
        return Err(SeldError::invalid("intensity tensor must have 3 channels"));
    }
    if band_power.frames() != intensity.frames() || band_power.bins() != intensity.bins() {
        return Err(SeldError::invalid(
            "band power shape does not match intensity tensor",
        ));
    }
    let mut out = Vec::with_capacity(intensity.frames());
    for f in 0..intensity.frames() {
        let total: f64 = (0..band_power.bins()).map(|b| band_power.get(f, b, 0)).sum();
        let (mut vx, mut vy) = (0.0, 0.0);
        if total > 0.0 {
            for b in 0..intensity.bins() {
                let w = band_power.get(f, b, 0) / total;
                vx += w * intensity.get(f, b, 0);
                vy += w * intensity.get(f, b, 1);
            }
        }
        let confidence = (vx * vx + vy * vy).sqrt();
        out.push(DoaEstimate {
            frame_index: f,
            azimuth_deg: if confidence > 0.0 {
                wrap_azimuth_deg(vy.atan2(vx).to_degrees())
            } else {
                0.0
            },
            confidence,
            ambiguity: Ambiguity::None,
        });
    }
    Ok(out)
}

/// Which two-channel front end produced the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdoaMode {
    /// Coincident stereo downmix: no time cue, use the level difference.
    Stereo,
    /// Binaural head: read the GCC-PHAT lag and invert the Woodworth model.
    Binaural,
}

/// Geometry and readout parameters of the two-channel estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct TdoaConfig {
    pub mode: TdoaMode,
    /// Distance between the two ears/pickups in meters (binaural readout
    /// models the head as a sphere of half this diameter).
    pub separation_m: f64,
    pub speed_of_sound_mps: f64,
    pub sample_rate_hz: u32,
    /// Centered moving-average window (frames) applied to the correlogram
    /// before the readout; 0 or 1 disables smoothing.
    pub smoothing_frames: usize,
}

impl TdoaConfig {
    pub fn new(mode: TdoaMode) -> Self {
        TdoaConfig {
            mode,
            separation_m: DEFAULT_EAR_SEPARATION_M,
            speed_of_sound_mps: 343.0,
            sample_rate_hz: 24000,
            smoothing_frames: DEFAULT_SMOOTHING_FRAMES,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.separation_m > 0.0) || !(self.speed_of_sound_mps > 0.0) {
            return Err(SeldError::InvalidConfig(
                "separation and speed of sound must be positive".into(),
            ));
        }
        if self.sample_rate_hz == 0 {
            return Err(SeldError::InvalidConfig("sample rate must be nonzero".into()));
        }
        Ok(())
    }
}

/// Solves `lambda + sin(lambda) = x` for `lambda` in `[0, pi/2]` by
/// bisection (the Woodworth ITD model inverse).
fn invert_woodworth(x: f64) -> f64 {
    let x = x.clamp(0.0, std::f64::consts::FRAC_PI_2 + 1.0);
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid + mid.sin() < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-channel DOA estimator on a GCC-PHAT correlogram.
///
/// `gcc` is `frames x (2 max_lag + 1) x 1` with positive lag = left leads;
/// `levels` holds per-frame `(rms_left, rms_right)`. Confidence is the peak
/// of the (smoothed) correlogram in both modes. All azimuths land in the
/// frontal hemisphere with the mirror recorded as the ambiguity.
///
/// The binaural lag readout is the signed centroid of the correlogram rather
/// than its argmax: the virtual-speaker render spreads one source across
/// several delayed images, and the centroid recovers the mean interaural
/// delay where the argmax would snap to whichever image cluster is tallest.
pub fn estimate_doa_2ch(
    gcc: &FeatureTensor,
    levels: &[(f64, f64)],
    config: &TdoaConfig,
) -> Result<Vec<DoaEstimate>> {
    config.validate()?;
    if gcc.channels() != 1 || gcc.bins() % 2 == 0 {
        return Err(SeldError::invalid(
            "correlogram must be frames x (2*max_lag+1) x 1",
        ));
    }
    if levels.len() != gcc.frames() {
        return Err(SeldError::invalid(format!(
            "{} level pairs for {} correlogram frames",
            levels.len(),
            gcc.frames()
        )));
    }
    let bins = gcc.bins();
    let max_lag = (bins / 2) as isize;
    let frames = gcc.frames();
    let half_window = config.smoothing_frames.max(1) / 2;

    let mut smoothed = vec![0.0f64; bins];
    let mut out = Vec::with_capacity(frames);
    for f in 0..frames {
        let lo = f.saturating_sub(half_window);
        let hi = (f + half_window).min(frames.saturating_sub(1));
        let count = (hi - lo + 1) as f64;
        for (b, s) in smoothed.iter_mut().enumerate() {
            let mut acc = 0.0;
            for g in lo..=hi {
                acc += gcc.get(g, b, 0);
            }
            *s = acc / count;
        }
        let peak = smoothed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        let azimuth = match config.mode {
            TdoaMode::Stereo => {
                let (l, r) = levels[f];
                let ild = ((l - r) / (l + r + 1e-12)).clamp(-1.0, 1.0);
                ild.asin().to_degrees()
            }
            TdoaMode::Binaural => {
                let mut num = 0.0;
                let mut den = 0.0;
                for b in 0..bins {
                    let lag = b as isize - max_lag;
                    num += smoothed[b] * lag as f64;
                    den += smoothed[b];
                }
                if den.abs() < 1e-9 {
                    0.0
                } else {
                    let tau_s = (num / den) / config.sample_rate_hz as f64;
                    let radius = config.separation_m / 2.0;
                    let x = tau_s.abs() * config.speed_of_sound_mps / radius;
                    let lateral = invert_woodworth(x).to_degrees();
                    lateral.copysign(tau_s)
                }
            }
        };
        out.push(DoaEstimate {
            frame_index: f,
            azimuth_deg: azimuth,
            confidence: peak.max(0.0),
            ambiguity: Ambiguity::FrontBack {
                alternate_azimuth_deg: front_back_mirror(azimuth),
            },
        });
    }
    Ok(out)
}

/// How to resolve a front/back ambiguity when emitting events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolutionPolicy {
    /// Keep the frontal estimate.
    Front,
    /// Take the rear mirror.
    Alternate,
    /// Seeded per-frame coin flip between the two hypotheses.
    Random { seed: u64 },
}

/// Pools per-STFT-frame estimates onto the 100 ms label grid.
///
/// Each estimate is binned by its frame-center time; within a label frame
/// the azimuths combine as a confidence-weighted circular mean and the
/// confidence as the member mean. Label frames with no estimates get
/// confidence 0.
pub fn pool_estimates_to_label_frames(
    estimates: &[DoaEstimate],
    hop_s: f64,
    window_s: f64,
    num_label_frames: usize,
) -> Vec<DoaEstimate> {
    struct Acc {
        vx: f64,
        vy: f64,
        conf: f64,
        count: usize,
        ambiguous: bool,
    }
    let mut accs: Vec<Acc> = (0..num_label_frames)
        .map(|_| Acc {
            vx: 0.0,
            vy: 0.0,
            conf: 0.0,
            count: 0,
            ambiguous: false,
        })
        .collect();
    for est in estimates {
        let center = est.frame_index as f64 * hop_s + window_s / 2.0;
        let label = (center / LABEL_FRAME_SECONDS) as usize;
        if label >= num_label_frames {
            continue;
        }
        let acc = &mut accs[label];
        let rad = est.azimuth_deg.to_radians();
        acc.vx += est.confidence * rad.cos();
        acc.vy += est.confidence * rad.sin();
        acc.conf += est.confidence;
        acc.count += 1;
        acc.ambiguous |= matches!(est.ambiguity, Ambiguity::FrontBack { .. });
    }
    accs.into_iter()
        .enumerate()
        .map(|(frame, acc)| {
            let azimuth = if acc.vx != 0.0 || acc.vy != 0.0 {
                wrap_azimuth_deg(acc.vy.atan2(acc.vx).to_degrees())
            } else {
                0.0
            };
            DoaEstimate {
                frame_index: frame,
                azimuth_deg: azimuth,
                confidence: if acc.count > 0 {
                    acc.conf / acc.count as f64
                } else {
                    0.0
                },
                ambiguity: if acc.ambiguous {
                    Ambiguity::FrontBack {
                        alternate_azimuth_deg: front_back_mirror(azimuth),
                    }
                } else {
                    Ambiguity::None
                },
            }
        })
        .collect()
}

/// Converts label-frame estimates into event annotations: estimates below
/// the confidence threshold are dropped, front/back ambiguities are resolved
/// by the policy, and each surviving frame yields one horizontal event of
/// the given class.
pub fn estimates_to_events(
    estimates: &[DoaEstimate],
    class_index: usize,
    confidence_threshold: f64,
    policy: ResolutionPolicy,
) -> Vec<EventAnnotation> {
    estimates
        .iter()
        .filter(|e| e.confidence >= confidence_threshold)
        .map(|e| {
            let azimuth = match (e.ambiguity, policy) {
                (Ambiguity::FrontBack { alternate_azimuth_deg }, ResolutionPolicy::Alternate) => {
                    alternate_azimuth_deg
                }
                (Ambiguity::FrontBack { alternate_azimuth_deg }, ResolutionPolicy::Random { seed }) => {
                    if derive_seed(seed, e.frame_index as u64) & 1 == 1 {
                        alternate_azimuth_deg
                    } else {
                        e.azimuth_deg
                    }
                }
                _ => e.azimuth_deg,
            };
            EventAnnotation::horizontal(e.frame_index, class_index, 0, azimuth)
        })
        .collect()
}
