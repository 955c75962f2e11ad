//! First-order Ambisonics buffers, point-source encoding, and audio channel
//! swapping (ACS) augmentation.
//!
//! Channel order is ACN `[W, Y, Z, X]` with SN3D normalization, i.e. the
//! ambiX convention used by the DCASE FOA datasets. For a mono source `s`
//! at azimuth `az` (counterclockwise from front, +90° = left) and elevation
//! `el`:
//!
//! ```text
//! W = s
//! Y = s * sin(az) * cos(el)
//! Z = s * sin(el)
//! X = s * cos(az) * cos(el)
//! ```
//!
//! ACS rotations act on the horizontal channels only and are exact channel
//! swaps/negations — no resampling, no arithmetic beyond sign flips — so
//! augmented audio is bit-reproducible and W/Z energies are untouched.

use crate::annotation::EventAnnotation;
use crate::error::{Result, SeldError};

/// Channel count of a first-order Ambisonics stream.
pub const FOA_CHANNELS: usize = 4;

/// ACN index of the omnidirectional channel.
pub const ACN_W: usize = 0;
/// ACN index of the left/right dipole.
pub const ACN_Y: usize = 1;
/// ACN index of the up/down dipole.
pub const ACN_Z: usize = 2;
/// ACN index of the front/back dipole.
pub const ACN_X: usize = 3;

/// Wraps an azimuth in degrees into `[-180, 180)`.
///
/// Integer-degree inputs stay exact: the wrap is a subtraction of a multiple
/// of 360, both representable.
pub fn wrap_azimuth_deg(azimuth_deg: f64) -> f64 {
    let wrapped = azimuth_deg - 360.0 * ((azimuth_deg + 180.0) / 360.0).floor();
    // Guard the half-open upper edge against floating rounding.
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// A direction of arrival in degrees.
///
/// Azimuth is stored wrapped to `[-180, 180)`; elevation must lie in
/// `[-90, 90]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
            return Err(SeldError::invalid("direction angles must be finite"));
        }
        if !(-90.0..=90.0).contains(&elevation_deg) {
            return Err(SeldError::invalid(format!(
                "elevation {elevation_deg} out of [-90, 90]"
            )));
        }
        Ok(Direction {
            azimuth_deg: wrap_azimuth_deg(azimuth_deg),
            elevation_deg,
        })
    }

    /// Horizontal-plane direction (elevation 0).
    pub fn horizontal(azimuth_deg: f64) -> Self {
        Direction {
            azimuth_deg: wrap_azimuth_deg(azimuth_deg),
            elevation_deg: 0.0,
        }
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    /// SN3D first-order gains `[W, Y, Z, X]` for this direction.
    ///
    /// Uses degree-domain trig with exact mirror reduction, so directions at
    /// `az` and `180 - az` get bit-identical W/Y/Z gains and exactly negated
    /// X gains.
    pub fn foa_gains(&self) -> [f64; 4] {
        let (sin_az, cos_az) = (
            crate::util::sin_deg(self.azimuth_deg),
            crate::util::cos_deg(self.azimuth_deg),
        );
        let (sin_el, cos_el) = (
            crate::util::sin_deg(self.elevation_deg),
            crate::util::cos_deg(self.elevation_deg),
        );
        [1.0, sin_az * cos_el, sin_el, cos_az * cos_el]
    }
}

/// Four-channel FOA audio in ACN/SN3D order, all channels equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct FoaBuffer {
    channels: [Vec<f64>; 4],
    sample_rate_hz: u32,
}

impl FoaBuffer {
    /// Wraps raw channels, enforcing equal lengths and a nonzero rate.
    pub fn new(channels: [Vec<f64>; 4], sample_rate_hz: u32) -> Result<Self> {
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(SeldError::invalid("FOA channels must have equal lengths"));
        }
        if sample_rate_hz == 0 {
            return Err(SeldError::invalid("sample rate must be nonzero"));
        }
        Ok(FoaBuffer {
            channels,
            sample_rate_hz,
        })
    }

    /// All-zero buffer of the given length.
    pub fn zeros(len: usize, sample_rate_hz: u32) -> Self {
        FoaBuffer {
            channels: std::array::from_fn(|_| vec![0.0; len]),
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn w(&self) -> &[f64] {
        &self.channels[ACN_W]
    }

    pub fn y(&self) -> &[f64] {
        &self.channels[ACN_Y]
    }

    pub fn z(&self) -> &[f64] {
        &self.channels[ACN_Z]
    }

    pub fn x(&self) -> &[f64] {
        &self.channels[ACN_X]
    }

    /// Channel by ACN index (0=W, 1=Y, 2=Z, 3=X).
    pub fn channel(&self, acn: usize) -> &[f64] {
        &self.channels[acn]
    }

    pub fn channels(&self) -> &[Vec<f64>; 4] {
        &self.channels
    }

    pub fn into_channels(self) -> [Vec<f64>; 4] {
        self.channels
    }

    /// Mixes `other * gain` into this buffer starting at `offset` samples.
    /// Samples that would land past the end are an error; callers size the
    /// scene first.
    pub fn mix_at(&mut self, offset: usize, other: &FoaBuffer, gain: f64) -> Result<()> {
        if other.sample_rate_hz != self.sample_rate_hz {
            return Err(SeldError::invalid("sample rate mismatch in mix"));
        }
        if offset + other.len() > self.len() {
            return Err(SeldError::invalid(format!(
                "mix of {} samples at offset {} exceeds buffer of {}",
                other.len(),
                offset,
                self.len()
            )));
        }
        for ch in 0..FOA_CHANNELS {
            let dst = &mut self.channels[ch][offset..offset + other.len()];
            for (d, s) in dst.iter_mut().zip(&other.channels[ch]) {
                *d += s * gain;
            }
        }
        Ok(())
    }
}

/// A quarter-turn counterclockwise rotation used by ACS augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationStep {
    R90,
    R180,
    R270,
}

impl RotationStep {
    pub fn degrees(self) -> f64 {
        match self {
            RotationStep::R90 => 90.0,
            RotationStep::R180 => 180.0,
            RotationStep::R270 => 270.0,
        }
    }

    pub fn all() -> [RotationStep; 3] {
        [RotationStep::R90, RotationStep::R180, RotationStep::R270]
    }
}

impl std::fmt::Display for RotationStep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "r{}", self.degrees() as i32)
    }
}

/// Encodes a mono signal as an FOA point source in the given direction.
pub fn encode_point_source(
    mono: &[f64],
    direction: Direction,
    sample_rate_hz: u32,
) -> Result<FoaBuffer> {
    if mono.is_empty() {
        return Err(SeldError::invalid("cannot encode an empty signal"));
    }
    let gains = direction.foa_gains();
    let channels = std::array::from_fn(|ch| mono.iter().map(|&s| s * gains[ch]).collect());
    FoaBuffer::new(channels, sample_rate_hz)
}

/// Rotates an FOA buffer by a quarter-turn step via exact channel swaps.
///
/// With the crate's counterclockwise azimuth, rotating the *scene* by +90°
/// maps the dipole pair as `(X', Y') = (-Y, X)`; 180° negates both; 270° is
/// `(Y, -X)`. W and Z are untouched.
pub fn acs_rotate(foa: &FoaBuffer, step: RotationStep) -> FoaBuffer {
    let w = foa.w().to_vec();
    let z = foa.z().to_vec();
    let neg = |c: &[f64]| c.iter().map(|&v| -v).collect::<Vec<f64>>();
    let (x, y) = match step {
        RotationStep::R90 => (neg(foa.y()), foa.x().to_vec()),
        RotationStep::R180 => (neg(foa.x()), neg(foa.y())),
        RotationStep::R270 => (foa.y().to_vec(), neg(foa.x())),
    };
    FoaBuffer {
        channels: [w, y, z, x],
        sample_rate_hz: foa.sample_rate_hz,
    }
}

/// Applies the matching azimuth shift to annotations: `az += step`, wrapped
/// to `[-180, 180)`. Elevations and all indices are unchanged.
pub fn acs_rotate_labels(labels: &[EventAnnotation], step: RotationStep) -> Vec<EventAnnotation> {
    labels
        .iter()
        .map(|a| EventAnnotation {
            azimuth_deg: wrap_azimuth_deg(a.azimuth_deg + step.degrees()),
            ..*a
        })
        .collect()
}

/// Expands one labelled scene into the four ACS variants:
/// `[identity, R90, R180, R270]`, audio and labels kept in lockstep.
pub fn expand_acs(
    foa: &FoaBuffer,
    labels: &[EventAnnotation],
) -> [(FoaBuffer, Vec<EventAnnotation>); 4] {
    [
        (foa.clone(), labels.to_vec()),
        (
            acs_rotate(foa, RotationStep::R90),
            acs_rotate_labels(labels, RotationStep::R90),
        ),
        (
            acs_rotate(foa, RotationStep::R180),
            acs_rotate_labels(labels, RotationStep::R180),
        ),
        (
            acs_rotate(foa, RotationStep::R270),
            acs_rotate_labels(labels, RotationStep::R270),
        ),
    ]
}
