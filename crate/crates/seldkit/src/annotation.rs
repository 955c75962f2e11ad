//! Frame-level event annotations, the common currency between synthesis,
//! codecs, estimators, and metrics.

use serde::{Deserialize, Serialize};

use crate::ambisonics::wrap_azimuth_deg;

/// Duration of one label frame in seconds. Labels run at 10 Hz regardless of
/// the audio feature rate.
pub const LABEL_FRAME_SECONDS: f64 = 0.1;

/// Number of sound event classes in the label vocabulary.
pub const NUM_CLASSES: usize = 13;

/// One active (frame, class, source) record with its direction of arrival.
///
/// Azimuth follows the crate convention: degrees counterclockwise from
/// front, wrapped to `[-180, 180)`. `source_index` distinguishes
/// simultaneous same-class events; it is an opaque track id, not a stable
/// identity across files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventAnnotation {
    pub frame_index: usize,
    pub class_index: usize,
    pub source_index: usize,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl EventAnnotation {
    /// Horizontal-plane annotation (elevation 0) with the azimuth wrapped
    /// into range.
    pub fn horizontal(
        frame_index: usize,
        class_index: usize,
        source_index: usize,
        azimuth_deg: f64,
    ) -> Self {
        EventAnnotation {
            frame_index,
            class_index,
            source_index,
            azimuth_deg: wrap_azimuth_deg(azimuth_deg),
            elevation_deg: 0.0,
        }
    }

    /// Midpoint time of this annotation's frame in seconds.
    pub fn frame_midpoint_s(&self) -> f64 {
        (self.frame_index as f64 + 0.5) * LABEL_FRAME_SECONDS
    }
}

/// Sorts annotations into the canonical deterministic order:
/// (frame, class, source).
pub fn sort_annotations(annotations: &mut [EventAnnotation]) {
    annotations.sort_by(|a, b| {
        (a.frame_index, a.class_index, a.source_index).cmp(&(
            b.frame_index,
            b.class_index,
            b.source_index,
        ))
    });
}

/// Number of label frames covering `length_s` seconds of audio.
pub fn label_frames_for_duration(length_s: f64) -> usize {
    (length_s / LABEL_FRAME_SECONDS).round() as usize
}
