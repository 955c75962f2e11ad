//! Non-neural sound event localization and detection (SELD) toolkit.
//!
//! The crate covers the full loop of a spatial-audio experiment without any
//! learned components: synthesizing first-order Ambisonics (FOA) scenes with
//! known ground truth, expanding them through channel-swap rotations,
//! rendering to stereo or binaural two-channel mixes, extracting classical
//! spatial features (Mel spectrograms, intensity vectors, GCC-PHAT), running
//! signal-processing DOA estimators, and scoring predictions with the
//! standard SELD metric suite plus quadrant and polyphony breakdowns.
//!
//! # Spatial conventions
//!
//! Everything in this crate agrees on one coordinate frame:
//!
//! * FOA buffers are ACN channel order `[W, Y, Z, X]` with SN3D
//!   normalization (the ambiX convention).
//! * Azimuth is in degrees, counterclockwise from front: 0° is straight
//!   ahead, +90° is left, −90° is right. Stored azimuths live in
//!   `[-180, 180)`.
//! * Elevation is in degrees, positive up, in `[-90, 90]`. Most of the
//!   pipeline runs in horizontal-only mode where elevation is 0.
//! * Inter-channel lags are "positive = left leads".
//!
//! Audio is `f64` end to end; files on disk may be 16-bit PCM or 32-bit
//! float WAV.

pub mod accdoa;
pub mod ambisonics;
pub mod analysis;
pub mod annotation;
pub mod config;
pub mod doa;
pub mod error;
pub mod features;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod render;
pub mod synth;

mod util;

pub use annotation::EventAnnotation;
pub use error::{Result, SeldError};
