//! Deterministic FOA scene synthesis with exact ground truth.
//!
//! A scene is a seeded recipe: events (signal, direction or azimuth
//! trajectory, onset/duration, gain) summed as encoded point sources, an
//! optional decorrelated noise floor, and an optional exponential-decay
//! diffuse reverb. The same spec always produces bit-identical audio and
//! annotations: every stochastic element draws from its own RNG stream
//! derived from the scene seed, so events are independent of each other's
//! sample consumption.
//!
//! Ground truth follows the frame-midpoint rule: an event is active in a
//! 100 ms label frame iff its `[onset, onset + duration)` span contains the
//! frame's midpoint, and the annotated azimuth is the trajectory's value at
//! that midpoint.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambisonics::{encode_point_source, wrap_azimuth_deg, Direction, FoaBuffer};
use crate::annotation::{label_frames_for_duration, sort_annotations, EventAnnotation,
    LABEL_FRAME_SECONDS, NUM_CLASSES};
use crate::error::{Result, SeldError};
use crate::util::{cos_deg, db_to_gain, derive_seed, fft_convolve, sin_deg};

/// Most simultaneous sources a scene may contain in any label frame.
pub const MAX_SIMULTANEOUS_SOURCES: usize = 5;

/// Energy ratio of the directional channels relative to W in the diffuse
/// noise floor: an isotropic field carries 1/sqrt(3) per SN3D dipole.
const DIFFUSE_XYZ_GAIN: f64 = 0.577_350_269_189_625_8;

/// What an event sounds like.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSignal {
    /// Caller-provided mono samples at the scene rate; must cover the event
    /// duration.
    Samples(Vec<f64>),
    /// Seeded uniform white noise.
    NoiseBurst,
    /// Harmonic stack with 1/k partial amplitudes and seeded phases.
    ToneComplex { fundamental_hz: f64, partials: usize },
    /// Linear frequency sweep.
    Chirp { start_hz: f64, end_hz: f64 },
}

/// Where an event comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSpec {
    Static(Direction),
    /// Piecewise-linear azimuth over `(time_s, azimuth_deg)` keyframes,
    /// clamped outside the keyframe span. Values are interpolated unwrapped
    /// (e.g. 170 -> 190 sweeps through the rear) and wrapped afterwards.
    /// Elevation is 0.
    AzimuthPath(Vec<(f64, f64)>),
}

impl DirectionSpec {
    fn validate(&self) -> Result<()> {
        match self {
            DirectionSpec::Static(_) => Ok(()),
            DirectionSpec::AzimuthPath(points) => {
                if points.is_empty() {
                    return Err(SeldError::invalid("azimuth path needs at least one point"));
                }
                if points.windows(2).any(|w| w[1].0 < w[0].0) {
                    return Err(SeldError::invalid("azimuth path times must be sorted"));
                }
                if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                    return Err(SeldError::invalid("azimuth path values must be finite"));
                }
                Ok(())
            }
        }
    }

    /// Azimuth at an absolute scene time, wrapped to `[-180, 180)`.
    fn azimuth_at(&self, time_s: f64) -> f64 {
        match self {
            DirectionSpec::Static(d) => d.azimuth_deg(),
            DirectionSpec::AzimuthPath(points) => {
                let raw = match points.iter().position(|p| p.0 > time_s) {
                    Some(0) => points[0].1,
                    None => points.last().unwrap().1,
                    Some(i) => {
                        let (t0, a0) = points[i - 1];
                        let (t1, a1) = points[i];
                        if t1 > t0 {
                            a0 + (a1 - a0) * (time_s - t0) / (t1 - t0)
                        } else {
                            a1
                        }
                    }
                };
                wrap_azimuth_deg(raw)
            }
        }
    }

    fn elevation(&self) -> f64 {
        match self {
            DirectionSpec::Static(d) => d.elevation_deg(),
            DirectionSpec::AzimuthPath(_) => 0.0,
        }
    }
}

/// One sound event in a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSpec {
    pub class_index: usize,
    pub onset_s: f64,
    pub duration_s: f64,
    pub direction: DirectionSpec,
    pub signal: SourceSignal,
    pub gain_db: f64,
}

/// Diffuse reverb parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverbSpec {
    /// Time for the tail to decay by 60 dB, in seconds.
    pub rt60_s: f64,
    /// Wet path gain in dB.
    pub wet_gain_db: f64,
}

/// Full recipe for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub length_s: f64,
    pub sample_rate_hz: u32,
    pub events: Vec<EventSpec>,
    /// Diffuse noise floor level in dBFS, W-dominant and decorrelated across
    /// channels. `None` for silence between events.
    pub noise_floor_db: Option<f64>,
    pub reverb: Option<ReverbSpec>,
    pub rng_seed: u64,
}

impl SceneSpec {
    fn validate(&self) -> Result<()> {
        if !(self.length_s > 0.0) || !self.length_s.is_finite() {
            return Err(SeldError::invalid("scene length must be positive"));
        }
        if self.sample_rate_hz == 0 {
            return Err(SeldError::invalid("sample rate must be nonzero"));
        }
        for (i, ev) in self.events.iter().enumerate() {
            if ev.class_index >= NUM_CLASSES {
                return Err(SeldError::invalid(format!(
                    "event {i}: class index {} outside vocabulary of {NUM_CLASSES}",
                    ev.class_index
                )));
            }
            if !(ev.onset_s >= 0.0) || !(ev.duration_s > 0.0) {
                return Err(SeldError::invalid(format!(
                    "event {i}: onset must be >= 0 and duration > 0"
                )));
            }
            if ev.onset_s + ev.duration_s > self.length_s + 1e-9 {
                return Err(SeldError::invalid(format!(
                    "event {i}: ends at {:.3}s, beyond the {:.3}s scene",
                    ev.onset_s + ev.duration_s,
                    self.length_s
                )));
            }
            ev.direction.validate()?;
        }
        if let Some(rv) = &self.reverb {
            if !(rv.rt60_s > 0.0) {
                return Err(SeldError::invalid("reverb RT60 must be positive"));
            }
        }
        Ok(())
    }
}

/// Generates an event's mono signal, deterministically from its own RNG.
fn generate_signal(
    signal: &SourceSignal,
    n: usize,
    sample_rate_hz: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let nyquist = sample_rate_hz / 2.0;
    match signal {
        SourceSignal::Samples(s) => {
            if s.len() < n {
                return Err(SeldError::invalid(format!(
                    "source signal of {} samples is shorter than the {n}-sample event",
                    s.len()
                )));
            }
            Ok(s[..n].to_vec())
        }
        SourceSignal::NoiseBurst => Ok((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()),
        SourceSignal::ToneComplex {
            fundamental_hz,
            partials,
        } => {
            if !(*fundamental_hz > 0.0) || *fundamental_hz >= nyquist || *partials == 0 {
                return Err(SeldError::invalid(format!(
                    "invalid tone complex: {fundamental_hz} Hz x {partials} partials"
                )));
            }
            // Drop partials that would alias.
            let usable = (1..=*partials)
                .take_while(|&p| fundamental_hz * (p as f64) < nyquist)
                .count()
                .max(1);
            let norm: f64 = (1..=usable).map(|p| 1.0 / p as f64).sum();
            let phases: Vec<f64> = (0..usable)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            Ok((0..n)
                .map(|i| {
                    let t = i as f64 / sample_rate_hz;
                    (1..=usable)
                        .map(|p| {
                            (std::f64::consts::TAU * fundamental_hz * p as f64 * t
                                + phases[p - 1])
                                .sin()
                                / p as f64
                        })
                        .sum::<f64>()
                        / norm
                })
                .collect())
        }
        SourceSignal::Chirp { start_hz, end_hz } => {
            if !(*start_hz > 0.0) || !(*end_hz > 0.0) || *start_hz > nyquist || *end_hz > nyquist {
                return Err(SeldError::invalid(format!(
                    "invalid chirp range {start_hz}..{end_hz} Hz"
                )));
            }
            let dur = n as f64 / sample_rate_hz;
            Ok((0..n)
                .map(|i| {
                    let t = i as f64 / sample_rate_hz;
                    let phase = std::f64::consts::TAU
                        * (start_hz * t + (end_hz - start_hz) * t * t / (2.0 * dur));
                    phase.sin()
                })
                .collect())
        }
    }
}

/// Raised-cosine fade at both ends, 5 ms or a quarter of the event.
fn apply_fades(signal: &mut [f64], sample_rate_hz: f64) {
    let fade = ((0.005 * sample_rate_hz) as usize).min(signal.len() / 4);
    for i in 0..fade {
        let g = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / fade as f64).cos());
        signal[i] *= g;
        let tail = signal.len() - 1 - i;
        signal[tail] *= g;
    }
}

/// Renders a scene to FOA audio plus frame-level annotations.
///
/// Processing order: events are encoded and summed dry, the diffuse reverb
/// (if any) is applied to that event mix, and the noise floor (if any) is
/// added last, unreverberated.
pub fn synthesize_scene(spec: &SceneSpec) -> Result<(FoaBuffer, Vec<EventAnnotation>)> {
    spec.validate()?;
    let sr = spec.sample_rate_hz as f64;
    let n = (spec.length_s * sr).round() as usize;
    let num_frames = label_frames_for_duration(spec.length_s);
    let mut buffer = FoaBuffer::zeros(n, spec.sample_rate_hz);
    let mut annotations = Vec::new();

    for (i, ev) in spec.events.iter().enumerate() {
        let onset = (ev.onset_s * sr).round() as usize;
        let len = ((ev.duration_s * sr).round() as usize).max(1);
        if onset + len > n {
            return Err(SeldError::invalid(format!(
                "event {i}: rounded span exceeds the scene buffer"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, i as u64));
        let mut sig = generate_signal(&ev.signal, len, sr, &mut rng)?;
        let gain = db_to_gain(ev.gain_db);
        for v in sig.iter_mut() {
            *v *= gain;
        }
        apply_fades(&mut sig, sr);

        match &ev.direction {
            DirectionSpec::Static(dir) => {
                let encoded = encode_point_source(&sig, *dir, spec.sample_rate_hz)?;
                buffer.mix_at(onset, &encoded, 1.0)?;
            }
            DirectionSpec::AzimuthPath(_) => {
                // Per-sample gains follow the moving azimuth.
                let mut channels = buffer.into_channels();
                for (j, &s) in sig.iter().enumerate() {
                    let t = (onset + j) as f64 / sr;
                    let az = ev.direction.azimuth_at(t);
                    channels[0][onset + j] += s;
                    channels[1][onset + j] += s * sin_deg(az);
                    channels[3][onset + j] += s * cos_deg(az);
                }
                buffer = FoaBuffer::new(channels, spec.sample_rate_hz)?;
            }
        }

        for frame in 0..num_frames {
            let midpoint = (frame as f64 + 0.5) * LABEL_FRAME_SECONDS;
            if midpoint >= ev.onset_s && midpoint < ev.onset_s + ev.duration_s {
                annotations.push(EventAnnotation {
                    frame_index: frame,
                    class_index: ev.class_index,
                    source_index: i,
                    azimuth_deg: ev.direction.azimuth_at(midpoint),
                    elevation_deg: ev.direction.elevation(),
                });
            }
        }
    }
    sort_annotations(&mut annotations);

    // Scene invariant: bounded simultaneity.
    let mut per_frame: BTreeMap<usize, usize> = BTreeMap::new();
    for a in &annotations {
        *per_frame.entry(a.frame_index).or_default() += 1;
    }
    if let Some((frame, count)) = per_frame.iter().find(|(_, &c)| c > MAX_SIMULTANEOUS_SOURCES) {
        return Err(SeldError::invalid(format!(
            "{count} simultaneous sources in frame {frame}, limit is {MAX_SIMULTANEOUS_SOURCES}"
        )));
    }

    if let Some(rv) = &spec.reverb {
        let ir_len = ((rv.rt60_s * sr).ceil() as usize).max(8);
        let decay = -3.0 * (10f64).ln() / (rv.rt60_s * sr); // -60 dB at rt60
        let wet_gain = db_to_gain(rv.wet_gain_db);
        let mut channels = buffer.into_channels();
        for (ch, channel) in channels.iter_mut().enumerate() {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, u64::MAX - 8 - ch as u64));
            let ir: Vec<f64> = (0..ir_len)
                .map(|i| rng.random_range(-1.0f64..1.0) * (decay * i as f64).exp())
                .collect();
            let wet = fft_convolve(channel, &ir);
            for (d, w) in channel.iter_mut().zip(&wet) {
                *d += w * wet_gain;
            }
        }
        buffer = FoaBuffer::new(channels, spec.sample_rate_hz)?;
    }

    if let Some(db) = spec.noise_floor_db {
        let gain = db_to_gain(db);
        let mut channels = buffer.into_channels();
        for (ch, channel) in channels.iter_mut().enumerate() {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, u64::MAX - ch as u64));
            let ch_gain = if ch == 0 { gain } else { gain * DIFFUSE_XYZ_GAIN };
            for v in channel.iter_mut() {
                *v += rng.random_range(-1.0f64..1.0) * ch_gain;
            }
        }
        buffer = FoaBuffer::new(channels, spec.sample_rate_hz)?;
    }

    Ok((buffer, annotations))
}

/// Fraction of active frames at each polyphony level (frame counts with at
/// least one source; exact rational counts over the active-frame total).
pub fn polyphony_profile(annotations: &[EventAnnotation]) -> BTreeMap<usize, f64> {
    let mut per_frame: BTreeMap<usize, usize> = BTreeMap::new();
    for a in annotations {
        *per_frame.entry(a.frame_index).or_default() += 1;
    }
    let active = per_frame.len();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &count in per_frame.values() {
        *histogram.entry(count).or_default() += 1;
    }
    histogram
        .into_iter()
        .map(|(count, frames)| (count, frames as f64 / active as f64))
        .collect()
}

/// Builds an event list hitting an exact polyphony profile.
///
/// The scene is tiled with short segments; each segment hosts `count`
/// concurrent events, frame-aligned so the midpoint rule yields exact frame
/// quotas `round(fraction * total_frames)` per level (largest level absorbs
/// rounding drift). Azimuths are seeded uniform; signals are noise bursts.
pub fn polyphony_preset_events(
    length_s: f64,
    fractions: &[(usize, f64)],
    class_index: usize,
    seed: u64,
) -> Result<Vec<EventSpec>> {
    if fractions.is_empty() {
        return Err(SeldError::invalid("need at least one polyphony level"));
    }
    if fractions
        .iter()
        .any(|&(k, f)| k == 0 || k > MAX_SIMULTANEOUS_SOURCES || !(0.0..=1.0).contains(&f))
    {
        return Err(SeldError::invalid("invalid polyphony level or fraction"));
    }
    let total: f64 = fractions.iter().map(|&(_, f)| f).sum();
    if (total - 1.0).abs() > 0.01 {
        return Err(SeldError::invalid(format!(
            "polyphony fractions sum to {total}, expected 1"
        )));
    }
    let num_frames = label_frames_for_duration(length_s);
    if num_frames == 0 {
        return Err(SeldError::invalid("scene too short for one label frame"));
    }

    // Integer frame quotas, drift absorbed by the largest-fraction level.
    let mut quotas: Vec<(usize, usize)> = fractions
        .iter()
        .map(|&(k, f)| (k, (f * num_frames as f64).round() as usize))
        .collect();
    let drift = num_frames as isize - quotas.iter().map(|&(_, q)| q as isize).sum::<isize>();
    let biggest = quotas
        .iter()
        .enumerate()
        .max_by_key(|(_, &(_, q))| q)
        .map(|(i, _)| i)
        .unwrap();
    quotas[biggest].1 = (quotas[biggest].1 as isize + drift).max(0) as usize;

    // Cut quotas into segments of at most 20 frames (2 s) and interleave.
    const SEGMENT_FRAMES: usize = 20;
    let mut segments: Vec<(usize, usize)> = Vec::new(); // (polyphony, frames)
    for &(k, mut remaining) in &quotas {
        while remaining > 0 {
            let take = remaining.min(SEGMENT_FRAMES);
            segments.push((k, take));
            remaining -= take;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX - 16));
    // Fisher-Yates shuffle for a deterministic interleaving.
    for i in (1..segments.len()).rev() {
        let j = rng.random_range(0..=i);
        segments.swap(i, j);
    }

    let mut events = Vec::new();
    let mut frame_cursor = 0usize;
    for (count, seg_frames) in segments {
        let onset_s = frame_cursor as f64 * LABEL_FRAME_SECONDS;
        let duration_s = seg_frames as f64 * LABEL_FRAME_SECONDS;
        for _ in 0..count {
            let az = rng.random_range(-180.0f64..180.0);
            events.push(EventSpec {
                class_index,
                onset_s,
                duration_s,
                direction: DirectionSpec::Static(Direction::horizontal(az)),
                signal: SourceSignal::NoiseBurst,
                gain_db: 0.0,
            });
        }
        frame_cursor += seg_frames;
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn basic_event(onset_s: f64, duration_s: f64, az: f64) -> EventSpec {
        EventSpec {
            class_index: 3,
            onset_s,
            duration_s,
            direction: DirectionSpec::Static(Direction::horizontal(az)),
            signal: SourceSignal::NoiseBurst,
            gain_db: 0.0,
        }
    }

    fn scene(events: Vec<EventSpec>, seed: u64) -> SceneSpec {
        SceneSpec {
            length_s: 2.0,
            sample_rate_hz: 24000,
            events,
            noise_floor_db: None,
            reverb: None,
            rng_seed: seed,
        }
    }

    #[test]
    fn annotations_follow_the_midpoint_rule() {
        // Event spans [0.5, 1.2): midpoints 0.55..1.15 -> frames 5..=11.
        let (_, anns) = synthesize_scene(&scene(vec![basic_event(0.5, 0.7, 40.0)], 7)).unwrap();
        let frames: Vec<usize> = anns.iter().map(|a| a.frame_index).collect();
        assert_eq!(frames, (5..=11).collect::<Vec<_>>());
        for a in &anns {
            assert_eq!(a.class_index, 3);
            assert_eq!(a.source_index, 0);
            assert_eq!(a.azimuth_deg, 40.0);
            assert_eq!(a.elevation_deg, 0.0);
        }
    }

    #[test]
    fn synthesis_is_bit_deterministic() {
        let spec = SceneSpec {
            noise_floor_db: Some(-45.0),
            reverb: Some(ReverbSpec {
                rt60_s: 0.2,
                wet_gain_db: -12.0,
            }),
            ..scene(
                vec![basic_event(0.1, 0.5, -70.0), basic_event(0.9, 0.8, 120.0)],
                1234,
            )
        };
        let (a1, n1) = synthesize_scene(&spec).unwrap();
        let (a2, n2) = synthesize_scene(&spec).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(n1, n2);
        // A different seed changes the audio but not the ground truth.
        let (b1, nb) = synthesize_scene(&SceneSpec {
            rng_seed: 99,
            ..spec.clone()
        })
        .unwrap();
        assert_ne!(a1, b1);
        assert_eq!(n1, nb);
    }

    #[test]
    fn audio_is_a_sum_of_encoded_sources() {
        // One deterministic event: the buffer must equal the encoded signal.
        let samples: Vec<f64> = (0..12000).map(|i| (i as f64 * 0.01).sin()).collect();
        let ev = EventSpec {
            class_index: 0,
            onset_s: 0.0,
            duration_s: 0.5,
            direction: DirectionSpec::Static(Direction::horizontal(30.0)),
            signal: SourceSignal::Samples(samples.clone()),
            gain_db: 0.0,
        };
        let (foa, _) = synthesize_scene(&scene(vec![ev], 5)).unwrap();
        let mut expected = samples[..12000].to_vec();
        apply_fades(&mut expected, 24000.0);
        for i in 0..12000 {
            assert_abs_diff_eq!(foa.w()[i], expected[i], epsilon = 1e-12);
            assert_abs_diff_eq!(
                foa.y()[i],
                expected[i] * sin_deg(30.0),
                epsilon = 1e-12
            );
        }
        // Tail is silent.
        assert!(foa.w()[12000..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn trajectory_annotations_track_the_midpoint_azimuth() {
        let ev = EventSpec {
            class_index: 1,
            onset_s: 0.0,
            duration_s: 2.0,
            direction: DirectionSpec::AzimuthPath(vec![(0.0, -40.0), (2.0, 40.0)]),
            signal: SourceSignal::ToneComplex {
                fundamental_hz: 220.0,
                partials: 6,
            },
            gain_db: -3.0,
        };
        let (_, anns) = synthesize_scene(&scene(vec![ev], 3)).unwrap();
        assert_eq!(anns.len(), 20);
        for a in &anns {
            let mid = a.frame_midpoint_s();
            let expect = -40.0 + 80.0 * mid / 2.0;
            assert_abs_diff_eq!(a.azimuth_deg, expect, epsilon = 1e-9);
        }
        // Path through the wrap seam stays continuous in annotations.
        let seam = EventSpec {
            direction: DirectionSpec::AzimuthPath(vec![(0.0, 170.0), (2.0, 190.0)]),
            ..basic_event(0.0, 2.0, 0.0)
        };
        let (_, anns) = synthesize_scene(&scene(vec![seam], 3)).unwrap();
        assert_abs_diff_eq!(anns[0].azimuth_deg, 170.5, epsilon = 1e-9);
        assert_abs_diff_eq!(anns[19].azimuth_deg, -170.5, epsilon = 1e-9);
    }

    #[test]
    fn scene_bounds_and_class_are_validated() {
        let too_long = scene(vec![basic_event(1.8, 0.5, 0.0)], 1);
        assert!(synthesize_scene(&too_long).is_err());
        let bad_class = scene(
            vec![EventSpec {
                class_index: NUM_CLASSES,
                ..basic_event(0.0, 0.5, 0.0)
            }],
            1,
        );
        assert!(synthesize_scene(&bad_class).is_err());
        let neg_onset = scene(vec![basic_event(-0.1, 0.5, 0.0)], 1);
        assert!(synthesize_scene(&neg_onset).is_err());
    }

    #[test]
    fn too_many_simultaneous_sources_is_an_error() {
        let events: Vec<_> = (0..6).map(|i| basic_event(0.0, 1.0, i as f64 * 30.0)).collect();
        let err = synthesize_scene(&scene(events, 1)).unwrap_err();
        assert!(err.to_string().contains("simultaneous"));
        let five: Vec<_> = (0..5).map(|i| basic_event(0.0, 1.0, i as f64 * 30.0)).collect();
        assert!(synthesize_scene(&scene(five, 1)).is_ok());
    }

    #[test]
    fn noise_floor_is_w_dominant() {
        let spec = SceneSpec {
            noise_floor_db: Some(-40.0),
            ..scene(Vec::new(), 42)
        };
        let (foa, anns) = synthesize_scene(&spec).unwrap();
        assert!(anns.is_empty());
        let rms = |c: &[f64]| (c.iter().map(|v| v * v).sum::<f64>() / c.len() as f64).sqrt();
        let w = rms(foa.w());
        // Uniform(-1,1) has RMS 1/sqrt(3).
        assert_abs_diff_eq!(w, db_to_gain(-40.0) / 3.0f64.sqrt(), epsilon = w * 0.05);
        for ch in [foa.y(), foa.z(), foa.x()] {
            assert_abs_diff_eq!(rms(ch) / w, DIFFUSE_XYZ_GAIN, epsilon = 0.05);
        }
    }

    #[test]
    fn reverb_extends_energy_past_the_event() {
        let dry_spec = scene(vec![basic_event(0.2, 0.3, 10.0)], 9);
        let wet_spec = SceneSpec {
            reverb: Some(ReverbSpec {
                rt60_s: 0.4,
                wet_gain_db: -6.0,
            }),
            ..dry_spec.clone()
        };
        let (dry, _) = synthesize_scene(&dry_spec).unwrap();
        let (wet, _) = synthesize_scene(&wet_spec).unwrap();
        let tail = |b: &FoaBuffer| b.w()[14400..19200].iter().map(|v| v * v).sum::<f64>();
        assert_eq!(tail(&dry), 0.0);
        assert!(tail(&wet) > 0.0);
    }

    #[test]
    fn polyphony_profile_counts_frames() {
        let anns = vec![
            EventAnnotation::horizontal(0, 0, 0, 0.0),
            EventAnnotation::horizontal(1, 0, 0, 0.0),
            EventAnnotation::horizontal(1, 1, 1, 50.0),
            EventAnnotation::horizontal(2, 0, 0, 0.0),
        ];
        let profile = polyphony_profile(&anns);
        assert_abs_diff_eq!(profile[&1], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(profile[&2], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn preset_hits_exact_polyphony_quotas() {
        let fractions = [(1usize, 0.56), (2, 0.31), (3, 0.10), (4, 0.03)];
        let events = polyphony_preset_events(60.0, &fractions, 2, 77).unwrap();
        let spec = SceneSpec {
            length_s: 60.0,
            sample_rate_hz: 24000,
            events,
            noise_floor_db: None,
            reverb: None,
            rng_seed: 77,
        };
        let (_, anns) = synthesize_scene(&spec).unwrap();
        let profile = polyphony_profile(&anns);
        // 600 frames -> 336/186/60/18, exact.
        assert_abs_diff_eq!(profile[&1], 0.56, epsilon = 1e-12);
        assert_abs_diff_eq!(profile[&2], 0.31, epsilon = 1e-12);
        assert_abs_diff_eq!(profile[&3], 0.10, epsilon = 1e-12);
        assert_abs_diff_eq!(profile[&4], 0.03, epsilon = 1e-12);
    }

    #[test]
    fn preset_rejects_bad_fractions() {
        assert!(polyphony_preset_events(10.0, &[(1, 0.5), (2, 0.2)], 0, 1).is_err());
        assert!(polyphony_preset_events(10.0, &[(0, 1.0)], 0, 1).is_err());
        assert!(polyphony_preset_events(10.0, &[(6, 1.0)], 0, 1).is_err());
    }
}
