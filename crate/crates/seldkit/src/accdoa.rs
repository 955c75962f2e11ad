//! Multi-ACCDOA grid codec: the activity-coupled Cartesian DOA target
//! format, where each (frame, class, track) cell holds a 3-vector whose
//! norm is the activity and whose direction is the DOA.
//!
//! Encoding writes unit vectors for active events and zeros elsewhere;
//! decoding recovers events wherever the vector norm clears the activity
//! threshold. With the default 13 classes and 3 tracks the codec covers up
//! to three simultaneous same-class events; more than that cannot be
//! represented and is an error.

use std::collections::BTreeMap;

use crate::annotation::{EventAnnotation, NUM_CLASSES};
use crate::error::{Result, SeldError};
use crate::util::{cos_deg, sin_deg};

/// Default number of per-class tracks.
pub const NUM_TRACKS: usize = 3;

/// Default activity threshold for decoding.
pub const DEFAULT_DECODE_THRESHOLD: f64 = 0.5;

/// Dense `frames x classes x tracks x 3` grid of Cartesian DOA vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct AccdoaGrid {
    frames: usize,
    classes: usize,
    tracks: usize,
    data: Vec<f64>,
}

impl AccdoaGrid {
    pub fn zeros(frames: usize, classes: usize, tracks: usize) -> Self {
        AccdoaGrid {
            frames,
            classes,
            tracks,
            data: vec![0.0; frames * classes * tracks * 3],
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn tracks(&self) -> usize {
        self.tracks
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.frames, self.classes, self.tracks, 3]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn from_data(frames: usize, classes: usize, tracks: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != frames * classes * tracks * 3 {
            return Err(SeldError::invalid(format!(
                "grid data length {} does not match {}x{}x{}x3",
                data.len(),
                frames,
                classes,
                tracks
            )));
        }
        Ok(AccdoaGrid {
            frames,
            classes,
            tracks,
            data,
        })
    }

    fn offset(&self, frame: usize, class: usize, track: usize) -> usize {
        ((frame * self.classes + class) * self.tracks + track) * 3
    }

    pub fn vector(&self, frame: usize, class: usize, track: usize) -> [f64; 3] {
        let o = self.offset(frame, class, track);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn set_vector(&mut self, frame: usize, class: usize, track: usize, v: [f64; 3]) {
        let o = self.offset(frame, class, track);
        self.data[o..o + 3].copy_from_slice(&v);
    }
}

/// Encodes annotations into a Multi-ACCDOA grid.
///
/// Simultaneous same-class events occupy tracks in ascending `source_index`
/// order. Errors: a frame or class index out of range, or more same-class
/// events in one frame than there are tracks.
pub fn encode_accdoa(
    annotations: &[EventAnnotation],
    num_frames: usize,
    classes: usize,
    tracks: usize,
) -> Result<AccdoaGrid> {
    let mut grid = AccdoaGrid::zeros(num_frames, classes, tracks);
    let mut groups: BTreeMap<(usize, usize), Vec<&EventAnnotation>> = BTreeMap::new();
    for a in annotations {
        if a.frame_index >= num_frames {
            return Err(SeldError::invalid(format!(
                "frame index {} outside grid of {} frames",
                a.frame_index, num_frames
            )));
        }
        if a.class_index >= classes {
            return Err(SeldError::invalid(format!(
                "class index {} outside {} classes",
                a.class_index, classes
            )));
        }
        groups
            .entry((a.frame_index, a.class_index))
            .or_default()
            .push(a);
    }
    for ((frame, class), mut events) in groups {
        if events.len() > tracks {
            return Err(SeldError::invalid(format!(
                "{} simultaneous events of class {class} in frame {frame}, grid has {tracks} tracks",
                events.len()
            )));
        }
        events.sort_by_key(|a| a.source_index);
        for (track, a) in events.iter().enumerate() {
            let (ca, sa) = (cos_deg(a.azimuth_deg), sin_deg(a.azimuth_deg));
            let (ce, se) = (cos_deg(a.elevation_deg), sin_deg(a.elevation_deg));
            grid.set_vector(frame, class, track, [ca * ce, sa * ce, se]);
        }
    }
    Ok(grid)
}

/// Decodes a grid back to annotations: every cell whose vector norm exceeds
/// `threshold` becomes an event with the vector's direction, the track index
/// as `source_index`, and elevation from the z component.
///
/// The threshold must lie strictly inside (0, 1).
pub fn decode_accdoa(grid: &AccdoaGrid, threshold: f64) -> Result<Vec<EventAnnotation>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(SeldError::invalid(format!(
            "decode threshold {threshold} outside (0, 1)"
        )));
    }
    let mut out = Vec::new();
    for frame in 0..grid.frames() {
        for class in 0..grid.classes() {
            for track in 0..grid.tracks() {
                let [x, y, z] = grid.vector(frame, class, track);
                let norm = (x * x + y * y + z * z).sqrt();
                if norm > threshold {
                    out.push(EventAnnotation {
                        frame_index: frame,
                        class_index: class,
                        source_index: track,
                        azimuth_deg: crate::ambisonics::wrap_azimuth_deg(
                            y.atan2(x).to_degrees(),
                        ),
                        elevation_deg: z.atan2(x.hypot(y)).to_degrees(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Encodes with the reference shape: 13 classes, 3 tracks.
pub fn encode_accdoa_default(
    annotations: &[EventAnnotation],
    num_frames: usize,
) -> Result<AccdoaGrid> {
    encode_accdoa(annotations, num_frames, NUM_CLASSES, NUM_TRACKS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn round_trip_recovers_annotations() {
        let input = vec![
            EventAnnotation::horizontal(0, 2, 0, 30.0),
            EventAnnotation::horizontal(0, 2, 1, -120.0),
            EventAnnotation::horizontal(3, 7, 0, 179.0),
            EventAnnotation::horizontal(49, 12, 0, -180.0),
        ];
        let grid = encode_accdoa_default(&input, 50).unwrap();
        assert_eq!(grid.shape(), [50, 13, 3, 3]);
        let mut decoded = decode_accdoa(&grid, DEFAULT_DECODE_THRESHOLD).unwrap();
        crate::annotation::sort_annotations(&mut decoded);
        assert_eq!(decoded.len(), input.len());
        for (d, i) in decoded.iter().zip(&input) {
            assert_eq!(d.frame_index, i.frame_index);
            assert_eq!(d.class_index, i.class_index);
            assert_abs_diff_eq!(d.azimuth_deg, i.azimuth_deg, epsilon = 1e-9);
            assert_abs_diff_eq!(d.elevation_deg, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn round_trip_with_elevation() {
        let input = vec![EventAnnotation {
            frame_index: 1,
            class_index: 4,
            source_index: 0,
            azimuth_deg: -45.0,
            elevation_deg: 33.0,
        }];
        let grid = encode_accdoa_default(&input, 2).unwrap();
        let decoded = decode_accdoa(&grid, 0.5).unwrap();
        assert_eq!(decoded.len(), 1);
        assert_abs_diff_eq!(decoded[0].azimuth_deg, -45.0, epsilon = 1e-9);
        assert_abs_diff_eq!(decoded[0].elevation_deg, 33.0, epsilon = 1e-9);
    }

    #[test]
    fn active_cells_have_unit_norm_inactive_zero() {
        let input = vec![EventAnnotation::horizontal(0, 0, 0, 60.0)];
        let grid = encode_accdoa_default(&input, 1).unwrap();
        let [x, y, z] = grid.vector(0, 0, 0);
        assert_abs_diff_eq!((x * x + y * y + z * z).sqrt(), 1.0, epsilon = 1e-12);
        for class in 0..13 {
            for track in 0..3 {
                if (class, track) == (0, 0) {
                    continue;
                }
                assert_eq!(grid.vector(0, class, track), [0.0; 3]);
            }
        }
    }

    #[test]
    fn overflow_polyphony_is_an_error() {
        let input: Vec<_> = (0..4)
            .map(|i| EventAnnotation::horizontal(0, 5, i, i as f64 * 20.0))
            .collect();
        let err = encode_accdoa_default(&input, 1).unwrap_err();
        assert!(err.to_string().contains("4 simultaneous"));
        // Three fit fine.
        assert!(encode_accdoa_default(&input[..3], 1).is_ok());
    }

    #[test]
    fn out_of_range_indices_are_errors() {
        let bad_frame = vec![EventAnnotation::horizontal(10, 0, 0, 0.0)];
        assert!(encode_accdoa_default(&bad_frame, 10).is_err());
        let bad_class = vec![EventAnnotation::horizontal(0, 13, 0, 0.0)];
        assert!(encode_accdoa_default(&bad_class, 1).is_err());
    }

    #[test]
    fn threshold_gates_activity() {
        let mut grid = AccdoaGrid::zeros(1, 1, 1);
        // A sub-unit vector models a weak detection.
        grid.set_vector(0, 0, 0, [0.4 * 0.8, 0.4 * 0.6, 0.0]);
        assert!(decode_accdoa(&grid, 0.5).unwrap().is_empty());
        let kept = decode_accdoa(&grid, 0.3).unwrap();
        assert_eq!(kept.len(), 1);
        assert_abs_diff_eq!(
            kept[0].azimuth_deg,
            0.6f64.atan2(0.8).to_degrees(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn threshold_must_be_in_unit_interval() {
        let grid = AccdoaGrid::zeros(1, 1, 1);
        assert!(decode_accdoa(&grid, 0.0).is_err());
        assert!(decode_accdoa(&grid, 1.0).is_err());
        assert!(decode_accdoa(&grid, -0.2).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_any_horizontal_layout(
            azimuths in proptest::collection::vec(-180.0f64..180.0, 1..9),
        ) {
            // Spread events over frames/classes so no cell overflows.
            let input: Vec<_> = azimuths
                .iter()
                .enumerate()
                .map(|(i, &az)| EventAnnotation::horizontal(i / 13, i % 13, 0, az))
                .collect();
            let frames = input.last().unwrap().frame_index + 1;
            let grid = encode_accdoa_default(&input, frames).unwrap();
            let mut decoded = decode_accdoa(&grid, 0.5).unwrap();
            crate::annotation::sort_annotations(&mut decoded);
            prop_assert_eq!(decoded.len(), input.len());
            for (d, i) in decoded.iter().zip(&input) {
                prop_assert_eq!(d.frame_index, i.frame_index);
                prop_assert_eq!(d.class_index, i.class_index);
                prop_assert!((d.azimuth_deg - i.azimuth_deg).abs() < 1e-9);
            }
        }
    }
}
