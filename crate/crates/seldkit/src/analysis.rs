//! Quadrant-confusion and polyphony breakdowns over match results.
//!
//! These reports slice the matched pairs two ways: by the true source's
//! azimuth quadrant (front/back confusion analysis) and by the number of
//! simultaneous reference sources in the frame (polyphony analysis).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ambisonics::wrap_azimuth_deg;
use crate::annotation::EventAnnotation;
use crate::metrics::MatchResult;

/// Horizontal-plane quadrant. Assignment uses half-open intervals so every
/// azimuth lands in exactly one quadrant: Front `[-45, 45)`, Left
/// `[45, 135)`, Back `[135, 180) ∪ [-180, -135)`, Right `[-135, -45)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrant {
    Front,
    Left,
    Back,
    Right,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::Front,
        Quadrant::Left,
        Quadrant::Back,
        Quadrant::Right,
    ];

    /// Index into the confusion-matrix axes.
    pub fn index(self) -> usize {
        match self {
            Quadrant::Front => 0,
            Quadrant::Left => 1,
            Quadrant::Back => 2,
            Quadrant::Right => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quadrant::Front => "front",
            Quadrant::Left => "left",
            Quadrant::Back => "back",
            Quadrant::Right => "right",
        }
    }
}

/// Maps an azimuth to its quadrant (wrapping first, so the function is
/// total).
pub fn quadrant_of(azimuth_deg: f64) -> Quadrant {
    let az = wrap_azimuth_deg(azimuth_deg);
    if (-45.0..45.0).contains(&az) {
        Quadrant::Front
    } else if (45.0..135.0).contains(&az) {
        Quadrant::Left
    } else if (-135.0..-45.0).contains(&az) {
        Quadrant::Right
    } else {
        Quadrant::Back
    }
}

/// True-quadrant x predicted-quadrant confusion over matched pairs, plus
/// per-true-quadrant localization error.
///
/// Counts cover matched pairs only — an unmatched prediction has no true
/// quadrant to attribute it to — with the unmatched populations tallied
/// separately.
#[derive(Debug, Clone, Serialize)]
pub struct QuadrantReport {
    /// Raw pair counts, `counts[true][predicted]`.
    pub counts: [[usize; 4]; 4],
    /// Row-normalized confusion; rows without support stay all-zero.
    pub confusion: [[f64; 4]; 4],
    /// Mean matched-pair angular error grouped by true quadrant; `None`
    /// where the quadrant has no matched pairs.
    pub per_quadrant_le_deg: [Option<f64>; 4],
    pub unmatched_predictions: usize,
    pub unmatched_references: usize,
}

impl QuadrantReport {
    /// Fraction of a true quadrant's mass on the diagonal.
    pub fn diagonal(&self, quadrant: Quadrant) -> f64 {
        self.confusion[quadrant.index()][quadrant.index()]
    }
}

/// Builds the quadrant confusion report from a match result.
pub fn quadrant_confusion(matches: &MatchResult) -> QuadrantReport {
    let mut counts = [[0usize; 4]; 4];
    let mut le_sums = [0.0f64; 4];
    for pair in &matches.pairs {
        let t = quadrant_of(pair.reference.azimuth_deg).index();
        let p = quadrant_of(pair.prediction.azimuth_deg).index();
        counts[t][p] += 1;
        le_sums[t] += pair.distance_deg;
    }
    let mut confusion = [[0.0f64; 4]; 4];
    let mut per_quadrant_le_deg = [None; 4];
    for t in 0..4 {
        let row_total: usize = counts[t].iter().sum();
        if row_total > 0 {
            for p in 0..4 {
                confusion[t][p] = counts[t][p] as f64 / row_total as f64;
            }
            per_quadrant_le_deg[t] = Some(le_sums[t] / row_total as f64);
        }
    }
    QuadrantReport {
        counts,
        confusion,
        per_quadrant_le_deg,
        unmatched_predictions: matches.unmatched_predictions.len(),
        unmatched_references: matches.unmatched_references.len(),
    }
}

/// Per-polyphony-level slice of the match result.
#[derive(Debug, Clone, Serialize)]
pub struct PolyphonyBucket {
    /// Number of annotated frames at this polyphony level.
    pub frames: usize,
    /// Reference events in those frames.
    pub ref_count: usize,
    /// Matched pairs in those frames.
    pub matched: usize,
    /// Localization recall: `matched / ref_count`.
    pub recall: f64,
    /// Mean matched-pair angular error; `None` when nothing matched.
    pub mean_le_deg: Option<f64>,
}

/// Buckets the match result by each frame's simultaneous reference-source
/// count. Keys are the polyphony level with 4 standing for "4 or more";
/// levels with no frames are omitted.
pub fn polyphony_breakdown(
    matches: &MatchResult,
    references: &[EventAnnotation],
) -> BTreeMap<usize, PolyphonyBucket> {
    let mut per_frame: BTreeMap<usize, usize> = BTreeMap::new();
    for r in references {
        *per_frame.entry(r.frame_index).or_insert(0) += 1;
    }
    let bucket_key = |frame: usize| per_frame.get(&frame).copied().unwrap_or(0).min(4);

    struct Acc {
        frames: usize,
        refs: usize,
        matched: usize,
        le_sum: f64,
    }
    let mut accs: BTreeMap<usize, Acc> = BTreeMap::new();
    for (&frame, &count) in &per_frame {
        let acc = accs.entry(count.min(4)).or_insert(Acc {
            frames: 0,
            refs: 0,
            matched: 0,
            le_sum: 0.0,
        });
        acc.frames += 1;
        acc.refs += count;
        let _ = frame;
    }
    for pair in &matches.pairs {
        if let Some(acc) = accs.get_mut(&bucket_key(pair.reference.frame_index)) {
            acc.matched += 1;
            acc.le_sum += pair.distance_deg;
        }
    }
    accs.into_iter()
        .map(|(level, acc)| {
            (
                level,
                PolyphonyBucket {
                    frames: acc.frames,
                    ref_count: acc.refs,
                    matched: acc.matched,
                    recall: if acc.refs > 0 {
                        acc.matched as f64 / acc.refs as f64
                    } else {
                        0.0
                    },
                    mean_le_deg: if acc.matched > 0 {
                        Some(acc.le_sum / acc.matched as f64)
                    } else {
                        None
                    },
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doa::front_back_mirror;
    use crate::metrics::match_annotations;
    use approx::assert_abs_diff_eq;

    fn ann(frame: usize, class: usize, az: f64) -> EventAnnotation {
        EventAnnotation::horizontal(frame, class, 0, az)
    }

    #[test]
    fn quadrant_assignment_follows_half_open_intervals() {
        assert_eq!(quadrant_of(0.0), Quadrant::Front);
        assert_eq!(quadrant_of(50.0), Quadrant::Left);
        assert_eq!(quadrant_of(-179.5), Quadrant::Back);
        // Boundary ties resolve toward the counterclockwise quadrant.
        assert_eq!(quadrant_of(45.0), Quadrant::Left);
        assert_eq!(quadrant_of(-45.0), Quadrant::Front);
        assert_eq!(quadrant_of(135.0), Quadrant::Back);
        assert_eq!(quadrant_of(-135.0), Quadrant::Right);
        assert_eq!(quadrant_of(180.0), Quadrant::Back);
        assert_eq!(quadrant_of(-180.0), Quadrant::Back);
    }

    #[test]
    fn quadrants_partition_the_circle() {
        let mut az = -180.0;
        while az < 180.0 {
            let q = quadrant_of(az);
            let memberships = [
                (-45.0..45.0).contains(&az),
                (45.0..135.0).contains(&az),
                az >= 135.0 || az < -135.0,
                (-135.0..-45.0).contains(&az),
            ];
            assert_eq!(memberships.iter().filter(|&&m| m).count(), 1, "az={az}");
            assert!(memberships[q.index()], "az={az} assigned {q:?}");
            az += 0.25;
        }
    }

    #[test]
    fn perfect_predictions_give_identity_confusion() {
        let refs: Vec<EventAnnotation> = (0..versatile_grid().len())
            .map(|i| ann(i, 0, versatile_grid()[i]))
            .collect();
        let result = match_annotations(&refs, &refs);
        let report = quadrant_confusion(&result);
        for t in 0..4 {
            for p in 0..4 {
                let expected = if t == p { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(report.confusion[t][p], expected, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(
                report.per_quadrant_le_deg[t].unwrap(),
                0.0,
                epsilon = 1e-9
            );
        }
        assert_eq!(report.unmatched_predictions, 0);
        assert_eq!(report.unmatched_references, 0);
    }

    fn versatile_grid() -> Vec<f64> {
        (0..72).map(|i| -180.0 + 5.0 * i as f64).collect()
    }

    #[test]
    fn front_back_mirror_swaps_front_and_back_rows() {
        // Mirroring predictions az -> wrap(180 - az) moves Front-row mass to
        // the Back column and vice versa while lateral quadrants keep their
        // diagonal (the mirror fixes +-90).
        let grid = versatile_grid();
        let refs: Vec<EventAnnotation> =
            grid.iter().enumerate().map(|(i, &az)| ann(i, 0, az)).collect();
        let preds: Vec<EventAnnotation> = grid
            .iter()
            .enumerate()
            .map(|(i, &az)| ann(i, 0, front_back_mirror(az)))
            .collect();
        let report = quadrant_confusion(&match_annotations(&preds, &refs));
        // All but the -45/135 boundary azimuths (which the mirror carries
        // into the adjacent lateral quadrant) swap front <-> back.
        assert!(report.confusion[0][2] >= 0.9, "front -> back");
        assert!(report.confusion[2][0] >= 0.9, "back -> front");
        // Lateral rows keep most mass on the diagonal: sources within 45 deg
        // of +-90 stay in quadrant under the mirror.
        assert!(report.diagonal(Quadrant::Left) > 0.9);
        assert!(report.diagonal(Quadrant::Right) > 0.9);
    }

    #[test]
    fn confusion_rows_are_normalized_and_counts_raw() {
        let refs = vec![ann(0, 0, 10.0), ann(1, 0, 20.0), ann(2, 0, 90.0)];
        let preds = vec![ann(0, 0, 12.0), ann(1, 0, 160.0), ann(2, 0, 95.0)];
        let report = quadrant_confusion(&match_annotations(&preds, &refs));
        assert_eq!(report.counts[0][0], 1);
        assert_eq!(report.counts[0][2], 1);
        assert_abs_diff_eq!(report.confusion[0][0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.confusion[0][2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.confusion[1][1], 1.0, epsilon = 1e-12);
        // Back and Right rows have no support: all-zero, LE absent.
        assert!(report.confusion[2].iter().all(|&v| v == 0.0));
        assert!(report.per_quadrant_le_deg[2].is_none());
        // Row sums are 1 where supported.
        for t in [0usize, 1] {
            assert_abs_diff_eq!(
                report.confusion[t].iter().sum::<f64>(),
                1.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn rotating_both_sides_permutes_the_confusion_matrix() {
        let grid = versatile_grid();
        let refs: Vec<EventAnnotation> =
            grid.iter().enumerate().map(|(i, &az)| ann(i, 0, az)).collect();
        let preds: Vec<EventAnnotation> = grid
            .iter()
            .enumerate()
            .map(|(i, &az)| ann(i, 0, front_back_mirror(az)))
            .collect();
        let base = quadrant_confusion(&match_annotations(&preds, &refs));
        let rot = |a: &EventAnnotation| ann(a.frame_index, a.class_index, a.azimuth_deg + 180.0);
        let refs_r: Vec<EventAnnotation> = refs.iter().map(rot).collect();
        let preds_r: Vec<EventAnnotation> = preds.iter().map(rot).collect();
        let rotated = quadrant_confusion(&match_annotations(&preds_r, &refs_r));
        // R180 maps Front<->Back and Left<->Right on both axes.
        let perm = [2usize, 3, 0, 1];
        for t in 0..4 {
            for p in 0..4 {
                assert_eq!(rotated.counts[perm[t]][perm[p]], base.counts[t][p]);
            }
        }
    }

    #[test]
    fn polyphony_buckets_slice_by_frame_source_count() {
        // Frames 0-1 single-source, frame 2 has two sources, frame 3 has
        // five (bucketed as 4+).
        let mut refs = vec![ann(0, 0, 10.0), ann(1, 0, 20.0)];
        refs.push(ann(2, 0, 40.0));
        refs.push(EventAnnotation::horizontal(2, 1, 0, -40.0));
        for class in 0..5 {
            refs.push(EventAnnotation::horizontal(3, class, 0, class as f64 * 30.0));
        }
        // Predictions: both singles, one of the two in frame 2, none in 3.
        let preds = vec![ann(0, 0, 10.0), ann(1, 0, 25.0), ann(2, 0, 42.0)];
        let result = match_annotations(&preds, &refs);
        let buckets = polyphony_breakdown(&result, &refs);
        assert_eq!(
            buckets.keys().copied().collect::<Vec<_>>(),
            vec![1, 2, 4]
        );
        let b1 = &buckets[&1];
        assert_eq!((b1.frames, b1.ref_count, b1.matched), (2, 2, 2));
        assert_abs_diff_eq!(b1.recall, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b1.mean_le_deg.unwrap(), 2.5, epsilon = 1e-9);
        let b2 = &buckets[&2];
        assert_eq!((b2.frames, b2.ref_count, b2.matched), (1, 2, 1));
        assert_abs_diff_eq!(b2.recall, 0.5, epsilon = 1e-12);
        let b4 = &buckets[&4];
        assert_eq!((b4.frames, b4.ref_count, b4.matched), (1, 5, 0));
        assert_eq!(b4.recall, 0.0);
        assert!(b4.mean_le_deg.is_none());
        // Frame counts cover every annotated frame; no empty level appears.
        assert_eq!(buckets.values().map(|b| b.frames).sum::<usize>(), 4);
        assert!(!buckets.contains_key(&3));
    }

    #[test]
    fn bucket_recalls_average_to_overall_recall() {
        let mut refs = Vec::new();
        let mut preds = Vec::new();
        for frame in 0..30 {
            let n = 1 + frame % 3;
            for s in 0..n {
                refs.push(EventAnnotation::horizontal(
                    frame,
                    s,
                    0,
                    (frame * 7 + s * 40) as f64 - 100.0,
                ));
            }
            // Predict only the first source per frame.
            preds.push(EventAnnotation::horizontal(
                frame,
                0,
                0,
                (frame * 7) as f64 - 100.0,
            ));
        }
        let result = match_annotations(&preds, &refs);
        let buckets = polyphony_breakdown(&result, &refs);
        let weighted: f64 = buckets
            .values()
            .map(|b| b.recall * b.ref_count as f64)
            .sum::<f64>()
            / buckets.values().map(|b| b.ref_count as f64).sum::<f64>();
        let overall = result.pairs.len() as f64 / refs.len() as f64;
        assert_abs_diff_eq!(weighted, overall, epsilon = 1e-9);
    }
}
