//! SELD evaluation: optimal prediction/reference matching per frame and
//! class, and the standard metric quartet (error rate, F-score,
//! localization error, localization recall) plus their composed average.
//!
//! Matching minimizes total angular distance via the Hungarian algorithm.
//! Detection metrics (ER, F) gate true positives at an angular tolerance;
//! localization metrics (LE, LR) are threshold-free and use every matched
//! pair.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::annotation::EventAnnotation;

/// Angular tolerance in degrees for counting a matched pair as a true
/// positive in ER/F.
pub const DEFAULT_TOLERANCE_DEG: f64 = 20.0;

/// Great-circle distance between two directions, in degrees.
///
/// Haversine form: exact zero for identical directions and stable near
/// antipodes.
pub fn angular_distance_deg(az1: f64, el1: f64, az2: f64, el2: f64) -> f64 {
    let (az1, el1, az2, el2) = (
        az1.to_radians(),
        el1.to_radians(),
        az2.to_radians(),
        el2.to_radians(),
    );
    let sd_el = ((el1 - el2) / 2.0).sin();
    let sd_az = ((az1 - az2) / 2.0).sin();
    let h = sd_el * sd_el + el1.cos() * el2.cos() * sd_az * sd_az;
    2.0 * h.sqrt().clamp(0.0, 1.0).asin().to_degrees()
}

/// A prediction/reference pair produced by optimal matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub prediction: EventAnnotation,
    pub reference: EventAnnotation,
    pub distance_deg: f64,
}

/// Outcome of matching predictions to references.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_predictions: Vec<EventAnnotation>,
    pub unmatched_references: Vec<EventAnnotation>,
}

impl MatchResult {
    pub fn merge(&mut self, other: MatchResult) {
        self.pairs.extend(other.pairs);
        self.unmatched_predictions.extend(other.unmatched_predictions);
        self.unmatched_references.extend(other.unmatched_references);
    }

    /// Total number of reference events (matched or not).
    pub fn total_references(&self) -> usize {
        self.pairs.len() + self.unmatched_references.len()
    }

    /// Total number of predicted events (matched or not).
    pub fn total_predictions(&self) -> usize {
        self.pairs.len() + self.unmatched_predictions.len()
    }
}

/// Minimum-cost assignment (Hungarian algorithm with potentials).
///
/// `cost` is rectangular `rows x cols`; every row of the smaller side gets
/// assigned. Returns `(row, col)` pairs in row order.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = cost.len();
    let m = cost.first().map_or(0, |r| r.len());
    if n == 0 || m == 0 {
        return Vec::new();
    }
    if n > m {
        // Transpose so rows <= cols.
        let t: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| cost[i][j]).collect()).collect();
        let mut flipped: Vec<(usize, usize)> =
            min_cost_assignment(&t).into_iter().map(|(r, c)| (c, r)).collect();
        flipped.sort_unstable();
        return flipped;
    }

    // 1-indexed arrays; p[j] is the row assigned to column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| p[j] != 0)
        .map(|j| (p[j] - 1, j - 1))
        .collect();
    out.sort_unstable();
    out
}

/// Matches predictions to references within a single (frame, class) group,
/// minimizing total angular distance.
pub fn match_frame(predictions: &[EventAnnotation], references: &[EventAnnotation]) -> MatchResult {
    if predictions.is_empty() || references.is_empty() {
        return MatchResult {
            pairs: Vec::new(),
            unmatched_predictions: predictions.to_vec(),
            unmatched_references: references.to_vec(),
        };
    }
    let cost: Vec<Vec<f64>> = predictions
        .iter()
        .map(|p| {
            references
                .iter()
                .map(|r| {
                    angular_distance_deg(
                        p.azimuth_deg,
                        p.elevation_deg,
                        r.azimuth_deg,
                        r.elevation_deg,
                    )
                })
                .collect()
        })
        .collect();
    let assignment = min_cost_assignment(&cost);
    let mut pred_used = vec![false; predictions.len()];
    let mut ref_used = vec![false; references.len()];
    let mut pairs = Vec::with_capacity(assignment.len());
    for (pi, ri) in assignment {
        pred_used[pi] = true;
        ref_used[ri] = true;
        pairs.push(MatchedPair {
            prediction: predictions[pi],
            reference: references[ri],
            distance_deg: cost[pi][ri],
        });
    }
    MatchResult {
        pairs,
        unmatched_predictions: predictions
            .iter()
            .zip(&pred_used)
            .filter(|(_, &u)| !u)
            .map(|(p, _)| *p)
            .collect(),
        unmatched_references: references
            .iter()
            .zip(&ref_used)
            .filter(|(_, &u)| !u)
            .map(|(r, _)| *r)
            .collect(),
    }
}

/// Groups annotations by (frame, class) and matches each group.
pub fn match_annotations(
    predictions: &[EventAnnotation],
    references: &[EventAnnotation],
) -> MatchResult {
    let mut groups: BTreeMap<(usize, usize), (Vec<EventAnnotation>, Vec<EventAnnotation>)> =
        BTreeMap::new();
    for p in predictions {
        groups
            .entry((p.frame_index, p.class_index))
            .or_default()
            .0
            .push(*p);
    }
    for r in references {
        groups
            .entry((r.frame_index, r.class_index))
            .or_default()
            .1
            .push(*r);
    }
    let mut result = MatchResult::default();
    for (preds, refs) in groups.values() {
        result.merge(match_frame(preds, refs));
    }
    result
}

/// The SELD metric quartet plus their composed score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeldScores {
    /// Frame-level detection error rate (substitutions + deletions +
    /// insertions over reference count). May exceed 1.
    pub error_rate: f64,
    /// Location-gated detection F-score in [0, 1].
    pub f_score: f64,
    /// Mean angular distance over matched pairs, threshold-free. `None` when
    /// nothing was matched.
    pub localization_error_deg: Option<f64>,
    /// Fraction of reference events with a matched prediction,
    /// threshold-free.
    pub localization_recall: f64,
    /// Composed score, lower is better.
    pub seld_score: f64,
}

/// Composes the four metrics into the single SELD score:
/// `(min(ER, 1) + (1 - F) + LE/180 + (1 - LR)) / 4`, with the LE term
/// saturating to 1 when no pairs exist.
pub fn seld_score(
    error_rate: f64,
    f_score: f64,
    localization_error_deg: Option<f64>,
    localization_recall: f64,
) -> f64 {
    let le_term = localization_error_deg.map_or(1.0, |le| le / 180.0);
    (error_rate.min(1.0) + (1.0 - f_score) + le_term + (1.0 - localization_recall)) / 4.0
}

/// Computes the full metric set from a match result.
///
/// ER follows the frame-level convention: per frame, `S = min(FN, FP)`,
/// `D = FN - S`, `I = FP - S`, summed across frames and divided by the total
/// reference count. Matched pairs beyond `tolerance_deg` count as both FP
/// and FN for detection, but still feed LE and LR.
pub fn compute_scores(result: &MatchResult, tolerance_deg: f64) -> SeldScores {
    #[derive(Default)]
    struct FrameCounts {
        refs: usize,
        tp: usize,
        fp: usize,
        fn_: usize,
    }
    let mut frames: BTreeMap<usize, FrameCounts> = BTreeMap::new();
    for pair in &result.pairs {
        let fc = frames.entry(pair.reference.frame_index).or_default();
        fc.refs += 1;
        if pair.distance_deg <= tolerance_deg {
            fc.tp += 1;
        } else {
            fc.fp += 1;
            fc.fn_ += 1;
        }
    }
    for r in &result.unmatched_references {
        let fc = frames.entry(r.frame_index).or_default();
        fc.refs += 1;
        fc.fn_ += 1;
    }
    for p in &result.unmatched_predictions {
        frames.entry(p.frame_index).or_default().fp += 1;
    }

    let mut total_refs = 0usize;
    let mut errors = 0usize;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for fc in frames.values() {
        total_refs += fc.refs;
        let s = fc.fn_.min(fc.fp);
        errors += s + (fc.fn_ - s) + (fc.fp - s);
        tp += fc.tp;
        fp += fc.fp;
        fn_ += fc.fn_;
    }

    let error_rate = if total_refs > 0 {
        errors as f64 / total_refs as f64
    } else if fp > 0 {
        f64::INFINITY
    } else {
        0.0
    };
    let f_score = if 2 * tp + fp + fn_ > 0 {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    } else {
        1.0
    };
    let localization_error_deg = if result.pairs.is_empty() {
        None
    } else {
        Some(result.pairs.iter().map(|p| p.distance_deg).sum::<f64>() / result.pairs.len() as f64)
    };
    let localization_recall = if result.total_references() > 0 {
        result.pairs.len() as f64 / result.total_references() as f64
    } else {
        1.0
    };
    SeldScores {
        error_rate,
        f_score,
        localization_error_deg,
        localization_recall,
        seld_score: seld_score(
            error_rate,
            f_score,
            localization_error_deg,
            localization_recall,
        ),
    }
}

/// Matches and scores in one step with the default tolerance.
pub fn evaluate(
    predictions: &[EventAnnotation],
    references: &[EventAnnotation],
    tolerance_deg: f64,
) -> (SeldScores, MatchResult) {
    let result = match_annotations(predictions, references);
    let scores = compute_scores(&result, tolerance_deg);
    (scores, result)
}
