//! Stage orchestration behind the CLI: synth → (augment) → render →
//! estimate → evaluate → report, per representation, over a fixed output
//! directory layout:
//!
//! ```text
//! out/
//!   scenes/           scene_000.wav + scene_000.csv   (FOA + references)
//!   augmented/        scene_000_r000.wav ...          (4x ACS expansion)
//!   rendered/<repr>/  2-channel (or copied FOA) audio
//!   predictions/<repr>/  estimator output CSVs
//!   reports/          scores, analyses, comparison
//! ```
//!
//! Every stage is deterministic given (config, seed); a failed stage removes
//! the partial outputs it created. Stages run sequentially so two runs with
//! one config produce byte-identical reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambisonics::expand_acs;
use crate::analysis::{polyphony_breakdown, quadrant_confusion, PolyphonyBucket, QuadrantReport};
use crate::annotation::{label_frames_for_duration, EventAnnotation};
use crate::config::{PipelineConfig, Representation};
use crate::doa::{
    estimate_doa_2ch, estimate_doa_foa, estimates_to_events, pool_estimates_to_label_frames,
    TdoaMode,
};
use crate::error::{Result, SeldError};
use crate::features::{
    frame_rms, gcc_phat, intensity_vectors, mel_power, stft, MelFilterbank, DEFAULT_GCC_MAX_LAG,
};
use crate::io::{
    read_metadata_csv, read_wav, resample_buffer, write_json, write_metadata_csv, write_text,
    write_wav, MultichannelBuffer,
};
use crate::metrics::{evaluate, SeldScores};
use crate::render::{foa_to_binaural, foa_to_stereo};
use crate::synth::{
    polyphony_preset_events, synthesize_scene, DirectionSpec, EventSpec, ReverbSpec, SceneSpec,
    SourceSignal,
};
use crate::util::derive_seed;

pub const SCENES_DIR: &str = "scenes";
pub const AUGMENTED_DIR: &str = "augmented";
pub const RENDERED_DIR: &str = "rendered";
pub const PREDICTIONS_DIR: &str = "predictions";
pub const REPORTS_DIR: &str = "reports";

/// Stream id for the scene-recipe RNG; synthesis itself reserves the ids
/// near `u64::MAX` down to `u64::MAX - 16`.
const SCENE_RECIPE_STREAM: u64 = u64::MAX - 24;

/// Removes the files a failed stage already wrote.
struct OutputGuard {
    files: Vec<PathBuf>,
    armed: bool,
}

impl OutputGuard {
    fn new() -> Self {
        OutputGuard {
            files: Vec::new(),
            armed: true,
        }
    }

    fn track(&mut self, path: impl Into<PathBuf>) {
        self.files.push(path.into());
    }

    fn disarm(mut self) {
        self.armed = false;
        self.files.clear();
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.armed {
            for file in &self.files {
                let _ = fs::remove_file(file);
            }
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| SeldError::io(path, e))
}

fn scene_stem(index: usize) -> String {
    format!("scene_{index:03}")
}

/// Sorted stems of the `.wav` files in a directory.
fn wav_stems(dir: &Path) -> Result<Vec<String>> {
    let mut stems = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| SeldError::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| SeldError::io(dir, e))?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "wav") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    if stems.is_empty() {
        return Err(SeldError::invalid(format!(
            "no .wav files in {}",
            dir.display()
        )));
    }
    Ok(stems)
}

/// Builds the deterministic scene recipes for a config.
///
/// Azimuths are drawn on the integer-degree grid so the CSV quantization is
/// lossless and rotated copies land exactly on grid points.
fn scene_specs(config: &PipelineConfig) -> Result<Vec<SceneSpec>> {
    let synthesis = &config.synthesis;
    let mut recipe_rng =
        ChaCha8Rng::seed_from_u64(derive_seed(config.seed, SCENE_RECIPE_STREAM));
    let reverb = synthesis.reverb_rt60_s.map(|rt60_s| ReverbSpec {
        rt60_s,
        wet_gain_db: synthesis.reverb_wet_db,
    });
    let mut specs = Vec::with_capacity(synthesis.num_scenes);
    for index in 0..synthesis.num_scenes {
        let scene_seed = derive_seed(config.seed, index as u64);
        let events = if let Some(fractions) = &synthesis.polyphony_fractions {
            let levels: Vec<(usize, f64)> = fractions
                .iter()
                .enumerate()
                .map(|(i, &f)| (i + 1, f))
                .collect();
            polyphony_preset_events(
                synthesis.scene_length_s,
                &levels,
                synthesis.class_index,
                scene_seed,
            )?
        } else {
            (0..synthesis.events_per_scene)
                .map(|_| EventSpec {
                    class_index: synthesis.class_index,
                    onset_s: 0.0,
                    duration_s: synthesis.scene_length_s,
                    direction: DirectionSpec::Static(crate::ambisonics::Direction::horizontal(
                        f64::from(recipe_rng.random_range(-180i32..180)),
                    )),
                    signal: SourceSignal::NoiseBurst,
                    gain_db: 0.0,
                })
                .collect()
        };
        specs.push(SceneSpec {
            length_s: synthesis.scene_length_s,
            sample_rate_hz: config.features.sample_rate_hz,
            events,
            noise_floor_db: synthesis.noise_floor_db,
            reverb,
            rng_seed: scene_seed,
        });
    }
    Ok(specs)
}

/// Synthesizes the configured scene suite into `out/scenes/`.
pub fn run_synth(config: &PipelineConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let dir = out_dir.join(SCENES_DIR);
    create_dir(&dir)?;
    let mut guard = OutputGuard::new();
    let mut written = Vec::new();
    for (index, spec) in scene_specs(config)?.iter().enumerate() {
        let (foa, annotations) = synthesize_scene(spec)?;
        let stem = scene_stem(index);
        let wav_path = dir.join(format!("{stem}.wav"));
        let csv_path = dir.join(format!("{stem}.csv"));
        guard.track(&wav_path);
        guard.track(&csv_path);
        write_wav(&wav_path, &MultichannelBuffer::from_foa(&foa))?;
        write_metadata_csv(&csv_path, &annotations)?;
        written.push(wav_path);
        written.push(csv_path);
    }
    guard.disarm();
    Ok(written)
}

/// Expands every scene fourfold by channel rotation into `out/augmented/`.
/// The `_r000` member is bit-identical to its input.
pub fn run_augment(config: &PipelineConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let src = out_dir.join(SCENES_DIR);
    let dir = out_dir.join(AUGMENTED_DIR);
    create_dir(&dir)?;
    let mut guard = OutputGuard::new();
    let mut written = Vec::new();
    for stem in wav_stems(&src)? {
        let foa = read_wav(src.join(format!("{stem}.wav")))?.to_foa()?;
        let labels = read_metadata_csv(src.join(format!("{stem}.csv")))?;
        for (rotation, (rotated, rotated_labels)) in expand_acs(&foa, &labels).iter().enumerate() {
            let suffix = format!("r{:03}", rotation * 90);
            let wav_path = dir.join(format!("{stem}_{suffix}.wav"));
            let csv_path = dir.join(format!("{stem}_{suffix}.csv"));
            guard.track(&wav_path);
            guard.track(&csv_path);
            write_wav(&wav_path, &MultichannelBuffer::from_foa(rotated))?;
            write_metadata_csv(&csv_path, rotated_labels)?;
            written.push(wav_path);
            written.push(csv_path);
        }
    }
    guard.disarm();
    Ok(written)
}

/// Directory holding the FOA scenes a run works from: the ACS expansion
/// when augmentation is enabled, the raw scenes otherwise.
fn source_dir(config: &PipelineConfig, out_dir: &Path) -> PathBuf {
    if config.acs_enabled {
        out_dir.join(AUGMENTED_DIR)
    } else {
        out_dir.join(SCENES_DIR)
    }
}

/// Renders the FOA sources into `out/rendered/<repr>/`. FOA itself is a
/// pass-through copy so every representation exposes the same layout.
pub fn run_render(
    config: &PipelineConfig,
    out_dir: &Path,
    representation: Representation,
) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let src = source_dir(config, out_dir);
    let dir = out_dir.join(RENDERED_DIR).join(representation.name());
    create_dir(&dir)?;
    let binaural_config = config.renderer.to_binaural();
    binaural_config.validate()?;
    let mut guard = OutputGuard::new();
    let mut written = Vec::new();
    for stem in wav_stems(&src)? {
        let in_path = src.join(format!("{stem}.wav"));
        let out_path = dir.join(format!("{stem}.wav"));
        guard.track(&out_path);
        match representation {
            Representation::Foa => {
                fs::copy(&in_path, &out_path).map_err(|e| SeldError::io(&out_path, e))?;
            }
            Representation::Stereo => {
                let foa = read_wav(&in_path)?.to_foa()?;
                write_wav(&out_path, &MultichannelBuffer::from_stereo(&foa_to_stereo(&foa)))?;
            }
            Representation::Binaural => {
                let foa = read_wav(&in_path)?.to_foa()?;
                let rendered = foa_to_binaural(&foa, &binaural_config)?;
                write_wav(&out_path, &MultichannelBuffer::from_stereo(&rendered))?;
            }
        }
        written.push(out_path);
    }
    guard.disarm();
    Ok(written)
}

/// Runs the representation's classical estimator over one audio buffer,
/// returning label-frame event annotations.
pub fn estimate_events(
    config: &PipelineConfig,
    representation: Representation,
    audio: &MultichannelBuffer,
) -> Result<Vec<EventAnnotation>> {
    if audio.num_channels() != representation.num_channels() {
        return Err(SeldError::invalid(format!(
            "{representation} input expects {} channels, found {}",
            representation.num_channels(),
            audio.num_channels()
        )));
    }
    let target_rate = config.features.sample_rate_hz;
    let resampled;
    let audio = if audio.sample_rate_hz() == target_rate {
        audio
    } else {
        resampled = resample_buffer(audio, target_rate)?;
        &resampled
    };
    let stft_config = config.features.stft_config();
    let num_label_frames =
        label_frames_for_duration(audio.len() as f64 / f64::from(target_rate));
    let hop_s = stft_config.hop_samples as f64 / f64::from(target_rate);
    let window_s = stft_config.window_samples as f64 / f64::from(target_rate);

    let (estimates, threshold) = match representation {
        Representation::Foa => {
            let spectra = audio
                .channels()
                .iter()
                .map(|c| stft(c, &stft_config))
                .collect::<Result<Vec<_>>>()?;
            let intensity = intensity_vectors(&spectra)?;
            let filterbank =
                MelFilterbank::default_for(stft_config.fft_size, stft_config.sample_rate_hz);
            let power = mel_power(&spectra[0], &filterbank)?;
            (
                estimate_doa_foa(&intensity, &power)?,
                config.estimator.foa_confidence_threshold,
            )
        }
        Representation::Stereo | Representation::Binaural => {
            let left = stft(audio.channel(0), &stft_config)?;
            let right = stft(audio.channel(1), &stft_config)?;
            let gcc = gcc_phat(&left, &right, DEFAULT_GCC_MAX_LAG)?;
            let levels: Vec<(f64, f64)> = frame_rms(audio.channel(0), &stft_config)
                .into_iter()
                .zip(frame_rms(audio.channel(1), &stft_config))
                .collect();
            let mode = if representation == Representation::Stereo {
                TdoaMode::Stereo
            } else {
                TdoaMode::Binaural
            };
            let tdoa = config.estimator.tdoa_config(mode, target_rate);
            (
                estimate_doa_2ch(&gcc, &levels, &tdoa)?,
                config.estimator.tdoa_confidence_threshold,
            )
        }
    };
    let pooled = pool_estimates_to_label_frames(&estimates, hop_s, window_s, num_label_frames);
    Ok(estimates_to_events(
        &pooled,
        config.synthesis.class_index,
        threshold,
        config.estimator.resolution_policy(),
    ))
}

/// Estimates DOA for every rendered file of a representation, writing
/// prediction CSVs to `out/predictions/<repr>/`.
pub fn run_estimate(
    config: &PipelineConfig,
    out_dir: &Path,
    representation: Representation,
) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let src = out_dir.join(RENDERED_DIR).join(representation.name());
    let dir = out_dir.join(PREDICTIONS_DIR).join(representation.name());
    create_dir(&dir)?;
    let mut guard = OutputGuard::new();
    let mut written = Vec::new();
    for stem in wav_stems(&src)? {
        let audio = read_wav(src.join(format!("{stem}.wav")))?;
        let events = estimate_events(config, representation, &audio)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        guard.track(&csv_path);
        write_metadata_csv(&csv_path, &events)?;
        written.push(csv_path);
    }
    guard.disarm();
    Ok(written)
}

/// Joined evaluation inputs of one representation: predictions and
/// references concatenated over scenes on a shared frame axis.
pub struct EvaluationData {
    pub predictions: Vec<EventAnnotation>,
    pub references: Vec<EventAnnotation>,
}

/// Loads predictions and references for a representation, offsetting each
/// scene's frames onto one shared timeline.
pub fn load_evaluation_data(
    config: &PipelineConfig,
    out_dir: &Path,
    representation: Representation,
) -> Result<EvaluationData> {
    let pred_dir = out_dir.join(PREDICTIONS_DIR).join(representation.name());
    let ref_dir = source_dir(config, out_dir);
    let frames_per_scene = label_frames_for_duration(config.synthesis.scene_length_s);
    let mut predictions = Vec::new();
    let mut references = Vec::new();
    let mut stems: Vec<String> = Vec::new();
    let entries = fs::read_dir(&pred_dir).map_err(|e| SeldError::io(&pred_dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| SeldError::io(&pred_dir, e))?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "csv") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    if stems.is_empty() {
        return Err(SeldError::invalid(format!(
            "no prediction CSVs in {}",
            pred_dir.display()
        )));
    }
    for (index, stem) in stems.iter().enumerate() {
        let offset = index * frames_per_scene;
        for mut p in read_metadata_csv(pred_dir.join(format!("{stem}.csv")))? {
            p.frame_index += offset;
            predictions.push(p);
        }
        for mut r in read_metadata_csv(ref_dir.join(format!("{stem}.csv")))? {
            r.frame_index += offset;
            references.push(r);
        }
    }
    Ok(EvaluationData {
        predictions,
        references,
    })
}

/// Renders scores as stable key-value text.
pub fn format_scores(scores: &SeldScores) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "error_rate           {:.6}", scores.error_rate);
    let _ = writeln!(out, "f_score              {:.6}", scores.f_score);
    match scores.localization_error_deg {
        Some(le) => {
            let _ = writeln!(out, "localization_error   {le:.6}");
        }
        None => {
            let _ = writeln!(out, "localization_error   none");
        }
    }
    let _ = writeln!(out, "localization_recall  {:.6}", scores.localization_recall);
    let _ = writeln!(out, "seld_score           {:.6}", scores.seld_score);
    out
}

/// Evaluates a representation's predictions, writing
/// `reports/<repr>_scores.{txt,json}`.
pub fn run_evaluate(
    config: &PipelineConfig,
    out_dir: &Path,
    representation: Representation,
) -> Result<SeldScores> {
    config.validate()?;
    let data = load_evaluation_data(config, out_dir, representation)?;
    let (scores, _) = evaluate(
        &data.predictions,
        &data.references,
        config.metrics.tolerance_deg,
    );
    let dir = out_dir.join(REPORTS_DIR);
    create_dir(&dir)?;
    let mut guard = OutputGuard::new();
    let txt = dir.join(format!("{}_scores.txt", representation.name()));
    let json = dir.join(format!("{}_scores.json", representation.name()));
    guard.track(&txt);
    guard.track(&json);
    write_text(&txt, &format_scores(&scores))?;
    write_json(&json, &scores)?;
    guard.disarm();
    Ok(scores)
}

/// Quadrant and polyphony analyses of one representation's run.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub representation: String,
    pub quadrants: QuadrantReport,
    pub polyphony: BTreeMap<usize, PolyphonyBucket>,
}

fn format_analysis(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "representation: {}", report.representation);
    let _ = writeln!(out, "quadrant confusion (rows true, columns predicted):");
    let _ = writeln!(out, "          front   left    back    right");
    for (t, name) in ["front", "left", "back", "right"].iter().enumerate() {
        let row = report.quadrants.confusion[t];
        let _ = writeln!(
            out,
            "{name:>8}  {:.3}   {:.3}   {:.3}   {:.3}",
            row[0], row[1], row[2], row[3]
        );
    }
    let _ = writeln!(out, "per-quadrant localization error:");
    for (t, name) in ["front", "left", "back", "right"].iter().enumerate() {
        match report.quadrants.per_quadrant_le_deg[t] {
            Some(le) => {
                let _ = writeln!(out, "{name:>8}  {le:.3}");
            }
            None => {
                let _ = writeln!(out, "{name:>8}  none");
            }
        }
    }
    let _ = writeln!(out, "polyphony buckets:");
    for (level, bucket) in &report.polyphony {
        let label = if *level >= 4 {
            "4+".to_string()
        } else {
            level.to_string()
        };
        let le = bucket
            .mean_le_deg
            .map_or("none".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            out,
            "{label:>8}  frames {:>6}  refs {:>6}  recall {:.3}  le {le}",
            bucket.frames, bucket.ref_count, bucket.recall
        );
    }
    out
}

/// Builds the quadrant/polyphony report for a representation, writing
/// `reports/<repr>_analysis.{txt,json}`.
pub fn run_report(
    config: &PipelineConfig,
    out_dir: &Path,
    representation: Representation,
) -> Result<AnalysisReport> {
    config.validate()?;
    let data = load_evaluation_data(config, out_dir, representation)?;
    let (_, matches) = evaluate(
        &data.predictions,
        &data.references,
        config.metrics.tolerance_deg,
    );
    let report = AnalysisReport {
        representation: representation.name().to_string(),
        quadrants: quadrant_confusion(&matches),
        polyphony: polyphony_breakdown(&matches, &data.references),
    };
    let dir = out_dir.join(REPORTS_DIR);
    create_dir(&dir)?;
    let mut guard = OutputGuard::new();
    let txt = dir.join(format!("{}_analysis.txt", representation.name()));
    let json = dir.join(format!("{}_analysis.json", representation.name()));
    guard.track(&txt);
    guard.track(&json);
    write_text(&txt, &format_analysis(&report))?;
    write_json(&json, &report)?;
    guard.disarm();
    Ok(report)
}

/// Everything a full pipeline run produced, keyed by representation name.
#[derive(Debug, Serialize)]
pub struct PipelineSummary {
    pub scores: BTreeMap<String, SeldScores>,
    pub analyses: BTreeMap<String, AnalysisReport>,
}

fn format_comparison(scores: &BTreeMap<String, SeldScores>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>6} {:>6} {:>7} {:>7} {:>7}",
        "repr", "SELD", "ER", "F%", "LE", "LR%"
    );
    for repr in Representation::ALL {
        if let Some(s) = scores.get(repr.name()) {
            let le = s
                .localization_error_deg
                .map_or("none".to_string(), |v| format!("{v:.1}"));
            let _ = writeln!(
                out,
                "{:<10} {:>6.3} {:>6.3} {:>7.1} {:>7} {:>7.1}",
                repr.name(),
                s.seld_score,
                s.error_rate,
                100.0 * s.f_score,
                le,
                100.0 * s.localization_recall
            );
        }
    }
    out
}

/// Runs the full chain for all three representations and writes the
/// comparison table to `reports/comparison.{txt,json}`.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineSummary> {
    config.validate()?;
    run_synth(config, out_dir)?;
    if config.acs_enabled {
        run_augment(config, out_dir)?;
    }
    let mut scores = BTreeMap::new();
    let mut analyses = BTreeMap::new();
    for representation in Representation::ALL {
        let mut per_repr = config.clone();
        per_repr.representation = representation;
        run_render(&per_repr, out_dir, representation)?;
        run_estimate(&per_repr, out_dir, representation)?;
        let repr_scores = run_evaluate(&per_repr, out_dir, representation)?;
        let report = run_report(&per_repr, out_dir, representation)?;
        scores.insert(representation.name().to_string(), repr_scores);
        analyses.insert(representation.name().to_string(), report);
    }
    let dir = out_dir.join(REPORTS_DIR);
    create_dir(&dir)?;
    let mut guard = OutputGuard::new();
    let txt = dir.join("comparison.txt");
    let json = dir.join("comparison.json");
    guard.track(&txt);
    guard.track(&json);
    write_text(&txt, &format_comparison(&scores))?;
    write_json(&json, &scores)?;
    guard.disarm();
    Ok(PipelineSummary { scores, analyses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PolicyKind;
    use tempfile::tempdir;

    fn small_config() -> PipelineConfig {
        let mut config = PipelineConfig::default();
        config.synthesis.num_scenes = 3;
        config.synthesis.scene_length_s = 1.0;
        config.seed = 11;
        config
    }

    #[test]
    fn synth_writes_wav_and_csv_pairs() {
        let dir = tempdir().unwrap();
        let config = small_config();
        let files = run_synth(&config, dir.path()).unwrap();
        assert_eq!(files.len(), 6);
        for index in 0..3 {
            let stem = dir.path().join(SCENES_DIR).join(scene_stem(index));
            assert!(stem.with_extension("wav").exists());
            assert!(stem.with_extension("csv").exists());
        }
        let refs =
            read_metadata_csv(dir.path().join(SCENES_DIR).join("scene_000.csv")).unwrap();
        // Full-length single event: every label frame annotated once.
        assert_eq!(refs.len(), 10);
        assert!(refs.iter().all(|r| r.class_index == 0));
    }

    #[test]
    fn augment_identity_member_is_bit_identical() {
        let dir = tempdir().unwrap();
        let config = small_config();
        run_synth(&config, dir.path()).unwrap();
        run_augment(&config, dir.path()).unwrap();
        let original = fs::read(dir.path().join(SCENES_DIR).join("scene_000.wav")).unwrap();
        let identity =
            fs::read(dir.path().join(AUGMENTED_DIR).join("scene_000_r000.wav")).unwrap();
        assert_eq!(original, identity);
        let original = fs::read(dir.path().join(SCENES_DIR).join("scene_000.csv")).unwrap();
        let identity =
            fs::read(dir.path().join(AUGMENTED_DIR).join("scene_000_r000.csv")).unwrap();
        assert_eq!(original, identity);
        // Four rotations per scene.
        assert_eq!(
            wav_stems(&dir.path().join(AUGMENTED_DIR)).unwrap().len(),
            12
        );
        // Rotated labels shift by the rotation step.
        let base =
            read_metadata_csv(dir.path().join(AUGMENTED_DIR).join("scene_000_r000.csv")).unwrap();
        let quarter =
            read_metadata_csv(dir.path().join(AUGMENTED_DIR).join("scene_000_r090.csv")).unwrap();
        let wrapped = crate::ambisonics::wrap_azimuth_deg(base[0].azimuth_deg + 90.0);
        assert_eq!(quarter[0].azimuth_deg, wrapped);
    }

    #[test]
    fn full_pipeline_is_byte_reproducible() {
        let config = small_config();
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        run_pipeline(&config, dir_a.path()).unwrap();
        run_pipeline(&config, dir_b.path()).unwrap();
        let reports_a = dir_a.path().join(REPORTS_DIR);
        let reports_b = dir_b.path().join(REPORTS_DIR);
        let mut names: Vec<String> = fs::read_dir(&reports_a)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert!(names.contains(&"comparison.txt".to_string()));
        assert!(names.contains(&"foa_scores.json".to_string()));
        assert!(names.contains(&"stereo_analysis.json".to_string()));
        for name in &names {
            let a = fs::read(reports_a.join(name)).unwrap();
            let b = fs::read(reports_b.join(name)).unwrap();
            assert_eq!(a, b, "report {name} differs between identical runs");
        }
    }

    #[test]
    fn foa_estimates_recover_references_on_clean_scenes() {
        let dir = tempdir().unwrap();
        let mut config = small_config();
        config.estimator.resolution_policy = PolicyKind::Front;
        run_synth(&config, dir.path()).unwrap();
        run_render(&config, dir.path(), Representation::Foa).unwrap();
        run_estimate(&config, dir.path(), Representation::Foa).unwrap();
        let scores = run_evaluate(&config, dir.path(), Representation::Foa).unwrap();
        assert!(scores.localization_recall > 0.9, "{scores:?}");
        assert!(
            scores.localization_error_deg.unwrap() < 3.0,
            "{scores:?}"
        );
        assert!(scores.seld_score < 0.15, "{scores:?}");
    }

    #[test]
    fn channel_count_guard_rejects_mixed_representations() {
        let config = small_config();
        let stereo = MultichannelBuffer::new(vec![vec![0.0; 2400]; 2], 24000).unwrap();
        let err = estimate_events(&config, Representation::Foa, &stereo)
            .unwrap_err()
            .to_string();
        assert!(err.contains("4 channels"), "{err}");
        let foa = MultichannelBuffer::new(vec![vec![0.0; 2400]; 4], 24000).unwrap();
        assert!(estimate_events(&config, Representation::Stereo, &foa).is_err());
    }

    #[test]
    fn failed_render_removes_partial_outputs() {
        let dir = tempdir().unwrap();
        let config = small_config();
        run_synth(&config, dir.path()).unwrap();
        // Corrupt the last scene so the render stage fails after writing
        // earlier outputs.
        fs::write(
            dir.path().join(SCENES_DIR).join("scene_002.wav"),
            b"not a wav",
        )
        .unwrap();
        assert!(run_render(&config, dir.path(), Representation::Stereo).is_err());
        let rendered = dir.path().join(RENDERED_DIR).join("stereo");
        let leftovers: Vec<_> = fs::read_dir(&rendered)
            .map(|it| it.map(|e| e.unwrap().path()).collect())
            .unwrap_or_default();
        assert!(leftovers.is_empty(), "partial outputs left: {leftovers:?}");
    }

    #[test]
    fn resampling_path_feeds_estimator() {
        // A 48 kHz stereo render must be resampled down before features.
        let mut config = small_config();
        config.synthesis.num_scenes = 1;
        let dir = tempdir().unwrap();
        run_synth(&config, dir.path()).unwrap();
        let foa = read_wav(dir.path().join(SCENES_DIR).join("scene_000.wav"))
            .unwrap()
            .to_foa()
            .unwrap();
        let stereo = foa_to_stereo(&foa);
        let up = MultichannelBuffer::new(
            vec![
                crate::io::resample(stereo.left(), 24000, 48000).unwrap(),
                crate::io::resample(stereo.right(), 24000, 48000).unwrap(),
            ],
            48000,
        )
        .unwrap();
        let events = estimate_events(&config, Representation::Stereo, &up).unwrap();
        assert!(!events.is_empty());
        let refs = read_metadata_csv(dir.path().join(SCENES_DIR).join("scene_000.csv")).unwrap();
        let folded_ref = crate::doa::fold_to_front(refs[0].azimuth_deg);
        let mean: f64 =
            events.iter().map(|e| e.azimuth_deg).sum::<f64>() / events.len() as f64;
        assert!((mean - folded_ref).abs() < 3.0, "mean {mean} vs {folded_ref}");
    }

    #[test]
    fn polyphony_config_generates_multi_source_scenes() {
        let dir = tempdir().unwrap();
        let mut config = small_config();
        config.synthesis.num_scenes = 2;
        config.synthesis.scene_length_s = 4.0;
        config.synthesis.polyphony_fractions = Some(vec![0.5, 0.5]);
        run_synth(&config, dir.path()).unwrap();
        let refs =
            read_metadata_csv(dir.path().join(SCENES_DIR).join("scene_000.csv")).unwrap();
        let mut per_frame: BTreeMap<usize, usize> = BTreeMap::new();
        for r in &refs {
            *per_frame.entry(r.frame_index).or_insert(0) += 1;
        }
        assert!(per_frame.values().any(|&c| c == 2));
        assert!(per_frame.values().any(|&c| c == 1));
    }
}
