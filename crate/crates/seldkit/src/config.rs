//! Pipeline configuration: a TOML file with one section per stage, every
//! field optional and defaulted, so a config diff records exactly what an
//! experiment changed.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::doa::{
    ResolutionPolicy, TdoaConfig, TdoaMode, DEFAULT_EAR_SEPARATION_M,
    DEFAULT_FOA_CONFIDENCE_THRESHOLD, DEFAULT_SMOOTHING_FRAMES,
    DEFAULT_TDOA_CONFIDENCE_THRESHOLD,
};
use crate::error::{Result, SeldError};
use crate::features::StftConfig;
use crate::metrics::DEFAULT_TOLERANCE_DEG;
use crate::render::BinauralRendererConfig;

/// Input audio representation of a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Foa,
    Binaural,
    Stereo,
}

impl Representation {
    pub const ALL: [Representation; 3] =
        [Representation::Foa, Representation::Binaural, Representation::Stereo];

    /// Channel count the representation's WAV files must carry.
    pub fn num_channels(self) -> usize {
        match self {
            Representation::Foa => 4,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Representation::Foa => "foa",
            Representation::Binaural => "binaural",
            Representation::Stereo => "stereo",
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub num_scenes: usize,
    pub scene_length_s: f64,
    /// Class label given to generated events.
    pub class_index: usize,
    /// Events per scene when no polyphony preset is set.
    pub events_per_scene: usize,
    /// Optional polyphony-level fractions (index 0 = 1 source, ...); when
    /// set, scenes follow the frame-count profile instead of
    /// `events_per_scene`.
    pub polyphony_fractions: Option<Vec<f64>>,
    pub noise_floor_db: Option<f64>,
    pub reverb_rt60_s: Option<f64>,
    pub reverb_wet_db: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            num_scenes: 20,
            scene_length_s: 2.0,
            class_index: 0,
            events_per_scene: 1,
            polyphony_fractions: None,
            noise_floor_db: None,
            reverb_rt60_s: None,
            reverb_wet_db: -12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RendererConfig {
    pub head_radius_m: f64,
    pub speed_of_sound_mps: f64,
    pub shadow_corner_hz: f64,
    pub shadow_max_attenuation_db: f64,
}

impl Default for RendererConfig {
    fn default() -> Self {
        let binaural = BinauralRendererConfig::default();
        RendererConfig {
            head_radius_m: binaural.head_radius_m,
            speed_of_sound_mps: binaural.speed_of_sound_mps,
            shadow_corner_hz: binaural.head_shadow.corner_hz,
            shadow_max_attenuation_db: binaural.head_shadow.max_attenuation_db,
        }
    }
}

impl RendererConfig {
    pub fn to_binaural(&self) -> BinauralRendererConfig {
        let mut config = BinauralRendererConfig::default();
        config.head_radius_m = self.head_radius_m;
        config.speed_of_sound_mps = self.speed_of_sound_mps;
        config.head_shadow.corner_hz = self.shadow_corner_hz;
        config.head_shadow.max_attenuation_db = self.shadow_max_attenuation_db;
        config
    }
}

/// Front/back resolution policy as it appears in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Front,
    Alternate,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub foa_confidence_threshold: f64,
    pub tdoa_confidence_threshold: f64,
    pub separation_m: f64,
    pub smoothing_frames: usize,
    pub resolution_policy: PolicyKind,
    /// Seed for the `random` resolution policy (combined with the run seed).
    pub policy_seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            foa_confidence_threshold: DEFAULT_FOA_CONFIDENCE_THRESHOLD,
            tdoa_confidence_threshold: DEFAULT_TDOA_CONFIDENCE_THRESHOLD,
            separation_m: DEFAULT_EAR_SEPARATION_M,
            smoothing_frames: DEFAULT_SMOOTHING_FRAMES,
            resolution_policy: PolicyKind::Front,
            policy_seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn resolution_policy(&self) -> ResolutionPolicy {
        match self.resolution_policy {
            PolicyKind::Front => ResolutionPolicy::Front,
            PolicyKind::Alternate => ResolutionPolicy::Alternate,
            PolicyKind::Random => ResolutionPolicy::Random {
                seed: self.policy_seed,
            },
        }
    }

    pub fn tdoa_config(&self, mode: TdoaMode, sample_rate_hz: u32) -> TdoaConfig {
        TdoaConfig {
            mode,
            separation_m: self.separation_m,
            speed_of_sound_mps: 343.0,
            sample_rate_hz,
            smoothing_frames: self.smoothing_frames,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub tolerance_deg: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            tolerance_deg: DEFAULT_TOLERANCE_DEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub sample_rate_hz: u32,
    pub window_size: usize,
    pub hop_size: usize,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        let stft = StftConfig::default();
        FeaturesConfig {
            sample_rate_hz: stft.sample_rate_hz,
            window_size: stft.window_samples,
            hop_size: stft.hop_samples,
        }
    }
}

impl FeaturesConfig {
    pub fn stft_config(&self) -> StftConfig {
        StftConfig {
            sample_rate_hz: self.sample_rate_hz,
            window_samples: self.window_size,
            hop_samples: self.hop_size,
            fft_size: self.window_size,
        }
    }
}

/// Top-level pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub representation: Representation,
    /// Horizontal-plane mode: all elevations pinned to 0.
    pub horizontal_only: bool,
    /// Expand the synthesized scenes fourfold by channel rotation before
    /// rendering/evaluation.
    pub acs_enabled: bool,
    pub seed: u64,
    pub synthesis: SynthesisConfig,
    pub renderer: RendererConfig,
    pub estimator: EstimatorConfig,
    pub metrics: MetricsConfig,
    pub features: FeaturesConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            representation: Representation::Foa,
            horizontal_only: true,
            acs_enabled: false,
            seed: 0,
            synthesis: SynthesisConfig::default(),
            renderer: RendererConfig::default(),
            estimator: EstimatorConfig::default(),
            metrics: MetricsConfig::default(),
            features: FeaturesConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(SeldError::InvalidConfig(msg));
        if self.synthesis.num_scenes == 0 {
            return invalid("synthesis.num_scenes must be positive".into());
        }
        if !(self.synthesis.scene_length_s > 0.0) {
            return invalid("synthesis.scene_length_s must be positive".into());
        }
        if self.synthesis.class_index >= crate::annotation::NUM_CLASSES {
            return invalid(format!(
                "synthesis.class_index {} out of range",
                self.synthesis.class_index
            ));
        }
        if self.synthesis.events_per_scene == 0 {
            return invalid("synthesis.events_per_scene must be positive".into());
        }
        if let Some(fractions) = &self.synthesis.polyphony_fractions {
            if fractions.is_empty() || fractions.len() > crate::synth::MAX_SIMULTANEOUS_SOURCES {
                return invalid("synthesis.polyphony_fractions needs 1..=5 levels".into());
            }
        }
        if !(self.estimator.foa_confidence_threshold >= 0.0)
            || !(self.estimator.tdoa_confidence_threshold >= 0.0)
        {
            return invalid("estimator thresholds must be non-negative".into());
        }
        if !(self.estimator.separation_m > 0.0) {
            return invalid("estimator.separation_m must be positive".into());
        }
        if !(self.metrics.tolerance_deg > 0.0) {
            return invalid("metrics.tolerance_deg must be positive".into());
        }
        if self.features.window_size == 0
            || self.features.hop_size == 0
            || self.features.sample_rate_hz == 0
        {
            return invalid("features window, hop, and sample rate must be positive".into());
        }
        if !(self.renderer.head_radius_m > 0.0) || !(self.renderer.speed_of_sound_mps > 0.0) {
            return invalid("renderer geometry must be positive".into());
        }
        Ok(())
    }
}

/// Parses a config from TOML text.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let config: PipelineConfig =
        toml::from_str(text).map_err(|e| SeldError::InvalidConfig(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Loads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| SeldError::io(path, e))?;
    let config: PipelineConfig = toml::from_str(&text).map_err(|e| SeldError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// The full default configuration as TOML, for `--dump-config`.
pub fn dump_default_config() -> String {
    toml::to_string_pretty(&PipelineConfig::default())
        .expect("default config always serializes")
}
