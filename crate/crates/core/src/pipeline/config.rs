use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::recon::Prominence;
use crate::sim::{DvsPixelParams, FlickerSchedule, SimConfig};
use crate::{Error, Result};

/// Light reaching the scene, apart from the flicker program itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Illumination {
    pub q: [f64; 3],
    pub ambient: f64,
    pub epsilon: f64,
    pub intensity_scale: f64,
}

impl Default for Illumination {
    fn default() -> Self {
        let s = SimConfig::default();
        Illumination { q: s.q, ambient: s.ambient, epsilon: s.epsilon, intensity_scale: s.intensity_scale }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub scene: Option<PathBuf>,
    pub patches: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub ambient: Vec<f64>,
    pub intensity_scale: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { ambient: vec![0.0, 0.2, 0.5, 1.0], intensity_scale: vec![1.0, 0.75, 0.5, 0.25] }
    }
}

/// Everything a pipeline run needs, loadable from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Pseudo-frame rate used for binning.
    pub fps: f64,
    /// Flicker transitions per cycle; must equal the number of schedule states.
    pub transitions: usize,
    /// Frames exported per transition for network training.
    pub frames_per_transition: usize,
    /// Peak prominence over the mean event count, as a multiple of the mean.
    pub prominence: f64,
    /// Look-ahead, in seconds, of the running sum the count curve is passed
    /// through before window detection.
    pub detection_span_s: f64,
    pub seed: u64,
    pub schedule: FlickerSchedule,
    pub sensor: DvsPixelParams,
    pub illumination: Illumination,
    pub paths: Paths,
    pub sweep: SweepConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            fps: 600.0,
            transitions: 9,
            frames_per_transition: 32,
            prominence: 3.0,
            detection_span_s: 0.02,
            seed: 0,
            schedule: FlickerSchedule::default(),
            sensor: DvsPixelParams::default(),
            illumination: Illumination::default(),
            paths: Paths::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::Config(format!("fps must be positive, got {}", self.fps)));
        }
        if self.frames_per_transition == 0 {
            return Err(Error::Config("frames_per_transition must be at least 1".into()));
        }
        if !(self.prominence.is_finite() && self.prominence >= 0.0) {
            return Err(Error::Config("prominence must be non-negative".into()));
        }
        if !(self.detection_span_s.is_finite() && self.detection_span_s >= 0.0) {
            return Err(Error::Config("detection_span_s must be non-negative".into()));
        }
        self.schedule.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.transitions != self.schedule.n() {
            return Err(Error::Config(format!(
                "transitions = {} but the schedule has {} states",
                self.transitions,
                self.schedule.n()
            )));
        }
        self.sensor.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.sim_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        let i = &self.illumination;
        SimConfig { q: i.q, ambient: i.ambient, epsilon: i.epsilon, intensity_scale: i.intensity_scale, seed: self.seed }
    }

    pub fn prominence(&self) -> Prominence {
        Prominence::MeanMultiple(self.prominence)
    }

    /// Detection look-ahead in slices, at least one.
    pub fn detection_span(&self) -> usize {
        ((self.detection_span_s * self.fps).round() as usize).max(1)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
