//! Run configuration read from a TOML file; every section and key is optional.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use pilotwave::optics::LensSystem;
use pilotwave::oscillator::OscillatorState;
use pilotwave::weakmeas::{CalciteConfig, CoupledObservable, NoiseModel, DEFAULT_ZETA};
use pilotwave::SlitScene;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TheorySelection {
    X,
    P,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaneSweep {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    /// Explicit planes; overrides the sweep when present.
    pub values: Option<Vec<f64>>,
}

impl Default for PlaneSweep {
    fn default() -> Self {
        Self {
            start: 0.66,
            end: 3.5,
            count: 20,
            values: None,
        }
    }
}

impl PlaneSweep {
    pub fn planes(&self) -> Result<Vec<f64>, CliError> {
        let planes = match &self.values {
            Some(v) => v.clone(),
            None => {
                if self.count < 2 || !(self.end > self.start) {
                    return Err(CliError::usage("planes need count >= 2 and end > start"));
                }
                (0..self.count)
                    .map(|i| self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64)
                    .collect()
            }
        };
        if planes.is_empty() {
            return Err(CliError::usage("plane list is empty"));
        }
        if planes.iter().any(|&z| !(z > 0.0 && z.is_finite())) {
            return Err(CliError::usage("planes must be positive"));
        }
        if planes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CliError::usage("planes must be strictly increasing"));
        }
        Ok(planes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySettings {
    pub theory: TheorySelection,
    pub seeds: usize,
    pub highlight: Option<usize>,
}

impl Default for TrajectorySettings {
    fn default() -> Self {
        Self {
            theory: TheorySelection::Both,
            seeds: 101,
            highlight: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakSettings {
    pub zeta: f64,
    pub phi0: Vec<f64>,
    pub background_fraction: f64,
    pub shot_scale: f64,
    pub seed: u64,
}

impl Default for WeakSettings {
    fn default() -> Self {
        Self {
            zeta: DEFAULT_ZETA,
            phi0: CalciteConfig::default().phi0_list,
            background_fraction: 0.0,
            shot_scale: 0.0,
            seed: 0,
        }
    }
}

impl WeakSettings {
    pub fn calcite(&self, observable: CoupledObservable) -> CalciteConfig {
        CalciteConfig {
            zeta: self.zeta,
            phi0_list: self.phi0.clone(),
            coupled_observable: observable,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            background_fraction: self.background_fraction,
            shot_scale: self.shot_scale,
            rng_seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotSettings {
    pub z: f64,
}

impl Default for SnapshotSettings {
    fn default() -> Self {
        Self { z: 0.70 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSettings {
    /// Smallest lens-2 displacement plotted (m); the far-field origin sits at 0.
    pub d_min: f64,
    pub points: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            d_min: 0.01,
            points: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorSettings {
    pub omega: f64,
    pub state: OscillatorState,
    pub thetas: Vec<f64>,
    pub periods: f64,
    pub samples: usize,
    pub seeds: usize,
}

impl Default for OscillatorSettings {
    fn default() -> Self {
        Self {
            omega: 1.0,
            state: OscillatorState::Coherent(Complex64::new(1.5, 0.5)),
            thetas: vec![0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2],
            periods: 3.0,
            samples: 61,
            seeds: 21,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec![Format::Csv, Format::Svg],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SlitScene,
    pub lenses: LensSystem,
    pub planes: PlaneSweep,
    pub snapshot: SnapshotSettings,
    pub trajectories: TrajectorySettings,
    pub weakmeas: WeakSettings,
    pub calibration: CalibrationSettings,
    pub oscillator: OscillatorSettings,
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scene.validate()?;
        self.lenses.validate()?;
        self.planes.planes()?;
        self.weakmeas
            .calcite(CoupledObservable::TransverseMomentum)
            .validate()?;
        self.weakmeas.noise().validate()?;
        if self.trajectories.seeds == 0 {
            return Err(CliError::usage("trajectories.seeds must be positive"));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::usage("output.formats must not be empty"));
        }
        Ok(())
    }
}
