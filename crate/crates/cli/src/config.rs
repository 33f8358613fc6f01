//! Run configuration.
//!
//! Configs are sectioned key-value files (TOML). Every physical quantity
//! carries a unit suffix in its key (`phase_rad`, `duration_s`,
//! `pair_rate_hz`, ...). All fields have built-in defaults — the
//! calibrated source described in the crate README — so every subcommand
//! runs without a config file.

use std::fmt;
use std::path::Path;

use biphoton::analyzer::DetectorConfig;
use biphoton::quantum::DensityMatrix;
use biphoton::source::{
    signal_spectrum, source_state, spectral_overlap, CrystalConfig, WavelengthGrid,
};
use serde::{Deserialize, Serialize};

/// Purity weight `v` of the calibrated source model: chosen so that with
/// perfect spectral overlap the model state's tangle equals the reference
/// reconstruction value 0.905 (`v = (2√𝒯 + 1)/3`).
pub const CALIBRATED_PURITY_WEIGHT: f64 = 0.9675432530146816;

/// Tangle of the reference reconstructed state used for calibration.
pub const REFERENCE_TANGLE: f64 = 0.905;

/// A configuration problem: bad file, bad value, or an inconsistent
/// combination. Mapped to exit code 2 by the binary.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Wrap a message as a [`ConfigError`] inside an [`anyhow::Error`].
pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

/// One SPDC crystal: emission center and its linear temperature tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalSection {
    pub center_wavelength_nm: f64,
    pub temp_ref_c: f64,
    pub dlambda_dt_nm_per_c: f64,
    pub fwhm_nm: f64,
}

impl CrystalSection {
    fn to_core(self) -> CrystalConfig {
        CrystalConfig {
            center_wavelength_nm: self.center_wavelength_nm,
            temp_ref_c: self.temp_ref_c,
            dlambda_dt_nm_per_c: self.dlambda_dt_nm_per_c,
            fwhm_nm: self.fwhm_nm,
        }
    }
}

/// Default HH-path crystal: 0.1 nm short of the VV center at the shared
/// reference temperature, so the spectra align at +0.50 °C.
impl Default for CrystalSection {
    fn default() -> Self {
        CrystalSection {
            center_wavelength_nm: 809.90,
            temp_ref_c: 165.70,
            dlambda_dt_nm_per_c: 0.20,
            fwhm_nm: 0.30,
        }
    }
}

fn default_vv_crystal() -> CrystalSection {
    CrystalSection {
        center_wavelength_nm: 810.00,
        ..CrystalSection::default()
    }
}

/// `[source]`: the emitted-state model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSection {
    /// Pump phase φ of `(|HH⟩ + e^{iφ}|VV⟩)/√2`.
    pub phase_rad: f64,
    /// Root-spectral overlap O ∈ [0, 1]. Leave unset to derive it from the
    /// crystal sections and `hh_temp_c`/`vv_temp_c` instead.
    pub overlap: Option<f64>,
    /// Werner weight v ∈ [0, 1] of the ideal state against white noise.
    pub purity_weight: f64,
    /// Detected pair rate at matched analyzers, in Hz.
    pub pair_rate_hz: f64,
    pub hh_crystal: CrystalSection,
    pub vv_crystal: CrystalSection,
    /// Operating temperatures used when `overlap` is unset.
    pub hh_temp_c: Option<f64>,
    pub vv_temp_c: Option<f64>,
}

impl Default for SourceSection {
    fn default() -> Self {
        SourceSection {
            phase_rad: 0.0,
            overlap: Some(1.0),
            purity_weight: CALIBRATED_PURITY_WEIGHT,
            pair_rate_hz: 500.0,
            hh_crystal: CrystalSection::default(),
            vv_crystal: default_vv_crystal(),
            hh_temp_c: None,
            vv_temp_c: None,
        }
    }
}

impl SourceSection {
    pub fn hh_crystal_core(&self) -> CrystalConfig {
        self.hh_crystal.to_core()
    }

    pub fn vv_crystal_core(&self) -> CrystalConfig {
        self.vv_crystal.to_core()
    }

    /// The overlap to use for single-operating-point experiments: the
    /// explicit `overlap` key, or the model overlap of the two crystal
    /// spectra at the configured temperatures.
    pub fn resolve_overlap(&self) -> anyhow::Result<f64> {
        match (self.overlap, self.hh_temp_c, self.vv_temp_c) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(config_error(
                "set either source.overlap or source.hh_temp_c/vv_temp_c, not both",
            )),
            (Some(o), None, None) => Ok(o),
            (None, Some(hh), Some(vv)) => {
                let hh_crystal = self.hh_crystal_core();
                let vv_crystal = self.vv_crystal_core();
                let centers = [hh_crystal.center_at(hh), vv_crystal.center_at(vv)];
                let fwhm = hh_crystal.fwhm_nm.max(vv_crystal.fwhm_nm);
                let grid = WavelengthGrid::covering(&centers, fwhm, 6.0, 0.005)?;
                let s_hh = signal_spectrum(&hh_crystal, hh, &grid)?;
                let s_vv = signal_spectrum(&vv_crystal, vv, &grid)?;
                Ok(spectral_overlap(&s_hh, &s_vv)?)
            }
            _ => Err(config_error(
                "source needs overlap, or both hh_temp_c and vv_temp_c",
            )),
        }
    }

    /// The configured two-qubit state.
    pub fn state(&self) -> anyhow::Result<DensityMatrix> {
        let overlap = self.resolve_overlap()?;
        Ok(source_state(overlap, self.purity_weight, self.phase_rad)?)
    }
}

/// `[detectors]`: detection-chain noise parameters. Defaults are
/// noise-free (all statistical spread then comes from Poisson counting and
/// the source's purity weight).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorSection {
    pub singles_rate_a_hz: f64,
    pub dark_rate_a_hz: f64,
    pub dark_prob_b_per_ns: f64,
    pub coincidence_window_ns: f64,
    pub efficiency_product: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        DetectorSection {
            singles_rate_a_hz: 0.0,
            dark_rate_a_hz: 0.0,
            dark_prob_b_per_ns: 0.0,
            coincidence_window_ns: 1.0,
            efficiency_product: 1.0,
        }
    }
}

impl DetectorSection {
    pub fn to_core(self) -> DetectorConfig {
        DetectorConfig {
            singles_rate_a_hz: self.singles_rate_a_hz,
            dark_rate_a_hz: self.dark_rate_a_hz,
            dark_prob_b_per_ns: self.dark_prob_b_per_ns,
            coincidence_window_ns: self.coincidence_window_ns,
            efficiency_product: self.efficiency_product,
        }
    }
}

fn default_phi_deg() -> Vec<f64> {
    vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0]
}

fn default_hh_temps_c() -> Vec<f64> {
    vec![163.70, 164.20, 164.70, 165.20, 165.70, 166.20, 166.70]
}

/// `[experiment]`: acquisition parameters shared across subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Optional experiment name; when set it must match a known
    /// subcommand (the subcommand itself chooses what runs).
    pub name: Option<String>,
    /// Acquisition time per coincidence setting.
    pub duration_s: f64,
    /// Base RNG seed; required for any stochastic run.
    pub seed: Option<u64>,
    /// Analyzer positions per visibility scan.
    pub n_points: usize,
    /// Leggett separation angles to evaluate.
    pub phi_deg: Vec<f64>,
    /// HH-crystal temperatures for the tangle sweep.
    pub hh_temps_c: Vec<f64>,
    /// Fixed VV-crystal temperature for the tangle sweep.
    pub vv_temp_c: f64,
    /// Expected pairs per tomography setting.
    pub exposure: f64,
    /// Parametric-bootstrap replicas for the tomography tangle error
    /// (0 disables the bootstrap).
    pub bootstrap_replicas: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            name: None,
            duration_s: 40.0,
            seed: Some(17),
            n_points: 16,
            phi_deg: default_phi_deg(),
            hh_temps_c: default_hh_temps_c(),
            vv_temp_c: 165.70,
            exposure: 2.0e4,
            bootstrap_replicas: 25,
        }
    }
}

/// `[output]`: where and in which formats to write the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Output directory; unset means stdout only.
    pub directory: Option<String>,
    /// Subset of {"text", "json", "csv"}.
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: None,
            formats: vec!["text".into(), "json".into(), "csv".into()],
        }
    }
}

/// The known experiment names (subcommands).
pub const EXPERIMENTS: [&str; 7] = [
    "visibility",
    "tangle-sweep",
    "chsh",
    "bbell",
    "leggett",
    "overlap",
    "tomography",
];

/// Full run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub source: SourceSection,
    pub detectors: DetectorSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Load a config file, or the built-in defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> anyhow::Result<RunConfig> {
        let cfg = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", p.display())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural validation; experiment-specific checks happen at run
    /// time where the requirements are known.
    pub fn validate(&self) -> anyhow::Result<()> {
        let s = &self.source;
        if let Some(o) = s.overlap {
            if !(0.0..=1.0).contains(&o) {
                return Err(config_error(format!("source.overlap = {o} outside [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&s.purity_weight) {
            return Err(config_error(format!(
                "source.purity_weight = {} outside [0, 1]",
                s.purity_weight
            )));
        }
        if s.pair_rate_hz <= 0.0 || !s.pair_rate_hz.is_finite() {
            return Err(config_error(format!(
                "source.pair_rate_hz = {} must be positive",
                s.pair_rate_hz
            )));
        }
        self.detectors
            .to_core()
            .validate()
            .map_err(|e| config_error(format!("detectors: {e}")))?;
        let e = &self.experiment;
        if let Some(name) = &e.name {
            if !EXPERIMENTS.contains(&name.as_str()) {
                return Err(config_error(format!(
                    "experiment.name = {name:?} is not one of {EXPERIMENTS:?}"
                )));
            }
        }
        if e.duration_s <= 0.0 || !e.duration_s.is_finite() {
            return Err(config_error(format!(
                "experiment.duration_s = {} must be positive",
                e.duration_s
            )));
        }
        if e.exposure <= 0.0 || !e.exposure.is_finite() {
            return Err(config_error(format!(
                "experiment.exposure = {} must be positive",
                e.exposure
            )));
        }
        if e.n_points < 8 {
            return Err(config_error(format!(
                "experiment.n_points = {} (a visibility fit needs at least 8)",
                e.n_points
            )));
        }
        for &phi in &e.phi_deg {
            if !(phi > 0.0 && phi < 180.0) {
                return Err(config_error(format!(
                    "experiment.phi_deg entry {phi} outside (0, 180)"
                )));
            }
        }
        for f in &self.output.formats {
            if !["text", "json", "csv"].contains(&f.as_str()) {
                return Err(config_error(format!(
                    "output.formats entry {f:?} (expected text, json, or csv)"
                )));
            }
        }
        Ok(())
    }

    /// The seed for a stochastic run; absence is a config error.
    pub fn require_seed(&self) -> anyhow::Result<u64> {
        self.experiment
            .seed
            .ok_or_else(|| config_error("this run is stochastic: set experiment.seed or --seed"))
    }
}
