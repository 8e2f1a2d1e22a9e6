//! Experiment configuration: plain `key = value` text with dotted names
//! (`grid.modes = 128`).  Unknown keys are rejected by name, missing keys
//! take the defaults below, and the resolved configuration is echoed into
//! every run manifest.

use serde::{Deserialize, Serialize};
use slabflow::cns3d::DEFAULT_CFL;
use slabflow::thermo::GasLaw;
use slabflow::{cns3d::Params, grid::SlabGrid, grid::Torus2};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Syntax problems and unknown keys, reported with the offending name
    /// and position by the parser.
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Fixed viscosity; the planar reference solves viscous flow with the
    /// same mu.
    Viscous,
    /// Viscosity vanishing with eps; the planar reference is inviscid.
    Inviscid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Benchmark,
    ResidualProbe,
    Rest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Horizontal period of the square torus.
    pub length: f64,
    /// Horizontal grid points per direction.
    pub modes: usize,
    /// Vertical cosine/sine modes; 1 keeps only the constant profile.
    pub vertical_modes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { length: 2.0 * PI, modes: 48, vertical_modes: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LawSpec {
    pub coefficient: f64,
    pub gamma: f64,
}

impl Default for LawSpec {
    fn default() -> Self {
        LawSpec { coefficient: 1.0, gamma: 2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub regime: Regime,
    pub final_time: f64,
    pub cfl: f64,
    /// Number of CSV rows per run, including t = 0.
    pub samples: usize,
    /// Side fraction of the centered square window used by the interior
    /// velocity metrics.
    pub window_fraction: f64,
    /// Low-pass scale for the acoustic part of the comparison pair; 0 keeps
    /// the pair exactly on the data so the relative energy starts at zero.
    pub mollifier: f64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            regime: Regime::Viscous,
            final_time: 0.5,
            cfl: DEFAULT_CFL,
            samples: 33,
            window_fraction: 0.5,
            mollifier: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsSpec {
    /// Mach numbers, strictly decreasing.
    pub list: Vec<f64>,
}

impl Default for EpsSpec {
    fn default() -> Self {
        EpsSpec { list: vec![0.25, 0.125, 0.0625, 0.03125] }
    }
}

/// delta = coefficient * eps^exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaSpec {
    pub coefficient: f64,
    pub exponent: f64,
}

impl Default for DeltaSpec {
    fn default() -> Self {
        DeltaSpec { coefficient: 1.0, exponent: 1.0 }
    }
}

/// Viscosity: `value` in the viscous regime, coefficient * eps^exponent in
/// the inviscid one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MuSpec {
    pub value: f64,
    pub coefficient: f64,
    pub exponent: f64,
}

impl Default for MuSpec {
    fn default() -> Self {
        MuSpec { value: 0.05, coefficient: 1.0, exponent: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSpec {
    pub family: Family,
    pub vortex_amp: f64,
    /// Width 0 means "scale with the box" (see the synth module defaults).
    pub vortex_width: f64,
    pub pulse_amp: f64,
    pub pulse_width: f64,
    pub bump_amp: f64,
    pub bump_width: f64,
    pub vertical_amp: f64,
    /// Amplitude of a seeded band-limited perturbation on top of the
    /// benchmark family; 0 keeps the data independent of the seed.
    pub random_amp: f64,
    pub random_band: usize,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            family: Family::Benchmark,
            vortex_amp: 0.8,
            vortex_width: 0.0,
            pulse_amp: 0.6,
            pulse_width: 0.0,
            bump_amp: 0.5,
            bump_width: 0.0,
            vertical_amp: 0.0,
            random_amp: 0.0,
            random_band: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: "runs".into() }
    }
}

/// Settings for the free-wave scaling study, which runs on its own torus.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcousticsSpec {
    pub p: f64,
    pub horizon: f64,
    pub eps: Vec<f64>,
    pub samples_per_period: usize,
    pub width: f64,
    pub length: f64,
    pub modes: usize,
}

impl Default for AcousticsSpec {
    fn default() -> Self {
        AcousticsSpec {
            p: 4.0,
            horizon: 5.0,
            eps: vec![1.0, 0.5, 0.25, 0.125],
            samples_per_period: 8,
            width: 3.0,
            length: 16.0 * PI,
            modes: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridSpec,
    pub law: LawSpec,
    pub run: RunSpec,
    pub eps: EpsSpec,
    pub delta: DeltaSpec,
    pub mu: MuSpec,
    pub data: DataSpec,
    pub output: OutputSpec,
    pub acoustics: AcousticsSpec,
}

impl ExperimentConfig {
    pub fn delta_for(&self, eps: f64) -> f64 {
        self.delta.coefficient * eps.powf(self.delta.exponent)
    }

    pub fn mu_for(&self, eps: f64) -> f64 {
        match self.run.regime {
            Regime::Viscous => self.mu.value,
            Regime::Inviscid => self.mu.coefficient * eps.powf(self.mu.exponent),
        }
    }

    /// Viscosity of the planar reference equation.
    pub fn limit_viscosity(&self) -> f64 {
        match self.run.regime {
            Regime::Viscous => self.mu.value,
            Regime::Inviscid => 0.0,
        }
    }

    pub fn law(&self) -> Result<GasLaw, slabflow::Error> {
        GasLaw::new(self.law.coefficient, self.law.gamma)
    }

    pub fn slab(&self, eps: f64) -> Result<SlabGrid, slabflow::Error> {
        let torus = Torus2::new(self.grid.length, self.grid.modes)?;
        SlabGrid::new(torus, self.delta_for(eps), self.grid.vertical_modes)
    }

    pub fn params(&self, eps: f64) -> Result<Params, slabflow::Error> {
        Params::new(eps, self.delta_for(eps), self.mu_for(eps), self.law()?)?
            .with_cfl(self.run.cfl)
    }

    /// Resolved configuration as a TOML table, for the echo in manifests.
    pub fn echo(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.law.gamma > 1.5) {
            return Err(invalid("law.gamma", format!("needs gamma > 3/2, got {}", self.law.gamma)));
        }
        if !(self.law.coefficient > 0.0) {
            return Err(invalid("law.coefficient", "needs a positive pressure coefficient"));
        }
        if self.eps.list.is_empty() {
            return Err(invalid("eps.list", "needs at least one Mach number"));
        }
        for &e in &self.eps.list {
            if !(e > 0.0 && e.is_finite()) {
                return Err(invalid("eps.list", format!("entries must be positive, got {e}")));
            }
        }
        for w in self.eps.list.windows(2) {
            if !(w[1] < w[0]) {
                return Err(invalid("eps.list", "entries must be strictly decreasing"));
            }
        }
        if !(self.delta.coefficient > 0.0) {
            return Err(invalid("delta.coefficient", "needs a positive thickness coefficient"));
        }
        if !(self.delta.exponent >= 0.0) {
            return Err(invalid(
                "delta.exponent",
                format!("the thickness must not grow as eps shrinks, got exponent {}", self.delta.exponent),
            ));
        }
        match self.run.regime {
            Regime::Viscous => {
                if !(self.mu.value > 0.0) {
                    return Err(invalid("mu.value", "the viscous regime needs a fixed mu > 0"));
                }
            }
            Regime::Inviscid => {
                if !(self.mu.exponent > 0.0) {
                    return Err(invalid(
                        "mu.exponent",
                        "the inviscid regime needs mu vanishing with eps, so exponent > 0",
                    ));
                }
                if !(self.mu.coefficient > 0.0) {
                    return Err(invalid("mu.coefficient", "needs a positive viscosity coefficient"));
                }
            }
        }
        if !(self.run.final_time > 0.0) {
            return Err(invalid("run.final_time", "needs a positive horizon"));
        }
        if !(self.run.cfl > 0.0 && self.run.cfl <= 1.0) {
            return Err(invalid("run.cfl", "needs a factor in (0, 1]"));
        }
        if self.run.samples < 2 {
            return Err(invalid("run.samples", "needs at least two time samples"));
        }
        if !(self.run.window_fraction > 0.0 && self.run.window_fraction <= 1.0) {
            return Err(invalid("run.window_fraction", "needs a fraction in (0, 1]"));
        }
        if !(self.run.mollifier >= 0.0) {
            return Err(invalid("run.mollifier", "needs a nonnegative scale"));
        }
        if !(self.grid.length > 0.0) {
            return Err(invalid("grid.length", "needs a positive period"));
        }
        if self.grid.modes < 8 {
            return Err(invalid("grid.modes", "needs at least 8 points per direction"));
        }
        if self.grid.vertical_modes < 1 {
            return Err(invalid("grid.vertical_modes", "needs at least the constant mode"));
        }
        if !(self.data.random_amp >= 0.0) {
            return Err(invalid("data.random_amp", "needs a nonnegative amplitude"));
        }
        if !(self.acoustics.p > 2.0) {
            return Err(invalid("acoustics.p", "the admissible range is p > 2"));
        }
        if !(self.acoustics.horizon > 0.0) {
            return Err(invalid("acoustics.horizon", "needs a positive horizon"));
        }
        if self.acoustics.samples_per_period < 4 {
            return Err(invalid("acoustics.samples_per_period", "needs at least 4"));
        }
        for w in self.acoustics.eps.windows(2) {
            if !(w[1] < w[0]) {
                return Err(invalid("acoustics.eps", "entries must be strictly decreasing"));
            }
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.grid.modes, 48);
        assert_eq!(cfg.eps.list.len(), 4);
        assert_eq!(cfg.run.regime, Regime::Viscous);
        let echoed = toml::to_string(&cfg.echo()).unwrap();
        let again = parse_config(&echoed).unwrap();
        assert_eq!(again.eps.list, cfg.eps.list);
        assert_eq!(again.data.family, cfg.data.family);
    }

    #[test]
    fn dotted_keys_override_defaults() {
        let cfg = parse_config(
            "grid.modes = 96\nrun.regime = \"inviscid\"\neps.list = [0.5, 0.25, 0.1]\nmu.exponent = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.grid.modes, 96);
        assert_eq!(cfg.run.regime, Regime::Inviscid);
        assert!((cfg.mu_for(0.25) - 0.5).abs() < 1e-15);
        assert_eq!(cfg.limit_viscosity(), 0.0);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("grid.sized = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sized"), "message should name the key: {msg}");
    }

    #[test]
    fn top_level_unknown_key_is_named() {
        let err = parse_config("grib = 3\n").unwrap_err();
        assert!(err.to_string().contains("grib"));
    }

    #[test]
    fn shallow_gamma_is_rejected() {
        let err = parse_config("law.gamma = 1.4\n").unwrap_err();
        assert!(err.to_string().contains("law.gamma"));
    }

    #[test]
    fn increasing_eps_is_rejected() {
        assert!(parse_config("eps.list = [0.1, 0.2]\n").is_err());
    }

    #[test]
    fn inviscid_regime_needs_vanishing_mu() {
        let err = parse_config("run.regime = \"inviscid\"\nmu.exponent = 0.0\n").unwrap_err();
        assert!(err.to_string().contains("mu.exponent"));
    }

    #[test]
    fn schedules_follow_the_regime() {
        let cfg = parse_config("mu.value = 0.07\n").unwrap();
        assert_eq!(cfg.mu_for(0.25), 0.07);
        assert_eq!(cfg.mu_for(0.03125), 0.07);
        assert!((cfg.delta_for(0.125) - 0.125).abs() < 1e-15);

        let cfg = parse_config(
            "run.regime = \"inviscid\"\ndelta.coefficient = 2.0\ndelta.exponent = 1.5\n",
        )
        .unwrap();
        assert!((cfg.mu_for(0.25) - 0.5).abs() < 1e-15);
        assert!((cfg.delta_for(0.25) - 2.0 * 0.125).abs() < 1e-14);
    }
}
