//! Experiment configuration.
//!
//! A TOML file whose keys overlay the built-in defaults (`data/default.toml`).
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dos::PurcellParams;
use crate::error::{Error, Result};
use crate::lindblad::LabDephasing;
use crate::network::linear_grid;
use crate::tomography::ReadoutModel;

pub const DEFAULT_CONFIG: &str = include_str!("../data/default.toml");

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    /// `None` selects the built-in geometry.
    pub table: Option<PathBuf>,
    pub epsilon: f64,
    pub z_ref_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub step_hz: f64,
    pub passband_lo_hz: f64,
    pub passband_hi_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurcellSection {
    pub g_hz: f64,
    pub kappa_hz: f64,
    pub omega_c_hz: f64,
    pub gamma_d_per_us: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    pub omega_q_hz: f64,
    pub gamma_phi_per_us: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub rabi_min_hz: f64,
    pub rabi_max_hz: f64,
    pub rabi_steps: usize,
    pub delta_min_hz: f64,
    pub delta_max_hz: f64,
    pub delta_steps: usize,
    pub bracket_lo_hz: f64,
    pub bracket_hi_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub rabi_hz: f64,
    pub delta_hz: f64,
    pub t_final_us: f64,
    pub t_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographySection {
    pub enabled: bool,
    pub fidelity: f64,
    pub shots: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DephasingModel {
    Secular,
    Full,
}

impl From<DephasingModel> for LabDephasing {
    fn from(m: DephasingModel) -> Self {
        match m {
            DephasingModel::Secular => LabDephasing::Secular,
            DephasingModel::Full => LabDephasing::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub flat_dos: bool,
    pub flat_rate_per_us: Option<f64>,
    pub dephasing: DephasingModel,
    pub rabi_gain_hz2: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub crystal: CrystalSection,
    pub grid: GridSection,
    pub purcell: PurcellSection,
    pub qubit: QubitSection,
    pub drive: DriveSection,
    pub trajectory: TrajectorySection,
    pub tomography: TomographySection,
    pub model: ModelSection,
    pub output: OutputSection,
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// `n` points from `lo` to `hi` inclusive, mirror-exact about the midpoint.
pub fn symmetric_linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let m = (n - 1) as f64;
            (0..n)
                .map(|i| (lo * (m - i as f64) + hi * i as f64) / m)
                .collect()
        }
    }
}

impl ExperimentConfig {
    /// Built-in defaults with paths resolved against the working directory.
    pub fn defaults() -> Self {
        Self::from_toml_str("", Path::new("<defaults>"), Path::new("."))
            .expect("embedded defaults are valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, path, base)
    }

    /// Parses `text` over the defaults; `base_dir` anchors relative paths.
    pub fn from_toml_str(text: &str, origin: &Path, base_dir: &Path) -> Result<Self> {
        let err = |reason: String| Error::Config {
            path: origin.to_path_buf(),
            reason,
        };
        let mut table: toml::Table = toml::from_str(DEFAULT_CONFIG).expect("embedded defaults parse");
        let user: toml::Table = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        merge(&mut table, user);
        let mut cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| err(e.to_string()))?;
        if let Some(t) = &cfg.crystal.table {
            if t.is_relative() {
                cfg.crystal.table = Some(base_dir.join(t));
            }
        }
        if cfg.output.dir.is_relative() {
            cfg.output.dir = base_dir.join(&cfg.output.dir);
        }
        cfg.validate().map_err(|e| err(e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if let Some(t) = &self.crystal.table {
            if !t.is_file() {
                return bad(format!("crystal table {} does not exist", t.display()));
            }
        }
        if !(self.crystal.epsilon.is_finite() && self.crystal.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.crystal.epsilon));
        }
        if !(self.crystal.z_ref_ohm.is_finite() && self.crystal.z_ref_ohm > 0.0) {
            return bad(format!("z_ref_ohm must be positive, got {}", self.crystal.z_ref_ohm));
        }
        self.frequency_grid()?;
        let g = &self.grid;
        if !(g.passband_lo_hz < g.passband_hi_hz
            && g.passband_lo_hz >= g.start_hz
            && g.passband_hi_hz <= g.stop_hz)
        {
            return bad(format!(
                "pass band [{}, {}] Hz must be an interval inside the frequency grid",
                g.passband_lo_hz, g.passband_hi_hz
            ));
        }
        self.purcell_params().validate()?;
        if !(self.qubit.omega_q_hz.is_finite() && self.qubit.omega_q_hz > 0.0) {
            return bad(format!("omega_q_hz must be positive, got {}", self.qubit.omega_q_hz));
        }
        if !(self.qubit.gamma_phi_per_us.is_finite() && self.qubit.gamma_phi_per_us >= 0.0) {
            return bad(format!(
                "gamma_phi_per_us must be nonnegative, got {}",
                self.qubit.gamma_phi_per_us
            ));
        }
        let d = &self.drive;
        if d.rabi_steps == 0 || d.delta_steps == 0 {
            return bad("drive grids must be non-empty".into());
        }
        if !(d.rabi_min_hz >= 0.0 && d.rabi_min_hz <= d.rabi_max_hz && d.rabi_max_hz.is_finite()) {
            return bad(format!(
                "Rabi range [{}, {}] Hz must be nonnegative and ordered",
                d.rabi_min_hz, d.rabi_max_hz
            ));
        }
        if !(d.delta_min_hz <= d.delta_max_hz && d.delta_min_hz.is_finite() && d.delta_max_hz.is_finite()) {
            return bad(format!(
                "detuning range [{}, {}] Hz must be ordered",
                d.delta_min_hz, d.delta_max_hz
            ));
        }
        if !(d.bracket_lo_hz >= 0.0 && d.bracket_lo_hz < d.bracket_hi_hz && d.bracket_hi_hz.is_finite()) {
            return bad(format!(
                "Rabi bracket [{}, {}] Hz must satisfy 0 <= lo < hi",
                d.bracket_lo_hz, d.bracket_hi_hz
            ));
        }
        let t = &self.trajectory;
        if !(t.t_final_us.is_finite() && t.t_final_us > 0.0) {
            return bad(format!("t_final_us must be positive, got {}", t.t_final_us));
        }
        if t.t_steps == 0 {
            return bad("t_steps must be at least 1".into());
        }
        if !(t.rabi_hz.is_finite() && t.rabi_hz >= 0.0 && t.delta_hz.is_finite()) {
            return bad("trajectory drive must be finite with nonnegative Rabi frequency".into());
        }
        if self.tomography.enabled {
            self.readout_model().validate()?;
        }
        if let Some(r) = self.model.flat_rate_per_us {
            if !(r.is_finite() && r >= 0.0) {
                return bad(format!("flat_rate_per_us must be nonnegative, got {r}"));
            }
        }
        Ok(())
    }

    pub fn frequency_grid(&self) -> Result<Vec<f64>> {
        linear_grid(self.grid.start_hz, self.grid.stop_hz, self.grid.step_hz)
    }

    pub fn passband(&self) -> (f64, f64) {
        (self.grid.passband_lo_hz, self.grid.passband_hi_hz)
    }

    pub fn purcell_params(&self) -> PurcellParams {
        PurcellParams {
            g: self.purcell.g_hz,
            kappa: self.purcell.kappa_hz,
            omega_c: self.purcell.omega_c_hz,
            gamma_d: self.purcell.gamma_d_per_us,
        }
    }

    pub fn readout_model(&self) -> ReadoutModel {
        ReadoutModel {
            fidelity: self.tomography.fidelity,
            shots: self.tomography.shots,
            seed: self.tomography.seed,
        }
    }

    pub fn rabi_values(&self) -> Vec<f64> {
        let d = &self.drive;
        symmetric_linspace(d.rabi_min_hz, d.rabi_max_hz, d.rabi_steps)
    }

    pub fn delta_values(&self) -> Vec<f64> {
        let d = &self.drive;
        symmetric_linspace(d.delta_min_hz, d.delta_max_hz, d.delta_steps)
    }

    /// `t_steps + 1` times from 0 to `t_final_us`.
    pub fn time_values(&self) -> Vec<f64> {
        let t = &self.trajectory;
        (0..=t.t_steps)
            .map(|i| t.t_final_us * i as f64 / t.t_steps as f64)
            .collect()
    }
}
