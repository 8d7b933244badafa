//! Sweeps behind the command-line tool and their CSV outputs.
//!
//! Every command reads an [`ExperimentConfig`] and writes into
//! `config.output.dir`. Floats are written in shortest round-trip form, so
//! equal inputs give byte-identical files. Missing values are written as `NaN`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::dos::{dos_from_spectrum, Bath, FlatBath, PurcellBath, PurcellParams, SpectralDensity};
use crate::dressed::{
    detailed_balance_rabi, dressed_frame, rates_in_frame, DressedFrame, DriveParams, RabiBracket, RateSet,
};
use crate::error::{Error, Result};
use crate::lindblad::{
    build_liouvillian_with, lab_frame_bloch, steady_state, Basis, BlochVector, DensityMatrix, Propagator,
};
use crate::network::{build_crystal, find_stop_band, sweep_spectrum, LineSection, ScatteringSpectrum, StopBand};
use crate::table::{parse_crystal_table, read_crystal_table, to_section_rows, DEVICE_TABLE};
use crate::tomography::{calibrate, measure_state, TomographyRecord};

pub const SPARAMS_FILE: &str = "sparams.csv";
pub const DOS_FILE: &str = "dos.csv";
pub const SSMAP_FILE: &str = "ssmap.csv";
pub const CONTOUR_FILE: &str = "db_contour.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";

pub fn load_sections(cfg: &ExperimentConfig) -> Result<Vec<LineSection>> {
    let rows = match &cfg.crystal.table {
        Some(path) => read_crystal_table(path)?,
        None => parse_crystal_table(DEVICE_TABLE, Path::new("<built-in table>"))?,
    };
    build_crystal(&to_section_rows(&rows), cfg.crystal.epsilon)
}

pub fn compute_spectrum(cfg: &ExperimentConfig) -> Result<ScatteringSpectrum> {
    let sections = load_sections(cfg)?;
    sweep_spectrum(&sections, &cfg.frequency_grid()?, cfg.crystal.z_ref_ohm)
}

pub fn compute_dos(cfg: &ExperimentConfig) -> Result<SpectralDensity> {
    dos_from_spectrum(&compute_spectrum(cfg)?, cfg.passband())
}

/// Environment seen by the dressed qubit during a sweep.
#[derive(Debug, Clone)]
pub enum SweepBath {
    Crystal {
        dos: SpectralDensity,
        params: PurcellParams,
    },
    Flat(FlatBath),
}

impl Bath for SweepBath {
    fn rate_at(&self, frequency_hz: f64) -> Result<f64> {
        match self {
            SweepBath::Crystal { dos, params } => PurcellBath { dos, params: *params }.rate_at(frequency_hz),
            SweepBath::Flat(b) => b.rate_at(frequency_hz),
        }
    }
}

impl SweepBath {
    /// Crystal DOS, or with `flat` a constant rate: `model.flat_rate_per_us`
    /// if set, else the ρ = 1 Purcell rate at ω_q.
    pub fn from_config(cfg: &ExperimentConfig, flat: bool) -> Result<Self> {
        let params = cfg.purcell_params();
        if flat || cfg.model.flat_dos {
            let rate = match cfg.model.flat_rate_per_us {
                Some(r) => r,
                None => params.gamma_d + params.filtered_rate(cfg.qubit.omega_q_hz)?,
            };
            return Ok(SweepBath::Flat(FlatBath { rate }));
        }
        Ok(SweepBath::Crystal {
            dos: compute_dos(cfg)?,
            params,
        })
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, SweepBath::Flat(_))
    }

    /// Errors if a drive grid would sample the bath outside the DOS grid.
    fn check_coverage(&self, omega_q: f64, rabi: &[f64], delta: &[f64]) -> Result<()> {
        let SweepBath::Crystal { dos, .. } = self else {
            return Ok(());
        };
        let (lo, hi) = dos.range();
        let max_rabi = rabi.iter().cloned().fold(0.0, f64::max);
        for &d in delta {
            let reach = max_rabi.hypot(d);
            for f in [omega_q + d - reach, omega_q + d + reach] {
                if f < lo || f > hi {
                    return Err(Error::InvalidParameter(format!(
                        "drive grid samples the bath at {f} Hz, outside the DOS grid [{lo}, {hi}] Hz"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dressed frame of a drive, with the undriven frame when Ω = Δ = 0.
pub fn drive_frame(drive: &DriveParams) -> Result<DressedFrame> {
    match dressed_frame(drive) {
        Err(Error::UndefinedFrame) => Ok(DressedFrame::undriven()),
        other => other,
    }
}

pub fn point_rates(cfg: &ExperimentConfig, bath: &SweepBath, rabi: f64, delta: f64) -> Result<RateSet> {
    let drive = DriveParams::from_detuning(cfg.qubit.omega_q_hz, delta, rabi);
    rates_in_frame(drive.omega_d, drive_frame(&drive)?, bath, cfg.qubit.gamma_phi_per_us)
}

/// Steady state at one drive point, in the dressed basis, with its rates.
#[derive(Debug, Clone, Copy)]
pub struct SteadyPoint {
    pub rates: RateSet,
    pub rho: DensityMatrix,
    pub bloch: BlochVector,
}

pub fn solve_point(cfg: &ExperimentConfig, bath: &SweepBath, rabi: f64, delta: f64) -> Result<SteadyPoint> {
    let rates = point_rates(cfg, bath, rabi, delta)?;
    let l = build_liouvillian_with(&rates, cfg.model.dephasing.into())?;
    let rho = steady_state(&l)?;
    Ok(SteadyPoint {
        rates,
        rho,
        bloch: lab_frame_bloch(&rho, rates.theta),
    })
}

#[derive(Debug, Clone)]
pub struct SsRow {
    pub omega_hz: f64,
    pub delta_hz: f64,
    pub ideal: Option<BlochVector>,
    pub measured: Option<TomographyRecord>,
    pub error: Option<String>,
}

/// Steady states over the Ω × Δ grid, Ω in the outer loop.
///
/// Point `i` (row order) uses tomography seed `seed + i`; calibration uses
/// `seed`. A failed point keeps its row with an error message. Fails only
/// if every point fails.
pub fn steady_state_map(cfg: &ExperimentConfig, bath: &SweepBath) -> Result<Vec<SsRow>> {
    let rabi = cfg.rabi_values();
    let delta = cfg.delta_values();
    bath.check_coverage(cfg.qubit.omega_q_hz, &rabi, &delta)?;
    let model = cfg.readout_model();
    let scales = if cfg.tomography.enabled {
        Some(calibrate(&model)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(rabi.len() * delta.len());
    for &w in &rabi {
        for &d in &delta {
            let index = rows.len() as u64;
            let result = solve_point(cfg, bath, w, d).and_then(|p| {
                let measured = match scales {
                    Some(s) => {
                        let bare = p.rho.to_bare(p.rates.theta);
                        Some(measure_state(&bare, &model.with_seed(model.seed.wrapping_add(index)), s)?)
                    }
                    None => None,
                };
                Ok((p.bloch, measured))
            });
            rows.push(match result {
                Ok((b, m)) => SsRow {
                    omega_hz: w,
                    delta_hz: d,
                    ideal: Some(b),
                    measured: m,
                    error: None,
                },
                Err(e) => {
                    log::warn!("steady state failed at omega={w} Hz, delta={d} Hz: {e}");
                    SsRow {
                        omega_hz: w,
                        delta_hz: d,
                        ideal: None,
                        measured: None,
                        error: Some(e.to_string()),
                    }
                }
            });
        }
    }
    if !rows.is_empty() && rows.iter().all(|r| r.error.is_some()) {
        return Err(Error::Numerical(format!(
            "every grid point failed; first error: {}",
            rows[0].error.as_deref().unwrap_or_default()
        )));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourRow {
    pub delta_hz: f64,
    pub omega_star_hz: Option<f64>,
}

/// Balance amplitude for each detuning of the drive grid.
pub fn balance_contour(cfg: &ExperimentConfig, bath: &SweepBath) -> Result<Vec<ContourRow>> {
    let bracket = RabiBracket {
        lo: cfg.drive.bracket_lo_hz,
        hi: cfg.drive.bracket_hi_hz,
    };
    let delta = cfg.delta_values();
    bath.check_coverage(cfg.qubit.omega_q_hz, &[bracket.hi], &delta)?;
    delta
        .iter()
        .map(|&d| {
            Ok(ContourRow {
                delta_hz: d,
                omega_star_hz: detailed_balance_rabi(d, cfg.qubit.omega_q_hz, bath, bracket)?,
            })
        })
        .collect()
}

/// Lab-frame Bloch vector from `|g⟩` over the configured time grid.
pub fn trajectory(
    cfg: &ExperimentConfig,
    bath: &SweepBath,
    rabi: f64,
    delta: f64,
) -> Result<Vec<(f64, BlochVector)>> {
    bath.check_coverage(cfg.qubit.omega_q_hz, &[rabi], &[delta])?;
    let rates = point_rates(cfg, bath, rabi, delta)?;
    let l = build_liouvillian_with(&rates, cfg.model.dephasing.into())?;
    let prop = Propagator::new(&l)?;
    let rho0 = DensityMatrix::ground(Basis::Bare).to_dressed(rates.theta);
    cfg.time_values()
        .into_iter()
        .map(|t| Ok((t, lab_frame_bloch(&prop.propagate(&rho0, t)?, rates.theta))))
        .collect()
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:?}")
    }
}

fn opt(x: Option<f64>) -> String {
    num(x.unwrap_or(f64::NAN))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone)]
pub struct SparamsSummary {
    pub path: PathBuf,
    pub points: usize,
    pub max_unitarity_error: f64,
    pub min_s21_db: f64,
    pub min_s21_freq_hz: f64,
    pub stop_band: Option<StopBand>,
}

pub fn cmd_sparams(cfg: &ExperimentConfig) -> Result<SparamsSummary> {
    let spec = compute_spectrum(cfg)?;
    let path = cfg.output.dir.join(SPARAMS_FILE);
    write_csv(
        &path,
        &["freq_hz", "s11_re", "s11_im", "s21_re", "s21_im"],
        spec.frequencies
            .iter()
            .zip(spec.s11.iter().zip(&spec.s21))
            .map(|(f, (a, b))| vec![num(*f), num(a.re), num(a.im), num(b.re), num(b.im)]),
    )?;
    let (min_i, min_t) = spec
        .s21
        .iter()
        .map(|s| s.norm_sqr())
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidGrid("empty sweep".into()))?;
    Ok(SparamsSummary {
        path,
        points: spec.len(),
        max_unitarity_error: spec.max_unitarity_error(),
        min_s21_db: 10.0 * min_t.log10(),
        min_s21_freq_hz: spec.frequencies[min_i],
        stop_band: find_stop_band(&spec, cfg.passband())?,
    })
}

#[derive(Debug, Clone)]
pub struct DosSummary {
    pub path: PathBuf,
    pub points: usize,
    pub marginal_points: usize,
}

/// Sweeps ω_q over the frequency grid. `gamma1_per_us` is NaN at ω_q = ω_c.
pub fn cmd_dos(cfg: &ExperimentConfig) -> Result<DosSummary> {
    let dos = compute_dos(cfg)?;
    let p = cfg.purcell_params();
    let marginal = dos.frequencies().iter().filter(|&&f| p.is_marginal(f)).count();
    if marginal > 0 {
        log::warn!(
            "{marginal} grid points lie within 10 cavity linewidths; their rates use a marginal dispersive formula"
        );
    }
    let path = cfg.output.dir.join(DOS_FILE);
    let rows: Vec<Vec<String>> = dos
        .frequencies()
        .iter()
        .zip(dos.rho())
        .map(|(&f, &rho)| {
            let gamma1 = p
                .filtered_rate_quiet(f)
                .map(|r| p.gamma_d + rho * r)
                .unwrap_or(f64::NAN);
            vec![num(f), num(rho), num(gamma1), num(cfg.model.rabi_gain_hz2 * rho)]
        })
        .collect();
    let points = rows.len();
    write_csv(&path, &["freq_hz", "rho", "gamma1_per_us", "rabi_sq_proxy"], rows)?;
    Ok(DosSummary {
        path,
        points,
        marginal_points: marginal,
    })
}

#[derive(Debug, Clone)]
pub struct SsmapSummary {
    pub path: PathBuf,
    pub contour_path: PathBuf,
    pub points: usize,
    pub failures: usize,
    pub contour_roots: usize,
}

/// Writes the steady-state map and the balance contour.
pub fn cmd_ssmap(cfg: &ExperimentConfig, flat: bool) -> Result<SsmapSummary> {
    let bath = SweepBath::from_config(cfg, flat)?;
    let rows = steady_state_map(cfg, &bath)?;
    let path = cfg.output.dir.join(SSMAP_FILE);
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let points = rows.len();
    write_csv(
        &path,
        &[
            "omega_hz", "delta_hz", "x_ideal", "y_ideal", "z_ideal", "x_meas", "y_meas", "z_meas", "error",
        ],
        rows.iter().map(|r| {
            let i = r.ideal.map(|b| b.as_array().map(Some)).unwrap_or([None; 3]);
            let m = r
                .measured
                .map(|t| t.corrected().as_array().map(Some))
                .unwrap_or([None; 3]);
            vec![
                num(r.omega_hz),
                num(r.delta_hz),
                opt(i[0]),
                opt(i[1]),
                opt(i[2]),
                opt(m[0]),
                opt(m[1]),
                opt(m[2]),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )?;
    let contour = write_contour(cfg, &bath)?;
    Ok(SsmapSummary {
        path,
        contour_path: contour.0,
        points,
        failures,
        contour_roots: contour.1,
    })
}

fn write_contour(cfg: &ExperimentConfig, bath: &SweepBath) -> Result<(PathBuf, usize)> {
    let rows = balance_contour(cfg, bath)?;
    let path = cfg.output.dir.join(CONTOUR_FILE);
    let roots = rows.iter().filter(|r| r.omega_star_hz.is_some()).count();
    write_csv(
        &path,
        &["delta_hz", "omega_star_hz"],
        rows.iter().map(|r| vec![num(r.delta_hz), opt(r.omega_star_hz)]),
    )?;
    Ok((path, roots))
}

/// Writes the balance contour only; returns its path and number of roots.
pub fn cmd_db_contour(cfg: &ExperimentConfig, flat: bool) -> Result<(PathBuf, usize)> {
    let bath = SweepBath::from_config(cfg, flat)?;
    write_contour(cfg, &bath)
}

/// Writes the trajectory for the configured drive; returns its path and row count.
pub fn cmd_trajectory(cfg: &ExperimentConfig, flat: bool) -> Result<(PathBuf, usize)> {
    let bath = SweepBath::from_config(cfg, flat)?;
    let traj = trajectory(cfg, &bath, cfg.trajectory.rabi_hz, cfg.trajectory.delta_hz)?;
    let path = cfg.output.dir.join(TRAJECTORY_FILE);
    let n = traj.len();
    write_csv(
        &path,
        &["t_us", "x", "y", "z"],
        traj.iter().map(|(t, b)| vec![num(*t), num(b.x), num(b.y), num(b.z)]),
    )?;
    Ok((path, n))
}
