//! Local density of states seen through the crystal, and the rates it sets.
//!
//! The raw density is the fraction of incident power that the crystal lets
//! through to the matched continuum, `1 − |s11|²`, normalized so that its
//! mean over a declared pass band is one. The qubit sees it filtered by the
//! dispersively coupled cavity, which contributes the `(g/Δq)² κ` prefactor.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::network::{check_increasing, window_mean, ScatteringSpectrum};

/// Normalized density of states sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    frequencies: Vec<f64>,
    rho: Vec<f64>,
    normalization: f64,
}

impl SpectralDensity {
    /// Wraps already-normalized samples (normalization recorded as 1).
    pub fn from_samples(frequencies: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if frequencies.len() != rho.len() {
            return Err(Error::InvalidGrid(format!(
                "{} frequencies but {} density samples",
                frequencies.len(),
                rho.len()
            )));
        }
        if frequencies.len() < 2 {
            return Err(Error::InvalidGrid("need at least two samples".into()));
        }
        check_increasing(&frequencies)?;
        if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "density of states must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(Self {
            frequencies,
            rho,
            normalization: 1.0,
        })
    }

    /// Constant density `value` over `frequencies`.
    pub fn flat(frequencies: Vec<f64>, value: f64) -> Result<Self> {
        let rho = vec![value; frequencies.len()];
        Self::from_samples(frequencies, rho)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Pass-band mean of the raw density that `rho` was divided by.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn range(&self) -> (f64, f64) {
        (self.frequencies[0], self.frequencies[self.frequencies.len() - 1])
    }

    /// Linear interpolation; queries outside the grid are errors.
    pub fn at(&self, frequency_hz: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(frequency_hz >= lo && frequency_hz <= hi) {
            return Err(Error::OutOfRange {
                frequency_hz,
                lo_hz: lo,
                hi_hz: hi,
            });
        }
        let f = &self.frequencies;
        let j = f.partition_point(|&x| x <= frequency_hz);
        if j == f.len() {
            return Ok(self.rho[f.len() - 1]);
        }
        let i = j - 1;
        let t = (frequency_hz - f[i]) / (f[j] - f[i]);
        Ok(self.rho[i] + t * (self.rho[j] - self.rho[i]))
    }
}

/// Qubit-cavity-crystal constants. Frequencies are ν = ω/2π in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellParams {
    /// Qubit-cavity coupling g/2π, Hz.
    pub g: f64,
    /// Cavity linewidth κ/2π, Hz.
    pub kappa: f64,
    /// Cavity frequency ω_c/2π, Hz.
    pub omega_c: f64,
    /// Decay into channels other than the crystal, 1/μs.
    pub gamma_d: f64,
}

impl PurcellParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("g", self.g), ("kappa", self.kappa), ("omega_c", self.omega_c)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.gamma_d.is_finite() && self.gamma_d >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma_d must be nonnegative, got {}",
                self.gamma_d
            )));
        }
        Ok(())
    }

    /// Crystal-limited rate `(g/Δq)² κ` for ρ = 1 at `frequency_hz`, 1/μs.
    pub fn filtered_rate(&self, frequency_hz: f64) -> Result<f64> {
        let rate = self.filtered_rate_quiet(frequency_hz)?;
        if self.is_marginal(frequency_hz) {
            log::warn!(
                "qubit-cavity detuning {:.3e} Hz is within 10 linewidths; dispersive formula is marginal",
                self.omega_c - frequency_hz
            );
        }
        Ok(rate)
    }

    /// True within 10 linewidths of the cavity, where the dispersive form degrades.
    pub fn is_marginal(&self, frequency_hz: f64) -> bool {
        (self.omega_c - frequency_hz).abs() < 10.0 * self.kappa
    }

    /// [`Self::filtered_rate`] without the marginal-detuning warning, for sweeps
    /// that report it once.
    pub fn filtered_rate_quiet(&self, frequency_hz: f64) -> Result<f64> {
        let detuning = self.omega_c - frequency_hz;
        if detuning == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "qubit at the cavity frequency {frequency_hz} Hz; dispersive rate undefined"
            )));
        }
        let kappa_per_us = TAU * self.kappa * 1e-6;
        Ok((self.g / detuning).powi(2) * kappa_per_us)
    }
}

/// Normalizes `1 − |s11|²` by its mean over `passband` (Hz, inclusive).
pub fn dos_from_spectrum(spec: &ScatteringSpectrum, passband: (f64, f64)) -> Result<SpectralDensity> {
    let raw: Vec<f64> = spec
        .s11
        .iter()
        .map(|r| (1.0 - r.norm_sqr()).max(0.0))
        .collect();
    let mean = window_mean(&spec.frequencies, &raw, passband)?;
    if mean < 1e-6 {
        return Err(Error::DegenerateNormalization { mean });
    }
    let rho = raw.iter().map(|r| r / mean).collect();
    let mut dos = SpectralDensity::from_samples(spec.frequencies.clone(), rho)?;
    dos.normalization = mean;
    Ok(dos)
}

/// Qubit decay rate `γ_d + ρ(ω_q) (g/Δq)² κ` in 1/μs.
pub fn purcell_rate(dos: &SpectralDensity, omega_q: f64, p: &PurcellParams) -> Result<f64> {
    let rho = dos.at(omega_q)?;
    Ok(p.gamma_d + rho * p.filtered_rate(omega_q)?)
}

/// `(Ω_R/2π)² = drive_gain · ρ(ω_q)`, in Hz² when `drive_gain` is in Hz².
pub fn rabi_squared_proxy(dos: &SpectralDensity, omega_q: f64, drive_gain: f64) -> Result<f64> {
    Ok(drive_gain * dos.at(omega_q)?)
}

/// Emission rate into the environment as a function of photon frequency.
pub trait Bath {
    /// Rate in 1/μs for a transition that emits at `frequency_hz`.
    fn rate_at(&self, frequency_hz: f64) -> Result<f64>;
}

/// Crystal density of states filtered through the cavity.
#[derive(Debug, Clone, Copy)]
pub struct PurcellBath<'a> {
    pub dos: &'a SpectralDensity,
    pub params: PurcellParams,
}

impl Bath for PurcellBath<'_> {
    fn rate_at(&self, frequency_hz: f64) -> Result<f64> {
        purcell_rate(self.dos, frequency_hz, &self.params)
    }
}

/// Colorless environment: the same rate at every frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatBath {
    pub rate: f64,
}

impl Bath for FlatBath {
    fn rate_at(&self, _frequency_hz: f64) -> Result<f64> {
        Ok(self.rate)
    }
}
