//! Stepped-impedance transmission-line networks in the ABCD (chain) representation.
//!
//! Each uniform section is a lossless TEM line. Sections cascade by plain
//! 2×2 matrix multiplication, port 1 first, and the cascade is converted to
//! scattering parameters against equal reference impedances on both ports.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// One uniform impedance step of the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSection {
    /// Characteristic impedance, ohms.
    pub z0: f64,
    /// Physical length, meters.
    pub length: f64,
    /// Relative dielectric constant.
    pub epsilon: f64,
}

impl LineSection {
    pub fn new(z0: f64, length: f64, epsilon: f64) -> Result<Self> {
        Self::checked(0, z0, length, epsilon)
    }

    fn checked(row: usize, z0: f64, length: f64, epsilon: f64) -> Result<Self> {
        let bad = |reason: String| Err(Error::InvalidSection { row, reason });
        if !(z0.is_finite() && z0 > 0.0) {
            return bad(format!("impedance must be positive, got {z0} ohm"));
        }
        if !(length.is_finite() && length > 0.0) {
            return bad(format!("length must be positive, got {length} m"));
        }
        if !(epsilon.is_finite() && epsilon >= 1.0) {
            return bad(format!("dielectric constant must be >= 1, got {epsilon}"));
        }
        Ok(Self { z0, length, epsilon })
    }

    /// Electrical length βℓ in radians at `frequency` Hz.
    pub fn electrical_length(&self, frequency: f64) -> f64 {
        let beta = 2.0 * std::f64::consts::PI * frequency * self.epsilon.sqrt() / SPEED_OF_LIGHT;
        beta * self.length
    }
}

/// Chain matrix `[[a, b], [c, d]]`; `b` in ohms, `c` in siemens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcdMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl AbcdMatrix {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` followed by `rhs` (port 2 of `self` feeds port 1 of `rhs`).
    pub fn then(&self, rhs: &AbcdMatrix) -> AbcdMatrix {
        AbcdMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// Two-port S-parameters of a network swept over frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSpectrum {
    pub frequencies: Vec<f64>,
    pub s11: Vec<Complex64>,
    pub s21: Vec<Complex64>,
    pub z_ref: f64,
}

impl ScatteringSpectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Largest deviation of `|s11|² + |s21|²` from one over the sweep.
    pub fn max_unitarity_error(&self) -> f64 {
        self.s11
            .iter()
            .zip(&self.s21)
            .map(|(r, t)| (r.norm_sqr() + t.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Lossless line: `a = d = cos βℓ`, `b = i z0 sin βℓ`, `c = i sin βℓ / z0`.
pub fn abcd_of_section(section: &LineSection, frequency: f64) -> Result<AbcdMatrix> {
    if !frequency.is_finite() {
        return Err(Error::NonFiniteFrequency(frequency));
    }
    let (sin, cos) = section.electrical_length(frequency).sin_cos();
    Ok(AbcdMatrix {
        a: Complex64::new(cos, 0.0),
        b: Complex64::new(0.0, section.z0 * sin),
        c: Complex64::new(0.0, sin / section.z0),
        d: Complex64::new(cos, 0.0),
    })
}

/// Left-to-right product; the first element faces port 1. Empty input is the identity.
pub fn cascade<'a, I>(sections: I) -> AbcdMatrix
where
    I: IntoIterator<Item = &'a AbcdMatrix>,
{
    sections
        .into_iter()
        .fold(AbcdMatrix::identity(), |acc, m| acc.then(m))
}

/// ABCD to S with the same real reference impedance on both ports.
///
/// Returns `(s11, s21)`. A non-finite result is reported as
/// [`Error::DegenerateNetwork`] at frequency `f64::NAN`; callers that know the
/// frequency should annotate it (see [`sweep_spectrum`]).
pub fn s_params(abcd: &AbcdMatrix, z_ref: f64) -> Result<(Complex64, Complex64)> {
    if !(z_ref.is_finite() && z_ref > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference impedance must be positive, got {z_ref} ohm"
        )));
    }
    let b_n = abcd.b / z_ref;
    let c_n = abcd.c * z_ref;
    let denom = abcd.a + b_n + c_n + abcd.d;
    let s11 = (abcd.a + b_n - c_n - abcd.d) / denom;
    let s21 = Complex64::new(2.0, 0.0) / denom;
    if !(s11.is_finite() && s21.is_finite()) {
        return Err(Error::DegenerateNetwork {
            frequency_hz: f64::NAN,
        });
    }
    Ok((s11, s21))
}

/// Builds the ordered section list from `(z0 ohm, length m)` rows, row 1 first.
pub fn build_crystal(rows: &[(f64, f64)], epsilon: f64) -> Result<Vec<LineSection>> {
    rows.iter()
        .enumerate()
        .map(|(i, &(z0, length))| LineSection::checked(i + 1, z0, length, epsilon))
        .collect()
}

/// Evaluates the cascade at every grid frequency. Output is in grid order.
pub fn sweep_spectrum(
    sections: &[LineSection],
    frequencies: &[f64],
    z_ref: f64,
) -> Result<ScatteringSpectrum> {
    check_increasing(frequencies)?;
    let mut s11 = Vec::with_capacity(frequencies.len());
    let mut s21 = Vec::with_capacity(frequencies.len());
    for &f in frequencies {
        let mats = sections
            .iter()
            .map(|s| abcd_of_section(s, f))
            .collect::<Result<Vec<_>>>()?;
        let (r, t) = s_params(&cascade(&mats), z_ref).map_err(|e| match e {
            Error::DegenerateNetwork { .. } => Error::DegenerateNetwork { frequency_hz: f },
            other => other,
        })?;
        s11.push(r);
        s21.push(t);
    }
    Ok(ScatteringSpectrum {
        frequencies: frequencies.to_vec(),
        s11,
        s21,
        z_ref,
    })
}

pub(crate) fn check_increasing(frequencies: &[f64]) -> Result<()> {
    if let Some(bad) = frequencies.iter().find(|f| !f.is_finite()) {
        return Err(Error::NonFiniteFrequency(*bad));
    }
    if let Some(w) = frequencies.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "frequencies must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Linear frequency grid `start, start + step, ..., <= stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start
    {
        return Err(Error::InvalidGrid(format!(
            "need finite start <= stop and step > 0 (start={start}, stop={stop}, step={step})"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

/// Summary of the reflective band of a swept crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopBand {
    /// Lower −3 dB crossing, Hz.
    pub lower_edge_hz: f64,
    /// Upper −3 dB crossing, Hz.
    pub upper_edge_hz: f64,
    /// Deepest point of `|s21|`, Hz.
    pub min_freq_hz: f64,
    /// `|s21|²` at the deepest point relative to the pass-band mean, dB.
    pub depth_db: f64,
    /// Mean `|s21|²` over the pass-band window.
    pub passband_mean: f64,
}

/// Finds the contiguous region around the transmission minimum where
/// `|s21|²` sits more than 3 dB below its pass-band mean.
///
/// Returns `None` when no grid point drops below the −3 dB line. Edges are
/// linearly interpolated between grid points.
pub fn find_stop_band(
    spectrum: &ScatteringSpectrum,
    passband: (f64, f64),
) -> Result<Option<StopBand>> {
    let power: Vec<f64> = spectrum.s21.iter().map(|t| t.norm_sqr()).collect();
    let passband_mean = window_mean(&spectrum.frequencies, &power, passband)?;
    let threshold = 0.5 * passband_mean;
    let (imin, &pmin) = power
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidGrid("empty spectrum".into()))?;
    if pmin >= threshold {
        return Ok(None);
    }
    let f = &spectrum.frequencies;
    let cross = |i: usize, j: usize| {
        // crossing between grid points i and j
        let t = (threshold - power[i]) / (power[j] - power[i]);
        f[i] + t * (f[j] - f[i])
    };
    let mut lo = imin;
    while lo > 0 && power[lo - 1] < threshold {
        lo -= 1;
    }
    let lower_edge_hz = if lo == 0 { f[0] } else { cross(lo - 1, lo) };
    let mut hi = imin;
    while hi + 1 < power.len() && power[hi + 1] < threshold {
        hi += 1;
    }
    let upper_edge_hz = if hi + 1 == power.len() {
        f[hi]
    } else {
        cross(hi, hi + 1)
    };
    Ok(Some(StopBand {
        lower_edge_hz,
        upper_edge_hz,
        min_freq_hz: f[imin],
        depth_db: 10.0 * (pmin / passband_mean).log10(),
        passband_mean,
    }))
}

pub(crate) fn window_mean(freqs: &[f64], values: &[f64], window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidGrid(format!(
            "pass-band window [{lo}, {hi}] Hz is empty"
        )));
    }
    let (first, last) = match (freqs.first(), freqs.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidGrid("empty frequency grid".into())),
    };
    if lo < first || hi > last {
        return Err(Error::InvalidGrid(format!(
            "pass-band window [{lo}, {hi}] Hz exceeds grid [{first}, {last}] Hz"
        )));
    }
    let selected: Vec<f64> = freqs
        .iter()
        .zip(values)
        .filter(|(f, _)| **f >= lo && **f <= hi)
        .map(|(_, v)| *v)
        .collect();
    if selected.len() < 10 {
        return Err(Error::InvalidGrid(format!(
            "pass-band window [{lo}, {hi}] Hz holds {} grid points, need at least 10",
            selected.len()
        )));
    }
    Ok(selected.iter().sum::<f64>() / selected.len() as f64)
}
