//! Finite-fidelity readout and eigenstate-calibrated rescaling.
//!
//! Each shot reports the Born-rule outcome, flipped with probability
//! `1 − F`. Random numbers come from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64(seed)`. Streams separate the draws: axis measurements use
//! streams 0, 1, 2 (X, Y, Z) and the calibration preparation of axis `a`
//! with sign `s` uses stream `8 + 2a + s` (`s = 0` for +, `1` for −).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lindblad::{Basis, BlochVector, DensityMatrix};

/// Scales below this carry no usable information.
pub const MIN_CALIBRATION_SCALE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutModel {
    /// Probability of a correct binary assignment, in [0.5, 1].
    pub fidelity: f64,
    pub shots: u32,
    pub seed: u64,
}

impl ReadoutModel {
    pub fn new(fidelity: f64, shots: u32, seed: u64) -> Result<Self> {
        let m = Self { fidelity, shots, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.fidelity) {
            return Err(Error::InvalidParameter(format!(
                "readout fidelity must lie in [0.5, 1], got {}",
                self.fidelity
            )));
        }
        if self.shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        Ok(())
    }

    /// Same model with another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }

    fn component(self, r: &BlochVector) -> f64 {
        r.as_array()[self.index()]
    }

    fn unit(self, sign: f64) -> BlochVector {
        let mut v = [0.0; 3];
        v[self.index()] = sign;
        BlochVector::new(v[0], v[1], v[2])
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Mean of ±1 outcomes when the true expectation is `r`.
fn sample_mean(r: f64, model: &ReadoutModel, rng: &mut ChaCha8Rng) -> f64 {
    let p_plus = (0.5 * (1.0 + r)).clamp(0.0, 1.0);
    let mut total: i64 = 0;
    for _ in 0..model.shots {
        let mut up = rng.random::<f64>() < p_plus;
        if rng.random::<f64>() >= model.fidelity {
            up = !up;
        }
        total += if up { 1 } else { -1 };
    }
    total as f64 / model.shots as f64
}

/// Raw ⟨σ_axis⟩ estimate from `model.shots` noisy shots on a bare-basis state.
pub fn simulate_axis_measurement(rho: &DensityMatrix, axis: Axis, model: &ReadoutModel) -> Result<f64> {
    if rho.basis() != Basis::Bare {
        return Err(Error::InvalidParameter(
            "tomography acts on bare-basis states".into(),
        ));
    }
    model.validate()?;
    let r = axis.component(&rho.bloch());
    let mut rng = stream(model.seed, axis.index() as u64);
    Ok(sample_mean(r, model, &mut rng))
}

/// Per-axis scales `(m₊ − m₋)/2` from simulated ± eigenstate preparations.
pub fn calibrate(model: &ReadoutModel) -> Result<[f64; 3]> {
    model.validate()?;
    let mut scales = [0.0; 3];
    for axis in Axis::ALL {
        let mut means = [0.0; 2];
        for (s, sign) in [1.0, -1.0].into_iter().enumerate() {
            let r = axis.component(&axis.unit(sign));
            let mut rng = stream(model.seed, 8 + 2 * axis.index() as u64 + s as u64);
            means[s] = sample_mean(r, model, &mut rng);
        }
        let scale = 0.5 * (means[0] - means[1]);
        if scale < MIN_CALIBRATION_SCALE {
            return Err(Error::CalibrationDegenerate {
                axis: axis.label(),
                scale,
            });
        }
        scales[axis.index()] = scale;
    }
    Ok(scales)
}

/// `clip(raw / scale, −1, 1)` per axis.
pub fn rescale(raw: [f64; 3], scales: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (raw[i] / scales[i]).clamp(-1.0, 1.0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyRecord {
    pub raw_x: f64,
    pub raw_y: f64,
    pub raw_z: f64,
    pub scale_x: f64,
    pub scale_y: f64,
    pub scale_z: f64,
    pub corrected_x: f64,
    pub corrected_y: f64,
    pub corrected_z: f64,
}

impl TomographyRecord {
    pub fn corrected(&self) -> BlochVector {
        BlochVector::new(self.corrected_x, self.corrected_y, self.corrected_z)
    }
}

/// Measures all three axes of `rho` and rescales with precomputed `scales`.
pub fn measure_state(rho: &DensityMatrix, model: &ReadoutModel, scales: [f64; 3]) -> Result<TomographyRecord> {
    let mut raw = [0.0; 3];
    for axis in Axis::ALL {
        raw[axis.index()] = simulate_axis_measurement(rho, axis, model)?;
    }
    let c = rescale(raw, scales);
    Ok(TomographyRecord {
        raw_x: raw[0],
        raw_y: raw[1],
        raw_z: raw[2],
        scale_x: scales[0],
        scale_y: scales[1],
        scale_z: scales[2],
        corrected_x: c[0],
        corrected_y: c[1],
        corrected_z: c[2],
    })
}
