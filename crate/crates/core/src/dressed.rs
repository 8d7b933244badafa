//! Dressed states of the driven qubit and the dissipation rates they see.
//!
//! In the frame rotating at the drive, `H = Δ/2 σz + Ω/2 σx` with
//! `Δ = ω_d − ω_q`. Its eigenstates are
//!
//! ```text
//! |g̃⟩ = cos θ |g⟩ − sin θ |e⟩
//! |ẽ⟩ = sin θ |g⟩ + cos θ |e⟩,   tan 2θ = −Ω/Δ,  0 ≤ θ < π/2
//! ```
//!
//! split by the generalized Rabi frequency `Ω_R = √(Ω² + Δ²)`. Transitions
//! between them emit at `ω_d` and `ω_d ± Ω_R`, so a colored bath gives the
//! two dressed transitions different rates.

use crate::dos::Bath;
use crate::error::{Error, Result};
use crate::lindblad::DensityMatrix;

/// Coherent drive. Frequencies in Hz (ν = ω/2π), phase in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub omega_d: f64,
    pub omega_q: f64,
    /// Resonant Rabi frequency Ω/2π, Hz.
    pub rabi: f64,
    pub phase: f64,
}

impl DriveParams {
    pub fn from_detuning(omega_q: f64, delta: f64, rabi: f64) -> Self {
        Self {
            omega_d: omega_q + delta,
            omega_q,
            rabi,
            phase: 0.0,
        }
    }

    /// Δ = ω_d − ω_q, Hz.
    pub fn detuning(&self) -> f64 {
        self.omega_d - self.omega_q
    }
}

/// Mixing angle and splitting of the dressed basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedFrame {
    pub theta: f64,
    /// Ω_R/2π, Hz.
    pub omega_r: f64,
}

impl DressedFrame {
    /// θ = 0, Ω_R = 0: the bare qubit, reached as the far-red limit.
    pub fn undriven() -> Self {
        Self {
            theta: 0.0,
            omega_r: 0.0,
        }
    }
}

/// Mixing angle on the branch `θ → 0` for far-red and `θ → π/2` for far-blue detuning.
///
/// `2θ = atan2(Ω, −Δ)`. An undriven blue-detuned qubit (Ω = 0, Δ > 0) sits at
/// the closing end of the branch, θ = π/2, where `|ẽ⟩ = |g⟩`.
pub fn dressed_frame(drive: &DriveParams) -> Result<DressedFrame> {
    let rabi = drive.rabi;
    let delta = drive.detuning();
    if !(rabi.is_finite() && rabi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Rabi frequency must be finite and nonnegative, got {rabi}"
        )));
    }
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("detuning {delta} is not finite")));
    }
    if rabi == 0.0 && delta == 0.0 {
        return Err(Error::UndefinedFrame);
    }
    Ok(DressedFrame {
        theta: 0.5 * rabi.atan2(-delta),
        omega_r: rabi.hypot(delta),
    })
}

/// Dressed-frame dissipation rates, all in 1/μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    /// Dressed dephasing, sampled at ω_d.
    pub gamma_0: f64,
    /// Sampled at ω_d + Ω_R; drives |ẽ⟩ → |g̃⟩.
    pub gamma_plus: f64,
    /// Sampled at ω_d − Ω_R; drives |g̃⟩ → |ẽ⟩.
    pub gamma_minus: f64,
    /// Lab-frame pure dephasing.
    pub gamma_phi: f64,
    pub theta: f64,
    /// Ω_R/2π, Hz.
    pub omega_r: f64,
}

impl RateSet {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma_0", self.gamma_0),
            ("gamma_plus", self.gamma_plus),
            ("gamma_minus", self.gamma_minus),
            ("gamma_phi", self.gamma_phi),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::NegativeRate { name, value });
            }
        }
        if !(self.theta.is_finite() && self.omega_r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite dressed frame (theta={}, omega_r={})",
                self.theta, self.omega_r
            )));
        }
        Ok(())
    }

    /// Effective |ẽ⟩ → |g̃⟩ rate from the bath, `γ₊ cos⁴θ`.
    pub fn down_rate(&self) -> f64 {
        self.gamma_plus * self.theta.cos().powi(4)
    }

    /// Effective |g̃⟩ → |ẽ⟩ rate from the bath, `γ₋ sin⁴θ`.
    pub fn up_rate(&self) -> f64 {
        self.gamma_minus * self.theta.sin().powi(4)
    }
}

/// Photon frequencies `(lowering, raising)` sampled by the σ̃₋ and σ̃₊ channels.
///
/// Dressed de-excitation |ẽ⟩ → |g̃⟩ releases Ω_R into the emitted photon, so
/// σ̃₋ samples the upper sideband and σ̃₊ the lower one. Flip here to swap the
/// assignment everywhere.
pub fn sideband_frequencies(omega_d: f64, omega_r: f64) -> (f64, f64) {
    (omega_d + omega_r, omega_d - omega_r)
}

/// Samples `bath` at ω_d and ω_d ± Ω_R in the given frame.
pub fn rates_in_frame(
    omega_d: f64,
    frame: DressedFrame,
    bath: &(impl Bath + ?Sized),
    gamma_phi: f64,
) -> Result<RateSet> {
    let (f_lowering, f_raising) = sideband_frequencies(omega_d, frame.omega_r);
    let rates = RateSet {
        gamma_0: bath.rate_at(omega_d)?,
        gamma_plus: bath.rate_at(f_lowering)?,
        gamma_minus: bath.rate_at(f_raising)?,
        gamma_phi,
        theta: frame.theta,
        omega_r: frame.omega_r,
    };
    rates.validate()?;
    Ok(rates)
}

pub fn rate_set(drive: &DriveParams, bath: &(impl Bath + ?Sized), gamma_phi: f64) -> Result<RateSet> {
    rates_in_frame(drive.omega_d, dressed_frame(drive)?, bath, gamma_phi)
}

/// `γ₋ sin⁴θ − γ₊ cos⁴θ` at drive amplitude `rabi` and detuning `delta`, 1/μs.
pub fn detailed_balance_residual(
    rabi: f64,
    delta: f64,
    omega_q: f64,
    bath: &(impl Bath + ?Sized),
) -> Result<f64> {
    let drive = DriveParams::from_detuning(omega_q, delta, rabi);
    let rates = rate_set(&drive, bath, 0.0)?;
    Ok(rates.up_rate() - rates.down_rate())
}

/// Bisection bracket on the drive amplitude Ω/2π, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiBracket {
    pub lo: f64,
    pub hi: f64,
}

/// Largest acceptable `|γ₋ sin⁴θ − γ₊ cos⁴θ|` at a returned root, 1/μs.
pub const DETAILED_BALANCE_TOL: f64 = 1e-6;
const MAX_BISECTIONS: usize = 60;

/// Drive amplitude at which up and down dressed transitions balance.
///
/// Bisects the residual over the bracket, running all iterations (or until
/// the bracket stops shrinking) rather than stopping at the tolerance, so
/// the root sits as close to exact balance as f64 allows. Returns `None`
/// when the residual does not change sign over the bracket, and for Δ = 0
/// where θ is pinned at π/4 and the residual does not depend on Ω.
pub fn detailed_balance_rabi(
    delta: f64,
    omega_q: f64,
    bath: &(impl Bath + ?Sized),
    bracket: RabiBracket,
) -> Result<Option<f64>> {
    let RabiBracket { lo, hi } = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "Rabi bracket must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if delta == 0.0 {
        return Ok(None);
    }
    let f = |rabi: f64| detailed_balance_residual(rabi, delta, omega_q, bath);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 && a == 0.0 {
        // the undriven point balances trivially when both rates vanish there
        a = hi * 1e-9;
        fa = f(a)?;
        if fa == 0.0 {
            // both rates vanish on a whole interval: nothing to balance
            return Ok(None);
        }
    }
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fb == 0.0 {
        return Ok(Some(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 {
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    if best.1.abs() >= DETAILED_BALANCE_TOL {
        return Err(Error::Numerical(format!(
            "bisection ended with residual {:e} 1/us at Rabi {} Hz",
            best.1, best.0
        )));
    }
    Ok(Some(best.0))
}

/// Photon-rate weights of the three Mollow lines, 1/μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollowWeights {
    /// At ω_d − Ω_R (σ̃₊ channel).
    pub lower: f64,
    /// At ω_d (σ̃z channel).
    pub center: f64,
    /// At ω_d + Ω_R (σ̃₋ channel).
    pub upper: f64,
}

/// Line weights for a dressed-basis state `rho`.
pub fn mollow_weights(rates: &RateSet, rho: &DensityMatrix) -> MollowWeights {
    let (s, c) = rates.theta.sin_cos();
    let p_ground = rho.matrix()[(0, 0)].re;
    let p_excited = rho.matrix()[(1, 1)].re;
    MollowWeights {
        lower: rates.up_rate() * p_ground,
        center: rates.gamma_0 * s * s * c * c,
        upper: rates.down_rate() * p_excited,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dos::{FlatBath, PurcellBath, PurcellParams, SpectralDensity};
    use crate::lindblad::Basis;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    const WQ: f64 = 6.4766e9;

    fn drive(delta: f64, rabi: f64) -> DriveParams {
        DriveParams::from_detuning(WQ, delta, rabi)
    }

    #[test]
    fn resonant_frame() {
        let f = dressed_frame(&drive(0.0, 2e6)).unwrap();
        assert_abs_diff_eq!(f.theta, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(f.omega_r, 2e6, epsilon = 1e-9);
    }

    #[test]
    fn undriven_red_frame() {
        let f = dressed_frame(&drive(-5e6, 0.0)).unwrap();
        assert_eq!(f.theta, 0.0);
        assert_abs_diff_eq!(f.omega_r, 5e6, epsilon = 1e-9);
    }

    #[test]
    fn equal_drive_and_red_detuning() {
        let f = dressed_frame(&drive(-2e6, 2e6)).unwrap();
        assert_abs_diff_eq!(f.theta, FRAC_PI_8, epsilon = 1e-15);
        assert_abs_diff_eq!(f.omega_r, 2e6 * 2f64.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!((2.0 * f.theta).tan(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn undefined_frame() {
        let d = DriveParams {
            omega_d: WQ,
            omega_q: WQ,
            rabi: 0.0,
            phase: 0.0,
        };
        assert!(matches!(dressed_frame(&d), Err(Error::UndefinedFrame)));
        assert!(dressed_frame(&drive(1e6, -1.0)).is_err());
    }

    #[test]
    fn branch_is_monotone_and_continuous() {
        let rabi = 1e6;
        let mut prev: Option<f64> = None;
        for i in 0..=2000 {
            let delta = -50e6 + 50e3 * i as f64;
            let f = dressed_frame(&drive(delta, rabi)).unwrap();
            assert!(f.theta >= 0.0 && f.theta < std::f64::consts::FRAC_PI_2);
            let (s, c) = f.theta.sin_cos();
            assert_abs_diff_eq!(s * s + c * c, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(
                f.omega_r * f.omega_r,
                rabi * rabi + delta * delta,
                epsilon = 1e-12 * (rabi * rabi + delta * delta)
            );
            assert!(f.omega_r >= rabi && f.omega_r >= delta.abs());
            if let Some(p) = prev {
                assert!(f.theta > p, "not increasing at delta={delta}");
                assert!(f.theta - p < 0.03, "jump at delta={delta}");
            }
            prev = Some(f.theta);
        }
        assert!(dressed_frame(&drive(-1e12, rabi)).unwrap().theta < 1e-6);
        assert!(
            dressed_frame(&drive(1e12, rabi)).unwrap().theta > std::f64::consts::FRAC_PI_2 - 1e-6
        );
    }

    #[test]
    fn flat_bath_rates_are_equal() {
        let bath = FlatBath { rate: 0.8 };
        let r = rate_set(&drive(1.3e6, 2e6), &bath, 0.029).unwrap();
        assert_eq!(r.gamma_plus, r.gamma_minus);
        assert_eq!(r.gamma_plus, r.gamma_0);
        assert_eq!(r.gamma_phi, 0.029);
    }

    fn step_dos(edge: f64) -> SpectralDensity {
        let freqs: Vec<f64> = (0..=200).map(|i| edge - 100e6 + 1e6 * i as f64).collect();
        let rho = freqs.iter().map(|&f| if f > edge { 1.0 } else { 0.0 }).collect();
        SpectralDensity::from_samples(freqs, rho).unwrap()
    }

    fn params(gamma_d: f64) -> PurcellParams {
        PurcellParams {
            g: 200e6,
            kappa: 18e6,
            omega_c: 7.801e9,
            gamma_d,
        }
    }

    #[test]
    fn ideal_single_sideband() {
        let dos = step_dos(WQ);
        let p = params(0.02);
        let bath = PurcellBath { dos: &dos, params: p };
        let r = rate_set(&drive(0.0, 3e6), &bath, 0.0).unwrap();
        assert_eq!(r.gamma_minus, 0.02);
        let full = 0.02 + p.filtered_rate(WQ + 3e6).unwrap();
        assert_abs_diff_eq!(r.gamma_plus, full, epsilon = 1e-15);
    }

    #[test]
    fn sideband_assignment() {
        let (lowering, raising) = sideband_frequencies(10.0, 2.0);
        assert_eq!((lowering, raising), (12.0, 8.0));
    }

    #[test]
    fn rates_propagate_grid_errors() {
        let dos = step_dos(WQ);
        let bath = PurcellBath {
            dos: &dos,
            params: params(0.0),
        };
        assert!(matches!(
            rate_set(&drive(0.0, 200e6), &bath, 0.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn flat_bath_has_no_contour_off_resonance() {
        let bath = FlatBath { rate: 1.0 };
        let br = RabiBracket { lo: 0.0, hi: 5e6 };
        for delta in [-4e6, -1e6, -1e3, 1e3, 1e6, 4e6] {
            assert_eq!(detailed_balance_rabi(delta, WQ, &bath, br).unwrap(), None);
            for rabi in [0.0, 0.5e6, 2e6, 5e6] {
                let f = detailed_balance_residual(rabi, delta, WQ, &bath).unwrap();
                assert_eq!(f.signum(), delta.signum(), "rabi={rabi} delta={delta}");
            }
        }
        for rabi in [0.1e6, 1e6, 5e6] {
            let f = detailed_balance_residual(rabi, 0.0, WQ, &bath).unwrap();
            assert!(f.abs() < 1e-12, "{f}");
        }
    }

    #[test]
    fn step_bath_needs_background_decay() {
        // ρ = 0 below the drive: residual −γ₊cos⁴θ + γ_d sin⁴θ
        let dos = step_dos(WQ);
        let br = RabiBracket { lo: 0.0, hi: 5e6 };
        let bath = PurcellBath {
            dos: &dos,
            params: params(0.0),
        };
        for delta in [-2e6, 1e6, 3e6] {
            assert_eq!(detailed_balance_rabi(delta, WQ, &bath, br).unwrap(), None);
        }
        let bath = PurcellBath {
            dos: &dos,
            params: params(0.05),
        };
        let root = detailed_balance_rabi(1e6, WQ, &bath, br).unwrap();
        let root = root.expect("background decay opens a balance point");
        let f = detailed_balance_residual(root, 1e6, WQ, &bath).unwrap();
        assert!(f.abs() < DETAILED_BALANCE_TOL);
    }

    #[test]
    fn bracket_validation() {
        let bath = FlatBath { rate: 1.0 };
        assert!(detailed_balance_rabi(1e6, WQ, &bath, RabiBracket { lo: 2.0, hi: 1.0 }).is_err());
        assert!(detailed_balance_rabi(1e6, WQ, &bath, RabiBracket { lo: -1.0, hi: 1.0 }).is_err());
        let dos = step_dos(WQ);
        let bath = PurcellBath {
            dos: &dos,
            params: params(0.0),
        };
        let wide = RabiBracket { lo: 0.0, hi: 500e6 };
        assert!(matches!(
            detailed_balance_rabi(1e6, WQ, &bath, wide),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn mollow_symmetric_triplet() {
        let bath = FlatBath { rate: 1.0 };
        let r = rate_set(&drive(0.0, 2e6), &bath, 0.0).unwrap();
        let w = mollow_weights(&r, &DensityMatrix::maximally_mixed(Basis::Dressed));
        assert_abs_diff_eq!(w.lower, w.upper, epsilon = 1e-15);
        assert_abs_diff_eq!(w.center, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn mollow_undriven_ground() {
        let bath = FlatBath { rate: 1.0 };
        let r = rate_set(&drive(-3e6, 0.0), &bath, 0.0).unwrap();
        let w = mollow_weights(&r, &DensityMatrix::ground(Basis::Dressed));
        assert_eq!((w.lower, w.center, w.upper), (0.0, 0.0, 0.0));
    }
}
