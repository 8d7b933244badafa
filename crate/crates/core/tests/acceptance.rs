//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcbath_core::config::ExperimentConfig;
use pcbath_core::dos::{purcell_rate, PurcellParams, SpectralDensity};
use pcbath_core::dressed::{detailed_balance_residual, RateSet, DETAILED_BALANCE_TOL};
use pcbath_core::experiment::{
    balance_contour, compute_spectrum, point_rates, solve_point, steady_state_map, SweepBath,
};
use pcbath_core::lindblad::{
    build_liouvillian, embed_left, embed_right, propagate, steady_state, Basis, BlochVector, DensityMatrix,
    Propagator,
};
use pcbath_core::network::find_stop_band;
use pcbath_core::tomography::{calibrate, measure_state, ReadoutModel};
use pcbath_core::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(extra, Path::new("acceptance.toml"), Path::new(".")).expect("config")
}

fn stop_band() -> Result<Outcome> {
    let cfg = config("");
    let start = Instant::now();
    let spec = compute_spectrum(&cfg)?;
    let band = find_stop_band(&spec, cfg.passband())?;
    let elapsed = start.elapsed().as_secs_f64();
    let Some(b) = band else {
        return outcome(false, "no stop band found".into());
    };
    let wq = cfg.qubit.omega_q_hz;
    let edge_dist = (wq - b.lower_edge_hz).abs().min((wq - b.upper_edge_hz).abs());
    outcome(
        b.depth_db <= -20.0 && edge_dist < 500e6 && elapsed < 5.0,
        format!(
            "band {:.4}-{:.4} GHz, depth {:.1} dB, qubit {:.1} MHz from edge, {:.2} s",
            b.lower_edge_hz * 1e-9,
            b.upper_edge_hz * 1e-9,
            b.depth_db,
            edge_dist * 1e-6,
            elapsed
        ),
    )
}

fn unitarity() -> Result<Outcome> {
    let spec = compute_spectrum(&config(""))?;
    let err = spec.max_unitarity_error();
    outcome(err < 1e-10, format!("max ||s11|^2 + |s21|^2 - 1| = {err:.2e} over {} points", spec.len()))
}

fn purcell_value() -> Result<Outcome> {
    // (g/Δq)² κ with frequencies in MHz gives 1/μs directly
    let hand = (200.0f64 / (7801.0 - 6476.6)).powi(2) * 2.0 * PI * 18.0;
    let grid: Vec<f64> = (0..=100).map(|i| 6.4e9 + 2e6 * i as f64).collect();
    let dos = SpectralDensity::flat(grid, 1.0)?;
    let p = PurcellParams {
        g: 200e6,
        kappa: 18e6,
        omega_c: 7.801e9,
        gamma_d: 0.0,
    };
    let got = purcell_rate(&dos, 6.4766e9, &p)?;
    let rel = (got - hand).abs() / hand;
    outcome(rel < 1e-3, format!("gamma1 = {got:.6} 1/us, hand value {hand:.6}, rel err {rel:.1e}"))
}

fn superoperator_oracle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = Matrix2::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = Matrix2::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let v = nalgebra::Vector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]);
        let unvec = |w: nalgebra::Vector4<Complex64>| Matrix2::new(w[0], w[2], w[1], w[3]);
        worst = worst
            .max((unvec(embed_left(&a) * v) - a * m).norm())
            .max((unvec(embed_right(&a) * v) - m * a).norm());
    }
    let gamma = 1.7;
    let rates = RateSet {
        gamma_0: 0.0,
        gamma_plus: gamma,
        gamma_minus: 0.0,
        gamma_phi: 0.0,
        theta: 0.0,
        omega_r: 0.0,
    };
    let l = build_liouvillian(&rates)?;
    let excited = DensityMatrix::excited(Basis::Dressed);
    let mut decay_err: f64 = 0.0;
    for i in 0..=50 {
        let t = 10.0 / gamma * i as f64 / 50.0;
        let rho = propagate(&l, &excited, t)?;
        decay_err = decay_err.max((rho.matrix()[(1, 1)].re - (-gamma * t).exp()).abs());
    }
    outcome(
        worst < 1e-12 && decay_err < 1e-9,
        format!("embedding error {worst:.1e}, amplitude-damping error {decay_err:.1e}"),
    )
}

fn effective_rates(r: &RateSet) -> [f64; 4] {
    let (s, c) = r.theta.sin_cos();
    [r.down_rate(), r.up_rate(), r.gamma_0 * s * s * c * c, r.gamma_phi]
}

fn steady_vs_propagation() -> Result<Outcome> {
    // Draws until 20 sets have every nonzero dissipator rate above 0.5/μs.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    let mut drawn = 0;
    while accepted < 20 && drawn < 100_000 {
        drawn += 1;
        let r = RateSet {
            gamma_0: rng.random_range(0.5..5.0),
            gamma_plus: rng.random_range(0.5..5.0),
            gamma_minus: rng.random_range(0.5..5.0),
            gamma_phi: rng.random_range(0.5..5.0),
            theta: rng.random_range(0.0..FRAC_PI_2),
            omega_r: rng.random_range(0.0..5e6),
        };
        let min_rate = effective_rates(&r).into_iter().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        if min_rate <= 0.5 {
            continue;
        }
        accepted += 1;
        let l = build_liouvillian(&r)?;
        let rho0 = DensityMatrix::ground(Basis::Bare).to_dressed(r.theta);
        let late = propagate(&l, &rho0, 15.95)?;
        worst = worst.max(late.frobenius_distance(&steady_state(&l)?));
    }
    outcome(
        accepted == 20 && worst < 1e-4,
        format!("{accepted} rate sets ({drawn} drawn), max ||rho(15.95 us) - rho_ss||_F = {worst:.1e}"),
    )
}

fn contour_identity() -> Result<Outcome> {
    let mut roots = 0;
    let mut worst: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    // operating point, and the steep stop-band edge where the sidebands differ strongly
    for extra in ["", "qubit.omega_q_hz = 6.34e9\n"] {
        let cfg = config(extra);
        let bath = SweepBath::from_config(&cfg, false)?;
        for row in balance_contour(&cfg, &bath)? {
            let Some(w) = row.omega_star_hz else { continue };
            roots += 1;
            let p = solve_point(&cfg, &bath, w, row.delta_hz)?;
            let mixed = DensityMatrix::maximally_mixed(Basis::Dressed);
            worst = worst.max(p.rho.frobenius_distance(&mixed));
            let f = detailed_balance_residual(w, row.delta_hz, cfg.qubit.omega_q_hz, &bath)?;
            worst_residual = worst_residual.max(f.abs());
        }
    }
    outcome(
        roots > 0 && worst < 1e-8 && worst_residual < DETAILED_BALANCE_TOL,
        format!("{roots} contour points, max ||rho_ss - I/2||_F = {worst:.1e}, max residual {worst_residual:.1e} 1/us"),
    )
}

fn flat_symmetry() -> Result<Outcome> {
    let cfg = config("tomography.enabled = false\n");
    let bath = SweepBath::from_config(&cfg, true)?;
    let rows = steady_state_map(&cfg, &bath)?;
    let nd = cfg.drive.delta_steps;
    let mut worst: f64 = 0.0;
    for (k, r) in rows.iter().enumerate() {
        let mirror = &rows[k - k % nd + (nd - 1 - k % nd)];
        assert_eq!(mirror.delta_hz, -r.delta_hz);
        let (a, b) = (r.ideal.expect("solved"), mirror.ideal.expect("solved"));
        worst = worst.max((a.x + b.x).abs());
    }
    let strong = solve_point(&cfg, &bath, 50e6, 0.0)?;
    let dist = strong.rho.frobenius_distance(&DensityMatrix::maximally_mixed(Basis::Dressed));
    outcome(
        worst < 1e-8 && dist < 1e-3,
        format!("max |X(W,D) + X(W,-D)| = {worst:.1e} over {} points, strong resonant drive ||rho - I/2||_F = {dist:.1e}", rows.len()),
    )
}

fn band_edge_coherence() -> Result<Outcome> {
    let cfg = config("");
    let bath = SweepBath::from_config(&cfg, false)?;
    let SweepBath::Crystal { dos, .. } = &bath else {
        unreachable!()
    };
    let wq = cfg.qubit.omega_q_hz;
    let mut prev_x = 0.0;
    let mut prev_ratio = 1.0;
    let mut ok = true;
    let mut lines = Vec::new();
    for i in 1..=10 {
        let w = 0.5e6 * i as f64;
        let p = solve_point(&cfg, &bath, w, 0.0)?;
        let ratio = dos.at(wq + p.rates.omega_r)? / dos.at(wq - p.rates.omega_r)?;
        let x = p.bloch.x.abs();
        // coherence and sideband contrast must grow together
        ok &= x > prev_x && (ratio - 1.0).abs() > (prev_ratio - 1.0f64).abs();
        prev_x = x;
        prev_ratio = ratio;
        lines.push(format!("{:.1}:{:.2e}/{:.5}", w * 1e-6, x, ratio));
    }
    outcome(ok, format!("Omega MHz: |X| / rho ratio = {}", lines.join(" ")))
}

fn xz_plane() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (extra, flat) in [
        ("tomography.enabled = false\n", false),
        ("tomography.enabled = false\n", true),
        ("tomography.enabled = false\nqubit.omega_q_hz = 6.34e9\n", false),
    ] {
        let cfg = config(extra);
        let bath = SweepBath::from_config(&cfg, flat)?;
        for r in steady_state_map(&cfg, &bath)? {
            worst = worst.max(r.ideal.expect("solved").y.abs());
            n += 1;
        }
    }
    outcome(worst < 1e-9, format!("max |Y| = {worst:.1e} over {n} steady states"))
}

fn tomography_round_trip() -> Result<Outcome> {
    let truth = BlochVector::new(0.3, -0.2, 0.5);
    let rho = DensityMatrix::from_bloch(truth, Basis::Bare);
    let n = 100;
    let mut scale_sum = 0.0;
    let mut samples = vec![Vec::with_capacity(n); 3];
    for seed in 0..n as u64 {
        let model = ReadoutModel::new(0.8, 2000, seed)?;
        let scales = calibrate(&model)?;
        scale_sum += scales.iter().sum::<f64>();
        let rec = measure_state(&rho, &model, scales)?;
        for (k, v) in rec.corrected().as_array().into_iter().enumerate() {
            samples[k].push(v);
        }
    }
    let scale_mean = scale_sum / (3 * n) as f64;
    let mut ok = (scale_mean - 0.6).abs() < 0.02;
    let mut parts = Vec::new();
    for (k, t) in truth.as_array().into_iter().enumerate() {
        let mean = samples[k].iter().sum::<f64>() / n as f64;
        let var = samples[k].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let z = (mean - t) / se;
        ok &= z.abs() < 3.0;
        parts.push(format!("{}: {mean:.4} vs {t} ({z:+.2} SE)", ['x', 'y', 'z'][k]));
    }
    outcome(ok, format!("mean scale {scale_mean:.4}; {}", parts.join(", ")))
}

fn performance() -> Result<Outcome> {
    let cfg = config("tomography.enabled = false\ndrive.rabi_steps = 100\ndrive.delta_steps = 100\n");
    let bath = SweepBath::from_config(&cfg, false)?;
    let start = Instant::now();
    let rows = steady_state_map(&cfg, &bath)?;
    let elapsed = start.elapsed().as_secs_f64();
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    // touch the propagator path too so a regression there shows up here
    let rates = point_rates(&cfg, &bath, 2e6, 1e6)?;
    Propagator::new(&build_liouvillian(&rates)?)?;
    outcome(
        rows.len() == 10_000 && failed == 0 && elapsed < 10.0,
        format!("{} points, {failed} failed, {elapsed:.2} s", rows.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("stop band between the pass bands near the qubit", stop_band),
        ("lossless unitarity", unitarity),
        ("Purcell rate at rho = 1", purcell_value),
        ("superoperator embedding and amplitude damping", superoperator_oracle),
        ("steady state vs long propagation", steady_vs_propagation),
        ("identity steady state on the balance contour", contour_identity),
        ("flat-bath mirror symmetry", flat_symmetry),
        ("band-edge resonant coherence", band_edge_coherence),
        ("steady states in the X-Z plane", xz_plane),
        ("tomography calibration and unbiasedness", tomography_round_trip),
        ("100x100 sweep runtime", performance),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
