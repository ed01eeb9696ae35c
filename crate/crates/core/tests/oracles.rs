//! Sensor-method results against independent formulations.

use mollow_core::liouville::{steady_state, trace_product, unvectorize, vectorize};
use mollow_core::mollow::{bare_liouvillian, bloch_steady_state, unfiltered_g2, EmitterParams};
use mollow_core::numerics::{lu_solve, CMatrix, C64};
use mollow_core::sensing::filtered_spectrum;

/// `S(ω) = (1/π) Re Tr[σ (s − L)⁻¹ (ρσ†)]` with `s = Γ/2 − iω`, i.e. the
/// Lorentzian-weighted Fourier transform of `⟨σ†(0)σ(τ)⟩` done by a resolvent.
fn resolvent_spectrum(p: &EmitterParams, linewidth: f64, omega: f64) -> f64 {
    let l = bare_liouvillian(p).unwrap();
    let rho = steady_state(&l).unwrap();
    let sigma = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let start = vectorize(&rho.matrix().matmul(&sigma.adjoint()));
    let s = C64::new(linewidth / 2.0, -omega);
    let mut a = l.matrix().scale(C64::new(-1.0, 0.0));
    a.add_scaled(s, &CMatrix::identity(4));
    let x = lu_solve(&a, &start).unwrap();
    trace_product(&sigma, &unvectorize(&x, 2)).re / std::f64::consts::PI
}

#[test]
fn filtered_spectrum_matches_resolvent() {
    for (omega, detuning, linewidth) in [(87.0, 0.0, 5.0f64), (3.0, 2.0, 1.0), (0.3, 0.0, 2.0), (10.0, -15.0, 4.0)] {
        let p = EmitterParams::with_drive(omega, detuning).unwrap();
        let grid: Vec<f64> = (0..41).map(|k| -250.0 + 12.5 * k as f64).collect();
        let eps = 1e-3 * linewidth.min(1.0);
        let sensed = filtered_spectrum(&p, linewidth, &grid, eps).unwrap();
        let exact: Vec<f64> = grid.iter().map(|&w| resolvent_spectrum(&p, linewidth, w)).collect();
        let peak = exact.iter().copied().fold(0.0, f64::max);
        for ((w, a), b) in grid.iter().zip(&sensed).zip(&exact) {
            assert!((a - b).abs() <= 1e-4 * peak + 1e-6 * b.abs(), "Ω={omega} ω={w}: {a} vs {b}");
        }
    }
}

#[test]
fn spectrum_integrates_to_emitted_intensity() {
    // ∫ S dω = ⟨σ†σ⟩ for any filter width
    let p = EmitterParams::with_drive(2.0, 1.0).unwrap();
    let (n, _) = bloch_steady_state(&p);
    let h = 0.05;
    let total: f64 = (-40000..=40000).map(|k| resolvent_spectrum(&p, 1.0, k as f64 * h)).sum::<f64>() * h;
    // tails fall off as 1/ω², which bounds the truncated weight by ~1e-3 of n
    assert!((total - n).abs() < 2e-3 * n, "{total} vs {n}");
}

/// Optical Bloch equations for `s = ⟨σ⟩`, `n = ⟨σ†σ⟩` under
/// `H = ω_σσ†σ + Ω(σ + σ†)` and decay `γ`.
fn bloch_rhs(p: &EmitterParams, s: C64, n: f64) -> (C64, f64) {
    let i = C64::new(0.0, 1.0);
    let ds = -(p.gamma_sigma / 2.0 + i * p.detuning) * s - i * p.omega_drive * (1.0 - 2.0 * n);
    let dn = -p.gamma_sigma * n - 2.0 * p.omega_drive * s.im;
    (ds, dn)
}

/// `g⁽²⁾(τ) = n(τ)/n_ss` with the emitter restarted in the ground state,
/// integrated by classical fixed-step Runge–Kutta.
fn rk4_g2(p: &EmitterParams, taus: &[f64], dt: f64) -> Vec<f64> {
    let (n_ss, _) = bloch_steady_state(p);
    let (mut s, mut n, mut t) = (C64::new(0.0, 0.0), 0.0, 0.0);
    let mut out = Vec::new();
    for &target in taus {
        while t < target - 1e-12 {
            let h = dt.min(target - t);
            let (k1s, k1n) = bloch_rhs(p, s, n);
            let (k2s, k2n) = bloch_rhs(p, s + k1s * (h / 2.0), n + k1n * h / 2.0);
            let (k3s, k3n) = bloch_rhs(p, s + k2s * (h / 2.0), n + k2n * h / 2.0);
            let (k4s, k4n) = bloch_rhs(p, s + k3s * h, n + k3n * h);
            s += (k1s + 2.0 * k2s + 2.0 * k3s + k4s) * (h / 6.0);
            n += (k1n + 2.0 * k2n + 2.0 * k3n + k4n) * h / 6.0;
            t += h;
        }
        out.push(n / n_ss);
    }
    out
}

#[test]
fn unfiltered_g2_matches_bloch_integration() {
    for (omega, detuning) in [(0.5, 0.0), (3.0, 1.5), (10.0, 0.0), (2.0, -4.0)] {
        let p = EmitterParams::with_drive(omega, detuning).unwrap();
        let taus: Vec<f64> = (0..20).map(|k| 0.25 * k as f64).collect();
        let ours = unfiltered_g2(&p, &taus).unwrap();
        let reference = rk4_g2(&p, &taus, 2e-4);
        for ((t, a), b) in taus.iter().zip(&ours).zip(&reference) {
            assert!((a - b).abs() <= 1e-6, "Ω={omega} ω_σ={detuning} τ={t}: {a} vs {b}");
        }
    }
}

#[test]
fn weak_drive_antibunching_closed_form() {
    // resonant, Ω ≪ γ: g⁽²⁾(τ) → (1 − e^{−γτ/2})²
    let p = EmitterParams::with_drive(1e-3, 0.0).unwrap();
    let taus = [0.0, 0.5, 1.0, 2.0, 6.0];
    let g = unfiltered_g2(&p, &taus).unwrap();
    for (t, v) in taus.iter().zip(g) {
        let expected = (1.0 - (-t / 2.0f64).exp()).powi(2);
        assert!((v - expected).abs() < 1e-4, "τ={t}: {v} vs {expected}");
    }
}
