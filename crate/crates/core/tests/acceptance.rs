//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mollow_core::liouville::steady_state;
use mollow_core::mollow::{bare_liouvillian, dressed_splitting, secular_sideband_g2, unfiltered_g2, EmitterParams, SidebandOrder};
use mollow_core::sensing::{filtered_spectrum, BundleCorrelator, SensorSpec, CONVERGENCE_TOL};
use mollow_core::sweep::{
    leapfrog_lines, run_frequency_landscape, run_tau_trace, run_time_frequency_map, Axis, GridSpec, Scenario, SweepOptions,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

type Check = fn() -> Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Detuned landscape emitter: `Ω₊ = 300`, `ω_σ = 200`.
fn fig3_emitter() -> EmitterParams {
    EmitterParams::from_splitting(300.0, 200.0).unwrap()
}

/// Resonant strong-drive emitter: `Ω = 87` at resonance.
fn fig4_emitter() -> EmitterParams {
    EmitterParams::with_drive(87.0, 0.0).unwrap()
}

fn pair(linewidth: f64, photons: u32, w1: f64, w2: f64) -> [SensorSpec; 2] {
    let s = SensorSpec::new(0.0, linewidth, photons, 0.0);
    [s.with_frequency(w1), s.with_frequency(w2)]
}

fn local_extrema(v: &[f64]) -> Vec<usize> {
    // steps smaller than this are treated as flat
    let flat = 1e-12 * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut out = Vec::new();
    let mut last_sign = 0i8;
    for k in 1..v.len() {
        let d = v[k] - v[k - 1];
        let sign = if d > flat { 1 } else if d < -flat { -1 } else { 0 };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                out.push(k - 1);
            }
            last_sign = sign;
        }
    }
    out
}

fn local_maxima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1)).filter(|&k| v[k] > v[k - 1] && v[k] > v[k + 1]).collect()
}

fn c1_bloch_steady_state() -> Result<Outcome, String> {
    let mut worst = 0.0f64;
    for omega in [0.5, 1.0, 5.0, 87.0] {
        for detuning in [0.0, 1.0, 200.0] {
            let p = EmitterParams::with_drive(omega, detuning).map_err(err)?;
            let rho = steady_state(&bare_liouvillian(&p).map_err(err)?).map_err(err)?;
            let ree = rho.matrix()[(1, 1)].re;
            let exact = omega * omega / (detuning * detuning + 0.25 + 2.0 * omega * omega);
            worst = worst.max((ree - exact).abs());
        }
    }
    Ok(outcome(worst <= 1e-10, format!("max |Δρ_ee| = {worst:.2e} (tol 1e-10) over 12 (Ω, ω_σ) pairs")))
}

fn c2_unfiltered_g2() -> Result<Outcome, String> {
    let p = fig4_emitter();
    let ends = unfiltered_g2(&p, &[0.0, 50.0]).map_err(err)?;
    let h = 2e-4;
    let taus: Vec<f64> = (0..=3000).map(|k| k as f64 * h).collect();
    let g = unfiltered_g2(&p, &taus).map_err(err)?;
    // parabolic refinement of each sampled maximum
    let peaks: Vec<f64> = local_maxima(&g)
        .into_iter()
        .map(|k| {
            let (a, b, c) = (g[k - 1], g[k], g[k + 1]);
            taus[k] + 0.5 * h * (a - c) / (a - 2.0 * b + c)
        })
        .collect();
    if peaks.len() < 3 {
        return Ok(outcome(false, format!("only {} oscillation maxima found", peaks.len())));
    }
    let spacing = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
    let expected = 2.0 * std::f64::consts::PI / dressed_splitting(&p).splitting;
    let rel = (spacing / expected - 1.0).abs();
    let ok = ends[0] <= 1e-10 && (ends[1] - 1.0).abs() <= 1e-6 && rel <= 0.02;
    Ok(outcome(
        ok,
        format!(
            "g(0) = {:.1e} (≤ 1e-10), |g(50) − 1| = {:.1e} (≤ 1e-6), spacing {spacing:.5} vs 2π/Ω₊ = {expected:.5} ({:.2}% ≤ 2%)",
            ends[0],
            (ends[1] - 1.0).abs(),
            100.0 * rel
        ),
    ))
}

fn c3_large_linewidth_limit() -> Result<Outcome, String> {
    let taus: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
    let mut worst = 0.0f64;
    for omega in [0.5, 1.0, 3.0] {
        let p = EmitterParams::with_drive(omega, 0.0).map_err(err)?;
        let exact = unfiltered_g2(&p, &taus).map_err(err)?;
        let corr = BundleCorrelator::new(&p, pair(1e3, 1, 0.0, 0.0), None).map_err(err)?;
        let sensed = corr.tau_resolved(0.0, 0.0, &taus).map_err(err)?;
        for (s, e) in sensed.iter().zip(&exact) {
            // relative to the uncorrelated level where g < 1, so the g(0) = 0 point is meaningful
            worst = worst.max((s.value - e).abs() / e.max(1.0));
        }
    }
    Ok(outcome(worst <= 0.05, format!("max deviation {:.3}% (tol 5%) for Ω ∈ {{0.5, 1, 3}}, τ ∈ [0, 5]", 100.0 * worst)))
}

fn c4_mollow_triplet() -> Result<Outcome, String> {
    let p = fig4_emitter();
    let omegas: Vec<f64> = (0..201).map(|k| -300.0 + 3.0 * k as f64).collect();
    // min(γ_σ, Γ)/100
    let eps = 0.01;
    let s = filtered_spectrum(&p, 5.0, &omegas, eps).map_err(err)?;
    let peaks: Vec<f64> = local_maxima(&s).into_iter().map(|k| omegas[k]).collect();
    let targets = [-174.0, 0.0, 174.0];
    let placed = peaks.len() == 3 && peaks.iter().zip(targets).all(|(w, t)| (w - t).abs() <= 5.0);
    let asym = (0..omegas.len()).map(|k| (s[k] - s[omegas.len() - 1 - k]).abs() / s[k]).fold(0.0, f64::max);
    Ok(outcome(placed && asym <= 0.01, format!("maxima at {peaks:?} (want 3 within ±5 of ±174, 0), mirror asymmetry {:.1e} (≤ 1%)", asym)))
}

fn c5_epsilon_invariance() -> Result<Outcome, String> {
    let p = fig3_emitter();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    let mut lines = Vec::new();
    for (photons, count) in [(1u32, 5usize), (2, 3)] {
        let corr = BundleCorrelator::new(&p, pair(5.0, photons, 0.0, 0.0), None).map_err(err)?;
        for _ in 0..count {
            let (w1, w2) = (rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0));
            let r = corr.zero_delay(w1, w2).map_err(err)?;
            worst = worst.max(r.convergence);
            lines.push(format!("N={photons} ({w1:.0},{w2:.0}) {:.1e}", r.convergence));
        }
    }
    Ok(outcome(worst < CONVERGENCE_TOL, format!("max |g(ε) − g(ε/2)|/g = {worst:.2e} (< 5e-3); {}", lines.join(", "))))
}

fn c6_swap_symmetry() -> Result<Outcome, String> {
    let p = fig3_emitter();
    let g1 = GridSpec::new(Axis::Omega1, -400.0, 400.0, 11).map_err(err)?;
    let g2 = GridSpec { axis: Axis::Omega2, ..g1 };
    let mut ok = true;
    let mut parts = Vec::new();
    for photons in [1, 2] {
        let sc = Scenario::new(p, pair(5.0, photons, 0.0, 0.0), None);
        let r = run_frequency_landscape(&sc, &g1, &g2, &SweepOptions::default()).map_err(err)?;
        let (mut abs, mut rel, mut min_value, mut max_value) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
        for i in 0..11 {
            for j in 0..11 {
                let (a, b) = (r.at(&[i, j]), r.at(&[j, i]));
                abs = abs.max((a - b).abs());
                rel = rel.max((a - b).abs() / a.abs().max(1.0));
                min_value = min_value.min(a);
                max_value = max_value.max(a);
            }
        }
        // single photons carry the absolute bound; bundle values reach ~1e6 so they are held to it relatively
        let defect = if photons == 1 { abs } else { rel };
        ok &= defect <= 1e-8 && min_value >= 0.0;
        parts.push(format!(
            "N={photons}: {} swap defect {defect:.1e} (≤ 1e-8), values in [{min_value:.3e}, {max_value:.3e}]",
            if photons == 1 { "absolute" } else { "relative" }
        ));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn c7_leapfrog_structure() -> Result<Outcome, String> {
    let p = fig3_emitter();
    let linewidth = 5.0;
    let dressed = dressed_splitting(&p);
    let peaks = [-dressed.splitting, 0.0, dressed.splitting];
    let lines = leapfrog_lines(1, 1, &dressed);
    // "far" means ten filter linewidths
    let far = 10.0 * linewidth;
    let off_peaks = |w1: f64, w2: f64| peaks.iter().all(|&pk| (w1 - pk).abs() >= far && (w2 - pk).abs() >= far);
    let sc = Scenario::new(p, pair(linewidth, 1, 0.0, 0.0), None);

    let corr = BundleCorrelator::new(&p, sc.sensors, None).map_err(err)?;
    let mut on_line = Vec::new();
    for l in &lines {
        for k in 0..=40 {
            let w1 = -400.0 + 20.0 * k as f64;
            let w2 = l.omega2_at(w1);
            if w2.abs() <= 400.0 && off_peaks(w1, w2) {
                on_line.push((w1, w2, corr.zero_delay(w1, w2).map_err(err)?.value));
            }
        }
    }
    let line_min = on_line.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
    let lines_ok = !on_line.is_empty() && line_min > 1.0;

    let start = Instant::now();
    let g = GridSpec::new(Axis::Omega1, -400.0, 400.0, 51).map_err(err)?;
    let land = run_frequency_landscape(&sc, &g, &GridSpec { axis: Axis::Omega2, ..g }, &SweepOptions::default()).map_err(err)?;
    let elapsed = start.elapsed();
    let mut background = Vec::new();
    for (c, v) in land.coordinates().iter().zip(&land.values) {
        let (w1, w2) = (c[0], c[1]);
        if off_peaks(w1, w2) && lines.iter().all(|l| l.distance(w1, w2) >= far) {
            background.push((w1, w2, *v));
        }
    }
    let quiet = background.iter().filter(|b| (b.2 - 1.0).abs() < 0.1).count();
    let worst = background.iter().fold((0.0, 0.0, 1.0), |acc, b| if (b.2 - 1.0f64).abs() > (acc.2 - 1.0f64).abs() { *b } else { acc });
    let background_ok = !background.is_empty() && quiet == background.len();
    // diagnostic only: the equal-frequency diagonal is a separate feature not among the annotated lines
    let off_diag: Vec<_> = background.iter().filter(|b| (b.0 - b.1).abs() >= far * std::f64::consts::SQRT_2).collect();
    let off_diag_quiet = off_diag.iter().filter(|b| (b.2 - 1.0).abs() < 0.1).count();
    let mut dev: Vec<f64> = background.iter().map(|b| (b.2 - 1.0).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let median = dev.get(dev.len() / 2).copied().unwrap_or(f64::NAN);
    let time_ok = elapsed < Duration::from_secs(300);
    Ok(outcome(
        lines_ok && background_ok && time_ok && land.unconverged_count() == 0,
        format!(
            "line samples: {} points, min g = {line_min:.3} (> 1); background: {quiet}/{} points with |g − 1| < 0.1 \
             (worst g({:.0},{:.0}) = {:.3}, median |g − 1| = {median:.2}; \
             also off the ω₁ = ω₂ diagonal: {off_diag_quiet}/{}); 51×51 landscape {:.1} s (< 300 s), {} unconverged",
            on_line.len(),
            background.len(),
            worst.0,
            worst.1,
            worst.2,
            off_diag.len(),
            elapsed.as_secs_f64(),
            land.unconverged_count()
        ),
    ))
}

fn c8_bundle_heralding() -> Result<Outcome, String> {
    let p = fig3_emitter();
    let split = dressed_splitting(&p).splitting;
    let tau = GridSpec::new(Axis::Tau, 0.0, 50.0, 1001).map_err(err)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=3u32 {
        let w = split / f64::from(n);
        let sc = Scenario::new(p, pair(40.0, n, -w, w), None);
        let r = run_tau_trace(&sc, &tau, &SweepOptions::default()).map_err(err)?;
        let (kmax, gmax) = r.values.iter().enumerate().skip(1).fold((0, 0.0), |a, (k, &v)| if v > a.1 { (k, v) } else { a });
        let tail = *r.values.last().unwrap();
        let good = gmax > 1.0 && (tail - 1.0).abs() <= 1e-3 && r.unconverged_count() == 0;
        ok &= good;
        parts.push(format!(
            "N={n}: max {gmax:.2} at τ={:.2}, g(50) − 1 = {:.1e}, ε = {:.3e}, {} unconverged",
            tau.value(kmax),
            tail - 1.0,
            r.meta[0].epsilon,
            r.unconverged_count()
        ));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn c9_approximation_contrast() -> Result<Outcome, String> {
    let linewidth = 10.0;
    let taus: Vec<f64> = (0..=1000).map(|k| 0.005 * k as f64).collect();
    let mut approx = Vec::new();
    let mut exact = Vec::new();
    for omega in [5.0, 10.0, 20.0] {
        let p = EmitterParams::with_drive(omega, 0.0).map_err(err)?;
        let w = dressed_splitting(&p).splitting;
        approx.push(secular_sideband_g2(&p, linewidth, SidebandOrder::LowThenHigh, &taus).map_err(err)?);
        let corr = BundleCorrelator::new(&p, pair(linewidth, 1, -w, w), None).map_err(err)?;
        exact.push(corr.tau_resolved(-w, w, &taus).map_err(err)?.into_iter().map(|r| r.value).collect::<Vec<f64>>());
    }
    let approx_spread = approx[1..]
        .iter()
        .flat_map(|a| a.iter().zip(&approx[0]).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let exact_spread = exact[0].iter().zip(&exact[2]).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
    let maxima: Vec<(f64, f64)> = approx
        .iter()
        .zip(&exact)
        .map(|(a, e)| (a.iter().copied().fold(0.0, f64::max), e.iter().copied().fold(0.0, f64::max)))
        .collect();
    let overestimates = maxima.iter().all(|(a, e)| a >= e);
    let extra = local_extrema(&exact[0]).len() as i64 - local_extrema(&approx[0]).len() as i64;
    let ok = approx_spread <= 1e-12 && exact_spread > 0.01 && overestimates && extra >= 2;
    Ok(outcome(
        ok,
        format!(
            "approximation spread {approx_spread:.1e} (≤ 1e-12); exact Ω=5 vs 20 differ by {:.1}% (> 1%); \
             maxima approx/exact {}; Ω=5 exact has {extra} more extrema (≥ 2)",
            100.0 * exact_spread,
            maxima.iter().map(|(a, e)| format!("{a:.3}/{e:.3}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn c10_time_frequency_consistency() -> Result<Outcome, String> {
    let p = fig4_emitter();
    let split = dressed_splitting(&p).splitting;
    let w2 = split / 2.0;
    let sc = Scenario::new(p, pair(5.0, 1, 0.0, 0.0), None);
    let g1 = GridSpec::new(Axis::Omega1, -300.0, 300.0, 41).map_err(err)?;
    let tau = GridSpec::new(Axis::Tau, 0.0, 2.0, 11).map_err(err)?;
    let opts = SweepOptions::default();
    let map = run_time_frequency_map(&sc, w2, &g1, &tau, &opts).map_err(err)?;
    let line = GridSpec::new(Axis::Omega2, w2, w2 + 1.0, 2).map_err(err)?;
    let land = run_frequency_landscape(&sc, &g1, &line, &opts).map_err(err)?;
    let worst = (0..g1.points).map(|i| (map.at(&[i, 0]) - land.at(&[i, 0])).abs()).fold(0.0, f64::max);
    Ok(outcome(worst <= 1e-9, format!("max |Δg| on the τ = 0 row = {worst:.1e} (≤ 1e-9) over {} shared points at ω₂ = {w2}", g1.points)))
}

fn c11_end_to_end_determinism() -> Result<Outcome, String> {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut bytes = Vec::new();
    for (name, workers) in [("one", "1"), ("four", "4")] {
        let cfg = format!(
            r#"{{"emitter": {{"gamma": 1.0, "omega": 111.8034, "detuning": 200}},
                "sensors": [{{"frequency": 0, "linewidth": 5.0, "photons": 1}}, {{"frequency": 0, "linewidth": 5.0, "photons": 1}}],
                "epsilon": null,
                "task": {{"type": "landscape", "omega1": {{"min": -400, "max": 400, "points": 101}},
                         "omega2": {{"min": -400, "max": 400, "points": 101}}}},
                "output": {:?}}}"#,
            dir.path().join(name).display().to_string()
        );
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, cfg).map_err(err)?;
        let out = Command::new(env!("CARGO_BIN_EXE_mollow"))
            .args(["landscape", "--config", path.to_str().unwrap(), "--workers", workers])
            .output()
            .map_err(err)?;
        if !out.status.success() {
            return Ok(outcome(false, format!("run with {workers} workers failed: {}", String::from_utf8_lossy(&out.stderr))));
        }
        bytes.push(std::fs::read(dir.path().join(format!("{name}.csv"))).map_err(err)?);
    }
    Ok(outcome(bytes[0] == bytes[1], format!("N=1 101×101 landscape CSVs with 1 and 4 workers: {} bytes, identical = {}", bytes[0].len(), bytes[0] == bytes[1])))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Option<u64>, Check); 11] = [
        (1, "Bloch-oracle steady state", Some(1), c1_bloch_steady_state),
        (2, "unfiltered g2", Some(5), c2_unfiltered_g2),
        (3, "large-linewidth equivalence", Some(60), c3_large_linewidth_limit),
        (4, "Mollow triplet", Some(120), c4_mollow_triplet),
        (5, "epsilon invariance", Some(120), c5_epsilon_invariance),
        (6, "swap symmetry and sign", Some(60), c6_swap_symmetry),
        (7, "leapfrog structure", Some(300), c7_leapfrog_structure),
        (8, "bundle heralding", Some(600), c8_bundle_heralding),
        (9, "approximation contrast", Some(300), c9_approximation_contrast),
        (10, "time-frequency consistency", Some(300), c10_time_frequency_consistency),
        (11, "end-to-end determinism", None, c11_end_to_end_determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l as f64);
        let (passed, detail) = match result {
            Ok(o) => (o.passed && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = limit.map(|l| format!(" (limit {l} s)")).unwrap_or_default();
        println!("{} criterion {id:>2} [{name}] {secs:.2} s{budget}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
