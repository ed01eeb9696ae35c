//! Action of `exp(Lτ)` on a vector by adaptive Dormand–Prince 5(4) integration
//! of `dv/dt = L v`.
//!
//! Liouvillians are dense in storage but mostly zero, so the right-hand side is
//! evaluated through a row-compressed copy of the nonzero entries taken once
//! per call.

use num_complex::Complex64 as C64;

use super::matrix::{CMatrix, CVector, ZERO};
use super::NumericsError;

/// Steps shorter than this fraction of the final time abort the integration.
pub const MIN_STEP_FRACTION: f64 = 1e-12;
const MAX_STEPS: usize = 50_000_000;
const SAFETY: f64 = 0.9;
const MIN_SHRINK: f64 = 0.2;
const MAX_GROW: f64 = 5.0;

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (fifth minus embedded fourth order)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Row-compressed nonzeros of a square matrix.
struct SparseRows {
    row_start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<C64>,
}

impl SparseRows {
    fn from_dense(m: &CMatrix) -> Self {
        let mut row_start = Vec::with_capacity(m.rows() + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_start.push(0);
        for i in 0..m.rows() {
            for (j, &z) in m.row(i).iter().enumerate() {
                if z != ZERO {
                    col.push(j);
                    val.push(z);
                }
            }
            row_start.push(col.len());
        }
        Self { row_start, col, val }
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let range = self.row_start[i]..self.row_start[i + 1];
            *o = self.col[range.clone()].iter().zip(&self.val[range]).map(|(&j, &a)| a * x[j]).sum();
        }
    }
}

/// Propagates `v0` under `dv/dt = L v` and returns `v(τ)` at every requested
/// time, in a single forward pass.
///
/// `taus` must be non-negative and ascending; `rel_tol` in `(0, 1e-3]` bounds
/// the local error of each step relative to the largest component of the
/// state.
pub fn ode_propagate(l: &CMatrix, v0: &CVector, taus: &[f64], rel_tol: f64) -> Result<Vec<CVector>, NumericsError> {
    if !l.is_square() {
        return Err(NumericsError::DimensionMismatch { context: "ode_propagate", expected: l.rows(), found: l.cols() });
    }
    if l.rows() != v0.dim() {
        return Err(NumericsError::DimensionMismatch { context: "ode_propagate", expected: l.rows(), found: v0.dim() });
    }
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(NumericsError::InvalidTolerance(rel_tol));
    }
    if taus.iter().any(|t| !t.is_finite() || *t < 0.0) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(NumericsError::InvalidTimeGrid);
    }
    let Some(&t_end) = taus.last() else {
        return Ok(Vec::new());
    };

    let rhs = SparseRows::from_dense(l);
    let n = v0.dim();
    let min_step = MIN_STEP_FRACTION * t_end;

    let mut y = v0.as_slice().to_vec();
    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut k5 = vec![ZERO; n];
    let mut k6 = vec![ZERO; n];
    let mut k7 = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];

    rhs.apply(&y, &mut k1);
    let mut h = initial_step(&y, &k1, t_end);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    let mut steps = 0usize;

    for &target in taus {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(NumericsError::StepUnderflow { time: t, step: h });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            combine(&mut tmp, &y, step, &[(A21, &k1)]);
            rhs.apply(&tmp, &mut k2);
            combine(&mut tmp, &y, step, &[(A31, &k1), (A32, &k2)]);
            rhs.apply(&tmp, &mut k3);
            combine(&mut tmp, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            rhs.apply(&tmp, &mut k4);
            combine(&mut tmp, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            rhs.apply(&tmp, &mut k5);
            combine(&mut tmp, &y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            rhs.apply(&tmp, &mut k6);
            combine(&mut y_new, &y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            rhs.apply(&y_new, &mut k7);

            let scale = y.iter().chain(y_new.iter()).map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let mut err = 0.0_f64;
            for i in 0..n {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let en = e.norm();
                err = if en.is_nan() { f64::INFINITY } else { err.max(en) };
            }
            if !scale.is_finite() {
                err = f64::INFINITY;
            }
            let err = if err.is_finite() { err / (rel_tol * scale) } else { err };

            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                let grow = if err == 0.0 { MAX_GROW } else { (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, MAX_GROW) };
                // a step shortened to land on a grid time says nothing about the stable step size
                if !last || step >= h {
                    h = step * grow;
                }
            } else {
                let shrink = if err.is_finite() { (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, 1.0) } else { MIN_SHRINK };
                h = step * shrink;
                if h < min_step {
                    return Err(NumericsError::StepUnderflow { time: t, step: h });
                }
            }
        }
        out.push(CVector::from_vec(y.clone()));
    }
    Ok(out)
}

fn initial_step(y: &[C64], f: &[C64], t_end: f64) -> f64 {
    let ny = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let nf = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if nf == 0.0 || ny == 0.0 {
        t_end.max(f64::MIN_POSITIVE)
    } else {
        (0.01 * ny / nf).min(t_end.max(f64::MIN_POSITIVE))
    }
}

/// `out = y + h Σ c_k k`
#[inline]
fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &Vec<C64>)]) {
    out.copy_from_slice(y);
    for &(c, k) in terms {
        let hc = h * c;
        for (o, &kv) in out.iter_mut().zip(k.iter()) {
            *o += hc * kv;
        }
    }
}
