//! Dense LU factorization with partial pivoting and iterative refinement.

use num_complex::Complex64 as C64;

use super::matrix::{CMatrix, CVector, ZERO};
use super::NumericsError;

/// Pivots smaller than this fraction of `max|A|` are treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;
/// Maximum number of iterative-refinement passes per solve.
pub const MAX_REFINEMENT_PASSES: usize = 2;

/// `P A = L U`, with unit-diagonal `L` stored below the diagonal of `lu`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &CMatrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::DimensionMismatch {
                context: "lu",
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let threshold = PIVOT_TOLERANCE * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm_sqr()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let pmag = pmag.sqrt();
            if pmag <= threshold || pmag == 0.0 {
                return Err(NumericsError::SingularMatrix { column: k, pivot: pmag, threshold });
            }
            if p != k {
                perm.swap(p, k);
                let data = lu.as_mut_slice();
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
            }
            let inv_pivot = lu[(k, k)].inv();
            let data = lu.as_mut_slice();
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n + k + 1..(k + 1) * n];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] * inv_pivot;
                row[k] = l;
                if l == ZERO {
                    continue;
                }
                for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *x -= l * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// One forward/back substitution, no refinement.
    pub fn solve_once(&self, b: &CVector) -> CVector {
        let n = self.dim();
        assert_eq!(b.dim(), n, "lu solve: dimension mismatch");
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: C64 = row[..i].iter().zip(&x[..i]).map(|(&l, &y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: C64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(&u, &y)| u * y).sum();
            x[i] = (x[i] - s) / row[i];
        }
        CVector::from_vec(x)
    }

    /// Solve `A x = b` for the matrix this factorization came from, refining
    /// against `a` up to [`MAX_REFINEMENT_PASSES`] times.
    pub fn solve_refined(&self, a: &CMatrix, b: &CVector) -> CVector {
        let mut x = self.solve_once(b);
        let mut res = relative_residual(a, &x, b);
        for _ in 0..MAX_REFINEMENT_PASSES {
            if res <= f64::EPSILON {
                break;
            }
            let r = b.sub(&a.matvec(&x));
            let candidate = x.add(&self.solve_once(&r));
            let cand_res = relative_residual(a, &candidate, b);
            if cand_res < res {
                x = candidate;
                res = cand_res;
            } else {
                break;
            }
        }
        x
    }
}

/// `‖Ax − b‖ / (‖A‖·‖x‖ + ‖b‖)` in the infinity norm.
pub fn relative_residual(a: &CMatrix, x: &CVector, b: &CVector) -> f64 {
    let r = b.sub(&a.matvec(x)).norm_inf();
    let denom = a.norm_inf() * x.norm_inf() + b.norm_inf();
    if denom == 0.0 {
        r
    } else {
        r / denom
    }
}

/// Solves `A x = b` by LU with partial pivoting plus iterative refinement.
pub fn lu_solve(a: &CMatrix, b: &CVector) -> Result<CVector, NumericsError> {
    if a.rows() != b.dim() {
        return Err(NumericsError::DimensionMismatch { context: "lu_solve", expected: a.rows(), found: b.dim() });
    }
    let f = LuFactors::factor(a)?;
    Ok(f.solve_refined(a, b))
}
