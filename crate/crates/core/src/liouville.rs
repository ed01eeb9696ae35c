//! Composite Hilbert spaces, Lindblad generators and steady-state / two-time
//! quantities built on them.
//!
//! Density matrices are vectorized by stacking columns: `vec(ρ)[i + j·d] = ρ[i,j]`.
//! With that convention `vec(AXB) = (Bᵀ ⊗ A) vec(X)`, and the generator of
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_c (γ_c/2)(2cρc† − c†cρ − ρc†c)
//! ```
//!
//! is `L = -i(I⊗H − Hᵀ⊗I) + Σ_c (γ_c/2)(2 c̄⊗c − I⊗c†c − (c†c)ᵀ⊗I)`.

use nalgebra::DMatrix;

use crate::numerics::{kronecker, ode_propagate, CMatrix, CVector, LuFactors, NumericsError, C64, ONE, ZERO};

/// Maximum entrywise Hermiticity defect accepted for a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Maximum trace defect accepted for a density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOL: f64 = -1e-8;
/// Steady-state residual bound relative to `‖L‖∞`.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;
/// Local error tolerance used by the two-time correlator unless overridden.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiouvilleError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Lindblad rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("steady state not unique or not physical: {0}")]
    NonUniqueSteadyState(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Ordered tensor-product structure, e.g. `[2, n₁+1, n₂+1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self, LiouvilleError> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(LiouvilleError::DimensionMismatch(format!("invalid factor dimensions {factor_dims:?}")));
        }
        Ok(Self { factor_dims })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self, LiouvilleError> {
        let d = space.dim();
        if matrix.shape() != (d, d) {
            return Err(LiouvilleError::DimensionMismatch(format!(
                "operator of shape {:?} on a space of dimension {d}",
                matrix.shape()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        Self { matrix: CMatrix::identity(space.dim()), space: space.clone() }
    }

    pub fn zero(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self { matrix: CMatrix::zeros(d, d), space: space.clone() }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn pow(&self, n: u32) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.pow(n) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.scale(C64::new(s, 0.0)) }
    }

    pub fn mul(&self, other: &Operator) -> Result<Self, LiouvilleError> {
        same_space(&self.space, &other.space)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.matmul(&other.matrix) })
    }

    pub fn add(&self, other: &Operator) -> Result<Self, LiouvilleError> {
        same_space(&self.space, &other.space)?;
        Ok(Self { space: self.space.clone(), matrix: self.matrix.add(&other.matrix) })
    }

    /// `A†A`
    pub fn number(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint().matmul(&self.matrix) }
    }
}

fn same_space(a: &HilbertSpace, b: &HilbertSpace) -> Result<(), LiouvilleError> {
    if a != b {
        return Err(LiouvilleError::DimensionMismatch(format!(
            "operators on different spaces {:?} and {:?}",
            a.factor_dims, b.factor_dims
        )));
    }
    Ok(())
}

/// Truncated annihilation operator: `⟨k−1|a|k⟩ = √k`. For `dim = 2` this is
/// the two-level lowering operator `|0⟩⟨1|`.
pub fn lowering_op(dim: usize) -> CMatrix {
    assert!(dim >= 2, "lowering_op needs at least two levels");
    let mut m = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    m
}

/// `I ⊗ … ⊗ local_op ⊗ … ⊗ I`, with `local_op` on factor `which_factor`.
pub fn embed(local_op: &CMatrix, which_factor: usize, space: &HilbertSpace) -> Result<Operator, LiouvilleError> {
    let dims = space.factor_dims();
    let Some(&d) = dims.get(which_factor) else {
        return Err(LiouvilleError::DimensionMismatch(format!(
            "factor index {which_factor} out of range for {dims:?}"
        )));
    };
    if local_op.shape() != (d, d) {
        return Err(LiouvilleError::DimensionMismatch(format!(
            "local operator {:?} does not fit factor {which_factor} of dimension {d}",
            local_op.shape()
        )));
    }
    let before: usize = dims[..which_factor].iter().product();
    let after: usize = dims[which_factor + 1..].iter().product();
    let mut m = local_op.clone();
    if before > 1 {
        m = kronecker(&CMatrix::identity(before), &m);
    }
    if after > 1 {
        m = kronecker(&m, &CMatrix::identity(after));
    }
    Operator::new(space.clone(), m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTerm {
    rate: f64,
    collapse: Operator,
}

impl LindbladTerm {
    pub fn new(rate: f64, collapse: Operator) -> Result<Self, LiouvilleError> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(LiouvilleError::InvalidRate(rate));
        }
        Ok(Self { rate, collapse })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn collapse(&self) -> &Operator {
        &self.collapse
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Liouvillian {
    /// Wraps a precomputed superoperator; `matrix` must be `d² × d²`.
    pub fn from_matrix(space: HilbertSpace, matrix: CMatrix) -> Result<Self, LiouvilleError> {
        let d2 = space.dim() * space.dim();
        if matrix.shape() != (d2, d2) {
            return Err(LiouvilleError::DimensionMismatch(format!(
                "superoperator of shape {:?} for a space of dimension {}",
                matrix.shape(),
                space.dim()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Largest `|(vec I)† L|` entry; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.space.dim();
        let n = d * d;
        (0..n)
            .map(|col| (0..d).map(|i| self.matrix[(i * (d + 1), col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// Hamiltonian part `-i(I⊗H − Hᵀ⊗I)`.
pub fn hamiltonian_superop(h: &CMatrix) -> CMatrix {
    let d = h.rows();
    let id = CMatrix::identity(d);
    let mut m = kronecker(&id, h);
    m.add_scaled(-ONE, &kronecker(&h.transpose(), &id));
    m.scale(C64::new(0.0, -1.0))
}

/// Dissipator `(rate/2)(2 c̄⊗c − I⊗c†c − (c†c)ᵀ⊗I)`.
pub fn dissipator_superop(rate: f64, c: &CMatrix) -> CMatrix {
    let d = c.rows();
    let id = CMatrix::identity(d);
    let cdc = c.adjoint().matmul(c);
    let mut m = kronecker(&c.conj(), c).scale(C64::new(2.0, 0.0));
    m.add_scaled(-ONE, &kronecker(&id, &cdc));
    m.add_scaled(-ONE, &kronecker(&cdc.transpose(), &id));
    m.scale(C64::new(rate / 2.0, 0.0))
}

pub fn build_liouvillian(h: &Operator, terms: &[LindbladTerm]) -> Result<Liouvillian, LiouvilleError> {
    for t in terms {
        same_space(h.space(), t.collapse.space())?;
    }
    let mut m = hamiltonian_superop(h.matrix());
    for t in terms {
        if t.rate > 0.0 {
            m.add_scaled(ONE, &dissipator_superop(t.rate, t.collapse.matrix()));
        }
    }
    Liouvillian::from_matrix(h.space().clone(), m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self, LiouvilleError> {
        let d = space.dim();
        if matrix.shape() != (d, d) {
            return Err(LiouvilleError::DimensionMismatch(format!(
                "density matrix of shape {:?} on a space of dimension {d}",
                matrix.shape()
            )));
        }
        let herm = matrix.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(LiouvilleError::NonUniqueSteadyState(format!("Hermiticity defect {herm:e}")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(LiouvilleError::NonUniqueSteadyState(format!("trace {tr} differs from 1")));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < POSITIVITY_TOL {
            return Err(LiouvilleError::NonUniqueSteadyState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { space, matrix })
    }

    /// Pure state `|k⟩⟨k|` in the computational basis.
    pub fn basis_state(space: &HilbertSpace, k: usize) -> Self {
        let d = space.dim();
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        Self { space: space.clone(), matrix: m }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn vectorize(&self) -> CVector {
        vectorize(&self.matrix)
    }
}

/// Smallest eigenvalue of a (numerically) Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let d = m.rows();
    let herm = DMatrix::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> CVector {
    let d = m.rows();
    let mut v = vec![ZERO; d * m.cols()];
    for i in 0..d {
        for j in 0..m.cols() {
            v[i + j * d] = m[(i, j)];
        }
    }
    CVector::from_vec(v)
}

/// Inverse of [`vectorize`] for a `d × d` matrix.
pub fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    assert_eq!(v.dim(), d * d, "unvectorize: length is not d²");
    CMatrix::from_fn(d, d, |i, j| v[i + j * d])
}

/// Null vector of `L` normalized to unit trace, by replacing the first
/// equation with the trace functional.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix, LiouvilleError> {
    let d = l.space.dim();
    let n = d * d;
    let mut a = l.matrix.clone();
    {
        let row = a.row_mut(0);
        row.fill(ZERO);
        for i in 0..d {
            row[i * (d + 1)] = ONE;
        }
    }
    let rhs = CVector::unit(n, 0);
    let lu = LuFactors::factor(&a).map_err(|e| match e {
        NumericsError::SingularMatrix { .. } => LiouvilleError::NonUniqueSteadyState(e.to_string()),
        other => other.into(),
    })?;
    let v = lu.solve_refined(&a, &rhs);

    let residual = l.matrix.matvec(&v).norm_inf();
    let bound = STEADY_RESIDUAL_TOL * l.matrix.norm_inf();
    if residual > bound {
        return Err(LiouvilleError::NonUniqueSteadyState(format!("residual {residual:e} exceeds {bound:e}")));
    }
    let rho = unvectorize(&v, d);
    let herm = rho.hermiticity_defect();
    if herm > HERMITIAN_TOL {
        return Err(LiouvilleError::NonUniqueSteadyState(format!("Hermiticity defect {herm:e}")));
    }
    // Remove the rounding-level anti-Hermitian part.
    let rho = CMatrix::from_fn(d, d, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5);
    DensityMatrix::new(l.space.clone(), rho)
}

/// `Tr(Aρ)`
pub fn expectation(rho: &DensityMatrix, a: &Operator) -> Result<C64, LiouvilleError> {
    same_space(rho.space(), a.space())?;
    Ok(trace_product(a.matrix(), rho.matrix()))
}

/// `Tr(XY)` without forming the product.
pub fn trace_product(x: &CMatrix, y: &CMatrix) -> C64 {
    let d = x.rows();
    let mut acc = ZERO;
    for i in 0..d {
        for (j, &xij) in x.row(i).iter().enumerate() {
            if xij != ZERO {
                acc += xij * y[(j, i)];
            }
        }
    }
    acc
}

/// `C(τ) = Tr[B · exp(Lτ)(A ρ A†)]` on the given delay grid.
pub fn two_time_correlator(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    a: &Operator,
    b: &Operator,
    taus: &[f64],
) -> Result<Vec<C64>, LiouvilleError> {
    two_time_correlator_with_tol(l, rho_ss, a, b, taus, DEFAULT_REL_TOL)
}

pub fn two_time_correlator_with_tol(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    a: &Operator,
    b: &Operator,
    taus: &[f64],
    rel_tol: f64,
) -> Result<Vec<C64>, LiouvilleError> {
    same_space(l.space(), rho_ss.space())?;
    same_space(l.space(), a.space())?;
    same_space(l.space(), b.space())?;
    let d = l.space.dim();
    let sandwiched = a.matrix().matmul(rho_ss.matrix()).matmul(&a.matrix().adjoint());
    let states = ode_propagate(l.matrix(), &vectorize(&sandwiched), taus, rel_tol)?;
    Ok(states.iter().map(|v| trace_product(b.matrix(), &unvectorize(v, d))).collect())
}
