//! Dense complex linear algebra underpinning the machine models.
//!
//! Everything here works on `DMatrix<Complex64>`. Hermitian eigendecompositions
//! come back in a deterministic form (eigenvalues ascending, each eigenvector
//! phase-fixed so its largest component is real positive) so that downstream
//! constructions — Bohr-frequency jump operators, passive states — do not
//! depend on solver-internal ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QtmError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest elementwise deviation from Hermiticity, max_ij |m_ij - conj(m_ji)|.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Induced 1-norm (maximum absolute column sum).
pub fn one_norm(m: &CMatrix) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        let s: f64 = (0..m.nrows()).map(|i| m[(i, j)].norm()).sum();
        if s > best {
            best = s;
        }
    }
    best
}

const HERMITICITY_TOL: f64 = 1e-12;

/// A validated Hermitian operator (Hamiltonian, observable).
#[derive(Debug, Clone)]
pub struct HermitianOp {
    mat: CMatrix,
}

impl HermitianOp {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(QtmError::DimensionMismatch(format!(
                "expected square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let defect = hermiticity_defect(&mat);
        if defect > HERMITICITY_TOL {
            return Err(QtmError::NotHermitian(defect));
        }
        // Symmetrize away the sub-tolerance noise so eigensolves see an exactly
        // Hermitian input.
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat: sym })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn eig(&self) -> SpectralDecomposition {
        herm_eig_unchecked(&self.mat)
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
///
/// Positivity is checked spectrally up to dimension 64; above that only the
/// cheap invariants (Hermiticity, trace) are enforced, since a full
/// eigendecomposition of every intermediate state would dominate runtime.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMatrix,
}

const EIG_CHECK_MAX_DIM: usize = 64;

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        Self::with_tolerance(mat, 1e-12)
    }

    /// Validate with a caller-chosen tolerance (evolved states accumulate
    /// integrator error and are held to 1e-8 rather than 1e-12).
    pub fn with_tolerance(mat: CMatrix, tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(QtmError::DimensionMismatch(format!(
                "expected square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let defect = hermiticity_defect(&mat);
        if defect > tol {
            return Err(QtmError::InvalidState(format!(
                "not Hermitian within {tol:.1e} (defect {defect:.3e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(QtmError::InvalidState(format!(
                "trace {tr} differs from 1 beyond {tol:.1e}"
            )));
        }
        let sym = (&mat + mat.adjoint()).scale(0.5);
        if sym.nrows() <= EIG_CHECK_MAX_DIM {
            let dec = herm_eig_unchecked(&sym);
            let min = dec.eigenvalues.first().copied().unwrap_or(0.0);
            if min < -tol {
                return Err(QtmError::InvalidState(format!(
                    "negative eigenvalue {min:.3e} beyond {tol:.1e}"
                )));
            }
        }
        Ok(Self { mat: sym })
    }

    pub(crate) fn from_validated(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Real diagonal entries (populations in the computational basis).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }
}

/// Eigenvalues ascending; `eigenvectors` holds the matching columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// V diag(f(E)) V† for a scalar function of the eigenvalues.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut d = CMatrix::zeros(n, n);
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            d[(k, k)] = Complex64::new(f(e), 0.0);
        }
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }
}

/// Hermitian eigendecomposition of a validated operator.
pub fn herm_eig(op: &HermitianOp) -> SpectralDecomposition {
    herm_eig_unchecked(op.matrix())
}

/// Eigendecomposition of a matrix the caller promises is Hermitian.
///
/// Ordering policy: eigenvalues ascending; each eigenvector's largest-modulus
/// component is rotated real positive; within a degenerate cluster (relative
/// gap below 1e-9) columns are ordered by descending real part of the first
/// non-negligible component, so repeated runs and equivalent inputs produce
/// identical bases.
pub fn herm_eig_unchecked(m: &CMatrix) -> SpectralDecomposition {
    let n = m.nrows();
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(se.eigenvalues[src]);
        let mut v: CVector = se.eigenvectors.column(src).into_owned();
        fix_phase(&mut v);
        eigenvectors.set_column(col, &v);
    }

    // Deterministic ordering inside degenerate clusters.
    let scale = eigenvalues
        .iter()
        .fold(1.0f64, |acc, e| acc.max(e.abs()));
    let tie_tol = 1e-9 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[end] - eigenvalues[end - 1]).abs() <= tie_tol {
            end += 1;
        }
        if end - start > 1 {
            let mut cols: Vec<(f64, CVector)> = (start..end)
                .map(|c| {
                    let v: CVector = eigenvectors.column(c).into_owned();
                    (first_component_key(&v), v)
                })
                .collect();
            cols.sort_by(|a, b| b.0.total_cmp(&a.0));
            for (offset, (_, v)) in cols.into_iter().enumerate() {
                eigenvectors.set_column(start + offset, &v);
            }
        }
        start = end;
    }

    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

fn fix_phase(v: &mut CVector) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = i;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best] / best_mag;
        let rot = phase.conj();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

fn first_component_key(v: &CVector) -> f64 {
    for z in v.iter() {
        if z.norm() > 1e-9 {
            return z.re;
        }
    }
    0.0
}

// Padé-13 coefficients for the scaling-and-squaring matrix exponential.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE13_THETA: f64 = 5.371920351148152;
const EXP_MAX_SQUARINGS: u32 = 40;

/// exp(scale · m) by Padé-13 with scaling and squaring.
///
/// Large scaled norms are fine as long as the exponential itself stays
/// representable — relaxation semigroups e^{Lt} are contractions however
/// large t‖L‖ grows. The guards are a cap on the squaring count (cost and
/// error growth) and a finiteness check on the result, which catches genuine
/// overflow of expanding exponentials.
pub fn matrix_exp(m: &CMatrix, scale: Complex64) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(QtmError::DimensionMismatch(format!(
            "matrix_exp needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut a = m.map(|z| z * scale);
    let norm = one_norm(&a);
    if !norm.is_finite() {
        return Err(QtmError::NormOverflow(norm));
    }
    let n = a.nrows();
    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    if squarings > EXP_MAX_SQUARINGS {
        return Err(QtmError::NormOverflow(norm));
    }
    if squarings > 0 {
        a /= Complex64::new(2f64.powi(squarings as i32), 0.0);
    }

    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| QtmError::SolverFailure("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QtmError::NormOverflow(norm));
    }
    Ok(result)
}

/// Trace out every tensor factor except `keep`.
///
/// `dims` lists the factor dimensions in tensor order (leftmost factor varies
/// slowest, matching `kron`).
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: usize) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(QtmError::DimensionMismatch(format!(
            "state is {}x{} but subsystem dims {:?} give {}",
            rho.nrows(),
            rho.ncols(),
            dims,
            total
        )));
    }
    if keep >= dims.len() {
        return Err(QtmError::InvalidParameter(format!(
            "keep index {keep} out of range for {} subsystems",
            dims.len()
        )));
    }
    let dk = dims[keep];
    // Stride of the kept factor in the flattened index.
    let stride: usize = dims[keep + 1..].iter().product();
    let mut out = CMatrix::zeros(dk, dk);
    for a in 0..total {
        let ik = (a / stride) % dk;
        let base = a - ik * stride;
        for jk in 0..dk {
            let b = base + jk * stride;
            out[(ik, jk)] += rho[(a, b)];
        }
    }
    Ok(out)
}

const ENTROPY_CLIP: f64 = 1e-12;

/// Von Neumann entropy −Tr ρ ln ρ in nats, with 0·ln 0 ≡ 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(herm_eig_unchecked(rho.matrix()).eigenvalues.iter().copied())
}

pub fn entropy_of_spectrum(eigs: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    for p in eigs {
        if p > ENTROPY_CLIP {
            s -= p * p.ln();
        }
    }
    s
}

/// Thermal state e^{−βH}/Z. Shifts energies by the ground energy first so
/// large β cannot overflow.
pub fn gibbs_state(h: &HermitianOp, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(QtmError::InvalidParameter(format!(
            "inverse temperature must be finite and nonnegative, got {beta}"
        )));
    }
    let dec = h.eig();
    let e0 = dec.eigenvalues[0];
    let weights: Vec<f64> = dec
        .eigenvalues
        .iter()
        .map(|&e| (-(beta) * (e - e0)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let n = dec.dim();
    let mut d = CMatrix::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        d[(k, k)] = Complex64::new(w / z, 0.0);
    }
    let rho = &dec.eigenvectors * d * dec.eigenvectors.adjoint();
    Ok(DensityMatrix::from_validated(
        (&rho + rho.adjoint()).scale(0.5),
    ))
}

/// Trace distance (1/2)‖a − b‖₁ between two states.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QtmError::DimensionMismatch(format!(
            "states have dims {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a.matrix() - b.matrix();
    let dec = herm_eig_unchecked(&diff);
    Ok(0.5 * dec.eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
}

fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOp {
    let g = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    let h = (&g + g.adjoint()).scale(0.5);
    HermitianOp::new(h).expect("symmetrized matrix is Hermitian")
}

/// Random full-rank density matrix, ρ = GG†/Tr(GG†).
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let rho = w.map(|z| z / tr);
    DensityMatrix::from_validated((&rho + rho.adjoint()).scale(0.5))
}
