//! Finite-dimensional Hilbert-space substrate: normalized states, Hermitian
//! Hamiltonians, their spectral decomposition and the unitary propagator
//! `exp(-iHt/hbar)` built from it.
//!
//! Everything here is dense and meant for small dimensions (up to 64 or so).

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// Allowed deviation of `sum |a_k|^2` from one.
pub const NORM_TOL: f64 = 1e-12;
/// Relative Hermiticity tolerance, scaled by `max |M_jk|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Max-norm tolerance on `U^dag U - I`.
pub const UNITARY_TOL: f64 = 1e-10;

/// A normalized complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    /// Wraps `amps`, rejecting vectors that are empty or not normalized
    /// within [`NORM_TOL`].
    pub fn new(amps: CVector) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("state dimension must be at least 1".into()));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm_sq = amps.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq, tol: NORM_TOL });
        }
        Ok(Self { amps })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(amps: CVector) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidParameter("state dimension must be at least 1".into()));
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok(Self { amps: amps.unscale(norm) })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amps))
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// For vectors produced by unitary maps of normalized states, where the
    /// norm is exact up to rounding.
    pub(crate) fn from_unit_vector(amps: CVector) -> Self {
        debug_assert!((amps.norm_squared() - 1.0).abs() < 1e-9);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Multiplies by a scalar of unit modulus.
    pub fn with_phase(&self, phase: f64) -> StateVector {
        Self { amps: self.amps.map(|a| a * C64::from_polar(1.0, phase)) }
    }
}

/// A Hermitian Hamiltonian together with the value of hbar used to turn
/// energies into angular frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    matrix: CMatrix,
    hbar: f64,
}

impl Hamiltonian {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_hbar(matrix, 1.0)
    }

    pub fn with_hbar(matrix: CMatrix, hbar: f64) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::InvalidParameter("Hamiltonian dimension must be at least 1".into()));
        }
        if matrix.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("Hamiltonian matrix"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive and finite, got {hbar}")));
        }
        let asymmetry = max_hermitian_asymmetry(&matrix);
        let tol = HERMITIAN_TOL * max_abs(&matrix);
        if asymmetry > tol {
            return Err(Error::NotHermitian { asymmetry, tol });
        }
        Ok(Self { matrix, hbar })
    }

    /// `diag(energies)`.
    pub fn diagonal(energies: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(energies.len(), energies.iter().map(|&e| C64::new(e, 0.0)));
        Self::new(CMatrix::from_diagonal(&diag))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(CMatrix::zeros(dim, dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// as the columns of a unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub energies: Vec<f64>,
    pub eigenvectors: CMatrix,
    pub hbar: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `V diag(E) V^dag`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(self.energies[j], 0.0);
        }
        scaled * v.adjoint()
    }

    /// The eigenvector `|E_j>`.
    pub fn eigenstate(&self, j: usize) -> StateVector {
        StateVector::from_unit_vector(self.eigenvectors.column(j).into_owned())
    }
}

/// `exp(-iHt/hbar)` for a fixed elapsed time.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryPropagator {
    pub matrix: CMatrix,
    pub duration: f64,
}

impl UnitaryPropagator {
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.matrix.ncols(), psi.dim())?;
        Ok(StateVector::from_unit_vector(&self.matrix * psi.amplitudes()))
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }
}

/// Diagonalizes `h`. Eigenvalues come out ascending; each eigenvector's phase
/// is fixed so that its first largest-modulus component is real and positive,
/// and eigenvectors inside a degenerate cluster are ordered lexicographically
/// (descending) by their components.
pub fn spectral_decompose(h: &Hamiltonian) -> SpectralDecomposition {
    let dim = h.dim();
    let eig = h.matrix.clone().symmetric_eigen();

    let mut pairs: Vec<(f64, CVector)> = (0..dim)
        .map(|j| (eig.eigenvalues[j], fix_phase(eig.eigenvectors.column(j).into_owned())))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let scale = 1.0 + pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let tol = 1e-10 * scale;
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && pairs[end].0 - pairs[end - 1].0 <= tol {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| lexicographic_desc(&a.1, &b.1));
        start = end;
    }

    let energies = pairs.iter().map(|p| p.0).collect();
    let columns: Vec<CVector> = pairs.into_iter().map(|p| p.1).collect();
    SpectralDecomposition {
        energies,
        eigenvectors: CMatrix::from_columns(&columns),
        hbar: h.hbar,
    }
}

fn fix_phase(mut v: CVector) -> CVector {
    let max = v.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    let pivot = v.iter().find(|a| a.norm() >= max * (1.0 - 1e-10)).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    v *= phase;
    v
}

fn lexicographic_desc(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// `V diag(exp(-i E_j t / hbar)) V^dag` from an existing decomposition.
pub fn propagator_from_spectrum(spectrum: &SpectralDecomposition, t: f64) -> Result<UnitaryPropagator> {
    if !t.is_finite() {
        return Err(Error::NonFinite("evolution time"));
    }
    let v = &spectrum.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::from_polar(1.0, -spectrum.energies[j] * t / spectrum.hbar);
    }
    Ok(UnitaryPropagator { matrix: scaled * v.adjoint(), duration: t })
}

pub fn propagator(h: &Hamiltonian, t: f64) -> Result<UnitaryPropagator> {
    propagator_from_spectrum(&spectral_decompose(h), t)
}

/// `exp(-iHt/hbar) |psi>`.
pub fn evolve(h: &Hamiltonian, psi: &StateVector, t: f64) -> Result<StateVector> {
    check_dim(h.dim(), psi.dim())?;
    propagator(h, t)?.apply(psi)
}

/// Energy-basis coefficients `a_j = <E_j|psi>`.
pub fn to_energy_coefficients(psi: &StateVector, spectrum: &SpectralDecomposition) -> Result<CVector> {
    check_dim(spectrum.dim(), psi.dim())?;
    Ok(spectrum.eigenvectors.ad_mul(psi.amplitudes()))
}

/// Inverse of [`to_energy_coefficients`].
pub fn from_energy_coefficients(coefficients: &CVector, spectrum: &SpectralDecomposition) -> Result<StateVector> {
    check_dim(spectrum.dim(), coefficients.len())?;
    StateVector::new(&spectrum.eigenvectors * coefficients)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    // column-major fill order is part of the seeded output
    CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng))
}

/// Uniformly distributed state on the unit sphere of `C^dim`.
///
/// # Panics
/// If `dim == 0`.
pub fn random_state(dim: usize, seed: u64) -> StateVector {
    assert!(dim >= 1, "random_state requires dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_gaussian(&mut rng));
        if let Ok(s) = StateVector::normalized(v) {
            return s;
        }
    }
}

/// `energy_scale * (A + A^dag) / 2` with `A` a complex Gaussian matrix.
///
/// # Panics
/// If `dim == 0` or `energy_scale` is not finite.
pub fn random_hamiltonian(dim: usize, seed: u64, energy_scale: f64) -> Hamiltonian {
    assert!(dim >= 1, "random_hamiltonian requires dim >= 1");
    assert!(energy_scale.is_finite(), "energy_scale must be finite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, dim);
    let herm = CMatrix::from_fn(dim, dim, |j, k| (a[(j, k)] + a[(k, j)].conj()) * (0.5 * energy_scale));
    Hamiltonian::new(herm).expect("(A + A^dag)/2 is Hermitian")
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `diag(R)` moved into `Q`.
///
/// # Panics
/// If `dim == 0`.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    assert!(dim >= 1, "random_unitary requires dim >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qr = gaussian_matrix(&mut rng, dim).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            col *= d / d.norm();
        }
    }
    q
}

pub fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

pub fn max_hermitian_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

/// `max |U^dag U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.ad_mul(u) - CMatrix::identity(n, n)))
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    let (rows, cols) = u.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let deviation = unitarity_defect(u);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation, tol: UNITARY_TOL });
    }
    Ok(())
}
