//! Path functional with a quantumness penalty, evaluated in the
//! stationary-path approximation: a single discretized path
//! `Phi_0 = psi_i, Phi_1, ..., Phi_N` is optimized together with its final
//! state, and the log-magnitude of its integrand is reported. The numbers are
//! approximations of the penalized generating functional, not exact values.
//!
//! For a path on the unit sphere the log-magnitude is
//!
//! ```text
//! -1/2 sum_k |Phi_{k+1} - K Phi_k|^2  -  lambda dt sum_{k=1..N} Q(Phi_k)
//! ```
//!
//! where `K` is the single-slice propagator. Without the penalty this is
//! maximal (zero) exactly on the Schrodinger path.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, propagator_from_spectrum, spectral_decompose, CMatrix, CVector, Hamiltonian, StateVector,
};
use crate::lattice::TimeGrid;
use crate::optimizer::{max_norm, project_tangent, OptimizerConfig};

pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Pointer fidelities closer than this are reported as a tie.
pub const TIE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumnessMeasure {
    /// `1 - max_k |<p_k|psi>|^2` over an orthonormal pointer set.
    PointerDeviation { basis: Vec<StateVector> },
    /// `1 - Tr(rho_A^2)` for the split `C^{d_a} (x) C^{d_b}`, first factor major.
    LinearEntropy { d_a: usize, d_b: usize },
}

impl QuantumnessMeasure {
    pub fn pointer_deviation(basis: Vec<StateVector>) -> Result<Self> {
        check_orthonormal(&basis)?;
        Ok(Self::PointerDeviation { basis })
    }

    /// Pointer deviation with respect to the computational basis.
    pub fn computational_pointers(dim: usize) -> Result<Self> {
        Self::pointer_deviation(computational_basis(dim)?)
    }

    pub fn linear_entropy(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidParameter("partition dimensions must be positive".into()));
        }
        Ok(Self::LinearEntropy { d_a, d_b })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::PointerDeviation { basis } => basis[0].dim(),
            Self::LinearEntropy { d_a, d_b } => d_a * d_b,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PointerDeviation { .. } => "pointer_deviation",
            Self::LinearEntropy { .. } => "linear_entropy",
        }
    }

    /// Pointer set used to classify outcomes; the computational basis when the
    /// measure has none.
    pub fn pointer_basis(&self) -> Vec<StateVector> {
        match self {
            Self::PointerDeviation { basis } => basis.clone(),
            Self::LinearEntropy { d_a, d_b } => computational_basis(d_a * d_b).expect("positive dimension"),
        }
    }

    /// `Q(psi)` for a unit vector given by its amplitudes.
    pub fn value(&self, psi: &CVector) -> f64 {
        match self {
            Self::PointerDeviation { basis } => 1.0 - best_pointer(basis, psi).1,
            Self::LinearEntropy { d_a, d_b } => {
                let rho = reduced_density(psi, *d_a, *d_b);
                1.0 - rho.iter().map(|x| x.norm_sqr()).sum::<f64>()
            }
        }
    }

    /// Real gradient `2 dQ/d conj(psi)`.
    pub fn gradient(&self, psi: &CVector) -> CVector {
        match self {
            Self::PointerDeviation { basis } => {
                let (k, _) = best_pointer(basis, psi);
                let p = basis[k].amplitudes();
                p * (p.dotc(psi) * -2.0)
            }
            Self::LinearEntropy { d_a, d_b } => {
                let m = as_matrix(psi, *d_a, *d_b);
                let g = (&m * m.adjoint()) * &m * C64::new(-4.0, 0.0);
                CVector::from_iterator(d_a * d_b, (0..*d_a).flat_map(|a| (0..*d_b).map(move |b| (a, b))).map(|(a, b)| g[(a, b)]))
            }
        }
    }
}

fn computational_basis(dim: usize) -> Result<Vec<StateVector>> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    (0..dim).map(|k| StateVector::basis(dim, k)).collect()
}

fn check_orthonormal(basis: &[StateVector]) -> Result<()> {
    let Some(first) = basis.first() else {
        return Err(Error::InvalidParameter("pointer basis is empty".into()));
    };
    let mut deviation: f64 = 0.0;
    for (j, p) in basis.iter().enumerate() {
        check_dim(first.dim(), p.dim())?;
        for (k, q) in basis.iter().enumerate() {
            let want = if j == k { 1.0 } else { 0.0 };
            deviation = deviation.max((p.amplitudes().dotc(q.amplitudes()) - want).norm());
        }
    }
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation, tol: ORTHONORMAL_TOL });
    }
    Ok(())
}

/// Index and fidelity of the pointer state closest to `psi` (first one on ties).
fn best_pointer(basis: &[StateVector], psi: &CVector) -> (usize, f64) {
    basis
        .iter()
        .map(|p| p.amplitudes().dotc(psi).norm_sqr())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, f)| if f > best.1 { (k, f) } else { best })
}

fn as_matrix(psi: &CVector, d_a: usize, d_b: usize) -> CMatrix {
    DMatrix::from_fn(d_a, d_b, |a, b| psi[a * d_b + b])
}

fn reduced_density(psi: &CVector, d_a: usize, d_b: usize) -> CMatrix {
    let m = as_matrix(psi, d_a, d_b);
    &m * m.adjoint()
}

pub fn q_pointer_deviation(psi: &StateVector, basis: &[StateVector]) -> Result<f64> {
    check_orthonormal(basis)?;
    check_dim(basis[0].dim(), psi.dim())?;
    Ok(1.0 - best_pointer(basis, psi.amplitudes()).1)
}

pub fn q_linear_entropy(psi: &StateVector, d_a: usize, d_b: usize) -> Result<f64> {
    if d_a == 0 || d_b == 0 || d_a * d_b != psi.dim() {
        return Err(Error::NotFactorizable { dim: psi.dim(), d_a, d_b });
    }
    Ok(QuantumnessMeasure::LinearEntropy { d_a, d_b }.value(psi.amplitudes()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyConfig {
    /// Weight of the quantumness rate, in inverse time units.
    pub lambda: f64,
    pub measure: QuantumnessMeasure,
}

impl PenaltyConfig {
    pub fn new(lambda: f64, measure: QuantumnessMeasure) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        Ok(Self { lambda, measure })
    }
}

/// Single-slice propagator used in the path functional.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKernel {
    /// `exp(-i H dt / hbar)`.
    #[default]
    Exact,
    /// `1 - i H dt / hbar`, the first-order slice of the coherent-state lattice.
    Euler,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenalizedPathProblem {
    pub psi_i: StateVector,
    pub grid: TimeGrid,
    pub hamiltonian: Hamiltonian,
    pub penalty: PenaltyConfig,
    /// Keep interior slices on the unit sphere. Turning this off is only
    /// allowed without a penalty.
    pub interior_normalization: bool,
    pub link: LinkKernel,
    /// Amplitude of the seeded noise added to the Schrodinger path to form
    /// the starting path.
    pub init_noise: f64,
}

impl PenalizedPathProblem {
    pub fn new(psi_i: StateVector, grid: TimeGrid, hamiltonian: Hamiltonian, penalty: PenaltyConfig) -> Result<Self> {
        let problem = Self {
            psi_i,
            grid,
            hamiltonian,
            penalty,
            interior_normalization: true,
            link: LinkKernel::Exact,
            init_noise: 0.25,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.hamiltonian.dim(), self.psi_i.dim())?;
        check_dim(self.hamiltonian.dim(), self.penalty.measure.dim())?;
        if !(self.penalty.lambda.is_finite() && self.penalty.lambda >= 0.0) {
            return Err(Error::InvalidParameter("lambda must be finite and nonnegative".into()));
        }
        if self.penalty.lambda > 0.0 && !self.interior_normalization {
            return Err(Error::InvalidParameter(
                "unnormalized interior slices are only supported with lambda = 0".into(),
            ));
        }
        if !(self.init_noise.is_finite() && self.init_noise >= 0.0) {
            return Err(Error::InvalidParameter("init_noise must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// The single-slice propagator `K`.
    pub fn link_operator(&self) -> Result<CMatrix> {
        let dt = self.grid.dt();
        Ok(match self.link {
            LinkKernel::Exact => propagator_from_spectrum(&spectral_decompose(&self.hamiltonian), dt)?.matrix,
            LinkKernel::Euler => {
                let n = self.hamiltonian.dim();
                CMatrix::identity(n, n) - self.hamiltonian.matrix() * C64::new(0.0, dt / self.hamiltonian.hbar())
            }
        })
    }
}

/// Slices `Phi_0 ... Phi_N` of a discretized Hilbert-space path.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertPath {
    pub slices: Vec<CVector>,
}

impl HilbertPath {
    pub fn from_states(states: &[StateVector]) -> Self {
        Self { slices: states.iter().map(|s| s.amplitudes().clone()).collect() }
    }

    /// `Phi_k = exp(-iH (t_k - t_start)/hbar) psi_i`.
    pub fn schrodinger(psi_i: &StateVector, h: &Hamiltonian, grid: &TimeGrid) -> Result<Self> {
        check_dim(h.dim(), psi_i.dim())?;
        let spectrum = spectral_decompose(h);
        let slices = (0..=grid.steps())
            .map(|k| {
                let u = propagator_from_spectrum(&spectrum, grid.time(k) - grid.t_start())?;
                Ok(&u.matrix * psi_i.amplitudes())
            })
            .collect::<Result<_>>()?;
        Ok(Self { slices })
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
}

fn check_path(problem: &PenalizedPathProblem, path: &HilbertPath) -> Result<()> {
    let n = problem.grid.steps();
    if path.len() != n + 1 {
        return Err(Error::EndpointMismatch(format!("path has {} slices, grid needs {}", path.len(), n + 1)));
    }
    for s in &path.slices {
        check_dim(problem.psi_i.dim(), s.len())?;
    }
    let start_err = max_norm(&(&path.slices[0] - problem.psi_i.amplitudes()));
    if start_err > 1e-12 {
        return Err(Error::EndpointMismatch(format!("first slice differs from psi_i by {start_err:e}")));
    }
    let end_norm = path.slices[n].norm_squared();
    if (end_norm - 1.0).abs() > 1e-10 {
        return Err(Error::EndpointMismatch(format!("final slice has squared norm {end_norm}")));
    }
    if problem.interior_normalization {
        for s in &path.slices[1..n] {
            let norm_sq = s.norm_squared();
            if (norm_sq - 1.0).abs() > 1e-10 {
                return Err(Error::NotNormalized { norm_sq, tol: 1e-10 });
            }
        }
    }
    Ok(())
}

/// Evaluation context shared by the objective and its gradient.
struct PathFunctional<'a> {
    problem: &'a PenalizedPathProblem,
    link: CMatrix,
    link_adj: CMatrix,
    /// `K^dag K - 1`, nonzero only for a non-unitary link.
    link_defect: Option<CMatrix>,
    /// `exp(-iH (t_k - t_start)/hbar)` for `k = 0..=N`, the co-rotating frame
    /// used by the preconditioner.
    frame: Vec<CMatrix>,
}

impl<'a> PathFunctional<'a> {
    fn new(problem: &'a PenalizedPathProblem) -> Result<Self> {
        let link = problem.link_operator()?;
        let link_adj = link.adjoint();
        let link_defect = match problem.link {
            LinkKernel::Exact => None,
            LinkKernel::Euler => {
                let n = link.nrows();
                Some(&link_adj * &link - CMatrix::identity(n, n))
            }
        };
        let spectrum = spectral_decompose(&problem.hamiltonian);
        let grid = &problem.grid;
        let frame = (0..=grid.steps())
            .map(|k| Ok(propagator_from_spectrum(&spectrum, grid.time(k) - grid.t_start())?.matrix))
            .collect::<Result<_>>()?;
        Ok(Self { problem, link, link_adj, link_defect, frame })
    }

    fn dynamical(&self, slices: &[CVector]) -> f64 {
        slices
            .windows(2)
            .map(|w| {
                let pushed = &self.link * &w[0];
                let mut term = -0.5 * (&w[1] - &pushed).norm_squared();
                if self.link_defect.is_some() {
                    term += 0.5 * (pushed.norm_squared() - w[0].norm_squared());
                }
                term
            })
            .sum()
    }

    fn penalty(&self, slices: &[CVector]) -> f64 {
        let p = &self.problem.penalty;
        if p.lambda == 0.0 {
            return 0.0;
        }
        p.lambda * self.problem.grid.dt() * slices[1..].iter().map(|s| p.measure.value(s)).sum::<f64>()
    }

    fn value(&self, slices: &[CVector]) -> f64 {
        self.dynamical(slices) - self.penalty(slices)
    }

    /// Real gradient with respect to the free slices `1..=N`, projected onto
    /// the sphere where the slice is constrained.
    fn gradient(&self, slices: &[CVector]) -> Vec<CVector> {
        let n = slices.len() - 1;
        let p = &self.problem.penalty;
        let weight = p.lambda * self.problem.grid.dt();
        (1..=n)
            .map(|k| {
                let mut g = &self.link * &slices[k - 1] - &slices[k];
                if k < n {
                    g += &self.link_adj * (&slices[k + 1] - &self.link * &slices[k]);
                    if let Some(defect) = &self.link_defect {
                        g += defect * &slices[k];
                    }
                }
                if weight > 0.0 {
                    g -= p.measure.gradient(&slices[k]) * C64::new(weight, 0.0);
                }
                if self.on_sphere(k, n) {
                    project_tangent(&slices[k], &g)
                } else {
                    g
                }
            })
            .collect()
    }

    fn on_sphere(&self, k: usize, n: usize) -> bool {
        k == n || self.problem.interior_normalization
    }

    fn retract(&self, slices: &[CVector], dir: &[CVector], step: f64) -> Vec<CVector> {
        let n = slices.len() - 1;
        let mut out = Vec::with_capacity(n + 1);
        out.push(slices[0].clone());
        for k in 1..=n {
            let moved = &slices[k] + &dir[k - 1] * C64::new(step, 0.0);
            out.push(if self.on_sphere(k, n) { moved.normalize() } else { moved });
        }
        out
    }
}

impl PathFunctional<'_> {
    /// Approximate inverse Hessian applied to a tangent gradient. In the
    /// co-rotating frame the coupling between neighbouring slices is the
    /// path Laplacian (pinned at slice 0, free at slice N), which is solved
    /// exactly with the Thomas algorithm.
    fn precondition(&self, slices: &[CVector], grad: &[CVector]) -> Vec<CVector> {
        let n = grad.len();
        let rhs: Vec<CVector> = grad.iter().enumerate().map(|(i, g)| self.frame[i + 1].ad_mul(g)).collect();
        solve_path_laplacian(&rhs)
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                let d = &self.frame[i + 1] * x;
                if self.on_sphere(i + 1, n) {
                    project_tangent(&slices[i + 1], &d)
                } else {
                    d
                }
            })
            .collect()
    }
}

/// Solves `L x = b` for the tridiagonal matrix with diagonal `(2, ..., 2, 1)`
/// and off-diagonals `-1`.
fn solve_path_laplacian(rhs: &[CVector]) -> Vec<CVector> {
    let n = rhs.len();
    let diag = |k: usize| if k + 1 == n { 1.0 } else { 2.0 };
    let mut c_prime = vec![0.0; n];
    let mut x: Vec<CVector> = Vec::with_capacity(n);
    c_prime[0] = -1.0 / diag(0);
    x.push(rhs[0].unscale(diag(0)));
    for k in 1..n {
        let denom = diag(k) + c_prime[k - 1];
        c_prime[k] = -1.0 / denom;
        let next = (&rhs[k] + &x[k - 1]).unscale(denom);
        x.push(next);
    }
    for k in (0..n - 1).rev() {
        let next = x[k + 1].clone();
        x[k] -= next * C64::new(c_prime[k], 0.0);
    }
    x
}

/// Log-magnitude of the single-path integrand of the penalized functional.
pub fn penalized_log_magnitude(problem: &PenalizedPathProblem, path: &HilbertPath) -> Result<f64> {
    problem.validate()?;
    check_path(problem, path)?;
    Ok(PathFunctional::new(problem)?.value(&path.slices))
}

/// Outcome classification written by the collapse experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseReport {
    pub lambda: f64,
    pub measure: String,
    pub final_state: Vec<C64>,
    pub nearest_pointer_index: usize,
    pub fidelity_to_pointer: f64,
    /// Set when another pointer state is within [`TIE_TOL`] in fidelity.
    pub pointer_tie: bool,
    /// `Q(Phi_k)` for `k = 0..=N`.
    pub q_trajectory: Vec<f64>,
    pub log_magnitude: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenalizedOutcome {
    pub final_state: StateVector,
    /// Slices `Phi_1 .. Phi_{N-1}`.
    pub interior_path: Vec<CVector>,
    pub log_magnitude: f64,
    pub report: CollapseReport,
    /// Log-magnitude after every accepted step.
    pub history: Vec<f64>,
}

fn complex_noise(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn starting_path(problem: &PenalizedPathProblem, seed: u64) -> Result<Vec<CVector>> {
    let mut slices = HilbertPath::schrodinger(&problem.psi_i, &problem.hamiltonian, &problem.grid)?.slices;
    let n = slices.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = problem.psi_i.dim();
    for (k, s) in slices.iter_mut().enumerate().skip(1) {
        *s += complex_noise(&mut rng, dim) * C64::new(problem.init_noise, 0.0);
        if k == n || problem.interior_normalization {
            *s = s.clone().normalize();
        }
    }
    Ok(slices)
}

fn real_inner(a: &[CVector], b: &[CVector]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dotc(y).re).sum()
}

const STALL_ULPS: f64 = 8.0;
const STALL_STEPS: usize = 10;

/// Jointly ascends the log-magnitude over the interior slices and the final
/// state: preconditioned Riemannian conjugate gradients (Polak-Ribiere) with
/// a backtracking (halving) line search and renormalization retraction per
/// slice.
///
/// The starting path is the Schrodinger path plus seeded noise of amplitude
/// `problem.init_noise`. The run stops when the gradient falls below
/// `grad_tol` or when ten consecutive steps gain no more than a few ulps of
/// the objective; both count as converged.
pub fn optimize_penalized(problem: &PenalizedPathProblem, cfg: &OptimizerConfig) -> Result<PenalizedOutcome> {
    problem.validate()?;
    cfg.validate()?;
    let functional = PathFunctional::new(problem)?;
    let grad_size = |g: &[CVector]| g.iter().map(max_norm).fold(0.0, f64::max);

    let mut slices = starting_path(problem, cfg.seed)?;
    let mut value = functional.value(&slices);
    let mut grad = functional.gradient(&slices);
    let mut precond = functional.precondition(&slices, &grad);
    let mut dir = precond.clone();
    let mut history = vec![value];
    let mut iterations = 0;
    let mut converged = false;
    let mut flat_steps = 0;

    while iterations < cfg.max_iters {
        if grad_size(&grad) <= cfg.grad_tol {
            converged = true;
            break;
        }
        let mut slope = real_inner(&grad, &dir);
        let mut restarted = false;
        if slope <= 0.0 {
            dir = precond.clone();
            slope = real_inner(&grad, &dir);
            restarted = true;
        }
        let mut trial = cfg.step_size;
        let mut accepted = None;
        while trial > 1e-20 {
            let candidate = functional.retract(&slices, &dir, trial);
            let cand_value = functional.value(&candidate);
            if cand_value >= value + 1e-4 * trial * slope {
                accepted = Some((candidate, cand_value));
                break;
            }
            trial *= 0.5;
        }
        let Some((next, next_value)) = accepted else {
            if restarted {
                break;
            }
            dir = precond.clone();
            continue;
        };

        let gain = next_value - value;
        slices = next;
        value = next_value;
        history.push(value);
        iterations += 1;
        if gain <= STALL_ULPS * f64::EPSILON * (1.0 + value.abs()) {
            flat_steps += 1;
            if flat_steps >= STALL_STEPS {
                converged = true;
                break;
            }
        } else {
            flat_steps = 0;
        }

        let n = slices.len() - 1;
        let transport = |v: &[CVector]| -> Vec<CVector> {
            v.iter()
                .enumerate()
                .map(|(i, d)| if functional.on_sphere(i + 1, n) { project_tangent(&slices[i + 1], d) } else { d.clone() })
                .collect()
        };
        let new_grad = functional.gradient(&slices);
        let new_precond = functional.precondition(&slices, &new_grad);
        let old_precond = transport(&precond);
        let diff: Vec<CVector> = new_precond.iter().zip(&old_precond).map(|(a, b)| a - b).collect();
        let denom = real_inner(&grad, &precond);
        let beta = if denom > 0.0 { (real_inner(&new_grad, &diff) / denom).max(0.0) } else { 0.0 };
        let carried = transport(&dir);
        dir = new_precond.iter().zip(&carried).map(|(g, d)| g + d * C64::new(beta, 0.0)).collect();
        grad = new_grad;
        precond = new_precond;
    }
    if !converged {
        converged = grad_size(&grad) <= cfg.grad_tol;
    }

    let n = slices.len() - 1;
    let final_state = StateVector::normalized(slices[n].clone())?;
    let report = classify(problem, &slices, value, converged, iterations);
    Ok(PenalizedOutcome {
        final_state,
        interior_path: slices[1..n].to_vec(),
        log_magnitude: value,
        report,
        history,
    })
}

fn classify(
    problem: &PenalizedPathProblem,
    slices: &[CVector],
    log_magnitude: f64,
    converged: bool,
    iterations: usize,
) -> CollapseReport {
    let measure = &problem.penalty.measure;
    let final_amps = &slices[slices.len() - 1];
    let mut fidelities: Vec<(usize, f64)> = measure
        .pointer_basis()
        .iter()
        .map(|p| p.amplitudes().dotc(final_amps).norm_sqr())
        .enumerate()
        .collect();
    fidelities.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let (index, fidelity) = fidelities[0];
    let pointer_tie = fidelities.get(1).is_some_and(|s| fidelity - s.1 < TIE_TOL);
    CollapseReport {
        lambda: problem.penalty.lambda,
        measure: measure.name().to_string(),
        final_state: final_amps.iter().copied().collect(),
        nearest_pointer_index: index,
        fidelity_to_pointer: fidelity,
        pointer_tie,
        q_trajectory: slices.iter().map(|s| measure.value(&s.clone().normalize())).collect(),
        log_magnitude,
        converged,
        iterations,
    }
}

/// A qubit coupled to a two-state detector, the detector flipping when the
/// qubit is in `|1>`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementModel {
    pub hamiltonian: Hamiltonian,
    pub psi_i: StateVector,
    /// Product basis `|s d>` with index `2 s + d`.
    pub pointer_basis: Vec<StateVector>,
}

/// `H = coupling |1><1| (x) sigma_x` with the measurement-ready initial state
/// `(sqrt(p0) |0> + sqrt(1 - p0) |1>) (x) |0>`. A duration of
/// `pi / (2 coupling)` (with hbar = 1) completes the unitary premeasurement.
pub fn qubit_detector_model(p0: f64, coupling: f64) -> Result<MeasurementModel> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidParameter(format!("p0 must lie in [0, 1], got {p0}")));
    }
    if !coupling.is_finite() {
        return Err(Error::NonFinite("coupling"));
    }
    let mut h = CMatrix::zeros(4, 4);
    h[(2, 3)] = C64::new(coupling, 0.0);
    h[(3, 2)] = C64::new(coupling, 0.0);
    let psi_i = StateVector::new(CVector::from_vec(vec![
        C64::new(p0.sqrt(), 0.0),
        C64::new(0.0, 0.0),
        C64::new((1.0 - p0).sqrt(), 0.0),
        C64::new(0.0, 0.0),
    ]))?;
    Ok(MeasurementModel {
        hamiltonian: Hamiltonian::new(h)?,
        psi_i,
        pointer_basis: computational_basis(4)?,
    })
}
