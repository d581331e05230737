//! Maximization of `|Z(psi_i -> psi_e)|` over normalized final states.
//!
//! `|Z| = exp(Re <psi_e|U psi_i> - 1)` depends on the global phase of
//! `psi_e`, so the search runs on the full unit sphere of `C^d` with the real
//! inner product `Re <a|b>` and renormalization as the retraction.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, evolve, random_state, CVector, Hamiltonian, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// Initial trial step of the backtracking line search.
    pub step_size: f64,
    pub max_iters: usize,
    /// Convergence threshold on the max-norm of the tangent gradient.
    pub grad_tol: f64,
    /// Seed of the random starting point.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { step_size: 1.0, max_iters: 10_000, grad_tol: 1e-10, seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidParameter(format!("step_size must be positive, got {}", self.step_size)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub argmax_state: StateVector,
    /// `|Z|` at `argmax_state`.
    pub objective: f64,
    /// Accepted ascent steps.
    pub iterations: usize,
    pub converged: bool,
    /// `|<argmax|U psi_i>|^2`.
    pub fidelity_vs_schrodinger: f64,
    /// `Re <argmax|U psi_i>`; equals one only when the global phase matches too.
    pub phase_alignment: f64,
    /// Objective after every accepted step, starting with the initial guess.
    pub objective_history: Vec<f64>,
}

/// `|Z| = exp(Re <psi_e|U psi_i> - 1)`.
pub fn objective(psi_e: &StateVector, h: &Hamiltonian, psi_i: &StateVector, t: f64) -> Result<f64> {
    check_dim(psi_i.dim(), psi_e.dim())?;
    let target = evolve(h, psi_i, t)?;
    Ok(ambient_objective(psi_e.amplitudes(), target.amplitudes()))
}

/// The objective extended off the sphere: `exp(Re <x|target> - 1)`.
pub fn ambient_objective(x: &CVector, target: &CVector) -> f64 {
    (x.dotc(target).re - 1.0).exp()
}

/// Wirtinger derivative of the objective with respect to `conj(psi_e)`:
/// `exp(Re <psi_e|U psi_i> - 1) * U psi_i / 2`.
pub fn euclidean_gradient(psi_e: &StateVector, h: &Hamiltonian, psi_i: &StateVector, t: f64) -> Result<CVector> {
    check_dim(psi_i.dim(), psi_e.dim())?;
    let target = evolve(h, psi_i, t)?;
    Ok(wirtinger_gradient(psi_e.amplitudes(), target.amplitudes()))
}

fn wirtinger_gradient(x: &CVector, target: &CVector) -> CVector {
    target * C64::new(0.5 * ambient_objective(x, target), 0.0)
}

/// Projection of an ambient real gradient onto the tangent space of the
/// sphere at `x`: `g - Re<x|g> x`.
pub fn project_tangent(x: &CVector, g: &CVector) -> CVector {
    g - x * C64::new(x.dotc(g).re, 0.0)
}

/// Riemannian gradient of the objective at `psi_e`. The real gradient is
/// twice the Wirtinger derivative.
pub fn tangent_gradient(psi_e: &StateVector, h: &Hamiltonian, psi_i: &StateVector, t: f64) -> Result<CVector> {
    let g = euclidean_gradient(psi_e, h, psi_i, t)? * C64::new(2.0, 0.0);
    Ok(project_tangent(psi_e.amplitudes(), &g))
}

pub fn max_norm(v: &CVector) -> f64 {
    v.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

/// Projected gradient ascent with backtracking (halving) from a seeded
/// uniformly random final state.
pub fn maximize_final_state(
    h: &Hamiltonian,
    psi_i: &StateVector,
    t: f64,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let target = evolve(h, psi_i, t)?;
    let target = target.amplitudes();

    let mut x = random_state(psi_i.dim(), cfg.seed).into_amplitudes();
    let mut value = ambient_objective(&x, target);
    let mut history = vec![value];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let grad = project_tangent(&x, &(wirtinger_gradient(&x, target) * C64::new(2.0, 0.0)));
        if max_norm(&grad) <= cfg.grad_tol {
            converged = true;
            break;
        }
        let mut step = cfg.step_size;
        let mut accepted = None;
        while step > 1e-18 {
            let candidate = (&x + &grad * C64::new(step, 0.0)).normalize();
            let cand_value = ambient_objective(&candidate, target);
            if cand_value >= value {
                accepted = Some((candidate, cand_value));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_value)) = accepted else {
            break;
        };
        x = next;
        value = next_value;
        history.push(value);
        iterations += 1;
    }
    if !converged {
        let grad = project_tangent(&x, &(wirtinger_gradient(&x, target) * C64::new(2.0, 0.0)));
        converged = max_norm(&grad) <= cfg.grad_tol;
    }

    let overlap = x.dotc(target);
    Ok(OptimizationResult {
        argmax_state: StateVector::normalized(x)?,
        objective: value,
        iterations,
        converged,
        fidelity_vs_schrodinger: overlap.norm_sqr(),
        phase_alignment: overlap.re,
        objective_history: history,
    })
}
