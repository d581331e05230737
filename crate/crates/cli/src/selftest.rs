use std::f64::consts::{FRAC_1_SQRT_2, PI};

use hilbert_path::functional::z_closed_form;
use hilbert_path::hilbert::{evolve, random_hamiltonian, random_state, CVector, Hamiltonian, StateVector};
use hilbert_path::lattice::{
    analytic_propagator, chain_reduce_exact, monte_carlo_estimate, CoherentChainProblem, TimeGrid,
};
use hilbert_path::optimizer::{maximize_final_state, OptimizerConfig};
use hilbert_path::quantumness::{optimize_penalized, PenalizedPathProblem, PenaltyConfig, QuantumnessMeasure};
use hilbert_path::{Result, C64};

use crate::Command;

type Check = (&'static str, fn() -> Result<bool>);

fn zeval_identity() -> Result<bool> {
    let h = random_hamiltonian(4, 3, 1.0);
    let psi = random_state(4, 3);
    let psi_e = evolve(&h, &psi, 0.8)?;
    Ok((z_closed_form(&psi, &psi_e, &h, 0.8)?.abs() - 1.0).abs() < 1e-12)
}

fn zeval_orthogonal() -> Result<bool> {
    let h = Hamiltonian::zero(2)?;
    let z = z_closed_form(&StateVector::basis(2, 0)?, &StateVector::basis(2, 1)?, &h, 1.0)?;
    Ok((z.abs() - (-1.0f64).exp()).abs() < 1e-15)
}

fn zeval_antipodal() -> Result<bool> {
    let h = Hamiltonian::zero(2)?;
    let psi = StateVector::basis(2, 0)?;
    let z = z_closed_form(&psi, &psi.with_phase(PI), &h, 1.0)?;
    Ok((z.abs() - (-2.0f64).exp()).abs() < 1e-15)
}

fn lattice_single_slice() -> Result<bool> {
    let prob = CoherentChainProblem::new(C64::new(0.3, 0.1), C64::new(-0.2, 0.4), 0.9, TimeGrid::new(0.0, 1.0, 1)?, 1.0)?;
    let est = monte_carlo_estimate(&prob, 1000, 0)?;
    Ok(est.standard_error == 0.0 && (est.estimate - chain_reduce_exact(&prob)).norm() < 1e-15)
}

fn lattice_zero_energy() -> Result<bool> {
    let prob = CoherentChainProblem::new(C64::new(0.5, -0.2), C64::new(0.1, 0.7), 0.0, TimeGrid::new(0.0, 2.0, 7)?, 1.0)?;
    Ok((chain_reduce_exact(&prob) - analytic_propagator(&prob)).norm() < 1e-14)
}

fn optimize_one_dim() -> Result<bool> {
    let h = Hamiltonian::diagonal(&[0.7])?;
    let psi = StateVector::basis(1, 0)?;
    let out = maximize_final_state(&h, &psi, 1.5, &OptimizerConfig::default())?;
    let expected = C64::from_polar(1.0, -0.7 * 1.5);
    Ok(out.converged && (out.argmax_state.amplitudes()[0] - expected).norm() < 1e-10)
}

fn optimize_two_level() -> Result<bool> {
    let h = Hamiltonian::diagonal(&[0.0, 1.0])?;
    let psi = StateVector::from_slice(&[C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)])?;
    let out = maximize_final_state(&h, &psi, PI, &OptimizerConfig::default())?;
    let expected = CVector::from_vec(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]);
    Ok(out.converged && (out.argmax_state.amplitudes() - expected).norm() < 1e-8 && (out.objective - 1.0).abs() < 1e-12)
}

fn collapse_static_pointer() -> Result<bool> {
    let pointer = StateVector::basis(4, 2)?;
    let mut ok = true;
    for lambda in [0.0, 3.0, 50.0] {
        let measure = QuantumnessMeasure::computational_pointers(4)?;
        let mut p = PenalizedPathProblem::new(
            pointer.clone(),
            TimeGrid::new(0.0, 1.0, 10)?,
            Hamiltonian::zero(4)?,
            PenaltyConfig::new(lambda, measure)?,
        )?;
        p.init_noise = 0.0;
        let out = optimize_penalized(&p, &OptimizerConfig::default())?;
        ok &= out.final_state == pointer && out.log_magnitude == 0.0 && out.report.nearest_pointer_index == 2;
    }
    Ok(ok)
}

fn checks(command: Command) -> &'static [Check] {
    match command {
        Command::Zeval => &[
            ("identity case has |Z| = 1", zeval_identity),
            ("orthogonal case has |Z| = 1/e", zeval_orthogonal),
            ("antipodal case has |Z| = 1/e^2", zeval_antipodal),
        ],
        Command::Lattice => &[
            ("single slice is exact with zero standard error", lattice_single_slice),
            ("zero energy chain matches the propagator", lattice_zero_energy),
        ],
        Command::Optimize => &[
            ("one-dimensional argmax is the phase-rotated state", optimize_one_dim),
            ("two-level pi rotation", optimize_two_level),
        ],
        Command::Collapse => &[("pointer state at rest stays put", collapse_static_pointer)],
    }
}

/// Runs the checks for `command`, printing one line per check. Returns
/// whether all passed.
pub fn run(command: Command) -> bool {
    let mut all = true;
    for (name, check) in checks(command) {
        let passed = matches!(check(), Ok(true));
        all &= passed;
        println!("selftest {}: {} {name}", command.name(), if passed { "PASS" } else { "FAIL" });
    }
    all
}
