use hilbert_path::functional::{basis_invariance_check, z_closed_form, z_mode_factor, z_mode_product_for, Z_ABS_MIN};
use hilbert_path::hilbert::{
    evolve, max_abs, propagator, random_hamiltonian, random_state, random_unitary, spectral_decompose, StateVector,
};
use hilbert_path::lattice::{analytic_propagator, monte_carlo_estimate_with, CoherentChainProblem, MonteCarloConfig, TimeGrid};
use hilbert_path::optimizer::{maximize_final_state, OptimizerConfig};
use hilbert_path::quantumness::{
    penalized_log_magnitude, q_linear_entropy, q_pointer_deviation, HilbertPath, PenalizedPathProblem, PenaltyConfig,
    QuantumnessMeasure,
};
use hilbert_path::C64;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = usize> {
    1usize..=16
}

fn rotate(u: &hilbert_path::hilbert::CMatrix, s: &StateVector) -> StateVector {
    StateVector::normalized(u * s.amplitudes()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn propagator_group_property(dim in dims(), seed in any::<u64>(), t1 in -3.0..3.0f64, t2 in -3.0..3.0f64) {
        let h = random_hamiltonian(dim, seed, 1.0);
        let whole = propagator(&h, t1 + t2).unwrap().matrix;
        let split = propagator(&h, t1).unwrap().matrix * propagator(&h, t2).unwrap().matrix;
        prop_assert!(max_abs(&(whole - split)) <= 1e-9);
    }

    #[test]
    fn spectral_reconstruction(dim in dims(), seed in any::<u64>()) {
        let h = random_hamiltonian(dim, seed, 2.0);
        let spectrum = spectral_decompose(&h);
        prop_assert!(spectrum.energies.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(max_abs(&(spectrum.reconstruct() - h.matrix())) <= 1e-10);
        let again = spectral_decompose(&h);
        prop_assert_eq!(again, spectrum);
    }

    #[test]
    fn z_bounds_and_factorization(dim in dims(), seed in any::<u64>(), t in -5.0..5.0f64) {
        let h = random_hamiltonian(dim, seed, 1.0);
        let psi_i = random_state(dim, seed ^ 1);
        let psi_e = random_state(dim, seed ^ 2);
        let closed = z_closed_form(&psi_i, &psi_e, &h, t).unwrap();
        prop_assert!(closed.abs() >= Z_ABS_MIN - 1e-12 && closed.abs() <= 1.0 + 1e-12);
        let product = z_mode_product_for(&psi_i, &psi_e, &h, t).unwrap();
        prop_assert!((closed.z - product.z).norm() <= 1e-10);
    }

    #[test]
    fn z_basis_invariance(dim in dims(), seed in any::<u64>(), t in -5.0..5.0f64) {
        let h = random_hamiltonian(dim, seed, 1.0);
        let psi_i = random_state(dim, seed ^ 3);
        let psi_e = random_state(dim, seed ^ 4);
        let u = random_unitary(dim, seed ^ 5);
        prop_assert!(basis_invariance_check(&psi_i, &psi_e, &h, t, &u).unwrap() <= 1e-10);
    }

    #[test]
    fn evolved_state_maximizes_z(dim in dims(), seed in any::<u64>(), t in -5.0..5.0f64, phase in 0.1..6.0f64) {
        let h = random_hamiltonian(dim, seed, 1.0);
        let psi_i = random_state(dim, seed ^ 6);
        let evolved = evolve(&h, &psi_i, t).unwrap();
        let at_max = z_closed_form(&psi_i, &evolved, &h, t).unwrap().abs();
        prop_assert!((at_max - 1.0).abs() <= 1e-12);
        let rephased = z_closed_form(&psi_i, &evolved.with_phase(phase), &h, t).unwrap().abs();
        prop_assert!(rephased < at_max);
    }

    #[test]
    fn analytic_propagator_matches_mode_factor(
        seed in any::<u64>(),
        dim in 1usize..=8,
        energy in -1.0..1.0f64,
        t in 0.1..2.0f64,
        hbar in 0.5..2.0f64,
    ) {
        let a_i = random_state(dim, seed).amplitudes()[0];
        let a_e = random_state(dim, seed ^ 7).amplitudes()[0];
        let grid = TimeGrid::new(0.0, t, 1).unwrap();
        let prob = CoherentChainProblem::new(a_i, a_e, energy, grid, hbar).unwrap();
        let lattice = analytic_propagator(&prob);
        let mode = z_mode_factor(a_i, a_e, energy, t, hbar);
        prop_assert!((lattice - mode).norm() <= 1e-15);
    }

    #[test]
    fn pointer_deviation_is_covariant(dim in 1usize..=8, seed in any::<u64>()) {
        let psi = random_state(dim, seed);
        let u = random_unitary(dim, seed ^ 8);
        let basis: Vec<StateVector> = (0..dim).map(|k| StateVector::basis(dim, k).unwrap()).collect();
        let rotated_basis: Vec<StateVector> = basis.iter().map(|b| rotate(&u, b)).collect();
        let q = q_pointer_deviation(&psi, &basis).unwrap();
        let q_rot = q_pointer_deviation(&rotate(&u, &psi), &rotated_basis).unwrap();
        prop_assert!((q - q_rot).abs() <= 1e-12);
        prop_assert!((-1e-15..=1.0).contains(&q));
    }

    #[test]
    fn linear_entropy_is_local_unitary_invariant(d_a in 1usize..=4, d_b in 1usize..=4, seed in any::<u64>()) {
        let psi = random_state(d_a * d_b, seed);
        let u_a = random_unitary(d_a, seed ^ 9);
        let u_b = random_unitary(d_b, seed ^ 10);
        let local = u_a.kronecker(&u_b);
        let q = q_linear_entropy(&psi, d_a, d_b).unwrap();
        let q_rot = q_linear_entropy(&rotate(&local, &psi), d_a, d_b).unwrap();
        prop_assert!((q - q_rot).abs() <= 1e-12);
        prop_assert!(q >= -1e-15 && q <= 1.0 - 1.0 / d_a.min(d_b) as f64 + 1e-12);
    }

    #[test]
    fn penalty_is_monotone_in_lambda(seed in any::<u64>(), lo in 0.0..5.0f64, gap in 0.0..5.0f64) {
        let dim = 4;
        let h = random_hamiltonian(dim, seed, 1.0);
        let psi_i = random_state(dim, seed ^ 11);
        let grid = TimeGrid::new(0.0, 1.0, 12).unwrap();
        let path = HilbertPath::schrodinger(&psi_i, &h, &grid).unwrap();
        let measure = QuantumnessMeasure::computational_pointers(dim).unwrap();
        let value = |lambda: f64| {
            let p = PenalizedPathProblem::new(psi_i.clone(), grid, h.clone(), PenaltyConfig::new(lambda, measure.clone()).unwrap()).unwrap();
            penalized_log_magnitude(&p, &path).unwrap()
        };
        prop_assert!(value(lo + gap) <= value(lo));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evolution_preserves_norm(dim in dims(), seed in any::<u64>(), t in -10.0..10.0f64) {
        let h = random_hamiltonian(dim, seed, 1.0);
        let psi = random_state(dim, seed.wrapping_add(1));
        let out = evolve(&h, &psi, t).unwrap();
        prop_assert!((out.amplitudes().norm_squared() - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn optimizer_ascends_to_evolved_state(dim in 1usize..=16, seed in any::<u64>(), t in -3.0..3.0f64) {
        let h = random_hamiltonian(dim, seed, 1.0);
        let psi_i = random_state(dim, seed ^ 12);
        let out = maximize_final_state(&h, &psi_i, t, &OptimizerConfig { seed, ..Default::default() }).unwrap();
        prop_assert!(out.objective_history.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(out.converged);
        prop_assert!(out.phase_alignment >= 1.0 - 1e-8);
        prop_assert!(out.objective >= Z_ABS_MIN - 1e-12 && out.objective <= 1.0 + 1e-12);
    }

    #[test]
    fn monte_carlo_is_deterministic(seed in any::<u64>(), substreams in 1usize..=4) {
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let prob = CoherentChainProblem::new(C64::new(0.3, 0.2), C64::new(-0.1, 0.5), 0.7, grid, 1.0).unwrap();
        let cfg = MonteCarloConfig { samples: 2000, seed, substreams };
        let a = monte_carlo_estimate_with(&prob, &cfg).unwrap();
        let b = monte_carlo_estimate_with(&prob, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
