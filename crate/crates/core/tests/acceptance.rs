use std::process::ExitCode;
use std::time::{Duration, Instant};

use hilbert_path::functional::{basis_invariance_check, z_closed_form, z_mode_product_for, Z_ABS_MIN};
use hilbert_path::hilbert::{evolve, random_hamiltonian, random_state, random_unitary, CVector, StateVector};
use hilbert_path::lattice::{
    chain_reduce_exact, convergence_study, loglog_slope, monte_carlo_estimate, CoherentChainProblem, TimeGrid,
};
use hilbert_path::optimizer::{ambient_objective, euclidean_gradient, maximize_final_state, OptimizerConfig};
use hilbert_path::quantumness::{
    optimize_penalized, qubit_detector_model, PenalizedPathProblem, PenaltyConfig, QuantumnessMeasure,
};
use hilbert_path::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..10_000u64 {
        let dim = [2, 4, 8, 16][(i % 4) as usize];
        let h = random_hamiltonian(dim, rng.random(), rng.random_range(0.1..5.0));
        let psi_i = random_state(dim, rng.random());
        let psi_e = random_state(dim, rng.random());
        let z = z_closed_form(&psi_i, &psi_e, &h, rng.random_range(-10.0..10.0)).unwrap().abs();
        lo = lo.min(z);
        hi = hi.max(z);
    }
    check(
        lo >= Z_ABS_MIN - 1e-12 && hi <= 1.0 + 1e-12,
        format!("10000 instances, |Z| in [{lo:.6}, {hi:.6}]"),
    )
}

fn maximizer() -> Outcome {
    let worst = (1..=16usize)
        .into_par_iter()
        .flat_map(|dim| (0..100u64).into_par_iter().map(move |seed| (dim, seed)))
        .map(|(dim, seed)| {
            let s = 1000 * dim as u64 + seed;
            let h = random_hamiltonian(dim, s, 1.0);
            let psi_i = random_state(dim, s + 500);
            let out = maximize_final_state(&h, &psi_i, 1.3, &OptimizerConfig { seed: s, ..Default::default() }).unwrap();
            out.phase_alignment.min(out.objective)
        })
        .reduce(|| 1.0, f64::min);
    check(
        worst >= 1.0 - 1e-8,
        format!("1600 runs over dims 1..=16, worst min(Re overlap, objective) = {worst:.12}"),
    )
}

fn factorization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let dim = rng.random_range(1..=16);
        let h = random_hamiltonian(dim, rng.random(), rng.random_range(0.1..5.0));
        let psi_i = random_state(dim, rng.random());
        let psi_e = random_state(dim, rng.random());
        let t = rng.random_range(-10.0..10.0);
        let closed = z_closed_form(&psi_i, &psi_e, &h, t).unwrap();
        let product = z_mode_product_for(&psi_i, &psi_e, &h, t).unwrap();
        worst = worst.max((closed.z - product.z).norm());
    }
    check(worst <= 1e-10, format!("1000 instances, max |closed - product| = {worst:.3e}"))
}

fn basis_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for dim in 1..=16 {
        for _ in 0..100 {
            let h = random_hamiltonian(dim, rng.random(), 1.0);
            let psi_i = random_state(dim, rng.random());
            let psi_e = random_state(dim, rng.random());
            let u = random_unitary(dim, rng.random());
            let t = rng.random_range(-5.0..5.0);
            worst = worst.max(basis_invariance_check(&psi_i, &psi_e, &h, t, &u).unwrap());
        }
    }
    check(worst <= 1e-10, format!("100 unitaries per dim 1..=16, max |dZ| = {worst:.3e}"))
}

fn lattice_convergence() -> Outcome {
    let steps = [10, 100, 1000, 10_000];
    let boundary = [
        (C64::new(1.0, 0.0), C64::new(0.0, 1.0)),
        (C64::new(0.6, -0.8), C64::new(-0.6, -0.8)),
        (C64::new(0.3, 0.2), C64::new(-0.5, 0.4)),
        (C64::from_polar(1.0, 2.0), C64::from_polar(1.0, 2.0)),
    ];
    let mut worst_error = 0.0f64;
    let mut worst_slope_dev = 0.0f64;
    let mut slopes = Vec::new();
    for &(z0, zf) in &boundary {
        for &(energy, t, hbar) in &[(1.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (0.5, 1.0, 1.0), (2.0, 0.5, 1.0), (0.7, 1.0, 0.7)] {
            let grid = TimeGrid::new(0.0, t, steps[0]).unwrap();
            let prob = CoherentChainProblem::new(z0, zf, energy, grid, hbar).unwrap();
            let rows = convergence_study(&prob, &steps).unwrap();
            let slope = loglog_slope(&rows).unwrap_or(f64::NAN);
            worst_error = worst_error.max(rows[rows.len() - 1].abs_error);
            worst_slope_dev = worst_slope_dev.max((slope + 1.0).abs());
            slopes.push(slope);
        }
    }
    let (lo, hi) = slopes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    check(
        worst_error <= 1e-3 && worst_slope_dev <= 0.15,
        format!("{} instances, max error at N=1e4 = {worst_error:.3e}, slopes in [{lo:.4}, {hi:.4}]", slopes.len()),
    )
}

fn monte_carlo() -> Outcome {
    let cases = [
        (2, C64::new(0.4, 0.3), C64::new(-0.2, 0.5), 1.0),
        (3, C64::new(0.5, -0.1), C64::new(0.3, 0.6), 1.0),
    ];
    let mut parts = Vec::new();
    let mut passed = true;
    for &(steps, z0, zf, energy) in &cases {
        let grid = TimeGrid::new(0.0, 1.0, steps).unwrap();
        let prob = CoherentChainProblem::new(z0, zf, energy, grid, 1.0).unwrap();
        let exact = chain_reduce_exact(&prob);
        let within = (0..30u64)
            .into_par_iter()
            .filter(|&seed| monte_carlo_estimate(&prob, 100_000, seed).unwrap().z_score(exact) <= 3.0)
            .count();
        passed &= within >= 29;
        parts.push(format!("N={steps}: {within}/30 within 3 SE"));
    }
    check(passed, parts.join(", "))
}

fn relative_error(fd: &CVector, analytic: &CVector) -> f64 {
    (fd - analytic).norm() / analytic.norm()
}

fn central_difference(f: impl Fn(&CVector) -> f64, x: &CVector) -> CVector {
    let h = 1e-6;
    CVector::from_fn(x.len(), |k, _| {
        let shift = |d: C64| {
            let mut p = x.clone();
            p[k] += d;
            f(&p)
        };
        let re = (shift(C64::new(h, 0.0)) - shift(C64::new(-h, 0.0))) / (2.0 * h);
        let im = (shift(C64::new(0.0, h)) - shift(C64::new(0.0, -h))) / (2.0 * h);
        C64::new(re, im)
    })
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut z_err, mut ptr_err, mut ent_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let dim: usize = rng.random_range(1..=8);
        let h = random_hamiltonian(dim, rng.random(), 1.0);
        let psi_i = random_state(dim, rng.random());
        let psi_e = random_state(dim, rng.random());
        let t = rng.random_range(-3.0..3.0);
        let target = evolve(&h, &psi_i, t).unwrap().into_amplitudes();
        let analytic = euclidean_gradient(&psi_e, &h, &psi_i, t).unwrap() * C64::new(2.0, 0.0);
        let fd = central_difference(|x| ambient_objective(x, &target), psi_e.amplitudes());
        z_err = z_err.max(relative_error(&fd, &analytic));

        let u = random_unitary(dim, rng.random());
        let basis = (0..dim).map(|k| StateVector::from_slice(u.column(k).as_slice()).unwrap()).collect();
        let measure = QuantumnessMeasure::pointer_deviation(basis).unwrap();
        let x = psi_e.amplitudes();
        ptr_err = ptr_err.max(relative_error(&central_difference(|p| measure.value(p), x), &measure.gradient(x)));

        let d_a = rng.random_range(2..=3);
        let d_b = rng.random_range(1..=8 / d_a);
        let entropy = QuantumnessMeasure::linear_entropy(d_a, d_b).unwrap();
        let y = random_state(d_a * d_b, rng.random()).into_amplitudes();
        ent_err = ent_err.max(relative_error(&central_difference(|p| entropy.value(p), &y), &entropy.gradient(&y)));
    }
    let worst = z_err.max(ptr_err).max(ent_err);
    check(
        worst <= 1e-6,
        format!("100 points each, max relative error |Z| {z_err:.2e}, pointer {ptr_err:.2e}, entropy {ent_err:.2e}"),
    )
}

fn collapse() -> Outcome {
    let h = random_hamiltonian(4, 12, 1.0);
    let psi = random_state(4, 12);
    let grid = TimeGrid::new(0.0, 1.0, 200).unwrap();
    let free = PenalizedPathProblem::new(
        psi.clone(),
        grid,
        h.clone(),
        PenaltyConfig::new(0.0, QuantumnessMeasure::computational_pointers(4).unwrap()).unwrap(),
    )
    .unwrap();
    let out = optimize_penalized(&free, &OptimizerConfig { seed: 4, grad_tol: 1e-9, max_iters: 20_000, ..Default::default() })
        .unwrap();
    let free_fidelity = out.final_state.fidelity(&evolve(&h, &psi, 1.0).unwrap()).unwrap();

    let model = qubit_detector_model(0.6, std::f64::consts::FRAC_PI_2).unwrap();
    let lambda = 20.0;
    let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
    let measure = QuantumnessMeasure::pointer_deviation(model.pointer_basis.clone()).unwrap();
    let penalized = PenalizedPathProblem::new(model.psi_i, grid, model.hamiltonian, PenaltyConfig::new(lambda, measure).unwrap())
        .unwrap();
    let out = optimize_penalized(&penalized, &OptimizerConfig { seed: 1, grad_tol: 1e-8, max_iters: 20_000, ..Default::default() })
        .unwrap();
    let report = out.report;
    let q = &report.q_trajectory;
    let trajectory: Vec<String> = [0, 1, 2, 5, 10, 25, 50, q.len() - 1].iter().map(|&k| format!("{k}:{:.2e}", q[k])).collect();
    check(
        free_fidelity >= 1.0 - 1e-6 && report.fidelity_to_pointer >= 1.0 - 1e-3 && q.len() == 101,
        format!(
            "lambda=0 fidelity {free_fidelity:.10}; lambda*T={lambda} pointer {} fidelity {:.10}, Q trajectory [{}]",
            report.nearest_pointer_index,
            report.fidelity_to_pointer,
            trajectory.join(" ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 bounds", Duration::from_secs(5), bounds),
        ("2 maximizer", Duration::from_secs(30), maximizer),
        ("3 factorization", Duration::from_secs(2), factorization),
        ("4 basis invariance", Duration::from_secs(5), basis_invariance),
        ("5 lattice convergence", Duration::from_secs(10), lattice_convergence),
        ("6 monte carlo", Duration::from_secs(60), monte_carlo),
        ("7 gradients", Duration::from_secs(5), gradients),
        ("8 collapse", Duration::from_secs(60), collapse),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let passed = outcome.passed && elapsed <= budget;
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {name}: {} ({:.2} s of {} s) {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            outcome.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
