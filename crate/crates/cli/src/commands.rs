use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use hilbert_path::functional::z_closed_form;
use hilbert_path::lattice::{
    convergence_study, format_f64, monte_carlo_estimate_with, write_convergence_csv, CoherentChainProblem,
    MonteCarloConfig, TimeGrid,
};
use hilbert_path::optimizer::{maximize_final_state, OptimizerConfig};
use hilbert_path::quantumness::{optimize_penalized, CollapseReport, PenalizedPathProblem, PenaltyConfig};
use hilbert_path::C64;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{CollapseConfig, LatticeConfig, OptimizeConfig, ZevalConfig};
use crate::output::{emit, to_json};

pub enum Failure {
    Validation(String),
    Io(io::Error),
}

impl From<hilbert_path::Error> for Failure {
    fn from(e: hilbert_path::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

pub enum Status {
    Done,
    NotConverged,
}

pub struct Run<'a> {
    pub config: &'a Path,
    pub seed: Option<u64>,
    pub out: Option<&'a Path>,
}

impl Run<'_> {
    fn load<T: DeserializeOwned>(&self) -> Result<T, Failure> {
        let text = std::fs::read_to_string(self.config)
            .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", self.config.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", self.config.display())))
    }

    fn base_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn optimizer(&self, cfg: OptimizerConfig) -> OptimizerConfig {
        OptimizerConfig { seed: self.seed.unwrap_or(cfg.seed), ..cfg }
    }
}

#[derive(Serialize)]
struct ZevalOutput {
    z_re: f64,
    z_im: f64,
    abs_z: f64,
    overlap_re: f64,
    overlap_im: f64,
}

pub fn zeval(run: &Run) -> Result<Status, Failure> {
    let cfg: ZevalConfig = run.load()?;
    let seed = run.base_seed();
    let h = cfg.hamiltonian.build(seed)?;
    let psi_i = cfg.psi_i.build(&h, seed)?;
    let psi_e = cfg.psi_e.build(&h, seed.wrapping_add(1))?;
    let value = z_closed_form(&psi_i, &psi_e, &h, cfg.t_e - cfg.t_i)?;
    let out = ZevalOutput {
        z_re: value.z.re,
        z_im: value.z.im,
        abs_z: value.abs(),
        overlap_re: value.overlap.re,
        overlap_im: value.overlap.im,
    };
    emit(run.out, &to_json(&out)?)?;
    Ok(Status::Done)
}

#[derive(Serialize)]
struct MonteCarloRow {
    seed: u64,
    steps: usize,
    samples: usize,
    estimate: C64,
    standard_error: f64,
    exact: C64,
    z_score: f64,
}

pub fn lattice(run: &Run) -> Result<Status, Failure> {
    let cfg: LatticeConfig = run.load()?;
    let first = *cfg.steps.first().ok_or_else(|| Failure::Validation("steps is empty".into()))?;
    let grid = TimeGrid::new(cfg.t_start, cfg.t_end, first)?;
    let prob = CoherentChainProblem::new(cfg.z0(), cfg.zf(), cfg.energy, grid, cfg.hbar)?;
    let rows = convergence_study(&prob, &cfg.steps)?;

    let battery = match &cfg.monte_carlo {
        Some(mc) => {
            let mc_prob = prob.with_steps(mc.steps)?;
            let exact = hilbert_path::lattice::chain_reduce_exact(&mc_prob);
            let base = run.base_seed();
            let rows = (0..mc.seeds)
                .into_par_iter()
                .map(|i| {
                    let seed = base.wrapping_add(i);
                    let cfg = MonteCarloConfig { samples: mc.samples, seed, substreams: mc.substreams };
                    let est = monte_carlo_estimate_with(&mc_prob, &cfg)?;
                    Ok(MonteCarloRow {
                        seed,
                        steps: mc.steps,
                        samples: est.samples,
                        estimate: est.estimate,
                        standard_error: est.standard_error,
                        exact,
                        z_score: est.z_score(exact),
                    })
                })
                .collect::<hilbert_path::Result<Vec<_>>>()?;
            Some((mc.out.clone(), rows))
        }
        None => None,
    };

    let mut csv = Vec::new();
    write_convergence_csv(&rows, &mut csv)?;
    emit(run.out, &csv)?;
    if let Some((path, mut rows)) = battery {
        rows.sort_by_key(|r| r.seed);
        emit(Some(&path), &to_json(&rows)?)?;
    }
    Ok(Status::Done)
}

#[derive(Serialize)]
struct OptimizeOutput {
    argmax_state: Vec<C64>,
    objective: f64,
    iterations: usize,
    converged: bool,
    fidelity_vs_schrodinger: f64,
    phase_alignment: f64,
}

pub fn optimize(run: &Run) -> Result<Status, Failure> {
    let cfg: OptimizeConfig = run.load()?;
    let seed = run.base_seed();
    let h = cfg.hamiltonian.build(seed)?;
    let psi_i = cfg.psi_i.build(&h, seed)?;
    let result = maximize_final_state(&h, &psi_i, cfg.t_e - cfg.t_i, &run.optimizer(cfg.optimizer))?;
    let out = OptimizeOutput {
        argmax_state: result.argmax_state.amplitudes().iter().copied().collect(),
        objective: result.objective,
        iterations: result.iterations,
        converged: result.converged,
        fidelity_vs_schrodinger: result.fidelity_vs_schrodinger,
        phase_alignment: result.phase_alignment,
    };
    emit(run.out, &to_json(&out)?)?;
    Ok(if result.converged { Status::Done } else { Status::NotConverged })
}

#[derive(Serialize)]
struct CollapseOutput {
    reports: Vec<CollapseReport>,
}

pub fn collapse(run: &Run) -> Result<Status, Failure> {
    let cfg: CollapseConfig = run.load()?;
    let system = cfg.build(run.base_seed())?;
    let opt = run.optimizer(cfg.optimizer);
    opt.validate()?;

    let mut lambdas = cfg.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    let problems = lambdas
        .iter()
        .map(|&lambda| {
            let mut p = PenalizedPathProblem::new(
                system.psi_i.clone(),
                system.grid,
                system.hamiltonian.clone(),
                PenaltyConfig::new(lambda, system.measure.clone())?,
            )?;
            p.link = cfg.link;
            p.interior_normalization = cfg.interior_normalization;
            p.init_noise = cfg.init_noise;
            p.validate()?;
            Ok(p)
        })
        .collect::<hilbert_path::Result<Vec<_>>>()?;
    let reports = problems
        .par_iter()
        .map(|p| optimize_penalized(p, &opt).map(|o| o.report))
        .collect::<hilbert_path::Result<Vec<_>>>()?;

    if let Some(path) = &cfg.csv {
        emit(Some(path), sweep_csv(&reports).as_bytes())?;
    }
    let all_converged = reports.iter().all(|r| r.converged);
    emit(run.out, &to_json(&CollapseOutput { reports })?)?;
    Ok(if all_converged { Status::Done } else { Status::NotConverged })
}

fn sweep_csv(reports: &[CollapseReport]) -> String {
    let mut s = String::from("lambda,nearest_pointer_index,fidelity_to_pointer,pointer_tie,log_magnitude,converged,iterations\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            format_f64(r.lambda),
            r.nearest_pointer_index,
            format_f64(r.fidelity_to_pointer),
            r.pointer_tie,
            format_f64(r.log_magnitude),
            r.converged,
            r.iterations
        );
    }
    s
}

pub fn config_path(config: Option<PathBuf>) -> Result<PathBuf, Failure> {
    config.ok_or_else(|| Failure::Validation("--config is required unless --selftest is given".into()))
}
