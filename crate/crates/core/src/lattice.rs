//! Time-sliced coherent-state path integral for a single mode with
//! `H = E a^dag a`.
//!
//! The exponent of one slice, with `z_j` the lattice point at slice `j`, is
//!
//! ```text
//! (conj(z_{j+1}) - conj(z_j)) z_j / 2 - conj(z_{j+1}) (z_{j+1} - z_j) / 2 - (i dt / hbar) E conj(z_{j+1}) z_j
//! ```
//!
//! and the measure over interior points is `prod d^2 z_j / pi`. Three
//! evaluations are provided: exact sequential Gaussian integration of the
//! interior points ([`chain_reduce_exact`]), the continuum closed form
//! ([`analytic_propagator`]) and a Monte-Carlo estimate of the lattice
//! integral ([`monte_carlo_estimate`]).

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest slice count accepted by the Monte-Carlo estimator.
pub const MAX_MC_SLICES: usize = 6;
/// Smallest sample budget accepted by the Monte-Carlo estimator.
pub const MIN_MC_SAMPLES: usize = 1000;

/// Uniform grid on `[t_start, t_end]` with `steps` slices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!("t_end ({t_end}) must exceed t_start ({t_start})")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("at least one step is required".into()));
        }
        Ok(Self { t_start, t_end, steps })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.duration() / self.steps as f64
    }

    /// Time of slice `k`; slice `steps` is exactly `t_end`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt()
        }
    }

    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        Self::new(self.t_start, self.t_end, steps)
    }
}

/// Lattice points `z_0 ... z_N` of one mode. The endpoints are the boundary
/// values; interior points are unconstrained complex numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct PathLattice {
    grid: TimeGrid,
    points: Vec<C64>,
}

impl PathLattice {
    pub fn new(grid: TimeGrid, z0: C64, zf: C64, interior: &[C64]) -> Result<Self> {
        if interior.len() + 1 != grid.steps() {
            return Err(Error::DimensionMismatch { expected: grid.steps() - 1, found: interior.len() });
        }
        let mut points = Vec::with_capacity(grid.steps() + 1);
        points.push(z0);
        points.extend_from_slice(interior);
        points.push(zf);
        Ok(Self { grid, points })
    }

    /// All `N + 1` points including both endpoints.
    pub fn from_points(grid: TimeGrid, points: Vec<C64>) -> Result<Self> {
        if points.len() != grid.steps() + 1 {
            return Err(Error::DimensionMismatch { expected: grid.steps() + 1, found: points.len() });
        }
        Ok(Self { grid, points })
    }

    pub fn constant(grid: TimeGrid, z: C64) -> Self {
        Self { grid, points: vec![z; grid.steps() + 1] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn start(&self) -> C64 {
        self.points[0]
    }

    pub fn end(&self) -> C64 {
        self.points[self.grid.steps()]
    }
}

/// Boundary data of the coherent-state propagator `<z_f| e^{-iHt/hbar} |z_0>`
/// for `H = E a^dag a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentChainProblem {
    pub z0: C64,
    pub zf: C64,
    pub energy: f64,
    pub grid: TimeGrid,
    pub hbar: f64,
}

impl CoherentChainProblem {
    pub fn new(z0: C64, zf: C64, energy: f64, grid: TimeGrid, hbar: f64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(Error::NonFinite("energy"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter(format!("hbar must be positive and finite, got {hbar}")));
        }
        if ![z0.re, z0.im, zf.re, zf.im].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("boundary values"));
        }
        Ok(Self { z0, zf, energy, grid, hbar })
    }

    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        Ok(Self { grid: self.grid.with_steps(steps)?, ..*self })
    }

    /// Per-slice coupling `1 - i E dt / hbar`.
    pub fn link_coupling(&self) -> C64 {
        C64::new(1.0, -self.energy * self.grid.dt() / self.hbar)
    }
}

/// The exponent of the lattice integrand (already divided by hbar).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionValue(pub C64);

impl ActionValue {
    pub fn exp(self) -> C64 {
        self.0.exp()
    }
}

/// Sum of the slice exponents along `path`, with the normal-ordered symbol
/// `H(conj(z_{j+1}), z_j) = E conj(z_{j+1}) z_j`.
pub fn discrete_action(path: &PathLattice, energy: f64, hbar: f64) -> ActionValue {
    let dt = path.grid.dt();
    let h_weight = C64::new(0.0, dt / hbar);
    let total = path
        .points
        .windows(2)
        .map(|w| {
            let (z, z_next) = (w[0], w[1]);
            0.5 * (z_next.conj() - z.conj()) * z - 0.5 * z_next.conj() * (z_next - z)
                - h_weight * energy * z_next.conj() * z
        })
        .sum();
    ActionValue(total)
}

/// Quadratic part of one slice exponent:
/// `left |z_j|^2 + right |z_{j+1}|^2 + coupling conj(z_{j+1}) z_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct LinkTerm {
    left: f64,
    right: f64,
    coupling: C64,
}

fn link_terms(prob: &CoherentChainProblem) -> Vec<LinkTerm> {
    // expanding the slice exponent: each |z|^2 picks up -1/2 from both sides
    let term = LinkTerm { left: -0.5, right: -0.5, coupling: prob.link_coupling() };
    vec![term; prob.grid.steps()]
}

/// Running state of the sequential integration: after the interior points
/// `z_1 .. z_{m-1}` have been integrated out, the remaining integrand is
/// `prefactor * exp(boundary + pending |z_m|^2 + bilinear conj(z_m) z_0)`.
#[derive(Clone, Copy, Debug)]
struct ChainState {
    prefactor: C64,
    boundary: C64,
    pending: f64,
    bilinear: C64,
}

/// Integrates out `z_1 ... z_{N-1}` one slice at a time with
/// `int d^2z/pi exp(-a |z|^2 + u conj(z) + v z) = exp(u v / a) / a`.
pub fn chain_reduce_exact(prob: &CoherentChainProblem) -> C64 {
    let links = link_terms(prob);
    let first = links[0];
    let mut state = ChainState {
        prefactor: C64::new(1.0, 0.0),
        boundary: C64::new(first.left * prob.z0.norm_sqr(), 0.0),
        pending: first.right,
        bilinear: first.coupling,
    };
    for link in &links[1..] {
        // weight of |z_m|^2 collects the right side of the previous link and
        // the left side of this one
        let a = -(state.pending + link.left);
        debug_assert!(a > 0.0, "non-integrable slice");
        // u = bilinear * z_0, v = coupling * conj(z_{m+1}); uv/a keeps the
        // form bilinear' conj(z_{m+1}) z_0
        state.bilinear = state.bilinear * link.coupling / a;
        state.prefactor /= a;
        state.pending = link.right;
    }
    let exponent = state.boundary + state.pending * prob.zf.norm_sqr() + state.bilinear * prob.zf.conj() * prob.z0;
    state.prefactor * exponent.exp()
}

/// `exp(-(|z_f|^2 + |z_0|^2)/2) * exp(exp(-i E t / hbar) conj(z_f) z_0)`.
pub fn analytic_propagator(prob: &CoherentChainProblem) -> C64 {
    let damping = (-0.5 * (prob.zf.norm_sqr() + prob.z0.norm_sqr())).exp();
    let phase = C64::from_polar(1.0, -prob.energy * prob.grid.duration() / prob.hbar);
    (phase * prob.zf.conj() * prob.z0).exp() * damping
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub abs_error: f64,
}

/// `|chain_reduce_exact(N) - analytic_propagator|` for each `N` in
/// `step_counts`, which must be strictly ascending.
pub fn convergence_study(prob: &CoherentChainProblem, step_counts: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if step_counts.is_empty() {
        return Err(Error::InvalidParameter("step list is empty".into()));
    }
    if step_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("step list must be strictly ascending".into()));
    }
    let exact = analytic_propagator(prob);
    step_counts
        .iter()
        .map(|&n| {
            let p = prob.with_steps(n)?;
            Ok(ConvergenceRow { steps: n, abs_error: (chain_reduce_exact(&p) - exact).norm() })
        })
        .collect()
}

/// Least-squares slope of `ln(abs_error)` against `ln(N)`.
pub fn loglog_slope(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_error > 0.0)
        .map(|r| ((r.steps as f64).ln(), r.abs_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Formats with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `N,abs_error` followed by one row per entry.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "N,abs_error")?;
    for r in rows {
        writeln!(out, "{},{}", r.steps, format_f64(r.abs_error))?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    /// Independent ChaCha streams the sample budget is split across.
    pub substreams: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: C64,
    pub standard_error: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// `|estimate - reference|` in units of the standard error.
    pub fn z_score(&self, reference: C64) -> f64 {
        (self.estimate - reference).norm() / self.standard_error
    }
}

pub fn monte_carlo_estimate(prob: &CoherentChainProblem, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    monte_carlo_estimate_with(prob, &MonteCarloConfig { samples, seed, substreams: 1 })
}

/// Gaussian sampler matched to the modulus of the lattice integrand.
///
/// Interior points are flattened to `x = (Re z_1, Im z_1, ..., Re z_{N-1},
/// Im z_{N-1})`. The exponent is an exact quadratic `f0 + g.x + x.M.x / 2`,
/// whose coefficients are read off the action by polarization. Its real part
/// `-x.A.x / 2 + b.x + Re f0` defines the sampling density, and each sample
/// contributes the residual phase `exp(i Im S(x))`.
struct PhaseSampler {
    mean: DVector<f64>,
    cov_factor: DMatrix<f64>,
    magnitude: f64,
}

impl PhaseSampler {
    fn new(prob: &CoherentChainProblem) -> Result<Self> {
        let n = 2 * (prob.grid.steps() - 1);
        let action = |x: &DVector<f64>| interior_action(prob, x.as_slice()).0;
        let zero = DVector::zeros(n);
        let f0 = action(&zero);
        let unit = |a: usize| {
            let mut e = DVector::zeros(n);
            e[a] = 1.0;
            e
        };
        let plus: Vec<C64> = (0..n).map(|a| action(&unit(a))).collect();
        let minus: Vec<C64> = (0..n).map(|a| action(&(-unit(a)))).collect();
        let mut hess = DMatrix::<C64>::zeros(n, n);
        let mut grad = DVector::<C64>::zeros(n);
        for a in 0..n {
            grad[a] = (plus[a] - minus[a]) * 0.5;
            hess[(a, a)] = plus[a] + minus[a] - f0 * 2.0;
            for b in 0..a {
                let both = action(&(unit(a) + unit(b)));
                let m = both - plus[a] - plus[b] + f0;
                hess[(a, b)] = m;
                hess[(b, a)] = m;
            }
        }
        let precision = hess.map(|m| -m.re);
        let linear = grad.map(|g| g.re);
        let chol = precision.clone().cholesky().ok_or_else(|| {
            Error::MonteCarloRefused(
                "modulus of the integrand is not a normalizable Gaussian for these parameters".into(),
            )
        })?;
        let mean = chol.solve(&linear);
        let l = chol.l();
        let det_sqrt: f64 = l.diagonal().iter().product();
        // int d^n x exp(-x.A.x/2 + b.x) = (2 pi)^{n/2} det(A)^{-1/2} exp(b.A^{-1}.b / 2),
        // and the measure carries pi^{-n/2}
        let log_mag = f0.re + 0.5 * linear.dot(&mean) + (n as f64 / 2.0) * 2f64.ln() - det_sqrt.ln();
        let cov_factor = l
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::MonteCarloRefused("singular sampling covariance".into()))?;
        Ok(Self { mean, cov_factor, magnitude: log_mag.exp() })
    }
}

/// Action of the lattice path whose interior is given by the flattened
/// real coordinates `x`.
fn interior_action(prob: &CoherentChainProblem, x: &[f64]) -> ActionValue {
    let mut points = Vec::with_capacity(prob.grid.steps() + 1);
    points.push(prob.z0);
    points.extend(x.chunks_exact(2).map(|p| C64::new(p[0], p[1])));
    points.push(prob.zf);
    let path = PathLattice { grid: prob.grid, points };
    discrete_action(&path, prob.energy, prob.hbar)
}

#[derive(Clone, Copy, Debug, Default)]
struct PhaseSums {
    count: usize,
    cos: f64,
    sin: f64,
    cos_sq: f64,
    sin_sq: f64,
}

impl PhaseSums {
    fn merge(self, other: Self) -> Self {
        Self {
            count: self.count + other.count,
            cos: self.cos + other.cos,
            sin: self.sin + other.sin,
            cos_sq: self.cos_sq + other.cos_sq,
            sin_sq: self.sin_sq + other.sin_sq,
        }
    }
}

/// Importance-sampled estimate of the lattice integral with `N - 1`
/// interior points. Deterministic for fixed `(seed, samples, substreams)`.
pub fn monte_carlo_estimate_with(prob: &CoherentChainProblem, cfg: &MonteCarloConfig) -> Result<MonteCarloEstimate> {
    let steps = prob.grid.steps();
    if steps > MAX_MC_SLICES {
        return Err(Error::MonteCarloRefused(format!(
            "{steps} slices requested; the estimator is limited to N <= {MAX_MC_SLICES}"
        )));
    }
    if cfg.samples < MIN_MC_SAMPLES {
        return Err(Error::MonteCarloRefused(format!(
            "{} samples requested; at least {MIN_MC_SAMPLES} are required",
            cfg.samples
        )));
    }
    if cfg.substreams == 0 || cfg.substreams > cfg.samples {
        return Err(Error::InvalidParameter(format!("invalid substream count {}", cfg.substreams)));
    }
    if steps == 1 {
        let path = PathLattice { grid: prob.grid, points: vec![prob.z0, prob.zf] };
        return Ok(MonteCarloEstimate {
            estimate: discrete_action(&path, prob.energy, prob.hbar).exp(),
            standard_error: 0.0,
            samples: cfg.samples,
        });
    }

    let sampler = PhaseSampler::new(prob)?;
    let dim = sampler.mean.len();
    let base = cfg.samples / cfg.substreams;
    let extra = cfg.samples % cfg.substreams;
    let partial: Vec<PhaseSums> = (0..cfg.substreams)
        .into_par_iter()
        .map(|stream| {
            let count = base + usize::from(stream < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream as u64);
            let mut sums = PhaseSums { count, ..Default::default() };
            let mut noise = DVector::<f64>::zeros(dim);
            for _ in 0..count {
                noise.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
                let x = &sampler.mean + &sampler.cov_factor * &noise;
                let phase = interior_action(prob, x.as_slice()).0.im;
                let (s, c) = phase.sin_cos();
                sums.cos += c;
                sums.sin += s;
                sums.cos_sq += c * c;
                sums.sin_sq += s * s;
            }
            sums
        })
        .collect();
    let total = partial.into_iter().fold(PhaseSums::default(), PhaseSums::merge);

    let n = total.count as f64;
    let mean_c = total.cos / n;
    let mean_s = total.sin / n;
    let var_c = (total.cos_sq / n - mean_c * mean_c).max(0.0) * n / (n - 1.0);
    let var_s = (total.sin_sq / n - mean_s * mean_s).max(0.0) * n / (n - 1.0);
    Ok(MonteCarloEstimate {
        estimate: C64::new(mean_c, mean_s) * sampler.magnitude,
        standard_error: sampler.magnitude * ((var_c + var_s) / n).sqrt(),
        samples: total.count,
    })
}
