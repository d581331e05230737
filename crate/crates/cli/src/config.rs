//! JSON experiment configurations. Every struct rejects unknown fields.

use std::path::PathBuf;

use hilbert_path::hilbert::{evolve, random_hamiltonian, random_state, CMatrix, CVector, Hamiltonian, StateVector};
use hilbert_path::lattice::TimeGrid;
use hilbert_path::optimizer::OptimizerConfig;
use hilbert_path::quantumness::{qubit_detector_model, LinkKernel, QuantumnessMeasure};
use hilbert_path::{Error, Result, C64};
use serde::Deserialize;

fn default_hbar() -> f64 {
    1.0
}

fn default_energy_scale() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_init_noise() -> f64 {
    0.25
}

fn default_substreams() -> usize {
    1
}

fn complex(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSource {
    Random {
        dim: usize,
        seed: Option<u64>,
        #[serde(default = "default_energy_scale")]
        energy_scale: f64,
        #[serde(default = "default_hbar")]
        hbar: f64,
    },
    Explicit {
        /// Row-major rows of `[re, im]` pairs.
        matrix: Vec<Vec<[f64; 2]>>,
        #[serde(default = "default_hbar")]
        hbar: f64,
    },
}

impl HamiltonianSource {
    pub fn build(&self, seed: u64) -> Result<Hamiltonian> {
        match self {
            Self::Random { dim, seed: own, energy_scale, hbar } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("hamiltonian dim must be positive".into()));
                }
                let h = random_hamiltonian(*dim, own.unwrap_or(seed), *energy_scale);
                Hamiltonian::with_hbar(h.matrix().clone(), *hbar)
            }
            Self::Explicit { matrix, hbar } => {
                let rows = matrix.len();
                if rows == 0 {
                    return Err(Error::InvalidParameter("hamiltonian matrix is empty".into()));
                }
                if let Some(bad) = matrix.iter().find(|r| r.len() != rows) {
                    return Err(Error::NotSquare { rows, cols: bad.len() });
                }
                let m = CMatrix::from_fn(rows, rows, |j, k| complex(matrix[j][k]));
                Hamiltonian::with_hbar(m, *hbar)
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    Random {
        seed: Option<u64>,
    },
    Explicit {
        amplitudes: Vec<[f64; 2]>,
        #[serde(default)]
        normalize: bool,
    },
    Basis {
        index: usize,
    },
    /// `exp(i phase) exp(-i H t / hbar) from`.
    Evolved {
        from: Box<StateSource>,
        t: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl StateSource {
    pub fn build(&self, h: &Hamiltonian, seed: u64) -> Result<StateVector> {
        let dim = h.dim();
        match self {
            Self::Random { seed: own } => Ok(random_state(dim, own.unwrap_or(seed))),
            Self::Explicit { amplitudes, normalize } => {
                if amplitudes.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
                }
                let v = CVector::from_iterator(dim, amplitudes.iter().map(|&p| complex(p)));
                if *normalize {
                    StateVector::normalized(v)
                } else {
                    StateVector::new(v)
                }
            }
            Self::Basis { index } => StateVector::basis(dim, *index),
            Self::Evolved { from, t, phase } => Ok(evolve(h, &from.build(h, seed)?, *t)?.with_phase(*phase)),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZevalConfig {
    pub hamiltonian: HamiltonianSource,
    pub psi_i: StateSource,
    pub psi_e: StateSource,
    #[serde(default)]
    pub t_i: f64,
    pub t_e: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloBattery {
    pub steps: usize,
    pub samples: usize,
    /// Seeds `base .. base + seeds`, where `base` is the run seed.
    pub seeds: u64,
    #[serde(default = "default_substreams")]
    pub substreams: usize,
    pub out: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub z0: [f64; 2],
    pub zf: [f64; 2],
    pub energy: f64,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    /// Strictly ascending slice counts.
    pub steps: Vec<usize>,
    pub monte_carlo: Option<MonteCarloBattery>,
}

impl LatticeConfig {
    pub fn z0(&self) -> C64 {
        complex(self.z0)
    }

    pub fn zf(&self) -> C64 {
        complex(self.zf)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub hamiltonian: HamiltonianSource,
    pub psi_i: StateSource,
    #[serde(default)]
    pub t_i: f64,
    pub t_e: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSource {
    QubitDetector { p0: f64, coupling: f64 },
    Custom { hamiltonian: HamiltonianSource, psi_i: StateSource },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureChoice {
    /// Without an explicit basis the system's pointer basis is used: the
    /// model's product basis, or the computational basis for custom systems.
    PointerDeviation { basis: Option<Vec<Vec<[f64; 2]>>> },
    LinearEntropy { d_a: usize, d_b: usize },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseConfig {
    pub system: SystemSource,
    pub measure: MeasureChoice,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub link: LinkKernel,
    #[serde(default = "default_true")]
    pub interior_normalization: bool,
    #[serde(default = "default_init_noise")]
    pub init_noise: f64,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Optional CSV of the lambda sweep.
    pub csv: Option<PathBuf>,
}

pub struct CollapseSystem {
    pub hamiltonian: Hamiltonian,
    pub psi_i: StateVector,
    pub measure: QuantumnessMeasure,
    pub grid: TimeGrid,
}

impl CollapseConfig {
    pub fn build(&self, seed: u64) -> Result<CollapseSystem> {
        let (hamiltonian, psi_i, pointers) = match &self.system {
            SystemSource::QubitDetector { p0, coupling } => {
                let model = qubit_detector_model(*p0, *coupling)?;
                (model.hamiltonian, model.psi_i, model.pointer_basis)
            }
            SystemSource::Custom { hamiltonian, psi_i } => {
                let h = hamiltonian.build(seed)?;
                let psi = psi_i.build(&h, seed)?;
                let dim = h.dim();
                let basis = (0..dim).map(|k| StateVector::basis(dim, k)).collect::<Result<_>>()?;
                (h, psi, basis)
            }
        };
        let measure = match &self.measure {
            MeasureChoice::PointerDeviation { basis: None } => QuantumnessMeasure::pointer_deviation(pointers)?,
            MeasureChoice::PointerDeviation { basis: Some(rows) } => {
                let basis = rows
                    .iter()
                    .map(|r| StateVector::from_slice(&r.iter().map(|&p| complex(p)).collect::<Vec<_>>()))
                    .collect::<Result<_>>()?;
                QuantumnessMeasure::pointer_deviation(basis)?
            }
            MeasureChoice::LinearEntropy { d_a, d_b } => QuantumnessMeasure::linear_entropy(*d_a, *d_b)?,
        };
        if self.lambdas.is_empty() {
            return Err(Error::InvalidParameter("lambdas is empty".into()));
        }
        let grid = TimeGrid::new(self.t_start, self.t_end, self.steps)?;
        Ok(CollapseSystem { hamiltonian, psi_i, measure, grid })
    }
}
