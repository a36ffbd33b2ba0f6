//! JSON experiment configuration.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use kslab_core::classical::{Cell, ClassicalSystem, Partition};
use kslab_core::linalg::CMatrix;
use kslab_core::quantum::{
    CommutantProjectionFamily, CycleEmbedding, FiniteDimAlgebra, QuantumDynamicalSystem,
};
use kslab_core::search::SearchSpec;
use kslab_core::statespace::{AtomicStateMeasure, StateSpacePartition, TestObservable};
use kslab_core::{DensityState, FiniteDecomposition, Tolerances};

/// Complex matrices are written as nested rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_json(rows: &MatrixJson) -> anyhow::Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if nrows == 0 || rows.iter().any(|r| r.len() != ncols) {
        anyhow::bail!("matrix rows must be nonempty and of equal length");
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Classical,
    QuantumMf,
    QuantumGeneral,
    HPrime,
    Oracle,
    Verify,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Classical => "classical",
            Mode::QuantumMf => "quantum-mf",
            Mode::QuantumGeneral => "quantum-general",
            Mode::HPrime => "h-prime",
            Mode::Oracle => "oracle",
            Mode::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    BernoulliShift {
        probs: Vec<f64>,
    },
    MarkovShift {
        transition: Vec<Vec<f64>>,
        /// Computed by power iteration when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stationary: Option<Vec<f64>>,
    },
    DoublingMap,
    Rotation {
        theta: f64,
        #[serde(default)]
        irrational: bool,
    },
    FinitePermutation {
        perm: Vec<usize>,
        stationary: Vec<f64>,
    },
    Dirac {
        point: usize,
        points: usize,
    },
    Quantum {
        block_dims: Vec<usize>,
        rho: MatrixJson,
        unitary: MatrixJson,
    },
    /// Cyclic-window embedding of a Bernoulli shift as a diagonal quantum
    /// system (with its classical permutation face).
    EmbeddedBernoulli {
        probs: Vec<f64>,
        window: usize,
    },
    /// Cyclic-window embedding of a Markov shift.
    EmbeddedMarkov {
        transition: Vec<Vec<f64>>,
        window: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PartitionConfig {
    Symbols,
    CylindersDepth2,
    Dyadic { level: u32 },
    Uniform { cells: usize },
    Thresholds { cuts: Vec<f64> },
    TwoArcs,
    Points,
    PointGroups { groups: Vec<Vec<usize>> },
    Intervals { cells: Vec<Vec<[f64; 2]>> },
    Cylinders { cells: Vec<Vec<[usize; 2]>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    Trivial,
    RhoEigenbasis,
    /// Symbol projections of an embedded system.
    Symbols,
    Projections { matrices: Vec<MatrixJson> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureConfig {
    RhoEigenbasis,
    Trine,
    Atoms { atoms: Vec<AtomJson> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub weight: f64,
    pub state: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestJson {
    pub observable: MatrixJson,
    pub threshold: f64,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatePartitionConfig {
    pub tests: Vec<TestJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_partition: Option<StatePartitionConfig>,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_k_max() -> usize {
    12
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        // serde_json errors carry line/column anchors
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("config {}: {e}", path.display()))?;
        if config.k_max == 0 {
            anyhow::bail!("config {}: k_max must be >= 1", path.display());
        }
        Ok(config)
    }
}

/// A fully resolved system: classical, quantum, or an embedding carrying
/// both faces.
pub enum ResolvedSystem {
    Classical(ClassicalSystem),
    Quantum(QuantumDynamicalSystem),
    Embedded(Box<CycleEmbedding>),
}

pub fn resolve_system(cfg: &SystemConfig, tol: &Tolerances) -> anyhow::Result<ResolvedSystem> {
    Ok(match cfg {
        SystemConfig::BernoulliShift { probs } => {
            ResolvedSystem::Classical(ClassicalSystem::bernoulli(probs.clone(), tol)?)
        }
        SystemConfig::MarkovShift {
            transition,
            stationary,
        } => {
            let pi = match stationary {
                Some(pi) => pi.clone(),
                None => stationary_vector(transition)?,
            };
            ResolvedSystem::Classical(ClassicalSystem::markov(transition.clone(), pi, tol)?)
        }
        SystemConfig::DoublingMap => ResolvedSystem::Classical(ClassicalSystem::DoublingMap),
        SystemConfig::Rotation { theta, irrational } => {
            ResolvedSystem::Classical(ClassicalSystem::rotation(*theta, *irrational)?)
        }
        SystemConfig::FinitePermutation { perm, stationary } => ResolvedSystem::Classical(
            ClassicalSystem::permutation(perm.clone(), stationary.clone(), tol)?,
        ),
        SystemConfig::Dirac { point, points } => {
            ResolvedSystem::Classical(ClassicalSystem::dirac(*point, *points)?)
        }
        SystemConfig::Quantum {
            block_dims,
            rho,
            unitary,
        } => {
            let algebra = FiniteDimAlgebra::new(block_dims.clone())?;
            let rho = DensityState::new(matrix_from_json(rho)?, tol)?;
            let unitary = matrix_from_json(unitary)?;
            ResolvedSystem::Quantum(QuantumDynamicalSystem::new(algebra, rho, unitary, tol)?)
        }
        SystemConfig::EmbeddedBernoulli { probs, window } => ResolvedSystem::Embedded(Box::new(
            kslab_core::quantum::embed_bernoulli_cycle(probs, *window, tol)?,
        )),
        SystemConfig::EmbeddedMarkov { transition, window } => ResolvedSystem::Embedded(Box::new(
            kslab_core::quantum::embed_markov_cycle(transition, *window, tol)?,
        )),
    })
}

/// Stationary vector by power iteration; validated downstream by the system
/// constructor.
fn stationary_vector(transition: &[Vec<f64>]) -> anyhow::Result<Vec<f64>> {
    let n = transition.len();
    if n == 0 {
        anyhow::bail!("empty transition matrix");
    }
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..4096 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += pi[i] * transition[i][j];
            }
        }
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        let delta: f64 = pi
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if delta < 1e-15 {
            break;
        }
    }
    Ok(pi)
}

pub fn resolve_partition(
    cfg: &PartitionConfig,
    sys: &ClassicalSystem,
    tol: &Tolerances,
) -> anyhow::Result<Partition> {
    Ok(match cfg {
        PartitionConfig::Symbols => Partition::symbols(sys, tol)?,
        PartitionConfig::CylindersDepth2 => Partition::cylinders_depth2(sys, tol)?,
        PartitionConfig::Dyadic { level } => Partition::dyadic(sys, *level, tol)?,
        PartitionConfig::Uniform { cells } => Partition::uniform_intervals(sys, *cells, tol)?,
        PartitionConfig::Thresholds { cuts } => Partition::from_thresholds(sys, cuts.clone(), tol)?,
        PartitionConfig::TwoArcs => Partition::two_arcs(sys, tol)?,
        PartitionConfig::Points => Partition::points(sys, tol)?,
        PartitionConfig::PointGroups { groups } => {
            Partition::point_groups(sys, groups.clone(), tol)?
        }
        PartitionConfig::Intervals { cells } => {
            let cells = cells
                .iter()
                .map(|c| Cell::intervals(c.iter().map(|&[a, b]| (a, b)).collect()))
                .collect::<Result<Vec<_>, _>>()?;
            Partition::new(sys, cells, tol)?
        }
        PartitionConfig::Cylinders { cells } => {
            let cells = cells
                .iter()
                .map(|c| Cell::cylinder(c.iter().map(|&[p, s]| (p, s))))
                .collect::<Result<Vec<_>, _>>()?;
            Partition::new(sys, cells, tol)?
        }
    })
}

pub fn resolve_family(
    cfg: &FamilyConfig,
    sys: &QuantumDynamicalSystem,
    embedded: Option<&CycleEmbedding>,
    tol: &Tolerances,
) -> anyhow::Result<CommutantProjectionFamily> {
    Ok(match cfg {
        FamilyConfig::Trivial => CommutantProjectionFamily::trivial(sys, tol)?,
        FamilyConfig::RhoEigenbasis => {
            let sc = sys.support(tol);
            CommutantProjectionFamily::from_support_basis(sys, &sc.basis, tol)?
        }
        FamilyConfig::Symbols => match embedded {
            Some(e) => e.family.clone(),
            None => anyhow::bail!("family type 'symbols' needs an embedded system"),
        },
        FamilyConfig::Projections { matrices } => {
            let projections = matrices
                .iter()
                .map(|m| matrix_from_json(m))
                .collect::<anyhow::Result<Vec<_>>>()?;
            CommutantProjectionFamily::new(sys, projections, tol)?
        }
    })
}

pub fn resolve_measure(
    cfg: &MeasureConfig,
    sys: &QuantumDynamicalSystem,
    tol: &Tolerances,
) -> anyhow::Result<AtomicStateMeasure> {
    Ok(match cfg {
        MeasureConfig::RhoEigenbasis => kslab_core::statespace::eigen_measure(sys, tol)?,
        MeasureConfig::Trine => kslab_core::statespace::qubit_trine(sys, tol)?,
        MeasureConfig::Atoms { atoms } => {
            let weights: Vec<f64> = atoms.iter().map(|a| a.weight).collect();
            let states = atoms
                .iter()
                .map(|a| Ok(DensityState::new(matrix_from_json(&a.state)?, tol)?))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let d = FiniteDecomposition::new(weights, states, sys.rho().clone(), tol)?;
            AtomicStateMeasure::new(d, tol)
        }
    })
}

pub fn resolve_state_partition(
    cfg: &StatePartitionConfig,
    tol: &Tolerances,
) -> anyhow::Result<StateSpacePartition> {
    let _ = tol;
    let tests = cfg
        .tests
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let label = if t.label.is_empty() {
                format!("test{i}")
            } else {
                t.label.clone()
            };
            Ok(TestObservable::new(
                matrix_from_json(&t.observable)?,
                t.threshold,
                label,
            )?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(StateSpacePartition::new(tests)?)
}
