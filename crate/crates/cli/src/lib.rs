//! Batch execution: config ingestion, pipeline dispatch, artifact emission.

pub mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use kslab_core::report::EntropyReport;
use kslab_core::statespace::AffineTransport;
use kslab_core::verify;

use crate::config::{
    resolve_family, resolve_measure, resolve_partition, resolve_state_partition, resolve_system,
    ExperimentConfig, Mode, ResolvedSystem,
};

/// Exit code contract: 0 success, 1 error, 2 success with budget truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Truncated,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Truncated => 2,
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub k_max: Option<usize>,
}

pub fn run(mode: Mode, config_path: &Path, overrides: &Overrides) -> anyhow::Result<Outcome> {
    let mut config = ExperimentConfig::from_path(config_path)?;
    if let Some(declared) = config.mode {
        if declared != mode {
            anyhow::bail!(
                "config declares mode {} but the {} subcommand was invoked",
                declared.name(),
                mode.name()
            );
        }
    }
    if let Some(seed) = overrides.seed {
        config.search.seed = seed;
    }
    if let Some(k_max) = overrides.k_max {
        if k_max == 0 {
            anyhow::bail!("k_max must be >= 1");
        }
        config.k_max = k_max;
    }
    if let Some(out) = &overrides.out {
        config.out = Some(out.clone());
    }

    match mode {
        Mode::Oracle => run_oracle(&config),
        Mode::Verify => run_verify(&config),
        _ => run_entropy(mode, &config),
    }
}

fn run_oracle(config: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let system = config
        .system
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("oracle mode needs a system"))?;
    let resolved = resolve_system(system, &config.tolerances)?;
    let value = match &resolved {
        ResolvedSystem::Classical(sys) => sys
            .generator_entropy()
            .ok_or_else(|| anyhow::anyhow!("no closed form for {}", sys.kind_name()))?,
        ResolvedSystem::Embedded(e) => e.classical.generator_entropy().unwrap_or(0.0),
        ResolvedSystem::Quantum(_) => {
            anyhow::bail!("oracle mode provides closed forms for classical systems only")
        }
    };
    println!("{value:.6}");
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("oracle.json"),
            serde_json::to_string_pretty(&serde_json::json!({ "value": value }))? + "\n",
        )?;
    }
    Ok(Outcome::Success)
}

fn run_verify(config: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let rows = verify::run_all(config.search.seed, &config.tolerances);
    print!("{}", verify::render_ledger(&rows));
    if let Some(dir) = &config.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("verify.json"),
            serde_json::to_string_pretty(&rows)? + "\n",
        )?;
    }
    if rows.iter().all(|r| r.pass) {
        Ok(Outcome::Success)
    } else {
        anyhow::bail!("{} invariant rows failed", rows.iter().filter(|r| !r.pass).count())
    }
}

fn run_entropy(mode: Mode, config: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let tol = &config.tolerances;
    let system = config
        .system
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("{} mode needs a system", mode.name()))?;
    let resolved = resolve_system(system, tol)?;
    let started = Instant::now();
    let mut report = dispatch(mode, config, &resolved)?;
    report.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    print!("{}", report.to_table());
    write_artifacts(config, &report)?;
    if report.truncated {
        Ok(Outcome::Truncated)
    } else {
        Ok(Outcome::Success)
    }
}

fn dispatch(
    mode: Mode,
    config: &ExperimentConfig,
    resolved: &ResolvedSystem,
) -> anyhow::Result<EntropyReport> {
    let tol = &config.tolerances;
    let k_max = config.k_max;
    Ok(match mode {
        Mode::Classical => {
            let sys = match resolved {
                ResolvedSystem::Classical(sys) => sys,
                ResolvedSystem::Embedded(e) => &e.classical,
                ResolvedSystem::Quantum(_) => {
                    anyhow::bail!("classical mode needs a classical system")
                }
            };
            match &config.partition {
                Some(p) => {
                    let partition = resolve_partition(p, sys, tol)?;
                    kslab_core::classical::entropy_sequence(sys, &partition, k_max, tol)?
                }
                None => {
                    if let (ResolvedSystem::Embedded(e), None) = (resolved, &config.partition) {
                        kslab_core::classical::entropy_sequence(
                            sys,
                            &e.classical_partition,
                            k_max,
                            tol,
                        )?
                    } else {
                        kslab_core::classical::ks_entropy(sys, &config.search, k_max, tol)?
                    }
                }
            }
        }
        Mode::QuantumMf => {
            let (sys, embedded) = quantum_face(resolved)?;
            match &config.family {
                Some(f) => {
                    let family = resolve_family(f, sys, embedded, tol)?;
                    kslab_core::quantum::mf_entropy_sequence(sys, &family, k_max, tol)?
                }
                None => match embedded {
                    Some(e) => {
                        kslab_core::quantum::mf_entropy_sequence(sys, &e.family, k_max, tol)?
                    }
                    None => kslab_core::quantum::mf_ks_entropy(sys, &config.search, k_max, tol)?,
                },
            }
        }
        Mode::QuantumGeneral => {
            let (sys, _) = quantum_face(resolved)?;
            match (&config.measure, &config.state_partition) {
                (Some(m), Some(p)) => {
                    let mu = resolve_measure(m, sys, tol)?;
                    let partition = resolve_state_partition(p, tol)?;
                    let transport = AffineTransport::from_system(sys);
                    kslab_core::statespace::general_entropy_sequence(
                        &mu, &partition, &transport, k_max, tol,
                    )?
                }
                (None, None) => kslab_core::statespace::h_phi_alpha(sys, &config.search, k_max, tol)?,
                _ => anyhow::bail!(
                    "quantum-general mode takes either both measure and state_partition or neither"
                ),
            }
        }
        Mode::HPrime => {
            let (sys, _) = quantum_face(resolved)?;
            kslab_core::statespace::h_prime_variant(sys, &config.search, k_max, tol)?
        }
        Mode::Oracle | Mode::Verify => unreachable!("handled by the caller"),
    })
}

fn quantum_face(
    resolved: &ResolvedSystem,
) -> anyhow::Result<(
    &kslab_core::quantum::QuantumDynamicalSystem,
    Option<&kslab_core::quantum::CycleEmbedding>,
)> {
    match resolved {
        ResolvedSystem::Quantum(sys) => Ok((sys, None)),
        ResolvedSystem::Embedded(e) => Ok((&e.quantum, Some(e))),
        ResolvedSystem::Classical(_) => {
            anyhow::bail!("this mode needs a quantum or embedded system")
        }
    }
}

fn write_artifacts(config: &ExperimentConfig, report: &EntropyReport) -> anyhow::Result<()> {
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("report.json"), report.to_json_pretty() + "\n")?;
    std::fs::write(dir.join("report.csv"), report.to_csv())?;
    Ok(())
}

/// Caps the rayon thread pool from `KSLAB_THREADS`; call once at startup.
pub fn init_thread_pool() {
    if let Ok(value) = std::env::var("KSLAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}
