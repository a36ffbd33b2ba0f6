//! Diagonal-algebra embeddings of shift systems on a cyclic symbol window.
//!
//! A window of `L` coordinates with the rotate-left map is a finite
//! permutation system; its diagonal-algebra counterpart (diagonal state,
//! permutation unitary, symbol projections) runs through the quantum
//! pipelines and must reproduce the classical numbers exactly. Pullbacks of
//! the symbol partition read coordinates `0..k`, so the window behaves like
//! the infinite shift for depths `k < L` ("the truncation horizon").
//!
//! Product measures are rotation-invariant as they stand; Markov chains use
//! the cyclic-boundary measure `prod P[w_i, w_{i+1 mod L}] / tr(P^L)`, which
//! is the shift-invariant window law of the chain.

use num_complex::Complex64;

use crate::classical::{ClassicalSystem, Partition};
use crate::decomposition::DensityState;
use crate::entropy::kahan_sum;
use crate::error::{KsError, Result};
use crate::linalg::CMatrix;
use crate::quantum::algebra::FiniteDimAlgebra;
use crate::quantum::family::CommutantProjectionFamily;
use crate::quantum::system::QuantumDynamicalSystem;
use crate::tolerance::Tolerances;

/// Both faces of one embedded window system.
pub struct CycleEmbedding {
    /// Number of window coordinates; depths below this match the shift.
    pub window: usize,
    pub symbols: usize,
    pub classical: ClassicalSystem,
    /// Points grouped by the coordinate-0 symbol.
    pub classical_partition: Partition,
    pub quantum: QuantumDynamicalSystem,
    /// Diagonal projections grouped by the coordinate-0 symbol.
    pub family: CommutantProjectionFamily,
}

/// Guard: dense matrices over the window grow as `symbols^window`.
const MAX_EMBEDDED_DIM: usize = 1024;

pub fn embed_bernoulli_cycle(
    probs: &[f64],
    window: usize,
    tol: &Tolerances,
) -> Result<CycleEmbedding> {
    let weights = |w: &[usize]| w.iter().map(|&s| probs[s]).product::<f64>();
    embed_cycle(probs.len(), window, weights, tol)
}

pub fn embed_markov_cycle(
    transition: &[Vec<f64>],
    window: usize,
    tol: &Tolerances,
) -> Result<CycleEmbedding> {
    let n = transition.len();
    let z = cycle_partition_function(transition, window);
    if z <= 0.0 {
        return Err(KsError::InvalidSystem(
            "cyclic partition function vanishes".into(),
        ));
    }
    let weights = |w: &[usize]| {
        let mut p = 1.0;
        for i in 0..window {
            p *= transition[w[i]][w[(i + 1) % window]];
        }
        p / z
    };
    embed_cycle(n, window, weights, tol)
}

/// `tr(P^L)`.
fn cycle_partition_function(p: &[Vec<f64>], l: usize) -> f64 {
    let n = p.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..l {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if m[i][k] != 0.0 {
                    for j in 0..n {
                        next[i][j] += m[i][k] * p[k][j];
                    }
                }
            }
        }
        m = next;
    }
    (0..n).map(|i| m[i][i]).sum()
}

fn embed_cycle<F: Fn(&[usize]) -> f64>(
    symbols: usize,
    window: usize,
    weight_of: F,
    tol: &Tolerances,
) -> Result<CycleEmbedding> {
    if symbols < 2 || window == 0 {
        return Err(KsError::InvalidSystem(
            "embedding needs >= 2 symbols and a nonempty window".into(),
        ));
    }
    let dim = symbols
        .checked_pow(window as u32)
        .filter(|&d| d <= MAX_EMBEDDED_DIM)
        .ok_or_else(|| {
            KsError::BudgetExceeded(format!(
                "embedded dimension {symbols}^{window} exceeds {MAX_EMBEDDED_DIM}"
            ))
        })?;

    let word_of = |mut x: usize| -> Vec<usize> {
        let mut w = vec![0usize; window];
        for i in (0..window).rev() {
            w[i] = x % symbols;
            x /= symbols;
        }
        w
    };
    let index_of = |w: &[usize]| -> usize { w.iter().fold(0, |acc, &s| acc * symbols + s) };

    let mut stationary = Vec::with_capacity(dim);
    let mut perm = Vec::with_capacity(dim);
    for x in 0..dim {
        let w = word_of(x);
        let weight = weight_of(&w);
        if weight <= tol.atom_drop {
            return Err(KsError::InvalidSystem(
                "embedding requires a faithful window measure (all word weights positive)".into(),
            ));
        }
        stationary.push(weight);
        // rotate left: the classical map whose preimages read later coordinates
        let mut rotated = w[1..].to_vec();
        rotated.push(w[0]);
        perm.push(index_of(&rotated));
    }
    let total = kahan_sum(stationary.iter().copied());
    for s in &mut stationary {
        *s /= total;
    }

    let classical = ClassicalSystem::permutation(perm.clone(), stationary.clone(), tol)?;
    let classical_partition = Partition::point_groups(
        &classical,
        (0..symbols)
            .map(|s| (0..dim).filter(|&x| word_of(x)[0] == s).collect())
            .collect(),
        tol,
    )?;

    let rho = DensityState::from_diagonal(&stationary, tol)?;
    // U e_x = e_{perm^{-1}(x)} makes conjugation of a diagonal projection
    // act by preimage, matching the classical pullback convention
    let mut unitary = CMatrix::zeros(dim, dim);
    for (x, &img) in perm.iter().enumerate() {
        unitary[(x, img)] = Complex64::new(1.0, 0.0);
    }
    let quantum = QuantumDynamicalSystem::new(
        FiniteDimAlgebra::diagonal(dim)?,
        rho,
        unitary,
        tol,
    )?;
    let family = CommutantProjectionFamily::new(
        &quantum,
        (0..symbols)
            .map(|s| {
                CMatrix::from_fn(dim, dim, |i, j| {
                    Complex64::new(
                        if i == j && word_of(i)[0] == s { 1.0 } else { 0.0 },
                        0.0,
                    )
                })
            })
            .collect(),
        tol,
    )?;

    Ok(CycleEmbedding {
        window,
        symbols,
        classical,
        classical_partition,
        quantum,
        family,
    })
}
