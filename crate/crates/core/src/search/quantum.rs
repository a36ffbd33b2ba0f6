//! Candidate projection-family streams for quantum systems.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{random_unitary, support_calculus, CMatrix};
use crate::quantum::{CommutantProjectionFamily, QuantumDynamicalSystem};
use crate::search::spec::{streams, SearchSpec, Strategy};
use crate::tolerance::Tolerances;

/// Deterministic family stream: the state eigenbasis first, then (for
/// rank-2 full-block supports) a Bloch-angle grid, then seeded random
/// orthonormal bases. All candidates are restricted to the support of the
/// state; a pure state admits only the trivial family.
pub fn quantum_family_candidates(
    sys: &QuantumDynamicalSystem,
    spec: &SearchSpec,
    tol: &Tolerances,
) -> Result<Vec<(String, CommutantProjectionFamily)>> {
    spec.validate()?;
    let budget = spec.stream_budget();
    let support = sys.support(tol);
    if support.rank <= 1 {
        let trivial = CommutantProjectionFamily::trivial(sys, tol)?;
        return Ok(vec![("trivial".into(), trivial)]);
    }

    let mut out: Vec<(String, CommutantProjectionFamily)> = Vec::new();
    let push = |label: String,
                    family: Result<CommutantProjectionFamily>,
                    out: &mut Vec<(String, CommutantProjectionFamily)>| {
        if out.len() >= budget {
            return;
        }
        if let Ok(f) = family {
            if !out.iter().any(|(_, g)| g.distance(&f) < 1e-9) {
                out.push((label, f));
            }
        }
    };

    // eigenbasis, assembled block by block so projections stay block-diagonal
    push(
        "rho-eigenbasis".into(),
        blockwise_basis_family(sys, tol, None),
        &mut out,
    );

    // Bloch grid for a single full block with a rank-2 support
    let single_full_block =
        sys.algebra().block_dims().len() == 1 && !sys.algebra().is_abelian();
    if single_full_block && support.rank == 2 && spec.bloch_step_deg > 0.0 {
        let mut deg = 0.0f64;
        while deg < 180.0 {
            push(
                format!("bloch-{deg:.0}"),
                bloch_family(sys, &support.basis, deg.to_radians(), tol),
                &mut out,
            );
            deg += spec.bloch_step_deg;
        }
    }

    if spec.strategy != Strategy::Grid {
        let mut rng = spec.rng(streams::QUANTUM_FAMILIES);
        let mut i = 0;
        while out.len() < budget && i < budget * 4 {
            push(
                format!("random-basis#r{i}"),
                blockwise_basis_family(sys, tol, Some(&mut rng)),
                &mut out,
            );
            i += 1;
        }
    }
    Ok(out)
}

/// Rank-one family from per-block support eigenbases, optionally rotated by
/// random block unitaries. Blockwise assembly keeps every projection inside
/// the algebra even when eigenvalues are degenerate across blocks.
fn blockwise_basis_family(
    sys: &QuantumDynamicalSystem,
    tol: &Tolerances,
    mut rng: Option<&mut rand_chacha::ChaCha8Rng>,
) -> Result<CommutantProjectionFamily> {
    let dim = sys.dim();
    let mut projections = Vec::new();
    for (block, &(offset, bdim)) in sys.algebra().block_ranges().iter().enumerate() {
        let rho_block = sys.algebra().block_of(sys.rho().matrix(), block);
        let sc = support_calculus(&rho_block, tol.rank_svd);
        if sc.rank == 0 {
            continue;
        }
        let basis = match rng.as_deref_mut() {
            Some(r) => {
                let v = random_unitary(sc.rank, r);
                &sc.basis * v
            }
            None => sc.basis.clone(),
        };
        for j in 0..basis.ncols() {
            let mut full = CMatrix::zeros(dim, dim);
            let col = basis.column(j);
            for r in 0..bdim {
                for c in 0..bdim {
                    full[(offset + r, offset + c)] = col[r] * col[c].conj();
                }
            }
            projections.push(full);
        }
    }
    CommutantProjectionFamily::new(sys, projections, tol)
}

/// Two-projection family along the Bloch direction `(sin t, 0, cos t)`
/// expressed in the support basis.
fn bloch_family(
    sys: &QuantumDynamicalSystem,
    basis: &CMatrix,
    angle: f64,
    tol: &Tolerances,
) -> Result<CommutantProjectionFamily> {
    let b0 = basis.column(0).into_owned();
    let b1 = basis.column(1).into_owned();
    let proj = |sign: f64| -> CMatrix {
        let half = Complex64::new(0.5, 0.0);
        let cos = Complex64::new(sign * angle.cos() * 0.5, 0.0);
        let sin = Complex64::new(sign * angle.sin() * 0.5, 0.0);
        let p00 = &b0 * b0.adjoint();
        let p11 = &b1 * b1.adjoint();
        let p01 = &b0 * b1.adjoint();
        let p10 = &b1 * b0.adjoint();
        (&p00 + &p11) * half + (&p00 - &p11) * cos + (&p01 + &p10) * sin
    };
    CommutantProjectionFamily::new(sys, vec![proj(1.0), proj(-1.0)], tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{phase_unitary, qubit_system};

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn pure_state_stream_is_trivial_only() {
        let sys = qubit_system((1.0, 0.0), phase_unitary(0.3), &TOL).unwrap();
        let spec = SearchSpec {
            budget: 16,
            ..SearchSpec::default()
        };
        let cands = quantum_family_candidates(&sys, &spec, &TOL).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].0, "trivial");
    }

    #[test]
    fn mixed_qubit_bloch_grid_has_six_distinct_families() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap();
        let spec = SearchSpec {
            budget: 32,
            strategy: Strategy::Grid,
            bloch_step_deg: 30.0,
            ..SearchSpec::default()
        };
        let cands = quantum_family_candidates(&sys, &spec, &TOL).unwrap();
        // eigenbasis coincides with the 0-degree grid family, so the grid
        // contributes exactly six distinct families in total
        assert_eq!(cands.len(), 6);
        assert_eq!(cands[0].0, "rho-eigenbasis");
    }

    #[test]
    fn stream_is_deterministic() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap();
        let spec = SearchSpec {
            budget: 10,
            seed: 42,
            ..SearchSpec::default()
        };
        let a = quantum_family_candidates(&sys, &spec, &TOL).unwrap();
        let b = quantum_family_candidates(&sys, &spec, &TOL).unwrap();
        assert_eq!(a.len(), b.len());
        for ((la, fa), (lb, fb)) in a.iter().zip(&b) {
            assert_eq!(la, lb);
            assert!(fa.distance(fb) < 1e-15);
        }
    }
}
