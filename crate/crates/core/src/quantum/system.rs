//! Finite-dimensional quantum dynamical systems: an algebra, an invariant
//! density state, and the unitary implementing the automorphism.

use num_complex::Complex64;

use crate::decomposition::DensityState;
use crate::error::{KsError, Result};
use crate::linalg::{self, max_abs, support_calculus, CMatrix, SupportCalculus};
use crate::quantum::algebra::FiniteDimAlgebra;
use crate::tolerance::Tolerances;

/// The triple (algebra, automorphism, invariant state). The automorphism is
/// inner: `alpha(A) = U A U*` with a block-diagonal unitary, which covers all
/// automorphisms of the block algebra up to permutations of equal blocks.
#[derive(Debug, Clone)]
pub struct QuantumDynamicalSystem {
    algebra: FiniteDimAlgebra,
    rho: DensityState,
    unitary: CMatrix,
}

impl QuantumDynamicalSystem {
    pub fn new(
        algebra: FiniteDimAlgebra,
        rho: DensityState,
        unitary: CMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        if rho.dim() != algebra.total_dim() {
            return Err(KsError::ShapeMismatch(format!(
                "state dimension {} vs algebra dimension {}",
                rho.dim(),
                algebra.total_dim()
            )));
        }
        algebra.check_block_diagonal(rho.matrix(), tol.state_check, "density state")?;
        // the implementing unitary need not lie in the algebra; it must only
        // conjugate the algebra into itself, i.e. permute equal-size blocks
        algebra.check_automorphism_pattern(&unitary, tol.unitary)?;
        let ur = linalg::unitarity_residual(&unitary);
        if ur > tol.unitary {
            return Err(KsError::InvalidSystem(format!(
                "not unitary: residual {ur:.3e}"
            )));
        }
        let invariance = max_abs(&(unitary.adjoint() * rho.matrix() * &unitary - rho.matrix()));
        if invariance > tol.invariance {
            return Err(KsError::InvalidSystem(format!(
                "state not invariant under the automorphism: residual {invariance:.3e}"
            )));
        }
        Ok(Self {
            algebra,
            rho,
            unitary,
        })
    }

    /// Convenience constructor for a single full block.
    pub fn full_block(rho: DensityState, unitary: CMatrix, tol: &Tolerances) -> Result<Self> {
        let algebra = FiniteDimAlgebra::full(rho.dim())?;
        Self::new(algebra, rho, unitary, tol)
    }

    pub fn algebra(&self) -> &FiniteDimAlgebra {
        &self.algebra
    }

    pub fn rho(&self) -> &DensityState {
        &self.rho
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Support projector, square root and pseudo-inverse square root of the
    /// state; everything downstream of a non-faithful state is restricted to
    /// this support.
    pub fn support(&self, tol: &Tolerances) -> SupportCalculus {
        support_calculus(self.rho.matrix(), tol.rank_svd)
    }

    /// `alpha^0` on a single projection: `q -> U q U*`.
    pub fn conjugate(&self, q: &CMatrix) -> CMatrix {
        &self.unitary * q * self.unitary.adjoint()
    }

    pub fn describe(&self) -> String {
        format!(
            "quantum({}, dim {})",
            self.algebra.describe(),
            self.rho.dim()
        )
    }
}

/// A qubit system from a Bloch-diagonal density and a unitary.
pub fn qubit_system(
    rho_diag: (f64, f64),
    unitary: CMatrix,
    tol: &Tolerances,
) -> Result<QuantumDynamicalSystem> {
    let rho = DensityState::from_diagonal(&[rho_diag.0, rho_diag.1], tol)?;
    QuantumDynamicalSystem::full_block(rho, unitary, tol)
}

/// Pauli X as a unitary.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

/// Phase unitary diag(1, e^{i phi}).
pub fn phase_unitary(phi: f64) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, phi),
    ]))
}

/// The Hadamard unitary.
pub fn hadamard() -> CMatrix {
    let s = 1.0 / 2.0f64.sqrt();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn invariance_enforced() {
        // X preserves I/2 but not diag(0.7, 0.3)
        assert!(qubit_system((0.5, 0.5), pauli_x(), &TOL).is_ok());
        assert!(qubit_system((0.7, 0.3), pauli_x(), &TOL).is_err());
        assert!(qubit_system((0.7, 0.3), phase_unitary(1.0), &TOL).is_ok());
    }

    #[test]
    fn non_unitary_rejected() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        assert!(qubit_system((0.5, 0.5), m, &TOL).is_err());
    }

    #[test]
    fn support_of_pure_state_is_rank_one() {
        let sys = qubit_system((1.0, 0.0), phase_unitary(0.3), &TOL).unwrap();
        assert_eq!(sys.support(&TOL).rank, 1);
    }
}
