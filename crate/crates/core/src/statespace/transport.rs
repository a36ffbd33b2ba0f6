//! The affine state-space transport induced by the automorphism, and
//! isomorphism transport between systems.

use crate::decomposition::{DensityState, FiniteDecomposition};
use crate::error::{KsError, Result};
use crate::linalg::{self, CMatrix};
use crate::quantum::{CommutantProjectionFamily, QuantumDynamicalSystem};
use crate::statespace::measure::AtomicStateMeasure;
use crate::statespace::partition::{StateSpacePartition, TestObservable};
use crate::tolerance::Tolerances;

/// `T_alpha(rho) = U* rho U`: the weak-* continuous affine isomorphism of the
/// state space induced by `alpha(A) = U A U*`. Affinity is exact by
/// linearity; the system's invariant state is a fixed point.
#[derive(Debug, Clone)]
pub struct AffineTransport {
    u: CMatrix,
}

impl AffineTransport {
    pub fn from_system(sys: &QuantumDynamicalSystem) -> Self {
        Self {
            u: sys.unitary().clone(),
        }
    }

    pub fn new(u: CMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = linalg::unitarity_residual(&u);
        if residual > tol.unitary {
            return Err(KsError::InvalidSystem(format!(
                "transport matrix not unitary: residual {residual:.3e}"
            )));
        }
        Ok(Self { u })
    }

    /// `T_alpha`.
    pub fn apply(&self, rho: &DensityState, tol: &Tolerances) -> Result<DensityState> {
        DensityState::new(self.u.adjoint() * rho.matrix() * &self.u, tol)
    }

    /// `T_alpha^{-1}`.
    pub fn apply_inverse(&self, rho: &DensityState, tol: &Tolerances) -> Result<DensityState> {
        DensityState::new(&self.u * rho.matrix() * self.u.adjoint(), tol)
    }

    /// Membership of `rho` in `T_alpha(cell)` equals membership of
    /// `T_alpha^{-1}(rho)` in the cell; equivalently the cell's test
    /// observables transport by `F -> U F U*`.
    pub fn transport_test(&self, test: &TestObservable) -> Result<TestObservable> {
        TestObservable::new(
            &self.u * &test.matrix * self.u.adjoint(),
            test.threshold,
            format!("T({})", test.label),
        )
    }
}

/// An inner isomorphism between equal-shaped systems, given by a unitary.
/// Everything in sight transports by conjugation, and every entropy report is
/// unchanged because all pipeline quantities are traces of conjugated
/// products.
#[derive(Debug, Clone)]
pub struct Isomorphism {
    v: CMatrix,
}

impl Isomorphism {
    pub fn new(v: CMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = linalg::unitarity_residual(&v);
        if residual > tol.unitary {
            return Err(KsError::ShapeMismatch(format!(
                "isomorphism matrix not unitary: residual {residual:.3e}"
            )));
        }
        Ok(Self { v })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            v: linalg::identity(dim),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.v.nrows() != dim {
            return Err(KsError::ShapeMismatch(format!(
                "isomorphism acts on dimension {}, got {dim}",
                self.v.nrows()
            )));
        }
        Ok(())
    }

    pub fn transport_state(&self, rho: &DensityState, tol: &Tolerances) -> Result<DensityState> {
        self.check_dim(rho.dim())?;
        DensityState::new(&self.v * rho.matrix() * self.v.adjoint(), tol)
    }

    /// Conjugated system on the same block shape. Conjugations that break the
    /// block structure are rejected by the system constructor.
    pub fn transport_system(
        &self,
        sys: &QuantumDynamicalSystem,
        tol: &Tolerances,
    ) -> Result<QuantumDynamicalSystem> {
        self.check_dim(sys.dim())?;
        let rho = self.transport_state(sys.rho(), tol)?;
        let unitary = &self.v * sys.unitary() * self.v.adjoint();
        QuantumDynamicalSystem::new(sys.algebra().clone(), rho, unitary, tol)
    }

    pub fn transport_measure(
        &self,
        mu: &AtomicStateMeasure,
        tol: &Tolerances,
    ) -> Result<AtomicStateMeasure> {
        let d = mu.decomposition();
        let weights: Vec<f64> = d.weights().iter().collect();
        let components = d
            .components()
            .iter()
            .map(|c| self.transport_state(c, tol))
            .collect::<Result<Vec<_>>>()?;
        let barycenter = self.transport_state(d.barycenter(), tol)?;
        Ok(AtomicStateMeasure::new(
            FiniteDecomposition::new(weights, components, barycenter, tol)?,
            tol,
        ))
    }

    pub fn transport_partition(
        &self,
        p: &StateSpacePartition,
        _tol: &Tolerances,
    ) -> Result<StateSpacePartition> {
        StateSpacePartition::new(
            p.tests()
                .iter()
                .map(|t| {
                    TestObservable::new(
                        &self.v * &t.matrix * self.v.adjoint(),
                        t.threshold,
                        t.label.clone(),
                    )
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn transport_family(
        &self,
        target: &QuantumDynamicalSystem,
        f: &CommutantProjectionFamily,
        tol: &Tolerances,
    ) -> Result<CommutantProjectionFamily> {
        CommutantProjectionFamily::new(
            target,
            f.projections()
                .iter()
                .map(|q| &self.v * q * self.v.adjoint())
                .collect(),
            tol,
        )
    }
}

/// Transport a whole experiment: the conjugated system plus the transported
/// measure and partition, ready to be fed to the same pipeline.
pub fn isomorphism_transport(
    sys: &QuantumDynamicalSystem,
    beta: &Isomorphism,
    mu: &AtomicStateMeasure,
    partition: &StateSpacePartition,
    tol: &Tolerances,
) -> Result<(QuantumDynamicalSystem, AtomicStateMeasure, StateSpacePartition)> {
    let sys2 = beta.transport_system(sys, tol)?;
    let mu2 = beta.transport_measure(mu, tol)?;
    let p2 = beta.transport_partition(partition, tol)?;
    Ok((sys2, mu2, p2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::StateLike;
    use crate::quantum::{hadamard, pauli_x, qubit_system};
    use num_complex::Complex64;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn transport_is_affine_and_fixes_barycenter() {
        let sys = qubit_system((0.5, 0.5), pauli_x(), &TOL).unwrap();
        let t = AffineTransport::from_system(&sys);
        let a = DensityState::from_diagonal(&[0.9, 0.1], &TOL).unwrap();
        let b = DensityState::from_diagonal(&[0.2, 0.8], &TOL).unwrap();
        for lambda in [0.0, 0.3, 0.7, 1.0] {
            let mixed = DensityState::new(
                a.matrix() * Complex64::new(lambda, 0.0)
                    + b.matrix() * Complex64::new(1.0 - lambda, 0.0),
                &TOL,
            )
            .unwrap();
            let lhs = t.apply(&mixed, &TOL).unwrap();
            let rhs = DensityState::new(
                t.apply(&a, &TOL).unwrap().matrix() * Complex64::new(lambda, 0.0)
                    + t.apply(&b, &TOL).unwrap().matrix() * Complex64::new(1.0 - lambda, 0.0),
                &TOL,
            )
            .unwrap();
            assert!(lhs.distance(&rhs) < 1e-12);
        }
        let fixed = t.apply(sys.rho(), &TOL).unwrap();
        assert!(fixed.distance(sys.rho()) < 1e-12);
    }

    #[test]
    fn inverse_really_inverts() {
        let sys = qubit_system((0.5, 0.5), hadamard(), &TOL).unwrap();
        let t = AffineTransport::from_system(&sys);
        let state = DensityState::from_diagonal(&[0.3, 0.7], &TOL).unwrap();
        let back = t
            .apply_inverse(&t.apply(&state, &TOL).unwrap(), &TOL)
            .unwrap();
        assert!(back.distance(&state) < 1e-12);
    }

    #[test]
    fn identity_isomorphism_changes_nothing() {
        let sys = qubit_system((0.5, 0.5), pauli_x(), &TOL).unwrap();
        let iso = Isomorphism::identity(2);
        let sys2 = iso.transport_system(&sys, &TOL).unwrap();
        assert!(sys2.rho().distance(sys.rho()) < 1e-15);
    }

    #[test]
    fn hadamard_maps_z_data_to_x_data() {
        let iso = Isomorphism::new(hadamard(), &TOL).unwrap();
        let up = DensityState::from_diagonal(&[1.0, 0.0], &TOL).unwrap();
        let moved = iso.transport_state(&up, &TOL).unwrap();
        // H|0><0|H = |+><+|
        assert!((moved.matrix()[(0, 1)].re - 0.5).abs() < 1e-12);
    }
}
