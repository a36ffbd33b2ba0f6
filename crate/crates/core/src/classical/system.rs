//! Measure-preserving dynamical systems with exactly computable cell
//! measures and preimages.

use crate::classical::cell::{intervals_length, normalize_intervals, Cell};
use crate::entropy::kahan_sum;
use crate::error::{KsError, Result};
use crate::tolerance::Tolerances;

/// The supported system kinds. Iteration uses preimages `T^{-p}` throughout:
/// for invertible maps this generates the same refinement algebras as forward
/// images up to measure-preserving relabeling, and it stays well defined for
/// the non-invertible doubling map.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassicalSystem {
    /// One-sided Bernoulli shift with symbol probabilities.
    BernoulliShift { probs: Vec<f64> },
    /// One-sided stationary Markov shift.
    MarkovShift {
        transition: Vec<Vec<f64>>,
        stationary: Vec<f64>,
    },
    /// `x -> 2x mod 1` with Lebesgue measure.
    DoublingMap,
    /// `x -> x + theta mod 1` with Lebesgue measure. The flag records that
    /// the angle is (intended to be) irrational; it is not verifiable in
    /// floating point and only flows into provenance.
    Rotation { theta: f64, irrational: bool },
    /// A permutation of finitely many points with an invariant probability
    /// vector.
    FinitePermutation {
        perm: Vec<usize>,
        stationary: Vec<f64>,
    },
    /// Identity map with a point mass: the degenerate system whose every
    /// entropy sequence vanishes.
    Dirac { point: usize, points: usize },
}

impl ClassicalSystem {
    pub fn bernoulli(probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let sys = ClassicalSystem::BernoulliShift { probs };
        sys.validate(tol)?;
        Ok(sys)
    }

    pub fn markov(transition: Vec<Vec<f64>>, stationary: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let sys = ClassicalSystem::MarkovShift {
            transition,
            stationary,
        };
        sys.validate(tol)?;
        Ok(sys)
    }

    pub fn rotation(theta: f64, irrational: bool) -> Result<Self> {
        let sys = ClassicalSystem::Rotation { theta, irrational };
        sys.validate(&Tolerances::DEFAULT)?;
        Ok(sys)
    }

    pub fn permutation(perm: Vec<usize>, stationary: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let sys = ClassicalSystem::FinitePermutation { perm, stationary };
        sys.validate(tol)?;
        Ok(sys)
    }

    pub fn dirac(point: usize, points: usize) -> Result<Self> {
        let sys = ClassicalSystem::Dirac { point, points };
        sys.validate(&Tolerances::DEFAULT)?;
        Ok(sys)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        match self {
            ClassicalSystem::BernoulliShift { probs } => {
                if probs.is_empty() || probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                    return Err(KsError::InvalidSystem("invalid symbol probabilities".into()));
                }
                let total = kahan_sum(probs.iter().copied());
                if (total - 1.0).abs() > tol.weight_sum {
                    return Err(KsError::InvalidSystem(format!(
                        "symbol probabilities sum to {total}"
                    )));
                }
            }
            ClassicalSystem::MarkovShift {
                transition,
                stationary,
            } => {
                let n = transition.len();
                if n == 0 || stationary.len() != n {
                    return Err(KsError::InvalidSystem(
                        "transition matrix and stationary vector sizes disagree".into(),
                    ));
                }
                for row in transition {
                    if row.len() != n || row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                        return Err(KsError::InvalidSystem("invalid transition row".into()));
                    }
                    let s = kahan_sum(row.iter().copied());
                    if (s - 1.0).abs() > tol.row_sum {
                        return Err(KsError::InvalidSystem(format!(
                            "transition row sums to {s}"
                        )));
                    }
                }
                let total = kahan_sum(stationary.iter().copied());
                if (total - 1.0).abs() > tol.weight_sum
                    || stationary.iter().any(|&p| p < 0.0)
                {
                    return Err(KsError::InvalidSystem("invalid stationary vector".into()));
                }
                for j in 0..n {
                    let pi_p: f64 = (0..n).map(|i| stationary[i] * transition[i][j]).sum();
                    if (pi_p - stationary[j]).abs() > tol.stationary {
                        return Err(KsError::InvalidSystem(format!(
                            "stationary vector not invariant at state {j}: {pi_p} vs {}",
                            stationary[j]
                        )));
                    }
                }
            }
            ClassicalSystem::DoublingMap => {}
            ClassicalSystem::Rotation { theta, .. } => {
                if !(0.0..1.0).contains(theta) || *theta == 0.0 {
                    return Err(KsError::InvalidSystem(format!(
                        "rotation angle {theta} outside (0,1)"
                    )));
                }
            }
            ClassicalSystem::FinitePermutation { perm, stationary } => {
                let n = perm.len();
                if n == 0 || stationary.len() != n {
                    return Err(KsError::InvalidSystem("permutation sizes disagree".into()));
                }
                let mut seen = vec![false; n];
                for &img in perm {
                    if img >= n || seen[img] {
                        return Err(KsError::InvalidSystem("not a permutation".into()));
                    }
                    seen[img] = true;
                }
                let total = kahan_sum(stationary.iter().copied());
                if (total - 1.0).abs() > tol.weight_sum
                    || stationary.iter().any(|&p| p < 0.0)
                {
                    return Err(KsError::InvalidSystem("invalid point masses".into()));
                }
                for (x, &img) in perm.iter().enumerate() {
                    // invariance: mass of x must equal mass of its image
                    if (stationary[x] - stationary[img]).abs() > tol.row_sum {
                        return Err(KsError::InvalidSystem(format!(
                            "point masses not invariant under the permutation at {x}"
                        )));
                    }
                }
            }
            ClassicalSystem::Dirac { point, points } => {
                if *points == 0 || point >= points {
                    return Err(KsError::InvalidSystem("point mass outside the space".into()));
                }
            }
        }
        Ok(())
    }

    /// The whole space in this system's cell representation.
    pub fn whole_space(&self) -> Cell {
        match self {
            ClassicalSystem::BernoulliShift { .. } | ClassicalSystem::MarkovShift { .. } => {
                Cell::Cylinder(Default::default())
            }
            ClassicalSystem::DoublingMap | ClassicalSystem::Rotation { .. } => {
                Cell::Intervals(vec![(0.0, 1.0)])
            }
            ClassicalSystem::FinitePermutation { perm, .. } => Cell::points(0..perm.len()),
            ClassicalSystem::Dirac { points, .. } => Cell::points(0..*points),
        }
    }

    /// Symbol count for shift systems.
    pub fn symbols(&self) -> Option<usize> {
        match self {
            ClassicalSystem::BernoulliShift { probs } => Some(probs.len()),
            ClassicalSystem::MarkovShift { transition, .. } => Some(transition.len()),
            _ => None,
        }
    }

    /// Point count for finite systems.
    pub fn point_count(&self) -> Option<usize> {
        match self {
            ClassicalSystem::FinitePermutation { perm, .. } => Some(perm.len()),
            ClassicalSystem::Dirac { points, .. } => Some(*points),
            _ => None,
        }
    }

    fn expects_intervals(&self) -> bool {
        matches!(
            self,
            ClassicalSystem::DoublingMap | ClassicalSystem::Rotation { .. }
        )
    }

    /// Checks that a cell uses the representation this system measures.
    pub fn check_cell(&self, cell: &Cell) -> Result<()> {
        let ok = match self {
            ClassicalSystem::BernoulliShift { .. } | ClassicalSystem::MarkovShift { .. } => {
                matches!(cell, Cell::Cylinder(_))
            }
            ClassicalSystem::DoublingMap | ClassicalSystem::Rotation { .. } => {
                matches!(cell, Cell::Intervals(_))
            }
            ClassicalSystem::FinitePermutation { .. } | ClassicalSystem::Dirac { .. } => {
                matches!(cell, Cell::Points(_))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(KsError::ShapeMismatch(format!(
                "cell representation does not match system kind {}",
                self.kind_name()
            )))
        }
    }

    /// Exact measure of a cell.
    pub fn measure(&self, cell: &Cell) -> Result<f64> {
        self.check_cell(cell)?;
        Ok(match (self, cell) {
            (ClassicalSystem::BernoulliShift { probs }, Cell::Cylinder(c)) => {
                c.values().map(|&s| probs.get(s).copied().unwrap_or(0.0)).product()
            }
            (
                ClassicalSystem::MarkovShift {
                    transition,
                    stationary,
                },
                Cell::Cylinder(c),
            ) => markov_cylinder_measure(transition, stationary, c),
            (ClassicalSystem::DoublingMap, Cell::Intervals(v))
            | (ClassicalSystem::Rotation { .. }, Cell::Intervals(v)) => intervals_length(v),
            (ClassicalSystem::FinitePermutation { stationary, .. }, Cell::Points(p)) => {
                kahan_sum(p.iter().map(|&x| stationary[x]))
            }
            (ClassicalSystem::Dirac { point, .. }, Cell::Points(p)) => {
                if p.contains(point) {
                    1.0
                } else {
                    0.0
                }
            }
            _ => unreachable!("check_cell filters mismatches"),
        })
    }

    /// One application of `T^{-1}` to a cell.
    pub fn pullback_step(&self, cell: &Cell, tol: &Tolerances) -> Result<Cell> {
        self.check_cell(cell)?;
        let out = match (self, cell) {
            // shift: x in T^{-1}C iff Tx in C; (Tx)_m = x_{m+1}
            (ClassicalSystem::BernoulliShift { .. }, Cell::Cylinder(c))
            | (ClassicalSystem::MarkovShift { .. }, Cell::Cylinder(c)) => {
                Cell::Cylinder(c.iter().map(|(&p, &s)| (p + 1, s)).collect())
            }
            (ClassicalSystem::DoublingMap, Cell::Intervals(v)) => {
                // halving a sorted list keeps it sorted, and every left-half
                // image lies below 1/2 while every right-half image lies
                // above, so the concatenation needs no re-sort
                let mut out = Vec::with_capacity(v.len() * 2);
                for &(a, b) in v {
                    out.push((a / 2.0, b / 2.0));
                }
                for &(a, b) in v {
                    out.push(((a + 1.0) / 2.0, (b + 1.0) / 2.0));
                }
                debug_assert!(out.windows(2).all(|w| w[0].1 <= w[1].0));
                Cell::Intervals(out)
            }
            (ClassicalSystem::Rotation { theta, .. }, Cell::Intervals(v)) => {
                let mut out = Vec::with_capacity(v.len() + 1);
                for &(a, b) in v {
                    let len = b - a;
                    let start = (a - theta).rem_euclid(1.0);
                    let start = if start >= 1.0 { 0.0 } else { start };
                    if start + len <= 1.0 {
                        out.push((start, start + len));
                    } else {
                        out.push((start, 1.0));
                        out.push((0.0, start + len - 1.0));
                    }
                }
                Cell::Intervals(normalize_intervals(out)?)
            }
            (ClassicalSystem::FinitePermutation { perm, .. }, Cell::Points(p)) => {
                // T^{-1}(S) = { x : perm[x] in S }
                Cell::points((0..perm.len()).filter(|&x| p.contains(&perm[x])))
            }
            (ClassicalSystem::Dirac { .. }, Cell::Points(p)) => Cell::Points(p.clone()),
            _ => unreachable!("check_cell filters mismatches"),
        };
        if out.complexity() > tol.max_cell_complexity {
            return Err(KsError::BudgetExceeded(format!(
                "pulled-back cell has {} pieces (cap {})",
                out.complexity(),
                tol.max_cell_complexity
            )));
        }
        Ok(out)
    }

    /// `T^{-p}` applied to a cell.
    pub fn pullback(&self, cell: &Cell, p: usize, tol: &Tolerances) -> Result<Cell> {
        let mut out = cell.clone();
        for _ in 0..p {
            out = self.pullback_step(&out, tol)?;
        }
        Ok(out)
    }

    /// `|mu(T^{-1} C) - mu(C)|`.
    pub fn measure_preservation_residual(&self, cell: &Cell, tol: &Tolerances) -> Result<f64> {
        let direct = self.measure(cell)?;
        let pulled = self.measure(&self.pullback_step(cell, tol)?)?;
        Ok((direct - pulled).abs())
    }

    /// Closed-form entropy when the kind has one.
    pub fn generator_entropy(&self) -> Option<f64> {
        match self {
            ClassicalSystem::BernoulliShift { probs } => Some(kahan_sum(
                probs.iter().map(|&p| crate::entropy::eta_clamped(p)),
            )),
            ClassicalSystem::MarkovShift {
                transition,
                stationary,
            } => Some(kahan_sum(stationary.iter().enumerate().map(|(i, &pi)| {
                pi * kahan_sum(
                    transition[i]
                        .iter()
                        .map(|&p| crate::entropy::eta_clamped(p)),
                )
            }))),
            ClassicalSystem::DoublingMap => Some(std::f64::consts::LN_2),
            ClassicalSystem::Rotation { .. } => Some(0.0),
            ClassicalSystem::FinitePermutation { .. } | ClassicalSystem::Dirac { .. } => Some(0.0),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ClassicalSystem::BernoulliShift { .. } => "bernoulli-shift",
            ClassicalSystem::MarkovShift { .. } => "markov-shift",
            ClassicalSystem::DoublingMap => "doubling-map",
            ClassicalSystem::Rotation { .. } => "rotation",
            ClassicalSystem::FinitePermutation { .. } => "finite-permutation",
            ClassicalSystem::Dirac { .. } => "dirac",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ClassicalSystem::BernoulliShift { probs } => {
                format!("bernoulli-shift({probs:?})")
            }
            ClassicalSystem::MarkovShift { transition, .. } => {
                format!("markov-shift({} states)", transition.len())
            }
            ClassicalSystem::DoublingMap => "doubling-map".into(),
            ClassicalSystem::Rotation { theta, irrational } => {
                format!("rotation(theta={theta}, irrational={irrational})")
            }
            ClassicalSystem::FinitePermutation { perm, .. } => {
                format!("finite-permutation({} points)", perm.len())
            }
            ClassicalSystem::Dirac { point, points } => {
                format!("dirac(point {point} of {points})")
            }
        }
    }

    /// Intervals are measured by Lebesgue length for both interval kinds.
    pub fn is_interval_kind(&self) -> bool {
        self.expects_intervals()
    }
}

/// Measure of a Markov cylinder: chain rule over the constrained positions
/// with matrix powers bridging the gaps.
fn markov_cylinder_measure(
    transition: &[Vec<f64>],
    stationary: &[f64],
    constraints: &std::collections::BTreeMap<usize, usize>,
) -> f64 {
    let mut iter = constraints.iter();
    let Some((&first_pos, &first_sym)) = iter.next() else {
        return 1.0;
    };
    let _ = first_pos; // stationarity: the first constrained position contributes pi
    let mut value = stationary[first_sym];
    let mut prev_pos = first_pos;
    let mut prev_sym = first_sym;
    for (&pos, &sym) in iter {
        let gap = pos - prev_pos;
        value *= matrix_power_entry(transition, gap, prev_sym, sym);
        prev_pos = pos;
        prev_sym = sym;
    }
    value
}

/// `(P^gap)[from, to]` by repeated multiplication; gaps are at most the
/// refinement depth, so this stays cheap.
fn matrix_power_entry(p: &[Vec<f64>], gap: usize, from: usize, to: usize) -> f64 {
    let n = p.len();
    let mut row = vec![0.0; n];
    row[from] = 1.0;
    for _ in 0..gap {
        let mut next = vec![0.0; n];
        for (i, &ri) in row.iter().enumerate() {
            if ri != 0.0 {
                for j in 0..n {
                    next[j] += ri * p[i][j];
                }
            }
        }
        row = next;
    }
    row[to]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn markov_example() -> ClassicalSystem {
        ClassicalSystem::markov(
            vec![vec![0.9, 0.1], vec![0.5, 0.5]],
            vec![5.0 / 6.0, 1.0 / 6.0],
            &TOL,
        )
        .unwrap()
    }

    #[test]
    fn bernoulli_cylinder_measure() {
        let sys = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        let c = Cell::cylinder([(0, 1), (2, 0)]).unwrap();
        assert!((sys.measure(&c).unwrap() - 0.75 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn markov_gap_measure_uses_matrix_power() {
        let sys = markov_example();
        // constraint at positions 0 and 2: pi[0] * (P^2)[0][1]
        let c = Cell::cylinder([(0, 0), (2, 1)]).unwrap();
        let p2_01 = 0.9 * 0.1 + 0.1 * 0.5;
        assert!((sys.measure(&c).unwrap() - (5.0 / 6.0) * p2_01).abs() < 1e-15);
    }

    #[test]
    fn markov_rejects_non_stationary_vector() {
        assert!(ClassicalSystem::markov(
            vec![vec![0.9, 0.1], vec![0.5, 0.5]],
            vec![0.5, 0.5],
            &TOL,
        )
        .is_err());
    }

    #[test]
    fn doubling_pullback_of_left_half() {
        let sys = ClassicalSystem::DoublingMap;
        let c = Cell::interval(0.0, 0.5).unwrap();
        let p = sys.pullback(&c, 1, &TOL).unwrap();
        assert_eq!(
            p,
            Cell::Intervals(vec![(0.0, 0.25), (0.5, 0.75)])
        );
    }

    #[test]
    fn rotation_pullback_shifts_interval() {
        let theta = 0.3;
        let sys = ClassicalSystem::rotation(theta, false).unwrap();
        let c = Cell::interval(0.0, 0.5).unwrap();
        let p = sys.pullback(&c, 1, &TOL).unwrap();
        // [0, 1/2) - 0.3 mod 1 = [0.7, 1) u [0, 0.2)
        if let Cell::Intervals(v) = p {
            assert_eq!(v.len(), 2);
            assert!((v[0].0 - 0.0).abs() < 1e-12 && (v[0].1 - 0.2).abs() < 1e-12);
            assert!((v[1].0 - 0.7).abs() < 1e-12 && (v[1].1 - 1.0).abs() < 1e-12);
        } else {
            panic!("expected intervals");
        }
    }

    #[test]
    fn pullback_zero_is_identity() {
        let sys = ClassicalSystem::DoublingMap;
        let c = Cell::interval(0.25, 0.5).unwrap();
        assert_eq!(sys.pullback(&c, 0, &TOL).unwrap(), c);
    }

    #[test]
    fn permutation_pullback_and_invariance() {
        let sys =
            ClassicalSystem::permutation(vec![1, 2, 0], vec![1.0 / 3.0; 3], &TOL).unwrap();
        let c = Cell::points([0]);
        // T^{-1}({0}) = { x : perm[x] = 0 } = {2}
        assert_eq!(sys.pullback(&c, 1, &TOL).unwrap(), Cell::points([2]));
        assert!(sys.measure_preservation_residual(&c, &TOL).unwrap() < 1e-15);
    }

    #[test]
    fn measure_preservation_across_kinds() {
        let cases: Vec<(ClassicalSystem, Cell)> = vec![
            (
                ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap(),
                Cell::cylinder([(0, 1)]).unwrap(),
            ),
            (markov_example(), Cell::cylinder([(0, 0), (1, 1)]).unwrap()),
            (ClassicalSystem::DoublingMap, Cell::interval(0.1, 0.4).unwrap()),
            (
                ClassicalSystem::rotation(0.338, false).unwrap(),
                Cell::interval(0.2, 0.9).unwrap(),
            ),
        ];
        for (sys, cell) in cases {
            assert!(
                sys.measure_preservation_residual(&cell, &TOL).unwrap() < 1e-12,
                "kind {}",
                sys.kind_name()
            );
        }
    }

    #[test]
    fn closed_forms() {
        let b = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        assert!((b.generator_entropy().unwrap() - 0.562_335_144_618_808_3).abs() < 1e-12);
        let m = markov_example();
        assert!((m.generator_entropy().unwrap() - 0.386_427_007_919_531_05).abs() < 1e-12);
        let r = ClassicalSystem::rotation(std::f64::consts::SQRT_2 - 1.0, true).unwrap();
        assert_eq!(r.generator_entropy().unwrap(), 0.0);
        assert_eq!(
            ClassicalSystem::DoublingMap.generator_entropy().unwrap(),
            std::f64::consts::LN_2
        );
    }
}
