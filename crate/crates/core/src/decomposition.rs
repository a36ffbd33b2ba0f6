//! States, finite decompositions, orthogonality, and the Choquet order.
//!
//! A `FiniteDecomposition` is a finitely supported probability measure on the
//! state space: weights plus component states sharing a common barycenter.
//! Classically the components are measures on a finite algebra of cells;
//! quantum-mechanically they are density matrices. Orthogonality of positive
//! functionals (no common nonzero positive lower bound) is decided by
//! range/support independence, a criterion that is cross-checked against a
//! brute-force domination oracle in [`crate::verify`].

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde_json::json;

use crate::entropy::{kahan_sum, shannon_entropy};
use crate::error::{KsError, Result};
use crate::linalg::{
    self, hermitian_residual, hermitize, joint_rank, max_abs, min_eigenvalue, range_basis,
    support_calculus, trace_re, CMatrix, CVector,
};
use crate::tolerance::Tolerances;

// ---------------------------------------------------------------------------
// Weight vectors
// ---------------------------------------------------------------------------

/// Strictly positive weights summing to 1. Zero weights are dropped at
/// construction; `eta(0) = 0` makes them entropy-neutral anyway.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(raw: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let mut weights = Vec::with_capacity(raw.len());
        for w in raw {
            if w.is_nan() {
                return Err(KsError::InvalidWeights("NaN weight".into()));
            }
            if w < -tol.atom_drop {
                return Err(KsError::InvalidWeights(format!("negative weight {w}")));
            }
            if w <= tol.atom_drop {
                continue; // zero-weight component dropped
            }
            if w > 1.0 + tol.weight_sum {
                return Err(KsError::InvalidWeights(format!("weight {w} exceeds 1")));
            }
            weights.push(w);
        }
        if weights.is_empty() {
            return Err(KsError::InvalidWeights("no positive weights".into()));
        }
        let total = kahan_sum(weights.iter().copied());
        if (total - 1.0).abs() > tol.weight_sum {
            return Err(KsError::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

// ---------------------------------------------------------------------------
// Classical states
// ---------------------------------------------------------------------------

/// A positive measure on a finite algebra of cells, keyed by cell identifier.
/// Not necessarily normalized: this is the general positive classical
/// functional; decomposition components carry total 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalStateVector {
    masses: BTreeMap<String, f64>,
    total: f64,
}

impl ClassicalStateVector {
    pub fn new(masses: BTreeMap<String, f64>, tol: &Tolerances) -> Result<Self> {
        for (key, &m) in &masses {
            if m.is_nan() || m < -tol.support_mass {
                return Err(KsError::InvalidState(format!(
                    "negative mass {m} on cell {key}"
                )));
            }
        }
        let total = kahan_sum(masses.values().copied());
        Ok(Self { masses, total })
    }

    pub fn from_pairs<I, K>(pairs: I, tol: &Tolerances) -> Result<Self>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            *map.entry(k.into()).or_insert(0.0) += v;
        }
        Self::new(map, tol)
    }

    /// Point mass on a single cell.
    pub fn point(key: impl Into<String>) -> Self {
        let mut masses = BTreeMap::new();
        masses.insert(key.into(), 1.0);
        Self { masses, total: 1.0 }
    }

    pub fn masses(&self) -> &BTreeMap<String, f64> {
        &self.masses
    }

    pub fn mass(&self, key: &str) -> f64 {
        self.masses.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn support(&self, tol: &Tolerances) -> BTreeSet<&str> {
        self.masses
            .iter()
            .filter(|(_, &m)| m > tol.support_mass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.total <= 0.0 {
            return Err(KsError::InvalidState("cannot normalize zero measure".into()));
        }
        let masses = self
            .masses
            .iter()
            .map(|(k, &m)| (k.clone(), m / self.total))
            .collect();
        Ok(Self { masses, total: 1.0 })
    }
}

// ---------------------------------------------------------------------------
// Quantum states
// ---------------------------------------------------------------------------

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: CMatrix,
    dim: usize,
}

impl DensityState {
    pub fn new(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let dim = linalg::check_square(&matrix, "density matrix")?;
        if dim == 0 {
            return Err(KsError::InvalidState("empty density matrix".into()));
        }
        let herm = hermitian_residual(&matrix);
        if herm > tol.state_check {
            return Err(KsError::InvalidState(format!(
                "not Hermitian: residual {herm:.3e}"
            )));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < -tol.state_check {
            return Err(KsError::InvalidState(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        let tr = trace_re(&matrix);
        if (tr - 1.0).abs() > tol.state_check {
            return Err(KsError::InvalidState(format!("trace {tr}, not 1")));
        }
        Ok(Self { matrix, dim })
    }

    pub fn pure(v: &CVector, tol: &Tolerances) -> Result<Self> {
        let norm = v.norm();
        if norm <= 0.0 {
            return Err(KsError::InvalidState("zero vector".into()));
        }
        let u = v / Complex64::new(norm, 0.0);
        Self::new(&u * u.adjoint(), tol)
    }

    pub fn from_diagonal(probs: &[f64], tol: &Tolerances) -> Result<Self> {
        let matrix = CMatrix::from_diagonal(&CVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| Complex64::new(p, 0.0)),
        ));
        Self::new(matrix, tol)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let matrix = linalg::identity(dim) / Complex64::new(dim as f64, 0.0);
        Self { matrix, dim }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Support rank relative to the largest eigenvalue.
    pub fn rank(&self, tol: &Tolerances) -> usize {
        support_calculus(&self.matrix, tol.rank_svd).rank
    }
}

// ---------------------------------------------------------------------------
// The state contract used by FiniteDecomposition
// ---------------------------------------------------------------------------

pub trait StateLike: Clone + std::fmt::Debug {
    /// Entrywise max-abs distance.
    fn distance(&self, other: &Self) -> f64;

    /// Linear combination with positive coefficients. Callers own the
    /// normalization bookkeeping.
    fn mix(parts: &[(f64, &Self)]) -> Self;

    /// Orthogonality of the positive functionals carried by two states
    /// (disjoint supports / independent ranges); invariant under positive
    /// scaling of either side.
    fn states_orthogonal(a: &Self, b: &Self, tol: &Tolerances) -> bool;

    /// Joint independence of all supports/ranges: the single test that makes
    /// a decomposition orthogonal across every bipartition at once.
    fn states_independent(states: &[&Self], tol: &Tolerances) -> bool;

    /// Support/range containment of `inner` in `outer`.
    fn state_within(inner: &Self, outer: &Self, tol: &Tolerances) -> bool;

    /// Prepared lookup structure for [`StateLike::locate_within`].
    type ContainmentIndex;

    /// Builds the containment index of a jointly independent coarse family.
    fn containment_index(coarse: &[Self], tol: &Tolerances) -> Self::ContainmentIndex
    where
        Self: Sized;

    /// Index of the unique coarse state whose support/range contains `fine`
    /// (`None` if there is none). Classical states answer through a key
    /// lookup so that grouping thousands of atoms stays near-linear; the
    /// generic fallback scans.
    fn locate_within(
        fine: &Self,
        coarse: &[Self],
        index: &Self::ContainmentIndex,
        tol: &Tolerances,
    ) -> Option<usize>
    where
        Self: Sized;

    /// Kind tag used in serialized payloads.
    fn kind_name() -> &'static str;

    /// Serialized payload of one component.
    fn payload_json(&self) -> serde_json::Value;

    /// Kind-specific common refinement of two orthogonal decompositions with
    /// equal barycenters. See [`join`].
    fn join_decompositions(
        d1: &FiniteDecomposition<Self>,
        d2: &FiniteDecomposition<Self>,
        tol: &Tolerances,
    ) -> Result<FiniteDecomposition<Self>>
    where
        Self: Sized;
}

impl StateLike for ClassicalStateVector {
    fn distance(&self, other: &Self) -> f64 {
        let mut keys: BTreeSet<&String> = self.masses.keys().collect();
        keys.extend(other.masses.keys());
        keys.into_iter()
            .map(|k| (self.mass(k) - other.mass(k)).abs())
            .fold(0.0, f64::max)
    }

    fn mix(parts: &[(f64, &Self)]) -> Self {
        let mut masses: BTreeMap<String, f64> = BTreeMap::new();
        for (w, s) in parts {
            for (k, &m) in &s.masses {
                *masses.entry(k.clone()).or_insert(0.0) += w * m;
            }
        }
        let total = kahan_sum(masses.values().copied());
        Self { masses, total }
    }

    fn states_orthogonal(a: &Self, b: &Self, tol: &Tolerances) -> bool {
        a.support(tol).is_disjoint(&b.support(tol))
    }

    fn states_independent(states: &[&Self], tol: &Tolerances) -> bool {
        // Disjoint supports are exactly rank additivity for diagonal masses.
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for s in states {
            for key in s.support(tol) {
                if !seen.insert(key) {
                    return false;
                }
            }
        }
        true
    }

    fn state_within(inner: &Self, outer: &Self, tol: &Tolerances) -> bool {
        inner.support(tol).is_subset(&outer.support(tol))
    }

    type ContainmentIndex = BTreeMap<String, usize>;

    fn containment_index(coarse: &[Self], tol: &Tolerances) -> Self::ContainmentIndex {
        let mut map = BTreeMap::new();
        for (j, c) in coarse.iter().enumerate() {
            for key in c.support(tol) {
                map.insert(key.to_string(), j);
            }
        }
        map
    }

    fn locate_within(
        fine: &Self,
        _coarse: &[Self],
        index: &Self::ContainmentIndex,
        tol: &Tolerances,
    ) -> Option<usize> {
        // independence of the coarse supports makes the owner of the first
        // key the only candidate; every other key must agree
        let mut owner = None;
        for key in fine.support(tol) {
            match (owner, index.get(key)) {
                (_, None) => return None,
                (None, Some(&j)) => owner = Some(j),
                (Some(prev), Some(&j)) if prev != j => return None,
                _ => {}
            }
        }
        owner
    }

    fn kind_name() -> &'static str {
        "classical"
    }

    fn payload_json(&self) -> serde_json::Value {
        json!({ "masses": self.masses })
    }

    fn join_decompositions(
        d1: &FiniteDecomposition<Self>,
        d2: &FiniteDecomposition<Self>,
        tol: &Tolerances,
    ) -> Result<FiniteDecomposition<Self>> {
        // Components of an orthogonal classical decomposition are restrictions
        // of the barycenter to disjoint key sets, so the cellwise minimum of
        // two scaled components is exactly the restriction to the overlap.
        let mut weights = Vec::new();
        let mut components = Vec::new();
        for (i, a) in d1.components.iter().enumerate() {
            let wa = d1.weights.get(i);
            for (j, b) in d2.components.iter().enumerate() {
                let wb = d2.weights.get(j);
                let mut masses = BTreeMap::new();
                for (k, &ma) in &a.masses {
                    let mb = b.mass(k);
                    let meet = (wa * ma).min(wb * mb);
                    if meet > tol.atom_drop {
                        masses.insert(k.clone(), meet);
                    }
                }
                let w = kahan_sum(masses.values().copied());
                if w > tol.atom_drop {
                    let comp = ClassicalStateVector::new(
                        masses.into_iter().map(|(k, m)| (k, m / w)).collect(),
                        tol,
                    )?;
                    weights.push(w);
                    components.push(comp);
                }
            }
        }
        FiniteDecomposition::new(weights, components, d1.barycenter.clone(), tol)
    }
}

impl StateLike for DensityState {
    fn distance(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    fn mix(parts: &[(f64, &Self)]) -> Self {
        let dim = parts.first().map(|(_, s)| s.dim).unwrap_or(0);
        let mut matrix = CMatrix::zeros(dim, dim);
        for (w, s) in parts {
            matrix += &s.matrix * Complex64::new(*w, 0.0);
        }
        Self { matrix, dim }
    }

    fn states_orthogonal(a: &Self, b: &Self, tol: &Tolerances) -> bool {
        ranges_independent(&[&a.matrix, &b.matrix], tol)
    }

    fn states_independent(states: &[&Self], tol: &Tolerances) -> bool {
        let mats: Vec<&CMatrix> = states.iter().map(|s| &s.matrix).collect();
        ranges_independent(&mats, tol)
    }

    fn state_within(inner: &Self, outer: &Self, tol: &Tolerances) -> bool {
        range_contained(&inner.matrix, &outer.matrix, tol)
    }

    type ContainmentIndex = ();

    fn containment_index(_coarse: &[Self], _tol: &Tolerances) {}

    fn locate_within(
        fine: &Self,
        coarse: &[Self],
        _index: &(),
        tol: &Tolerances,
    ) -> Option<usize> {
        coarse.iter().position(|c| Self::state_within(fine, c, tol))
    }

    fn kind_name() -> &'static str {
        "quantum"
    }

    fn payload_json(&self) -> serde_json::Value {
        json!({ "dim": self.dim, "matrix": matrix_to_json(&self.matrix) })
    }

    fn join_decompositions(
        d1: &FiniteDecomposition<Self>,
        d2: &FiniteDecomposition<Self>,
        tol: &Tolerances,
    ) -> Result<FiniteDecomposition<Self>> {
        join_quantum(d1, d2, tol)
    }
}

pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

/// Rank additivity of ranges, computed on orthonormal range bases so that
/// small weights cannot wash a component's direction out of the test.
fn ranges_independent(mats: &[&CMatrix], tol: &Tolerances) -> bool {
    let bases: Vec<CMatrix> = mats.iter().map(|m| range_basis(m, tol.rank_svd)).collect();
    let rank_sum: usize = bases.iter().map(|b| b.ncols()).sum();
    joint_rank(&bases, tol.rank_svd) == rank_sum
}

fn range_contained(inner: &CMatrix, outer: &CMatrix, tol: &Tolerances) -> bool {
    let bi = range_basis(inner, tol.rank_svd);
    let bo = range_basis(outer, tol.rank_svd);
    joint_rank(&[bo.clone(), bi], tol.rank_svd) == bo.ncols()
}

// ---------------------------------------------------------------------------
// Orthogonality of raw positive functionals
// ---------------------------------------------------------------------------

/// Orthogonality of two positive classical functionals: TRUE iff no nonzero
/// positive functional is dominated by both, which for measures on a finite
/// algebra is disjointness of supports.
pub fn functionals_orthogonal_classical(
    a: &ClassicalStateVector,
    b: &ClassicalStateVector,
    tol: &Tolerances,
) -> Result<bool> {
    Ok(ClassicalStateVector::states_orthogonal(a, b, tol))
}

/// Orthogonality of two positive matrix functionals: TRUE iff the only
/// positive `g` with `g <= a` and `g <= b` is zero. Realized as range
/// independence, `rank([basis(a) | basis(b)]) = rank(a) + rank(b)`; domination
/// forces `range(g)` into `range(a) ∩ range(b)` in finite dimension, so the
/// criterion is equivalent. Cross-checked against the brute-force oracle in
/// [`crate::verify`].
pub fn functionals_orthogonal_quantum(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<bool> {
    for (name, m) in [("first", a), ("second", b)] {
        linalg::check_square(m, "positive functional")?;
        let scale = max_abs(m).max(1.0);
        if hermitian_residual(m) > tol.state_check * scale {
            return Err(KsError::InvalidState(format!(
                "{name} argument is not Hermitian"
            )));
        }
        if min_eigenvalue(m) < -tol.state_check * scale {
            return Err(KsError::InvalidState(format!(
                "{name} argument is not positive"
            )));
        }
    }
    if a.nrows() != b.nrows() {
        return Err(KsError::ShapeMismatch(format!(
            "dimension {} vs {}",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(ranges_independent(&[a, b], tol))
}

// ---------------------------------------------------------------------------
// Finite decompositions
// ---------------------------------------------------------------------------

/// A finitely supported measure on the state space: weights and component
/// states with a common barycenter.
#[derive(Debug, Clone)]
pub struct FiniteDecomposition<S: StateLike> {
    weights: WeightVector,
    components: Vec<S>,
    barycenter: S,
}

impl<S: StateLike> FiniteDecomposition<S> {
    /// Validating constructor: drops zero weights, merges duplicate
    /// components by adding their weights, and checks that the weighted sum
    /// of components reproduces the barycenter.
    pub fn new(weights: Vec<f64>, components: Vec<S>, barycenter: S, tol: &Tolerances) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(KsError::InvalidDecomposition(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        // Pairwise duplicate detection is quadratic; above this size the
        // inputs come from refinement machinery whose components sit on
        // distinct atoms, so the scan is skipped.
        const MERGE_SCAN_LIMIT: usize = 256;
        let scan_duplicates = weights.len() <= MERGE_SCAN_LIMIT;
        let mut merged_w: Vec<f64> = Vec::new();
        let mut merged_c: Vec<S> = Vec::new();
        for (w, c) in weights.into_iter().zip(components) {
            if w.is_nan() {
                return Err(KsError::InvalidDecomposition("NaN weight".into()));
            }
            if w <= tol.atom_drop {
                continue;
            }
            let duplicate = if scan_duplicates {
                merged_c.iter().position(|m| m.distance(&c) <= tol.barycenter)
            } else {
                None
            };
            match duplicate {
                Some(i) => merged_w[i] += w,
                None => {
                    merged_w.push(w);
                    merged_c.push(c);
                }
            }
        }
        let weights = WeightVector::new(merged_w, tol)?;
        let mixture_parts: Vec<(f64, &S)> =
            weights.iter().zip(merged_c.iter()).collect();
        let mixture = S::mix(&mixture_parts);
        let deviation = mixture.distance(&barycenter);
        if deviation > tol.barycenter {
            return Err(KsError::BarycenterMismatch {
                deviation,
                tolerance: tol.barycenter,
            });
        }
        Ok(Self {
            weights,
            components: merged_c,
            barycenter,
        })
    }

    /// The one-component decomposition carried by every state.
    pub fn trivial(barycenter: S) -> Self {
        Self {
            weights: WeightVector {
                weights: vec![1.0],
            },
            components: vec![barycenter.clone()],
            barycenter,
        }
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn components(&self) -> &[S] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &S {
        &self.components[i]
    }

    pub fn barycenter(&self) -> &S {
        &self.barycenter
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Max-abs deviation of the weighted component sum from the barycenter.
    pub fn barycenter_residual(&self) -> f64 {
        let parts: Vec<(f64, &S)> = self.weights.iter().zip(self.components.iter()).collect();
        S::mix(&parts).distance(&self.barycenter)
    }

    /// TRUE iff the scaled components have jointly independent
    /// supports/ranges — equivalent to orthogonality of every split of the
    /// decomposition against its complement, because the range of a partial
    /// sum is the span of its members' ranges.
    pub fn is_orthogonal(&self, tol: &Tolerances) -> bool {
        let refs: Vec<&S> = self.components.iter().collect();
        S::states_independent(&refs, tol)
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.weights)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "kind": S::kind_name(),
            "weights": self.weights.as_slice(),
            "components": self.components.iter().map(|c| c.payload_json()).collect::<Vec<_>>(),
            "barycenter": self.barycenter.payload_json(),
        })
    }
}

// ---------------------------------------------------------------------------
// Choquet refinement order (atomic measures)
// ---------------------------------------------------------------------------

/// Decides whether `fine` refines `coarse` in the Choquet order: whether the
/// fine components can be partitioned into groups whose weight-renormalized
/// sums reproduce the coarse components. For a pair of orthogonal
/// decompositions the grouping is found by support/range matching; otherwise
/// a backtracking search over assignments is used (capped at 12 components).
pub fn choquet_refines<S: StateLike>(
    fine: &FiniteDecomposition<S>,
    coarse: &FiniteDecomposition<S>,
    tol: &Tolerances,
) -> Result<bool> {
    let deviation = fine.barycenter.distance(&coarse.barycenter);
    if deviation > tol.barycenter {
        return Err(KsError::BarycenterMismatch {
            deviation,
            tolerance: tol.barycenter,
        });
    }
    if fine.is_orthogonal(tol) && coarse.is_orthogonal(tol) {
        return Ok(greedy_grouping(fine, coarse, tol));
    }
    if fine.len() > 12 {
        return Err(KsError::BudgetExceeded(format!(
            "grouping search over {} non-orthogonal components (cap 12)",
            fine.len()
        )));
    }
    Ok(backtrack_grouping(fine, coarse, tol))
}

fn greedy_grouping<S: StateLike>(
    fine: &FiniteDecomposition<S>,
    coarse: &FiniteDecomposition<S>,
    tol: &Tolerances,
) -> bool {
    // Coarse ranges are independent, so at most one can contain each fine
    // component; the index answers that membership without a full scan.
    let index = S::containment_index(&coarse.components, tol);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); coarse.len()];
    for (i, f) in fine.components.iter().enumerate() {
        match S::locate_within(f, &coarse.components, &index, tol) {
            Some(j) => groups[j].push(i),
            None => return false,
        }
    }
    verify_grouping(fine, coarse, &groups, tol)
}

fn verify_grouping<S: StateLike>(
    fine: &FiniteDecomposition<S>,
    coarse: &FiniteDecomposition<S>,
    groups: &[Vec<usize>],
    tol: &Tolerances,
) -> bool {
    for (j, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return false;
        }
        let wsum = kahan_sum(group.iter().map(|&i| fine.weights.get(i)));
        if (wsum - coarse.weights.get(j)).abs() > tol.barycenter {
            return false;
        }
        let parts: Vec<(f64, &S)> = group
            .iter()
            .map(|&i| (fine.weights.get(i), &fine.components[i]))
            .collect();
        let sum = S::mix(&parts);
        let target = S::mix(&[(coarse.weights.get(j), &coarse.components[j])]);
        if sum.distance(&target) > tol.barycenter {
            return false;
        }
    }
    true
}

fn backtrack_grouping<S: StateLike>(
    fine: &FiniteDecomposition<S>,
    coarse: &FiniteDecomposition<S>,
    tol: &Tolerances,
) -> bool {
    let n = fine.len();
    let m = coarse.len();
    let mut assignment = vec![usize::MAX; n];
    let mut remaining: Vec<f64> = (0..m).map(|j| coarse.weights.get(j)).collect();
    // Heaviest components first: weight pruning bites earlier.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        fine.weights
            .get(b)
            .partial_cmp(&fine.weights.get(a))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    fn recurse<S: StateLike>(
        depth: usize,
        order: &[usize],
        fine: &FiniteDecomposition<S>,
        coarse: &FiniteDecomposition<S>,
        assignment: &mut [usize],
        remaining: &mut [f64],
        tol: &Tolerances,
    ) -> bool {
        if depth == order.len() {
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); coarse.len()];
            for (i, &j) in assignment.iter().enumerate() {
                groups[j].push(i);
            }
            return verify_grouping(fine, coarse, &groups, tol);
        }
        let i = order[depth];
        let w = fine.weights.get(i);
        for j in 0..coarse.len() {
            if remaining[j] + tol.barycenter < w {
                continue;
            }
            assignment[i] = j;
            remaining[j] -= w;
            if recurse(depth + 1, order, fine, coarse, assignment, remaining, tol) {
                return true;
            }
            remaining[j] += w;
            assignment[i] = usize::MAX;
        }
        false
    }
    recurse(0, &order, fine, coarse, &mut assignment, &mut remaining, tol)
}

// ---------------------------------------------------------------------------
// Join (common refinement)
// ---------------------------------------------------------------------------

/// Common refinement of two orthogonal decompositions with equal barycenter.
/// Classical inputs must be expressed over a shared cell-key universe (which
/// decompositions built over one refined algebra are); quantum inputs must be
/// induced by commuting projection families, which is checked and otherwise
/// rejected with [`KsError::NonCommuting`].
pub fn join<S: StateLike>(
    d1: &FiniteDecomposition<S>,
    d2: &FiniteDecomposition<S>,
    tol: &Tolerances,
) -> Result<FiniteDecomposition<S>> {
    let deviation = d1.barycenter.distance(&d2.barycenter);
    if deviation > tol.barycenter {
        return Err(KsError::BarycenterMismatch {
            deviation,
            tolerance: tol.barycenter,
        });
    }
    if !d1.is_orthogonal(tol) || !d2.is_orthogonal(tol) {
        return Err(KsError::InvalidDecomposition(
            "join requires orthogonal decompositions".into(),
        ));
    }
    S::join_decompositions(d1, d2, tol)
}

/// Reconstruction tolerance for projections recovered through the
/// pseudo-inverse square root of the barycenter; looser than the state checks
/// because the inversion amplifies component rounding by the condition number
/// of the barycenter.
const PROJECTION_RECOVERY_TOL: f64 = 1e-7;

fn join_quantum(
    d1: &FiniteDecomposition<DensityState>,
    d2: &FiniteDecomposition<DensityState>,
    tol: &Tolerances,
) -> Result<FiniteDecomposition<DensityState>> {
    let rho = d1.barycenter.matrix();
    let sc = support_calculus(rho, tol.rank_svd);
    let recover = |d: &FiniteDecomposition<DensityState>| -> Result<Vec<CMatrix>> {
        let mut qs = Vec::with_capacity(d.len());
        for (i, comp) in d.components.iter().enumerate() {
            let scaled = comp.matrix() * Complex64::new(d.weights.get(i), 0.0);
            let q = hermitize(&(&sc.sqrt_pinv * scaled * &sc.sqrt_pinv));
            let idem = max_abs(&(&q * &q - &q));
            if idem > PROJECTION_RECOVERY_TOL {
                return Err(KsError::InvalidDecomposition(format!(
                    "component {i} is not induced by a projection on the barycenter support \
                     (idempotency residual {idem:.3e})"
                )));
            }
            qs.push(q);
        }
        Ok(qs)
    };
    let qs = recover(d1)?;
    let ps = recover(d2)?;
    let mut worst = 0.0f64;
    for q in &qs {
        for p in &ps {
            worst = worst.max(linalg::commutator_norm(q, p));
        }
    }
    if worst > tol.commutation {
        return Err(KsError::NonCommuting {
            norm: worst,
            depth: None,
        });
    }
    let mut weights = Vec::new();
    let mut components = Vec::new();
    for q in &qs {
        for p in &ps {
            let g = hermitize(&(q * p));
            let scaled = hermitize(&(&sc.sqrt * &g * &sc.sqrt));
            let w = trace_re(&scaled);
            if w > tol.atom_drop {
                let comp = DensityState::new(scaled / Complex64::new(w, 0.0), tol)?;
                weights.push(w);
                components.push(comp);
            }
        }
    }
    FiniteDecomposition::new(weights, components, d1.barycenter.clone(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn csv(pairs: &[(&str, f64)]) -> ClassicalStateVector {
        ClassicalStateVector::from_pairs(pairs.iter().map(|&(k, v)| (k, v)), &TOL).unwrap()
    }

    fn diag3(a: f64, b: f64, c: f64) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
        ]))
    }

    fn pure2(x: f64, y: f64) -> CMatrix {
        let v = CVector::from_vec(vec![Complex64::new(x, 0.0), Complex64::new(y, 0.0)]);
        let n = v.norm();
        let u = &v / Complex64::new(n, 0.0);
        &u * u.adjoint()
    }

    #[test]
    fn weight_vector_drops_zeros_and_validates_sum() {
        let w = WeightVector::new(vec![0.5, 0.0, 0.5], &TOL).unwrap();
        assert_eq!(w.len(), 2);
        assert!(WeightVector::new(vec![0.5, 0.4], &TOL).is_err());
        assert!(WeightVector::new(vec![0.5, -0.1, 0.6], &TOL).is_err());
    }

    #[test]
    fn density_state_validation() {
        assert!(DensityState::from_diagonal(&[0.5, 0.5], &TOL).is_ok());
        // trace defect
        assert!(DensityState::from_diagonal(&[0.5, 0.499], &TOL).is_err());
        // negative eigenvalue
        assert!(DensityState::from_diagonal(&[1.2, -0.2], &TOL).is_err());
        // non-Hermitian
        let mut m = diag3(0.5, 0.3, 0.2);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityState::new(m, &TOL).is_err());
    }

    #[test]
    fn orthogonal_diagonal_supports() {
        let a = diag3(1.0, 0.0, 0.0);
        let b = diag3(0.0, 1.0, 0.0);
        assert!(functionals_orthogonal_quantum(&a, &b, &TOL).unwrap());
    }

    #[test]
    fn distinct_pure_states_are_orthogonal_functionals() {
        // Rank-1 ranges spanned by (1,0) and (1,1)/sqrt2 are independent even
        // though the vectors are not perpendicular.
        let a = pure2(1.0, 0.0);
        let b = pure2(1.0, 1.0);
        assert!(functionals_orthogonal_quantum(&a, &b, &TOL).unwrap());
    }

    #[test]
    fn dominated_part_detected() {
        // g = diag(1/2, 0) sits below both I/2 and diag(1,0).
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ]));
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        assert!(!functionals_orthogonal_quantum(&a, &b, &TOL).unwrap());
    }

    #[test]
    fn rejects_non_positive_input() {
        let a = diag3(1.0, -1.0, 0.0);
        let b = diag3(1.0, 0.0, 0.0);
        assert!(functionals_orthogonal_quantum(&a, &b, &TOL).is_err());
    }

    #[test]
    fn decomposition_merges_duplicates() {
        let c = csv(&[("x", 1.0)]);
        let d = FiniteDecomposition::new(
            vec![0.25, 0.25, 0.5],
            vec![c.clone(), c.clone(), csv(&[("y", 1.0)])],
            csv(&[("x", 0.5), ("y", 0.5)]),
            &TOL,
        )
        .unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.weights().get(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn barycenter_mismatch_rejected() {
        let d = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![csv(&[("x", 1.0)]), csv(&[("y", 1.0)])],
            csv(&[("x", 0.6), ("y", 0.4)]),
            &TOL,
        );
        assert!(matches!(d, Err(KsError::BarycenterMismatch { .. })));
    }

    #[test]
    fn qubit_basis_split_is_orthogonal() {
        let rho = DensityState::maximally_mixed(2);
        let up = DensityState::new(pure2(1.0, 0.0), &TOL).unwrap();
        let down = DensityState::new(pure2(0.0, 1.0), &TOL).unwrap();
        let d = FiniteDecomposition::new(vec![0.5, 0.5], vec![up, down], rho, &TOL).unwrap();
        assert!(d.is_orthogonal(&TOL));
        assert!(d.barycenter_residual() <= 1e-12);
    }

    #[test]
    fn bloch_trine_is_not_orthogonal() {
        // Three pure states at Bloch angles 0, 120, 240 average to I/2 but
        // three rank-1 ranges cannot be independent in dimension 2.
        let rho = DensityState::maximally_mixed(2);
        let comps: Vec<DensityState> = [0.0, 120.0, 240.0]
            .iter()
            .map(|deg: &f64| {
                let half = deg.to_radians() / 2.0;
                DensityState::new(pure2(half.cos(), half.sin()), &TOL).unwrap()
            })
            .collect();
        let d = FiniteDecomposition::new(vec![1.0 / 3.0; 3], comps, rho, &TOL).unwrap();
        assert!(!d.is_orthogonal(&TOL));
    }

    #[test]
    fn choquet_reflexive() {
        let d = FiniteDecomposition::new(
            vec![0.25, 0.75],
            vec![csv(&[("a", 1.0)]), csv(&[("b", 1.0)])],
            csv(&[("a", 0.25), ("b", 0.75)]),
            &TOL,
        )
        .unwrap();
        assert!(choquet_refines(&d, &d, &TOL).unwrap());
    }

    #[test]
    fn choquet_dyadic_merge() {
        // four dyadic cells refine the two halves
        let bary = csv(&[("c00", 0.25), ("c01", 0.25), ("c10", 0.25), ("c11", 0.25)]);
        let fine = FiniteDecomposition::new(
            vec![0.25; 4],
            vec![
                csv(&[("c00", 1.0)]),
                csv(&[("c01", 1.0)]),
                csv(&[("c10", 1.0)]),
                csv(&[("c11", 1.0)]),
            ],
            bary.clone(),
            &TOL,
        )
        .unwrap();
        let coarse = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                csv(&[("c00", 0.5), ("c01", 0.5)]),
                csv(&[("c10", 0.5), ("c11", 0.5)]),
            ],
            bary,
            &TOL,
        )
        .unwrap();
        assert!(choquet_refines(&fine, &coarse, &TOL).unwrap());
        assert!(!choquet_refines(&coarse, &fine, &TOL).unwrap());
    }

    #[test]
    fn choquet_unrelated_bases_fail() {
        let rho = DensityState::maximally_mixed(2);
        let z = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                DensityState::new(pure2(1.0, 0.0), &TOL).unwrap(),
                DensityState::new(pure2(0.0, 1.0), &TOL).unwrap(),
            ],
            rho.clone(),
            &TOL,
        )
        .unwrap();
        let x = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                DensityState::new(pure2(1.0, 1.0), &TOL).unwrap(),
                DensityState::new(pure2(1.0, -1.0), &TOL).unwrap(),
            ],
            rho,
            &TOL,
        )
        .unwrap();
        assert!(!choquet_refines(&z, &x, &TOL).unwrap());
        assert!(!choquet_refines(&x, &z, &TOL).unwrap());
    }

    #[test]
    fn join_with_trivial_is_identity() {
        let bary = csv(&[("a", 0.5), ("b", 0.5)]);
        let d = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![csv(&[("a", 1.0)]), csv(&[("b", 1.0)])],
            bary.clone(),
            &TOL,
        )
        .unwrap();
        let trivial = FiniteDecomposition::trivial(bary);
        let joined = join(&d, &trivial, &TOL).unwrap();
        assert_eq!(joined.len(), 2);
        assert!(choquet_refines(&joined, &d, &TOL).unwrap());
        assert!(choquet_refines(&d, &joined, &TOL).unwrap());
    }

    #[test]
    fn join_of_interleaved_halves_gives_four_cells() {
        // keys are the four dyadic quarters; d1 groups them into halves,
        // d2 into {first∪third, second∪fourth}.
        let bary = csv(&[("q0", 0.25), ("q1", 0.25), ("q2", 0.25), ("q3", 0.25)]);
        let d1 = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                csv(&[("q0", 0.5), ("q1", 0.5)]),
                csv(&[("q2", 0.5), ("q3", 0.5)]),
            ],
            bary.clone(),
            &TOL,
        )
        .unwrap();
        let d2 = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                csv(&[("q0", 0.5), ("q2", 0.5)]),
                csv(&[("q1", 0.5), ("q3", 0.5)]),
            ],
            bary,
            &TOL,
        )
        .unwrap();
        let joined = join(&d1, &d2, &TOL).unwrap();
        assert_eq!(joined.len(), 4);
        for w in joined.weights().iter() {
            assert!((w - 0.25).abs() < 1e-12);
        }
        assert!(choquet_refines(&joined, &d1, &TOL).unwrap());
        assert!(choquet_refines(&joined, &d2, &TOL).unwrap());
    }

    #[test]
    fn join_of_noncommuting_bases_rejected() {
        let rho = DensityState::maximally_mixed(2);
        let z = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                DensityState::new(pure2(1.0, 0.0), &TOL).unwrap(),
                DensityState::new(pure2(0.0, 1.0), &TOL).unwrap(),
            ],
            rho.clone(),
            &TOL,
        )
        .unwrap();
        let x = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                DensityState::new(pure2(1.0, 1.0), &TOL).unwrap(),
                DensityState::new(pure2(1.0, -1.0), &TOL).unwrap(),
            ],
            rho,
            &TOL,
        )
        .unwrap();
        assert!(matches!(
            join(&z, &x, &TOL),
            Err(KsError::NonCommuting { .. })
        ));
    }

    #[test]
    fn quantum_join_with_trivial_is_identity() {
        let rho = DensityState::maximally_mixed(2);
        let z = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                DensityState::new(pure2(1.0, 0.0), &TOL).unwrap(),
                DensityState::new(pure2(0.0, 1.0), &TOL).unwrap(),
            ],
            rho.clone(),
            &TOL,
        )
        .unwrap();
        let trivial = FiniteDecomposition::trivial(rho);
        let joined = join(&z, &trivial, &TOL).unwrap();
        assert_eq!(joined.len(), 2);
        assert!(choquet_refines(&joined, &z, &TOL).unwrap());
        assert!(choquet_refines(&z, &joined, &TOL).unwrap());
    }

    #[test]
    fn entropy_monotone_under_refinement() {
        let bary = csv(&[("c00", 0.25), ("c01", 0.25), ("c10", 0.25), ("c11", 0.25)]);
        let fine = FiniteDecomposition::new(
            vec![0.25; 4],
            vec![
                csv(&[("c00", 1.0)]),
                csv(&[("c01", 1.0)]),
                csv(&[("c10", 1.0)]),
                csv(&[("c11", 1.0)]),
            ],
            bary.clone(),
            &TOL,
        )
        .unwrap();
        let coarse = FiniteDecomposition::new(
            vec![0.5, 0.5],
            vec![
                csv(&[("c00", 0.5), ("c01", 0.5)]),
                csv(&[("c10", 0.5), ("c11", 0.5)]),
            ],
            bary,
            &TOL,
        )
        .unwrap();
        assert!(fine.entropy() >= coarse.entropy() - 1e-12);
    }
}
