//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Expected values are frozen from independent routes: closed-form entropy
//! formulas evaluated inline, the brute-force domination oracle, and the
//! classical face of the window embeddings.

use std::time::Instant;

use kslab_core::classical::{self, ClassicalSystem, Partition};
use kslab_core::decomposition::choquet_refines;
use kslab_core::quantum::{self, CommutantProjectionFamily};
use kslab_core::search::SearchSpec;
use kslab_core::statespace::{self, AffineTransport, Isomorphism};
use kslab_core::{verify, Tolerances};

const TOL: Tolerances = Tolerances::DEFAULT;

fn pass(id: u32, name: &str, detail: String) {
    println!("criterion {id:02} {name}: PASS ({detail})");
}

fn markov_sys() -> ClassicalSystem {
    ClassicalSystem::markov(
        vec![vec![0.9, 0.1], vec![0.5, 0.5]],
        vec![5.0 / 6.0, 1.0 / 6.0],
        &TOL,
    )
    .unwrap()
}

#[test]
fn c01_bernoulli_oracle() {
    let started = Instant::now();
    let sys = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
    let p = Partition::symbols(&sys, &TOL).unwrap();
    let report = classical::entropy_sequence(&sys, &p, 12, &TOL).unwrap();
    // independent route: -sum p ln p evaluated directly
    let expected = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
    let err = (report.headline - expected).abs();
    let elapsed = started.elapsed();
    assert!(err <= 1e-3, "estimate {} vs {expected}", report.headline);
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(1, "bernoulli-oracle", format!("err {err:.2e}, {elapsed:?}"));
}

#[test]
fn c02_markov_oracle() {
    let started = Instant::now();
    let sys = markov_sys();
    let p = Partition::symbols(&sys, &TOL).unwrap();
    let report = classical::entropy_sequence(&sys, &p, 12, &TOL).unwrap();
    // independent route: -sum_i pi_i sum_j P_ij ln P_ij
    let pi = [5.0f64 / 6.0, 1.0 / 6.0];
    let pm = [[0.9f64, 0.1], [0.5, 0.5]];
    let mut expected = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            expected -= pi[i] * pm[i][j] * pm[i][j].ln();
        }
    }
    let err = (report.headline - expected).abs();
    let elapsed = started.elapsed();
    assert!(err <= 1e-3, "estimate {} vs {expected}", report.headline);
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(2, "markov-oracle", format!("err {err:.2e}, {elapsed:?}"));
}

#[test]
fn c03_doubling_map_increments() {
    let started = Instant::now();
    let sys = ClassicalSystem::DoublingMap;
    let p = Partition::dyadic(&sys, 1, &TOL).unwrap();
    let report = classical::entropy_sequence(&sys, &p, 16, &TOL).unwrap();
    let ln2 = std::f64::consts::LN_2;
    let mut worst = 0.0f64;
    for row in &report.rows {
        worst = worst.max((row.dh - ln2).abs());
    }
    let elapsed = started.elapsed();
    assert!(worst <= 1e-10, "worst increment deviation {worst:.3e}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(3, "doubling-map-increments", format!("max |dH - ln2| {worst:.2e}, {elapsed:?}"));
}

#[test]
fn c04_rotation_rate() {
    let started = Instant::now();
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let sys = ClassicalSystem::rotation(golden, true).unwrap();
    let p = Partition::two_arcs(&sys, &TOL).unwrap();
    let report = classical::entropy_sequence(&sys, &p, 32, &TOL).unwrap();
    let last = report.rows.last().unwrap();
    assert!(last.rate < 0.15, "rate at k=32 is {}", last.rate);
    for w in report.rows[24..].windows(2) {
        assert!(
            w[1].rate < w[0].rate,
            "rate not strictly decreasing at k={}",
            w[1].k
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(4, "rotation-rate", format!("rate(32) {:.4}, {elapsed:?}", last.rate));
}

#[test]
fn c05_dirac_triviality() {
    let sys = ClassicalSystem::dirac(1, 4).unwrap();
    let p = Partition::points(&sys, &TOL).unwrap();
    let report = classical::entropy_sequence(&sys, &p, 8, &TOL).unwrap();
    for row in &report.rows {
        assert_eq!(row.h, 0.0, "H({}) must vanish exactly", row.k);
    }
    let searched = classical::ks_entropy(&sys, &SearchSpec::default(), 8, &TOL).unwrap();
    assert_eq!(searched.headline, 0.0);
    assert_eq!(searched.raw_limit, 0.0);
    pass(5, "dirac-triviality", "every H(A_k) = 0 exactly".into());
}

#[test]
fn c06_pure_state_triviality() {
    let sys = quantum::qubit_system((1.0, 0.0), quantum::phase_unitary(0.83), &TOL).unwrap();
    let spec = SearchSpec {
        budget: 16,
        ..SearchSpec::default()
    };
    let report = quantum::mf_ks_entropy(&sys, &spec, 8, &TOL).unwrap();
    assert_eq!(report.headline, 0.0);
    assert_eq!(report.raw_limit, 0.0);
    assert_eq!(
        report.provenance.trace.len(),
        1,
        "candidate stream must contain only the trivial family"
    );
    assert_eq!(report.provenance.trace[0].candidate, "trivial");
    let general = statespace::h_phi_alpha(&sys, &spec, 6, &TOL).unwrap();
    assert_eq!(general.headline, 0.0);
    pass(6, "pure-state-triviality", "h = 0 exactly, stream = {trivial}".into());
}

#[test]
fn c07_classical_quantum_consistency() {
    let emb = quantum::embed_markov_cycle(&[vec![0.9, 0.1], vec![0.5, 0.5]], 6, &TOL).unwrap();
    let k_max = 6;
    let (classical_hs, truncated) =
        classical::entropy_values(&emb.classical, &emb.classical_partition, k_max, &TOL).unwrap();
    assert!(!truncated);
    let quantum_hs = quantum::mf_entropy_values(&emb.quantum, &emb.family, k_max, &TOL).unwrap();
    let mut worst = 0.0f64;
    for (c, q) in classical_hs.iter().zip(&quantum_hs) {
        worst = worst.max((c - q).abs());
    }
    assert!(worst <= 1e-10, "pipelines diverge by {worst:.3e}");
    // sanity: mid-horizon increment tracks the true chain rate
    let rate = classical_hs[3] - classical_hs[2];
    let expected = markov_sys().generator_entropy().unwrap();
    assert!(
        (rate - expected).abs() < 5e-2,
        "window increment {rate} far from {expected}"
    );
    pass(
        7,
        "classical-quantum-consistency",
        format!("max per-depth gap {worst:.2e} over k=0..{k_max}"),
    );
}

#[test]
fn c08_orthogonality_oracle() {
    let battery = verify::oracle_battery(3, 200, 0xACCE97, &TOL).unwrap();
    assert_eq!(battery.instances, 200);
    assert_eq!(
        battery.disagreements, 0,
        "rank test and domination oracle disagree"
    );
    pass(
        8,
        "orthogonality-oracle",
        format!(
            "200 instances, 0 disagreements, max residual {:.2e}, min witness {:.2e}",
            battery.max_residual_on_orthogonal, battery.min_witness_on_nonorthogonal
        ),
    );
}

#[test]
fn c09_order_laws() {
    let started = Instant::now();
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let systems: Vec<(ClassicalSystem, Partition)> = {
        let bernoulli = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        let markov = markov_sys();
        let doubling = ClassicalSystem::DoublingMap;
        let rotation = ClassicalSystem::rotation(golden, true).unwrap();
        let perm = ClassicalSystem::permutation(vec![1, 2, 3, 0], vec![0.25; 4], &TOL).unwrap();
        let dirac = ClassicalSystem::dirac(0, 3).unwrap();
        vec![
            (bernoulli.clone(), Partition::symbols(&bernoulli, &TOL).unwrap()),
            (markov.clone(), Partition::symbols(&markov, &TOL).unwrap()),
            (doubling.clone(), Partition::dyadic(&doubling, 1, &TOL).unwrap()),
            (rotation.clone(), Partition::two_arcs(&rotation, &TOL).unwrap()),
            (perm.clone(), Partition::points(&perm, &TOL).unwrap()),
            (dirac.clone(), Partition::points(&dirac, &TOL).unwrap()),
        ]
    };
    let mut pairs = 0usize;
    for (sys, p0) in &systems {
        let mut prev = classical::initial_algebra(sys, p0, &TOL).unwrap();
        let mut prev_h = classical::algebra_entropy(&prev);
        for _k in 1..=12 {
            let next = classical::refine_algebra(sys, &prev, p0, &TOL).unwrap();
            let fine = next.decomposition_on(&next, &TOL).unwrap();
            let coarse = prev.decomposition_on(&next, &TOL).unwrap();
            assert!(
                choquet_refines(&fine, &coarse, &TOL).unwrap(),
                "depth {} does not refine depth {} for {}",
                next.depth,
                prev.depth,
                sys.kind_name()
            );
            let h = classical::algebra_entropy(&next);
            assert!(
                h >= prev_h - 1e-12,
                "entropy decreased at depth {} for {}",
                next.depth,
                sys.kind_name()
            );
            pairs += 1;
            prev = next;
            prev_h = h;
        }
    }
    pass(
        9,
        "order-laws",
        format!("{pairs} consecutive-depth pairs, {:?}", started.elapsed()),
    );
}

#[test]
fn c10_isomorphism_invariance() {
    // quantum side: Hadamard conjugation of the bit-flip qubit system
    let sys = quantum::qubit_system((0.5, 0.5), quantum::pauli_x(), &TOL).unwrap();
    let mu = statespace::eigen_measure(&sys, &TOL).unwrap();
    let z = {
        use num_complex::Complex64;
        let m = kslab_core::linalg::CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        statespace::StateSpacePartition::new(vec![
            statespace::TestObservable::new(m, 0.5, "z0").unwrap()
        ])
        .unwrap()
    };
    let transport = AffineTransport::from_system(&sys);
    let base = statespace::general_entropy_values(&mu, &z, &transport, 8, &TOL).unwrap();
    let iso = Isomorphism::new(quantum::hadamard(), &TOL).unwrap();
    let (sys2, mu2, z2) = statespace::isomorphism_transport(&sys, &iso, &mu, &z, &TOL).unwrap();
    let transport2 = AffineTransport::from_system(&sys2);
    let moved = statespace::general_entropy_values(&mu2, &z2, &transport2, 8, &TOL).unwrap();
    let mut worst = 0.0f64;
    for (a, b) in base.iter().zip(&moved) {
        worst = worst.max((a - b).abs());
    }
    // also through the multiplicity-free pipeline
    let f0 = {
        let sc = sys.support(&TOL);
        CommutantProjectionFamily::from_support_basis(&sys, &sc.basis, &TOL).unwrap()
    };
    let mf_base = quantum::mf_entropy_values(&sys, &f0, 8, &TOL).unwrap();
    let f2 = iso.transport_family(&sys2, &f0, &TOL).unwrap();
    let mf_moved = quantum::mf_entropy_values(&sys2, &f2, 8, &TOL).unwrap();
    for (a, b) in mf_base.iter().zip(&mf_moved) {
        worst = worst.max((a - b).abs());
    }

    // classical side: relabeled Markov chain (states swapped)
    let sys_a = markov_sys();
    let sys_b = ClassicalSystem::markov(
        vec![vec![0.5, 0.5], vec![0.1, 0.9]],
        vec![1.0 / 6.0, 5.0 / 6.0],
        &TOL,
    )
    .unwrap();
    let (ha, _) =
        classical::entropy_values(&sys_a, &Partition::symbols(&sys_a, &TOL).unwrap(), 12, &TOL)
            .unwrap();
    let (hb, _) =
        classical::entropy_values(&sys_b, &Partition::symbols(&sys_b, &TOL).unwrap(), 12, &TOL)
            .unwrap();
    for (a, b) in ha.iter().zip(&hb) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst <= 1e-10, "entropy rows moved by {worst:.3e}");
    pass(10, "isomorphism-invariance", format!("max row deviation {worst:.2e}"));
}

#[test]
fn c11_hprime_dominates() {
    let golden = (5.0f64.sqrt() - 1.0) / 2.0;
    let unitaries = [
        ("pauli-x", quantum::pauli_x()),
        ("hadamard", quantum::hadamard()),
        ("phase", quantum::phase_unitary(std::f64::consts::PI * golden)),
    ];
    let mut runs = 0usize;
    for (name, u) in unitaries {
        for seed in [1u64, 2, 3] {
            let sys = quantum::qubit_system((0.5, 0.5), u.clone(), &TOL).unwrap();
            let spec = SearchSpec {
                seed,
                budget: 4,
                extra_measure_budget: 3,
                ..SearchSpec::default()
            };
            let h = statespace::h_phi_alpha(&sys, &spec, 5, &TOL).unwrap();
            let hp = statespace::h_prime_variant(&sys, &spec, 5, &TOL).unwrap();
            assert!(
                hp.headline >= h.headline - 1e-12,
                "{name} seed {seed}: h' {} < h {}",
                hp.headline,
                h.headline
            );
            assert!(
                hp.raw_limit >= h.raw_limit - 1e-12,
                "{name} seed {seed}: raw h' {} < h {}",
                hp.raw_limit,
                h.raw_limit
            );
            runs += 1;
        }
    }
    pass(11, "hprime-dominates", format!("{runs} matched runs"));
}

#[test]
fn c12_determinism() {
    let sys = markov_sys();
    let spec = SearchSpec::with_seed(9);
    let a = classical::ks_entropy(&sys, &spec, 10, &TOL).unwrap();
    let b = classical::ks_entropy(&sys, &spec, 10, &TOL).unwrap();
    assert_eq!(a.to_csv(), b.to_csv(), "classical CSV differs between runs");

    let qsys = quantum::qubit_system((0.5, 0.5), quantum::pauli_x(), &TOL).unwrap();
    let qa = statespace::h_phi_alpha(&qsys, &spec, 5, &TOL).unwrap();
    let qb = statespace::h_phi_alpha(&qsys, &spec, 5, &TOL).unwrap();
    assert_eq!(qa.to_csv(), qb.to_csv(), "state-space CSV differs between runs");

    let ma = quantum::mf_ks_entropy(&qsys, &spec, 5, &TOL).unwrap();
    let mb = quantum::mf_ks_entropy(&qsys, &spec, 5, &TOL).unwrap();
    assert_eq!(ma.to_csv(), mb.to_csv(), "mf CSV differs between runs");
    pass(12, "determinism", "bit-identical CSV on repeated runs".into());
}
