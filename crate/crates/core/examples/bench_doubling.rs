use std::time::Instant;
fn main() {
    let tol = kslab_core::Tolerances::DEFAULT;
    let sys = kslab_core::classical::ClassicalSystem::DoublingMap;
    let p = kslab_core::classical::Partition::dyadic(&sys, 1, &tol).unwrap();
    for _ in 0..3 {
        let t0 = Instant::now();
        let (hs, _) = kslab_core::classical::entropy_values(&sys, &p, 16, &tol).unwrap();
        println!("k16: {:?} (H = {:.6})", t0.elapsed(), hs.last().unwrap());
    }
    let t0 = Instant::now();
    let mut chain = kslab_core::classical::RefinementChain::new(&sys, &p, &tol).unwrap();
    for k in 1..=16 {
        let t1 = Instant::now();
        chain.step(&tol).unwrap();
        if k >= 13 { println!("step {k}: {:?} atoms {}", t1.elapsed(), chain.algebra().atom_count()); }
    }
    println!("total {:?}", t0.elapsed());
}
