//! Monte Carlo check of the expectation bound behind the l1 analysis.
//!
//! For independent X_j taking value 1 - p_j with probability p_j and -p_j
//! otherwise, E|X_1 + ... + X_q| <= sqrt(ln 2 / 2) * sqrt(q). The same
//! simulation backs the `cvp lemma-sim` subcommand.
//!
//! Run with `cargo run --release --example lemma_simulation`.

use cvp::rounding::{deviation_bound, deviation_estimate, RngSpec};
use rand::Rng;

fn main() {
    let trials = 100_000;
    for q in [1usize, 10, 100, 1000] {
        let mut rng = RngSpec::new(17, 1).rng();
        let p: Vec<f64> = (0..q).map(|_| rng.gen::<f64>()).collect();
        let est = deviation_estimate(&p, trials, &RngSpec::new(17, 0)).unwrap();
        let bound = deviation_bound(q);
        println!(
            "q = {q:4}: mean |sum| = {:>8.4} +- {:.4}, bound {:.4} -> {}",
            est.mean,
            est.std_error,
            bound,
            if est.mean <= bound + 3.0 * est.std_error { "PASS" } else { "FAIL" }
        );
    }

    // Closed form sanity check: q = 1, p = 1/2 gives E|X| = 1/2 exactly.
    let est = deviation_estimate(&[0.5], trials, &RngSpec::new(17, 0)).unwrap();
    println!("q = 1, p = 0.5: mean {} (closed form 0.5)", est.mean);
}
