//! Entry-level tour: build a vector instance, evaluate a plan by hand,
//! then let the exact solver find the optimum.
//!
//! Run with `cargo run --release --example solve_vector`.

use cvp::core::{evaluate, Cap, CvpInstance, Generator, ObjectiveWeights};
use cvp::flow::solve_flow;

fn main() {
    // Target (2, 1) with two generators: (1,1) and (1,0). Coefficients are
    // nonnegative integers; we want the combination closest to the target
    // in l1 distance, with every coordinate within the cap C.
    let instance = CvpInstance::new(
        vec![2, 1],
        vec![Generator::new(vec![1, 1]), Generator::new(vec![1, 0])],
        Cap::Infinite,
        ObjectiveWeights::total_change(),
    );

    println!("target a = {:?}, {} generators, C = {}", instance.a, instance.k(), instance.cap);

    // Evaluate a few candidate coefficient vectors.
    for u in [vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 0]] {
        let s = evaluate(&instance, &u).unwrap();
        println!(
            "  u = {:?} -> b = {:?}, total change {}, linf {}, beam-on {}",
            u, s.b, s.tc, s.linf, s.bot
        );
    }

    // Both generators have consecutive ones, so the min-cost flow
    // reduction solves the instance exactly.
    let report = solve_flow(&instance).unwrap();
    let best = report.solution.unwrap();
    println!(
        "exact optimum: u = {:?}, total change {} (status {:?})",
        best.u, best.tc, report.status
    );
    assert_eq!(best.tc, 0);
}
