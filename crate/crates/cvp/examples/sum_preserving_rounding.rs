//! Rounding that never changes the beam-on time by more than the
//! unavoidable fraction.
//!
//! When the objective charges the coefficient sum (beam-on time),
//! independent rounding can scatter it. The pair-rounding variant couples
//! coordinates so the sum always lands on floor or ceil of the LP sum,
//! while each coefficient keeps its marginal.
//!
//! Run with `cargo run --release --example sum_preserving_rounding`.

use cvp::core::{Cap, CvpInstance, Generator, ObjectiveWeights};
use cvp::lp::{build_lp, solve_lp, LpOutcome};
use cvp::rounding::{prepare_lattice, randomized_round, round_sum_preserving, RngSpec};
use std::collections::BTreeMap;

fn main() {
    // A beam-on-time flavored objective: mu = 1, nu = 1.
    let instance = CvpInstance::new(
        vec![1, 1, 1],
        vec![
            Generator::new(vec![1, 1, 0]),
            Generator::new(vec![0, 1, 1]),
            Generator::new(vec![1, 0, 1]),
        ],
        Cap::Infinite,
        ObjectiveWeights::from_ints(1, 1),
    );
    let LpOutcome::Optimal(lp) = solve_lp(&build_lp(&instance)).unwrap() else { unreachable!() };
    let lp_bot: f64 = lp.u.iter().map(cvp::rat::Scalar::to_f64).sum();
    let u: Vec<String> = lp.u.iter().map(|v| v.to_string()).collect();
    println!("LP coefficients [{}], fractional beam-on time {lp_bot}", u.join(", "));

    let problem = prepare_lattice(&lp, &instance).unwrap();
    let trials = 20_000u64;
    let mut independent: BTreeMap<i64, u64> = BTreeMap::new();
    let mut coupled: BTreeMap<i64, u64> = BTreeMap::new();
    for t in 0..trials {
        let u = randomized_round(&problem, &RngSpec::new(8, t));
        *independent.entry(u.iter().sum()).or_default() += 1;
        let u = round_sum_preserving(&problem, &RngSpec::new(8, t));
        *coupled.entry(u.iter().sum()).or_default() += 1;
    }
    println!("beam-on time distribution over {trials} trials:");
    println!("  independent rounding: {independent:?}");
    println!("  sum-preserving:       {coupled:?}");
    assert!(coupled.keys().all(|&s| s == lp_bot.floor() as i64 || s == lp_bot.ceil() as i64));
    println!(
        "sum-preserving rounding stays in {{{}, {}}} on every trial",
        lp_bot.floor(),
        lp_bot.ceil()
    );
}
