//! The brute-force oracle, and how the exact solvers are checked against
//! it.
//!
//! The oracle enumerates every coefficient vector inside a provably
//! sufficient box, so it cannot be wrong - only slow. The test suites
//! sweep thousands of small instances asserting flow = lp = oracle; this
//! example shows the pattern on a few of them.
//!
//! Run with `cargo run --release --example brute_force_oracle`.

use cvp::core::{Cap, CvpInstance, Generator, Interval, ObjectiveWeights};
use cvp::flow::solve_flow;
use cvp::lp::{build_lp, solve_lp, LpOutcome};
use cvp::oracle::{brute_force_opt, OracleBudget};

fn main() {
    let weights = ObjectiveWeights::from_ints(1, 1);
    let instances = [
        CvpInstance::new(
            vec![2, 1],
            vec![
                Generator::from_interval(2, Interval::new(1, 2)),
                Generator::from_interval(2, Interval::new(1, 1)),
            ],
            Cap::Infinite,
            weights.clone(),
        ),
        CvpInstance::new(
            vec![3, 0, 2, 2],
            vec![
                Generator::from_interval(4, Interval::new(1, 1)),
                Generator::from_interval(4, Interval::new(3, 4)),
                Generator::from_interval(4, Interval::new(1, 4)),
            ],
            Cap::Finite(1),
            weights.clone(),
        ),
        CvpInstance::new(
            vec![1, 2, 1],
            vec![Generator::from_interval(3, Interval::new(2, 3))],
            Cap::Finite(0),
            weights,
        ),
    ];

    for (idx, instance) in instances.iter().enumerate() {
        println!("instance {idx}: a = {:?}, C = {}", instance.a, instance.cap);
        let oracle = brute_force_opt(instance, OracleBudget::default()).unwrap();
        let flow = solve_flow(instance).unwrap();
        let lp = solve_lp(&build_lp(instance)).unwrap();
        match (&oracle.solution, &flow.solution, &lp) {
            (Some(o), Some(f), LpOutcome::Optimal(l)) => {
                println!(
                    "  oracle {} | flow {} | lp {}",
                    o.objective,
                    f.objective,
                    l.value
                );
                assert_eq!(o.objective, f.objective);
                assert_eq!(o.objective, l.value);
                println!("  all three agree; oracle witness u = {:?}", o.u);
            }
            (None, None, LpOutcome::Infeasible) => {
                println!("  all three report infeasible");
            }
            other => panic!("solvers disagree: {other:?}"),
        }
    }

    // Budgets make infeasibility answers proofs rather than timeouts.
    let tight = OracleBudget { u_max: Some(2), node_limit: 20 };
    let big = CvpInstance::new(
        vec![6; 6],
        vec![Generator::new(vec![1; 6]); 6],
        Cap::Infinite,
        ObjectiveWeights::total_change(),
    );
    match brute_force_opt(&big, tight) {
        Err(e) => println!("tiny budget on a big instance: {e}"),
        Ok(_) => println!("search fit in the budget"),
    }
}
