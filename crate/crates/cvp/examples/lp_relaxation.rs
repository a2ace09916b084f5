//! The LP relaxation and its extremal optima.
//!
//! With consecutive-ones generators the constraint matrix is totally
//! unimodular: the exact simplex returns an integral vertex and the
//! relaxation *is* the integer problem. General generators can leave an
//! integrality gap, but every vertex still has at most d nonzero
//! coefficients, which is what the rounding stage relies on.
//!
//! Run with `cargo run --release --example lp_relaxation`.

use cvp::core::{Cap, CvpInstance, Generator, Interval, ObjectiveWeights};
use cvp::lp::{build_lp, solve_lp, LpOutcome};
use cvp::oracle::{brute_force_opt, OracleBudget};

fn show(label: &str, instance: &CvpInstance) {
    let model = build_lp(instance);
    println!("{label}: d = {}, k = {}, {} LP variables", model.d(), model.k(), model.var_count());
    match solve_lp(&model).unwrap() {
        LpOutcome::Infeasible => println!("  LP infeasible (cap too tight)"),
        LpOutcome::Optimal(sol) => {
            let u: Vec<String> = sol.u.iter().map(|v| v.to_string()).collect();
            println!("  LP value {} at u* = [{}]", sol.value, u.join(", "));
            println!(
                "  nonzero coefficients: {} (never more than d = {})",
                sol.nonzero_u_count,
                model.d()
            );
        }
    }
}

fn main() {
    // Interval generators: totally unimodular, vertex is integral.
    let tu = CvpInstance::new(
        vec![3, 1, 2],
        vec![
            Generator::from_interval(3, Interval::new(1, 2)),
            Generator::from_interval(3, Interval::new(2, 3)),
            Generator::from_interval(3, Interval::new(1, 1)),
        ],
        Cap::Finite(1),
        ObjectiveWeights::total_change(),
    );
    show("consecutive-ones instance", &tu);

    // Odd-cycle generators: the classic 1/2-fractional vertex.
    let fractional = CvpInstance::new(
        vec![1, 1, 1],
        vec![
            Generator::new(vec![1, 1, 0]),
            Generator::new(vec![0, 1, 1]),
            Generator::new(vec![1, 0, 1]),
        ],
        Cap::Infinite,
        ObjectiveWeights::total_change(),
    );
    show("odd-cycle instance", &fractional);
    let opt = brute_force_opt(&fractional, OracleBudget::default()).unwrap();
    println!(
        "  integer optimum is {} -> strict integrality gap",
        opt.solution.unwrap().objective
    );

    // An infeasible capped instance: nothing can absorb a = 5 within C = 2.
    let capped = CvpInstance::new(vec![5], vec![], Cap::Finite(2), ObjectiveWeights::total_change());
    show("capped empty-generator instance", &capped);
}
