//! Hardness in action: 3SAT-6 formulas as 2-row matrix instances.
//!
//! Each variable owns a block of six ones in the first row with two exact
//! three-interval decompositions (one per truth value); each clause owns a
//! block of five ones in the second row that decomposes exactly iff one of
//! its literal cells is covered. The optimum total change therefore equals
//! the number of clauses minus the best satisfiable count.
//!
//! Run with `cargo run --release --example sat_reduction`.

use cvp::instgen::{
    assignment_to_plan, brute_force_reduced_opt, fixture_s3, fixture_s4_unsat, reduce_3sat6,
    serialize_sat36,
};
use cvp::oracle::brute_force_maxsat;

fn main() {
    for (name, formula) in [("satisfiable s=3", fixture_s3()), ("unsatisfiable s=4", fixture_s4_unsat())] {
        println!("== {name} ==");
        print!("{}", serialize_sat36(&formula));
        let reduced = reduce_3sat6(&formula);
        let mi = &reduced.matrix_instance;
        println!(
            "reduced instance: {}x{} matrix, {} segments ({} literal + {} filler)",
            mi.m,
            mi.n,
            reduced.segments.len(),
            3 * formula.t(),
            7 * formula.t()
        );

        let maxsat = brute_force_maxsat(&formula).unwrap();
        let opt = brute_force_reduced_opt(&reduced);
        println!(
            "max satisfiable clauses {maxsat} of {}; optimal total change {opt} = t - maxsat",
            formula.t()
        );
        assert_eq!(opt, formula.t() as u64 - maxsat);

        // Every assignment yields a plan with total change t - sigma.
        let all_true = vec![true; formula.s()];
        let plan = assignment_to_plan(&reduced, &all_true);
        println!(
            "all-true assignment: plan with {} segments, total change {}",
            plan.terms.len(),
            plan.tc
        );
        println!();
    }
}
