//! Segmenting an intensity matrix under the minimum separation
//! constraint.
//!
//! Every open leaf pair must expose at least lambda columns. Rows are
//! independent under this constraint, so each row solves exactly via the
//! flow reduction and the row plans assemble into deliverable segments by
//! unit time slices.
//!
//! Run with `cargo run --release --example msc_segmentation`.

use cvp::core::{Cap, ObjectiveWeights};
use cvp::segmentation::{solve_msc, MatrixInstance, MscOutcome, SegmentConstraint};

fn print_plan(plan: &cvp::segmentation::MatrixPlan) {
    println!("  realized matrix: {:?}", plan.realized);
    println!("  total change {}, beam-on time {}", plan.tc, plan.bot);
    for (segment, coefficient) in &plan.terms {
        let rows: Vec<String> = segment
            .rows
            .iter()
            .map(|iv| iv.map_or("closed".to_string(), |iv| iv.to_string()))
            .collect();
        println!("  {coefficient} x [{}]", rows.join(", "));
    }
}

fn main() {
    // The classic peaked row: no exact decomposition exists for lambda=3.
    let peak = MatrixInstance::new(
        vec![vec![1, 1, 4, 1, 1]],
        Cap::Finite(0),
        ObjectiveWeights::total_change(),
        SegmentConstraint::MinSeparation(3),
    );
    println!("row (1,1,4,1,1), lambda = 3, C = 0:");
    match solve_msc(&peak).unwrap() {
        MscOutcome::Infeasible { row } => println!("  infeasible (row {row}) - as expected"),
        MscOutcome::Optimal(_) => unreachable!(),
    }

    // Allowing deviation (C = inf) yields the best approximation, tc = 2.
    let mut relaxed = peak.clone();
    relaxed.cap = Cap::Infinite;
    println!("same row with C = inf:");
    match solve_msc(&relaxed).unwrap() {
        MscOutcome::Optimal(plan) => print_plan(&plan),
        MscOutcome::Infeasible { .. } => unreachable!(),
    }

    // A multi-row matrix: per-row optima assemble into matrix segments.
    let matrix = MatrixInstance::new(
        vec![vec![2, 3, 3, 1], vec![0, 2, 2, 2], vec![1, 1, 0, 0]],
        Cap::Infinite,
        ObjectiveWeights::total_change(),
        SegmentConstraint::MinSeparation(2),
    );
    println!("3x4 matrix, lambda = 2, C = inf:");
    match solve_msc(&matrix).unwrap() {
        MscOutcome::Optimal(plan) => print_plan(&plan),
        MscOutcome::Infeasible { .. } => unreachable!(),
    }
}
