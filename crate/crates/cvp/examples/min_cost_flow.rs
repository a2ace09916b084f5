//! The flow reduction for consecutive-ones generators, arc by arc.
//!
//! Nodes 1..=d+1 carry demands a_{j-1} - a_j; deviation arcs (i, i+1) and
//! (i+1, i) cost mu with capacity C; each generator [l, r] becomes an arc
//! (l, r+1) of cost nu and infinite capacity. The min-cost flow equals the
//! optimum, and generator-arc flows are the coefficients.
//!
//! Run with `cargo run --release --example min_cost_flow`.

use cvp::core::{Cap, CvpInstance, Generator, Interval, ObjectiveWeights};
use cvp::flow::{build_network, flow_to_solution, min_cost_flow, FlowOutcome};

fn main() {
    let instance = CvpInstance::new(
        vec![2, 1],
        vec![Generator::from_interval(2, Interval::new(1, 2))],
        Cap::Finite(1),
        ObjectiveWeights::total_change(),
    );

    let network = build_network(&instance).unwrap();
    println!("nodes: {}, demands: {:?}", network.node_count, network.demands);
    println!("arcs (tail head capacity cost kind):");
    let mut dump = Vec::new();
    network.dump(&mut dump).unwrap();
    print!("{}", String::from_utf8(dump).unwrap());

    match min_cost_flow(&network).unwrap() {
        FlowOutcome::Infeasible => println!("demands cannot be routed under the caps"),
        FlowOutcome::Optimal(flow) => {
            println!("min cost: {}", flow.cost);
            for (arc, f) in network.arcs.iter().zip(&flow.flows) {
                if *f != 0 {
                    let kind = match arc.kind {
                        cvp::flow::ArcKind::DeviationFwd(i) => format!("deviation +{i}"),
                        cvp::flow::ArcKind::DeviationBwd(i) => format!("deviation -{i}"),
                        cvp::flow::ArcKind::Generator { index, interval } => {
                            format!("generator {index} {interval}")
                        }
                    };
                    println!("  {} -> {} carries {f} ({kind})", arc.tail, arc.head);
                }
            }
            let solution = flow_to_solution(&instance, &network, &flow);
            println!(
                "coefficients u = {:?}: realized b = {:?}, total change {}",
                solution.u, solution.b, solution.tc
            );
        }
    }

    // Tighten the cap until the instance becomes infeasible.
    for cap in [1u64, 0] {
        let mut capped = instance.clone();
        capped.cap = Cap::Finite(cap);
        let outcome = min_cost_flow(&build_network(&capped).unwrap()).unwrap();
        match outcome {
            FlowOutcome::Optimal(flow) => println!("C = {cap}: optimum {}", flow.cost),
            FlowOutcome::Infeasible => println!("C = {cap}: infeasible"),
        }
    }
}
