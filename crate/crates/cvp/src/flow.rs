//! Min-cost flow reduction for instances whose generators all have
//! consecutive ones.
//!
//! Appending a zero row to the system and differencing adjacent equality
//! rows turns the LP constraint matrix into a network incidence matrix on
//! nodes `1..=d+1`. Node `j` carries demand `a_{j-1} - a_j` (with
//! `a_0 = a_{d+1} = 0`, and flow conservation reading
//! `inflow - outflow = demand`). Deviation arcs `(i, i+1)` and `(i+1, i)`
//! have capacity `C` and cost `mu`; each generator with ones-interval
//! `[l, r]` becomes an arc `(l, r+1)` of infinite capacity and cost `nu`.
//! The minimum flow cost equals the optimum of the instance, and the flow
//! on a generator arc is that generator's coefficient.
//!
//! The solver uses successive shortest augmenting paths with node
//! potentials (Dijkstra on reduced costs; all costs are nonnegative) in
//! exact rational arithmetic, and is deterministic: fixed arc ordering and
//! lowest-index tie-breaking everywhere.

use crate::core::{evaluate, Cap, CvpInstance, Interval, Method, OnesSpan, Solution, SolveReport, SolveStatus};
use crate::rat::Scalar;
use num_rational::BigRational;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("generator {0} does not have consecutive ones")]
    NonConsecutiveGenerator(usize),
    #[error("generator {0} is all-zero")]
    EmptyGenerator(usize),
    #[error("node demands do not sum to zero")]
    UnbalancedDemands,
}

/// Role of an arc in the construction. Coordinate and interval indices are
/// 1-based, matching the node numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    DeviationFwd(usize),
    DeviationBwd(usize),
    Generator { index: usize, interval: Interval },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowArc {
    /// Tail node in `1..=d+1`.
    pub tail: usize,
    /// Head node in `1..=d+1`.
    pub head: usize,
    pub capacity: Cap,
    pub cost: BigRational,
    pub kind: ArcKind,
}

/// The flow network of an instance: `d+1` nodes, a demand per node and a
/// fixed arc ordering (deviation arcs first, then generators in input
/// order). Arc identity is positional; parallel arcs are kept distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    pub node_count: usize,
    /// `demands[j-1]` is the demand of node `j`.
    pub demands: Vec<i64>,
    pub arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    /// Writes the network as a text edge list, one arc per line:
    /// `tail head capacity cost kind`.
    pub fn dump(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        for arc in &self.arcs {
            let kind = match arc.kind {
                ArcKind::DeviationFwd(i) => format!("dev+{i}"),
                ArcKind::DeviationBwd(i) => format!("dev-{i}"),
                ArcKind::Generator { index, interval } => format!("gen{index}{interval}"),
            };
            writeln!(w, "{} {} {} {} {}", arc.tail, arc.head, arc.capacity, arc.cost, kind)?;
        }
        Ok(())
    }
}

/// Builds the network for an instance. Every generator must have a
/// nonempty contiguous ones-interval.
pub fn build_network(instance: &CvpInstance) -> Result<FlowNetwork, FlowError> {
    let d = instance.d;
    let mut intervals = Vec::with_capacity(instance.k());
    for (j, g) in instance.generators.iter().enumerate() {
        match g.span() {
            Some(OnesSpan::Contiguous(iv)) => intervals.push(iv),
            Some(OnesSpan::Empty) => return Err(FlowError::EmptyGenerator(j)),
            None => return Err(FlowError::NonConsecutiveGenerator(j)),
        }
    }

    let at = |idx: usize| -> i64 {
        if idx >= 1 && idx <= d {
            instance.a[idx - 1]
        } else {
            0
        }
    };
    let demands: Vec<i64> = (1..=d + 1).map(|j| at(j - 1) - at(j)).collect();

    let mu = &instance.weights.mu;
    let nu = &instance.weights.nu;
    let mut arcs = Vec::with_capacity(2 * d + intervals.len());
    for i in 1..=d {
        arcs.push(FlowArc {
            tail: i,
            head: i + 1,
            capacity: instance.cap,
            cost: mu.clone(),
            kind: ArcKind::DeviationFwd(i),
        });
        arcs.push(FlowArc {
            tail: i + 1,
            head: i,
            capacity: instance.cap,
            cost: mu.clone(),
            kind: ArcKind::DeviationBwd(i),
        });
    }
    for (index, iv) in intervals.into_iter().enumerate() {
        arcs.push(FlowArc {
            tail: iv.lo(),
            head: iv.hi() + 1,
            capacity: Cap::Infinite,
            cost: nu.clone(),
            kind: ArcKind::Generator { index, interval: iv },
        });
    }
    Ok(FlowNetwork { node_count: d + 1, demands, arcs })
}

/// An exact min-cost integral flow meeting all demands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution<S = BigRational> {
    /// Flow per arc, positionally aligned with `FlowNetwork::arcs`.
    pub flows: Vec<i64>,
    pub cost: S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowOutcome<S = BigRational> {
    /// Demands cannot be routed under the arc capacities.
    Infeasible,
    Optimal(FlowSolution<S>),
}

impl<S> FlowOutcome<S> {
    pub fn optimal(&self) -> Option<&FlowSolution<S>> {
        match self {
            FlowOutcome::Optimal(s) => Some(s),
            FlowOutcome::Infeasible => None,
        }
    }
}

/// Solves the min-cost flow problem exactly in arbitrary-precision
/// rational arithmetic.
pub fn min_cost_flow(network: &FlowNetwork) -> Result<FlowOutcome, FlowError> {
    min_cost_flow_with::<BigRational>(network)
}

/// Solves the min-cost flow problem exactly over any [`Scalar`].
pub fn min_cost_flow_with<S: Scalar>(network: &FlowNetwork) -> Result<FlowOutcome<S>, FlowError> {
    if network.demands.iter().sum::<i64>() != 0 {
        return Err(FlowError::UnbalancedDemands);
    }
    let n = network.node_count;

    // Replace infinite capacities by the total positive demand: with
    // nonnegative costs some optimal flow decomposes into source-to-sink
    // paths, so no arc ever needs more than the total supply.
    let total_supply: i64 = network.demands.iter().map(|&dm| dm.max(0)).sum();
    let cap_of = |cap: Cap| -> i64 {
        match cap {
            Cap::Finite(c) => (c as i64).min(total_supply),
            Cap::Infinite => total_supply,
        }
    };

    // Residual representation: forward/backward twins at indices 2e, 2e+1.
    let mut res_to = Vec::with_capacity(network.arcs.len() * 2);
    let mut res_cap = Vec::with_capacity(network.arcs.len() * 2);
    let mut res_cost: Vec<S> = Vec::with_capacity(network.arcs.len() * 2);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for arc in &network.arcs {
        let cost = S::from_big_rational(&arc.cost).expect("arc cost out of scalar range");
        debug_assert!(!cost.is_negative(), "arc costs must be nonnegative");
        let (t, h) = (arc.tail - 1, arc.head - 1);
        adj[t].push(res_to.len());
        res_to.push(h);
        res_cap.push(cap_of(arc.capacity));
        res_cost.push(cost.clone());
        adj[h].push(res_to.len());
        res_to.push(t);
        res_cap.push(0);
        res_cost.push(cost.negated());
    }

    // surplus > 0: the node must send flow; surplus < 0: it must receive.
    let mut surplus: Vec<i64> = network.demands.iter().map(|&dm| -dm).collect();
    let mut potential: Vec<S> = vec![S::zero(); n];
    let mut dist: Vec<Option<S>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];

    while let Some(source) = (0..n).find(|&v| surplus[v] > 0) {
        // Dijkstra on reduced costs from the source.
        dist.iter_mut().for_each(|x| *x = None);
        parent.iter_mut().for_each(|x| *x = None);
        let mut heap: BinaryHeap<Reverse<(S, usize)>> = BinaryHeap::new();
        dist[source] = Some(S::zero());
        heap.push(Reverse((S::zero(), source)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if dist[u].as_ref() != Some(&du) {
                continue;
            }
            for &e in &adj[u] {
                if res_cap[e] == 0 {
                    continue;
                }
                let v = res_to[e];
                let nd = du.plus(&res_cost[e]).plus(&potential[u]).minus(&potential[v]);
                if dist[v].as_ref().is_none_or(|cur| nd < *cur) {
                    dist[v] = Some(nd.clone());
                    parent[v] = Some(e);
                    heap.push(Reverse((nd, v)));
                }
            }
        }

        // Nearest reachable deficit node, lowest index on ties.
        let target = (0..n)
            .filter(|&v| surplus[v] < 0 && dist[v].is_some())
            .min_by(|&x, &y| dist[x].cmp(&dist[y]).then(x.cmp(&y)));
        let Some(target) = target else {
            return Ok(FlowOutcome::Infeasible);
        };

        let mut delta = surplus[source].min(-surplus[target]);
        let mut v = target;
        while v != source {
            let e = parent[v].unwrap();
            delta = delta.min(res_cap[e]);
            v = res_to[e ^ 1];
        }
        debug_assert!(delta > 0);
        let mut v = target;
        while v != source {
            let e = parent[v].unwrap();
            res_cap[e] -= delta;
            res_cap[e ^ 1] += delta;
            v = res_to[e ^ 1];
        }
        surplus[source] -= delta;
        surplus[target] += delta;

        // Potential update with distances capped at dist[target].
        // Unreached nodes advance by the full cap: a residual arc from an
        // unreached node into the reached set can only gain reduced cost
        // that way, and residual arcs out of the reached set into
        // unreached nodes cannot exist (Dijkstra would have relaxed them),
        // so reduced costs stay nonnegative everywhere.
        let dt = dist[target].clone().unwrap();
        for v in 0..n {
            let inc = match &dist[v] {
                Some(dv) if *dv < dt => dv,
                _ => &dt,
            };
            potential[v] = potential[v].plus(inc);
        }
    }

    let mut flows = Vec::with_capacity(network.arcs.len());
    let mut cost = S::zero();
    for (e, arc) in network.arcs.iter().enumerate() {
        let f = res_cap[2 * e + 1];
        flows.push(f);
        if f != 0 {
            let c = S::from_big_rational(&arc.cost).expect("arc cost out of scalar range");
            cost = cost.plus(&c.times(&S::from_i64(f)));
        }
    }

    // Conservation post-check: inflow - outflow = demand at every node.
    let mut balance = vec![0i64; n];
    for (e, arc) in network.arcs.iter().enumerate() {
        balance[arc.tail - 1] -= flows[e];
        balance[arc.head - 1] += flows[e];
    }
    for (j, (&b, &dm)) in balance.iter().zip(&network.demands).enumerate() {
        assert_eq!(b, dm, "flow conservation violated at node {}", j + 1);
    }

    Ok(FlowOutcome::Optimal(FlowSolution { flows, cost }))
}

/// Reads the coefficient vector off the generator arcs of a solved network
/// and evaluates it against the instance.
pub fn flow_to_solution<S: Scalar>(
    instance: &CvpInstance,
    network: &FlowNetwork,
    flow: &FlowSolution<S>,
) -> Solution {
    let mut u = vec![0i64; instance.k()];
    for (arc, &f) in network.arcs.iter().zip(&flow.flows) {
        if let ArcKind::Generator { index, .. } = arc.kind {
            u[index] = f;
        }
    }
    let solution = evaluate(instance, &u).expect("flow produced invalid coefficients");
    debug_assert_eq!(
        BigRational::from(num_bigint::BigInt::from(solution.tc)),
        network
            .arcs
            .iter()
            .zip(&flow.flows)
            .filter(|(arc, _)| !matches!(arc.kind, ArcKind::Generator { .. }))
            .map(|(_, &f)| BigRational::from(num_bigint::BigInt::from(f)))
            .sum::<BigRational>(),
        "total change must equal the deviation-arc flow"
    );
    solution
}

/// Convenience entry point: builds the network, solves it and assembles a
/// report. Exact whenever the generators satisfy the precondition.
pub fn solve_flow(instance: &CvpInstance) -> Result<SolveReport, FlowError> {
    let network = build_network(instance)?;
    match min_cost_flow(&network)? {
        FlowOutcome::Infeasible => Ok(SolveReport::infeasible(Method::Flow)),
        FlowOutcome::Optimal(flow) => {
            let solution = flow_to_solution(instance, &network, &flow);
            debug_assert_eq!(solution.objective, flow.cost);
            Ok(SolveReport {
                status: SolveStatus::OptimalExact,
                solution: Some(solution),
                lp_value: Some(flow.cost),
                method: Method::Flow,
                seed: None,
            })
        }
    }
}
