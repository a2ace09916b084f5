//! Shared helpers for the sweep-style integration suites.
//!
//! Each test crate compiles this module independently and uses a subset.
#![allow(dead_code)]

use cvp::core::{Cap, CvpInstance, Generator, Interval, ObjectiveWeights, SolveStatus};
use cvp::flow::{build_network, min_cost_flow_with, FlowOutcome};
use cvp::lp::{build_lp, solve_lp_with, LpOutcome};
use cvp::oracle::{brute_force_opt, OracleBudget};
use cvp::rat::{Rat128, Scalar};
use num_rational::BigRational;

/// All ones-intervals inside `[1, d]`.
pub fn all_intervals(d: usize) -> Vec<Interval> {
    let mut out = Vec::new();
    for lo in 1..=d {
        for hi in lo..=d {
            out.push(Interval::new(lo, hi));
        }
    }
    out
}

/// All nonzero binary vectors of length `d`, ordered by their bit pattern.
pub fn all_binary_vectors(d: usize) -> Vec<Vec<u8>> {
    (1u32..1 << d)
        .map(|mask| (0..d).map(|i| ((mask >> i) & 1) as u8).collect())
        .collect()
}

/// All subsets of `0..n` with at most `max_size` elements, as index lists.
pub fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    assert!(n < 31);
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize <= max_size)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

/// All target vectors in `{0..max_entry}^d`, by counting.
pub fn all_targets(d: usize, max_entry: i64) -> Vec<Vec<i64>> {
    let base = (max_entry + 1) as usize;
    let total = base.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|_| {
                    let v = (idx % base) as i64;
                    idx /= base;
                    v
                })
                .collect()
        })
        .collect()
}

pub fn weights_grid() -> [ObjectiveWeights; 3] {
    [
        ObjectiveWeights::from_ints(1, 0),
        ObjectiveWeights::from_ints(1, 1),
        ObjectiveWeights::from_ints(0, 1),
    ]
}

/// Outcome of one solver on one instance, normalized for comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Infeasible,
    Optimal(BigRational),
}

/// LP result plus the structural facts the acceptance criteria assert.
#[derive(Debug)]
pub struct LpCheck {
    pub verdict: Verdict,
    pub nonzero_u_count: usize,
    /// Whether every vertex coordinate (u, alpha, beta) is integral.
    pub integral: bool,
}

pub fn lp_verdict(instance: &CvpInstance) -> LpCheck {
    let model = build_lp(instance);
    match solve_lp_with::<Rat128>(&model).expect("lp solve") {
        LpOutcome::Infeasible => {
            LpCheck { verdict: Verdict::Infeasible, nonzero_u_count: 0, integral: true }
        }
        LpOutcome::Optimal(sol) => LpCheck {
            verdict: Verdict::Optimal(sol.value.to_big_rational()),
            nonzero_u_count: sol.nonzero_u_count,
            integral: sol
                .u
                .iter()
                .chain(&sol.alpha)
                .chain(&sol.beta)
                .all(|v| v.is_integer()),
        },
    }
}

pub fn flow_verdict(instance: &CvpInstance) -> Verdict {
    let network = build_network(instance).expect("consecutive-ones instance");
    match min_cost_flow_with::<Rat128>(&network).expect("flow solve") {
        FlowOutcome::Infeasible => Verdict::Infeasible,
        FlowOutcome::Optimal(sol) => Verdict::Optimal(sol.cost.to_big_rational()),
    }
}

pub fn oracle_verdict(instance: &CvpInstance) -> Verdict {
    let report = brute_force_opt(instance, OracleBudget::default()).expect("oracle in budget");
    match report.status {
        SolveStatus::Infeasible => Verdict::Infeasible,
        _ => Verdict::Optimal(report.solution.unwrap().objective),
    }
}

pub fn interval_instance(
    a: Vec<i64>,
    intervals: &[Interval],
    cap: Cap,
    weights: &ObjectiveWeights,
) -> CvpInstance {
    let d = a.len();
    let gens = intervals.iter().map(|iv| Generator::from_interval(d, *iv)).collect();
    CvpInstance::new(a, gens, cap, weights.clone())
}

pub fn caps_grid() -> [Cap; 4] {
    [Cap::Finite(0), Cap::Finite(1), Cap::Finite(2), Cap::Infinite]
}

/// One-sided exact binomial test: whether observing `successes` out of
/// `trials` is consistent, at confidence `1 - alpha`, with a true success
/// probability of at least `p0`. (Lower tail of Bin(trials, p0), summed in
/// log space.)
pub fn binomial_at_least(successes: u64, trials: u64, p0: f64, alpha: f64) -> bool {
    if successes as f64 >= p0 * trials as f64 {
        return true;
    }
    let (ln_p, ln_q) = (p0.ln(), (1.0 - p0).ln());
    let n = trials as f64;
    // log of P[X = i], built incrementally from i = 0.
    let mut ln_term = n * ln_q;
    let mut tail = f64::NEG_INFINITY; // log of the running sum
    for i in 0..=successes {
        tail = log_add(tail, ln_term);
        let i = i as f64;
        ln_term += ((n - i) / (i + 1.0)).ln() + ln_p - ln_q;
    }
    tail.exp() > alpha
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
