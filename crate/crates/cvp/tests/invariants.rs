//! Quantified solver invariants on exhaustive grids of small instances
//! with *general* binary generators (the consecutive-ones grid lives in
//! the acceptance suite).

mod common;

use common::*;
use cvp::core::{Cap, CvpInstance, Generator, ObjectiveWeights};
use rayon::prelude::*;

/// Exhaustive weak-duality sweep: all generator subsets (k <= 3) of the
/// nonzero binary vectors in dimension d <= 4, all targets with entries
/// <= 2, C in {0, 1, inf}.
#[test]
fn lp_weak_duality_and_soundness_exhaustive() {
    let caps = [Cap::Finite(0), Cap::Finite(1), Cap::Infinite];
    let mut total = 0u64;
    let mut strict_gaps = 0u64;
    for d in 1..=4usize {
        let vectors = all_binary_vectors(d);
        let subsets = subsets_up_to(vectors.len(), 3);
        let targets = all_targets(d, 2);
        let results: Vec<(u64, u64)> = subsets
            .par_iter()
            .map(|subset| {
                let gens: Vec<Generator> =
                    subset.iter().map(|&i| Generator::new(vectors[i].clone())).collect();
                let mut n = 0u64;
                let mut gaps = 0u64;
                for a in &targets {
                    for cap in caps {
                        let instance = CvpInstance::new(
                            a.clone(),
                            gens.clone(),
                            cap,
                            ObjectiveWeights::total_change(),
                        );
                        let lp = lp_verdict(&instance);
                        assert!(lp.nonzero_u_count <= d, "extremal bound on {instance:?}");
                        let oracle = oracle_verdict(&instance);
                        match (&lp.verdict, &oracle) {
                            // LP infeasibility is a proof of infeasibility.
                            (Verdict::Infeasible, o) => {
                                assert_eq!(*o, Verdict::Infeasible, "on {instance:?}")
                            }
                            (Verdict::Optimal(l), Verdict::Optimal(o)) => {
                                assert!(l <= o, "weak duality violated on {instance:?}");
                                if l < o {
                                    gaps += 1;
                                }
                            }
                            // LP-feasible does not certify IP-feasible.
                            (Verdict::Optimal(_), Verdict::Infeasible) => {}
                        }
                        // Consecutive ones implies an integral vertex.
                        if instance.all_consecutive_nonempty() {
                            assert!(lp.integral, "TU integrality violated on {instance:?}");
                        }
                        n += 1;
                    }
                }
                (n, gaps)
            })
            .collect();
        total += results.iter().map(|r| r.0).sum::<u64>();
        strict_gaps += results.iter().map(|r| r.1).sum::<u64>();
    }
    println!("lp invariants: {total} instances checked, {strict_gaps} strict integrality gaps");
    assert_eq!(total, 145_386);
}

/// Flow and simplex are independent exact routes to the same optimum on
/// consecutive-ones instances; they must agree on randomized networks
/// large enough to need many augmentations and potential updates.
#[test]
fn flow_equals_lp_on_random_interval_instances() {
    use cvp::instgen::gen_random_instance;
    use cvp::rounding::RngSpec;

    let caps = [Cap::Finite(0), Cap::Finite(1), Cap::Finite(2), Cap::Infinite];
    let weights = weights_grid();
    let total = 3000u64;
    (0..total).into_par_iter().for_each(|seed| {
        let d = (seed % 9 + 2) as usize;
        let k = (seed % 7 + 1) as usize;
        let mut instance = gen_random_instance(
            d,
            k,
            5,
            caps[(seed % 4) as usize],
            true,
            &RngSpec::new(40_000 + seed, 0),
        );
        instance.weights = weights[(seed % 3) as usize].clone();
        let lp = lp_verdict(&instance);
        let flow = flow_verdict(&instance);
        assert_eq!(flow, lp.verdict, "seed {seed}: {instance:?}");
    });
    println!("flow = lp on {total} random interval instances");
}

/// Re-solving any instance yields identical outcomes (full determinism).
#[test]
fn repeated_solves_are_identical() {
    use cvp::flow::{build_network, min_cost_flow};
    use cvp::lp::{build_lp, solve_lp};
    use cvp::rounding::{approx_solve, RngSpec};

    for d in 1..=4usize {
        let intervals = all_intervals(d);
        for subset in subsets_up_to(intervals.len(), 3) {
            let ivs: Vec<_> = subset.iter().map(|&i| intervals[i]).collect();
            let a: Vec<i64> = (0..d as i64).map(|i| (i * 2 + 1) % 4).collect();
            let instance =
                interval_instance(a, &ivs, Cap::Finite(1), &ObjectiveWeights::from_ints(1, 1));
            let model = build_lp(&instance);
            assert_eq!(solve_lp(&model).unwrap(), solve_lp(&model).unwrap());
            let network = build_network(&instance).unwrap();
            assert_eq!(min_cost_flow(&network).unwrap(), min_cost_flow(&network).unwrap());
            let rng = RngSpec::new(5, 0);
            assert_eq!(
                approx_solve(&instance, rng, 8, false).unwrap(),
                approx_solve(&instance, rng, 8, false).unwrap()
            );
        }
    }
}
