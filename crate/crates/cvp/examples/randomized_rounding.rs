//! Randomized rounding of the LP optimum, and what its guarantees look
//! like empirically.
//!
//! Rounding an extremal LP optimum coordinate-wise keeps every rounded
//! coefficient within 1 of the fractional one, so the realized vector
//! stays within sqrt(4 d ln d) of the LP point in l-infinity with
//! probability at least 1 - 1/d.
//!
//! Run with `cargo run --release --example randomized_rounding`.

use cvp::core::Cap;
use cvp::instgen::gen_random_instance;
use cvp::lp::{build_lp, solve_lp, LpOutcome};
use cvp::rounding::{approx_solve, prepare_lattice, randomized_round, RngSpec};
use num_traits::{ToPrimitive, Zero};

fn main() {
    let d = 40;
    let instance = gen_random_instance(d, d, 8, Cap::Infinite, false, &RngSpec::new(1000, 0));
    let LpOutcome::Optimal(lp) = solve_lp(&build_lp(&instance)).unwrap() else {
        unreachable!("infinite cap is always feasible");
    };
    println!("d = {d}: LP value {} ({} nonzero coefficients)", lp.value, lp.nonzero_u_count);

    let problem = prepare_lattice(&lp, &instance).unwrap();
    let fractional = problem.x.iter().filter(|x| !x.is_zero()).count();
    println!("fractional coordinates to round: {fractional}");

    // One thousand single roundings: track the deviation from the LP point.
    let threshold = (4.0 * d as f64 * (d as f64).ln()).sqrt();
    let bstar: Vec<f64> = (0..d)
        .map(|i| {
            (0..d)
                .map(|slot| problem.x[slot].to_f64().unwrap() * f64::from(problem.h[i][slot]))
                .sum::<f64>()
                + (0..d)
                    .map(|slot| (problem.floor_part[slot] * i64::from(problem.h[i][slot])) as f64)
                    .sum::<f64>()
        })
        .collect();
    let trials = 1000u64;
    let mut within = 0u64;
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let u = randomized_round(&problem, &RngSpec::new(1000, t));
        let dev = (0..d)
            .map(|i| {
                let b: i64 = instance
                    .generators
                    .iter()
                    .zip(&u)
                    .map(|(g, &uj)| uj * i64::from(g.entries()[i]))
                    .sum();
                (b as f64 - bstar[i]).abs()
            })
            .fold(0.0f64, f64::max);
        worst = worst.max(dev);
        if dev <= threshold {
            within += 1;
        }
    }
    println!(
        "{within}/{trials} roundings within sqrt(4 d ln d) = {threshold:.2} (worst {worst:.2}, \
         guarantee asks for {:.1}%)",
        100.0 * (1.0 - 1.0 / d as f64)
    );

    // The solver wrapper picks the best of many trials.
    let report = approx_solve(&instance, RngSpec::new(1000, 0), 32, false).unwrap();
    let best = report.solution.unwrap();
    println!(
        "best of 32 trials: total change {} vs LP lower bound {} (status {:?})",
        best.tc,
        report.lp_value.unwrap(),
        report.status
    );
}
