//! Brute-force exact solvers, used as ground truth by the test suites.
//!
//! [`brute_force_opt`] enumerates every coefficient vector in a box that
//! provably contains an optimum (see [`OracleBudget`]), so its answers are
//! exact by construction. It is deliberately simple; scalability is a
//! non-goal. [`brute_force_maxsat`] exhausts truth assignments of a 3SAT-6
//! formula.

use crate::core::{evaluate, Cap, CvpInstance, Method, SolveReport, SolveStatus};
use crate::instgen::Sat36Formula;
use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("search budget exceeded ({0} states)")]
    BudgetExceeded(u64),
    #[error("too many variables for exhaustive MaxSAT ({0} > {1})")]
    TooManyVariables(usize, usize),
    #[error("objective weights too large for the oracle's fixed-point objective")]
    WeightsTooLarge,
}

/// Search limits for [`brute_force_opt`].
///
/// `u_max = None` derives a provably sufficient per-coefficient bound from
/// the instance: any optimum has `b_i <= a_i + min(C, ||a||_1)` for finite
/// `C` (a larger `b_i` worsens both norms), and `b_i <= a_i + ||a||_1` for
/// `C` infinite (otherwise the zero vector is strictly better), so a
/// coefficient never exceeds `max_i a_i` plus that slack. This makes an
/// `Infeasible` answer a proof, not a budget artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub u_max: Option<u64>,
    pub node_limit: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { u_max: None, node_limit: 100_000_000 }
    }
}

impl OracleBudget {
    pub fn with_u_max(u_max: u64) -> Self {
        OracleBudget { u_max: Some(u_max), ..Default::default() }
    }

    fn effective_u_max(&self, instance: &CvpInstance) -> u64 {
        if let Some(m) = self.u_max {
            return m;
        }
        let max_a = instance.a.iter().copied().max().unwrap_or(0).max(0) as u64;
        let l1 = instance.l1_norm_of_target();
        match instance.cap {
            Cap::Finite(c) => max_a + c.min(l1),
            Cap::Infinite => max_a,
        }
    }
}

struct Search<'a> {
    instance: &'a CvpInstance,
    u_max: u64,
    node_limit: u64,
    nodes: u64,
    // Objective in fixed-point: mu and nu scaled to a common denominator.
    mu_num: i128,
    nu_num: i128,
    /// `suffix_covers[j][i]`: some generator with index >= j covers i.
    suffix_covers: Vec<Vec<bool>>,
    u: Vec<i64>,
    b: Vec<i64>,
    best: Option<(i128, Vec<i64>)>,
}

impl<'a> Search<'a> {
    fn objective_lower_bound(&self, next_gen: usize, bot: u64) -> i128 {
        // Generators only add mass, so overshoot is permanent, and a
        // coordinate no remaining generator covers cannot gain either.
        let mut tc_lb: i128 = 0;
        for i in 0..self.instance.d {
            let (ai, bi) = (self.instance.a[i], self.b[i]);
            if bi >= ai {
                tc_lb += (bi - ai) as i128;
            } else if !self.suffix_covers[next_gen][i] {
                tc_lb += (ai - bi) as i128;
            }
        }
        self.mu_num * tc_lb + self.nu_num * bot as i128
    }

    /// Deviation bounds that can never recover; pruning on them is safe.
    fn permanently_infeasible(&self, next_gen: usize) -> bool {
        let Cap::Finite(c) = self.instance.cap else {
            return false;
        };
        let c = c as i64;
        (0..self.instance.d).any(|i| {
            let (ai, bi) = (self.instance.a[i], self.b[i]);
            bi - ai > c || (!self.suffix_covers[next_gen][i] && ai - bi > c)
        })
    }

    fn dfs(&mut self, j: usize, bot: u64) -> Result<(), OracleError> {
        if j == self.instance.k() {
            let mut tc: u64 = 0;
            let mut linf: u64 = 0;
            for i in 0..self.instance.d {
                let dev = self.instance.a[i].abs_diff(self.b[i]);
                tc += dev;
                linf = linf.max(dev);
            }
            if !self.instance.cap.admits(linf) {
                return Ok(());
            }
            let obj = self.mu_num * tc as i128 + self.nu_num * bot as i128;
            if self.best.as_ref().is_none_or(|(incumbent, _)| obj < *incumbent) {
                self.best = Some((obj, self.u.clone()));
            }
            return Ok(());
        }
        for v in 0..=self.u_max {
            self.nodes += 1;
            if self.nodes > self.node_limit {
                return Err(OracleError::BudgetExceeded(self.node_limit));
            }
            self.u[j] = v as i64;
            if v > 0 {
                for (bi, &gi) in self.b.iter_mut().zip(self.instance.generators[j].entries()) {
                    *bi += i64::from(gi);
                }
            }
            let bot_here = bot + v;
            // Overshoot beyond a finite cap only grows with v: stop here.
            let overshoot_hopeless = matches!(self.instance.cap, Cap::Finite(c) if {
                let c = c as i64;
                self.instance.generators[j]
                    .entries()
                    .iter()
                    .enumerate()
                    .any(|(i, &gi)| gi != 0 && self.b[i] - self.instance.a[i] > c)
            });
            let prune = self.permanently_infeasible(j + 1)
                || self
                    .best
                    .as_ref()
                    .is_some_and(|(incumbent, _)| self.objective_lower_bound(j + 1, bot_here) >= *incumbent);
            if !prune {
                self.dfs(j + 1, bot_here)?;
            }
            if overshoot_hopeless {
                break;
            }
        }
        // restore state
        for (bi, &gi) in self.b.iter_mut().zip(self.instance.generators[j].entries()) {
            *bi -= self.u[j] * i64::from(gi);
        }
        self.u[j] = 0;
        Ok(())
    }
}

/// Exact optimum of `mu*tc + nu*bot` subject to `linf <= C` by depth-first
/// enumeration of `u in [0, u_max]^k` with partial-sum pruning. The result
/// is deterministic: among equal-objective optima it returns the
/// lexicographically smallest coefficient vector.
pub fn brute_force_opt(instance: &CvpInstance, budget: OracleBudget) -> Result<SolveReport, OracleError> {
    let weights = &instance.weights;
    let den_lcm = weights.mu.denom().lcm(weights.nu.denom());
    let mu_num = (weights.mu.numer() * (&den_lcm / weights.mu.denom()))
        .to_i128()
        .ok_or(OracleError::WeightsTooLarge)?;
    let nu_num = (weights.nu.numer() * (&den_lcm / weights.nu.denom()))
        .to_i128()
        .ok_or(OracleError::WeightsTooLarge)?;

    let k = instance.k();
    let mut suffix_covers = vec![vec![false; instance.d]; k + 1];
    for j in (0..k).rev() {
        let (head, tail) = suffix_covers.split_at_mut(j + 1);
        head[j].copy_from_slice(&tail[0]);
        for (i, &gi) in instance.generators[j].entries().iter().enumerate() {
            if gi != 0 {
                head[j][i] = true;
            }
        }
    }

    let mut search = Search {
        instance,
        u_max: budget.effective_u_max(instance),
        node_limit: budget.node_limit,
        nodes: 0,
        mu_num,
        nu_num,
        suffix_covers,
        u: vec![0; k],
        b: vec![0; instance.d],
        best: None,
    };
    search.dfs(0, 0)?;

    match search.best {
        None => Ok(SolveReport::infeasible(Method::Oracle)),
        Some((_, u)) => {
            let solution = evaluate(instance, &u).expect("oracle produced invalid coefficients");
            Ok(SolveReport {
                status: SolveStatus::OptimalExact,
                solution: Some(solution),
                lp_value: None,
                method: Method::Oracle,
                seed: None,
            })
        }
    }
}

const MAXSAT_VAR_LIMIT: usize = 20;

/// Exact maximum number of simultaneously satisfiable clauses, over all
/// `2^s` assignments.
pub fn brute_force_maxsat(formula: &Sat36Formula) -> Result<u64, OracleError> {
    let s = formula.s();
    if s > MAXSAT_VAR_LIMIT {
        return Err(OracleError::TooManyVariables(s, MAXSAT_VAR_LIMIT));
    }
    let mut best = 0u64;
    for mask in 0u32..(1u32 << s) {
        let satisfied = formula
            .clauses()
            .iter()
            .filter(|clause| {
                clause.iter().any(|&lit| {
                    let var = lit.unsigned_abs() as usize - 1;
                    let value = mask & (1 << var) != 0;
                    value == (lit > 0)
                })
            })
            .count() as u64;
        best = best.max(satisfied);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{Generator, ObjectiveWeights};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn inst(a: Vec<i64>, gens: Vec<Vec<u8>>, cap: Cap, w: ObjectiveWeights) -> CvpInstance {
        CvpInstance::new(a, gens.into_iter().map(Generator::new).collect(), cap, w)
    }

    #[test]
    fn e1_optimum_is_zero() {
        let i = inst(
            vec![2, 1],
            vec![vec![1, 1], vec![1, 0]],
            Cap::Infinite,
            ObjectiveWeights::total_change(),
        );
        let r = brute_force_opt(&i, OracleBudget::default()).unwrap();
        let s = r.solution.unwrap();
        assert_eq!(s.tc, 0);
        assert_eq!(s.u, vec![1, 1]);
    }

    #[test]
    fn e2_optimum_is_one() {
        let i = inst(
            vec![1, 1, 1],
            vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]],
            Cap::Infinite,
            ObjectiveWeights::total_change(),
        );
        let r = brute_force_opt(&i, OracleBudget::with_u_max(2)).unwrap();
        assert_eq!(r.solution.unwrap().tc, 1);
    }

    #[test]
    fn bot_objective_forced_coverage() {
        let i = inst(vec![1], vec![vec![1]], Cap::Finite(0), ObjectiveWeights::from_ints(0, 1));
        let r = brute_force_opt(&i, OracleBudget::default()).unwrap();
        let s = r.solution.unwrap();
        assert_eq!(s.bot, 1);
        assert_eq!(s.objective, BigRational::from_integer(BigInt::from(1)));
    }

    #[test]
    fn infeasible_is_proved() {
        let i = inst(vec![5], vec![], Cap::Finite(2), ObjectiveWeights::total_change());
        let r = brute_force_opt(&i, OracleBudget::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.solution.is_none());
    }

    #[test]
    fn budget_exceeded_reported() {
        let i = inst(
            vec![3; 6],
            vec![vec![1; 6]; 6],
            Cap::Infinite,
            ObjectiveWeights::total_change(),
        );
        let tiny = OracleBudget { u_max: Some(3), node_limit: 10 };
        assert_eq!(brute_force_opt(&i, tiny), Err(OracleError::BudgetExceeded(10)));
    }

    #[test]
    fn maxsat_counts_exactly() {
        use crate::instgen::{fixture_s3, Sat36Formula};
        // The s = 3 fixture is satisfiable: all six clauses at once.
        assert_eq!(brute_force_maxsat(&fixture_s3()).unwrap(), 6);

        // Disjoint copies of the fixture stay valid 3SAT-6 formulas; seven
        // copies exceed the exhaustive variable limit.
        let base = fixture_s3();
        let mut clauses = Vec::new();
        for copy in 0..7i32 {
            for clause in base.clauses() {
                clauses.push([
                    clause[0] + clause[0].signum() * 3 * copy,
                    clause[1] + clause[1].signum() * 3 * copy,
                    clause[2] + clause[2].signum() * 3 * copy,
                ]);
            }
        }
        let wide = Sat36Formula::new(21, clauses).unwrap();
        assert_eq!(brute_force_maxsat(&wide), Err(OracleError::TooManyVariables(21, 20)));
    }

    #[test]
    fn ties_resolve_to_lexicographically_smallest() {
        // Both generators alone reach tc = 0 is impossible here, but u=(0,1)
        // and u=(1,0) tie at tc = 1; the search must return (0, ...) first.
        let i = inst(
            vec![1, 0],
            vec![vec![1, 1], vec![1, 0]],
            Cap::Infinite,
            ObjectiveWeights::total_change(),
        );
        let r = brute_force_opt(&i, OracleBudget::default()).unwrap();
        let s = r.solution.unwrap();
        assert_eq!(s.tc, 0);
        assert_eq!(s.u, vec![0, 1]);
    }
}
