//! Decomposition of intensity matrices into multileaf-collimator segments.
//!
//! A segment is a binary matrix with one (possibly empty) interval of ones
//! per row: the opening between a left and a right leaf. Under the minimum
//! separation constraint every open row must have an opening of length at
//! least `lambda`, and since that restricts rows independently, row
//! solutions combine freely: the matrix problem decomposes into one
//! single-row problem per row, each solved exactly via the flow reduction
//! (interval generators always have consecutive ones).
//!
//! Assembly of per-row plans into deliverable matrix segments uses unit
//! time slices: each row exposes its intervals in lexicographic order, one
//! copy per coefficient unit, padded with closed rows; slice `t` across
//! all rows forms one matrix segment, and identical consecutive segments
//! are merged. This preserves each row's realized vector exactly and uses
//! `max_i (row beam-on)` total units.

use crate::core::{Cap, CoreError, CvpInstance, Generator, Interval, ObjectiveWeights, SolveReport, SolveStatus};
use crate::flow::{self, FlowError};
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentationError {
    #[error("lambda = {lambda} is outside [1, {n}]")]
    InvalidLambda { lambda: usize, n: usize },
    #[error("operation requires a {0} constraint")]
    WrongConstraint(&'static str),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Leaf positions of one deliverable aperture: per row either a closed
/// pair (`None`) or an opening interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub rows: Vec<Option<Interval>>,
}

impl Segment {
    pub fn new(rows: Vec<Option<Interval>>) -> Self {
        Segment { rows }
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Checks bounds against an `m x n` grid.
    pub fn fits(&self, m: usize, n: usize) -> bool {
        self.rows.len() == m && self.rows.iter().flatten().all(|iv| iv.hi() <= n)
    }

    /// Minimum separation: every open row has an opening of length >= lambda.
    pub fn satisfies_msc(&self, lambda: usize) -> bool {
        self.rows.iter().flatten().all(|iv| iv.len() >= lambda)
    }

    /// Rows violating the minimum separation constraint (0-based).
    pub fn msc_violations(&self, lambda: usize) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, row)| matches!(row, Some(iv) if iv.len() < lambda))
            .map(|(i, _)| i)
            .collect()
    }

    /// Adds `coefficient` times this segment onto `acc`.
    pub fn accumulate(&self, acc: &mut [Vec<i64>], coefficient: i64) {
        for (row, iv) in acc.iter_mut().zip(&self.rows) {
            if let Some(iv) = iv {
                for cell in &mut row[iv.lo() - 1..iv.hi()] {
                    *cell += coefficient;
                }
            }
        }
    }

    /// Flattens to a binary vector of length `m * n`, row-major.
    pub fn flatten(&self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows.len() * n);
        for iv in &self.rows {
            match iv {
                Some(iv) => out.extend(iv.indicator(n)),
                None => out.extend(std::iter::repeat_n(0u8, n)),
            }
        }
        out
    }
}

/// Which segments a matrix instance may use.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentConstraint {
    /// All segments whose open rows have length >= lambda.
    MinSeparation(usize),
    /// An explicit list of allowed segments.
    ExplicitSegments(Vec<Segment>),
}

/// An `m x n` intensity matrix to decompose, with cap, weights and the
/// segment constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixInstance {
    pub m: usize,
    pub n: usize,
    pub a: Vec<Vec<i64>>,
    pub cap: Cap,
    pub weights: ObjectiveWeights,
    pub constraint: SegmentConstraint,
}

impl MatrixInstance {
    pub fn new(
        a: Vec<Vec<i64>>,
        cap: Cap,
        weights: ObjectiveWeights,
        constraint: SegmentConstraint,
    ) -> Self {
        let m = a.len();
        let n = a.first().map_or(0, |r| r.len());
        MatrixInstance { m, n, a, cap, weights, constraint }
    }

    /// For explicit-segment instances: the equivalent vector instance over
    /// row-major flattened matrices. `None` under a minimum separation
    /// constraint (its segment set is a product, not an explicit list).
    pub fn flatten_explicit(&self) -> Option<CvpInstance> {
        let SegmentConstraint::ExplicitSegments(segments) = &self.constraint else {
            return None;
        };
        let a: Vec<i64> = self.a.iter().flatten().copied().collect();
        let gens = segments.iter().map(|s| Generator::new(s.flatten(self.n))).collect();
        Some(CvpInstance::new(a, gens, self.cap, self.weights.clone()))
    }
}

/// A decomposition of (an approximation of) the matrix into weighted
/// segments, with its exact metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPlan {
    pub terms: Vec<(Segment, i64)>,
    pub realized: Vec<Vec<i64>>,
    pub tc: u64,
    pub linf: u64,
    pub bot: u64,
    pub objective: BigRational,
    /// Every row of the realized matrix is optimal for its single-row
    /// problem. With `nu > 0` this does not certify matrix-level beam-on
    /// optimality after assembly.
    pub row_optimal: bool,
}

impl MatrixPlan {
    /// Evaluates `terms` against the target matrix of `instance`.
    pub fn from_terms(instance: &MatrixInstance, terms: Vec<(Segment, i64)>, row_optimal: bool) -> Self {
        let mut realized = vec![vec![0i64; instance.n]; instance.m];
        let mut bot = 0u64;
        for (segment, coefficient) in &terms {
            segment.accumulate(&mut realized, *coefficient);
            bot += *coefficient as u64;
        }
        let mut tc = 0u64;
        let mut linf = 0u64;
        for (arow, brow) in instance.a.iter().zip(&realized) {
            for (&av, &bv) in arow.iter().zip(brow) {
                let dev = av.abs_diff(bv);
                tc += dev;
                linf = linf.max(dev);
            }
        }
        let objective = instance.weights.objective(tc, bot);
        MatrixPlan { terms, realized, tc, linf, bot, objective, row_optimal }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MscOutcome {
    /// Some row cannot meet the cap with the allowed openings (0-based).
    Infeasible { row: usize },
    Optimal(MatrixPlan),
}

/// All openings of length >= lambda inside `[1, n]`, in lexicographic
/// order. The closed row is implicit and always allowed.
pub fn msc_row_intervals(n: usize, lambda: usize) -> Result<Vec<Interval>, SegmentationError> {
    if lambda < 1 || lambda > n {
        return Err(SegmentationError::InvalidLambda { lambda, n });
    }
    let mut out = Vec::new();
    for lo in 1..=n {
        for hi in lo + lambda - 1..=n {
            out.push(Interval::new(lo, hi));
        }
    }
    Ok(out)
}

/// Solves a single row exactly over the given openings via the flow
/// reduction.
pub fn solve_row(
    row: &[i64],
    intervals: &[Interval],
    cap: Cap,
    weights: &ObjectiveWeights,
) -> Result<SolveReport, SegmentationError> {
    let n = row.len();
    let gens = intervals.iter().map(|iv| Generator::from_interval(n, *iv)).collect();
    let instance = CvpInstance::new(row.to_vec(), gens, cap, weights.clone());
    Ok(flow::solve_flow(&instance)?)
}

/// Solves a matrix instance under the minimum separation constraint,
/// row by row.
pub fn solve_msc(instance: &MatrixInstance) -> Result<MscOutcome, SegmentationError> {
    let SegmentConstraint::MinSeparation(lambda) = instance.constraint else {
        return Err(SegmentationError::WrongConstraint("minimum separation"));
    };
    let intervals = msc_row_intervals(instance.n, lambda)?;

    let mut row_terms: Vec<Vec<(Interval, i64)>> = Vec::with_capacity(instance.m);
    let mut row_solutions = Vec::with_capacity(instance.m);
    for (r, row) in instance.a.iter().enumerate() {
        let report = solve_row(row, &intervals, instance.cap, &instance.weights)?;
        match report.status {
            SolveStatus::Infeasible => return Ok(MscOutcome::Infeasible { row: r }),
            _ => {
                let solution = report.solution.expect("feasible row must carry a solution");
                let terms: Vec<(Interval, i64)> = intervals
                    .iter()
                    .zip(&solution.u)
                    .filter(|(_, &u)| u > 0)
                    .map(|(iv, &u)| (*iv, u))
                    .collect();
                row_terms.push(terms);
                row_solutions.push(solution);
            }
        }
    }

    let terms = assemble_matrix_segments(&row_terms);
    let plan = MatrixPlan::from_terms(instance, terms, true);
    debug_assert!(plan.terms.iter().all(|(s, _)| s.satisfies_msc(lambda)));
    for (r, sol) in row_solutions.iter().enumerate() {
        debug_assert_eq!(plan.realized[r], sol.b, "assembly changed row {r}");
    }
    debug_assert_eq!(plan.tc, row_solutions.iter().map(|s| s.tc).sum::<u64>());
    Ok(MscOutcome::Optimal(plan))
}

/// Combines per-row interval plans into matrix segments by unit time
/// slices. Row plans are multisets of (opening, coefficient) pairs; the
/// result's coefficients sum to the largest row beam-on time.
pub fn assemble_matrix_segments(row_plans: &[Vec<(Interval, i64)>]) -> Vec<(Segment, i64)> {
    let horizon = row_plans
        .iter()
        .map(|terms| terms.iter().map(|&(_, c)| c as u64).sum::<u64>())
        .max()
        .unwrap_or(0);
    if horizon == 0 {
        return Vec::new();
    }

    // Per row: intervals in lexicographic order, one slot per unit,
    // padded with closed rows up to the horizon.
    let slices: Vec<Vec<Option<Interval>>> = row_plans
        .iter()
        .map(|terms| {
            let mut sorted = terms.clone();
            sorted.sort();
            let mut slots = Vec::with_capacity(horizon as usize);
            for (iv, coefficient) in sorted {
                slots.extend(std::iter::repeat_n(Some(iv), coefficient as usize));
            }
            slots.resize(horizon as usize, None);
            slots
        })
        .collect();

    let mut out: Vec<(Segment, i64)> = Vec::new();
    for t in 0..horizon as usize {
        let segment = Segment::new(slices.iter().map(|row| row[t]).collect());
        match out.last_mut() {
            Some((last, coefficient)) if *last == segment => *coefficient += 1,
            _ => out.push((segment, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: usize, hi: usize) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn msc_intervals_n5_lambda3() {
        let got = msc_row_intervals(5, 3).unwrap();
        assert_eq!(got, vec![iv(1, 3), iv(1, 4), iv(1, 5), iv(2, 4), iv(2, 5), iv(3, 5)]);
    }

    #[test]
    fn msc_intervals_edge_cases() {
        assert_eq!(msc_row_intervals(3, 3).unwrap(), vec![iv(1, 3)]);
        assert_eq!(msc_row_intervals(5, 1).unwrap().len(), 15); // n(n+1)/2
        assert_eq!(
            msc_row_intervals(4, 5),
            Err(SegmentationError::InvalidLambda { lambda: 5, n: 4 })
        );
        assert_eq!(
            msc_row_intervals(4, 0),
            Err(SegmentationError::InvalidLambda { lambda: 0, n: 4 })
        );
    }

    #[test]
    fn solve_row_peak_infeasible_at_zero_cap() {
        let intervals = msc_row_intervals(5, 3).unwrap();
        let report =
            solve_row(&[1, 1, 4, 1, 1], &intervals, Cap::Finite(0), &ObjectiveWeights::total_change())
                .unwrap();
        assert_eq!(report.status, SolveStatus::Infeasible);
    }

    #[test]
    fn solve_row_peak_tc2_unbounded() {
        let intervals = msc_row_intervals(5, 3).unwrap();
        let report =
            solve_row(&[1, 1, 4, 1, 1], &intervals, Cap::Infinite, &ObjectiveWeights::total_change())
                .unwrap();
        let s = report.solution.unwrap();
        assert_eq!(s.tc, 2);
        assert_eq!(s.b, vec![1, 1, 2, 1, 1]);
    }

    #[test]
    fn solve_row_all_zero() {
        let intervals = msc_row_intervals(4, 2).unwrap();
        let report =
            solve_row(&[0, 0, 0, 0], &intervals, Cap::Finite(0), &ObjectiveWeights::total_change())
                .unwrap();
        let s = report.solution.unwrap();
        assert_eq!(s.tc, 0);
        assert!(s.u.iter().all(|&u| u == 0));
    }

    fn msc_instance(a: Vec<Vec<i64>>, lambda: usize, cap: Cap) -> MatrixInstance {
        MatrixInstance::new(a, cap, ObjectiveWeights::total_change(), SegmentConstraint::MinSeparation(lambda))
    }

    #[test]
    fn solve_msc_single_row_peak() {
        let out = solve_msc(&msc_instance(vec![vec![1, 1, 4, 1, 1]], 3, Cap::Infinite)).unwrap();
        let MscOutcome::Optimal(plan) = out else { panic!("expected a plan") };
        assert_eq!(plan.tc, 2);
        assert_eq!(plan.realized, vec![vec![1, 1, 2, 1, 1]]);
        assert!(plan.row_optimal);
    }

    #[test]
    fn solve_msc_all_ones_exact() {
        let out = solve_msc(&msc_instance(vec![vec![1, 1], vec![1, 1]], 2, Cap::Finite(0))).unwrap();
        let MscOutcome::Optimal(plan) = out else { panic!("expected a plan") };
        assert_eq!(plan.tc, 0);
        assert_eq!(plan.bot, 1);
        assert_eq!(plan.terms.len(), 1);
        let (segment, coefficient) = &plan.terms[0];
        assert_eq!(*coefficient, 1);
        assert_eq!(segment.rows, vec![Some(iv(1, 2)), Some(iv(1, 2))]);
    }

    #[test]
    fn solve_msc_scattered_row_infeasible() {
        let out = solve_msc(&msc_instance(vec![vec![1, 0, 1]], 3, Cap::Finite(0))).unwrap();
        assert_eq!(out, MscOutcome::Infeasible { row: 0 });
    }

    #[test]
    fn solve_msc_rejects_explicit_constraint() {
        let i = MatrixInstance::new(
            vec![vec![1]],
            Cap::Infinite,
            ObjectiveWeights::total_change(),
            SegmentConstraint::ExplicitSegments(vec![]),
        );
        assert!(matches!(solve_msc(&i), Err(SegmentationError::WrongConstraint(_))));
    }

    #[test]
    fn assemble_single_row_passthrough() {
        let plans = vec![vec![(iv(2, 4), 2), (iv(1, 3), 1)]];
        let segments = assemble_matrix_segments(&plans);
        // Lexicographic order within the row: [1,3] before [2,4].
        assert_eq!(
            segments,
            vec![
                (Segment::new(vec![Some(iv(1, 3))]), 1),
                (Segment::new(vec![Some(iv(2, 4))]), 2),
            ]
        );
    }

    #[test]
    fn assemble_pads_closed_rows() {
        let plans = vec![vec![(iv(1, 2), 1)], vec![]];
        let segments = assemble_matrix_segments(&plans);
        assert_eq!(segments, vec![(Segment::new(vec![Some(iv(1, 2)), None]), 1)]);
    }

    #[test]
    fn assemble_horizon_is_max_row_bot() {
        let plans = vec![vec![(iv(1, 2), 2)], vec![(iv(2, 3), 1)]];
        let segments = assemble_matrix_segments(&plans);
        let total: i64 = segments.iter().map(|&(_, c)| c).sum();
        assert_eq!(total, 2);
        // Second row closes in the second slice.
        assert_eq!(
            segments,
            vec![
                (Segment::new(vec![Some(iv(1, 2)), Some(iv(2, 3))]), 1),
                (Segment::new(vec![Some(iv(1, 2)), None]), 1),
            ]
        );
    }

    #[test]
    fn assemble_merges_identical_slices() {
        let plans = vec![vec![(iv(1, 1), 3)]];
        let segments = assemble_matrix_segments(&plans);
        assert_eq!(segments, vec![(Segment::new(vec![Some(iv(1, 1))]), 3)]);
    }

    #[test]
    fn row_fidelity_and_tc_additivity() {
        let instance = msc_instance(
            vec![vec![2, 3, 1, 0], vec![0, 1, 1, 2], vec![1, 1, 1, 1]],
            2,
            Cap::Infinite,
        );
        let MscOutcome::Optimal(plan) = solve_msc(&instance).unwrap() else { panic!() };
        // Row-by-row re-solve must reproduce the realized rows and tc.
        let intervals = msc_row_intervals(4, 2).unwrap();
        let mut tc_sum = 0;
        for (r, row) in instance.a.iter().enumerate() {
            let s = solve_row(row, &intervals, instance.cap, &instance.weights)
                .unwrap()
                .solution
                .unwrap();
            assert_eq!(plan.realized[r], s.b, "row {r}");
            tc_sum += s.tc;
        }
        assert_eq!(plan.tc, tc_sum);
        assert!(plan.terms.iter().all(|(s, _)| s.satisfies_msc(2)));
    }

    #[test]
    fn flatten_explicit_round_trip() {
        let segment = Segment::new(vec![Some(iv(1, 2)), None]);
        let i = MatrixInstance::new(
            vec![vec![1, 1, 0], vec![0, 0, 0]],
            Cap::Infinite,
            ObjectiveWeights::total_change(),
            SegmentConstraint::ExplicitSegments(vec![segment]),
        );
        let flat = i.flatten_explicit().unwrap();
        assert_eq!(flat.d, 6);
        assert_eq!(flat.a, vec![1, 1, 0, 0, 0, 0]);
        assert_eq!(flat.generators[0].entries(), &[1, 1, 0, 0, 0, 0]);
    }
}
