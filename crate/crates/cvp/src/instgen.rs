//! Instance factories: random vector instances, minimum-separation matrix
//! fixtures, and a reduction from 3SAT-6 formulas to 2-row matrix
//! instances with explicit segments.
//!
//! The reduction gives every variable a block of 6 ones in the first
//! matrix row and every clause a block of 5 ones in the second. A variable
//! block has two exact 3-interval decompositions (lengths 1/3/2 for
//! "true", 2/3/1 for "false"); picking one is picking a truth value. Each
//! literal yields a segment pairing one variable sub-interval with the
//! cell of its clause block at the literal's position; seven filler
//! segments per clause open only in the clause block and can complete any
//! nonempty subset of literal cells to the full block, but cannot cover
//! the block alone: an unsatisfied clause always costs one unit of change.
//! Consequently the optimum total change equals the number of clauses
//! minus the maximum number of simultaneously satisfiable ones.

use crate::core::{Cap, CvpInstance, Generator, Interval, ObjectiveWeights};
use crate::rounding::RngSpec;
use crate::segmentation::{MatrixInstance, MatrixPlan, Segment, SegmentConstraint};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstgenError {
    #[error("malformed 3SAT-6 formula: {0}")]
    MalformedFormula(String),
    #[error("cannot parse formula: {0}")]
    Parse(String),
}

/// A 3SAT-6 formula: every clause has exactly three distinct variables,
/// and every variable occurs exactly three times positive and three times
/// negative (hence `t = 2s` clauses). Literals are signed 1-based
/// variable indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sat36Formula {
    s: usize,
    clauses: Vec<[i32; 3]>,
}

impl Sat36Formula {
    pub fn new(s: usize, clauses: Vec<[i32; 3]>) -> Result<Self, InstgenError> {
        if s == 0 {
            return Err(InstgenError::MalformedFormula("no variables".into()));
        }
        if clauses.len() != 2 * s {
            return Err(InstgenError::MalformedFormula(format!(
                "expected t = 2s = {} clauses, got {}",
                2 * s,
                clauses.len()
            )));
        }
        let mut pos = vec![0usize; s];
        let mut neg = vec![0usize; s];
        for (j, clause) in clauses.iter().enumerate() {
            let mut vars = [0usize; 3];
            for (slot, &lit) in clause.iter().enumerate() {
                if lit == 0 || lit.unsigned_abs() as usize > s {
                    return Err(InstgenError::MalformedFormula(format!(
                        "clause {} has literal {} outside 1..={s}",
                        j + 1,
                        lit
                    )));
                }
                let var = lit.unsigned_abs() as usize;
                vars[slot] = var;
                if lit > 0 {
                    pos[var - 1] += 1;
                } else {
                    neg[var - 1] += 1;
                }
            }
            if vars[0] == vars[1] || vars[0] == vars[2] || vars[1] == vars[2] {
                return Err(InstgenError::MalformedFormula(format!(
                    "clause {} repeats a variable",
                    j + 1
                )));
            }
        }
        for v in 0..s {
            if pos[v] != 3 || neg[v] != 3 {
                return Err(InstgenError::MalformedFormula(format!(
                    "variable {} occurs {} times positive and {} times negative, need 3/3",
                    v + 1,
                    pos[v],
                    neg[v]
                )));
            }
        }
        Ok(Sat36Formula { s, clauses })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of clauses, always `2s`.
    pub fn t(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }
}

/// Parses the DIMACS-like format: a header `p sat36 <s> <t>` followed by
/// `t` lines of three signed integers. Lines starting with `c` are
/// comments.
pub fn parse_sat36(text: &str) -> Result<Sat36Formula, InstgenError> {
    let mut lines = text.lines().filter(|l| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('c')
    });
    let header = lines.next().ok_or_else(|| InstgenError::Parse("empty input".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "sat36" {
        return Err(InstgenError::Parse(format!("bad header {header:?}, expected `p sat36 s t`")));
    }
    let s: usize = fields[2].parse().map_err(|_| InstgenError::Parse("bad s in header".into()))?;
    let t: usize = fields[3].parse().map_err(|_| InstgenError::Parse("bad t in header".into()))?;
    let mut clauses = Vec::with_capacity(t);
    for line in lines {
        let lits: Result<Vec<i32>, _> = line.split_whitespace().map(str::parse).collect();
        let lits = lits.map_err(|_| InstgenError::Parse(format!("bad clause line {line:?}")))?;
        if lits.len() != 3 {
            return Err(InstgenError::Parse(format!(
                "clause line {line:?} must have exactly 3 literals"
            )));
        }
        clauses.push([lits[0], lits[1], lits[2]]);
    }
    if clauses.len() != t {
        return Err(InstgenError::Parse(format!("header promises {t} clauses, found {}", clauses.len())));
    }
    Sat36Formula::new(s, clauses)
}

pub fn serialize_sat36(formula: &Sat36Formula) -> String {
    let mut out = String::new();
    writeln!(out, "p sat36 {} {}", formula.s(), formula.t()).unwrap();
    for clause in formula.clauses() {
        writeln!(out, "{} {} {}", clause[0], clause[1], clause[2]).unwrap();
    }
    out
}

/// Gadget role of one segment of a reduced instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetRole {
    /// Segment for literal `var`/`negated` in clause `clause` (1-based);
    /// the literal is the `alpha`-th of its clause and the clause is the
    /// `beta`-th containing this literal (both in 1..=3).
    Literal { var: usize, negated: bool, clause: usize, alpha: usize, beta: usize },
    /// Filler segment `gamma` in 4..=10 for `clause`.
    Filler { clause: usize, gamma: usize },
}

/// The 2 x 10s matrix instance produced by [`reduce_3sat6`], with its
/// `20s` segments and their gadget roles (positionally aligned with the
/// explicit segment list).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedInstance {
    pub matrix_instance: MatrixInstance,
    pub segments: Vec<Segment>,
    pub provenance: Vec<GadgetRole>,
    pub formula: Sat36Formula,
}

/// First-row sub-interval of variable `i` (1-based) for occurrence `beta`
/// of the positive (`negated = false`) or negative literal.
fn var_subinterval(i: usize, negated: bool, beta: usize) -> Interval {
    let base = 6 * i - 5;
    let (lo, hi) = if negated {
        match beta {
            1 => (base, base + 1),
            2 => (base + 2, base + 4),
            _ => (base + 5, base + 5),
        }
    } else {
        match beta {
            1 => (base, base),
            2 => (base + 1, base + 3),
            _ => (base + 4, base + 5),
        }
    };
    Interval::new(lo, hi)
}

/// Second-row sub-interval `gamma` in 1..=10 of clause `j` (1-based).
fn clause_subinterval(j: usize, gamma: usize) -> Interval {
    let base = 5 * j - 4; // leftmost cell of the clause block
    let (lo, hi) = match gamma {
        1 => (base, base),
        2 => (base + 2, base + 2),
        3 => (base + 4, base + 4),
        4 => (base + 1, base + 1),
        5 => (base + 3, base + 3),
        6 => (base, base + 1),
        7 => (base + 3, base + 4),
        8 => (base + 1, base + 3),
        9 => (base, base + 3),
        10 => (base + 1, base + 4),
        _ => panic!("clause sub-interval index {gamma} out of range"),
    };
    Interval::new(lo, hi)
}

/// Filler completion table, indexed by the bitmask of literal cells
/// already present in a clause block (bit `alpha - 1` set iff the
/// `alpha`-th literal segment is used): which fillers complete the block
/// best, and the residual change (1 only when no literal cell is present).
/// Verified by exhaustive enumeration in the tests.
const FILLER_COMPLETION: [(&[usize], u64); 8] = [
    (&[9], 1),     // {}      -> best approximation, one cell short
    (&[10], 0),    // {1}
    (&[6, 7], 0),  // {2}
    (&[4, 7], 0),  // {1,2}
    (&[9], 0),     // {3}
    (&[8], 0),     // {1,3}
    (&[5, 6], 0),  // {2,3}
    (&[4, 5], 0),  // {1,2,3}
];

/// Builds the 2 x 10s explicit-segment instance of a formula: the first
/// row of the target has `6s` ones followed by `4s` zeros, the second row
/// is all ones; `3t` literal segments plus `7t` fillers give `k = 20s`
/// segments; the cap is infinite and the objective is plain total change.
pub fn reduce_3sat6(formula: &Sat36Formula) -> ReducedInstance {
    let (s, t) = (formula.s(), formula.t());
    let n = 10 * s;

    // beta bookkeeping: for each literal, its clauses in increasing order.
    let mut occurrence: BTreeMap<(usize, bool), usize> = BTreeMap::new();

    let mut segments = Vec::with_capacity(20 * s);
    let mut provenance = Vec::with_capacity(20 * s);
    for (cj, clause) in formula.clauses().iter().enumerate() {
        let j = cj + 1;
        for (slot, &lit) in clause.iter().enumerate() {
            let alpha = slot + 1;
            let var = lit.unsigned_abs() as usize;
            let negated = lit < 0;
            let beta = {
                let counter = occurrence.entry((var, negated)).or_insert(0);
                *counter += 1;
                *counter
            };
            debug_assert!(beta <= 3);
            segments.push(Segment::new(vec![
                Some(var_subinterval(var, negated, beta)),
                Some(clause_subinterval(j, alpha)),
            ]));
            provenance.push(GadgetRole::Literal { var, negated, clause: j, alpha, beta });
        }
    }
    for j in 1..=t {
        for gamma in 4..=10 {
            segments.push(Segment::new(vec![None, Some(clause_subinterval(j, gamma))]));
            provenance.push(GadgetRole::Filler { clause: j, gamma });
        }
    }

    let mut row0 = vec![1i64; 6 * s];
    row0.extend(std::iter::repeat_n(0i64, 4 * s));
    let row1 = vec![1i64; n];
    let matrix_instance = MatrixInstance::new(
        vec![row0, row1],
        Cap::Infinite,
        ObjectiveWeights::total_change(),
        SegmentConstraint::ExplicitSegments(segments.clone()),
    );
    ReducedInstance { matrix_instance, segments, provenance, formula: formula.clone() }
}

/// Turns a truth assignment into a decomposition plan: for each variable
/// the three literal segments matching its value, plus fillers completing
/// each clause block (exactly when the clause is satisfied, with one unit
/// of change otherwise). The plan's total change is `t - sigma` where
/// `sigma` is the number of satisfied clauses.
pub fn assignment_to_plan(reduced: &ReducedInstance, assignment: &[bool]) -> MatrixPlan {
    assert_eq!(assignment.len(), reduced.formula.s(), "assignment length mismatch");
    let t = reduced.formula.t();

    let mut terms: Vec<(Segment, i64)> = Vec::new();
    let mut clause_mask = vec![0usize; t];
    for (segment, role) in reduced.segments.iter().zip(&reduced.provenance) {
        if let GadgetRole::Literal { var, negated, clause, alpha, .. } = *role {
            if assignment[var - 1] != negated {
                terms.push((segment.clone(), 1));
                clause_mask[clause - 1] |= 1 << (alpha - 1);
            }
        }
    }
    for (cj, &mask) in clause_mask.iter().enumerate() {
        let (fillers, _) = FILLER_COMPLETION[mask];
        for &gamma in fillers {
            let idx = reduced
                .provenance
                .iter()
                .position(|r| matches!(r, GadgetRole::Filler { clause, gamma: g } if *clause == cj + 1 && *g == gamma))
                .expect("filler segment present by construction");
            terms.push((reduced.segments[idx].clone(), 1));
        }
    }
    MatrixPlan::from_terms(&reduced.matrix_instance, terms, false)
}

/// Exact optimum total change of a reduced instance over binary
/// coefficient vectors (the target is binary, so binary coefficients are
/// without loss of generality).
///
/// Exhausts the 64 subsets of each variable's literal segments; fillers
/// only interact within one clause block and are optimized per block via
/// the completion table. Intended for the shipped fixtures (`s <= 6`).
pub fn brute_force_reduced_opt(reduced: &ReducedInstance) -> u64 {
    let (s, t) = (reduced.formula.s(), reduced.formula.t());

    // Cost of a subset of the six literal sub-intervals against a block of
    // six ones. Relative spans within a block, in the fixed bit order
    // (pos beta=1..3, neg beta=1..3).
    let rel_spans: [(usize, usize); 6] = [(0, 0), (1, 3), (4, 5), (0, 1), (2, 4), (5, 5)];
    let mut block_cost = [0u64; 64];
    for (mask, cost) in block_cost.iter_mut().enumerate() {
        let mut coverage = [0i64; 6];
        for (bit, &(lo, hi)) in rel_spans.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                for cell in &mut coverage[lo..=hi] {
                    *cell += 1;
                }
            }
        }
        *cost = coverage.iter().map(|&c| (c - 1).unsigned_abs()).sum();
    }
    // Visit cheap variable-block patterns first so pruning bites early.
    let mut mask_order: Vec<usize> = (0..64).collect();
    mask_order.sort_by_key(|&m| (block_cost[m], m));

    // For each variable, bit -> (clause index, alpha) of its six literal
    // segments.
    let mut literal_targets = vec![[(0usize, 0usize); 6]; s];
    for role in &reduced.provenance {
        if let GadgetRole::Literal { var, negated, clause, alpha, beta } = *role {
            let bit = if negated { 3 + beta - 1 } else { beta - 1 };
            literal_targets[var - 1][bit] = (clause - 1, alpha);
        }
    }

    struct Dfs<'a> {
        literal_targets: &'a [[(usize, usize); 6]],
        mask_order: &'a [usize],
        block_cost: &'a [u64; 64],
        clause_mask: Vec<usize>,
        best: u64,
        s: usize,
    }

    impl Dfs<'_> {
        fn go(&mut self, var: usize, acc: u64) {
            if acc >= self.best {
                return;
            }
            if var == self.s {
                let clause_cost: u64 =
                    self.clause_mask.iter().map(|&m| FILLER_COMPLETION[m].1).sum();
                self.best = self.best.min(acc + clause_cost);
                return;
            }
            for &mask in self.mask_order {
                let cost = acc + self.block_cost[mask];
                if cost >= self.best {
                    continue;
                }
                for bit in 0..6 {
                    if mask & (1 << bit) != 0 {
                        let (cj, alpha) = self.literal_targets[var][bit];
                        self.clause_mask[cj] |= 1 << (alpha - 1);
                    }
                }
                self.go(var + 1, cost);
                for bit in 0..6 {
                    if mask & (1 << bit) != 0 {
                        let (cj, alpha) = self.literal_targets[var][bit];
                        self.clause_mask[cj] &= !(1 << (alpha - 1));
                    }
                }
            }
        }
    }

    let mut dfs = Dfs {
        literal_targets: &literal_targets,
        mask_order: &mask_order,
        block_cost: &block_cost,
        clause_mask: vec![0; t],
        best: u64::MAX,
        s,
    };
    dfs.go(0, 0);
    dfs.best
}

/// Uniform random instance: generators drawn over nonzero binary vectors
/// (or nonzero ones-intervals with `consecutive_only`), target entries
/// uniform in `[0, max_entry]`. Deterministic per `rng`.
pub fn gen_random_instance(
    d: usize,
    k: usize,
    max_entry: u64,
    cap: Cap,
    consecutive_only: bool,
    rng: &RngSpec,
) -> CvpInstance {
    assert!(d >= 1, "dimension must be positive");
    let mut rng = rng.rng();
    let mut generators = Vec::with_capacity(k);
    for _ in 0..k {
        if consecutive_only {
            let total = d * (d + 1) / 2;
            let mut idx = rng.gen_range(0..total);
            let mut lo = 1;
            while idx > d - lo {
                idx -= d - lo + 1;
                lo += 1;
            }
            generators.push(Generator::from_interval(d, Interval::new(lo, lo + idx)));
        } else {
            let entries = loop {
                let entries: Vec<u8> = (0..d).map(|_| rng.gen_range(0..=1u8)).collect();
                if entries.iter().any(|&v| v != 0) {
                    break entries;
                }
            };
            generators.push(Generator::new(entries));
        }
    }
    let a: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=max_entry) as i64).collect();
    CvpInstance::new(a, generators, cap, ObjectiveWeights::total_change())
}

/// How [`gen_msc_matrix`] fills the target matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MscGenMode {
    /// Uniform entries in `[0, max_entry]`.
    Random,
    /// Emit the realized matrix of a random feasible plan, guaranteeing an
    /// exact decomposition exists.
    Decomposable,
}

/// Random matrix fixture carrying a minimum separation constraint.
pub fn gen_msc_matrix(
    m: usize,
    n: usize,
    lambda: usize,
    max_entry: u64,
    mode: MscGenMode,
    cap: Cap,
    rng: &RngSpec,
) -> Result<MatrixInstance, crate::segmentation::SegmentationError> {
    let intervals = crate::segmentation::msc_row_intervals(n, lambda)?;
    let mut rng = rng.rng();
    let a: Vec<Vec<i64>> = match mode {
        MscGenMode::Random => (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0..=max_entry) as i64).collect())
            .collect(),
        MscGenMode::Decomposable => (0..m)
            .map(|_| {
                let mut row = vec![0i64; n];
                let picks = rng.gen_range(0..=3usize);
                for _ in 0..picks {
                    let iv = intervals[rng.gen_range(0..intervals.len())];
                    let coefficient = rng.gen_range(1..=max_entry.max(1)) as i64;
                    for cell in &mut row[iv.lo() - 1..iv.hi()] {
                        *cell += coefficient;
                    }
                }
                row
            })
            .collect(),
    };
    Ok(MatrixInstance::new(
        a,
        cap,
        ObjectiveWeights::total_change(),
        SegmentConstraint::MinSeparation(lambda),
    ))
}

/// A satisfiable 3-variable fixture (6 clauses, every assignment issue
/// checked in tests).
pub fn fixture_s3() -> Sat36Formula {
    Sat36Formula::new(
        3,
        vec![
            [1, 2, 3],
            [1, -2, -3],
            [1, 2, -3],
            [-1, -2, 3],
            [-1, 2, 3],
            [-1, -2, -3],
        ],
    )
    .expect("fixture is well formed")
}

/// An unsatisfiable 4-variable fixture: its eight clauses exclude the
/// sixteen assignments exactly once each, so every assignment satisfies
/// exactly seven clauses.
pub fn fixture_s4_unsat() -> Sat36Formula {
    Sat36Formula::new(
        4,
        vec![
            [1, 2, 3],
            [-1, -2, -3],
            [1, -3, 4],
            [-1, 3, -4],
            [-2, 3, 4],
            [2, -3, -4],
            [-1, 2, 4],
            [1, -2, -4],
        ],
    )
    .expect("fixture is well formed")
}
