//! LP relaxation of the problem and an exact simplex solver for it.
//!
//! The relaxation has one equality row per coordinate,
//! `sum_j u_j g_ij - alpha_i + beta_i = a_i`, where `alpha_i`/`beta_i`
//! model the negative/positive deviation of the realized vector from the
//! target and carry bounds `0 <= alpha_i, beta_i <= C`. The objective is
//! `mu * sum_i (alpha_i + beta_i) + nu * sum_j u_j`.
//!
//! [`solve_lp`] runs a dense bounded-variable simplex in arbitrary-precision
//! rational arithmetic, so the optimum it returns is an exact extremal
//! (basic) solution: at most `d` of the `u_j` are nonzero, and when the
//! generator matrix is totally unimodular (e.g. all generators have
//! consecutive ones) the returned vertex is integral. Bland's rule with
//! lowest-index tie-breaking makes every run reproducible.
//!
//! [`solve_lp_with`] exposes the same solver over any [`Scalar`], which the
//! exhaustive test sweeps use with [`crate::rat::Rat128`] for speed.

use crate::core::{Cap, CvpInstance};
use crate::rat::Scalar;
use num_rational::BigRational;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// One variable of the LP, in the fixed ordering `u_0..u_{k-1},
/// alpha_0..alpha_{d-1}, beta_0..beta_{d-1}` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    U(usize),
    Alpha(usize),
    Beta(usize),
}

/// The LP relaxation of an instance.
#[derive(Debug, Clone)]
pub struct LpModel {
    pub instance: CvpInstance,
}

impl LpModel {
    pub fn d(&self) -> usize {
        self.instance.d
    }

    pub fn k(&self) -> usize {
        self.instance.k()
    }

    /// Total number of variables, `k + 2d`.
    pub fn var_count(&self) -> usize {
        self.k() + 2 * self.d()
    }

    pub fn variable(&self, col: usize) -> VarKind {
        let (d, k) = (self.d(), self.k());
        if col < k {
            VarKind::U(col)
        } else if col < k + d {
            VarKind::Alpha(col - k)
        } else {
            assert!(col < k + 2 * d, "variable index {col} out of range");
            VarKind::Beta(col - k - d)
        }
    }

    /// Constraint coefficient of variable `col` in equality row `row`.
    pub fn coeff(&self, row: usize, col: usize) -> i8 {
        match self.variable(col) {
            VarKind::U(j) => self.instance.generators[j].entries()[row] as i8,
            VarKind::Alpha(i) => {
                if i == row {
                    -1
                } else {
                    0
                }
            }
            VarKind::Beta(i) => {
                if i == row {
                    1
                } else {
                    0
                }
            }
        }
    }

    /// Upper bound of variable `col`; `None` means unbounded above.
    pub fn upper_bound(&self, col: usize) -> Option<u64> {
        match (self.variable(col), self.instance.cap) {
            (VarKind::U(_), _) => None,
            (_, Cap::Finite(c)) => Some(c),
            (_, Cap::Infinite) => None,
        }
    }

    /// Objective coefficient of variable `col`.
    pub fn objective_coeff(&self, col: usize) -> &BigRational {
        match self.variable(col) {
            VarKind::U(_) => &self.instance.weights.nu,
            VarKind::Alpha(_) | VarKind::Beta(_) => &self.instance.weights.mu,
        }
    }
}

/// Builds the LP relaxation for an instance. With weights `(1, 0)` this is
/// the plain total-change relaxation; general weights add the beam-on term.
pub fn build_lp(instance: &CvpInstance) -> LpModel {
    LpModel { instance: instance.clone() }
}

/// An exact optimal basic solution of the LP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution<S = BigRational> {
    pub value: S,
    pub u: Vec<S>,
    pub alpha: Vec<S>,
    pub beta: Vec<S>,
    /// Indices (in the model's variable ordering) of the basic variables.
    pub basis: BTreeSet<usize>,
    pub nonzero_u_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome<S = BigRational> {
    /// No feasible point; only possible with a finite cap.
    Infeasible,
    Optimal(LpSolution<S>),
}

impl<S> LpOutcome<S> {
    pub fn optimal(&self) -> Option<&LpSolution<S>> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            LpOutcome::Infeasible => None,
        }
    }
}

/// Solves the LP exactly in arbitrary-precision rational arithmetic.
pub fn solve_lp(model: &LpModel) -> Result<LpOutcome, LpError> {
    solve_lp_with::<BigRational>(model)
}

/// Solves the LP exactly over any [`Scalar`] representation.
pub fn solve_lp_with<S: Scalar>(model: &LpModel) -> Result<LpOutcome<S>, LpError> {
    Simplex::new(model)?.solve()
}

const MAX_PIVOTS: usize = 1_000_000;

/// What blocks the entering variable in the ratio test.
#[derive(Clone)]
enum Blocking {
    /// The entering variable reaches its own opposite bound.
    Flip,
    /// The basic variable of this row reaches a bound (`true` = upper).
    Row(usize, bool),
}

/// Dense bounded-variable two-phase simplex with Bland's rule.
struct Simplex<'a, S> {
    model: &'a LpModel,
    rows: usize,
    /// Real variable count (`k + 2d`); artificials live in columns beyond.
    real_cols: usize,
    cols: usize,
    tab: Vec<Vec<S>>,
    /// Current values of the basic variables, one per row.
    rhs: Vec<S>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    at_upper: Vec<bool>,
    upper: Vec<Option<S>>,
    cost: Vec<S>,
    reduced: Vec<S>,
    pivots: usize,
}

impl<'a, S: Scalar> Simplex<'a, S> {
    fn new(model: &'a LpModel) -> Result<Self, LpError> {
        let rows = model.d();
        let real_cols = model.var_count();
        // Phase 1 is only needed when the all-slack start `beta = a` violates
        // an upper bound, i.e. some a_i exceeds a finite cap. With C infinite
        // the LP is always feasible.
        let needs_phase1 = match model.instance.cap {
            Cap::Infinite => false,
            Cap::Finite(c) => model.instance.a.iter().any(|&ai| ai as u64 > c),
        };
        let cols = real_cols + if needs_phase1 { rows } else { 0 };

        let mut tab = vec![vec![S::zero(); cols]; rows];
        for (r, row) in tab.iter_mut().enumerate() {
            for c in 0..real_cols {
                let v = model.coeff(r, c);
                if v != 0 {
                    row[c] = S::from_i64(v as i64);
                }
            }
            if needs_phase1 {
                row[real_cols + r] = S::one();
            }
        }
        let rhs: Vec<S> = model.instance.a.iter().map(|&ai| S::from_i64(ai)).collect();
        let mut upper: Vec<Option<S>> = (0..real_cols)
            .map(|c| model.upper_bound(c).map(|ub| S::from_i64(ub as i64)))
            .collect();
        upper.extend(std::iter::repeat_n(None, cols - real_cols));

        let basis: Vec<usize> = if needs_phase1 {
            (real_cols..cols).collect()
        } else {
            // beta block is the identity, so beta = a is a basic start.
            (model.k() + rows..model.k() + 2 * rows).collect()
        };
        let mut in_basis = vec![false; cols];
        for &b in &basis {
            in_basis[b] = true;
        }

        let mut simplex = Simplex {
            model,
            rows,
            real_cols,
            cols,
            tab,
            rhs,
            basis,
            in_basis,
            at_upper: vec![false; cols],
            upper,
            cost: vec![S::zero(); cols],
            reduced: vec![S::zero(); cols],
            pivots: 0,
        };
        if needs_phase1 {
            for c in real_cols..cols {
                simplex.cost[c] = S::one();
            }
        }
        simplex.recompute_reduced();
        Ok(simplex)
    }

    fn solve(mut self) -> Result<LpOutcome<S>, LpError> {
        let needs_phase1 = self.cols > self.real_cols;
        if needs_phase1 {
            self.run_phase()?;
            let infeasibility = self.current_value();
            if infeasibility.is_positive() {
                return Ok(LpOutcome::Infeasible);
            }
            // Keep any degenerate basic artificials but pin them to zero so
            // phase 2 can never move them.
            for c in self.real_cols..self.cols {
                self.upper[c] = Some(S::zero());
                self.cost[c] = S::zero();
            }
        }
        for c in 0..self.real_cols {
            self.cost[c] = S::from_big_rational(self.model.objective_coeff(c))
                .ok_or_else(|| LpError::Internal("objective weight out of scalar range".into()))?;
        }
        self.recompute_reduced();
        self.run_phase()?;
        self.extract()
    }

    fn recompute_reduced(&mut self) {
        for c in 0..self.cols {
            let mut v = self.cost[c].clone();
            for r in 0..self.rows {
                let cb = &self.cost[self.basis[r]];
                if !cb.is_zero() && !self.tab[r][c].is_zero() {
                    v = v.minus(&cb.times(&self.tab[r][c]));
                }
            }
            self.reduced[c] = v;
        }
    }

    /// Variables with bounds `[0, 0]` can never move.
    fn is_fixed(&self, c: usize) -> bool {
        matches!(&self.upper[c], Some(ub) if ub.is_zero())
    }

    fn run_phase(&mut self) -> Result<(), LpError> {
        loop {
            let Some(entering) = self.pick_entering() else {
                return Ok(());
            };
            self.pivots += 1;
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::Internal("pivot limit exceeded".into()));
            }
            self.step(entering)?;
        }
    }

    /// Bland's rule: the lowest-index nonbasic variable whose move improves
    /// the objective (an increase from the lower bound needs negative
    /// reduced cost, a decrease from the upper bound needs positive).
    fn pick_entering(&self) -> Option<usize> {
        (0..self.cols).find(|&c| {
            !self.in_basis[c]
                && !self.is_fixed(c)
                && if self.at_upper[c] {
                    self.reduced[c].is_positive()
                } else {
                    self.reduced[c].is_negative()
                }
        })
    }

    fn step(&mut self, entering: usize) -> Result<(), LpError> {
        let increasing = !self.at_upper[entering];
        // Basic values move by -eff[r] per unit of travel t of the
        // entering variable.
        let eff: Vec<S> = (0..self.rows)
            .map(|r| {
                if increasing {
                    self.tab[r][entering].clone()
                } else {
                    self.tab[r][entering].negated()
                }
            })
            .collect();

        // Ratio test. Candidates: each row whose basic variable hits a
        // bound, plus the entering variable reaching its opposite bound.
        // Ties break on the smallest blocking variable index (Bland).
        let mut best: Option<(S, usize, Blocking)> = None;
        let consider = |best: &mut Option<(S, usize, Blocking)>, t: S, var_idx: usize, blk: Blocking| {
            let better = match best {
                None => true,
                Some((bt, bidx, _)) => t < *bt || (t == *bt && var_idx < *bidx),
            };
            if better {
                *best = Some((t, var_idx, blk));
            }
        };
        if let Some(ub) = &self.upper[entering] {
            consider(&mut best, ub.clone(), entering, Blocking::Flip);
        }
        for r in 0..self.rows {
            if eff[r].is_positive() {
                let t = self.rhs[r].div_by(&eff[r]);
                consider(&mut best, t, self.basis[r], Blocking::Row(r, false));
            } else if eff[r].is_negative() {
                if let Some(ub) = &self.upper[self.basis[r]] {
                    let t = ub.minus(&self.rhs[r]).div_by(&eff[r].negated());
                    consider(&mut best, t, self.basis[r], Blocking::Row(r, true));
                }
            }
        }

        let Some((t, _, blocking)) = best else {
            // Cannot happen: the objective is bounded below by zero.
            return Err(LpError::Internal("LP is unbounded".into()));
        };

        if !t.is_zero() {
            for r in 0..self.rows {
                if !eff[r].is_zero() {
                    self.rhs[r] = self.rhs[r].minus(&eff[r].times(&t));
                }
            }
        }

        match blocking {
            Blocking::Flip => {
                self.at_upper[entering] = !self.at_upper[entering];
            }
            Blocking::Row(pr, to_upper) => {
                let entering_value = if increasing {
                    t
                } else {
                    self.upper[entering]
                        .clone()
                        .expect("decreasing from an upper bound requires one")
                        .minus(&t)
                };
                let leaving = self.basis[pr];
                self.in_basis[leaving] = false;
                self.at_upper[leaving] = to_upper;
                self.basis[pr] = entering;
                self.in_basis[entering] = true;
                self.at_upper[entering] = false;
                self.rhs[pr] = entering_value;
                self.pivot_tableau(pr, entering);
            }
        }
        Ok(())
    }

    fn pivot_tableau(&mut self, pr: usize, pc: usize) {
        let piv = self.tab[pr][pc].clone();
        if piv != S::one() {
            for c in 0..self.cols {
                if !self.tab[pr][c].is_zero() {
                    self.tab[pr][c] = self.tab[pr][c].div_by(&piv);
                }
            }
        }
        let pivot_row = self.tab[pr].clone();
        for r in 0..self.rows {
            if r == pr || self.tab[r][pc].is_zero() {
                continue;
            }
            let factor = self.tab[r][pc].clone();
            for c in 0..self.cols {
                if !pivot_row[c].is_zero() {
                    self.tab[r][c] = self.tab[r][c].minus(&factor.times(&pivot_row[c]));
                }
            }
        }
        if !self.reduced[pc].is_zero() {
            let factor = self.reduced[pc].clone();
            for c in 0..self.cols {
                if !pivot_row[c].is_zero() {
                    self.reduced[c] = self.reduced[c].minus(&factor.times(&pivot_row[c]));
                }
            }
        }
    }

    fn value_of(&self, c: usize) -> S {
        if self.in_basis[c] {
            let r = self.basis.iter().position(|&b| b == c).unwrap();
            self.rhs[r].clone()
        } else if self.at_upper[c] {
            self.upper[c].clone().expect("nonbasic at upper requires a bound")
        } else {
            S::zero()
        }
    }

    fn current_value(&self) -> S {
        let mut v = S::zero();
        for c in 0..self.cols {
            if !self.cost[c].is_zero() {
                let x = self.value_of(c);
                if !x.is_zero() {
                    v = v.plus(&self.cost[c].times(&x));
                }
            }
        }
        v
    }

    fn extract(self) -> Result<LpOutcome<S>, LpError> {
        let (d, k) = (self.model.d(), self.model.k());
        let mut x = Vec::with_capacity(self.real_cols);
        for c in 0..self.real_cols {
            x.push(self.value_of(c));
        }
        for (c, v) in x.iter().enumerate() {
            if v.is_negative() {
                return Err(LpError::Internal(format!("variable {c} is negative")));
            }
            if let Some(ub) = &self.upper[c] {
                if v > ub {
                    return Err(LpError::Internal(format!("variable {c} exceeds its bound")));
                }
            }
        }
        #[cfg(debug_assertions)]
        for r in 0..self.rows {
            let mut lhs = S::zero();
            for (c, v) in x.iter().enumerate() {
                let g = self.model.coeff(r, c);
                if g != 0 && !v.is_zero() {
                    lhs = lhs.plus(&S::from_i64(g as i64).times(v));
                }
            }
            debug_assert_eq!(
                lhs,
                S::from_i64(self.model.instance.a[r]),
                "equality row {r} violated"
            );
        }

        let value = self.current_value();
        let u = x[..k].to_vec();
        let alpha = x[k..k + d].to_vec();
        let beta = x[k + d..k + 2 * d].to_vec();
        let nonzero_u_count = u.iter().filter(|v| !v.is_zero()).count();
        if nonzero_u_count > d {
            return Err(LpError::Internal(format!(
                "basic solution has {nonzero_u_count} nonzero coefficients, more than d={d}"
            )));
        }
        let basis: BTreeSet<usize> =
            self.basis.iter().copied().filter(|&c| c < self.real_cols).collect();
        Ok(LpOutcome::Optimal(LpSolution { value, u, alpha, beta, basis, nonzero_u_count }))
    }
}
