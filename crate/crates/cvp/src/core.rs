//! Domain types shared by every solver, plus solution evaluation.
//!
//! An instance is a target vector `a` of nonnegative integers, a set of
//! binary generator vectors, a cap on the per-coordinate deviation and a
//! pair of objective weights `(mu, nu)` charging total change and beam-on
//! time respectively. All types are immutable after construction and all
//! operations here are pure, so values can be shared freely across threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoreError {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
}

/// Closed integer interval `[lo, hi]`, 1-based, `1 <= lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    lo: usize,
    hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Self {
        assert!(lo >= 1 && lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.lo <= pos && pos <= self.hi
    }

    /// 0/1 indicator vector of length `d` (positions are 1-based).
    pub fn indicator(&self, d: usize) -> Vec<u8> {
        assert!(self.hi <= d, "interval [{}, {}] exceeds dimension {d}", self.lo, self.hi);
        (1..=d).map(|p| u8::from(self.contains(p))).collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Where the ones of a binary vector sit when they are contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OnesSpan {
    /// All-zero vector (the empty leaf opening).
    Empty,
    Contiguous(Interval),
}

/// Returns the ones-interval of `g` if its ones are contiguous,
/// `Some(OnesSpan::Empty)` for the all-zero vector, and `None` when the
/// ones are scattered. Nonzero entries are treated as ones; rejecting
/// non-binary data is `validate_instance`'s job.
pub fn has_consecutive_ones(g: &[u8]) -> Option<OnesSpan> {
    let first = g.iter().position(|&v| v != 0);
    let Some(first) = first else {
        return Some(OnesSpan::Empty);
    };
    let last = g.iter().rposition(|&v| v != 0).unwrap();
    if g[first..=last].iter().all(|&v| v != 0) {
        Some(OnesSpan::Contiguous(Interval::new(first + 1, last + 1)))
    } else {
        None
    }
}

/// A binary generator vector, stored densely with its ones-interval cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    entries: Vec<u8>,
    span: Option<OnesSpan>,
}

impl Generator {
    /// Wraps raw entries. Non-binary entries are representable (so that
    /// `validate_instance` can report them) but get no cached span.
    pub fn new(entries: Vec<u8>) -> Self {
        let span = if entries.iter().all(|&v| v <= 1) {
            has_consecutive_ones(&entries)
        } else {
            None
        };
        Generator { entries, span }
    }

    pub fn from_interval(d: usize, interval: Interval) -> Self {
        Generator::new(interval.indicator(d))
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Cached result of [`has_consecutive_ones`] on the entries.
    pub fn span(&self) -> Option<OnesSpan> {
        self.span
    }
}

/// Upper bound on the per-coordinate deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cap {
    Finite(u64),
    Infinite,
}

impl Cap {
    pub fn is_finite(&self) -> bool {
        matches!(self, Cap::Finite(_))
    }

    /// Whether a deviation of `linf` is allowed under this cap.
    pub fn admits(&self, linf: u64) -> bool {
        match self {
            Cap::Finite(c) => linf <= *c,
            Cap::Infinite => true,
        }
    }
}

impl fmt::Display for Cap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cap::Finite(c) => write!(f, "{c}"),
            Cap::Infinite => write!(f, "inf"),
        }
    }
}

/// Importance factors: `mu` weights the total change, `nu` the beam-on
/// time. The default `(1, 0)` recovers the plain total-change objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveWeights {
    pub mu: BigRational,
    pub nu: BigRational,
}

impl ObjectiveWeights {
    pub fn new(mu: BigRational, nu: BigRational) -> Self {
        ObjectiveWeights { mu, nu }
    }

    pub fn from_ints(mu: i64, nu: i64) -> Self {
        ObjectiveWeights {
            mu: BigRational::from_integer(BigInt::from(mu)),
            nu: BigRational::from_integer(BigInt::from(nu)),
        }
    }

    /// Total change only: `(1, 0)`.
    pub fn total_change() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn objective(&self, tc: u64, bot: u64) -> BigRational {
        &self.mu * BigRational::from_integer(BigInt::from(tc))
            + &self.nu * BigRational::from_integer(BigInt::from(bot))
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self::total_change()
    }
}

/// A problem instance: target `a`, binary generators, cap and weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvpInstance {
    pub d: usize,
    pub a: Vec<i64>,
    pub generators: Vec<Generator>,
    pub cap: Cap,
    pub weights: ObjectiveWeights,
}

impl CvpInstance {
    pub fn new(a: Vec<i64>, generators: Vec<Generator>, cap: Cap, weights: ObjectiveWeights) -> Self {
        CvpInstance { d: a.len(), a, generators, cap, weights }
    }

    /// Number of generators.
    pub fn k(&self) -> usize {
        self.generators.len()
    }

    /// Whether every generator has a nonempty contiguous ones-interval
    /// (the precondition of the flow reduction).
    pub fn all_consecutive_nonempty(&self) -> bool {
        self.generators
            .iter()
            .all(|g| matches!(g.span(), Some(OnesSpan::Contiguous(_))))
    }

    pub fn l1_norm_of_target(&self) -> u64 {
        self.a.iter().map(|&v| v.unsigned_abs()).sum()
    }
}

/// One invariant violation found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    ZeroDimension,
    TargetLengthMismatch { len: usize, expected: usize },
    NegativeTargetEntry { index: usize, value: i64 },
    GeneratorLengthMismatch { generator: usize, len: usize, expected: usize },
    NonBinaryGeneratorEntry { generator: usize, position: usize, value: u8 },
    NegativeWeight { which: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroDimension => write!(f, "dimension d must be positive"),
            Violation::TargetLengthMismatch { len, expected } => {
                write!(f, "target length {len} does not match d={expected}")
            }
            Violation::NegativeTargetEntry { index, value } => {
                write!(f, "negative target entry a[{index}] = {value}")
            }
            Violation::GeneratorLengthMismatch { generator, len, expected } => {
                write!(f, "generator {generator} has length {len}, expected {expected}")
            }
            Violation::NonBinaryGeneratorEntry { generator, position, value } => {
                write!(f, "generator {generator} entry at position {position} is {value}, not 0/1")
            }
            Violation::NegativeWeight { which } => write!(f, "negative weight {which}"),
        }
    }
}

/// Checks every instance invariant; the returned list is empty iff the
/// instance is well formed. Indices in violations are 0-based.
pub fn validate_instance(instance: &CvpInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    if instance.d == 0 {
        out.push(Violation::ZeroDimension);
    }
    if instance.a.len() != instance.d {
        out.push(Violation::TargetLengthMismatch { len: instance.a.len(), expected: instance.d });
    }
    for (i, &v) in instance.a.iter().enumerate() {
        if v < 0 {
            out.push(Violation::NegativeTargetEntry { index: i, value: v });
        }
    }
    for (j, g) in instance.generators.iter().enumerate() {
        if g.len() != instance.d {
            out.push(Violation::GeneratorLengthMismatch {
                generator: j,
                len: g.len(),
                expected: instance.d,
            });
        }
        for (p, &v) in g.entries().iter().enumerate() {
            if v > 1 {
                out.push(Violation::NonBinaryGeneratorEntry { generator: j, position: p, value: v });
            }
        }
    }
    if instance.weights.mu.is_negative() {
        out.push(Violation::NegativeWeight { which: "mu" });
    }
    if instance.weights.nu.is_negative() {
        out.push(Violation::NegativeWeight { which: "nu" });
    }
    out
}

/// A coefficient vector together with everything derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Nonnegative integer coefficients, one per generator.
    pub u: Vec<i64>,
    /// Realized vector `b = sum_j u_j g_j`.
    pub b: Vec<i64>,
    /// Total change `||a - b||_1`.
    pub tc: u64,
    /// `||a - b||_inf`.
    pub linf: u64,
    /// Beam-on time `sum_j u_j`.
    pub bot: u64,
    /// `mu * tc + nu * bot`.
    pub objective: BigRational,
    /// Whether `linf <= C`.
    pub within_cap: bool,
}

/// Evaluates the coefficient vector `u` against the instance, computing the
/// realized vector and all derived metrics exactly.
pub fn evaluate(instance: &CvpInstance, u: &[i64]) -> Result<Solution, CoreError> {
    if u.len() != instance.k() {
        return Err(CoreError::InvalidCoefficients(format!(
            "expected {} coefficients, got {}",
            instance.k(),
            u.len()
        )));
    }
    if let Some(j) = u.iter().position(|&v| v < 0) {
        return Err(CoreError::InvalidCoefficients(format!("u[{j}] = {} is negative", u[j])));
    }
    let mut b = vec![0i64; instance.d];
    for (g, &uj) in instance.generators.iter().zip(u) {
        if uj == 0 {
            continue;
        }
        for (bi, &gi) in b.iter_mut().zip(g.entries()) {
            *bi += uj * i64::from(gi);
        }
    }
    let mut tc = 0u64;
    let mut linf = 0u64;
    for (&ai, &bi) in instance.a.iter().zip(&b) {
        let dev = ai.abs_diff(bi);
        tc += dev;
        linf = linf.max(dev);
    }
    let bot: u64 = u.iter().map(|&v| v as u64).sum();
    let objective = instance.weights.objective(tc, bot);
    let within_cap = instance.cap.admits(linf);
    Ok(Solution { u: u.to_vec(), b, tc, linf, bot, objective, within_cap })
}

/// Status of a solve attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Infeasible,
    OptimalExact,
    Approximate,
}

/// Which algorithm produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lp,
    Flow,
    Round,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Lp => "lp",
            Method::Flow => "flow",
            Method::Round => "round",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a solver run: status, the solution if any, and the LP
/// lower-bound value when one was computed along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    pub lp_value: Option<BigRational>,
    pub method: Method,
    pub seed: Option<u64>,
}

impl SolveReport {
    pub fn infeasible(method: Method) -> Self {
        SolveReport { status: SolveStatus::Infeasible, solution: None, lp_value: None, method, seed: None }
    }
}
