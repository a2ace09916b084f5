//! JSON instance and solution files.
//!
//! Two instance forms share the `kind` discriminator:
//!
//! ```json
//! {"kind":"vector","d":2,"C":"inf","a":[2,1],"generators":[[1,1],[1,0]],"mu":1,"nu":0}
//! {"kind":"matrix","m":1,"n":5,"C":0,"A":[[1,1,4,1,1]],
//!  "constraint":{"msc":{"lambda":3}},"mu":1,"nu":0}
//! ```
//!
//! Explicit segment lists replace the `msc` constraint with
//! `{"segments":[[[1,3],null], ...]}` (one `[l,r]`-or-`null` entry per
//! row). `C` is a nonnegative integer or the string `"inf"`. Rational
//! weights and objectives serialize as integers when integral and as
//! `"p/q"` strings otherwise. Key order is fixed and unknown keys are
//! rejected, so emitted files are byte-stable and round-trip exactly.

use crate::core::{
    validate_instance, Cap, CvpInstance, Generator, Interval, Method, ObjectiveWeights, Solution,
    SolveReport, SolveStatus,
};
use crate::segmentation::{MatrixInstance, MatrixPlan, Segment, SegmentConstraint};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot parse file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// JSON image of a cap: a nonnegative integer or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CapRepr {
    Finite(u64),
    Infinite(String),
}

impl CapRepr {
    fn to_cap(&self) -> Result<Cap, IoError> {
        match self {
            CapRepr::Finite(c) => Ok(Cap::Finite(*c)),
            CapRepr::Infinite(s) if s == "inf" => Ok(Cap::Infinite),
            CapRepr::Infinite(s) => Err(IoError::Invalid(format!("bad cap {s:?}, expected \"inf\""))),
        }
    }

    fn from_cap(cap: Cap) -> Self {
        match cap {
            Cap::Finite(c) => CapRepr::Finite(c),
            Cap::Infinite => CapRepr::Infinite("inf".into()),
        }
    }
}

/// JSON image of an exact rational: an integer, or `"p/q"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatRepr {
    Int(i64),
    Frac(String),
}

impl RatRepr {
    pub fn to_rational(&self) -> Result<BigRational, IoError> {
        match self {
            RatRepr::Int(v) => Ok(BigRational::from_integer(BigInt::from(*v))),
            RatRepr::Frac(s) => {
                let (num, den) = s
                    .split_once('/')
                    .ok_or_else(|| IoError::Invalid(format!("bad rational {s:?}, expected \"p/q\"")))?;
                let num = BigInt::from_str(num.trim())
                    .map_err(|_| IoError::Invalid(format!("bad numerator in {s:?}")))?;
                let den = BigInt::from_str(den.trim())
                    .map_err(|_| IoError::Invalid(format!("bad denominator in {s:?}")))?;
                if den.is_zero() || den.is_negative() {
                    return Err(IoError::Invalid(format!("denominator must be positive in {s:?}")));
                }
                Ok(BigRational::new(num, den))
            }
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        if r.denom().is_one() {
            if let Some(v) = r.numer().to_i64() {
                return RatRepr::Int(v);
            }
        }
        RatRepr::Frac(format!("{}/{}", r.numer(), r.denom()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorFile {
    kind: String,
    d: usize,
    #[serde(rename = "C")]
    cap: CapRepr,
    a: Vec<i64>,
    generators: Vec<Vec<u8>>,
    mu: RatRepr,
    nu: RatRepr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MscRepr {
    lambda: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ConstraintRepr {
    Msc {
        msc: MscRepr,
    },
    Segments {
        segments: Vec<Vec<Option<[usize; 2]>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    kind: String,
    m: usize,
    n: usize,
    #[serde(rename = "C")]
    cap: CapRepr,
    #[serde(rename = "A")]
    a: Vec<Vec<i64>>,
    constraint: ConstraintRepr,
    mu: RatRepr,
    nu: RatRepr,
}

/// Either instance form, as domain types.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyInstance {
    Vector(CvpInstance),
    Matrix(MatrixInstance),
}

fn segment_to_repr(segment: &Segment) -> Vec<Option<[usize; 2]>> {
    segment.rows.iter().map(|iv| iv.map(|iv| [iv.lo(), iv.hi()])).collect()
}

fn segment_from_repr(rows: &[Option<[usize; 2]>], n: usize) -> Result<Segment, IoError> {
    let rows = rows
        .iter()
        .map(|entry| match entry {
            None => Ok(None),
            Some([lo, hi]) => {
                if *lo < 1 || lo > hi || *hi > n {
                    Err(IoError::Invalid(format!("segment interval [{lo}, {hi}] is out of range")))
                } else {
                    Ok(Some(Interval::new(*lo, *hi)))
                }
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Segment::new(rows))
}

/// Parses an instance file, rejecting unknown keys and any invariant
/// violation.
pub fn parse_instance(text: &str) -> Result<AnyInstance, IoError> {
    #[derive(Deserialize)]
    struct Probe {
        kind: String,
    }
    let probe: Probe = serde_json::from_str(text)?;
    match probe.kind.as_str() {
        "vector" => {
            let file: VectorFile = serde_json::from_str(text)?;
            let instance = CvpInstance {
                d: file.d,
                a: file.a,
                generators: file.generators.into_iter().map(Generator::new).collect(),
                cap: file.cap.to_cap()?,
                weights: ObjectiveWeights::new(file.mu.to_rational()?, file.nu.to_rational()?),
            };
            let violations = validate_instance(&instance);
            if let Some(v) = violations.first() {
                return Err(IoError::Invalid(v.to_string()));
            }
            Ok(AnyInstance::Vector(instance))
        }
        "matrix" => {
            let file: MatrixFile = serde_json::from_str(text)?;
            if file.a.len() != file.m || file.a.iter().any(|row| row.len() != file.n) {
                return Err(IoError::Invalid(format!("A must be {}x{}", file.m, file.n)));
            }
            if let Some(v) = file.a.iter().flatten().find(|&&v| v < 0) {
                return Err(IoError::Invalid(format!("negative matrix entry {v}")));
            }
            let constraint = match &file.constraint {
                ConstraintRepr::Msc { msc } => {
                    if msc.lambda < 1 || msc.lambda > file.n {
                        return Err(IoError::Invalid(format!(
                            "lambda = {} is outside [1, {}]",
                            msc.lambda, file.n
                        )));
                    }
                    SegmentConstraint::MinSeparation(msc.lambda)
                }
                ConstraintRepr::Segments { segments } => {
                    let segments = segments
                        .iter()
                        .map(|rows| {
                            if rows.len() != file.m {
                                return Err(IoError::Invalid(format!(
                                    "segment has {} rows, expected {}",
                                    rows.len(),
                                    file.m
                                )));
                            }
                            segment_from_repr(rows, file.n)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    SegmentConstraint::ExplicitSegments(segments)
                }
            };
            let instance = MatrixInstance {
                m: file.m,
                n: file.n,
                a: file.a,
                cap: file.cap.to_cap()?,
                weights: ObjectiveWeights::new(file.mu.to_rational()?, file.nu.to_rational()?),
                constraint,
            };
            Ok(AnyInstance::Matrix(instance))
        }
        other => Err(IoError::Invalid(format!("unknown instance kind {other:?}"))),
    }
}

/// Serializes an instance in canonical form (fixed key order, pretty
/// two-space indentation, trailing newline).
pub fn serialize_instance(instance: &AnyInstance) -> String {
    let text = match instance {
        AnyInstance::Vector(i) => {
            let file = VectorFile {
                kind: "vector".into(),
                d: i.d,
                cap: CapRepr::from_cap(i.cap),
                a: i.a.clone(),
                generators: i.generators.iter().map(|g| g.entries().to_vec()).collect(),
                mu: RatRepr::from_rational(&i.weights.mu),
                nu: RatRepr::from_rational(&i.weights.nu),
            };
            serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
        }
        AnyInstance::Matrix(i) => {
            let constraint = match &i.constraint {
                SegmentConstraint::MinSeparation(lambda) => {
                    ConstraintRepr::Msc { msc: MscRepr { lambda: *lambda } }
                }
                SegmentConstraint::ExplicitSegments(segments) => ConstraintRepr::Segments {
                    segments: segments.iter().map(segment_to_repr).collect(),
                },
            };
            let file = MatrixFile {
                kind: "matrix".into(),
                m: i.m,
                n: i.n,
                cap: CapRepr::from_cap(i.cap),
                a: i.a.clone(),
                constraint,
                mu: RatRepr::from_rational(&i.weights.mu),
                nu: RatRepr::from_rational(&i.weights.nu),
            };
            serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
        }
    };
    text + "\n"
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRepr {
    pub segment: Vec<Option<[usize; 2]>>,
    pub coef: i64,
}

/// JSON image of a solution: coefficients (vector instances) or weighted
/// segments (matrix instances), plus the exact metrics and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermRepr>>,
    pub tc: u64,
    pub linf: u64,
    pub bot: u64,
    pub objective: RatRepr,
    pub status: SolveStatus,
    pub method: Method,
    pub seed: Option<u64>,
}

impl SolutionFile {
    pub fn from_report(report: &SolveReport) -> Result<Self, IoError> {
        let solution = report
            .solution
            .as_ref()
            .ok_or_else(|| IoError::Invalid("report carries no solution".into()))?;
        Ok(SolutionFile {
            u: Some(solution.u.clone()),
            terms: None,
            tc: solution.tc,
            linf: solution.linf,
            bot: solution.bot,
            objective: RatRepr::from_rational(&solution.objective),
            status: report.status,
            method: report.method,
            seed: report.seed,
        })
    }

    pub fn from_matrix_plan(plan: &MatrixPlan, status: SolveStatus, method: Method, seed: Option<u64>) -> Self {
        SolutionFile {
            u: None,
            terms: Some(
                plan.terms
                    .iter()
                    .map(|(segment, coef)| TermRepr { segment: segment_to_repr(segment), coef: *coef })
                    .collect(),
            ),
            tc: plan.tc,
            linf: plan.linf,
            bot: plan.bot,
            objective: RatRepr::from_rational(&plan.objective),
            status,
            method,
            seed,
        }
    }

    pub fn terms_as_segments(&self, m: usize, n: usize) -> Result<Vec<(Segment, i64)>, IoError> {
        let terms = self
            .terms
            .as_ref()
            .ok_or_else(|| IoError::Invalid("solution carries no terms".into()))?;
        terms
            .iter()
            .map(|t| {
                if t.segment.len() != m {
                    return Err(IoError::Invalid(format!(
                        "segment has {} rows, expected {m}",
                        t.segment.len()
                    )));
                }
                if t.coef <= 0 {
                    return Err(IoError::Invalid(format!("coefficient {} must be positive", t.coef)));
                }
                Ok((segment_from_repr(&t.segment, n)?, t.coef))
            })
            .collect()
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, IoError> {
    Ok(serde_json::from_str(text)?)
}

pub fn serialize_solution(solution: &SolutionFile) -> String {
    serde_json::to_string_pretty(solution).expect("solution serialization cannot fail") + "\n"
}

pub fn read_instance_file(path: &Path) -> Result<AnyInstance, IoError> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn read_solution_file(path: &Path) -> Result<SolutionFile, IoError> {
    parse_solution(&std::fs::read_to_string(path)?)
}

/// Checks a solution file against its instance: recomputed metrics must
/// match the stated ones exactly and the constraint/cap requirements must
/// hold. Returns the list of mismatches (empty = verified).
pub fn verify_solution(instance: &AnyInstance, solution: &SolutionFile) -> Vec<String> {
    let mut mismatches = Vec::new();
    if solution.status == SolveStatus::Infeasible {
        mismatches.push("file reports an infeasible status, nothing to verify".into());
        return mismatches;
    }
    let stated_objective = match solution.objective.to_rational() {
        Ok(v) => v,
        Err(e) => {
            mismatches.push(format!("objective: {e}"));
            return mismatches;
        }
    };
    match instance {
        AnyInstance::Vector(i) => {
            let Some(u) = &solution.u else {
                mismatches.push("vector instance requires a u vector".into());
                return mismatches;
            };
            let recomputed: Solution = match crate::core::evaluate(i, u) {
                Ok(s) => s,
                Err(e) => {
                    mismatches.push(e.to_string());
                    return mismatches;
                }
            };
            push_metric_mismatches(&mut mismatches, &stated_objective, solution, recomputed.tc, recomputed.linf, recomputed.bot, &recomputed.objective);
            if solution.status == SolveStatus::OptimalExact && !recomputed.within_cap {
                mismatches.push(format!(
                    "status is optimal_exact but linf = {} exceeds C = {}",
                    recomputed.linf, i.cap
                ));
            }
        }
        AnyInstance::Matrix(i) => {
            let terms = match solution.terms_as_segments(i.m, i.n) {
                Ok(t) => t,
                Err(e) => {
                    mismatches.push(e.to_string());
                    return mismatches;
                }
            };
            match &i.constraint {
                SegmentConstraint::MinSeparation(lambda) => {
                    for (segment, _) in &terms {
                        for row in segment.msc_violations(*lambda) {
                            mismatches.push(format!("MSC violation row {row}"));
                        }
                    }
                }
                SegmentConstraint::ExplicitSegments(allowed) => {
                    for (idx, (segment, _)) in terms.iter().enumerate() {
                        if !allowed.contains(segment) {
                            mismatches.push(format!("term {idx} uses a segment outside the allowed set"));
                        }
                    }
                }
            }
            let plan = MatrixPlan::from_terms(i, terms, false);
            push_metric_mismatches(&mut mismatches, &stated_objective, solution, plan.tc, plan.linf, plan.bot, &plan.objective);
            if solution.status == SolveStatus::OptimalExact && !i.cap.admits(plan.linf) {
                mismatches.push(format!(
                    "status is optimal_exact but linf = {} exceeds C = {}",
                    plan.linf, i.cap
                ));
            }
        }
    }
    mismatches
}

fn push_metric_mismatches(
    mismatches: &mut Vec<String>,
    stated_objective: &BigRational,
    stated: &SolutionFile,
    tc: u64,
    linf: u64,
    bot: u64,
    objective: &BigRational,
) {
    if stated.tc != tc {
        mismatches.push(format!("tc mismatch: stated {}, recomputed {tc}", stated.tc));
    }
    if stated.linf != linf {
        mismatches.push(format!("linf mismatch: stated {}, recomputed {linf}", stated.linf));
    }
    if stated.bot != bot {
        mismatches.push(format!("bot mismatch: stated {}, recomputed {bot}", stated.bot));
    }
    if stated_objective != objective {
        mismatches.push(format!(
            "objective mismatch: stated {stated_objective}, recomputed {objective}"
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e1_json() -> String {
        r#"{"kind":"vector","d":2,"C":"inf","a":[2,1],"generators":[[1,1],[1,0]],"mu":1,"nu":0}"#
            .to_string()
    }

    #[test]
    fn parse_vector_instance() {
        let AnyInstance::Vector(i) = parse_instance(&e1_json()).unwrap() else {
            panic!("expected vector");
        };
        assert_eq!(i.d, 2);
        assert_eq!(i.cap, Cap::Infinite);
        assert_eq!(i.a, vec![2, 1]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"kind":"vector","d":1,"C":0,"a":[1],"generators":[[1]],"mu":1,"nu":0,"extra":3}"#;
        assert!(parse_instance(bad).is_err());
    }

    #[test]
    fn invalid_instances_rejected_with_violation() {
        let bad = r#"{"kind":"vector","d":1,"C":0,"a":[-1],"generators":[[1]],"mu":1,"nu":0}"#;
        let err = parse_instance(bad).unwrap_err();
        assert!(err.to_string().contains("negative target entry"), "{err}");
        let bad_cap = r#"{"kind":"vector","d":1,"C":"lots","a":[1],"generators":[[1]],"mu":1,"nu":0}"#;
        assert!(parse_instance(bad_cap).is_err());
    }

    #[test]
    fn parse_matrix_msc_instance() {
        let text = r#"{"kind":"matrix","m":1,"n":5,"C":0,"A":[[1,1,4,1,1]],
                       "constraint":{"msc":{"lambda":3}},"mu":1,"nu":0}"#;
        let AnyInstance::Matrix(i) = parse_instance(text).unwrap() else {
            panic!("expected matrix");
        };
        assert_eq!((i.m, i.n), (1, 5));
        assert_eq!(i.constraint, SegmentConstraint::MinSeparation(3));
    }

    #[test]
    fn parse_matrix_segment_instance() {
        let text = r#"{"kind":"matrix","m":2,"n":3,"C":"inf","A":[[1,1,0],[0,0,0]],
                       "constraint":{"segments":[[[1,2],null]]},"mu":1,"nu":0}"#;
        let AnyInstance::Matrix(i) = parse_instance(text).unwrap() else {
            panic!("expected matrix");
        };
        let SegmentConstraint::ExplicitSegments(segments) = &i.constraint else {
            panic!("expected explicit segments");
        };
        assert_eq!(segments.len(), 1);
        assert_eq!(segments[0].rows, vec![Some(Interval::new(1, 2)), None]);
    }

    #[test]
    fn canonical_round_trip_is_identity() {
        let parsed = parse_instance(&e1_json()).unwrap();
        let canonical = serialize_instance(&parsed);
        let reparsed = parse_instance(&canonical).unwrap();
        assert_eq!(parsed, reparsed);
        assert_eq!(canonical, serialize_instance(&reparsed));
        assert!(canonical.ends_with('\n'));
    }

    #[test]
    fn rational_representations() {
        assert_eq!(RatRepr::from_rational(&BigRational::from_integer(BigInt::from(3))), RatRepr::Int(3));
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(RatRepr::from_rational(&half), RatRepr::Frac("1/2".into()));
        assert_eq!(RatRepr::Frac("1/2".into()).to_rational().unwrap(), half);
        assert!(RatRepr::Frac("1/0".into()).to_rational().is_err());
        assert!(RatRepr::Frac("x".into()).to_rational().is_err());
    }

    #[test]
    fn solution_round_trip_and_verify() {
        let AnyInstance::Vector(i) = parse_instance(&e1_json()).unwrap() else { panic!() };
        let report = crate::flow::solve_flow(&i).unwrap();
        let file = SolutionFile::from_report(&report).unwrap();
        let text = serialize_solution(&file);
        let parsed = parse_solution(&text).unwrap();
        assert_eq!(file, parsed);
        assert!(verify_solution(&AnyInstance::Vector(i), &parsed).is_empty());
    }

    #[test]
    fn verify_flags_tampered_metrics() {
        let AnyInstance::Vector(i) = parse_instance(&e1_json()).unwrap() else { panic!() };
        let report = crate::flow::solve_flow(&i).unwrap();
        let mut file = SolutionFile::from_report(&report).unwrap();
        file.tc += 1;
        let mismatches = verify_solution(&AnyInstance::Vector(i), &file);
        assert!(mismatches.iter().any(|m| m.contains("tc mismatch")), "{mismatches:?}");
    }

    #[test]
    fn verify_flags_msc_violation() {
        let text = r#"{"kind":"matrix","m":1,"n":5,"C":"inf","A":[[1,1,1,0,0]],
                       "constraint":{"msc":{"lambda":3}},"mu":1,"nu":0}"#;
        let instance = parse_instance(text).unwrap();
        let file = SolutionFile {
            u: None,
            terms: Some(vec![TermRepr { segment: vec![Some([1, 2])], coef: 1 }]),
            tc: 1,
            linf: 1,
            bot: 1,
            objective: RatRepr::Int(1),
            status: SolveStatus::Approximate,
            method: Method::Flow,
            seed: None,
        };
        let mismatches = verify_solution(&instance, &file);
        assert!(mismatches.iter().any(|m| m.contains("MSC violation row 0")), "{mismatches:?}");
    }

    proptest! {
        #[test]
        fn instance_round_trip_property(
            a in proptest::collection::vec(0i64..9, 1..6),
            gens in proptest::collection::vec(proptest::collection::vec(0u8..2, 1..6), 0..5),
            cap in proptest::option::of(0u64..5),
            mu_num in 0i64..6, nu_num in 0i64..6, den in 1i64..4,
        ) {
            let d = a.len();
            let gens: Vec<Generator> =
                gens.into_iter().map(|mut g| { g.resize(d, 0); Generator::new(g) }).collect();
            let weights = ObjectiveWeights::new(
                BigRational::new(BigInt::from(mu_num), BigInt::from(den)),
                BigRational::new(BigInt::from(nu_num), BigInt::from(den)),
            );
            let cap = cap.map_or(Cap::Infinite, Cap::Finite);
            let instance = AnyInstance::Vector(CvpInstance::new(a, gens, cap, weights));
            let text = serialize_instance(&instance);
            let reparsed = parse_instance(&text).unwrap();
            prop_assert_eq!(&instance, &reparsed);
            prop_assert_eq!(text.clone(), serialize_instance(&reparsed));
        }
    }
}
