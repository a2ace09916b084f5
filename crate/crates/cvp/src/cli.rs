//! Command logic behind the `cvp` binary.
//!
//! Exit codes are fixed for scripting: 0 = success, 1 = usage/parse or
//! validation errors, 2 = instance infeasible, 3 = verification mismatch.
//! Output files are byte-stable given identical inputs, flags and seed;
//! stdout carries only the requested artifact, diagnostics go to stderr.

use crate::core::{Cap, Method, SolveReport, SolveStatus};
use crate::instgen::{self, MscGenMode};
use crate::io::{self, AnyInstance, SolutionFile};
use crate::lp::{build_lp, solve_lp, LpOutcome};
use crate::oracle::{brute_force_opt, OracleBudget};
use crate::rounding::{approx_solve, deviation_bound, deviation_estimate, RngSpec};
use crate::core::Interval;
use crate::segmentation::{
    assemble_matrix_segments, msc_row_intervals, solve_msc, MatrixInstance, MatrixPlan, MscOutcome,
    SegmentConstraint,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use rand::Rng;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

const INFEASIBLE_MESSAGE: &str = "infeasible: no vector within C";

#[derive(Debug, Parser)]
#[command(name = "cvp", version, about = "Closest-vector solvers over binary generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Flow when all generators have consecutive ones, rounding otherwise.
    Auto,
    Lp,
    Flow,
    Round,
    Oracle,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance file and emit a solution file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Rounding trials (round method only).
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the sum-preserving rounding variant.
        #[arg(long)]
        sum_preserving: bool,
        /// Write the solution here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Re-evaluate a solution file against its instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Generate instance files.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Monte Carlo check of the expectation bound sqrt(ln 2 / 2) * sqrt(q).
    LemmaSim {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        q: u64,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Whitespace-separated probabilities, one per coordinate
        /// (uniform random when omitted).
        #[arg(long)]
        p_file: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct GenCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the instance here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Random vector instance.
    Random {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        max_entry: u64,
        /// Deviation cap: a nonnegative integer or "inf".
        #[arg(long, default_value = "inf", value_parser = parse_cap)]
        cap: Cap,
        /// Draw generators from ones-intervals only.
        #[arg(long)]
        consecutive: bool,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Random matrix instance under a minimum separation constraint.
    Msc {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: usize,
        #[arg(long, default_value_t = 6)]
        max_entry: u64,
        /// Emit the realized matrix of a random feasible plan.
        #[arg(long)]
        decomposable: bool,
        #[arg(long, default_value = "inf", value_parser = parse_cap)]
        cap: Cap,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Reduce a 3SAT-6 formula (header `p sat36 s t`) to a 2-row matrix
    /// instance with explicit segments.
    Sat {
        #[arg(long)]
        formula: PathBuf,
        #[command(flatten)]
        common: GenCommon,
    },
}

fn parse_cap(text: &str) -> Result<Cap, String> {
    if text == "inf" {
        Ok(Cap::Infinite)
    } else {
        text.parse::<u64>().map(Cap::Finite).map_err(|_| format!("bad cap {text:?}, expected a nonnegative integer or \"inf\""))
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    match cli.command {
        Command::Solve { input, method, trials, seed, sum_preserving, output } => {
            cmd_solve(&input, method, trials as usize, seed, sum_preserving, output.as_deref())
        }
        Command::Verify { input, solution } => cmd_verify(&input, &solution),
        Command::Gen { what } => cmd_gen(what),
        Command::LemmaSim { q, trials, seed, p_file } => {
            cmd_lemma_sim(q as usize, trials as usize, seed, p_file.as_deref())
        }
    }
}

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

fn emit(text: &str, output: Option<&Path>) -> i32 {
    match output {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => EXIT_OK,
            Err(e) => fail(format!("cannot write {}: {e}", path.display())),
        },
        None => {
            print!("{text}");
            EXIT_OK
        }
    }
}

fn cmd_solve(
    input: &Path,
    method: MethodArg,
    trials: usize,
    seed: u64,
    sum_preserving: bool,
    output: Option<&Path>,
) -> i32 {
    let instance = match io::read_instance_file(input) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let solution_file = match &instance {
        AnyInstance::Vector(i) => solve_vector(i, method, trials, seed, sum_preserving),
        AnyInstance::Matrix(i) => solve_matrix(i, method, trials, seed, sum_preserving),
    };
    match solution_file {
        Ok(file) => emit(&io::serialize_solution(&file), output),
        Err(SolveFailure::Infeasible) => {
            eprintln!("{INFEASIBLE_MESSAGE}");
            EXIT_INFEASIBLE
        }
        Err(SolveFailure::Error(message)) => fail(message),
    }
}

enum SolveFailure {
    Infeasible,
    Error(String),
}

impl<E: std::fmt::Display> From<E> for SolveFailure {
    fn from(e: E) -> Self {
        SolveFailure::Error(e.to_string())
    }
}

fn report_to_file(report: &SolveReport) -> Result<SolutionFile, SolveFailure> {
    match report.status {
        SolveStatus::Infeasible => Err(SolveFailure::Infeasible),
        _ => Ok(SolutionFile::from_report(report)?),
    }
}

fn solve_vector(
    instance: &crate::core::CvpInstance,
    method: MethodArg,
    trials: usize,
    seed: u64,
    sum_preserving: bool,
) -> Result<SolutionFile, SolveFailure> {
    let method = match method {
        MethodArg::Auto => {
            if instance.all_consecutive_nonempty() {
                MethodArg::Flow
            } else {
                MethodArg::Round
            }
        }
        m => m,
    };
    let report = match method {
        MethodArg::Flow => crate::flow::solve_flow(instance)?,
        MethodArg::Round => approx_solve(instance, RngSpec::new(seed, 0), trials, sum_preserving)?,
        MethodArg::Oracle => brute_force_opt(instance, OracleBudget::default())?,
        MethodArg::Lp => lp_report(instance)?,
        MethodArg::Auto => unreachable!("auto resolved above"),
    };
    report_to_file(&report)
}

/// The LP method only produces a solution when the optimal vertex is
/// integral (always the case for consecutive-ones generators).
fn lp_report(instance: &crate::core::CvpInstance) -> Result<SolveReport, SolveFailure> {
    let outcome = solve_lp(&build_lp(instance))?;
    match outcome {
        LpOutcome::Infeasible => Err(SolveFailure::Infeasible),
        LpOutcome::Optimal(sol) => {
            let integral = sol.u.iter().all(|v| v.is_integer());
            if !integral {
                return Err(SolveFailure::Error(
                    "the LP optimum is fractional; use --method round or flow".into(),
                ));
            }
            let u: Vec<i64> = sol
                .u
                .iter()
                .map(|v| v.to_integer().to_i64().expect("desk-scale coefficient"))
                .collect();
            let solution = crate::core::evaluate(instance, &u)?;
            Ok(SolveReport {
                status: SolveStatus::OptimalExact,
                solution: Some(solution),
                lp_value: Some(sol.value),
                method: Method::Lp,
                seed: None,
            })
        }
    }
}

fn solve_matrix(
    instance: &MatrixInstance,
    method: MethodArg,
    trials: usize,
    seed: u64,
    sum_preserving: bool,
) -> Result<SolutionFile, SolveFailure> {
    match &instance.constraint {
        SegmentConstraint::MinSeparation(lambda) => match method {
            MethodArg::Auto | MethodArg::Flow => {
                let outcome = solve_msc(instance)?;
                match outcome {
                    MscOutcome::Infeasible { .. } => Err(SolveFailure::Infeasible),
                    MscOutcome::Optimal(plan) => Ok(SolutionFile::from_matrix_plan(
                        &plan,
                        SolveStatus::OptimalExact,
                        Method::Flow,
                        None,
                    )),
                }
            }
            MethodArg::Oracle => {
                let plan = msc_oracle_plan(instance, *lambda)?;
                Ok(SolutionFile::from_matrix_plan(&plan, SolveStatus::OptimalExact, Method::Oracle, None))
            }
            _ => Err(SolveFailure::Error(
                "minimum-separation instances support methods auto, flow and oracle".into(),
            )),
        },
        SegmentConstraint::ExplicitSegments(segments) => {
            let flat = instance.flatten_explicit().expect("explicit constraint");
            let file = solve_vector(&flat, method, trials, seed, sum_preserving)?;
            // Re-express coefficients as weighted segments.
            let u = file.u.as_ref().expect("vector solutions carry u");
            let terms: Vec<_> = segments
                .iter()
                .zip(u)
                .filter(|(_, &c)| c > 0)
                .map(|(segment, &c)| (segment.clone(), c))
                .collect();
            let plan = MatrixPlan::from_terms(instance, terms, false);
            Ok(SolutionFile::from_matrix_plan(&plan, file.status, file.method, file.seed))
        }
    }
}

/// Row-by-row brute force under the minimum separation constraint; exact
/// because rows are independent.
fn msc_oracle_plan(instance: &MatrixInstance, lambda: usize) -> Result<MatrixPlan, SolveFailure> {
    let intervals = msc_row_intervals(instance.n, lambda)?;
    let mut row_terms: Vec<Vec<(Interval, i64)>> = Vec::with_capacity(instance.m);
    for row in &instance.a {
        let gens = intervals
            .iter()
            .map(|iv| crate::core::Generator::from_interval(instance.n, *iv))
            .collect();
        let row_instance = crate::core::CvpInstance::new(
            row.clone(),
            gens,
            instance.cap,
            instance.weights.clone(),
        );
        let report = brute_force_opt(&row_instance, OracleBudget::default())?;
        match report.status {
            SolveStatus::Infeasible => return Err(SolveFailure::Infeasible),
            _ => {
                let solution = report.solution.expect("feasible row");
                row_terms.push(
                    intervals
                        .iter()
                        .zip(&solution.u)
                        .filter(|(_, &u)| u > 0)
                        .map(|(iv, &u)| (*iv, u))
                        .collect(),
                );
            }
        }
    }
    let terms = assemble_matrix_segments(&row_terms);
    Ok(MatrixPlan::from_terms(instance, terms, true))
}

fn cmd_verify(input: &Path, solution: &Path) -> i32 {
    let instance = match io::read_instance_file(input) {
        Ok(i) => i,
        Err(e) => return fail(e),
    };
    let solution = match io::read_solution_file(solution) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let mismatches = io::verify_solution(&instance, &solution);
    if mismatches.is_empty() {
        EXIT_OK
    } else {
        for m in &mismatches {
            eprintln!("{m}");
        }
        EXIT_MISMATCH
    }
}

fn cmd_gen(what: GenCommand) -> i32 {
    let (instance, output) = match what {
        GenCommand::Random { d, k, max_entry, cap, consecutive, common } => {
            if d == 0 || k == 0 {
                return fail("d and k must be positive");
            }
            let instance = instgen::gen_random_instance(
                d,
                k,
                max_entry,
                cap,
                consecutive,
                &RngSpec::new(common.seed, 0),
            );
            (AnyInstance::Vector(instance), common.output)
        }
        GenCommand::Msc { m, n, lambda, max_entry, decomposable, cap, common } => {
            let mode = if decomposable { MscGenMode::Decomposable } else { MscGenMode::Random };
            match instgen::gen_msc_matrix(m, n, lambda, max_entry, mode, cap, &RngSpec::new(common.seed, 0)) {
                Ok(instance) => (AnyInstance::Matrix(instance), common.output),
                Err(e) => return fail(e),
            }
        }
        GenCommand::Sat { formula, common } => {
            let text = match std::fs::read_to_string(&formula) {
                Ok(t) => t,
                Err(e) => return fail(format!("cannot read {}: {e}", formula.display())),
            };
            match instgen::parse_sat36(&text) {
                Ok(f) => {
                    let reduced = instgen::reduce_3sat6(&f);
                    (AnyInstance::Matrix(reduced.matrix_instance), common.output)
                }
                Err(e) => return fail(e),
            }
        }
    };
    emit(&io::serialize_instance(&instance), output.as_deref())
}

fn cmd_lemma_sim(q: usize, trials: usize, seed: u64, p_file: Option<&Path>) -> i32 {
    let p: Vec<f64> = match p_file {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(format!("cannot read {}: {e}", path.display())),
            };
            let parsed: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse).collect();
            match parsed {
                Ok(p) => p,
                Err(e) => return fail(format!("bad probability file: {e}")),
            }
        }
        None => {
            let mut rng = RngSpec::new(seed, 1).rng();
            (0..q).map(|_| rng.gen::<f64>()).collect()
        }
    };
    if p.len() != q {
        return fail(format!("expected {q} probabilities, found {}", p.len()));
    }
    let estimate = match deviation_estimate(&p, trials, &RngSpec::new(seed, 0)) {
        Ok(e) => e,
        Err(e) => return fail(e),
    };
    let bound = deviation_bound(q);
    let pass = estimate.mean <= bound + 3.0 * estimate.std_error;
    println!(
        "q={q} trials={trials} mean={:.6} se={:.6} bound={:.6} {}",
        estimate.mean,
        estimate.std_error,
        bound,
        if pass { "PASS" } else { "FAIL" }
    );
    EXIT_OK
}
