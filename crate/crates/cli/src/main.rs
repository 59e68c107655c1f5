//! `farkas`: conic feasibility from the command line.
//!
//! Exit codes: 0 feasible (or verified / done), 2 infeasible (or certificate
//! rejected), 3 unresolved, 1 input or I/O error.

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod bench;
mod problem;
mod report;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use farkas_core::farkas::ATTAINMENT_TOL;
use farkas_core::{
    certificate_verify, diagnose_attainment, least_norm_pseudoinverse, sampling, solve, solve_exact, solve_primal_dual,
    Attainment, Error, Outcome, SolverConfig, Vector, Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::problem::ProblemFile;
use crate::report::{fmt_num, nums, to_json, Num, OutcomeDoc};

#[derive(Parser)]
#[command(
    name = "farkas",
    version,
    about = "Decide conic linear feasibility and emit Farkas certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and print the outcome document.
    Solve {
        file: PathBuf,
        /// Write the iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Check a candidate certificate against a problem file.
    Certify {
        file: PathBuf,
        /// Candidate certificate, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
        /// Relative tolerance of the test.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Test whether the exact problem's dual minimum is attained.
    Diagnose {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Least-norm solution of `Ax = b` in the cone.
    Pinv {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Solve seeded random instances in parallel and summarise.
    Bench {
        /// Also write every instance and outcome here.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Spectral descent on the dual functional.
    Subgrad,
    /// Primal-dual hybrid gradient (ball-cap generators).
    Pdhg,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long)]
    max_iter: Option<usize>,
    /// Stationarity tolerance of the dual solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Random dual start for `solve`; instance seed for `bench` (default 7).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Method::Subgrad)]
    solver: Method,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(n) = self.max_iter {
            cfg.max_iter = n;
            cfg.pdhg_max_iter = n;
        }
        if let Some(t) = self.tol {
            cfg.grad_tol = t;
        }
        cfg
    }
}

/// A failure that ends the run with exit code 1.
struct Failure(String);

impl From<problem::InputError> for Failure {
    fn from(e: problem::InputError) -> Self {
        Failure(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Feasible => 0,
        Verdict::InfeasibleClosure | Verdict::ExactInfeasibleEvidence => 2,
        Verdict::Unresolved => 3,
    }
}

fn run_solver(p: &ProblemFile, flags: &SolverFlags) -> Result<Outcome, Failure> {
    let mut cfg = flags.config();
    if let Some(seed) = flags.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        cfg.y0 = Some(sampling::random_vector(&mut rng, p.instance.a().rows()));
    }
    let out = match flags.solver {
        Method::Subgrad => solve(&p.instance, &cfg)?,
        Method::Pdhg => solve_primal_dual(&p.instance, &cfg)?,
    };
    Ok(out)
}

fn cmd_solve(file: PathBuf, trace: Option<PathBuf>, flags: SolverFlags) -> Result<u8, Failure> {
    let p = ProblemFile::read(&file)?;
    let out = run_solver(&p, &flags)?;
    if let Some(path) = trace {
        let f = File::create(&path).map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?;
        report::write_trace(BufWriter::new(f), &out.trace, p.scale)
            .map_err(|e| Failure(format!("cannot write {}: {e}", path.display())))?;
    }
    say!("{}", to_json(&OutcomeDoc::new(&out, p.scale)));
    Ok(verdict_code(out.verdict))
}

fn cmd_certify(file: PathBuf, y: Vec<f64>, tol: f64) -> Result<u8, Failure> {
    let p = ProblemFile::read(&file)?;
    let inst = &p.instance;
    if y.len() != inst.a().rows() {
        return Err(Failure(format!(
            "field `--y`: expected {} entries to match the rows of A, found {}",
            inst.a().rows(),
            y.len()
        )));
    }
    let y = Vector::new(y).map_err(|e| Failure(format!("field `--y`: {e}")))?;
    if y.is_zero() {
        return Err(Failure("field `--y`: certificate must be nonzero".into()));
    }
    // both ratios and the test are invariant under rescaling b
    let ny = y.norm();
    let sigma = inst.generator().support_value(&inst.a().adjoint_apply(&y)?)?;
    let pairing = inst.b().dot(&y) / (ny * inst.b().norm());
    let ok = certificate_verify(inst, &y, tol)?;
    say!("sigma(A*y)/||y|| = {}", fmt_num(sigma / ny));
    say!("<b,y>/(||y|| ||b||) = {}", fmt_num(pairing));
    say!("certificate: {}", if ok { "verified" } else { "rejected" });
    Ok(if ok { 0 } else { 2 })
}

fn cmd_diagnose(file: PathBuf, flags: SolverFlags) -> Result<u8, Failure> {
    let p = ProblemFile::read(&file)?;
    let Some(cone) = p.instance.generator().cone() else {
        return Err(Failure(
            "field `generator`: diagnosis needs a ball-cap generator".into(),
        ));
    };
    let inst = p.instance.with_epsilon(0.0)?;
    let out = solve_exact(&inst, &flags.config())?;
    let Some(x) = out.x.as_ref().filter(|_| out.verdict == Verdict::Feasible) else {
        say!("no primal point: {}", out.verdict.as_str());
        return Ok(verdict_code(out.verdict).max(2));
    };
    let att = diagnose_attainment(inst.a(), cone, x, ATTAINMENT_TOL)?;
    // Ran A* is closed in finite dimension, so the shared normal decides
    let attained = if matches!(att, Attainment::AttainedPossible(_)) {
        "Yes"
    } else {
        "No"
    };
    say!("{}; dual attainment: {attained}", att.name());
    Ok(0)
}

#[derive(Serialize)]
struct PinvDoc {
    x: Vec<Num>,
    normalisation: Num,
}

fn cmd_pinv(file: PathBuf, flags: SolverFlags) -> Result<u8, Failure> {
    let p = ProblemFile::read(&file)?;
    let inst = &p.instance;
    let Some(cone) = inst.generator().cone() else {
        return Err(Failure("field `generator`: pinv needs a ball-cap generator".into()));
    };
    match least_norm_pseudoinverse(inst.a(), inst.b(), cone, &flags.config()) {
        Ok(x) => {
            let doc = PinvDoc {
                x: nums(&x.scale(1.0 / p.scale)),
                normalisation: Num(p.scale),
            };
            say!("{}", to_json(&doc));
            Ok(0)
        }
        Err(Error::Infeasible) => {
            say!("infeasible: b is not in A(P)");
            Ok(2)
        }
        Err(Error::Unresolved(why)) => {
            say!("unresolved: {why}");
            Ok(3)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_bench(dir: Option<PathBuf>, count: usize, flags: SolverFlags) -> Result<u8, Failure> {
    if let Some(d) = &dir {
        std::fs::create_dir_all(d).map_err(|e| Failure(format!("cannot create {}: {e}", d.display())))?;
    }
    let seed = flags.seed.unwrap_or(7);
    let records = bench::run(seed, count, &flags.config(), dir.as_deref()).map_err(Failure)?;
    say!("seed {seed}, {count} instances");
    say!("{}", bench::summary(&records));
    Ok(if records.iter().any(bench::Record::violation) {
        1
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors must not collide with the infeasible code
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve { file, trace, solver } => cmd_solve(file, trace, solver),
        Command::Certify { file, y, tol } => cmd_certify(file, y, tol),
        Command::Diagnose { file, solver } => cmd_diagnose(file, solver),
        Command::Pinv { file, solver } => cmd_pinv(file, solver),
        Command::Bench { dir, count, solver } => cmd_bench(dir, count, solver),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
