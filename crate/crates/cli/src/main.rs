use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use valconv::algebra::{equal_in_pi, pi_difference, PiElement};
use valconv::config::RunConfig;
use valconv::convolution::{verify_theorem, VerificationReport};
use valconv::corpus::{Corpus, Kind};
use valconv::current::RepDiff;
use valconv::error::{Error, TermId};
use valconv::exterior::KVector;
use valconv::polytope::Polytope;
use valconv::rational::serde_rational;
use valconv::selftest;
use valconv::volume::VolumeEngine;

const EXIT_FAIL: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "valconv", version, about = "Polytope valuations as currents: exact checks of the convolution product")]
struct Cli {
    /// Numeric tolerance [default: 1e-9 for n <= 3, 1e-3 for n = 4]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Monte Carlo samples per simplex (scientific notation accepted)
    #[arg(long, global = true, value_parser = parse_count, default_value = "2000000")]
    mc_samples: u64,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Number of random cases per suite or corpus run
    #[arg(long, global = true, default_value_t = 10)]
    trials: usize,
    /// Ambient dimension for randomized runs
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Spherical volume engine for n >= 4 (closed forms are used below)
    #[arg(long, global = true, value_enum, default_value = "auto")]
    engine: EngineArg,
    /// Also write the JSON report to this file
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Face lattice of a polytope: counts, face k-vectors and normal cones
    Faces { polytope: PathBuf },
    /// Check M(P) * M(Q) = M(P + Q); without files, runs a seeded random corpus
    Verify {
        p: Option<PathBuf>,
        q: Option<PathBuf>,
        /// Polytope kind for the random corpus
        #[arg(long, value_enum, default_value = "triangle")]
        kind: KindArg,
    },
    /// Decide equality of two polytope-algebra elements
    Equal { x: PathBuf, y: PathBuf },
    /// Run the seeded invariant suites
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    MonteCarlo,
    Cubature,
}

impl From<EngineArg> for VolumeEngine {
    fn from(e: EngineArg) -> VolumeEngine {
        match e {
            EngineArg::Auto => VolumeEngine::Auto,
            EngineArg::MonteCarlo => VolumeEngine::MonteCarlo,
            EngineArg::Cubature => VolumeEngine::Cubature,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Segment,
    Triangle,
    Simplex,
    Box,
    Hull,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Segment => Kind::Segment,
            KindArg::Triangle => Kind::Triangle,
            KindArg::Simplex => Kind::Simplex,
            KindArg::Box => Kind::Box,
            KindArg::Hull => Kind::Hull,
        }
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if f < 0.0 || f.fract() != 0.0 || f > u64::MAX as f64 {
        return Err(format!("not a nonnegative integer: {s}"));
    }
    Ok(f as u64)
}

/// A failed command: exit code plus a message for stderr and an optional JSON body.
struct Failure {
    code: u8,
    message: String,
    body: Option<serde_json::Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::NotTransversal { .. }
            | Error::NotInGeneralPosition { .. }
            | Error::PartialFunctionDomain { .. }
            | Error::NonConstantAlpha => EXIT_PARTIAL,
            _ => EXIT_INPUT,
        };
        let body = match &e {
            Error::NotTransversal { pairs } | Error::NotInGeneralPosition { pairs } => Some(witness_body(&e, pairs)),
            _ => None,
        };
        Failure { code, message: e.to_string(), body }
    }
}

fn witness_body(e: &Error, pairs: &[(TermId, TermId)]) -> serde_json::Value {
    let pairs: Vec<_> = pairs
        .iter()
        .map(|(a, b)| serde_json::json!({"p_term": {"degree": a.0, "index": a.1}, "q_term": {"degree": b.0, "index": b.1}}))
        .collect();
    serde_json::json!({"error": e.to_string(), "failing_pairs": pairs})
}

/// Report plus the exit code it implies.
struct Outcome {
    report: serde_json::Value,
    code: u8,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
        body: None,
    })?;
    serde_json::from_str(&text).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
        body: None,
    })
}

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("reports serialize")
}

#[derive(Serialize)]
struct FaceEntry {
    dim: usize,
    vertices: Vec<usize>,
    v: KVector,
    #[serde(with = "serde_rational::vec2")]
    normal_generators: Vec<Vec<valconv::rational::Rational>>,
}

#[derive(Serialize)]
struct FacesReport {
    ambient_dim: usize,
    dim: usize,
    counts: BTreeMap<usize, usize>,
    faces: Vec<FaceEntry>,
}

fn cmd_faces(path: &Path) -> Result<Outcome, Failure> {
    let p: Polytope = read_json(path)?;
    let lattice = p.face_lattice();
    let counts = lattice.counts().into_iter().enumerate().collect();
    let faces = lattice
        .faces
        .iter()
        .map(|f| FaceEntry {
            dim: f.dim,
            vertices: f.vertex_indices.clone(),
            v: f.v.clone(),
            normal_generators: f.normal_cone.generators(),
        })
        .collect();
    let report = FacesReport { ambient_dim: p.ambient_dim(), dim: p.dim(), counts, faces };
    Ok(Outcome { report: to_value(&report), code: 0 })
}

fn verification_passed(r: &VerificationReport, tol: f64) -> bool {
    r.t_equal && r.c_abs_err <= tol
}

#[derive(Serialize)]
struct CorpusCase {
    case: usize,
    t_equal: bool,
    c_abs_err: f64,
}

#[derive(Serialize)]
struct CorpusReport {
    dim: usize,
    kind: Kind,
    seed: u64,
    tol: f64,
    trials: usize,
    passed: usize,
    max_c_abs_err: f64,
    failures: Vec<CorpusCase>,
}

fn cmd_verify(cli: &Cli, cfg: &RunConfig, files: Option<(&Path, &Path)>, kind: Kind) -> Result<Outcome, Failure> {
    if let Some((fp, fq)) = files {
        let p: Polytope = read_json(fp)?;
        let q: Polytope = read_json(fq)?;
        let numeric = cfg.numeric(p.ambient_dim());
        let mut report = verify_theorem(&p, &q, &numeric)?;
        let code = if verification_passed(&report, numeric.tol) { 0 } else { EXIT_FAIL };
        // Timings would make reports differ between runs.
        report.runtime_ms = 0;
        return Ok(Outcome { report: to_value(&report), code });
    }
    let n = cli.dim.unwrap_or(2);
    if !(1..=4).contains(&n) {
        return Err(Error::Config(format!("--dim must be between 1 and 4, got {n}")).into());
    }
    let numeric = cfg.numeric(n);
    let mut corpus = Corpus::new(cfg.seed);
    let mut report = CorpusReport {
        dim: n,
        kind,
        seed: cfg.seed,
        tol: numeric.tol,
        trials: cfg.trials,
        passed: 0,
        max_c_abs_err: 0.0,
        failures: vec![],
    };
    for case in 0..cfg.trials {
        let (p, q) = corpus.generic_pair(n, kind, kind);
        let r = verify_theorem(&p, &q, &numeric)?;
        report.max_c_abs_err = report.max_c_abs_err.max(r.c_abs_err);
        if verification_passed(&r, numeric.tol) {
            report.passed += 1;
        } else {
            report.failures.push(CorpusCase { case, t_equal: r.t_equal, c_abs_err: r.c_abs_err });
        }
    }
    let code = if report.failures.is_empty() { 0 } else { EXIT_FAIL };
    Ok(Outcome { report: to_value(&report), code })
}

#[derive(Serialize)]
struct EqualReport {
    equal: bool,
    diff: Option<RepDiff>,
}

fn cmd_equal(cfg: &RunConfig, fx: &Path, fy: &Path) -> Result<Outcome, Failure> {
    let x: PiElement = read_json(fx)?;
    let y: PiElement = read_json(fy)?;
    let numeric = cfg.numeric(x.ambient_dim());
    let diff = pi_difference(&x, &y, &numeric)?;
    debug_assert_eq!(diff.is_none(), equal_in_pi(&x, &y, &numeric)?);
    let report = EqualReport { equal: diff.is_none(), diff };
    let code = if report.equal { 0 } else { EXIT_FAIL };
    Ok(Outcome { report: to_value(&report), code })
}

fn cmd_selftest(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let dims = match cli.dim {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let report = selftest::run(cfg, &dims)?;
    let code = if report.passed { 0 } else { EXIT_FAIL };
    Ok(Outcome { report: to_value(&report), code })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("VALCONV_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure {
        code: EXIT_INPUT,
        message: format!("VALCONV_THREADS must be a positive integer, got {v:?}"),
        body: None,
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
        body: None,
    })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    configure_threads()?;
    let cfg = RunConfig {
        tol: cli.tol,
        mc_samples: cli.mc_samples,
        seed: cli.seed,
        trials: cli.trials,
        engine: cli.engine.into(),
    };
    cfg.validate()?;
    match &cli.command {
        Command::Faces { polytope } => cmd_faces(polytope),
        Command::Verify { p, q, kind } => {
            let files = match (p, q) {
                (Some(p), Some(q)) => Some((p.as_path(), q.as_path())),
                (None, None) => None,
                _ => {
                    return Err(Failure {
                        code: EXIT_INPUT,
                        message: "verify takes two polytope files or none".into(),
                        body: None,
                    })
                }
            };
            cmd_verify(cli, &cfg, files, (*kind).into())
        }
        Command::Equal { x, y } => cmd_equal(&cfg, x, y),
        Command::Selftest => cmd_selftest(cli, &cfg),
    }
}

fn emit(cli: &Cli, body: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(body).expect("reports serialize");
    println!("{text}");
    if let Some(path) = &cli.json_out {
        std::fs::write(path, format!("{text}\n")).map_err(|e| Failure {
            code: EXIT_INPUT,
            message: format!("{}: {e}", path.display()),
            body: None,
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = run(&cli).and_then(|o| emit(&cli, &o.report).map(|_| o.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(body) = &f.body {
                if let Err(g) = emit(&cli, body) {
                    eprintln!("error: {}", g.message);
                }
            }
            ExitCode::from(f.code)
        }
    }
}
