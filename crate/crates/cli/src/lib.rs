//! `evolib` command-line tool. Every subcommand prints a JSON report.
//!
//! Exit codes: 0 on a decided result, 2 on input or usage errors, 3 when the
//! only outcome is inconclusive.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use evolib::algebra::{Element, Subspace};
use evolib::condition_p::{classify_dim2, decide_p, decide_p_nilpotent, PBudget, Verdict};
use evolib::conjecture::{
    full_support_solution, reduce_pipeline, sample_campaign, solve_numeric, solve_small, Distribution, FixedPointSystem,
    ReduceOutcome, SolveConfig,
};
use evolib::io::{self, AlgebraDocument, DocumentError, ReportDocument};
use evolib::natural_basis::{classify_subspace, Certainty, SearchConfig};
use evolib::nilpotency::{is_nilpotent, nilpotency_index, PowerSequence};
use evolib::permutation::{decompose, PermutationSpec};
use evolib::{Algebra, Tolerance, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "evolib", version, about = "Evolution algebra toolkit")]
struct Cli {
    /// Relative zero tolerance.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Do not print the report on standard output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Product of two elements.
    Multiply {
        #[arg(long = "in")]
        input: PathBuf,
        /// Coordinates as a JSON array of [re, im] pairs, or a file holding one.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Classify a subspace given as a list of coordinate vectors.
    ClassifySubspace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        subspace: PathBuf,
    },
    /// Graph nilpotency test with a triangularizing permutation.
    Nilpotency {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Nilpotency index from the power sequence.
    Nilindex {
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest exponent computed; defaults to 2^(n-1) + 2.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Decompose E_{n,pi} into cyclic and terminating chains.
    DecomposePerm {
        /// 1-based images, e.g. `2,3,1`.
        #[arg(long)]
        pi: String,
        /// Coefficients: comma-separated reals or a JSON array of numbers or [re, im] pairs.
        #[arg(long)]
        a: String,
    },
    /// Two-dimensional classification.
    Classify2 {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Decide condition P.
    DecideP {
        #[arg(long = "in")]
        input: PathBuf,
        /// Random trials for the natural-basis searches.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Canonical form of a nilpotent algebra satisfying condition P.
    CanonicalizeNilpotent {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// All roots of x∘x = M x.
    SolveFixedpoint {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Seeded sampling campaign for full-support fixed points.
    Conjecture51 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value = "gaussian")]
        dist: Distribution,
    },
    /// Level-by-level reduction of a non-nilpotent algebra.
    Reduce53 {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        input_error(e.to_string())
    }
}

impl From<evolib::Error> for Failure {
    fn from(e: evolib::Error) -> Self {
        input_error(e.to_string())
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

#[derive(Default)]
struct Inputs {
    hasher: Option<Sha256>,
}

impl Inputs {
    fn read(&mut self, path: &PathBuf) -> Result<String, Failure> {
        let bytes = std::fs::read(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        self.hasher.get_or_insert_with(Sha256::new).update(&bytes);
        String::from_utf8(bytes).map_err(|_| input_error(format!("{}: not UTF-8", path.display())))
    }

    fn digest(self) -> Option<String> {
        self.hasher.map(|h| hex::encode(h.finalize()))
    }
}

/// Runs one invocation; `args[0]` is the program name.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let outcome = dispatch(&cli, &mut inputs);
    let (result, code, eps) = match outcome {
        Ok(r) => r,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    let report = ReportDocument {
        command: args.iter().skip(1).cloned().collect(),
        input_digest: inputs.digest(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cli.seed,
        eps,
        result,
        timing_seconds: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&report).expect("plain data");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            let _ = writeln!(stderr, "error: {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    if !cli.quiet {
        let _ = writeln!(stdout, "{text}");
    }
    code
}

fn load(inputs: &mut Inputs, path: &PathBuf, cli_eps: Option<f64>) -> Result<(AlgebraDocument, Algebra, Tolerance<f64>), Failure> {
    let doc = io::parse_document(&inputs.read(path)?)?;
    let alg = doc.to_algebra()?;
    let tol = io::tolerance_for(Some(&doc), cli_eps)?;
    Ok((doc, alg, tol))
}

fn element_arg(inputs: &mut Inputs, s: &str, n: usize) -> Result<Element<f64>, Failure> {
    let text = if serde_json::from_str::<Value>(s).is_ok() { s.to_string() } else { inputs.read(&PathBuf::from(s))? };
    let wrapped = format!("[{text}]");
    Ok(io::parse_vectors(&wrapped, n)?.remove(0))
}

fn parse_pi(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|t| {
            let v: usize = t.trim().parse().map_err(|_| input_error(format!("--pi: `{t}` is not a positive integer")))?;
            v.checked_sub(1).ok_or_else(|| input_error("--pi entries are 1-based"))
        })
        .collect()
}

fn parse_coeffs(s: &str, n: usize) -> Result<Vec<C64>, Failure> {
    let bad = || input_error("--a: expected comma-separated reals or a JSON array");
    let out: Vec<C64> = match serde_json::from_str::<Value>(s) {
        Ok(Value::Array(items)) => items
            .iter()
            .map(|v| match v {
                Value::Number(x) => x.as_f64().map(|re| C64::new(re, 0.0)).ok_or_else(bad),
                Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                    (Some(re), Some(im)) => Ok(C64::new(re, im)),
                    _ => Err(bad()),
                },
                _ => Err(bad()),
            })
            .collect::<Result<_, _>>()?,
        _ => s.split(',').map(|t| t.trim().parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad())).collect::<Result<_, _>>()?,
    };
    if out.len() != n {
        return Err(input_error(format!("--a: expected {n} coefficients, found {}", out.len())));
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(input_error("--a: non-finite coefficient"));
    }
    Ok(out)
}

fn verdict_code(v: Verdict) -> i32 {
    if v == Verdict::Unknown {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> Result<(Value, i32, f64), Failure> {
    let default_eps = Tolerance::<f64>::default().eps();
    let budget = PBudget::seeded(cli.seed);
    match &cli.command {
        Command::Multiply { input, x, y } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            let (x, y) = (element_arg(inputs, x, alg.dim())?, element_arg(inputs, y, alg.dim())?);
            let p = alg.multiply(&x, &y)?;
            Ok((json!({ "product": io::element_json(&p) }), EXIT_OK, tol.eps()))
        }
        Command::ClassifySubspace { input, subspace } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            let vs = io::parse_vectors(&inputs.read(subspace)?, alg.dim())?;
            let s = Subspace::span(alg.dim(), &vs, &tol);
            let c = classify_subspace(&alg, &s, &budget.search, &tol);
            let code = if c.certainty == Certainty::Proved { EXIT_OK } else { EXIT_INCONCLUSIVE };
            Ok((json!({ "subspace": io::subspace_json(&s), "classification": io::class_json(&c) }), code, tol.eps()))
        }
        Command::Nilpotency { input } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            let (nil, order) = is_nilpotent(&alg, &tol);
            let perm = order.map(|o| o.iter().map(|v| v + 1).collect::<Vec<_>>());
            Ok((json!({ "nilpotent": nil, "permutation": perm }), EXIT_OK, tol.eps()))
        }
        Command::Nilindex { input, cap } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            let n = alg.dim();
            let cap = cap.unwrap_or_else(|| 1usize.checked_shl(n as u32 - 1).unwrap_or(usize::MAX / 2).saturating_add(2).min(4096));
            let ranks = PowerSequence::compute(&alg, cap, &tol).ranks();
            match nilpotency_index(&alg, cap, &tol) {
                Ok(idx) => Ok((json!({ "index": idx, "cap": cap, "ranks": ranks }), EXIT_OK, tol.eps())),
                Err(evolib::Error::CapExceeded { .. }) => {
                    Ok((json!({ "index": Value::Null, "cap": cap, "ranks": ranks, "cap_exceeded": true }), EXIT_INCONCLUSIVE, tol.eps()))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::DecomposePerm { pi, a } => {
            let tol = io::tolerance_for(None, cli.eps)?;
            let pi = parse_pi(pi)?;
            let a = parse_coeffs(a, pi.len())?;
            let spec = PermutationSpec::new(pi, a)?;
            Ok((io::decomposition_json(&decompose(&spec, &tol)), EXIT_OK, tol.eps()))
        }
        Command::Classify2 { input } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            Ok((io::dim2_json(&classify_dim2(&alg, &tol)?), EXIT_OK, tol.eps()))
        }
        Command::DecideP { input, budget: trials } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            let mut b = budget;
            if let Some(t) = trials {
                b.search = SearchConfig { trials: *t, ..b.search };
            }
            let d = decide_p(&alg, &b, &tol);
            Ok((io::decision_json(&d), verdict_code(d.verdict), tol.eps()))
        }
        Command::CanonicalizeNilpotent { input } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            let d = decide_p_nilpotent(&alg, &budget, &tol)?;
            Ok((io::decision_json(&d), verdict_code(d.verdict), tol.eps()))
        }
        Command::SolveFixedpoint { input } => {
            let doc = io::parse_document(&inputs.read(input)?)?;
            let tol = io::tolerance_for(Some(&doc), cli.eps)?;
            let sys = FixedPointSystem::new(doc.to_matrix())?;
            let cfg = SolveConfig { track: budget.track, ..SolveConfig::default() };
            let set = if sys.dim() <= 2 { solve_small(&sys, &cfg)? } else { solve_numeric(&sys, &cfg) };
            let full = full_support_solution(&sys, &cfg);
            let result = json!({
                "solutions": io::solutions_json(&set),
                "full_support_solution": full.as_ref().map(io::element_json),
            });
            Ok((result, EXIT_OK, tol.eps()))
        }
        Command::Conjecture51 { n, samples, dist } => {
            if *n == 0 {
                return Err(input_error("--n must be positive"));
            }
            let cfg = SolveConfig::default();
            let r = sample_campaign::<f64>(*n, *samples, cli.seed, *dist, &cfg);
            Ok((io::campaign_json(&r), EXIT_OK, cli.eps.unwrap_or(default_eps)))
        }
        Command::Reduce53 { input } => {
            let (_, alg, tol) = load(inputs, input, cli.eps)?;
            let cfg = SolveConfig { track: budget.track, ..SolveConfig::default() };
            let r = reduce_pipeline(&alg, &budget, &cfg, &tol);
            let code = match &r.outcome {
                ReduceOutcome::Certificate { witness: None, .. } => EXIT_INCONCLUSIVE,
                ReduceOutcome::Nilpotent(d) => verdict_code(d.verdict),
                _ => EXIT_OK,
            };
            Ok((io::reduce_json(&r), code, tol.eps()))
        }
    }
}
