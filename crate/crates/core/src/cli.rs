//! The `kanto` command-line front end.
//!
//! Every command prints one JSON report on standard output (the `approx`
//! study can print CSV instead). Exit codes: `0` on success, `1` with a JSON
//! error object on standard error when inputs are missing, malformed or
//! invalid, `2` when a law check exceeds its tolerance.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::algebras::{
    check_algebra_laws, check_convex_axioms, check_free_algebra, check_metric_compat, check_operad_laws, Convention,
    ConvexAlgebra,
};
use crate::approx::{convergence_study, rationalize, sample_empirical, truncate_to_ball, ApproximationReport};
use crate::formats::{
    measure_to_json, parse_measure, parse_multiset, parse_space, parse_tuple, read_input, FormatError,
};
use crate::measures::DiscreteMeasure;
use crate::monad::{empirical_sym, LawResult};
use crate::power::{multiset_matching, tuple_distance};
use crate::random::{SamplerConfig, RNG_ALGORITHM};
use crate::spaces::{FiniteMetricSpace, Norm};
use crate::suite::law_suite;
use crate::transport::{validate_coupling, w1, Solver};
use crate::TAU_SOLVER;

#[derive(Debug, Parser)]
#[command(
    name = "kanto",
    version,
    about = "Exact Wasserstein-1 transport and Kantorovich monad law checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L1,
    L2,
    Linf,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Norm {
        match n {
            NormArg::L1 => Norm::L1,
            NormArg::L2 => Norm::L2,
            NormArg::Linf => Norm::Linf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    WeightOnFirst,
    WeightOnSecond,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Transport solver.
    #[arg(long, global = true, value_enum, default_value_t = Solver::Auto)]
    pub solver: Solver,
    /// Numerical tolerance; caps the tolerance of every law check.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = TAU_SOLVER)]
    pub tolerance: f64,
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    pub out: OutFormat,
    /// Largest sampled roster.
    #[arg(long, global = true, default_value_t = 6)]
    pub max_points: usize,
    /// Largest sampled support.
    #[arg(long, global = true, default_value_t = 4)]
    pub max_support: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TransportArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// W1 distance between two measures.
    Dist(TransportArgs),
    /// W1 distance with an optimal coupling.
    Coupling(TransportArgs),
    /// W1 distance with an optimal 1-Lipschitz potential.
    Dual(TransportArgs),
    /// Distance between two tuples, or two multisets with `--multiset`.
    PowerDist {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        multiset: bool,
    },
    /// Randomized monad, graded, isometry and transport-identity checks.
    Laws,
    /// Barycenter, convex-space and operad laws on a normed carrier.
    AlgebraCheck {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = NormArg::L2)]
        norm: NormArg,
        #[arg(long, value_enum, default_value_t = ConventionArg::WeightOnFirst)]
        convention: ConventionArg,
    },
    /// Rationalize (`--epsilon`), truncate (`--center`, `--radius`) or run a
    /// sampling convergence study (`--sizes`).
    Approx {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        center: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Draw an empirical sample of size `n`.
    Sample {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: String,
    message: String,
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        FormatError::Invalid(e).into()
    }
}

fn invalid(what: &str, message: impl Into<String>) -> Failure {
    Failure {
        code: format!("invalid.{what}"),
        message: message.into(),
    }
}

fn failure_outcome(f: Failure) -> Outcome {
    let body = json!({ "error": { "code": f.code, "message": f.message } });
    Outcome {
        code: 1,
        stdout: String::new(),
        stderr: format!("{body}\n"),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                code: 0,
                stdout: e.to_string(),
                stderr: String::new(),
            },
            _ => failure_outcome(Failure {
                code: "usage".into(),
                message: e.to_string(),
            }),
        },
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match execute(cli) {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(f) => failure_outcome(f),
    }
}

fn check_options(o: &Options) -> Result<(), Failure> {
    if !(o.tolerance > 0.0) || !o.tolerance.is_finite() {
        return Err(invalid(
            "tolerance",
            format!("tolerance must be positive, got {}", o.tolerance),
        ));
    }
    if o.trials == 0 {
        return Err(invalid("trials", "trials must be at least 1"));
    }
    if o.max_points == 0 || o.max_support == 0 {
        return Err(invalid("sampler", "--max-points and --max-support must be at least 1"));
    }
    Ok(())
}

struct Inputs {
    digests: Map<String, Value>,
}

impl Inputs {
    fn new() -> Self {
        Inputs { digests: Map::new() }
    }

    fn read(&mut self, key: &str, path: &Path) -> Result<String, Failure> {
        let (text, digest) = read_input(path)?;
        self.digests.insert(key.into(), json!(format!("sha256:{digest}")));
        Ok(text)
    }

    fn space(&mut self, path: &Path) -> Result<Arc<FiniteMetricSpace>, Failure> {
        let text = self.read("space", path)?;
        Ok(parse_space(&text)?.space)
    }

    fn measure(&mut self, key: &str, path: &Path, space: &Arc<FiniteMetricSpace>) -> Result<DiscreteMeasure, Failure> {
        let text = self.read(key, path)?;
        Ok(parse_measure(&text, space)?)
    }
}

fn render(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("serializable"))
}

fn base_report(command: &str, o: &Options, inputs: Inputs) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("solver".into(), json!(o.solver));
    m.insert("tolerance".into(), json!(o.tolerance));
    m.insert("inputs".into(), Value::Object(inputs.digests));
    m
}

fn sampler(o: &Options) -> SamplerConfig {
    SamplerConfig {
        max_points: o.max_points,
        max_support: o.max_support,
        ..SamplerConfig::default()
    }
}

/// Applies the `--tolerance` cap and reports whether everything passed.
fn cap_results(results: &mut [LawResult], cap: f64) -> bool {
    for r in results.iter_mut() {
        if r.tolerance > cap {
            r.tolerance = cap;
        }
        r.pass = r.worst_discrepancy <= r.tolerance;
    }
    results.iter().all(|r| r.pass)
}

fn law_report(command: &str, o: &Options, mut results: Vec<LawResult>, extra: Map<String, Value>) -> (i32, String) {
    let pass = cap_results(&mut results, o.tolerance);
    let mut m = base_report(command, o, Inputs::new());
    m.insert("rng".into(), json!(RNG_ALGORITHM));
    m.insert("seed".into(), json!(o.seed));
    m.insert("trials".into(), json!(o.trials));
    m.extend(extra);
    m.insert("pass".into(), json!(pass));
    m.insert("results".into(), json!(results));
    (if pass { 0 } else { 2 }, render(&Value::Object(m)))
}

fn approximation_json(r: &ApproximationReport) -> Value {
    json!({
        "target": measure_to_json(&r.target),
        "approximant": measure_to_json(&r.approximant),
        "w1_error": r.w1_error,
        "bound": r.bound,
        "formula_error": r.formula_error,
        "within_bound": r.within_bound(TAU_SOLVER),
        "parameters": { "epsilon": r.epsilon, "radius": r.radius, "center": r.center },
    })
}

fn execute(cli: &Cli) -> Result<(i32, String), Failure> {
    let o = &cli.opts;
    check_options(o)?;
    let csv_ok = matches!(&cli.command, Command::Approx { sizes: Some(_), .. });
    if o.out == OutFormat::Csv && !csv_ok {
        return Err(invalid("out", "CSV output is only available for approx --sizes"));
    }

    match &cli.command {
        Command::Dist(t) | Command::Coupling(t) | Command::Dual(t) => {
            let mut inputs = Inputs::new();
            let space = inputs.space(&t.space)?;
            let p = inputs.measure("p", &t.p, &space)?;
            let q = inputs.measure("q", &t.q, &space)?;
            let res = w1(&p, &q, o.solver)?;
            let (name, extra) = match &cli.command {
                Command::Dist(_) => ("dist", None),
                Command::Coupling(_) => (
                    "coupling",
                    Some((
                        "coupling",
                        json!({
                            "rows": p.support(),
                            "cols": q.support(),
                            "plan": res.coupling.rows(),
                            "check": validate_coupling(&res.coupling, o.tolerance),
                        }),
                    )),
                ),
                _ => (
                    "dual",
                    Some((
                        "potential",
                        json!({
                            "points": res.dual.points(),
                            "values": res.dual.values(),
                            "dual_value": res.cost - res.gap,
                        }),
                    )),
                ),
            };
            let mut m = base_report(name, o, inputs);
            m.insert("cost".into(), json!(res.cost));
            m.insert("gap".into(), json!(res.gap));
            m.insert("method".into(), json!(res.method));
            m.insert("certified".into(), json!(res.gap.abs() <= o.tolerance));
            if let Some((k, v)) = extra {
                m.insert(k.into(), v);
            }
            Ok((0, render(&Value::Object(m))))
        }
        Command::PowerDist { space, a, b, multiset } => {
            let mut inputs = Inputs::new();
            let space = inputs.space(space)?;
            let ta = inputs.read("a", a)?;
            let tb = inputs.read("b", b)?;
            let mut extra = Map::new();
            let distance = if *multiset {
                let ma = parse_multiset(&ta, &space)?;
                let mb = parse_multiset(&tb, &space)?;
                let (d, matching) = multiset_matching(&ma, &mb)?;
                extra.insert("a".into(), json!(ma.entries()));
                extra.insert("b".into(), json!(mb.entries()));
                extra.insert("matching".into(), json!(matching));
                d
            } else {
                tuple_distance(&parse_tuple(&ta, &space)?, &parse_tuple(&tb, &space)?)?
            };
            let mut m = base_report("power-dist", o, inputs);
            m.insert("kind".into(), json!(if *multiset { "multiset" } else { "tuple" }));
            m.insert("distance".into(), json!(distance));
            m.extend(extra);
            Ok((0, render(&Value::Object(m))))
        }
        Command::Laws => {
            let cfg = sampler(o);
            let results = law_suite(o.seed, o.trials, &cfg)?;
            let mut extra = Map::new();
            extra.insert("max_points".into(), json!(cfg.max_points));
            extra.insert("max_support".into(), json!(cfg.max_support));
            Ok(law_report("laws", o, results, extra))
        }
        Command::AlgebraCheck { dim, norm, convention } => {
            let conv = match convention {
                ConventionArg::WeightOnFirst => Convention::WeightOnFirst,
                ConventionArg::WeightOnSecond => Convention::WeightOnSecond,
            };
            let a = ConvexAlgebra::new(*dim, (*norm).into())?.with_convention(conv);
            let mut results = check_convex_axioms(&a, o.seed, o.trials)?;
            results.extend(check_metric_compat(&a, o.seed, o.trials)?);
            results.extend(check_algebra_laws(&a, o.seed, o.trials)?);
            results.extend(check_free_algebra(o.seed, o.trials)?);
            results.extend(check_operad_laws(o.seed, o.trials)?);
            let mut extra = Map::new();
            extra.insert(
                "carrier".into(),
                json!({ "dim": dim, "norm": Norm::from(*norm), "convention": conv }),
            );
            Ok(law_report("algebra-check", o, results, extra))
        }
        Command::Approx {
            space,
            p,
            epsilon,
            center,
            radius,
            sizes,
        } => {
            let mut inputs = Inputs::new();
            let space = inputs.space(space)?;
            let p = inputs.measure("p", p, &space)?;
            let mode_count = [epsilon.is_some(), center.is_some() || radius.is_some(), sizes.is_some()]
                .iter()
                .filter(|b| **b)
                .count();
            if mode_count != 1 {
                return Err(invalid(
                    "arguments",
                    "give exactly one of --epsilon, --center with --radius, or --sizes",
                ));
            }
            let mut m = base_report("approx", o, inputs);
            if let Some(eps) = epsilon {
                m.insert("rationalize".into(), approximation_json(&rationalize(&p, *eps)?));
            } else if let Some(sizes) = sizes {
                let rows = convergence_study(&p, sizes, o.trials, o.seed)?;
                if o.out == OutFormat::Csv {
                    let mut out = String::from("n,median_w1\n");
                    for r in &rows {
                        out.push_str(&format!("{},{}\n", r.n, r.median_w1));
                    }
                    return Ok((0, out));
                }
                m.insert("rng".into(), json!(RNG_ALGORITHM));
                m.insert("seed".into(), json!(o.seed));
                m.insert("trials".into(), json!(o.trials));
                m.insert("study".into(), json!(rows));
            } else {
                let (Some(c), Some(r)) = (center, radius) else {
                    return Err(invalid("arguments", "--center and --radius go together"));
                };
                m.insert("truncate".into(), approximation_json(&truncate_to_ball(&p, *c, *r)?));
            }
            Ok((0, render(&Value::Object(m))))
        }
        Command::Sample { space, p, n } => {
            let mut inputs = Inputs::new();
            let space = inputs.space(space)?;
            let p = inputs.measure("p", p, &space)?;
            let sample = sample_empirical(&p, *n, o.seed)?;
            let mut m = base_report("sample", o, inputs);
            m.insert("rng".into(), json!(RNG_ALGORITHM));
            m.insert("seed".into(), json!(o.seed));
            m.insert("multiset".into(), json!(sample.entries()));
            m.insert("empirical".into(), measure_to_json(&empirical_sym(&sample)));
            Ok((0, render(&Value::Object(m))))
        }
    }
}
