//! `ohmwalk` command-line front end.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing check, 2 for
//! usage, input and computation errors (message on standard error).

pub mod edgelist;

use std::ffi::OsString;
use std::hash::{BuildHasher, Hasher};
use std::io::{Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ohmwalk::monte_carlo::{ChiSquareFit, DEFAULT_STEP_CAP};
use ohmwalk::proof::NetworkSummary;
use ohmwalk::solver::ExactSolver;
use ohmwalk::{
    attach_pendant, estimate_excursions, estimate_hitting_time, estimate_return_time,
    relative_error, replay, return_time_formula, stationary_distribution, verify_theorems,
    Distribution, Estimate, Execution, HittingProfile, Network, ProofTrace, ReplayOptions,
    SimParams, TheoremReport, VertexId,
};

pub use edgelist::{parse_network_file, LoadError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A fixed seed, or `random` to draw one (printed on standard error).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

fn parse_seed(s: &str) -> Result<SeedArg, String> {
    if s == "random" {
        return Ok(SeedArg::Random);
    }
    s.parse()
        .map(SeedArg::Fixed)
        .map_err(|_| format!("expected an unsigned integer or `random`, got {s:?}"))
}

#[derive(Debug, Parser)]
#[command(name = "ohmwalk", version, about = "Random walks on electric networks")]
pub struct CliConfig {
    /// Edge-list file, or `-` for standard input.
    #[arg(short, long, global = true, default_value = "-")]
    pub input: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Unsigned integer, or `random`.
    #[arg(long, global = true, default_value = "0", value_parser = parse_seed)]
    pub seed: SeedArg,
    /// Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub trials: u64,
    /// Relative tolerance for `verify`.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Steps after which a single trial is abandoned.
    #[arg(long = "step-cap", global = true, default_value_t = DEFAULT_STEP_CAP)]
    pub step_cap: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective resistance between two vertices.
    Resistance { x: String, y: String },
    /// Expected steps from x until the walk first reaches y.
    Hitting { x: String, y: String },
    /// Expected return time to z, by first-step analysis and by C / C_z.
    ReturnTime { z: String },
    /// Stationary distribution C_z / C.
    Stationary,
    /// Expected round trip x -> y -> x.
    Commute { x: String, y: String },
    /// Monte Carlo estimates.
    Simulate {
        #[command(subcommand)]
        what: SimulateCommand,
    },
    /// Check the return-time and commute identities and replay the
    /// pendant-vertex argument at every vertex (or one).
    Verify {
        #[arg(long)]
        vertex: Option<String>,
        /// Attach Monte Carlo estimates to the replay.
        #[arg(long)]
        simulate: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Steps until the walk from z is back at z.
    Return { z: String },
    /// Steps until the walk from x first reaches y.
    Hitting { x: String, y: String },
    /// Excursions from z before the walk steps onto a pendant attached at z.
    Excursions {
        z: String,
        #[arg(long, default_value_t = 1.0)]
        pendant_conductance: f64,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Compute(#[from] ohmwalk::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(
    argv: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(argv) {
        Ok(config) => config,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&config, stdin, stderr) {
        Ok((document, code)) => match stdout.write_all(&document) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn load(config: &CliConfig, stdin: &mut dyn Read) -> Result<Network, CliError> {
    let text = if config.input == "-" {
        let mut s = String::new();
        stdin
            .read_to_string(&mut s)
            .map_err(|source| LoadError::Io {
                path: "<stdin>".into(),
                source,
            })?;
        s
    } else {
        std::fs::read_to_string(&config.input).map_err(|source| LoadError::Io {
            path: config.input.clone(),
            source,
        })?
    };
    Ok(parse_network_file(&text)?)
}

fn validate(config: &CliConfig) -> Result<(), CliError> {
    if config.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(config.tolerance.is_finite() && config.tolerance > 0.0) {
        return Err(CliError::Usage("--tolerance must be positive".into()));
    }
    if config.step_cap == 0 {
        return Err(CliError::Usage("--step-cap must be at least 1".into()));
    }
    if config.format == Format::Csv && matches!(config.command, Command::Verify { .. }) {
        return Err(CliError::Usage("verify output is JSON only".into()));
    }
    Ok(())
}

fn resolve_seed(seed: SeedArg, stderr: &mut dyn Write) -> u64 {
    match seed {
        SeedArg::Fixed(s) => s,
        SeedArg::Random => {
            let s = std::collections::hash_map::RandomState::new()
                .build_hasher()
                .finish();
            let _ = writeln!(stderr, "seed: {s}");
            s
        }
    }
}

fn execute(
    config: &CliConfig,
    stdin: &mut dyn Read,
    stderr: &mut dyn Write,
) -> Result<(Vec<u8>, i32), CliError> {
    validate(config)?;
    let net = load(config, stdin)?;
    let id = |s: &String| VertexId::from(s.as_str());
    let mut params = || {
        SimParams::new(config.trials, resolve_seed(config.seed, stderr))
            .with_step_cap(config.step_cap)
    };
    let format = config.format;

    let document = match &config.command {
        Command::Resistance { x, y } => {
            let r = ExactSolver::new(&net).effective_resistance_conditioned(&id(x), &id(y))?;
            let doc = ResistanceDoc {
                x: x.clone(),
                y: y.clone(),
                resistance: r.value,
                ill_conditioned: r.is_ill_conditioned(),
            };
            emit(format, &doc, || {
                table(
                    &["x", "y", "resistance", "ill_conditioned"],
                    [vec![
                        x.clone(),
                        y.clone(),
                        num(r.value),
                        r.is_ill_conditioned().to_string(),
                    ]],
                )
            })?
        }
        Command::Hitting { x, y } => {
            let profile = ExactSolver::new(&net).hitting_time(&id(y))?;
            let value = profile
                .get(&id(x))
                .ok_or_else(|| ohmwalk::Error::UnknownVertex(x.clone()))?;
            let rows: Vec<Vec<String>> = net
                .vertices()
                .iter()
                .zip(profile.values())
                .map(|(v, h)| vec![v.to_string(), y.clone(), num(*h)])
                .collect();
            let doc = HittingDoc {
                from: x.clone(),
                to: y.clone(),
                hitting_time: value,
                profile,
            };
            emit(format, &doc, || {
                table(&["from", "to", "hitting_time"], rows)
            })?
        }
        Command::ReturnTime { z } => {
            let formula = return_time_formula(&net, &id(z))?;
            let first_step = ExactSolver::new(&net).return_time(&id(z))?;
            let doc = ReturnTimeDoc {
                vertex: z.clone(),
                formula,
                first_step,
            };
            emit(format, &doc, || {
                table(
                    &["vertex", "formula", "first_step"],
                    [vec![z.clone(), num(formula), num(first_step)]],
                )
            })?
        }
        Command::Stationary => {
            let pi = stationary_distribution(&net);
            let rows: Vec<Vec<String>> = pi
                .iter()
                .map(|(v, w)| vec![v.to_string(), num(w)])
                .collect();
            emit(format, &StationaryDoc { stationary: pi }, || {
                table(&["vertex", "probability"], rows)
            })?
        }
        Command::Commute { x, y } => {
            let solver = ExactSolver::new(&net);
            let commute = solver.commute_time(&id(x), &id(y))?;
            let resistance = solver.effective_resistance(&id(x), &id(y))?;
            let c = net.total_conductance();
            let doc = CommuteDoc {
                x: x.clone(),
                y: y.clone(),
                commute_time: commute,
                total_conductance: c,
                resistance,
                identity_rel_err: relative_error(commute, c * resistance),
            };
            emit(format, &doc, || {
                table(
                    &[
                        "x",
                        "y",
                        "commute_time",
                        "total_conductance",
                        "resistance",
                        "identity_rel_err",
                    ],
                    [vec![
                        x.clone(),
                        y.clone(),
                        num(commute),
                        num(c),
                        num(resistance),
                        num(doc.identity_rel_err),
                    ]],
                )
            })?
        }
        Command::Simulate { what } => simulate(&net, what, &params(), format)?,
        Command::Verify { vertex, simulate } => {
            let report = verify_theorems(&net, config.tolerance, Execution::Parallel)?;
            let options = ReplayOptions {
                tolerance: config.tolerance,
                simulate: simulate.then(&mut params),
            };
            let anchors: Vec<VertexId> = match vertex {
                Some(z) => vec![id(z)],
                None => net.vertices().to_vec(),
            };
            let traces = anchors
                .iter()
                .map(|z| replay(&net, z, &options))
                .collect::<Result<Vec<_>, _>>()?;
            let verdict = report.pass && traces.iter().all(|t| t.verdict);
            let doc = VerifyDoc {
                network: NetworkSummary::of(&net),
                identities: report,
                traces,
                verdict,
            };
            let code = if verdict { EXIT_OK } else { EXIT_VERIFY_FAILED };
            return Ok((json(&doc)?, code));
        }
    };
    Ok((document, EXIT_OK))
}

fn simulate(
    net: &Network,
    what: &SimulateCommand,
    params: &SimParams,
    format: Format,
) -> Result<Vec<u8>, CliError> {
    let doc = match what {
        SimulateCommand::Return { z } => {
            let z = VertexId::from(z.as_str());
            let estimate = estimate_return_time(net, &z, params)?;
            SimulationDoc {
                quantity: "return-time",
                from: z.clone(),
                to: Some(z.clone()),
                pendant_conductance: None,
                reference: return_time_formula(net, &z)?,
                estimate,
                success_probability: None,
                counts: None,
                chi_square: None,
            }
        }
        SimulateCommand::Hitting { x, y } => {
            let (x, y) = (VertexId::from(x.as_str()), VertexId::from(y.as_str()));
            let estimate = estimate_hitting_time(net, &x, &y, params)?;
            let reference = ExactSolver::new(net)
                .hitting_time(&y)?
                .get(&x)
                .unwrap_or(f64::NAN);
            SimulationDoc {
                quantity: "hitting-time",
                from: x,
                to: Some(y),
                pendant_conductance: None,
                reference,
                estimate,
                success_probability: None,
                counts: None,
                chi_square: None,
            }
        }
        SimulateCommand::Excursions {
            z,
            pendant_conductance,
        } => {
            let z = VertexId::from(z.as_str());
            let aug = attach_pendant(net, &z, *pendant_conductance)?;
            let stats = estimate_excursions(&aug, params)?;
            SimulationDoc {
                quantity: "excursions",
                from: z.clone(),
                to: None,
                pendant_conductance: Some(*pendant_conductance),
                reference: net.vertex_conductance(&z)? / pendant_conductance,
                estimate: stats.estimate,
                success_probability: Some(stats.success_probability),
                chi_square: stats.chi_square_geometric(),
                counts: Some(stats.counts),
            }
        }
    };
    emit(format, &doc, || {
        let e = &doc.estimate;
        table(
            &[
                "quantity",
                "from",
                "to",
                "reference",
                "mean",
                "std_error",
                "trials",
                "seed",
                "capped_trials",
            ],
            [vec![
                doc.quantity.to_string(),
                doc.from.to_string(),
                doc.to.as_ref().map(|t| t.to_string()).unwrap_or_default(),
                num(doc.reference),
                num(e.mean),
                num(e.std_error),
                e.trials.to_string(),
                e.seed.to_string(),
                e.capped_trials.to_string(),
            ]],
        )
    })
}

#[derive(Serialize)]
struct ResistanceDoc {
    x: String,
    y: String,
    resistance: f64,
    ill_conditioned: bool,
}

#[derive(Serialize)]
struct HittingDoc {
    from: String,
    to: String,
    hitting_time: f64,
    profile: HittingProfile,
}

#[derive(Serialize)]
struct ReturnTimeDoc {
    vertex: String,
    formula: f64,
    first_step: f64,
}

#[derive(Serialize)]
struct StationaryDoc {
    stationary: Distribution,
}

#[derive(Serialize)]
struct CommuteDoc {
    x: String,
    y: String,
    commute_time: f64,
    total_conductance: f64,
    resistance: f64,
    identity_rel_err: f64,
}

#[derive(Serialize)]
struct SimulationDoc {
    quantity: &'static str,
    from: VertexId,
    #[serde(skip_serializing_if = "Option::is_none")]
    to: Option<VertexId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pendant_conductance: Option<f64>,
    reference: f64,
    estimate: Estimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<std::collections::BTreeMap<u64, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi_square: Option<ChiSquareFit>,
}

#[derive(Serialize)]
struct VerifyDoc {
    network: NetworkSummary,
    identities: TheoremReport,
    traces: Vec<ProofTrace>,
    verdict: bool,
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn json<T: Serialize>(doc: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(doc).map_err(|e| CliError::Output(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn table<R>(header: &[&str], rows: R) -> Result<Vec<u8>, CliError>
where
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

fn emit<T, F>(format: Format, doc: &T, csv: F) -> Result<Vec<u8>, CliError>
where
    T: Serialize,
    F: FnOnce() -> Result<Vec<u8>, CliError>,
{
    match format {
        Format::Json => json(doc),
        Format::Csv => csv(),
    }
}
