//! The `robustnet` command line.
//!
//! Exit codes: `0` success (stable, scalable, passes), `2` unstable or
//! destabilising, `3` stable but not scalable (or failing the checked
//! level), `1` usage, parse and every other error. Errors are reported on
//! stderr as `{"error": .., "kind": ..}`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{analyze, cycle_small_gain, walk_sum_oracle, Certificate, RobustnessReport};
use crate::changes::{
    apply, check_sequence, propose_repair, sufficient_local_check, verdict, ChangeVerdict,
    NewEdge, StructuralChange, VerdictOptions,
};
use crate::config::Tolerances;
use crate::decimal::format_human as h6;
use crate::error::{Error, Result};
use crate::format::{
    read_certificate, read_change, read_changes, read_network, to_json, trajectory_csv,
};
use crate::model::NodeId;
use crate::simulate::{
    settling_horizon, simulate, witness_bound, DisturbanceSignal, Integrator, SimOptions,
    WitnessOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNSTABLE: i32 = 2;
pub const EXIT_NOT_SCALABLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "robustnet", version, about = "Gamma-robustness analysis of positive linear networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub format: OutputFormat,
    /// Relative stability margin on the spectral radius.
    #[arg(long, value_parser = tolerance, global = true)]
    pub eps_stab: Option<f64>,
    /// Accepted relative residual of linear solves.
    #[arg(long, value_parser = tolerance, global = true)]
    pub solve_tol: Option<f64>,
    /// Maximum number of simple cycles to enumerate.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    pub cycle_cap: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(e) = self.eps_stab {
            tol.eps_stab = e;
        }
        if let Some(s) = self.solve_tol {
            tol.solve_tol = s;
        }
        if let Some(c) = self.cycle_cap {
            tol.cycle_cap = usize::try_from(c).unwrap_or(usize::MAX);
        }
        tol
    }
}

fn tolerance(s: &str) -> std::result::Result<f64, String> {
    let x = crate::decimal::parse(s)?;
    if (1e-15..=1e-3).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [1e-15, 1e-3]"))
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let x = crate::decimal::parse(s)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} is not a positive number"))
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stability, robustness vector and minimal gain.
    Analyze { network: PathBuf },
    /// Scalability verdict for one structural change.
    Check {
        network: PathBuf,
        change: PathBuf,
        /// Judge the changed network against this level instead of the
        /// original minimal gain.
        #[arg(long, value_parser = positive)]
        gamma: Option<f64>,
        /// Also run the local sufficient test with this certificate file.
        #[arg(long)]
        local_cert: Option<PathBuf>,
    },
    /// Apply changes (one object or an array) and write the new network.
    Apply { network: PathBuf, change: PathBuf },
    /// Self-feedback adjustment that makes an edge addition scalable.
    Repair {
        network: PathBuf,
        change: PathBuf,
        /// Level to preserve; defaults to the minimal gain.
        #[arg(long, value_parser = positive)]
        gamma: Option<f64>,
        /// Certificate to keep valid; defaults to the robustness vector.
        #[arg(long)]
        local_cert: Option<PathBuf>,
    },
    /// Cycle small-gain condition on every simple cycle.
    Cycles {
        network: PathBuf,
        /// Defaults to the minimal gain.
        #[arg(long, value_parser = positive)]
        gamma: Option<f64>,
    },
    /// Truncated weighted-walk sum into one node, with a tail bound.
    Walks {
        network: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        target: u64,
        #[arg(long, default_value_t = 20)]
        max_len: usize,
    },
    /// Simulate the network, or run a randomised witness of the gain bound.
    Simulate(SimulateArgs),
    /// Per-step verdicts for a change script.
    Sequence {
        network: PathBuf,
        changes: PathBuf,
        /// Level for the final network; defaults to the initial minimal gain.
        #[arg(long, value_parser = positive)]
        gamma: Option<f64>,
    },
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub network: PathBuf,
    #[arg(long, value_enum, default_value_t = SignalKind::Ones)]
    pub signal: SignalKind,
    /// Input amplitude for `random` and `ones`.
    #[arg(long, value_parser = positive, default_value = "1")]
    pub amplitude: f64,
    /// Defaults to thirty times the minimal gain (stable networks) or 10.
    #[arg(long, value_parser = positive)]
    pub horizon: Option<f64>,
    /// Defaults to `1e-3 / max a`.
    #[arg(long, value_parser = positive)]
    pub step: Option<f64>,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Rk4)]
    pub integrator: IntegratorArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record every n-th step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Run this many random trials against `--gamma` instead of one trajectory.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub gamma: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalKind {
    Zero,
    Ones,
    Random,
    /// `(A - M) u`, which holds the state at `u`.
    WorstPlus,
    WorstMinus,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegratorArg {
    Rk4,
    Exact,
}

impl From<IntegratorArg> for Integrator {
    fn from(i: IntegratorArg) -> Self {
        match i {
            IntegratorArg::Rk4 => Integrator::Rk4,
            IntegratorArg::Exact => Integrator::Exact,
        }
    }
}

/// Rendered command output and its exit code.
pub struct Outcome {
    pub body: String,
    pub code: i32,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: String,
    kind: &'a str,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("ROBUSTNET_LOG", "warn"),
    )
    .try_init();
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            report_error(&e.to_string(), "usage");
            return EXIT_ERROR;
        }
    };
    match execute(&cli).and_then(|out| emit(&cli.global, &out).map(|_| out.code)) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e.to_string(), e.kind());
            EXIT_ERROR
        }
    }
}

fn report_error(message: &str, kind: &str) {
    let body = ErrorBody {
        error: message.trim_end().to_string(),
        kind,
    };
    eprint!("{}", to_json(&body));
}

fn emit(global: &GlobalArgs, out: &Outcome) -> Result<()> {
    match &global.out {
        Some(path) => std::fs::write(path, &out.body)?,
        None => std::io::stdout().write_all(out.body.as_bytes())?,
    }
    Ok(())
}

/// Runs a parsed command without touching stdout.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.global.tolerances();
    let fmt = cli.global.format;
    log::debug!("{:?} with {:?}", cli.command, tol);
    match &cli.command {
        Command::Analyze { network } => {
            let net = read_network(network)?;
            let report = analyze(&net, &tol)?;
            let code = if report.stable { EXIT_OK } else { EXIT_UNSTABLE };
            let body = match fmt {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Human => human_report(&report),
                OutputFormat::Csv => {
                    let mut s = String::from("node,u\n");
                    for (i, u) in report.u.iter().flatten().enumerate() {
                        writeln!(s, "{},{}", i + 1, crate::decimal::format(*u)).unwrap();
                    }
                    s
                }
            };
            Ok(Outcome { body, code })
        }
        Command::Check {
            network,
            change,
            gamma,
            local_cert,
        } => {
            let net = read_network(network)?;
            let change = read_change(change)?;
            let v = verdict(&net, &change, &tol, VerdictOptions::default())?;
            let local_check = match (local_cert, &change) {
                (Some(path), StructuralChange::AddEdge { to, from, weight }) => {
                    let cert = read_certificate(path)?;
                    let edge = NewEdge {
                        to: *to,
                        from: *from,
                        weight: *weight,
                    };
                    Some(sufficient_local_check(&net, &edge, &cert)?)
                }
                (Some(_), _) => {
                    return Err(Error::InvalidArgument(
                        "--local-cert applies to add_edge changes only".into(),
                    ))
                }
                (None, _) => None,
            };
            let scalable = match gamma {
                Some(g) => v.is_gamma_scalable(*g),
                None => v.scalable,
            };
            let code = if !v.stable_after {
                EXIT_UNSTABLE
            } else if scalable {
                EXIT_OK
            } else {
                EXIT_NOT_SCALABLE
            };
            let out = CheckOutput {
                verdict: &v,
                gamma: *gamma,
                gamma_scalable: gamma.map(|_| scalable),
                local_check,
            };
            let body = match fmt {
                OutputFormat::Json => to_json(&out),
                OutputFormat::Human => human_verdict(&v, local_check),
                OutputFormat::Csv => return Err(csv_unsupported("check")),
            };
            Ok(Outcome { body, code })
        }
        Command::Apply { network, change } => {
            let mut net = read_network(network)?;
            for (index, c) in read_changes(change)?.iter().enumerate() {
                net = apply(&net, c)
                    .map_err(|e| Error::Step {
                        index,
                        source: Box::new(e),
                    })?
                    .network;
            }
            if fmt == OutputFormat::Csv {
                return Err(csv_unsupported("apply"));
            }
            Ok(Outcome {
                body: crate::format::network_to_json(&net),
                code: EXIT_OK,
            })
        }
        Command::Repair {
            network,
            change,
            gamma,
            local_cert,
        } => {
            let net = read_network(network)?;
            let edge = match read_change(change)? {
                StructuralChange::AddEdge { to, from, weight } => NewEdge { to, from, weight },
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "repair applies to add_edge changes only, got {other:?}"
                    )))
                }
            };
            let cert = match local_cert {
                Some(path) => read_certificate(path)?,
                None => {
                    let report = crate::analysis::robustness_vector(&net, &tol)?;
                    let mut cert = Certificate::from_report(&report).expect("stable report");
                    if let Some(g) = gamma {
                        cert.gamma = *g;
                    }
                    cert
                }
            };
            let repair = propose_repair(&net, &edge, &cert, &tol)?;
            let code = if repair.verified { EXIT_OK } else { EXIT_NOT_SCALABLE };
            let body = match fmt {
                OutputFormat::Json => to_json(&repair),
                OutputFormat::Human => format!(
                    "raise a[{}] from {} to {} (level {}, {})\n",
                    repair.node,
                    h6(repair.a_old, 6),
                    h6(repair.a_new, 6),
                    h6(repair.gamma, 6),
                    if repair.verified { "verified" } else { "not verified" }
                ),
                OutputFormat::Csv => return Err(csv_unsupported("repair")),
            };
            Ok(Outcome { body, code })
        }
        Command::Cycles { network, gamma } => {
            let net = read_network(network)?;
            let gamma = match gamma {
                Some(g) => *g,
                None => crate::analysis::robustness_vector(&net, &tol)?.gamma(),
            };
            let report = cycle_small_gain(&net, gamma, &tol)?;
            let code = if report.passes() { EXIT_OK } else { EXIT_NOT_SCALABLE };
            let body = match fmt {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Human => {
                    let mut s = format!(
                        "{} simple cycle(s) at level {}\n",
                        report.cycles.len(),
                        h6(gamma, 6)
                    );
                    for c in &report.cycles {
                        let nodes: Vec<String> = c.nodes.iter().map(|n| n.to_string()).collect();
                        let bad: Vec<String> = c
                            .checks
                            .iter()
                            .filter(|ch| !ch.passes)
                            .map(|ch| ch.node.to_string())
                            .collect();
                        writeln!(
                            s,
                            "  {}  weight {}  bound {}{}",
                            nodes.join(" -> "),
                            h6(c.weight, 6),
                            h6(c.bound, 6),
                            if bad.is_empty() {
                                String::new()
                            } else {
                                format!("  violated at {}", bad.join(", "))
                            }
                        )
                        .unwrap();
                    }
                    s
                }
                OutputFormat::Csv => return Err(csv_unsupported("cycles")),
            };
            Ok(Outcome { body, code })
        }
        Command::Walks {
            network,
            target,
            max_len,
        } => {
            let net = read_network(network)?;
            let w = walk_sum_oracle(&net, NodeId::new(*target as usize), *max_len, &tol)?;
            let body = match fmt {
                OutputFormat::Json => to_json(&w),
                OutputFormat::Human => format!(
                    "walks into {} up to length {}: {} (tail ≤ {}, ρ = {})\n",
                    w.target,
                    w.max_length,
                    h6(w.sum, 6),
                    h6(w.tail_bound, 6),
                    h6(w.spectral_radius, 6)
                ),
                OutputFormat::Csv => {
                    let mut s = String::from("length,partial_sum\n");
                    for (k, p) in w.partial_sums.iter().enumerate() {
                        writeln!(s, "{},{}", k + 1, crate::decimal::format(*p)).unwrap();
                    }
                    s
                }
            };
            Ok(Outcome { body, code: EXIT_OK })
        }
        Command::Simulate(args) => simulate_cmd(args, fmt, &tol),
        Command::Sequence {
            network,
            changes,
            gamma,
        } => {
            let net = read_network(network)?;
            let changes = read_changes(changes)?;
            let report = check_sequence(&net, &changes, *gamma, &tol, VerdictOptions::default())?;
            let code = if report.halted_at.is_some() {
                EXIT_UNSTABLE
            } else if report.gamma_robust {
                EXIT_OK
            } else {
                EXIT_NOT_SCALABLE
            };
            let body = match fmt {
                OutputFormat::Json => to_json(&report),
                OutputFormat::Human => {
                    let mut s = format!("initial: {}", human_report(&report.initial));
                    for (k, v) in report.steps.iter().enumerate() {
                        write!(s, "step {}: {}", k + 1, human_verdict(v, None)).unwrap();
                    }
                    write!(s, "final: {}", human_report(&report.final_report)).unwrap();
                    writeln!(
                        s,
                        "{} at level {}",
                        if report.gamma_robust { "robust" } else { "not robust" },
                        h6(report.gamma, 6)
                    )
                    .unwrap();
                    s
                }
                OutputFormat::Csv => return Err(csv_unsupported("sequence")),
            };
            Ok(Outcome { body, code })
        }
    }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    #[serde(flatten)]
    verdict: &'a ChangeVerdict,
    #[serde(with = "crate::decimal::opt", skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_scalable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_check: Option<bool>,
}

fn simulate_cmd(args: &SimulateArgs, fmt: OutputFormat, tol: &Tolerances) -> Result<Outcome> {
    let net = read_network(&args.network)?;
    let report = analyze(&net, tol)?;
    if let Some(trials) = args.trials {
        let gamma = args.gamma.or(report.gamma_min).ok_or_else(|| {
            Error::precondition("witness runs need a stable network or an explicit --gamma")
        })?;
        let opts = WitnessOptions {
            amplitude: args.amplitude,
            horizon: args.horizon,
            integrator: args.integrator.into(),
            ..WitnessOptions::default()
        };
        let w = witness_bound(&net, gamma, trials, args.seed, &opts, tol)?;
        let code = if w.passed { EXIT_OK } else { EXIT_NOT_SCALABLE };
        let body = match fmt {
            OutputFormat::Json => to_json(&w),
            OutputFormat::Human => format!(
                "{} trial(s), max peak/amplitude {} against level {}: {}\n",
                w.trials.len(),
                h6(w.max_ratio, 6),
                h6(w.gamma, 6),
                if w.passed { "pass" } else { "FAIL" }
            ),
            OutputFormat::Csv => {
                let mut s = String::from("trial,seed,stream,peak,ratio\n");
                for t in &w.trials {
                    writeln!(
                        s,
                        "{},{},{},{},{}",
                        t.trial,
                        t.seed,
                        t.stream,
                        crate::decimal::format(t.peak),
                        crate::decimal::format(t.ratio)
                    )
                    .unwrap();
                }
                s
            }
        };
        return Ok(Outcome { body, code });
    }
    let n = net.node_count();
    let signal = match args.signal {
        SignalKind::Zero => DisturbanceSignal::zero(n),
        SignalKind::Ones => DisturbanceSignal::Constant(vec![args.amplitude; n]),
        SignalKind::Random => DisturbanceSignal::random(&net, args.amplitude, args.seed, 0),
        SignalKind::WorstPlus | SignalKind::WorstMinus => {
            let u = report
                .u
                .clone()
                .ok_or(Error::Unstable {
                    spectral_radius: report.spectral_radius,
                })?
                .into_iter()
                .map(|x| x * args.amplitude)
                .collect();
            if args.signal == SignalKind::WorstPlus {
                DisturbanceSignal::WorstCasePlus(u)
            } else {
                DisturbanceSignal::WorstCaseMinus(u)
            }
        }
    };
    let horizon = args
        .horizon
        .unwrap_or_else(|| report.gamma_min.map_or(10.0, settling_horizon));
    let mut opts = SimOptions::new(horizon)
        .integrator(args.integrator.into())
        .record_stride(args.stride);
    opts.step = args.step;
    let traj = simulate(&net, &signal, &opts)?;
    let body = match fmt {
        OutputFormat::Csv => trajectory_csv(&traj),
        OutputFormat::Json => to_json(&traj),
        OutputFormat::Human => {
            let peaks: Vec<String> = traj.peak.iter().map(|p| h6(*p, 6)).collect();
            format!(
                "{} step(s) of {}, peak {} (per node: {})\n",
                ((horizon / traj.step) - 1e-9).ceil(),
                h6(traj.step, 6),
                h6(traj.global_peak, 6),
                peaks.join(", ")
            )
        }
    };
    Ok(Outcome { body, code: EXIT_OK })
}

fn csv_unsupported(cmd: &str) -> Error {
    Error::InvalidArgument(format!("csv output is not available for `{cmd}`"))
}

fn describe(c: &StructuralChange) -> String {
    match c {
        StructuralChange::RemoveNode { node } => format!("remove node {node}"),
        StructuralChange::RemoveNodeCascade { node } => format!("remove node {node} with its edges"),
        StructuralChange::RemoveEdge { to, from } => format!("remove edge {from} -> {to}"),
        StructuralChange::AddNode { a } => format!("add node with a = {}", h6(*a, 6)),
        StructuralChange::AddEdge { to, from, weight } => {
            format!("add edge {from} -> {to} with weight {}", h6(*weight, 6))
        }
        StructuralChange::SetSelfFeedback { node, a } => format!("set a[{node}] = {}", h6(*a, 6)),
    }
}

fn human_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| h6(*x, 6)).collect();
    format!("({})", parts.join(", "))
}

fn human_report(r: &RobustnessReport) -> String {
    match (&r.u, r.gamma_min) {
        (Some(u), Some(g)) => {
            let argmax: Vec<String> = r.argmax.iter().flatten().map(|n| n.to_string()).collect();
            format!(
                "stable, ρ = {}, u = {}, γ = {} at node(s) {}\n",
                h6(r.spectral_radius, 6),
                human_vec(u),
                h6(g, 6),
                argmax.join(", ")
            )
        }
        _ => format!("unstable, ρ = {}\n", h6(r.spectral_radius, 6)),
    }
}

fn human_verdict(v: &ChangeVerdict, local: Option<bool>) -> String {
    let status = if !v.stable_after {
        "destabilising".to_string()
    } else if v.scalable {
        "scalable".to_string()
    } else {
        "not scalable".to_string()
    };
    let mut s = format!("{}: {status}", describe(&v.change));
    if let Some(g) = v.gamma_after {
        write!(s, ", γ {} -> {}", h6(v.gamma_before, 6), h6(g, 6)).unwrap();
    }
    if let Some(r) = &v.repair {
        write!(s, ", repair a[{}] = {}", r.node, h6(r.a_new, 6)).unwrap();
    }
    if let Some(l) = local {
        write!(s, ", local test {}", if l { "passes" } else { "fails" }).unwrap();
    }
    s.push('\n');
    s
}
