//! `ceqaoa`: certification workflows on the command line.
//!
//! Every command writes exactly one document, to `--output` (atomically, via
//! a temp file in the target directory) or to stdout.

mod output;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ceqaoa_core::instance::{load_instance, DEFAULT_ENUMERATION_CAP};
use ceqaoa_core::mixer::{mixer_envelope, Convention, Envelope};
use ceqaoa_core::planner::{cmin_curve, gamma_safe, order_reduction, Certificate, OrderReduction, DEFAULT_ETA};
use ceqaoa_core::rl::Averaging;
use ceqaoa_core::workflow::{
    certify, feasibility_report, filtered_law, rl_report, simulate_report, CertifyRequest, FeasibilityRequest,
    RlRequest, Status,
};
use ceqaoa_core::{GapScope, ProblemInstance};

use output::{emit, emit_json, Failure};

#[derive(Parser, Debug)]
#[command(name = "ceqaoa", version, about = "Fejér-filter certificates for constraint-enhanced QAOA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certificate for an instance: envelope mass, phase gap, bound and exact q0.
    Certify(CertifyArgs),
    /// Certificate from (p, C, delta) alone, with optional order reduction.
    Plan(PlanArgs),
    /// Mixer envelope of the dephased reference stage.
    Envelope(EnvelopeArgs),
    /// Penalty level sets, level graph, feasibility bounds and angle search.
    Feasibility(FeasibilityArgs),
    /// Dithered-angle filtering with an energy gap instead of a phase gap.
    Rl(RlArgs),
    /// Coherent statevector run with optional shot sampling.
    Simulate(SimulateArgs),
    /// C_min(delta) rows for plotting.
    Curves(CurvesArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Interpret every angle argument in degrees.
    #[arg(long)]
    degrees: bool,
    /// Largest n^m the enumerating commands accept.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
}

impl Common {
    fn angle(&self, x: f64) -> f64 {
        if self.degrees {
            x.to_radians()
        } else {
            x
        }
    }

    fn angles(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.angle(x)).collect()
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Default)]
enum ConventionArg {
    #[default]
    Adjacency,
    Normalized,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Adjacency => Convention::Adjacency,
            ConventionArg::Normalized => Convention::Normalized,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Default)]
enum ScopeArg {
    #[default]
    All,
    Feasible,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    instance: PathBuf,
    /// Base angle of the filter.
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    /// Filter order.
    #[arg(short, long)]
    p: usize,
    /// Comma-separated mixer angles of the reference stage.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    betas: Vec<f64>,
    #[arg(long, value_enum, default_value_t)]
    convention: ConventionArg,
    /// Strings entering the phase gap.
    #[arg(long, value_enum, default_value_t)]
    gap_scope: ScopeArg,
    /// Envelope file (JSON array or `string,probability` CSV); overrides --betas.
    #[arg(long)]
    envelope: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Also write the filtered law as CSV.
    #[arg(long)]
    law: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(short, long)]
    p: usize,
    #[arg(long = "c-beta")]
    c_beta: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    /// Spectral range proxy; reports the wrap-safe base angle.
    #[arg(long)]
    range: Option<f64>,
    /// Reduced order p' for the order-reduction estimate (needs --c-prime).
    #[arg(long, requires = "c_prime")]
    reduce_to: Option<usize>,
    #[arg(long)]
    c_prime: Option<f64>,
}

#[derive(Args, Debug)]
struct EnvelopeArgs {
    #[command(flatten)]
    common: Common,
    /// Instance providing n and m.
    #[arg(long, conflicts_with_all = ["n", "m"])]
    instance: Option<PathBuf>,
    #[arg(short, long, requires = "m")]
    n: Option<usize>,
    #[arg(short, long, requires = "n")]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    betas: Vec<f64>,
    #[arg(long, value_enum, default_value_t)]
    convention: ConventionArg,
    /// Initial diagonal; uniform when omitted.
    #[arg(long)]
    initial: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, Default)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct FeasibilityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    instance: PathBuf,
    /// Penalty angle; defaults to pi / t_max.
    #[arg(long)]
    gamma: Option<f64>,
    /// Layers used by the angle search.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Objective evaluations for the angle search.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    convention: ConventionArg,
}

#[derive(Args, Debug)]
struct RlArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(short, long)]
    p: usize,
    /// Half-width of the uniform dither window.
    #[arg(long)]
    half_width: f64,
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Normalize after averaging instead of per draw (no bound is claimed).
    #[arg(long)]
    pooled: bool,
    #[arg(long)]
    envelope: Option<PathBuf>,
    /// CSV destination for the averaged law.
    #[arg(long)]
    law: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gammas: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    betas: Vec<f64>,
    #[arg(long, value_enum, default_value_t)]
    convention: ConventionArg,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    #[command(flatten)]
    common: Common,
    /// Explicit gap grid (comma-separated).
    #[arg(long, value_delimiter = ',', conflicts_with = "delta_points")]
    deltas: Option<Vec<f64>>,
    /// Uniform grid k pi / N, k = 1..N.
    #[arg(long)]
    delta_points: Option<usize>,
    /// Comma-separated filter orders.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    ps: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ceqaoa: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_instance(path: &Path, cap: usize) -> Result<ProblemInstance, Failure> {
    let text = output::read(path)?;
    Ok(load_instance(&text, cap)?)
}

fn read_envelope(path: &Path, n: usize, m: usize) -> Result<Envelope, Failure> {
    let text = output::read(path)?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('[');
    Ok(if is_json { Envelope::from_json(&text)? } else { Envelope::from_csv(&text, n, m)? })
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Certify(a) => cmd_certify(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Envelope(a) => cmd_envelope(a),
        Command::Feasibility(a) => cmd_feasibility(a),
        Command::Rl(a) => cmd_rl(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Curves(a) => cmd_curves(a),
    }
}

fn cmd_certify(a: CertifyArgs) -> Result<(), Failure> {
    let c = &a.common;
    let inst = read_instance(&a.instance, c.cap)?;
    let envelope = a.envelope.as_ref().map(|p| read_envelope(p, inst.n(), inst.m())).transpose()?;
    let req = CertifyRequest {
        gamma: c.angle(a.gamma),
        p: a.p,
        betas: c.angles(&a.betas),
        convention: a.convention.into(),
        gap_scope: match a.gap_scope {
            ScopeArg::All => GapScope::AllStrings,
            ScopeArg::Feasible => GapScope::FeasibleOnly,
        },
        epsilon: a.epsilon,
        eta: a.eta,
        envelope,
    };
    let report = certify(&inst, &req)?;
    if let (Some(path), Status::Certified) = (&a.law, report.status) {
        let (pm, law, _) = filtered_law(&inst, &req)?;
        emit(Some(path), &law.to_csv(&pm, inst.n(), inst.m())?)?;
    }
    emit_json(c.output.as_ref(), &report)?;
    match (report.status, report.bound_holds) {
        (Status::Uncertifiable, _) => Err(Failure::new(3, report.reason.unwrap_or_default())),
        (_, Some(false)) => Err(Failure::new(1, "exact q0 fell below the certified bound")),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct PlanReport {
    certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_safe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order_reduction: Option<OrderReduction>,
}

fn cmd_plan(a: PlanArgs) -> Result<(), Failure> {
    let c = &a.common;
    let certificate = Certificate::new(a.p, a.c_beta, c.angle(a.delta), a.epsilon, a.eta)?;
    let gamma_safe = a.range.map(|r| gamma_safe(a.p, r)).transpose()?;
    let order_reduction = match (a.reduce_to, a.c_prime) {
        (Some(pp), Some(cp)) => Some(order_reduction(certificate.x, a.p, pp, cp, a.epsilon)?),
        _ => None,
    };
    emit_json(c.output.as_ref(), &PlanReport { certificate, gamma_safe, order_reduction })
}

fn cmd_envelope(a: EnvelopeArgs) -> Result<(), Failure> {
    let c = &a.common;
    let inst = match (&a.instance, a.n, a.m) {
        (Some(path), _, _) => read_instance(path, c.cap)?,
        (None, Some(n), Some(m)) => {
            let dim = ceqaoa_core::instance::basis_size(n, m, c.cap)?;
            ProblemInstance::with_default_penalty(n, m, vec![0; dim], c.cap)?
        }
        _ => return Err(Failure::new(2, "give --instance or both --n and --m")),
    };
    let v0 = match &a.initial {
        Some(path) => read_envelope(path, inst.n(), inst.m())?,
        None => Envelope::uniform(inst.dim()),
    };
    let env = mixer_envelope(&inst, &v0, &c.angles(&a.betas), a.convention.into())?;
    let text = match a.format {
        Format::Csv => env.to_csv(inst.n(), inst.m())?,
        Format::Json => env.to_json() + "\n",
    };
    emit(c.output.as_ref(), &text)
}

fn cmd_feasibility(a: FeasibilityArgs) -> Result<(), Failure> {
    let c = &a.common;
    let inst = read_instance(&a.instance, c.cap)?;
    let req = FeasibilityRequest {
        gamma: a.gamma.map(|g| c.angle(g)),
        search_depth: a.depth,
        budget: a.budget,
        seed: a.seed,
        convention: a.convention.into(),
        cap: c.cap,
    };
    emit_json(c.output.as_ref(), &feasibility_report(&inst, &req)?)
}

fn cmd_rl(a: RlArgs) -> Result<(), Failure> {
    let c = &a.common;
    let inst = read_instance(&a.instance, c.cap)?;
    let envelope = a.envelope.as_ref().map(|p| read_envelope(p, inst.n(), inst.m())).transpose()?;
    let req = RlRequest {
        gamma: c.angle(a.gamma),
        p: a.p,
        half_width: c.angle(a.half_width),
        samples: a.samples,
        seed: a.seed,
        averaging: if a.pooled { Averaging::Pooled } else { Averaging::PerDraw },
        envelope,
    };
    let (report, law) = rl_report(&inst, &req)?;
    if let Some(path) = &a.law {
        emit(Some(path), &output::rl_law_csv(&inst, &law)?)?;
    }
    emit_json(c.output.as_ref(), &report)
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let c = &a.common;
    let inst = read_instance(&a.instance, c.cap)?;
    let report =
        simulate_report(&inst, &c.angles(&a.gammas), &c.angles(&a.betas), a.convention.into(), a.shots, a.seed, c.cap)?;
    emit_json(c.output.as_ref(), &report)
}

fn cmd_curves(a: CurvesArgs) -> Result<(), Failure> {
    let c = &a.common;
    let mut deltas = match (&a.deltas, a.delta_points) {
        (Some(d), _) => c.angles(d),
        (None, Some(k)) => (1..=k).map(|i| PI * i as f64 / k as f64).collect(),
        (None, None) => (1..=32).map(|i| PI * i as f64 / 32.0).collect(),
    };
    if deltas.is_empty() || a.ps.is_empty() {
        return Err(Failure::new(2, "empty curve grid"));
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut ps = a.ps.clone();
    ps.sort_unstable();
    ps.dedup();
    let mut rows = Vec::with_capacity(ps.len() * deltas.len());
    for &p in &ps {
        for (&d, cm) in deltas.iter().zip(cmin_curve(&deltas, a.epsilon, p)?) {
            rows.push([d.to_string(), p.to_string(), a.epsilon.to_string(), cm.to_string()]);
        }
    }
    emit(c.output.as_ref(), &output::csv_table(&["delta", "p", "epsilon", "c_min"], &rows))
}
