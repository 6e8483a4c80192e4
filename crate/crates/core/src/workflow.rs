//! End-to-end reports assembled from the individual modules. Each report is a
//! plain serde document so the command line can emit it verbatim.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{
    delta_feasible, feasibility_angle_search, feasibility_bound, graph_connected, level_graph, level_sets, LevelEdge,
};
use crate::fejer::{filtered_distribution, success_probability, FilteredLaw};
use crate::instance::{phase_gap, GapScope, PhaseModel, ProblemInstance};
use crate::mixer::{envelope_mass, mixer_envelope, Convention, Envelope};
use crate::oracle::{dirichlet_filter_oracle, sample_shots, simulate};
use crate::planner::{Certificate, DEFAULT_ETA};
use crate::rl::{
    averaged_offpeak_bound, energy_gap, rl_filtered_distribution, rl_success_bound, Averaging, DitherWindow, RlLaw,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    /// Bounds could not be stated (phase collision or no envelope mass on
    /// the optimal set).
    Uncertifiable,
}

#[derive(Debug, Clone)]
pub struct CertifyRequest {
    pub gamma: f64,
    pub p: usize,
    /// Mixer angles of the reference stage; ignored when `envelope` is set.
    pub betas: Vec<f64>,
    pub convention: Convention,
    pub gap_scope: GapScope,
    pub epsilon: f64,
    pub eta: f64,
    pub envelope: Option<Envelope>,
}

impl CertifyRequest {
    pub fn new(gamma: f64, p: usize) -> Self {
        CertifyRequest {
            gamma,
            p,
            betas: Vec::new(),
            convention: Convention::default(),
            gap_scope: GapScope::default(),
            epsilon: 0.1,
            eta: DEFAULT_ETA,
            envelope: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyReport {
    pub status: Status,
    pub reason: Option<String>,
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub p: usize,
    pub gap_scope: GapScope,
    pub optimal_count: usize,
    pub collisions: usize,
    pub c_beta: f64,
    pub delta: f64,
    pub certificate: Option<Certificate>,
    /// Optimal mass of the operator-level filtered law.
    pub q0_exact: Option<f64>,
    pub bound_holds: Option<bool>,
}

/// Envelope entering the filter. With a feasible-only gap the envelope is
/// conditioned on `L_0`, the state the optimization stage starts from.
pub fn reference_envelope(inst: &ProblemInstance, req: &CertifyRequest) -> Result<Envelope> {
    let env = match &req.envelope {
        Some(e) => {
            if e.len() != inst.dim() {
                return Err(Error::SizeMismatch { expected: inst.dim(), found: e.len() });
            }
            e.clone()
        }
        None => mixer_envelope(inst, &Envelope::uniform(inst.dim()), &req.betas, req.convention)?,
    };
    if req.gap_scope == GapScope::AllStrings {
        return Ok(env);
    }
    let mass: f64 = inst.feasible().iter().map(|&i| env.probs()[i]).sum();
    if !(mass > 0.0) {
        return Err(Error::param("envelope has no mass on the feasible set"));
    }
    let probs = env.probs().iter().zip(inst.penalties()).map(|(&w, &t)| if t == 0 { w / mass } else { 0.0 }).collect();
    Envelope::external(probs)
}

pub fn certify(inst: &ProblemInstance, req: &CertifyRequest) -> Result<CertifyReport> {
    let pm = phase_gap(inst, req.gamma, req.gap_scope)?;
    let env = reference_envelope(inst, req)?;
    let mass = envelope_mass(&env, &pm.optimal)?;
    let mut report = CertifyReport {
        status: Status::Uncertifiable,
        reason: None,
        n: inst.n(),
        m: inst.m(),
        gamma: req.gamma,
        p: req.p,
        gap_scope: req.gap_scope,
        optimal_count: pm.optimal.len(),
        collisions: pm.collisions.len(),
        c_beta: mass.mass,
        delta: pm.delta,
        certificate: None,
        q0_exact: None,
        bound_holds: None,
    };
    if pm.has_collision() {
        report.delta = 0.0;
        report.reason = Some(format!("{} non-optimal strings share the optimal phase", pm.collisions.len()));
        return Ok(report);
    }
    if mass.zero_support {
        report.reason = Some("envelope has no mass on the optimal set".into());
        return Ok(report);
    }
    let cert = Certificate::new(req.p, mass.mass, pm.delta, req.epsilon, req.eta)?;
    let law = dirichlet_filter_oracle(&env, inst, req.gamma, req.p)?;
    let q0: f64 = pm.optimal.iter().map(|&i| law[i]).sum();
    // Rounding slack only; the inequality is exact in real arithmetic.
    let holds = q0 >= cert.q0_bound - 1e-12;
    report.status = Status::Certified;
    report.q0_exact = Some(q0);
    report.bound_holds = Some(holds);
    report.certificate = Some(cert);
    Ok(report)
}

/// Filtered law of the reference model, for CSV export.
pub fn filtered_law(inst: &ProblemInstance, req: &CertifyRequest) -> Result<(PhaseModel, FilteredLaw, f64)> {
    let pm = phase_gap(inst, req.gamma, req.gap_scope)?;
    let env = reference_envelope(inst, req)?;
    let law = filtered_distribution(&env, &pm, req.p)?;
    let q0 = success_probability(&law, &pm.optimal)?;
    Ok((pm, law, q0))
}

// --- feasibility ------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FeasibilityRequest {
    /// Penalty angle for the gap `delta_F`; defaults to `pi / t_max`.
    pub gamma: Option<f64>,
    pub search_depth: usize,
    pub budget: usize,
    pub seed: u64,
    pub convention: Convention,
    pub cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityBounds {
    pub p1: Option<f64>,
    pub p2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleReport {
    pub best_angles: BestAngles,
    #[serde(rename = "pi_F")]
    pub pi_f: f64,
    pub baseline: f64,
    pub evaluations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BestAngles {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityReport {
    pub levels: BTreeMap<u32, usize>,
    pub graph: Vec<LevelEdge>,
    pub connected: bool,
    pub gamma: f64,
    #[serde(rename = "delta_F")]
    pub delta_f: f64,
    #[serde(rename = "C_F")]
    pub c_f: f64,
    pub bounds: FeasibilityBounds,
    pub search: AngleReport,
}

pub fn feasibility_report(inst: &ProblemInstance, req: &FeasibilityRequest) -> Result<FeasibilityReport> {
    let ls = level_sets(inst);
    let graph = level_graph(&ls, inst.penalties(), inst.n(), inst.m());
    let connected = graph_connected(&graph);
    let gamma = req.gamma.unwrap_or(std::f64::consts::PI / ls.t_max.max(1) as f64);
    let df = delta_feasible(gamma, &ls)?;
    let c_f = ls.size(0) as f64 / inst.dim() as f64;
    let bound = |p: usize| -> Result<Option<f64>> {
        if c_f == 0.0 || df.collision {
            return Ok(None);
        }
        Ok(Some(feasibility_bound(p, c_f, df.delta)?.tight))
    };
    let bounds = FeasibilityBounds { p1: bound(1)?, p2: bound(2)? };
    let s = feasibility_angle_search(inst, req.search_depth, req.budget, req.seed, req.convention, req.cap)?;
    Ok(FeasibilityReport {
        levels: ls.histogram(),
        graph: graph.edges,
        connected,
        gamma,
        delta_f: df.delta,
        c_f,
        bounds,
        search: AngleReport {
            best_angles: BestAngles { gammas: s.gammas, betas: s.betas },
            pi_f: s.pi_f,
            baseline: s.baseline,
            evaluations: s.evaluations,
            seed: req.seed,
        },
    })
}

// --- dithered filtering -------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RlRequest {
    pub gamma: f64,
    pub p: usize,
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
    pub averaging: Averaging,
    pub envelope: Option<Envelope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RlReport {
    pub g: f64,
    #[serde(rename = "Mbar_exact")]
    pub mbar_exact: f64,
    #[serde(rename = "Mbar_log")]
    pub mbar_log: f64,
    pub bound: f64,
    pub x_rl: Option<f64>,
    pub c_beta: f64,
    pub success_mass: f64,
    pub success_std_error: f64,
    pub gamma: f64,
    pub p: usize,
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
    pub averaging: Averaging,
}

pub fn rl_report(inst: &ProblemInstance, req: &RlRequest) -> Result<(RlReport, RlLaw)> {
    let env = req.envelope.clone().unwrap_or_else(|| Envelope::uniform(inst.dim()));
    let optimal = inst.optimal_set()?;
    let energies: Vec<f64> = inst.energies().iter().map(|&e| e as f64).collect();
    let g = energy_gap(&energies, &optimal)?;
    let window = DitherWindow::uniform(req.half_width)?;
    let off = averaged_offpeak_bound(req.p, req.half_width, g)?;
    let c_beta = envelope_mass(&env, &optimal)?.mass;
    let rb = rl_success_bound(req.p, c_beta, off.exact_sum)?;
    let law = rl_filtered_distribution(&env, inst, req.gamma, req.p, &window, req.samples, req.seed, req.averaging)?;
    let report = RlReport {
        g,
        mbar_exact: off.exact_sum,
        mbar_log: off.log_form,
        bound: rb.bound,
        x_rl: rb.x_rl,
        c_beta,
        success_mass: law.success_mass,
        success_std_error: law.success_std_error,
        gamma: req.gamma,
        p: req.p,
        half_width: req.half_width,
        samples: req.samples,
        seed: req.seed,
        averaging: req.averaging,
    };
    Ok((report, law))
}

// --- statevector simulation ---------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateReport {
    pub success_probability: f64,
    pub feasibility_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn simulate_report(
    inst: &ProblemInstance,
    gammas: &[f64],
    betas: &[f64],
    convention: Convention,
    shots: Option<u64>,
    seed: u64,
    cap: usize,
) -> Result<SimulateReport> {
    let state = simulate(inst, gammas, betas, convention, cap)?;
    let optimal = inst.optimal_set()?;
    let feasible = inst.feasible();
    let success_probability = state.mass_on(&optimal)?;
    let feasibility_probability = state.mass_on(&feasible)?;
    let counts = match shots {
        Some(s) => {
            let sample = sample_shots(&state.probabilities(), s, seed, &optimal)?;
            let map = sample
                .counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (inst.string(i).label(), c))
                .collect();
            Some(map)
        }
        None => None,
    };
    Ok(SimulateReport { success_probability, feasibility_probability, counts, shots, seed: shots.map(|_| seed) })
}
