//! Block one-hot problem instances, penalty spectra and the wrapped-phase model.
//!
//! Basis strings of `[n]^m` are indexed row-major with block 0 varying
//! fastest: `index(z) = sum_b z_b * n^b`. Every dense array in the crate
//! uses this order.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: usize = 4096;

/// Integrality tolerance applied when normalizing energies to the lattice.
const LATTICE_TOL: f64 = 1e-9;

/// Relative tolerance under which a reduced phase is snapped to exactly zero.
const WRAP_SNAP: f64 = 1e-12;

/// Number of basis strings `n^m`, or `CapExceeded` if it exceeds `cap`.
pub fn basis_size(n: usize, m: usize, cap: usize) -> Result<usize> {
    let size = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(size as usize)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockString(Vec<usize>);

impl BlockString {
    pub fn new(symbols: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| s >= n) {
            return Err(Error::param(format!("symbol {bad} out of range for n = {n}")));
        }
        Ok(BlockString(symbols))
    }

    pub fn from_index(mut index: usize, n: usize, m: usize) -> Self {
        let mut symbols = Vec::with_capacity(m);
        for _ in 0..m {
            symbols.push(index % n);
            index /= n;
        }
        BlockString(symbols)
    }

    pub fn index(&self, n: usize) -> usize {
        self.0.iter().rev().fold(0, |acc, &s| acc * n + s)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn blocks(&self) -> usize {
        self.0.len()
    }

    /// Occupation numbers `N_k(z) = #{b : z_b = k}` for `k in [0, n)`.
    pub fn counts(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0; n];
        for &s in &self.0 {
            counts[s] += 1;
        }
        counts
    }

    pub(crate) fn symbols_mut(&mut self) -> &mut [usize] {
        &mut self.0
    }

    /// Compact label: digits concatenated when every symbol is a single digit,
    /// dash-separated otherwise.
    pub fn label(&self) -> String {
        if self.0.iter().all(|&s| s < 10) {
            self.0.iter().map(|&s| char::from(b'0' + s as u8)).collect()
        } else {
            self.0.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-")
        }
    }
}

impl fmt::Display for BlockString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Column-collision penalty `sum_k (N_k(z) - 1)^2`.
pub fn column_collision_penalty(symbols: &[usize], n: usize) -> u32 {
    let mut counts = vec![0i64; n];
    for &s in symbols {
        counts[s] += 1;
    }
    counts.iter().map(|&c| ((c - 1) * (c - 1)) as u32).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    n: usize,
    m: usize,
    energy: Vec<i64>,
    penalty: Vec<u32>,
    lattice_scale: f64,
}

impl ProblemInstance {
    /// Builds an instance from lattice energies and an explicit penalty table.
    pub fn new(
        n: usize,
        m: usize,
        energy: Vec<i64>,
        penalty: Vec<u32>,
        lattice_scale: f64,
        cap: usize,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::param("n and m must be at least 1"));
        }
        if !(lattice_scale > 0.0 && lattice_scale.is_finite()) {
            return Err(Error::param("lattice_scale must be positive and finite"));
        }
        let dim = basis_size(n, m, cap)?;
        for table in [energy.len(), penalty.len()] {
            if table != dim {
                return Err(Error::SizeMismatch { expected: dim, found: table });
            }
        }
        Ok(ProblemInstance { n, m, energy, penalty, lattice_scale })
    }

    /// Lattice energies with the default penalty: column collision when
    /// `m == n`, otherwise every string is feasible.
    pub fn with_default_penalty(n: usize, m: usize, energy: Vec<i64>, cap: usize) -> Result<Self> {
        let dim = basis_size(n, m, cap)?;
        let penalty = default_penalty(n, m, dim);
        Self::new(n, m, energy, penalty, 1.0, cap)
    }

    /// Assignment generator: `E(z) = sum_b cost[b][z_b]`.
    pub fn assignment(cost: &[Vec<i64>], cap: usize) -> Result<Self> {
        let m = cost.len();
        let n = cost.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::Document("assignment cost matrix is empty".into()));
        }
        if let Some(row) = cost.iter().find(|row| row.len() != n) {
            return Err(Error::SizeMismatch { expected: n, found: row.len() });
        }
        let dim = basis_size(n, m, cap)?;
        let energy = (0..dim)
            .map(|idx| BlockString::from_index(idx, n, m).symbols().iter().enumerate().map(|(b, &s)| cost[b][s]).sum())
            .collect();
        Self::with_default_penalty(n, m, energy, cap)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.energy.len()
    }

    pub fn lattice_scale(&self) -> f64 {
        self.lattice_scale
    }

    pub fn energies(&self) -> &[i64] {
        &self.energy
    }

    pub fn penalties(&self) -> &[u32] {
        &self.penalty
    }

    pub fn energy(&self, z: &BlockString) -> i64 {
        self.energy[z.index(self.n)]
    }

    pub fn string(&self, index: usize) -> BlockString {
        BlockString::from_index(index, self.n, self.m)
    }

    pub fn t_max(&self) -> u32 {
        self.penalty.iter().copied().max().unwrap_or(0)
    }

    /// Indices of the feasible set `L_0`.
    pub fn feasible(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.penalty[i] == 0).collect()
    }

    /// `E* = min_{z in L_0} E(z)`.
    pub fn e_star(&self) -> Option<i64> {
        self.feasible().into_iter().map(|i| self.energy[i]).min()
    }

    /// Indices of the optimal set: feasible strings attaining `E*`.
    pub fn optimal_set(&self) -> Result<Vec<usize>> {
        let e_star = self.e_star().ok_or(Error::EmptyOptimalSet)?;
        Ok((0..self.dim()).filter(|&i| self.penalty[i] == 0 && self.energy[i] == e_star).collect())
    }

    /// Physical energies `Lambda_C * E(z)`.
    pub fn physical_energies(&self) -> Vec<f64> {
        self.energy.iter().map(|&e| e as f64 * self.lattice_scale).collect()
    }

    /// Same instance with the energy table replaced by the penalty table, the
    /// setting used for feasibility-stage filtering.
    pub fn penalty_as_cost(&self) -> ProblemInstance {
        ProblemInstance { energy: self.penalty.iter().map(|&t| t as i64).collect(), ..self.clone() }
    }
}

fn default_penalty(n: usize, m: usize, dim: usize) -> Vec<u32> {
    if n == m {
        (0..dim).map(|i| column_collision_penalty(BlockString::from_index(i, n, m).symbols(), n)).collect()
    } else {
        vec![0; dim]
    }
}

/// `H_pen(z)` as tabulated on the instance.
pub fn penalty_value(inst: &ProblemInstance, z: &BlockString) -> u32 {
    inst.penalty[z.index(inst.n)]
}

// --- instance documents ---------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_scale: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Assignment { cost: Vec<Vec<i64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PenaltySpec {
    /// `"column_collision"` or `"none"`.
    Named(String),
    Table(Vec<i64>),
}

/// Parses a JSON instance document and materializes it.
pub fn load_instance(json: &str, cap: usize) -> Result<ProblemInstance> {
    let doc: InstanceDocument = serde_json::from_str(json)?;
    instance_from_document(&doc, cap)
}

pub fn instance_from_document(doc: &InstanceDocument, cap: usize) -> Result<ProblemInstance> {
    let (n, m) = (doc.n, doc.m);
    if n == 0 || m == 0 {
        return Err(Error::Document("n and m must be at least 1".into()));
    }
    let dim = basis_size(n, m, cap)?;
    let scale = doc.lattice_scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Document("lattice_scale must be positive".into()));
    }

    let energy: Vec<i64> = match (&doc.energy, &doc.generator) {
        (Some(_), Some(_)) => return Err(Error::Document("give either `energy` or `generator`, not both".into())),
        (None, None) => return Err(Error::Document("missing `energy` or `generator`".into())),
        (Some(raw), None) => {
            if raw.len() != dim {
                return Err(Error::SizeMismatch { expected: dim, found: raw.len() });
            }
            raw.iter()
                .enumerate()
                .map(|(index, &value)| {
                    let lattice = value / scale;
                    let rounded = lattice.round();
                    if !lattice.is_finite() || (lattice - rounded).abs() > LATTICE_TOL {
                        Err(Error::NonIntegralEnergy { index, value: lattice })
                    } else {
                        Ok(rounded as i64)
                    }
                })
                .collect::<Result<_>>()?
        }
        (None, Some(Generator::Assignment { cost })) => {
            if cost.len() != m {
                return Err(Error::SizeMismatch { expected: m, found: cost.len() });
            }
            ProblemInstance::assignment(cost, cap)?.energy
        }
    };

    let penalty = match &doc.penalty {
        None => default_penalty(n, m, dim),
        Some(PenaltySpec::Named(name)) => match name.as_str() {
            "column_collision" => {
                (0..dim).map(|i| column_collision_penalty(BlockString::from_index(i, n, m).symbols(), n)).collect()
            }
            "none" => vec![0; dim],
            other => return Err(Error::Document(format!("unknown penalty `{other}`"))),
        },
        Some(PenaltySpec::Table(table)) => {
            if table.len() != dim {
                return Err(Error::SizeMismatch { expected: dim, found: table.len() });
            }
            table
                .iter()
                .map(|&t| u32::try_from(t).map_err(|_| Error::Document(format!("negative penalty {t}"))))
                .collect::<Result<_>>()?
        }
    };

    ProblemInstance::new(n, m, energy, penalty, scale, cap)
}

// --- wrapped phases -------------------------------------------------------

/// Reduces an angle to `(-pi, pi]`, snapping to exactly zero at lattice
/// multiples of `2 pi` (relative tolerance 1e-12).
pub fn wrap_angle(x: f64) -> f64 {
    let mut r = x - TAU * (x / TAU).round();
    if r.abs() <= WRAP_SNAP * x.abs().max(1.0) {
        return 0.0;
    }
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Circular distance `min_k |a - b + 2 pi k|`, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// `gamma * (E - E*)` reduced to `(-pi, pi]`.
pub fn wrapped_phase(gamma: f64, energy: i64, e_star: i64) -> f64 {
    wrap_angle(gamma * (energy - e_star) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapScope {
    #[default]
    AllStrings,
    FeasibleOnly,
}

#[derive(Debug, Clone)]
pub struct PhaseModel {
    pub gamma: f64,
    /// `theta(z) = gamma * E(z)` wrapped to `(-pi, pi]`.
    pub theta: Vec<f64>,
    /// `theta(z) - theta*` wrapped, computed from the exact integer offset.
    pub offset: Vec<f64>,
    pub theta_star: f64,
    pub delta: f64,
    pub gap_scope: GapScope,
    pub optimal: Vec<usize>,
    /// Non-optimal strings in scope whose phase coincides with `theta*`.
    pub collisions: Vec<usize>,
    /// Every string in scope is optimal; `delta` is set to `pi` by convention.
    pub degenerate: bool,
}

impl PhaseModel {
    pub fn has_collision(&self) -> bool {
        !self.collisions.is_empty()
    }
}

/// Wrapped phases and the phase gap `delta` around the optimal phase.
pub fn phase_gap(inst: &ProblemInstance, gamma: f64, scope: GapScope) -> Result<PhaseModel> {
    let optimal = inst.optimal_set()?;
    let e_star = inst.energy[optimal[0]];
    let theta: Vec<f64> = inst.energy.iter().map(|&e| wrap_angle(gamma * e as f64)).collect();
    let offset: Vec<f64> = inst.energy.iter().map(|&e| wrapped_phase(gamma, e, e_star)).collect();

    let in_scope = |i: usize| match scope {
        GapScope::AllStrings => true,
        GapScope::FeasibleOnly => inst.penalty[i] == 0,
    };
    let mut is_optimal = vec![false; inst.dim()];
    for &i in &optimal {
        is_optimal[i] = true;
    }

    let mut delta = f64::INFINITY;
    let mut collisions = Vec::new();
    for i in (0..inst.dim()).filter(|&i| in_scope(i) && !is_optimal[i]) {
        let d = offset[i].abs();
        if d == 0.0 {
            collisions.push(i);
        }
        delta = delta.min(d);
    }
    let degenerate = delta.is_infinite();
    if degenerate {
        delta = PI;
    }

    Ok(PhaseModel {
        gamma,
        theta,
        offset,
        theta_star: wrap_angle(gamma * e_star as f64),
        delta,
        gap_scope: scope,
        optimal,
        collisions,
        degenerate,
    })
}
