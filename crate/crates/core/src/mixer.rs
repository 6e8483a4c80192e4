//! Block-XY transition kernels and mixer-envelope propagation.
//!
//! A single block evolves under `exp(-i beta A(K_n))`; the entrywise
//! modulus-square of that unitary is a doubly stochastic kernel described by
//! two scalars. The global kernel is its `m`-fold tensor power, applied here
//! one block axis at a time so the `n^m x n^m` matrix is never formed.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::instance::{BlockString, ProblemInstance};

/// Distance to `(2 pi / n) Z` below which an angle is treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-9;

/// Scaling of the block mixer generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Generator `A(K_n)`, the complete-graph adjacency matrix.
    #[default]
    Adjacency,
    /// Generator `A(K_n) / n`.
    Normalized,
}

impl Convention {
    /// Angle to feed into the adjacency-convention formulas.
    pub fn effective_beta(self, n: usize, beta: f64) -> f64 {
        match self {
            Convention::Adjacency => beta,
            Convention::Normalized => beta / n as f64,
        }
    }
}

/// Single-block kernel: `diag` on the diagonal, `offdiag` everywhere else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionKernel {
    pub n: usize,
    pub diag: f64,
    pub offdiag: f64,
    /// `None` for the angle-averaged kernel.
    pub beta: Option<f64>,
}

impl TransitionKernel {
    pub fn identity(n: usize) -> Self {
        TransitionKernel { n, diag: 1.0, offdiag: 0.0, beta: None }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag
        } else {
            self.offdiag
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.entry(i, j)).collect()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.diag == 1.0 && self.offdiag == 0.0
    }

    /// Largest deviation of any row or column sum from 1.
    pub fn stochasticity_error(&self) -> f64 {
        (self.diag + (self.n as f64 - 1.0) * self.offdiag - 1.0).abs()
    }
}

/// Distance from `beta` to the nearest point of `(2 pi / n) Z`.
pub fn resonance_distance(n: usize, beta: f64) -> f64 {
    let period = TAU / n as f64;
    let r = beta.rem_euclid(period);
    r.min(period - r)
}

/// Closed-form single-block kernel for the adjacency convention.
pub fn single_block_kernel(n: usize, beta: f64) -> TransitionKernel {
    if n <= 1 || resonance_distance(n, beta) <= RESONANCE_TOL {
        return TransitionKernel { beta: Some(beta), ..TransitionKernel::identity(n.max(1)) };
    }
    let nf = n as f64;
    let s2 = (nf * beta / 2.0).sin().powi(2);
    TransitionKernel {
        n,
        diag: 1.0 - 4.0 * (nf - 1.0) / (nf * nf) * s2,
        offdiag: 4.0 / (nf * nf) * s2,
        beta: Some(beta),
    }
}

pub fn single_block_kernel_with(n: usize, beta: f64, convention: Convention) -> TransitionKernel {
    let mut k = single_block_kernel(n, convention.effective_beta(n, beta));
    k.beta = Some(beta);
    k
}

/// Kernel averaged over `beta` uniform on `[0, 2 pi)`.
pub fn averaged_block_kernel(n: usize) -> Result<TransitionKernel> {
    if n < 2 {
        return Err(Error::param("averaged kernel needs n >= 2"));
    }
    let nf = n as f64;
    Ok(TransitionKernel { n, diag: 1.0 - 2.0 / nf + 2.0 / (nf * nf), offdiag: 2.0 / (nf * nf), beta: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitivity {
    pub primitive: bool,
    pub resonance_distance: f64,
}

/// Whether the single-block kernel has strictly positive entries.
pub fn is_primitive(n: usize, beta: f64) -> Result<Primitivity> {
    if n < 2 {
        return Err(Error::param("primitivity needs n >= 2"));
    }
    let d = resonance_distance(n, beta);
    Ok(Primitivity { primitive: d > RESONANCE_TOL, resonance_distance: d })
}

/// Modulus of the second-largest eigenvalue. The kernel is
/// `(diag - offdiag) I + offdiag J`, with spectrum `{1, diag - offdiag}`.
pub fn second_eigenvalue(kernel: &TransitionKernel) -> f64 {
    if kernel.n < 2 {
        return 0.0;
    }
    (kernel.diag - kernel.offdiag).abs()
}

// --- envelopes ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    UniformInitial,
    ExternalDiagonal,
}

/// Probability distribution over `[n]^m` in canonical string order.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    probs: Vec<f64>,
    provenance: Provenance,
}

impl Envelope {
    pub fn uniform(dim: usize) -> Self {
        Envelope { probs: vec![1.0 / dim as f64; dim], provenance: Provenance::UniformInitial }
    }

    pub fn point_mass(dim: usize, index: usize) -> Self {
        let mut probs = vec![0.0; dim];
        probs[index] = 1.0;
        Envelope { probs, provenance: Provenance::ExternalDiagonal }
    }

    /// Validates an externally supplied diagonal.
    pub fn external(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("envelope is empty"));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::param(format!("envelope entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param(format!("envelope sums to {total}, expected 1")));
        }
        Ok(Envelope { probs, provenance: Provenance::ExternalDiagonal })
    }

    pub(crate) fn from_parts(probs: Vec<f64>, provenance: Provenance) -> Self {
        Envelope { probs, provenance }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.probs).expect("f64 vector serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::external(serde_json::from_str(json)?)
    }

    /// CSV with header `string,probability`.
    pub fn to_csv(&self, n: usize, m: usize) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        w.write_record(["string", "probability"])?;
        for (i, p) in self.probs.iter().enumerate() {
            w.write_record([BlockString::from_index(i, n, m).label(), p.to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
    }

    /// Reads the CSV written by [`Envelope::to_csv`]; rows may be in any order.
    pub fn from_csv(text: &str, n: usize, m: usize) -> Result<Self> {
        let dim = n.pow(m as u32);
        let mut probs = vec![f64::NAN; dim];
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        for rec in rdr.records() {
            let rec = rec?;
            let label = rec.get(0).unwrap_or_default();
            let symbols = parse_label(label, n)?;
            if symbols.len() != m {
                return Err(Error::Document(format!("string `{label}` has wrong length")));
            }
            let idx = BlockString::new(symbols, n)?.index(n);
            let p: f64 = rec
                .get(1)
                .unwrap_or_default()
                .trim()
                .parse()
                .map_err(|_| Error::Document(format!("bad probability in row `{label}`")))?;
            probs[idx] = p;
        }
        if probs.iter().any(|p| p.is_nan()) {
            return Err(Error::Document("envelope CSV does not cover every string".into()));
        }
        Self::external(probs)
    }
}

fn parse_label(label: &str, n: usize) -> Result<Vec<usize>> {
    let bad = || Error::Document(format!("bad string label `{label}`"));
    if label.contains('-') || n > 10 {
        label.split('-').map(|s| s.parse().map_err(|_| bad())).collect()
    } else {
        label.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect()
    }
}

/// Applies `kernel^{(x) m}` to `env` by contracting one block axis at a time.
pub fn apply_block_kernel(kernel: &TransitionKernel, env: &Envelope, m: usize) -> Result<Envelope> {
    apply_block_kernel_with(Exec::default(), kernel, env, m)
}

pub fn apply_block_kernel_with(exec: Exec, kernel: &TransitionKernel, env: &Envelope, m: usize) -> Result<Envelope> {
    let n = kernel.n;
    let dim = n.pow(m as u32);
    if env.len() != dim {
        return Err(Error::SizeMismatch { expected: dim, found: env.len() });
    }
    if kernel.is_identity() {
        return Ok(env.clone());
    }
    let (diag, off) = (kernel.diag, kernel.offdiag);
    let mut cur = env.probs.clone();
    let mut stride = 1;
    for _ in 0..m {
        let src = &cur;
        // out(z) = off * sum_j v(z with z_b = j) + (diag - off) * v(z)
        let next = exec.map_indexed(dim, |idx| {
            let digit = (idx / stride) % n;
            let base = idx - digit * stride;
            let fiber: f64 = (0..n).map(|j| src[base + j * stride]).sum();
            off * fiber + (diag - off) * src[idx]
        });
        cur = next;
        stride *= n;
    }
    Ok(Envelope::from_parts(cur, env.provenance))
}

/// `W_p = M(beta_p) ... M(beta_1) v0`.
pub fn mixer_envelope(
    inst: &ProblemInstance,
    v0: &Envelope,
    betas: &[f64],
    convention: Convention,
) -> Result<Envelope> {
    mixer_envelope_with(Exec::default(), inst.n(), inst.m(), v0, betas, convention)
}

pub fn mixer_envelope_with(
    exec: Exec,
    n: usize,
    m: usize,
    v0: &Envelope,
    betas: &[f64],
    convention: Convention,
) -> Result<Envelope> {
    let dim = n.pow(m as u32);
    if v0.len() != dim {
        return Err(Error::SizeMismatch { expected: dim, found: v0.len() });
    }
    let mut env = v0.clone();
    for &beta in betas {
        let k = single_block_kernel_with(n, beta, convention);
        env = apply_block_kernel_with(exec, &k, &env, m)?;
    }
    Ok(env)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeMass {
    pub mass: f64,
    /// The subset misses the support of the envelope entirely.
    pub zero_support: bool,
}

/// `C = sum_{z in subset} env(z)`.
pub fn envelope_mass(env: &Envelope, subset: &[usize]) -> Result<EnvelopeMass> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut mass = 0.0;
    for &i in subset {
        let p = *env.probs.get(i).ok_or(Error::SizeMismatch { expected: env.len(), found: i + 1 })?;
        mass += p;
    }
    Ok(EnvelopeMass { mass, zero_support: mass == 0.0 })
}
