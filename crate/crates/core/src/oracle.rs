//! Brute-force ground truth on the encoded space `[n]^m`.
//!
//! The statevector simulator applies cost phases and the block mixer
//! directly to amplitudes; the mixer uses the rank-one closed form
//! `exp(-i beta A(K_n)) = e^{i beta} (I + (e^{-i beta n} - 1) J / n)`.
//! Dense matrix exponentials (scaling and squaring) and adaptive quadrature
//! are kept here for validating the closed forms elsewhere in the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fejer::subset_mass;
use crate::instance::{basis_size, ProblemInstance};
use crate::mixer::{Convention, Envelope, Provenance};

/// Seeded generator shared by every stochastic routine in the crate.
///
/// ChaCha8 output is specified independently of platform, and distinct
/// `stream` values give non-overlapping sequences under one seed. Parallel
/// restarts and Monte Carlo draws use `stream = draw index`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Amplitudes over `[n]^m` in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedState {
    pub n: usize,
    pub m: usize,
    pub amplitudes: Vec<Complex64>,
}

impl EncodedState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `||Pi_S psi||^2` for a set of basis indices.
    pub fn mass_on(&self, subset: &[usize]) -> Result<f64> {
        subset_mass(&self.probabilities(), subset)
    }
}

/// Uniform one-hot product: every amplitude `n^{-m/2}`.
pub fn initial_state(n: usize, m: usize, cap: usize) -> Result<EncodedState> {
    let dim = basis_size(n, m, cap)?;
    let amp = Complex64::new((dim as f64).recip().sqrt(), 0.0);
    Ok(EncodedState { n, m, amplitudes: vec![amp; dim] })
}

/// Multiplies amplitude `z` by `e^{-i gamma E(z)}`.
pub fn apply_cost(state: &mut EncodedState, inst: &ProblemInstance, gamma: f64) -> Result<()> {
    let energies: Vec<f64> = inst.energies().iter().map(|&e| e as f64).collect();
    apply_phases(state, &energies, gamma)
}

pub fn apply_phases(state: &mut EncodedState, energies: &[f64], gamma: f64) -> Result<()> {
    if energies.len() != state.amplitudes.len() {
        return Err(Error::SizeMismatch { expected: state.amplitudes.len(), found: energies.len() });
    }
    for (a, &e) in state.amplitudes.iter_mut().zip(energies) {
        *a *= Complex64::from_polar(1.0, -gamma * e);
    }
    Ok(())
}

/// Applies the block mixer `exp(-i beta H)` to every block.
pub fn apply_mixer(state: &mut EncodedState, beta: f64, convention: Convention) {
    apply_mixer_with(Exec::default(), state, beta, convention)
}

pub fn apply_mixer_with(exec: Exec, state: &mut EncodedState, beta: f64, convention: Convention) {
    let (n, m) = (state.n, state.m);
    let b = convention.effective_beta(n, beta);
    let global = Complex64::from_polar(1.0, b);
    let c = (Complex64::from_polar(1.0, -b * n as f64) - 1.0) / n as f64;
    let dim = state.amplitudes.len();
    let mut stride = 1;
    for _ in 0..m {
        let src = &state.amplitudes;
        let next = exec.map_indexed(dim, |idx| {
            let digit = (idx / stride) % n;
            let base = idx - digit * stride;
            let fiber: Complex64 = (0..n).map(|j| src[base + j * stride]).sum();
            global * (src[idx] + c * fiber)
        });
        state.amplitudes = next;
        stride *= n;
    }
}

/// `prod_r U_M(beta_r) U_C(gamma_r) |s0>`.
pub fn simulate(
    inst: &ProblemInstance,
    gammas: &[f64],
    betas: &[f64],
    convention: Convention,
    cap: usize,
) -> Result<EncodedState> {
    let energies: Vec<f64> = inst.energies().iter().map(|&e| e as f64).collect();
    simulate_energies(inst.n(), inst.m(), &energies, gammas, betas, convention, cap)
}

pub fn simulate_energies(
    n: usize,
    m: usize,
    energies: &[f64],
    gammas: &[f64],
    betas: &[f64],
    convention: Convention,
    cap: usize,
) -> Result<EncodedState> {
    if gammas.len() != betas.len() {
        return Err(Error::param(format!(
            "schedule length mismatch: {} gammas vs {} betas",
            gammas.len(),
            betas.len()
        )));
    }
    let mut state = initial_state(n, m, cap)?;
    for (&g, &b) in gammas.iter().zip(betas) {
        apply_phases(&mut state, energies, g)?;
        apply_mixer(&mut state, b, convention);
    }
    Ok(state)
}

// --- dense references -----------------------------------------------------

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn matrix_exp(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = a * Complex64::new(scale, 0.0);
    let mut result = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Complete-graph adjacency matrix `A(K_n)`.
pub fn complete_graph_adjacency(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 })
}

/// `exp(-i beta H)` for one block, built by dense exponentiation.
pub fn block_unitary_dense(n: usize, beta: f64, convention: Convention) -> DMatrix<Complex64> {
    let b = convention.effective_beta(n, beta);
    let gen = complete_graph_adjacency(n).map(|x| Complex64::new(0.0, -b * x));
    matrix_exp(&gen)
}

/// `exp(-i beta H)` for one block from the rank-one closed form.
pub fn block_unitary_closed(n: usize, beta: f64, convention: Convention) -> DMatrix<Complex64> {
    let b = convention.effective_beta(n, beta);
    let global = Complex64::from_polar(1.0, b);
    let c = (Complex64::from_polar(1.0, -b * n as f64) - 1.0) / n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        global * (if j == k { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) } + c)
    })
}

/// Entrywise modulus-square of a unitary.
pub fn unistochastic(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    u.map(|z| z.norm_sqr())
}

/// Applies a dense `n x n` kernel to every block axis of a distribution.
fn contract_dense(kernel: &DMatrix<f64>, probs: &[f64], m: usize) -> Vec<f64> {
    let n = kernel.nrows();
    let mut cur = probs.to_vec();
    let mut stride = 1;
    for _ in 0..m {
        let mut next = vec![0.0; cur.len()];
        for (idx, out) in next.iter_mut().enumerate() {
            let digit = (idx / stride) % n;
            let base = idx - digit * stride;
            *out = (0..n).map(|j| kernel[(digit, j)] * cur[base + j * stride]).sum();
        }
        cur = next;
        stride *= n;
    }
    cur
}

/// Dephased layer dynamics from the uniform initial diagonal.
pub fn dephased_reference(
    inst: &ProblemInstance,
    gammas: &[f64],
    betas: &[f64],
    convention: Convention,
) -> Result<Envelope> {
    let v0 = Envelope::uniform(inst.dim());
    dephased_reference_from(inst, &v0, gammas, betas, convention)
}

/// Per layer: dephase, apply the diagonal cost phase (modulus one on the
/// diagonal), then the unistochastic block kernel of the mixer unitary.
pub fn dephased_reference_from(
    inst: &ProblemInstance,
    v0: &Envelope,
    gammas: &[f64],
    betas: &[f64],
    convention: Convention,
) -> Result<Envelope> {
    if gammas.len() != betas.len() {
        return Err(Error::param("schedule length mismatch"));
    }
    if v0.len() != inst.dim() {
        return Err(Error::SizeMismatch { expected: inst.dim(), found: v0.len() });
    }
    let mut diag = v0.probs().to_vec();
    for (&g, &b) in gammas.iter().zip(betas) {
        for (p, &e) in diag.iter_mut().zip(inst.energies()) {
            *p *= Complex64::from_polar(1.0, -g * e as f64).norm_sqr();
        }
        let kernel = unistochastic(&block_unitary_closed(inst.n(), b, convention));
        diag = contract_dense(&kernel, &diag, inst.m());
    }
    let provenance = if gammas.is_empty() { v0.provenance() } else { Provenance::ExternalDiagonal };
    Ok(Envelope::from_parts(diag, provenance))
}

/// Operator-level Dirichlet filter: weight `env(z) |d(z)|^2` with
/// `d(z) = (p+1)^{-1/2} sum_r e^{i r theta*} e^{-i r gamma E(z)}`, normalized.
pub fn dirichlet_filter_oracle(env: &Envelope, inst: &ProblemInstance, gamma: f64, p: usize) -> Result<Vec<f64>> {
    if env.len() != inst.dim() {
        return Err(Error::SizeMismatch { expected: inst.dim(), found: env.len() });
    }
    let e_star = inst.e_star().ok_or(Error::EmptyOptimalSet)? as f64;
    let norm = ((p + 1) as f64).sqrt().recip();
    let raw: Vec<f64> = env
        .probs()
        .iter()
        .zip(inst.energies())
        .map(|(&w, &e)| {
            let eig: Complex64 = (0..=p)
                .map(|r| {
                    let r = r as f64;
                    Complex64::from_polar(1.0, r * gamma * e_star) * Complex64::from_polar(1.0, -r * gamma * e as f64)
                })
                .sum::<Complex64>()
                * norm;
            w * eig.norm_sqr()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > crate::fejer::ZERO_DENOMINATOR) {
        return Err(Error::ZeroDenominator);
    }
    Ok(raw.iter().map(|x| x / total).collect())
}

// --- shots ------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSample {
    pub shots: u64,
    pub counts: Vec<u64>,
    pub hits: u64,
    pub frequency: f64,
    /// Wilson 95% interval for the subset probability.
    pub interval: (f64, f64),
}

/// Multinomial draw of `shots` outcomes by inverse-CDF sampling.
pub fn sample_shots(dist: &[f64], shots: u64, seed: u64, subset: &[usize]) -> Result<ShotSample> {
    sample_shots_stream(dist, shots, seed, 0, subset)
}

pub fn sample_shots_stream(dist: &[f64], shots: u64, seed: u64, stream: u64, subset: &[usize]) -> Result<ShotSample> {
    if shots == 0 {
        return Err(Error::param("need at least one shot"));
    }
    let cdf = cumulative(dist)?;
    let mut rng = seeded_rng(seed, stream);
    let mut counts = vec![0u64; dist.len()];
    for _ in 0..shots {
        counts[draw(&cdf, &mut rng)] += 1;
    }
    let hits: u64 = subset.iter().map(|&i| counts.get(i).copied().unwrap_or(0)).sum();
    let frequency = hits as f64 / shots as f64;
    Ok(ShotSample { shots, counts, hits, frequency, interval: wilson_interval(hits, shots, 1.96) })
}

/// Whether any of `shots` draws lands in `subset`, without tallying counts.
pub fn any_hit(cdf: &[f64], in_subset: &[bool], shots: u64, rng: &mut ChaCha8Rng) -> bool {
    (0..shots).any(|_| in_subset[draw(cdf, rng)])
}

pub fn cumulative(dist: &[f64]) -> Result<Vec<f64>> {
    if dist.is_empty() || dist.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::param("distribution must be nonempty and nonnegative"));
    }
    let mut acc = 0.0;
    let cdf: Vec<f64> = dist
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if !(acc > 0.0) {
        return Err(Error::param("distribution has zero mass"));
    }
    Ok(cdf)
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cdf.last().expect("nonempty");
    let u = rng.gen::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = hits as f64 / n;
    let z2 = z * z;
    let center = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((center - half).max(0.0), (center + half).min(1.0))
}

// --- quadrature -------------------------------------------------------------

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    // Insist on at least a few levels so periodic integrands are not
    // accepted from a single aliased sample pattern.
    if depth == 0 || (depth < 44 && diff.abs() <= 15.0 * tol) {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
