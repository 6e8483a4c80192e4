//! Penalty level sets, the level-transition graph, feasibility-stage Fejér
//! bounds, the invariant symmetry sector and numerical probes that accompany
//! the finite-depth feasibility argument.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::instance::{basis_size, circular_distance, column_collision_penalty, BlockString, ProblemInstance};
use crate::mixer::{resonance_distance, Convention};
use crate::oracle::{seeded_rng, simulate_energies};
use crate::planner::{ratio_bounds, ratio_parameter, RatioBounds};

/// Gram-Schmidt threshold for new Lie-algebra directions.
pub const LIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelStructure {
    /// `t -> L_t` as string indices, only for nonempty levels.
    pub levels: BTreeMap<u32, Vec<usize>>,
    /// Sorted nonempty levels.
    pub active: Vec<u32>,
    pub t_max: u32,
}

impl LevelStructure {
    pub fn size(&self, t: u32) -> usize {
        self.levels.get(&t).map_or(0, Vec::len)
    }

    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        self.levels.iter().map(|(&t, v)| (t, v.len())).collect()
    }
}

pub fn level_sets(inst: &ProblemInstance) -> LevelStructure {
    let mut levels: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &t) in inst.penalties().iter().enumerate() {
        levels.entry(t).or_default().push(i);
    }
    let active: Vec<u32> = levels.keys().copied().collect();
    LevelStructure { t_max: active.last().copied().unwrap_or(0), levels, active }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelEdge {
    pub a: u32,
    pub b: u32,
    /// Ordered pairs `(x, x')`, `x in L_a`, `x' in L_b`, differing in one block.
    pub pair_count: u64,
    /// `pair_count / sqrt(|L_a| |L_b|)`, the unit-coupling matrix element.
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelGraph {
    pub vertices: Vec<u32>,
    pub edges: Vec<LevelEdge>,
}

/// Level-transition graph from single-block relabel pairs.
pub fn level_graph(ls: &LevelStructure, penalties: &[u32], n: usize, m: usize) -> LevelGraph {
    let mut pairs: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (&t, members) in &ls.levels {
        for &x in members {
            let z = BlockString::from_index(x, n, m);
            let mut stride = 1;
            for &s in z.symbols() {
                for s2 in (0..n).filter(|&s2| s2 != s) {
                    let y = x + s2 * stride - s * stride;
                    let t2 = penalties[y];
                    if t2 > t {
                        *pairs.entry((t, t2)).or_default() += 1;
                    }
                }
                stride *= n;
            }
        }
    }
    let edges = pairs
        .into_iter()
        .map(|((a, b), pair_count)| LevelEdge {
            a,
            b,
            pair_count,
            coupling: pair_count as f64 / ((ls.size(a) * ls.size(b)) as f64).sqrt(),
        })
        .collect();
    LevelGraph { vertices: ls.active.clone(), edges }
}

pub fn graph_connected(g: &LevelGraph) -> bool {
    let Some(&start) = g.vertices.first() else {
        return true;
    };
    let mut adj: BTreeMap<u32, Vec<u32>> = g.vertices.iter().map(|&v| (v, Vec::new())).collect();
    for e in &g.edges {
        adj.entry(e.a).or_default().push(e.b);
        adj.entry(e.b).or_default().push(e.a);
    }
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[&v] {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    g.vertices.iter().all(|v| seen.contains(v))
}

/// One relabel from the smallest over-occupied symbol to the smallest
/// unoccupied symbol, at the smallest block holding the former.
pub fn descent_step(z: &BlockString, n: usize) -> Result<BlockString> {
    if z.blocks() != n {
        return Err(Error::param("descent needs m = n"));
    }
    let counts = z.counts(n);
    let over = counts.iter().position(|&c| c >= 2);
    let (Some(a), Some(b)) = (over, counts.iter().position(|&c| c == 0)) else {
        return Err(Error::AlreadyFeasible);
    };
    let block = z.symbols().iter().position(|&s| s == a).expect("symbol a is occupied");
    let mut out = z.clone();
    out.symbols_mut()[block] = b;
    Ok(out)
}

/// Checks the descent property over every infeasible string of `[n]^n`,
/// returning the smallest penalty drop observed (`None` if all feasible).
pub fn exhaustive_descent_min_drop(n: usize, cap: usize) -> Result<Option<u32>> {
    let dim = basis_size(n, n, cap)?;
    let mut min_drop: Option<u32> = None;
    for i in 0..dim {
        let z = BlockString::from_index(i, n, n);
        let before = column_collision_penalty(z.symbols(), n);
        if before == 0 {
            continue;
        }
        let after = column_collision_penalty(descent_step(&z, n)?.symbols(), n);
        let drop = before.saturating_sub(after);
        min_drop = Some(min_drop.map_or(drop, |d| d.min(drop)));
    }
    Ok(min_drop)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaFeasible {
    pub delta: f64,
    /// `gamma > pi / t_max`: phases may wrap.
    pub aliasing: bool,
    /// Some nonzero level wraps onto phase zero.
    pub collision: bool,
    /// No nonzero level exists; `delta` is `pi` by convention.
    pub all_feasible: bool,
}

/// `delta_F = min_{t in V \ {0}} dist(gamma t, 0)`.
pub fn delta_feasible(gamma: f64, ls: &LevelStructure) -> Result<DeltaFeasible> {
    if !(gamma > 0.0) {
        return Err(Error::param("penalty angle must be positive"));
    }
    let nonzero: Vec<u32> = ls.active.iter().copied().filter(|&t| t > 0).collect();
    if nonzero.is_empty() {
        return Ok(DeltaFeasible { delta: PI, aliasing: false, collision: false, all_feasible: true });
    }
    let delta = nonzero.iter().map(|&t| circular_distance(gamma * t as f64, 0.0)).fold(f64::INFINITY, f64::min);
    Ok(DeltaFeasible { delta, aliasing: gamma > PI / ls.t_max as f64, collision: delta == 0.0, all_feasible: false })
}

/// Ratio-form feasibility bounds with `x_F = (p+1)^2 sin^2(delta_F/2) C_F`.
pub fn feasibility_bound(p: usize, c_f: f64, delta_f: f64) -> Result<RatioBounds> {
    if !(c_f > 0.0 && c_f <= 1.0) {
        return Err(Error::param(format!("feasible mass {c_f} outside (0, 1]")));
    }
    if !(delta_f > 0.0 && delta_f <= PI) {
        return Err(Error::param(format!("feasibility gap {delta_f} outside (0, pi]")));
    }
    ratio_bounds(ratio_parameter(p, delta_f, c_f), c_f)
}

/// `(1 - eps^2 / 2)^2`, the overlap constant used with `eps = 1/2`.
pub fn overlap_constant(eps: f64) -> f64 {
    (1.0 - eps * eps / 2.0).powi(2)
}

// --- invariant sector -------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    /// Sorted nonzero occupation numbers, the orbit invariant.
    pub key: Vec<usize>,
    pub representative: usize,
    pub members: Vec<usize>,
}

impl Orbit {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub n: usize,
    pub m: usize,
    pub orbits: Vec<Orbit>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.orbits.len()
    }
}

/// Orbits of block permutations times symbol relabelings on `[n]^m`.
///
/// Two strings share an orbit iff their multisets of occupation numbers
/// agree, so the sorted nonzero counts label the orbit.
pub fn invariant_sector_basis(n: usize, m: usize, cap: usize) -> Result<SectorBasis> {
    let dim = basis_size(n, m, cap)?;
    let mut by_key: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for i in 0..dim {
        let mut key: Vec<usize> = BlockString::from_index(i, n, m).counts(n).into_iter().filter(|&c| c > 0).collect();
        key.sort_unstable_by(|a, b| b.cmp(a));
        by_key.entry(key).or_default().push(i);
    }
    let mut orbits: Vec<Orbit> =
        by_key.into_iter().map(|(key, members)| Orbit { key, representative: members[0], members }).collect();
    orbits.sort_by_key(|o| o.representative);
    Ok(SectorBasis { n, m, orbits })
}

/// Penalty and mixer restricted to the span of normalized orbit sums.
pub fn sector_operators(basis: &SectorBasis, penalties: &[u32]) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, d) = (basis.n, basis.dim());
    let mut orbit_of = vec![0usize; penalties.len()];
    for (k, o) in basis.orbits.iter().enumerate() {
        for &i in &o.members {
            orbit_of[i] = k;
        }
    }
    let mut a = DMatrix::zeros(d, d);
    let mut b = DMatrix::zeros(d, d);
    for (k, o) in basis.orbits.iter().enumerate() {
        let mean_pen: f64 = o.members.iter().map(|&i| penalties[i] as f64).sum::<f64>() / o.size() as f64;
        a[(k, k)] = mean_pen;
        for &x in &o.members {
            let z = BlockString::from_index(x, n, basis.m);
            let mut stride = 1;
            for &s in z.symbols() {
                for s2 in (0..n).filter(|&s2| s2 != s) {
                    let y = x + s2 * stride - s * stride;
                    b[(orbit_of[y], k)] += 1.0;
                }
                stride *= n;
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            let (si, sj) = (basis.orbits[i].size() as f64, basis.orbits[j].size() as f64);
            b[(i, j)] /= (si * sj).sqrt();
        }
    }
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieClosure {
    pub d: usize,
    pub dim: usize,
    /// `dim == d^2`, i.e. the full unitary algebra.
    pub full: bool,
    pub iteration_cap_hit: bool,
}

/// Dimension of the real Lie algebra generated by `{iA, iB}`.
pub fn lie_closure_dim(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<LieClosure> {
    let d = a.nrows();
    if a.ncols() != d || b.nrows() != d || b.ncols() != d {
        return Err(Error::param("generators must be square and of equal size"));
    }
    if d == 0 || d > 64 {
        return Err(Error::param(format!("dimension {d} outside [1, 64]")));
    }
    for m in [a, b] {
        if (m - m.transpose()).amax() > 1e-12 {
            return Err(Error::param("generators must be symmetric"));
        }
    }
    let to_c = |m: &DMatrix<f64>| m.map(|x| Complex64::new(0.0, x));
    let gens = [to_c(a), to_c(b)];

    let mut basis: Vec<DMatrix<Complex64>> = Vec::new();
    let mut frontier: VecDeque<DMatrix<Complex64>> = VecDeque::new();
    for g in &gens {
        if let Some(v) = orthonormalize(g, &basis) {
            basis.push(v.clone());
            frontier.push_back(v);
        }
    }
    let cap = 10 * d * d;
    let mut iterations = 0;
    let mut cap_hit = false;
    while let Some(x) = frontier.pop_front() {
        if basis.len() == d * d {
            break;
        }
        for g in &gens {
            iterations += 1;
            if iterations > cap {
                cap_hit = true;
                break;
            }
            let bracket = g * &x - &x * g;
            if let Some(v) = orthonormalize(&bracket, &basis) {
                basis.push(v.clone());
                frontier.push_back(v);
            }
        }
        if cap_hit {
            break;
        }
    }
    Ok(LieClosure { d, dim: basis.len(), full: basis.len() == d * d, iteration_cap_hit: cap_hit })
}

/// Real inner product `Re tr(X^dagger Y)`.
fn real_inner(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

fn orthonormalize(x: &DMatrix<Complex64>, basis: &[DMatrix<Complex64>]) -> Option<DMatrix<Complex64>> {
    let scale = real_inner(x, x).sqrt();
    if scale == 0.0 {
        return None;
    }
    let mut v = x / Complex64::new(scale, 0.0);
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for e in basis {
            let c = real_inner(e, &v);
            v -= e * Complex64::new(c, 0.0);
        }
    }
    let norm = real_inner(&v, &v).sqrt();
    (norm > LIE_TOL).then(|| v / Complex64::new(norm, 0.0))
}

// --- angle search -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSearch {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub pi_f: f64,
    /// Feasible mass of the initial state (all angles zero).
    pub baseline: f64,
    pub evaluations: usize,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Random restarts plus per-coordinate golden-section refinement of the
/// feasible mass `||Pi_0 psi_p||^2` with penalty-only cost phases.
pub fn feasibility_angle_search(
    inst: &ProblemInstance,
    p: usize,
    budget: usize,
    seed: u64,
    convention: Convention,
    cap: usize,
) -> Result<AngleSearch> {
    feasibility_angle_search_with(Exec::default(), inst, p, budget, seed, convention, cap)
}

#[allow(clippy::too_many_arguments)]
pub fn feasibility_angle_search_with(
    exec: Exec,
    inst: &ProblemInstance,
    p: usize,
    budget: usize,
    seed: u64,
    convention: Convention,
    cap: usize,
) -> Result<AngleSearch> {
    let (n, m) = (inst.n(), inst.m());
    basis_size(n, m, cap)?;
    let penalties: Vec<f64> = inst.penalties().iter().map(|&t| t as f64).collect();
    let feasible = inst.feasible();
    let eval = |gs: &[f64], bs: &[f64]| -> Result<f64> {
        let s = simulate_energies(n, m, &penalties, gs, bs, convention, cap)?;
        if feasible.is_empty() {
            Ok(0.0)
        } else {
            s.mass_on(&feasible)
        }
    };

    let zeros = vec![0.0; p];
    let baseline = eval(&zeros, &zeros)?;
    let mut best = AngleSearch { gammas: zeros.clone(), betas: zeros, pi_f: baseline, baseline, evaluations: 1 };
    if p == 0 || budget <= 1 || feasible.len() == inst.dim() {
        return Ok(best);
    }

    let t_max = inst.t_max().max(1) as f64;
    let gamma_hi = PI / t_max;
    // beta effective period for the chosen convention
    let beta_hi = match convention {
        Convention::Adjacency => TAU,
        Convention::Normalized => TAU * n as f64,
    };
    let remaining = budget - 1;
    let restarts = (remaining / 2).max(1);
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..restarts)
        .map(|i| {
            let mut rng = seeded_rng(seed, i as u64);
            let gs: Vec<f64> = (0..p).map(|_| gamma_hi * (1.0 - rng.gen::<f64>())).collect();
            let bs: Vec<f64> = (0..p)
                .map(|_| loop {
                    let b = beta_hi * rng.gen::<f64>();
                    let eff = convention.effective_beta(n, b);
                    if n < 2 || resonance_distance(n, eff) > 1e-6 {
                        break b;
                    }
                })
                .collect();
            (gs, bs)
        })
        .collect();
    let scores = exec.map_slice(&draws, |(gs, bs)| eval(gs, bs));
    for ((gs, bs), score) in draws.into_iter().zip(scores) {
        let score = score?;
        best.evaluations += 1;
        if score > best.pi_f {
            best.pi_f = score;
            best.gammas = gs;
            best.betas = bs;
        }
    }

    // Coordinate refinement with whatever budget is left.
    let mut left = budget.saturating_sub(best.evaluations);
    let mut width = 0.25;
    while left >= 4 {
        let mut improved = false;
        for coord in 0..2 * p {
            if left < 4 {
                break;
            }
            let (is_gamma, k) = (coord < p, coord % p);
            let (lo_lim, hi_lim) = if is_gamma { (0.0, gamma_hi) } else { (0.0, beta_hi) };
            let cur = if is_gamma { best.gammas[k] } else { best.betas[k] };
            let span = width * (hi_lim - lo_lim);
            let (mut lo, mut hi) = ((cur - span).max(lo_lim), (cur + span).min(hi_lim));
            let steps = (left / (2 * p)).clamp(2, 12);
            let mut trial = |x: f64| -> Result<f64> {
                left = left.saturating_sub(1);
                best.evaluations += 1;
                let (mut gs, mut bs) = (best.gammas.clone(), best.betas.clone());
                if is_gamma {
                    gs[k] = x;
                } else {
                    bs[k] = x;
                }
                eval(&gs, &bs)
            };
            let mut x1 = hi - GOLDEN * (hi - lo);
            let mut x2 = lo + GOLDEN * (hi - lo);
            let mut f1 = trial(x1)?;
            let mut f2 = trial(x2)?;
            for _ in 0..steps {
                if f1 >= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - GOLDEN * (hi - lo);
                    f1 = trial(x1)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + GOLDEN * (hi - lo);
                    f2 = trial(x2)?;
                }
            }
            let (x, f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if f > best.pi_f {
                best.pi_f = f;
                if is_gamma {
                    best.gammas[k] = x;
                } else {
                    best.betas[k] = x;
                }
                improved = true;
            }
        }
        if !improved {
            width *= 0.5;
            if width < 1e-6 {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: usize = 4096;

    fn perm_instance(n: usize) -> ProblemInstance {
        ProblemInstance::with_default_penalty(n, n, vec![0; n.pow(n as u32)], CAP).unwrap()
    }

    #[test]
    fn level_sets_small() {
        let ls = level_sets(&perm_instance(2));
        assert_eq!(ls.levels[&0], vec![1, 2]); // 10, 01
        assert_eq!(ls.levels[&2], vec![0, 3]); // 00, 11
        assert_eq!(ls.active, vec![0, 2]);
        let ls1 = level_sets(&perm_instance(1));
        assert_eq!(ls1.active, vec![0]);
        assert_eq!(level_sets(&perm_instance(3)).size(0), 6);
    }

    #[test]
    fn level_graph_small() {
        let inst = perm_instance(2);
        let ls = level_sets(&inst);
        let g = level_graph(&ls, inst.penalties(), 2, 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].a, g.edges[0].b), (0, 2));
        assert!(graph_connected(&g));

        let single = LevelGraph { vertices: vec![0], edges: vec![] };
        assert!(graph_connected(&single));
        let isolated =
            LevelGraph { vertices: vec![0, 2, 4], edges: vec![LevelEdge { a: 0, b: 2, pair_count: 1, coupling: 1.0 }] };
        assert!(!graph_connected(&isolated));
    }

    #[test]
    fn descent_examples() {
        let z = BlockString::new(vec![0, 0, 1], 3).unwrap();
        let d = descent_step(&z, 3).unwrap();
        assert_eq!(d.symbols(), &[2, 0, 1]);
        assert_eq!(column_collision_penalty(d.symbols(), 3), 0);
        let z = BlockString::new(vec![0, 0], 2).unwrap();
        assert_eq!(descent_step(&z, 2).unwrap().symbols(), &[1, 0]);
        let feas = BlockString::new(vec![1, 0], 2).unwrap();
        assert!(matches!(descent_step(&feas, 2), Err(Error::AlreadyFeasible)));
    }

    #[test]
    fn delta_feasible_examples() {
        let ls = LevelStructure {
            levels: BTreeMap::from([(0, vec![0]), (2, vec![1]), (4, vec![2])]),
            active: vec![0, 2, 4],
            t_max: 4,
        };
        let d = delta_feasible(PI / 4.0, &ls).unwrap();
        assert!((d.delta - PI / 2.0).abs() < 1e-15 && !d.aliasing);
        // gamma = pi / t_max puts t_max at phase pi; the gap is still gamma t_min
        assert!((ls.t_max as f64 * PI / 4.0 - PI).abs() < 1e-15);
        let d = delta_feasible(PI, &ls).unwrap();
        assert!(d.collision && d.delta == 0.0 && d.aliasing);
        let only = LevelStructure { levels: BTreeMap::from([(0, vec![0])]), active: vec![0], t_max: 0 };
        assert!(delta_feasible(0.3, &only).unwrap().all_feasible);
    }

    #[test]
    fn feasibility_bound_examples() {
        let b = feasibility_bound(1, 0.25, PI).unwrap();
        assert!((b.tight - 1.0 / 1.75).abs() < 1e-12 && (b.simple - 0.5).abs() < 1e-12);
        assert_eq!(feasibility_bound(1, 1.0, 0.4).unwrap().tight, 1.0);
        let b = feasibility_bound(2, 0.25, PI).unwrap();
        assert!((b.simple - 2.25 / 3.25).abs() < 1e-12);
    }

    #[test]
    fn overlap_constant_value() {
        assert_eq!(overlap_constant(0.5), 49.0 / 64.0);
    }

    #[test]
    fn sector_examples() {
        let s = invariant_sector_basis(2, 2, CAP).unwrap();
        assert_eq!(s.dim(), 2);
        let sets: Vec<Vec<usize>> = s.orbits.iter().map(|o| o.members.clone()).collect();
        assert!(sets.contains(&vec![0, 3]) && sets.contains(&vec![1, 2]));
        assert_eq!(invariant_sector_basis(1, 3, CAP).unwrap().dim(), 1);
        assert_eq!(invariant_sector_basis(2, 1, CAP).unwrap().dim(), 1);
        let s = invariant_sector_basis(3, 4, CAP).unwrap();
        assert_eq!(s.orbits.iter().map(Orbit::size).sum::<usize>(), 81);
    }

    #[test]
    fn sector_mixer_is_symmetric() {
        let inst = perm_instance(3);
        let s = invariant_sector_basis(3, 3, CAP).unwrap();
        let (a, b) = sector_operators(&s, inst.penalties());
        assert!((&b - b.transpose()).amax() < 1e-12);
        assert!((&a - a.transpose()).amax() == 0.0);
    }

    #[test]
    fn lie_examples() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let r = lie_closure_dim(&a, &b).unwrap();
        assert_eq!(r.dim, 3);
        assert!(!r.full);
        assert_eq!(lie_closure_dim(&a, &a).unwrap().dim, 1);
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(lie_closure_dim(&a, &bad).is_err());
    }

    #[test]
    fn angle_search_baselines() {
        let all = ProblemInstance::new(2, 2, vec![0; 4], vec![0; 4], 1.0, CAP).unwrap();
        let r = feasibility_angle_search(&all, 2, 50, 1, Convention::Adjacency, CAP).unwrap();
        assert!((r.pi_f - 1.0).abs() < 1e-12);
        let inst = perm_instance(2);
        let r0 = feasibility_angle_search(&inst, 0, 50, 1, Convention::Adjacency, CAP).unwrap();
        assert!((r0.pi_f - 0.5).abs() < 1e-12);
        let r = feasibility_angle_search(&inst, 2, 500, 3, Convention::Adjacency, CAP).unwrap();
        assert!(r.pi_f >= r.baseline);
        assert!(r.evaluations <= 500);
        let again = feasibility_angle_search(&inst, 2, 500, 3, Convention::Adjacency, CAP).unwrap();
        assert_eq!(r, again);
    }
}
