// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo validation: bond percolation and synchronous two-route SIR
//! on concrete multiplex graphs.
//!
//! Each edge consumes exactly one uniform draw per realization, compared
//! against its class rate. Shared edges get a single trial at `lambda_c`.
//! Because the draw does not depend on the rate, raising either rate with
//! the same seed can only add occupied edges.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{input, Result};
use crate::multiplex::{Edge, MultiplexGraph};
use crate::rng::{self, SimRng};
use crate::theory::{SpreadingRate, Theory, Weighting, FIXED_POINT_MAX_ITER, FIXED_POINT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Largest connected component of the occupied subgraph.
    Percolation,
    /// Final recovered fraction of an SIR run from a random seed node.
    Sir,
}

impl std::str::FromStr for SimMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "percolation" => Ok(SimMode::Percolation),
            "sir" => Ok(SimMode::Sir),
            _ => input(format!("unknown simulation mode `{s}` (expected percolation or sir)")),
        }
    }
}

impl std::fmt::Display for SimMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimMode::Percolation => "percolation",
            SimMode::Sir => "sir",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub realizations: usize,
    pub master_seed: u64,
    pub mode: SimMode,
    /// Realizations with `s` above this fraction count as outbreaks.
    pub outbreak_cutoff: f64,
    pub keep_samples: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            realizations: 500,
            master_seed: 0,
            mode: SimMode::Percolation,
            outbreak_cutoff: 0.01,
            keep_samples: false,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return input("need at least one realization");
        }
        if !(self.outbreak_cutoff > 0.0 && self.outbreak_cutoff < 1.0) {
            return input(format!(
                "outbreak cutoff {} outside (0, 1)",
                self.outbreak_cutoff
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub realizations: usize,
    pub mean_s: f64,
    pub stderr_s: f64,
    /// Mean of `s` over realizations exceeding the outbreak cutoff (0 when
    /// there are none).
    pub giant_fraction_mean: f64,
    pub giant_fraction_stderr: f64,
    pub outbreak_probability: f64,
    pub per_realization: Option<Vec<f64>>,
}

impl SimResult {
    /// The estimator compared against theory: the largest-component
    /// fraction for percolation, the conditional outbreak size for SIR.
    pub fn estimate(&self, mode: SimMode) -> (f64, f64) {
        match mode {
            SimMode::Percolation => (self.mean_s, self.stderr_s),
            SimMode::Sir => (self.giant_fraction_mean, self.giant_fraction_stderr),
        }
    }
}

/// Edge lists and adjacency of a multiplex, laid out for simulation.
#[derive(Debug, Clone)]
pub struct SimGraph {
    n: usize,
    /// Edges of the A-only, B-only and shared classes.
    classes: [Vec<(u32, u32)>; 3],
    offsets: Vec<usize>,
    /// `(neighbor, class)` pairs in CSR order.
    neighbors: Vec<(u32, u8)>,
}

impl SimGraph {
    pub fn new(g: &MultiplexGraph) -> Self {
        let c = g.classify_edges();
        let pack = |v: &[Edge]| -> Vec<(u32, u32)> {
            v.iter().map(|&(a, b)| (a as u32, b as u32)).collect()
        };
        let classes = [pack(&c.a_only), pack(&c.b_only), pack(&c.shared)];
        let n = g.n();
        let mut deg = vec![0usize; n + 1];
        for &(u, v) in classes.iter().flatten() {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![(0u32, 0u8); offsets[n]];
        for (cls, edges) in classes.iter().enumerate() {
            for &(u, v) in edges {
                neighbors[fill[u as usize]] = (v, cls as u8);
                fill[u as usize] += 1;
                neighbors[fill[v as usize]] = (u, cls as u8);
                fill[v as usize] += 1;
            }
        }
        Self {
            n,
            classes,
            offsets,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn neighbors(&self, u: usize) -> &[(u32, u8)] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }
}

/// Integer thresholds so an edge is occupied iff `next_u64() < cut`.
#[derive(Debug, Clone, Copy)]
struct Occupancy {
    cut: [u64; 3],
    always: [bool; 3],
}

impl Occupancy {
    fn new(rate: &SpreadingRate) -> Self {
        let lambda = rate.per_class();
        let mut cut = [0u64; 3];
        let mut always = [false; 3];
        for i in 0..3 {
            always[i] = lambda[i] >= 1.0;
            // Float-to-int casts saturate.
            cut[i] = (lambda[i] * 18_446_744_073_709_551_616.0) as u64;
        }
        Self { cut, always }
    }

    #[inline]
    fn occupied(&self, class: usize, draw: u64) -> bool {
        self.always[class] || draw < self.cut[class]
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    /// Returns the size of the merged component.
    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return self.size[ra as usize];
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.size[ra as usize]
    }
}

fn occupy(g: &SimGraph, rate: &SpreadingRate, rng: &mut SimRng) -> (UnionFind, u32) {
    let occ = Occupancy::new(rate);
    let mut uf = UnionFind::new(g.n);
    let mut largest = u32::from(g.n > 0);
    for (cls, edges) in g.classes.iter().enumerate() {
        for &(u, v) in edges {
            if occ.occupied(cls, rng.next_u64()) {
                largest = largest.max(uf.union(u, v));
            }
        }
    }
    (uf, largest)
}

fn percolate_with(g: &SimGraph, rate: &SpreadingRate, rng: &mut SimRng) -> f64 {
    if g.n == 0 {
        return 0.0;
    }
    let (_, largest) = occupy(g, rate, rng);
    largest as f64 / g.n as f64
}

/// Largest-component fraction of one bond-percolation realization.
pub fn percolate_once(g: &SimGraph, rate: &SpreadingRate, seed: u64) -> f64 {
    percolate_with(g, rate, &mut rng::from_seed(seed))
}

fn seed_component_with(g: &SimGraph, rate: &SpreadingRate, rng: &mut SimRng) -> f64 {
    let node = rng.random_range(0..g.n) as u32;
    let (mut uf, _) = occupy(g, rate, rng);
    let root = uf.find(node);
    uf.size[root as usize] as f64 / g.n as f64
}

/// Fraction of nodes in the occupied component of a uniformly random node.
pub fn percolate_seed_component(g: &SimGraph, rate: &SpreadingRate, seed: u64) -> Result<f64> {
    if g.n == 0 {
        return input("graph has no nodes");
    }
    Ok(seed_component_with(g, rate, &mut rng::from_seed(seed)))
}

const SUSCEPTIBLE: u8 = 0;
const INFECTED: u8 = 1;
const RECOVERED: u8 = 2;

fn sir_with(g: &SimGraph, rate: &SpreadingRate, seed_node: usize, rng: &mut SimRng) -> f64 {
    let occ = Occupancy::new(rate);
    let mut state = vec![SUSCEPTIBLE; g.n];
    let mut current = vec![seed_node as u32];
    let mut next = Vec::new();
    state[seed_node] = INFECTED;
    let mut recovered = 0usize;
    while !current.is_empty() {
        for &u in &current {
            for &(v, cls) in g.neighbors(u as usize) {
                if state[v as usize] == SUSCEPTIBLE && occ.occupied(cls as usize, rng.next_u64()) {
                    state[v as usize] = INFECTED;
                    next.push(v);
                }
            }
        }
        // Every infected node is infectious for exactly one step.
        for &u in &current {
            state[u as usize] = RECOVERED;
        }
        recovered += current.len();
        std::mem::swap(&mut current, &mut next);
        next.clear();
    }
    recovered as f64 / g.n as f64
}

/// Synchronous discrete-time SIR with recovery after one step. Returns the
/// final recovered fraction.
pub fn sir_once(g: &SimGraph, rate: &SpreadingRate, seed_node: usize, seed: u64) -> Result<f64> {
    if seed_node >= g.n {
        return input(format!("seed node {seed_node} out of range for n = {}", g.n));
    }
    Ok(sir_with(g, rate, seed_node, &mut rng::from_seed(seed)))
}

/// Generator of realization `index` under `master_seed`.
pub fn realization_rng(master_seed: u64, index: u64) -> SimRng {
    rng::stream(master_seed, index)
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `cfg.realizations` independent realizations in parallel.
///
/// Realization `r` draws from stream `r` of `cfg.master_seed`, and the
/// samples are reduced in index order, so the result does not depend on
/// the thread count.
pub fn run_ensemble(g: &SimGraph, rate: &SpreadingRate, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    if g.n == 0 {
        return input("graph has no nodes");
    }
    let samples: Vec<f64> = (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = realization_rng(cfg.master_seed, r);
            match cfg.mode {
                SimMode::Percolation => percolate_with(g, rate, &mut rng),
                SimMode::Sir => {
                    let node = rng.random_range(0..g.n);
                    sir_with(g, rate, node, &mut rng)
                }
            }
        })
        .collect();
    let (mean_s, stderr_s) = mean_and_stderr(&samples);
    let giant: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|&s| s > cfg.outbreak_cutoff)
        .collect();
    let (giant_fraction_mean, giant_fraction_stderr) = mean_and_stderr(&giant);
    Ok(SimResult {
        realizations: cfg.realizations,
        mean_s,
        stderr_s,
        giant_fraction_mean,
        giant_fraction_stderr,
        outbreak_probability: giant.len() as f64 / samples.len() as f64,
        per_realization: cfg.keep_samples.then_some(samples),
    })
}

/// Values `start, start + step, ...` up to `stop` inclusive.
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) {
        return input(format!("bad grid {start}..={stop} step {step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    pub lambda_a: Vec<f64>,
    pub lambda_b: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(lambda_a: Vec<f64>, lambda_b: Vec<f64>) -> Result<Self> {
        for &x in lambda_a.iter().chain(&lambda_b) {
            SpreadingRate::new(x, 0.0)?;
        }
        Ok(Self { lambda_a, lambda_b })
    }

    /// Same stepped range on both axes.
    pub fn square(start: f64, stop: f64, step: f64) -> Result<Self> {
        let v = linspace_step(start, stop, step)?;
        Self::new(v.clone(), v)
    }

    pub fn len(&self) -> usize {
        self.lambda_a.len() * self.lambda_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row-major order (`lambda_a` outer).
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lambda_a
            .iter()
            .flat_map(|&a| self.lambda_b.iter().map(move |&b| (a, b)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub s_theory: f64,
    /// False when the fixed point hit the iteration cap; `s_theory` is then
    /// the last iterate.
    pub theory_converged: bool,
    pub s_sim: f64,
    pub stderr: f64,
    pub outbreak_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub realizations: usize,
    pub mode: SimMode,
}

/// Theory outbreak size, falling back to the last iterate if the fixed
/// point did not converge (only happens right at the threshold).
pub fn theory_outbreak(theory: &Theory, rate: &SpreadingRate) -> Result<(f64, bool)> {
    match theory.outbreak_size(rate, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER) {
        Ok(sol) => Ok((sol.s, true)),
        Err(crate::Error::Convergence { last_s, .. }) => Ok((last_s, false)),
        Err(e) => Err(e),
    }
}

/// Theory-only sweep: `(lambda_a, lambda_b, s_theory, converged)` per grid
/// point, evaluated in parallel.
pub fn theory_sweep(
    g: &MultiplexGraph,
    grid: &LambdaGrid,
    weighting: Weighting,
) -> Result<Vec<(f64, f64, f64, bool)>> {
    let theory = Theory::new(&g.vector_distribution()?, weighting);
    let points: Vec<(f64, f64)> = grid.points().collect();
    points
        .into_par_iter()
        .map(|(a, b)| {
            let (s, ok) = theory_outbreak(&theory, &SpreadingRate::new(a, b)?)?;
            Ok((a, b, s, ok))
        })
        .collect()
}

/// Simulates every grid point and attaches the theory prediction computed
/// from the same graph's vector-degree distribution. `progress` is called
/// with `(done, total)` after each point.
pub fn phase_diagram(
    g: &MultiplexGraph,
    grid: &LambdaGrid,
    cfg: &SimConfig,
    weighting: Weighting,
    mut progress: impl FnMut(usize, usize),
) -> Result<SweepResult> {
    cfg.validate()?;
    let sim_graph = SimGraph::new(g);
    let theory = Theory::new(&g.vector_distribution()?, weighting);
    let total = grid.len();
    let mut rows = Vec::with_capacity(total);
    for (done, (a, b)) in grid.points().enumerate() {
        let rate = SpreadingRate::new(a, b)?;
        let (s_theory, theory_converged) = theory_outbreak(&theory, &rate)?;
        let res = run_ensemble(&sim_graph, &rate, cfg)?;
        let (s_sim, stderr) = res.estimate(cfg.mode);
        rows.push(SweepRow {
            lambda_a: a,
            lambda_b: b,
            s_theory,
            theory_converged,
            s_sim,
            stderr,
            outbreak_prob: res.outbreak_probability,
        });
        progress(done + 1, total);
    }
    Ok(SweepResult {
        rows,
        realizations: cfg.realizations,
        mode: cfg.mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> MultiplexGraph {
        let e: Vec<Edge> = (1..n).map(|i| (i - 1, i)).collect();
        MultiplexGraph::new(n, e[..n / 2].to_vec(), e[n / 2 - 1..].to_vec()).unwrap()
    }

    fn rate(a: f64, b: f64) -> SpreadingRate {
        SpreadingRate::new(a, b).unwrap()
    }

    #[test]
    fn trivial_rates() {
        let g = SimGraph::new(&path(10));
        assert_eq!(percolate_once(&g, &rate(0.0, 0.0), 1), 0.1);
        assert_eq!(percolate_once(&g, &rate(1.0, 1.0), 1), 1.0);
        assert_eq!(sir_once(&g, &rate(0.0, 0.0), 4, 1).unwrap(), 0.1);
        for seed_node in 0..10 {
            assert_eq!(sir_once(&g, &rate(1.0, 1.0), seed_node, 2).unwrap(), 1.0);
        }
        assert!(sir_once(&g, &rate(1.0, 1.0), 10, 2).is_err());
    }

    #[test]
    fn single_route_blocks_other_layer() {
        // A: 0-1-2, B: 3-4; only route A open.
        let g = MultiplexGraph::new(5, vec![(0, 1), (1, 2)], vec![(3, 4)]).unwrap();
        let sg = SimGraph::new(&g);
        assert_eq!(sir_once(&sg, &rate(1.0, 0.0), 0, 0).unwrap(), 0.6);
        assert_eq!(sir_once(&sg, &rate(1.0, 0.0), 3, 0).unwrap(), 0.2);
        assert_eq!(percolate_once(&sg, &rate(0.0, 1.0), 0), 0.4);
    }

    #[test]
    fn shared_edges_use_combined_rate() {
        let e: Vec<Edge> = (1..200).map(|i| (0, i)).collect();
        let g = MultiplexGraph::new(200, e.clone(), e).unwrap();
        let sg = SimGraph::new(&g);
        let cfg = SimConfig {
            realizations: 400,
            mode: SimMode::Sir,
            ..SimConfig::default()
        };
        // Star seeded at the hub: each leaf infected with prob lambda_c.
        let r = rate(0.2, 0.3);
        let mean: f64 = (0..400)
            .map(|s| sir_once(&sg, &r, 0, s).unwrap())
            .sum::<f64>()
            / 400.0;
        let expected = (1.0 + 199.0 * r.lambda_c()) / 200.0;
        assert!((mean - expected).abs() < 0.01, "{mean} vs {expected}");
        assert!(run_ensemble(&sg, &r, &cfg).is_ok());
    }

    #[test]
    fn single_realization_has_zero_stderr() {
        let g = SimGraph::new(&path(20));
        let cfg = SimConfig {
            realizations: 1,
            master_seed: 5,
            ..SimConfig::default()
        };
        let r = run_ensemble(&g, &rate(0.5, 0.5), &cfg).unwrap();
        assert_eq!(r.stderr_s, 0.0);
        let single = percolate_with(&SimGraph::new(&path(20)), &rate(0.5, 0.5), &mut realization_rng(5, 0));
        assert_eq!(r.mean_s, single);
    }

    #[test]
    fn invalid_config() {
        let g = SimGraph::new(&path(4));
        let mut cfg = SimConfig {
            realizations: 0,
            ..SimConfig::default()
        };
        assert!(run_ensemble(&g, &rate(0.1, 0.1), &cfg).is_err());
        cfg.realizations = 3;
        cfg.outbreak_cutoff = 1.0;
        assert!(run_ensemble(&g, &rate(0.1, 0.1), &cfg).is_err());
    }

    #[test]
    fn grid_helpers() {
        assert_eq!(linspace_step(0.0, 1.0, 0.5).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace_step(0.0, 0.5, 0.02).unwrap().len(), 26);
        assert!(linspace_step(0.0, 1.0, 0.0).is_err());
        let g = LambdaGrid::square(0.0, 1.0, 1.0).unwrap();
        assert_eq!(g.points().collect::<Vec<_>>(), vec![(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]);
        assert!(LambdaGrid::new(vec![1.5], vec![0.0]).is_err());
    }

    #[test]
    fn phase_diagram_corners() {
        let g = path(10);
        let grid = LambdaGrid::square(0.0, 1.0, 1.0).unwrap();
        let cfg = SimConfig {
            realizations: 10,
            ..SimConfig::default()
        };
        let mut calls = 0;
        let res = phase_diagram(&g, &grid, &cfg, Weighting::EdgeClass, |_, _| calls += 1).unwrap();
        assert_eq!(calls, 4);
        let origin = &res.rows[0];
        assert!((origin.s_sim - 0.1).abs() < 1e-12);
        assert_eq!(origin.s_theory, 0.0);
    }
}
