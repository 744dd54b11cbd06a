// SPDX-License-Identifier: Apache-2.0

//! Layer generators (Erdős–Rényi and preferential attachment) and the
//! couplings that tune the overlap (ASN) or degree correlation (DDC) of a
//! two-layer multiplex.
//!
//! All generation is a pure function of its inputs and a `u64` seed.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{input, Error, Result};
use crate::multiplex::{self, asn, ddc, DdcMode, Edge, JointDegreeDistribution, MultiplexGraph};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Er,
    Sf,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayerKind::Er => "ER",
            LayerKind::Sf => "SF",
        })
    }
}

impl FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(LayerKind::Er),
            "sf" => Ok(LayerKind::Sf),
            _ => input(format!("unknown layer kind `{s}` (expected er or sf)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub n: usize,
    pub mean_degree: f64,
}

impl LayerSpec {
    pub fn new(kind: LayerKind, n: usize, mean_degree: f64) -> Result<Self> {
        let spec = Self {
            kind,
            n,
            mean_degree,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return input(format!("layer needs at least 2 nodes, got {}", self.n));
        }
        if !(self.mean_degree > 0.0) || self.mean_degree > (self.n - 1) as f64 {
            return input(format!(
                "mean degree {} outside (0, n - 1] for n = {}",
                self.mean_degree, self.n
            ));
        }
        if self.kind == LayerKind::Sf {
            sf_attachment(self.n, self.mean_degree)?;
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<Vec<Edge>> {
        match self.kind {
            LayerKind::Er => gen_er(self.n, self.mean_degree, seed),
            LayerKind::Sf => gen_sf(self.n, self.mean_degree, seed),
        }
    }
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.n, self.mean_degree)
    }
}

/// Inter-layer property a coupled multiplex is tuned for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingTarget {
    /// Independent layers, layer B randomly relabeled.
    None,
    Asn(f64),
    /// Pearson-mode DDC.
    Ddc(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    pub target: CouplingTarget,
    pub tolerance: f64,
}

pub const DEFAULT_ASN_TOLERANCE: f64 = 0.01;
pub const DEFAULT_DDC_TOLERANCE: f64 = 0.02;
/// Swap proposals per node allowed to the DDC hill climber.
pub const DDC_SWAPS_PER_NODE: usize = 50;

impl CouplingSpec {
    pub fn none() -> Self {
        Self {
            target: CouplingTarget::None,
            tolerance: DEFAULT_ASN_TOLERANCE,
        }
    }

    pub fn asn(target: f64) -> Self {
        Self {
            target: CouplingTarget::Asn(target),
            tolerance: DEFAULT_ASN_TOLERANCE,
        }
    }

    pub fn ddc(target: f64) -> Self {
        Self {
            target: CouplingTarget::Ddc(target),
            tolerance: DEFAULT_DDC_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return input(format!("coupling tolerance must be > 0, got {}", self.tolerance));
        }
        match self.target {
            CouplingTarget::Asn(a) if !(0.0..=1.0).contains(&a) => {
                input(format!("ASN target {a} outside [0, 1]"))
            }
            CouplingTarget::Ddc(b) if !(-1.0..=1.0).contains(&b) => {
                input(format!("DDC target {b} outside [-1, 1]"))
            }
            _ => Ok(()),
        }
    }
}

/// A generated multiplex and the value its coupling achieved.
#[derive(Debug, Clone)]
pub struct Coupled {
    pub graph: MultiplexGraph,
    /// Measured ASN or DDC (whichever was targeted; NaN for no target).
    pub achieved: f64,
    /// Whether `achieved` is within tolerance of the target.
    pub met: bool,
}

/// `G(n, p)` with `p = mean_degree / (n - 1)`.
pub fn gen_er(n: usize, mean_degree: f64, seed: u64) -> Result<Vec<Edge>> {
    if n < 2 {
        return Ok(Vec::new());
    }
    if !(mean_degree >= 0.0) {
        return input(format!("mean degree must be >= 0, got {mean_degree}"));
    }
    let p = mean_degree / (n - 1) as f64;
    if p > 1.0 {
        return input(format!("edge probability {p} > 1 for n = {n}"));
    }
    Ok(gnp_edges(n, p, &mut rng::from_seed(seed)))
}

/// Geometric skipping over the `n(n-1)/2` candidate pairs (Batagelj and
/// Brandes), so cost scales with the number of edges.
fn gnp_edges(n: usize, p: f64, rng: &mut SimRng) -> Vec<Edge> {
    if p <= 0.0 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..n)
            .flat_map(|v| (0..v).map(move |w| (w, v)))
            .collect();
    }
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::with_capacity((p * (n * (n - 1)) as f64 / 2.0 * 1.1) as usize);
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    edges
}

fn sf_attachment(n: usize, mean_degree: f64) -> Result<usize> {
    if !(mean_degree >= 2.0) {
        return input(format!(
            "scale-free layers need mean degree >= 2, got {mean_degree}"
        ));
    }
    let m = (mean_degree / 2.0).round() as usize;
    if n < m + 1 {
        return input(format!("n = {n} too small for attachment parameter m = {m}"));
    }
    Ok(m)
}

/// Preferential attachment with `m = round(mean_degree / 2)` edges per new
/// node, grown from a clique on the first `m + 1` nodes.
pub fn gen_sf(n: usize, mean_degree: f64, seed: u64) -> Result<Vec<Edge>> {
    let m = sf_attachment(n, mean_degree)?;
    let mut rng = rng::from_seed(seed);
    let mut edges: Vec<Edge> = clique(m + 1);
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut targets = Vec::with_capacity(m);
    for t in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let cand = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&cand) {
                targets.push(cand);
            }
        }
        for &x in &targets {
            edges.push((x, t));
            endpoints.extend([x, t]);
        }
    }
    Ok(edges)
}

fn clique(k: usize) -> Vec<Edge> {
    (0..k).flat_map(|v| (0..v).map(move |u| (u, v))).collect()
}

fn random_permutation(n: usize, rng: &mut SimRng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Builds a multiplex from two layer specs and a coupling target.
///
/// Without a target the layers are generated independently and layer B is
/// randomly relabeled, which leaves the layers uncorrelated.
pub fn build_multiplex(
    spec_a: &LayerSpec,
    spec_b: &LayerSpec,
    coupling: &CouplingSpec,
    seed: u64,
) -> Result<Coupled> {
    coupling.validate()?;
    match coupling.target {
        CouplingTarget::None => {
            let (a, b) = independent_layers(spec_a, spec_b, seed)?;
            let g = MultiplexGraph::new(spec_a.n, a, b)?;
            Ok(Coupled {
                graph: g,
                achieved: f64::NAN,
                met: true,
            })
        }
        CouplingTarget::Asn(target) => couple_asn(spec_a, spec_b, target, coupling.tolerance, seed),
        CouplingTarget::Ddc(target) => {
            let (a, b) = independent_layers(spec_a, spec_b, seed)?;
            couple_ddc(spec_a.n, &a, &b, target, coupling.tolerance, seed)
        }
    }
}

fn independent_layers(a: &LayerSpec, b: &LayerSpec, seed: u64) -> Result<(Vec<Edge>, Vec<Edge>)> {
    a.validate()?;
    b.validate()?;
    if a.n != b.n {
        return input(format!("layer sizes differ: {} vs {}", a.n, b.n));
    }
    let edges_a = a.generate(seed_for(seed, 0))?;
    let edges_b = b.generate(seed_for(seed, 1))?;
    let perm = random_permutation(b.n, &mut rng::stream(seed, 2));
    let edges_b = edges_b.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
    Ok((edges_a, edges_b))
}

/// Per-purpose sub-seed so the two layers never share a stream.
fn seed_for(seed: u64, purpose: u64) -> u64 {
    use rand::RngCore;
    rng::stream(seed, 1000 + purpose).next_u64()
}

/// Number of shared edges giving ASN `target` for layers of `e_a` and `e_b`
/// edges: `alpha = c / (e_a + e_b - c)`.
fn shared_count_for(target: f64, e_a: usize, e_b: usize) -> usize {
    let c = (target * (e_a + e_b) as f64 / (1.0 + target)).round() as usize;
    c.min(e_a).min(e_b)
}

/// Couples two layers to a target ASN.
///
/// For ER-ER and SF-SF a shared base network is grown first and each layer
/// then receives its own extra edges (uniformly for ER, preferentially for
/// SF), disjoint from the other layer. The base size follows exactly from
/// the edge counts, so the result hits the target up to integer rounding.
/// Mixed ER-SF pairs can only be tuned by relabeling layer B, which reaches
/// a limited range; an unmet target is an infeasibility error.
pub fn couple_asn(
    spec_a: &LayerSpec,
    spec_b: &LayerSpec,
    target: f64,
    tolerance: f64,
    seed: u64,
) -> Result<Coupled> {
    spec_a.validate()?;
    spec_b.validate()?;
    CouplingSpec {
        target: CouplingTarget::Asn(target),
        tolerance,
    }
    .validate()?;
    if spec_a.n != spec_b.n {
        return input(format!("layer sizes differ: {} vs {}", spec_a.n, spec_b.n));
    }
    let n = spec_a.n;
    let graph = match (spec_a.kind, spec_b.kind) {
        (LayerKind::Er, LayerKind::Er) => {
            let e_a = (n as f64 * spec_a.mean_degree / 2.0).round() as usize;
            let e_b = (n as f64 * spec_b.mean_degree / 2.0).round() as usize;
            check_asn_reachable(target, tolerance, e_a, e_b)?;
            let shared = shared_count_for(target, e_a, e_b);
            er_with_shared_base(n, e_a, e_b, shared, seed)?
        }
        (LayerKind::Sf, LayerKind::Sf) => {
            let m_a = sf_attachment(n, spec_a.mean_degree)?;
            let m_b = sf_attachment(n, spec_b.mean_degree)?;
            sf_with_shared_base(n, m_a, m_b, target, tolerance, seed)?
        }
        _ => relabel_for_asn(spec_a, spec_b, target, tolerance, seed)?,
    };
    let achieved = asn(&graph)?;
    if (achieved - target).abs() > tolerance {
        return Err(Error::Infeasible(format!(
            "ASN target {target} not reached: best {achieved:.4}"
        )));
    }
    Ok(Coupled {
        graph,
        achieved,
        met: true,
    })
}

fn check_asn_reachable(target: f64, tolerance: f64, e_a: usize, e_b: usize) -> Result<()> {
    let (lo, hi) = (e_a.min(e_b), e_a.max(e_b));
    let max_asn = if hi == 0 { 0.0 } else { lo as f64 / hi as f64 };
    if target > max_asn + tolerance {
        return Err(Error::Infeasible(format!(
            "ASN {target} unreachable with {e_a} and {e_b} layer edges (max {max_asn:.4})"
        )));
    }
    Ok(())
}

fn random_new_edge(n: usize, taken: &HashSet<Edge>, rng: &mut SimRng) -> Edge {
    loop {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let e = (u.min(v), u.max(v));
        if !taken.contains(&e) {
            return e;
        }
    }
}

fn er_with_shared_base(
    n: usize,
    e_a: usize,
    e_b: usize,
    shared: usize,
    seed: u64,
) -> Result<MultiplexGraph> {
    let total_pairs = n * (n - 1) / 2;
    if e_a + e_b - shared > total_pairs {
        return Err(Error::Infeasible(format!(
            "{} distinct edges do not fit in {n} nodes",
            e_a + e_b - shared
        )));
    }
    let mut rng = rng::stream(seed, 0);
    let mut taken: HashSet<Edge> = HashSet::with_capacity(e_a + e_b);
    let mut draw = |count: usize, out: &mut Vec<Edge>, taken: &mut HashSet<Edge>| {
        for _ in 0..count {
            let e = random_new_edge(n, taken, &mut rng);
            taken.insert(e);
            out.push(e);
        }
    };
    let mut base = Vec::with_capacity(shared);
    draw(shared, &mut base, &mut taken);
    let mut a = base.clone();
    draw(e_a - shared, &mut a, &mut taken);
    let mut b = base;
    draw(e_b - shared, &mut b, &mut taken);
    MultiplexGraph::new(n, a, b)
}

/// Preferential-attachment growth of both layers over one arrival order.
///
/// Each arriving node brings `m_a` A-stubs and `m_b` B-stubs. A chosen
/// number of its stubs are shared: they attach in both layers to a target
/// picked proportionally to `k_A + k_B`. The remaining stubs attach in their
/// own layer proportionally to that layer's degree and avoid the node's
/// other-layer targets, so no unplanned shared edge is created.
fn sf_with_shared_base(
    n: usize,
    m_a: usize,
    m_b: usize,
    target: f64,
    tolerance: f64,
    seed: u64,
) -> Result<MultiplexGraph> {
    let m0 = m_a.max(m_b);
    let clique_a = clique(m_a + 1);
    let clique_b = clique(m_b + 1);
    let clique_shared = clique(m_a.min(m_b) + 1).len();
    let arrivals = n.saturating_sub(m0 + 1);
    let e_a = clique_a.len() + arrivals * m_a;
    let e_b = clique_b.len() + arrivals * m_b;
    check_asn_reachable(target, tolerance, e_a, e_b)?;

    let want = shared_count_for(target, e_a, e_b).max(clique_shared);
    let slots_per_node = m_a.min(m_b);
    let mut rng = rng::stream(seed, 0);
    // Choose which (arrival, stub) slots are shared.
    let mut slots: Vec<bool> = vec![false; arrivals * slots_per_node];
    for s in slots.iter_mut().take(want - clique_shared) {
        *s = true;
    }
    slots.shuffle(&mut rng);

    // Nodes m_a+1..=m0 (or m_b+1..=m0) join the smaller clique's layer as
    // ordinary arrivals with no shared stubs.
    let mut edges_a = clique_a.clone();
    let mut edges_b = clique_b.clone();
    let mut ends_a: Vec<usize> = clique_a.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut ends_b: Vec<usize> = clique_b.iter().flat_map(|&(u, v)| [u, v]).collect();
    let attach = |count: usize,
                  t: usize,
                  ends: &mut Vec<usize>,
                  edges: &mut Vec<Edge>,
                  mine: &mut Vec<usize>,
                  avoid: &[usize],
                  rng: &mut SimRng| {
        // Soft avoidance is dropped when too few candidates exist.
        let soft = t >= mine.len() + avoid.len() + count;
        let mut placed = 0;
        while placed < count {
            let x = ends[rng.random_range(0..ends.len())];
            if x == t || mine.contains(&x) || (soft && avoid.contains(&x)) {
                continue;
            }
            mine.push(x);
            edges.push((x, t));
            placed += 1;
        }
        for &x in &mine[mine.len() - count..] {
            ends.extend([x, t]);
        }
    };

    for t in (m_a + 1).min(m_b + 1)..n {
        let in_a = t > m_a;
        let in_b = t > m_b;
        let shared_here = if t > m0 {
            let base = (t - m0 - 1) * slots_per_node;
            slots[base..base + slots_per_node].iter().filter(|&&s| s).count()
        } else {
            0
        };
        let mut nbr_a: Vec<usize> = Vec::with_capacity(m_a);
        let mut nbr_b: Vec<usize> = Vec::with_capacity(m_b);
        for _ in 0..shared_here {
            loop {
                let idx = rng.random_range(0..ends_a.len() + ends_b.len());
                let x = if idx < ends_a.len() {
                    ends_a[idx]
                } else {
                    ends_b[idx - ends_a.len()]
                };
                if !nbr_a.contains(&x) {
                    nbr_a.push(x);
                    nbr_b.push(x);
                    break;
                }
            }
        }
        let shared_targets = nbr_a.clone();
        for &x in &shared_targets {
            edges_a.push((x, t));
            edges_b.push((x, t));
            ends_a.extend([x, t]);
            ends_b.extend([x, t]);
        }
        if in_a {
            attach(m_a - shared_here, t, &mut ends_a, &mut edges_a, &mut nbr_a, &[], &mut rng);
        }
        if in_b {
            let a_extra: Vec<usize> = nbr_a[shared_here..].to_vec();
            attach(m_b - shared_here, t, &mut ends_b, &mut edges_b, &mut nbr_b, &a_extra, &mut rng);
        }
    }
    MultiplexGraph::new(n, edges_a, edges_b)
}

/// Hill climbs over pairwise label swaps of layer B to move the edge
/// overlap toward the ASN target. Used for mixed ER-SF pairs.
fn relabel_for_asn(
    spec_a: &LayerSpec,
    spec_b: &LayerSpec,
    target: f64,
    tolerance: f64,
    seed: u64,
) -> Result<MultiplexGraph> {
    let (a, b) = independent_layers(spec_a, spec_b, seed)?;
    let n = spec_a.n;
    let a_set: HashSet<Edge> = a.iter().copied().collect();
    let adj_a = adjacency(n, &a);
    let adj_b = adjacency(n, &b);
    // pos[orig] = current label of original B node; orig_at[label] = inverse.
    let mut pos: Vec<usize> = (0..n).collect();
    let mut orig_at: Vec<usize> = (0..n).collect();
    let overlap_of = |pos: &[usize]| {
        b.iter()
            .filter(|&&(u, v)| {
                let (x, y) = (pos[u], pos[v]);
                a_set.contains(&(x.min(y), x.max(y)))
            })
            .count() as i64
    };
    let want = shared_count_for(target, a.len(), b.len()) as i64;
    let mut overlap = overlap_of(&pos);
    let alpha = |o: i64| o as f64 / ((a.len() + b.len()) as i64 - o).max(1) as f64;

    // Change in overlap from swapping the labels x and y of layer B.
    let delta = |x: usize, y: usize, pos: &[usize], orig_at: &[usize]| -> i64 {
        let mut d = 0i64;
        let has_a = |p: usize, q: usize| a_set.contains(&(p.min(q), p.max(q)));
        for (from, to) in [(x, y), (y, x)] {
            for &w in &adj_b[orig_at[from]] {
                let wl = pos[w];
                if wl == to {
                    continue;
                }
                d -= has_a(from, wl) as i64;
                d += has_a(to, wl) as i64;
            }
        }
        d
    };

    let mut rng = rng::stream(seed, 3);
    let budget = DDC_SWAPS_PER_NODE * n;
    for _ in 0..budget {
        if (alpha(overlap) - target).abs() <= tolerance {
            break;
        }
        let (x, y) = if overlap < want {
            // Pull a B-neighbor of u onto an A-neighbor v of u.
            let u = rng.random_range(0..n);
            let (na, nb) = (&adj_a[u], &adj_b[orig_at[u]]);
            if na.is_empty() || nb.is_empty() {
                continue;
            }
            let v = na[rng.random_range(0..na.len())];
            let w = pos[nb[rng.random_range(0..nb.len())]];
            (v, w)
        } else {
            (rng.random_range(0..n), rng.random_range(0..n))
        };
        if x == y {
            continue;
        }
        let d = delta(x, y, &pos, &orig_at);
        if (overlap + d - want).abs() < (overlap - want).abs() {
            let (ox, oy) = (orig_at[x], orig_at[y]);
            orig_at.swap(x, y);
            pos[ox] = y;
            pos[oy] = x;
            overlap += d;
        }
    }
    debug_assert_eq!(overlap, overlap_of(&pos));
    let edges_b = b.iter().map(|&(u, v)| (pos[u], pos[v])).collect();
    MultiplexGraph::new(n, a, edges_b)
}

fn adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj
}

/// Pearson correlation of `ka[i]` and `kb[i]`, given precomputed sums.
struct PearsonParts {
    n: f64,
    mean_a: f64,
    mean_b: f64,
    sd_product: f64,
}

impl PearsonParts {
    fn new(ka: &[usize], kb: &[usize]) -> Result<Self> {
        let n = ka.len() as f64;
        let mean = |k: &[usize]| k.iter().sum::<usize>() as f64 / n;
        let var = |k: &[usize], m: f64| k.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / n;
        let (mean_a, mean_b) = (mean(ka), mean(kb));
        let (var_a, var_b) = (var(ka, mean_a), var(kb, mean_b));
        if var_a <= 1e-12 || var_b <= 1e-12 {
            return Err(Error::UndefinedMetric(
                "a layer has zero degree variance".into(),
            ));
        }
        Ok(Self {
            n,
            mean_a,
            mean_b,
            sd_product: (var_a * var_b).sqrt(),
        })
    }

    fn beta(&self, cross: f64) -> f64 {
        (cross / self.n - self.mean_a * self.mean_b) / self.sd_product
    }

    fn cross_for(&self, beta: f64) -> f64 {
        (beta * self.sd_product + self.mean_a * self.mean_b) * self.n
    }
}

fn cross_sum(ka: &[usize], kb_at: &[usize]) -> f64 {
    ka.iter().zip(kb_at).map(|(&a, &b)| (a * b) as f64).sum()
}

/// Relabels layer B (leaving both layers' topology intact) to reach a
/// target Pearson DDC.
///
/// Starts from a random labeling, then greedily accepts pairwise label
/// swaps that move the correlation toward the target, for at most
/// `50 n` proposals. If the target is still unmet, the sorted (or
/// anti-sorted) pairing is tried, since it attains the extreme correlation.
/// The closest labeling wins; `met` reports whether it is within
/// `tolerance`.
pub fn couple_ddc(
    n: usize,
    layer_a: &[Edge],
    layer_b: &[Edge],
    target: f64,
    tolerance: f64,
    seed: u64,
) -> Result<Coupled> {
    CouplingSpec {
        target: CouplingTarget::Ddc(target),
        tolerance,
    }
    .validate()?;
    let ka = multiplex::degrees(n, layer_a);
    let kb = multiplex::degrees(n, layer_b);
    let parts = PearsonParts::new(&ka, &kb)?;
    let want = parts.cross_for(target);

    let mut rng = rng::stream(seed, 4);
    // orig_at[label] = original B node placed at that label.
    let mut orig_at = random_permutation(n, &mut rng);
    let mut kb_at: Vec<usize> = orig_at.iter().map(|&o| kb[o]).collect();
    let mut cross = cross_sum(&ka, &kb_at);

    if n >= 2 {
        for _ in 0..DDC_SWAPS_PER_NODE * n {
            if (parts.beta(cross) - target).abs() <= tolerance {
                break;
            }
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            let d = (ka[i] as f64 - ka[j] as f64) * (kb_at[j] as f64 - kb_at[i] as f64);
            if (cross + d - want).abs() < (cross - want).abs() {
                orig_at.swap(i, j);
                kb_at.swap(i, j);
                cross += d;
            }
        }
    }

    if (parts.beta(cross) - target).abs() > tolerance {
        let extreme = extreme_pairing(&ka, &kb, target >= parts.beta(cross));
        let kb_ext: Vec<usize> = extreme.iter().map(|&o| kb[o]).collect();
        let cross_ext = cross_sum(&ka, &kb_ext);
        if (parts.beta(cross_ext) - target).abs() < (parts.beta(cross) - target).abs() {
            orig_at = extreme;
        }
    }

    let mut new_label = vec![0; n];
    for (label, &o) in orig_at.iter().enumerate() {
        new_label[o] = label;
    }
    let edges_b = layer_b
        .iter()
        .map(|&(u, v)| (new_label[u], new_label[v]))
        .collect();
    let graph = MultiplexGraph::new(n, layer_a.to_vec(), edges_b)?;
    let achieved = ddc(&JointDegreeDistribution::from_graph(&graph)?, DdcMode::Pearson)?;
    Ok(Coupled {
        graph,
        achieved,
        met: (achieved - target).abs() <= tolerance,
    })
}

/// Labeling that pairs the i-th largest `k_A` with the i-th largest (or
/// smallest, when `ascending` is false) `k_B`. Returns `orig_at`.
fn extreme_pairing(ka: &[usize], kb: &[usize], same_order: bool) -> Vec<usize> {
    let n = ka.len();
    let mut by_a: Vec<usize> = (0..n).collect();
    by_a.sort_by_key(|&i| (ka[i], i));
    let mut by_b: Vec<usize> = (0..n).collect();
    by_b.sort_by_key(|&i| (kb[i], i));
    if !same_order {
        by_b.reverse();
    }
    let mut orig_at = vec![0; n];
    for (&label, &o) in by_a.iter().zip(&by_b) {
        orig_at[label] = o;
    }
    orig_at
}

/// Pearson DDC of the sorted (maximal) and anti-sorted (minimal) pairings
/// of two layers' degree sequences.
pub fn ddc_range(n: usize, layer_a: &[Edge], layer_b: &[Edge]) -> Result<(f64, f64)> {
    let ka = multiplex::degrees(n, layer_a);
    let kb = multiplex::degrees(n, layer_b);
    let parts = PearsonParts::new(&ka, &kb)?;
    let beta = |same: bool| {
        let kb_at: Vec<usize> = extreme_pairing(&ka, &kb, same).iter().map(|&o| kb[o]).collect();
        parts.beta(cross_sum(&ka, &kb_at))
    };
    Ok((beta(false), beta(true)))
}
