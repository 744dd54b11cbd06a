// SPDX-License-Identifier: Apache-2.0

//! Two-layer multiplex graphs, edge classification, vector degrees and the
//! inter-layer similarity metrics (ASN and DDC).
//!
//! Both layers share the node set `0..n`. An edge present in both layers is
//! a shared (C) edge; the rest are A-only or B-only.

use std::collections::BTreeMap;

use crate::error::{input, Error, Result};

/// Undirected edge, always stored as `(min, max)`.
pub type Edge = (usize, usize);

const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplexGraph {
    n: usize,
    edges_a: Vec<Edge>,
    edges_b: Vec<Edge>,
}

/// The three disjoint edge classes of a multiplex graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeClasses {
    pub a_only: Vec<Edge>,
    pub b_only: Vec<Edge>,
    pub shared: Vec<Edge>,
}

/// Per-node `(k_A - k_C, k_B - k_C, k_C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VectorDegree {
    pub a_only: usize,
    pub b_only: usize,
    pub shared: usize,
}

impl VectorDegree {
    pub const fn new(a_only: usize, b_only: usize, shared: usize) -> Self {
        Self {
            a_only,
            b_only,
            shared,
        }
    }

    /// `|k_M| = k_A + k_B - k_C`.
    pub fn magnitude(&self) -> usize {
        self.a_only + self.b_only + self.shared
    }

    pub fn k_a(&self) -> usize {
        self.a_only + self.shared
    }

    pub fn k_b(&self) -> usize {
        self.b_only + self.shared
    }

    /// Component counts ordered as (A-only, B-only, C).
    pub fn as_array(&self) -> [usize; 3] {
        [self.a_only, self.b_only, self.shared]
    }
}

fn normalize_layer(n: usize, edges: Vec<Edge>, layer: char) -> Result<Vec<Edge>> {
    let mut out = Vec::with_capacity(edges.len());
    for (u, v) in edges {
        if u == v {
            return input(format!("self-loop on node {u} in layer {layer}"));
        }
        if u >= n || v >= n {
            return input(format!(
                "edge ({u}, {v}) in layer {layer} out of range for n = {n}"
            ));
        }
        out.push((u.min(v), u.max(v)));
    }
    out.sort_unstable();
    if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
        return input(format!(
            "duplicate edge ({}, {}) in layer {layer}",
            w[0].0, w[0].1
        ));
    }
    Ok(out)
}

impl MultiplexGraph {
    /// Builds a graph from raw edge lists. Endpoint order within an edge is
    /// irrelevant; self-loops, duplicates and out-of-range ids are rejected.
    pub fn new(n: usize, edges_a: Vec<Edge>, edges_b: Vec<Edge>) -> Result<Self> {
        Ok(Self {
            n,
            edges_a: normalize_layer(n, edges_a, 'A')?,
            edges_b: normalize_layer(n, edges_b, 'B')?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Layer-A edges, sorted.
    pub fn edges_a(&self) -> &[Edge] {
        &self.edges_a
    }

    /// Layer-B edges, sorted.
    pub fn edges_b(&self) -> &[Edge] {
        &self.edges_b
    }

    /// Splits the edges into A-only, B-only and shared by merging the two
    /// sorted layer lists.
    pub fn classify_edges(&self) -> EdgeClasses {
        let mut classes = EdgeClasses::default();
        let (a, b) = (&self.edges_a, &self.edges_b);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    classes.a_only.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    classes.b_only.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    classes.shared.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        classes.a_only.extend_from_slice(&a[i..]);
        classes.b_only.extend_from_slice(&b[j..]);
        classes
    }

    /// Plain per-layer degrees `(k_A, k_B)` for every node.
    pub fn layer_degrees(&self) -> (Vec<usize>, Vec<usize>) {
        (degrees(self.n, &self.edges_a), degrees(self.n, &self.edges_b))
    }

    pub fn vector_degrees(&self) -> Vec<VectorDegree> {
        let classes = self.classify_edges();
        let mut out = vec![VectorDegree::default(); self.n];
        for &(u, v) in &classes.a_only {
            out[u].a_only += 1;
            out[v].a_only += 1;
        }
        for &(u, v) in &classes.b_only {
            out[u].b_only += 1;
            out[v].b_only += 1;
        }
        for &(u, v) in &classes.shared {
            out[u].shared += 1;
            out[v].shared += 1;
        }
        out
    }

    pub fn vector_degree(&self, node: usize) -> Result<VectorDegree> {
        if node >= self.n {
            return input(format!("node {node} out of range for n = {}", self.n));
        }
        let mut vd = VectorDegree::default();
        let touches = |e: &&Edge| e.0 == node || e.1 == node;
        let classes = self.classify_edges();
        vd.a_only = classes.a_only.iter().filter(touches).count();
        vd.b_only = classes.b_only.iter().filter(touches).count();
        vd.shared = classes.shared.iter().filter(touches).count();
        Ok(vd)
    }

    /// Mean degree of each layer.
    pub fn mean_degrees(&self) -> (f64, f64) {
        if self.n == 0 {
            return (0.0, 0.0);
        }
        let n = self.n as f64;
        (
            2.0 * self.edges_a.len() as f64 / n,
            2.0 * self.edges_b.len() as f64 / n,
        )
    }

    /// Applies `new_label[old]` to layer B only. Layer A is left untouched.
    pub fn relabel_b(&self, new_label: &[usize]) -> Result<Self> {
        check_permutation(self.n, new_label)?;
        let edges_b = self
            .edges_b
            .iter()
            .map(|&(u, v)| (new_label[u], new_label[v]))
            .collect();
        Self::new(self.n, self.edges_a.clone(), edges_b)
    }

    /// Applies the same relabeling to both layers.
    pub fn relabel(&self, new_label: &[usize]) -> Result<Self> {
        check_permutation(self.n, new_label)?;
        let map = |edges: &[Edge]| -> Vec<Edge> {
            edges
                .iter()
                .map(|&(u, v)| (new_label[u], new_label[v]))
                .collect()
        };
        Self::new(self.n, map(&self.edges_a), map(&self.edges_b))
    }

    pub fn vector_distribution(&self) -> Result<VectorDegreeDistribution> {
        VectorDegreeDistribution::from_graph(self)
    }

    pub fn joint_distribution(&self) -> Result<JointDegreeDistribution> {
        JointDegreeDistribution::from_graph(self)
    }
}

pub(crate) fn degrees(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut deg = vec![0; n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

fn check_permutation(n: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != n {
        return input(format!("permutation has length {}, expected {n}", perm.len()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return input("labeling is not a permutation of 0..n");
        }
    }
    Ok(())
}

/// Empirical or tabulated distribution `p_{k_M}` of vector degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDegreeDistribution {
    entries: BTreeMap<VectorDegree, f64>,
    mean_magnitude: f64,
}

impl VectorDegreeDistribution {
    /// Tallies the vector degree of every node with weight `1/n`.
    pub fn from_graph(g: &MultiplexGraph) -> Result<Self> {
        if g.n() == 0 {
            return input("empty graph has no degree distribution");
        }
        let mut counts: BTreeMap<VectorDegree, usize> = BTreeMap::new();
        for vd in g.vector_degrees() {
            *counts.entry(vd).or_default() += 1;
        }
        let n = g.n() as f64;
        let entries = counts
            .into_iter()
            .map(|(vd, c)| (vd, c as f64 / n))
            .collect();
        Ok(Self::with_mean(entries))
    }

    /// Builds a distribution from an explicit table. Repeated vector degrees
    /// are merged; probabilities must be non-negative and sum to one.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VectorDegree, f64)>,
    {
        let mut map: BTreeMap<VectorDegree, f64> = BTreeMap::new();
        for (vd, p) in entries {
            if !(p >= 0.0) || !p.is_finite() {
                return input(format!("invalid probability {p} for {vd:?}"));
            }
            *map.entry(vd).or_default() += p;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return input(format!("probabilities sum to {total}, expected 1"));
        }
        Ok(Self::with_mean(map))
    }

    /// Single-network special case: every node has `k_B = k_C = 0`.
    pub fn single_layer<I>(degree_probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        Self::from_entries(
            degree_probs
                .into_iter()
                .map(|(k, p)| (VectorDegree::new(k, 0, 0), p)),
        )
    }

    fn with_mean(entries: BTreeMap<VectorDegree, f64>) -> Self {
        let mean_magnitude = entries
            .iter()
            .map(|(vd, p)| vd.magnitude() as f64 * p)
            .sum();
        Self {
            entries,
            mean_magnitude,
        }
    }

    pub fn entries(&self) -> &BTreeMap<VectorDegree, f64> {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VectorDegree, &f64)> {
        self.entries.iter()
    }

    /// `<k_M> = sum |k_M| p_{k_M}`.
    pub fn mean_magnitude(&self) -> f64 {
        self.mean_magnitude
    }

    /// Mean number of edges of each class per node, `(A-only, B-only, C)`.
    pub fn class_means(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (vd, p) in &self.entries {
            for (o, k) in out.iter_mut().zip(vd.as_array()) {
                *o += k as f64 * p;
            }
        }
        out
    }
}

/// Joint distribution `p(k_A, k_B)` of plain layer degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDegreeDistribution {
    entries: BTreeMap<(usize, usize), f64>,
}

impl JointDegreeDistribution {
    pub fn from_graph(g: &MultiplexGraph) -> Result<Self> {
        if g.n() == 0 {
            return input("empty graph has no degree distribution");
        }
        let (ka, kb) = g.layer_degrees();
        Ok(Self::from_degree_pairs(ka.into_iter().zip(kb)))
    }

    /// Empirical distribution of a list of per-node `(k_A, k_B)` pairs.
    pub fn from_degree_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut n = 0usize;
        for pair in pairs {
            *counts.entry(pair).or_default() += 1;
            n += 1;
        }
        let entries = counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / n as f64))
            .collect();
        Self { entries }
    }

    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), f64)>,
    {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (k, p) in entries {
            if !(p >= 0.0) || !p.is_finite() {
                return input(format!("invalid probability {p} for {k:?}"));
            }
            *map.entry(k).or_default() += p;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return input(format!("probabilities sum to {total}, expected 1"));
        }
        Ok(Self { entries: map })
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.entries
    }

    /// `(E[k_A], E[k_B], Var k_A, Var k_B, Cov)`.
    fn moments(&self) -> (f64, f64, f64, f64, f64) {
        let (mut ea, mut eb, mut eaa, mut ebb, mut eab) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&(ka, kb), &p) in &self.entries {
            let (ka, kb) = (ka as f64, kb as f64);
            ea += p * ka;
            eb += p * kb;
            eaa += p * ka * ka;
            ebb += p * kb * kb;
            eab += p * ka * kb;
        }
        (ea, eb, eaa - ea * ea, ebb - eb * eb, eab - ea * eb)
    }
}

/// Normalization used for the degree-degree correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdcMode {
    /// Covariance divided by the variance of `k_B` only.
    Literal,
    /// Pearson correlation coefficient.
    Pearson,
}

/// Average similarity of neighbors: `sum_i k_C(i) / sum_i |k_M(i)|`.
pub fn asn(g: &MultiplexGraph) -> Result<f64> {
    let classes = g.classify_edges();
    // Each edge contributes two endpoints to the sums.
    let total = classes.a_only.len() + classes.b_only.len() + classes.shared.len();
    if total == 0 {
        return Err(Error::UndefinedMetric(
            "ASN is undefined when every node is isolated".into(),
        ));
    }
    Ok(classes.shared.len() as f64 / total as f64)
}

/// Degree-degree correlation between the two layers.
pub fn ddc(j: &JointDegreeDistribution, mode: DdcMode) -> Result<f64> {
    let (_, _, var_a, var_b, cov) = j.moments();
    // Variances of integer degrees below this are rounding noise.
    const VAR_EPS: f64 = 1e-12;
    let beta = match mode {
        DdcMode::Literal => {
            if var_b <= VAR_EPS {
                return Err(Error::UndefinedMetric("variance of k_B is zero".into()));
            }
            cov / var_b
        }
        DdcMode::Pearson => {
            if var_a <= VAR_EPS || var_b <= VAR_EPS {
                return Err(Error::UndefinedMetric(
                    "a layer has zero degree variance".into(),
                ));
            }
            (cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0)
        }
    };
    Ok(beta)
}
