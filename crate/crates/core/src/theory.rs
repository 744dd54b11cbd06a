// SPDX-License-Identifier: Apache-2.0

//! Bond-percolation theory of a two-route SIR epidemic on a multiplex.
//!
//! Edges are occupied with probability `lambda_a` (A-only), `lambda_b`
//! (B-only) or `lambda_c = 1 - (1 - lambda_a)(1 - lambda_b)` (shared). For
//! each edge class X the probability `u_X` that following an X edge does not
//! lead to the giant component satisfies
//!
//! ```text
//! u_X = 1 - lambda_X + lambda_X * sum_k w_X(k) p_k u^(k - e_X) / norm_X
//! ```
//!
//! where `k = (k_A - k_C, k_B - k_C, k_C)`. Linearizing around `u = 1` gives
//! the transmission matrix `J = diag(lambda) diag(1/norm) m`; the epidemic
//! threshold is where its spectral radius crosses one, which is equivalent
//! to `det M = 0` for `M = m - diag(norm / lambda)`.
//!
//! [`Weighting`] selects the edge weights `w_X`.

use rayon::prelude::*;

use crate::error::{input, Error, Result};
use crate::multiplex::VectorDegreeDistribution;

/// Bisection tolerance on rates.
pub const RATE_TOL: f64 = 1e-8;
/// Default fixed-point tolerance (max component change).
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 1_000_000;
const EIGEN_MAX_ITER: usize = 10_000;

/// `1 - (1 - lambda_a)(1 - lambda_b)`.
pub fn compose_lambda_c(lambda_a: f64, lambda_b: f64) -> Result<f64> {
    check_probability("lambda_a", lambda_a)?;
    check_probability("lambda_b", lambda_b)?;
    Ok(combine(lambda_a, lambda_b))
}

fn combine(a: f64, b: f64) -> f64 {
    1.0 - (1.0 - a) * (1.0 - b)
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return input(format!("{name} = {x} outside [0, 1]"));
    }
    Ok(())
}

/// Per-route spreading rates; the shared-edge rate is always derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadingRate {
    lambda_a: f64,
    lambda_b: f64,
}

impl SpreadingRate {
    pub fn new(lambda_a: f64, lambda_b: f64) -> Result<Self> {
        check_probability("lambda_a", lambda_a)?;
        check_probability("lambda_b", lambda_b)?;
        Ok(Self { lambda_a, lambda_b })
    }

    pub fn lambda_a(&self) -> f64 {
        self.lambda_a
    }

    pub fn lambda_b(&self) -> f64 {
        self.lambda_b
    }

    pub fn lambda_c(&self) -> f64 {
        combine(self.lambda_a, self.lambda_b)
    }

    /// `(lambda_a, lambda_b, lambda_c)`, indexed like the edge classes.
    pub fn per_class(&self) -> [f64; 3] {
        [self.lambda_a, self.lambda_b, self.lambda_c()]
    }
}

/// How an edge of class X weights a node with vector degree `k` in the
/// excess-degree sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Weight by the node's number of X edges, normalized by the mean
    /// number of X edges. This is the distribution of the node reached by
    /// following a random X edge; `u = 1` is always a fixed point.
    #[default]
    EdgeClass,
    /// Weight by `|k_M|` restricted to nodes with at least one X edge,
    /// normalized by `<k_M>` for every class. The weights do not sum to
    /// one, so `u = 1` is not an exact fixed point when some nodes lack an
    /// edge class.
    Printed,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-class" => Ok(Weighting::EdgeClass),
            "printed" => Ok(Weighting::Printed),
            _ => input(format!("unknown weighting `{s}` (expected edge-class or printed)")),
        }
    }
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::EdgeClass => "edge-class",
            Weighting::Printed => "printed",
        })
    }
}

/// `<k_M>` and the nine excess-degree sums `m_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub weighting: Weighting,
    /// `sum |k_M| p`.
    pub mean_km: f64,
    /// `m[i][j] = sum_k w_i(k) p_k (k_j - [i == j])` over nodes with `k_i >= 1`.
    pub m: [[f64; 3]; 3],
    /// Row normalizers: `<k_M>` (printed) or mean class degree (edge-class).
    pub row_norm: [f64; 3],
    /// Mean number of edges of each class per node.
    pub class_mean: [f64; 3],
}

/// Direct summation over the distribution entries.
pub fn moment_set(dist: &VectorDegreeDistribution, weighting: Weighting) -> MomentSet {
    let mean_km = dist.mean_magnitude();
    let mut m = [[0.0; 3]; 3];
    for (vd, &p) in dist.iter() {
        let k = vd.as_array();
        let magnitude = vd.magnitude() as f64;
        for i in 0..3 {
            if k[i] == 0 {
                continue;
            }
            let w = match weighting {
                Weighting::EdgeClass => k[i] as f64,
                Weighting::Printed => magnitude,
            };
            for j in 0..3 {
                let excess = k[j] as f64 - if i == j { 1.0 } else { 0.0 };
                m[i][j] += w * p * excess;
            }
        }
    }
    let class_mean = dist.class_means();
    let row_norm = match weighting {
        Weighting::EdgeClass => class_mean,
        Weighting::Printed => [mean_km; 3],
    };
    MomentSet {
        weighting,
        mean_km,
        m,
        row_norm,
        class_mean,
    }
}

impl MomentSet {
    /// `J = diag(lambda) diag(1/norm) m`. Rows of classes that carry no
    /// edges are zero.
    pub fn transmission_matrix(&self, rate: &SpreadingRate) -> [[f64; 3]; 3] {
        let lambda = rate.per_class();
        let mut j = [[0.0; 3]; 3];
        for i in 0..3 {
            if self.row_norm[i] > 0.0 {
                for c in 0..3 {
                    j[i][c] = lambda[i] * self.m[i][c] / self.row_norm[i];
                }
            }
        }
        j
    }

    /// `det M` with `M = m - diag(norm / lambda)`.
    ///
    /// Only meaningful when every rate is positive and every class carries
    /// edges; otherwise a diagonal entry is infinite and the result is not
    /// finite.
    pub fn det_m(&self, rate: &SpreadingRate) -> f64 {
        let lambda = rate.per_class();
        let mut mm = self.m;
        for i in 0..3 {
            mm[i][i] -= self.row_norm[i] / lambda[i];
        }
        det3(&mm)
    }
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Perron root of a non-negative 3x3 matrix.
///
/// The root is the largest real zero of the characteristic polynomial.
/// Newton's method started at the maximum row sum (an upper bound on the
/// spectral radius) descends monotonically onto it: the polynomial is
/// convex to the right of the root because its inflection point, the mean
/// eigenvalue, cannot exceed the spectral radius.
pub fn spectral_radius(a: &[[f64; 3]; 3]) -> f64 {
    let upper = a
        .iter()
        .map(|row| row.iter().sum::<f64>())
        .fold(0.0_f64, f64::max);
    if upper <= 0.0 {
        return 0.0;
    }
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = det3(a);
    let p = |x: f64| ((x - trace) * x + minors) * x - det;
    let dp = |x: f64| (3.0 * x - 2.0 * trace) * x + minors;

    let mut x = upper;
    for _ in 0..EIGEN_MAX_ITER {
        let (px, dpx) = (p(x), dp(x));
        if px <= 0.0 || dpx <= 0.0 {
            break;
        }
        let step = px / dpx;
        x -= step;
        if step <= 1e-15 * x.max(1.0) {
            break;
        }
    }
    x.max(0.0)
}

/// Solution of the giant-component equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutbreakSolution {
    pub u_a: f64,
    pub u_b: f64,
    pub u_c: f64,
    /// Expected fraction of nodes in the giant outbreak.
    pub s: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Points `(lambda_a, lambda_b_critical)` on the epidemic threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub points: Vec<(f64, f64)>,
    pub grid_resolution: f64,
}

/// Analytic model of one vector-degree distribution.
#[derive(Debug, Clone)]
pub struct Theory {
    entries: Vec<([i32; 3], f64)>,
    moments: MomentSet,
}

impl Theory {
    pub fn new(dist: &VectorDegreeDistribution, weighting: Weighting) -> Self {
        let entries = dist
            .iter()
            .map(|(vd, &p)| {
                let k = vd.as_array();
                ([k[0] as i32, k[1] as i32, k[2] as i32], p)
            })
            .collect();
        Self {
            entries,
            moments: moment_set(dist, weighting),
        }
    }

    pub fn moments(&self) -> &MomentSet {
        &self.moments
    }

    pub fn weighting(&self) -> Weighting {
        self.moments.weighting
    }

    pub fn spectral_radius(&self, rate: &SpreadingRate) -> f64 {
        spectral_radius(&self.moments.transmission_matrix(rate))
    }

    /// Mean size of the (finite) outbreak started from a random node,
    /// `1 + sum_X <k_X> h_X` with `(I - J) h = lambda`.
    pub fn mean_outbreak(&self, rate: &SpreadingRate) -> Result<f64> {
        let j = self.moments.transmission_matrix(rate);
        let rho = spectral_radius(&j);
        if rho >= 1.0 {
            return Err(Error::Supercritical {
                spectral_radius: rho,
            });
        }
        let mut a = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] = if r == c { 1.0 } else { 0.0 } - j[r][c];
            }
        }
        let h = solve3(&a, rate.per_class()).ok_or(Error::Supercritical {
            spectral_radius: rho,
        })?;
        if h.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::Supercritical {
                spectral_radius: rho,
            });
        }
        Ok(1.0
            + self
                .moments
                .class_mean
                .iter()
                .zip(h)
                .map(|(k, h)| k * h)
                .sum::<f64>())
    }

    fn check_nondegenerate(&self) -> Result<()> {
        if self.moments.mean_km <= 0.0 {
            return input("distribution has no edges (<k_M> = 0)");
        }
        Ok(())
    }

    /// Bisects on `t` for the point where `rho(path(t))` crosses one.
    /// `path` must be monotone in every rate. `None` when already
    /// supercritical at `t = 0` or still subcritical at `t = 1`.
    fn crossing(&self, path: impl Fn(f64) -> SpreadingRate) -> Option<f64> {
        let excess = |t: f64| self.spectral_radius(&path(t)) - 1.0;
        if excess(0.0) >= 0.0 || excess(1.0) < 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > RATE_TOL {
            let mid = 0.5 * (lo + hi);
            if excess(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Smallest `lambda_b` at which the epidemic becomes supercritical for
    /// fixed `lambda_a`.
    pub fn threshold_point(&self, lambda_a: f64) -> Result<Option<f64>> {
        check_probability("lambda_a", lambda_a)?;
        self.check_nondegenerate()?;
        Ok(self.crossing(|b| SpreadingRate {
            lambda_a,
            lambda_b: b,
        }))
    }

    /// Critical `lambda_a` with route B switched off.
    pub fn axis_threshold_a(&self) -> Result<Option<f64>> {
        self.check_nondegenerate()?;
        Ok(self.crossing(|a| SpreadingRate {
            lambda_a: a,
            lambda_b: 0.0,
        }))
    }

    /// Critical `lambda_b` with route A switched off.
    pub fn axis_threshold_b(&self) -> Result<Option<f64>> {
        self.threshold_point(0.0)
    }

    /// Critical common rate `lambda` along `lambda_a = lambda_b`.
    pub fn diagonal_threshold(&self) -> Result<Option<f64>> {
        self.check_nondegenerate()?;
        Ok(self.crossing(|l| SpreadingRate {
            lambda_a: l,
            lambda_b: l,
        }))
    }

    /// Critical `lambda_b` at every `lambda_a` on the grid where one exists,
    /// followed by the exact crossing `(lambda_a_c, 0)` of the `lambda_a`
    /// axis. Grid points already supercritical at `lambda_b = 0` are omitted.
    pub fn threshold_curve(&self, grid_resolution: f64) -> Result<ThresholdCurve> {
        if !(grid_resolution > 0.0 && grid_resolution <= 0.5) {
            return input(format!(
                "grid resolution {grid_resolution} outside (0, 0.5]"
            ));
        }
        self.check_nondegenerate()?;
        let steps = grid_steps(grid_resolution);
        let points: Vec<Option<(f64, f64)>> = (0..=steps)
            .into_par_iter()
            .map(|i| {
                let a = (i as f64 * grid_resolution).min(1.0);
                self.threshold_point(a).map(|b| b.map(|b| (a, b)))
            })
            .collect::<Result<_>>()?;
        let mut points: Vec<(f64, f64)> = points.into_iter().flatten().collect();
        // Close the curve on the lambda_a axis.
        if let Some(a_c) = self.axis_threshold_a()? {
            if points.last().is_none_or(|&(a, _)| a < a_c) {
                points.push((a_c, 0.0));
            }
        }
        Ok(ThresholdCurve {
            points,
            grid_resolution,
        })
    }

    /// The maps `u -> F(u)` for the three edge classes.
    fn step(&self, rate: &[f64; 3], u: [f64; 3]) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for (k, p) in &self.entries {
            let pow = |x: usize, e: i32| if e == 0 { 1.0 } else { u[x].powi(e) };
            let full = [pow(0, k[0]), pow(1, k[1]), pow(2, k[2])];
            let magnitude = (k[0] + k[1] + k[2]) as f64;
            for x in 0..3 {
                if k[x] == 0 {
                    continue;
                }
                let mut term = p * pow(x, k[x] - 1);
                for y in (0..3).filter(|&y| y != x) {
                    term *= full[y];
                }
                acc[x] += term
                    * match self.moments.weighting {
                        Weighting::EdgeClass => k[x] as f64,
                        Weighting::Printed => magnitude,
                    };
            }
        }
        let mut next = [0.0; 3];
        for x in 0..3 {
            let norm = self.moments.row_norm[x];
            let g = if norm > 0.0 { acc[x] / norm } else { 1.0 };
            next[x] = (1.0 - rate[x] + rate[x] * g).clamp(0.0, 1.0);
        }
        next
    }

    /// `s = 1 - sum_k p_k u_a^(k_A - k_C) u_b^(k_B - k_C) u_c^(k_C)`.
    pub fn outbreak_fraction(&self, u: [f64; 3]) -> f64 {
        let stay: f64 = self
            .entries
            .iter()
            .map(|(k, p)| p * u[0].powi(k[0]) * u[1].powi(k[1]) * u[2].powi(k[2]))
            .sum();
        (1.0 - stay).max(0.0)
    }

    /// Iterates the giant-component maps upward from `u = 0`. The maps are
    /// monotone, so the iterates increase to the least fixed point.
    pub fn outbreak_size(
        &self,
        rate: &SpreadingRate,
        tol: f64,
        max_iter: usize,
    ) -> Result<OutbreakSolution> {
        if !(tol > 0.0) {
            return input(format!("tolerance must be > 0, got {tol}"));
        }
        let lambda = rate.per_class();
        let mut u = [0.0; 3];
        let mut change = f64::INFINITY;
        for it in 1..=max_iter {
            let next = self.step(&lambda, u);
            let prev = change;
            change = (0..3).map(|x| (next[x] - u[x]).abs()).fold(0.0, f64::max);
            u = next;
            // Near the threshold the map contracts slowly and the distance
            // to the fixed point is about change * r / (1 - r).
            let r = change / prev;
            let remaining = if r < 1.0 { change * r / (1.0 - r) } else { f64::INFINITY };
            if change < tol && (remaining < tol || change <= 8.0 * f64::EPSILON) {
                return Ok(OutbreakSolution {
                    u_a: u[0],
                    u_b: u[1],
                    u_c: u[2],
                    s: self.outbreak_fraction(u),
                    iterations: it,
                    converged: true,
                });
            }
        }
        Err(Error::Convergence {
            iterations: max_iter,
            last_change: change,
            last: u,
            last_s: self.outbreak_fraction(u),
        })
    }

    /// Largest deviation `|F(u) - u|` over the three maps.
    pub fn residual(&self, rate: &SpreadingRate, sol: &OutbreakSolution) -> f64 {
        let u = [sol.u_a, sol.u_b, sol.u_c];
        let next = self.step(&rate.per_class(), u);
        (0..3).map(|x| (next[x] - u[x]).abs()).fold(0.0, f64::max)
    }
}

/// Number of steps so that `0, r, 2r, ...` covers `[0, 1]`, including 1
/// when `1/r` is (numerically) an integer.
fn grid_steps(r: f64) -> usize {
    let q = 1.0 / r;
    if (q - q.round()).abs() < 1e-9 {
        q.round() as usize
    } else {
        q.floor() as usize
    }
}

/// Gaussian elimination with partial pivoting.
fn solve3(a: &[[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for r in 0..3 {
        m[r][..3].copy_from_slice(&a[r]);
        m[r][3] = b[r];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

// Free-function forms using the default weighting.

pub fn mean_outbreak(dist: &VectorDegreeDistribution, rate: &SpreadingRate) -> Result<f64> {
    Theory::new(dist, Weighting::default()).mean_outbreak(rate)
}

pub fn threshold_point(dist: &VectorDegreeDistribution, lambda_a: f64) -> Result<Option<f64>> {
    Theory::new(dist, Weighting::default()).threshold_point(lambda_a)
}

pub fn threshold_curve(
    dist: &VectorDegreeDistribution,
    grid_resolution: f64,
) -> Result<ThresholdCurve> {
    Theory::new(dist, Weighting::default()).threshold_curve(grid_resolution)
}

pub fn outbreak_size(
    dist: &VectorDegreeDistribution,
    rate: &SpreadingRate,
    tol: f64,
    max_iter: usize,
) -> Result<OutbreakSolution> {
    Theory::new(dist, Weighting::default()).outbreak_size(rate, tol, max_iter)
}
