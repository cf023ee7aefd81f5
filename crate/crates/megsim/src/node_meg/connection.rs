//! Symmetric connection maps over chain states, and the locus view that
//! reduces edge-probability analytics to a small quotient domain.
//!
//! Every supported map factors through a *locus*: an explicit matrix treats
//! each state as its own locus; mobility maps project states onto points
//! and connect by point identity or by Euclidean distance on a grid. All
//! edge-probability quantities depend only on the locus marginal of the
//! chain's stationary distribution, which is what makes exact evaluation
//! possible even for chains with millions of states.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("connection matrix must be square over {expected} states, row {row} has {got}")]
    BadMatrixShape {
        expected: usize,
        row: usize,
        got: usize,
    },
    #[error("connection matrix must be symmetric: C({0},{1}) != C({1},{0})")]
    Asymmetric(usize, usize),
    #[error("state {state} projects to point {point}, but only {points} points exist")]
    PointOutOfRange {
        state: usize,
        point: u32,
        points: usize,
    },
    #[error("projection covers {got} states, expected {expected}")]
    BadProjectionLength { expected: usize, got: usize },
}

/// Regular `m × m` grid of points in a square of side `side`.
///
/// Point `p` sits at `((p % m) · cell, (p / m) · cell)` with
/// `cell = side / (m − 1)`. With `wrap` set, distances are toroidal; the
/// wraparound variant exists to model boundary-free regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub m: usize,
    pub cell: f64,
    pub wrap: bool,
}

impl GridGeometry {
    pub fn square(m: usize, side: f64) -> Self {
        assert!(m >= 2, "grid needs at least 2 points per side");
        Self {
            m,
            cell: side / (m as f64 - 1.0),
            wrap: false,
        }
    }

    pub fn point_count(&self) -> usize {
        self.m * self.m
    }

    pub fn side(&self) -> f64 {
        self.cell * (self.m as f64 - 1.0)
    }

    pub fn coords(&self, point: usize) -> (f64, f64) {
        (
            (point % self.m) as f64 * self.cell,
            (point / self.m) as f64 * self.cell,
        )
    }

    /// Index of the grid point nearest to continuous coordinates.
    pub fn nearest_point(&self, x: f64, y: f64) -> usize {
        let clamp = |v: f64| -> usize {
            let i = (v / self.cell).round();
            (i.max(0.0) as usize).min(self.m - 1)
        };
        clamp(y) * self.m + clamp(x)
    }

    pub fn dist2(&self, a: usize, b: usize) -> f64 {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let (mut dx, mut dy) = ((ax - bx).abs(), (ay - by).abs());
        if self.wrap {
            // Period of the torus: m cells (the boundary point is adjacent
            // to the first).
            let span = self.cell * self.m as f64;
            dx = dx.min(span - dx);
            dy = dy.min(span - dy);
        }
        dx * dx + dy * dy
    }

    /// Points within Euclidean distance `r` of `point`, ascending.
    pub fn disk(&self, point: usize, r: f64) -> Vec<u32> {
        let r2 = r * r + 1e-12;
        (0..self.point_count())
            .filter(|&q| self.dist2(point, q) <= r2)
            .map(|q| q as u32)
            .collect()
    }

    /// Whether the Euclidean disk around `point` stays inside the square.
    pub fn disk_inside_region(&self, point: usize, r: f64) -> bool {
        if self.wrap {
            return true;
        }
        let (x, y) = self.coords(point);
        let side = self.side();
        x - r >= -1e-9 && y - r >= -1e-9 && x + r <= side + 1e-9 && y + r <= side + 1e-9
    }
}

/// Maps each chain state to its locus (point).
#[derive(Debug, Clone)]
pub struct PointProjection {
    point_of: Vec<u32>,
    points: usize,
}

impl PointProjection {
    pub fn new(point_of: Vec<u32>, points: usize) -> Result<Self, ConnectionError> {
        for (state, &p) in point_of.iter().enumerate() {
            if p as usize >= points {
                return Err(ConnectionError::PointOutOfRange {
                    state,
                    point: p,
                    points,
                });
            }
        }
        Ok(Self { point_of, points })
    }

    pub fn point_of(&self) -> &[u32] {
        &self.point_of
    }

    pub fn points(&self) -> usize {
        self.points
    }
}

/// Symmetric binary relation over states, stored as a packed bit matrix.
#[derive(Debug, Clone)]
pub struct ConnMatrix {
    states: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl ConnMatrix {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, ConnectionError> {
        let n = rows.len();
        let wpr = n.div_ceil(64);
        let mut m = Self {
            states: n,
            words_per_row: wpr,
            bits: vec![0; wpr * n],
        };
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ConnectionError::BadMatrixShape {
                    expected: n,
                    row: i,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.bits[i * wpr + j / 64] |= 1 << (j % 64);
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if m.get(i, j) != m.get(j, i) {
                    return Err(ConnectionError::Asymmetric(i, j));
                }
            }
        }
        Ok(m)
    }

    /// Builds from a symmetric predicate, evaluated on `x ≤ y`.
    pub fn from_predicate(states: usize, pred: impl Fn(usize, usize) -> bool) -> Self {
        let wpr = states.div_ceil(64);
        let mut m = Self {
            states,
            words_per_row: wpr,
            bits: vec![0; wpr * states],
        };
        for x in 0..states {
            for y in x..states {
                if pred(x, y) {
                    m.bits[x * wpr + y / 64] |= 1 << (y % 64);
                    m.bits[y * wpr + x / 64] |= 1 << (x % 64);
                }
            }
        }
        m
    }

    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.words_per_row + y / 64] >> (y % 64) & 1 == 1
    }

    fn row_members(&self, x: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for (wi, &w) in self.bits[x * self.words_per_row..(x + 1) * self.words_per_row]
            .iter()
            .enumerate()
        {
            let mut bits = w;
            while bits != 0 {
                out.push((wi * 64 + bits.trailing_zeros() as usize) as u32);
                bits &= bits - 1;
            }
        }
        out
    }
}

/// How two nodes' states decide whether an edge exists.
#[derive(Clone)]
pub enum ConnectionMap {
    /// Explicit symmetric matrix over states (small chains).
    Matrix(ConnMatrix),
    /// States carry a point; nodes connect iff their points coincide.
    SamePoint(PointProjection),
    /// States carry a grid point; nodes connect iff their Euclidean
    /// distance is at most the radius.
    WithinRadius {
        proj: PointProjection,
        geom: GridGeometry,
        radius: f64,
    },
}

impl std::fmt::Debug for ConnectionMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConnectionMap::Matrix(m) => write!(f, "Matrix({} states)", m.states()),
            ConnectionMap::SamePoint(p) => write!(f, "SamePoint({} points)", p.points()),
            ConnectionMap::WithinRadius { geom, radius, .. } => {
                write!(f, "WithinRadius(m={}, r={})", geom.m, radius)
            }
        }
    }
}

impl ConnectionMap {
    /// All-pairs-connected map over `states` states.
    pub fn always(states: usize) -> Self {
        ConnectionMap::Matrix(ConnMatrix::from_predicate(states, |_, _| true))
    }

    /// No-edge map over `states` states.
    pub fn never(states: usize) -> Self {
        ConnectionMap::Matrix(ConnMatrix::from_predicate(states, |_, _| false))
    }

    pub fn state_count(&self) -> usize {
        match self {
            ConnectionMap::Matrix(m) => m.states(),
            ConnectionMap::SamePoint(p) | ConnectionMap::WithinRadius { proj: p, .. } => {
                p.point_of().len()
            }
        }
    }

    /// Number of loci the map factors through.
    pub fn locus_count(&self) -> usize {
        match self {
            ConnectionMap::Matrix(m) => m.states(),
            ConnectionMap::SamePoint(p) | ConnectionMap::WithinRadius { proj: p, .. } => p.points(),
        }
    }

    /// Locus of a state (identity for matrix maps).
    #[inline]
    pub fn locus_of(&self, state: usize) -> usize {
        match self {
            ConnectionMap::Matrix(_) => state,
            ConnectionMap::SamePoint(p) | ConnectionMap::WithinRadius { proj: p, .. } => {
                p.point_of()[state] as usize
            }
        }
    }

    /// `C(x, y)` at state level.
    pub fn connects(&self, x: usize, y: usize) -> bool {
        self.loci_connect(self.locus_of(x), self.locus_of(y))
    }

    /// Connection decision at locus level.
    pub fn loci_connect(&self, u: usize, w: usize) -> bool {
        match self {
            ConnectionMap::Matrix(m) => m.get(u, w),
            ConnectionMap::SamePoint(_) => u == w,
            ConnectionMap::WithinRadius { geom, radius, .. } => {
                geom.dist2(u, w) <= radius * radius + 1e-12
            }
        }
    }

    /// Neighbor loci `Γ` per locus, ascending. This is both the analytic
    /// object behind the edge-probability parameters and the adjacency the
    /// snapshot builder iterates.
    pub fn locus_gamma(&self) -> Vec<Vec<u32>> {
        match self {
            ConnectionMap::Matrix(m) => (0..m.states()).map(|x| m.row_members(x)).collect(),
            ConnectionMap::SamePoint(p) => (0..p.points()).map(|u| vec![u as u32]).collect(),
            ConnectionMap::WithinRadius { proj, geom, radius } => {
                (0..proj.points()).map(|u| geom.disk(u, *radius)).collect()
            }
        }
    }

    /// Geometry, when the map is grid-based.
    pub fn geometry(&self) -> Option<&GridGeometry> {
        match self {
            ConnectionMap::WithinRadius { geom, .. } => Some(geom),
            _ => None,
        }
    }
}

/// The locus-level view of a node-driven model: stationary locus marginal
/// `f`, neighbor lists `Γ`, and the per-locus connection probability
/// `q(u) = Σ_{w ∈ Γ(u)} f(w)`.
#[derive(Debug, Clone)]
pub struct LocusView {
    pub f: Vec<f64>,
    pub gamma: Vec<Vec<u32>>,
    pub q: Vec<f64>,
}

impl LocusView {
    pub fn new(f: Vec<f64>, gamma: Vec<Vec<u32>>) -> Self {
        assert_eq!(f.len(), gamma.len());
        let q = gamma
            .iter()
            .map(|nb| nb.iter().map(|&w| f[w as usize]).sum())
            .collect();
        Self { f, gamma, q }
    }

    /// Stationary probability that two fixed nodes are connected:
    /// `Σ_u f(u) q(u)`.
    pub fn p_nm(&self) -> f64 {
        self.f.iter().zip(&self.q).map(|(&f, &q)| f * q).sum()
    }

    /// Stationary probability that two fixed nodes are both connected to a
    /// third: `Σ_u f(u) q(u)²`.
    pub fn p_nm2(&self) -> f64 {
        self.f.iter().zip(&self.q).map(|(&f, &q)| f * q * q).sum()
    }

    /// Mass of `Γ(u) ∪ Γ(w)` by sorted-merge.
    pub fn union_mass(&self, u: usize, w: usize) -> f64 {
        let (a, b) = (&self.gamma[u], &self.gamma[w]);
        let (mut i, mut j) = (0usize, 0usize);
        let mut mass = 0.0;
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => {
                    if x == y {
                        i += 1;
                        j += 1;
                        x
                    } else if x < y {
                        i += 1;
                        x
                    } else {
                        j += 1;
                        y
                    }
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => break,
            };
            mass += self.f[next as usize];
        }
        mass
    }

    /// Exact `P(e_{k,A})` for `|A| = a`: `1 − Σ_u f(u)(1 − q(u))^a`.
    pub fn contact_prob(&self, a: u32) -> f64 {
        let miss: f64 = self
            .f
            .iter()
            .zip(&self.q)
            .map(|(&f, &q)| f * (1.0 - q).powi(a as i32))
            .sum();
        1.0 - miss
    }

    /// Exact `P(e_{i,A} · e_{j,A})` for `|A| = a` by enumeration over locus
    /// pairs (inclusion–exclusion over the shared target set).
    pub fn joint_contact_prob(&self, a: u32) -> f64 {
        let n = self.f.len();
        let mut total = 0.0;
        for u in 0..n {
            if self.f[u] == 0.0 {
                continue;
            }
            let miss_u = (1.0 - self.q[u]).powi(a as i32);
            for w in 0..n {
                if self.f[w] == 0.0 {
                    continue;
                }
                let miss_w = (1.0 - self.q[w]).powi(a as i32);
                let miss_both = (1.0 - self.union_mass(u, w)).powi(a as i32);
                total += self.f[u] * self.f[w] * (1.0 - miss_u - miss_w + miss_both);
            }
        }
        total
    }
}
