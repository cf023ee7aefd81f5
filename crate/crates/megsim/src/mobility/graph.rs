//! Mobility graphs: the point spaces nodes move over.

use serde::{Deserialize, Serialize};

use super::MobilityError;

/// A simple connected undirected graph of points, optionally with planar
/// coordinates (grid generators supply them).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobilityGraph {
    adj: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
    coords: Option<Vec<(f64, f64)>>,
    label: String,
}

impl MobilityGraph {
    pub fn new(
        points: usize,
        edges: Vec<(u32, u32)>,
        coords: Option<Vec<(f64, f64)>>,
        label: impl Into<String>,
    ) -> Result<Self, MobilityError> {
        if points == 0 {
            return Err(MobilityError::BadGraph("no points".into()));
        }
        if let Some(c) = &coords {
            if c.len() != points {
                return Err(MobilityError::BadGraph(format!(
                    "{} coordinates for {points} points",
                    c.len()
                )));
            }
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); points];
        let mut norm: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a as usize >= points || b as usize >= points {
                return Err(MobilityError::BadGraph(format!(
                    "edge ({a}, {b}) out of range"
                )));
            }
            if a == b {
                return Err(MobilityError::BadGraph(format!("self-loop at {a}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        for &(a, b) in &norm {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Self {
            adj,
            edges: norm,
            coords,
            label: label.into(),
        };
        if !g.is_connected() {
            return Err(MobilityError::BadGraph("graph is not connected".into()));
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let n = self.points();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v as usize);
                }
            }
        }
        count == n
    }

    pub fn points(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `m × m` grid with unit spacing.
    pub fn grid(m: usize) -> Self {
        Self::k_augmented_grid(m, 1)
    }

    /// Grid plus an edge between any two points at grid hop distance
    /// (Manhattan distance) at most `k`.
    pub fn k_augmented_grid(m: usize, k: usize) -> Self {
        assert!(m >= 2 && k >= 1);
        let idx = |x: usize, y: usize| (y * m + x) as u32;
        let mut edges = Vec::new();
        for y in 0..m {
            for x in 0..m {
                for dy in 0..=k {
                    for dx in 0..=k {
                        if dx + dy == 0 || dx + dy > k {
                            continue;
                        }
                        // Right/up quadrant plus the down-right diagonal
                        // covers each unordered pair once.
                        if x + dx < m && y + dy < m {
                            edges.push((idx(x, y), idx(x + dx, y + dy)));
                        }
                        if dx > 0 && dy > 0 && x + dx < m && y >= dy {
                            edges.push((idx(x, y), idx(x + dx, y - dy)));
                        }
                    }
                }
            }
        }
        let coords = (0..m * m)
            .map(|p| ((p % m) as f64, (p / m) as f64))
            .collect();
        Self::new(m * m, edges, Some(coords), format!("grid{m}x{m}k{k}"))
            .expect("generator is valid")
    }

    pub fn cycle(m: usize) -> Self {
        assert!(m >= 3);
        let edges = (0..m as u32).map(|i| (i, (i + 1) % m as u32)).collect();
        Self::new(m, edges, None, format!("cycle{m}")).expect("generator is valid")
    }

    /// Star with `k` leaves; point 0 is the center.
    pub fn star(k: usize) -> Self {
        assert!(k >= 1);
        let edges = (1..=k as u32).map(|l| (0, l)).collect();
        Self::new(k + 1, edges, None, format!("star{k}")).expect("generator is valid")
    }

    pub fn path(m: usize) -> Self {
        assert!(m >= 2);
        let edges = (0..m as u32 - 1).map(|i| (i, i + 1)).collect();
        Self::new(m, edges, None, format!("path{m}")).expect("generator is valid")
    }
}

/// Degree regularity of the graph: max degree / min degree.
pub fn graph_delta(h: &MobilityGraph) -> f64 {
    let max = (0..h.points()).map(|u| h.degree(u)).max().unwrap_or(0);
    let min = (0..h.points()).map(|u| h.degree(u)).min().unwrap_or(0);
    max as f64 / min as f64
}
