//! Random-path mobility: nodes repeatedly pick a uniform feasible path
//! starting at their current point and traverse it point by point. The
//! induced chain has one state per (path, position ≥ 2) pair: interior moves
//! are deterministic, and at a path's end the next path is uniform over the
//! family's paths starting there. Two nodes are connected exactly when they
//! occupy the same point.
//!
//! The random walk over a graph is the special case where the family is the
//! edge set taken in both directions.

use std::collections::HashSet;

use super::{graph::MobilityGraph, MobilityError};
use crate::markov::TransitionKernel;
use crate::node_meg::{AnalyticsConfig, ConnectionMap, InitMode, NodeMeg, PointProjection};

/// A family of feasible paths over a mobility graph, with start indices and
/// pass-through counts.
#[derive(Debug, Clone)]
pub struct PathFamily {
    paths: Vec<Vec<u32>>,
    /// Indices of paths starting at each point.
    starts: Vec<Vec<u32>>,
    /// `#P(u)`: number of paths passing through `u` (positions 2..ℓ).
    through: Vec<u32>,
}

impl PathFamily {
    /// Validates adjacency along each path, minimum length, and the closure
    /// property: wherever a path ends, some path starts.
    pub fn from_paths(h: &MobilityGraph, paths: Vec<Vec<u32>>) -> Result<Self, MobilityError> {
        if paths.is_empty() {
            return Err(MobilityError::BadFamily("empty family".into()));
        }
        let points = h.points();
        let mut starts: Vec<Vec<u32>> = vec![Vec::new(); points];
        let mut through: Vec<u32> = vec![0; points];
        for (idx, path) in paths.iter().enumerate() {
            if path.len() < 2 {
                return Err(MobilityError::BadFamily(format!(
                    "path {idx} has {} points, need at least 2",
                    path.len()
                )));
            }
            for w in path.windows(2) {
                if w[0] as usize >= points || w[1] as usize >= points {
                    return Err(MobilityError::BadFamily(format!(
                        "path {idx} leaves the point set"
                    )));
                }
                if !h.neighbors(w[0] as usize).contains(&w[1]) {
                    return Err(MobilityError::BadFamily(format!(
                        "path {idx} uses missing edge ({}, {})",
                        w[0], w[1]
                    )));
                }
            }
            starts[path[0] as usize].push(idx as u32);
            let mut seen: HashSet<u32> = HashSet::new();
            for &p in &path[1..] {
                if seen.insert(p) {
                    through[p as usize] += 1;
                }
            }
        }
        for path in &paths {
            let end = *path.last().expect("non-empty") as usize;
            if starts[end].is_empty() {
                return Err(MobilityError::BadFamily(format!(
                    "no path starts at point {end}, where another path ends"
                )));
            }
        }
        Ok(Self {
            paths,
            starts,
            through,
        })
    }

    /// All single-edge paths of `h`, both directions: the random walk family.
    pub fn edges(h: &MobilityGraph) -> Self {
        edge_paths(h)
    }

    pub fn paths(&self) -> &[Vec<u32>] {
        &self.paths
    }

    pub fn starting_at(&self, point: usize) -> &[u32] {
        &self.starts[point]
    }

    /// `#P(u)`.
    pub fn through_count(&self, point: usize) -> u32 {
        self.through[point]
    }

    /// Number of chain states: `Σ_h (ℓ(h) − 1)`.
    pub fn state_count(&self) -> usize {
        self.paths.iter().map(|p| p.len() - 1).sum()
    }
}

/// All single-edge paths in both directions.
pub fn edge_paths(h: &MobilityGraph) -> PathFamily {
    let mut paths = Vec::with_capacity(2 * h.edges().len());
    for &(a, b) in h.edges() {
        paths.push(vec![a, b]);
        paths.push(vec![b, a]);
    }
    PathFamily::from_paths(h, paths).expect("edge family is always valid")
}

/// Family-level regularity report.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FamilyChecks {
    /// No path revisits a point (start = end allowed).
    pub simple: bool,
    /// Every path's reverse is in the family.
    pub reversible: bool,
    /// Least `δ` with `#P(u) ≤ δ · avg_v #P(v)` for all `u`.
    pub delta: f64,
}

/// Verifies simplicity and reversibility exhaustively and computes the
/// point-congestion regularity `δ`.
pub fn path_family_checks(h: &MobilityGraph, family: &PathFamily) -> FamilyChecks {
    let simple = family.paths.iter().all(|path| {
        let inner = &path[1..];
        let mut seen: HashSet<u32> = HashSet::new();
        let inner_distinct = inner.iter().all(|&p| seen.insert(p));
        // The start may coincide with the end but with nothing else.
        let start_ok = !path[1..path.len() - 1].contains(&path[0]);
        inner_distinct && start_ok
    });
    let set: HashSet<&[u32]> = family.paths.iter().map(|p| p.as_slice()).collect();
    let reversible = family.paths.iter().all(|p| {
        let rev: Vec<u32> = p.iter().rev().copied().collect();
        set.contains(rev.as_slice())
    });
    let total: u64 = (0..h.points())
        .map(|u| family.through_count(u) as u64)
        .sum();
    let avg = total as f64 / h.points() as f64;
    let max = (0..h.points())
        .map(|u| family.through_count(u))
        .max()
        .unwrap_or(0);
    FamilyChecks {
        simple,
        reversible,
        delta: if avg > 0.0 {
            max as f64 / avg
        } else {
            f64::NAN
        },
    }
}

/// The chain and connection map of a random-path model, reusable for custom
/// initializations.
pub fn path_chain(
    h: &MobilityGraph,
    family: &PathFamily,
) -> Result<(TransitionKernel, ConnectionMap), MobilityError> {
    // State layout: states of path p occupy offsets[p] .. offsets[p+1],
    // one per position 2..=ℓ(p).
    let mut offsets = Vec::with_capacity(family.paths.len() + 1);
    offsets.push(0usize);
    for p in family.paths() {
        offsets.push(offsets.last().unwrap() + (p.len() - 1));
    }
    let states = *offsets.last().unwrap();
    let mut point_of = vec![0u32; states];
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); states];
    for (pi, path) in family.paths().iter().enumerate() {
        let base = offsets[pi];
        for (slot, &point) in path[1..].iter().enumerate() {
            point_of[base + slot] = point;
        }
        // Interior: deterministic advance along the path.
        for slot in 0..path.len() - 2 {
            rows[base + slot].push((base + slot + 1, 1.0));
        }
        // End: uniform over the paths starting at the end point.
        let end_state = base + path.len() - 2;
        let choices = family.starting_at(*path.last().unwrap() as usize);
        let p = 1.0 / choices.len() as f64;
        for &next in choices {
            rows[end_state].push((offsets[next as usize], p));
        }
    }
    let kernel = TransitionKernel::from_sparse_rows(rows)
        .map_err(|e| MobilityError::BadFamily(format!("chain construction: {e}")))?;
    let proj =
        PointProjection::new(point_of, h.points()).map_err(crate::node_meg::NodeMegError::from)?;
    Ok((kernel, ConnectionMap::SamePoint(proj)))
}

/// Builds the random-path node-MEG over `n` nodes, starting at stationarity.
pub fn build_random_path(
    h: &MobilityGraph,
    family: &PathFamily,
    n: usize,
    cfg: &AnalyticsConfig,
) -> Result<NodeMeg, MobilityError> {
    let (kernel, conn) = path_chain(h, family)?;
    let kernel = kernel.with_label(format!("paths({})", h.label()));
    Ok(NodeMeg::with_label(
        n,
        kernel,
        conn,
        InitMode::Stationary,
        cfg,
        format!("random-paths-{}", h.label()),
    )?)
}

/// Random walk over `h`: the random-path model with single-edge paths.
pub fn build_random_walk(
    h: &MobilityGraph,
    n: usize,
    cfg: &AnalyticsConfig,
) -> Result<NodeMeg, MobilityError> {
    let family = edge_paths(h);
    let (kernel, conn) = path_chain(h, &family)?;
    let kernel = kernel.with_label(format!("walk({})", h.label()));
    Ok(NodeMeg::with_label(
        n,
        kernel,
        conn,
        InitMode::Stationary,
        cfg,
        format!("random-walk-{}", h.label()),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::DEFAULT_MIXING_EPS;
    use crate::node_meg::NodeMegError;

    /// Edge paths plus both directions of every 2-hop arc; mixing lengths
    /// keeps the chain aperiodic on odd cycles.
    pub(crate) fn mixed_cycle_family(m: usize) -> (MobilityGraph, PathFamily) {
        let h = MobilityGraph::cycle(m);
        let mut paths: Vec<Vec<u32>> = Vec::new();
        for u in 0..m as u32 {
            let a = (u + 1) % m as u32;
            let b = (u + 2) % m as u32;
            paths.push(vec![u, a]);
            paths.push(vec![a, u]);
            paths.push(vec![u, a, b]);
            paths.push(vec![b, a, u]);
        }
        paths.sort();
        paths.dedup();
        let family = PathFamily::from_paths(&h, paths).unwrap();
        (h, family)
    }

    #[test]
    fn family_validation_catches_broken_paths() {
        let h = MobilityGraph::cycle(5);
        assert!(matches!(
            PathFamily::from_paths(&h, vec![vec![0]]),
            Err(MobilityError::BadFamily(_))
        ));
        assert!(matches!(
            PathFamily::from_paths(&h, vec![vec![0, 2]]),
            Err(MobilityError::BadFamily(_))
        ));
    }

    #[test]
    fn closure_violation_detected() {
        let h = MobilityGraph::path(3);
        // A path ends at point 2 but nothing starts there.
        let err = PathFamily::from_paths(&h, vec![vec![0, 1], vec![1, 2]]);
        assert!(matches!(err, Err(MobilityError::BadFamily(msg)) if msg.contains("point 2")));
    }

    #[test]
    fn edge_paths_on_regular_graph_have_delta_one() {
        let h = MobilityGraph::cycle(6);
        let family = edge_paths(&h);
        let checks = path_family_checks(&h, &family);
        assert!(checks.simple && checks.reversible);
        assert_eq!(checks.delta, 1.0);
    }

    #[test]
    fn star_edge_paths_delta_matches_hand_count() {
        // #P(center) = k, #P(leaf) = 1: delta = (k + 1) / 2.
        let k = 5;
        let h = MobilityGraph::star(k);
        let family = edge_paths(&h);
        let checks = path_family_checks(&h, &family);
        assert_eq!(family.through_count(0), k as u32);
        assert_eq!(family.through_count(1), 1);
        assert!((checks.delta - (k as f64 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_reverse_detected() {
        let h = MobilityGraph::cycle(5);
        let mut paths: Vec<Vec<u32>> = Vec::new();
        for u in 0..5u32 {
            paths.push(vec![u, (u + 1) % 5]); // forward edges only
        }
        let family = PathFamily::from_paths(&h, paths).unwrap();
        let checks = path_family_checks(&h, &family);
        assert!(!checks.reversible);
        assert!(checks.simple);
    }

    #[test]
    fn triangle_walk_matches_directed_edge_chain() {
        let h = MobilityGraph::cycle(3);
        let nm = build_random_walk(&h, 8, &AnalyticsConfig::default()).unwrap();
        assert_eq!(nm.kernel().state_count(), 6);
        // Uniform stationary distribution, same-point connection: the
        // per-point mass is deg/(2|E|) = 1/3.
        assert!((nm.p_nm() - 1.0 / 3.0).abs() < 1e-12);
        assert!((nm.p_nm2() - 1.0 / 9.0).abs() < 1e-12);
        assert!((nm.eta().unwrap() - 1.0).abs() < 1e-12);
        // Path-count identity: q(x) = #P(u(x)) / |S|.
        let family = edge_paths(&h);
        for state in 0..6 {
            let point = match nm.connection() {
                ConnectionMap::SamePoint(p) => p.point_of()[state] as usize,
                _ => unreachable!(),
            };
            let expect = family.through_count(point) as f64 / 6.0;
            assert!((nm.state_connect_prob(state) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_cycle_family_is_simple_reversible_regular() {
        let (h, family) = mixed_cycle_family(5);
        let checks = path_family_checks(&h, &family);
        assert!(checks.simple && checks.reversible);
        assert_eq!(checks.delta, 1.0);
        assert_eq!(family.state_count(), 30);
        let nm = build_random_path(&h, &family, 10, &AnalyticsConfig::default()).unwrap();
        // Uniform stationary over 30 states; every point hosts 6 of them.
        let pi = nm.analytics().pi.as_ref().unwrap();
        for x in 0..30 {
            assert!(
                (pi.get(x) - 1.0 / 30.0).abs() < 1e-10,
                "state {x} weight {}",
                pi.get(x)
            );
        }
        assert!((nm.p_nm() - 0.2).abs() < 1e-10);
        assert!((nm.p_nm2() - 0.04).abs() < 1e-10);
        // Aperiodic thanks to mixed path lengths.
        assert!(nm.t_mix().is_ok());
    }

    #[test]
    fn walk_on_two_points_is_periodic_and_reported() {
        let h = MobilityGraph::path(2);
        let nm = build_random_walk(
            &h,
            4,
            &AnalyticsConfig {
                mixing_step_cap: 300,
                ..AnalyticsConfig::default()
            },
        )
        .unwrap();
        assert!(matches!(
            nm.t_mix(),
            Err(NodeMegError::MixingUnavailable(_))
        ));
        assert!(nm
            .analytics()
            .notes
            .iter()
            .any(|note| note.contains("mixing not detected")));
    }

    #[test]
    fn single_closed_tour_rotates_deterministically() {
        let h = MobilityGraph::cycle(4);
        let family = PathFamily::from_paths(&h, vec![vec![0, 1, 2, 3, 0]]).unwrap();
        let (kernel, conn) = path_chain(&h, &family).unwrap();
        assert_eq!(kernel.state_count(), 4);
        // Deterministic rotation: every row is a point mass.
        for s in 0..4 {
            let mut entries = Vec::new();
            kernel.for_each_successor(s, &mut |y, p| entries.push((y, p)));
            assert_eq!(entries.len(), 1);
            assert_eq!(entries[0].1, 1.0);
        }
        // Two nodes connect iff they share the rotation phase, forever.
        use crate::dynamic::MegProcess;
        use crate::markov::Distribution;
        use crate::node_meg::{InitMode, NodeMeg};
        use rand::SeedableRng;
        let nm = NodeMeg::new(
            2,
            kernel,
            conn,
            InitMode::Explicit(vec![
                Distribution::point_mass(4, 0),
                Distribution::point_mass(4, 2),
            ]),
            &AnalyticsConfig {
                mixing_step_cap: 100,
                ..AnalyticsConfig::default()
            },
        )
        .unwrap();
        let mut meg = nm.as_meg();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0);
        meg.reset(&mut rng);
        for _ in 0..12 {
            let snap = meg.advance(&mut rng);
            assert_eq!(snap.edge_count(), 0, "offset phases never meet");
        }
        let nm_same = NodeMeg::new(
            2,
            path_chain(&h, &family).unwrap().0,
            path_chain(&h, &family).unwrap().1,
            InitMode::Explicit(vec![Distribution::point_mass(4, 1)]),
            &AnalyticsConfig {
                mixing_step_cap: 100,
                ..AnalyticsConfig::default()
            },
        )
        .unwrap();
        let mut meg = nm_same.as_meg();
        meg.reset(&mut rng);
        for _ in 0..12 {
            let snap = meg.advance(&mut rng);
            assert_eq!(snap.edge_count(), 1, "same phase stays connected");
        }
    }

    #[test]
    fn simple_reversible_families_have_uniform_occupancy() {
        // Three distinct simple + reversible families: long-run state
        // occupancy is within TV 0.05 of uniform (the analytic stationary
        // distribution for such families).
        use crate::markov::{sample_trajectory, total_variation, Distribution};
        use rand::SeedableRng;
        let grid3 = MobilityGraph::grid(3);
        let cases: Vec<(&str, TransitionKernel)> = vec![
            (
                "cycle5-edges",
                path_chain(
                    &MobilityGraph::cycle(5),
                    &edge_paths(&MobilityGraph::cycle(5)),
                )
                .unwrap()
                .0,
            ),
            ("cycle5-mixed", {
                let (h, family) = mixed_cycle_family(5);
                path_chain(&h, &family).unwrap().0
            }),
            (
                "grid3-edges",
                path_chain(&grid3, &edge_paths(&grid3)).unwrap().0,
            ),
        ];
        for (name, kernel) in cases {
            let states = kernel.state_count();
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(61);
            let traj = sample_trajectory(&kernel, &Distribution::uniform(states), 80_000, &mut rng)
                .unwrap();
            let mut counts = vec![0u64; states];
            for &s in &traj[2000..] {
                counts[s] += 1;
            }
            let kept = (traj.len() - 2000) as f64;
            let occ: Vec<f64> = counts.iter().map(|&c| c as f64 / kept).collect();
            let tv = total_variation(&occ, &vec![1.0 / states as f64; states]).unwrap();
            assert!(tv <= 0.05, "{name}: occupancy TV {tv} above 0.05");
        }
    }

    #[test]
    fn edge_family_delta_matches_degree_computation() {
        // Cross-oracle: for the single-edge family #P(u) = deg(u), so the
        // family regularity equals max deg over average deg.
        for h in [
            MobilityGraph::star(6),
            MobilityGraph::grid(4),
            MobilityGraph::cycle(7),
        ] {
            let family = edge_paths(&h);
            let checks = path_family_checks(&h, &family);
            let degs: Vec<f64> = (0..h.points()).map(|u| h.degree(u) as f64).collect();
            let avg = degs.iter().sum::<f64>() / degs.len() as f64;
            let expect = degs.iter().fold(0.0f64, |a, &d| a.max(d)) / avg;
            assert!(
                (checks.delta - expect).abs() < 1e-12,
                "{}: family delta {} vs degree-based {expect}",
                h.label(),
                checks.delta
            );
            for u in 0..h.points() {
                assert_eq!(family.through_count(u) as usize, h.degree(u));
            }
        }
    }

    #[test]
    fn augmented_grid_mixing_decreases_in_k() {
        let mut times = Vec::new();
        for k in [2usize, 3] {
            let h = MobilityGraph::k_augmented_grid(6, k);
            let nm = build_random_walk(&h, 8, &AnalyticsConfig::default()).unwrap();
            times.push(nm.t_mix().unwrap().steps);
        }
        assert!(
            times[1] < times[0],
            "mixing should speed up with k: {times:?} (eps = {DEFAULT_MIXING_EPS})"
        );
    }
}
