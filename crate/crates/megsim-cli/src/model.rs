//! Turns a model spec plus a sweep point `n` into a runnable process with
//! its analytic parameters.

use anyhow::{anyhow, bail, Context, Result};

use megsim::dynamic::MegProcess;
use megsim::edge_meg::{EdgeChainSpec, EdgeMeg};
use megsim::markov::TransitionKernel;
use megsim::mobility::{
    self, build_random_path, build_random_waypoint, edge_paths, graph_delta, path_family_checks,
    FamilyChecks, MobilityGraph, PathFamily, WaypointConfig,
};
use megsim::node_meg::{
    AnalyticsConfig, ConnMatrix, ConnectionMap, GridGeometry, InitMode, NodeMeg, PointProjection,
};

use crate::config::{ConnectionSpec, GraphSpec, InitSpec, ModelSpec, PathsSpec};
use megsim::markov::Distribution;

/// A built model instance at one sweep point.
pub struct BuiltModel {
    pub process: Box<dyn MegProcess>,
    pub kind: ModelKind,
    pub warnings: Vec<String>,
}

pub enum ModelKind {
    Edge {
        spec: EdgeChainSpec,
        /// (p, q) when the two-state shortcut was used.
        rates: Option<(f64, f64)>,
    },
    Node {
        nm: NodeMeg,
        /// Family regularity and point count, for path models.
        family: Option<(FamilyChecks, usize)>,
        /// Degree regularity, for walk models.
        graph_delta: Option<f64>,
        /// Geometry and radius, for the waypoint.
        waypoint: Option<WaypointInfo>,
    },
}

pub struct WaypointInfo {
    pub radius: f64,
    pub cell: f64,
    pub states: usize,
    pub radius_over_cell: f64,
}

fn build_graph(spec: &GraphSpec) -> Result<MobilityGraph> {
    match spec {
        GraphSpec::Generator { generator, m, k } => {
            let m_of = |d: usize| m.unwrap_or(d);
            Ok(match generator.as_str() {
                "grid" => MobilityGraph::grid(m_of(8)),
                "k_augmented_grid" => MobilityGraph::k_augmented_grid(m_of(8), k.unwrap_or(2)),
                "cycle" => MobilityGraph::cycle(m_of(8)),
                "star" => MobilityGraph::star(m_of(4)),
                "path" => MobilityGraph::path(m_of(8)),
                other => bail!("unknown graph generator {other:?}"),
            })
        }
        GraphSpec::Explicit { points, edges } => Ok(MobilityGraph::new(
            *points,
            edges.clone(),
            None,
            "explicit",
        )?),
    }
}

fn build_family(h: &MobilityGraph, spec: &PathsSpec) -> Result<PathFamily> {
    match spec {
        PathsSpec::Named(name) if name == "edges" => Ok(edge_paths(h)),
        PathsSpec::Named(other) => bail!("unknown path family {other:?}"),
        PathsSpec::Explicit { paths } => Ok(PathFamily::from_paths(h, paths.clone())?),
    }
}

/// Builds the model at sweep point `n`. Analytics streams derive from
/// `seed` so a config is fully reproducible.
pub fn build_model(spec: &ModelSpec, n: usize, seed: u64) -> Result<BuiltModel> {
    let acfg = AnalyticsConfig {
        seed,
        ..AnalyticsConfig::default()
    };
    match spec {
        ModelSpec::EdgeMeg { p, q, kernel, chi } => {
            let (chain_spec, rates) = match (p, q, kernel, chi) {
                (Some(p), Some(q), None, None) => {
                    let (pv, qv) = (p.value(n), q.value(n));
                    let kernel = TransitionKernel::two_state(pv, qv)?;
                    (
                        EdgeChainSpec::new(kernel, vec![false, true], None)?,
                        Some((pv, qv)),
                    )
                }
                (None, None, Some(kernel), Some(chi)) => {
                    let kernel = TransitionKernel::try_from(kernel.clone())?;
                    let chi = chi.iter().map(|&v| v != 0).collect();
                    (EdgeChainSpec::new(kernel, chi, None)?, None)
                }
                _ => bail!("edge model needs either rates (p, q) or an explicit kernel with chi"),
            };
            let mut warnings = Vec::new();
            if chain_spec.is_degenerate() {
                warnings.push("edge chain is degenerate: no on-state at stationarity".into());
            }
            let meg = EdgeMeg::new(n, chain_spec.clone())?;
            Ok(BuiltModel {
                process: Box::new(meg),
                kind: ModelKind::Edge {
                    spec: chain_spec,
                    rates,
                },
                warnings,
            })
        }
        ModelSpec::NodeMeg {
            kernel,
            connection,
            init,
        } => {
            let kernel = TransitionKernel::try_from(kernel.clone())?;
            let connection = match connection {
                ConnectionSpec::Matrix { rows } => {
                    ConnectionMap::Matrix(ConnMatrix::from_rows(rows)?)
                }
                ConnectionSpec::SamePoint { point_of, points } => {
                    ConnectionMap::SamePoint(PointProjection::new(point_of.clone(), *points)?)
                }
                ConnectionSpec::WithinRadius {
                    point_of,
                    m,
                    cell,
                    radius,
                } => ConnectionMap::WithinRadius {
                    proj: PointProjection::new(point_of.clone(), m * m)?,
                    geom: GridGeometry {
                        m: *m,
                        cell: *cell,
                        wrap: false,
                    },
                    radius: *radius,
                },
            };
            let init_mode = match init {
                InitSpec::Stationary => InitMode::Stationary,
                InitSpec::BurnIn(steps) => InitMode::BurnIn(*steps),
                InitSpec::Explicit(weights) => InitMode::Explicit(
                    weights
                        .iter()
                        .map(|w| Distribution::new(w.clone()))
                        .collect::<Result<Vec<_>, _>>()?,
                ),
            };
            let nm = NodeMeg::new(n, kernel, connection, init_mode, &acfg)?;
            Ok(BuiltModel {
                process: Box::new(nm.as_meg()),
                kind: ModelKind::Node {
                    nm,
                    family: None,
                    graph_delta: None,
                    waypoint: None,
                },
                warnings: Vec::new(),
            })
        }
        ModelSpec::RandomWalk { graph, lazy } => {
            let h = build_graph(graph)?;
            let family = edge_paths(&h);
            let checks = path_family_checks(&h, &family);
            let delta = graph_delta(&h);
            let nm = if let Some(stay) = lazy {
                let (kernel, conn) = mobility::path_chain(&h, &family)?;
                let kernel = kernel.lazify(*stay)?;
                NodeMeg::with_label(
                    n,
                    kernel,
                    conn,
                    InitMode::Stationary,
                    &acfg,
                    format!("lazy-walk-{}", h.label()),
                )?
            } else {
                mobility::build_random_walk(&h, n, &acfg)?
            };
            Ok(BuiltModel {
                process: Box::new(nm.as_meg()),
                kind: ModelKind::Node {
                    nm,
                    family: Some((checks, h.points())),
                    graph_delta: Some(delta),
                    waypoint: None,
                },
                warnings: Vec::new(),
            })
        }
        ModelSpec::RandomPaths { graph, paths } => {
            let h = build_graph(graph)?;
            let family = build_family(&h, paths)?;
            let checks = path_family_checks(&h, &family);
            let nm = build_random_path(&h, &family, n, &acfg)?;
            Ok(BuiltModel {
                process: Box::new(nm.as_meg()),
                kind: ModelKind::Node {
                    nm,
                    family: Some((checks, h.points())),
                    graph_delta: Some(graph_delta(&h)),
                    waypoint: None,
                },
                warnings: Vec::new(),
            })
        }
        ModelSpec::Waypoint {
            side,
            radius,
            v_min,
            v_max,
            m,
            cell,
        } => {
            let side = side.value(n);
            let cfg = match (m, cell) {
                (Some(m), _) => WaypointConfig {
                    m: *m,
                    side,
                    radius: *radius,
                    v_min: *v_min,
                    v_max: *v_max,
                },
                (None, Some(cell)) => WaypointConfig {
                    m: ((side / cell).round() as usize + 1).max(2),
                    side,
                    radius: *radius,
                    v_min: *v_min,
                    v_max: *v_max,
                },
                (None, None) => {
                    WaypointConfig::with_default_resolution(side, *radius, *v_min, *v_max)
                }
            };
            let model = build_random_waypoint(&cfg, n, &acfg)
                .with_context(|| format!("waypoint at n = {n}"))?;
            Ok(BuiltModel {
                process: Box::new(model.node_meg.as_meg()),
                kind: ModelKind::Node {
                    nm: model.node_meg.clone(),
                    family: None,
                    graph_delta: None,
                    waypoint: Some(WaypointInfo {
                        radius: *radius,
                        cell: model.cell,
                        states: model.states,
                        radius_over_cell: model.radius_over_cell,
                    }),
                },
                warnings: model.warnings,
            })
        }
    }
}

impl ModelKind {
    /// Analytic stationary edge probability, when the model defines one.
    pub fn alpha_analytic(&self) -> Option<f64> {
        match self {
            ModelKind::Edge { spec, .. } => Some(spec.alpha()),
            ModelKind::Node { nm, .. } => Some(nm.p_nm()),
        }
    }

    pub fn node_meg(&self) -> Option<&NodeMeg> {
        match self {
            ModelKind::Node { nm, .. } => Some(nm),
            _ => None,
        }
    }

    pub fn two_state_rates(&self) -> Option<(f64, f64)> {
        match self {
            ModelKind::Edge { rates, .. } => *rates,
            _ => None,
        }
    }
}

pub fn anyhow_from<E: std::error::Error + Send + Sync + 'static>(e: E) -> anyhow::Error {
    anyhow!(e)
}
