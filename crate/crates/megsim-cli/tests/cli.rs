//! Integration checks of the experiment runner surface: explicit JSON
//! configs (including node-model files), the analytic `bound` stage, and
//! output-file structure.

use megsim_cli::config::ExperimentConfig;
use megsim_cli::runner::{analyze_sweep_point, run_sweep_point};

#[test]
fn node_meg_model_file_loads_and_runs() {
    // Two-point meeting model as an explicit JSON definition: rank-one
    // kernel, matrix connection.
    let text = r#"{
        "label": "point-meeting-file",
        "model": {
            "kind": "node_meg",
            "kernel": {"builtin": "rank_one", "weights": [0.9, 0.1]},
            "connection": {"type": "matrix", "rows": [[1, 0], [0, 0]]}
        },
        "sweep": [8],
        "seed": 5,
        "trials": 16,
        "estimators": {"enabled": true, "trials": 4, "samples_per_trial": 64,
                        "burn_in_epochs": 2}
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
    cfg.validate().unwrap();
    let outcome = run_sweep_point(&cfg, 8).unwrap();
    let r = &outcome.record;
    assert!((r.p_nm.unwrap() - 0.81).abs() < 1e-9);
    assert!((r.eta.unwrap() - 0.729 / 0.6561).abs() < 1e-6);
    assert!(r.bound_node_meg.unwrap() > 0.0);
    assert_eq!(r.timeout_rate, 0.0);
    // The estimated density should straddle the analytic value.
    let alpha = outcome.alpha.unwrap();
    assert!(
        (alpha.value - 0.81).abs() <= alpha.radius + 0.02,
        "alpha {} ± {} should cover 0.81",
        alpha.value,
        alpha.radius
    );
}

#[test]
fn node_meg_init_modes_parse_and_apply() {
    // Explicit point-mass start at the disconnected state: with a slow
    // chain the first snapshots stay empty far more often than at
    // stationarity.
    let text = r#"{
        "label": "explicit-init",
        "model": {
            "kind": "node_meg",
            "kernel": {"builtin": "two_state", "p": 0.05, "q": 0.05},
            "connection": {"type": "matrix", "rows": [[0, 0], [0, 1]]},
            "init": {"explicit": [[1.0, 0.0]]}
        },
        "sweep": [6],
        "seed": 11,
        "trials": 12,
        "step_cap": 400,
        "estimators": {"enabled": false, "trials": 0, "samples_per_trial": 0,
                        "burn_in_epochs": 0}
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
    let outcome = run_sweep_point(&cfg, 6).unwrap();
    // From the all-off start, flooding needs the chains to climb into the
    // connected state first; the median must exceed the stationary-start
    // baseline of the same model.
    let slow = outcome.record.flood_median.unwrap();
    let text_stationary = text.replace(
        r#""init": {"explicit": [[1.0, 0.0]]}"#,
        r#""init": "stationary""#,
    );
    let cfg: ExperimentConfig = serde_json::from_str(&text_stationary).unwrap();
    let fast = run_sweep_point(&cfg, 6)
        .unwrap()
        .record
        .flood_median
        .unwrap();
    assert!(
        slow > fast,
        "cold start median {slow} should exceed stationary start {fast}"
    );
}

#[test]
fn within_radius_connection_loads_from_json() {
    // Four i.i.d.-uniform states on a 2×2 grid with radius one cell: each
    // corner connects to itself and its two axis neighbors, so
    // P_NM = Σ_u F(u)·Q(u) = 0.75.
    let text = r#"{
        "label": "geometric-file",
        "model": {
            "kind": "node_meg",
            "kernel": {"builtin": "rank_one", "weights": [0.25, 0.25, 0.25, 0.25]},
            "connection": {"type": "within_radius", "point_of": [0, 1, 2, 3],
                            "m": 2, "cell": 1.0, "radius": 1.0}
        },
        "sweep": [6],
        "seed": 2,
        "trials": 8,
        "estimators": {"enabled": false, "trials": 0, "samples_per_trial": 0,
                        "burn_in_epochs": 0}
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
    let outcome = run_sweep_point(&cfg, 6).unwrap();
    assert!((outcome.record.p_nm.unwrap() - 0.75).abs() < 1e-9);
    assert_eq!(outcome.record.timeout_rate, 0.0);
}

#[test]
fn explicit_dense_kernel_config_round_trips() {
    let text = r#"{
        "label": "dense-kernel",
        "model": {
            "kind": "edge_meg",
            "kernel": {"states": 3,
                        "rows": [[0.2, 0.4, 0.4], [0.4, 0.2, 0.4], [0.4, 0.4, 0.2]]},
            "chi": [1, 0, 0]
        },
        "sweep": [12],
        "seed": 9,
        "trials": 8,
        "estimators": {"enabled": false, "trials": 0, "samples_per_trial": 0,
                        "burn_in_epochs": 0}
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
    let outcome = run_sweep_point(&cfg, 12).unwrap();
    // Uniform stationary chain with chi on one state: alpha = 1/3.
    assert!((outcome.record.alpha_analytic.unwrap() - 1.0 / 3.0).abs() < 1e-9);
    assert!(outcome.record.bound_edge.unwrap() > 0.0);
}

#[test]
fn bound_stage_refuses_unverified_preconditions() {
    // A non-reversible path family (only one backward edge, which also
    // breaks the periodicity of pure forward drift): the path-model bound
    // must be refused and annotated, while the generic node bound still
    // evaluates.
    let text = r#"{
        "label": "one-way-cycle",
        "model": {
            "kind": "random_paths",
            "graph": {"generator": "cycle", "m": 5},
            "paths": {"paths": [[0,1],[1,2],[2,3],[3,4],[4,0],[1,0],
                                  [0,1,2],[1,2,3],[2,3,4],[3,4,0],[4,0,1]]}
        },
        "sweep": [10],
        "seed": 3,
        "trials": 4
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
    let analysis = analyze_sweep_point(&cfg, 10).unwrap();
    assert!(analysis.bounds.bound_node_meg.is_some());
    assert!(analysis.bounds.bound_path_family.is_none());
    assert!(
        analysis
            .bounds
            .preconditions
            .iter()
            .any(|p| p.starts_with("path-family:refused")),
        "refusal must be annotated: {:?}",
        analysis.bounds.preconditions
    );
}

#[test]
fn strict_mode_propagates_model_failures() {
    // Degenerate waypoint geometry: radius larger than the diagonal.
    let text = r#"{
        "label": "bad-waypoint",
        "model": {"kind": "waypoint", "side": 4.0, "radius": 100.0,
                   "v_min": 1.0, "v_max": 1.0},
        "sweep": [8],
        "seed": 3,
        "trials": 2
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
    let dir = std::env::temp_dir().join(format!("megsim-cli-test-{}", std::process::id()));
    let err = megsim_cli::run_experiment(&cfg, &dir, 1, true).unwrap_err();
    assert!(format!("{err:#}").contains("diagonal"), "{err:#}");
    // Non-strict: the failure is recorded but the run errors out only
    // because no sweep point succeeded at all.
    let err = megsim_cli::run_experiment(&cfg, &dir, 1, false).unwrap_err();
    assert!(format!("{err:#}").contains("no sweep point succeeded"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn binary_surface_works_end_to_end() {
    let bin = env!("CARGO_BIN_EXE_megsim");
    let out = std::process::Command::new(bin)
        .arg("presets")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "edge-meg-sweep",
        "waypoint-sparse",
        "k-augmented-grid",
        "cycle-paths",
    ] {
        assert!(text.contains(name), "preset listing must include {name}");
    }

    let out = std::process::Command::new(bin)
        .args(["verify", "--samples", "60", "--seed", "3"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 4,
        "verify output:\n{text}"
    );

    // simulate from an explicit config file.
    let dir = std::env::temp_dir().join(format!("megsim-bin-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"label":"bin-smoke",
            "model":{"kind":"edge_meg","p":0.2,"q":0.4},
            "sweep":[10],"seed":4,"trials":6,
            "estimators":{"enabled":false,"trials":0,"samples_per_trial":0,
                           "burn_in_epochs":0}}"#,
    )
    .unwrap();
    let out = std::process::Command::new(bin)
        .args([
            "simulate",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
            "--workers",
            "2",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["records.csv", "runs.csv", "summary.json"] {
        assert!(dir.join("out").join(f).exists(), "{f} missing");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn records_csv_has_frozen_header() {
    let header = megsim_cli::output::RECORD_COLUMNS.join(",");
    assert!(header.starts_with(
        "schema_version,config_hash,model_id,n,seed,trials,epoch_len,step_cap,flood_median"
    ));
    assert!(header.ends_with("preconditions,warnings"));
    let runs = megsim_cli::output::RUN_COLUMNS.join(",");
    assert_eq!(
        runs,
        "model_id,n,seed,source,flood_time,spreading_time,saturation_time,timeout_flag"
    );
}
