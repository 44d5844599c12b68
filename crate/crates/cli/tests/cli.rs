//! End-to-end checks of the `safeguard` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use safeguard_core::distance::polygon_ellipse_distance;
use safeguard_core::scenario::{RobotConfig, Scenario};
use safeguard_core::{ConvexPolygon, SE2Pose, Vec2};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_safeguard"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    exe().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn values(csv: &Path) -> Vec<(f64, f64, f64)> {
    std::fs::read_to_string(csv)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[1], f[2])
        })
        .collect()
}

#[test]
fn invalid_config_exits_one_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("unicycle_gap.json")).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["sim"]["dt"] = serde_json::json!(-0.01);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, json.to_string()).unwrap();
    let out = run(&["run", s(&bad), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/sim/dt"));

    let out = run(&["run", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_field_is_rejected_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("open_field.json")).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["controller"]["gamma"] = serde_json::json!(1.0);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, json.to_string()).unwrap();
    let out = run(&["run", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/controller"));
}

#[test]
fn bundled_scenarios_run_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["unicycle_gap.json", "narrow_passage.json", "open_field.json", "arm_three_link.json"] {
        let out_dir = dir.path().join(name);
        let out = run(&["run", s(&scenario(name)), "--out", s(&out_dir)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        for file in ["trajectory.csv", "summary.json", "frames.svg"] {
            assert!(out_dir.join(file).exists(), "{name}: {file} missing");
        }
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["goal_reached"], true);
        assert_eq!(summary["exit_code"], 0);
    }
}

#[test]
fn overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "run",
        s(&scenario("open_field.json")),
        "--out",
        s(&dir.path().join("short")),
        "--t-max",
        "1.0",
    ]);
    // the goal cannot be reached in one second
    assert_eq!(out.status.code(), Some(3));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("short/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["goal_reached"], false);
}

#[test]
fn grid_rows_and_conservatism() {
    let dir = tempfile::tempdir().unwrap();
    let (se2, circle) = (dir.path().join("se2.csv"), dir.path().join("circle.csv"));
    let common = ["--resolution", "50", "--theta", "0.7"];
    let out = run(&[&["grid", s(&scenario("narrow_passage.json")), "--out", s(&se2)][..], &common].concat());
    assert!(out.status.success());
    let out = run(&[
        &["grid", s(&scenario("narrow_passage.json")), "--mode", "circle", "--radius", "1", "--out", s(&circle)][..],
        &common,
    ]
    .concat());
    assert!(out.status.success());
    let (a, b) = (values(&se2), values(&circle));
    assert_eq!(a.len(), 2500);
    assert_eq!(b.len(), 2500);
    for (p, q) in a.iter().zip(&b) {
        assert_eq!((p.0, p.1), (q.0, q.1));
        assert!(p.2 >= q.2, "SE(2) {} below circle {} at ({}, {})", p.2, q.2, p.0, p.1);
    }
}

/// Distance from `p` to a polyline given as consecutive points.
fn polyline_distance(points: &[Vec2], p: Vec2) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let t = if d.norm_squared() > 0.0 { ((p - w[0]).dot(&d) / d.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
            (w[0] + t * d - p).norm()
        })
        .chain(points.iter().map(|q| (q - p).norm()))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn zero_contour_follows_penetration_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let (theta, resolution) = (0.4, 100);
    let path = scenario("narrow_passage.json");
    let out = run(&[
        "grid",
        s(&path),
        "--theta",
        &theta.to_string(),
        "--resolution",
        &resolution.to_string(),
        "--levels",
        "0",
        "--out",
        s(&csv),
    ]);
    assert!(out.status.success());

    let mut lines: Vec<Vec<Vec2>> = Vec::new();
    for l in std::fs::read_to_string(dir.path().join("g_level_0.csv")).unwrap().lines().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        let id: usize = f[0].parse().unwrap();
        if lines.len() <= id {
            lines.resize(id + 1, Vec::new());
        }
        lines[id].push(Vec2::new(f[1].parse().unwrap(), f[2].parse().unwrap()));
    }
    assert!(!lines.is_empty());

    let grid = values(&csv);
    let xs: Vec<f64> = grid.iter().map(|g| g.0).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cell = (hi - lo) / (resolution - 1) as f64;

    let sc = Scenario::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let RobotConfig::Unicycle { vertices, .. } = &sc.robot else { panic!("unicycle expected") };
    let poly = ConvexPolygon::new(vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect()).unwrap();
    let obstacle = sc.obstacles()[0].placed_at(0.0);
    let center = obstacle.pose.position();
    let phi = |p: Vec2| polygon_ellipse_distance(&obstacle, &poly, &SE2Pose::new(p, theta)).value;

    for k in 0..10 {
        let dir = Vec2::new((k as f64 * 0.628).cos(), (k as f64 * 0.628).sin());
        let (mut inner, mut outer) = (0.0, 0.5 * (hi - lo));
        assert!(phi(center) < 0.0 && phi(center + outer * dir) > 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (inner + outer);
            if phi(center + mid * dir) < 0.0 {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        let boundary = center + inner * dir;
        let nearest = lines.iter().map(|l| polyline_distance(l, boundary)).fold(f64::INFINITY, f64::min);
        assert!(nearest <= 2.0 * cell, "ray {k}: contour {nearest} from boundary (cell {cell})");
    }
}

#[test]
fn compare_open_field_and_narrow_passage() {
    let dir = tempfile::tempdir().unwrap();
    let load = |p: PathBuf| -> serde_json::Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };

    let open = dir.path().join("open");
    assert!(run(&["compare", s(&scenario("open_field.json")), "--out", s(&open)]).status.success());
    let c = load(open.join("compare.json"));
    let (a, b) = (c["se2"]["path_length"].as_f64().unwrap(), c["circle"]["path_length"].as_f64().unwrap());
    assert!((a - b).abs() <= 0.05 * a.max(b), "path lengths {a} and {b}");
    assert!(open.join("se2/trajectory.csv").exists() && open.join("circle/trajectory.csv").exists());

    let narrow = dir.path().join("narrow");
    assert!(run(&["compare", s(&scenario("narrow_passage.json")), "--out", s(&narrow)]).status.success());
    let c = load(narrow.join("compare.json"));
    assert_eq!(c["se2"]["goal_reached"], true);
    assert!(c["se2"]["min_h"].as_f64().unwrap() > 0.0);

    let again = dir.path().join("again");
    assert!(run(&["compare", s(&scenario("narrow_passage.json")), "--out", s(&again)]).status.success());
    assert_eq!(
        std::fs::read(narrow.join("compare.json")).unwrap(),
        std::fs::read(again.join("compare.json")).unwrap()
    );
}

#[test]
fn help_lists_every_flag() {
    let top = String::from_utf8(run(&["--help"]).stdout).unwrap();
    for cmd in ["run", "grid", "compare"] {
        assert!(top.contains(cmd));
    }
    let expect: [(&str, &[&str]); 3] = [
        ("run", &["--out", "--frames", "--dt", "--t-max", "--gamma-h", "--gamma-v", "--lambda", "--seed"]),
        (
            "grid",
            &["--theta", "--mode", "--radius", "--resolution", "--out", "--levels", "--svg", "--half-width", "--obstacle", "--time"],
        ),
        ("compare", &["--out", "--dt", "--t-max", "--gamma-h", "--gamma-v", "--lambda", "--seed"]),
    ];
    for (cmd, flags) in expect {
        let help = String::from_utf8(run(&[cmd, "--help"]).stdout).unwrap();
        for flag in flags {
            assert!(help.contains(flag), "`{cmd} --help` lacks {flag}");
        }
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["grid"]).status.code(), Some(1));
    assert_eq!(run(&["run", "x.json", "--bogus"]).status.code(), Some(1));
    let arm = run(&["grid", s(&scenario("arm_three_link.json")), "--out", "/dev/null"]);
    assert_eq!(arm.status.code(), Some(1));
}
