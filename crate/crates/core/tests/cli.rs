use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use raynav::render::read_float_image;
use raynav::scene_file::load_scene_file;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scene(name: &str) -> String {
    root()
        .join("scenes")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn raynav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raynav"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn missing_scene_exits_with_error() {
    let out = raynav(&["render", "no/such/scene.toml", "-o", "/tmp/never.ppm"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/scene.toml"));
}

#[test]
fn unknown_scene_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "[camera]\norigin = [0, 0, 5]\ntarget = [0, 0, 0]\nzoom = 3\n",
    )
    .unwrap();
    let out = raynav(&[
        "render",
        path.to_str().unwrap(),
        "-o",
        dir.path().join("x.ppm").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zoom"));
}

#[test]
fn bad_arguments_exit_with_usage_error() {
    let out = raynav(&["render"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn long_help_documents_scene_format() {
    let out = raynav(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("SCENE FILE FORMAT"));
    assert!(text.contains("[[objects]]"));
}

#[test]
fn render_writes_ppm_and_radiance() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("sky.ppm");
    let rad = dir.path().join("sky.rad");
    let out = raynav(&[
        "render",
        &scene("sky.toml"),
        "--spp",
        "1",
        "-o",
        ppm.to_str().unwrap(),
        "--radiance",
        rad.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bytes = std::fs::read(&ppm).unwrap();
    assert!(bytes.starts_with(b"P6\n320 180\n255\n"));
    let img = read_float_image(std::fs::File::open(&rad).unwrap()).unwrap();
    assert_eq!((img.width, img.height, img.channels), (320, 180, 3));
    assert!(img.data.iter().all(|v| v.is_finite() && *v >= 0.0));
}

#[test]
fn depth_writes_all_products() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("dock");
    let out = raynav(&[
        "depth",
        &scene("docking.toml"),
        "-o",
        stem.to_str().unwrap(),
        "--contours",
        "6",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let depth =
        read_float_image(std::fs::File::open(dir.path().join("dock.depth")).unwrap()).unwrap();
    assert_eq!((depth.width, depth.height, depth.channels), (320, 240, 1));
    let hits = depth.data.iter().filter(|d| d.is_finite()).count();
    assert!(hits > 1000);
    assert!(std::fs::read(dir.path().join("dock.pgm"))
        .unwrap()
        .starts_with(b"P5\n320 240\n255\n"));
    assert!(std::fs::read(dir.path().join("dock.contour.pgm"))
        .unwrap()
        .starts_with(b"P5"));
    let xyz = std::fs::read_to_string(dir.path().join("dock.xyz")).unwrap();
    assert_eq!(xyz.lines().count(), hits);
    let fields: Vec<&str> = xyz.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(fields.len(), 6);
    assert!(stdout(&out).contains(&format!("{hits} of 76800")));
}

#[test]
fn stereo_on_reference_pair_is_exact_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("stereo.csv");
    let out = raynav(&[
        "stereo",
        &scene("stereo_left.toml"),
        &scene("stereo_right.toml"),
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line
            .split(',')
            .take(6)
            .map(|s| s.parse().unwrap())
            .collect();
        for k in 0..3 {
            assert!((v[k] - v[k + 3]).abs() < 1e-6, "{line}");
        }
        rows += 1;
    }
    assert!(rows > 100);
    assert!(stdout(&out).contains("max abs coordinate error"));
}

#[test]
fn stereo_rejects_different_worlds() {
    let out = raynav(&[
        "stereo",
        &scene("stereo_left.toml"),
        &scene("docking.toml"),
        "-o",
        "/tmp/never.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different worlds"));
}

#[test]
fn pose_from_reference_stops_immediately() {
    let cfg = load_scene_file(&root().join("scenes/docking.toml")).unwrap();
    let x = cfg.camera_model().unwrap().pose().unwrap().to_array();
    let init = x
        .iter()
        .map(|v| format!("{v:.17e}"))
        .collect::<Vec<_>>()
        .join(",");
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pose.csv");
    let out = raynav(&[
        "pose",
        &scene("docking.toml"),
        root().join("assets/station.obj").to_str().unwrap(),
        "--init",
        &init,
        "-o",
        csv.to_str().unwrap(),
        "--no-image",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains(" 0 iterations"), "{text}");
    let report = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        report.lines().next().unwrap(),
        "iter,chi2,lambda,rho,accepted"
    );
    assert_eq!(report.lines().count(), 2);
}

#[test]
fn pose_converges_from_perturbed_start() {
    let cfg = load_scene_file(&root().join("scenes/docking.toml")).unwrap();
    let mut x = cfg.camera_model().unwrap().pose().unwrap().to_array();
    x[0] += 0.03;
    x[2] -= 0.02;
    x[5] *= 1.05;
    let init = x
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pose.csv");
    let out = raynav(&[
        "pose",
        &scene("docking.toml"),
        root().join("assets/station.obj").to_str().unwrap(),
        "--init",
        &init,
        "--noise",
        "0.25",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let rms: f64 = text
        .split("reprojection RMS ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(rms < 1.0, "{text}");
    assert!(dir.path().join("pose.ppm").exists());
}

#[test]
fn pose_init_needs_six_values() {
    let out = raynav(&[
        "pose",
        &scene("docking.toml"),
        root().join("assets/station.obj").to_str().unwrap(),
        "--init",
        "0,0,0,0,0",
        "-o",
        "/tmp/never.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("6 values"));
}
