mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::rng;
use msfeat::classifier::{balanced_sample, train_forest};
use msfeat::cloud::{ClassId, PointCloud};
use msfeat::evaluation::{generate_synthetic_scene, Recipe};
use msfeat::features::{extract_features, ScaleConfig, ScalePyramid};
use msfeat::io::{load_cloud, load_labels, save_cloud, save_labels, CloudFormat};
use msfeat::spatial::{grid_subsample, GridSpec};
use msfeat::{seed, FeatureMatrix, RunConfig};
use rand::Rng;

fn msfeat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msfeat"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = msfeat(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str], code: &str) -> String {
    let out = msfeat(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&format!("error[{code}]")), "{args:?}: {err}");
    err
}

/// Small two-class scene: a ground plane and a wall.
fn small_scene(dir: &Path, name: &str, seed: u64, colored: bool) -> PointCloud<f64> {
    let recipe = Recipe::from_toml(
        r#"
        name = "small"
        noise_sigma = 0.01
        [[primitives]]
        kind = "plane"
        class = 1
        center = [5.0, 0.0, 0.0]
        size = [10.0, 6.0]
        density = 20.0
        [[primitives]]
        kind = "wall"
        class = 2
        start = [0.0, 3.0]
        end = [10.0, 3.0]
        z0 = 0.0
        height = 4.0
        density = 20.0
        "#,
    )
    .unwrap();
    let mut c = generate_synthetic_scene(&recipe, seed).unwrap();
    if colored {
        let mut rng = rng(seed);
        let colors = (0..c.len()).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let (p, _, l) = c.into_parts();
        c = PointCloud::new(p, Some(colors), l).unwrap();
    }
    save_cloud(&c, &dir.join(name), CloudFormat::from_path(Path::new(name))).unwrap();
    c
}

#[test]
fn subsample_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let c = small_scene(d, "in.ply", 1, false);
    let out = ok(d, &["subsample", "--input", "in.ply", "--output", "out.xyz", "--cell-size", "0.5"]);
    let lib = grid_subsample(&c, &GridSpec::anchored(&c, 0.5).unwrap());
    assert!(out.contains(&format!("input points: {}", c.len())));
    assert!(out.contains(&format!("output points: {}", lib.len())));
    assert_eq!(load_cloud(&d.join("out.xyz"), CloudFormat::AsciiXyz).unwrap().len(), lib.len());

    let err = fails(d, &["subsample", "--input", "in.ply", "--output", "o.xyz", "--cell-size", "0"], "E_PARAM");
    assert!(err.contains("cell size"));
    fails(d, &["subsample", "--input", "missing.ply", "--output", "o.xyz", "--cell-size", "1"], "E_IO");
}

#[test]
fn features_columns_threads_and_library_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let plain = small_scene(d, "plain.ply", 2, false);
    small_scene(d, "color.ply", 2, true);
    assert!(ok(d, &["features", "--input", "plain.ply", "--output", "p.bin"]).contains("x 144 columns"));
    assert!(ok(d, &["features", "--input", "color.ply", "--output", "c.bin"]).contains("x 192 columns"));
    ok(d, &["--threads", "1", "features", "--input", "color.ply", "--output", "c1.bin"]);
    ok(d, &["features", "--threads", "3", "--input", "color.ply", "--output", "c3.bin"]);
    let read = |f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read("c1.bin"), read("c3.bin"));
    assert_eq!(read("c.bin"), read("c1.bin"));

    // Byte-equal to the library composition.
    let all: Vec<usize> = (0..plain.len()).collect();
    let x = extract_features(&plain, &ScalePyramid::build(&plain, &ScaleConfig::OUTDOOR).unwrap(), &all).unwrap();
    x.save(&d.join("lib.bin")).unwrap();
    assert_eq!(read("lib.bin"), read("p.bin"));
    assert_eq!(read("lib.bin.hdr"), read("p.bin.hdr"));

    // Query subset and config file with a flag override.
    std::fs::write(d.join("q.txt"), "0\n5\n9\n").unwrap();
    std::fs::write(d.join("run.cfg"), "preset=indoor\nscales=3\nrho=4\n").unwrap();
    let out = ok(
        d,
        &["--config", "run.cfg", "--rho", "2", "features", "--input", "plain.ply", "--output", "q.bin", "--queries", "q.txt", "--csv", "q.csv"],
    );
    assert!(out.contains("3 rows x 54 columns"), "{out}");
    let q = FeatureMatrix::load(&d.join("q.bin")).unwrap();
    assert_eq!(q.layout().config, Some(ScaleConfig::new(0.05, 3, 2.0, 2.0).unwrap()));
    assert_eq!(std::fs::read_to_string(d.join("q.csv")).unwrap().lines().count(), 4);
    fails(d, &["--set", "bogus=1", "features", "--input", "plain.ply", "--output", "x.bin"], "E_PARAM");
}

#[test]
fn train_predict_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let c = small_scene(d, "scene.ply", 3, false);
    save_labels(c.labels().unwrap(), &d.join("truth.txt")).unwrap();
    let small = ["--preset", "indoor", "--scales", "3", "--n-trees", "15", "--seed", "5"];
    fn with<'a>(small: &[&'a str], rest: &[&'a str]) -> Vec<&'a str> {
        [small, rest].concat()
    }
    ok(d, &with(&small, &["features", "--input", "scene.ply", "--output", "x.bin"]));

    // n_per_class above the smallest class: whole class used, with a warning.
    let out = msfeat(
        d,
        &with(&small, &["--n-per-class", "100000", "train", "--features", "x.bin", "--labels", "truth.txt", "--model-out", "m1.bin"]),
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fewer than n_per_class"));
    ok(d, &with(&small, &["--n-per-class", "100000", "train", "--features", "x.bin", "--labels", "truth.txt", "--model-out", "m2.bin"]));
    assert_eq!(std::fs::read(d.join("m1.bin")).unwrap(), std::fs::read(d.join("m2.bin")).unwrap());

    // Balanced training matches the library composition.
    ok(d, &with(&small, &["--n-per-class", "200", "train", "--features", "x.bin", "--labels", "truth.txt", "--model-out", "m.bin"]));
    let cfg = {
        let mut c = RunConfig::default();
        for (k, v) in [("preset", "indoor"), ("scales", "3"), ("n_trees", "15"), ("seed", "5"), ("n_per_class", "200")] {
            c.set(k, v).unwrap();
        }
        c
    };
    let x = FeatureMatrix::load(&d.join("x.bin")).unwrap();
    let labels = c.labels().unwrap();
    let idx = balanced_sample(labels, 200, 0, seed::derive(5, seed::STREAM_BALANCED)).unwrap();
    let y: Vec<ClassId> = idx.iter().map(|&i| labels[i]).collect();
    let lib = train_forest(&x.select_rows(&idx), &y, &cfg.forest()).unwrap();
    msfeat::classifier::save_model(&lib, &d.join("lib.bin")).unwrap();
    assert_eq!(std::fs::read(d.join("lib.bin")).unwrap(), std::fs::read(d.join("m.bin")).unwrap());

    // Predict from features and from the raw cloud.
    ok(d, &["predict", "--features", "x.bin", "--model", "m.bin", "--labels-out", "p1.txt", "--proba-out", "proba.csv"]);
    ok(d, &["predict", "--cloud", "scene.ply", "--model", "m.bin", "--labels-out", "p2.txt"]);
    assert_eq!(std::fs::read(d.join("p1.txt")).unwrap(), std::fs::read(d.join("p2.txt")).unwrap());
    let pred = load_labels(&d.join("p1.txt")).unwrap();
    assert_eq!(pred, lib.predict(&x).unwrap());
    let proba = std::fs::read_to_string(d.join("proba.csv")).unwrap();
    assert_eq!(proba.lines().next(), Some("class_1,class_2"));
    assert_eq!(proba.lines().count(), pred.len() + 1);

    // Wrong layout: outdoor features into an indoor model.
    ok(d, &["features", "--input", "scene.ply", "--output", "xo.bin"]);
    let err = fails(d, &["predict", "--features", "xo.bin", "--model", "m.bin", "--labels-out", "bad.txt"], "E_MODEL");
    assert!(err.contains("fingerprint"));

    // Evaluate.
    let table = ok(d, &["evaluate", "--truth", "truth.txt", "--pred", "truth.txt", "--csv-out", "same.csv"]);
    assert!(table.contains("100.00"));
    let csv = std::fs::read_to_string(d.join("same.csv")).unwrap();
    assert!(csv.ends_with("mean,,,,,,1.000000\n"), "{csv}");
    ok(d, &["--classes", "1:ground,2:wall", "evaluate", "--truth", "truth.txt", "--pred", "p1.txt", "--csv-out", "m.csv"]);
    assert!(std::fs::read_to_string(d.join("m.csv")).unwrap().contains("1,ground,"));

    // Mining with a budget.
    ok(
        d,
        &with(&small, &[
            "--initial-per-class", "50", "--budget", "300", "--rounds", "3", "train", "--features", "x.bin", "--labels",
            "truth.txt", "--model-out", "mm.bin", "--strategy", "mine",
        ]),
    );
    let mined = msfeat::classifier::load_model(&d.join("mm.bin")).unwrap();
    assert_eq!(mined.trees.len(), 15);
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--recipe", "street-v1", "--seed", "42", "--output", "a.ply", "--labels-out", "a.txt"]);
    ok(d, &["synth", "--recipe", "street-v1", "--seed", "42", "--output", "b.ply", "--labels-out", "b.txt"]);
    assert_eq!(std::fs::read(d.join("a.ply")).unwrap(), std::fs::read(d.join("b.ply")).unwrap());
    assert_eq!(std::fs::read(d.join("a.txt")).unwrap(), std::fs::read(d.join("b.txt")).unwrap());
    let lib = generate_synthetic_scene(&Recipe::street_v1(), 42).unwrap();
    assert_eq!(load_cloud(&d.join("a.ply"), CloudFormat::PlyBinary).unwrap(), lib);
    fails(d, &["synth", "--recipe", "no-such-recipe.toml", "--output", "c.ply"], "E_IO");
}

#[test]
fn sweep_rho_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_scene(d, "a.ply", 7, false);
    small_scene(d, "b.ply", 8, false);
    let out = ok(
        d,
        &[
            "--preset", "indoor", "--scales", "3", "--n-trees", "5", "--n-per-class", "100", "sweep-rho", "--train-cloud",
            "a.ply", "--test-cloud", "b.ply", "--rhos", "2,4", "--output", "s.csv", "--plot-data", "s.dat",
        ],
    );
    let csv = std::fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(out, csv);
    assert!(csv.starts_with("rho,mean_iou,points_per_second\n2,"));
    assert_eq!(csv.lines().count(), 3);
    assert!(d.join("s.dat").exists());
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = msfeat(dir.path(), &["no-such-command"]);
    assert!(!out.status.success());
    fails(dir.path(), &["features", "--output", "x.bin"], "E_PARAM");
}
