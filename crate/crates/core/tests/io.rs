mod common;

use common::*;
use msfeat::cloud::{ClassId, PointCloud};
use msfeat::io::{load_ascii, load_cloud, load_labels, load_ply, save_ascii, save_cloud, save_labels, save_ply, CloudFormat};
use msfeat::Error;
use rand::Rng;

fn random_colored(n: usize, seed: u64) -> PointCloud<f64> {
    let mut rng = rng(seed);
    let pts: Vec<P> = (0..n)
        .map(|_| P::new(rng.random_range(-1e5..1e5), rng.random_range(-1e5..1e5), rng.random::<f64>()))
        .collect();
    let colors: Vec<[f64; 3]> = (0..n)
        .map(|_| [0, 1, 2].map(|_| rng.random_range(0..=255u8) as f64 / 255.0))
        .collect();
    let labels: Vec<ClassId> = (0..n).map(|_| rng.random_range(0..7)).collect();
    PointCloud::new(pts, Some(colors), Some(labels)).unwrap()
}

fn bits(c: &PointCloud<f64>) -> Vec<[u64; 3]> {
    c.positions().iter().map(|p| p.to_array().map(f64::to_bits)).collect()
}

#[test]
fn ply_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (n, seed) in [(1000, 1), (100_000, 2)] {
        let c = random_colored(n, seed);
        let path = dir.path().join(format!("c{n}.ply"));
        save_ply(&c, &path).unwrap();
        let back = load_ply(&path).unwrap();
        assert_eq!(bits(&back), bits(&c));
        assert_eq!(back.labels(), c.labels());
        for (a, b) in back.colors().unwrap().iter().zip(c.colors().unwrap()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1.0 / 255.0);
            }
        }
    }
}

#[test]
fn ascii_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let c = random_colored(1000, 3);
    let path = dir.path().join("c.xyz");
    save_cloud(&c, &path, CloudFormat::from_path(&path)).unwrap();
    let back = load_cloud(&path, CloudFormat::AsciiXyz).unwrap();
    assert_eq!(bits(&back), bits(&c));
    assert_eq!(back.labels(), c.labels());
    assert_eq!(back.colors(), c.colors());
}

#[test]
fn ascii_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a.txt");
    std::fs::write(&p, "0 0 0\n").unwrap();
    let c = load_ascii(&p, None).unwrap();
    assert_eq!(c.len(), 1);
    assert!(c.colors().is_none() && c.labels().is_none());

    std::fs::write(&p, "1.5 2.0 0.5 255 0 0 3\n").unwrap();
    let c = load_ascii(&p, None).unwrap();
    assert_eq!(c.positions()[0], P::new(1.5, 2.0, 0.5));
    assert_eq!(c.colors().unwrap()[0], [1.0, 0.0, 0.0]);
    assert_eq!(c.labels().unwrap(), &[3]);

    std::fs::write(&p, "0 0 0\n1 2 inf\n").unwrap();
    assert!(matches!(load_ascii(&p, None), Err(Error::Validation(_))));
    std::fs::write(&p, "0 0 0\n1 2\n").unwrap();
    assert!(matches!(load_ascii(&p, None), Err(Error::Format(_))));
    std::fs::write(&p, "0 0 0\n\n1 x 2\n").unwrap();
    match load_ascii(&p, None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_cloud_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let c = PointCloud::<f64>::from_positions(vec![]).unwrap();
    for name in ["e.ply", "e.xyz"] {
        let p = dir.path().join(name);
        save_cloud(&c, &p, CloudFormat::from_path(&p)).unwrap();
        assert_eq!(load_cloud(&p, CloudFormat::from_path(&p)).unwrap().len(), 0);
    }
    save_ascii(&c, &dir.path().join("e2.xyz")).unwrap();
}

#[test]
fn truncated_ply_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.ply");
    save_ply(&random_colored(50, 4), &p).unwrap();
    let bytes = std::fs::read(&p).unwrap();
    std::fs::write(&p, &bytes[..bytes.len() - 7]).unwrap();
    assert!(matches!(load_ply(&p), Err(Error::Format(_))));
}

#[test]
fn labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("l.txt");
    save_labels(&[1, 2, 3], &p).unwrap();
    assert_eq!(std::fs::read_to_string(&p).unwrap(), "1\n2\n3\n");
    save_labels(&[], &p).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), b"");
    let mut rng = rng(5);
    let big: Vec<ClassId> = (0..1_000_000).map(|_| rng.random_range(0..50)).collect();
    save_labels(&big, &p).unwrap();
    assert_eq!(load_labels(&p).unwrap(), big);
}

#[test]
fn missing_file_is_io_error() {
    let err = load_cloud(std::path::Path::new("/nonexistent/x.ply"), CloudFormat::PlyBinary).unwrap_err();
    assert_eq!(err.code(), "E_IO");
}
