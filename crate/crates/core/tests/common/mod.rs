//! Reference implementations shared by the integration tests. Nothing here
//! calls into the library's numeric code.
#![allow(dead_code)]

use msfeat::geometry::Point3;
use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type P = Point3<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn random_cloud(rng: &mut impl Rng, n: usize, extent: f64) -> Vec<P> {
    (0..n)
        .map(|_| {
            P::new(
                rng.random_range(0.0..extent),
                rng.random_range(0.0..extent),
                rng.random_range(0.0..extent),
            )
        })
        .collect()
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let axis = nalgebra::Unit::new_normalize(random_unit(rng));
    *nalgebra::Rotation3::from_axis_angle(&axis, rng.random_range(0.0..std::f64::consts::TAU)).matrix()
}

/// Anisotropic blob: axis spreads `sigmas` in a random orientation, centered
/// near `center`.
pub fn random_neighborhood(rng: &mut impl Rng, n: usize, sigmas: [f64; 3], center: [f64; 3]) -> Vec<P> {
    let rot = random_rotation(rng);
    (0..n)
        .map(|_| {
            let local = Vector3::new(
                rng.random_range(-1.0..1.0) * sigmas[0],
                rng.random_range(-1.0..1.0) * sigmas[1],
                rng.random_range(-1.0..1.0) * sigmas[2],
            );
            let g = rot * local;
            P::new(center[0] + g.x, center[1] + g.y, center[2] + g.z)
        })
        .collect()
}

pub fn brute_radius(points: &[P], p0: &P, r: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            let d = points[i] - *p0;
            d.x * d.x + d.y * d.y + d.z * d.z <= r * r
        })
        .collect()
}

/// Population covariance as a nalgebra matrix (mean first, then outer
/// products).
pub fn oracle_covariance(points: &[P]) -> Matrix3<f64> {
    let n = points.len() as f64;
    let vs: Vec<Vector3<f64>> = points.iter().map(|p| Vector3::new(p.x, p.y, p.z)).collect();
    let mean = vs.iter().sum::<Vector3<f64>>() / n;
    vs.iter().map(|v| (v - mean) * (v - mean).transpose()).sum::<Matrix3<f64>>() / n
}

/// Descending eigenvalues clamped at 0 with matching unit eigenvectors.
pub fn oracle_eigen(points: &[P]) -> ([f64; 3], [Vector3<f64>; 3]) {
    let e = SymmetricEigen::new(oracle_covariance(points));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let vals = order.map(|i| e.eigenvalues[i].max(0.0));
    let vecs = order.map(|i| e.eigenvectors.column(i).into_owned());
    (vals, vecs)
}

/// The 18 per-scale geometric values written directly from their
/// definitions.
pub fn oracle_geometric(points: &[P], p0: &P) -> [f64; 18] {
    let (l, e) = oracle_eigen(points);
    let n = points.len() as f64;
    let div = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let mut f = [0.0; 18];
    f[0] = l[0] + l[1] + l[2];
    f[1] = (l[0] * l[1] * l[2]).powf(1.0 / 3.0);
    f[2] = -(xlnx(l[0]) + xlnx(l[1]) + xlnx(l[2]));
    f[3] = div(l[0] - l[1], l[0]);
    f[4] = div(l[1] - l[2], l[0]);
    f[5] = div(l[2], l[0]);
    f[6] = div(l[2], l[0] + l[1] + l[2]);
    if l[0] > 0.0 {
        let ez = Vector3::z();
        let vert = |v: &Vector3<f64>| (std::f64::consts::FRAC_PI_2 - v.angle(&ez)).abs();
        f[7] = vert(&e[0]);
        f[8] = vert(&e[2]);
        for i in 0..3 {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for p in points {
                let d = Vector3::new(p.x - p0.x, p.y - p0.y, p.z - p0.z);
                s1 += d.dot(&e[i]);
                s2 += d.dot(&e[i]).powi(2);
            }
            f[9 + i] = s1.abs() / n;
            f[12 + i] = s2.abs() / n;
        }
    }
    f[15] = points.iter().map(|p| p.z - p0.z).sum::<f64>() / n;
    f[16] = points.iter().map(|p| (p.z - p0.z).powi(2)).sum::<f64>() / n;
    f[17] = n;
    f
}

/// Per-channel means followed by per-channel sample variances.
pub fn oracle_color(colors: &[[f64; 3]]) -> [f64; 6] {
    let n = colors.len() as f64;
    let mut out = [0.0; 6];
    for k in 0..3 {
        let m = colors.iter().map(|c| c[k]).sum::<f64>() / n;
        out[k] = m;
        out[3 + k] = if colors.len() > 1 {
            colors.iter().map(|c| (c[k] - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
    }
    out
}

pub fn confusion_counts(truth: &[u32], pred: &[u32], class: u32, ignored: u32) -> (u64, u64, u64) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fneg = 0;
    for (&t, &p) in truth.iter().zip(pred) {
        if t == ignored || p == ignored {
            continue;
        }
        match (t == class, p == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            _ => {}
        }
    }
    (tp, fp, fneg)
}
