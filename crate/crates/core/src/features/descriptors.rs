use crate::geometry::Point3;
use crate::Real;

use super::eigen::EigenTriple;

pub const GEOMETRIC_FEATURES: usize = 18;
pub const COLOR_FEATURES: usize = 6;

/// Per-scale column order of [`geometric_features`].
pub const GEOMETRIC_FEATURE_NAMES: [&str; GEOMETRIC_FEATURES] = [
    "sum_eigenvalues",
    "omnivariance",
    "eigenentropy",
    "linearity",
    "planarity",
    "sphericity",
    "change_of_curvature",
    "verticality_e1",
    "verticality_e3",
    "abs_moment1_e1",
    "abs_moment1_e2",
    "abs_moment1_e3",
    "abs_moment2_e1",
    "abs_moment2_e2",
    "abs_moment2_e3",
    "vertical_moment1",
    "vertical_moment2",
    "num_points",
];

pub const COLOR_FEATURE_NAMES: [&str; COLOR_FEATURES] = [
    "color_mean_r",
    "color_mean_g",
    "color_mean_b",
    "color_var_r",
    "color_var_g",
    "color_var_b",
];

/// Column names for `scales` blocks, `s{scale}_{feature}`.
pub fn feature_names(scales: usize, with_color: bool) -> Vec<String> {
    let per_scale: Vec<&str> = GEOMETRIC_FEATURE_NAMES
        .iter()
        .chain(if with_color { &COLOR_FEATURE_NAMES[..] } else { &[] })
        .copied()
        .collect();
    (0..scales)
        .flat_map(|s| per_scale.iter().map(move |n| format!("s{s}_{n}")))
        .collect()
}

fn ratio<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else {
        T::zero()
    }
}

/// `|pi/2 - angle(e, e_z)|`, which equals `asin(|e_z|)` for a unit vector.
fn verticality<T: Real>(e: &Point3<T>) -> T {
    e.z.abs().min(T::one()).asin()
}

/// The 18 geometric values of one neighborhood, in
/// [`GEOMETRIC_FEATURE_NAMES`] order.
///
/// Eigenvalues are used raw. Ratio features are 0 when their denominator is
/// 0, and when `lambda1 == 0` the eigenvectors are arbitrary, so verticality
/// and the eigenvector moments are 0 too. Moments are taken about the query
/// point `p0`.
pub fn geometric_features<T: Real>(
    neigh: &[Point3<T>],
    p0: &Point3<T>,
    eig: &EigenTriple<T>,
) -> [T; GEOMETRIC_FEATURES] {
    debug_assert!(!neigh.is_empty());
    let [l1, l2, l3] = eig.values;
    let zero = T::zero();
    let sum = l1 + l2 + l3;
    let omnivariance = (l1 * l2 * l3).cbrt();
    let entropy = eig
        .values
        .iter()
        .filter(|&&l| l > zero)
        .fold(zero, |acc, &l| acc - l * l.ln());

    let mut f = [zero; GEOMETRIC_FEATURES];
    f[0] = sum;
    f[1] = omnivariance;
    f[2] = entropy;
    f[3] = ratio(l1 - l2, l1);
    f[4] = ratio(l2 - l3, l1);
    f[5] = ratio(l3, l1);
    f[6] = ratio(l3, sum);

    let n = T::from_usize_(neigh.len());
    let defined = l1 > zero;
    if defined {
        f[7] = verticality(&eig.vectors[0]);
        f[8] = verticality(&eig.vectors[2]);
    }

    let mut first = [zero; 3];
    let mut second = [zero; 3];
    let mut vz1 = zero;
    let mut vz2 = zero;
    for p in neigh {
        let d = *p - *p0;
        for (i, e) in eig.vectors.iter().enumerate() {
            let proj = d.dot(e);
            first[i] = first[i] + proj;
            second[i] = second[i] + proj * proj;
        }
        vz1 = vz1 + d.z;
        vz2 = vz2 + d.z * d.z;
    }
    if defined {
        for i in 0..3 {
            f[9 + i] = first[i].abs() / n;
            f[12 + i] = second[i].abs() / n;
        }
    }
    f[15] = vz1 / n;
    f[16] = vz2 / n;
    f[17] = n;
    f
}

/// Per-channel mean, then per-channel sample variance (`1/(N-1)`, 0 for a
/// single color).
pub fn color_features<T: Real>(colors: &[[T; 3]]) -> [T; COLOR_FEATURES] {
    debug_assert!(!colors.is_empty());
    let n = T::from_usize_(colors.len());
    let mut mean = [T::zero(); 3];
    for c in colors {
        for k in 0..3 {
            mean[k] = mean[k] + c[k];
        }
    }
    mean = mean.map(|m| m / n);
    let mut var = [T::zero(); 3];
    if colors.len() > 1 {
        for c in colors {
            for k in 0..3 {
                let d = c[k] - mean[k];
                var[k] = var[k] + d * d;
            }
        }
        var = var.map(|v| v / (n - T::one()));
    }
    [mean[0], mean[1], mean[2], var[0], var[1], var[2]]
}
