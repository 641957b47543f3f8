use crate::geometry::Point3;
use crate::Real;

/// Symmetric 3x3 matrix stored as its upper triangle.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymMat3<T> {
    pub xx: T,
    pub xy: T,
    pub xz: T,
    pub yy: T,
    pub yz: T,
    pub zz: T,
}

impl<T: Real> SymMat3<T> {
    pub fn zero() -> Self {
        Self::diag(T::zero(), T::zero(), T::zero())
    }

    pub fn diag(a: T, b: T, c: T) -> Self {
        let z = T::zero();
        Self { xx: a, xy: z, xz: z, yy: b, yz: z, zz: c }
    }

    /// Full matrix with mirrored off-diagonal entries.
    pub fn to_rows(&self) -> [[T; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    /// Symmetric part of a full matrix.
    pub fn from_rows(m: [[T; 3]; 3]) -> Self {
        let half = T::c(0.5);
        Self {
            xx: m[0][0],
            xy: (m[0][1] + m[1][0]) * half,
            xz: (m[0][2] + m[2][0]) * half,
            yy: m[1][1],
            yz: (m[1][2] + m[2][1]) * half,
            zz: m[2][2],
        }
    }

    pub fn frobenius(&self) -> T {
        let two = T::c(2.0);
        (self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + two * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz))
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [self.xx, self.xy, self.xz, self.yy, self.yz, self.zz]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Eigen-decomposition of a covariance matrix: `values` descending and
/// clamped at zero, `vectors[i]` the unit eigenvector of `values[i]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenTriple<T> {
    pub values: [T; 3],
    pub vectors: [Point3<T>; 3],
}

impl<T: Real> EigenTriple<T> {
    /// `sum_i values[i] * vectors[i] vectors[i]^T`.
    pub fn reconstruct(&self) -> SymMat3<T> {
        let mut m = SymMat3::<T>::zero();
        for (l, e) in self.values.iter().zip(&self.vectors) {
            m.xx = m.xx + *l * e.x * e.x;
            m.xy = m.xy + *l * e.x * e.y;
            m.xz = m.xz + *l * e.x * e.z;
            m.yy = m.yy + *l * e.y * e.y;
            m.yz = m.yz + *l * e.y * e.z;
            m.zz = m.zz + *l * e.z * e.z;
        }
        m
    }
}

/// Population covariance `(1/N) sum (p - mean)(p - mean)^T`, computed in two
/// passes around the centroid. Panics on an empty slice.
pub fn covariance<T: Real>(points: &[Point3<T>]) -> SymMat3<T> {
    assert!(!points.is_empty(), "covariance of an empty neighborhood");
    let n = T::from_usize_(points.len());
    let mean = points.iter().fold(Point3::<T>::zero(), |a, p| a + *p) / n;
    let mut m = SymMat3::<T>::zero();
    for p in points {
        let d = *p - mean;
        m.xx = m.xx + d.x * d.x;
        m.xy = m.xy + d.x * d.y;
        m.xz = m.xz + d.x * d.z;
        m.yy = m.yy + d.y * d.y;
        m.yz = m.yz + d.y * d.z;
        m.zz = m.zz + d.z * d.z;
    }
    SymMat3 {
        xx: m.xx / n,
        xy: m.xy / n,
        xz: m.xz / n,
        yy: m.yy / n,
        yz: m.yz / n,
        zz: m.zz / n,
    }
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix.
///
/// Eigenvalues are sorted descending and clamped at zero. Each eigenvector is
/// flipped so its largest-magnitude component is positive (first such
/// component on ties).
pub fn eigen3<T: Real>(m: &SymMat3<T>) -> EigenTriple<T> {
    let mut a = m.to_rows();
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }

    for _ in 0..MAX_SWEEPS {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off == T::zero() || off <= T::epsilon() * T::epsilon() * diag * T::c(1e-4) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            rotate(&mut a, &mut v, p, q);
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.map(|i| a[i][i].max(T::zero()));
    let vectors = order.map(|i| canonical_sign(Point3::new(v[0][i], v[1][i], v[2][i])));
    EigenTriple { values, vectors }
}

/// One Jacobi rotation zeroing `a[p][q]`; `v` accumulates eigenvectors in its
/// columns.
fn rotate<T: Real>(a: &mut [[T; 3]; 3], v: &mut [[T; 3]; 3], p: usize, q: usize) {
    let apq = a[p][q];
    if apq == T::zero() {
        return;
    }
    let two = T::c(2.0);
    let theta = (a[q][q] - a[p][p]) / (two * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
    let t = if theta == T::zero() { T::one() } else { t };
    let c = T::one() / t.hypot(T::one());
    let s = t * c;

    a[p][p] = a[p][p] - t * apq;
    a[q][q] = a[q][q] + t * apq;
    a[p][q] = T::zero();
    a[q][p] = T::zero();
    let r = 3 - p - q;
    let arp = a[r][p];
    let arq = a[r][q];
    a[r][p] = c * arp - s * arq;
    a[p][r] = a[r][p];
    a[r][q] = s * arp + c * arq;
    a[q][r] = a[r][q];

    for row in v.iter_mut() {
        let vp = row[p];
        let vq = row[q];
        row[p] = c * vp - s * vq;
        row[q] = s * vp + c * vq;
    }
}

fn canonical_sign<T: Real>(e: Point3<T>) -> Point3<T> {
    let c = e.to_array();
    let mut k = 0;
    for i in 1..3 {
        if c[i].abs() > c[k].abs() {
            k = i;
        }
    }
    if c[k] < T::zero() {
        -e
    } else {
        e
    }
}
