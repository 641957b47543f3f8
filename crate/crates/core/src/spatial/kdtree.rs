use crate::cloud::PointCloud;
use crate::geometry::Point3;
use crate::{Error, Real, Result};

const LEAF_SIZE: usize = 12;

#[derive(Clone, Debug)]
enum Node<T> {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u8,
        value: T,
        left: u32,
        right: u32,
    },
}

/// Static k-d tree answering exact closed-ball queries.
///
/// Points are stored in tree order next to their original indices. A subtree
/// is skipped only when the squared distance along the split axis alone
/// exceeds `r * r`; since rounding is monotone this never discards a point
/// whose computed squared distance is `<= r * r`, so results match a linear
/// scan using [`Point3::dist_squared`] exactly.
#[derive(Clone, Debug)]
pub struct KdTree<T> {
    points: Vec<Point3<T>>,
    ids: Vec<u32>,
    nodes: Vec<Node<T>>,
}

pub fn build_index<T: Real>(cloud: &PointCloud<T>) -> KdTree<T> {
    KdTree::build(cloud.positions())
}

impl<T: Real> KdTree<T> {
    pub fn build(positions: &[Point3<T>]) -> Self {
        let mut order: Vec<u32> = (0..positions.len() as u32).collect();
        let mut nodes = Vec::new();
        if !positions.is_empty() {
            build_rec(positions, &mut order, 0, &mut nodes);
        }
        let points = order.iter().map(|&i| positions[i as usize]).collect();
        Self {
            points,
            ids: order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of all points within `r` of `p0` (inclusive), ascending.
    pub fn radius_query(&self, p0: &Point3<T>, r: T) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.radius_query_into(p0, r, &mut out)?;
        Ok(out)
    }

    /// Like [`radius_query`](Self::radius_query) but reuses `out`.
    pub fn radius_query_into(&self, p0: &Point3<T>, r: T, out: &mut Vec<usize>) -> Result<()> {
        if !(r >= T::zero() && r.is_finite()) {
            return Err(Error::param(format!("query radius must be finite and >= 0, got {r}")));
        }
        if !p0.is_finite() {
            return Err(Error::param("query point must be finite"));
        }
        out.clear();
        if !self.nodes.is_empty() {
            self.visit(0, p0, r * r, &mut |i| out.push(i));
        }
        out.sort_unstable();
        Ok(())
    }

    fn visit(&self, node: usize, p0: &Point3<T>, r2: T, f: &mut impl FnMut(usize)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                let (s, e) = (start as usize, end as usize);
                for (p, &id) in self.points[s..e].iter().zip(&self.ids[s..e]) {
                    if p.dist_squared(p0) <= r2 {
                        f(id as usize);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let d = p0.coord(axis as usize) - value;
                let (near, far) = if d <= T::zero() { (left, right) } else { (right, left) };
                self.visit(near as usize, p0, r2, f);
                if d * d <= r2 {
                    self.visit(far as usize, p0, r2, f);
                }
            }
        }
    }
}

fn build_rec<T: Real>(pts: &[Point3<T>], order: &mut [u32], offset: usize, nodes: &mut Vec<Node<T>>) -> u32 {
    let id = nodes.len() as u32;
    let n = order.len();
    if n <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + n) as u32,
        });
        return id;
    }
    let (mut lo, mut hi) = (pts[order[0] as usize], pts[order[0] as usize]);
    for &i in order.iter() {
        lo = lo.min(&pts[i as usize]);
        hi = hi.max(&pts[i as usize]);
    }
    let ext = hi - lo;
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    if ext.coord(axis) == T::zero() {
        // All points coincide.
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + n) as u32,
        });
        return id;
    }
    let mid = n / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        pts[a as usize]
            .coord(axis)
            .partial_cmp(&pts[b as usize].coord(axis))
            .expect("finite coordinates")
    });
    let value = pts[order[mid] as usize].coord(axis);
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (l, r) = order.split_at_mut(mid);
    let left = build_rec(pts, l, offset, nodes);
    let right = build_rec(pts, r, offset + mid, nodes);
    nodes[id as usize] = Node::Split {
        axis: axis as u8,
        value,
        left,
        right,
    };
    id
}
