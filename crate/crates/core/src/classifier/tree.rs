use rand::seq::SliceRandom;
use rand::Rng;

use crate::features::FeatureMatrix;

/// Gini impurity `1 - sum p_i^2` of a class histogram (0 for an empty one).
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// Class probabilities, in the model's class order.
    Leaf { probs: Vec<f64> },
}

/// Axis-aligned decision tree stored as a node arena rooted at index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_for(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { probs } => return probs,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(t, *left as usize).max(rec(t, *right as usize)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            rec(self, 0)
        }
    }
}

pub(crate) struct TreeParams {
    pub n_classes: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

/// Grows one tree on `samples` (row indices into `x`, duplicates allowed).
pub(crate) fn grow_tree(
    x: &FeatureMatrix<f64>,
    y: &[u16],
    samples: Vec<u32>,
    params: &TreeParams,
    rng: &mut impl Rng,
) -> Tree {
    let mut builder = Builder {
        x,
        y,
        params,
        nodes: Vec::new(),
        features: (0..x.cols()).collect(),
        buf: Vec::new(),
    };
    builder.build(samples, 0, rng);
    Tree {
        nodes: builder.nodes,
    }
}

struct Builder<'a> {
    x: &'a FeatureMatrix<f64>,
    y: &'a [u16],
    params: &'a TreeParams,
    nodes: Vec<Node>,
    features: Vec<usize>,
    buf: Vec<(f64, u16)>,
}

impl Builder<'_> {
    fn counts(&self, samples: &[u32]) -> Vec<usize> {
        let mut c = vec![0; self.params.n_classes];
        for &s in samples {
            c[self.y[s as usize] as usize] += 1;
        }
        c
    }

    fn build(&mut self, samples: Vec<u32>, depth: usize, rng: &mut impl Rng) -> u32 {
        let id = self.nodes.len() as u32;
        let counts = self.counts(&samples);
        let n = samples.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let split = if pure || depth >= self.params.max_depth || n < 2 * self.params.min_samples_leaf {
            None
        } else {
            self.find_split(&samples, &counts, rng)
        };
        let Some(best) = split else {
            let probs = counts.iter().map(|&c| c as f64 / n as f64).collect();
            self.nodes.push(Node::Leaf { probs });
            return id;
        };

        self.nodes.push(Node::Leaf { probs: Vec::new() });
        let (left, right): (Vec<u32>, Vec<u32>) = samples
            .into_iter()
            .partition(|&s| self.x.get(s as usize, best.feature) <= best.threshold);
        let l = self.build(left, depth + 1, rng);
        let r = self.build(right, depth + 1, rng);
        self.nodes[id as usize] = Node::Split {
            feature: best.feature as u32,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Best Gini split over at least `features_per_split` random candidate
    /// columns; keeps drawing columns while none of them admits a split.
    fn find_split(&mut self, samples: &[u32], counts: &[usize], rng: &mut impl Rng) -> Option<Best> {
        let n = samples.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let parent_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
        self.features.shuffle(rng);

        let mut best: Option<Best> = None;
        let mut left = vec![0usize; counts.len()];
        for k in 0..self.features.len() {
            if k >= self.params.features_per_split && best.is_some() {
                break;
            }
            let f = self.features[k];
            self.buf.clear();
            self.buf
                .extend(samples.iter().map(|&s| (self.x.get(s as usize, f), self.y[s as usize])));
            self.buf
                .sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
            if self.buf[0].0 == self.buf[n - 1].0 {
                continue;
            }

            left.iter_mut().for_each(|c| *c = 0);
            let mut left_sq = 0.0;
            let mut right_sq = parent_sq;
            for i in 0..n - 1 {
                let c = self.buf[i].1 as usize;
                let rc = counts[c] - left[c];
                left_sq += (2 * left[c] + 1) as f64;
                right_sq -= (2 * rc - 1) as f64;
                left[c] += 1;
                let nl = i + 1;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let (a, b) = (self.buf[i].0, self.buf[i + 1].0);
                if a == b {
                    continue;
                }
                let score = (nl as f64 - left_sq / nl as f64) + (nr as f64 - right_sq / nr as f64);
                if best.as_ref().is_none_or(|bs| score < bs.score) {
                    let mut threshold = a + (b - a) * 0.5;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(Best {
                        score,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }
}
