//! Binary model file, all integers and floats little-endian:
//!
//! ```text
//! magic        "MSFRF"                5 bytes
//! version      u8                     currently 1
//! n_features   u32
//! scales       u32
//! per_scale    u32
//! has_config   u8                     1 => r0, phi, rho follow as f64
//! seed         u64
//! n_classes    u32, then n_classes x u32 class ids
//! n_trees      u32
//! per tree:    n_nodes u32, then per node:
//!              tag u8 = 0 (leaf): n_classes x f64 probabilities
//!              tag u8 = 1 (split): feature u32, threshold f64, left u32, right u32
//! ```

use std::fs;
use std::path::Path;

use crate::features::{FeatureLayout, ScaleConfig};
use crate::{Error, Result};

use super::forest::ForestModel;
use super::tree::{Node, Tree};

const MAGIC: &[u8; 5] = b"MSFRF";
pub const MODEL_VERSION: u8 = 1;

pub fn save_model(model: &ForestModel, path: &Path) -> Result<()> {
    fs::write(path, encode(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ForestModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

fn encode(m: &ForestModel) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(MAGIC);
    b.push(MODEL_VERSION);
    let u32le = |b: &mut Vec<u8>, v: usize| b.extend_from_slice(&(v as u32).to_le_bytes());
    u32le(&mut b, m.n_features);
    u32le(&mut b, m.layout.scales);
    u32le(&mut b, m.layout.per_scale);
    match &m.layout.config {
        Some(c) => {
            b.push(1);
            for v in [c.r0, c.phi, c.rho] {
                b.extend_from_slice(&v.to_le_bytes());
            }
        }
        None => b.push(0),
    }
    b.extend_from_slice(&m.seed.to_le_bytes());
    u32le(&mut b, m.classes.len());
    for &c in &m.classes {
        b.extend_from_slice(&c.to_le_bytes());
    }
    u32le(&mut b, m.trees.len());
    for t in &m.trees {
        u32le(&mut b, t.nodes.len());
        for n in &t.nodes {
            match n {
                Node::Leaf { probs } => {
                    b.push(0);
                    for p in probs {
                        b.extend_from_slice(&p.to_le_bytes());
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    b.push(1);
                    b.extend_from_slice(&feature.to_le_bytes());
                    b.extend_from_slice(&threshold.to_le_bytes());
                    b.extend_from_slice(&left.to_le_bytes());
                    b.extend_from_slice(&right.to_le_bytes());
                }
            }
        }
    }
    b
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.b.len());
        let end = end.ok_or_else(|| Error::Model("truncated model file".into()))?;
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode(bytes: &[u8]) -> Result<ForestModel> {
    let mut r = Reader { b: bytes, pos: 0 };
    if r.take(5)? != MAGIC {
        return Err(Error::Model("not a model file (bad magic)".into()));
    }
    let version = r.u8()?;
    if version != MODEL_VERSION {
        return Err(Error::Model(format!(
            "model version {version} not supported (expected {MODEL_VERSION})"
        )));
    }
    let n_features = r.u32()? as usize;
    let scales = r.u32()? as usize;
    let per_scale = r.u32()? as usize;
    let config = match r.u8()? {
        0 => None,
        1 => {
            let (r0, phi, rho) = (r.f64()?, r.f64()?, r.f64()?);
            Some(ScaleConfig::new(r0, scales, phi, rho).map_err(|e| Error::Model(e.to_string()))?)
        }
        t => return Err(Error::Model(format!("bad config tag {t}"))),
    };
    if scales * per_scale != n_features {
        return Err(Error::Model("layout does not match feature count".into()));
    }
    let seed = r.u64()?;
    let n_classes = r.u32()? as usize;
    let classes = (0..n_classes).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let n_trees = r.u32()? as usize;
    let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
    for _ in 0..n_trees {
        let n_nodes = r.u32()? as usize;
        let mut nodes = Vec::with_capacity(n_nodes.min(1 << 20));
        for _ in 0..n_nodes {
            nodes.push(match r.u8()? {
                0 => Node::Leaf {
                    probs: (0..n_classes).map(|_| r.f64()).collect::<Result<_>>()?,
                },
                1 => {
                    let feature = r.u32()?;
                    let threshold = r.f64()?;
                    let (left, right) = (r.u32()?, r.u32()?);
                    if feature as usize >= n_features || left as usize >= n_nodes || right as usize >= n_nodes {
                        return Err(Error::Model("corrupt split node".into()));
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    }
                }
                t => return Err(Error::Model(format!("bad node tag {t}"))),
            });
        }
        trees.push(Tree { nodes });
    }
    if r.pos != bytes.len() {
        return Err(Error::Model("trailing bytes after model".into()));
    }
    Ok(ForestModel {
        trees,
        classes,
        n_features,
        layout: FeatureLayout {
            scales,
            per_scale,
            config,
            origin: None,
        },
        seed,
    })
}
