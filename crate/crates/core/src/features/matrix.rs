//! Feature matrix storage.
//!
//! On disk a matrix is a raw little-endian `f64` row-major file plus a text
//! sidecar (`<file>.hdr`) of `key=value` lines:
//!
//! ```text
//! format=msfeat-features
//! version=1
//! n_rows=1000
//! n_cols=144
//! scales=8
//! per_scale=18
//! r0=0.1
//! phi=2
//! rho=5
//! origin=12.5 -3 0.25
//! names=s0_sum_eigenvalues,s0_omnivariance,...
//! ```
//!
//! `r0`/`phi`/`rho`/`origin` are omitted for matrices that were not produced
//! from a scale pyramid.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::geometry::Point3;
use crate::{Error, Real, Result};

use super::config::ScaleConfig;
use super::descriptors::{feature_names, COLOR_FEATURES, GEOMETRIC_FEATURES};
use super::pyramid::ScalePyramid;

const FORMAT_TAG: &str = "msfeat-features";
const VERSION: u32 = 1;

/// Column layout: `scales` blocks of `per_scale` features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureLayout {
    pub scales: usize,
    pub per_scale: usize,
    pub config: Option<ScaleConfig>,
    pub origin: Option<[f64; 3]>,
}

impl FeatureLayout {
    pub fn for_pyramid<T: Real>(p: &ScalePyramid<T>) -> Self {
        let per_scale = GEOMETRIC_FEATURES + if p.has_colors() { COLOR_FEATURES } else { 0 };
        Self {
            scales: p.num_scales(),
            per_scale,
            config: Some(*p.config()),
            origin: Some(p.origin().cast::<f64>().to_array()),
        }
    }

    /// Generic layout of `cols` unnamed columns.
    pub fn plain(cols: usize) -> Self {
        Self {
            scales: 1,
            per_scale: cols,
            config: None,
            origin: None,
        }
    }

    pub fn columns(&self) -> usize {
        self.scales * self.per_scale
    }

    pub fn has_colors(&self) -> bool {
        self.config.is_some() && self.per_scale == GEOMETRIC_FEATURES + COLOR_FEATURES
    }

    pub fn names(&self) -> Vec<String> {
        if self.config.is_some()
            && (self.per_scale == GEOMETRIC_FEATURES || self.per_scale == GEOMETRIC_FEATURES + COLOR_FEATURES)
        {
            feature_names(self.scales, self.has_colors())
        } else {
            (0..self.columns()).map(|i| format!("f{i}")).collect()
        }
    }

    /// Same columns with the same meaning (origin is not compared).
    pub fn compatible(&self, other: &FeatureLayout) -> bool {
        self.scales == other.scales && self.per_scale == other.per_scale && self.config == other.config
    }
}

/// Dense row-major matrix, one row per query point.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<T> {
    rows: usize,
    layout: FeatureLayout,
    data: Vec<T>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn from_parts(rows: usize, layout: FeatureLayout, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * layout.columns(), "feature data size");
        Self { rows, layout, data }
    }

    /// Matrix with a [`FeatureLayout::plain`] layout.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("ragged feature rows"));
        }
        Ok(Self {
            rows: rows.len(),
            layout: FeatureLayout::plain(cols),
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.layout.columns()
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols() + j]
    }

    /// Block of scale `s` in row `i`.
    pub fn scale_block(&self, i: usize, s: usize) -> &[T] {
        let p = self.layout.per_scale;
        &self.row(i)[s * p..(s + 1) * p]
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            layout: self.layout.clone(),
            data,
        }
    }

    pub fn to_f64(&self) -> FeatureMatrix<f64> {
        FeatureMatrix {
            rows: self.rows,
            layout: self.layout.clone(),
            data: self.data.iter().map(|v| v.to_f64_()).collect(),
        }
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".hdr");
        PathBuf::from(s)
    }

    /// Writes the binary data to `path` and the header to `path.hdr`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?);
        for v in &self.data {
            w.write_all(&v.to_f64_().to_le_bytes())
                .map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        let hdr = Self::sidecar_path(path);
        fs::write(&hdr, self.header_text()).map_err(|e| Error::io(&hdr, e))
    }

    pub fn header_text(&self) -> String {
        let l = &self.layout;
        let mut s = format!(
            "format={FORMAT_TAG}\nversion={VERSION}\nn_rows={}\nn_cols={}\nscales={}\nper_scale={}\n",
            self.rows,
            self.cols(),
            l.scales,
            l.per_scale
        );
        if let Some(c) = &l.config {
            s += &format!("r0={}\nphi={}\nrho={}\n", c.r0, c.phi, c.rho);
        }
        if let Some([x, y, z]) = l.origin {
            s += &format!("origin={x} {y} {z}\n");
        }
        s += &format!("names={}\n", l.names().join(","));
        s
    }

    /// Comma-separated export with a header row of column names.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
        writeln!(w, "{}", self.layout.names().join(",")).map_err(io)?;
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

impl FeatureMatrix<f64> {
    pub fn load(path: &Path) -> Result<Self> {
        let hdr_path = Self::sidecar_path(path);
        let text = fs::read_to_string(&hdr_path).map_err(|e| Error::io(&hdr_path, e))?;
        let mut kv = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: hdr_path.clone(),
                line: i + 1,
                msg: format!("expected key=value, got {line:?}"),
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<&String> {
            kv.get(k)
                .ok_or_else(|| Error::Format(format!("{}: missing key {k}", hdr_path.display())))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Format(format!("{}: bad value for {k}", hdr_path.display())))
        };
        let count = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::Format(format!("{}: bad value for {k}", hdr_path.display())))
        };
        if get("format")? != FORMAT_TAG {
            return Err(Error::Format(format!("{}: not a feature header", hdr_path.display())));
        }
        if count("version")? != VERSION as usize {
            return Err(Error::Format(format!("{}: unsupported version", hdr_path.display())));
        }
        let rows = count("n_rows")?;
        let cols = count("n_cols")?;
        let scales = count("scales")?;
        let per_scale = count("per_scale")?;
        if scales * per_scale != cols {
            return Err(Error::Format(format!(
                "{}: scales x per_scale != n_cols",
                hdr_path.display()
            )));
        }
        let config = if kv.contains_key("r0") {
            Some(ScaleConfig::new(num("r0")?, scales, num("phi")?, num("rho")?)?)
        } else {
            None
        };
        let origin = match kv.get("origin") {
            Some(o) => {
                let v: Vec<f64> = o
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Format(format!("{}: bad origin", hdr_path.display())))?;
                if v.len() != 3 {
                    return Err(Error::Format(format!("{}: bad origin", hdr_path.display())));
                }
                Some(Point3::new(v[0], v[1], v[2]).to_array())
            }
            None => None,
        };

        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() != rows * cols * 8 {
            return Err(Error::Format(format!(
                "{}: expected {} bytes for {rows}x{cols}, found {}",
                path.display(),
                rows * cols * 8,
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(Self {
            rows,
            layout: FeatureLayout {
                scales,
                per_scale,
                config,
                origin,
            },
            data,
        })
    }
}
