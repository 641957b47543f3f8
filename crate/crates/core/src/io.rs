//! Point cloud and label file I/O.
//!
//! * ASCII XYZ: whitespace-separated columns, one point per line, `#` comment
//!   lines allowed. The schema is inferred from the column count (3 = xyz,
//!   4 = xyz+label, 6 = xyz+rgb, 7 = xyz+rgb+label) unless given explicitly.
//!   Color channels are stored as 0..=255 and rescaled to `[0, 1]` on load.
//! * Binary PLY: `binary_little_endian 1.0` with a `vertex` element holding
//!   `float`/`double` x, y, z, optional `uchar` red/green/blue and an optional
//!   integer `label` (or `class`) property.
//! * Label files: one base-10 integer per line, LF-terminated.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::cloud::{ClassId, PointCloud, Rgb};
use crate::geometry::Point3;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    AsciiXyz,
    PlyBinary,
}

impl CloudFormat {
    /// `.ply` → binary PLY, anything else → ASCII XYZ.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => CloudFormat::PlyBinary,
            _ => CloudFormat::AsciiXyz,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascii-xyz" | "xyz" | "ascii" => Ok(CloudFormat::AsciiXyz),
            "ply-binary" | "ply" => Ok(CloudFormat::PlyBinary),
            other => Err(Error::param(format!("unknown cloud format {other:?}"))),
        }
    }
}

/// Column layout of an ASCII XYZ file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsciiSchema {
    Xyz,
    XyzLabel,
    XyzRgb,
    XyzRgbLabel,
}

impl AsciiSchema {
    pub fn columns(self) -> usize {
        match self {
            AsciiSchema::Xyz => 3,
            AsciiSchema::XyzLabel => 4,
            AsciiSchema::XyzRgb => 6,
            AsciiSchema::XyzRgbLabel => 7,
        }
    }

    pub fn from_columns(n: usize) -> Option<Self> {
        match n {
            3 => Some(AsciiSchema::Xyz),
            4 => Some(AsciiSchema::XyzLabel),
            6 => Some(AsciiSchema::XyzRgb),
            7 => Some(AsciiSchema::XyzRgbLabel),
            _ => None,
        }
    }

    fn has_rgb(self) -> bool {
        matches!(self, AsciiSchema::XyzRgb | AsciiSchema::XyzRgbLabel)
    }

    fn has_label(self) -> bool {
        matches!(self, AsciiSchema::XyzLabel | AsciiSchema::XyzRgbLabel)
    }
}

impl FromStr for AsciiSchema {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xyz" => Ok(AsciiSchema::Xyz),
            "xyzl" | "xyz+label" => Ok(AsciiSchema::XyzLabel),
            "xyzrgb" | "xyz+rgb" => Ok(AsciiSchema::XyzRgb),
            "xyzrgbl" | "xyz+rgb+label" => Ok(AsciiSchema::XyzRgbLabel),
            other => Err(Error::param(format!("unknown ASCII schema {other:?}"))),
        }
    }
}

pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud<f64>> {
    match format {
        CloudFormat::AsciiXyz => load_ascii(path, None),
        CloudFormat::PlyBinary => load_ply(path),
    }
}

pub fn save_cloud(cloud: &PointCloud<f64>, path: &Path, format: CloudFormat) -> Result<()> {
    match format {
        CloudFormat::AsciiXyz => save_ascii(cloud, path),
        CloudFormat::PlyBinary => save_ply(cloud, path),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn channel_from_byte(v: f64) -> f64 {
    v / 255.0
}

fn channel_to_byte(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Loads an ASCII XYZ file; `schema = None` infers it from the first data
/// line and requires every later line to match.
pub fn load_ascii(path: &Path, schema: Option<AsciiSchema>) -> Result<PointCloud<f64>> {
    let reader = BufReader::new(open(path)?);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut schema = schema;
    let mut positions = Vec::new();
    let mut colors = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let s = match schema {
            Some(s) => s,
            None => {
                let s = AsciiSchema::from_columns(fields.len()).ok_or_else(|| {
                    Error::Format(format!(
                        "{}: line {lineno}: cannot infer schema from {} columns",
                        path.display(),
                        fields.len()
                    ))
                })?;
                schema = Some(s);
                s
            }
        };
        if fields.len() != s.columns() {
            return Err(Error::Format(format!(
                "{}: line {lineno}: expected {} columns, found {}",
                path.display(),
                s.columns(),
                fields.len()
            )));
        }
        let real = |k: usize| -> Result<f64> {
            fields[k]
                .parse::<f64>()
                .map_err(|_| parse_err(lineno, format!("invalid number {:?}", fields[k])))
        };
        let p = Point3::new(real(0)?, real(1)?, real(2)?);
        if !p.is_finite() {
            return Err(Error::Validation(format!(
                "{}: line {lineno}: non-finite coordinate",
                path.display()
            )));
        }
        positions.push(p);
        if s.has_rgb() {
            let mut rgb = [0.0; 3];
            for (c, slot) in rgb.iter_mut().enumerate() {
                let v = real(3 + c)?;
                if !(0.0..=255.0).contains(&v) {
                    return Err(Error::Validation(format!(
                        "{}: line {lineno}: color channel {v} outside [0, 255]",
                        path.display()
                    )));
                }
                *slot = channel_from_byte(v);
            }
            colors.push(rgb);
        }
        if s.has_label() {
            let tok = fields[s.columns() - 1];
            let l: ClassId = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid label {tok:?}")))?;
            labels.push(l);
        }
    }

    let has_rgb = schema.is_some_and(AsciiSchema::has_rgb);
    let has_label = schema.is_some_and(AsciiSchema::has_label);
    PointCloud::new(
        positions,
        has_rgb.then_some(colors),
        has_label.then_some(labels),
    )
}

pub fn save_ascii(cloud: &PointCloud<f64>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    for (i, p) in cloud.positions().iter().enumerate() {
        // `{}` on f64 prints the shortest representation that round-trips.
        write!(w, "{} {} {}", p.x, p.y, p.z).map_err(io)?;
        if let Some(c) = cloud.colors() {
            let [r, g, b] = c[i].map(channel_to_byte);
            write!(w, " {r} {g} {b}").map_err(io)?;
        }
        if let Some(l) = cloud.labels() {
            write!(w, " {}", l[i]).map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScalarKind {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => ScalarKind::I8,
            "uchar" | "uint8" => ScalarKind::U8,
            "short" | "int16" => ScalarKind::I16,
            "ushort" | "uint16" => ScalarKind::U16,
            "int" | "int32" => ScalarKind::I32,
            "uint" | "uint32" => ScalarKind::U32,
            "float" | "float32" => ScalarKind::F32,
            "double" | "float64" => ScalarKind::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarKind::I8 | ScalarKind::U8 => 1,
            ScalarKind::I16 | ScalarKind::U16 => 2,
            ScalarKind::I32 | ScalarKind::U32 | ScalarKind::F32 => 4,
            ScalarKind::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, ScalarKind::F32 | ScalarKind::F64)
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            ScalarKind::I8 => b[0] as i8 as f64,
            ScalarKind::U8 => b[0] as f64,
            ScalarKind::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarKind::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarKind::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarKind::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarKind::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            ScalarKind::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    /// `(name, kind, byte offset)`; list properties are not supported.
    props: Vec<(String, ScalarKind, usize)>,
    stride: usize,
    has_list: bool,
}

impl PlyElement {
    fn find(&self, name: &str) -> Option<(ScalarKind, usize)> {
        self.props
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, k, o)| (*k, *o))
    }
}

fn read_header_line(r: &mut impl BufRead, path: &Path, line: &mut usize) -> Result<String> {
    let mut buf = Vec::new();
    let n = r.read_until(b'\n', &mut buf).map_err(|e| Error::io(path, e))?;
    *line += 1;
    if n == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: *line,
            msg: "unexpected end of file in PLY header".into(),
        });
    }
    String::from_utf8(buf)
        .map(|s| s.trim_end_matches(['\r', '\n']).to_string())
        .map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: *line,
            msg: "non UTF-8 header line".into(),
        })
}

fn parse_ply_header(r: &mut impl BufRead, path: &Path) -> Result<Vec<PlyElement>> {
    let mut line = 0;
    let err = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.to_string(),
    };
    if read_header_line(r, path, &mut line)? != "ply" {
        return Err(err(line, "missing 'ply' magic"));
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    loop {
        let text = read_header_line(r, path, &mut line)?;
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks.as_slice() {
            [] => continue,
            ["comment", ..] | ["obj_info", ..] => continue,
            ["format", fmt, _version] => {
                if *fmt != "binary_little_endian" {
                    return Err(Error::Format(format!(
                        "{}: unsupported PLY format {fmt:?}",
                        path.display()
                    )));
                }
                saw_format = true;
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| err(line, "invalid element count"))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                    stride: 0,
                    has_list: false,
                });
            }
            ["property", "list", ..] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| err(line, "property before element"))?;
                el.has_list = true;
            }
            ["property", kind, name] => {
                let kind =
                    ScalarKind::parse(kind).ok_or_else(|| err(line, "unknown property type"))?;
                let el = elements
                    .last_mut()
                    .ok_or_else(|| err(line, "property before element"))?;
                el.props.push((name.to_string(), kind, el.stride));
                el.stride += kind.size();
            }
            ["end_header"] => break,
            _ => return Err(err(line, &format!("unrecognized header line {text:?}"))),
        }
    }
    if !saw_format {
        return Err(err(line, "missing format line"));
    }
    Ok(elements)
}

pub fn load_ply(path: &Path) -> Result<PointCloud<f64>> {
    let mut r = BufReader::new(open(path)?);
    let elements = parse_ply_header(&mut r, path)?;
    let fmt_err = |msg: String| Error::Format(format!("{}: {msg}", path.display()));

    // Fixed-size elements preceding the vertex block are skipped.
    let mut skip = 0usize;
    let mut vertex = None;
    for el in &elements {
        if el.name == "vertex" {
            vertex = Some(el);
            break;
        }
        if el.has_list {
            return Err(fmt_err(format!(
                "element {:?} with list properties precedes vertex",
                el.name
            )));
        }
        skip += el.count * el.stride;
    }
    let vertex = vertex.ok_or_else(|| fmt_err("no vertex element".into()))?;
    if vertex.has_list {
        return Err(fmt_err("list properties in vertex element".into()));
    }
    std::io::copy(&mut (&mut r).take(skip as u64), &mut std::io::sink())
        .map_err(|e| Error::io(path, e))?;

    let coord = |name: &str| -> Result<(ScalarKind, usize)> {
        match vertex.find(name) {
            Some((k @ (ScalarKind::F32 | ScalarKind::F64), o)) => Ok((k, o)),
            Some(_) => Err(fmt_err(format!("vertex property {name} must be float or double"))),
            None => Err(fmt_err(format!("vertex property {name} missing"))),
        }
    };
    let xyz = [coord("x")?, coord("y")?, coord("z")?];
    let rgb = match (vertex.find("red"), vertex.find("green"), vertex.find("blue")) {
        (Some(r), Some(g), Some(b)) => {
            if [r, g, b].iter().any(|(k, _)| *k != ScalarKind::U8) {
                return Err(fmt_err("color properties must be uchar".into()));
            }
            Some([r.1, g.1, b.1])
        }
        (None, None, None) => None,
        _ => return Err(fmt_err("incomplete red/green/blue properties".into())),
    };
    let label = match vertex.find("label").or_else(|| vertex.find("class")) {
        Some((k, o)) if k.is_integer() => Some((k, o)),
        Some(_) => return Err(fmt_err("label property must be an integer type".into())),
        None => None,
    };

    let n = vertex.count;
    let mut data = vec![0u8; n * vertex.stride];
    r.read_exact(&mut data).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            fmt_err(format!("truncated vertex data ({n} vertices declared)"))
        } else {
            Error::io(path, e)
        }
    })?;

    let mut positions = Vec::with_capacity(n);
    let mut colors = rgb.map(|_| Vec::with_capacity(n));
    let mut labels = label.map(|_| Vec::with_capacity(n));
    for (i, rec) in data.chunks_exact(vertex.stride.max(1)).take(n).enumerate() {
        let [x, y, z] = xyz.map(|(k, o)| k.read(&rec[o..]));
        let p = Point3::new(x, y, z);
        if !p.is_finite() {
            return Err(Error::Validation(format!(
                "{}: vertex {i} has a non-finite coordinate",
                path.display()
            )));
        }
        positions.push(p);
        if let (Some(cols), Some(offs)) = (colors.as_mut(), rgb) {
            let c: Rgb<f64> = offs.map(|o| channel_from_byte(rec[o] as f64));
            cols.push(c);
        }
        if let (Some(ls), Some((k, o))) = (labels.as_mut(), label) {
            let v = k.read(&rec[o..]);
            if v < 0.0 {
                return Err(Error::Validation(format!(
                    "{}: vertex {i} has negative label {v}",
                    path.display()
                )));
            }
            ls.push(v as ClassId);
        }
    }
    PointCloud::new(positions, colors, labels)
}

pub fn save_ply(cloud: &PointCloud<f64>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header += &format!("element vertex {}\n", cloud.len());
    header += "property double x\nproperty double y\nproperty double z\n";
    if cloud.has_colors() {
        header += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    }
    if cloud.labels().is_some() {
        header += "property int label\n";
    }
    header += "end_header\n";
    w.write_all(header.as_bytes()).map_err(io)?;

    for (i, p) in cloud.positions().iter().enumerate() {
        for v in [p.x, p.y, p.z] {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        if let Some(c) = cloud.colors() {
            w.write_all(&c[i].map(channel_to_byte)).map_err(io)?;
        }
        if let Some(l) = cloud.labels() {
            let v = i32::try_from(l[i])
                .map_err(|_| Error::Validation(format!("label {} exceeds int32", l[i])))?;
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn save_labels(labels: &[ClassId], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    for l in labels {
        writeln!(w, "{l}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn load_labels(path: &Path) -> Result<Vec<ClassId>> {
    let reader = BufReader::new(open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let tok = line.trim();
        if tok.is_empty() {
            continue;
        }
        out.push(tok.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("invalid label {tok:?}"),
        })?);
    }
    Ok(out)
}
