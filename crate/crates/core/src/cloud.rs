use std::collections::BTreeSet;

use crate::geometry::Point3;
use crate::{Error, Real, Result};

/// Class identifier. `0` conventionally means "unclassified".
pub type ClassId = u32;

/// RGB color, each channel in `[0, 1]`.
pub type Rgb<T> = [T; 3];

/// Positions, colors and labels of a cloud.
pub type CloudParts<T> = (Vec<Point3<T>>, Option<Vec<Rgb<T>>>, Option<Vec<ClassId>>);

/// Positions with optional per-point colors and class labels.
///
/// The invariants (finite coordinates, channel ranges, matching lengths) are
/// checked on construction; fields are read-only afterwards.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud<T> {
    positions: Vec<Point3<T>>,
    colors: Option<Vec<Rgb<T>>>,
    labels: Option<Vec<ClassId>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(
        positions: Vec<Point3<T>>,
        colors: Option<Vec<Rgb<T>>>,
        labels: Option<Vec<ClassId>>,
    ) -> Result<Self> {
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::Validation(format!("point {i} has a non-finite coordinate")));
        }
        if let Some(c) = &colors {
            if c.len() != positions.len() {
                return Err(Error::Validation(format!(
                    "{} colors for {} points",
                    c.len(),
                    positions.len()
                )));
            }
            let bad = c
                .iter()
                .position(|rgb| rgb.iter().any(|&v| !(v >= T::zero() && v <= T::one())));
            if let Some(i) = bad {
                return Err(Error::Validation(format!("color {i} outside [0, 1]")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != positions.len() {
                return Err(Error::Validation(format!(
                    "{} labels for {} points",
                    l.len(),
                    positions.len()
                )));
            }
        }
        Ok(Self {
            positions,
            colors,
            labels,
        })
    }

    pub fn from_positions(positions: Vec<Point3<T>>) -> Result<Self> {
        Self::new(positions, None, None)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point3<T>] {
        &self.positions
    }

    pub fn colors(&self) -> Option<&[Rgb<T>]> {
        self.colors.as_deref()
    }

    pub fn labels(&self) -> Option<&[ClassId]> {
        self.labels.as_deref()
    }

    pub fn has_colors(&self) -> bool {
        self.colors.is_some()
    }

    /// Replaces (or removes) the label column.
    pub fn with_labels(self, labels: Option<Vec<ClassId>>) -> Result<Self> {
        Self::new(self.positions, self.colors, labels)
    }

    /// Axis-aligned `(min, max)` corners, `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Point3<T>, Point3<T>)> {
        let first = *self.positions.first()?;
        Some(
            self.positions
                .iter()
                .fold((first, first), |(lo, hi), p| (lo.min(p), hi.max(p))),
        )
    }

    /// Rigidly transforms every position with `f`, keeping colors and labels.
    pub fn map_positions(&self, f: impl Fn(&Point3<T>) -> Point3<T>) -> Result<Self> {
        Self::new(
            self.positions.iter().map(f).collect(),
            self.colors.clone(),
            self.labels.clone(),
        )
    }

    pub fn into_parts(self) -> CloudParts<T> {
        (self.positions, self.colors, self.labels)
    }
}

/// Ordered list of named classes plus the id excluded from training and
/// scoring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCatalog {
    classes: Vec<(ClassId, String)>,
    ignored: ClassId,
}

impl ClassCatalog {
    pub fn new(classes: Vec<(ClassId, String)>, ignored: ClassId) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (id, _) in &classes {
            if !seen.insert(*id) {
                return Err(Error::param(format!("duplicate class id {id}")));
            }
        }
        let classes = classes.into_iter().filter(|(id, _)| *id != ignored).collect();
        Ok(Self { classes, ignored })
    }

    /// Catalog with generic names for every non-ignored id in `labels`.
    pub fn infer<'a>(labels: impl IntoIterator<Item = &'a [ClassId]>, ignored: ClassId) -> Self {
        let ids: BTreeSet<ClassId> = labels
            .into_iter()
            .flat_map(|l| l.iter().copied())
            .filter(|&id| id != ignored)
            .collect();
        Self {
            classes: ids.into_iter().map(|id| (id, format!("class_{id}"))).collect(),
            ignored,
        }
    }

    /// Parses `"1:ground,2:facade"`; a bare id gets a generic name.
    pub fn parse(spec: &str, ignored: ClassId) -> Result<Self> {
        let mut classes = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (id, name) = match item.split_once(':') {
                Some((id, name)) => (id.trim(), name.trim().to_string()),
                None => (item, format!("class_{item}")),
            };
            let id: ClassId = id
                .parse()
                .map_err(|_| Error::param(format!("bad class id {id:?} in catalog")))?;
            classes.push((id, name));
        }
        Self::new(classes, ignored)
    }

    pub fn to_spec(&self) -> String {
        self.classes
            .iter()
            .map(|(id, name)| format!("{id}:{name}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn ignored(&self) -> ClassId {
        self.ignored
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.classes.iter().map(|(id, _)| *id)
    }

    pub fn name(&self, id: ClassId) -> Option<&str> {
        self.classes
            .iter()
            .find(|(c, _)| *c == id)
            .map(|(_, n)| n.as_str())
    }

    /// Position of `id` in the catalog order.
    pub fn index_of(&self, id: ClassId) -> Option<usize> {
        self.classes.iter().position(|(c, _)| *c == id)
    }

    pub fn entries(&self) -> &[(ClassId, String)] {
        &self.classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_lengths() {
        let pts = vec![Point3::new(0.0, 0.0, 0.0); 3];
        assert!(PointCloud::new(pts.clone(), None, Some(vec![1, 2])).is_err());
        assert!(PointCloud::new(pts, Some(vec![[0.0; 3]; 2]), None).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let pts = vec![Point3::new(0.0, f64::NAN, 0.0)];
        assert!(matches!(PointCloud::from_positions(pts), Err(Error::Validation(_))));
    }

    #[test]
    fn catalog_excludes_ignored() {
        let c = ClassCatalog::parse("0:unclassified,1:ground,2:facade", 0).unwrap();
        assert_eq!(c.ids().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(c.name(2), Some("facade"));
        assert!(ClassCatalog::parse("1:a,1:b", 0).is_err());
    }
}
