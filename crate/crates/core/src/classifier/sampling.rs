use std::collections::BTreeMap;

use rand::seq::index;

use crate::cloud::ClassId;
use crate::seed;
use crate::{Error, Result};

/// Indices of every non-ignored label grouped by class, ascending.
pub(crate) fn group_by_class(labels: &[ClassId], ignored: ClassId) -> BTreeMap<ClassId, Vec<usize>> {
    let mut groups: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != ignored {
            groups.entry(l).or_default().push(i);
        }
    }
    groups
}

/// Uniform sample without replacement of `min(n_per_class, class size)`
/// indices from every non-ignored class. Classes are visited in ascending id
/// order and indices within a class are returned ascending.
pub fn balanced_sample(labels: &[ClassId], n_per_class: usize, ignored: ClassId, seed: u64) -> Result<Vec<usize>> {
    let groups = group_by_class(labels, ignored);
    if groups.is_empty() {
        return Err(Error::param("no labeled (non-ignored) points to sample from"));
    }
    let mut rng = seed::rng(seed);
    let mut out = Vec::new();
    for members in groups.values() {
        let k = n_per_class.min(members.len());
        let mut picked: Vec<usize> = index::sample(&mut rng, members.len(), k)
            .into_iter()
            .map(|j| members[j])
            .collect();
        picked.sort_unstable();
        out.extend(picked);
    }
    Ok(out)
}
