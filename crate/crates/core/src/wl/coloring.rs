use super::table::Color;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// What a coloring assigns colors to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectSpace {
    Vertices,
    Tuples { k: usize },
    Pairs { k: usize },
    Subgraphs { k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub space: ObjectSpace,
    pub colors: Vec<Color>,
    pub round: usize,
    pub stable: bool,
}

impl Coloring {
    pub fn num_classes(&self) -> usize {
        num_classes(&self.colors)
    }

    pub fn histogram(&self) -> ColorHistogram {
        ColorHistogram::from_colors(&self.colors)
    }

    /// Class index per object, numbered by first occurrence.
    pub fn partition(&self) -> Vec<usize> {
        partition_of(&self.colors)
    }

    /// True if every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &Coloring) -> bool {
        refines(&self.colors, &coarser.colors)
    }
}

pub(crate) fn num_classes(colors: &[Color]) -> usize {
    colors.iter().collect::<std::collections::HashSet<_>>().len()
}

pub fn partition_of(colors: &[Color]) -> Vec<usize> {
    let mut ids = HashMap::new();
    colors
        .iter()
        .map(|c| {
            let next = ids.len();
            *ids.entry(*c).or_insert(next)
        })
        .collect()
}

pub fn refines(finer: &[Color], coarser: &[Color]) -> bool {
    assert_eq!(finer.len(), coarser.len());
    let mut map = HashMap::new();
    finer
        .iter()
        .zip(coarser)
        .all(|(f, c)| *map.entry(*f).or_insert(*c) == *c)
}

/// Multiset of colors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorHistogram(pub BTreeMap<Color, usize>);

impl ColorHistogram {
    pub fn from_colors(colors: &[Color]) -> Self {
        let mut m = BTreeMap::new();
        for c in colors {
            *m.entry(*c).or_insert(0) += 1;
        }
        ColorHistogram(m)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn num_colors(&self) -> usize {
        self.0.len()
    }

    /// Class sizes in decreasing order.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.0.values().copied().collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

impl Serialize for ColorHistogram {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (c, n) in &self.0 {
            seq.serialize_element(&(c.to_string(), n))?;
        }
        seq.end()
    }
}
