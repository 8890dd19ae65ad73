use super::cfi::{gen_cfi, CfiVariant};
use super::{CloudMap, CloudMember};
use crate::error::{Error, Result};
use crate::graph::{build_graph, LabeledGraph};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackbonePattern {
    /// `G, H, G, H` around the cycle.
    Alternating,
    /// `G, G, H, H` around the cycle.
    Blocked,
}

impl BackbonePattern {
    fn variants(self) -> [CfiVariant; 4] {
        use CfiVariant::{G, H};
        match self {
            BackbonePattern::Alternating => [G, H, G, H],
            BackbonePattern::Blocked => [G, G, H, H],
        }
    }
}

impl FromStr for BackbonePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alternating" => Ok(BackbonePattern::Alternating),
            "blocked" => Ok(BackbonePattern::Blocked),
            _ => Err(Error::InvalidArgument(format!(
                "pattern must be alternating or blocked, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackbonePair {
    pub k: usize,
    pub x_graph: LabeledGraph,
    pub y_graph: LabeledGraph,
}

/// A 4-cycle `u_1..u_4` (vertices `0..4`, labeled one above every gadget label) with a
/// CFI gadget copy per backbone vertex, each gadget vertex joined to its backbone vertex.
///
/// Gadget copies follow in backbone order, each keeping its own internal vertex order
/// and labels.
pub fn gen_backbone(k: usize, pattern: BackbonePattern) -> Result<(LabeledGraph, CloudMap)> {
    let gadgets = pattern
        .variants()
        .map(|v| gen_cfi(k, v));
    let mut parts = Vec::with_capacity(4);
    for g in gadgets {
        parts.push(g?);
    }
    let red = parts
        .iter()
        .flat_map(|g| g.graph.labels().iter().copied())
        .max()
        .unwrap_or(0)
        + 1;
    let mut labels = vec![red; 4];
    let mut clouds: CloudMap = (0..4).map(|index| CloudMember::Backbone { index }).collect();
    let mut edges = vec![(0, 1), (1, 2), (2, 3), (0, 3)];
    for (copy, gadget) in parts.iter().enumerate() {
        let shift = labels.len();
        labels.extend_from_slice(gadget.graph.labels());
        edges.extend(gadget.graph.edges().iter().map(|&(a, b)| (a + shift, b + shift)));
        edges.extend((0..gadget.graph.n()).map(|v| (copy, v + shift)));
        clouds.extend(gadget.cloud_map.iter().cloned().map(|m| match m {
            CloudMember::Vertex { cloud, subset, .. } => CloudMember::Vertex {
                copy: copy + 1,
                cloud,
                subset,
            },
            CloudMember::Edge { cloud, bit, .. } => CloudMember::Edge {
                copy: copy + 1,
                cloud,
                bit,
            },
            other => other,
        }));
    }
    let graph = build_graph(labels.len(), &edges, Some(labels))?;
    Ok((graph, clouds))
}

pub fn gen_backbone_pair(k: usize) -> Result<BackbonePair> {
    Ok(BackbonePair {
        k,
        x_graph: gen_backbone(k, BackbonePattern::Alternating)?.0,
        y_graph: gen_backbone(k, BackbonePattern::Blocked)?.0,
    })
}
