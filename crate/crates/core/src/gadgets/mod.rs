//! Hard-instance generators: CFI gadgets, Furer grid graphs, backbone composites,
//! plus seeded random graphs.
//!
//! Every generator also returns a cloud map assigning each output vertex to the
//! cloud it came from; [`Sidecar`] is its JSON form written next to graph files.

mod backbone;
mod cfi;
mod clique;
mod furer;
mod random;

pub use backbone::{gen_backbone, gen_backbone_pair, BackbonePair, BackbonePattern};
pub use cfi::{cfi_vertex_count, gen_cfi, CfiGadget, CfiVariant, MAX_CFI_K};
pub use clique::{find_colorful_d2_clique, MAX_CLIQUE_SIZE};
pub use furer::{
    default_twist_edge, furer_from_base, gen_furer, gen_furer_pair, grid_graph, FurerGraph,
    FurerPair, MAX_FURER_DEGREE,
};
pub use random::{gen_gnp, MAX_RANDOM_N};

use serde::{Deserialize, Serialize};

/// Origin of one generated vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CloudMember {
    /// `(v, S)` in the cloud of base vertex `cloud`; `subset` lists base edges in `S`.
    Vertex {
        copy: usize,
        cloud: usize,
        subset: Vec<[usize; 2]>,
    },
    /// `e^bit` in the cloud of base edge `cloud`.
    Edge {
        copy: usize,
        cloud: [usize; 2],
        bit: u8,
    },
    /// A backbone cycle vertex.
    Backbone { index: usize },
}

impl CloudMember {
    /// `(copy, base vertex)` for vertex-cloud members.
    pub fn vertex_cloud(&self) -> Option<(usize, usize)> {
        match *self {
            CloudMember::Vertex { copy, cloud, .. } => Some((copy, cloud)),
            _ => None,
        }
    }
}

pub type CloudMap = Vec<CloudMember>;

/// JSON metadata written next to a generated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub generator: String,
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub twisted_edges: Vec<[usize; 2]>,
    pub clouds: CloudMap,
}

impl Sidecar {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("sidecar serializes");
        s.push('\n');
        s
    }
}
