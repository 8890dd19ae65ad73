use super::CloudMap;
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, VertexId};

/// Largest witness size the brute-force search accepts.
pub const MAX_CLIQUE_SIZE: usize = 6;

/// Searches for `size` vertex-cloud vertices from pairwise distinct clouds at pairwise
/// distance exactly two. Returns the lexicographically first witness.
pub fn find_colorful_d2_clique(
    graph: &LabeledGraph,
    size: usize,
    cloud_map: &CloudMap,
) -> Result<Option<Vec<VertexId>>> {
    if size > MAX_CLIQUE_SIZE {
        return Err(Error::Guard(format!(
            "clique size {size} exceeds {MAX_CLIQUE_SIZE}"
        )));
    }
    if cloud_map.len() != graph.n() {
        return Err(Error::InvalidArgument(format!(
            "cloud map has {} entries for {} vertices",
            cloud_map.len(),
            graph.n()
        )));
    }
    let candidates: Vec<VertexId> = (0..graph.n())
        .filter(|&v| cloud_map[v].vertex_cloud().is_some())
        .collect();
    let dist: Vec<Vec<usize>> = candidates.iter().map(|&v| graph.bfs_distances(v)).collect();
    let mut chosen = Vec::with_capacity(size);
    let found = extend(&candidates, &dist, cloud_map, size, 0, &mut chosen);
    Ok(found.then(|| chosen.iter().map(|&i| candidates[i]).collect()))
}

fn extend(
    candidates: &[VertexId],
    dist: &[Vec<usize>],
    clouds: &CloudMap,
    size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == size {
        return true;
    }
    for i in start..candidates.len() {
        let v = candidates[i];
        let ok = chosen.iter().all(|&j| {
            clouds[candidates[j]].vertex_cloud() != clouds[v].vertex_cloud() && dist[j][v] == 2
        });
        if ok {
            chosen.push(i);
            if extend(candidates, dist, clouds, size, i + 1, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}
