//! Edge-list text and JSON graph formats.
//!
//! Edge-list text (`.txt`, `.el`, anything not `.json`):
//!
//! ```text
//! 3
//! 0 1
//! 1 2
//! # labels: 1 2 1
//! ```
//!
//! The first line is the vertex count, each following line one edge `u v`. The
//! `# labels:` trailer is written only when some label is non-zero. Other lines
//! starting with `#` and blank lines are ignored on read. Features are not
//! representable in this format.
//!
//! JSON: a single graph object `{"n":3,"edges":[[0,1],[1,2]],"labels":[0,0,0]}`
//! with optional `vertex_features` / `edge_features` arrays, or a dataset
//! `{"graphs":[...]}`. Writers emit compact JSON followed by a newline.

use super::{GraphRecord, LabeledGraph};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    EdgeList,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::EdgeList,
        }
    }
}

pub fn to_edge_list(g: &LabeledGraph) -> String {
    let mut out = format!("{}\n", g.n());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    if g.labels().iter().any(|&l| l != 0) {
        out.push_str("# labels:");
        for l in g.labels() {
            out.push_str(&format!(" {l}"));
        }
        out.push('\n');
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<LabeledGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut labels = None;
    let mut offset = 0usize;
    for (idx, raw) in text.split_inclusive('\n').enumerate() {
        let line_no = idx + 1;
        let line_offset = offset;
        offset += raw.len();
        let line = raw.trim();
        let err = |message: String| Error::Parse {
            line: line_no,
            offset: line_offset,
            message,
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(list) = rest.trim_start().strip_prefix("labels:") {
                let parsed: std::result::Result<Vec<u32>, _> =
                    list.split_whitespace().map(str::parse).collect();
                labels = Some(parsed.map_err(|e| err(format!("bad label: {e}")))?);
            }
            continue;
        }
        match n {
            None => {
                n = Some(
                    line.parse()
                        .map_err(|_| err(format!("expected vertex count, found {line:?}")))?,
                );
            }
            Some(_) => {
                let mut parts = line.split_whitespace();
                let (a, b) = (parts.next(), parts.next());
                if parts.next().is_some() {
                    return Err(err(format!("expected \"u v\", found {line:?}")));
                }
                let parse = |s: Option<&str>| -> Result<usize> {
                    s.and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(format!("expected \"u v\", found {line:?}")))
                };
                edges.push((parse(a)?, parse(b)?));
            }
        }
    }
    let n = n.ok_or_else(|| Error::Parse {
        line: 1,
        offset: 0,
        message: "missing vertex count".into(),
    })?;
    super::build_graph(n, &edges, labels)
}

pub fn to_json(g: &LabeledGraph) -> String {
    let mut s = serde_json::to_string(g).expect("graph serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Dataset {
    graphs: Vec<GraphRecord>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonDoc {
    Dataset(Dataset),
    Single(GraphRecord),
}

fn json_error(text: &str, e: serde_json::Error) -> Error {
    let line = e.line().max(1);
    let offset: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum::<usize>()
        + e.column().saturating_sub(1);
    Error::Parse {
        line,
        offset,
        message: e.to_string(),
    }
}

/// Parses either a single graph object or a `{"graphs": [...]}` dataset.
pub fn parse_json_dataset(text: &str) -> Result<Vec<LabeledGraph>> {
    // untagged enums lose positions, so probe the shape first and re-parse for errors
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| json_error(text, e))?;
    let records = if value.get("graphs").is_some() {
        serde_json::from_str::<Dataset>(text)
            .map_err(|e| json_error(text, e))?
            .graphs
    } else {
        match serde_json::from_value::<JsonDoc>(value) {
            Ok(JsonDoc::Single(r)) => vec![r],
            Ok(JsonDoc::Dataset(d)) => d.graphs,
            Err(_) => {
                let e = serde_json::from_str::<GraphRecord>(text).unwrap_err();
                return Err(json_error(text, e));
            }
        }
    };
    records.into_iter().map(LabeledGraph::try_from).collect()
}

pub fn to_json_dataset(graphs: &[LabeledGraph]) -> String {
    let d = Dataset {
        graphs: graphs.iter().cloned().map(GraphRecord::from).collect(),
    };
    let mut s = serde_json::to_string(&d).expect("dataset serializes");
    s.push('\n');
    s
}

pub fn read_graph(path: &Path, format: Format) -> Result<LabeledGraph> {
    let text = std::fs::read_to_string(path)?;
    match format {
        Format::EdgeList => parse_edge_list(&text),
        Format::Json => {
            let mut graphs = parse_json_dataset(&text)?;
            if graphs.len() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "expected one graph in {}, found {}",
                    path.display(),
                    graphs.len()
                )));
            }
            Ok(graphs.remove(0))
        }
    }
}

pub fn write_graph(path: &Path, graph: &LabeledGraph, format: Format) -> Result<()> {
    let text = match format {
        Format::EdgeList => {
            if graph.vertex_features().is_some() || graph.edge_features().is_some() {
                return Err(Error::InvalidArgument(
                    "edge-list format cannot carry features; use JSON".into(),
                ));
            }
            to_edge_list(graph)
        }
        Format::Json => to_json(graph),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Vec<LabeledGraph>> {
    parse_json_dataset(&std::fs::read_to_string(path)?)
}

pub fn write_dataset(path: &Path, graphs: &[LabeledGraph]) -> Result<()> {
    std::fs::write(path, to_json_dataset(graphs))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    #[test]
    fn path_text_is_exact() {
        let text = to_edge_list(&named::path(3));
        assert_eq!(text, "3\n0 1\n1 2\n");
        assert_eq!(parse_edge_list(&text).unwrap(), named::path(3));
    }

    #[test]
    fn labels_survive_json() {
        let g = named::path(3).with_labels(vec![1, 2, 1]).unwrap();
        let back = parse_json_dataset(&to_json(&g)).unwrap();
        assert_eq!(back, vec![g]);
    }

    #[test]
    fn labels_trailer_in_text() {
        let g = named::path(3).with_labels(vec![1, 2, 1]).unwrap();
        let text = to_edge_list(&g);
        assert!(text.ends_with("# labels: 1 2 1\n"));
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn malformed_line_reports_position() {
        match parse_edge_list("3\n0 x\n") {
            Err(Error::Parse { line, offset, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(offset, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_error_position() {
        match parse_json_dataset("{\"n\": 2,\n \"edges\": [[0, 1]],\n \"labels\": [0, x]}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn features_round_trip_through_json() {
        let g = build()
            .with_vertex_features(vec![vec![0.5, 1.0], vec![-1.0, 2.0], vec![0.0, 0.0]])
            .unwrap()
            .with_edge_features(vec![vec![3.0], vec![4.0]])
            .unwrap();
        let back = parse_json_dataset(&to_json_dataset(&[g.clone(), g.clone()])).unwrap();
        assert_eq!(back, vec![g.clone(), g]);
    }

    fn build() -> LabeledGraph {
        named::path(3)
    }
}
