use super::coloring::{ColorHistogram, Coloring, ObjectSpace};
use super::refine::refine;
use super::table::{Color, ColorTable};
use super::EngineRun;
use crate::graph::LabeledGraph;
use crate::hashing::{TAG_CR, TAG_LABEL, TAG_MULTISET};

pub(crate) fn label_colors(graph: &LabeledGraph, table: &ColorTable) -> Vec<Color> {
    graph
        .labels()
        .iter()
        .map(|&l| table.relabel(TAG_LABEL, &[l as u64]))
        .collect()
}

/// Color refinement from arbitrary initial colors; returns the run with per-round histograms.
pub(crate) fn refine_vertices(
    graph: &LabeledGraph,
    init: Vec<Color>,
    table: &ColorTable,
) -> EngineRun {
    let mut rounds = Vec::new();
    let outcome = refine(
        init,
        table,
        TAG_CR,
        None,
        |v, colors, buf| {
            buf.push(colors[v].0);
            let start = buf.len();
            buf.extend(graph.neighbors(v).iter().map(|&u| colors[u].0));
            buf[start..].sort_unstable();
        },
        |_, colors| rounds.push(ColorHistogram::from_colors(colors)),
    );
    let coloring = Coloring {
        space: ObjectSpace::Vertices,
        colors: outcome.colors,
        round: outcome.round,
        stable: outcome.stable,
    };
    EngineRun::from_coloring(coloring, rounds, table, TAG_MULTISET)
}

/// 1-WL / color refinement: `C_0 = labels`, then `RELABEL(own, {{neighbor colors}})` until stable.
pub fn color_refinement(graph: &LabeledGraph, table: &ColorTable) -> Coloring {
    color_refinement_run(graph, table).coloring
}

pub fn color_refinement_run(graph: &LabeledGraph, table: &ColorTable) -> EngineRun {
    refine_vertices(graph, label_colors(graph, table), table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named;

    #[test]
    fn cycle_is_one_class() {
        let t = ColorTable::checked();
        let c = color_refinement(&named::cycle(6), &t);
        assert_eq!(c.num_classes(), 1);
        assert!(c.stable);
        assert_eq!(c.histogram().class_sizes(), vec![6]);
    }

    #[test]
    fn path_splits_ends_from_middle() {
        let t = ColorTable::checked();
        let c = color_refinement(&named::path(3), &t);
        assert_eq!(c.histogram().class_sizes(), vec![2, 1]);
        assert_eq!(c.partition(), vec![0, 1, 0]);
        assert_eq!(c.round, 1);
    }

    #[test]
    fn labels_seed_the_partition() {
        let t = ColorTable::new();
        let g = named::cycle(4).with_labels(vec![1, 0, 0, 0]).unwrap();
        let c = color_refinement(&g, &t);
        assert_eq!(c.partition(), vec![0, 1, 2, 1]);
    }

    #[test]
    fn empty_graph() {
        let t = ColorTable::new();
        let c = color_refinement(&LabeledGraph::empty(0), &t);
        assert!(c.colors.is_empty());
        assert!(c.stable);
    }
}
