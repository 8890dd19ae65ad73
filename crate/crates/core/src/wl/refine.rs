//! Round-synchronous refinement shared by every engine.

use super::coloring::num_classes;
use super::table::{Color, ColorTable};
use crate::par;

pub(crate) struct RefineOutcome {
    pub colors: Vec<Color>,
    /// First round whose partition is stable (or the last round computed when capped).
    pub round: usize,
    pub stable: bool,
}

/// Refines `init` until the number of color classes stops growing.
///
/// `key(i, colors, buf)` writes object `i`'s canonical refinement record into
/// `buf` (cleared beforehand). The returned coloring is the first one whose class
/// count equals its predecessor's: it carries the stable partition (reached at
/// `round`) with colors from the confirming round, which makes them comparable
/// with any other run of the same keys. `observe` sees every coloring computed,
/// the initial one included.
pub(crate) fn refine<K, O>(
    init: Vec<Color>,
    table: &ColorTable,
    tag: u64,
    max_rounds: Option<usize>,
    key: K,
    mut observe: O,
) -> RefineOutcome
where
    K: Fn(usize, &[Color], &mut Vec<u64>) + Sync + Send,
    O: FnMut(usize, &[Color]),
{
    let mut current = init;
    observe(0, &current);
    let mut classes = num_classes(&current);
    let mut round = 0;
    loop {
        if max_rounds.is_some_and(|m| round >= m) {
            return RefineOutcome {
                colors: current,
                round,
                stable: false,
            };
        }
        let mut next = vec![Color(0); current.len()];
        {
            let cur = &current;
            let key = &key;
            par::fill_with_scratch(&mut next, Vec::new, |i, buf: &mut Vec<u64>| {
                buf.clear();
                key(i, cur, buf);
                table.relabel(tag, buf)
            });
        }
        round += 1;
        observe(round, &next);
        let next_classes = num_classes(&next);
        current = next;
        if next_classes == classes {
            return RefineOutcome {
                colors: current,
                round: round - 1,
                stable: true,
            };
        }
        classes = next_classes;
    }
}
