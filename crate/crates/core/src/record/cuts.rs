//! Cut counts of the two discrete pruning procedures.
//!
//! Picking a uniform surviving edge at every step is the same as giving each
//! edge an i.i.d. uniform time and visiting edges in time order while
//! skipping the ones already gone. Both counters evaluate that record form
//! in linear passes over the tree instead of simulating the removal.

use rand::Rng;

use crate::gwgen::RawTree;
use crate::rng::open_unit;

/// Edge time per vertex (the edge above it); `+inf` at the root.
fn edge_times<R: Rng + ?Sized>(raw: &RawTree, rng: &mut R) -> Vec<f64> {
    (0..raw.len())
        .map(|v| {
            if v == raw.root() {
                f64::INFINITY
            } else {
                open_unit(rng)
            }
        })
        .collect()
}

/// Cuts needed to isolate the root when each cut removes an edge together
/// with the subtree below it. The edge above `v` is still present when
/// picked iff it comes before every edge on the path from the root to
/// `parent(v)`.
pub fn count_cuts_edges<R: Rng + ?Sized>(raw: &RawTree, rng: &mut R) -> usize {
    let t = edge_times(raw, rng);
    let mut above = vec![f64::INFINITY; raw.len()];
    let mut cuts = 0;
    for &v in &raw.preorder()[1..] {
        let p = raw.parents()[v].expect("non-root");
        above[v] = above[p].min(t[p]);
        if t[v] < above[v] {
            cuts += 1;
        }
    }
    cuts
}

/// Cuts until the root is removed (or no edge is left) when a pick removes
/// the parent-side vertex of the edge with everything below it.
///
/// `own[u]` is the time `u` would be removed by a pick of one of its own
/// edges: the first `t(u, c)` that comes before `own[c]`. The removal time
/// of `u` is the minimum of `own` along the path to the root, and edge
/// `(p, c)` counts iff it is what removes `p` while `c` is still there.
pub fn count_cuts_vertices<R: Rng + ?Sized>(raw: &RawTree, rng: &mut R) -> usize {
    let t = edge_times(raw, rng);
    let mut own = vec![f64::INFINITY; raw.len()];
    for &u in raw.preorder().iter().rev() {
        own[u] = raw
            .children(u)
            .iter()
            .filter(|&&c| t[c] < own[c])
            .map(|&c| t[c])
            .fold(f64::INFINITY, f64::min);
    }
    let mut removed = vec![f64::INFINITY; raw.len()];
    let mut cuts = 0;
    for &v in raw.preorder() {
        removed[v] = match raw.parents()[v] {
            Some(p) => removed[p].min(own[v]),
            None => own[v],
        };
        if let Some(p) = raw.parents()[v] {
            if t[v] < own[v] && t[v] == removed[p] {
                cuts += 1;
            }
        }
    }
    cuts
}
