//! Marks on a weighted tree, the record process they induce, and the
//! decomposition of the tree into classes removed at a common time.
//!
//! Edge marks arrive at rate `2 beta` per unit length and node marks at a
//! branch point `p` at rate `node_mass[p]`; only the first arrival of each
//! clock matters. `theta(v)` is the first time a mark appears between `v`
//! and the root. A node mark at `p` caps every strict descendant of `p`
//! but not `p` itself.

mod cuts;

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::exponential;
use crate::tree::WTree;

pub use cuts::{count_cuts_edges, count_cuts_vertices};

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedTree {
    tree: WTree,
    edge_mark: Vec<f64>,
    node_mark: Vec<f64>,
    theta: Vec<f64>,
}

/// Draws first-mark times for every edge and branch point, then the record
/// values. One uniform is consumed per edge slot and per node slot (in
/// index order, edges first) whatever the rate, so streams stay aligned
/// when only `beta` changes.
pub fn assign_marks<R: Rng + ?Sized>(tree: WTree, beta: f64, rng: &mut R) -> Result<MarkedTree> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let n = tree.len();
    let edge_mark = (0..n)
        .map(|v| exponential(rng, 2.0 * beta * tree.edge_len(v)))
        .collect();
    let node_mark = (0..n)
        .map(|v| exponential(rng, tree.node_mass(v)))
        .collect();
    MarkedTree::from_marks(tree, edge_mark, node_mark)
}

impl MarkedTree {
    /// Builds the record process from explicit first-mark times (`+inf`
    /// meaning no mark). The root's edge mark is ignored.
    pub fn from_marks(tree: WTree, edge_mark: Vec<f64>, node_mark: Vec<f64>) -> Result<Self> {
        let n = tree.len();
        for (what, marks) in [("edge_mark", &edge_mark), ("node_mark", &node_mark)] {
            if marks.len() != n {
                return Err(Error::validation(
                    None,
                    format!("{what} has {} entries for {n} vertices", marks.len()),
                ));
            }
            if let Some(v) = marks.iter().position(|&t| !(t >= 0.0)) {
                return Err(Error::validation(
                    v,
                    format!("{what} must be >= 0, got {}", marks[v]),
                ));
            }
        }
        let mut theta = vec![f64::INFINITY; n];
        for &v in &tree.preorder()[1..] {
            let p = tree.parent(v).expect("non-root");
            theta[v] = theta[p].min(node_mark[p]).min(edge_mark[v]);
        }
        Ok(MarkedTree {
            tree,
            edge_mark,
            node_mark,
            theta,
        })
    }

    pub fn tree(&self) -> &WTree {
        &self.tree
    }

    pub fn into_tree(self) -> WTree {
        self.tree
    }

    pub fn edge_marks(&self) -> &[f64] {
        &self.edge_mark
    }

    pub fn node_marks(&self) -> &[f64] {
        &self.node_mark
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Same tree with every mark time multiplied by `c`.
    pub fn scale_marks(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {c}")));
        }
        let scale = |m: &[f64]| m.iter().map(|t| t * c).collect();
        MarkedTree::from_marks(
            self.tree.clone(),
            scale(&self.edge_mark),
            scale(&self.node_mark),
        )
    }

    /// `sigma_q`: mass of the vertices still present at pruning time `q`.
    pub fn pruned_mass(&self, q: f64) -> f64 {
        self.theta
            .iter()
            .zip(self.tree.vertex_masses())
            .filter(|(t, _)| **t >= q)
            .map(|(_, m)| m)
            .sum()
    }

    fn check_prunable(&self) -> Result<()> {
        match (0..self.tree.len())
            .find(|&v| self.tree.vertex_mass(v) > 0.0 && self.theta[v].is_infinite())
        {
            Some(v) => Err(Error::validation(
                v,
                "vertex carries mass but is never pruned",
            )),
            None => Ok(()),
        }
    }

    /// `Theta_q = sum_v m(v) (theta(v) - q)^+`.
    pub fn theta_integral(&self, q: f64) -> Result<f64> {
        self.check_prunable()?;
        Ok(self
            .theta
            .iter()
            .zip(self.tree.vertex_masses())
            .filter(|(_, m)| **m > 0.0)
            .map(|(t, m)| m * (t - q).max(0.0))
            .sum())
    }

    /// `Theta_q` as the integral of the step function `r -> sigma_r` over `[q, inf)`.
    pub fn theta_integral_stepwise(&self, q: f64) -> Result<f64> {
        self.check_prunable()?;
        let mut levels: Vec<(f64, f64)> = self
            .theta
            .iter()
            .zip(self.tree.vertex_masses())
            .filter(|(t, m)| **m > 0.0 && **t > q)
            .map(|(t, m)| (*t, *m))
            .collect();
        levels.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut sigma = 0.0;
        let mut total = 0.0;
        let mut i = 0;
        while i < levels.len() {
            let t = levels[i].0;
            while i < levels.len() && levels[i].0 == t {
                sigma += levels[i].1;
                i += 1;
            }
            let next = levels.get(i).map_or(q, |l| l.0);
            total += sigma * (t - next);
        }
        Ok(total)
    }

    /// Splits the non-root vertices with finite record value into maximal
    /// connected sets of constant `theta`. Sets cut off by one node mark at
    /// a common parent form a single class.
    pub fn decompose_classes(&self) -> Result<PruneDecomposition> {
        self.check_prunable()?;
        let tree = &self.tree;
        let mut class_of = vec![usize::MAX; tree.len()];
        let mut by_top: HashMap<(usize, u64), usize> = HashMap::new();
        let mut raw: Vec<(f64, usize, Vec<usize>)> = Vec::new();
        for &v in &tree.preorder()[1..] {
            let t = self.theta[v];
            if t.is_infinite() {
                continue;
            }
            let p = tree.parent(v).expect("non-root");
            let k = if p != tree.root() && self.theta[p] == t {
                class_of[p]
            } else if t == self.node_mark[p] {
                *by_top.entry((p, t.to_bits())).or_insert_with(|| {
                    raw.push((t, p, Vec::new()));
                    raw.len() - 1
                })
            } else {
                raw.push((t, p, Vec::new()));
                raw.len() - 1
            };
            class_of[v] = k;
            raw[k].2.push(v);
        }
        raw.sort_by(|a, b| b.0.total_cmp(&a.0));
        if let Some(w) = raw.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::TieAlarm(w[0].0));
        }
        let heights = tree.heights();
        let mut classes = Vec::with_capacity(raw.len());
        let (mut pos, mut above, mut prev) = (0.0, 0.0, f64::NAN);
        for (k, (theta, attach, members)) in raw.into_iter().enumerate() {
            if k > 0 {
                pos += above * (prev - theta);
            }
            let sigma: f64 = members.iter().map(|&v| tree.vertex_mass(v)).sum();
            above += sigma;
            prev = theta;
            classes.push(PruneClass {
                theta,
                attach,
                attach_height: heights[attach],
                sigma,
                graft_pos: pos,
                members,
            });
        }
        let theta_total = classes
            .last()
            .map_or(0.0, |c| c.graft_pos + above * c.theta);
        Ok(PruneDecomposition {
            classes,
            theta_total,
        })
    }

    /// The class as a tree of its own, rooted at a massless copy of its
    /// attach vertex.
    pub fn class_subtree(&self, class: &PruneClass) -> Result<WTree> {
        let tree = &self.tree;
        let m = class.members.len() + 1;
        let mut index = HashMap::with_capacity(m);
        index.insert(class.attach, 0usize);
        let mut parent = vec![None; m];
        let mut edge_len = vec![0.0; m];
        let mut vertex_mass = vec![0.0; m];
        let mut node_mass = vec![0.0; m];
        for (i, &v) in class.members.iter().enumerate() {
            let p = tree
                .parent(v)
                .ok_or_else(|| Error::validation(v, "root cannot be a class member"))?;
            let pi = *index.get(&p).ok_or_else(|| {
                Error::validation(v, "class members are not connected in preorder")
            })?;
            index.insert(v, i + 1);
            parent[i + 1] = Some(pi);
            edge_len[i + 1] = tree.edge_len(v);
            vertex_mass[i + 1] = tree.vertex_mass(v);
            node_mass[i + 1] = tree.node_mass(v);
        }
        WTree::new(parent, edge_len, vertex_mass, node_mass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneClass {
    pub theta: f64,
    /// Parent-side boundary vertex where the class hangs.
    pub attach: usize,
    pub attach_height: f64,
    pub sigma: f64,
    /// `Theta` at time `theta`: the regraft position of this class.
    pub graft_pos: f64,
    /// Member vertices in preorder.
    pub members: Vec<usize>,
}

/// Classes sorted by decreasing `theta`, so `graft_pos` is non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneDecomposition {
    pub classes: Vec<PruneClass>,
    /// `Theta = Theta_0`.
    pub theta_total: f64,
}

impl PruneDecomposition {
    pub const CSV_HEADER: &'static str = "theta_i,sigma_i,graft_pos,attach_height";

    pub fn total_sigma(&self) -> f64 {
        self.classes.iter().map(|c| c.sigma).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.classes {
            writeln!(
                out,
                "{},{},{},{}",
                c.theta, c.sigma, c.graft_pos, c.attach_height
            )
            .expect("string write");
        }
        out
    }
}
