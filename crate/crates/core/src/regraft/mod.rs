//! The regrafted tree: classes of the pruning decomposition hung on a
//! single massless branch, at the positions given by the pruning integral,
//! and the summaries used to compare it with the spine decomposition.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::PruneDecomposition;
use crate::tree::WTree;

/// Graft positions closer than this share one branch vertex.
pub const POSITION_MERGE_TOL: f64 = 1e-15;

/// A branch of length `theta_total` from a fresh root, subdivided at the
/// distinct graft positions, with `subtrees[i]` grafted at distance
/// `classes[i].graft_pos` from the root.
pub fn build_regraft_tree(decomp: &PruneDecomposition, subtrees: &[WTree]) -> Result<WTree> {
    if subtrees.len() != decomp.classes.len() {
        return Err(Error::validation(
            None,
            format!(
                "{} subtrees for {} classes",
                subtrees.len(),
                decomp.classes.len()
            ),
        ));
    }
    let total = decomp.theta_total;
    let mut order: Vec<usize> = (0..subtrees.len()).collect();
    order.sort_by(|&a, &b| {
        decomp.classes[a]
            .graft_pos
            .total_cmp(&decomp.classes[b].graft_pos)
    });

    let mut parent = vec![None];
    let mut edge_len = vec![0.0];
    let mut heights = vec![0.0];
    let mut grafts = Vec::with_capacity(subtrees.len());
    for &i in &order {
        let pos = decomp.classes[i].graft_pos;
        if !(0.0..=total).contains(&pos) {
            return Err(Error::validation(
                i,
                format!("graft position {pos} outside [0, {total}]"),
            ));
        }
        let last = *heights.last().expect("root");
        if pos - last > POSITION_MERGE_TOL {
            parent.push(Some(heights.len() - 1));
            edge_len.push(pos - last);
            heights.push(pos);
        }
        grafts.push((subtrees[i].clone(), heights.len() - 1));
    }
    let last = *heights.last().expect("root");
    if total - last > POSITION_MERGE_TOL {
        parent.push(Some(heights.len() - 1));
        edge_len.push(total - last);
    }
    let n = parent.len();
    let branch = WTree::new(parent, edge_len, vec![0.0; n], vec![0.0; n])?;
    branch.graft(&grafts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub pos: f64,
    pub mass: f64,
}

/// Branch length plus the point configuration of (position, mass) atoms,
/// reduced to counts and small-mass sums per threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegraftSummary {
    pub branch_len: f64,
    pub atoms: Vec<Atom>,
    pub thresholds: Vec<f64>,
    /// `#{atoms with mass >= eps}` per threshold.
    pub counts: Vec<usize>,
    /// `sum of masses <= eps` per threshold.
    pub small_mass: Vec<f64>,
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    match thresholds.iter().position(|&e| !(e > 0.0 && e.is_finite())) {
        Some(i) => Err(Error::validation(
            i,
            format!("threshold must be positive, got {}", thresholds[i]),
        )),
        None => Ok(()),
    }
}

impl RegraftSummary {
    pub fn new(branch_len: f64, atoms: Vec<Atom>, thresholds: &[f64]) -> Result<Self> {
        check_thresholds(thresholds)?;
        let counts = thresholds
            .iter()
            .map(|&e| atoms.iter().filter(|a| a.mass >= e).count())
            .collect();
        let small_mass = thresholds
            .iter()
            .map(|&e| atoms.iter().filter(|a| a.mass <= e).map(|a| a.mass).sum())
            .collect();
        Ok(RegraftSummary {
            branch_len,
            atoms,
            thresholds: thresholds.to_vec(),
            counts,
            small_mass,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn csv_header(thresholds: &[f64]) -> String {
        let mut h = String::from("replica_id,kind,branch_len,n_atoms");
        for e in thresholds {
            write!(h, ",count_ge_{e}").expect("string write");
        }
        h
    }

    pub fn csv_row(&self, replica_id: u64, kind: SummaryKind) -> String {
        let mut row = format!(
            "{replica_id},{},{},{}",
            kind.as_str(),
            self.branch_len,
            self.atoms.len()
        );
        for c in &self.counts {
            write!(row, ",{c}").expect("string write");
        }
        row
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryKind {
    Regraft,
    Bismut,
}

impl SummaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SummaryKind::Regraft => "regraft",
            SummaryKind::Bismut => "bismut",
        }
    }
}

/// `(Theta, {(Theta_{theta_i}, sigma_i)})`.
pub fn regraft_summary(decomp: &PruneDecomposition, thresholds: &[f64]) -> Result<RegraftSummary> {
    let atoms = decomp
        .classes
        .iter()
        .map(|c| Atom {
            pos: c.graft_pos,
            mass: c.sigma,
        })
        .collect();
    RegraftSummary::new(decomp.theta_total, atoms, thresholds)
}

/// `(H, {(h, mass)})` of the spine from the root to `leaf`.
pub fn bismut_summary(tree: &WTree, leaf: usize, thresholds: &[f64]) -> Result<RegraftSummary> {
    let spine = tree.spine_decomposition(leaf, false)?;
    let atoms = spine
        .atoms
        .iter()
        .map(|a| Atom {
            pos: a.height,
            mass: a.mass,
        })
        .collect();
    RegraftSummary::new(spine.height, atoms, thresholds)
}
