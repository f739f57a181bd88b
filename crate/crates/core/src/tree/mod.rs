//! Rooted weighted trees with parent links, edge lengths and vertex masses.
//!
//! Masses live on vertices and the root carries none. Heights, depths and a
//! preorder are computed once at construction; the tree is immutable after
//! that.

mod topology;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub(crate) use topology::topology;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct WTree {
    parent: Vec<Option<usize>>,
    edge_len: Vec<f64>,
    vertex_mass: Vec<f64>,
    node_mass: Vec<f64>,
    root: usize,
    children: Vec<Vec<usize>>,
    preorder: Vec<usize>,
    /// position of each vertex in `preorder`
    rank: Vec<usize>,
    subtree_size: Vec<usize>,
    height: Vec<f64>,
    depth: Vec<usize>,
}

/// On-disk form: `{"parent", "edge_len", "vertex_mass", "node_mass", "root"}`,
/// index-aligned, with `null` as the root's parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub parent: Vec<Option<usize>>,
    pub edge_len: Vec<f64>,
    pub vertex_mass: Vec<f64>,
    pub node_mass: Vec<f64>,
    pub root: usize,
}

impl TryFrom<TreeJson> for WTree {
    type Error = Error;
    fn try_from(j: TreeJson) -> Result<Self> {
        let t = WTree::new(j.parent, j.edge_len, j.vertex_mass, j.node_mass)?;
        if t.root != j.root {
            return Err(Error::validation(
                j.root,
                format!(
                    "declared root disagrees with parent array (root is {})",
                    t.root
                ),
            ));
        }
        Ok(t)
    }
}

impl From<WTree> for TreeJson {
    fn from(t: WTree) -> Self {
        TreeJson {
            parent: t.parent,
            edge_len: t.edge_len,
            vertex_mass: t.vertex_mass,
            node_mass: t.node_mass,
            root: t.root,
        }
    }
}

/// One merged atom of the spine decomposition: everything hanging off the
/// spine at `attach`, plus the mass of `attach` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SpineAtom {
    pub height: f64,
    pub mass: f64,
    pub attach: usize,
    /// Vertices of the hanging components, when requested.
    pub members: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpineDecomposition {
    pub leaf: usize,
    pub height: f64,
    /// Sorted by height, one per spine vertex that carries mass or components.
    pub atoms: Vec<SpineAtom>,
}

impl WTree {
    /// Validates and builds a tree. `node_mass` may be empty, meaning all zero.
    pub fn new(
        parent: Vec<Option<usize>>,
        edge_len: Vec<f64>,
        vertex_mass: Vec<f64>,
        node_mass: Vec<f64>,
    ) -> Result<Self> {
        let n = parent.len();
        let node_mass = if node_mass.is_empty() {
            vec![0.0; n]
        } else {
            node_mass
        };
        for (name, len) in [
            ("edge_len", edge_len.len()),
            ("vertex_mass", vertex_mass.len()),
            ("node_mass", node_mass.len()),
        ] {
            if len != n {
                return Err(Error::validation(
                    None,
                    format!("{name} has length {len}, expected {n}"),
                ));
            }
        }
        let topo = topology(&parent)?;
        let root = topo.root;
        for v in 0..n {
            let (l, m, d) = (edge_len[v], vertex_mass[v], node_mass[v]);
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::validation(
                    v,
                    format!("edge length {l} must be finite and >= 0"),
                ));
            }
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::validation(
                    v,
                    format!("vertex mass {m} must be finite and >= 0"),
                ));
            }
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::validation(
                    v,
                    format!("node mass {d} must be finite and >= 0"),
                ));
            }
            if v == root {
                if l != 0.0 {
                    return Err(Error::validation(v, "root edge length must be 0"));
                }
                if m != 0.0 {
                    return Err(Error::validation(v, "root must carry zero mass"));
                }
            } else if l <= 0.0 {
                return Err(Error::validation(v, "non-root edge length must be > 0"));
            }
        }

        let mut rank = vec![0; n];
        for (i, &v) in topo.preorder.iter().enumerate() {
            rank[v] = i;
        }
        let mut height = vec![0.0; n];
        let mut depth = vec![0; n];
        for &v in &topo.preorder[1..] {
            let p = parent[v].expect("non-root");
            height[v] = height[p] + edge_len[v];
            depth[v] = depth[p] + 1;
        }
        let mut subtree_size = vec![1; n];
        for &v in topo.preorder.iter().rev() {
            if let Some(p) = parent[v] {
                subtree_size[p] += subtree_size[v];
            }
        }
        Ok(WTree {
            parent,
            edge_len,
            vertex_mass,
            node_mass,
            root,
            children: topo.children,
            preorder: topo.preorder,
            rank,
            subtree_size,
            height,
            depth,
        })
    }

    /// The one-vertex tree.
    pub fn singleton() -> Self {
        WTree::new(vec![None], vec![0.0], vec![0.0], vec![0.0]).expect("valid")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// Vertices of the subtree rooted at `v`, in preorder, `v` first.
    pub fn subtree(&self, v: usize) -> &[usize] {
        let r = self.rank[v];
        &self.preorder[r..r + self.subtree_size[v]]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    pub fn edge_len(&self, v: usize) -> f64 {
        self.edge_len[v]
    }

    pub fn edge_lens(&self) -> &[f64] {
        &self.edge_len
    }

    pub fn vertex_mass(&self, v: usize) -> f64 {
        self.vertex_mass[v]
    }

    pub fn vertex_masses(&self) -> &[f64] {
        &self.vertex_mass
    }

    pub fn node_mass(&self, v: usize) -> f64 {
        self.node_mass[v]
    }

    pub fn node_masses(&self) -> &[f64] {
        &self.node_mass
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn total_mass(&self) -> f64 {
        self.vertex_mass.iter().sum()
    }

    pub fn total_length(&self) -> f64 {
        self.edge_len.iter().sum()
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.len() {
            return Err(Error::Domain(format!(
                "vertex {v} out of range (tree has {})",
                self.len()
            )));
        }
        Ok(())
    }

    /// Distance from the root.
    pub fn height_of(&self, v: usize) -> Result<f64> {
        self.check(v)?;
        Ok(self.height[v])
    }

    pub fn heights(&self) -> &[f64] {
        &self.height
    }

    /// Most recent common ancestor.
    pub fn mrca(&self, u: usize, v: usize) -> Result<usize> {
        self.check(u)?;
        self.check(v)?;
        let (mut a, mut b) = (u, v);
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("deeper than root");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("deeper than root");
        }
        while a != b {
            a = self.parent[a].expect("not root");
            b = self.parent[b].expect("not root");
        }
        Ok(a)
    }

    /// `d(u, v) = h(u) + h(v) - 2 h(u ^ v)`.
    pub fn distance(&self, u: usize, v: usize) -> Result<f64> {
        let w = self.mrca(u, v)?;
        Ok(self.height[u] + self.height[v] - 2.0 * self.height[w])
    }

    /// Mass of the subtree below each vertex, the vertex included.
    pub fn subtree_masses(&self) -> Vec<f64> {
        let mut acc = self.vertex_mass.clone();
        for &v in self.preorder.iter().rev() {
            if let Some(p) = self.parent[v] {
                acc[p] += acc[v];
            }
        }
        acc
    }

    /// Grafts each `(subtree, attach)` pair by identifying the subtree root
    /// with `attach`. Base vertices keep their indices; the non-root
    /// vertices of each subtree follow in order, in the subtree's preorder.
    /// Mass (and node mass) sitting on a subtree root is added to `attach`.
    pub fn graft(&self, grafts: &[(WTree, usize)]) -> Result<WTree> {
        let mut parent = self.parent.clone();
        let mut edge_len = self.edge_len.clone();
        let mut vertex_mass = self.vertex_mass.clone();
        let mut node_mass = self.node_mass.clone();
        for (k, (sub, attach)) in grafts.iter().enumerate() {
            if *attach >= self.len() {
                return Err(Error::validation(
                    k,
                    format!(
                        "attach vertex {attach} out of range (base has {})",
                        self.len()
                    ),
                ));
            }
            vertex_mass[*attach] += sub.vertex_mass[sub.root];
            node_mass[*attach] += sub.node_mass[sub.root];
            let offset = parent.len();
            let mut new_index = vec![usize::MAX; sub.len()];
            new_index[sub.root] = *attach;
            for (i, &v) in sub.preorder[1..].iter().enumerate() {
                new_index[v] = offset + i;
            }
            for &v in &sub.preorder[1..] {
                let p = sub.parent[v].expect("non-root");
                parent.push(Some(new_index[p]));
                edge_len.push(sub.edge_len[v]);
                vertex_mass.push(sub.vertex_mass[v]);
                node_mass.push(sub.node_mass[v]);
            }
        }
        WTree::new(parent, edge_len, vertex_mass, node_mass)
    }

    /// Splits the tree along the path from the root to `leaf`.
    ///
    /// Every spine vertex `w` (root included, `leaf` excluded) yields one
    /// atom at height `h(w)` whose mass is the mass of all components
    /// hanging off `w` plus `vertex_mass[w]`. Atoms with neither mass nor
    /// components are dropped.
    pub fn spine_decomposition(
        &self,
        leaf: usize,
        keep_members: bool,
    ) -> Result<SpineDecomposition> {
        self.check(leaf)?;
        if !self.is_leaf(leaf) {
            return Err(Error::Domain(format!(
                "vertex {leaf} has children; not a leaf"
            )));
        }
        let sub_mass = self.subtree_masses();
        let mut spine = Vec::with_capacity(self.depth[leaf] + 1);
        let mut v = leaf;
        while let Some(p) = self.parent[v] {
            spine.push((p, v));
            v = p;
        }
        spine.reverse();

        let mut atoms = Vec::with_capacity(spine.len());
        for (w, next) in spine {
            let mut mass = self.vertex_mass[w];
            let mut has_components = false;
            let mut members = keep_members.then(Vec::new);
            for &c in &self.children[w] {
                if c == next {
                    continue;
                }
                has_components = true;
                mass += sub_mass[c];
                if let Some(m) = members.as_mut() {
                    m.extend_from_slice(self.subtree(c));
                }
            }
            if has_components || mass > 0.0 {
                atoms.push(SpineAtom {
                    height: self.height[w],
                    mass,
                    attach: w,
                    members,
                });
            }
        }
        Ok(SpineDecomposition {
            leaf,
            height: self.height[leaf],
            atoms,
        })
    }

    /// Draws a vertex with probability `vertex_mass[v] / total_mass`.
    pub fn sample_vertex_by_mass<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.sample_by_mass_where(rng, |_| true)
    }

    /// Same law restricted to leaves.
    pub fn sample_leaf_by_mass<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        self.sample_by_mass_where(rng, |v| self.is_leaf(v))
    }

    fn sample_by_mass_where<R, F>(&self, rng: &mut R, keep: F) -> Result<usize>
    where
        R: Rng + ?Sized,
        F: Fn(usize) -> bool,
    {
        let total: f64 = (0..self.len())
            .filter(|&v| keep(v))
            .map(|v| self.vertex_mass[v])
            .sum();
        if !(total > 0.0) {
            return Err(Error::Domain(
                "cannot sample by mass from a zero-mass tree".into(),
            ));
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = None;
        for v in (0..self.len()).filter(|&v| keep(v)) {
            let m = self.vertex_mass[v];
            if m > 0.0 {
                acc += m;
                last = Some(v);
                if u < acc {
                    return Ok(v);
                }
            }
        }
        Ok(last.expect("positive total mass"))
    }
}

#[cfg(test)]
mod tests;
