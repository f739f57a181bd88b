//! Galton-Watson trees conditioned on their total progeny, and their
//! rescaling into discrete approximations of Levy trees.
//!
//! Conditioning draws `n` i.i.d. offspring counts until they sum to `n - 1`
//! and then rotates the sequence by the cycle lemma: exactly one cyclic
//! shift is a valid Lukasiewicz word, and exchangeability makes the chosen
//! plane tree exactly distributed as the conditioned tree.

mod offspring;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{topology, WTree};

pub use offspring::{
    GeometricHalf, OffspringDistribution, OffspringLaw, PoissonOne, StableTail,
    DEFAULT_STABLE_TRUNCATION,
};

/// Unweighted rooted tree given by parent links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Option<usize>>", into = "Vec<Option<usize>>")]
pub struct RawTree {
    parent: Vec<Option<usize>>,
    root: usize,
    children: Vec<Vec<usize>>,
    preorder: Vec<usize>,
}

impl TryFrom<Vec<Option<usize>>> for RawTree {
    type Error = Error;
    fn try_from(parent: Vec<Option<usize>>) -> Result<Self> {
        RawTree::new(parent)
    }
}

impl From<RawTree> for Vec<Option<usize>> {
    fn from(t: RawTree) -> Self {
        t.parent
    }
}

impl RawTree {
    pub fn new(parent: Vec<Option<usize>>) -> Result<Self> {
        let topo = topology(&parent)?;
        Ok(RawTree {
            parent,
            root: topo.root,
            children: topo.children,
            preorder: topo.preorder,
        })
    }

    /// Plane tree of a valid Lukasiewicz word (offspring counts in preorder).
    /// Vertex `i` of the result is the `i`-th vertex in preorder.
    pub fn from_lukasiewicz(word: &[usize]) -> Result<Self> {
        let n = word.len();
        if n == 0 {
            return Err(Error::validation(None, "empty word"));
        }
        let mut parent = vec![None; n];
        let mut open: Vec<(usize, usize)> = Vec::new();
        for (v, &k) in word.iter().enumerate() {
            while matches!(open.last(), Some(&(_, 0))) {
                open.pop();
            }
            match open.last_mut() {
                Some(top) => {
                    parent[v] = Some(top.0);
                    top.1 -= 1;
                }
                None if v > 0 => {
                    return Err(Error::validation(v, "word exhausted before its end"));
                }
                None => {}
            }
            if k > 0 {
                open.push((v, k));
            }
        }
        if open.iter().any(|&(_, r)| r > 0) {
            return Err(Error::validation(None, "word ends with unfilled children"));
        }
        RawTree::new(parent)
    }

    pub fn path(n: usize) -> Self {
        RawTree::new((0..n.max(1)).map(|v| v.checked_sub(1)).collect()).expect("valid")
    }

    pub fn star(n: usize) -> Self {
        RawTree::new((0..n.max(1)).map(|v| (v > 0).then_some(0)).collect()).expect("valid")
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

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// Offspring counts in preorder (children visited in index order).
    pub fn lukasiewicz_word(&self) -> Vec<usize> {
        self.preorder
            .iter()
            .map(|&v| self.children[v].len())
            .collect()
    }
}

/// Partial sums `S_k = sum_{i <= k} (x_i - 1)` for `k = 1..=n`.
pub fn lukasiewicz_path(word: &[usize]) -> Vec<i64> {
    word.iter()
        .scan(0i64, |s, &x| {
            *s += x as i64 - 1;
            Some(*s)
        })
        .collect()
}

/// Rotates a sequence with `sum = len - 1` so that its Lukasiewicz path
/// stays `>= 0` until the last step: start right after the first index at
/// which the path reaches its minimum.
pub fn cycle_lemma_rotation(counts: &[usize]) -> Vec<usize> {
    let path = lukasiewicz_path(counts);
    let (argmin, _) =
        path.iter().enumerate().fold(
            (0, i64::MAX),
            |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
        );
    let start = argmin + 1;
    counts[start..]
        .iter()
        .chain(&counts[..start])
        .copied()
        .collect()
}

/// Rejection budget for the conditioning `sum = n - 1`.
fn attempt_budget(n: usize) -> usize {
    10_000 + 100 * n
}

/// Plane tree with exactly `n` vertices distributed as the Galton-Watson
/// tree conditioned on total progeny `n`.
pub fn sample_conditioned_tree<R: Rng>(
    law: &dyn OffspringDistribution,
    n: usize,
    rng: &mut R,
) -> Result<RawTree> {
    if n == 0 {
        return Err(Error::Domain("tree size must be >= 1".into()));
    }
    let rng: &mut dyn RngCore = rng;
    let target = n - 1;
    let mut counts = Vec::with_capacity(n);
    for _ in 0..attempt_budget(n) {
        counts.clear();
        let mut sum = 0usize;
        for _ in 0..n {
            let k = law.sample(rng);
            sum += k;
            if sum > target {
                break;
            }
            counts.push(k);
        }
        if counts.len() == n && sum == target {
            return RawTree::from_lukasiewicz(&cycle_lemma_rotation(&counts));
        }
    }
    Err(Error::Infeasible(format!(
        "no {} offspring sequence of length {n} summing to {target} within {} attempts",
        law.name(),
        attempt_budget(n)
    )))
}

/// Otter-Dwass: `P(total progeny = n) = (1/n) P(xi_1 + ... + xi_n = n - 1)`,
/// by exact convolution of the offspring law.
pub fn total_progeny_check(law: &dyn OffspringDistribution, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    if n > 8 {
        return Err(Error::Unsupported(format!(
            "exact convolution limited to n <= 8, got {n}"
        )));
    }
    let target = n - 1;
    let pmf: Vec<f64> = (0..=target).map(|k| law.pmf(k)).collect();
    let mut dist = vec![0.0; target + 1];
    dist[0] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; target + 1];
        for (s, &ps) in dist.iter().enumerate() {
            for (k, &pk) in pmf.iter().enumerate().take(target + 1 - s) {
                next[s + k] += ps * pk;
            }
        }
        dist = next;
    }
    Ok(dist[target] / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPlan {
    pub n: usize,
    pub edge_scale: f64,
    pub mass_scale: f64,
    pub node_mass_scale: f64,
    pub gamma: f64,
}

impl ScalingPlan {
    /// Plan that gives the rescaled tree unit total mass, the root excluded.
    pub fn unit_mass(n: usize, edge_scale: f64, node_mass_scale: f64, gamma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "unit-mass plan needs n >= 2, got {n}"
            )));
        }
        let plan = ScalingPlan {
            n,
            edge_scale,
            mass_scale: 1.0 / (n - 1) as f64,
            node_mass_scale,
            gamma,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.edge_scale > 0.0 && self.edge_scale.is_finite()) {
            return Err(Error::validation(
                None,
                format!("edge_scale must be > 0, got {}", self.edge_scale),
            ));
        }
        if !(self.mass_scale > 0.0 && self.mass_scale.is_finite()) {
            return Err(Error::validation(
                None,
                format!("mass_scale must be > 0, got {}", self.mass_scale),
            ));
        }
        if !(self.node_mass_scale >= 0.0 && self.node_mass_scale.is_finite()) {
            return Err(Error::validation(
                None,
                format!("node_mass_scale must be >= 0, got {}", self.node_mass_scale),
            ));
        }
        if !(self.gamma > 1.0 && self.gamma <= 2.0) {
            return Err(Error::validation(
                None,
                format!("gamma must lie in (1, 2], got {}", self.gamma),
            ));
        }
        Ok(())
    }
}

/// Turns a raw tree into a weighted tree: every edge gets `edge_scale`,
/// every non-root vertex `mass_scale`, and a vertex with `c` children gets
/// node mass `node_mass_scale * max(0, c - 1)`. Returns the tree and its
/// total length `L_n = (n - 1) * edge_scale`.
pub fn rescale(raw: &RawTree, plan: &ScalingPlan) -> Result<(WTree, f64)> {
    plan.validate()?;
    if raw.len() != plan.n {
        return Err(Error::Domain(format!(
            "plan targets {} vertices but tree has {}",
            plan.n,
            raw.len()
        )));
    }
    let n = raw.len();
    let mut edge_len = vec![plan.edge_scale; n];
    let mut vertex_mass = vec![plan.mass_scale; n];
    edge_len[raw.root] = 0.0;
    vertex_mass[raw.root] = 0.0;
    let node_mass = (0..n)
        .map(|v| plan.node_mass_scale * raw.children[v].len().saturating_sub(1) as f64)
        .collect();
    let tree = WTree::new(raw.parent.clone(), edge_len, vertex_mass, node_mass)?;
    Ok((tree, (n - 1) as f64 * plan.edge_scale))
}

/// Result of the Brownian edge-scale calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Constant in `edge_scale = c / sqrt(n)`.
    pub c: f64,
    pub edge_scale: f64,
    /// Pilot mean height of a mass-uniform vertex, in units of `sqrt(n)` edges.
    pub mean_unit_height: f64,
    pub rel_stderr: f64,
    pub pilots: usize,
}

pub const CALIBRATION_MAX_REL_STDERR: f64 = 0.05;
pub const CALIBRATION_MIN_PILOTS: usize = 200;

/// Target mean height: the mean of the Rayleigh law, `sqrt(pi / 2)`.
pub fn rayleigh_mean() -> f64 {
    (std::f64::consts::PI / 2.0).sqrt()
}

/// Chooses `c` so the mean pilot height of a mass-uniform vertex, measured
/// with edges of length `1 / sqrt(n)`, becomes `sqrt(pi/2)` at scale `c / sqrt(n)`.
pub fn calibration_from_unit_heights(unit_heights: &[f64], n: usize) -> Result<Calibration> {
    if unit_heights.len() < 2 {
        return Err(Error::TooFewSamples {
            got: unit_heights.len(),
            need: 2,
        });
    }
    // Welford keeps the mean exact for constant input
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for (i, &h) in unit_heights.iter().enumerate() {
        let d = h - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (h - mean);
    }
    let k = unit_heights.len() as f64;
    let se = (m2 / (k - 1.0)).sqrt() / k.sqrt();
    let rel_stderr = se / mean;
    if !(mean > 0.0) || rel_stderr > CALIBRATION_MAX_REL_STDERR {
        return Err(Error::CalibrationUnstable {
            rel_stderr,
            limit: CALIBRATION_MAX_REL_STDERR,
        });
    }
    let c = rayleigh_mean() / mean;
    Ok(Calibration {
        c,
        edge_scale: c / (n as f64).sqrt(),
        mean_unit_height: mean,
        rel_stderr,
        pilots: unit_heights.len(),
    })
}

/// Mean depth over the non-root vertices, which is the exact mean height
/// of a mass-uniform vertex when every non-root vertex has the same mass.
pub fn mean_vertex_depth(raw: &RawTree) -> f64 {
    if raw.len() < 2 {
        return 0.0;
    }
    let mut depth = vec![0usize; raw.len()];
    let mut total = 0usize;
    for &v in &raw.preorder[1..] {
        let p = raw.parent[v].expect("non-root");
        depth[v] = depth[p] + 1;
        total += depth[v];
    }
    total as f64 / (raw.len() - 1) as f64
}

/// Pilot-based calibration of the Brownian edge scale for a finite-variance law.
pub fn calibrate_edge_scale<R: Rng>(
    law: &dyn OffspringDistribution,
    n: usize,
    pilot_reps: usize,
    rng: &mut R,
) -> Result<Calibration> {
    if law.variance().is_none() {
        return Err(Error::Unsupported(format!(
            "calibration needs a finite-variance law, got {}",
            law.name()
        )));
    }
    if pilot_reps < CALIBRATION_MIN_PILOTS {
        return Err(Error::Domain(format!(
            "need at least {CALIBRATION_MIN_PILOTS} pilot trees, got {pilot_reps}"
        )));
    }
    if n < 2 {
        return Err(Error::Domain(format!("calibration needs n >= 2, got {n}")));
    }
    let root_n = (n as f64).sqrt();
    let heights = (0..pilot_reps)
        .map(|_| sample_conditioned_tree(law, n, rng).map(|raw| mean_vertex_depth(&raw) / root_n))
        .collect::<Result<Vec<_>>>()?;
    calibration_from_unit_heights(&heights, n)
}
