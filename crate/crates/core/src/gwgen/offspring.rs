//! Critical offspring distributions.

use std::fmt::Debug;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STABLE_TRUNCATION: usize = 1_000_000;

/// A critical (mean one) offspring law that can be sampled through a
/// type-erased RNG.
pub trait OffspringDistribution: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn pmf(&self, k: usize) -> f64;
    fn sample(&self, rng: &mut dyn RngCore) -> usize;
    fn mean(&self) -> f64;
    /// `None` when the variance is infinite in the limit law.
    fn variance(&self) -> Option<f64>;
}

/// Config-level description of an offspring law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OffspringLaw {
    /// Poisson with mean 1.
    Poisson,
    /// `P(k) = 2^{-(k+1)}`, success probability 1/2.
    Geometric,
    /// `p_k ~ k^{-1-gamma}` for `2 <= k <= n_max`, `p_1 = 0`, `p_0` set by criticality.
    StableTail {
        gamma: f64,
        #[serde(default = "default_truncation")]
        n_max: usize,
    },
}

fn default_truncation() -> usize {
    DEFAULT_STABLE_TRUNCATION
}

impl OffspringLaw {
    pub fn build(&self) -> Result<Box<dyn OffspringDistribution>> {
        Ok(match *self {
            OffspringLaw::Poisson => Box::new(PoissonOne::new()),
            OffspringLaw::Geometric => Box::new(GeometricHalf),
            OffspringLaw::StableTail { gamma, n_max } => Box::new(StableTail::new(gamma, n_max)?),
        })
    }

    pub fn is_finite_variance(&self) -> bool {
        !matches!(self, OffspringLaw::StableTail { .. })
    }
}

const POISSON_TABLE: usize = 24;

#[derive(Debug, Clone)]
pub struct PoissonOne {
    pmf: [f64; POISSON_TABLE],
    cdf: [f64; POISSON_TABLE],
}

impl PoissonOne {
    pub fn new() -> Self {
        let mut pmf = [0.0; POISSON_TABLE];
        let mut cdf = [0.0; POISSON_TABLE];
        let mut p = (-1.0f64).exp();
        let mut acc = 0.0;
        for k in 0..POISSON_TABLE {
            if k > 0 {
                p /= k as f64;
            }
            pmf[k] = p;
            acc += p;
            cdf[k] = acc;
        }
        PoissonOne { pmf, cdf }
    }
}

impl Default for PoissonOne {
    fn default() -> Self {
        Self::new()
    }
}

impl OffspringDistribution for PoissonOne {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn pmf(&self, k: usize) -> f64 {
        if k < POISSON_TABLE {
            self.pmf[k]
        } else {
            (-1.0 - libm::lgamma(k as f64 + 1.0)).exp()
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        let u: f64 = rng.random();
        // P(k >= 24) ~ 1e-24, below the resolution of u
        self.cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(POISSON_TABLE - 1)
    }

    fn mean(&self) -> f64 {
        1.0
    }

    fn variance(&self) -> Option<f64> {
        Some(1.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GeometricHalf;

impl OffspringDistribution for GeometricHalf {
    fn name(&self) -> &'static str {
        "geometric"
    }

    fn pmf(&self, k: usize) -> f64 {
        0.5f64.powi(k as i32 + 1)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        // each trailing one is a failure of a fair coin
        rng.next_u64().trailing_ones() as usize
    }

    fn mean(&self) -> f64 {
        1.0
    }

    fn variance(&self) -> Option<f64> {
        Some(2.0)
    }
}

/// Truncated power law in the domain of attraction of a `gamma`-stable law.
#[derive(Debug, Clone)]
pub struct StableTail {
    gamma: f64,
    n_max: usize,
    scale: f64,
    p0: f64,
    /// `cdf[0] = p_0`, `cdf[j] = P(X <= j + 1)` for `j >= 1`
    cdf: Vec<f64>,
}

impl StableTail {
    pub fn new(gamma: f64, n_max: usize) -> Result<Self> {
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(Error::validation(
                None,
                format!("stable_tail gamma must lie in (1, 2), got {gamma}"),
            ));
        }
        if n_max < 2 {
            return Err(Error::validation(
                None,
                format!("stable_tail n_max must be >= 2, got {n_max}"),
            ));
        }
        // sum from the small terms up for accuracy
        let mean_sum: f64 = (2..=n_max).rev().map(|k| (k as f64).powf(-gamma)).sum();
        let scale = 1.0 / mean_sum;
        let mass_sum: f64 = (2..=n_max)
            .rev()
            .map(|k| (k as f64).powf(-1.0 - gamma))
            .sum();
        let p0 = 1.0 - scale * mass_sum;
        let mut cdf = Vec::with_capacity(n_max);
        let mut acc = p0;
        cdf.push(acc);
        for k in 2..=n_max {
            acc += scale * (k as f64).powf(-1.0 - gamma);
            cdf.push(acc);
        }
        Ok(StableTail {
            gamma,
            n_max,
            scale,
            p0,
            cdf,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl OffspringDistribution for StableTail {
    fn name(&self) -> &'static str {
        "stable_tail"
    }

    fn pmf(&self, k: usize) -> f64 {
        match k {
            0 => self.p0,
            1 => 0.0,
            k if k <= self.n_max => self.scale * (k as f64).powf(-1.0 - self.gamma),
            _ => 0.0,
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        let u: f64 = rng.random();
        let j = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1);
        if j == 0 {
            0
        } else {
            j + 1
        }
    }

    fn mean(&self) -> f64 {
        (2..=self.n_max).rev().map(|k| k as f64 * self.pmf(k)).sum()
    }

    fn variance(&self) -> Option<f64> {
        None
    }
}
