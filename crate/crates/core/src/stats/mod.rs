//! Empirical distributions, Kolmogorov-Smirnov tests, jackknifed moments
//! and the point-measure identity used for the pruning-time law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KS_MIN_SAMPLES: usize = 50;
const KOLMOGOROV_TERMS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub master_seed: u64,
    pub replica_start: u64,
    pub replica_end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    values: Vec<f64>,
    label: String,
    seed_info: Option<SeedInfo>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::validation(None, "sample label must be nonempty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                i,
                format!("sample value {} is not finite", values[i]),
            ));
        }
        Ok(SampleSet {
            values,
            label,
            seed_info: None,
        })
    }

    pub fn with_seed_info(mut self, info: SeedInfo) -> Self {
        self.seed_info = Some(info);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed_info(&self) -> Option<SeedInfo> {
        self.seed_info
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub test: String,
    #[serde(rename = "D")]
    pub d: f64,
    pub n: usize,
    /// Second sample size; absent for the one-sample test.
    pub m: Option<usize>,
    pub p_approx: f64,
    pub pass: bool,
    pub alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn check_size(s: &SampleSet) -> Result<()> {
    if s.len() < KS_MIN_SAMPLES {
        Err(Error::TooFewSamples {
            got: s.len(),
            need: KS_MIN_SAMPLES,
        })
    } else {
        Ok(())
    }
}

/// Asymptotic `P(sup |B_t| > lambda)` for a Brownian bridge. The alternating
/// series is used for `lambda >= 1`, the theta-transformed one below.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    let q = if lambda >= 1.0 {
        let mut s = 0.0;
        for k in (1..=KOLMOGOROV_TERMS).rev() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        }
        2.0 * s
    } else {
        let pi2 = std::f64::consts::PI.powi(2);
        let mut s = 0.0;
        for k in (1..=KOLMOGOROV_TERMS).rev() {
            let j = (2 * k - 1) as f64;
            s += (-j * j * pi2 / (8.0 * lambda * lambda)).exp();
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    };
    q.clamp(0.0, 1.0)
}

pub fn ks_statistic_one_sample(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

pub fn ks_statistic_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

pub fn ks_one_sample(
    samples: &SampleSet,
    cdf: impl Fn(f64) -> f64,
    alpha: f64,
) -> Result<KsReport> {
    check_alpha(alpha)?;
    check_size(samples)?;
    let d = ks_statistic_one_sample(&samples.sorted(), cdf);
    let n = samples.len();
    let p = kolmogorov_q((n as f64).sqrt() * d);
    Ok(KsReport {
        test: "ks_one_sample".into(),
        d,
        n,
        m: None,
        p_approx: p,
        pass: p >= alpha,
        alpha,
    })
}

pub fn ks_two_sample(a: &SampleSet, b: &SampleSet, alpha: f64) -> Result<KsReport> {
    check_alpha(alpha)?;
    check_size(a)?;
    check_size(b)?;
    let d = ks_statistic_two_sample(&a.sorted(), &b.sorted());
    let (n, m) = (a.len(), b.len());
    let ne = (n * m) as f64 / (n + m) as f64;
    let p = kolmogorov_q(ne.sqrt() * d);
    Ok(KsReport {
        test: "ks_two_sample".into(),
        d,
        n,
        m: Some(m),
        p_approx: p,
        pass: p >= alpha,
        alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: u32,
    pub mean: f64,
    pub stderr: f64,
}

/// Plug-in `E[X^k]` with jackknife standard errors.
pub fn moments(samples: &SampleSet, orders: &[u32]) -> Result<Vec<MomentEstimate>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples { got: n, need: 2 });
    }
    Ok(orders
        .iter()
        .map(|&k| {
            let powers: Vec<f64> = samples.values.iter().map(|x| x.powi(k as i32)).collect();
            let total: f64 = powers.iter().sum();
            let mean = total / n as f64;
            // leave-one-out means, and their spread
            let loo: Vec<f64> = powers
                .iter()
                .map(|p| (total - p) / (n - 1) as f64)
                .collect();
            let loo_mean = loo.iter().sum::<f64>() / n as f64;
            let ss: f64 = loo.iter().map(|l| (l - loo_mean).powi(2)).sum();
            let stderr = if powers.iter().all(|&p| p == powers[0]) {
                0.0
            } else {
                ((n - 1) as f64 / n as f64 * ss).sqrt()
            };
            MomentEstimate {
                order: k,
                mean,
                stderr,
            }
        })
        .collect())
}

/// Both sides of
/// `1 - exp(-sum_{r_j >= r} x_j) = sum_{r_j >= r} (1 - e^{-x_j}) exp(-sum_{r_l > r_j} x_l)`.
pub fn lemma41_check(atoms: &[(f64, f64)], r: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("cut level must be >= 0, got {r}")));
    }
    if let Some(i) = atoms
        .iter()
        .position(|&(rj, xj)| !(rj >= 0.0 && xj >= 0.0 && rj.is_finite() && xj.is_finite()))
    {
        return Err(Error::validation(
            i,
            format!("atom {:?} must have finite non-negative entries", atoms[i]),
        ));
    }
    let mut kept: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.0 >= r).collect();
    kept.sort_by(|a, b| b.0.total_cmp(&a.0));
    let total: f64 = kept.iter().map(|a| a.1).sum();
    let lhs = -(-total).exp_m1();
    let (mut above, mut rhs, mut i) = (0.0f64, 0.0, 0);
    while i < kept.len() {
        let level = kept[i].0;
        let mut group = 0.0;
        while i < kept.len() && kept[i].0 == level {
            rhs += -(-kept[i].1).exp_m1() * (-above).exp();
            group += kept[i].1;
            i += 1;
        }
        above += group;
    }
    Ok((lhs, rhs))
}

/// Right-continuous empirical distribution function of a sorted sample.
pub fn ecdf(sorted: &[f64], x: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

pub fn rayleigh_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x * x / 2.0).exp_m1()
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    })
}
