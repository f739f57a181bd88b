//! Branching mechanisms `psi(l) = alpha*l + beta*l^2 + int (e^{-lr} - 1 + lr) pi(dr)`
//! and the analytic quantities built on them.
//!
//! Three Levy-measure families are supported: none (pure quadratic), a
//! stable density `pi(dr) ~ r^{-1-gamma} dr` given through the closed form
//! `c0 * l^gamma`, and finitely many atoms. The quadratic `gamma = 2` case
//! is carried by `beta` alone so it is never counted twice.

mod numeric;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use numeric::{adaptive_simpson, monotone_root};

/// Levy measure part of a branching mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevySpec {
    None,
    Stable {
        c0: f64,
        gamma: f64,
    },
    /// `(r_k, mass_k)` pairs.
    Atoms(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMechanism", into = "RawMechanism")]
pub struct BranchingMechanism {
    alpha: f64,
    beta: f64,
    levy: LevySpec,
}

#[derive(Serialize, Deserialize)]
struct RawMechanism {
    alpha: f64,
    beta: f64,
    levy: LevySpec,
}

impl TryFrom<RawMechanism> for BranchingMechanism {
    type Error = Error;
    fn try_from(raw: RawMechanism) -> Result<Self> {
        BranchingMechanism::new(raw.alpha, raw.beta, raw.levy)
    }
}

impl From<BranchingMechanism> for RawMechanism {
    fn from(m: BranchingMechanism) -> Self {
        RawMechanism {
            alpha: m.alpha,
            beta: m.beta,
            levy: m.levy,
        }
    }
}

/// Anything that evaluates a branching mechanism and its first two
/// derivatives. Implemented by [`BranchingMechanism`] and by the shifted
/// mechanism of the pruned tree.
pub trait Psi {
    fn psi(&self, lambda: f64) -> Result<f64>;
    fn psi_derivatives(&self, lambda: f64) -> Result<(f64, f64)>;
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// `e^{-x} - 1 + x` without cancellation for small `x`.
fn compensated_exp(x: f64) -> f64 {
    if x < 1e-2 {
        let x2 = x * x;
        x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0 + x2 * x2 / 720.0)
    } else {
        (-x).exp_m1() + x
    }
}

impl BranchingMechanism {
    pub fn new(alpha: f64, beta: f64, levy: LevySpec) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::validation(
                None,
                format!("alpha must be >= 0, got {alpha}"),
            ));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::validation(
                None,
                format!("beta must be >= 0, got {beta}"),
            ));
        }
        match &levy {
            LevySpec::None => {
                if beta <= 0.0 {
                    return Err(Error::validation(
                        None,
                        "beta must be > 0 when there is no Levy measure",
                    ));
                }
            }
            LevySpec::Stable { c0, gamma } => {
                if !(*c0 > 0.0 && c0.is_finite()) {
                    return Err(Error::validation(
                        None,
                        format!("stable c0 must be > 0, got {c0}"),
                    ));
                }
                if !(*gamma > 1.0 && *gamma < 2.0) {
                    return Err(Error::validation(
                        None,
                        format!(
                            "stable gamma must lie in (1, 2), got {gamma}; use beta for gamma = 2"
                        ),
                    ));
                }
            }
            LevySpec::Atoms(atoms) => {
                for (k, [r, m]) in atoms.iter().enumerate() {
                    if !(*r > 0.0 && r.is_finite() && *m > 0.0 && m.is_finite()) {
                        return Err(Error::validation(
                            k,
                            format!("atom ({r}, {m}) must have positive finite location and mass"),
                        ));
                    }
                }
            }
        }
        Ok(BranchingMechanism { alpha, beta, levy })
    }

    /// `psi(l) = beta * l^2`.
    pub fn quadratic(beta: f64) -> Result<Self> {
        Self::new(0.0, beta, LevySpec::None)
    }

    /// `psi(l) = l^2 / 2`, the mechanism of the Brownian tree.
    pub fn brownian() -> Self {
        Self::quadratic(0.5).expect("valid")
    }

    /// `psi(l) = c0 * l^gamma` for `gamma` in `(1, 2)`; `gamma = 2` folds into `beta`.
    pub fn stable(c0: f64, gamma: f64) -> Result<Self> {
        if gamma == 2.0 {
            return Self::quadratic(c0);
        }
        Self::new(0.0, 0.0, LevySpec::Stable { c0, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn levy(&self) -> &LevySpec {
        &self.levy
    }

    pub fn is_brownian(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.5 && self.levy == LevySpec::None
    }

    /// `(gamma, c0)` when the mechanism is exactly `c0 * l^gamma`, `gamma` in `(1, 2]`.
    pub fn stable_index(&self) -> Option<(f64, f64)> {
        match self.levy {
            LevySpec::None if self.alpha == 0.0 => Some((2.0, self.beta)),
            LevySpec::Stable { c0, gamma } if self.alpha == 0.0 && self.beta == 0.0 => {
                Some((gamma, c0))
            }
            _ => None,
        }
    }

    /// Whether `int^inf dl / psi(l)` converges.
    ///
    /// Quadratic and stable parts grow faster than linearly, so the integral
    /// converges. With only finitely many atoms and `beta = 0` the mechanism
    /// grows linearly (`psi(l) ~ (alpha + sum m r) l`) and the integral
    /// diverges; `beta > 0` restores convergence through `1/(beta l^2)`.
    pub fn check_grey(&self) -> bool {
        match self.levy {
            LevySpec::None | LevySpec::Stable { .. } => true,
            LevySpec::Atoms(_) => self.beta > 0.0,
        }
    }

    fn levy_psi(&self, lambda: f64) -> f64 {
        match &self.levy {
            LevySpec::None => 0.0,
            LevySpec::Stable { c0, gamma } => c0 * lambda.powf(*gamma),
            LevySpec::Atoms(atoms) => atoms
                .iter()
                .map(|[r, m]| m * compensated_exp(lambda * r))
                .sum(),
        }
    }

    /// The part of `psi` that dominates at infinity and admits a closed-form
    /// tail integral `int_L^inf dl / lead(l)`.
    fn leading_term(&self, lambda: f64) -> (f64, f64) {
        if self.beta > 0.0 {
            (self.beta * lambda * lambda, 1.0 / (self.beta * lambda))
        } else if let LevySpec::Stable { c0, gamma } = self.levy {
            (
                c0 * lambda.powf(gamma),
                lambda.powf(1.0 - gamma) / (c0 * (gamma - 1.0)),
            )
        } else {
            (f64::NAN, f64::INFINITY)
        }
    }

    /// `psi_q(l) = psi(l + q) - psi(q)`, the mechanism of the tree pruned at rate `q`.
    pub fn shift(&self, q: f64) -> Result<ShiftedMechanism<'_>> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("shift q must be > 0, got {q}")));
        }
        Ok(ShiftedMechanism {
            base: self,
            q,
            psi_q: self.psi(q)?,
        })
    }
}

impl Psi for BranchingMechanism {
    fn psi(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(self.alpha * lambda + self.beta * lambda * lambda + self.levy_psi(lambda))
    }

    fn psi_derivatives(&self, lambda: f64) -> Result<(f64, f64)> {
        check_lambda(lambda)?;
        let mut d1 = self.alpha + 2.0 * self.beta * lambda;
        let mut d2 = 2.0 * self.beta;
        match &self.levy {
            LevySpec::None => {}
            LevySpec::Stable { c0, gamma } => {
                if lambda == 0.0 {
                    return Err(Error::Singularity(format!(
                        "psi'' of a stable mechanism with gamma = {gamma} blows up at 0"
                    )));
                }
                d1 += gamma * c0 * lambda.powf(gamma - 1.0);
                d2 += gamma * (gamma - 1.0) * c0 * lambda.powf(gamma - 2.0);
            }
            LevySpec::Atoms(atoms) => {
                for [r, m] in atoms {
                    d1 -= m * r * (-lambda * r).exp_m1();
                    d2 += m * r * r * (-lambda * r).exp();
                }
            }
        }
        Ok((d1, d2))
    }
}

/// Evaluator for `psi_q`. Borrows the base mechanism.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedMechanism<'a> {
    base: &'a BranchingMechanism,
    q: f64,
    psi_q: f64,
}

impl ShiftedMechanism<'_> {
    pub fn q(&self) -> f64 {
        self.q
    }
}

impl Psi for ShiftedMechanism<'_> {
    fn psi(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(self.base.psi(lambda + self.q)? - self.psi_q)
    }

    fn psi_derivatives(&self, lambda: f64) -> Result<(f64, f64)> {
        check_lambda(lambda)?;
        self.base.psi_derivatives(lambda + self.q)
    }
}

/// A mechanism together with the numerical tolerances used by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismAnalytics {
    mech: BranchingMechanism,
    tol_root: f64,
    tol_quad: f64,
}

pub const DEFAULT_TOL_ROOT: f64 = 1e-12;
pub const DEFAULT_TOL_QUAD: f64 = 1e-12;

impl MechanismAnalytics {
    pub fn new(mech: BranchingMechanism, tol_root: f64, tol_quad: f64) -> Result<Self> {
        for (name, t) in [("tol_root", tol_root), ("tol_quad", tol_quad)] {
            if !(t > 0.0 && t <= 1e-4) {
                return Err(Error::validation(
                    None,
                    format!("{name} must lie in (0, 1e-4], got {t}"),
                ));
            }
        }
        Ok(MechanismAnalytics {
            mech,
            tol_root,
            tol_quad,
        })
    }

    pub fn with_defaults(mech: BranchingMechanism) -> Self {
        Self::new(mech, DEFAULT_TOL_ROOT, DEFAULT_TOL_QUAD).expect("default tolerances are valid")
    }

    pub fn mechanism(&self) -> &BranchingMechanism {
        &self.mech
    }

    /// `int_v^inf dl / psi(l)`.
    pub fn tail_integral(&self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("tail integral needs v > 0, got {v}")));
        }
        if !self.mech.check_grey() {
            return Err(Error::Unsupported(
                "Grey condition fails; tail integral diverges".into(),
            ));
        }
        let m = &self.mech;
        match m.levy {
            LevySpec::None if m.alpha == 0.0 => return Ok(1.0 / (m.beta * v)),
            LevySpec::None => return Ok((m.alpha / (m.beta * v)).ln_1p() / m.alpha),
            LevySpec::Stable { c0, gamma } if m.alpha == 0.0 && m.beta == 0.0 => {
                return Ok(v.powf(1.0 - gamma) / (c0 * (gamma - 1.0)))
            }
            _ => {}
        }
        self.numeric_tail_integral(v)
    }

    /// Quadrature in `s = ln(l / v)` up to a cutoff `L = v e^S`, plus the
    /// closed-form tail of the leading term beyond `L`. `S` grows until the
    /// leading-term approximation error of the remaining tail is below a
    /// hundredth of `tol_quad`.
    fn numeric_tail_integral(&self, v: f64) -> Result<f64> {
        let m = &self.mech;
        let mut s_max = 1.0f64;
        let remainder = loop {
            let cutoff = v * s_max.exp();
            let psi = m.psi(cutoff)?;
            let (lead, lead_tail) = m.leading_term(cutoff);
            let rel = ((psi - lead) / lead).abs();
            if rel * lead_tail <= 1e-2 * self.tol_quad || cutoff > 1e300 || s_max > 690.0 {
                // psi >= lead, so 1/psi ~ (1/lead) (1 - rel)
                break lead_tail * (1.0 - rel);
            }
            s_max += 1.0;
        };
        let integrand = |s: f64| -> Result<f64> {
            let lambda = v * s.exp();
            Ok(lambda / m.psi(lambda)?)
        };
        let pieces = s_max.ceil() as usize;
        let step = s_max / pieces as f64;
        let per_piece = self.tol_quad / pieces as f64;
        let mut total = remainder;
        for k in 0..pieces {
            let a = k as f64 * step;
            total += adaptive_simpson(&integrand, a, a + step, per_piece)?;
        }
        Ok(total)
    }

    /// The unique `v(a) > 0` with `int_{v(a)}^inf dl / psi(l) = a`.
    pub fn solve_v(&self, a: f64) -> Result<f64> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("solve_v needs a > 0, got {a}")));
        }
        if !self.mech.check_grey() {
            return Err(Error::Unsupported(
                "Grey condition fails; v(a) is undefined".into(),
            ));
        }
        let m = &self.mech;
        match m.levy {
            LevySpec::None if m.alpha == 0.0 => return Ok(1.0 / (m.beta * a)),
            LevySpec::None => return Ok(m.alpha / (m.beta * (m.alpha * a).exp_m1())),
            LevySpec::Stable { c0, gamma } if m.alpha == 0.0 && m.beta == 0.0 => {
                return Ok((c0 * (gamma - 1.0) * a).powf(-1.0 / (gamma - 1.0)))
            }
            _ => {}
        }
        monotone_root(
            |v| self.tail_integral(v),
            a,
            self.tol_root,
            1.0,
            self.tol_root * a,
        )
    }

    /// Inverse of `psi` on `[0, inf)`.
    pub fn psi_inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0 && y.is_finite()) {
            return Err(Error::Domain(format!("psi_inverse needs y >= 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let m = &self.mech;
        match m.levy {
            LevySpec::None => {
                // root of beta l^2 + alpha l - y, written without cancellation
                let disc = (m.alpha * m.alpha + 4.0 * m.beta * y).sqrt();
                Ok(2.0 * y / (m.alpha + disc))
            }
            LevySpec::Stable { c0, gamma } if m.alpha == 0.0 && m.beta == 0.0 => {
                Ok((y / c0).powf(1.0 / gamma))
            }
            _ => monotone_root(
                |l| m.psi(l),
                y,
                self.tol_root,
                1.0,
                self.tol_root * y.max(1.0),
            ),
        }
    }

    /// `g(l) = psi'(0) + N[1 - e^{-l sigma}] = psi'(psi^{-1}(l))`, the
    /// intensity of the spine decomposition with a null test function.
    pub fn g_eval(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("g needs lambda > 0, got {lambda}")));
        }
        let q = self.psi_inverse(lambda)?;
        Ok(self.mech.psi_derivatives(q)?.0)
    }

    /// `N[sigma e^{-l sigma - rho H}] = int_0^inf e^{-rho a - a g(l)} da = 1 / (rho + g(l))`.
    pub fn bismut_laplace(&self, lambda: f64, rho: f64) -> Result<f64> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("rho must be >= 0, got {rho}")));
        }
        Ok(1.0 / (rho + self.g_eval(lambda)?))
    }

    /// First two moments of the pruned mass: `N[sigma_q] = 1/psi'(q)` and
    /// `N[sigma_q^2] = psi''(q)/psi'(q)^3`.
    pub fn pruned_mass_moments(&self, q: f64) -> Result<(f64, f64)> {
        if !(q > 0.0) {
            return Err(Error::Domain(format!("q must be > 0, got {q}")));
        }
        let (d1, d2) = self.mech.psi_derivatives(q)?;
        Ok((1.0 / d1, d2 / (d1 * d1 * d1)))
    }
}

/// `N[sigma > eps] = sqrt(2 / (pi eps))` for `psi(l) = l^2/2`, where the
/// total mass has the one-sided stable-1/2 Levy density `s^{-3/2} / sqrt(2 pi)`.
pub fn brownian_canonical_tail(mech: &BranchingMechanism, epsilon: f64) -> Result<f64> {
    brownian_only(mech)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok((2.0 / (std::f64::consts::PI * epsilon)).sqrt())
}

/// `N[sigma 1{sigma <= eps}] = sqrt(2 eps / pi)` for `psi(l) = l^2/2`.
pub fn brownian_small_mass_mean(mech: &BranchingMechanism, epsilon: f64) -> Result<f64> {
    brownian_only(mech)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok((2.0 * epsilon / std::f64::consts::PI).sqrt())
}

fn brownian_only(mech: &BranchingMechanism) -> Result<()> {
    if !mech.is_brownian() {
        return Err(Error::Unsupported(
            "closed-form mass tail is only available for psi(l) = l^2/2".into(),
        ));
    }
    Ok(())
}

/// `E[Z^n] = Gamma(a) Gamma(n+1) / (c0^{n/gamma} gamma^n Gamma(a(n+1)))` with
/// `a = (gamma - 1)/gamma`: moments of the height of a mass-uniform leaf in
/// the stable tree normalized to unit mass.
pub fn z_moment(gamma: f64, c0: f64, n: u32) -> Result<f64> {
    if !(gamma > 1.0 && gamma <= 2.0) {
        return Err(Error::Domain(format!(
            "gamma must lie in (1, 2], got {gamma}"
        )));
    }
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::Domain(format!("c0 must be > 0, got {c0}")));
    }
    if n == 0 {
        return Err(Error::Domain("moment order must be >= 1".into()));
    }
    let a = (gamma - 1.0) / gamma;
    let nf = f64::from(n);
    let log = libm::lgamma(a) + libm::lgamma(nf + 1.0)
        - (nf / gamma) * c0.ln()
        - nf * gamma.ln()
        - libm::lgamma(a * (nf + 1.0));
    Ok(log.exp())
}

#[cfg(test)]
mod tests;
