//! Random diffusion coefficients on the unit square.
//!
//! Two models share one family of fluctuations psi_j and a constant mean:
//!
//!   periodic:  a(x, y) = abar + (1/sqrt(6)) sum_j sin(2 pi y_j) psi_j(x)
//!   affine:    a(x, y) = abar + sum_j y_j psi_j(x)
//!
//! with y_j uniform on [-1/2, 1/2]. The transforms are matched so both
//! models have the same mean and covariance; higher moments differ.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special::riemann_zeta;
use crate::weights::{DecaySequence, PowerTail};

/// 1/sqrt(6): the periodic transform scale.
pub const PERIODIC_SCALE: f64 = 0.40824829046386301636621401245098;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldModel {
    Periodic,
    Affine,
}

/// A single explicitly given fluctuation function with its sup-norm.
#[derive(Clone)]
pub struct ExplicitPsi {
    pub func: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub sup_norm: f64,
}

impl std::fmt::Debug for ExplicitPsi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExplicitPsi")
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

/// Fluctuation family.
#[derive(Debug, Clone)]
pub enum Fluctuation {
    /// psi_j(x) = c j^-beta sin(j pi x_1) sin(j pi x_2); sup-norm c j^-beta.
    Sine2d { c: f64, beta: f64 },
    /// Explicit list with declared sup-norms.
    Explicit(Vec<ExplicitPsi>),
}

/// A truncated random-field specification.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub mean: f64,
    pub fluct: Fluctuation,
    pub s: usize,
    pub model: FieldModel,
}

impl FieldSpec {
    pub fn sine2d(mean: f64, c: f64, beta: f64, s: usize, model: FieldModel) -> Result<Self> {
        if mean <= 0.0 || c < 0.0 || beta <= 1.0 {
            return Err(Error::Validation(format!(
                "field spec: need mean > 0, c >= 0, beta > 1 (got {mean}, {c}, {beta})"
            )));
        }
        Ok(FieldSpec {
            mean,
            fluct: Fluctuation::Sine2d { c, beta },
            s,
            model,
        })
    }

    pub fn explicit(mean: f64, psis: Vec<ExplicitPsi>, model: FieldModel) -> Result<Self> {
        if mean <= 0.0 {
            return Err(Error::Validation("field spec: mean must be positive".into()));
        }
        if psis.iter().any(|p| !(p.sup_norm >= 0.0)) {
            return Err(Error::Validation("field spec: sup norms must be >= 0".into()));
        }
        let s = psis.len();
        Ok(FieldSpec {
            mean,
            fluct: Fluctuation::Explicit(psis),
            s,
            model,
        })
    }

    /// psi_j(x) for 1-based j <= s.
    pub fn psi(&self, j: usize, x: (f64, f64)) -> f64 {
        debug_assert!(j >= 1 && j <= self.s);
        match &self.fluct {
            Fluctuation::Sine2d { c, beta } => {
                let jf = j as f64;
                c * jf.powf(-beta)
                    * (jf * std::f64::consts::PI * x.0).sin()
                    * (jf * std::f64::consts::PI * x.1).sin()
            }
            Fluctuation::Explicit(list) => (list[j - 1].func)(x.0, x.1),
        }
    }

    /// Sup-norm of psi_j.
    pub fn psi_sup_norm(&self, j: usize) -> f64 {
        match &self.fluct {
            Fluctuation::Sine2d { c, beta } => c * (j as f64).powf(-beta),
            Fluctuation::Explicit(list) => list[j - 1].sup_norm,
        }
    }

    /// Sum of all fluctuation sup-norms. For the sine family this is the
    /// full series c zeta(beta) (not the truncation), so the resulting
    /// ellipticity bounds are valid for every truncation dimension.
    pub fn sup_norm_series(&self) -> Result<f64> {
        match &self.fluct {
            Fluctuation::Sine2d { c, beta } => Ok(c * riemann_zeta(*beta)?),
            Fluctuation::Explicit(list) => Ok(list.iter().map(|p| p.sup_norm).sum()),
        }
    }

    fn transform_scale(&self) -> f64 {
        match self.model {
            FieldModel::Periodic => PERIODIC_SCALE,
            FieldModel::Affine => 0.5,
        }
    }

    /// Coefficient value at x for parameter vector y (length >= s is not
    /// required; y beyond its length is treated as zero).
    ///
    /// The periodic model is 1-periodic in every y_j and accepts any
    /// finite y_j (folded into [-1/2, 1/2) exactly); the affine model
    /// requires y_j in [-1/2, 1/2].
    pub fn eval(&self, x: (f64, f64), y: &[f64]) -> Result<f64> {
        if !(0.0..=1.0).contains(&x.0) || !(0.0..=1.0).contains(&x.1) {
            return Err(Error::Domain(format!(
                "field eval: x = ({}, {}) outside the unit square",
                x.0, x.1
            )));
        }
        let mut acc = self.mean;
        match self.model {
            FieldModel::Periodic => {
                for j in 1..=self.s.min(y.len()) {
                    let yj = y[j - 1];
                    if !yj.is_finite() {
                        return Err(Error::Domain(format!("field eval: y_{j} not finite")));
                    }
                    let folded = yj - (yj + 0.5).floor();
                    acc += PERIODIC_SCALE
                        * (2.0 * std::f64::consts::PI * folded).sin()
                        * self.psi(j, x);
                }
            }
            FieldModel::Affine => {
                for j in 1..=self.s.min(y.len()) {
                    let yj = y[j - 1];
                    if !(-0.5..=0.5).contains(&yj) {
                        return Err(Error::Domain(format!(
                            "field eval: y_{j} = {yj} outside [-1/2, 1/2]"
                        )));
                    }
                    acc += yj * self.psi(j, x);
                }
            }
        }
        Ok(acc)
    }

    /// Pointwise variance (1/12) sum_j psi_j(x)^2; identical for both
    /// models.
    pub fn variance(&self, x: (f64, f64)) -> f64 {
        let mut acc = 0.0;
        for j in 1..=self.s {
            let p = self.psi(j, x);
            acc += p * p;
        }
        acc / 12.0
    }

    /// Pointwise fourth central moment:
    /// q sum_j psi_j^4 + (1/24) sum_j sum_{k>j} psi_j^2 psi_k^2,
    /// with q = 1/96 for the periodic model and 1/80 for the affine one.
    pub fn kurtosis(&self, x: (f64, f64)) -> f64 {
        let diag_factor = match self.model {
            FieldModel::Periodic => 1.0 / 96.0,
            FieldModel::Affine => 1.0 / 80.0,
        };
        let sq: Vec<f64> = (1..=self.s)
            .map(|j| {
                let p = self.psi(j, x);
                p * p
            })
            .collect();
        let quart: f64 = sq.iter().map(|q| q * q).sum();
        let sum_sq: f64 = sq.iter().sum();
        // sum_{j<k} a_j a_k = ((sum a)^2 - sum a^2) / 2.
        let cross = (sum_sq * sum_sq - quart) / 2.0;
        diag_factor * quart + cross / 24.0
    }

    /// Uniform ellipticity bounds
    /// (mean - t * sum ||psi_j||, mean + t * sum ||psi_j||) with
    /// t = 1/sqrt(6) (periodic) or 1/2 (affine). Fails when the lower
    /// bound is not positive.
    pub fn ellipticity_bounds(&self) -> Result<(f64, f64)> {
        let total = self.sup_norm_series()?;
        let t = self.transform_scale();
        let a_min = self.mean - t * total;
        let a_max = self.mean + t * total;
        if a_min <= 0.0 {
            return Err(Error::Validation(format!(
                "field spec is not uniformly elliptic: a_min = {a_min}"
            )));
        }
        Ok((a_min, a_max))
    }

    /// The decay sequence b_j = (1/sqrt(6)) ||psi_j|| / a_min feeding the
    /// cubature weights, with summability exponent p.
    ///
    /// For the sine family any p > 1/beta is admissible; the default puts
    /// p at the midpoint of (1/beta, 1/(beta-1)), which makes the derived
    /// smoothness degree floor(1/p)+1 equal to beta. Pass `p_override`
    /// to use a different exponent.
    pub fn b_sequence(&self, p_override: Option<f64>) -> Result<DecaySequence> {
        let (a_min, _) = self.ellipticity_bounds()?;
        match &self.fluct {
            Fluctuation::Sine2d { c, beta } => {
                let p = match p_override {
                    Some(p) => p,
                    None => default_p_for_beta(*beta)?,
                };
                let scale = PERIODIC_SCALE * c / a_min;
                let b: Vec<f64> = (1..=self.s)
                    .map(|j| scale * (j as f64).powf(-beta))
                    .collect();
                DecaySequence::with_tail(b, p, Some(PowerTail { scale, beta: *beta }))
            }
            Fluctuation::Explicit(list) => {
                let p = p_override.unwrap_or(1.0);
                let b: Vec<f64> = list
                    .iter()
                    .map(|psi| PERIODIC_SCALE * psi.sup_norm / a_min)
                    .collect();
                DecaySequence::new(b, p)
            }
        }
    }
}

/// Midpoint of (1/beta, 1/(beta-1)), the p-range on which
/// floor(1/p) + 1 = beta, clamped to the admissible (0, 1].
pub fn default_p_for_beta(beta: f64) -> Result<f64> {
    if beta <= 1.0 {
        return Err(Error::Domain(format!(
            "default_p_for_beta: beta = {beta} must exceed 1"
        )));
    }
    let mid = 0.5 * (1.0 / beta + 1.0 / (beta - 1.0));
    Ok(mid.min(1.0))
}

/// One uniform draw from [-1/2, 1/2]^s. With a counter-based seeded
/// generator the stream depends only on the seed.
pub fn sample_parameters<R: Rng>(rng: &mut R, s: usize) -> Vec<f64> {
    (0..s).map(|_| rng.gen::<f64>() - 0.5).collect()
}
