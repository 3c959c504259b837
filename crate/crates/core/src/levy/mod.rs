//! Parametric exponential Lévy models: Black–Scholes, Variance Gamma, GMY
//! and CGMY.
//!
//! A [`LevyModel`] is the law of the log-price `X` under a physical measure,
//! given as a triplet `(b, c, ν)` with `b` relative to the truncation
//! `l(x) = x·1{|x|≤1}`.

mod measure;

pub use measure::{
    integrate_levy, truncation, Branch, IntegrandClass, JumpWeight, LevyDensity, QuadratureConfig,
    SingularityTransform, Triplet,
};

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(alias = "bs")]
    BlackScholes,
    #[serde(alias = "vg")]
    VarianceGamma,
    Gmy,
    Cgmy,
}

impl Family {
    /// Names of the free parameters in [`LevyModel::params`] order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::BlackScholes => &["b", "c"],
            Family::VarianceGamma => &["b", "C", "M", "N"],
            Family::Gmy => &["b", "C", "N"],
            Family::Cgmy => &["b", "C", "M", "N"],
        }
    }
}

/// Family-specific jump parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpParams {
    None,
    VarianceGamma { c: f64, m: f64, n: f64 },
    Gmy { c: f64, n: f64, alpha: f64 },
    Cgmy { c: f64, m: f64, n: f64, alpha: f64 },
}

/// An exponential Lévy model `S_t = exp(X_t)` with `X` a Lévy process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct LevyModel {
    /// `b`, drift relative to the truncation function.
    pub drift: f64,
    /// `c`, Gaussian variance rate.
    pub diffusion: f64,
    pub jumps: JumpParams,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")))
    }
}

fn below_two(v: f64) -> Result<()> {
    if v < 2.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must be < 2, got {v}")))
    }
}

impl LevyModel {
    pub fn new(drift: f64, diffusion: f64, jumps: JumpParams) -> Result<Self> {
        if !drift.is_finite() {
            return Err(Error::InvalidParameter(format!("b must be finite, got {drift}")));
        }
        nonnegative("c", diffusion)?;
        match jumps {
            JumpParams::None => positive("c (Black-Scholes)", diffusion)?,
            JumpParams::VarianceGamma { c, m, n } => {
                positive("C", c)?;
                nonnegative("M", m)?;
                nonnegative("N", n)?;
            }
            JumpParams::Gmy { c, n, alpha } => {
                positive("C", c)?;
                nonnegative("N", n)?;
                below_two(alpha)?;
            }
            JumpParams::Cgmy { c, m, n, alpha } => {
                positive("C", c)?;
                nonnegative("M", m)?;
                nonnegative("N", n)?;
                below_two(alpha)?;
            }
        }
        Ok(Self {
            drift,
            diffusion,
            jumps,
        })
    }

    pub fn black_scholes(drift: f64, diffusion: f64) -> Result<Self> {
        Self::new(drift, diffusion, JumpParams::None)
    }

    pub fn variance_gamma(drift: f64, diffusion: f64, c: f64, m: f64, n: f64) -> Result<Self> {
        Self::new(drift, diffusion, JumpParams::VarianceGamma { c, m, n })
    }

    pub fn gmy(drift: f64, diffusion: f64, c: f64, n: f64, alpha: f64) -> Result<Self> {
        Self::new(drift, diffusion, JumpParams::Gmy { c, n, alpha })
    }

    pub fn cgmy(drift: f64, diffusion: f64, c: f64, m: f64, n: f64, alpha: f64) -> Result<Self> {
        Self::new(drift, diffusion, JumpParams::Cgmy { c, m, n, alpha })
    }

    pub fn family(&self) -> Family {
        match self.jumps {
            JumpParams::None => Family::BlackScholes,
            JumpParams::VarianceGamma { .. } => Family::VarianceGamma,
            JumpParams::Gmy { .. } => Family::Gmy,
            JumpParams::Cgmy { .. } => Family::Cgmy,
        }
    }

    /// Stability index; 0 for Variance Gamma, `None` without jumps.
    pub fn alpha(&self) -> Option<f64> {
        match self.jumps {
            JumpParams::None => None,
            JumpParams::VarianceGamma { .. } => Some(0.0),
            JumpParams::Gmy { alpha, .. } | JumpParams::Cgmy { alpha, .. } => Some(alpha),
        }
    }

    pub fn density(&self) -> LevyDensity {
        let branch = |scale, decay, alpha| Branch {
            scale,
            decay,
            alpha,
        };
        match self.jumps {
            JumpParams::None => LevyDensity::ZERO,
            JumpParams::VarianceGamma { c, m, n } => LevyDensity {
                positive: Some(branch(c, n, 0.0)),
                negative: Some(branch(c, m, 0.0)),
            },
            JumpParams::Gmy { c, n, alpha } => LevyDensity {
                positive: Some(branch(c, n, alpha)),
                negative: None,
            },
            JumpParams::Cgmy { c, m, n, alpha } => LevyDensity {
                positive: Some(branch(c, n, alpha)),
                negative: Some(branch(c, m, alpha)),
            },
        }
    }

    pub fn triplet(&self) -> Triplet {
        Triplet::new(self.drift, self.diffusion, self.density())
    }

    /// Rebuilds a model from a triplet whose jump part is in branch form.
    pub fn from_triplet(t: &Triplet) -> Result<Self> {
        if t.weight != JumpWeight::Identity {
            return Err(Error::Unsupported(
                "triplet with a symbolic jump weight is outside the parametric families".into(),
            ));
        }
        let d = t.density;
        let jumps = match (d.positive, d.negative) {
            (None, None) => JumpParams::None,
            (Some(p), None) => JumpParams::Gmy {
                c: p.scale,
                n: p.decay,
                alpha: p.alpha,
            },
            (Some(p), Some(q)) if p.scale == q.scale && p.alpha == q.alpha => {
                if p.alpha == 0.0 {
                    JumpParams::VarianceGamma {
                        c: p.scale,
                        m: q.decay,
                        n: p.decay,
                    }
                } else {
                    JumpParams::Cgmy {
                        c: p.scale,
                        m: q.decay,
                        n: p.decay,
                        alpha: p.alpha,
                    }
                }
            }
            _ => {
                return Err(Error::Unsupported(
                    "jump density does not belong to a supported family".into(),
                ))
            }
        };
        Self::new(t.drift, t.diffusion, jumps)
    }

    /// Free parameters in the order of [`Family::param_names`].
    pub fn params(&self) -> Vec<f64> {
        match self.jumps {
            JumpParams::None => vec![self.drift, self.diffusion],
            JumpParams::VarianceGamma { c, m, n } => vec![self.drift, c, m, n],
            JumpParams::Gmy { c, n, .. } => vec![self.drift, c, n],
            JumpParams::Cgmy { c, m, n, .. } => vec![self.drift, c, m, n],
        }
    }

    /// Same family (and fixed quantities such as α) with new free parameters.
    pub fn with_params(&self, p: &[f64]) -> Result<Self> {
        let expected = self.family().param_names().len();
        if p.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} parameters, got {}",
                p.len()
            )));
        }
        match self.jumps {
            JumpParams::None => Self::black_scholes(p[0], p[1]),
            JumpParams::VarianceGamma { .. } => {
                Self::variance_gamma(p[0], self.diffusion, p[1], p[2], p[3])
            }
            JumpParams::Gmy { alpha, .. } => Self::gmy(p[0], self.diffusion, p[1], p[2], alpha),
            JumpParams::Cgmy { alpha, .. } => {
                Self::cgmy(p[0], self.diffusion, p[1], p[2], p[3], alpha)
            }
        }
    }

    /// `dν/dx` at `x ≠ 0`.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        if self.jumps == JumpParams::None {
            return Err(Error::NoJumpPart);
        }
        if x == 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("Lévy density undefined at x = {x}")));
        }
        let d = self.density();
        let supported = if x > 0.0 {
            d.positive.is_some()
        } else {
            d.negative.is_some()
        };
        if !supported {
            return Err(Error::Domain(format!(
                "x = {x} lies outside the support of the Lévy measure"
            )));
        }
        Ok(d.density(x))
    }

    /// `∫ f dν` for this model's Lévy measure.
    pub fn integrate<T, F>(&self, f: F, class: IntegrandClass, cfg: &QuadratureConfig) -> Result<T>
    where
        T: crate::quadrature::QuadValue,
        F: Fn(f64) -> T,
    {
        self.triplet().integrate(f, class, cfg)
    }

    pub fn characteristic_exponent(&self, u: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
        self.triplet().characteristic_exponent(u, cfg)
    }

    /// Open set of `λ` with `∫_{|x|>1} e^{λx} ν(dx) < ∞`.
    ///
    /// Endpoints are always excluded, even where the tail would allow them.
    pub fn exp_moment_domain(&self) -> Interval {
        self.density().exp_moment_domain()
    }

    /// Integrability and parameter-range diagnostics.
    pub fn validate(&self, cfg: &QuadratureConfig) -> Diagnostics {
        let mut messages = Vec::new();
        let parameters_ok = match Self::new(self.drift, self.diffusion, self.jumps) {
            Ok(_) => true,
            Err(e) => {
                messages.push(e.to_string());
                false
            }
        };
        let levy_integrable = match self.integrate(|x: f64| (x * x).min(1.0), IntegrandClass::Quadratic, cfg) {
            Ok(v) => v.is_finite(),
            Err(e) => {
                messages.push(format!("∫(x²∧1)dν: {e}"));
                false
            }
        };
        let special_semimartingale = self.density().positive.is_none()
            || self.exp_moment_domain().contains(1.0);
        if !special_semimartingale {
            messages.push("∫_{x>1} e^x ν(dx) = ∞ (requires N > 1): S is not special".into());
        }
        let monotone = self.diffusion == 0.0
            && !self.density().is_zero()
            && (self.density().positive.is_none() || self.density().negative.is_none());
        if monotone {
            messages.push(
                "one-sided jumps without a Gaussian part: no equivalent martingale measure in general"
                    .into(),
            );
        }
        Diagnostics {
            parameters_ok,
            levy_integrable,
            special_semimartingale,
            monotone_risk: monotone,
            messages,
        }
    }
}

/// Outcome of [`LevyModel::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub parameters_ok: bool,
    pub levy_integrable: bool,
    pub special_semimartingale: bool,
    /// One-sided jumps with `c = 0`: paths of one sign of variation only.
    pub monotone_risk: bool,
    pub messages: Vec<String>,
}

impl Diagnostics {
    pub fn all_pass(&self) -> bool {
        self.parameters_ok && self.levy_integrable && self.special_semimartingale
    }
}

/// Wire form: `{"family": "cgmy", "b": 0.0, "c": 0.0, "params": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelSpec {
    family: Family,
    b: f64,
    c: f64,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

impl TryFrom<ModelSpec> for LevyModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let get = |k: &str| {
            spec.params.get(k).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("{:?} model requires params.{k}", spec.family))
            })
        };
        let allowed: &[&str] = match spec.family {
            Family::BlackScholes => &[],
            Family::VarianceGamma => &["C", "M", "N"],
            Family::Gmy => &["C", "N", "alpha"],
            Family::Cgmy => &["C", "M", "N", "alpha"],
        };
        if let Some(extra) = spec.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!(
                "unexpected parameter {extra} for {:?}",
                spec.family
            )));
        }
        let jumps = match spec.family {
            Family::BlackScholes => JumpParams::None,
            Family::VarianceGamma => JumpParams::VarianceGamma {
                c: get("C")?,
                m: get("M")?,
                n: get("N")?,
            },
            Family::Gmy => JumpParams::Gmy {
                c: get("C")?,
                n: get("N")?,
                alpha: get("alpha")?,
            },
            Family::Cgmy => JumpParams::Cgmy {
                c: get("C")?,
                m: get("M")?,
                n: get("N")?,
                alpha: get("alpha")?,
            },
        };
        LevyModel::new(spec.b, spec.c, jumps)
    }
}

impl From<LevyModel> for ModelSpec {
    fn from(m: LevyModel) -> Self {
        let mut params = BTreeMap::new();
        let family = m.family();
        match m.jumps {
            JumpParams::None => {}
            JumpParams::VarianceGamma { c, m, n } => {
                params.insert("C".into(), c);
                params.insert("M".into(), m);
                params.insert("N".into(), n);
            }
            JumpParams::Gmy { c, n, alpha } => {
                params.insert("C".into(), c);
                params.insert("N".into(), n);
                params.insert("alpha".into(), alpha);
            }
            JumpParams::Cgmy { c, m, n, alpha } => {
                params.insert("C".into(), c);
                params.insert("M".into(), m);
                params.insert("N".into(), n);
                params.insert("alpha".into(), alpha);
            }
        }
        ModelSpec {
            family,
            b: m.drift,
            c: m.diffusion,
            params,
        }
    }
}
