//! European pricing under a selected martingale measure: Monte Carlo for
//! closed-family laws and cosine expansion for any triplet.
//!
//! Spot is normalised to `S_0 = 1`, so strikes are moneyness ratios.

mod cos;
mod simulate;

pub(crate) use simulate::run_batched;

pub use cos::{CosConfig, CosPricer};
pub use simulate::{batch_rng, simulate_paths, simulate_terminal, LevySampler, SimConfig};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::{Growth, ModelPair};
use crate::error::{Error, Result};
use crate::levy::{QuadratureConfig, Triplet};
use crate::measure_change::risk_neutral_triplet;

type PathFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A user-supplied payoff with declared growth constants.
#[derive(Clone)]
pub struct CustomPayoff {
    pub name: String,
    pub growth: Growth,
    /// Needs the whole price path rather than `S_T` alone.
    pub path_dependent: bool,
    f: Arc<PathFn>,
}

impl CustomPayoff {
    /// `f` receives the price path `S_0 = 1, …, S_T`; terminal payoffs only
    /// look at the last entry.
    pub fn new<F>(name: &str, growth: Growth, path_dependent: bool, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            growth,
            path_dependent,
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for CustomPayoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPayoff")
            .field("name", &self.name)
            .field("growth", &self.growth)
            .field("path_dependent", &self.path_dependent)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    /// `g(S) = S_T`.
    Asset,
    Custom(CustomPayoff),
}

/// Serializable payoff description (everything except custom closures).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffSpec {
    Call { strike: f64 },
    Put { strike: f64 },
    Asset,
}

impl TryFrom<PayoffSpec> for Payoff {
    type Error = Error;

    fn try_from(s: PayoffSpec) -> Result<Self> {
        match s {
            PayoffSpec::Call { strike } => Payoff::call(strike),
            PayoffSpec::Put { strike } => Payoff::put(strike),
            PayoffSpec::Asset => Ok(Payoff::Asset),
        }
    }
}

fn check_strike(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("strike must be >= 0, got {k}")))
    }
}

impl Payoff {
    pub fn call(strike: f64) -> Result<Self> {
        check_strike(strike)?;
        Ok(Payoff::Call { strike })
    }

    pub fn put(strike: f64) -> Result<Self> {
        check_strike(strike)?;
        Ok(Payoff::Put { strike })
    }

    pub fn growth(&self) -> Growth {
        match self {
            Payoff::Call { .. } | Payoff::Asset => Growth { c: 1.0, d: 0.0 },
            Payoff::Put { strike } => Growth { c: 0.0, d: *strike },
            Payoff::Custom(c) => c.growth,
        }
    }

    fn path_dependent(&self) -> bool {
        matches!(self, Payoff::Custom(c) if c.path_dependent)
    }

    /// Payoff of a price path (only the last entry for terminal payoffs).
    pub fn eval_path(&self, prices: &[f64]) -> f64 {
        let s = *prices.last().expect("nonempty path");
        match self {
            Payoff::Call { strike } => (s - strike).max(0.0),
            Payoff::Put { strike } => (strike - s).max(0.0),
            Payoff::Asset => s,
            Payoff::Custom(c) => (c.f)(prices),
        }
    }
}

/// Growth constants `(c, d)` for a vanilla payoff kind.
pub fn payoff_growth(spec: &PayoffSpec) -> Result<Growth> {
    Ok(Payoff::try_from(*spec)?.growth())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceMethod {
    Mc,
    Cf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: PriceMethod,
    pub n_paths: usize,
    pub seed: u64,
}

/// Mean and standard error, computed from deviations to the first value so
/// that a constant sample gives its value exactly.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let x0 = xs[0];
    let s: f64 = xs.iter().map(|x| x - x0).sum();
    let mean_dev = s / n as f64;
    if n < 2 {
        return (x0 + mean_dev, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - x0 - mean_dev).powi(2)).sum();
    let var = ss / (n - 1) as f64;
    (x0 + mean_dev, (var / n as f64).sqrt())
}

fn payoff_samples(t: &Triplet, payoff: &Payoff, maturity: f64, cfg: &SimConfig) -> Result<Vec<f64>> {
    if payoff.path_dependent() {
        let paths = simulate_paths(t, maturity, cfg)?;
        Ok(paths
            .iter()
            .map(|p| {
                let prices: Vec<f64> = p.iter().map(|x| x.exp()).collect();
                payoff.eval_path(&prices)
            })
            .collect())
    } else {
        let xs = simulate_terminal(t, maturity, &SimConfig { n_steps: 1, ..*cfg })?;
        Ok(xs.iter().map(|x| payoff.eval_path(&[x.exp()])).collect())
    }
}

/// `e^{−rT} E g(S)` by Monte Carlo under the law `t`.
pub fn mc_price(t: &Triplet, payoff: &Payoff, maturity: f64, rate: f64, cfg: &SimConfig) -> Result<PriceEstimate> {
    let disc = (-rate * maturity).exp();
    let samples = payoff_samples(t, payoff, maturity, cfg)?;
    let (m, se) = mean_stderr(&samples);
    Ok(PriceEstimate {
        value: disc * m,
        stderr: disc * se,
        method: PriceMethod::Mc,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
    })
}

/// Cosine-expansion price for call, put or asset payoffs.
pub fn cf_price(
    t: &Triplet,
    payoff: &Payoff,
    maturity: f64,
    rate: f64,
    cos: &CosConfig,
    quad: &QuadratureConfig,
) -> Result<PriceEstimate> {
    let pricer = CosPricer::new(t, maturity, rate, cos, quad)?;
    let value = cf_with(&pricer, payoff)?;
    Ok(PriceEstimate {
        value,
        stderr: 0.0,
        method: PriceMethod::Cf,
        n_paths: 0,
        seed: 0,
    })
}

pub(crate) fn cf_with(pricer: &CosPricer, payoff: &Payoff) -> Result<f64> {
    match payoff {
        Payoff::Call { strike } => Ok(pricer.call(*strike)),
        Payoff::Put { strike } => Ok(pricer.put(*strike)),
        Payoff::Asset => Ok(pricer.asset()),
        Payoff::Custom(c) => Err(Error::Unsupported(format!(
            "payoff '{}' has no cosine-series coefficients; use Monte Carlo",
            c.name
        ))),
    }
}

/// Realised gap `|C_T(θ) − C_T(θ′)|` between the two legs of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub gap: f64,
    pub stderr: f64,
    pub method: PriceMethod,
    pub price: f64,
    pub price_tilde: f64,
}

/// Price gap under the pair's selector; cosine expansion when the payoff
/// allows it, otherwise Monte Carlo with common seeds.
pub fn price_gap(
    pair: &ModelPair,
    payoff: &Payoff,
    sim: &SimConfig,
    cos: &CosConfig,
    quad: &QuadratureConfig,
) -> Result<GapEstimate> {
    let (_, t) = risk_neutral_triplet(&pair.selector, &pair.base, quad)?;
    let (_, tt) = risk_neutral_triplet(&pair.selector, &pair.tilde, quad)?;
    let (mat, r) = (pair.maturity, pair.selector.rate);
    if !matches!(payoff, Payoff::Custom(_)) {
        let a = cf_price(&t, payoff, mat, r, cos, quad)?.value;
        let b = if t == tt {
            a
        } else {
            cf_price(&tt, payoff, mat, r, cos, quad)?.value
        };
        return Ok(GapEstimate {
            gap: (a - b).abs(),
            stderr: 0.0,
            method: PriceMethod::Cf,
            price: a,
            price_tilde: b,
        });
    }
    let disc = (-r * mat).exp();
    let xa = payoff_samples(&t, payoff, mat, sim)?;
    let xb = payoff_samples(&tt, payoff, mat, sim)?;
    let diff: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| a - b).collect();
    let (d, se) = mean_stderr(&diff);
    Ok(GapEstimate {
        gap: disc * d.abs(),
        stderr: disc * se,
        method: PriceMethod::Mc,
        price: disc * mean_stderr(&xa).0,
        price_tilde: disc * mean_stderr(&xb).0,
    })
}
