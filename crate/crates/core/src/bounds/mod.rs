//! Price-gap bounds between two equivalent exponential Lévy models.
//!
//! For a pair `(P, P̃)` with martingale measures `Q, Q̃` all the processes of
//! the bound machinery are deterministic and linear in `T`:
//!
//! ```text
//! ρ_T(Q,Q̃) = T∫(√Y^Q̃ − √Y^Q)² dν        ρ_T(P,P̃) = T∫(1 − √Y)² dν
//! U_T = T∫p dρ(Q,Q̃) + T∫a e^{kx} p dρ(P,P̃)     (V with q, R with f)
//! ```
//!
//! `Y = dν̃/dν`. All integrals are taken against the Lévy measure `ν` of `P`.

mod parametric;

pub use parametric::{
    convergence_curve_cor3, parametric_bound_thm2, ConvergencePlan, ConvergenceRow, GridPoint, ParametricBound,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{
    integrate_levy, truncation, IntegrandClass, JumpWeight, LevyDensity, LevyModel,
    QuadratureConfig,
};
use crate::measure_change::{girsanov_for, GirsanovPair, MeasureKind, MeasureSelector, MeasureSolution};

/// Payoff growth constants `(c, d)` with `|g| ≤ c·S_T + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub c: f64,
    pub d: f64,
}

impl Growth {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        if !(c >= 0.0 && d >= 0.0 && c.is_finite() && d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "growth constants must be finite and >= 0, got ({c}, {d})"
            )));
        }
        Ok(Self { c, d })
    }

    pub fn total(&self) -> f64 {
        self.c + self.d
    }
}

/// Two physical models, the measure selector applied to both, and a maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPair {
    pub base: LevyModel,
    pub tilde: LevyModel,
    pub selector: MeasureSelector,
    pub maturity: f64,
}

impl ModelPair {
    pub fn new(base: LevyModel, tilde: LevyModel, selector: MeasureSelector, maturity: f64) -> Result<Self> {
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(Error::InvalidParameter(format!("maturity must be > 0, got {maturity}")));
        }
        Ok(Self {
            base,
            tilde,
            selector,
            maturity,
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            base: self.tilde,
            tilde: self.base,
            ..*self
        }
    }

    /// Solves both martingale measures and the density ratio.
    pub fn solve(&self, cfg: &QuadratureConfig) -> Result<SolvedPair> {
        let ratio = DensityRatio::between(&self.base, &self.tilde)?;
        let sol = girsanov_for(&self.selector, &self.base, cfg)?;
        let sol_tilde = girsanov_for(&self.selector, &self.tilde, cfg)?;
        Ok(SolvedPair {
            pair: *self,
            ratio,
            sol,
            sol_tilde,
        })
    }
}

/// `Y = dν̃/dν` for two branch-form measures sharing scales and indices.
///
/// On each half-line `Y(x) = exp(−shift·|x|)` with `shift = decaỹ − decay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRatio {
    pub positive_shift: f64,
    pub negative_shift: f64,
}

impl DensityRatio {
    pub const ONE: DensityRatio = DensityRatio {
        positive_shift: 0.0,
        negative_shift: 0.0,
    };

    /// Requires equal Gaussian parts and mutually absolutely continuous
    /// jump measures with `∫(1 − √Y)² dν < ∞`.
    pub fn between(base: &LevyModel, tilde: &LevyModel) -> Result<Self> {
        if base.diffusion != tilde.diffusion {
            return Err(Error::NonEquivalent(format!(
                "Gaussian parts differ: c = {} vs {}",
                base.diffusion, tilde.diffusion
            )));
        }
        let (d, dt) = (base.density(), tilde.density());
        let side = |a: Option<crate::levy::Branch>, b: Option<crate::levy::Branch>, name: &str| {
            match (a, b) {
                (None, None) => Ok(0.0),
                (Some(x), Some(y)) => {
                    if x.scale != y.scale {
                        Err(Error::NonEquivalent(format!(
                            "{name} jump scales differ (C = {} vs {}): ∫(1−√Y)²dν = ∞",
                            x.scale, y.scale
                        )))
                    } else if x.alpha != y.alpha {
                        Err(Error::NonEquivalent(format!(
                            "{name} stability indices differ (alpha = {} vs {})",
                            x.alpha, y.alpha
                        )))
                    } else {
                        Ok(y.decay - x.decay)
                    }
                }
                _ => Err(Error::NonEquivalent(format!("{name} jump supports differ"))),
            }
        };
        Ok(Self {
            positive_shift: side(d.positive, dt.positive, "positive")?,
            negative_shift: side(d.negative, dt.negative, "negative")?,
        })
    }

    #[inline]
    fn shift(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.positive_shift
        } else {
            self.negative_shift
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (-self.shift(x) * x.abs()).exp()
    }

    /// `1 − √Y(x)`, accurate near `x = 0`.
    #[inline]
    pub fn one_minus_sqrt(&self, x: f64) -> f64 {
        -(-0.5 * self.shift(x) * x.abs()).exp_m1()
    }

    /// `Y(x) − 1`, accurate near `x = 0`.
    #[inline]
    pub fn minus_one(&self, x: f64) -> f64 {
        (-self.shift(x) * x.abs()).exp_m1()
    }
}

/// `∫ l(x)(Y(x) − 1) ν(dx)`, the jump part of the drift change `P → P̃`.
pub fn drift_compensation(base: &LevyModel, ratio: &DensityRatio, cfg: &QuadratureConfig) -> Result<f64> {
    let d = base.density();
    if d.is_zero() || *ratio == DensityRatio::ONE {
        return Ok(0.0);
    }
    integrate_levy(&d, |x| truncation(x) * ratio.minus_one(x), IntegrandClass::Quadratic, cfg)
}

/// Returns `tilde` with its drift moved so that it is equivalent to `base`.
///
/// With `c > 0` any drift is admissible and `tilde` is returned unchanged.
/// With `c = 0` the drift is pinned to `b + ∫l(Y − 1)dν`.
pub fn consistent_tilde(base: &LevyModel, tilde: &LevyModel, cfg: &QuadratureConfig) -> Result<LevyModel> {
    let ratio = DensityRatio::between(base, tilde)?;
    if base.diffusion > 0.0 {
        return Ok(*tilde);
    }
    let drift = base.drift + drift_compensation(base, &ratio, cfg)?;
    LevyModel::new(drift, tilde.diffusion, tilde.jumps)
}

/// Both martingale measures of a [`ModelPair`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedPair {
    pub pair: ModelPair,
    pub ratio: DensityRatio,
    pub sol: MeasureSolution,
    pub sol_tilde: MeasureSolution,
}

impl SolvedPair {
    fn density(&self) -> LevyDensity {
        self.pair.base.density()
    }

    /// `√Y^Q̃(x) − √Y^Q(x)`.
    fn sqrt_weight_gap(&self, x: f64) -> f64 {
        sqrt_gap(&self.sol.girsanov, &self.sol_tilde.girsanov, x)
    }
}

fn sqrt_gap(g: &GirsanovPair, gt: &GirsanovPair, x: f64) -> f64 {
    match (g.weight, gt.weight) {
        (JumpWeight::Esscher { lambda: l }, JumpWeight::Esscher { lambda: lt }) => exp_gap(l, lt, x),
        (JumpWeight::Entropy { lambda: l }, JumpWeight::Entropy { lambda: lt }) => exp_gap(l, lt, x.exp_m1()),
        _ => gt.y(x).sqrt() - g.y(x).sqrt(),
    }
}

/// `e^{lt·y/2} − e^{l·y/2}` without cancellation for small gaps and without
/// `0·∞` when one exponential underflows.
fn exp_gap(l: f64, lt: f64, y: f64) -> f64 {
    let d = 0.5 * (lt - l) * y;
    if d.abs() < 1.0 {
        (0.5 * l * y).exp() * d.exp_m1()
    } else {
        (0.5 * lt * y).exp() - (0.5 * l * y).exp()
    }
}

/// Envelope `a·e^{kx}` for `x ≥ 0` and `a·e^{k_neg·x}` for `x < 0`
/// dominating both jump weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub a: f64,
    pub k: f64,
    /// Exponent on the negative half-line, `≤ 0`.
    pub k_neg: f64,
}

impl EnvelopeConstants {
    pub const UNIT: EnvelopeConstants = EnvelopeConstants {
        a: 1.0,
        k: 0.0,
        k_neg: 0.0,
    };

    /// `e^{kx}` or `e^{k_neg x}` (without the factor `a`).
    #[inline]
    pub fn exp_factor(&self, x: f64) -> f64 {
        if x >= 0.0 {
            (self.k * x).exp()
        } else {
            (self.k_neg * x).exp()
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.a * self.exp_factor(x)
    }

    /// Checks domination on 1000 points of `[−20, 20]` inside the support.
    pub fn certify(&self, density: &LevyDensity, weights: &[GirsanovPair]) -> Result<()> {
        for x in certification_grid(density) {
            let env = self.eval(x);
            for g in weights {
                let y = g.y(x);
                if y > env * (1.0 + 1e-12) {
                    return Err(Error::Integrability(format!(
                        "envelope a={}, k={}, k_neg={} fails at x = {x:.4}: Y = {y:.6e} > {env:.6e}",
                        self.a, self.k, self.k_neg
                    )));
                }
            }
        }
        Ok(())
    }
}

fn certification_grid(density: &LevyDensity) -> Vec<f64> {
    (0..1000)
        .map(|i| -20.0 + 40.0 * (i as f64 + 0.5) / 1000.0)
        .filter(|&x| {
            (x > 0.0 && density.positive.is_some()) || (x < 0.0 && density.negative.is_some())
        })
        .collect()
}

/// Envelope constants for the selector's Girsanov weights.
pub fn envelope_for(
    kind: MeasureKind,
    g: &GirsanovPair,
    gt: &GirsanovPair,
    density: &LevyDensity,
) -> Result<EnvelopeConstants> {
    if density.is_zero() {
        return Ok(EnvelopeConstants::UNIT);
    }
    let env = match (kind, g.weight, gt.weight) {
        (MeasureKind::Esscher, JumpWeight::Esscher { lambda: l }, JumpWeight::Esscher { lambda: lt }) => {
            EnvelopeConstants {
                a: 1.0,
                k: l.max(lt).max(0.0),
                k_neg: l.min(lt).min(0.0),
            }
        }
        (MeasureKind::Memm, JumpWeight::Entropy { lambda: l }, JumpWeight::Entropy { lambda: lt })
            if (l <= 0.0 && lt <= 0.0) || density.positive.is_none() =>
        {
            // e^{λ(e^x−1)} ≤ e^{|λ|} for λ ≤ 0; ≤ 1 on x < 0 for λ ≥ 0.
            let worst = [l, lt].iter().filter(|v| **v < 0.0).fold(0.0f64, |m, v| m.max(-v));
            EnvelopeConstants {
                a: worst.exp(),
                k: 0.0,
                k_neg: 0.0,
            }
        }
        _ => fit_envelope(density, &[*g, *gt])?,
    };
    env.certify(density, &[*g, *gt])?;
    Ok(env)
}

/// Smallest exponents on the half-grid `{0, ±0.5, ±1, …}` for which the
/// weights divided by the exponential stay bounded on the grid, then the
/// least `a`.
fn fit_envelope(density: &LevyDensity, weights: &[GirsanovPair]) -> Result<EnvelopeConstants> {
    let grid = certification_grid(density);
    let ratio_max = |k: f64, k_neg: f64| {
        let e = EnvelopeConstants { a: 1.0, k, k_neg };
        grid.iter()
            .flat_map(|&x| weights.iter().map(move |g| g.y(x) / e.exp_factor(x)))
            .fold(0.0f64, f64::max)
    };
    // A half-line is tamed when the ratio no longer grows towards its far edge.
    let tamed = |k: f64, k_neg: f64, right: bool| {
        let e = EnvelopeConstants { a: 1.0, k, k_neg };
        let xs: Vec<f64> = if right {
            vec![16.0, 18.0, 20.0]
        } else {
            vec![-16.0, -18.0, -20.0]
        };
        let r: Vec<f64> = xs
            .iter()
            .map(|&x| weights.iter().map(|g| g.y(x) / e.exp_factor(x)).fold(0.0f64, f64::max))
            .collect();
        r[1] <= r[0] * (1.0 + 1e-9) && r[2] <= r[1] * (1.0 + 1e-9)
    };
    let steps = (0..=40).map(|i| 0.5 * i as f64);
    let k = if density.positive.is_some() {
        steps
            .clone()
            .find(|&k| tamed(k, 0.0, true))
            .ok_or_else(|| Error::Integrability("no envelope exponent k <= 20 on the right tail".into()))?
    } else {
        0.0
    };
    let k_neg = if density.negative.is_some() {
        steps
            .map(|s| -s)
            .find(|&kn| tamed(k, kn, false))
            .ok_or_else(|| Error::Integrability("no envelope exponent on the left tail".into()))?
    } else {
        0.0
    };
    let a = ratio_max(k, k_neg).max(f64::MIN_POSITIVE);
    Ok(EnvelopeConstants { a, k, k_neg })
}

fn name_tail(e: Error, what: &str, density: &LevyDensity, env: &EnvelopeConstants) -> Error {
    let tail = match density.positive {
        Some(b) if b.decay <= 1.0 + env.k => format!(
            "right tail: need N > 1 + k = {}, have N = {}",
            1.0 + env.k,
            b.decay
        ),
        _ => match density.negative {
            Some(b) if env.k_neg < 0.0 && b.decay <= -env.k_neg => format!(
                "left tail: need M > {}, have M = {}",
                -env.k_neg, b.decay
            ),
            _ => format!("{e}"),
        },
    };
    Error::Integrability(format!("{what} diverges ({tail})"))
}

/// `A = 4aT∫|e^x − 1| w(x) ν(dx)` with `w` the envelope exponential.
pub fn constant_a(
    density: &LevyDensity,
    env: &EnvelopeConstants,
    maturity: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if density.is_zero() {
        return Ok(0.0);
    }
    if let Some(b) = density.positive {
        if b.decay <= 1.0 + env.k {
            return Err(name_tail(Error::NoJumpPart, "A", density, env));
        }
    }
    let integral: f64 = integrate_levy(
        density,
        |x: f64| x.exp_m1().abs() * env.exp_factor(x),
        IntegrandClass::Linear,
        cfg,
    )
    .map_err(|e| name_tail(e, "A", density, env))?;
    Ok(4.0 * env.a * maturity * integral)
}

/// `(ρ_T(Q,Q̃), ρ_T(P,P̃))`.
pub fn rho_pair(pair: &ModelPair, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let s = pair.solve(cfg)?;
    rho_solved(&s, cfg)
}

fn rho_solved(s: &SolvedPair, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let d = s.density();
    if d.is_zero() {
        return Ok((0.0, 0.0));
    }
    let t = s.pair.maturity;
    let qq: f64 = integrate_levy(&d, |x| s.sqrt_weight_gap(x).powi(2), IntegrandClass::Quadratic, cfg)?;
    let pp: f64 = integrate_levy(&d, |x| s.ratio.one_minus_sqrt(x).powi(2), IntegrandClass::Quadratic, cfg)?;
    Ok((t * qq, t * pp))
}

/// Weighted version of `ρ(Q,Q̃) + a e^{kx} ρ(P,P̃)` with weight `h`.
fn weighted_rho<H: Fn(f64) -> f64>(
    s: &SolvedPair,
    env: &EnvelopeConstants,
    h: H,
    what: &str,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let d = s.density();
    if d.is_zero() {
        return Ok(0.0);
    }
    let v: f64 = integrate_levy(
        &d,
        |x| {
            let w = h(x);
            w * s.sqrt_weight_gap(x).powi(2) + env.eval(x) * w * s.ratio.one_minus_sqrt(x).powi(2)
        },
        IntegrandClass::Quadratic,
        cfg,
    )
    .map_err(|e| name_tail(e, what, &d, env))?;
    Ok(s.pair.maturity * v)
}

/// `(U_T, V_T, R_T)` for the envelope `env` and constant `a_const`.
pub fn processes_uvr(
    s: &SolvedPair,
    env: &EnvelopeConstants,
    a_const: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64, f64)> {
    let p = |x: f64| 0.25 * a_const * x.exp_m1().abs() + 1.0;
    let q = |x: f64| 0.25 * a_const * x.exp_m1().abs() + x.exp();
    let f = |x: f64| 0.5 * a_const * x.exp_m1().abs() + x.exp().max(1.0);
    Ok((
        weighted_rho(s, env, p, "U", cfg)?,
        weighted_rho(s, env, q, "V", cfg)?,
        weighted_rho(s, env, f, "R", cfg)?,
    ))
}

/// `h_T(½, P, P̃) = T[⅛β²c + ½∫(1 − √Y)² dν]`.
pub fn hellinger_t(base: &LevyModel, tilde: &LevyModel, maturity: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let ratio = DensityRatio::between(base, tilde)?;
    let d = base.density();
    let comp = drift_compensation(base, &ratio, cfg)?;
    let mismatch = tilde.drift - base.drift - comp;
    let gauss = if base.diffusion > 0.0 {
        let beta = mismatch / base.diffusion;
        0.125 * beta * beta * base.diffusion
    } else {
        if mismatch.abs() > 1e-9 * (1.0 + base.drift.abs() + tilde.drift.abs()) {
            return Err(Error::NonEquivalent(format!(
                "c = 0 and b̃ − b − ∫l(Y−1)dν = {mismatch:.6e} ≠ 0: laws are singular"
            )));
        }
        0.0
    };
    let jumps: f64 = if d.is_zero() {
        0.0
    } else {
        integrate_levy(&d, |x| ratio.one_minus_sqrt(x).powi(2), IntegrandClass::Quadratic, cfg)?
    };
    Ok(maturity * (gauss + 0.5 * jumps))
}

/// Variation-distance bounds from a deterministic Hellinger process:
/// `4√h` and `3√(2ε) + 2·1{h ≥ ε}` (infimum `3√(2h)` when `eps` is absent).
pub fn variation_bounds(h: f64, eps: Option<f64>) -> (f64, f64) {
    let h = h.max(0.0);
    let h1 = 4.0 * h.sqrt();
    let h2 = match eps {
        Some(e) => 3.0 * (2.0 * e).sqrt() + if h >= e { 2.0 } else { 0.0 },
        None => 3.0 * (2.0 * h).sqrt(),
    };
    (h1, h2)
}

/// `4c√U + 4d√V`.
pub fn bound_thm1(u: f64, v: f64, growth: Growth) -> f64 {
    4.0 * growth.c * u.max(0.0).sqrt() + 4.0 * growth.d * v.max(0.0).sqrt()
}

/// `3√2 (c + d) √R`.
pub fn bound_cor1(r: f64, growth: Growth) -> f64 {
    3.0 * std::f64::consts::SQRT_2 * growth.total() * r.max(0.0).sqrt()
}

/// A specialised bound together with whether it had to fall back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialBound {
    pub value: f64,
    pub fallback: bool,
}

fn special_bound<G: Fn(f64) -> f64>(
    s: &SolvedPair,
    lambda: f64,
    lambda_tilde: f64,
    a: f64,
    g: G,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let d = s.density();
    if d.is_zero() {
        return Ok(0.0);
    }
    let t = s.pair.maturity;
    let a_const = constant_a(&d, &EnvelopeConstants { a, k: 0.0, k_neg: 0.0 }, t, cfg)?;
    let f = |x: f64| 0.5 * a_const * x.exp_m1().abs() + x.exp().max(1.0);
    let dl = lambda - lambda_tilde;
    let first: f64 = if dl == 0.0 {
        0.0
    } else {
        integrate_levy(&d, |x| f(x) * g(x), IntegrandClass::Quadratic, cfg)?
    };
    let second: f64 = integrate_levy(
        &d,
        |x| f(x) * s.ratio.one_minus_sqrt(x).powi(2),
        IntegrandClass::Quadratic,
        cfg,
    )?;
    Ok(t * dl * dl * first + t * second)
}

/// Esscher bound `T(λ−λ̃)²∫f x² dν + T∫f (√dν − √dν̃)²` for `λ, λ̃ ≤ 0`;
/// otherwise `fallback` (the general corollary bound) is returned, flagged.
pub fn esscher_gap_bound_eq14(
    s: &SolvedPair,
    fallback: f64,
    cfg: &QuadratureConfig,
) -> Result<Option<SpecialBound>> {
    let (JumpWeight::Esscher { lambda: l }, JumpWeight::Esscher { lambda: lt }) =
        (s.sol.girsanov.weight, s.sol_tilde.girsanov.weight)
    else {
        return Ok(None);
    };
    if l > 0.0 || lt > 0.0 {
        return Ok(Some(SpecialBound {
            value: fallback,
            fallback: true,
        }));
    }
    let value = special_bound(s, l, lt, 1.0, |x| x * x, cfg)?;
    Ok(Some(SpecialBound {
        value,
        fallback: false,
    }))
}

/// Minimal-entropy analogue with `(e^x − 1)²` in place of `x²`.
pub fn memm_gap_bound_m12(
    s: &SolvedPair,
    fallback: f64,
    cfg: &QuadratureConfig,
) -> Result<Option<SpecialBound>> {
    let (JumpWeight::Entropy { lambda: l }, JumpWeight::Entropy { lambda: lt }) =
        (s.sol.girsanov.weight, s.sol_tilde.girsanov.weight)
    else {
        return Ok(None);
    };
    if l > 0.0 || lt > 0.0 {
        return Ok(Some(SpecialBound {
            value: fallback,
            fallback: true,
        }));
    }
    let a = (-l).max(-lt).exp();
    let value = special_bound(s, l, lt, a, |x| x.exp_m1().powi(2), cfg)?;
    Ok(Some(SpecialBound {
        value,
        fallback: false,
    }))
}

/// Convention switches recorded with every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundFlags {
    /// `A` includes the factor `T`.
    pub a_includes_maturity: bool,
    pub eq14_fallback: bool,
    pub m12_fallback: bool,
    /// Same jump measure, different drift: `U`, `V`, `R` vanish and only
    /// `h_T` sees the difference.
    pub drift_only_difference: bool,
    pub support_ok: bool,
}

/// Every intermediate quantity of the bound computation for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(rename = "rho_QQ")]
    pub rho_qq: f64,
    #[serde(rename = "rho_PP")]
    pub rho_pp: f64,
    #[serde(rename = "A")]
    pub a_const: f64,
    #[serde(rename = "U_T")]
    pub u_t: f64,
    #[serde(rename = "V_T")]
    pub v_t: f64,
    #[serde(rename = "R_T")]
    pub r_t: f64,
    #[serde(rename = "h_T_PP")]
    pub h_t_pp: f64,
    pub bound_thm1: f64,
    pub bound_cor1: f64,
    pub bound_eq14: Option<f64>,
    pub bound_m12: Option<f64>,
    pub variation_bound_h1: f64,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub envelope: EnvelopeConstants,
    pub growth: Growth,
    pub maturity: f64,
    pub selector: MeasureSelector,
    pub flags: BoundFlags,
}

/// Full bound report for a pair and payoff growth constants.
pub fn stability_report(pair: &ModelPair, growth: Growth, cfg: &QuadratureConfig) -> Result<BoundReport> {
    let s = pair.solve(cfg)?;
    report_for_solved(&s, growth, cfg)
}

pub(crate) fn report_for_solved(s: &SolvedPair, growth: Growth, cfg: &QuadratureConfig) -> Result<BoundReport> {
    let pair = &s.pair;
    let t = pair.maturity;
    let d = s.density();
    let h = hellinger_t(&pair.base, &pair.tilde, t, cfg)?;
    let (rho_qq, rho_pp) = rho_solved(s, cfg)?;
    let env = envelope_for(pair.selector.kind, &s.sol.girsanov, &s.sol_tilde.girsanov, &d)?;
    let a_const = constant_a(&d, &env, t, cfg)?;
    let (u, v, r) = processes_uvr(s, &env, a_const, cfg)?;
    let thm1 = bound_thm1(u, v, growth);
    let cor1 = bound_cor1(r, growth);
    let eq14 = esscher_gap_bound_eq14(s, cor1, cfg)?;
    let m12 = memm_gap_bound_m12(s, cor1, cfg)?;
    Ok(BoundReport {
        rho_qq,
        rho_pp,
        a_const,
        u_t: u,
        v_t: v,
        r_t: r,
        h_t_pp: h,
        bound_thm1: thm1,
        bound_cor1: cor1,
        bound_eq14: eq14.map(|b| b.value),
        bound_m12: m12.map(|b| b.value),
        variation_bound_h1: variation_bounds(h, None).0,
        lambda: s.sol.girsanov.beta,
        lambda_tilde: s.sol_tilde.girsanov.beta,
        envelope: env,
        growth,
        maturity: t,
        selector: pair.selector,
        flags: BoundFlags {
            a_includes_maturity: true,
            eq14_fallback: eq14.is_some_and(|b| b.fallback),
            m12_fallback: m12.is_some_and(|b| b.fallback),
            drift_only_difference: s.ratio == DensityRatio::ONE && pair.base.drift != pair.tilde.drift,
            support_ok: s.sol.support_ok && s.sol_tilde.support_ok,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::precise()
    }

    fn vg(n: f64) -> LevyModel {
        LevyModel::variance_gamma(0.0, 0.0, 1.0, 5.0, n).unwrap()
    }

    #[test]
    fn identical_pair_is_exactly_zero() {
        let m = vg(5.0);
        for sel in [MeasureSelector::esscher(0.0), MeasureSelector::memm(0.0)] {
            let pair = ModelPair::new(m, m, sel, 1.0).unwrap();
            let rep = stability_report(&pair, Growth::new(1.0, 0.0).unwrap(), &cfg()).unwrap();
            assert_eq!(rep.rho_qq, 0.0);
            assert_eq!(rep.rho_pp, 0.0);
            assert_eq!(rep.u_t, 0.0);
            assert_eq!(rep.v_t, 0.0);
            assert_eq!(rep.r_t, 0.0);
            assert_eq!(rep.h_t_pp, 0.0);
            assert_eq!(rep.bound_thm1, 0.0);
            assert_eq!(rep.bound_cor1, 0.0);
            assert_eq!(rep.variation_bound_h1, 0.0);
            for b in [rep.bound_eq14, rep.bound_m12].into_iter().flatten() {
                assert_eq!(b, 0.0);
            }
        }
    }

    #[test]
    fn black_scholes_hellinger_arithmetic() {
        let a = LevyModel::black_scholes(0.05, 0.04).unwrap();
        let b = LevyModel::black_scholes(0.07, 0.04).unwrap();
        let h = hellinger_t(&a, &b, 1.0, &cfg()).unwrap();
        assert!((h - 0.00125).abs() < 1e-15);
        let (h1, _) = variation_bounds(h, None);
        assert!((h1 - 0.141_421_356_237_309_5).abs() < 1e-12);
        let pair = ModelPair::new(a, b, MeasureSelector::esscher(0.0), 1.0).unwrap();
        assert_eq!(rho_pair(&pair, &cfg()).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn scale_change_is_not_equivalent() {
        let a = vg(5.0);
        let b = LevyModel::variance_gamma(0.0, 0.0, 1.1, 5.0, 5.0).unwrap();
        assert!(matches!(DensityRatio::between(&a, &b), Err(Error::NonEquivalent(_))));
        let c = vg(5.5);
        assert!(matches!(hellinger_t(&a, &c, 1.0, &cfg()), Err(Error::NonEquivalent(_))));
        let c = consistent_tilde(&a, &c, &cfg()).unwrap();
        assert!(hellinger_t(&a, &c, 1.0, &cfg()).unwrap() > 0.0);
    }

    #[test]
    fn envelope_examples() {
        let d = vg(5.0).density();
        let e = envelope_for(
            MeasureKind::Esscher,
            &GirsanovPair::esscher(-1.2),
            &GirsanovPair::esscher(-0.8),
            &d,
        )
        .unwrap();
        assert_eq!((e.a, e.k), (1.0, 0.0));
        let e = envelope_for(
            MeasureKind::Memm,
            &GirsanovPair::memm(-0.5),
            &GirsanovPair::memm(-0.3),
            &d,
        )
        .unwrap();
        assert!((e.a - 0.5f64.exp()).abs() < 1e-15);
        assert_eq!(e.k, 0.0);
        let e = envelope_for(
            MeasureKind::Esscher,
            &GirsanovPair::esscher(0.4),
            &GirsanovPair::esscher(-0.1),
            &d,
        )
        .unwrap();
        assert_eq!((e.a, e.k, e.k_neg), (1.0, 0.4, -0.1));
    }

    #[test]
    fn fq_envelope_is_certified() {
        let d = vg(5.0).density();
        let g = GirsanovPair::fq(2.0, 0.3);
        let gt = GirsanovPair::fq(2.0, 0.35);
        let e = envelope_for(MeasureKind::Fq(2.0), &g, &gt, &d).unwrap();
        assert_eq!(e.k, 1.0);
        e.certify(&d, &[g, gt]).unwrap();
    }

    #[test]
    fn a_is_linear_in_envelope_scale() {
        let d = vg(5.0).density();
        let e1 = EnvelopeConstants::UNIT;
        let e2 = EnvelopeConstants { a: 2.0, ..e1 };
        let a1 = constant_a(&d, &e1, 1.0, &cfg()).unwrap();
        let a2 = constant_a(&d, &e2, 1.0, &cfg()).unwrap();
        assert!((a2 - 2.0 * a1).abs() < 1e-14 * a2);
        assert_eq!(constant_a(&LevyDensity::ZERO, &e1, 1.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn divergent_a_names_the_tail() {
        let d = vg(1.3).density();
        let env = EnvelopeConstants { a: 1.0, k: 0.5, k_neg: 0.0 };
        let err = constant_a(&d, &env, 1.0, &cfg()).unwrap_err();
        assert!(err.to_string().contains("right tail"), "{err}");
    }

    #[test]
    fn quantities_scale_with_maturity() {
        let a = vg(5.0);
        let b = consistent_tilde(&a, &vg(5.5), &cfg()).unwrap();
        let g = Growth::new(1.0, 0.0).unwrap();
        let r1 = stability_report(&ModelPair::new(a, b, MeasureSelector::esscher(0.0), 1.0).unwrap(), g, &cfg())
            .unwrap();
        let r2 = stability_report(&ModelPair::new(a, b, MeasureSelector::esscher(0.0), 2.0).unwrap(), g, &cfg())
            .unwrap();
        assert!((r2.rho_qq - 2.0 * r1.rho_qq).abs() < 1e-12 * r2.rho_qq);
        assert!((r2.rho_pp - 2.0 * r1.rho_pp).abs() < 1e-12 * r2.rho_pp);
        // A also carries T, so U/V/R are not exactly linear; they at least grow.
        assert!(r2.r_t > 2.0 * r1.r_t);
        assert!(r1.bound_cor1 >= 0.0);
        assert!((r1.bound_cor1 - 3.0 * 2f64.sqrt() * r1.r_t.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn cor1_arithmetic() {
        let b = bound_cor1(2.0, Growth::new(1.0, 0.0).unwrap());
        assert!((b - 6.0).abs() < 1e-14);
    }
}
