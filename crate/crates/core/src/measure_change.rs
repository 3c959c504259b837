//! Esscher, minimal-entropy and f^q martingale measures for exponential Lévy
//! models.
//!
//! Each selector reduces to a scalar equation in one parameter `β`,
//!
//! ```text
//! b + (½ + β)c + ∫ ((e^x − 1)·Y_β(x) − l(x)) ν(dx) = r,
//! ```
//!
//! whose left side is nondecreasing in `β`. The solution gives the Girsanov
//! pair `(β, Y)` and the law of `X` under the new measure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{
    integrate_levy, truncation, IntegrandClass, JumpWeight, LevyDensity, LevyModel,
    QuadratureConfig, Triplet,
};
use crate::roots::{solve_monotone, Interval, RootReport, EDGE_MARGIN};

const XTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    Esscher,
    Memm,
    /// f^q-minimal measure; `q ∉ {0, 1}`.
    Fq(f64),
}

/// Which martingale measure to select, and the riskless rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SelectorSpec", into = "SelectorSpec")]
pub struct MeasureSelector {
    pub kind: MeasureKind,
    pub rate: f64,
}

impl MeasureSelector {
    pub fn new(kind: MeasureKind, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("rate must be >= 0, got {rate}")));
        }
        if let MeasureKind::Fq(q) = kind {
            if !q.is_finite() || q == 0.0 || q == 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "f^q needs q < 0, 0 < q < 1 or q > 1, got {q}"
                )));
            }
        }
        Ok(Self { kind, rate })
    }

    pub fn esscher(rate: f64) -> Self {
        Self { kind: MeasureKind::Esscher, rate }
    }

    pub fn memm(rate: f64) -> Self {
        Self { kind: MeasureKind::Memm, rate }
    }

    pub fn fq(q: f64, rate: f64) -> Result<Self> {
        Self::new(MeasureKind::Fq(q), rate)
    }
}

impl fmt::Display for MeasureSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MeasureKind::Esscher => write!(f, "esscher(r={})", self.rate),
            MeasureKind::Memm => write!(f, "memm(r={})", self.rate),
            MeasureKind::Fq(q) => write!(f, "fq(q={q}, r={})", self.rate),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SelectorTag {
    Esscher,
    Memm,
    Fq,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectorSpec {
    kind: SelectorTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default)]
    rate: f64,
}

impl TryFrom<SelectorSpec> for MeasureSelector {
    type Error = Error;

    fn try_from(s: SelectorSpec) -> Result<Self> {
        let kind = match (s.kind, s.q) {
            (SelectorTag::Esscher, None) => MeasureKind::Esscher,
            (SelectorTag::Memm, None) => MeasureKind::Memm,
            (SelectorTag::Fq, Some(q)) => MeasureKind::Fq(q),
            (SelectorTag::Fq, None) => {
                return Err(Error::InvalidParameter("selector kind fq requires q".into()))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidParameter("q is only meaningful for kind fq".into()))
            }
        };
        MeasureSelector::new(kind, s.rate)
    }
}

impl From<MeasureSelector> for SelectorSpec {
    fn from(m: MeasureSelector) -> Self {
        let (kind, q) = match m.kind {
            MeasureKind::Esscher => (SelectorTag::Esscher, None),
            MeasureKind::Memm => (SelectorTag::Memm, None),
            MeasureKind::Fq(q) => (SelectorTag::Fq, Some(q)),
        };
        SelectorSpec { kind, q, rate: m.rate }
    }
}

/// Girsanov parameters `(β, Y)`: Gaussian drift shift and jump-density ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GirsanovPair {
    pub beta: f64,
    pub weight: JumpWeight,
}

impl GirsanovPair {
    pub const IDENTITY: GirsanovPair = GirsanovPair {
        beta: 0.0,
        weight: JumpWeight::Identity,
    };

    pub fn esscher(lambda: f64) -> Self {
        Self {
            beta: lambda,
            weight: JumpWeight::Esscher { lambda },
        }
    }

    pub fn memm(lambda: f64) -> Self {
        Self {
            beta: lambda,
            weight: JumpWeight::Entropy { lambda },
        }
    }

    pub fn fq(q: f64, beta: f64) -> Self {
        Self {
            beta,
            weight: JumpWeight::Power { q, beta },
        }
    }

    #[inline]
    pub fn y(&self, x: f64) -> f64 {
        self.weight.eval(x)
    }
}

/// A solved measure change together with its solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSolution {
    pub selector: MeasureSelector,
    pub girsanov: GirsanovPair,
    pub solver: RootReport,
    /// `Y > 0` on the support of `ν` (always true outside f^q).
    pub support_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_violation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSign {
    Negative,
    Unknown,
    NoSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignClassification {
    pub lambda_sign: LambdaSign,
    pub rule_applied: String,
}

/// Left side minus `r` of the martingale equation for weight `w` and
/// Gaussian shift `beta`.
fn martingale_equation(
    model: &LevyModel,
    beta: f64,
    w: JumpWeight,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let density = model.density();
    let jumps: f64 = if density.is_zero() {
        0.0
    } else if let JumpWeight::Esscher { lambda } = w {
        // Fold the tilt into the branches so that e^{λx} never overflows:
        // ∫((e^x−1)e^{λx} − l)dν = ∫(e^x−1−l)dν_λ + ∫l(e^{λx}−1)dν.
        let tilted = density.esscher(lambda)?;
        let main: f64 = integrate_levy(&tilted, |x| x.exp_m1() - truncation(x), IntegrandClass::Quadratic, cfg)?;
        let near: f64 = integrate_levy(
            &density,
            |x| truncation(x) * (lambda * truncation(x)).exp_m1(),
            IntegrandClass::Quadratic,
            cfg,
        )?;
        main + near
    } else {
        integrate_levy(
            &density,
            |x| x.exp_m1() * w.eval(x) - truncation(x),
            IntegrandClass::Quadratic,
            cfg,
        )?
    };
    Ok(model.drift + (0.5 + beta) * model.diffusion + jumps - r)
}

/// `b + (½+λ)c + ∫((e^x−1)e^{λx} − l(x))dν − r`.
pub fn esscher_equation(model: &LevyModel, lambda: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    martingale_equation(model, lambda, JumpWeight::Esscher { lambda }, r, cfg)
}

/// `b + (½+λ)c + ∫((e^x−1)e^{λ(e^x−1)} − l(x))dν − r`.
pub fn memm_equation(model: &LevyModel, lambda: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    martingale_equation(model, lambda, JumpWeight::Entropy { lambda }, r, cfg)
}

/// `b + (½+β)c + ∫((e^x−1)Y_q(x) − l(x))dν − r`.
pub fn fq_equation(model: &LevyModel, q: f64, beta: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    martingale_equation(model, beta, JumpWeight::Power { q, beta }, r, cfg)
}

/// Open set of `λ` for which both `e^{λx}` and `e^{(λ+1)x}` are ν-integrable
/// at infinity.
pub fn esscher_domain(model: &LevyModel) -> Interval {
    let dom = model.exp_moment_domain();
    Interval::new(dom.lower, dom.upper - 1.0)
}

fn left_tail_finite(density: &LevyDensity) -> bool {
    density.negative.is_none_or(|b| b.decay > 0.0 || b.alpha > 0.0)
}

/// Set of `λ` on which the entropy equation is finite. The right edge `0` is
/// closed when `N > 1`, which is encoded by pushing it out by the edge margin.
pub fn memm_domain(model: &LevyModel) -> Interval {
    let d = model.density();
    let upper = match d.positive {
        None => f64::INFINITY,
        Some(b) if b.decay > 1.0 => EDGE_MARGIN,
        Some(_) => 0.0,
    };
    Interval::new(f64::NEG_INFINITY, upper)
}

/// Set of `β` searched for the f^q equation. For `q < 1` it is the window on
/// which `1 + (q−1)β(e^x−1)` stays positive on the support.
pub fn fq_domain(model: &LevyModel, q: f64) -> Interval {
    let d = model.density();
    let zero_edge = |decay: f64| if decay > 1.0 { EDGE_MARGIN } else { 0.0 };
    if q < 1.0 {
        let lower = if d.negative.is_some() {
            1.0 / (q - 1.0)
        } else {
            f64::NEG_INFINITY
        };
        let upper = d.positive.map_or(f64::INFINITY, |b| zero_edge(b.decay));
        Interval::new(lower, upper)
    } else {
        let upper = match d.positive {
            None => f64::INFINITY,
            Some(b) if b.decay > q / (q - 1.0) => f64::INFINITY,
            Some(b) => zero_edge(b.decay),
        };
        Interval::new(f64::NEG_INFINITY, upper)
    }
}

/// Esscher parameter `λ*` solving the martingale equation.
pub fn esscher_lambda(model: &LevyModel, r: f64, cfg: &QuadratureConfig) -> Result<RootReport> {
    solve_monotone(
        |l| esscher_equation(model, l, r, cfg),
        esscher_domain(model),
        0.0,
        XTOL,
    )
}

/// Minimal-entropy parameter `λ*`.
pub fn memm_lambda(model: &LevyModel, r: f64, cfg: &QuadratureConfig) -> Result<RootReport> {
    if !left_tail_finite(&model.density()) {
        return Err(Error::Divergence(
            "left tail of ν has infinite mass; the entropy equation is nowhere finite".into(),
        ));
    }
    if let LambdaSign::NoSolution = memm_sign_classify(model, r, cfg).lambda_sign {
        return Err(Error::NoSolution(format!(
            "f̂(0) < r = {r} with N > 1: the entropy equation has no root in λ ≤ 0"
        )));
    }
    solve_monotone(
        |l| memm_equation(model, l, r, cfg),
        memm_domain(model),
        0.0,
        XTOL,
    )
}

/// `f̂(0) = b + ½c + ∫(e^x − 1 − l(x))dν`, the entropy equation at `λ = 0`.
pub fn f_hat_zero(model: &LevyModel, cfg: &QuadratureConfig) -> Result<f64> {
    memm_equation(model, 0.0, 0.0, cfg)
}

/// Sign of the minimal-entropy parameter from the tail and `f̂(0)` rules.
pub fn memm_sign_classify(model: &LevyModel, r: f64, cfg: &QuadratureConfig) -> SignClassification {
    let d = model.density();
    let Some(pos) = d.positive else {
        return SignClassification {
            lambda_sign: LambdaSign::Unknown,
            rule_applied: "no positive jumps: tail rules do not apply".into(),
        };
    };
    if let (Some(neg), Some(alpha)) = (d.negative, model.alpha()) {
        if pos.decay == 0.0 && neg.decay == 0.0 && alpha > 0.0 && pos.scale > 0.0 {
            return SignClassification {
                lambda_sign: LambdaSign::Negative,
                rule_applied: "symmetric stable (M = N = 0, 0 < alpha < 2, C > 0): lambda* < 0".into(),
            };
        }
    }
    let n = pos.decay;
    if n <= 1.0 {
        return SignClassification {
            lambda_sign: LambdaSign::Negative,
            rule_applied: format!("N = {n} <= 1: lambda* < 0"),
        };
    }
    match f_hat_zero(model, cfg) {
        Ok(f0) if f0 >= r => SignClassification {
            lambda_sign: LambdaSign::Negative,
            rule_applied: format!("N = {n} > 1 and f_hat(0) = {f0:.6e} >= r = {r}: lambda* < 0"),
        },
        Ok(f0) => SignClassification {
            lambda_sign: LambdaSign::NoSolution,
            rule_applied: format!("N = {n} > 1 and f_hat(0) = {f0:.6e} < r = {r}: no solution"),
        },
        Err(e) => SignClassification {
            lambda_sign: LambdaSign::Unknown,
            rule_applied: format!("f_hat(0) could not be evaluated: {e}"),
        },
    }
}

/// `X̂ = X + ½c·t + Σ(e^{ΔX} − 1 − ΔX)`, the stochastic logarithm of `e^X`.
///
/// `drift` is relative to the identity truncation (no compensation of small
/// jumps), so `E X̂_1 = drift`. The jumps of `X̂` are the images `e^{ΔX} − 1`
/// of the jumps of `X`; [`HatTriplet::integrate_jumps`] integrates against
/// that image measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatTriplet {
    pub drift: f64,
    pub diffusion: f64,
    /// Lévy density of `X`; the jump measure of `X̂` is its image under `e^x − 1`.
    pub base: LevyDensity,
    /// `∫|e^x − 1| ν(dx)`.
    pub abs_jump_moment: f64,
}

impl HatTriplet {
    /// `∫ g(y) ν̂(dy) = ∫ g(e^x − 1) ν(dx)`.
    pub fn integrate_jumps<F: Fn(f64) -> f64>(
        &self,
        g: F,
        class: IntegrandClass,
        cfg: &QuadratureConfig,
    ) -> Result<f64> {
        if self.base.is_zero() {
            return Ok(0.0);
        }
        integrate_levy(&self.base, |x| g(x.exp_m1()), class, cfg)
    }

    /// Esscher equation of `X̂`: `b̂ + λc + ∫ y(e^{λy} − 1) ν̂(dy) − r`.
    /// Its root is the minimal-entropy parameter of `X`.
    pub fn esscher_equation(&self, lambda: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let jumps = self.integrate_jumps(
            |y| y * (lambda * y).exp_m1(),
            IntegrandClass::Quadratic,
            cfg,
        )?;
        Ok(self.drift + lambda * self.diffusion + jumps - r)
    }
}

pub fn hat_triplet(model: &LevyModel, cfg: &QuadratureConfig) -> Result<HatTriplet> {
    let base = model.density();
    if base.is_zero() {
        return Ok(HatTriplet {
            drift: model.drift + 0.5 * model.diffusion,
            diffusion: model.diffusion,
            base,
            abs_jump_moment: 0.0,
        });
    }
    if let Some(p) = base.positive {
        if p.decay <= 1.0 {
            return Err(Error::Integrability(format!(
                "∫_{{x>1}} e^x ν(dx) = ∞ since N = {} <= 1",
                p.decay
            )));
        }
    }
    let abs_jump_moment: f64 = integrate_levy(
        &base,
        |x: f64| x.exp_m1().abs(),
        IntegrandClass::Linear,
        cfg,
    )
    .map_err(|e| Error::Integrability(format!("∫|e^x − 1|dν: {e}")))?;
    let comp: f64 = integrate_levy(
        &base,
        |x: f64| x.exp_m1() - truncation(x),
        IntegrandClass::Quadratic,
        cfg,
    )?;
    Ok(HatTriplet {
        drift: model.drift + 0.5 * model.diffusion + comp,
        diffusion: model.diffusion,
        base,
        abs_jump_moment,
    })
}

/// Outcome of [`fq_parameters`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FqSolution {
    pub beta: f64,
    pub girsanov: GirsanovPair,
    pub solver: RootReport,
    pub support_ok: bool,
    pub support_violation: Option<String>,
}

/// Where `1 + s(e^x − 1) ≤ 0` on the support of `density`, if anywhere.
fn fq_support_violation(density: &LevyDensity, s: f64) -> Option<String> {
    if density.positive.is_some() && s < 0.0 {
        let edge = (1.0 - 1.0 / s).ln();
        return Some(format!("Y_q = 0 for x >= {edge:.6}: (q-1)beta = {s:.6} < 0"));
    }
    if density.negative.is_some() && s > 1.0 {
        let edge = (1.0 - 1.0 / s).ln();
        return Some(format!("Y_q = 0 for x <= {edge:.6}: (q-1)beta = {s:.6} > 1"));
    }
    None
}

/// f^q-minimal Girsanov parameters.
pub fn fq_parameters(model: &LevyModel, q: f64, r: f64, cfg: &QuadratureConfig) -> Result<FqSolution> {
    MeasureSelector::fq(q, r.max(0.0))?;
    if model.validate(cfg).monotone_risk {
        return Err(Error::NoSolution(
            "monotone model (one-sided jumps, c = 0): f^q measure not defined".into(),
        ));
    }
    let solver = solve_monotone(
        |b| fq_equation(model, q, b, r, cfg),
        fq_domain(model, q),
        0.0,
        XTOL,
    )?;
    let beta = solver.root;
    let violation = fq_support_violation(&model.density(), (q - 1.0) * beta);
    Ok(FqSolution {
        beta,
        girsanov: GirsanovPair::fq(q, beta),
        solver,
        support_ok: violation.is_none(),
        support_violation: violation,
    })
}

/// Law of `X` under the measure with Girsanov pair `g`.
///
/// Esscher tilts stay in branch form; other weights are carried symbolically.
pub fn tilted_triplet(model: &LevyModel, g: &GirsanovPair, cfg: &QuadratureConfig) -> Result<Triplet> {
    let base = model.triplet();
    let c = model.diffusion;
    let integrability = |e: Error| Error::Integrability(format!("∫|l(Y − 1)|dν: {e}"));
    match g.weight {
        JumpWeight::Identity => Ok(Triplet {
            drift: base.drift + g.beta * c,
            ..base
        }),
        JumpWeight::Esscher { lambda } => {
            if base.density.is_zero() {
                return Ok(Triplet::new(base.drift + lambda * c, c, base.density));
            }
            let density = base.density.esscher(lambda)?;
            let shift: f64 = integrate_levy(
                &base.density,
                |x| truncation(x) * (lambda * x).exp_m1(),
                IntegrandClass::Quadratic,
                cfg,
            )
            .map_err(integrability)?;
            Ok(Triplet::new(base.drift + lambda * c + shift, c, density))
        }
        w => {
            if base.density.is_zero() {
                return Ok(Triplet::new(base.drift + g.beta * c, c, base.density));
            }
            let shift: f64 = integrate_levy(
                &base.density,
                |x| truncation(x) * (w.eval(x) - 1.0),
                IntegrandClass::Quadratic,
                cfg,
            )
            .map_err(integrability)?;
            Ok(Triplet {
                drift: base.drift + g.beta * c + shift,
                diffusion: c,
                density: base.density,
                weight: w,
            })
        }
    }
}

/// Solves for the selected martingale measure.
pub fn girsanov_for(
    selector: &MeasureSelector,
    model: &LevyModel,
    cfg: &QuadratureConfig,
) -> Result<MeasureSolution> {
    let r = selector.rate;
    let (girsanov, solver, violation) = match selector.kind {
        MeasureKind::Esscher => {
            let rep = esscher_lambda(model, r, cfg)?;
            (GirsanovPair::esscher(rep.root), rep, None)
        }
        MeasureKind::Memm => {
            let rep = memm_lambda(model, r, cfg)?;
            (GirsanovPair::memm(rep.root), rep, None)
        }
        MeasureKind::Fq(q) => {
            let sol = fq_parameters(model, q, r, cfg)?;
            (sol.girsanov, sol.solver, sol.support_violation)
        }
    };
    Ok(MeasureSolution {
        selector: *selector,
        girsanov,
        solver,
        support_ok: violation.is_none(),
        support_violation: violation,
    })
}

/// `b^Q + ½c^Q + ∫(e^x − 1 − l(x))dν^Q − r`; zero when `e^{-rt}S_t` is a
/// martingale under the triplet's law.
pub fn martingale_residual(t: &Triplet, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let jumps: f64 = t.integrate(
        |x: f64| x.exp_m1() - truncation(x),
        IntegrandClass::Quadratic,
        cfg,
    )?;
    Ok(t.drift + 0.5 * t.diffusion + jumps - r)
}

/// Convenience: solve and return the risk-neutral law in one step.
pub fn risk_neutral_triplet(
    selector: &MeasureSelector,
    model: &LevyModel,
    cfg: &QuadratureConfig,
) -> Result<(MeasureSolution, Triplet)> {
    let sol = girsanov_for(selector, model, cfg)?;
    let t = tilted_triplet(model, &sol.girsanov, cfg)?;
    Ok((sol, t))
}
