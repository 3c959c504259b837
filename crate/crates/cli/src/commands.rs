use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use levystab::bounds::{
    consistent_tilde, convergence_curve_cor3, parametric_bound_thm2, stability_report, ConvergencePlan, ModelPair,
};
use levystab::estimation::{cumulant_estimator, estimator_distribution, quantile, EstimatorReport, ReturnSample};
use levystab::levy::{Family, LevyModel};
use levystab::measure_change::{
    girsanov_for, martingale_residual, memm_sign_classify, tilted_triplet, MeasureKind,
};
use levystab::pricing::{cf_price, mc_price, payoff_growth, price_gap, Payoff};
use levystab::Error;

use crate::config::{EstimatorChoice, Experiment, ExperimentConfig, PriceMethodChoice};

/// Failure of a command, with its process exit status.
#[derive(Debug)]
pub struct CliError {
    pub status: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            status: 4,
            kind: "config",
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            status: 1,
            kind: "io",
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (status, kind) = match e {
            Error::NoSolution(_) => (2, "no_solution"),
            Error::NonEquivalent(_) => (3, "non_equivalent"),
            Error::Integrability(_) | Error::Divergence(_) => (3, "integrability"),
            Error::InvalidParameter(_) => (4, "config"),
            _ => (1, "error"),
        };
        Self {
            status,
            kind,
            message: e.to_string(),
        }
    }
}

/// A table with the exact CSV header of its experiment.
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cfg.experiment {
        Experiment::Calibrate => calibrate(cfg),
        Experiment::Bound => bound(cfg),
        Experiment::Price => price(cfg),
        Experiment::StabilityPair => stability(cfg),
        Experiment::ParametricBound => parametric(cfg),
        Experiment::Convergence => convergence(cfg),
    }
}

fn calibrate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sel = cfg.selector().map_err(CliError::config)?;
    let q = &cfg.quadrature;
    let sign = match sel.kind {
        MeasureKind::Memm => Some(memm_sign_classify(&cfg.model, sel.rate, q)),
        _ => None,
    };
    let sol = girsanov_for(&sel, &cfg.model, q)?;
    let tilted = tilted_triplet(&cfg.model, &sol.girsanov, q)?;
    let residual = martingale_residual(&tilted, sel.rate, q)?;
    Ok(Outcome {
        result: json!({
            "lambda": sol.girsanov.beta,
            "martingale_residual": residual,
            "lambda_sign": sign.as_ref().map(|s| to_value(&s.lambda_sign)),
            "sign_rule": sign.as_ref().map(|s| s.rule_applied.clone()),
            "solution": to_value(&sol),
            "tilted_triplet": to_value(&tilted),
        }),
        table: None,
    })
}

fn bound(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sel = cfg.selector().map_err(CliError::config)?;
    let growth = match cfg.payoff {
        Some(p) => payoff_growth(&p)?,
        None => levystab::bounds::Growth::new(1.0, 0.0)?,
    };
    let tilde = cfg.model_tilde().map_err(CliError::config)?;
    let pair = ModelPair::new(cfg.model, tilde, sel, cfg.maturity)?;
    let report = stability_report(&pair, growth, &cfg.quadrature)?;
    Ok(Outcome {
        result: to_value(&report),
        table: None,
    })
}

fn price(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sel = cfg.selector().map_err(CliError::config)?;
    let q = &cfg.quadrature;
    let payoff = Payoff::try_from(cfg.payoff().map_err(CliError::config)?)?;
    let (sol, t) = levystab::measure_change::risk_neutral_triplet(&sel, &cfg.model, q)?;
    let want_cf = cfg.price.method != PriceMethodChoice::Mc;
    let want_mc = cfg.price.method != PriceMethodChoice::Cf;
    let cf = if want_cf {
        Some(cf_price(&t, &payoff, cfg.maturity, sel.rate, &cfg.cos, q)?)
    } else {
        None
    };
    let (mc, mc_error) = if want_mc {
        match mc_price(&t, &payoff, cfg.maturity, sel.rate, &cfg.sim) {
            Ok(p) => (Some(p), None),
            // Tilted laws outside the simulable families are priced by CF only.
            Err(e @ Error::Unsupported(_)) if cfg.price.method == PriceMethodChoice::Both => {
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        (None, None)
    };
    Ok(Outcome {
        result: json!({
            "lambda": sol.girsanov.beta,
            "cf": cf.map(|p| to_value(&p)),
            "mc": mc.map(|p| to_value(&p)),
            "mc_error": mc_error,
        }),
        table: None,
    })
}

#[derive(Serialize)]
struct StabilityRow {
    param: String,
    delta: f64,
    gap: Option<f64>,
    stderr: Option<f64>,
    bound_thm1: Option<f64>,
    bound_cor1: Option<f64>,
    holds: Option<bool>,
    error: Option<String>,
}

fn perturbed(model: &LevyModel, index: usize, delta: f64) -> Result<LevyModel, Error> {
    let mut th = model.params();
    // Zero coordinates (a zero drift) get an additive step instead.
    th[index] = if th[index] == 0.0 { delta } else { th[index] * (1.0 + delta) };
    model.with_params(&th)
}

fn stability_row(cfg: &ExperimentConfig, name: &str, index: usize, delta: f64) -> StabilityRow {
    let mut row = StabilityRow {
        param: name.to_string(),
        delta,
        gap: None,
        stderr: None,
        bound_thm1: None,
        bound_cor1: None,
        holds: None,
        error: None,
    };
    let result = (|| -> Result<(), Error> {
        let sel = cfg.selector().map_err(Error::InvalidParameter)?;
        let q = &cfg.quadrature;
        let payoff = Payoff::try_from(cfg.payoff().map_err(Error::InvalidParameter)?)?;
        let growth = payoff.growth();
        let mut tilde = perturbed(&cfg.model, index, delta)?;
        let jumps = cfg.model.family() != Family::BlackScholes;
        if jumps && cfg.model.diffusion == 0.0 && name != "b" {
            // Keeps the pair equivalent; fails for scale changes, which
            // stay non-equivalent below.
            if let Ok(t) = consistent_tilde(&cfg.model, &tilde, q) {
                tilde = t;
            }
        }
        let pair = ModelPair::new(cfg.model, tilde, sel, cfg.maturity)?;
        let gap = price_gap(&pair, &payoff, &cfg.sim, &cfg.cos, q)?;
        row.gap = Some(gap.gap);
        row.stderr = Some(gap.stderr);
        match stability_report(&pair, growth, q) {
            Ok(r) => {
                let slack = 3.0 * gap.stderr;
                row.bound_thm1 = Some(r.bound_thm1);
                row.bound_cor1 = Some(r.bound_cor1);
                row.holds = Some(gap.gap <= r.bound_thm1 + slack && gap.gap <= r.bound_cor1 + slack);
            }
            Err(Error::NonEquivalent(m)) => row.error = Some(format!("not equivalent: {m}")),
            Err(e) => return Err(e),
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

fn stability(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.payoff().map_err(CliError::config)?;
    let names = cfg.model.family().param_names();
    let chosen: Vec<(usize, &str)> = if cfg.stability.params.is_empty() {
        names.iter().copied().enumerate().collect()
    } else {
        let mut v = Vec::new();
        for p in &cfg.stability.params {
            let i = names
                .iter()
                .position(|n| n == p)
                .ok_or_else(|| CliError::config(format!("unknown parameter '{p}' for {:?}", cfg.model.family())))?;
            v.push((i, names[i]));
        }
        v
    };
    let jobs: Vec<(usize, &str, f64)> = chosen
        .iter()
        .flat_map(|&(i, n)| cfg.stability.deltas.iter().map(move |&d| (i, n, d)))
        .collect();
    let rows: Vec<StabilityRow> = jobs
        .par_iter()
        .map(|&(i, n, d)| stability_row(cfg, n, i, d))
        .collect();
    let table = Table {
        header: &["param", "delta", "gap", "stderr", "bound_thm1", "bound_cor1", "holds"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.param.clone(),
                    r.delta.to_string(),
                    cell(r.gap),
                    cell(r.stderr),
                    cell(r.bound_thm1),
                    cell(r.bound_cor1),
                    r.holds.map(|h| h.to_string()).unwrap_or_default(),
                ]
            })
            .collect(),
    };
    Ok(Outcome {
        result: json!({ "rows": to_value(&rows) }),
        table: Some(table),
    })
}

fn oracle_estimate(model: &LevyModel, s: &ReturnSample) -> EstimatorReport {
    EstimatorReport {
        theta_hat: model.params(),
        n: s.len(),
        converged: true,
        residuals: vec![],
        iterations: 0,
    }
}

fn estimate_with(cfg: &ExperimentConfig, s: &ReturnSample) -> EstimatorReport {
    match cfg.estimation.estimator {
        EstimatorChoice::Cumulant => cumulant_estimator(s, &cfg.model, &cfg.quadrature),
        EstimatorChoice::Oracle => oracle_estimate(&cfg.model, s),
    }
}

fn parametric(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sel = cfg.selector().map_err(CliError::config)?;
    let growth = payoff_growth(&cfg.payoff().map_err(CliError::config)?)?;
    let est = &cfg.estimation;
    let n = est.sizes[0];
    let dist = estimator_distribution(&cfg.model, |s| estimate_with(cfg, s), n, est.batches, est.dt, cfg.sim.seed)?;
    let eps = est.eps.unwrap_or_else(|| quantile(&dist.errors(), est.coverage));
    let pb = parametric_bound_thm2(&cfg.model, &dist.estimates, eps, growth, sel, cfg.maturity, &cfg.quadrature)?;
    Ok(Outcome {
        result: json!({
            "n": n,
            "batches": est.batches,
            "failed_batches": dist.failed,
            "bound": to_value(&pb),
        }),
        table: None,
    })
}

fn convergence(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sel = cfg.selector().map_err(CliError::config)?;
    let spec = cfg.payoff().map_err(CliError::config)?;
    let growth = payoff_growth(&spec)?;
    let payoff = Payoff::try_from(spec)?;
    let est = &cfg.estimation;
    let plan = ConvergencePlan {
        sizes: est.sizes.clone(),
        batches: est.batches,
        dt: est.dt,
        seed: cfg.sim.seed,
        coverage: est.coverage,
    };
    let rows = convergence_curve_cor3(
        &cfg.model,
        |s| estimate_with(cfg, s),
        &payoff,
        growth,
        sel,
        cfg.maturity,
        &plan,
        &cfg.cos,
        &cfg.quadrature,
    )?;
    let table = Table {
        header: &["n", "eps_n", "sup_R_T", "bound", "empirical_gap", "stderr"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.eps.to_string(),
                    r.sup_r_t.to_string(),
                    r.bound.to_string(),
                    r.empirical_gap.to_string(),
                    r.stderr.to_string(),
                ]
            })
            .collect(),
    };
    Ok(Outcome {
        result: json!({ "rows": to_value(&rows) }),
        table: Some(table),
    })
}
