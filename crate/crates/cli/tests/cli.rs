use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

use levystab::bounds::{stability_report, Growth, ModelPair};
use levystab::levy::{LevyModel, QuadratureConfig};
use levystab::measure_change::MeasureSelector;

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, cfg: &Value) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, serde_json::to_vec_pretty(cfg).unwrap()).unwrap();
    p
}

fn run(config: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levystab"))
        .arg("--config")
        .arg(config)
        .args(extra)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn vg(b: f64, c: f64, m: f64, n: f64) -> Value {
    json!({"family": "vg", "b": b, "c": c, "params": {"C": 1.0, "M": m, "N": n}})
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn black_scholes_calibration_reports_the_closed_form() {
    let (b, c, r) = (0.07, 0.09, 0.02);
    let p = write_config(
        "bs_calibrate.json",
        &json!({"experiment": "calibrate", "model": {"family": "bs", "b": b, "c": c}, "selector": {"kind": "esscher"}, "rate": r}),
    );
    let v = report(&run(&p, &[]));
    let lambda = v["result"]["lambda"].as_f64().unwrap();
    assert!((lambda - ((r - b) / c - 0.5)).abs() < 1e-10);
    assert!(v["result"]["martingale_residual"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(v["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn memm_calibration_reports_a_negative_lambda_for_a_heavy_right_tail() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/calibrate_vg_memm.json");
    let v = report(&run(&cfg, &[]));
    assert_eq!(v["result"]["lambda_sign"], "negative");
    assert!(v["result"]["lambda"].as_f64().unwrap() < 0.0);
}

#[test]
fn one_sided_monotone_model_has_no_esscher_measure() {
    let p = write_config(
        "gmy_calibrate.json",
        &json!({"experiment": "calibrate",
                "model": {"family": "gmy", "b": 2.0, "c": 0.0, "params": {"C": 1.0, "N": 5.0, "alpha": 0.5}},
                "selector": {"kind": "esscher"}}),
    );
    let out = run(&p, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"], "no_solution");
}

fn bound_config(base: Value, tilde: Value) -> Value {
    json!({"experiment": "bound", "model": base, "model_tilde": tilde,
           "selector": {"kind": "esscher"}, "payoff": {"kind": "call", "strike": 1.0}})
}

#[test]
fn identical_models_give_a_zero_bound_report() {
    let p = write_config("bound_same.json", &bound_config(vg(0.0, 0.0, 5.0, 5.0), vg(0.0, 0.0, 5.0, 5.0)));
    let r = &report(&run(&p, &[]))["result"];
    for key in ["rho_QQ", "rho_PP", "U_T", "V_T", "R_T", "h_T_PP", "bound_thm1", "bound_cor1", "variation_bound_h1"] {
        assert_eq!(r[key].as_f64(), Some(0.0), "{key}");
    }
}

#[test]
fn bound_report_matches_the_library_exactly() {
    let base = LevyModel::variance_gamma(0.0, 0.01, 1.0, 5.0, 5.0).unwrap();
    let tilde = LevyModel::variance_gamma(0.0, 0.01, 1.0, 5.5, 4.8).unwrap();
    let p = write_config(
        "bound_vg.json",
        &bound_config(serde_json::to_value(base).unwrap(), serde_json::to_value(tilde).unwrap()),
    );
    let v = report(&run(&p, &[]));
    let pair = ModelPair::new(base, tilde, MeasureSelector::esscher(0.0), 1.0).unwrap();
    let lib = stability_report(&pair, Growth::new(1.0, 0.0).unwrap(), &QuadratureConfig::default()).unwrap();
    assert_eq!(v["result"], serde_json::to_value(&lib).unwrap());
}

#[test]
fn singular_and_nonintegrable_pairs_exit_with_status_three() {
    let p = write_config("bound_singular.json", &bound_config(vg(0.0, 0.0, 5.0, 5.0), vg(0.0, 0.0, 5.0, 6.0)));
    let out = run(&p, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["error"], "non_equivalent");

    let p = write_config("bound_tail.json", &bound_config(vg(0.0, 0.01, 5.0, 0.8), vg(0.0, 0.01, 5.0, 1.1)));
    let out = run(&p, &[]);
    assert_eq!(out.status.code(), Some(3));
    let e = error_of(&out);
    assert_eq!(e["error"], "integrability");
    assert!(e["message"].as_str().unwrap().contains("right tail"), "{e}");
}

#[test]
fn config_errors_exit_with_status_four() {
    let p = write_config("bad.json", &json!({"experiment": "bound", "model": vg(0.0, 0.0, 5.0, 5.0), "selector": {"kind": "esscher"}}));
    assert_eq!(run(&p, &[]).status.code(), Some(4));
    let p = write_config("typo.json", &json!({"experiment": "calibrate", "model": vg(0.0, 0.0, 5.0, 5.0), "selector": {"kind": "esscher"}, "ratee": 0.0}));
    assert_eq!(run(&p, &[]).status.code(), Some(4));
    let p = write_config("negm.json", &json!({"experiment": "calibrate", "model": vg(0.0, 0.0, -5.0, 5.0), "selector": {"kind": "esscher"}}));
    assert_eq!(run(&p, &[]).status.code(), Some(4));
    let p = write_config("calib.json", &json!({"experiment": "calibrate", "model": vg(0.0, 0.0, 5.0, 5.0), "selector": {"kind": "esscher"}}));
    assert_eq!(run(&p, &["--format", "csv"]).status.code(), Some(4));
    assert_eq!(run(&p, &["--set", "nonsense"]).status.code(), Some(4));
    assert_eq!(run(&p, &["--bogus"]).status.code(), Some(4));
    assert_eq!(run(Path::new("/nonexistent/config.json"), &[]).status.code(), Some(4));
}

#[test]
fn stability_sweep_writes_the_expected_csv() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/stability_vg.json");
    let out_path = scratch("stability.csv");
    let out = run(
        &cfg,
        &["--format", "csv", "--output", out_path.to_str().unwrap(), "--set", "stability.params=[\"M\",\"N\"]"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,delta,gap,stderr,bound_thm1,bound_cor1,holds"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert_eq!(r[6], "true", "{r:?}");
        if r[1] == "0" {
            assert_eq!(&r[2..6], &["0", "0", "0", "0"]);
        }
    }
    let meta: Value = serde_json::from_slice(&std::fs::read(scratch("stability.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "stability_pair");
    assert!(!text.contains('\r'));
}

#[test]
fn convergence_with_exact_estimates_has_zero_gap() {
    let p = write_config(
        "conv_oracle.json",
        &json!({"experiment": "convergence", "model": {"family": "bs", "b": 0.05, "c": 0.04},
                "selector": {"kind": "esscher"}, "payoff": {"kind": "call", "strike": 1.0},
                "estimation": {"estimator": "oracle", "sizes": [200], "batches": 4}}),
    );
    let out_path = scratch("conv_oracle.csv");
    let out = run(&p, &["--format", "csv", "--output", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text, "n,eps_n,sup_R_T,bound,empirical_gap,stderr\n200,0,0,0,0,0\n");
}

#[test]
fn reports_are_byte_identical_across_runs_and_seed_sensitive() {
    let p = write_config(
        "price_vg.json",
        &json!({"experiment": "price", "model": vg(0.0, 0.0, 5.0, 5.0), "selector": {"kind": "esscher"},
                "payoff": {"kind": "put", "strike": 1.0}, "sim": {"n_paths": 20000}}),
    );
    let (a, b) = (scratch("price_a.json"), scratch("price_b.json"));
    for o in [&a, &b] {
        assert_eq!(run(&p, &["--seed", "11", "--output", o.to_str().unwrap()]).status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = run(&p, &["--seed", "12"]).stdout;
    assert_ne!(std::fs::read(&a).unwrap(), c);
}
