use levystab::estimation::theoretical_cumulants;
use levystab::levy::{LevyModel, QuadratureConfig};
use num_complex::Complex64;

fn models() -> Vec<LevyModel> {
    vec![
        LevyModel::black_scholes(0.07, 0.04).unwrap(),
        LevyModel::variance_gamma(0.03, 0.0, 1.0, 4.0, 6.0).unwrap(),
        LevyModel::gmy(-0.1, 0.01, 1.0, 5.0, 0.5).unwrap(),
        LevyModel::cgmy(0.02, 0.0, 1.0, 4.0, 6.0, 0.5).unwrap(),
        LevyModel::cgmy(0.02, 0.0, 0.3, 4.0, 6.0, 1.5).unwrap(),
        LevyModel::cgmy(0.05, 0.02, 2.0, 3.0, 7.0, -0.5).unwrap(),
    ]
}

#[test]
fn exponent_is_hermitian_on_the_real_line() {
    let cfg = QuadratureConfig::default();
    for m in models() {
        let t = m.triplet();
        for j in 0..100 {
            let u = -30.0 + 60.0 * j as f64 / 99.0;
            let a = t.characteristic_exponent(Complex64::new(-u, 0.0), &cfg).unwrap();
            let b = t.characteristic_exponent(Complex64::new(u, 0.0), &cfg).unwrap().conj();
            assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()), "{m:?} u={u}");
            let qa = t.characteristic_exponent_quadrature(Complex64::new(-u, 0.0), &cfg).unwrap();
            let qb = t.characteristic_exponent_quadrature(Complex64::new(u, 0.0), &cfg).unwrap().conj();
            assert!((qa - qb).norm() <= 1e-10 * (1.0 + qa.norm()), "{m:?} u={u}");
        }
    }
}

#[test]
fn cgmy_at_zero_index_is_variance_gamma() {
    let cfg = QuadratureConfig::default();
    let vg = LevyModel::variance_gamma(0.1, 0.0, 1.3, 4.0, 6.0).unwrap().triplet();
    let cg = LevyModel::cgmy(0.1, 0.0, 1.3, 4.0, 6.0, 0.0).unwrap().triplet();
    for j in 0..50 {
        let u = Complex64::new(-20.0 + 0.8 * j as f64, 0.0);
        let a = vg.characteristic_exponent(u, &cfg).unwrap();
        let b = cg.characteristic_exponent(u, &cfg).unwrap();
        assert!((a - b).norm() <= 1e-10, "u={u}");
    }
}

/// `κ_n = n!/ρⁿ · mean_j K(ρe^{iθ_j}) e^{−inθ_j}`: Cauchy's formula on a
/// circle inside the strip, with `K(z) = ψ(−iz)` by quadrature.
fn contour_cumulants(m: &LevyModel) -> [f64; 4] {
    let cfg = QuadratureConfig::precise();
    let t = m.triplet();
    let dom = t.exp_moment_domain();
    let rho = 0.5 * dom.upper.min(-dom.lower).min(4.0);
    let points = 64;
    let mut k = [0.0; 4];
    let mut sums = [Complex64::new(0.0, 0.0); 4];
    for j in 0..points {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / points as f64;
        let z = Complex64::from_polar(rho, theta);
        let psi = t.characteristic_exponent_quadrature(-Complex64::i() * z, &cfg).unwrap();
        for (n, s) in sums.iter_mut().enumerate() {
            *s += psi * Complex64::from_polar(1.0, -((n + 1) as f64) * theta);
        }
    }
    let mut fact = 1.0;
    for n in 0..4 {
        fact *= (n + 1) as f64;
        k[n] = fact / rho.powi(n as i32 + 1) * sums[n].re / points as f64;
    }
    k
}

#[test]
fn closed_form_cumulants_match_contour_derivatives() {
    let cfg = QuadratureConfig::precise();
    for m in models() {
        let closed = theoretical_cumulants(&m, &cfg).unwrap();
        let oracle = contour_cumulants(&m);
        for n in 0..4 {
            let scale = closed[n].abs().max(1e-6 * closed[1].abs());
            let rel = (closed[n] - oracle[n]).abs() / scale;
            assert!(rel <= 1e-6, "{m:?} k{}: {} vs {} ({rel:.2e})", n + 1, closed[n], oracle[n]);
        }
    }
}
