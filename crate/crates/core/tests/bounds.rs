mod common;

use common::rng;
use hyperdisp_core::bounds::{
    decay_rate_fit, dense_norm, exponential_fit, power_law_fit, power_norm, sup_det, thm2_bound, thm3_bound,
    NormMethod, NormReport, PowerSettings, DEFAULT_SAMPLES,
};
use hyperdisp_core::linalg::DenseOperator;
use hyperdisp_core::scenarios::{ScenarioSpec, SCENARIO_NAMES};
use hyperdisp_core::Complex64;
use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};

fn nalgebra_norm(m: &DenseOperator) -> f64 {
    let a = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)]);
    a.singular_values().max()
}

#[test]
fn power_iteration_matches_svd_on_random_matrices() {
    for seed in 0..5 {
        let m = DenseOperator::random(200, 200, seed);
        let svd = nalgebra_norm(&m);
        let power = power_norm(&m, PowerSettings { tol: 1e-12, max_iter: 5000, seed }).unwrap();
        assert!(power.converged);
        assert!((power.value - svd).abs() <= 1e-5 * svd, "seed {seed}: {} vs {svd}", power.value);
        assert!((dense_norm(&m).value - svd).abs() <= 1e-10 * svd);
    }
}

#[test]
fn dense_norm_matches_svd_on_rectangular_matrices() {
    for (r, c, seed) in [(30, 70, 1), (90, 12, 2), (1, 40, 3)] {
        let m = DenseOperator::random(r, c, seed);
        let svd = nalgebra_norm(&m);
        assert!((m.spectral_norm() - svd).abs() <= 1e-10 * svd);
        let rr = m.qr_r_factor();
        if r >= c {
            assert!((rr.spectral_norm() - svd).abs() <= 1e-10 * svd);
        }
    }
}

#[test]
fn power_iteration_reports_non_convergence() {
    // two equal top singular values with an adversarially tight budget
    let d: Vec<Complex64> = [1.0, 1.0 - 1e-9, 0.5].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let m = DenseOperator::from_diagonal(&d);
    let est = power_norm(&m, PowerSettings { tol: 1e-16, max_iter: 3, seed: 0 }).unwrap();
    assert!(!est.converged);
    assert!(est.value <= 1.0 + 1e-12);
}

#[test]
fn sampled_suprema_are_stable_under_refinement() {
    for name in SCENARIO_NAMES {
        let s = ScenarioSpec::preset(name).unwrap().build(1e-2, 8).unwrap();
        let coarse = sup_det(&s.chain, 8, &s.omega2_tilde, DEFAULT_SAMPLES).unwrap();
        let fine = sup_det(&s.chain, 8, &s.omega2_tilde, 4 * DEFAULT_SAMPLES).unwrap();
        assert!(fine >= coarse * (1.0 - 1e-12));
        assert!((fine - coarse) <= 1e-3 * fine, "{name}: {coarse} vs {fine}");
    }
}

#[test]
fn block_bound_improves_by_the_expected_factor() {
    let spec = ScenarioSpec::preset("surface_model").unwrap();
    for hbar in [1e-2, 5e-3] {
        let s = spec.build(hbar, 6).unwrap();
        for n in [2, 4, 6] {
            let t2 = thm2_bound(&s.chain, hbar, n, &s.omega2_tilde, DEFAULT_SAMPLES).unwrap();
            let t3 = thm3_bound(&s.chain, hbar, n, &s.omega2_tilde, DEFAULT_SAMPLES).unwrap();
            // p̃ is the identity, so the infimum is 1
            let want = (2.0 * std::f64::consts::PI * hbar / s.omega2_tilde.volume()).sqrt();
            assert!((t3 / t2 - want).abs() < 1e-12);
        }
    }
    let s = ScenarioSpec::preset("isotropic_contraction").unwrap().build(1e-2, 2).unwrap();
    assert!(thm3_bound(&s.chain, 1e-2, 2, &s.omega2_tilde, 8).is_err());
}

#[test]
fn identity_bound_with_no_block_is_one() {
    let s = ScenarioSpec::preset("identity").unwrap().build(1e-2, 3).unwrap();
    let t3 = thm3_bound(&s.chain, 1e-2, 3, &s.omega2_tilde, 16).unwrap();
    assert!((t3 - 1.0).abs() < 1e-15);
}

#[test]
fn measured_norms_respect_the_trivial_bound() {
    let settings = PowerSettings::default();
    for name in SCENARIO_NAMES {
        let spec = ScenarioSpec::preset(name).unwrap();
        for hbar in [2e-2, 1e-2] {
            let s = spec.build(hbar, 6).unwrap();
            for r in s.norm_reports(&[1, 3, 6], NormMethod::DenseSvd, settings, 32).unwrap() {
                assert!(r.measured_norm <= r.trivial_bound * (1.0 + 1e-10), "{name} {r:?}");
            }
        }
    }
}

#[test]
fn noisy_exponential_recovers_its_rate() {
    let mut r = rng(40);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let slope = -0.175;
    let mut hits = 0;
    for _ in 0..200 {
        let pts: Vec<(f64, f64)> = (1..=20)
            .map(|n| {
                let n = n as f64;
                (n, (0.3 + slope * n + noise.sample(&mut r)).exp())
            })
            .collect();
        let fit = exponential_fit(&pts).unwrap();
        // standard error of an OLS slope with σ = 0.05 over n = 1..20
        let sxx: f64 = (1..=20).map(|n| (n as f64 - 10.5).powi(2)).sum();
        let se = 0.05 / sxx.sqrt();
        if (fit.slope - slope).abs() <= 2.0 * se {
            hits += 1;
        }
    }
    // about 95% of fits fall within 2σ
    assert!(hits >= 180, "{hits} of 200 within 2σ");
}

#[test]
fn power_law_fit_is_exact_on_monomials() {
    let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|&h| (h, 3.0 * h.powf(0.95))).collect();
    let fit = power_law_fit(&pts).unwrap();
    assert!((fit.slope - 0.95).abs() < 1e-12);
}

#[test]
fn contraction_decay_rate_near_half_the_exponent() {
    let spec = ScenarioSpec::preset("isotropic_contraction").unwrap();
    let hbar = 1e-2;
    let s = spec.build(hbar, 30).unwrap();
    let ns: Vec<usize> = (1..=30).collect();
    let reports = s.norm_reports(&ns, NormMethod::DenseSvd, PowerSettings::default(), DEFAULT_SAMPLES).unwrap();
    for r in &reports {
        assert!(r.measured_norm <= r.thm2_bound, "{r:?}");
    }
    let tail: Vec<NormReport> = reports
        .into_iter()
        .filter(|r| r.thm2_bound < 0.5 * r.trivial_bound)
        .collect();
    let fit = decay_rate_fit(&tail).unwrap();
    assert!((fit.slope + 0.175).abs() <= 0.15 * 0.175, "slope {}", fit.slope);
}
