mod common;

use std::sync::Arc;

use common::rng;
use hyperdisp_core::dynamics::{evolve_momentum, ChainSpec, LinearMap, MomentumMap, QuadraticPhase};
use hyperdisp_core::grid::{l2_norm, GridSpec, Wavefunction};
use hyperdisp_core::linalg::Vector;
use hyperdisp_core::symbols::{
    box_bump, leading_symbol_product, smoothstep, symbol_for, transfer_step, AxisBox, CutoffBox, SymbolSpec,
};
use hyperdisp_core::Complex64;
use rand::Rng;

fn wide_symbol(h: f64) -> SymbolSpec {
    let c = CutoffBox::from_bounds(&[-h], &[h]).unwrap();
    SymbolSpec::new(c, c).unwrap()
}

#[test]
fn bump_takes_values_in_unit_interval() {
    let mut r = rng(20);
    let support = AxisBox::new(&[-1.0, 0.0], &[2.0, 1.0]).unwrap();
    let plateau = AxisBox::new(&[-0.2, 0.3], &[1.0, 0.6]).unwrap();
    for _ in 0..10_000 {
        let p = Vector::from_slice(&[r.gen_range(-2.0..3.0), r.gen_range(-1.0..2.0)]);
        let v = box_bump(&p, &plateau, &support).unwrap();
        assert!((0.0..=1.0).contains(&v));
        if plateau.contains(&p) {
            assert_eq!(v, 1.0);
        }
        if !support.contains(&p) {
            assert_eq!(v, 0.0);
        }
    }
    assert!(smoothstep(0.3) > 0.0 && smoothstep(0.3) < smoothstep(0.31));
}

#[test]
fn unit_symbol_on_identity_map_keeps_ones() {
    let grid = GridSpec::new(1, 1.0, 64, 0.05).unwrap();
    let symbol = wide_symbol(0.9);
    let ones = Wavefunction::from_position_fn(grid, |_| Complex64::new(1.0, 0.0));
    let out = transfer_step(&LinearMap::identity(1), &symbol, &Vector::from_slice(&[0.1]), &ones).unwrap();
    for i in 0..grid.len() {
        let x = grid.position(i);
        let want = symbol.output_weight(&x);
        assert!((out.values()[i] - want).norm() < 1e-14);
        if x[0].abs() < 0.6 {
            assert!((out.values()[i].re - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn halving_map_rescales_a_linear_profile() {
    let grid = GridSpec::new(1, 1.0, 128, 0.05).unwrap();
    let map = LinearMap::diagonal(&[0.5], QuadraticPhase::zero(1)).unwrap();
    let symbol = wide_symbol(0.95);
    let b = Wavefunction::from_position_fn(grid, |x| Complex64::new(x[0], 0.0));
    let out = transfer_step(&map, &symbol, &Vector::from_slice(&[0.2]), &b).unwrap();
    for i in 0..grid.len() {
        let x = grid.position(i);
        if x[0].abs() < 0.6 {
            assert!((out.values()[i].re - x[0] / 2.0).abs() < 1e-13, "x' = {}", x[0]);
        }
    }
}

#[test]
fn transfer_with_jacobian_factor_is_unitary() {
    let tau: f64 = 0.35;
    let map = LinearMap::diagonal(&[(-tau).exp()], QuadraticPhase::isotropic(1, 0.3)).unwrap();
    let xi = Vector::from_slice(&[0.2]);
    let grid = GridSpec::new(1, 2.0, 512, 0.05).unwrap();
    let symbol = wide_symbol(1.8);
    // centred at x = ∇α(ξ) so the pullback window is symmetric
    let b = Wavefunction::from_position_fn(grid, |x| {
        let y = x[0] - 0.06;
        Complex64::new((-y * y / 0.02).exp(), (3.0 * y).sin() * (-y * y / 0.02).exp())
    });
    let out = transfer_step(&map, &symbol, &xi, &b).unwrap();
    let det = map.grad_p(&xi).determinant();
    let ratio = det.sqrt() * l2_norm(&out) / l2_norm(&b);
    assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio}");
}

#[test]
fn unit_jacobian_resampling_error_is_cubic() {
    // x = x' + α'(ξ): a pure shift that is not a multiple of the spacing
    let map = LinearMap::new(
        hyperdisp_core::linalg::SmallMatrix::identity(1),
        QuadraticPhase::isotropic(1, 0.37),
    )
    .unwrap();
    let xi = Vector::from_slice(&[0.5]);
    let shift = 0.185;
    let profile = |x: f64| (-(x * x) / 0.05).exp() * (4.0 * x).cos();
    let mut errors = Vec::new();
    for n in [64, 128, 256] {
        let grid = GridSpec::new(1, 1.5, n, 0.05).unwrap();
        let b = Wavefunction::from_position_fn(grid, |x| Complex64::new(profile(x[0]), 0.0));
        let out = transfer_step(&map, &wide_symbol(1.45), &xi, &b).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..grid.len() {
            let x = grid.position(i)[0];
            if x.abs() < 0.7 {
                err = err.max((out.values()[i].re - profile(x + shift)).abs());
            }
        }
        errors.push((grid.dx(), err));
    }
    for w in errors.windows(2) {
        let order = (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln();
        assert!(order >= 2.8, "observed order {order} from {errors:?}");
    }
}

fn two_step_fixture() -> (ChainSpec, Vec<SymbolSpec>) {
    let m1 = LinearMap::diagonal(&[0.8], QuadraticPhase::isotropic(1, 0.4)).unwrap();
    let m2 = LinearMap::diagonal(&[0.6], QuadraticPhase::isotropic(1, -0.2)).unwrap();
    let chain = ChainSpec::new(vec![Arc::new(m1) as Arc<dyn MomentumMap>, Arc::new(m2)]).unwrap();
    let s1 = SymbolSpec::new(
        CutoffBox::from_bounds(&[-0.7], &[0.8]).unwrap(),
        CutoffBox::from_bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap()
    .with_input_cutoff(CutoffBox::from_bounds(&[-0.6], &[0.5]).unwrap())
    .unwrap()
    .with_gain(Complex64::new(0.8, 0.0))
    .unwrap();
    let s2 = SymbolSpec::new(
        CutoffBox::from_bounds(&[-1.2], &[1.1]).unwrap(),
        CutoffBox::from_bounds(&[-0.9], &[0.9]).unwrap(),
    )
    .unwrap()
    .with_gain(Complex64::new(0.0, 0.6))
    .unwrap();
    (chain, vec![s1, s2])
}

#[test]
fn product_formula_matches_iterated_transfer() {
    let (chain, symbols) = two_step_fixture();
    let grid = GridSpec::new(1, 2.0, 1024, 0.05).unwrap();
    let xi0 = Vector::from_slice(&[0.7]);
    let orbit = evolve_momentum(&chain, &xi0, 2).unwrap();
    let ones = Wavefunction::from_position_fn(grid, |_| Complex64::new(1.0, 0.0));
    let b1 = transfer_step(chain.map(0), &symbols[0], &orbit[0], &ones).unwrap();
    let b2 = transfer_step(chain.map(1), &symbols[1], &orbit[1], &b1).unwrap();
    let mut peak: f64 = 0.0;
    for i in 0..grid.len() {
        let x2 = grid.position(i);
        let direct = leading_symbol_product(&chain, &symbols, &x2, &xi0, 2).unwrap();
        // cubic interpolation of the first step's cutoff ramps
        assert!((direct - b2.values()[i]).norm() < 1e-5, "x = {}", x2[0]);
        peak = peak.max(direct.norm());
    }
    // both gains reached on the plateaux
    assert!((peak - 0.48).abs() < 1e-12);
}

#[test]
fn later_steps_reuse_the_last_symbol() {
    let (_, symbols) = two_step_fixture();
    assert_eq!(symbol_for(&symbols, 0).unwrap(), &symbols[0]);
    assert_eq!(symbol_for(&symbols, 7).unwrap(), &symbols[1]);
    assert!(symbol_for(&[], 0).is_err());
}

#[test]
fn product_is_bounded_by_one() {
    let (chain, symbols) = two_step_fixture();
    let mut r = rng(21);
    for _ in 0..10_000 {
        let x = Vector::from_slice(&[r.gen_range(-2.0..2.0)]);
        let xi = Vector::from_slice(&[r.gen_range(-1.0..1.0)]);
        assert!(leading_symbol_product(&chain, &symbols, &x, &xi, 2).unwrap().norm() <= 1.0);
    }
}

#[test]
fn unit_symbols_give_unit_product() {
    let map = LinearMap::diagonal(&[0.9], QuadraticPhase::zero(1)).unwrap();
    let chain = ChainSpec::repeat(Arc::new(map), 4).unwrap();
    let symbols = [wide_symbol(5.0)];
    let v = leading_symbol_product(&chain, &symbols, &Vector::from_slice(&[0.3]), &Vector::from_slice(&[0.2]), 4).unwrap();
    assert_eq!(v, Complex64::new(1.0, 0.0));
}
