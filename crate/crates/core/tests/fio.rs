mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{random_wave, rel_diff, rng};
use hyperdisp_core::bounds::{single_operator_norm, PowerSettings};
use hyperdisp_core::dynamics::{LinearMap, MomentumMap, QuadraticPhase};
use hyperdisp_core::fio::{FioChain, FioOperator};
use hyperdisp_core::grid::{inner_product, l2_norm, plane_wave, GridSpec, Wavefunction};
use hyperdisp_core::linalg::{hermitian_eigenvalues, SmallMatrix, Vector};
use hyperdisp_core::scenarios::{ScenarioSpec, SCENARIO_NAMES};
use hyperdisp_core::symbols::{CutoffBox, SymbolSpec};
use hyperdisp_core::{Complex64, Error};

/// `p(θ) = θ / (1 + θ²/10)` with `α(θ) = 0.3 sin θ`.
struct Saturating;

impl MomentumMap for Saturating {
    fn dim(&self) -> usize {
        1
    }
    fn p(&self, xi: &Vector) -> Vector {
        Vector::from_slice(&[xi[0] / (1.0 + 0.1 * xi[0] * xi[0])])
    }
    fn grad_p(&self, xi: &Vector) -> SmallMatrix {
        let q = 1.0 + 0.1 * xi[0] * xi[0];
        SmallMatrix::from_rows(&[&[(1.0 - 0.1 * xi[0] * xi[0]) / (q * q)]])
    }
    fn alpha(&self, xi: &Vector) -> f64 {
        0.3 * xi[0].sin()
    }
    fn grad_alpha(&self, xi: &Vector) -> Vector {
        Vector::from_slice(&[0.3 * xi[0].cos()])
    }
}

fn saturating_operator() -> FioOperator {
    let grid = GridSpec::new(1, 2.0, 128, 0.02).unwrap();
    let symbol = SymbolSpec::new(
        CutoffBox::from_bounds(&[-1.2], &[1.1]).unwrap(),
        CutoffBox::from_bounds(&[-1.0], &[1.2]).unwrap(),
    )
    .unwrap()
    .with_input_cutoff(CutoffBox::from_bounds(&[-1.5], &[1.4]).unwrap())
    .unwrap()
    .with_gain(Complex64::from_polar(0.9, 0.4))
    .unwrap();
    FioOperator::new(Arc::new(Saturating), symbol, grid).unwrap()
}

fn cutoff_operator(grid: GridSpec, x: f64, xi: f64) -> FioOperator {
    let d = grid.dim();
    let symbol = SymbolSpec::new(
        CutoffBox::from_bounds(&vec![-x; d], &vec![x; d]).unwrap(),
        CutoffBox::from_bounds(&vec![-xi; d], &vec![xi; d]).unwrap(),
    )
    .unwrap();
    FioOperator::new(Arc::new(LinearMap::identity(grid.dim())), symbol, grid).unwrap()
}

/// The defining double integral, discretized by the lattice rule in both
/// `x` and `θ` and summed term by term.
fn double_quadrature(op: &FioOperator, f: &Wavefunction) -> Vec<Complex64> {
    let grid = *op.grid();
    let map = op.map();
    let symbol = op.symbol();
    let h = grid.hbar();
    let pref = grid.dx() * grid.dxi() / (2.0 * PI * h);
    (0..grid.len())
        .map(|i| {
            let xp = grid.position(i);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..grid.len() {
                let theta = grid.momentum(k);
                if symbol.momentum_weight(&theta) == 0.0 {
                    continue;
                }
                let amp = map.grad_p(&theta).determinant().sqrt();
                let outer = map.p(&theta).dot(&xp) + map.alpha(&theta);
                for j in 0..grid.len() {
                    let x = grid.position(j);
                    let s = outer - theta.dot(&x);
                    acc += Complex64::from_polar(amp, s / h) * symbol.a0(&x, &xp, &theta) * f.values()[j];
                }
            }
            acc * pref
        })
        .collect()
}

#[test]
fn fast_path_matches_double_quadrature() {
    let op = saturating_operator();
    let mut r = rng(30);
    for _ in 0..50 {
        let f = random_wave(&mut r, *op.grid());
        let fast = op.apply(&f).unwrap();
        let slow = double_quadrature(&op, &f);
        assert!(rel_diff(fast.values(), &slow) < 1e-8);
    }
}

#[test]
fn lattice_plane_wave_has_closed_form_image() {
    let op = saturating_operator();
    let grid = *op.grid();
    for target in [-0.6, 0.05, 0.9] {
        let k = grid.nearest_momentum_index(&Vector::from_slice(&[target])).unwrap();
        let xi0 = grid.momentum(k);
        // x-independent amplitude: drop the input cutoff
        let symbol = op.symbol().without_input_cutoff();
        let free = FioOperator::new(Arc::new(Saturating), symbol, grid).unwrap();
        let g = free.apply(&plane_wave(grid, &xi0).unwrap()).unwrap();
        let det = Saturating.grad_p(&xi0).determinant();
        let p = Saturating.p(&xi0);
        for i in 0..grid.len() {
            let x = grid.position(i);
            let phase = (p.dot(&x) + Saturating.alpha(&xi0)) / grid.hbar();
            let want = Complex64::from_polar(det.sqrt(), phase) * symbol.a0(&x, &x, &xi0);
            assert!((g.values()[i] - want).norm() < 1e-10);
        }
    }
}

#[test]
fn identity_map_returns_cut_plane_wave() {
    let grid = GridSpec::new(1, 2.0, 256, 0.01).unwrap();
    let op = cutoff_operator(grid, 1.2, 1.5);
    let xi0 = grid.momentum(grid.nearest_momentum_index(&Vector::from_slice(&[0.4])).unwrap());
    let f = plane_wave(grid, &xi0).unwrap();
    let g = op.apply(&f).unwrap();
    for i in 0..grid.len() {
        let x = grid.position(i);
        if op.symbol().output_cutoff().plateau().contains(&x) {
            assert!((g.values()[i] - f.values()[i]).norm() < 1e-6);
        }
    }
}

#[test]
fn adjoint_is_the_conjugate_transpose() {
    let mut r = rng(31);
    let op = saturating_operator();
    let grid = *op.grid();
    for _ in 0..20 {
        let (f, g) = (random_wave(&mut r, grid), random_wave(&mut r, grid));
        let lhs = inner_product(&op.apply(&f).unwrap(), &g).unwrap();
        let rhs = inner_product(&f, &op.adjoint_apply(&g).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * l2_norm(&f) * l2_norm(&g));
    }
    let dense = op.to_dense().unwrap();
    let g = random_wave(&mut r, grid);
    let via_dense = dense.adjoint().apply(g.values());
    assert!(rel_diff(op.adjoint_apply(&g).unwrap().values(), &via_dense) < 1e-12);
    let (n, n_adj) = (dense.spectral_norm(), dense.adjoint().spectral_norm());
    assert!((n - n_adj).abs() < 1e-10 * n);
}

#[test]
fn identity_adjoint_flips_the_phase() {
    let grid = GridSpec::new(1, 2.0, 256, 0.01).unwrap();
    let with_phase = |c: f64| {
        let map = LinearMap::new(SmallMatrix::identity(1), QuadraticPhase::zero(1).with_offset(c)).unwrap();
        let symbol = SymbolSpec::new(
            CutoffBox::from_bounds(&[-1.0], &[1.0]).unwrap(),
            CutoffBox::from_bounds(&[-1.0], &[1.0]).unwrap(),
        )
        .unwrap();
        FioOperator::new(Arc::new(map), symbol, grid).unwrap()
    };
    let forward = with_phase(0.37);
    let dense_adj = forward.to_dense().unwrap().adjoint();
    let k = grid.nearest_momentum_index(&Vector::from_slice(&[0.3])).unwrap();
    let e = plane_wave(grid, &grid.momentum(k)).unwrap();
    let adj = forward.adjoint_apply(&e).unwrap();
    assert!(rel_diff(adj.values(), &dense_adj.apply(e.values())) < 1e-12);
    let want = with_phase(-0.37).apply(&e).unwrap();
    // the two differ by the commutator [c(D), v], small but not spectrally
    // small: the cutoffs' Fourier tails decay like exp(-C√k)
    for i in 0..grid.len() {
        if grid.position(i)[0].abs() < 0.6 {
            assert!((adj.values()[i] - want.values()[i]).norm() < 1e-3);
        }
    }
}

#[test]
fn dense_matrix_matches_apply() {
    let mut r = rng(32);
    let ops = [
        saturating_operator(),
        ScenarioSpec::preset("surface_model").unwrap().build(1e-2, 2).map(|s| {
            FioChain::build(&s.chain, &s.symbols, s.grid, 1).unwrap().operators()[0].as_ref().clone()
        }).unwrap(),
    ];
    for op in &ops {
        let dense = op.to_dense().unwrap();
        for _ in 0..5 {
            let f = random_wave(&mut r, *op.grid());
            assert!(rel_diff(&dense.apply(f.values()), op.apply(&f).unwrap().values()) < 1e-12);
        }
    }
}

#[test]
fn cutoff_operator_is_nearly_a_projector() {
    let grid = GridSpec::new(1, 1.5, 256, 1e-2).unwrap();
    let op = cutoff_operator(grid, 1.0, 2.0);
    let m = op.to_dense().unwrap();
    let herm = m.add(&m.adjoint()).unwrap().scale(Complex64::new(0.5, 0.0));
    let eig = hermitian_eigenvalues(&herm);
    let (lo, hi) = eig.iter().fold((f64::MAX, f64::MIN), |(a, b), &e| (a.min(e), b.max(e)));
    assert!(lo >= -0.05 && hi <= 1.05, "spectrum [{lo}, {hi}]");
}

#[test]
fn nested_cutoff_steps_collapse() {
    let grid = GridSpec::new(1, 2.0, 256, 1e-2).unwrap();
    let inner = Arc::new(cutoff_operator(grid, 0.8, 1.0));
    let outer = Arc::new(cutoff_operator(grid, 1.5, 1.9));
    let chain = FioChain::new(vec![Arc::clone(&inner), outer]).unwrap();
    let diff = chain.to_dense().unwrap().sub(&inner.to_dense().unwrap()).unwrap();
    assert!(diff.spectral_norm() < 1e-3, "{}", diff.spectral_norm());
}

#[test]
fn single_step_chain_equals_apply() {
    let op = Arc::new(saturating_operator());
    let chain = FioChain::new(vec![Arc::clone(&op)]).unwrap();
    let f = random_wave(&mut rng(33), *op.grid());
    assert_eq!(chain.chain_apply(&f).unwrap(), op.apply(&f).unwrap());
}

#[test]
fn chain_norm_is_submultiplicative() {
    let s = ScenarioSpec::preset("isotropic_contraction").unwrap().build(1e-2, 4).unwrap();
    let chain = FioChain::build(&s.chain, &s.symbols, s.grid, 4).unwrap();
    let settings = PowerSettings::default();
    let product: f64 = chain
        .operators()
        .iter()
        .map(|op| single_operator_norm(op, settings).unwrap().value)
        .product();
    let mut r = rng(34);
    for _ in 0..5 {
        let f = random_wave(&mut r, s.grid);
        assert!(l2_norm(&chain.chain_apply(&f).unwrap()) <= product * l2_norm(&f) * (1.0 + 1e-12));
    }
}

#[test]
fn operator_norms_stay_near_one() {
    let settings = PowerSettings::default();
    let mut checked = 0;
    for name in SCENARIO_NAMES {
        let spec = ScenarioSpec::preset(name).unwrap();
        for hbar in [1e-1, 3e-2, 1e-2, 3e-3, 1e-3] {
            let Ok(s) = spec.build(hbar, 2) else { continue };
            let chain = FioChain::build(&s.chain, &s.symbols, s.grid, 2).unwrap();
            for op in chain.operators() {
                let norm = single_operator_norm(op, settings).unwrap().value;
                assert!(norm <= 1.0 + 5.0 * hbar, "{name} at ħ = {hbar}: {norm}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 8, "only {checked} scenario/ħ pairs admitted");
}

#[test]
fn large_grids_refuse_dense_form() {
    let grid = GridSpec::new(2, 2.0, 128, 0.05).unwrap();
    let op = cutoff_operator(grid, 1.0, 1.0);
    assert!(matches!(op.to_dense(), Err(Error::SizeGuard { .. })));
}

#[test]
fn compressed_norms_match_full_matrices() {
    let grid = *saturating_operator().grid();
    let a = Arc::new(saturating_operator());
    let b = Arc::new(cutoff_operator(grid, 1.3, 1.1));
    let chain = FioChain::new(vec![Arc::clone(&a), Arc::clone(&b), Arc::clone(&b), Arc::clone(&a)]).unwrap();
    let norms = chain.prefix_norms(&[1, 2, 4]).unwrap();
    for (k, got) in [1, 2, 4].into_iter().zip(norms) {
        let prefix = FioChain::new(chain.operators()[..k].to_vec()).unwrap();
        let want = prefix.to_dense().unwrap().spectral_norm();
        assert!((got - want).abs() < 1e-10 * want, "k = {k}: {got} vs {want}");
    }
    let (c, full) = (a.compressed().unwrap(), a.to_dense().unwrap());
    assert!((c.spectral_norm() - full.spectral_norm()).abs() < 1e-10);
    assert!((c.frobenius_norm() - full.frobenius_norm()).abs() < 1e-10);

    let grid2 = GridSpec::new(2, 1.0, 16, 0.05).unwrap();
    let op2 = Arc::new(cutoff_operator(grid2, 0.6, 0.8));
    let chain2 = FioChain::new(vec![Arc::clone(&op2), op2]).unwrap();
    let got = chain2.prefix_norms(&[2]).unwrap()[0];
    let want = chain2.to_dense().unwrap().spectral_norm();
    assert!((got - want).abs() < 1e-10 * want);
    assert!(chain2.prefix_norms(&[2, 1]).is_err());
    assert!(chain2.prefix_norms(&[3]).is_err());
}
