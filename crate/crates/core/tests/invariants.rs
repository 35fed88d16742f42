//! Property tests over randomly drawn inputs.

use std::sync::Arc;

use hyperdisp_core::cotlar::cotlar_stein_bound;
use hyperdisp_core::dynamics::{evolve_momentum, phase_cocycle, ChainSpec, LinearMap, MomentumMap, QuadraticPhase, SurfaceMap};
use hyperdisp_core::grid::{hbar_fourier, hbar_inverse_fourier, l2_norm, GridSpec, Representation, Wavefunction};
use hyperdisp_core::linalg::{DenseOperator, Vector};
use hyperdisp_core::scenarios::build_scenario;
use hyperdisp_core::symbols::{box_bump, leading_symbol_product, AxisBox};
use hyperdisp_core::Complex64;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn plancherel(
        points in prop::sample::select(vec![8usize, 16, 48, 64, 128]),
        half_width in 0.2f64..3.0,
        hbar in 1e-3f64..0.1,
        seed in any::<u64>(),
    ) {
        let g = GridSpec::new(1, half_width, points, hbar).unwrap();
        let v: Vec<Complex64> = DenseOperator::random(points, 1, seed).column(0);
        let f = Wavefunction::new(g, v, Representation::Position).unwrap();
        let fh = hbar_fourier(&f).unwrap();
        prop_assert!((l2_norm(&fh) - l2_norm(&f)).abs() <= 1e-12 * l2_norm(&f));
        let back = hbar_inverse_fourier(&fh).unwrap();
        let err: f64 = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = f.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * size);
    }

    #[test]
    fn bump_range(
        lo in -2.0f64..-0.2, hi in 0.2f64..2.0, fraction in 0.1f64..0.95, t in -3.0f64..3.0,
    ) {
        let support = AxisBox::new(&[lo], &[hi]).unwrap();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo) * fraction;
        let plateau = AxisBox::new(&[mid - half], &[mid + half]).unwrap();
        let v = box_bump(&Vector::from_slice(&[t]), &plateau, &support).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        if t <= lo || t >= hi {
            prop_assert_eq!(v, 0.0);
        }
        if (mid - half..=mid + half).contains(&t) {
            prop_assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn leading_symbol_is_bounded(
        x in prop::array::uniform2(-0.5f64..0.5),
        xi in prop::array::uniform2(-0.6f64..0.6),
        n in 1usize..8,
    ) {
        for name in ["surface_model", "block_root_model"] {
            let s = build_scenario(name, 1e-2, 8).unwrap();
            let xi0 = Vector::from_slice(&[xi[0], 0.5 + 0.1 * xi[1]]);
            let b = leading_symbol_product(&s.chain, &s.symbols, &Vector::from_slice(&x), &xi0, n).unwrap();
            prop_assert!(b.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn cotlar_bound_dominates_sums(
        rows in 1usize..30, cols in 1usize..30, k in 1usize..6, seed in any::<u64>(),
    ) {
        let family: Vec<DenseOperator> = (0..k as u64).map(|j| DenseOperator::random(rows, cols, seed ^ (j * 7919))).collect();
        let total = family[1..].iter().fold(family[0].clone(), |acc, a| acc.add(a).unwrap());
        let cs = cotlar_stein_bound(&family).unwrap();
        prop_assert!(total.spectral_norm() <= cs.bound * (1.0 + 1e-10));
    }

    #[test]
    fn cocycle_is_additive(
        xi in prop::array::uniform2(-1.0f64..1.0),
        split in 1usize..6,
        rest in 1usize..6,
        tau in 0.05f64..0.5,
        c in -1.0f64..1.0,
    ) {
        let surface: Arc<dyn MomentumMap> = Arc::new(SurfaceMap::new(tau, QuadraticPhase::isotropic(2, c)).unwrap());
        let linear: Arc<dyn MomentumMap> =
            Arc::new(LinearMap::diagonal(&[(-tau).exp(), 1.0], QuadraticPhase::isotropic(2, 0.5 * c)).unwrap());
        let head = ChainSpec::new(vec![Arc::clone(&linear); split]).unwrap();
        let tail = ChainSpec::new((0..rest).map(|j| if j % 2 == 0 { Arc::clone(&surface) } else { Arc::clone(&linear) }).collect()).unwrap();
        let whole = head.concat(&tail).unwrap();
        let xi0 = Vector::from_slice(&[xi[0], 0.6 + 0.2 * xi[1]]);
        let mid = evolve_momentum(&head, &xi0, split).unwrap()[split];
        let lhs = phase_cocycle(&whole, &xi0, split + rest).unwrap();
        let rhs = phase_cocycle(&head, &xi0, split).unwrap() + phase_cocycle(&tail, &mid, rest).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + lhs.abs()));
    }
}
