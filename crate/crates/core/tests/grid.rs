mod common;

use std::f64::consts::PI;

use common::{direct_fourier, random_wave, rel_diff, rng};
use hyperdisp_core::grid::{
    hbar_fourier, hbar_inverse_fourier, inner_product, l2_norm, plane_wave, GridSpec, Representation, Wavefunction,
};
use hyperdisp_core::{Complex64, Error, Vector};

#[test]
fn lattice_spacings_are_dual() {
    for (d, l, n, h) in [(1, 1.0, 64, 0.1), (2, 0.5, 48, 0.01), (3, 2.0, 8, 1.0)] {
        let g = GridSpec::new(d, l, n, h).unwrap();
        assert!((g.dx() * g.dxi() - 2.0 * PI * h / n as f64).abs() < 1e-15);
        assert!((g.momentum_limit() - PI * h * n as f64 / (2.0 * l)).abs() < 1e-12);
        assert_eq!(g.momentum_axis(n / 2), 0.0);
    }
    assert!(GridSpec::new(1, 1.0, 63, 0.1).is_err());
    assert!(GridSpec::new(4, 1.0, 8, 0.1).is_err());
    assert!(GridSpec::new(1, 1.0, 8, 0.0).is_err());
}

#[test]
fn plane_wave_values() {
    let g = GridSpec::new(1, PI, 8, 1.0).unwrap();
    let f = plane_wave(g, &Vector::from_slice(&[1.0])).unwrap();
    // x_6 = -π + 6π/4 = π/2
    assert!((f.values()[6] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    assert!((l2_norm(&f) - (2.0 * PI).sqrt()).abs() < 1e-12);

    let zero = plane_wave(g, &Vector::zeros(1)).unwrap();
    assert!(zero.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));

    let err = plane_wave(g, &Vector::from_slice(&[4.5])).unwrap_err();
    assert!(matches!(err, Error::MomentumAliasing { .. }));
}

#[test]
fn fast_transform_matches_defining_sum() {
    let mut r = rng(1);
    for g in [
        GridSpec::new(1, 1.5, 64, 0.05).unwrap(),
        GridSpec::new(1, 1.0, 48, 0.02).unwrap(),
        GridSpec::new(2, 0.5, 12, 0.03).unwrap(),
        GridSpec::new(3, 1.0, 4, 0.2).unwrap(),
    ] {
        let f = random_wave(&mut r, g);
        let fast = hbar_fourier(&f).unwrap();
        assert_eq!(fast.representation(), Representation::Momentum);
        assert!(rel_diff(fast.values(), &direct_fourier(&f)) < 1e-12);
    }
}

#[test]
fn plancherel_and_round_trip_on_random_inputs() {
    let mut r = rng(2);
    let g = GridSpec::new(1, 1.0, 128, 0.01).unwrap();
    for _ in 0..1000 {
        let f = random_wave(&mut r, g);
        let fh = hbar_fourier(&f).unwrap();
        assert!((l2_norm(&fh) - l2_norm(&f)).abs() <= 1e-12 * l2_norm(&f));
        let back = hbar_inverse_fourier(&fh).unwrap();
        assert!(rel_diff(back.values(), f.values()) < 1e-12);
    }
}

#[test]
fn transform_is_linear() {
    let mut r = rng(3);
    let g = GridSpec::new(2, 1.0, 16, 0.1).unwrap();
    let (f, h) = (random_wave(&mut r, g), random_wave(&mut r, g));
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.5));
    let mut combo = f.clone();
    combo.scale(a);
    combo.axpy(b, &h).unwrap();
    let lhs = hbar_fourier(&combo).unwrap();
    let (ff, fh) = (hbar_fourier(&f).unwrap(), hbar_fourier(&h).unwrap());
    let rhs: Vec<Complex64> = ff.values().iter().zip(fh.values()).map(|(x, y)| a * x + b * y).collect();
    assert!(rel_diff(lhs.values(), &rhs) < 1e-14);
}

#[test]
fn round_trip_preserves_inner_products() {
    let mut r = rng(4);
    let g = GridSpec::new(1, 2.0, 256, 0.02).unwrap();
    for _ in 0..20 {
        let (f, h) = (random_wave(&mut r, g), random_wave(&mut r, g));
        let direct = inner_product(&f, &h).unwrap();
        let dual = inner_product(&hbar_fourier(&f).unwrap(), &hbar_fourier(&h).unwrap()).unwrap();
        assert!((direct - dual).norm() < 1e-12 * l2_norm(&f) * l2_norm(&h));
    }
}

#[test]
fn gaussian_is_self_dual() {
    for h in [0.01, 0.004] {
        let l = 10.0 * f64::sqrt(h);
        let g = GridSpec::new(1, l.max(1.0), 256, h).unwrap();
        let gauss = |v: &Vector| Complex64::new((-v.dot(v) / (2.0 * h)).exp(), 0.0);
        let f = Wavefunction::from_position_fn(g, gauss);
        let fh = hbar_fourier(&f).unwrap();
        let want = Wavefunction::from_momentum_fn(g, gauss);
        let err = fh.values().iter().zip(want.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "ħ = {h}: {err:e}");
    }
    let g = GridSpec::new(2, 1.0, 64, 0.01).unwrap();
    let gauss = |v: &Vector| Complex64::new((-v.dot(v) / 0.02).exp(), 0.0);
    let fh = hbar_fourier(&Wavefunction::from_position_fn(g, gauss)).unwrap();
    let want = Wavefunction::from_momentum_fn(g, gauss);
    assert!(rel_diff(fh.values(), want.values()) < 1e-8);
}

#[test]
fn lattice_plane_wave_is_a_single_spike() {
    let g = GridSpec::new(1, 1.0, 64, 0.05).unwrap();
    let k = 40;
    let xi0 = g.momentum(k);
    let fh = hbar_fourier(&plane_wave(g, &xi0).unwrap()).unwrap();
    // (2πℏ)^{-1/2} N Δx = (2L)^{1/2} / Δξ^{1/2}
    let peak = (2.0 * g.half_width()).sqrt() / g.dxi().sqrt();
    for (j, v) in fh.values().iter().enumerate() {
        let want = if j == k { peak } else { 0.0 };
        assert!((v.norm() - want).abs() < 1e-10, "index {j}");
    }

    let spike = Wavefunction::new(
        g,
        (0..g.len()).map(|j| Complex64::new(if j == k { 1.0 } else { 0.0 }, 0.0)).collect(),
        Representation::Momentum,
    )
    .unwrap();
    let back = hbar_inverse_fourier(&spike).unwrap();
    let pw = plane_wave(g, &xi0).unwrap();
    let c = back.values()[0] / pw.values()[0];
    for (a, b) in back.values().iter().zip(pw.values()) {
        assert!((a - c * b).norm() < 1e-14);
    }
}

#[test]
fn distinct_lattice_plane_waves_are_orthogonal() {
    let g = GridSpec::new(2, 0.5, 16, 0.04).unwrap();
    let a = plane_wave(g, &g.momentum(37)).unwrap();
    let b = plane_wave(g, &g.momentum(90)).unwrap();
    assert!(inner_product(&a, &b).unwrap().norm() < 1e-12);
    let self_ip = inner_product(&a, &a).unwrap();
    assert!((self_ip.re - l2_norm(&a).powi(2)).abs() < 1e-12);
    assert!((l2_norm(&a) - 1.0).abs() < 1e-12);
}

#[test]
fn representation_mismatch_is_rejected() {
    let g = GridSpec::new(1, 1.0, 16, 0.1).unwrap();
    let m = Wavefunction::zeros(g, Representation::Momentum);
    assert!(hbar_fourier(&m).is_err());
    let p = Wavefunction::zeros(g, Representation::Position);
    assert!(hbar_inverse_fourier(&p).is_err());
    let other = Wavefunction::zeros(GridSpec::new(1, 1.0, 32, 0.1).unwrap(), Representation::Position);
    assert!(matches!(inner_product(&p, &other), Err(Error::GridMismatch)));
}
