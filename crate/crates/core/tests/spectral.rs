use std::f64::consts::PI;

use proptest::prelude::*;
use speclab_core::field::{to_frequency, Transform};
use speclab_core::{rng, Complex64, DomainSpec, FreqField, SpatialField};

fn random_freq(spec: &DomainSpec, seed: u64) -> FreqField {
    let mut r = rng::from_seed(seed);
    FreqField::from_fn(spec.clone(), |_| rng::complex_gaussian(&mut r))
}

fn random_space(spec: &DomainSpec, seed: u64) -> SpatialField {
    let mut r = rng::from_seed(seed);
    SpatialField::from_fn(spec.clone(), |_| rng::complex_gaussian(&mut r))
}

fn geometries() -> Vec<DomainSpec> {
    vec![
        DomainSpec::uniform(3, 1, 8.0 * PI, 8).unwrap(),
        DomainSpec::uniform(2, 2, 8.0 * PI, 8).unwrap(),
        DomainSpec::uniform(1, 3, 8.0 * PI, 8).unwrap(),
        DomainSpec::torus(4, 8).unwrap(),
    ]
}

// Direct double sum of the continuous-convention transform on 8^4.
#[test]
fn transform_matches_double_sum() {
    let spec = DomainSpec::uniform(2, 2, 8.0 * PI, 8).unwrap();
    let f = random_space(&spec, 11);
    let g = to_frequency(&f);
    let d = spec.dim();
    let h: Vec<f64> = (0..d).map(|a| spec.length(a) / 8.0).collect();
    let scale = (2.0 * PI).powf(-(d as f64) / 2.0) * spec.cell_volume();
    let mut worst: f64 = 0.0;
    for k in (0..spec.len()).step_by(37) {
        let xi = spec.frequency(k);
        let mut s = Complex64::new(0.0, 0.0);
        for (j, v) in f.data().iter().enumerate() {
            let pos = spec.unflatten(j);
            let phase: f64 = (0..d).map(|a| pos[a] as f64 * h[a] * xi[a]).sum();
            s += v * Complex64::from_polar(1.0, -phase);
        }
        worst = worst.max((s * scale - g.data()[k]).norm());
    }
    assert!(worst < 1e-10, "worst deviation {worst}");
}

#[test]
fn plancherel_on_random_fields() {
    for (gi, spec) in geometries().iter().enumerate() {
        for seed in 0..256u64 {
            let f = random_space(spec, rng::derive_seed(seed, &[gi as u64]));
            let g = f.to_frequency();
            let rel = (f.l2_norm() - g.l2_norm()).abs() / f.l2_norm();
            assert!(rel < 1e-10, "geometry {gi} seed {seed}: {rel}");
        }
    }
}

#[test]
fn roundtrip_is_identity() {
    let spec = DomainSpec::uniform(3, 1, 8.0 * PI, 8).unwrap();
    let g = random_freq(&spec, 5);
    let back = g.to_space().to_frequency();
    let err = back.sub(&g).l2_norm() / g.l2_norm();
    assert!(err < 1e-12);
}

#[test]
fn raw_transforms_scale_consistently() {
    let spec = DomainSpec::uniform(1, 3, 4.0 * PI, 8).unwrap();
    let t = Transform::new(&spec);
    let n = spec.len() as f64;
    let product = t.forward_scale() * t.inverse_scale();
    assert!((product * n - 1.0).abs() < 1e-12);
}

#[test]
fn group_law() {
    let spec = DomainSpec::uniform(2, 2, 8.0 * PI, 8).unwrap();
    let g = random_freq(&spec, 8);
    let (s, t) = (0.37, -1.21);
    let a = g.propagate(s + t);
    let b = g.propagate(s).propagate(t);
    assert!(a.sub(&b).l2_norm() / g.l2_norm() < 1e-12);
}

#[test]
fn separated_dyadic_blocks_are_orthogonal() {
    let spec = DomainSpec::torus(4, 16).unwrap();
    let g = random_freq(&spec, 2);
    for (lo, hi) in [(1.0, 4.0), (1.0, 8.0), (2.0, 8.0)] {
        let a = g.project_dyadic(lo).unwrap();
        let b = g.project_dyadic(hi).unwrap();
        assert_eq!(a.inner(&b), Complex64::new(0.0, 0.0));
    }
}

#[test]
fn single_mode_sobolev_norm() {
    let spec = DomainSpec::torus(4, 8).unwrap();
    let g = FreqField::single_mode(spec, &[2, 0, 0, 0]).unwrap();
    for s in [0.0, 0.5, 1.0, 2.0] {
        assert!((g.sobolev_norm(s) - 2f64.powf(s)).abs() < 1e-12);
    }
}

#[test]
fn sobolev_zero_is_l2_on_blocks_without_overlap() {
    let spec = DomainSpec::torus(4, 8).unwrap();
    let mut g = FreqField::zeros(spec.clone());
    for k in [[0i64, 0, 0, 0], [1, 0, 0, 0], [0, 2, 0, 0], [0, 0, -4, 0]] {
        g.data_mut()[spec.flat_of_lattice(&k).unwrap()] = Complex64::new(1.5, -0.5);
    }
    assert!((g.sobolev_norm(0.0) - g.l2_norm()).abs() < 1e-12);
}

#[test]
fn single_mode_spacetime_l4_on_torus() {
    let spec = DomainSpec::torus(4, 8).unwrap();
    let g = FreqField::single_mode(spec, &[1, -2, 0, 3]).unwrap();
    let v = g.spacetime_lq(4.0, (0.0, 1.0), 64);
    assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-12, "{v}");
}

#[test]
fn galilean_invariance_of_l4() {
    let spec = DomainSpec::uniform(2, 2, 8.0 * PI, 16).unwrap();
    let mut g = FreqField::zeros(spec.clone());
    let mut r = rng::from_seed(3);
    for flat in 0..spec.len() {
        let k = spec.lattice_index(flat);
        if k[..4].iter().all(|c| c.abs() <= 2) {
            g.data_mut()[flat] = rng::complex_gaussian(&mut r);
        }
    }
    let base = g.spacetime_lq(4.0, (0.0, 1.0), 128);
    for shift in [[0.25, 0.0, 1.0, 0.0], [-0.5, 0.75, -2.0, 3.0]] {
        let moved = g.galilean_shift(&shift).unwrap();
        let v = moved.spacetime_lq(4.0, (0.0, 1.0), 128);
        assert!(((v - base) / base).abs() < 1e-8, "{v} vs {base}");
    }
}

#[test]
fn quadrature_check_flags_coarse_time_grid() {
    let spec = DomainSpec::torus(2, 32).unwrap();
    let mut g = FreqField::zeros(spec.clone());
    for k in [[0i64, 0], [5, 0], [10, 0]] {
        g.data_mut()[spec.flat_of_lattice(&k).unwrap()] = Complex64::new(1.0, 0.0);
    }
    // The resonant phase 50t peaks at every coarse node.
    let t1 = 16.0 * PI / 50.0;
    let q = g.spacetime_lq_checked(4.0, (0.0, t1), 9);
    assert!(q.relative_change() > 5e-3, "{q:?}");
    let q = g.spacetime_lq_checked(4.0, (0.0, t1), 2048);
    assert!(q.converged);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn plancherel_any_seed(seed in any::<u64>(), geometry in 0usize..4) {
        let spec = &geometries()[geometry];
        let f = random_space(spec, seed);
        let rel = (f.l2_norm() - f.to_frequency().l2_norm()).abs() / f.l2_norm();
        prop_assert!(rel < 1e-10);
    }

    #[test]
    fn propagation_is_unitary(seed in any::<u64>(), t in -10.0f64..10.0) {
        let spec = DomainSpec::uniform(3, 1, 8.0 * PI, 8).unwrap();
        let g = random_freq(&spec, seed);
        prop_assert!((g.propagate(t).l2_norm() - g.l2_norm()).abs() < 1e-10 * g.l2_norm());
    }
}
