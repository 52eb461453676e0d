use std::f64::consts::PI;

use proptest::prelude::*;
use speclab_core::nls::*;
use speclab_core::{Complex64, DomainSpec, SpatialField};

fn t4(points: usize) -> DomainSpec {
    DomainSpec::torus(4, points).unwrap()
}

fn r2t2(points: usize) -> DomainSpec {
    DomainSpec::uniform(2, 2, 8.0 * PI, points).unwrap()
}

fn cfg(sign: f64, dt: f64, steps: usize, dealias: bool) -> NlsConfig {
    NlsConfig { sign, dt, steps, dealias, record_every: steps }
}

fn max_diff(a: &SpatialField, b: &SpatialField) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn smooth(spec: &DomainSpec, band: f64, amplitude: f64, seed: u64) -> SpatialField {
    random_smooth_data(spec, band, 1.0, seed).unwrap().scale(Complex64::new(amplitude, 0.0)).to_space()
}

// Plane wave plus a small smooth perturbation: not an exact fixed point of the splitting.
fn perturbed_wave(spec: &DomainSpec) -> SpatialField {
    let mut u = plane_wave(spec, &[1, 0, 1, 0], 1.0).unwrap();
    let bump = smooth(spec, 2.5, 0.3, 17);
    for (z, b) in u.data_mut().iter_mut().zip(bump.data()) {
        *z += b;
    }
    u
}

#[test]
fn zero_field_stays_zero() {
    let s = t4(8);
    let u = SpatialField::zeros(s.clone());
    let v = strang_step(&u, &cfg(1.0, 0.1, 1, true)).unwrap();
    assert!(v.data().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn linear_hook_equals_propagation() {
    let s = t4(8);
    let u = smooth(&s, 2.5, 1.0, 3);
    let v = strang_step(&u, &cfg(0.0, 0.37, 1, false)).unwrap();
    let w = u.to_frequency().propagate(0.37).to_space();
    assert!(max_diff(&v, &w) < 1e-13);
}

#[test]
fn plane_wave_against_exact_solution() {
    let s = t4(8);
    for sign in [1.0, -1.0] {
        let u0 = plane_wave(&s, &[1, -2, 0, 1], 0.7).unwrap();
        let u = evolve_final(&u0, &cfg(sign, 1e-3, 1000, true)).unwrap();
        let exact = plane_wave_exact(&s, &[1, -2, 0, 1], 0.7, sign, 1.0).unwrap();
        assert!(max_diff(&u, &exact) <= 1e-5, "{}", max_diff(&u, &exact));
    }
}

#[test]
fn plane_wave_energy() {
    let s = t4(8);
    let n = [1i64, 2, 0, -1];
    let u = plane_wave(&s, &n, 1.0).unwrap();
    let n2: f64 = n.iter().map(|k| (k * k) as f64).sum();
    let expect = (2.0 * PI).powi(4) * (n2 / 2.0 + 0.25);
    assert!((energy(&u, 1.0) - expect).abs() < 1e-9 * expect);
}

#[test]
fn constant_field_energy() {
    let s = t4(4);
    let a = 0.8;
    let u = SpatialField::from_fn(s, |_| Complex64::new(a, 0.0));
    let expect = (2.0 * PI).powi(4) * a.powi(4) / 4.0;
    assert!((energy(&u, 1.0) - expect).abs() < 1e-9 * expect);
}

#[test]
fn second_order_self_convergence() {
    let s = t4(16);
    let u0 = perturbed_wave(&s);
    let run = |dt: f64| evolve_final(&u0, &cfg(1.0, dt, (0.5 / dt).round() as usize, true)).unwrap();
    let a = run(0.01);
    let b = run(0.005);
    let c = run(0.0025);
    let order = (max_diff(&a, &b) / max_diff(&b, &c)).log2();
    assert!((order - 2.0).abs() <= 0.1, "order {order}");
}

#[test]
fn mass_is_conserved() {
    let s = t4(16);
    for sign in [1.0, -1.0] {
        // sup |u| is about 1.
        let u0 = smooth(&s, 2.5, 30.0, 5);
        let traj = evolve(&u0, &NlsConfig { record_every: 50, ..cfg(sign, 1e-3, 1000, false) }).unwrap();
        assert!(traj.failure.is_none());
        let drift = traj.max_relative_drift(|d| d.mass);
        assert!(drift <= 1e-10, "sign {sign}: {drift}");
    }
}

#[test]
fn energy_is_conserved() {
    for (s, band) in [(t4(16), 2.5), (r2t2(16), 1.0)] {
        for sign in [1.0, -1.0] {
            for dealias in [true, false] {
                let u0 = smooth(&s, band, 30.0, 6);
                let traj = evolve(&u0, &NlsConfig { record_every: 100, ..cfg(sign, 1e-3, 1000, dealias) }).unwrap();
                let drift = traj.max_relative_drift(|d| d.energy);
                assert!(drift <= 1e-6, "sign {sign} dealias {dealias}: {drift}");
            }
        }
    }
}

#[test]
fn forward_then_backward_returns() {
    let s = t4(16);
    let u0 = smooth(&s, 2.5, 30.0, 8);
    for sign in [1.0, -1.0] {
        let u1 = evolve_final(&u0, &cfg(sign, 1e-3, 1000, false)).unwrap();
        let back = evolve_final(&u1, &cfg(sign, -1e-3, 1000, false)).unwrap();
        assert!(max_diff(&back, &u0) <= 1e-8, "{}", max_diff(&back, &u0));
    }
}

#[test]
fn tiny_data_follows_the_free_flow() {
    let s = t4(8);
    let base = smooth(&s, 2.0, 1.0, 9);
    for eps in [1e-2, 1e-3] {
        let u0 = SpatialField::new(s.clone(), base.data().iter().map(|z| z * eps).collect()).unwrap();
        let u = evolve_final(&u0, &cfg(1.0, 1e-2, 100, false)).unwrap();
        let free = u0.to_frequency().propagate(1.0).to_space();
        let scale = base.sup_norm().powi(3) * eps.powi(3);
        assert!(max_diff(&u, &free) <= 2.0 * scale, "{eps}");
    }
}

#[test]
fn small_data_ratios() {
    let s = r2t2(8);
    let rows = small_data_experiment(&s, &[0.0, 1e-3], 1.0, 1.0, &cfg(1.0, 1e-3, 1000, true), 4).unwrap();
    assert_eq!(rows[0].h1_ratio, 1.0);
    assert!(rows[1].h1_ratio <= 1.0 + 1e-3, "{:?}", rows[1]);
    assert!(rows.iter().all(|r| r.blow_up.is_none()));
    assert!(small_data_experiment(&s, &[1e-3], 0.5, 1.0, &cfg(1.0, 1e-3, 10, true), 4).is_err());
}

#[test]
fn non_finite_data_is_reported() {
    let s = t4(4);
    let mut u0 = SpatialField::zeros(s);
    u0.data_mut()[3] = Complex64::new(f64::NAN, 0.0);
    assert!(strang_step(&u0, &cfg(1.0, 1e-3, 1, true)).is_err());
    let traj = evolve(&u0, &cfg(1.0, 1e-3, 5, true)).unwrap();
    assert!(traj.failure.is_some());
}

#[test]
fn focusing_blow_up_is_recorded() {
    let s = t4(8);
    let u0 = smooth(&s, 2.0, 400.0, 2);
    let traj = evolve(&u0, &cfg(-1.0, 0.05, 200, true)).unwrap();
    assert!(traj.failure.is_some());
    assert!(traj.last().data().iter().all(|z| z.re.is_finite() && z.im.is_finite()));
}

#[test]
fn undealiased_scheme_never_loses_mass() {
    // Exact phase rotations and the unitary linear flow: no blow-up signal.
    let s = t4(8);
    let u0 = smooth(&s, 2.0, 400.0, 2);
    let traj = evolve(&u0, &cfg(-1.0, 0.05, 50, false)).unwrap();
    assert!(traj.failure.is_none());
    assert!(traj.max_relative_drift(|d| d.mass) < 1e-10);
}

#[test]
fn dealias_mask_keeps_two_thirds() {
    let s = t4(12);
    let kept = dealias_mask(&s).iter().filter(|&&b| b).count();
    // |k| <= 4 on a 12-point axis: 9 of 12 indices.
    assert_eq!(kept, 9usize.pow(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn one_step_preserves_mass(seed in any::<u64>(), dt in 1e-4f64..0.1, sign in prop::sample::select(vec![-1.0, 1.0])) {
        let s = t4(8);
        let u = smooth(&s, 2.0, 1.0, seed % 10_000);
        let v = strang_step(&u, &cfg(sign, dt, 1, false)).unwrap();
        prop_assert!(((mass(&v) - mass(&u)) / mass(&u)).abs() <= 1e-12);
    }

    #[test]
    fn one_step_is_reversible(seed in any::<u64>(), dt in 1e-4f64..0.1) {
        let s = t4(8);
        let u = smooth(&s, 2.0, 1.0, seed % 10_000);
        let v = strang_step(&u, &cfg(1.0, dt, 1, false)).unwrap();
        let w = strang_step(&v, &cfg(1.0, -dt, 1, false)).unwrap();
        prop_assert!(max_diff(&w, &u) <= 1e-12);
    }
}
