use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use speclab_core::variation::*;
use speclab_core::{rng, Complex64, DomainSpec, FreqField};

fn spec() -> DomainSpec {
    DomainSpec::uniform(2, 2, 8.0 * PI, 8).unwrap()
}

fn random_field(spec: &DomainSpec, seed: u64) -> FreqField {
    let mut r = rng::from_seed(seed);
    FreqField::from_fn(spec.clone(), |_| rng::complex_gaussian(&mut r))
}

// Sup over every chain of sample indices, by enumeration of all subsets.
fn exhaustive(values: &[Vec<Complex64>], terminal: bool, p: f64) -> f64 {
    let n = values.len() + usize::from(terminal);
    let dist = |i: usize, j: usize| -> f64 {
        let a = &values[i];
        let s: f64 = if j == values.len() {
            a.iter().map(|z| z.norm_sqr()).sum()
        } else {
            a.iter().zip(&values[j]).map(|(x, y)| (x - y).norm_sqr()).sum()
        };
        s.sqrt()
    };
    let mut best: f64 = 0.0;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s: f64 = idx.windows(2).map(|w| dist(w[0], w[1]).powf(p)).sum();
        best = best.max(s);
    }
    best.powf(1.0 / p)
}

fn dp(values: &[Vec<Complex64>], terminal: bool, p: f64) -> f64 {
    let refs: Vec<&[Complex64]> = values.iter().map(|v| v.as_slice()).collect();
    let dim = values.first().map_or(0, |v| v.len());
    vp_norm_weighted(&refs, &vec![1.0; dim], terminal, p).unwrap()
}

#[test]
fn dp_equals_exhaustive_enumeration() {
    let mut r = rng::stream(2024, &[]);
    for trial in 0..200 {
        let k = r.gen_range(1..=12usize);
        let dim = r.gen_range(1..=3usize);
        let terminal = trial % 3 != 0;
        let p = [1.0, 1.5, 2.0, 3.0, 4.0][trial % 5];
        let len = if terminal { k - 1 } else { k };
        let values: Vec<Vec<Complex64>> =
            (0..len.max(1)).map(|_| (0..dim).map(|_| rng::complex_gaussian(&mut r)).collect()).collect();
        let a = dp(&values, terminal, p);
        let b = exhaustive(&values, terminal, p);
        assert_eq!(a, b, "trial {trial}");
    }
}

#[test]
fn scalar_eight_sample_path() {
    let mut r = rng::from_seed(8);
    let values: Vec<Vec<Complex64>> = (0..8).map(|_| vec![Complex64::new(r.gen_range(-1.0..1.0), 0.0)]).collect();
    assert_eq!(dp(&values, false, 2.0), exhaustive(&values, false, 2.0));
}

#[test]
fn single_step_path() {
    let s = spec();
    let phi = random_field(&s, 1);
    let zero = FreqField::zeros(s.clone());
    let path = TimeSeries::new(vec![-1.0, 0.0, f64::INFINITY], vec![zero, phi.clone()]).unwrap();
    let v = vp_norm(&path, 2.0).unwrap();
    assert!((v - 2f64.sqrt() * phi.l2_norm()).abs() < 1e-12 * v);
}

#[test]
fn constant_path_then_infinity() {
    let s = spec();
    let phi = random_field(&s, 2);
    let path =
        TimeSeries::new(vec![0.0, 0.5, 1.0, f64::INFINITY], vec![phi.clone(), phi.clone(), phi.clone()]).unwrap();
    assert!((vp_norm(&path, 2.0).unwrap() - phi.l2_norm()).abs() < 1e-12);
}

#[test]
fn rejects_exponent_below_one() {
    let s = spec();
    let path = TimeSeries::linear_solution(&random_field(&s, 3), &[0.0]).unwrap();
    assert!(vp_norm(&path, 0.9).is_err());
    assert!(vp_delta_norm(&path, 0.5, 1.0).is_err());
}

#[test]
fn malformed_series_are_rejected() {
    let s = spec();
    let f = random_field(&s, 3);
    assert!(TimeSeries::new(vec![1.0, 0.0], vec![f.clone(), f.clone()]).is_err());
    assert!(TimeSeries::new(vec![0.0, f64::INFINITY, 1.0], vec![f.clone(), f.clone()]).is_err());
    assert!(TimeSeries::new(vec![0.0], vec![f.clone(), f]).is_err());
}

#[test]
fn linear_solutions_have_sobolev_norm() {
    let s = spec();
    for seed in 0..5 {
        let phi = random_field(&s, seed);
        let mut r = rng::from_seed(seed + 100);
        let mut times: Vec<f64> = (0..7).map(|_| r.gen_range(-3.0..3.0)).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let path = TimeSeries::linear_solution(&phi, &times).unwrap();
        for s_reg in [0.0, 1.0, 1.5] {
            let v = vp_delta_norm(&path, 2.0, s_reg).unwrap();
            let h = phi.sobolev_norm(s_reg);
            assert!((v - h).abs() < 1e-10 * h, "{v} vs {h}");
        }
    }
}

#[test]
fn zero_path_has_zero_norm() {
    let s = spec();
    let path = TimeSeries::linear_solution(&FreqField::zeros(s), &[0.0, 1.0]).unwrap();
    assert_eq!(vp_delta_norm(&path, 2.0, 1.0).unwrap(), 0.0);
}

#[test]
fn phase_kick_adds_at_most_two_epsilon() {
    let s = spec();
    let phi = random_field(&s, 4);
    let times = [0.0, 0.25, 0.5, 0.75, 1.0];
    let eps = 0.05;
    let flat = s.flat_of_lattice(&[1, 0, 1, 0]).unwrap();
    let bump = (eps / s.lattice_weight().sqrt()) / phi.data()[flat].norm();
    let values: Vec<FreqField> = times
        .iter()
        .map(|&t| {
            let mut v = phi.clone();
            if t >= 0.5 {
                let z = v.data()[flat];
                v.data_mut()[flat] = z * (1.0 + bump);
            }
            v.propagate(t)
        })
        .collect();
    let mut ts = times.to_vec();
    ts.push(f64::INFINITY);
    let path = TimeSeries::new(ts, values).unwrap();
    let v = vp_delta_norm(&path, 2.0, 0.0).unwrap();
    let base = phi.sobolev_norm(0.0);
    assert!(v >= base - 1e-12 && v <= base + 2.0 * eps, "{v} vs {base}");
}

#[test]
fn monotone_in_exponent() {
    let s = spec();
    let values: Vec<FreqField> = (0..6).map(|k| random_field(&s, 40 + k)).collect();
    let times = vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, f64::INFINITY];
    let path = TimeSeries::new(times, values).unwrap();
    let v1 = vp_norm(&path, 1.0).unwrap();
    let v2 = vp_norm(&path, 2.0).unwrap();
    let v4 = vp_norm(&path, 4.0).unwrap();
    assert!(v1 >= v2 && v2 >= v4);
}

#[test]
fn single_mode_linear_solution_ys() {
    let s = spec();
    let phi = FreqField::single_mode(s.clone(), &[3, 0, 2, 0]).unwrap();
    let path = TimeSeries::linear_solution(&phi, &[0.0, 0.3, 0.9]).unwrap();
    let c = cube_norms(&path, 1.0).unwrap();
    assert_eq!(c.active_cubes, 1);
    assert!((c.ys - phi.sobolev_norm(1.0)).abs() < 1e-12);
    assert!((c.xs_certificate - phi.sobolev_norm(1.0)).abs() < 1e-12);
}

#[test]
fn distant_cubes_combine_in_l2() {
    let s = spec();
    let a = FreqField::single_mode(s.clone(), &[-4, 0, 0, 0]).unwrap();
    let b = FreqField::single_mode(s.clone(), &[0, 3, 0, 2]).unwrap().scale(Complex64::new(0.0, 2.0));
    let times = [0.0, 0.5];
    let na = ys_norm(&TimeSeries::linear_solution(&a, &times).unwrap(), 1.0).unwrap();
    let nb = ys_norm(&TimeSeries::linear_solution(&b, &times).unwrap(), 1.0).unwrap();
    let nab = ys_norm(&TimeSeries::linear_solution(&a.add(&b), &times).unwrap(), 1.0).unwrap();
    assert!((nab - (na * na + nb * nb).sqrt()).abs() < 1e-12);
}

#[test]
fn cubes_partition_the_grid() {
    let s = spec();
    let parts = cube_partition(&s);
    let total: usize = parts.values().map(|v| v.len()).sum();
    assert_eq!(total, s.len());
    // Line axes have spacing 1/4: four nodes per unit on each of them.
    assert!(parts.values().all(|v| v.len() == 16));
}

fn atom(seed: u64, pieces: usize) -> UpAtom {
    let s = spec();
    let mut r = rng::from_seed(seed);
    let data: Vec<FreqField> = (0..pieces).map(|k| random_field(&s, seed * 31 + k as u64)).collect();
    let mut times: Vec<f64> = (0..=pieces).map(|_| r.gen_range(0.0..4.0)).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    UpAtom::normalized(2.0, times, data).unwrap()
}

#[test]
fn atom_normalization_is_enforced() {
    let s = spec();
    let f = random_field(&s, 1);
    assert!(UpAtom::new(2.0, vec![0.0, 1.0], vec![f.clone()]).is_err());
    let a = UpAtom::normalized(2.0, vec![0.0, 1.0], vec![f]).unwrap();
    let total: f64 = a.data().iter().map(|d| d.l2_norm().powi(2)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn ys_below_twice_xs_certificate_on_atoms() {
    for seed in 0..20 {
        let a = atom(seed, 1 + (seed as usize % 4));
        let c = cube_norms(&a.delta_path(), 1.0).unwrap();
        assert!(c.ys <= 2.0 * c.xs_certificate * (1.0 + 1e-12), "seed {seed}: {c:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn atom_variation_is_bounded(seed in any::<u64>(), pieces in 1usize..6) {
        let a = atom(seed % 100_000, pieces);
        let v = vp_norm(&a.path(), 2.0).unwrap();
        prop_assert!(v <= ATOM_VARIATION_BOUND + 1e-12);
        let w = vp_delta_norm(&a.delta_path(), 2.0, 0.0).unwrap();
        prop_assert!(w <= ATOM_VARIATION_BOUND + 1e-12);
    }

    #[test]
    fn dp_matches_enumeration(seed in any::<u64>(), k in 1usize..10, p in 1.0f64..4.0) {
        let mut r = rng::from_seed(seed);
        let values: Vec<Vec<Complex64>> = (0..k).map(|_| vec![rng::complex_gaussian(&mut r)]).collect();
        let a = dp(&values, true, p);
        let b = exhaustive(&values, true, p);
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }
}
