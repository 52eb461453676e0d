//! Variation norms of sampled paths and `U^p` atoms.
//!
//! A [`TimeSeries`] is a right-continuous, piecewise-constant path that
//! jumps only at its sample times. The `V^p` supremum over partitions is
//! then attained on sub-partitions of the samples and is computed exactly
//! by dynamic programming. A trailing `+inf` time adds the terminal jump to
//! `v(inf) = 0`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{DomainSpec, MAX_DIM};
use crate::error::{Error, Result};
use crate::field::FreqField;
use crate::lp;

/// Sampled path `t_k -> v_k` with an optional terminal sample at `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<FreqField>,
}

impl TimeSeries {
    /// `times` must be strictly increasing; it may end with `f64::INFINITY`,
    /// in which case `values` has one entry less (the value at infinity is 0).
    pub fn new(times: Vec<f64>, values: Vec<FreqField>) -> Result<Self> {
        let finite = times.iter().filter(|t| t.is_finite()).count();
        let terminal = times.last().is_some_and(|&t| t == f64::INFINITY);
        if finite + usize::from(terminal) != times.len() {
            return Err(Error::Argument("times must be finite except for a trailing +inf".into()));
        }
        if values.len() != finite {
            return Err(Error::Argument(format!("{} finite times but {} values", finite, values.len())));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Argument("times must be strictly increasing".into()));
        }
        if let Some(first) = values.first() {
            if values.iter().any(|v| v.spec() != first.spec()) {
                return Err(Error::Argument("values live on different domains".into()));
            }
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[FreqField] {
        &self.values
    }

    pub fn has_terminal(&self) -> bool {
        self.times.len() > self.values.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn spec(&self) -> Option<&DomainSpec> {
        self.values.first().map(|v| v.spec())
    }

    /// Samples of the linear solution `e^{it Delta} phi`, closed at `+inf`.
    pub fn linear_solution(phi: &FreqField, times: &[f64]) -> Result<Self> {
        let values = times.iter().map(|&t| phi.propagate(t)).collect();
        let mut ts = times.to_vec();
        ts.push(f64::INFINITY);
        Self::new(ts, values)
    }

    /// The pulled-back path `e^{-it_k Delta} v_k`.
    pub fn pulled_back(&self) -> Self {
        let values = self.values.iter().zip(&self.times).map(|(v, &t)| v.propagate(-t)).collect();
        Self { times: self.times.clone(), values }
    }
}

/// `V^p` seminorm of the points `0..n` under a distance `dist(i, j)`, `i < j`:
/// `sup over increasing index chains of (sum dist^p)^{1/p}`.
pub fn vp_from_distances(n: usize, p: f64, mut dist: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut best = vec![0.0f64; n];
    for j in 1..n {
        let mut b: f64 = 0.0;
        for i in 0..j {
            b = b.max(best[i] + dist(i, j).powf(p));
        }
        best[j] = b;
    }
    best.iter().fold(0.0f64, |a, &b| a.max(b)).powf(1.0 / p)
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("variation exponent p={p} must be in [1, inf)")))
    }
}

/// `V^p` norm of coefficient vectors under the weighted metric
/// `||a||^2 = sum_i w_i |a_i|^2`; `terminal` appends the zero vector.
pub fn vp_norm_weighted(values: &[&[Complex64]], weights: &[f64], terminal: bool, p: f64) -> Result<f64> {
    check_p(p)?;
    let n = values.len() + usize::from(terminal);
    let norm = |a: &[Complex64], b: Option<&[Complex64]>| -> f64 {
        let s: f64 = match b {
            Some(b) => a.iter().zip(b).zip(weights).map(|((x, y), w)| w * (x - y).norm_sqr()).sum(),
            None => a.iter().zip(weights).map(|(x, w)| w * x.norm_sqr()).sum(),
        };
        s.sqrt()
    };
    Ok(vp_from_distances(n, p, |i, j| {
        if j == values.len() {
            norm(values[i], None)
        } else {
            norm(values[i], Some(values[j]))
        }
    }))
}

/// `||v||_{V^p(L^2)}` of a sampled path.
pub fn vp_norm(s: &TimeSeries, p: f64) -> Result<f64> {
    check_p(p)?;
    let Some(spec) = s.spec() else {
        return Ok(0.0);
    };
    let weights = vec![spec.lattice_weight(); spec.len()];
    let vals: Vec<&[Complex64]> = s.values.iter().map(|v| v.data()).collect();
    vp_norm_weighted(&vals, &weights, s.has_terminal(), p)
}

fn sobolev_weights(spec: &DomainSpec, s_reg: f64) -> Vec<f64> {
    let w = spec.lattice_weight();
    spec.frequency_norms_sq().iter().map(|r2| w * lp::sobolev_weight_sq(s_reg, r2.sqrt())).collect()
}

/// `||e^{-it Delta} u||_{V^p(H^s)}` of a sampled path.
pub fn vp_delta_norm(s: &TimeSeries, p: f64, s_reg: f64) -> Result<f64> {
    check_p(p)?;
    let Some(spec) = s.spec() else {
        return Ok(0.0);
    };
    let weights = sobolev_weights(spec, s_reg);
    let back = s.pulled_back();
    let vals: Vec<&[Complex64]> = back.values.iter().map(|v| v.data()).collect();
    vp_norm_weighted(&vals, &weights, s.has_terminal(), p)
}

/// A `U^p` atom `sum_k chi_[t_k, t_{k+1}) phi_k` with `sum ||phi_k||^p = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpAtom {
    p: f64,
    times: Vec<f64>,
    data: Vec<FreqField>,
}

impl UpAtom {
    /// `times` has one more entry than `data`; its last entry may be `+inf`.
    pub fn new(p: f64, times: Vec<f64>, data: Vec<FreqField>) -> Result<Self> {
        check_p(p)?;
        if data.is_empty() || times.len() != data.len() + 1 {
            return Err(Error::Argument("an atom needs K >= 1 pieces and K + 1 partition points".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || times[..data.len()].iter().any(|t| !t.is_finite()) {
            return Err(Error::Argument("atom partition must be strictly increasing".into()));
        }
        let total: f64 = data.iter().map(|f| f.l2_norm().powf(p)).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("atom is not normalized: sum ||phi_k||^p = {total}")));
        }
        Ok(Self { p, times, data })
    }

    /// Rescales arbitrary nonzero data into an atom.
    pub fn normalized(p: f64, times: Vec<f64>, data: Vec<FreqField>) -> Result<Self> {
        check_p(p)?;
        let total: f64 = data.iter().map(|f| f.l2_norm().powf(p)).sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("atom data is zero".into()));
        }
        let c = Complex64::new(total.powf(-1.0 / p), 0.0);
        Self::new(p, times, data.iter().map(|f| f.scale(c)).collect())
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn partition(&self) -> &[f64] {
        &self.times
    }

    pub fn data(&self) -> &[FreqField] {
        &self.data
    }

    /// The path `t -> a(t)` sampled at its partition points, closed at
    /// `+inf`. It is exact for the piecewise-constant path.
    pub fn path(&self) -> TimeSeries {
        let mut times = self.times[..self.data.len()].to_vec();
        times.push(f64::INFINITY);
        let mut values = self.data.clone();
        let end = self.times[self.data.len()];
        if end.is_finite() {
            times.insert(self.data.len(), end);
            values.push(FreqField::zeros(self.data[0].spec().clone()));
        }
        TimeSeries { times, values }
    }

    /// `e^{it Delta} a(t)` sampled at the partition points.
    pub fn delta_path(&self) -> TimeSeries {
        let p = self.path();
        let values = p.values.iter().zip(&p.times).map(|(v, &t)| v.propagate(t)).collect();
        TimeSeries { times: p.times, values }
    }
}

/// Universal bound `||a||_{V^p} <= 2` for a normalized `U^p` atom:
/// every increment is a difference of two atom values and each value
/// takes part in at most two increments.
pub const ATOM_VARIATION_BOUND: f64 = 2.0;

/// Unit-cube label `floor(xi)` of a frequency.
fn cube_of(xi: &[f64]) -> [i64; MAX_DIM] {
    let mut z = [0i64; MAX_DIM];
    for (a, x) in xi.iter().enumerate() {
        z[a] = x.floor() as i64;
    }
    z
}

/// Grid offsets grouped by unit frequency cube `z + [0, 1)^d`, in cube order.
pub fn cube_partition(spec: &DomainSpec) -> BTreeMap<[i64; MAX_DIM], Vec<usize>> {
    let d = spec.dim();
    let mut out: BTreeMap<[i64; MAX_DIM], Vec<usize>> = BTreeMap::new();
    for i in 0..spec.len() {
        out.entry(cube_of(&spec.frequency(i)[..d])).or_default().push(i);
    }
    out
}

/// `Y^s` norm and `X^s` certificate of a sampled path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubeNorms {
    /// `(sum_z ||Q_z u||^2_{V^2_Delta H^s})^{1/2}`, exact for the sampled path.
    pub ys: f64,
    /// An upper bound of `||u||_{X^s}` from explicit atomic decompositions.
    pub xs_certificate: f64,
    /// Number of cubes carrying mass.
    pub active_cubes: usize,
}

/// Best of two explicit `U^2` decompositions of the pulled-back step path
/// `w = sum_k chi_[t_k, t_{k+1}) w_k`: the path itself as one atom
/// (`(sum ||w_k||^2)^{1/2}`), or telescoped into single-jump atoms
/// (`sum ||w_k - w_{k-1}||`).
fn u2_certificate(values: &[&[Complex64]], weights: &[f64]) -> f64 {
    let norm = |f: &dyn Fn(usize) -> Complex64| -> f64 {
        (0..weights.len()).map(|i| weights[i] * f(i).norm_sqr()).sum::<f64>().sqrt()
    };
    let single: f64 = values.iter().map(|v| norm(&|i| v[i]).powi(2)).sum::<f64>().sqrt();
    let mut telescoped = 0.0;
    for (k, v) in values.iter().enumerate() {
        telescoped += if k == 0 {
            norm(&|i| v[i])
        } else {
            let prev = values[k - 1];
            norm(&|i| v[i] - prev[i])
        };
    }
    single.min(telescoped)
}

/// `Y^s` norm and `X^s` certificate of a path on its frequency cubes.
///
/// The path is read as `u(t) = v_k` on `[t_k, t_{k+1})` and `0` after the
/// last sample (or from `+inf` if the series is closed there); a finite
/// last time is treated like a closed series.
pub fn cube_norms(s: &TimeSeries, s_reg: f64) -> Result<CubeNorms> {
    let Some(spec) = s.spec() else {
        return Ok(CubeNorms { ys: 0.0, xs_certificate: 0.0, active_cubes: 0 });
    };
    let weights_all = sobolev_weights(spec, s_reg);
    let back = s.pulled_back();
    let mut ys2 = 0.0;
    let mut xs2 = 0.0;
    let mut active = 0;
    for idx in cube_partition(spec).values() {
        let restricted: Vec<Vec<Complex64>> =
            back.values.iter().map(|v| idx.iter().map(|&i| v.data()[i]).collect()).collect();
        if restricted.iter().all(|v| v.iter().all(|z| z.norm_sqr() == 0.0)) {
            continue;
        }
        active += 1;
        let weights: Vec<f64> = idx.iter().map(|&i| weights_all[i]).collect();
        let refs: Vec<&[Complex64]> = restricted.iter().map(|v| v.as_slice()).collect();
        let v = vp_norm_weighted(&refs, &weights, true, 2.0)?;
        ys2 += v * v;
        let c = u2_certificate(&refs, &weights);
        xs2 += c * c;
    }
    Ok(CubeNorms { ys: ys2.sqrt(), xs_certificate: xs2.sqrt(), active_cubes: active })
}

pub fn ys_norm(s: &TimeSeries, s_reg: f64) -> Result<f64> {
    cube_norms(s, s_reg).map(|c| c.ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_vp(values: &[f64], terminal: bool, p: f64) -> f64 {
        let v: Vec<Vec<Complex64>> = values.iter().map(|&x| vec![Complex64::new(x, 0.0)]).collect();
        let refs: Vec<&[Complex64]> = v.iter().map(|x| x.as_slice()).collect();
        vp_norm_weighted(&refs, &[1.0], terminal, p).unwrap()
    }

    #[test]
    fn single_step_has_two_unit_jumps() {
        let r = scalar_vp(&[0.0, 1.0], true, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_path_is_its_terminal_jump() {
        assert!((scalar_vp(&[3.0, 3.0, 3.0], true, 2.0) - 3.0).abs() < 1e-15);
        assert_eq!(scalar_vp(&[3.0, 3.0], false, 2.0), 0.0);
    }

    #[test]
    fn rejects_small_exponent() {
        assert!(vp_norm_weighted(&[], &[], true, 0.5).is_err());
    }

    #[test]
    fn sign_flip_atom_exceeds_sqrt_two() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let r = scalar_vp(&[0.0, h, -h], true, 2.0);
        assert!((r - 3f64.sqrt()).abs() < 1e-14);
        assert!(r <= ATOM_VARIATION_BOUND);
    }
}
