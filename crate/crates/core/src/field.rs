//! Complex fields on a [`DomainSpec`] in physical or frequency representation.
//!
//! The transform pair follows
//! `f_hat(xi) = (2 pi)^{-d/2} int e^{-i x.xi} f(x) dx`, discretized with the
//! grid cell volume, and its inverse carries the lattice weight of
//! [`DomainSpec::lattice_weight`], which makes the pair unitary between the
//! grid `L^2` norm and the lattice `L^2` norm.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{DomainSpec, MAX_DIM};
use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::lp;
use crate::rect::FreqRect;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Field sampled on the physical grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialField {
    spec: DomainSpec,
    data: Vec<Complex64>,
}

/// Field given by its values on the frequency lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct FreqField {
    spec: DomainSpec,
    data: Vec<Complex64>,
}

fn check_len(spec: &DomainSpec, data: &[Complex64]) -> Result<()> {
    if data.len() == spec.len() {
        Ok(())
    } else {
        Err(Error::Shape { expected: spec.len(), found: data.len() })
    }
}

impl SpatialField {
    pub fn new(spec: DomainSpec, data: Vec<Complex64>) -> Result<Self> {
        check_len(&spec, &data)?;
        Ok(Self { spec, data })
    }

    pub fn zeros(spec: DomainSpec) -> Self {
        let data = vec![ZERO; spec.len()];
        Self { spec, data }
    }

    /// Samples `f` at the grid points `x_j = j * length / N`.
    pub fn from_fn(spec: DomainSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let d = spec.dim();
        let h: Vec<f64> = (0..d).map(|a| spec.length(a) / spec.grid()[a] as f64).collect();
        let mut x = [0.0; MAX_DIM];
        let data = (0..spec.len())
            .map(|flat| {
                let pos = spec.unflatten(flat);
                for a in 0..d {
                    x[a] = pos[a] as f64 * h[a];
                }
                f(&x[..d])
            })
            .collect();
        Self { spec, data }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn l2_norm(&self) -> f64 {
        (norm_sq(&self.data) * self.spec.cell_volume()).sqrt()
    }

    /// `(int |f|^q dx)^{1/q}` by grid quadrature.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm().powf(q)).sum();
        (s * self.spec.cell_volume()).powf(1.0 / q)
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_frequency(&self) -> FreqField {
        to_frequency(self)
    }
}

impl FreqField {
    pub fn new(spec: DomainSpec, data: Vec<Complex64>) -> Result<Self> {
        check_len(&spec, &data)?;
        Ok(Self { spec, data })
    }

    pub fn zeros(spec: DomainSpec) -> Self {
        let data = vec![ZERO; spec.len()];
        Self { spec, data }
    }

    /// Field with `f(xi)` at every lattice node.
    pub fn from_fn(spec: DomainSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let d = spec.dim();
        let data = (0..spec.len()).map(|flat| f(&spec.frequency(flat)[..d])).collect();
        Self { spec, data }
    }

    /// Field with one nonzero lattice node, normalized to unit `L^2` norm.
    pub fn single_mode(spec: DomainSpec, k: &[i64]) -> Result<Self> {
        let flat =
            spec.flat_of_lattice(k).ok_or_else(|| Error::Argument(format!("lattice index {k:?} is off the grid")))?;
        let mut out = Self::zeros(spec);
        out.data[flat] = Complex64::new((1.0 / out.spec.lattice_weight()).sqrt(), 0.0);
        Ok(out)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Lattice `L^2` norm with the mixed Lebesgue/counting weight.
    pub fn l2_norm(&self) -> f64 {
        (norm_sq(&self.data) * self.spec.lattice_weight()).sqrt()
    }

    /// Weighted inner product `sum f conj(g) w`.
    pub fn inner(&self, other: &FreqField) -> Complex64 {
        let s: Complex64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum();
        s * self.spec.lattice_weight()
    }

    pub fn scale(&self, c: Complex64) -> FreqField {
        self.map(|_, z| z * c)
    }

    pub fn add(&self, other: &FreqField) -> FreqField {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        FreqField { spec: self.spec.clone(), data }
    }

    pub fn sub(&self, other: &FreqField) -> FreqField {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        FreqField { spec: self.spec.clone(), data }
    }

    fn map(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> FreqField {
        let data = self.data.iter().enumerate().map(|(i, &z)| f(i, z)).collect();
        FreqField { spec: self.spec.clone(), data }
    }

    pub fn to_space(&self) -> SpatialField {
        to_space(self)
    }

    /// Free evolution: multiplies by `e^{-i t |xi|^2}`.
    pub fn propagate(&self, t: f64) -> FreqField {
        let omega = self.spec.frequency_norms_sq();
        self.map(|i, z| z * Complex64::from_polar(1.0, -t * omega[i]))
    }

    /// Smooth dyadic projection `P_lambda`.
    pub fn project_dyadic(&self, lambda: f64) -> Result<FreqField> {
        lp::check_dyadic(lambda)?;
        let r2 = self.spec.frequency_norms_sq();
        Ok(self.map(|i, z| z * lp::dyadic_multiplier(lambda, r2[i].sqrt())))
    }

    /// Sharp projection onto the nodes where `member` holds.
    pub fn project_set(&self, mut member: impl FnMut(&[f64]) -> bool) -> FreqField {
        let d = self.spec.dim();
        let spec = &self.spec;
        self.map(|i, z| if member(&spec.frequency(i)[..d]) { z } else { ZERO })
    }

    pub fn project_rect(&self, rect: &FreqRect) -> FreqField {
        self.project_set(|xi| rect.contains(xi))
    }

    /// Translates the frequency support by the lattice vector `shift`.
    pub fn galilean_shift(&self, shift: &[f64]) -> Result<FreqField> {
        let d = self.spec.dim();
        if shift.len() != d {
            return Err(Error::Argument(format!("shift has dimension {}, domain has {d}", shift.len())));
        }
        let mut steps = [0i64; MAX_DIM];
        for a in 0..d {
            let k = shift[a] / self.spec.spacing(a);
            let kr = k.round();
            if (k - kr).abs() > 1e-9 {
                return Err(Error::Argument(format!(
                    "shift component {} is not on the frequency lattice of axis {a}",
                    shift[a]
                )));
            }
            steps[a] = kr as i64;
        }
        let mut out = FreqField::zeros(self.spec.clone());
        for (flat, &z) in self.data.iter().enumerate() {
            if z == ZERO {
                continue;
            }
            let mut k = self.spec.lattice_index(flat);
            for a in 0..d {
                k[a] += steps[a];
            }
            let target = self
                .spec
                .flat_of_lattice(&k[..d])
                .ok_or_else(|| Error::Argument(format!("shift moves lattice node {k:?} off the grid")))?;
            out.data[target] = z;
        }
        Ok(out)
    }

    /// `(sum_lambda lambda^{2s} ||P_lambda g||^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let r2 = self.spec.frequency_norms_sq();
        let sum: f64 = self.data.iter().zip(&r2).map(|(z, r)| z.norm_sqr() * lp::sobolev_weight_sq(s, r.sqrt())).sum();
        (sum * self.spec.lattice_weight()).sqrt()
    }

    /// Discrete `L^q_t L^q_x` norm of the free evolution over `[t0, t1]`.
    pub fn spacetime_lq(&self, q: f64, interval: (f64, f64), n_t: usize) -> f64 {
        Evolver::new(&self.spec).spacetime_lq(&self.data, q, interval, n_t)
    }

    /// [`FreqField::spacetime_lq`] together with the quadrature-doubling check.
    pub fn spacetime_lq_checked(&self, q: f64, interval: (f64, f64), n_t: usize) -> Quadrature {
        Evolver::new(&self.spec).spacetime_lq_checked(&self.data, q, interval, n_t)
    }
}

/// Relative change tolerated when the time grid is doubled.
pub const QUADRATURE_TOLERANCE: f64 = 5e-3;

/// A quadrature value with its refinement check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub refined: f64,
    pub converged: bool,
}

impl Quadrature {
    pub fn relative_change(&self) -> f64 {
        if self.value == 0.0 {
            if self.refined == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.refined - self.value).abs() / self.value.abs()
        }
    }
}

pub(crate) fn norm_sq(data: &[Complex64]) -> f64 {
    data.iter().map(|z| z.norm_sqr()).sum()
}

/// Composite trapezoid nodes and weights on `[t0, t1]`.
pub fn trapezoid(interval: (f64, f64), n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n.max(2);
    let h = (interval.1 - interval.0) / (n - 1) as f64;
    let t = (0..n).map(|j| interval.0 + j as f64 * h).collect();
    let w = (0..n).map(|j| if j == 0 || j == n - 1 { 0.5 * h } else { h }).collect();
    (t, w)
}

pub fn to_frequency(f: &SpatialField) -> FreqField {
    let mut tr = Transform::new(&f.spec);
    let mut data = f.data.clone();
    tr.forward(&mut data);
    FreqField { spec: f.spec.clone(), data }
}

pub fn to_space(g: &FreqField) -> SpatialField {
    let mut tr = Transform::new(&g.spec);
    let mut data = g.data.clone();
    tr.inverse(&mut data);
    SpatialField { spec: g.spec.clone(), data }
}

/// Reusable normalized transform pair for one domain.
#[derive(Clone, Debug)]
pub struct Transform {
    fft: NdFft,
    scratch: Vec<Complex64>,
    forward_scale: f64,
    inverse_scale: f64,
}

impl Transform {
    pub fn new(spec: &DomainSpec) -> Self {
        let fft = NdFft::new(spec.grid());
        let scratch = vec![ZERO; fft.scratch_len()];
        let norm = (2.0 * PI).powf(-(spec.dim() as f64) / 2.0);
        Self { fft, scratch, forward_scale: norm * spec.cell_volume(), inverse_scale: norm * spec.lattice_weight() }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.fft.forward(data, &mut self.scratch);
        for z in data.iter_mut() {
            *z *= self.forward_scale;
        }
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.fft.inverse(data, &mut self.scratch);
        for z in data.iter_mut() {
            *z *= self.inverse_scale;
        }
    }

    /// Forward transform without the normalization factor.
    pub fn forward_raw(&mut self, data: &mut [Complex64]) {
        self.fft.forward(data, &mut self.scratch);
    }

    /// Inverse transform without the normalization factor.
    pub fn inverse_raw(&mut self, data: &mut [Complex64]) {
        self.fft.inverse(data, &mut self.scratch);
    }

    pub fn forward_scale(&self) -> f64 {
        self.forward_scale
    }

    pub fn inverse_scale(&self) -> f64 {
        self.inverse_scale
    }
}

/// Evaluates free evolutions on the physical grid.
#[derive(Clone, Debug)]
pub struct Evolver {
    transform: Transform,
    omega: Vec<f64>,
    cell_volume: f64,
    buf: Vec<Complex64>,
}

impl Evolver {
    pub fn new(spec: &DomainSpec) -> Self {
        Self {
            transform: Transform::new(spec),
            omega: spec.frequency_norms_sq(),
            cell_volume: spec.cell_volume(),
            buf: vec![ZERO; spec.len()],
        }
    }

    /// Physical values of `e^{it Delta} g` (left in the internal buffer).
    pub fn evolve_to_space(&mut self, g: &[Complex64], t: f64) -> &[Complex64] {
        for ((b, z), w) in self.buf.iter_mut().zip(g).zip(&self.omega) {
            *b = *z * Complex64::from_polar(1.0, -t * w);
        }
        self.transform.inverse(&mut self.buf);
        &self.buf
    }

    /// `int |e^{it Delta} g|^q dx` by grid quadrature.
    pub fn lq_integral(&mut self, g: &[Complex64], q: f64, t: f64) -> f64 {
        let cell = self.cell_volume;
        let v = self.evolve_to_space(g, t);
        let s: f64 = if q == 4.0 {
            v.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
        } else if q == 2.0 {
            v.iter().map(|z| z.norm_sqr()).sum()
        } else {
            v.iter().map(|z| z.norm().powf(q)).sum()
        };
        s * cell
    }

    pub fn spacetime_lq(&mut self, g: &[Complex64], q: f64, interval: (f64, f64), n_t: usize) -> f64 {
        let (ts, ws) = trapezoid(interval, n_t);
        let total: f64 = ts.iter().zip(&ws).map(|(&t, &w)| w * self.lq_integral(g, q, t)).sum();
        total.max(0.0).powf(1.0 / q)
    }

    pub fn spacetime_lq_checked(&mut self, g: &[Complex64], q: f64, interval: (f64, f64), n_t: usize) -> Quadrature {
        let value = self.spacetime_lq(g, q, interval, n_t);
        let refined = self.spacetime_lq(g, q, interval, 2 * n_t);
        let mut out = Quadrature { value, refined, converged: false };
        out.converged = out.relative_change() < QUADRATURE_TOLERANCE;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_on_torus_has_single_zero_mode() {
        let spec = DomainSpec::torus(4, 4).unwrap();
        let f = SpatialField::from_fn(spec, |_| Complex64::new(1.0, 0.0));
        let g = f.to_frequency();
        let expected = (2.0 * PI).powi(2);
        assert!((g.data()[0].re - expected).abs() < 1e-10);
        assert!(g.data()[1..].iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn character_maps_to_single_mode() {
        let spec = DomainSpec::torus(4, 8).unwrap();
        let f = SpatialField::from_fn(spec.clone(), |x| Complex64::from_polar(1.0, x[0]));
        let g = f.to_frequency();
        let target = spec.flat_of_lattice(&[1, 0, 0, 0]).unwrap();
        for (i, z) in g.data().iter().enumerate() {
            if i == target {
                assert!((z.norm() - (2.0 * PI).powi(2)).abs() < 1e-9);
            } else {
                assert!(z.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn single_mode_phase_after_pi() {
        let spec = DomainSpec::torus(4, 8).unwrap();
        let g = FreqField::single_mode(spec.clone(), &[1, 0, 0, 0]).unwrap();
        let h = g.propagate(PI);
        let flat = spec.flat_of_lattice(&[1, 0, 0, 0]).unwrap();
        let ratio = h.data()[flat] / g.data()[flat];
        assert!((ratio - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn shift_off_grid_is_rejected() {
        let spec = DomainSpec::uniform(1, 1, 8.0 * PI, 8).unwrap();
        let g = FreqField::single_mode(spec, &[0, 3]).unwrap();
        assert!(g.galilean_shift(&[0.0, 1.0]).is_err());
        assert!(g.galilean_shift(&[0.1, 0.0]).is_err());
        let h = g.galilean_shift(&[0.25, -1.0]).unwrap();
        let back = h.galilean_shift(&[-0.25, 1.0]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn single_mode_spacetime_l4() {
        let spec = DomainSpec::torus(4, 8).unwrap();
        let g = FreqField::single_mode(spec, &[1, 2, 0, -1]).unwrap();
        let v = g.spacetime_lq(4.0, (0.0, 1.0), 64);
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-12);
    }
}
