//! Strip decomposition and bilinear `L^2` estimates.
//!
//! Products of two free waves are evaluated exactly on the frequency
//! lattice: `u_1 u_2` has spatial Fourier coefficients indexed by
//! `zeta = xi + eta`, and the time integral of `|sum_p c_p e^{-it Omega_p}|^2`
//! against a weight `rho(t)` is `sum_{p,q} c_p conj(c_q) K(Omega_p - Omega_q)`
//! with `K` the Fourier transform of `rho`. For the band-limited window
//! `rho = psi^4` the kernel `K` vanishes outside `[-4, 4]`, so only nearly
//! resonant pairs interact.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::domain::{DomainSpec, Geometry, MAX_DIM};
use crate::error::{Error, Result};
use crate::field::FreqField;
use crate::lp;
use crate::rect::{dot, FreqRect};
use crate::rng;

/// One lattice mode `xi = k * spacing` with its coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub index: [i64; MAX_DIM],
    pub value: Complex64,
}

/// A frequency field with finitely many nonzero modes on the unbounded
/// lattice of a domain (no grid truncation).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseField {
    dim: usize,
    spacing: [f64; MAX_DIM],
    weight: f64,
    modes: Vec<Mode>,
}

impl SparseField {
    pub fn empty(spec: &DomainSpec) -> Self {
        let mut spacing = [0.0; MAX_DIM];
        for (a, s) in spacing.iter_mut().enumerate().take(spec.dim()) {
            *s = spec.spacing(a);
        }
        Self { dim: spec.dim(), spacing, weight: spec.lattice_weight(), modes: Vec::new() }
    }

    pub fn from_modes(spec: &DomainSpec, modes: Vec<Mode>) -> Self {
        Self { modes, ..Self::empty(spec) }
    }

    /// Nonzero modes of a grid field.
    pub fn from_field(field: &FreqField) -> Self {
        let spec = field.spec();
        let modes = field
            .data()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(i, &value)| Mode { index: spec.lattice_index(i), value })
            .collect();
        Self::from_modes(spec, modes)
    }

    /// Places the modes on the grid of `spec`; fails if one falls outside.
    pub fn to_field(&self, spec: &DomainSpec) -> Result<FreqField> {
        let mut out = FreqField::zeros(spec.clone());
        for m in &self.modes {
            let flat = spec
                .flat_of_lattice(&m.index[..self.dim])
                .ok_or_else(|| Error::Argument(format!("mode {:?} lies outside the grid", m.index)))?;
            out.data_mut()[flat] += m.value;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn frequency(&self, index: &[i64; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim {
            xi[a] = index[a] as f64 * self.spacing[a];
        }
        xi
    }

    pub fn omega(&self, index: &[i64; MAX_DIM]) -> f64 {
        self.frequency(index)[..self.dim].iter().map(|x| x * x).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.weight * self.modes.iter().map(|m| m.value.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Keeps the modes whose frequency satisfies `member`.
    pub fn restrict(&self, mut member: impl FnMut(&[f64]) -> bool) -> Self {
        let modes = self.modes.iter().filter(|m| member(&self.frequency(&m.index)[..self.dim])).copied().collect();
        Self { modes, ..self.clone() }
    }

    /// Multiplies every mode by `f(xi)`.
    pub fn multiply(&self, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode { index: m.index, value: m.value * f(&self.frequency(&m.index)[..self.dim]) })
            .collect();
        Self { modes, ..self.clone() }
    }

    /// Smooth dyadic projection `P_lambda`.
    pub fn project_dyadic(&self, lambda: f64) -> Result<Self> {
        lp::check_dyadic(lambda)?;
        Ok(self.multiply(|xi| lp::dyadic_multiplier(lambda, xi.iter().map(|x| x * x).sum::<f64>().sqrt())))
    }

    fn lattice_range(&self, axis: usize, lo: f64, hi: f64) -> (i64, i64) {
        let h = self.spacing[axis];
        ((lo / h - 1e-9).ceil() as i64, (hi / h + 1e-9).floor() as i64)
    }
}

/// Lattice indices of the nodes in the box `[lo, hi]` (per axis) that
/// satisfy `member`: all of them if there are at most `max_count`,
/// otherwise `max_count` distinct ones drawn uniformly.
pub fn box_nodes<R: Rng + ?Sized>(
    template: &SparseField,
    lo: &[f64],
    hi: &[f64],
    mut member: impl FnMut(&[f64]) -> bool,
    max_count: usize,
    rng: &mut R,
) -> Vec<[i64; MAX_DIM]> {
    let d = template.dim;
    let ranges: Vec<(i64, i64)> = (0..d).map(|a| template.lattice_range(a, lo[a], hi[a])).collect();
    if ranges.iter().any(|r| r.1 < r.0) {
        return Vec::new();
    }
    let total: f64 = ranges.iter().map(|r| (r.1 - r.0 + 1) as f64).product();
    let mut accept = |k: &[i64; MAX_DIM]| member(&template.frequency(k)[..d]);
    if total <= (4 * max_count.max(1)) as f64 && total <= 4e6 {
        let mut all = Vec::new();
        let mut k = [0i64; MAX_DIM];
        for (a, r) in ranges.iter().enumerate() {
            k[a] = r.0;
        }
        'odometer: loop {
            if accept(&k) {
                all.push(k);
            }
            let mut a = d;
            loop {
                if a == 0 {
                    break 'odometer;
                }
                a -= 1;
                if k[a] < ranges[a].1 {
                    k[a] += 1;
                    continue 'odometer;
                }
                k[a] = ranges[a].0;
            }
        }
        if all.len() <= max_count {
            return all;
        }
        // Partial Fisher-Yates keeps the draw uniform over the member set.
        for i in 0..max_count {
            let j = rng.gen_range(i..all.len());
            all.swap(i, j);
        }
        all.truncate(max_count);
        all.sort_unstable();
        return all;
    }
    let mut set = BTreeSet::new();
    let mut attempts = 0usize;
    while set.len() < max_count && attempts < 1000 * max_count.max(1) {
        attempts += 1;
        let mut k = [0i64; MAX_DIM];
        for (a, r) in ranges.iter().enumerate() {
            k[a] = rng.gen_range(r.0..=r.1);
        }
        if accept(&k) {
            set.insert(k);
        }
    }
    set.into_iter().collect()
}

/// Standard complex Gaussian coefficients on the given nodes.
pub fn gaussian_field<R: Rng + ?Sized>(spec: &DomainSpec, nodes: &[[i64; MAX_DIM]], rng: &mut R) -> SparseField {
    let modes = nodes.iter().map(|&index| Mode { index, value: rng::complex_gaussian(rng) }).collect();
    SparseField::from_modes(spec, modes)
}

/// The band-limited time window `psi(t) = int b(s) e^{its} ds` with
/// `b(s) = C exp(-1/(1 - s^2))` on `(-1, 1)`, normalized so `psi(0) = 1`.
///
/// Stores `G(omega) = int psi(t)^4 e^{-it omega} dt = 2 pi (b*b*b*b)(omega)`,
/// supported in `[-4, 4]`.
#[derive(Clone, Debug)]
pub struct Window {
    step: f64,
    norm: f64,
    profile: Vec<f64>,
    kernel: Vec<f64>,
}

const WINDOW_STEPS: usize = 256;

fn raw_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn convolve(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y * h;
        }
    }
    out
}

impl Default for Window {
    fn default() -> Self {
        Self::new()
    }
}

impl Window {
    pub fn new() -> Self {
        let step = 1.0 / WINDOW_STEPS as f64;
        let n = 2 * WINDOW_STEPS + 1;
        let raw: Vec<f64> = (0..n).map(|j| raw_profile(-1.0 + j as f64 * step)).collect();
        let mass: f64 = raw.iter().sum::<f64>() * step;
        let norm = 1.0 / mass;
        let profile: Vec<f64> = raw.iter().map(|x| x * norm).collect();
        let two = convolve(&profile, &profile, step);
        let four = convolve(&two, &two, step);
        let kernel = four.into_iter().map(|x| 2.0 * PI * x).collect();
        Self { step, norm, profile, kernel }
    }

    /// `b(s)`.
    pub fn profile(&self, s: f64) -> f64 {
        raw_profile(s) * self.norm
    }

    /// `psi(t)` by quadrature of the profile.
    pub fn psi(&self, t: f64) -> f64 {
        self.profile.iter().enumerate().map(|(j, b)| b * (t * (-1.0 + j as f64 * self.step)).cos()).sum::<f64>()
            * self.step
    }

    /// `G(omega)`, linearly interpolated; zero for `|omega| >= 4`.
    pub fn kernel(&self, omega: f64) -> f64 {
        let x = (omega + 4.0) / self.step;
        if !(x > 0.0) || x >= (self.kernel.len() - 1) as f64 {
            return 0.0;
        }
        let i = x.floor() as usize;
        let f = x - i as f64;
        self.kernel[i] * (1.0 - f) + self.kernel[i + 1] * f
    }
}

/// Time weight of a bilinear `L^2` norm.
#[derive(Clone, Copy, Debug)]
pub enum TimeWeight<'a> {
    /// `psi(t)^4` over the whole line.
    Window(&'a Window),
    /// The indicator of `[t0, t1]`.
    Interval(f64, f64),
}

impl TimeWeight<'_> {
    fn kernel(&self, omega: f64) -> Complex64 {
        match *self {
            TimeWeight::Window(w) => Complex64::new(w.kernel(omega), 0.0),
            TimeWeight::Interval(t0, t1) => {
                // int_{t0}^{t1} e^{-it omega} dt
                let len = t1 - t0;
                if (omega * len).abs() < 1e-8 {
                    Complex64::new(len, -0.5 * omega * (t1 * t1 - t0 * t0))
                } else {
                    let e = |t: f64| Complex64::from_polar(1.0, -t * omega);
                    (e(t1) - e(t0)) / Complex64::new(0.0, -omega)
                }
            }
        }
    }

    fn reach(&self) -> f64 {
        match self {
            TimeWeight::Window(_) => 4.0,
            TimeWeight::Interval(..) => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pair {
    group: i64,
    zeta: [i64; MAX_DIM],
    omega: f64,
    c: Complex64,
}

fn pairs(u1: &SparseField, u2: &SparseField, mut group: impl FnMut(&Mode) -> i64) -> Vec<Pair> {
    let mut out = Vec::with_capacity(u1.modes.len() * u2.modes.len());
    let om2: Vec<f64> = u2.modes.iter().map(|m| u2.omega(&m.index)).collect();
    for m1 in &u1.modes {
        let g = group(m1);
        let o1 = u1.omega(&m1.index);
        for (m2, o2) in u2.modes.iter().zip(&om2) {
            let mut zeta = [0i64; MAX_DIM];
            for a in 0..u1.dim {
                zeta[a] = m1.index[a] + m2.index[a];
            }
            out.push(Pair { group: g, zeta, omega: o1 + o2, c: m1.value * m2.value });
        }
    }
    out
}

/// `sum over (group, zeta) of int rho |sum_p c_p e^{-it Omega_p}|^2`.
fn grouped_norm_sq(mut ps: Vec<Pair>, weight: TimeWeight<'_>) -> f64 {
    ps.sort_by(|a, b| {
        (a.group, a.zeta)
            .cmp(&(b.group, b.zeta))
            .then(a.omega.partial_cmp(&b.omega).unwrap_or(core::cmp::Ordering::Equal))
    });
    let reach = weight.reach();
    let k0 = weight.kernel(0.0).re;
    let mut total = 0.0;
    let mut start = 0;
    while start < ps.len() {
        let mut end = start + 1;
        while end < ps.len() && ps[end].group == ps[start].group && ps[end].zeta == ps[start].zeta {
            end += 1;
        }
        let g = &ps[start..end];
        for p in 0..g.len() {
            total += g[p].c.norm_sqr() * k0;
            for q in p + 1..g.len() {
                let dw = g[p].omega - g[q].omega;
                if -dw >= reach {
                    break;
                }
                total += 2.0 * (g[p].c * g[q].c.conj() * weight.kernel(dw)).re;
            }
        }
        start = end;
    }
    total.max(0.0)
}

fn product_scale(u: &SparseField) -> f64 {
    (2.0 * PI).powi(-(u.dim as i32)) * u.weight.powi(3)
}

/// `||u_1 u_2||^2_{L^2(rho dt x M)}` for `u_j = e^{it Delta} phi_j`.
pub fn bilinear_norm_sq(phi1: &SparseField, phi2: &SparseField, weight: TimeWeight<'_>) -> f64 {
    product_scale(phi1) * grouped_norm_sq(pairs(phi1, phi2, |_| 0), weight)
}

/// The cube `C = xi_0 + [-mu, mu]^d` cut into the strips
/// `R_k = {xi in C : nu k - nu/2 <= xi . a < nu k + nu/2}`, `a = xi_0/|xi_0|`,
/// `nu = max(mu^2/lambda, 1)`.
///
/// The strips partition `C`; each lies in the closed rectangle of
/// [`StripFamily::strip_rect`], a member of the family with thickness `nu`
/// and size `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct StripFamily {
    center: Vec<f64>,
    mu: f64,
    lambda: f64,
    nu: f64,
    normal: Vec<f64>,
    k_min: i64,
    k_max: i64,
}

impl StripFamily {
    pub fn new(center: &[f64], mu: f64, lambda: f64) -> Result<Self> {
        let r = center.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(r > 0.0) {
            return Err(Error::Argument("the cube center must be nonzero".into()));
        }
        if !(mu >= 1.0 && mu <= lambda) {
            return Err(Error::Argument(format!("need 1 <= mu <= lambda, got mu={mu}, lambda={lambda}")));
        }
        if !(r >= 0.5 * lambda && r <= 2.0 * lambda) {
            return Err(Error::Argument(format!("|xi_0| = {r} is not comparable to lambda = {lambda}")));
        }
        let normal: Vec<f64> = center.iter().map(|x| x / r).collect();
        let nu = (mu * mu / lambda).max(1.0);
        let spread = mu * normal.iter().map(|x| x.abs()).sum::<f64>();
        let k_of = |s: f64| (s / nu + 0.5).floor() as i64;
        Ok(Self { center: center.to_vec(), mu, lambda, nu, k_min: k_of(r - spread), k_max: k_of(r + spread), normal })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn k_range(&self) -> (i64, i64) {
        (self.k_min, self.k_max)
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.k_max < self.k_min
    }

    pub fn in_cube(&self, xi: &[f64]) -> bool {
        xi.iter().zip(&self.center).all(|(x, c)| (x - c).abs() <= self.mu)
    }

    /// Index of the strip containing `xi`, if `xi` lies in the cube.
    pub fn strip_of(&self, xi: &[f64]) -> Option<i64> {
        self.in_cube(xi).then(|| (dot(xi, &self.normal) / self.nu + 0.5).floor() as i64)
    }

    pub fn in_strip(&self, k: i64, xi: &[f64]) -> bool {
        self.strip_of(xi) == Some(k)
    }

    /// The closed rectangle `{|xi - xi_0|_inf <= mu, |a . xi - nu k| <= nu}`.
    pub fn strip_rect(&self, k: i64) -> Result<FreqRect> {
        FreqRect::new(self.center.clone(), self.mu, self.normal.clone(), self.nu * k as f64, self.nu)
    }

    /// Lower and upper box corners of the cube.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.center.iter().map(|c| c - self.mu).collect(), self.center.iter().map(|c| c + self.mu).collect())
    }

    /// Time-frequency interval `[-nu^2 k^2 - c nu^2 |k| - 1, -nu^2 k^2 + c nu^2 |k| + 1]`.
    pub fn predicted_interval(&self, k: i64, c: f64) -> (f64, f64) {
        let kk = k as f64;
        let mid = -self.nu * self.nu * kk * kk;
        let half = c * self.nu * self.nu * kk.abs() + 1.0;
        (mid - half, mid + half)
    }

    /// Smallest `c` with `support` inside [`StripFamily::predicted_interval`].
    pub fn required_c(&self, k: i64, support: (f64, f64)) -> f64 {
        let kk = k as f64;
        let mid = -self.nu * self.nu * kk * kk;
        let scale = self.nu * self.nu * kk.abs();
        let excess = (support.1 - mid - 1.0).max(mid - support.0 - 1.0).max(0.0);
        if excess == 0.0 {
            0.0
        } else if scale == 0.0 {
            f64::INFINITY
        } else {
            excess / scale
        }
    }
}

/// Threshold, relative to the peak, defining the measured support.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;
const SUPPORT_STEP: f64 = 1.0 / 64.0;

/// Temporal-frequency support of `psi(t) e^{it Delta} phi`: the interval
/// where `m(tau) = sum_xi |phi(xi)|^2 b(tau + |xi|^2)^2` exceeds
/// [`SUPPORT_THRESHOLD`] times its peak. `None` for empty data.
pub fn time_freq_support(phi: &SparseField, window: &Window) -> Option<(f64, f64)> {
    let mut modes: Vec<(f64, f64)> =
        phi.modes.iter().map(|m| (-phi.omega(&m.index), m.value.norm_sqr())).filter(|m| m.1 > 0.0).collect();
    if modes.is_empty() {
        return None;
    }
    modes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    let lo = modes[0].0 - 1.0;
    let hi = modes[modes.len() - 1].0 + 1.0;
    let n = ((hi - lo) / SUPPORT_STEP).ceil() as usize + 1;
    let mut density = vec![0.0; n];
    let mut first = 0;
    for (j, m) in density.iter_mut().enumerate() {
        let tau = lo + j as f64 * SUPPORT_STEP;
        while first < modes.len() && modes[first].0 < tau - 1.0 {
            first += 1;
        }
        let mut s = 0.0;
        for &(centre, w) in &modes[first..] {
            if centre > tau + 1.0 {
                break;
            }
            let b = window.profile(tau - centre);
            s += w * b * b;
        }
        *m = s;
    }
    let peak = density.iter().fold(0.0f64, |a, &b| a.max(b));
    let level = SUPPORT_THRESHOLD * peak;
    let a = density.iter().position(|&m| m >= level)?;
    let b = density.iter().rposition(|&m| m >= level)?;
    Some((lo + a as f64 * SUPPORT_STEP, lo + b as f64 * SUPPORT_STEP))
}

/// `||P_C u_1 u_2||^2 / sum_k ||P_{R_k} u_1 u_2||^2` in `L^2(R x M)` for the
/// windowed solutions `u_j = psi(t) e^{it Delta} phi_j`.
pub fn ortho_ratio(phi1: &SparseField, phi2: &SparseField, family: &StripFamily, window: &Window) -> Result<f64> {
    let d = phi1.dim;
    let inside = phi1.restrict(|xi| family.in_cube(xi));
    let ps = pairs(&inside, phi2, |m| family.strip_of(&phi1.frequency(&m.index)[..d]).expect("restricted to the cube"));
    let strips = grouped_norm_sq(ps.clone(), TimeWeight::Window(window));
    let whole = grouped_norm_sq(ps.into_iter().map(|p| Pair { group: 0, ..p }).collect(), TimeWeight::Window(window));
    if !(strips > 0.0) {
        return Err(Error::Degenerate("the strip pieces of the product vanish".into()));
    }
    Ok(whole / strips)
}

/// `mu (mu/lambda + 1/mu)^delta`.
pub fn bilinear_scale(lambda: f64, mu: f64, delta: f64) -> f64 {
    mu * (mu / lambda + 1.0 / mu).powf(delta)
}

/// `||P_lambda u_1 P_mu u_2||_{L^2([0,1] x M)} / (mu (mu/lambda + 1/mu)^delta ||phi_1|| ||phi_2||)`.
pub fn bilinear_ratio(phi1: &SparseField, phi2: &SparseField, lambda: f64, mu: f64, delta: f64) -> Result<f64> {
    let den = bilinear_scale(lambda, mu, delta) * phi1.l2_norm() * phi2.l2_norm();
    if den == 0.0 {
        return Ok(0.0);
    }
    let p1 = phi1.project_dyadic(lambda)?;
    let p2 = phi2.project_dyadic(mu)?;
    Ok(bilinear_norm_sq(&p1, &p2, TimeWeight::Interval(0.0, 1.0)).sqrt() / den)
}

/// Exponent `delta` for which the bilinear estimate is proved on a geometry.
pub fn geometry_delta(geometry: Geometry) -> Result<f64> {
    geometry
        .known_gain()
        .ok_or_else(|| Error::Argument(format!("no gain exponent is known for {geometry} (open case)")))
}

/// Parameters of one seeded orthogonality/bilinear trial.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoSetup {
    pub spec: DomainSpec,
    pub lambda: f64,
    pub mu: f64,
    /// Largest number of modes drawn for each factor.
    pub modes: usize,
    pub seed: u64,
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoTrial {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub trial: usize,
    pub ortho_ratio: f64,
    pub bilinear_ratio: f64,
    /// Smallest `c` placing every strip's measured support in its interval.
    pub c_estimate: f64,
    pub strips: usize,
    pub seed: u64,
}

/// Draws `phi_1` on the cube around `xi_0 = lambda a` (random unit `a`) and
/// `phi_2` on `{mu/2 <= |eta| <= 2 mu}`, then measures the orthogonality
/// ratio, the bilinear ratio and the time-frequency constant.
pub fn ortho_trial(setup: &OrthoSetup, trial: usize, window: &Window) -> Result<OrthoTrial> {
    lp::check_dyadic(setup.lambda)?;
    lp::check_dyadic(setup.mu)?;
    let spec = &setup.spec;
    let d = spec.dim();
    let delta = geometry_delta(spec.geometry())?;
    let seed = rng::derive_seed(setup.seed, &[trial as u64]);
    let mut rng = rng::from_seed(seed);
    let a = rng::unit_vector(&mut rng, d);
    let xi0: Vec<f64> = a.iter().map(|x| x * setup.lambda).collect();
    let family = StripFamily::new(&xi0, setup.mu, setup.lambda)?;
    let template = SparseField::empty(spec);
    let (lo, hi) = family.bounds();
    let nodes1 = box_nodes(&template, &lo, &hi, |_| true, setup.modes, &mut rng);
    let r2 = 2.0 * setup.mu;
    let lo2 = vec![-r2; d];
    let hi2 = vec![r2; d];
    let inner = if setup.mu > 1.0 { 0.5 * setup.mu } else { 0.0 };
    let nodes2 = box_nodes(
        &template,
        &lo2,
        &hi2,
        |eta| {
            let r = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
            r >= inner && r <= r2
        },
        setup.modes,
        &mut rng,
    );
    let phi1 = gaussian_field(spec, &nodes1, &mut rng);
    let phi2 = gaussian_field(spec, &nodes2, &mut rng);
    let ortho = ortho_ratio(&phi1, &phi2, &family, window)?;
    let bil = bilinear_ratio(&phi1, &phi2, setup.lambda, setup.mu, delta)?;
    let mut c_est: f64 = 0.0;
    let mut strips = 0;
    let (k0, k1) = family.k_range();
    for k in k0..=k1 {
        let piece = phi1.restrict(|xi| family.in_strip(k, xi));
        if let Some(s) = time_freq_support(&piece, window) {
            strips += 1;
            c_est = c_est.max(family.required_c(k, s));
        }
    }
    Ok(OrthoTrial {
        lambda: setup.lambda,
        mu: setup.mu,
        nu: family.nu(),
        trial,
        ortho_ratio: ortho,
        bilinear_ratio: bil,
        c_estimate: c_est,
        strips,
        seed,
    })
}

/// Largest [`OrthoTrial::bilinear_ratio`] over `trials` seeded trials.
pub fn bilinear_constant(setup: &OrthoSetup, trials: usize, window: &Window) -> Result<f64> {
    let mut best: f64 = 0.0;
    for t in 0..trials {
        best = best.max(ortho_trial(setup, t, window)?.bilinear_ratio);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_kernel_shape() {
        let w = Window::new();
        assert_eq!(w.kernel(4.5), 0.0);
        assert_eq!(w.kernel(-4.0), 0.0);
        assert!((w.kernel(0.3) - w.kernel(-0.3)).abs() < 1e-12);
        assert!((w.psi(0.0) - 1.0).abs() < 1e-9);
        // G(0) = int psi^4
        let h = 0.01;
        let direct: f64 = (-6000..=6000).map(|j| w.psi(j as f64 * h).powi(4) * h).sum();
        assert!((w.kernel(0.0) - direct).abs() < 1e-4 * direct, "{} vs {direct}", w.kernel(0.0));
    }

    #[test]
    fn window_is_positive_on_unit_interval() {
        let w = Window::new();
        assert!((0..=10).all(|j| w.psi(j as f64 / 10.0) > 0.0));
    }

    #[test]
    fn strip_width_floor() {
        let f = StripFamily::new(&[16.0, 0.0, 0.0, 0.0], 4.0, 16.0).unwrap();
        assert_eq!(f.nu(), 1.0);
        let f = StripFamily::new(&[16.0, 0.0, 0.0, 0.0], 16.0, 16.0).unwrap();
        assert_eq!(f.nu(), 16.0);
        assert!(f.len() <= 3);
        assert!(StripFamily::new(&[0.0; 4], 4.0, 16.0).is_err());
    }
}
