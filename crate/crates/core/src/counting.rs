//! Mixed Lebesgue/counting measures of annuli and of the convolution sets
//! `A(tau, xi)`, `B(tau, xi)`.
//!
//! Frequencies live in `R^m x Z^n`; line coordinates carry Lebesgue measure
//! and circle coordinates counting measure. Set measures are computed by
//! scanning the circle coordinates exactly, the line coordinates but the
//! last on a midpoint grid, and integrating the last line coordinate in
//! closed form (every constraint is an interval or a quadratic band in it).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::domain::{Geometry, MAX_DIM};
use crate::error::{Error, Result};
use crate::lp;
use crate::rng;

/// The set `{(xi, n) in R x Z : c <= (xi - d)^2 + (n - e)^2 <= c + k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusQuery {
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub k: f64,
}

impl AnnulusQuery {
    pub fn new(c: f64, d: f64, e: f64, k: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!("c={c} must be finite and nonnegative")));
        }
        if !(k >= 1.0 && k.is_finite()) {
            return Err(Error::Argument(format!("k={k} must be finite and at least 1")));
        }
        if !(d.is_finite() && e.is_finite()) {
            return Err(Error::Argument("d and e must be finite".into()));
        }
        Ok(Self { c, d, e, k })
    }
}

/// Exact measure `h(c + k) - h(c)`, one interval pair per integer `n`.
pub fn annulus_measure(q: &AnnulusQuery) -> f64 {
    let outer = q.c + q.k;
    let r = outer.sqrt();
    let lo = (q.e - r).ceil() as i64;
    let hi = (q.e + r).floor() as i64;
    let mut total = 0.0;
    for n in lo..=hi {
        let s = (n as f64 - q.e).powi(2);
        total += 2.0 * ((outer - s).max(0.0).sqrt() - (q.c - s).max(0.0).sqrt());
    }
    total
}

/// Monte-Carlo estimate of [`annulus_measure`] and its standard error,
/// sampling `xi` uniformly on the bounding interval and `n` uniformly on
/// the admissible integers.
pub fn annulus_monte_carlo<R: Rng + ?Sized>(q: &AnnulusQuery, points: usize, rng: &mut R) -> (f64, f64) {
    let r = (q.c + q.k).sqrt();
    let lo = (q.e - r).ceil() as i64;
    let hi = (q.e + r).floor() as i64;
    if hi < lo || points == 0 {
        return (0.0, 0.0);
    }
    let box_measure = 2.0 * r * (hi - lo + 1) as f64;
    let mut hits = 0usize;
    for _ in 0..points {
        let n = rng.gen_range(lo..=hi) as f64;
        let x = q.d + r * (2.0 * rng.gen::<f64>() - 1.0);
        let s = (x - q.d).powi(2) + (n - q.e).powi(2);
        if q.c <= s && s <= q.c + q.k {
            hits += 1;
        }
    }
    let p = hits as f64 / points as f64;
    let se = (p * (1.0 - p) / points as f64).sqrt();
    (box_measure * p, box_measure * se)
}

/// How the offset `e` is chosen in [`annulus_sup_scan`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OffsetMode {
    /// `e` uniform on `[0, 1)`.
    Sampled,
    Fixed(f64),
}

/// Largest `V / k` found for one `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnulusSup {
    pub k: f64,
    pub ratio: f64,
    pub c: f64,
    pub e: f64,
    pub samples: usize,
}

/// Upper end of the sampled range of `c`.
pub const ANNULUS_C_MAX: f64 = 1e6;
/// Tangent radii `c = (j - e)^2`, `j = 0..TANGENT_POINTS`, added to the scan.
pub const TANGENT_POINTS: usize = 1001;

/// `sup V(c, 0, e, k) / k` over seeded `c in [0, 10^6]`, the origin, and
/// the tangent configurations `c = (j - e)^2` where one circle of the
/// inner boundary degenerates to a point.
pub fn annulus_sup_scan(k_set: &[f64], samples: usize, seed: u64, mode: OffsetMode) -> Result<Vec<AnnulusSup>> {
    if samples == 0 {
        return Err(Error::Argument("samples must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(k_set.len());
    for (ki, &k) in k_set.iter().enumerate() {
        let mut rng = rng::stream(seed, &[ki as u64]);
        let mut best = AnnulusSup { k, ratio: 0.0, c: 0.0, e: 0.0, samples: 0 };
        let consider = |c: f64, e: f64, best: &mut AnnulusSup| -> Result<()> {
            let v = annulus_measure(&AnnulusQuery::new(c, 0.0, e, k)?) / k;
            best.samples += 1;
            if v > best.ratio {
                best.ratio = v;
                best.c = c;
                best.e = e;
            }
            Ok(())
        };
        let structured_e = match mode {
            OffsetMode::Fixed(e) => vec![e],
            OffsetMode::Sampled => vec![0.0, 0.5],
        };
        for &e in &structured_e {
            consider(0.0, e, &mut best)?;
            for j in 0..TANGENT_POINTS {
                consider((j as f64 - e).powi(2), e, &mut best)?;
            }
        }
        for _ in 0..samples {
            let c = ANNULUS_C_MAX * rng.gen::<f64>();
            let e = match mode {
                OffsetMode::Fixed(e) => e,
                OffsetMode::Sampled => rng.gen::<f64>(),
            };
            consider(c, e, &mut best)?;
        }
        out.push(best);
    }
    Ok(out)
}

/// A query for the sets `A(tau, xi)` and `B(tau, xi)` with the rectangle in
/// origin form `R = {|eta| <= lambda, |a . eta| <= mu}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvSetQuery {
    pub geometry: Geometry,
    pub tau: f64,
    pub xi: Vec<f64>,
    pub normal: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub cutoff: f64,
}

impl ConvSetQuery {
    pub fn validate(&self) -> Result<()> {
        let d = self.geometry.dim();
        if self.geometry.m == 0 || d > MAX_DIM {
            return Err(Error::Argument(format!(
                "set measures need at least one line axis and d <= 4, got {}",
                self.geometry
            )));
        }
        if self.xi.len() != d || self.normal.len() != d {
            return Err(Error::Argument(format!("xi and a must have dimension {d}")));
        }
        let norm: f64 = self.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("normal has length {norm}, expected 1")));
        }
        if self.xi[self.geometry.m..].iter().any(|x| x.fract() != 0.0) {
            return Err(Error::Argument("circle components of xi must be integers".into()));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::Argument(format!("cutoff={} must be positive", self.cutoff)));
        }
        if !(self.mu > 0.0 && self.lambda > 0.0 && self.tau.is_finite()) {
            return Err(Error::Argument("lambda, mu must be positive and tau finite".into()));
        }
        Ok(())
    }

    /// Squared radius `s0` of the sphere `|eta - xi/2|^2 = s0` on which
    /// `tau + |eta|^2 + |xi - eta|^2` vanishes.
    pub fn shell_radius_sq(&self) -> f64 {
        let xi2: f64 = self.xi.iter().map(|x| x * x).sum();
        -(self.tau + 0.5 * xi2) / 2.0
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Integrand {
    /// Indicator of `|g| <= cutoff`, `eta in R`.
    Band,
    /// Length of the `sigma` fiber, `max(0, 2 cutoff - |g|)`, with `eta` and
    /// `xi - eta` in `R`.
    Fiber,
}

type Interval = (f64, f64);

fn intersect(a: Interval, b: Interval) -> Interval {
    (a.0.max(b.0), a.1.min(b.1))
}

fn is_empty(a: Interval) -> bool {
    !(a.0 <= a.1)
}

/// `{x : |x| <= r}` for `r^2 = r2`.
fn centered(r2: f64) -> Interval {
    if r2 < 0.0 {
        (1.0, -1.0)
    } else {
        let r = r2.sqrt();
        (-r, r)
    }
}

/// `{x : |a x + b| <= mu}`, or everything / nothing when `a = 0`.
fn slab(a: f64, b: f64, mu: f64) -> Interval {
    if a == 0.0 {
        if b.abs() <= mu {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (1.0, -1.0)
        }
    } else {
        let (x, y) = ((-mu - b) / a, (mu - b) / a);
        (x.min(y), x.max(y))
    }
}

/// `{u : alpha <= u^2 <= beta}` as up to two intervals.
fn square_band(alpha: f64, beta: f64) -> [Interval; 2] {
    const EMPTY: Interval = (1.0, -1.0);
    if beta < 0.0 || alpha > beta {
        return [EMPTY, EMPTY];
    }
    let sb = beta.sqrt();
    if alpha <= 0.0 {
        [(-sb, sb), EMPTY]
    } else {
        let sa = alpha.sqrt();
        [(-sb, -sa), (sa, sb)]
    }
}

/// `int_{[lo, hi]} (c0 + c2 u^2) du`.
fn poly_integral(c0: f64, c2: f64, iv: Interval) -> f64 {
    if is_empty(iv) {
        return 0.0;
    }
    c0 * (iv.1 - iv.0) + c2 * (iv.1.powi(3) - iv.0.powi(3)) / 3.0
}

struct SetScan<'a> {
    q: &'a ConvSetQuery,
    integrand: Integrand,
    /// Quadrature nodes of the scanned line axes.
    nodes: Vec<f64>,
    weight: f64,
    /// `tau + |xi|^2 / 2`.
    base: f64,
    /// Upper end of the admissible band of `g`.
    g_max: f64,
    eta: [f64; MAX_DIM],
}

impl SetScan<'_> {
    fn exact_axis(&self) -> usize {
        self.q.geometry.m - 1
    }

    /// Scan order: circle axes, then all line axes but the exact one.
    fn scan_axes(&self) -> Vec<usize> {
        let g = self.q.geometry;
        (g.m..g.dim()).chain(0..g.m - 1).collect()
    }

    fn run(&mut self) -> f64 {
        let axes = self.scan_axes();
        self.recurse(&axes, 0, 0.0, 0.0, 1.0)
    }

    fn recurse(&mut self, axes: &[usize], level: usize, eta2: f64, shell: f64, w: f64) -> f64 {
        let lambda2 = self.q.lambda * self.q.lambda;
        if eta2 > lambda2 || self.base + shell > self.g_max {
            return 0.0;
        }
        if level == axes.len() {
            return w * self.leaf();
        }
        let axis = axes[level];
        let half_xi = 0.5 * self.q.xi[axis];
        let mut total = 0.0;
        if axis >= self.q.geometry.m {
            let r = self.q.lambda.floor() as i64;
            for n in -r..=r {
                let x = n as f64;
                self.eta[axis] = x;
                total += self.recurse(axes, level + 1, eta2 + x * x, shell + 2.0 * (x - half_xi).powi(2), w);
            }
        } else {
            let weight = self.weight;
            for j in 0..self.nodes.len() {
                let x = self.nodes[j];
                self.eta[axis] = x;
                total += self.recurse(axes, level + 1, eta2 + x * x, shell + 2.0 * (x - half_xi).powi(2), w * weight);
            }
        }
        total
    }

    /// Exact integral over the last line coordinate.
    fn leaf(&self) -> f64 {
        let q = self.q;
        let d = q.geometry.dim();
        let ax = self.exact_axis();
        let mut rest2 = 0.0;
        let mut dot = 0.0;
        let mut shell = 0.0;
        let mut diff2 = 0.0;
        let mut diff_dot = 0.0;
        for i in 0..d {
            if i == ax {
                continue;
            }
            let e = self.eta[i];
            rest2 += e * e;
            dot += q.normal[i] * e;
            shell += 2.0 * (e - 0.5 * q.xi[i]).powi(2);
            diff2 += (q.xi[i] - e).powi(2);
            diff_dot += q.normal[i] * (q.xi[i] - e);
        }
        let lambda2 = q.lambda * q.lambda;
        let a = q.normal[ax];
        let mut dom = intersect(centered(lambda2 - rest2), slab(a, dot, q.mu));
        if self.integrand == Integrand::Fiber {
            // |xi - eta| <= lambda and |a . (xi - eta)| <= mu, in x = eta_ax.
            let c = q.xi[ax];
            let ball = centered(lambda2 - diff2);
            dom = intersect(dom, (c + ball.0, c + ball.1));
            dom = intersect(dom, slab(-a, diff_dot + a * c, q.mu));
        }
        if is_empty(dom) {
            return 0.0;
        }
        // g = k0 + 2 u^2 with u = x - xi_ax / 2.
        let center = 0.5 * q.xi[ax];
        let k0 = self.base + shell;
        let dom_u = (dom.0 - center, dom.1 - center);
        let cut = q.cutoff;
        match self.integrand {
            Integrand::Band => square_band((-cut - k0) / 2.0, (cut - k0) / 2.0)
                .iter()
                .map(|&iv| {
                    let s = intersect(iv, dom_u);
                    if is_empty(s) {
                        0.0
                    } else {
                        s.1 - s.0
                    }
                })
                .sum(),
            Integrand::Fiber => {
                let two = 2.0 * cut;
                // 0 <= g <= 2 cut: 2 cut - k0 - 2 u^2.
                let pos: f64 = square_band(-k0 / 2.0, (two - k0) / 2.0)
                    .iter()
                    .map(|&iv| poly_integral(two - k0, -2.0, intersect(iv, dom_u)))
                    .sum();
                // -2 cut <= g < 0: 2 cut + k0 + 2 u^2.
                let neg: f64 = square_band((-two - k0) / 2.0, -k0 / 2.0)
                    .iter()
                    .map(|&iv| poly_integral(two + k0, 2.0, intersect(iv, dom_u)))
                    .sum();
                pos + neg
            }
        }
    }
}

fn scan(q: &ConvSetQuery, integrand: Integrand, h: f64, cutoff: f64) -> Result<f64> {
    q.validate()?;
    if !(h > 0.0) {
        return Err(Error::Argument(format!("resolution h={h} must be positive")));
    }
    let count = ((2.0 * q.lambda / h) - 1e-9).ceil().max(1.0) as usize;
    let step = 2.0 * q.lambda / count as f64;
    let nodes = (0..count).map(|j| -q.lambda + (j as f64 + 0.5) * step).collect();
    let xi2: f64 = q.xi.iter().map(|x| x * x).sum();
    let g_max = match integrand {
        Integrand::Band => cutoff,
        Integrand::Fiber => 2.0 * cutoff,
    };
    let mut query = q.clone();
    query.cutoff = cutoff;
    let mut s =
        SetScan { q: &query, integrand, nodes, weight: step, base: q.tau + 0.5 * xi2, g_max, eta: [0.0; MAX_DIM] };
    Ok(s.run())
}

/// Relative change tolerated when the line-axis resolution is halved.
pub const REFINEMENT_TOLERANCE: f64 = 0.01;

/// A set measure together with its resolution check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetMeasure {
    /// Value at the refined resolution `h / 2`.
    pub value: f64,
    /// Value at resolution `h`.
    pub coarse: f64,
    pub resolved: bool,
}

fn refinement_ok(coarse: f64, fine: f64) -> bool {
    let scale = fine.abs().max(coarse.abs());
    scale == 0.0 || (fine - coarse).abs() <= REFINEMENT_TOLERANCE * scale
}

/// `|B(tau, xi)|` at resolution `h` with the halving check.
///
/// The defining inequality is `|tau + |eta|^2 + |xi - eta|^2| <= cutoff`.
pub fn set_b_measure(q: &ConvSetQuery, h: f64) -> Result<SetMeasure> {
    let coarse = scan(q, Integrand::Band, h, q.cutoff)?;
    let value = if q.geometry.m > 1 { scan(q, Integrand::Band, h / 2.0, q.cutoff)? } else { coarse };
    Ok(SetMeasure { value, coarse, resolved: refinement_ok(coarse, value) })
}

/// `|B(tau, xi)|` at a single resolution, with the band `|g| <= cutoff`.
pub fn set_b_measure_at(q: &ConvSetQuery, h: f64, cutoff: f64) -> Result<f64> {
    scan(q, Integrand::Band, h, cutoff)
}

/// `|A(tau, xi)|` at resolution `h`: for each `eta` with `eta, xi - eta`
/// in `R`, the `sigma` fiber `{|sigma + |eta|^2| <= cutoff,
/// |tau - sigma + |xi - eta|^2| <= cutoff}` is integrated exactly.
pub fn set_a_measure(q: &ConvSetQuery, h: f64) -> Result<f64> {
    scan(q, Integrand::Fiber, h, q.cutoff)
}

/// Default line-axis resolution `lambda / 64`.
pub fn default_resolution(lambda: f64) -> f64 {
    lambda / 64.0
}

/// `|I_1| = |{(eta_1, eta_4) in R x Z : |a_1 eta_1 + a_4 eta_4| <= mu,
/// |eta_1| <= lambda, |eta_4| <= lambda}|`.
pub fn i1_measure_line_circle(a1: f64, a4: f64, lambda: f64, mu: f64) -> f64 {
    let r = lambda.floor() as i64;
    (-r..=r)
        .map(|n| {
            let iv = intersect((-lambda, lambda), slab(a1, a4 * n as f64, mu));
            if is_empty(iv) {
                0.0
            } else {
                iv.1 - iv.0
            }
        })
        .sum()
}

/// `#{(eta_3, eta_4) in Z^2 : |eta_3| + |eta_4| <= lambda,
/// |a_3 eta_3 + a_4 eta_4| <= mu^{1/3} lambda^{2/3}}`.
pub fn i1_count_circle_circle(a3: f64, a4: f64, lambda: f64, mu: f64) -> usize {
    let width = mu.powf(1.0 / 3.0) * lambda.powf(2.0 / 3.0);
    let r = lambda.floor() as i64;
    let mut count = 0;
    for x in -r..=r {
        for y in -(r - x.abs())..=(r - x.abs()) {
            if (a3 * x as f64 + a4 * y as f64).abs() <= width {
                count += 1;
            }
        }
    }
    count
}

/// The bound `|B| <~ g(lambda, mu)` proved for a geometry:
/// `mu lambda` on `R^3 x T`, `mu^{1/3} lambda^{5/3}` on `R^2 x T^2`.
pub fn case_normalization(geometry: Geometry, lambda: f64, mu: f64) -> Result<f64> {
    match (geometry.m, geometry.n) {
        (3, 1) => Ok(mu * lambda),
        (2, 2) => Ok(mu.powf(1.0 / 3.0) * lambda.powf(5.0 / 3.0)),
        _ => Err(Error::Argument(format!("no measure bound is claimed for {geometry} (open case)"))),
    }
}

/// Threshold `a_1 = (mu / lambda)^{1/3} / 2` separating the two subcases on
/// `R^2 x T^2`.
pub fn subcase_threshold(lambda: f64, mu: f64) -> f64 {
    0.5 * (mu / lambda).powf(1.0 / 3.0)
}

/// Parameters of [`case_sample`].
#[derive(Clone, Debug, PartialEq)]
pub struct CaseScan {
    pub geometry: Geometry,
    pub lambdas: Vec<f64>,
    pub mus: MuChoice,
    /// Random samples per cell, on top of the structured ones.
    pub samples: usize,
    pub seed: u64,
    pub cutoff: f64,
    /// Line-axis resolution as a fraction of `lambda`.
    pub resolution: f64,
}

/// Thicknesses scanned for each `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MuChoice {
    AllDyadic,
    Fixed(f64),
}

/// Shell radii (as fractions of `lambda^2`) of the structured samples.
pub const STRUCTURED_RADII: [f64; 5] = [0.0, 1.0 / 16.0, 0.25, 0.5, 0.75];

impl CaseScan {
    pub fn validate(&self) -> Result<()> {
        case_normalization(self.geometry, 1.0, 1.0)?;
        for &l in &self.lambdas {
            lp::check_dyadic(l)?;
        }
        if !(self.cutoff > 0.0 && self.resolution > 0.0) {
            return Err(Error::Argument("cutoff and resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.lambdas
            .iter()
            .flat_map(|&l| {
                let mus: Vec<f64> = match self.mus {
                    MuChoice::AllDyadic => lp::dyadics_up_to(l).collect(),
                    MuChoice::Fixed(mu) if mu <= l => vec![mu],
                    MuChoice::Fixed(_) => Vec::new(),
                };
                mus.into_iter().map(move |m| (l, m))
            })
            .collect()
    }

    pub fn structured_count(&self) -> usize {
        self.geometry.dim() * STRUCTURED_RADII.len()
    }

    pub fn samples_per_cell(&self) -> usize {
        self.structured_count() + self.samples
    }

    /// The query of sample `index` in cell `cell`: first the axis-aligned
    /// normals with `xi = 0` on a ladder of shell radii, then seeded random
    /// `(tau, xi, a)`. On `R^2 x T^2` random samples alternate between the
    /// two subcases by steering the line part of `a`.
    pub fn query(&self, cell: usize, index: usize) -> ConvSetQuery {
        let (lambda, mu) = self.cells()[cell];
        let g = self.geometry;
        let d = g.dim();
        let structured = self.structured_count();
        let (xi, normal, s0) = if index < structured {
            let axis = index / STRUCTURED_RADII.len();
            let mut a = vec![0.0; d];
            a[axis] = 1.0;
            let s0 = STRUCTURED_RADII[index % STRUCTURED_RADII.len()] * lambda * lambda;
            (vec![0.0; d], a, s0)
        } else {
            let mut rng = rng::stream(self.seed, &[cell as u64, index as u64]);
            let xi: Vec<f64> = (0..d)
                .map(|a| {
                    if a < g.m {
                        lambda * (2.0 * rng.gen::<f64>() - 1.0)
                    } else {
                        let r = lambda.floor() as i64;
                        rng.gen_range(-r..=r) as f64
                    }
                })
                .collect();
            let normal = if (g.m, g.n) == (2, 2) {
                let thr = subcase_threshold(lambda, mu).min(1.0);
                let line =
                    if index.is_multiple_of(2) { thr + (1.0 - thr) * rng.gen::<f64>() } else { thr * rng.gen::<f64>() };
                let u = rng::unit_vector(&mut rng, 2);
                let v = rng::unit_vector(&mut rng, 2);
                let circ = (1.0 - line * line).max(0.0).sqrt();
                vec![line * u[0], line * u[1], circ * v[0], circ * v[1]]
            } else {
                rng::unit_vector(&mut rng, d)
            };
            let s0 = lambda * lambda * rng.gen::<f64>();
            (xi, normal, s0)
        };
        let xi2: f64 = xi.iter().map(|x| x * x).sum();
        ConvSetQuery { geometry: g, tau: -2.0 * s0 - 0.5 * xi2, xi, normal, lambda, mu, cutoff: self.cutoff }
    }
}

/// Result of one sampled query.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseSample {
    pub cell: usize,
    pub index: usize,
    pub query: ConvSetQuery,
    pub b: SetMeasure,
    pub normalized_ratio: f64,
    /// `|A|` with the query's cutoff.
    pub a: f64,
    /// `|B|` with twice the cutoff, at the same resolution as `a`.
    pub b_double: f64,
}

impl CaseSample {
    /// `|A| <= 2 cutoff |B_{2 cutoff}|`, up to round-off.
    pub fn fiber_holds(&self) -> bool {
        let rhs = 2.0 * self.query.cutoff * self.b_double;
        self.a <= rhs * (1.0 + 1e-12) + 1e-12
    }
}

pub fn case_sample(scan: &CaseScan, cell: usize, index: usize) -> Result<CaseSample> {
    let query = scan.query(cell, index);
    let h = scan.resolution * query.lambda;
    let b = set_b_measure(&query, h)?;
    let a = set_a_measure(&query, h)?;
    let b_double = set_b_measure_at(&query, h, 2.0 * query.cutoff)?;
    let norm = case_normalization(query.geometry, query.lambda, query.mu)?;
    Ok(CaseSample { cell, index, normalized_ratio: b.value / norm, query, b, a, b_double })
}

/// Per-cell supremum of [`case_sample`] results.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseCell {
    pub lambda: f64,
    pub mu: f64,
    pub best: CaseSample,
    pub samples: usize,
    pub all_resolved: bool,
    pub fiber_holds: bool,
}

pub fn reduce_case_cells(scan: &CaseScan, samples: &[CaseSample]) -> Vec<CaseCell> {
    let cells = scan.cells();
    let mut out: Vec<Option<CaseCell>> = vec![None; cells.len()];
    for s in samples {
        let slot = &mut out[s.cell];
        match slot {
            None => {
                *slot = Some(CaseCell {
                    lambda: cells[s.cell].0,
                    mu: cells[s.cell].1,
                    best: s.clone(),
                    samples: 1,
                    all_resolved: s.b.resolved,
                    fiber_holds: s.fiber_holds(),
                })
            }
            Some(c) => {
                c.samples += 1;
                c.all_resolved &= s.b.resolved;
                c.fiber_holds &= s.fiber_holds();
                if s.normalized_ratio > c.best.normalized_ratio {
                    c.best = s.clone();
                }
            }
        }
    }
    out.into_iter().flatten().collect()
}

/// Sequential [`case_sample`] over every cell and sample.
pub fn case_bound_report(scan: &CaseScan) -> Result<Vec<CaseCell>> {
    scan.validate()?;
    let mut all = Vec::new();
    for cell in 0..scan.cells().len() {
        for index in 0..scan.samples_per_cell() {
            all.push(case_sample(scan, cell, index)?);
        }
    }
    Ok(reduce_case_cells(scan, &all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_annulus() {
        let q = AnnulusQuery::new(0.0, 0.0, 0.0, 1.0).unwrap();
        assert!((annulus_measure(&q) - 2.0).abs() < 1e-15);
        let q = AnnulusQuery::new(0.0, 0.0, 0.0, 4.0).unwrap();
        assert!((annulus_measure(&q) - (4.0 + 4.0 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn annulus_query_validation() {
        assert!(AnnulusQuery::new(-1.0, 0.0, 0.0, 1.0).is_err());
        assert!(AnnulusQuery::new(0.0, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn axis_normal_i1_value() {
        let v = i1_measure_line_circle(1.0, 0.0, 16.0, 2.0);
        assert!((v - 2.0 * 2.0 * 33.0).abs() < 1e-12);
    }

    #[test]
    fn square_band_shapes() {
        let b = square_band(-1.0, 4.0);
        assert_eq!(b[0], (-2.0, 2.0));
        assert!(is_empty(b[1]));
        let b = square_band(1.0, 4.0);
        assert_eq!(b, [(-2.0, -1.0), (1.0, 2.0)]);
    }
}
