//! Frequency-localized `L^q` Strichartz ratios and their maximization.
//!
//! For a rectangle `R` the quantity of interest is
//! `K(R) = sup ||P_R e^{it Delta} u||_{L^q([0,1] x M)} / ||P_R u||_{L^2}`.
//! [`RatioProblem`] evaluates the `q`-th power of the numerator and its
//! gradient on the lattice nodes of `R`; [`maximize_ratio`] runs seeded
//! projected-gradient ascent on the unit sphere. The scan helpers sample
//! rectangles over dyadic `(lambda, mu)` cells and fit the power laws.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::domain::{DomainSpec, Geometry};
use crate::error::{Error, Result};
use crate::field::{trapezoid, Evolver, FreqField, Transform, QUADRATURE_TOLERANCE};
use crate::lp;
use crate::rect::{dot, FreqRect};
use crate::rng;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const PHASE_TABLE_LIMIT: usize = 1 << 21;

/// Exponent `d/2 - (d+2)/q` of `lambda` in the scale-invariant estimate.
pub fn scaling_exponent(dim: usize, q: f64) -> f64 {
    dim as f64 / 2.0 - (dim as f64 + 2.0) / q
}

/// `||P_R e^{it Delta} phi||_{L^q(T x M)} / ||P_R phi||_{L^2}`.
pub fn strichartz_ratio(phi: &FreqField, rect: &FreqRect, q: f64, interval: (f64, f64), n_t: usize) -> Result<f64> {
    let projected = phi.project_rect(rect);
    let mass = projected.l2_norm();
    if !(mass > 0.0) {
        return Err(Error::Degenerate("the rectangle carries no mass of the data".into()));
    }
    Ok(projected.spacetime_lq(q, interval, n_t) / mass)
}

/// The functional `Phi(u) = int_T int_M |e^{it Delta} u|^q` restricted to
/// the grid nodes of a rectangle, with trapezoid quadrature in time.
///
/// Coefficients `u` are indexed by the rectangle's nodes, in grid order.
#[derive(Clone, Debug)]
pub struct RatioProblem {
    spec: DomainSpec,
    q: f64,
    support: Vec<usize>,
    omega: Vec<f64>,
    times: Vec<f64>,
    weights: Vec<f64>,
    phases: Option<Vec<Complex64>>,
    transform: Transform,
    buf: Vec<Complex64>,
    cell: f64,
    lattice_weight: f64,
}

impl RatioProblem {
    pub fn new(spec: &DomainSpec, rect: &FreqRect, q: f64, interval: (f64, f64), n_t: usize) -> Result<Self> {
        if !(q >= 2.0) {
            return Err(Error::Argument(format!("exponent q={q} must be at least 2")));
        }
        if rect.dim() != spec.dim() {
            return Err(Error::Argument(format!("rectangle has dimension {}, domain has {}", rect.dim(), spec.dim())));
        }
        let d = spec.dim();
        let all_omega = spec.frequency_norms_sq();
        let support: Vec<usize> = (0..spec.len()).filter(|&i| rect.contains(&spec.frequency(i)[..d])).collect();
        if support.is_empty() {
            return Err(Error::Degenerate("the rectangle contains no grid frequency".into()));
        }
        let omega: Vec<f64> = support.iter().map(|&i| all_omega[i]).collect();
        let (times, weights) = trapezoid(interval, n_t);
        let phases = (support.len() * times.len() <= PHASE_TABLE_LIMIT).then(|| {
            times.iter().flat_map(|&t| omega.iter().map(move |w| Complex64::from_polar(1.0, -t * w))).collect()
        });
        Ok(Self {
            spec: spec.clone(),
            q,
            support,
            omega,
            times,
            weights,
            phases,
            transform: Transform::new(spec),
            buf: vec![ZERO; spec.len()],
            cell: spec.cell_volume(),
            lattice_weight: spec.lattice_weight(),
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Grid offsets of the rectangle's nodes.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn exponent(&self) -> f64 {
        self.q
    }

    /// Lattice `L^2` norm of coefficients.
    pub fn l2_norm(&self, u: &[Complex64]) -> f64 {
        (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.lattice_weight).sqrt()
    }

    fn phase(&self, j: usize, s: usize) -> Complex64 {
        match &self.phases {
            Some(p) => p[j * self.support.len() + s],
            None => Complex64::from_polar(1.0, -self.times[j] * self.omega[s]),
        }
    }

    fn load_time_slice(&mut self, u: &[Complex64], j: usize) {
        self.buf.iter_mut().for_each(|z| *z = ZERO);
        let scale = self.transform.inverse_scale();
        for s in 0..self.support.len() {
            let idx = self.support[s];
            self.buf[idx] = u[s] * self.phase(j, s) * scale;
        }
        self.transform.inverse_raw(&mut self.buf);
    }

    fn slice_integral(&self) -> f64 {
        let q = self.q;
        let s: f64 = if q == 4.0 {
            self.buf.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
        } else {
            self.buf.iter().map(|z| z.norm().powf(q)).sum()
        };
        s * self.cell
    }

    /// `Phi(u)`.
    pub fn objective(&mut self, u: &[Complex64]) -> f64 {
        let mut total = 0.0;
        for j in 0..self.times.len() {
            self.load_time_slice(u, j);
            total += self.weights[j] * self.slice_integral();
        }
        total
    }

    /// `Phi(u)` and its gradient `2 dPhi/d conj(u)` with respect to the
    /// Euclidean inner product on coefficients.
    pub fn objective_and_gradient(&mut self, u: &[Complex64], grad: &mut [Complex64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = ZERO);
        let q = self.q;
        let coeff = q * self.transform.inverse_scale() * self.cell;
        let mut total = 0.0;
        for j in 0..self.times.len() {
            self.load_time_slice(u, j);
            total += self.weights[j] * self.slice_integral();
            for z in self.buf.iter_mut() {
                let m2 = z.norm_sqr();
                let amp = if q == 4.0 { m2 } else { m2.powf(0.5 * q - 1.0) };
                *z *= amp;
            }
            self.transform.forward_raw(&mut self.buf);
            let w = self.weights[j] * coeff;
            for s in 0..self.support.len() {
                grad[s] += self.phase(j, s).conj() * self.buf[self.support[s]] * w;
            }
        }
        total
    }

    /// `Phi(u)^{1/q} / ||u||`.
    pub fn ratio(&mut self, u: &[Complex64]) -> f64 {
        let phi = self.objective(u);
        phi.max(0.0).powf(1.0 / self.q) / self.l2_norm(u)
    }

    /// Embeds coefficients into a full frequency field.
    pub fn to_field(&self, u: &[Complex64]) -> FreqField {
        let mut data = vec![ZERO; self.spec.len()];
        for (s, &idx) in self.support.iter().enumerate() {
            data[idx] = u[s];
        }
        FreqField::new(self.spec.clone(), data).expect("support lies on the grid")
    }

    /// Restricts a frequency field to the rectangle's nodes.
    pub fn coefficients(&self, field: &FreqField) -> Vec<Complex64> {
        self.support.iter().map(|&i| field.data()[i]).collect()
    }
}

/// Parameters of the sphere-constrained ascent.
///
/// A step of size `eta` moves `u` to `normalize(u + eta * g / (q Phi))`,
/// where `g` is the tangential gradient; `eta = 1` is the normalized
/// gradient (power) iteration, which never decreases a convex `Phi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentOptions {
    pub initial_step: f64,
    pub max_steps: usize,
    pub rel_tol: f64,
    pub min_step: f64,
    pub growth: f64,
    pub max_step: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { initial_step: 0.1, max_steps: 200, rel_tol: 1e-6, min_step: 1e-8, growth: 2.0, max_step: 4.0 }
    }
}

/// Result of one ascent run.
#[derive(Clone, Debug, PartialEq)]
pub struct AscentOutcome {
    pub objective: f64,
    pub initial_objective: f64,
    pub accepted_steps: usize,
    pub evaluations: usize,
    /// Objective after every accepted step, starting with the initial one.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn normalize(u: &mut [Complex64]) -> f64 {
    let n = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        u.iter_mut().for_each(|z| *z /= n);
    }
    n
}

/// Monotone projected-gradient ascent of `Phi` on the unit sphere.
pub fn ascend(problem: &mut RatioProblem, u: &mut [Complex64], opts: &AscentOptions) -> AscentOutcome {
    let q = problem.exponent();
    normalize(u);
    let mut grad = vec![ZERO; u.len()];
    let mut cand = vec![ZERO; u.len()];
    let mut cand_grad = vec![ZERO; u.len()];
    let mut phi = problem.objective_and_gradient(u, &mut grad);
    let mut out = AscentOutcome {
        objective: phi,
        initial_objective: phi,
        accepted_steps: 0,
        evaluations: 1,
        history: vec![phi],
        converged: false,
    };
    if !(phi > 0.0) {
        out.converged = true;
        return out;
    }
    let mut eta = opts.initial_step;
    while out.accepted_steps < opts.max_steps {
        let radial: f64 = u.iter().zip(&grad).map(|(a, g)| (g * a.conj()).re).sum();
        let grad_norm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
        let mut tangent_norm = 0.0;
        for ((c, a), g) in cand.iter_mut().zip(u.iter()).zip(&grad) {
            *c = *g - *a * radial;
            tangent_norm += c.norm_sqr();
        }
        if tangent_norm.sqrt() <= 1e-13 * grad_norm {
            out.converged = true;
            break;
        }
        let tangent: Vec<Complex64> = cand.clone();
        let mut accepted = false;
        while eta >= opts.min_step {
            let scale = eta / (q * phi);
            for ((c, a), t) in cand.iter_mut().zip(u.iter()).zip(&tangent) {
                *c = *a + *t * scale;
            }
            normalize(&mut cand);
            let cand_phi = problem.objective_and_gradient(&cand, &mut cand_grad);
            out.evaluations += 1;
            if cand_phi >= phi {
                let gain = (cand_phi - phi) / phi;
                u.copy_from_slice(&cand);
                core::mem::swap(&mut grad, &mut cand_grad);
                phi = cand_phi;
                out.accepted_steps += 1;
                out.history.push(phi);
                eta = (eta * opts.growth).min(opts.max_step);
                accepted = true;
                if gain < opts.rel_tol {
                    out.converged = true;
                }
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            // The step floor was reached without an increase: a local
            // maximum up to round-off.
            out.converged = tangent_norm.sqrt() <= 1e-6 * grad_norm;
            break;
        }
        if out.converged {
            break;
        }
    }
    out.objective = phi;
    out
}

/// Best ratio found for one rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub geometry: Geometry,
    pub lambda: f64,
    pub mu: f64,
    pub trials: usize,
    /// Best ratio `||P_R e^{it Delta} u||_{L^q} / ||P_R u||_{L^2}`.
    pub k: f64,
    /// Seed of the trial that produced `k` (see [`rng::from_seed`]).
    pub seed: u64,
    /// Time quadrature stable under doubling of the number of nodes.
    pub converged: bool,
    /// Every ascent met its stopping rule.
    pub ascent_converged: bool,
}

/// Options of [`maximize_ratio`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximizeOptions {
    pub q: f64,
    pub interval: (f64, f64),
    pub n_t: usize,
    pub ascent: AscentOptions,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self { q: 4.0, interval: (0.0, 1.0), n_t: 64, ascent: AscentOptions::default() }
    }
}

/// Per-trial details of [`maximize_ratio`].
#[derive(Clone, Debug, PartialEq)]
pub struct MaximizeOutcome {
    pub record: ScanRecord,
    /// Ratio of every random starting point before ascent.
    pub raw_ratios: Vec<f64>,
    /// Ratio of every trial after ascent.
    pub trial_ratios: Vec<f64>,
    /// Coefficients of the best trial on the rectangle's nodes.
    pub best: Vec<Complex64>,
}

/// Random complex Gaussian coefficients on the rectangle's nodes.
pub fn random_start(problem: &RatioProblem, seed: u64) -> Vec<Complex64> {
    let mut rng = rng::from_seed(seed);
    let mut u: Vec<Complex64> = (0..problem.len()).map(|_| rng::complex_gaussian(&mut rng)).collect();
    normalize(&mut u);
    u
}

/// Seeded multi-start ascent for the best ratio on one rectangle.
///
/// Trial `i` starts from [`random_start`] with seed
/// `rng::derive_seed(seed, &[i])`.
pub fn maximize_ratio(
    spec: &DomainSpec,
    rect: &FreqRect,
    trials: usize,
    seed: u64,
    opts: &MaximizeOptions,
) -> Result<MaximizeOutcome> {
    if trials == 0 {
        return Err(Error::Argument("at least one trial is required".into()));
    }
    let mut problem = RatioProblem::new(spec, rect, opts.q, opts.interval, opts.n_t)?;
    let mut raw_ratios = Vec::with_capacity(trials);
    let mut trial_ratios = Vec::with_capacity(trials);
    let mut best: Option<(f64, u64, Vec<Complex64>)> = None;
    let mut all_converged = true;
    for i in 0..trials {
        let trial_seed = rng::derive_seed(seed, &[i as u64]);
        let mut u = random_start(&problem, trial_seed);
        let outcome = ascend(&mut problem, &mut u, &opts.ascent);
        let norm = problem.l2_norm(&u);
        let to_ratio = |phi: f64| phi.max(0.0).powf(1.0 / opts.q) / norm;
        raw_ratios.push(to_ratio(outcome.initial_objective));
        let r = to_ratio(outcome.objective);
        trial_ratios.push(r);
        all_converged &= outcome.converged;
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, trial_seed, u));
        }
    }
    let (k, best_seed, best_u) = best.expect("trials >= 1");
    let field = problem.to_field(&best_u);
    let check = Evolver::new(spec).spacetime_lq_checked(field.data(), opts.q, opts.interval, opts.n_t);
    let record = ScanRecord {
        geometry: spec.geometry(),
        lambda: rect.size(),
        mu: rect.thickness(),
        trials,
        k,
        seed: best_seed,
        converged: check.relative_change() < QUADRATURE_TOLERANCE,
        ascent_converged: all_converged,
    };
    Ok(MaximizeOutcome { record, raw_ratios, trial_ratios, best: best_u })
}

/// Which thicknesses accompany each `lambda` in a scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MuRule {
    /// Every dyadic `mu <= lambda`.
    AllDyadic,
    /// Only `mu = lambda`.
    Equal,
    /// A fixed dyadic `mu` (cells with `mu > lambda` are skipped).
    Fixed(f64),
}

impl MuRule {
    pub fn mus(&self, lambda: f64) -> Vec<f64> {
        match *self {
            MuRule::AllDyadic => lp::dyadics_up_to(lambda).collect(),
            MuRule::Equal => vec![lambda],
            MuRule::Fixed(mu) if mu <= lambda => vec![mu],
            MuRule::Fixed(_) => Vec::new(),
        }
    }
}

/// A dyadic scan over `(lambda, mu)` cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPlan {
    pub spec: DomainSpec,
    pub lambdas: Vec<f64>,
    pub mu_rule: MuRule,
    pub rects_per_cell: usize,
    pub trials: usize,
    pub seed: u64,
    pub options: MaximizeOptions,
}

/// One rectangle of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanItem {
    pub cell: usize,
    pub rect: usize,
    pub lambda: f64,
    pub mu: f64,
}

impl ScanPlan {
    pub fn validate(&self) -> Result<()> {
        for &l in &self.lambdas {
            lp::check_dyadic(l)?;
        }
        if let MuRule::Fixed(mu) = self.mu_rule {
            lp::check_dyadic(mu)?;
        }
        if self.rects_per_cell == 0 || self.trials == 0 {
            return Err(Error::Argument("scan needs rectangles and trials".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.lambdas.iter().flat_map(|&l| self.mu_rule.mus(l).into_iter().map(move |m| (l, m))).collect()
    }

    /// Work items in their canonical order.
    pub fn items(&self) -> Vec<ScanItem> {
        let mut out = Vec::new();
        for (cell, (lambda, mu)) in self.cells().into_iter().enumerate() {
            for rect in 0..self.rects_per_cell {
                out.push(ScanItem { cell, rect, lambda, mu });
            }
        }
        out
    }

    /// Rectangle drawn for an item: uniform unit normal, center uniform
    /// among the grid frequencies in `[-lambda, lambda]^d`, slab through
    /// the center.
    pub fn rect_for(&self, item: &ScanItem) -> Result<FreqRect> {
        let mut rng = rng::stream(self.seed, &[item.cell as u64, item.rect as u64, 0]);
        sample_rect(&self.spec, item.lambda, item.mu, &mut rng)
    }

    /// Seed of the trial stream of an item.
    pub fn trial_seed(&self, item: &ScanItem) -> u64 {
        rng::derive_seed(self.seed, &[item.cell as u64, item.rect as u64, 1])
    }

    pub fn run_item(&self, item: &ScanItem) -> Result<MaximizeOutcome> {
        let rect = self.rect_for(item)?;
        maximize_ratio(&self.spec, &rect, self.trials, self.trial_seed(item), &self.options)
    }
}

/// Samples a rectangle of the family for `(lambda, mu)` on the grid.
pub fn sample_rect<R: Rng + ?Sized>(spec: &DomainSpec, lambda: f64, mu: f64, rng: &mut R) -> Result<FreqRect> {
    let d = spec.dim();
    let normal = rng::unit_vector(rng, d);
    let mut center = vec![0.0; d];
    for (a, c) in center.iter_mut().enumerate() {
        let h = spec.spacing(a);
        let half = (spec.grid()[a] / 2) as i64;
        let reach = (lambda / h + 1e-9).floor() as i64;
        let lo = (-reach).max(-half);
        let hi = reach.min(half - 1);
        let k = rng.gen_range(lo..=hi);
        *c = k as f64 * h;
    }
    let offset = dot(&center, &normal);
    FreqRect::new(center, lambda, normal, offset, mu)
}

/// Reduces the item outcomes of a scan to one record per cell.
pub fn reduce_cells(plan: &ScanPlan, outcomes: &[(ScanItem, ScanRecord)]) -> Vec<ScanRecord> {
    let cells = plan.cells();
    let mut out: Vec<Option<ScanRecord>> = vec![None; cells.len()];
    for (item, rec) in outcomes {
        let slot = &mut out[item.cell];
        match slot {
            None => {
                let mut r = rec.clone();
                r.trials = rec.trials;
                *slot = Some(r);
            }
            Some(best) => {
                let trials = best.trials + rec.trials;
                let ascent = best.ascent_converged && rec.ascent_converged;
                if rec.k > best.k {
                    *best = rec.clone();
                }
                best.trials = trials;
                best.ascent_converged = ascent;
            }
        }
    }
    out.into_iter().flatten().collect()
}

/// Sequential scan over all cells.
pub fn scan_dyadic(plan: &ScanPlan) -> Result<Vec<ScanRecord>> {
    plan.validate()?;
    let mut outcomes = Vec::new();
    for item in plan.items() {
        let o = plan.run_item(&item)?;
        outcomes.push((item, o.record));
    }
    Ok(reduce_cells(plan, &outcomes))
}

/// Least-squares fit `K ~ C lambda^alpha (mu/lambda)^delta_hat`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub alpha: f64,
    pub delta_hat: f64,
    pub c: f64,
    pub residual_linf: f64,
    /// The design had no spread in `mu/lambda`; only `alpha` was fitted.
    pub alpha_only: bool,
}

pub fn fit_exponents(records: &[ScanRecord]) -> Result<ExponentFit> {
    let mut lambdas: Vec<f64> = records.iter().map(|r| r.lambda).collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    lambdas.dedup();
    if lambdas.len() < 3 {
        return Err(Error::Argument(format!("fit needs at least 3 distinct lambda values, found {}", lambdas.len())));
    }
    if records.iter().any(|r| !(r.k > 0.0)) {
        return Err(Error::Argument("fit needs positive ratios".into()));
    }
    let rows: Vec<[f64; 3]> = records.iter().map(|r| [1.0, r.lambda.ln(), (r.mu / r.lambda).ln()]).collect();
    let y: Vec<f64> = records.iter().map(|r| r.k.ln()).collect();
    let mean_x2 = rows.iter().map(|r| r[2]).sum::<f64>() / rows.len() as f64;
    let spread = rows.iter().map(|r| (r[2] - mean_x2).abs()).fold(0.0, f64::max);
    let alpha_only = spread < 1e-12;
    let cols = if alpha_only { 2 } else { 3 };
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (r, yi) in rows.iter().zip(&y) {
        for i in 0..cols {
            aty[i] += r[i] * yi;
            for j in 0..cols {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let beta = solve(&mut ata, &mut aty, cols).ok_or_else(|| Error::Degenerate("singular design matrix".into()))?;
    let (log_c, alpha) = (beta[0], beta[1]);
    let delta_hat = if alpha_only { 0.0 } else { beta[2] };
    let residual_linf =
        rows.iter().zip(&y).map(|(r, yi)| (yi - (log_c + alpha * r[1] + delta_hat * r[2])).abs()).fold(0.0, f64::max);
    Ok(ExponentFit { alpha, delta_hat, c: log_c.exp(), residual_linf, alpha_only })
}

fn solve(a: &mut [[f64; 3]; 3], b: &mut [f64; 3], n: usize) -> Option<[f64; 3]> {
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Smallest `C` with `K <= C lambda^alpha (mu/lambda)^delta` on all records.
pub fn envelope_constant(records: &[ScanRecord], alpha: f64, delta: f64) -> f64 {
    records.iter().map(|r| r.k / (r.lambda.powf(alpha) * (r.mu / r.lambda).powf(delta))).fold(0.0, f64::max)
}

/// One piece `chi_[t0, t1) e^{it Delta} phi` of a `U^4` atom.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomPiece {
    pub start: f64,
    pub end: f64,
    pub data: FreqField,
}

/// `||P_R a||_{L^4([0,1] x M)}` for a normalized `U^4` atom
/// `a = sum_k chi_[t_{k-1}, t_k) e^{it Delta} phi_{k-1}`.
pub fn u4_atom_ratio(pieces: &[AtomPiece], rect: &FreqRect, n_t: usize) -> Result<f64> {
    let first = pieces.first().ok_or_else(|| Error::Argument("an atom needs at least one piece".into()))?;
    let total: f64 = pieces.iter().map(|p| p.data.l2_norm().powi(4)).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!("atom is not normalized: sum ||phi_k||^4 = {total}")));
    }
    if first.start != 0.0 || pieces.last().map(|p| p.end) != Some(1.0) {
        return Err(Error::Argument("atom pieces must cover [0, 1]".into()));
    }
    if pieces.windows(2).any(|w| w[0].end != w[1].start) || pieces.iter().any(|p| !(p.end > p.start)) {
        return Err(Error::Argument("atom pieces must be consecutive nonempty intervals".into()));
    }
    let mut evolver = Evolver::new(first.data.spec());
    let mut sum = 0.0;
    for p in pieces {
        let proj = p.data.project_rect(rect);
        sum += evolver.spacetime_lq(proj.data(), 4.0, (p.start, p.end), n_t).powi(4);
    }
    Ok(sum.powf(0.25))
}

/// Empirical and certified constants of the dyadic Cauchy-Schwarz bound
/// `|sum_{mu <= lambda} (1/mu + mu/lambda)^delta c_mu|^2 <= C sum |c_mu|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicSumCheck {
    pub empirical: f64,
    pub certificate: f64,
}

/// Weights `(1/mu + mu/lambda)^delta` over dyadic `mu <= lambda`.
pub fn dyadic_sum_weights(delta: f64, lambda: f64) -> Vec<f64> {
    lp::dyadics_up_to(lambda).map(|mu| (1.0 / mu + mu / lambda).powf(delta)).collect()
}

/// `|sum w_mu c_mu|^2 / sum |c_mu|^2` for one coefficient sequence.
pub fn dyadic_sum_ratio(delta: f64, lambda: f64, c: &[Complex64]) -> f64 {
    let w = dyadic_sum_weights(delta, lambda);
    let num: Complex64 = w.iter().zip(c).map(|(wi, ci)| ci * wi).sum();
    let den: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    num.norm_sqr() / den
}

pub fn dve_check(delta: f64, lambda: f64, trials: usize, seed: u64) -> Result<DyadicSumCheck> {
    if !(delta > 0.0) {
        return Err(Error::Argument(format!("delta={delta} must be positive")));
    }
    lp::check_dyadic(lambda)?;
    let w = dyadic_sum_weights(delta, lambda);
    let certificate = w.iter().map(|x| x * x).sum();
    let mut rng = rng::stream(seed, &[]);
    let mut empirical: f64 = 0.0;
    for _ in 0..trials {
        let c: Vec<Complex64> = (0..w.len()).map(|_| rng::complex_gaussian(&mut rng)).collect();
        empirical = empirical.max(dyadic_sum_ratio(delta, lambda, &c));
    }
    Ok(DyadicSumCheck { empirical, certificate })
}
