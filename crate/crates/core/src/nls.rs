//! Strang split-step integrator for `(i d_t + Delta) u = sign |u|^2 u`.
//!
//! `sign = +1` is the defocusing and `sign = -1` the focusing equation;
//! `sign = 0` gives the free evolution. One step is a half kick by the exact
//! phase `u -> u e^{-i sign |u|^2 dt/2}`, a full free step
//! `e^{-i |xi|^2 dt}` in frequency space, and another half kick. Both kicks
//! and the free step are unitary on the grid, and the step with `-dt`
//! inverts the step with `dt`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::field::{FreqField, SpatialField, Transform};
use crate::lp;
use crate::rng;

/// Parameters of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NlsConfig {
    /// `+1` defocusing, `-1` focusing, `0` linear.
    pub sign: f64,
    /// Time step; negative values run backwards.
    pub dt: f64,
    pub steps: usize,
    /// Zero the modes with `|k_a| > N_a / 3` after every kick.
    pub dealias: bool,
    /// Record diagnostics every this many steps (and at the end).
    pub record_every: usize,
}

impl Default for NlsConfig {
    fn default() -> Self {
        Self { sign: 1.0, dt: 1e-3, steps: 1000, dealias: true, record_every: 10 }
    }
}

impl NlsConfig {
    pub fn validate(&self) -> Result<()> {
        if ![-1.0, 0.0, 1.0].contains(&self.sign) {
            return Err(Error::Config(format!("sign must be -1, 0 or 1, got {}", self.sign)));
        }
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(Error::Config(format!("dt={} must be finite and nonzero", self.dt)));
        }
        if self.steps == 0 || self.record_every == 0 {
            return Err(Error::Config("steps and record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Largest relative change of the mass in one step before the run is
/// declared blown up.
pub const MASS_JUMP_LIMIT: f64 = 0.01;

/// Reusable split-step propagator for one domain and time step.
#[derive(Clone, Debug)]
pub struct Stepper {
    transform: Transform,
    phases: Vec<Complex64>,
    keep: Option<Vec<bool>>,
    sign: f64,
    dt: f64,
}

impl Stepper {
    pub fn new(spec: &DomainSpec, cfg: &NlsConfig) -> Result<Self> {
        cfg.validate()?;
        let phases = spec.frequency_norms_sq().iter().map(|w| Complex64::from_polar(1.0, -cfg.dt * w)).collect();
        let keep = cfg.dealias.then(|| dealias_mask(spec));
        Ok(Self { transform: Transform::new(spec), phases, keep, sign: cfg.sign, dt: cfg.dt })
    }

    fn kick(&self, u: &mut [Complex64], h: f64) {
        if self.sign == 0.0 {
            return;
        }
        for z in u.iter_mut() {
            *z *= Complex64::from_polar(1.0, -self.sign * z.norm_sqr() * h);
        }
    }

    /// Zeroes the modes removed by dealiasing (no-op without it).
    pub fn project(&mut self, u: &mut [Complex64]) {
        if let Some(keep) = &self.keep {
            self.transform.forward(u);
            for (z, k) in u.iter_mut().zip(keep) {
                if !k {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
            self.transform.inverse(u);
        }
    }

    /// One Strang step in place on physical values.
    pub fn step(&mut self, u: &mut [Complex64]) {
        let h = 0.5 * self.dt;
        self.kick(u, h);
        self.transform.forward(u);
        if let Some(keep) = &self.keep {
            for (z, k) in u.iter_mut().zip(keep) {
                if !k {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
        for (z, p) in u.iter_mut().zip(&self.phases) {
            *z *= p;
        }
        self.transform.inverse(u);
        self.kick(u, h);
        self.project(u);
    }
}

/// Modes kept by the 2/3 rule.
pub fn dealias_mask(spec: &DomainSpec) -> Vec<bool> {
    let d = spec.dim();
    (0..spec.len())
        .map(|i| {
            let k = spec.lattice_index(i);
            (0..d).all(|a| 3 * k[a].unsigned_abs() as usize <= spec.grid()[a])
        })
        .collect()
}

/// One Strang step of a field.
pub fn strang_step(u: &SpatialField, cfg: &NlsConfig) -> Result<SpatialField> {
    let mut stepper = Stepper::new(u.spec(), cfg)?;
    let mut data = u.data().to_vec();
    stepper.step(&mut data);
    if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::BlowUp { step: 1, reason: "non-finite value".into() });
    }
    SpatialField::new(u.spec().clone(), data)
}

/// `int |u|^2`.
pub fn mass(u: &SpatialField) -> f64 {
    u.data().iter().map(|z| z.norm_sqr()).sum::<f64>() * u.spec().cell_volume()
}

/// `E(u) = int |grad u|^2 / 2 + sign |u|^4 / 4`, the gradient term taken
/// spectrally.
pub fn energy(u: &SpatialField, sign: f64) -> f64 {
    let g = u.to_frequency();
    energy_from_parts(u, &g, sign)
}

fn energy_from_parts(u: &SpatialField, g: &FreqField, sign: f64) -> f64 {
    let spec = u.spec();
    let kinetic: f64 = g.data().iter().zip(spec.frequency_norms_sq()).map(|(z, w)| w * z.norm_sqr()).sum::<f64>()
        * spec.lattice_weight();
    let quartic: f64 = u.data().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * spec.cell_volume();
    0.5 * kinetic + 0.25 * sign * quartic
}

/// Diagnostics of one snapshot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub h1: f64,
    pub linf: f64,
}

pub fn diagnostics(u: &SpatialField, t: f64, sign: f64) -> Diagnostics {
    let g = u.to_frequency();
    Diagnostics {
        t,
        mass: mass(u),
        energy: energy_from_parts(u, &g, sign),
        h1: g.sobolev_norm(1.0),
        linf: u.sup_norm(),
    }
}

/// Recorded states of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<SpatialField>,
    pub diagnostics: Vec<Diagnostics>,
    /// Set when the run stopped early; the last snapshot is the last finite
    /// state.
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &SpatialField {
        self.snapshots.last().expect("a trajectory holds the initial state")
    }

    pub fn max_relative_drift(&self, f: impl Fn(&Diagnostics) -> f64) -> f64 {
        let base = f(&self.diagnostics[0]);
        self.diagnostics.iter().map(|d| ((f(d) - base) / base).abs()).fold(0.0, f64::max)
    }
}

/// Iterates [`Stepper::step`], recording every `record_every` steps.
///
/// With dealiasing the run starts from the projected initial datum, which is
/// the first snapshot.
pub fn evolve(u0: &SpatialField, cfg: &NlsConfig) -> Result<Trajectory> {
    let mut stepper = Stepper::new(u0.spec(), cfg)?;
    let spec = u0.spec().clone();
    let mut u = u0.data().to_vec();
    stepper.project(&mut u);
    let start = SpatialField::new(spec.clone(), u.clone())?;
    let mut out =
        Trajectory { diagnostics: vec![diagnostics(&start, 0.0, cfg.sign)], snapshots: vec![start], failure: None };
    let mut last_mass = out.diagnostics[0].mass;
    let cell = spec.cell_volume();
    let mut prev = u.clone();
    for step in 1..=cfg.steps {
        prev.copy_from_slice(&u);
        stepper.step(&mut u);
        let m = u.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell;
        let reason: Option<String> = if !m.is_finite() || u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            Some("non-finite value".into())
        } else if last_mass > 0.0 && ((m - last_mass) / last_mass).abs() > MASS_JUMP_LIMIT {
            Some(format!("mass jumped from {last_mass} to {m}"))
        } else {
            None
        };
        if let Some(reason) = reason {
            let t = (step - 1) as f64 * cfg.dt;
            let f = SpatialField::new(spec.clone(), prev.clone())?;
            out.diagnostics.push(diagnostics(&f, t, cfg.sign));
            out.snapshots.push(f);
            out.failure = Some(Error::BlowUp { step, reason });
            return Ok(out);
        }
        last_mass = m;
        if step % cfg.record_every == 0 || step == cfg.steps {
            let f = SpatialField::new(spec.clone(), u.clone())?;
            out.diagnostics.push(diagnostics(&f, step as f64 * cfg.dt, cfg.sign));
            out.snapshots.push(f);
        }
    }
    Ok(out)
}

/// Final state after `cfg.steps` steps without recording.
pub fn evolve_final(u0: &SpatialField, cfg: &NlsConfig) -> Result<SpatialField> {
    let mut stepper = Stepper::new(u0.spec(), cfg)?;
    let mut u = u0.data().to_vec();
    stepper.project(&mut u);
    for step in 1..=cfg.steps {
        stepper.step(&mut u);
        if u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::BlowUp { step, reason: "non-finite value".into() });
        }
    }
    SpatialField::new(u0.spec().clone(), u)
}

/// `A e^{i n . x}` on the grid (`n` in lattice units).
pub fn plane_wave(spec: &DomainSpec, n: &[i64], amplitude: f64) -> Result<SpatialField> {
    let d = spec.dim();
    if n.len() != d {
        return Err(Error::Argument(format!("wave vector must have dimension {d}")));
    }
    let k: Vec<f64> = (0..d).map(|a| n[a] as f64 * spec.spacing(a)).collect();
    Ok(SpatialField::from_fn(spec.clone(), |x| {
        let phase: f64 = x.iter().zip(&k).map(|(a, b)| a * b).sum();
        Complex64::from_polar(amplitude, phase)
    }))
}

/// Exact solution `A e^{i(n . x - (|n|^2 + sign A^2) t)}` of the plane wave.
pub fn plane_wave_exact(spec: &DomainSpec, n: &[i64], amplitude: f64, sign: f64, t: f64) -> Result<SpatialField> {
    let d = spec.dim();
    let k2: f64 = (0..d).map(|a| (n[a] as f64 * spec.spacing(a)).powi(2)).sum();
    let omega = k2 + sign * amplitude * amplitude;
    let mut u = plane_wave(spec, n, amplitude)?;
    let rot = Complex64::from_polar(1.0, -omega * t);
    u.data_mut().iter_mut().for_each(|z| *z *= rot);
    Ok(u)
}

/// Smooth random data: complex Gaussian modes damped by `bump(|xi| / band)`,
/// normalized to unit `H^s` norm.
pub fn random_smooth_data(spec: &DomainSpec, band: f64, s: f64, seed: u64) -> Result<FreqField> {
    let mut rng = rng::stream(seed, &[]);
    let r2 = spec.frequency_norms_sq();
    let mut g = FreqField::from_fn(spec.clone(), |_| Complex64::new(0.0, 0.0));
    for (z, w) in g.data_mut().iter_mut().zip(&r2) {
        let c = rng::complex_gaussian(&mut rng);
        *z = c * lp::bump(w.sqrt() / band);
    }
    let norm = g.sobolev_norm(s);
    if !(norm > 0.0) {
        return Err(Error::Degenerate("no lattice mode below the band limit".into()));
    }
    Ok(g.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// One amplitude of [`small_data_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct SmallDataRow {
    pub amplitude: f64,
    /// `sup_t ||u(t)||_{H^1} / ||u_0||_{H^1}` over the recorded times.
    pub h1_ratio: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub blow_up: Option<String>,
}

/// Evolves `amplitude * phi` for each amplitude, `phi` from
/// [`random_smooth_data`] with unit `H^s` norm.
pub fn small_data_experiment(
    spec: &DomainSpec,
    amplitudes: &[f64],
    s: f64,
    band: f64,
    cfg: &NlsConfig,
    seed: u64,
) -> Result<Vec<SmallDataRow>> {
    if !(s >= 1.0) {
        return Err(Error::Argument(format!("regularity s={s} must be at least 1")));
    }
    let phi = random_smooth_data(spec, band, s, seed)?;
    amplitudes.iter().map(|&amp| small_data_run(&phi, amp, cfg)).collect()
}

/// One run of [`small_data_experiment`].
pub fn small_data_run(phi: &FreqField, amplitude: f64, cfg: &NlsConfig) -> Result<SmallDataRow> {
    let u0 = phi.scale(Complex64::new(amplitude, 0.0)).to_space();
    let traj = evolve(&u0, cfg)?;
    let h0 = traj.diagnostics[0].h1;
    let h1_ratio = if h0 > 0.0 { traj.diagnostics.iter().map(|d| d.h1).fold(0.0, f64::max) / h0 } else { 1.0 };
    let drift = |f: &dyn Fn(&Diagnostics) -> f64| {
        if f(&traj.diagnostics[0]) == 0.0 {
            0.0
        } else {
            traj.max_relative_drift(f)
        }
    };
    Ok(SmallDataRow {
        amplitude,
        h1_ratio,
        mass_drift: drift(&|d| d.mass),
        energy_drift: drift(&|d| d.energy),
        blow_up: traj.failure.as_ref().map(|e| format!("{e}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn constant_field_energy() {
        let spec = DomainSpec::torus(4, 4).unwrap();
        let u = SpatialField::from_fn(spec, |_| Complex64::new(0.5, 0.0));
        let e = energy(&u, 1.0);
        assert!((e - (2.0 * PI).powi(4) * 0.5f64.powi(4) / 4.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        let bad = NlsConfig { sign: 2.0, ..NlsConfig::default() };
        assert!(bad.validate().is_err());
        let bad = NlsConfig { dt: 0.0, ..NlsConfig::default() };
        assert!(bad.validate().is_err());
    }
}
