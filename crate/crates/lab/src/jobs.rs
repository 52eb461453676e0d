//! Job execution. Each job returns its artifacts in memory; writing them
//! (and the manifest) is left to the caller.

use anyhow::{anyhow, bail, Context, Result};
use rand::Rng;
use serde_json::{json, Value};
use speclab_core::bilinear::{ortho_trial, OrthoSetup, OrthoTrial, Window};
use speclab_core::counting::{
    annulus_measure, annulus_monte_carlo, annulus_sup_scan, case_normalization, case_sample, set_a_measure,
    set_b_measure, set_b_measure_at, AnnulusQuery, AnnulusSup, CaseSample, CaseScan, MuChoice, OffsetMode,
};
use speclab_core::nls::{self, NlsConfig};
use speclab_core::strichartz::{
    envelope_constant, fit_exponents, reduce_cells, scaling_exponent, AscentOptions, MaximizeOptions, MuRule, ScanPlan,
    ScanRecord,
};
use speclab_core::variation::{cube_norms, vp_delta_norm, vp_norm, TimeSeries};
use speclab_core::{lp, rng, DomainSpec, FreqField, Geometry};

use crate::config::*;
use crate::formats::{self, num, Table};
use crate::pool;

/// One output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Result of a job.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Lines for standard output.
    pub report: Vec<String>,
    pub summary: Value,
    /// Resolved domain, when the job has one.
    pub domain: Option<DomainSpec>,
    /// Set when the job finished its artifacts but must exit with an error.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(summary: Value) -> Self {
        Self { artifacts: Vec::new(), report: Vec::new(), summary, domain: None, failure: None }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.artifacts.push(Artifact { name: name.to_string(), bytes });
    }

    fn add_json(&mut self, name: &str, v: &Value) {
        let mut bytes = serde_json::to_vec_pretty(v).expect("JSON values serialize");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    pub fn artifact(&self, name: &str) -> Option<&[u8]> {
        self.artifacts.iter().find(|a| a.name == name).map(|a| a.bytes.as_slice())
    }
}

pub fn execute(job: &Job) -> Result<Outcome> {
    match job {
        Job::StrichartzScan(a) => strichartz_scan(a),
        Job::BilinearScan(a) => bilinear_scan(a),
        Job::OrthoCheck(a) => ortho_check(a),
        Job::CountLemma(a) => count_lemma(a),
        Job::MeasureAb(a) => measure_ab(a),
        Job::VariationNorm(a) => variation_norm(a),
        Job::NlsRun(a) => nls_run(a),
        Job::SmallData(a) => small_data(a),
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub const SCAN_HEADER: [&str; 9] = ["geometry", "m", "n", "lambda", "mu", "trials", "K", "seed", "converged"];

pub fn scan_table(records: &[ScanRecord]) -> Table {
    let mut t = Table::new(&SCAN_HEADER);
    for r in records {
        t.push(vec![
            r.geometry.to_string(),
            r.geometry.m.to_string(),
            r.geometry.n.to_string(),
            num(r.lambda),
            num(r.mu),
            r.trials.to_string(),
            num(r.k),
            r.seed.to_string(),
            r.converged.to_string(),
        ]);
    }
    t
}

/// Runs a Strichartz scan plan on the pool.
pub fn run_scan(plan: &ScanPlan) -> Result<Vec<ScanRecord>> {
    plan.validate()?;
    let items = plan.items();
    let outcomes = pool::try_map(&items, |item| Ok((*item, plan.run_item(item)?.record)))?;
    Ok(reduce_cells(plan, &outcomes))
}

pub fn scan_plan(a: &ScanArgs) -> Result<ScanPlan> {
    let spec = a.domain.spec()?;
    let mu_rule = match parse_mu(&a.mu)? {
        MuSpec::All => MuRule::AllDyadic,
        MuSpec::Equal => MuRule::Equal,
        MuSpec::Fixed(v) => MuRule::Fixed(v),
    };
    Ok(ScanPlan {
        spec,
        lambdas: a.lambdas.clone(),
        mu_rule,
        rects_per_cell: a.rects,
        trials: a.trials,
        seed: a.common.seed,
        options: MaximizeOptions {
            q: a.q,
            interval: (0.0, a.t_end),
            n_t: a.n_t,
            ascent: AscentOptions { max_steps: a.max_steps, ..AscentOptions::default() },
        },
    })
}

fn strichartz_scan(a: &ScanArgs) -> Result<Outcome> {
    let plan = scan_plan(a)?;
    let records = run_scan(&plan)?;
    let geometry = plan.spec.geometry();
    let alpha = scaling_exponent(plan.spec.dim(), a.q);
    let envelope = geometry.known_gain().map(|d| envelope_constant(&records, alpha, d));
    let fit = fit_exponents(&records).ok();
    let mut out = Outcome::new(json!({
        "cells": records.len(),
        "geometry": geometry.to_string(),
        "alpha": alpha,
        "delta0": geometry.known_gain(),
        "envelope_C": envelope,
        "open_case": geometry.known_gain().is_none(),
        "all_converged": records.iter().all(|r| r.converged),
        "fit": fit.map(|f| json!({"alpha": f.alpha, "delta_hat": f.delta_hat, "C": f.c, "residual_linf": f.residual_linf, "alpha_only": f.alpha_only})),
    }));
    out.domain = Some(plan.spec.clone());
    out.add("scan.csv", scan_table(&records).to_csv());
    if let Some(f) = fit {
        out.add_json(
            "fit.json",
            &json!({"alpha": f.alpha, "delta_hat": f.delta_hat, "C": f.c, "residual_linf": f.residual_linf}),
        );
    }
    for r in &records {
        out.report.push(format!("{} lambda={} mu={} K={} converged={}", r.geometry, r.lambda, r.mu, r.k, r.converged));
    }
    match envelope {
        Some(c) => out.report.push(format!("envelope C={c}")),
        None => out.report.push(format!("{geometry}: open case, no envelope exponent")),
    }
    Ok(out)
}

pub const BILINEAR_HEADER: [&str; 9] =
    ["lambda", "mu", "nu", "trial", "ortho_ratio", "bilinear_ratio", "c_estimate", "geometry", "seed"];

fn bilinear_table(geometry: Geometry, trials: &[OrthoTrial]) -> Table {
    let mut t = Table::new(&BILINEAR_HEADER);
    for r in trials {
        t.push(vec![
            num(r.lambda),
            num(r.mu),
            num(r.nu),
            r.trial.to_string(),
            num(r.ortho_ratio),
            num(r.bilinear_ratio),
            num(r.c_estimate),
            geometry.to_string(),
            r.seed.to_string(),
        ]);
    }
    t
}

/// Runs `trials` orthogonality trials for every `(lambda, mu)` cell.
pub fn run_ortho_cells(
    spec: &DomainSpec,
    cells: &[(f64, f64)],
    trials: usize,
    modes: usize,
    seed: u64,
) -> Result<Vec<OrthoTrial>> {
    let window = Window::new();
    let items: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    pool::try_map(&items, |&(cell, trial)| {
        let (lambda, mu) = cells[cell];
        let setup = OrthoSetup { spec: spec.clone(), lambda, mu, modes, seed: rng::derive_seed(seed, &[cell as u64]) };
        Ok(ortho_trial(&setup, trial, &window)?)
    })
}

fn fold_max(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

fn fold_min(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::INFINITY, f64::min)
}

fn bilinear_scan(a: &BilinearArgs) -> Result<Outcome> {
    let spec = a.domain.spec()?;
    let rule = parse_mu(&a.mu)?;
    let mut cells = Vec::new();
    for &lambda in &a.lambdas {
        lp::check_dyadic(lambda)?;
        match rule {
            MuSpec::All => cells.extend(lp::dyadics_up_to(lambda).map(|m| (lambda, m))),
            MuSpec::Equal => cells.push((lambda, lambda)),
            MuSpec::Fixed(m) if m <= lambda => cells.push((lambda, m)),
            MuSpec::Fixed(_) => {}
        }
    }
    let rows = run_ortho_cells(&spec, &cells, a.trials, a.modes, a.common.seed)?;
    let per_cell: Vec<Value> = cells
        .iter()
        .map(|&(l, m)| {
            let sel = || rows.iter().filter(move |r| r.lambda == l && r.mu == m);
            json!({
                "lambda": l,
                "mu": m,
                "bilinear_max": fold_max(sel().map(|r| r.bilinear_ratio)),
                "ortho_min": fold_min(sel().map(|r| r.ortho_ratio)),
                "ortho_max": fold_max(sel().map(|r| r.ortho_ratio)),
                "c_max": finite_or_null(fold_max(sel().map(|r| r.c_estimate))),
            })
        })
        .collect();
    let constant = fold_max(rows.iter().map(|r| r.bilinear_ratio));
    let mut out = Outcome::new(json!({
        "geometry": spec.geometry().to_string(),
        "bilinear_constant": finite_or_null(constant),
        "cells": per_cell,
    }));
    out.add("bilinear.csv", bilinear_table(spec.geometry(), &rows).to_csv());
    out.report.push(format!("bilinear constant {constant} over {} trials", rows.len()));
    out.domain = Some(spec);
    Ok(out)
}

fn ortho_check(a: &OrthoArgs) -> Result<Outcome> {
    let spec = a.domain.spec()?;
    let cells = a.pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
    let rows = run_ortho_cells(&spec, &cells, a.trials, a.modes, a.common.seed)?;
    let lo = fold_min(rows.iter().map(|r| r.ortho_ratio));
    let hi = fold_max(rows.iter().map(|r| r.ortho_ratio));
    let c_max = fold_max(rows.iter().map(|r| r.c_estimate));
    let pass = lo >= 1.0 / a.ratio_bound && hi <= a.ratio_bound && c_max <= a.c_bound;
    let mut out = Outcome::new(json!({
        "geometry": spec.geometry().to_string(),
        "trials": rows.len(),
        "ortho_min": lo,
        "ortho_max": hi,
        "c_max": finite_or_null(c_max),
        "pass": pass,
    }));
    out.add("ortho.csv", bilinear_table(spec.geometry(), &rows).to_csv());
    out.report.push(format!(
        "ortho ratio in [{lo}, {hi}], c <= {c_max}: {}",
        if pass { "within bounds" } else { "OUT OF BOUNDS" }
    ));
    out.domain = Some(spec);
    Ok(out)
}

/// Largest sampled annulus ratio per k for the three offset modes.
pub struct AnnulusReport {
    pub sampled: Vec<AnnulusSup>,
    pub e0: Vec<AnnulusSup>,
    pub e_half: Vec<AnnulusSup>,
}

impl AnnulusReport {
    pub fn constant(&self) -> f64 {
        fold_max(self.sampled.iter().map(|s| s.ratio))
    }

    /// Largest relative gap between the two special offsets, per k.
    pub fn special_case_gap(&self) -> f64 {
        fold_max(self.e0.iter().zip(&self.e_half).map(|(a, b)| (a.ratio - b.ratio).abs() / a.ratio.max(b.ratio)))
    }
}

pub fn annulus_report(ks: &[f64], samples: usize, seed: u64) -> Result<AnnulusReport> {
    let modes = [OffsetMode::Sampled, OffsetMode::Fixed(0.0), OffsetMode::Fixed(0.5)];
    let mut runs = pool::try_map(&modes, |&m| Ok(annulus_sup_scan(ks, samples, seed, m)?))?;
    let e_half = runs.pop().expect("three modes");
    let e0 = runs.pop().expect("three modes");
    let sampled = runs.pop().expect("three modes");
    Ok(AnnulusReport { sampled, e0, e_half })
}

/// Exact versus Monte Carlo on seeded queries: `(query, exact, estimate, std_error)`.
pub fn annulus_mc(ks: &[f64], queries: usize, points: usize, seed: u64) -> Result<Vec<(AnnulusQuery, f64, f64, f64)>> {
    let idx: Vec<usize> = (0..queries).collect();
    pool::try_map(&idx, |&i| {
        let mut r = rng::stream(seed, &[2, i as u64]);
        let q = AnnulusQuery::new(
            r.gen_range(0.0..200.0),
            r.gen_range(-2.0..2.0),
            r.gen_range(0.0..1.0),
            ks[i % ks.len()],
        )?;
        let mut mc = rng::stream(seed, &[3, i as u64]);
        let (est, se) = annulus_monte_carlo(&q, points, &mut mc);
        Ok((q, annulus_measure(&q), est, se))
    })
}

fn count_lemma(a: &CountArgs) -> Result<Outcome> {
    if !a.scan {
        let q = AnnulusQuery::new(a.c, a.d, a.e, a.k)?;
        let v = annulus_measure(&q);
        let mut out = Outcome::new(json!({"c": a.c, "d": a.d, "e": a.e, "k": a.k, "measure": v}));
        out.add_json("count.json", &out.summary.clone());
        out.report.push(format!("{v:?}"));
        return Ok(out);
    }
    let rep = annulus_report(&a.ks, a.samples, a.common.seed)?;
    let mut t = Table::new(&["mode", "k", "ratio", "c", "e", "samples", "seed"]);
    for (mode, rows) in [("sampled", &rep.sampled), ("e=0", &rep.e0), ("e=1/2", &rep.e_half)] {
        for s in rows.iter() {
            t.push(vec![
                mode.to_string(),
                num(s.k),
                num(s.ratio),
                num(s.c),
                num(s.e),
                s.samples.to_string(),
                a.common.seed.to_string(),
            ]);
        }
    }
    let mc = annulus_mc(&a.ks, a.mc_queries, a.mc_points, a.common.seed)?;
    let mut m = Table::new(&["c", "d", "e", "k", "exact", "estimate", "std_error", "within_3se"]);
    let mut agree = 0;
    for (q, exact, est, se) in &mc {
        let ok = (est - exact).abs() <= 3.0 * se + 1e-12;
        agree += usize::from(ok);
        m.push(vec![num(q.c), num(q.d), num(q.e), num(q.k), num(*exact), num(*est), num(*se), ok.to_string()]);
    }
    let constant = rep.constant();
    let mut out = Outcome::new(json!({
        "C": constant,
        "special_case_gap": rep.special_case_gap(),
        "per_k": rep.sampled.iter().map(|s| json!({"k": s.k, "ratio": s.ratio})).collect::<Vec<_>>(),
        "mc_queries": mc.len(),
        "mc_within_3se": agree,
    }));
    out.add("annulus.csv", t.to_csv());
    out.add("mc.csv", m.to_csv());
    out.report.push(format!("sup ratio C={constant}"));
    out.report.push(format!("Monte Carlo within 3 sigma: {agree}/{}", mc.len()));
    Ok(out)
}

/// `|A|` and `|B|` of one sample; the ratio is NaN for open geometries.
fn measure_sample(scan: &CaseScan, cell: usize, index: usize) -> Result<CaseSample> {
    if case_normalization(scan.geometry, 1.0, 1.0).is_ok() {
        return Ok(case_sample(scan, cell, index)?);
    }
    let query = scan.query(cell, index);
    let h = scan.resolution * query.lambda;
    Ok(CaseSample {
        cell,
        index,
        b: set_b_measure(&query, h)?,
        a: set_a_measure(&query, h)?,
        b_double: set_b_measure_at(&query, h, 2.0 * query.cutoff)?,
        normalized_ratio: f64::NAN,
        query,
    })
}

pub fn measure_header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = ["geometry", "lambda", "mu", "tau"].iter().map(|s| s.to_string()).collect();
    h.extend((1..=d).map(|i| format!("xi{i}")));
    h.extend((1..=d).map(|i| format!("a{i}")));
    for s in [
        "measure",
        "normalized_ratio",
        "resolved_flag",
        "coarse_measure",
        "a_measure",
        "b_double",
        "fiber_holds",
        "cell",
        "index",
        "seed",
    ] {
        h.push(s.to_string());
    }
    h
}

/// Per-lambda sup of the normalized ratio and the derived constants.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSummary {
    pub per_lambda: Vec<(f64, f64)>,
    pub constant: f64,
    pub spread: f64,
    pub fiber_all: bool,
    pub unresolved: usize,
    pub samples: usize,
}

pub fn summarize_measures(samples: &[CaseSample], lambdas: &[f64]) -> MeasureSummary {
    let per_lambda: Vec<(f64, f64)> = lambdas
        .iter()
        .map(|&l| (l, fold_max(samples.iter().filter(|s| s.query.lambda == l).map(|s| s.normalized_ratio))))
        .collect();
    let constant = fold_max(per_lambda.iter().map(|p| p.1));
    let low = fold_min(per_lambda.iter().map(|p| p.1));
    MeasureSummary {
        constant,
        spread: constant / low,
        per_lambda,
        fiber_all: samples.iter().all(|s| s.fiber_holds()),
        unresolved: samples.iter().filter(|s| !s.b.resolved).count(),
        samples: samples.len(),
    }
}

pub fn run_measures(scan: &CaseScan) -> Result<Vec<CaseSample>> {
    for &l in &scan.lambdas {
        lp::check_dyadic(l)?;
    }
    let items: Vec<(usize, usize)> =
        (0..scan.cells().len()).flat_map(|c| (0..scan.samples_per_cell()).map(move |i| (c, i))).collect();
    pool::try_map(&items, |&(c, i)| measure_sample(scan, c, i))
}

fn measure_ab(a: &MeasureArgs) -> Result<Outcome> {
    let geometry = Geometry::new(a.m, a.n);
    if geometry.dim() != 4 {
        bail!("set measures need m + n = 4, got {geometry}");
    }
    let mus = match parse_mu(&a.mu)? {
        MuSpec::All => MuChoice::AllDyadic,
        MuSpec::Fixed(v) => MuChoice::Fixed(v),
        MuSpec::Equal => bail!("measure-ab takes mu = all or a number"),
    };
    let scan = CaseScan {
        geometry,
        lambdas: a.lambdas.clone(),
        mus,
        samples: a.samples,
        seed: a.common.seed,
        cutoff: a.cutoff,
        resolution: a.resolution,
    };
    if !(scan.cutoff > 0.0 && scan.resolution > 0.0) {
        bail!("cutoff and resolution must be positive");
    }
    let samples = run_measures(&scan)?;
    let d = geometry.dim();
    let mut t = Table::new(&measure_header(d));
    for s in &samples {
        let q = &s.query;
        let mut row = vec![geometry.to_string(), num(q.lambda), num(q.mu), num(q.tau)];
        row.extend(q.xi.iter().map(|x| num(*x)));
        row.extend(q.normal.iter().map(|x| num(*x)));
        row.extend([
            num(s.b.value),
            num(s.normalized_ratio),
            s.b.resolved.to_string(),
            num(s.b.coarse),
            num(s.a),
            num(s.b_double),
            s.fiber_holds().to_string(),
            s.cell.to_string(),
            s.index.to_string(),
            a.common.seed.to_string(),
        ]);
        t.push(row);
    }
    let open = case_normalization(geometry, 1.0, 1.0).is_err();
    let sum = summarize_measures(&samples, &a.lambdas);
    let mut out = Outcome::new(json!({
        "geometry": geometry.to_string(),
        "open_case": open,
        "samples": sum.samples,
        "per_lambda_sup": sum.per_lambda.iter().map(|&(l, r)| json!({"lambda": l, "sup_ratio": finite_or_null(r)})).collect::<Vec<_>>(),
        "C": finite_or_null(sum.constant),
        "spread": finite_or_null(sum.spread),
        "fiber_all": sum.fiber_all,
        "unresolved": sum.unresolved,
    }));
    out.add("measures.csv", t.to_csv());
    if open {
        out.report.push(format!("{geometry}: open case, ratios not normalized"));
    } else {
        out.report.push(format!("sup normalized ratio C={} (spread {} across lambda)", sum.constant, sum.spread));
    }
    out.report.push(format!(
        "fiber inequality {} on {} samples, {} unresolved",
        if sum.fiber_all { "holds" } else { "FAILS" },
        sum.samples,
        sum.unresolved
    ));
    Ok(out)
}

fn variation_norm(a: &VariationArgs) -> Result<Outcome> {
    let (series, generated) = match &a.input {
        Some(path) => (formats::load_time_series(path)?, None),
        None => {
            let spec = a.domain.spec()?;
            let mut r = rng::stream(a.common.seed, &[]);
            let phi = FreqField::from_fn(spec, |_| rng::complex_gaussian(&mut r));
            let s = TimeSeries::linear_solution(&phi, &a.times)?;
            (s, Some(phi))
        }
    };
    let vp = vp_norm(&series, a.p)?;
    let vd = vp_delta_norm(&series, a.p, a.s)?;
    let cubes = cube_norms(&series, a.s)?;
    let mut summary = json!({
        "p": a.p,
        "s": a.s,
        "samples": series.len(),
        "terminal": series.has_terminal(),
        "vp": vp,
        "vp_delta": vd,
        "ys": cubes.ys,
        "xs_certificate": cubes.xs_certificate,
        "active_cubes": cubes.active_cubes,
    });
    let mut out = Outcome::new(Value::Null);
    if let Some(phi) = &generated {
        summary["h_s"] = json!(phi.sobolev_norm(a.s));
        out.add("series.bin", formats::series_bytes(&series)?);
    }
    out.domain = series.spec().cloned();
    out.add_json("variation.json", &summary);
    out.report.push(format!("V^{} = {vp}, delta norm = {vd}, Y^{} = {}", a.p, a.s, cubes.ys));
    out.summary = summary;
    Ok(out)
}

pub const NLS_HEADER: [&str; 5] = ["t", "mass", "energy", "h1", "linf"];

fn nls_run(a: &NlsArgs) -> Result<Outcome> {
    let spec = a.domain.spec()?;
    let u0 = match a.preset.as_str() {
        "plane-wave" => {
            if a.wave.len() != spec.dim() {
                bail!("--wave needs {} components", spec.dim());
            }
            nls::plane_wave(&spec, &a.wave, a.amplitude)?
        }
        "random" => nls::random_smooth_data(&spec, a.band, a.s, a.common.seed)?
            .scale(speclab_core::Complex64::new(a.amplitude, 0.0))
            .to_space(),
        other => bail!("unknown preset {other:?} (expected plane-wave or random)"),
    };
    let cfg = NlsConfig { sign: a.sign, dt: a.dt, steps: a.steps, dealias: a.dealias, record_every: a.record_every };
    let traj = nls::evolve(&u0, &cfg)?;
    let mut t = Table::new(&NLS_HEADER);
    for d in &traj.diagnostics {
        t.push(vec![num(d.t), num(d.mass), num(d.energy), num(d.h1), num(d.linf)]);
    }
    let rel = |f: &dyn Fn(&nls::Diagnostics) -> f64| {
        if f(&traj.diagnostics[0]) == 0.0 {
            0.0
        } else {
            traj.max_relative_drift(f)
        }
    };
    let last = traj.diagnostics.last().expect("initial diagnostics");
    let plane_error = (a.preset == "plane-wave" && traj.failure.is_none())
        .then(|| -> Result<f64> {
            let exact = nls::plane_wave_exact(&spec, &a.wave, a.amplitude, a.sign, last.t)?;
            Ok(traj.last().data().iter().zip(exact.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
        })
        .transpose()?;
    let mut out = Outcome::new(json!({
        "final_time": last.t,
        "mass_drift": rel(&|d| d.mass),
        "energy_drift": rel(&|d| d.energy),
        "h1_max": fold_max(traj.diagnostics.iter().map(|d| d.h1)),
        "plane_wave_error": plane_error,
        "blow_up": traj.failure.as_ref().map(|e| e.to_string()),
    }));
    out.add("diagnostics.csv", t.to_csv());
    if a.snapshots {
        for (i, s) in traj.snapshots.iter().enumerate() {
            out.add(&format!("snapshots/snap_{i:05}.bin"), formats::spatial_bytes(s));
        }
    }
    out.report.push(format!(
        "t={} mass drift {} energy drift {}",
        last.t, out.summary["mass_drift"], out.summary["energy_drift"]
    ));
    if let Some(e) = plane_error {
        out.report.push(format!("plane-wave max error {e}"));
    }
    out.failure = traj.failure.map(|e| format!("{e} (partial trajectory written)"));
    out.domain = Some(spec);
    Ok(out)
}

pub const SMALL_DATA_HEADER: [&str; 7] =
    ["amplitude", "h1_ratio", "mass_drift", "energy_drift", "blow_up", "geometry", "seed"];

fn small_data(a: &SmallDataArgs) -> Result<Outcome> {
    let spec = a.domain.spec()?;
    if !(a.s >= 1.0) {
        bail!("regularity s={} must be at least 1", a.s);
    }
    let cfg = NlsConfig { sign: a.sign, dt: a.dt, steps: a.steps, dealias: a.dealias, record_every: a.record_every };
    cfg.validate()?;
    let phi = nls::random_smooth_data(&spec, a.band, a.s, a.common.seed)?;
    let rows = pool::try_map(&a.amplitudes, |&amp| Ok(nls::small_data_run(&phi, amp, &cfg)?))?;
    let mut t = Table::new(&SMALL_DATA_HEADER);
    for r in &rows {
        t.push(vec![
            num(r.amplitude),
            num(r.h1_ratio),
            num(r.mass_drift),
            num(r.energy_drift),
            r.blow_up.clone().unwrap_or_default(),
            spec.geometry().to_string(),
            a.common.seed.to_string(),
        ]);
    }
    // Largest amplitude below which every run stays within ratio 2.
    let mut sorted: Vec<_> = rows.iter().collect();
    sorted.sort_by(|x, y| x.amplitude.total_cmp(&y.amplitude));
    let threshold = sorted.iter().take_while(|r| r.blow_up.is_none() && r.h1_ratio <= 2.0).last().map(|r| r.amplitude);
    let mut out = Outcome::new(json!({
        "geometry": spec.geometry().to_string(),
        "rows": rows.iter().map(|r| json!({"amplitude": r.amplitude, "h1_ratio": finite_or_null(r.h1_ratio), "blow_up": r.blow_up})).collect::<Vec<_>>(),
        "bounded_up_to": threshold,
    }));
    out.add("small_data.csv", t.to_csv());
    for r in &rows {
        out.report.push(format!(
            "amplitude {} H1 ratio {}{}",
            r.amplitude,
            r.h1_ratio,
            r.blow_up.as_ref().map(|b| format!(" ({b})")).unwrap_or_default()
        ));
    }
    out.domain = Some(spec);
    Ok(out)
}

/// Fails unless every value of `column` parses as a number.
pub fn numeric_column(t: &Table, column: &str) -> Result<Vec<f64>> {
    t.column(column)
        .ok_or_else(|| anyhow!("missing column {column}"))?
        .iter()
        .map(|v| v.parse::<f64>().with_context(|| format!("bad number {v:?} in {column}")))
        .collect()
}
