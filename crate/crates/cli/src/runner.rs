//! Experiment execution: single runs, eps sweeps, and the free-wave
//! scaling study.  Every artifact lands under one directory per run; the
//! manifest is on disk with all fields present before the first CSV row.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use serde::Serialize;

use slabflow::acoustics::{propagate_exact, AcousticState};
use slabflow::checkpoint;
use slabflow::cns3d::{self, IllPreparedData, Params};
use slabflow::diagnostics::{
    averaged_fields, build_test_functions, convergence_metrics, fit_rate, relative_energy,
    uniform_bounds, vertical_poincare, BoundsSample, ConvergenceRecord, RateFit,
};
use slabflow::field2::{helmholtz_split, ScalarField2, VectorField2};
use slabflow::field3::{ScalarField3, VectorField3};
use slabflow::grid::{Parity, SlabGrid, Torus2};
use slabflow::limit2d::{self, LimitState2, ADVECTIVE_CFL};
use slabflow::norms::norm_l2_window_vector;
use slabflow::synth;

use crate::config::{ExperimentConfig, Family, Regime};
use crate::manifest::{Progress, ResultSummary, RunFiles, RunManifest, SoftwareInfo};

pub const CSV_HEADER: &str = "run_id,eps,delta,mu,t,energy_total,dissipation,rel_energy,\
bound_mom,bound_r_ess,bound_rho_res,bound_res_measure,bound_grad,bound_u_W12,\
grad_part_L2K,sol_metric_L2K,sqrho_metric_L2K,poincare_dev,poincare_bound";

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub run_id: String,
    pub eps: f64,
    pub delta: f64,
    pub mu: f64,
    pub dir: PathBuf,
    pub csv: PathBuf,
    pub rows: usize,
    pub steps: u64,
    pub wall_seconds: f64,
    pub sup_rel_energy: f64,
    pub record: ConvergenceRecord,
    pub bounds_sup: BoundsSample,
}

pub fn run_id_for(eps: f64) -> String {
    format!("eps-{eps:.6}")
}

fn build_family(cfg: &ExperimentConfig, grid: SlabGrid, eps: f64) -> anyhow::Result<IllPreparedData> {
    let data = match cfg.data.family {
        Family::Benchmark => {
            let p = synth::BenchmarkParams {
                vortex_amp: cfg.data.vortex_amp,
                vortex_width: cfg.data.vortex_width,
                pulse_amp: cfg.data.pulse_amp,
                pulse_width: cfg.data.pulse_width,
                bump_amp: cfg.data.bump_amp,
                bump_width: cfg.data.bump_width,
                vertical_amp: cfg.data.vertical_amp,
            };
            let mut data = synth::benchmark_data(grid, &p)?;
            if cfg.data.random_amp > 0.0 {
                let h = grid.horizontal();
                let amp = cfg.data.random_amp;
                let band = cfg.data.random_band;
                let drho = synth::random_band_limited(h, band, amp, cfg.seed);
                let du = synth::random_solenoidal(h, band, amp, cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
                let rho1 = data.rho1().add(&ScalarField3::lift(grid, &drho)?);
                let u0 = data.u0().add(&VectorField3::lift(grid, &du)?);
                data = IllPreparedData::new(rho1, u0)?;
            }
            data
        }
        Family::ResidualProbe => synth::residual_probe_data(grid, eps)?,
        Family::Rest => IllPreparedData::new(
            ScalarField3::zeros(grid, Parity::Even),
            VectorField3::zeros(grid),
        )?,
    };
    Ok(data)
}

/// Advance the slab state to `target`, recomputing the admissible step from
/// the current state so the solver's own refusal thresholds are never hit.
fn march_slab(
    state: &mut slabflow::cns3d::FluidState3,
    target: f64,
    params: &Params,
    vertical_limit: f64,
    steps: &mut u64,
) -> anyhow::Result<()> {
    while target - state.time() > 1e-12 {
        let room = target - state.time();
        let lim = cns3d::cfl_limit(state, params).min(vertical_limit);
        let dt = if room <= lim { room } else { room / (room / lim).ceil() };
        *state = cns3d::step(state, dt, params)?;
        *steps += 1;
    }
    Ok(())
}

fn march_limit(
    state: &mut LimitState2,
    target: f64,
    regime: Regime,
    viscosity: f64,
) -> anyhow::Result<()> {
    let h = state.grid().spacing();
    while target - state.time() > 1e-12 {
        let room = target - state.time();
        let vmax = state.velocity().max_abs();
        let lim = if vmax > 0.0 { 0.9 * ADVECTIVE_CFL * h / vmax } else { f64::INFINITY };
        let dt = if room <= lim { room } else { room / (room / lim).ceil() };
        *state = match regime {
            Regime::Viscous => limit2d::ns2d_step(state, dt, viscosity)?,
            Regime::Inviscid => limit2d::euler2d_step(state, dt)?,
        };
    }
    Ok(())
}

pub fn run_single(cfg: &ExperimentConfig, eps: f64, out_root: &Path) -> anyhow::Result<RunArtifacts> {
    let started = Instant::now();
    let delta = cfg.delta_for(eps);
    let mu = cfg.mu_for(eps);
    let grid = cfg.slab(eps)?;
    let params = cfg.params(eps)?;

    let run_id = run_id_for(eps);
    let dir = out_root.join(&run_id);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let data = build_family(cfg, grid, eps)?;
    let (state0, report) = cns3d::init_illprepared(&data, &params)?;

    // planar reference and wave part from the same averaged data
    let ubar0 = data.u0().vertical_average();
    let (limit0, grad_part0) = limit2d::project_initial(&ubar0)?;
    let psi0 = data.rho1().vertical_average();
    let mut wave0 = AcousticState::new(&psi0, &grad_part0, 0.0)?;
    if cfg.run.mollifier > 0.0 {
        wave0 = wave0.mollify(cfg.run.mollifier)?;
    }

    let echo = cfg.echo();
    let echo_text = toml::to_string(&echo)?;
    let files = RunFiles::default();
    let csv_path = dir.join(&files.series);
    let mut manifest = RunManifest {
        run_id: run_id.clone(),
        eps,
        delta,
        mu,
        software: SoftwareInfo::current(&echo_text),
        progress: Progress { completed: false, steps: 0, wall_seconds: 0.0 },
        data_norms: report.into(),
        files,
        results: None,
        config: echo,
    };
    manifest.write(&dir.join("manifest.toml"))?;
    checkpoint::save_state3(&dir.join("initial_state.bin"), &state0, &params)?;

    let samples = cfg.run.samples;
    let t_end = cfg.run.final_time;
    let times: Vec<f64> =
        (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();

    let vertical_limit = 0.9 * cns3d::vertical_stability_limit(&grid, &params);
    let mut steps = 0u64;
    let mut states = Vec::with_capacity(samples);
    states.push(state0.clone());
    let mut state = state0;
    for &target in &times[1..] {
        march_slab(&mut state, target, &params, vertical_limit, &mut steps)
            .with_context(|| format!("advancing {run_id} to t = {target:.4}"))?;
        states.push(state.clone());
    }

    let limit_viscosity = cfg.limit_viscosity();
    let mut limits = Vec::with_capacity(samples);
    limits.push(limit0.clone());
    let mut limit_state = limit0;
    for &target in &times[1..] {
        march_limit(&mut limit_state, target, cfg.run.regime, limit_viscosity)
            .with_context(|| format!("advancing the planar reference to t = {target:.4}"))?;
        limits.push(limit_state.clone());
    }
    let refs: Vec<VectorField2> = limits.iter().map(|s| s.velocity().clone()).collect();

    let bounds = uniform_bounds(&times, &states, &params)?;
    let sound = params.law().sound_speed();
    let wf = cfg.run.window_fraction;

    let mut csv = fs::File::create(&csv_path)?;
    writeln!(csv, "{CSV_HEADER}")?;
    let mut sup_rel_energy: f64 = 0.0;
    for j in 0..samples {
        let st = &states[j];
        let b = &bounds.samples[j];
        let energy = cns3d::energy_total(st, &params);
        let diss = cns3d::dissipation(st, &params);

        let wave = propagate_exact(&wave0, times[j], eps, sound)?;
        let pair = build_test_functions(grid, &limits[j], &wave, eps)?;
        let rel = relative_energy(st, &pair.density, &pair.velocity, &params)?;
        sup_rel_energy = sup_rel_energy.max(rel);

        let u = st.velocity();
        let ubar = u.vertical_average();
        let sol = norm_l2_window_vector(&ubar.sub(&refs[j]), wf);
        let root = st.rho().map(f64::sqrt);
        let wbar = VectorField2::new(
            root.mul(u.x()).vertical_average(),
            root.mul(u.y()).vertical_average(),
        )?;
        let sqrho = norm_l2_window_vector(&wbar.sub(&refs[j]), wf);
        let avg = averaged_fields(st, eps)?;
        let (_, grad_m) = helmholtz_split(&avg.m_bar);
        let grad_norm = norm_l2_window_vector(&grad_m, wf);
        let (p_dev, p_bound) = vertical_poincare(&u);

        writeln!(
            csv,
            "{run_id},{eps:.12e},{delta:.12e},{mu:.12e},{:.12e},{energy:.12e},{diss:.12e},{rel:.12e},\
{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},\
{grad_norm:.12e},{sol:.12e},{sqrho:.12e},{p_dev:.12e},{p_bound:.12e}",
            times[j],
            b.momentum_flux_l1,
            b.r_ess_l2,
            b.rho_res_mass,
            b.res_measure,
            b.dissipation,
            b.avg_velocity_w12,
        )?;
    }
    csv.flush()?;
    drop(csv);

    let record = convergence_metrics(&times, &states, &refs, eps, &params, wf)?;
    checkpoint::save_state3(&dir.join("final_state.bin"), states.last().unwrap(), &params)?;

    manifest.progress = Progress {
        completed: true,
        steps,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.results = Some(ResultSummary {
        sup_rel_energy,
        sol_metric: record.sol_metric,
        sqrho_metric: record.sqrho_metric,
        density_sup: record.density_sup,
        grad_metric: record.grad_metric,
        rho_res_mass_sup: bounds.sup.rho_res_mass,
        res_measure_sup: bounds.sup.res_measure,
    });
    manifest.write(&dir.join("manifest.toml"))?;

    Ok(RunArtifacts {
        run_id,
        eps,
        delta,
        mu,
        dir,
        csv: csv_path,
        rows: samples,
        steps,
        wall_seconds: manifest.progress.wall_seconds,
        sup_rel_energy,
        record,
        bounds_sup: bounds.sup,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub count: usize,
}

impl From<RateFit> for FitRow {
    fn from(f: RateFit) -> Self {
        FitRow {
            slope: f.slope,
            intercept: f.intercept,
            rms_residual: f.rms_residual,
            count: f.count,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRunRow {
    pub run_id: String,
    pub eps: f64,
    pub delta: f64,
    pub mu: f64,
    pub steps: u64,
    pub wall_seconds: f64,
    pub sup_rel_energy: f64,
    pub sol_metric: f64,
    pub sqrho_metric: f64,
    pub density_sup: f64,
    pub grad_metric: f64,
    pub rho_res_mass_sup: f64,
    pub res_measure_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFailure {
    pub eps: f64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    /// Reference decay exponent min(1/8, 1/(4 gamma)) for the relative
    /// energy on well-prepared data.
    pub alpha: f64,
    pub gamma: f64,
    pub regime: String,
    pub completed: usize,
    pub runs: Vec<SweepRunRow>,
    pub failures: Vec<SweepFailure>,
    pub fits: BTreeMap<String, FitRow>,
    /// Quantities whose fit was skipped, with the reason (typically all
    /// samples zero, as for data at rest).
    pub skipped_fits: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct SweepArtifacts {
    pub outcomes: Vec<RunArtifacts>,
    pub failures: Vec<SweepFailure>,
    pub summary: SweepSummary,
    pub summary_path: PathBuf,
    pub csv_path: PathBuf,
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Viscous => "viscous",
        Regime::Inviscid => "inviscid",
    }
}

fn add_fit(
    summary: &mut SweepSummary,
    name: &str,
    samples: &[(f64, f64)],
) {
    match fit_rate(samples) {
        Ok(fit) => {
            summary.fits.insert(name.to_string(), fit.into());
        }
        Err(e) => {
            summary.skipped_fits.insert(name.to_string(), e.to_string());
        }
    }
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    out_root: &Path,
    threads: usize,
) -> anyhow::Result<SweepArtifacts> {
    let eps_list = cfg.eps.list.clone();
    if eps_list.len() < 3 {
        bail!("a sweep needs at least three eps values, got {}", eps_list.len());
    }
    fs::create_dir_all(out_root)?;

    let slots: Vec<Mutex<Option<Result<RunArtifacts, String>>>> =
        eps_list.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = threads.max(1).min(eps_list.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= eps_list.len() {
                    break;
                }
                let result = run_single(cfg, eps_list[i], out_root)
                    .map_err(|e| format!("{e:#}"));
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.into_inner().unwrap() {
            Some(Ok(run)) => outcomes.push(run),
            Some(Err(error)) => failures.push(SweepFailure { eps: eps_list[i], error }),
            None => failures.push(SweepFailure {
                eps: eps_list[i],
                error: "worker exited before running".to_string(),
            }),
        }
    }

    // combined CSV over the completed runs, in eps order
    let csv_path = out_root.join("sweep.csv");
    let mut combined = String::from(CSV_HEADER);
    combined.push('\n');
    for run in &outcomes {
        let text = fs::read_to_string(&run.csv)?;
        for line in text.lines().skip(1) {
            combined.push_str(line);
            combined.push('\n');
        }
    }
    fs::write(&csv_path, combined)?;

    let mut summary = SweepSummary {
        alpha: (1.0f64 / 8.0).min(1.0 / (4.0 * cfg.law.gamma)),
        gamma: cfg.law.gamma,
        regime: regime_name(cfg.run.regime).to_string(),
        completed: outcomes.len(),
        runs: outcomes
            .iter()
            .map(|r| SweepRunRow {
                run_id: r.run_id.clone(),
                eps: r.eps,
                delta: r.delta,
                mu: r.mu,
                steps: r.steps,
                wall_seconds: r.wall_seconds,
                sup_rel_energy: r.sup_rel_energy,
                sol_metric: r.record.sol_metric,
                sqrho_metric: r.record.sqrho_metric,
                density_sup: r.record.density_sup,
                grad_metric: r.record.grad_metric,
                rho_res_mass_sup: r.bounds_sup.rho_res_mass,
                res_measure_sup: r.bounds_sup.res_measure,
            })
            .collect(),
        failures: failures.clone(),
        fits: BTreeMap::new(),
        skipped_fits: BTreeMap::new(),
    };

    let pairs = |f: &dyn Fn(&RunArtifacts) -> f64| -> Vec<(f64, f64)> {
        outcomes.iter().map(|r| (r.eps, f(r))).collect()
    };
    add_fit(&mut summary, "sup_rel_energy", &pairs(&|r| r.sup_rel_energy));
    add_fit(&mut summary, "sol_metric", &pairs(&|r| r.record.sol_metric));
    add_fit(&mut summary, "sqrho_metric", &pairs(&|r| r.record.sqrho_metric));
    add_fit(&mut summary, "density_sup", &pairs(&|r| r.record.density_sup));
    add_fit(&mut summary, "grad_metric", &pairs(&|r| r.record.grad_metric));
    add_fit(&mut summary, "rho_res_mass_sup", &pairs(&|r| r.bounds_sup.rho_res_mass));
    add_fit(&mut summary, "res_measure_sup", &pairs(&|r| r.bounds_sup.res_measure));

    let summary_path = out_root.join("summary.toml");
    fs::write(&summary_path, toml::to_string_pretty(&summary)?)?;

    Ok(SweepArtifacts { outcomes, failures, summary, summary_path, csv_path })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub mixed_norm: f64,
    pub ratio: f64,
    pub rescaled_reference: f64,
    pub identity_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub expected_slope: f64,
    pub fitted_slope: f64,
    pub worst_identity_error: f64,
    pub samples: Vec<ScalingRow>,
}

/// Mixed-norm scaling study of the free wave system on its own torus.
pub fn run_acoustics(cfg: &ExperimentConfig, out_root: &Path) -> anyhow::Result<ScalingReport> {
    let spec = &cfg.acoustics;
    let grid = Torus2::new(spec.length, spec.modes)?;
    let law = cfg.law()?;
    let center = (0.5 * spec.length, 0.5 * spec.length);
    let bump = synth::gaussian_bump(grid, center, spec.width, 1.0);
    let psi = bump.offset(-bump.mean());
    let pot = ScalarField2::zeros(grid);
    let state = AcousticState::from_potentials(&psi, &pot, 0.0)?;

    let study = slabflow::acoustics::strichartz_scaling_check(
        &state,
        spec.p,
        spec.horizon,
        &spec.eps,
        law.sound_speed(),
        spec.samples_per_period,
    )?;

    let report = ScalingReport {
        p: study.p,
        q: study.q,
        sigma: study.sigma,
        expected_slope: 1.0 / study.q,
        fitted_slope: study.fitted_slope,
        worst_identity_error: study
            .samples
            .iter()
            .map(|s| s.identity_error)
            .fold(0.0, f64::max),
        samples: study
            .samples
            .iter()
            .map(|s| ScalingRow {
                eps: s.eps,
                mixed_norm: s.mixed,
                ratio: s.ratio,
                rescaled_reference: s.rescaled_reference,
                identity_error: s.identity_error,
            })
            .collect(),
    };
    fs::create_dir_all(out_root)?;
    fs::write(out_root.join("acoustics.toml"), toml::to_string_pretty(&report)?)?;
    Ok(report)
}

/// Per-eps aggregates re-read from an existing sweep CSV.
#[derive(Debug, Clone, Serialize)]
pub struct RatesReport {
    pub rows: usize,
    pub eps: Vec<f64>,
    pub fits: BTreeMap<String, FitRow>,
    pub skipped_fits: BTreeMap<String, String>,
}

pub fn refit_rates(csv_path: &Path) -> anyhow::Result<RatesReport> {
    let text = fs::read_to_string(csv_path)
        .with_context(|| format!("reading {}", csv_path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty CSV")?;
    if header != CSV_HEADER {
        bail!("unexpected CSV header; this file was not written by the sweep runner");
    }

    struct Group {
        times: Vec<f64>,
        rel: Vec<f64>,
        rho_res: Vec<f64>,
        res_measure: Vec<f64>,
        sol: Vec<f64>,
        sqrho: Vec<f64>,
        grad: Vec<f64>,
    }
    let mut order: Vec<f64> = Vec::new();
    let mut groups: BTreeMap<String, Group> = BTreeMap::new();
    let mut rows = 0;
    for (lineno, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 19 {
            bail!("row {} has {} columns, expected 19", lineno + 2, parts.len());
        }
        let num = |i: usize| -> anyhow::Result<f64> {
            parts[i]
                .parse::<f64>()
                .with_context(|| format!("row {}, column {}", lineno + 2, i + 1))
        };
        let eps = num(1)?;
        let key = format!("{eps:.12e}");
        if !groups.contains_key(&key) {
            order.push(eps);
        }
        let g = groups.entry(key).or_insert_with(|| Group {
            times: Vec::new(),
            rel: Vec::new(),
            rho_res: Vec::new(),
            res_measure: Vec::new(),
            sol: Vec::new(),
            sqrho: Vec::new(),
            grad: Vec::new(),
        });
        g.times.push(num(4)?);
        g.rel.push(num(7)?);
        g.rho_res.push(num(10)?);
        g.res_measure.push(num(11)?);
        g.grad.push(num(14)?);
        g.sol.push(num(15)?);
        g.sqrho.push(num(16)?);
        rows += 1;
    }

    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x));
    let l2_in_time = |times: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 1..times.len() {
            let h = 0.5 * (times[i] - times[i - 1]);
            acc += h * (v[i - 1] * v[i - 1] + v[i] * v[i]);
        }
        acc.sqrt()
    };

    let mut report = RatesReport {
        rows,
        eps: order.clone(),
        fits: BTreeMap::new(),
        skipped_fits: BTreeMap::new(),
    };
    let collect = |f: &dyn Fn(&Group) -> f64| -> Vec<(f64, f64)> {
        order
            .iter()
            .map(|e| {
                let g = &groups[&format!("{e:.12e}")];
                (*e, f(g))
            })
            .collect()
    };
    let mut add = |name: &str, samples: Vec<(f64, f64)>| match fit_rate(&samples) {
        Ok(fit) => {
            report.fits.insert(name.to_string(), fit.into());
        }
        Err(e) => {
            report.skipped_fits.insert(name.to_string(), e.to_string());
        }
    };
    add("sup_rel_energy", collect(&|g| sup(&g.rel)));
    add("rho_res_mass_sup", collect(&|g| sup(&g.rho_res)));
    add("res_measure_sup", collect(&|g| sup(&g.res_measure)));
    add("sol_metric", collect(&|g| l2_in_time(&g.times, &g.sol)));
    add("sqrho_metric", collect(&|g| l2_in_time(&g.times, &g.sqrho)));
    add("grad_metric", collect(&|g| l2_in_time(&g.times, &g.grad)));
    Ok(report)
}
