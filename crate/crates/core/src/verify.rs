//! Self-contained check batteries behind the command line `verify`
//! subcommand.  Each suite reruns a condensed version of the module's
//! oracles headlessly and reports pass/fail per check; a failure is report
//! content, not an error.

use std::f64::consts::PI;

use crate::acoustics::{propagate_duhamel, propagate_exact, AcousticForcing, AcousticState};
use crate::cns3d::{self, FluidState2, FluidState3, Params};
use crate::diagnostics::{
    audit_energy_inequality, fit_rate, relative_energy, remainder, vertical_poincare,
};
use crate::error::{Error, Result};
use crate::field2::{helmholtz_split, ScalarField2, VectorField2};
use crate::field3::{ScalarField3, VectorField3};
use crate::grid::{Parity, SlabGrid, Torus2};
use crate::limit2d::{euler2d_step, ns2d_step, LimitState2};
use crate::synth;
use crate::thermo::{CutoffKappa, GasLaw};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Scalar defect the check measured, NaN when it failed to run.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const SUITES: [&str; 6] = ["field", "thermo", "acoustics", "limit2d", "cns3d", "diagnostics"];

/// Runs one suite, or all of them for `"all"`.  Only an unknown suite name
/// is an error; failing checks come back inside the reports.
pub fn run_suite(name: &str) -> Result<Vec<SuiteReport>> {
    match name {
        "field" => Ok(vec![field_suite()]),
        "thermo" => Ok(vec![thermo_suite()]),
        "acoustics" => Ok(vec![acoustics_suite()]),
        "limit2d" => Ok(vec![limit2d_suite()]),
        "cns3d" => Ok(vec![cns3d_suite()]),
        "diagnostics" => Ok(vec![diagnostics_suite()]),
        "all" => Ok(vec![
            field_suite(),
            thermo_suite(),
            acoustics_suite(),
            limit2d_suite(),
            cns3d_suite(),
            diagnostics_suite(),
        ]),
        other => Err(Error::invalid(format!(
            "unknown suite {other:?}; choose one of field, thermo, acoustics, limit2d, cns3d, diagnostics, all"
        ))),
    }
}

fn check(
    checks: &mut Vec<CheckResult>,
    name: &'static str,
    tolerance: f64,
    run: impl FnOnce() -> Result<f64>,
) {
    match run() {
        Ok(measured) => checks.push(CheckResult {
            name,
            passed: measured.is_finite() && measured <= tolerance,
            measured,
            tolerance,
            detail: String::new(),
        }),
        Err(e) => checks.push(CheckResult {
            name,
            passed: false,
            measured: f64::NAN,
            tolerance,
            detail: e.to_string(),
        }),
    }
}

fn torus(n: usize) -> Torus2 {
    Torus2::new(2.0 * PI, n).expect("valid torus")
}

fn slab(n: usize, m: usize) -> SlabGrid {
    SlabGrid::new(torus(n), 0.5, m).expect("valid slab")
}

fn law() -> GasLaw {
    GasLaw::new(1.0, 2.0).expect("valid law")
}

fn field_suite() -> SuiteReport {
    let mut checks = Vec::new();
    let g = torus(32);

    check(&mut checks, "transform round trip", 1e-12, || {
        let f = synth::random_band_limited(g, 9, 1.0, 41);
        Ok(f.to_spectral().to_physical().sub(&f).max_abs())
    });

    check(&mut checks, "derivative closed form", 1e-10, || {
        let f = ScalarField2::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        let want = ScalarField2::from_fn(g, |x, y| 3.0 * (3.0 * x).cos() * (2.0 * y).cos());
        let got = f.to_spectral().derivative(1, 0).to_physical();
        Ok(got.sub(&want).max_abs())
    });

    let sample = |seed: u64| {
        VectorField2::new(
            synth::random_band_limited(g, 8, 1.0, seed),
            synth::random_band_limited(g, 8, 1.0, seed + 1000),
        )
        .expect("same grid")
    };

    check(&mut checks, "projection idempotent", 1e-10, || {
        let mut worst: f64 = 0.0;
        for seed in 0..12 {
            let v = sample(seed);
            let (sol, _) = helmholtz_split(&v);
            let (again, leak) = helmholtz_split(&sol);
            worst = worst.max(again.sub(&sol).max_abs()).max(leak.max_abs());
        }
        Ok(worst)
    });

    check(&mut checks, "split completeness", 1e-10, || {
        let mut worst: f64 = 0.0;
        for seed in 0..12 {
            let v = sample(seed);
            let (sol, grad) = helmholtz_split(&v);
            worst = worst.max(sol.add(&grad).sub(&v).max_abs());
        }
        Ok(worst)
    });

    check(&mut checks, "solenoidal part divergence", 1e-10, || {
        let mut worst: f64 = 0.0;
        for seed in 0..12 {
            let (sol, _) = helmholtz_split(&sample(seed));
            worst = worst.max(sol.div_h().max_abs());
        }
        Ok(worst)
    });

    check(&mut checks, "vertical second derivative", 1e-8, || {
        let grid = slab(16, 4);
        let lam = 2.0 * PI / grid.thickness();
        let f = ScalarField3::from_fn(grid, Parity::Even, move |x, y, z| {
            (lam * z).cos() * (x.sin() + (2.0 * y).cos())
        });
        let want = f.scale(-lam * lam);
        Ok(f.deriv_z().deriv_z().sub(&want).max_abs())
    });

    SuiteReport { suite: "field", checks }
}

fn thermo_suite() -> SuiteReport {
    let mut checks = Vec::new();
    let law = law();

    check(&mut checks, "potential pinned values", 1e-14, || {
        let h2 = law.pressure_potential(2.0)?;
        let h1 = law.pressure_potential(1.0)?;
        Ok((h2 - 2.0).abs().max(h1.abs()))
    });

    check(&mut checks, "curvature at reference", 1e-14, || {
        Ok((law.potential_curvature(1.0)? - law.sound_speed_sq()).abs())
    });

    check(&mut checks, "entropy gap nonnegative", 0.0, || {
        let mut worst: f64 = 0.0;
        for i in 1..40 {
            for j in 1..40 {
                let rho = 0.1 * i as f64;
                let r = 0.1 * j as f64;
                let g = law.rel_entropy(rho, r)?;
                worst = worst.min(g);
            }
        }
        Ok(-worst)
    });

    check(&mut checks, "cutoff plateau and support", 1e-14, || {
        let k = CutoffKappa::default();
        let inside = (k.eval(1.0 + k.inner()) - 1.0).abs().max((k.eval(1.0 - k.inner()) - 1.0).abs());
        let outside = k.eval(1.0 + k.outer()).abs().max(k.eval(1.0 - k.outer()).abs());
        let mid = k.eval(1.0 + 0.5 * (k.inner() + k.outer()));
        let interior = if mid > 0.0 && mid < 1.0 { 0.0 } else { 1.0 };
        Ok(inside.max(outside).max(interior))
    });

    SuiteReport { suite: "thermo", checks }
}

fn acoustic_sample(g: Torus2) -> AcousticState {
    let psi = synth::random_band_limited(g, 6, 1.0, 7);
    let pot = synth::random_band_limited(g, 6, 0.7, 8);
    AcousticState::from_potentials(&psi, &pot, 0.0).expect("valid state")
}

fn acoustics_suite() -> SuiteReport {
    let mut checks = Vec::new();
    let g = torus(32);
    let a = law().sound_speed();
    let eps = 0.25;

    check(&mut checks, "single mode full period", 1e-12, || {
        let psi = ScalarField2::from_fn(g, |x, _| x.cos());
        let pot = ScalarField2::from_fn(g, |x, _| 0.3 * x.sin());
        let state = AcousticState::from_potentials(&psi, &pot, 0.0)?;
        let period = 2.0 * PI * eps / a;
        let back = propagate_exact(&state, period, eps, a)?;
        let d_psi = back.psi().sub(&state.psi()).max_abs();
        let d_pot = back.grad_potential().sub(&state.grad_potential()).max_abs();
        Ok(d_psi.max(d_pot))
    });

    check(&mut checks, "energy conservation", 1e-12, || {
        let state = acoustic_sample(g);
        let e0 = state.energy(a);
        let moved = propagate_exact(&state, 0.731, eps, a)?;
        Ok((moved.energy(a) - e0).abs() / e0)
    });

    check(&mut checks, "zero forcing matches exact", 1e-11, || {
        let state = acoustic_sample(g);
        let dt = 0.005;
        let steps = 20;
        let times: Vec<f64> = (0..=steps).map(|i| dt * i as f64).collect();
        let zeros_s: Vec<ScalarField2> = times.iter().map(|_| ScalarField2::zeros(g)).collect();
        let zeros_v: Vec<VectorField2> = times.iter().map(|_| VectorField2::zeros(g)).collect();
        let forcing = AcousticForcing::new(times.clone(), zeros_s, zeros_v)?;
        let end = *times.last().unwrap();
        let path = propagate_duhamel(&state, &forcing, eps, a, end, dt)?;
        let exact = propagate_exact(&state, end, eps, a)?;
        let last = path.last().unwrap();
        let d_psi = last.psi().sub(&exact.psi()).max_abs();
        let d_pot = last.grad_potential().sub(&exact.grad_potential()).max_abs();
        Ok(d_psi.max(d_pot))
    });

    SuiteReport { suite: "acoustics", checks }
}

fn limit2d_suite() -> SuiteReport {
    let mut checks = Vec::new();
    let g = torus(48);

    check(&mut checks, "decaying vortex sheet", 1e-8, || {
        let mu = 0.05;
        let u0 = VectorField2::from_fns(g, |x, y| x.sin() * y.cos(), |x, y| -(x.cos()) * y.sin());
        let mut state = LimitState2::new(u0.clone(), 0.0)?;
        let dt = 0.02;
        for _ in 0..15 {
            state = ns2d_step(&state, dt, mu)?;
        }
        let decay = (-2.0 * mu * state.time()).exp();
        Ok(state.velocity().sub(&u0.scale(decay)).max_abs())
    });

    check(&mut checks, "stationary eigenvortex", 1e-8, || {
        let stream = ScalarField2::from_fn(g, |x, y| x.cos() * y.cos());
        let u0 = synth::rotational_from_stream(&stream);
        let mut state = LimitState2::new(u0.clone(), 0.0)?;
        for _ in 0..50 {
            state = euler2d_step(&state, 0.01)?;
        }
        Ok(state.velocity().sub(&u0).max_abs())
    });

    check(&mut checks, "inviscid invariants", 1e-8, || {
        let u0 = synth::random_solenoidal(g, 4, 0.8, 11);
        let mut state = LimitState2::new(u0, 0.0)?;
        let e0 = state.kinetic_energy();
        let z0 = state.enstrophy();
        for _ in 0..100 {
            state = euler2d_step(&state, 0.005)?;
        }
        let de = (state.kinetic_energy() - e0).abs() / e0;
        let dz = (state.enstrophy() - z0).abs() / z0;
        Ok(de.max(dz))
    });

    SuiteReport { suite: "limit2d", checks }
}

fn cns3d_suite() -> SuiteReport {
    let mut checks = Vec::new();
    let grid = slab(16, 2);
    let params = Params::new(0.25, grid.thickness(), 0.05, law()).expect("valid params");

    check(&mut checks, "rest state is steady", 1e-13, || {
        let rho = ScalarField3::zeros(grid, Parity::Even).map(|_| 1.0);
        let m = VectorField3::zeros(grid);
        let state = FluidState3::new(rho, m, 0.0)?;
        let next = cns3d::step(&state, 1e-3, &params)?;
        let d_rho = next.rho().map(|v| v - 1.0).max_abs();
        Ok(d_rho.max(next.momentum().max_abs()))
    });

    check(&mut checks, "mass conservation", 1e-12, || {
        let data = synth::benchmark_data(grid, &synth::BenchmarkParams::default())?;
        let (mut state, _) = cns3d::init_illprepared(&data, &params)?;
        let m0 = state.rho().slab_integral();
        let dt = 0.5 * cns3d::cfl_limit(&state, &params);
        for _ in 0..10 {
            state = cns3d::step(&state, dt, &params)?;
        }
        Ok((state.rho().slab_integral() - m0).abs() / m0)
    });

    check(&mut checks, "planar data stay planar", 1e-10, || {
        let data = synth::benchmark_data(grid, &synth::BenchmarkParams::default())?;
        let (mut state, _) = cns3d::init_illprepared(&data, &params)?;
        let dt = 0.5 * cns3d::cfl_limit(&state, &params);
        for _ in 0..10 {
            state = cns3d::step(&state, dt, &params)?;
        }
        let dz = state
            .rho()
            .deriv_z()
            .max_abs()
            .max(state.momentum().x().deriv_z().max_abs())
            .max(state.momentum().y().deriv_z().max_abs())
            .max(state.momentum().z().max_abs());
        Ok(dz)
    });

    check(&mut checks, "planar restriction agrees", 1e-8, || {
        let data = synth::benchmark_data(grid, &synth::BenchmarkParams::default())?;
        let (mut state, _) = cns3d::init_illprepared(&data, &params)?;
        let mut flat = FluidState2::new(
            state.rho().vertical_average(),
            state.momentum().x().vertical_average(),
            state.momentum().y().vertical_average(),
            0.0,
        )?;
        let dt = 0.5 * cns3d::cfl_limit(&state, &params);
        for _ in 0..10 {
            state = cns3d::step(&state, dt, &params)?;
            flat = cns3d::step2(&flat, dt, &params)?;
        }
        let d_rho = state.rho().vertical_average().sub(&flat.rho).max_abs();
        let d_mx = state.momentum().x().vertical_average().sub(&flat.mx).max_abs();
        let d_my = state.momentum().y().vertical_average().sub(&flat.my).max_abs();
        Ok(d_rho.max(d_mx).max(d_my))
    });

    check(&mut checks, "energy balance", 1e-3, || {
        let grid = slab(32, 1);
        let params = Params::new(0.25, grid.thickness(), 0.05, law()).expect("valid params");
        let data = synth::benchmark_data(grid, &synth::BenchmarkParams::default())?;
        let (mut state, _) = cns3d::init_illprepared(&data, &params)?;
        let dt = 0.4 * cns3d::cfl_limit(&state, &params);
        let mut times = vec![0.0];
        let mut energy = vec![cns3d::energy_total(&state, &params)];
        let mut diss = vec![cns3d::dissipation(&state, &params)];
        for _ in 0..40 {
            state = cns3d::step(&state, dt, &params)?;
            times.push(state.time());
            energy.push(cns3d::energy_total(&state, &params));
            diss.push(cns3d::dissipation(&state, &params));
        }
        let zeros = vec![0.0; times.len()];
        let audit = audit_energy_inequality(&times, &energy, &diss, &zeros)?;
        let defect = audit.margins.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        Ok(defect / energy[0])
    });

    SuiteReport { suite: "cns3d", checks }
}

fn diagnostics_suite() -> SuiteReport {
    let mut checks = Vec::new();

    check(&mut checks, "vertical mean gap ratio", 1e-10, || {
        let grid = SlabGrid::new(torus(8), 1.0, 2).expect("valid slab");
        let lam = PI / grid.thickness();
        let u = VectorField3::new(
            ScalarField3::from_fn(grid, Parity::Even, move |_, _, z| (lam * z).cos()),
            ScalarField3::zeros(grid, Parity::Even),
            ScalarField3::zeros(grid, Parity::Odd),
        )?;
        let (dev, bound) = vertical_poincare(&u);
        Ok((dev / bound - 1.0 / (PI * PI)).abs())
    });

    check(&mut checks, "power law recovery", 1e-12, || {
        let samples: Vec<(f64, f64)> = [0.25f64, 0.125, 0.0625, 0.03125]
            .iter()
            .map(|&e| (e, 3.2 * e.powf(1.7)))
            .collect();
        let fit = fit_rate(&samples)?;
        Ok((fit.slope - 1.7).abs().max(fit.rms_residual))
    });

    check(&mut checks, "distance vanishes only at the pair", 1e-13, || {
        let grid = slab(12, 2);
        let params = Params::new(0.2, grid.thickness(), 0.03, law()).expect("valid params");
        let rho = ScalarField3::zeros(grid, Parity::Even).map(|_| 1.0);
        let rest = FluidState3::new(rho, VectorField3::zeros(grid), 0.0)?;
        let r = ScalarField2::zeros(grid.horizontal()).offset(1.0);
        let big_u = VectorField3::zeros(grid);
        let at_pair = relative_energy(&rest, &r, &big_u, &params)?;

        let shifted = r.offset(0.1);
        let away = relative_energy(&rest, &shifted, &big_u, &params)?;
        let l = grid.horizontal().length();
        let expect = l * l * 0.01 / (params.eps() * params.eps());
        Ok(at_pair.abs().max((away - expect).abs() / expect))
    });

    check(&mut checks, "production vanishes at rest", 1e-13, || {
        let grid = slab(12, 2);
        let params = Params::new(0.2, grid.thickness(), 0.03, law()).expect("valid params");
        let rho = ScalarField3::zeros(grid, Parity::Even).map(|_| 1.0);
        let rest = FluidState3::new(rho, VectorField3::zeros(grid), 0.0)?;
        let r = ScalarField2::zeros(grid.horizontal()).offset(1.0);
        let big_u = VectorField3::zeros(grid);
        let rate = VectorField3::zeros(grid);
        let slope_rate = ScalarField2::zeros(grid.horizontal());
        Ok(remainder(&rest, &r, &big_u, &rate, &slope_rate, &params)?.abs())
    });

    SuiteReport { suite: "diagnostics", checks }
}
