//! End-to-end acceptance battery.  Each test prints one verdict line, so a
//! filtered run gives a quick scoreboard:
//!
//!     cargo test --test acceptance -- --nocapture
//!
//! Tolerances are pinned here and nowhere else.

use std::f64::consts::PI;

use slabflow::acoustics::{propagate_exact, AcousticState};
use slabflow::cns3d::{self, FluidState2, FluidState3, Params};
use slabflow::diagnostics::{
    audit_energy_inequality, fit_rate, relative_energy, remainder, vertical_poincare,
};
use slabflow::field2::{helmholtz_split, ScalarField2, VectorField2};
use slabflow::field3::{ScalarField3, VectorField3};
use slabflow::grid::{Parity, SlabGrid, Torus2};
use slabflow::limit2d::{self, LimitState2};
use slabflow::synth::{self, BenchmarkParams};
use slabflow::thermo::GasLaw;

use slabflow_cli::config::{ExperimentConfig, Family, Regime};
use slabflow_cli::runner::{run_acoustics, run_sweep};

const TOL_ACOUSTIC_ENERGY_DRIFT: f64 = 1e-12;
const TOL_SCALING_IDENTITY: f64 = 1e-3;
const TOL_SCALING_SLOPE: f64 = 0.03;
const TOL_HELMHOLTZ: f64 = 1e-10;
const TOL_TAYLOR_GREEN: f64 = 1e-6;
const TOL_EIGENVORTEX: f64 = 1e-8;
const TOL_EULER_INVARIANTS: f64 = 1e-8;
const TOL_MASS_DRIFT: f64 = 1e-12;
const TOL_ENERGY_BALANCE: f64 = 1e-4;
const TOL_RK4_ORDER: f64 = 0.3;
const TOL_PLANAR: f64 = 1e-8;
const MIN_INVISCID_SLOPE: f64 = 0.075;
const MIN_RESIDUAL_MASS_SLOPE: f64 = 1.7;
const TOL_POINCARE_RATIO: f64 = 1e-10;
const TOL_QUADRATURE: f64 = 1e-8;

fn verdict(index: usize, name: &str, pass: bool, detail: &str) {
    println!("acceptance {index:02} {name}: {} ({detail})", if pass { "pass" } else { "fail" });
    assert!(pass, "acceptance {index:02} {name} failed: {detail}");
}

fn law() -> GasLaw {
    GasLaw::new(1.0, 2.0).unwrap()
}

#[test]
fn a01_acoustic_energy_is_conserved() {
    let grid = Torus2::new(2.0 * PI, 256).unwrap();
    let bump = synth::gaussian_bump(grid, (PI, PI), 0.4, 1.0);
    let psi = bump.offset(-bump.mean());
    let pot = synth::gaussian_bump(grid, (1.2 * PI, 0.8 * PI), 0.5, 0.7);
    let wave = AcousticState::from_potentials(&psi, &pot, 0.0).unwrap();

    let a = law().sound_speed();
    let eps = 1.0 / 16.0;
    let e0 = wave.energy(a);
    let moved = propagate_exact(&wave, 1.0, eps, a).unwrap();
    let drift = (moved.energy(a) - e0).abs() / e0;
    verdict(
        1,
        "acoustic energy conservation",
        drift <= TOL_ACOUSTIC_ENERGY_DRIFT,
        &format!("relative drift {drift:.3e} over unit time at eps {eps}"),
    );
}

#[test]
fn a02_wave_norms_scale_with_the_mach_number() {
    let cfg = ExperimentConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let report = run_acoustics(&cfg, dir.path()).unwrap();

    let slope_gap = (report.fitted_slope - report.expected_slope).abs();
    let pass = report.worst_identity_error <= TOL_SCALING_IDENTITY && slope_gap <= TOL_SCALING_SLOPE;
    verdict(
        2,
        "mixed-norm Mach scaling",
        pass,
        &format!(
            "identity error {:.3e}, slope {:.4} vs {:.4} at p = {}",
            report.worst_identity_error, report.fitted_slope, report.expected_slope, report.p
        ),
    );
}

#[test]
fn a03_helmholtz_split_is_a_projection_pair() {
    let grid = Torus2::new(2.0 * PI, 32).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let band = 1 + (i as usize) % 10;
        let v = VectorField2::new(
            synth::random_band_limited(grid, band, 1.0, 2 * i),
            synth::random_band_limited(grid, band, 1.0, 2 * i + 1),
        )
        .unwrap();
        let scale = v.max_abs().max(1.0);
        let (sol, grad) = helmholtz_split(&v);

        let mut defect = sol.add(&grad).sub(&v).max_abs() / scale;
        defect = defect.max(sol.div_h().max_abs() / scale);
        defect = defect.max(grad.curl_h().max_abs() / scale);
        let (s2, g2) = helmholtz_split(&grad);
        defect = defect.max(s2.max_abs() / scale);
        defect = defect.max(g2.sub(&grad).max_abs() / scale);
        let (s3, g3) = helmholtz_split(&sol);
        defect = defect.max(g3.max_abs() / scale);
        defect = defect.max(s3.sub(&sol).max_abs() / scale);
        worst = worst.max(defect);
    }
    verdict(
        3,
        "velocity splitting",
        worst <= TOL_HELMHOLTZ,
        &format!("worst relative defect {worst:.3e} over 100 random fields"),
    );
}

#[test]
fn a04_planar_reference_solvers_hit_known_solutions() {
    let grid = Torus2::new(2.0 * PI, 64).unwrap();

    // decaying vortex array with a closed-form viscous envelope
    let u0 = VectorField2::from_fns(grid, |x, y| x.sin() * y.cos(), |x, y| -(x.cos() * y.sin()));
    let mut state = LimitState2::new(u0.clone(), 0.0).unwrap();
    let viscosity = 0.05;
    let dt = 1.0 / 64.0;
    for _ in 0..64 {
        state = limit2d::ns2d_step(&state, dt, viscosity).unwrap();
    }
    let decay = (-2.0 * viscosity * 1.0f64).exp();
    let tg_err = state.velocity().sub(&u0.scale(decay)).max_abs();

    // a Laplacian eigenstream is a steady ideal flow
    let v0 = VectorField2::from_fns(
        grid,
        |x, y| x.cos() * y.sin(),
        |x, y| -(x.sin() * y.cos()),
    );
    let mut steady = LimitState2::new(v0.clone(), 0.0).unwrap();
    for _ in 0..100 {
        steady = limit2d::euler2d_step(&steady, 0.01).unwrap();
    }
    let vortex_err = steady.velocity().sub(&v0).max_abs();

    // ideal invariants on generic data
    let w0 = synth::random_solenoidal(grid, 4, 0.5, 2024);
    let mut ideal = LimitState2::new(w0, 0.0).unwrap();
    let (e0, z0) = (ideal.kinetic_energy(), ideal.enstrophy());
    let dt = 1.0 / 512.0;
    for _ in 0..512 {
        ideal = limit2d::euler2d_step(&ideal, dt).unwrap();
    }
    let e_drift = (ideal.kinetic_energy() - e0).abs() / e0;
    let z_drift = (ideal.enstrophy() - z0).abs() / z0;

    let pass = tg_err <= TOL_TAYLOR_GREEN
        && vortex_err <= TOL_EIGENVORTEX
        && e_drift <= TOL_EULER_INVARIANTS
        && z_drift <= TOL_EULER_INVARIANTS;
    verdict(
        4,
        "planar reference solvers",
        pass,
        &format!(
            "viscous envelope {tg_err:.3e}, steady vortex {vortex_err:.3e}, \
energy/enstrophy drift {e_drift:.3e}/{z_drift:.3e}"
        ),
    );
}

#[test]
fn a05_slab_solver_conserves_and_converges() {
    // conservation and the energy balance on a genuinely three-dimensional run
    let grid = SlabGrid::new(Torus2::new(2.0 * PI, 64).unwrap(), 0.5, 8).unwrap();
    let params = Params::new(0.125, 0.5, 0.05, law()).unwrap();
    let data = synth::benchmark_data(
        grid,
        &BenchmarkParams { vertical_amp: 0.4, ..BenchmarkParams::default() },
    )
    .unwrap();
    let (mut state, _) = cns3d::init_illprepared(&data, &params).unwrap();

    let vertical_limit = 0.9 * cns3d::vertical_stability_limit(&grid, &params);
    let mass0 = state.rho().slab_integral();
    let mut times = vec![0.0];
    let mut energy = vec![cns3d::energy_total(&state, &params)];
    let mut diss = vec![cns3d::dissipation(&state, &params)];
    while state.time() < 0.2 {
        let dt = 0.7 * cns3d::cfl_limit(&state, &params).min(vertical_limit);
        state = cns3d::step(&state, dt, &params).unwrap();
        times.push(state.time());
        energy.push(cns3d::energy_total(&state, &params));
        diss.push(cns3d::dissipation(&state, &params));
    }
    let mass_drift = (state.rho().slab_integral() - mass0).abs() / mass0;

    let zeros = vec![0.0; times.len()];
    let audit = audit_energy_inequality(&times, &energy, &diss, &zeros).unwrap();
    let balance = audit.margins.iter().fold(0.0f64, |m, &x| m.max(x.abs())) / energy[0];

    // step refinement against a fine reference on a smaller grid
    let grid = SlabGrid::new(Torus2::new(2.0 * PI, 32).unwrap(), 0.5, 2).unwrap();
    let params = Params::new(0.25, 0.5, 0.05, law()).unwrap();
    let data = synth::benchmark_data(
        grid,
        &BenchmarkParams { vertical_amp: 0.4, ..BenchmarkParams::default() },
    )
    .unwrap();
    let (state0, _) = cns3d::init_illprepared(&data, &params).unwrap();
    let horizon = 0.02;
    let advance = |steps: usize| {
        let mut s = state0.clone();
        let dt = horizon / steps as f64;
        for _ in 0..steps {
            s = cns3d::step(&s, dt, &params).unwrap();
        }
        s
    };
    let reference = advance(256);
    let gap = |s: &FluidState3| {
        s.rho()
            .sub(reference.rho())
            .max_abs()
            .max(s.momentum().sub(reference.momentum()).max_abs())
    };
    let samples: Vec<(f64, f64)> = [8usize, 16, 32]
        .iter()
        .map(|&n| (horizon / n as f64, gap(&advance(n))))
        .collect();
    let order = fit_rate(&samples).unwrap().slope;

    let pass = mass_drift <= TOL_MASS_DRIFT
        && balance <= TOL_ENERGY_BALANCE
        && (order - 4.0).abs() <= TOL_RK4_ORDER;
    verdict(
        5,
        "slab solver conservation and order",
        pass,
        &format!(
            "mass drift {mass_drift:.3e}, energy balance {balance:.3e}, step order {order:.2}"
        ),
    );
}

#[test]
fn a06_planar_data_reduce_to_the_2d_system() {
    let grid = SlabGrid::new(Torus2::new(2.0 * PI, 32).unwrap(), 0.5, 4).unwrap();
    let params = Params::new(0.25, 0.5, 0.05, law()).unwrap();
    let data = synth::benchmark_data(grid, &BenchmarkParams::default()).unwrap();
    let (mut state, _) = cns3d::init_illprepared(&data, &params).unwrap();
    let mut flat = FluidState2::new(
        state.rho().vertical_average(),
        state.momentum().x().vertical_average(),
        state.momentum().y().vertical_average(),
        0.0,
    )
    .unwrap();

    for _ in 0..60 {
        let dt = 0.5 * cns3d::cfl_limit(&state, &params);
        state = cns3d::step(&state, dt, &params).unwrap();
        flat = cns3d::step2(&flat, dt, &params).unwrap();
    }

    let lift = |f: &ScalarField2| ScalarField3::lift(grid, f).unwrap();
    let vertical = state
        .rho()
        .sub(&lift(&state.rho().vertical_average()))
        .max_abs()
        .max(state.momentum().x().sub(&lift(&state.momentum().x().vertical_average())).max_abs())
        .max(state.momentum().y().sub(&lift(&state.momentum().y().vertical_average())).max_abs())
        .max(state.momentum().z().max_abs());
    let planar_gap = state
        .rho()
        .vertical_average()
        .sub(&flat.rho)
        .max_abs()
        .max(state.momentum().x().vertical_average().sub(&flat.mx).max_abs())
        .max(state.momentum().y().vertical_average().sub(&flat.my).max_abs());

    let pass = vertical <= TOL_PLANAR && planar_gap <= TOL_PLANAR;
    verdict(
        6,
        "planar reduction",
        pass,
        &format!(
            "vertical content {vertical:.3e}, gap to the 2d march {planar_gap:.3e} at t = {:.3}",
            state.time()
        ),
    );
}

#[test]
fn a07_viscous_sweep_metrics_shrink_with_eps() {
    let cfg = ExperimentConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let sweep = run_sweep(&cfg, dir.path(), 2).unwrap();
    assert!(sweep.failures.is_empty(), "{:?}", sweep.failures);

    let runs = &sweep.summary.runs;
    let decreasing = |f: &dyn Fn(&slabflow_cli::runner::SweepRunRow) -> f64| {
        runs.windows(2).all(|w| f(&w[1]) < f(&w[0]))
    };
    let sol_ok = decreasing(&|r| r.sol_metric);
    let grad_ok = decreasing(&|r| r.grad_metric);
    let sol: Vec<String> = runs.iter().map(|r| format!("{:.3e}", r.sol_metric)).collect();
    let grad: Vec<String> = runs.iter().map(|r| format!("{:.3e}", r.grad_metric)).collect();
    verdict(
        7,
        "viscous regime convergence",
        sol_ok && grad_ok,
        &format!("sol metric [{}], gradient metric [{}]", sol.join(", "), grad.join(", ")),
    );
}

#[test]
fn a08_inviscid_sweep_converges_at_the_guaranteed_rate() {
    let mut cfg = ExperimentConfig::default();
    cfg.run.regime = Regime::Inviscid;
    let dir = tempfile::tempdir().unwrap();
    let sweep = run_sweep(&cfg, dir.path(), 2).unwrap();
    assert!(sweep.failures.is_empty(), "{:?}", sweep.failures);

    let runs = &sweep.summary.runs;
    let monotone = runs.windows(2).all(|w| w[1].sup_rel_energy < w[0].sup_rel_energy);
    let fit = &sweep.summary.fits["sup_rel_energy"];
    let alpha = sweep.summary.alpha;
    let pass = monotone && fit.slope >= MIN_INVISCID_SLOPE;
    let sups: Vec<String> = runs.iter().map(|r| format!("{:.3e}", r.sup_rel_energy)).collect();
    verdict(
        8,
        "inviscid regime convergence",
        pass,
        &format!(
            "sup distance [{}], slope {:.3} vs floor {MIN_INVISCID_SLOPE} (alpha {alpha:.3})",
            sups.join(", "),
            fit.slope
        ),
    );
}

#[test]
fn a09_residual_mass_decays_superlinearly() {
    let mut cfg = ExperimentConfig::default();
    cfg.data.family = Family::ResidualProbe;
    cfg.grid.modes = 32;
    cfg.run.final_time = 0.1;
    cfg.run.samples = 6;
    let dir = tempfile::tempdir().unwrap();
    let sweep = run_sweep(&cfg, dir.path(), 2).unwrap();
    assert!(sweep.failures.is_empty(), "{:?}", sweep.failures);

    let fit = &sweep.summary.fits["rho_res_mass_sup"];
    verdict(
        9,
        "residual density mass decay",
        fit.slope >= MIN_RESIDUAL_MASS_SLOPE,
        &format!("slope {:.3} vs floor {MIN_RESIDUAL_MASS_SLOPE}", fit.slope),
    );
}

#[test]
fn a10_vertical_poincare_bound_holds() {
    // analytic single-profile ratio
    let grid = SlabGrid::new(Torus2::new(2.0 * PI, 16).unwrap(), 1.0, 2).unwrap();
    let base = ScalarField2::from_fn(grid.horizontal(), |x, y| (x.sin() + 0.5 * y.cos()) * 0.7);
    let profile = ScalarField3::from_fn(grid, Parity::Even, |_, _, z| (PI * z).cos());
    let ux = ScalarField3::lift(grid, &base).unwrap().mul(&profile);
    let u = VectorField3::new(
        ux,
        ScalarField3::zeros(grid, Parity::Even),
        ScalarField3::zeros(grid, Parity::Odd),
    )
    .unwrap();
    let (dev, bound) = vertical_poincare(&u);
    let ratio_err = (PI * PI * dev / bound - 1.0).abs();

    // the bound on every sampled row of a three-dimensional sweep
    let mut cfg = ExperimentConfig::default();
    cfg.grid.modes = 32;
    cfg.grid.vertical_modes = 2;
    cfg.data.vertical_amp = 0.5;
    cfg.run.final_time = 0.1;
    cfg.run.samples = 6;
    cfg.eps.list = vec![0.25, 0.125, 0.0625];
    let dir = tempfile::tempdir().unwrap();
    let sweep = run_sweep(&cfg, dir.path(), 2).unwrap();
    assert!(sweep.failures.is_empty(), "{:?}", sweep.failures);

    let mut rows = 0usize;
    let mut worst_gap: f64 = f64::NEG_INFINITY;
    for run in &sweep.outcomes {
        let text = std::fs::read_to_string(&run.csv).unwrap();
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let dev: f64 = cols[17].parse().unwrap();
            let bound: f64 = cols[18].parse().unwrap();
            assert!(dev > 0.0 && bound > 0.0, "sweep rows carry no vertical content");
            worst_gap = worst_gap.max(dev - bound);
            rows += 1;
        }
    }

    let pass = ratio_err <= TOL_POINCARE_RATIO && worst_gap <= 0.0;
    verdict(
        10,
        "vertical mean-gap bound",
        pass,
        &format!("analytic ratio error {ratio_err:.3e}, worst margin {worst_gap:.3e} over {rows} rows"),
    );
}

// closed-form comparison data for the quadrature cross-check
struct Manufactured {
    delta: f64,
    coefficient: f64,
    a: [f64; 3],
    b: [f64; 4],
    c1: f64,
    d: [f64; 2],
    e: [f64; 2],
    f: [f64; 4],
    g: [f64; 2],
}

impl Manufactured {
    fn lam(&self, m: f64) -> f64 {
        m * PI / self.delta
    }
    fn rho(&self, x: f64, y: f64, z: f64) -> f64 {
        1.0 + self.a[0] * x.cos() * y.cos() * (self.lam(1.0) * z).cos()
            + self.a[1] * (2.0 * x).cos() * (self.lam(2.0) * z).cos()
            + self.a[2] * y.cos()
    }
    fn ux(&self, x: f64, y: f64, z: f64) -> f64 {
        self.b[0] * y.cos() + self.b[1] * x.cos() * (self.lam(1.0) * z).cos()
    }
    fn uy(&self, x: f64, y: f64, z: f64) -> f64 {
        self.b[2] * x.sin() + self.b[3] * y.cos() * (self.lam(2.0) * z).cos()
    }
    fn uz(&self, x: f64, _y: f64, z: f64) -> f64 {
        self.c1 * x.cos() * (self.lam(1.0) * z).sin()
    }
    fn r(&self, x: f64, y: f64) -> f64 {
        1.0 + self.d[0] * x.cos() * y.cos() + self.d[1] * (2.0 * y).cos()
    }
    fn r_rate(&self, x: f64, y: f64) -> f64 {
        self.e[0] * x.sin() + self.e[1] * y.cos()
    }
    fn big_u(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.f[0] * y.cos() + self.f[1] * x.sin(),
            self.f[2] * x.cos() + self.f[3] * y.sin(),
        )
    }
    fn big_u_rate(&self, x: f64, y: f64) -> (f64, f64) {
        (self.g[0] * y.sin(), self.g[1] * x.cos())
    }

    // all first partials, hand differentiated
    fn grad_u(&self, x: f64, y: f64, z: f64) -> [[f64; 3]; 3] {
        let (l1, l2) = (self.lam(1.0), self.lam(2.0));
        [
            [
                -self.b[1] * x.sin() * (l1 * z).cos(),
                -self.b[0] * y.sin(),
                -self.b[1] * l1 * x.cos() * (l1 * z).sin(),
            ],
            [
                self.b[2] * x.cos(),
                -self.b[3] * y.sin() * (l2 * z).cos(),
                -self.b[3] * l2 * y.cos() * (l2 * z).sin(),
            ],
            [
                -self.c1 * x.sin() * (l1 * z).sin(),
                0.0,
                self.c1 * l1 * x.cos() * (l1 * z).cos(),
            ],
        ]
    }
    fn grad_big_u(&self, x: f64, y: f64) -> [[f64; 3]; 3] {
        [
            [self.f[1] * x.cos(), -self.f[0] * y.sin(), 0.0],
            [-self.f[2] * x.sin(), self.f[3] * y.cos(), 0.0],
            [0.0, 0.0, 0.0],
        ]
    }
    fn grad_r(&self, x: f64, y: f64) -> (f64, f64) {
        (
            -self.d[0] * x.sin() * y.cos(),
            -self.d[0] * x.cos() * y.sin() - 2.0 * self.d[1] * (2.0 * y).sin(),
        )
    }
}

fn quadrature(delta: f64, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
    // midpoint rule in all directions; exact for the trigonometric
    // integrands below, and (1/delta) normalized like the field integrals
    let n = 64;
    let l = 2.0 * PI;
    let mut sum = 0.0;
    for i in 0..n {
        let x = l * (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let y = l * (j as f64 + 0.5) / n as f64;
            for q in 0..n {
                let z = delta * (q as f64 + 0.5) / n as f64;
                sum += f(x, y, z);
            }
        }
    }
    sum * l * l / (n * n * n) as f64
}

#[test]
fn a11_distance_and_production_match_independent_quadrature() {
    let mut seed: u64 = 0x00c0_ffee;
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((seed >> 33) as f64 / (1u64 << 31) as f64) - 1.0
    };

    let eps = 0.3;
    let mu = 0.03;
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let delta = if case % 2 == 0 { 0.5 } else { 0.8 };
        let coefficient = if case % 3 == 0 { 1.7 } else { 1.0 };
        let m = Manufactured {
            delta,
            coefficient,
            a: [0.08 * next(), 0.08 * next(), 0.08 * next()],
            b: [0.5 * next(), 0.5 * next(), 0.5 * next(), 0.5 * next()],
            c1: 0.4 * next(),
            d: [0.08 * next(), 0.08 * next()],
            e: [0.5 * next(), 0.5 * next()],
            f: [0.5 * next(), 0.5 * next(), 0.5 * next(), 0.5 * next()],
            g: [0.5 * next(), 0.5 * next()],
        };
        let law = GasLaw::new(coefficient, 2.0).unwrap();
        let params = Params::new(eps, delta, mu, law).unwrap();
        let grid = SlabGrid::new(Torus2::new(2.0 * PI, 24).unwrap(), delta, 4).unwrap();

        let rho = ScalarField3::from_fn(grid, Parity::Even, |x, y, z| m.rho(x, y, z));
        let ux = ScalarField3::from_fn(grid, Parity::Even, |x, y, z| m.ux(x, y, z));
        let uy = ScalarField3::from_fn(grid, Parity::Even, |x, y, z| m.uy(x, y, z));
        let uz = ScalarField3::from_fn(grid, Parity::Odd, |x, y, z| m.uz(x, y, z));
        let momentum =
            VectorField3::new(rho.mul(&ux), rho.mul(&uy), rho.mul(&uz)).unwrap();
        let state = FluidState3::new(rho, momentum, 0.0).unwrap();

        let r2 = ScalarField2::from_fn(grid.horizontal(), |x, y| m.r(x, y));
        let planar = VectorField2::from_fns(
            grid.horizontal(),
            |x, y| m.big_u(x, y).0,
            |x, y| m.big_u(x, y).1,
        );
        let big_u = VectorField3::lift(grid, &planar).unwrap();
        let planar_rate = VectorField2::from_fns(
            grid.horizontal(),
            |x, y| m.big_u_rate(x, y).0,
            |x, y| m.big_u_rate(x, y).1,
        );
        let big_u_rate = VectorField3::lift(grid, &planar_rate).unwrap();
        // gamma = 2 keeps the potential curvature constant at 2 A
        let slope_rate =
            ScalarField2::from_fn(grid.horizontal(), |x, y| 2.0 * coefficient * m.r_rate(x, y));

        let energy = relative_energy(&state, &r2, &big_u, &params).unwrap();
        let production =
            remainder(&state, &r2, &big_u, &big_u_rate, &slope_rate, &params).unwrap();

        let a2 = m.coefficient;
        let oracle_energy = quadrature(delta, |x, y, z| {
            let rho = m.rho(x, y, z);
            let (u1, u2) = m.big_u(x, y);
            let dx = m.ux(x, y, z) - u1;
            let dy = m.uy(x, y, z) - u2;
            let dz = m.uz(x, y, z);
            let gap = m.rho(x, y, z) - m.r(x, y);
            0.5 * rho * (dx * dx + dy * dy + dz * dz) + a2 * gap * gap / (eps * eps)
        });

        let oracle_production = quadrature(delta, |x, y, z| {
            let rho = m.rho(x, y, z);
            let u = [m.ux(x, y, z), m.uy(x, y, z), m.uz(x, y, z)];
            let (u1, u2) = m.big_u(x, y);
            let (ud1, ud2) = m.big_u_rate(x, y);
            let gu = m.grad_u(x, y, z);
            let gb = m.grad_big_u(x, y);

            let acc1 = ud1 + u[0] * gb[0][0] + u[1] * gb[0][1] + u[2] * gb[0][2];
            let acc2 = ud2 + u[0] * gb[1][0] + u[1] * gb[1][1] + u[2] * gb[1][2];
            let term1 = rho * (acc1 * (u1 - u[0]) + acc2 * (u2 - u[1]));

            let div_b = gb[0][0] + gb[1][1] + gb[2][2];
            let mut term2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = gb[i][j] + gb[j][i];
                    if i == j {
                        s -= 2.0 / 3.0 * div_b;
                    }
                    term2 += s * (gb[i][j] - gu[i][j]);
                }
            }
            term2 *= mu;

            let (rx, ry) = m.grad_r(x, y);
            let drift = (rho - m.r(x, y)) * 2.0 * a2 * m.r_rate(x, y);
            let compress = a2 * rho * rho * div_b;
            let transport = rho * 2.0 * a2 * (u[0] * rx + u[1] * ry);
            term1 + term2 + (drift - compress - transport) / (eps * eps)
        });

        let gap_e = (energy - oracle_energy).abs() / oracle_energy.abs().max(1e-12);
        let gap_r = (production - oracle_production).abs()
            / oracle_production.abs().max(1e-12);
        worst = worst.max(gap_e).max(gap_r);
    }
    verdict(
        11,
        "distance and production quadrature",
        worst <= TOL_QUADRATURE,
        &format!("worst relative gap {worst:.3e} over 20 manufactured states"),
    );
}
