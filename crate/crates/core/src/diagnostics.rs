//! Observables of slab runs: vertical averages, weak residuals of the
//! averaged horizontal system, uniform bounds, the relative energy with its
//! remainder, flatness across the slab, and convergence metrics against a
//! planar reference flow.

use crate::acoustics::AcousticState;
use crate::cns3d::{self, FluidState3, Params};
use crate::error::{Error, Result};
use crate::field2::{helmholtz_split, ScalarField2, VectorField2};
use crate::field3::{ScalarField3, VectorField3};
use crate::grid::{Parity, SlabGrid};
use crate::limit2d::{velocity_tendency, LimitState2};
use crate::norms::{norm_l2_window_vector, norm_lp, norm_sobolev, Exponent};
use crate::thermo::{ess_res_split, CutoffKappa};

/// Vertically averaged horizontal momentum and the scaled density
/// deviation r = (avg(rho) - 1) / eps.
#[derive(Debug, Clone)]
pub struct AveragedMomentum {
    pub m_bar: VectorField2,
    pub r: ScalarField2,
}

pub fn averaged_fields(state: &FluidState3, eps: f64) -> Result<AveragedMomentum> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let m = state.momentum();
    let m_bar = VectorField2::new(m.x().vertical_average(), m.y().vertical_average())?;
    let r = state.rho().vertical_average().map(|v| (v - 1.0) / eps);
    Ok(AveragedMomentum { m_bar, r })
}

/// Symmetric 2x2 flux closing the averaged momentum balance: the averaged
/// Reynolds stress, minus the viscous stress of the averaged velocity, plus
/// the quadratic pressure remainder on the diagonal.
#[derive(Debug, Clone)]
pub struct AveragedFlux {
    pub xx: ScalarField2,
    pub xy: ScalarField2,
    pub yy: ScalarField2,
}

pub fn averaged_flux(state: &FluidState3, params: &Params) -> Result<AveragedFlux> {
    let u = state.velocity();
    let m = state.momentum();
    let rxx = m.x().mul(u.x()).vertical_average();
    let rxy = m.x().mul(u.y()).vertical_average();
    let ryy = m.y().mul(u.y()).vertical_average();

    let ux = u.x().vertical_average().to_spectral();
    let uy = u.y().vertical_average().to_spectral();
    let dxx = ux.derivative(1, 0).to_physical();
    let dxy = ux.derivative(0, 1).to_physical();
    let dyx = uy.derivative(1, 0).to_physical();
    let dyy = uy.derivative(0, 1).to_physical();
    let div = dxx.add(&dyy);
    let mu = params.mu();
    let sxx = dxx.scale(2.0).sub(&div.scale(2.0 / 3.0)).scale(mu);
    let sxy = dxy.add(&dyx).scale(mu);
    let syy = dyy.scale(2.0).sub(&div.scale(2.0 / 3.0)).scale(mu);

    let law = *params.law();
    let p_avg = state.rho().map(|v| law.pressure(v)).vertical_average();
    let rho_avg = state.rho().vertical_average();
    let a_sq = law.sound_speed_sq();
    let p_ref = law.pressure(1.0);
    let eps = params.eps();
    let press = p_avg
        .zip_with(&rho_avg, |p, r| p - a_sq * (r - 1.0) - p_ref)
        .scale(1.0 / (eps * eps));

    Ok(AveragedFlux {
        xx: rxx.sub(&sxx).add(&press),
        xy: rxy.sub(&sxy),
        yy: ryy.sub(&syy).add(&press),
    })
}

/// Time samples of a scalar test function and its time derivative, on the
/// same time grid as the trajectory under test.  The final sample must
/// vanish.
#[derive(Debug, Clone)]
pub struct ScalarTest {
    pub values: Vec<ScalarField2>,
    pub rates: Vec<ScalarField2>,
}

#[derive(Debug, Clone)]
pub struct VectorTest {
    pub values: Vec<VectorField2>,
    pub rates: Vec<VectorField2>,
}

/// Signed weak-form residuals of the averaged system, with the summed
/// magnitude of their contributions for relative comparison.  `seam_flag`
/// is raised when a test function is not negligible on the x = 0 or y = 0
/// grid lines, i.e. its support wraps the torus seam.
#[derive(Debug, Clone, Copy)]
pub struct WeakResidual {
    pub continuity: f64,
    pub momentum: f64,
    pub continuity_scale: f64,
    pub momentum_scale: f64,
    pub seam_flag: bool,
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (times[i + 1] - times[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::invalid("need at least two time samples"));
    }
    for pair in times.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::invalid("time samples must be strictly increasing"));
        }
    }
    Ok(())
}

fn touches_seam(f: &ScalarField2, peak: f64) -> bool {
    if peak == 0.0 {
        return false;
    }
    let v = f.values();
    let n = v.nrows();
    let tol = 1e-8 * peak;
    (0..n).any(|i| v[[i, 0]].abs() > tol || v[[0, i]].abs() > tol)
}

pub fn averaged_system_residual(
    times: &[f64],
    states: &[FluidState3],
    params: &Params,
    scalar_test: &ScalarTest,
    vector_test: &VectorTest,
) -> Result<WeakResidual> {
    check_times(times)?;
    let n = times.len();
    if states.len() != n
        || scalar_test.values.len() != n
        || scalar_test.rates.len() != n
        || vector_test.values.len() != n
        || vector_test.rates.len() != n
    {
        return Err(Error::invalid("trajectory and test samples must share one time grid"));
    }
    let h = states[0].grid().horizontal();
    for s in states {
        s.grid().horizontal().same(&h)?;
    }
    for f in &scalar_test.values {
        f.grid().same(&h)?;
    }
    for f in &vector_test.values {
        f.grid().same(&h)?;
    }

    let scalar_peak = scalar_test.values.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    let vector_peak = vector_test.values.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    let last_tol = 1e-10;
    if scalar_test.values[n - 1].max_abs() > last_tol * scalar_peak.max(1.0)
        || vector_test.values[n - 1].max_abs() > last_tol * vector_peak.max(1.0)
    {
        return Err(Error::invalid("test functions must vanish at the final sample"));
    }
    let seam_flag = scalar_test.values.iter().any(|f| touches_seam(f, scalar_peak))
        || vector_test
            .values
            .iter()
            .any(|f| touches_seam(f.x(), vector_peak) || touches_seam(f.y(), vector_peak));

    let eps = params.eps();
    let a_sq = params.law().sound_speed_sq();
    let weights = trapezoid_weights(times);

    let mut continuity = 0.0;
    let mut continuity_scale = 0.0;
    let mut momentum = 0.0;
    let mut momentum_scale = 0.0;
    for i in 0..n {
        let avg = averaged_fields(&states[i], eps)?;
        let flux = averaged_flux(&states[i], params)?;

        let c_time = eps * avg.r.mul(&scalar_test.rates[i]).integral();
        let grad_phi = scalar_test.values[i].grad_h();
        let c_space = avg.m_bar.dot(&grad_phi).integral();
        continuity += weights[i] * (c_time + c_space);
        continuity_scale += weights[i] * (c_time.abs() + c_space.abs());

        let m_time = eps * avg.m_bar.dot(&vector_test.rates[i]).integral();
        let m_press = a_sq * avg.r.mul(&vector_test.values[i].div_h()).integral();
        let px = vector_test.values[i].x().to_spectral();
        let py = vector_test.values[i].y().to_spectral();
        let pxx = px.derivative(1, 0).to_physical();
        let pxy = px.derivative(0, 1).to_physical();
        let pyx = py.derivative(1, 0).to_physical();
        let pyy = py.derivative(0, 1).to_physical();
        let contracted = flux
            .xx
            .mul(&pxx)
            .add(&flux.xy.mul(&pxy.add(&pyx)))
            .add(&flux.yy.mul(&pyy));
        let m_flux = eps * contracted.integral();
        momentum += weights[i] * (m_time + m_press + m_flux);
        momentum_scale += weights[i] * (m_time.abs() + m_press.abs() + m_flux.abs());
    }

    let avg0 = averaged_fields(&states[0], eps)?;
    let c_init = eps * avg0.r.mul(&scalar_test.values[0]).integral();
    continuity += c_init;
    continuity_scale += c_init.abs();
    let m_init = eps * avg0.m_bar.dot(&vector_test.values[0]).integral();
    momentum += m_init;
    momentum_scale += m_init.abs();

    Ok(WeakResidual {
        continuity,
        momentum,
        continuity_scale,
        momentum_scale,
        seam_flag,
    })
}

/// One time sample of the quantities that stay bounded uniformly in eps on
/// well-prepared data families.
#[derive(Debug, Clone, Copy)]
pub struct BoundsSample {
    pub time: f64,
    pub momentum_flux_l1: f64,
    pub r_ess_l2: f64,
    pub rho_res_mass: f64,
    pub res_measure: f64,
    pub dissipation: f64,
    pub avg_velocity_w12: f64,
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub samples: Vec<BoundsSample>,
    /// Columnwise maximum over the trajectory, timestamped with the final
    /// sample time.
    pub sup: BoundsSample,
}

pub fn uniform_bounds(times: &[f64], states: &[FluidState3], params: &Params) -> Result<BoundsReport> {
    if times.is_empty() || times.len() != states.len() {
        return Err(Error::invalid("need matching, nonempty time and state samples"));
    }
    if times.len() > 1 {
        check_times(times)?;
    }
    let eps = params.eps();
    let cutoff = CutoffKappa::default();
    let mut samples = Vec::with_capacity(times.len());
    for (i, state) in states.iter().enumerate() {
        let u = state.velocity();
        let m = state.momentum();
        let flux = m
            .x()
            .mul(u.x())
            .add(&m.y().mul(u.y()))
            .add(&m.z().mul(u.z()));
        let momentum_flux_l1 = flux.slab_integral();

        let rho_avg = state.rho().vertical_average();
        let r = rho_avg.map(|v| (v - 1.0) / eps);
        let (r_ess, _) = ess_res_split(&r, &rho_avg, &cutoff)?;
        let r_ess_l2 = norm_lp(&r_ess, Exponent::finite(2.0)?);
        let dev = rho_avg.offset(-1.0);
        let (_, dev_res) = ess_res_split(&dev, &rho_avg, &cutoff)?;
        let rho_res_mass = norm_lp(&dev_res, Exponent::finite(1.0)?);
        let res_measure = rho_avg.map(|v| 1.0 - cutoff.eval(v)).integral();

        let dissipation = cns3d::dissipation(state, params);
        let ubar_x = u.x().vertical_average();
        let ubar_y = u.y().vertical_average();
        let avg_velocity_w12 =
            (norm_sobolev(&ubar_x, 1).powi(2) + norm_sobolev(&ubar_y, 1).powi(2)).sqrt();

        let sample = BoundsSample {
            time: times[i],
            momentum_flux_l1,
            r_ess_l2,
            rho_res_mass,
            res_measure,
            dissipation,
            avg_velocity_w12,
        };
        for v in [
            sample.momentum_flux_l1,
            sample.r_ess_l2,
            sample.rho_res_mass,
            sample.res_measure,
            sample.dissipation,
            sample.avg_velocity_w12,
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("bound sample not finite/nonnegative: {v}")));
            }
        }
        samples.push(sample);
    }
    let mut sup = samples[0];
    for s in &samples[1..] {
        sup.momentum_flux_l1 = sup.momentum_flux_l1.max(s.momentum_flux_l1);
        sup.r_ess_l2 = sup.r_ess_l2.max(s.r_ess_l2);
        sup.rho_res_mass = sup.rho_res_mass.max(s.rho_res_mass);
        sup.res_measure = sup.res_measure.max(s.res_measure);
        sup.dissipation = sup.dissipation.max(s.dissipation);
        sup.avg_velocity_w12 = sup.avg_velocity_w12.max(s.avg_velocity_w12);
    }
    sup.time = *times.last().unwrap();
    Ok(BoundsReport { samples, sup })
}

/// Mean-square deviation of the horizontal velocity from its vertical
/// average, and the bound given by thickness times the mean-square vertical
/// gradient.  Both sides are measured on the resolved vertical modes (a
/// pointwise quotient like momentum over density leaves unrepresentable
/// residue on the levels, which the derivative cannot see); on that common
/// subspace the deviation never exceeds the bound for thickness <= 1, and
/// for the lowest nonconstant vertical profile at thickness 1 the ratio is
/// exactly 1/pi^2.
pub fn vertical_poincare(u: &VectorField3) -> (f64, f64) {
    let grid = u.grid();
    let lift = |f: &ScalarField2| ScalarField3::lift(grid, f).expect("same horizontal grid");
    let ux = u.x().vertical_project();
    let uy = u.y().vertical_project();
    let fx = ux.sub(&lift(&ux.vertical_average()));
    let fy = uy.sub(&lift(&uy.vertical_average()));
    let deviation = fx.mul(&fx).add(&fy.mul(&fy)).slab_integral();
    let gx = ux.deriv_z();
    let gy = uy.deriv_z();
    let bound = grid.thickness() * gx.mul(&gx).add(&gy.mul(&gy)).slab_integral();
    (deviation, bound)
}

fn check_comparison_pair(
    state: &FluidState3,
    r: &ScalarField2,
    big_u: &VectorField3,
) -> Result<()> {
    state.grid().horizontal().same(&r.grid())?;
    state.grid().same(&big_u.grid())?;
    let min = r.min();
    if !(min > 0.0) {
        return Err(Error::NonpositiveTestDensity { min });
    }
    if big_u.z().max_abs() > 0.0 {
        return Err(Error::invalid("comparison velocity must have zero vertical component"));
    }
    Ok(())
}

/// Thickness-normalized distance of the state to the comparison pair
/// (r, U): kinetic part relative to U plus the convexity gap of the
/// pressure potential at r, scaled by 1/eps^2.
pub fn relative_energy(
    state: &FluidState3,
    r: &ScalarField2,
    big_u: &VectorField3,
    params: &Params,
) -> Result<f64> {
    check_comparison_pair(state, r, big_u)?;
    let law = *params.law();
    let diff = state.velocity().sub(big_u);
    let kinetic = state.rho().mul(&diff.magnitude_sq()).scale(0.5);
    let r3 = ScalarField3::lift(state.grid(), r)?;
    let gap = state
        .rho()
        .zip_with(&r3, |a, b| law.rel_entropy(a, b).expect("positive reference"));
    let eps = params.eps();
    Ok(kinetic.add(&gap.scale(1.0 / (eps * eps))).slab_integral())
}

/// mu times the thickness-normalized integral of S(grad(u-U)):grad(u-U).
pub fn relative_dissipation(
    state: &FluidState3,
    big_u: &VectorField3,
    params: &Params,
) -> Result<f64> {
    state.grid().same(&big_u.grid())?;
    let w = state.velocity().sub(big_u);
    Ok(params.mu() * cns3d::strain_density(&w).slab_integral())
}

fn partials(u: &VectorField3) -> Vec<Vec<ScalarField3>> {
    [u.x(), u.y(), u.z()]
        .into_iter()
        .map(|f| vec![f.deriv_x(), f.deriv_y(), f.deriv_z()])
        .collect()
}

/// The production term of the relative-energy balance, thickness-normalized.
/// `big_u_rate` is the time derivative of U and `slope_rate` the time
/// derivative of the pressure-potential slope at r, both supplied in closed
/// form by the caller.
pub fn remainder(
    state: &FluidState3,
    r: &ScalarField2,
    big_u: &VectorField3,
    big_u_rate: &VectorField3,
    slope_rate: &ScalarField2,
    params: &Params,
) -> Result<f64> {
    check_comparison_pair(state, r, big_u)?;
    state.grid().same(&big_u_rate.grid())?;
    state.grid().horizontal().same(&slope_rate.grid())?;
    if big_u_rate.z().max_abs() > 0.0 {
        return Err(Error::invalid("comparison velocity rate must have zero vertical component"));
    }
    let law = *params.law();
    let grid = state.grid();
    let u = state.velocity();
    let rho = state.rho();

    let p_big = partials(big_u);
    let conv = |row: &[ScalarField3]| {
        u.x()
            .mul(&row[0])
            .add(&u.y().mul(&row[1]))
            .add(&u.z().mul(&row[2]))
    };
    let acc_x = big_u_rate.x().add(&conv(&p_big[0]));
    let acc_y = big_u_rate.y().add(&conv(&p_big[1]));
    let gap_u = big_u.sub(&u);
    let term1 = rho
        .mul(&acc_x.mul(gap_u.x()).add(&acc_y.mul(gap_u.y())))
        .slab_integral();

    let p_vel = partials(&u);
    let div_big = p_big[0][0].add(&p_big[1][1]).add(&p_big[2][2]);
    let mut contracted = ScalarField3::zeros(grid, Parity::Even);
    for i in 0..3 {
        for j in 0..3 {
            let mut s = p_big[i][j].add(&p_big[j][i]);
            if i == j {
                s = s.sub(&div_big.scale(2.0 / 3.0));
            }
            contracted = contracted.add(&s.mul(&p_big[i][j].sub(&p_vel[i][j])));
        }
    }
    let term2 = params.mu() * contracted.slab_integral();

    let r3 = ScalarField3::lift(grid, r)?;
    let slope3 = ScalarField3::lift(grid, slope_rate)?;
    let drift = rho.sub(&r3).mul(&slope3);
    let p_rho = rho.map(|v| law.pressure(v));
    let compress = p_rho.mul(&div_big);
    let grad_r = r.grad_h();
    let curvature = r.map(|v| law.potential_curvature(v).expect("positive reference"));
    let slope_grad_x = ScalarField3::lift(grid, &curvature.mul(grad_r.x()))?;
    let slope_grad_y = ScalarField3::lift(grid, &curvature.mul(grad_r.y()))?;
    let transport = rho.mul(&u.x().mul(&slope_grad_x).add(&u.y().mul(&slope_grad_y)));
    let eps = params.eps();
    let term3 = drift.sub(&compress).sub(&transport).slab_integral() / (eps * eps);

    Ok(term1 + term2 + term3)
}

/// Comparison pair assembled from a planar limit flow and an acoustic
/// state: density 1 + eps psi and velocity (v + grad Psi, 0) lifted to the
/// slab.
#[derive(Debug, Clone)]
pub struct TestPair {
    pub density: ScalarField2,
    pub velocity: VectorField3,
}

pub fn build_test_functions(
    grid: SlabGrid,
    limit: &LimitState2,
    wave: &AcousticState,
    eps: f64,
) -> Result<TestPair> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    grid.horizontal().same(&limit.grid())?;
    grid.horizontal().same(&wave.grid())?;
    let density = wave.psi().scale(eps).offset(1.0);
    let min = density.min();
    if !(min > 0.0) {
        return Err(Error::NonpositiveTestDensity { min });
    }
    let planar = limit.velocity().add(&wave.grad_potential());
    Ok(TestPair {
        density,
        velocity: VectorField3::lift(grid, &planar)?,
    })
}

/// Time derivatives that go with `build_test_functions`: the lifted rate of
/// U and the rate of the pressure-potential slope at the test density.  The
/// acoustic rates are closed-form; `limit_viscosity` selects the equation
/// the planar reference solves (zero for the inviscid one).
pub fn test_pair_rates(
    grid: SlabGrid,
    limit: &LimitState2,
    limit_viscosity: f64,
    wave: &AcousticState,
    params: &Params,
) -> Result<(VectorField3, ScalarField2)> {
    grid.horizontal().same(&limit.grid())?;
    grid.horizontal().same(&wave.grid())?;
    let eps = params.eps();
    let law = *params.law();
    let sound = law.sound_speed_sq().sqrt();
    let dv = velocity_tendency(limit, limit_viscosity)?;
    let planar_rate = dv.add(&wave.grad_potential_rate(eps, sound));
    let big_u_rate = VectorField3::lift(grid, &planar_rate)?;

    let density = wave.psi().scale(eps).offset(1.0);
    let min = density.min();
    if !(min > 0.0) {
        return Err(Error::NonpositiveTestDensity { min });
    }
    let density_rate = wave.psi_rate(eps).scale(eps);
    let slope_rate = density.zip_with(&density_rate, |r, dr| {
        law.potential_curvature(r).expect("positive reference") * dr
    });
    Ok((big_u_rate, slope_rate))
}

/// Distances between a slab trajectory and a planar reference velocity,
/// measured on the centered square window of the given side fraction.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRecord {
    pub eps: f64,
    pub window_fraction: f64,
    /// L^2 in time of the windowed L^2 gap between avg(u_h) and v.
    pub sol_metric: f64,
    /// Same with avg(sqrt(rho) u_h) in place of avg(u_h).
    pub sqrho_metric: f64,
    /// sup over time of |ess part|_L2 + |res part|_Lgamma of avg(rho) - 1.
    pub density_sup: f64,
    /// L^2 in time of the windowed L^2 norm of the gradient part of m_bar.
    pub grad_metric: f64,
}

pub fn convergence_metrics(
    times: &[f64],
    states: &[FluidState3],
    reference: &[VectorField2],
    eps: f64,
    params: &Params,
    window_fraction: f64,
) -> Result<ConvergenceRecord> {
    check_times(times)?;
    if states.len() != times.len() || reference.len() != times.len() {
        return Err(Error::invalid("trajectory and reference must share one time grid"));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::invalid("window fraction must lie in (0, 1]"));
    }
    let h = states[0].grid().horizontal();
    for v in reference {
        v.grid().same(&h)?;
    }
    let gamma = params.law().gamma();
    let cutoff = CutoffKappa::default();
    let weights = trapezoid_weights(times);

    let mut sol_sq = 0.0;
    let mut sqrho_sq = 0.0;
    let mut grad_sq = 0.0;
    let mut density_sup: f64 = 0.0;
    for i in 0..times.len() {
        let state = &states[i];
        let u = state.velocity();
        let ubar = VectorField2::new(u.x().vertical_average(), u.y().vertical_average())?;
        let sol_gap = norm_l2_window_vector(&ubar.sub(&reference[i]), window_fraction);
        sol_sq += weights[i] * sol_gap * sol_gap;

        let root = state.rho().map(f64::sqrt);
        let wbar = VectorField2::new(
            root.mul(u.x()).vertical_average(),
            root.mul(u.y()).vertical_average(),
        )?;
        let sq_gap = norm_l2_window_vector(&wbar.sub(&reference[i]), window_fraction);
        sqrho_sq += weights[i] * sq_gap * sq_gap;

        let avg = averaged_fields(state, eps)?;
        let (_, grad_part) = helmholtz_split(&avg.m_bar);
        let g = norm_l2_window_vector(&grad_part, window_fraction);
        grad_sq += weights[i] * g * g;

        let rho_avg = state.rho().vertical_average();
        let dev = rho_avg.offset(-1.0);
        let (ess, res) = ess_res_split(&dev, &rho_avg, &cutoff)?;
        let dens =
            norm_lp(&ess, Exponent::finite(2.0)?) + norm_lp(&res, Exponent::finite(gamma)?);
        density_sup = density_sup.max(dens);
    }

    Ok(ConvergenceRecord {
        eps,
        window_fraction,
        sol_metric: sol_sq.sqrt(),
        sqrho_metric: sqrho_sq.sqrt(),
        density_sup,
        grad_metric: grad_sq.sqrt(),
    })
}

/// Least-squares power law through positive samples (eps_i, value_i).
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub count: usize,
}

pub fn fit_rate(samples: &[(f64, f64)]) -> Result<RateFit> {
    if samples.len() < 3 {
        return Err(Error::invalid("rate fit needs at least three samples"));
    }
    for &(e, v) in samples {
        if !(e > 0.0 && v > 0.0) {
            return Err(Error::invalid(format!(
                "rate fit needs positive samples, got ({e:.3e}, {v:.3e})"
            )));
        }
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::invalid("rate fit needs at least two distinct eps values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut res = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let d = y - (intercept + slope * x);
        res += d * d;
    }
    Ok(RateFit {
        slope,
        intercept,
        rms_residual: (res / n).sqrt(),
        count: samples.len(),
    })
}

/// Pointwise slack of the integrated energy inequality along a trajectory:
/// margin(t) = E(0) + int_0^t remainder - E(t) - int_0^t dissipation.
/// Negative margins beyond quadrature error mean the inequality failed.
#[derive(Debug, Clone)]
pub struct EnergyAudit {
    pub margins: Vec<f64>,
    pub worst: f64,
}

pub fn audit_energy_inequality(
    times: &[f64],
    energy: &[f64],
    dissipation_rate: &[f64],
    remainder_rate: &[f64],
) -> Result<EnergyAudit> {
    check_times(times)?;
    let n = times.len();
    if energy.len() != n || dissipation_rate.len() != n || remainder_rate.len() != n {
        return Err(Error::invalid("audit inputs must share one time grid"));
    }
    let mut margins = Vec::with_capacity(n);
    let mut cum_d = 0.0;
    let mut cum_r = 0.0;
    margins.push(0.0);
    for i in 1..n {
        let h = 0.5 * (times[i] - times[i - 1]);
        cum_d += h * (dissipation_rate[i - 1] + dissipation_rate[i]);
        cum_r += h * (remainder_rate[i - 1] + remainder_rate[i]);
        margins.push(energy[0] + cum_r - energy[i] - cum_d);
    }
    let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(EnergyAudit { margins, worst })
}
