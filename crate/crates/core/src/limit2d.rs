//! Reference solvers for the incompressible targets on the horizontal
//! torus: 2D Navier-Stokes via a pseudo-spectral projection method with an
//! exact viscous integrating factor, and 2D Euler in vorticity-stream form.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field2::{helmholtz_split, ScalarField2, SpectralScalar2, VectorField2};
use crate::grid::{dealias2, fourier2, inverse_fourier2, Torus2};

/// Advective step limit is this factor times h / max|v|.
pub const ADVECTIVE_CFL: f64 = 0.5;

/// Euler steps refuse vorticity whose spectral mass beyond two thirds of
/// the dealias cap exceeds this fraction.
pub const EULER_TAIL_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct LimitState2 {
    velocity: VectorField2,
    pressure: ScalarField2,
    time: f64,
}

impl LimitState2 {
    /// Wrap a velocity field, checking that it is solenoidal.  The small
    /// absolute term keeps machine-zero fields admissible.
    pub fn new(velocity: VectorField2, time: f64) -> Result<Self> {
        let div = velocity.div_h().max_abs();
        let scale = velocity.max_abs();
        if div > 1e-10 * scale + 1e-12 {
            return Err(Error::invalid(format!(
                "velocity must be divergence-free; div sup {div:.3e} vs field sup {scale:.3e}"
            )));
        }
        Ok(Self::from_solenoidal(velocity, time))
    }

    fn from_solenoidal(velocity: VectorField2, time: f64) -> Self {
        let pressure = pressure_from_velocity(&velocity);
        LimitState2 { velocity, pressure, time }
    }

    pub fn grid(&self) -> Torus2 {
        self.velocity.grid()
    }

    pub fn velocity(&self) -> &VectorField2 {
        &self.velocity
    }

    pub fn pressure(&self) -> &ScalarField2 {
        &self.pressure
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn vorticity(&self) -> ScalarField2 {
        self.velocity.curl_h()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.velocity.magnitude_sq().integral()
    }

    pub fn enstrophy(&self) -> f64 {
        let w = self.vorticity();
        0.5 * w.mul(&w).integral()
    }

    /// Integral of |grad v|^2, the viscous dissipation density.
    pub fn gradient_l2_sq(&self) -> f64 {
        let grid = self.grid();
        let l2 = grid.length() * grid.length();
        let mut sum = 0.0;
        for comp in [self.velocity.x(), self.velocity.y()] {
            let spec = comp.to_spectral();
            let n = grid.modes();
            for i in 0..n {
                let k1 = grid.wavenumber(i);
                for j in 0..n {
                    let k2 = grid.wavenumber(j);
                    sum += (k1 * k1 + k2 * k2) * spec.coef()[[i, j]].norm_sqr();
                }
            }
        }
        l2 * sum
    }

    /// Fraction of vorticity spectrum beyond two thirds of the dealias cap.
    pub fn spectral_tail(&self) -> f64 {
        let cap = self.grid().dealias_cap() as i64;
        self.vorticity().spectral_tail_fraction(2 * cap / 3)
    }
}

/// Split initial data into its solenoidal part (the limit velocity) and
/// its gradient part (the acoustic potential's gradient).
pub fn project_initial(u0: &VectorField2) -> Result<(LimitState2, VectorField2)> {
    let (sol, grad) = helmholtz_split(u0);
    Ok((LimitState2::new(sol, 0.0)?, grad))
}

struct SpecVec {
    x: Array2<Complex64>,
    y: Array2<Complex64>,
}

fn leray(grid: &Torus2, v: &mut SpecVec) {
    let n = grid.modes();
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                continue;
            }
            let d = (v.x[[i, j]] * k1 + v.y[[i, j]] * k2) / ksq;
            v.x[[i, j]] -= d * k1;
            v.y[[i, j]] -= d * k2;
        }
    }
}

fn multiplier(grid: &Torus2, coef: &Array2<Complex64>, f: impl Fn(f64, f64) -> Complex64) -> Array2<Complex64> {
    let n = grid.modes();
    let mut out = coef.clone();
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            out[[i, j]] *= f(k1, grid.wavenumber(j));
        }
    }
    out
}

fn ddx(grid: &Torus2, coef: &Array2<Complex64>) -> Array2<f64> {
    inverse_fourier2(grid, &multiplier(grid, coef, |k1, _| Complex64::new(0.0, k1)))
}

fn ddy(grid: &Torus2, coef: &Array2<Complex64>) -> Array2<f64> {
    inverse_fourier2(grid, &multiplier(grid, coef, |_, k2| Complex64::new(0.0, k2)))
}

/// Minus the Leray-projected advection term, spectral in, spectral out.
fn ns_rhs(grid: &Torus2, v: &SpecVec) -> SpecVec {
    let vx = inverse_fourier2(grid, &v.x);
    let vy = inverse_fourier2(grid, &v.y);
    let dxx = ddx(grid, &v.x);
    let dxy = ddy(grid, &v.x);
    let dyx = ddx(grid, &v.y);
    let dyy = ddy(grid, &v.y);
    let ax = &vx * &dxx + &vy * &dxy;
    let ay = &vx * &dyx + &vy * &dyy;
    let mut out = SpecVec { x: fourier2(grid, &ax), y: fourier2(grid, &ay) };
    dealias2(grid, &mut out.x);
    dealias2(grid, &mut out.y);
    leray(grid, &mut out);
    out.x.mapv_inplace(|c| -c);
    out.y.mapv_inplace(|c| -c);
    out
}

fn axpy(a: &SpecVec, s: f64, b: &SpecVec) -> SpecVec {
    SpecVec {
        x: ndarray::Zip::from(&a.x).and(&b.x).map_collect(|p, q| p + q * s),
        y: ndarray::Zip::from(&a.y).and(&b.y).map_collect(|p, q| p + q * s),
    }
}

fn scaled(v: &SpecVec, e: &Array2<f64>) -> SpecVec {
    SpecVec {
        x: ndarray::Zip::from(&v.x).and(e).map_collect(|p, &w| p * w),
        y: ndarray::Zip::from(&v.y).and(e).map_collect(|p, &w| p * w),
    }
}

fn check_cfl(state: &LimitState2, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    let vmax = state.velocity.max_abs();
    if vmax > 0.0 {
        let limit = ADVECTIVE_CFL * state.grid().spacing() / vmax;
        if dt > limit {
            return Err(Error::CflViolation { dt, limit });
        }
    }
    Ok(())
}

/// One step of viscous incompressible flow: integrating-factor RK4 on the
/// projected momentum equation.  The viscous semigroup is applied exactly,
/// so purely diffusive solutions carry no time-stepping error.
pub fn ns2d_step(state: &LimitState2, dt: f64, viscosity: f64) -> Result<LimitState2> {
    check_cfl(state, dt)?;
    if viscosity < 0.0 {
        return Err(Error::invalid("viscosity must be nonnegative"));
    }
    let grid = state.grid();
    let n = grid.modes();
    let mut half = Array2::zeros((n, n));
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            half[[i, j]] = (-viscosity * (k1 * k1 + k2 * k2) * 0.5 * dt).exp();
        }
    }
    let full = &half * &half;

    let mut v0 = SpecVec {
        x: state.velocity.x().to_spectral().coef().clone(),
        y: state.velocity.y().to_spectral().coef().clone(),
    };
    dealias2(&grid, &mut v0.x);
    dealias2(&grid, &mut v0.y);

    let k1v = ns_rhs(&grid, &v0);
    let k2v = ns_rhs(&grid, &scaled(&axpy(&v0, 0.5 * dt, &k1v), &half));
    let k3v = ns_rhs(&grid, &axpy(&scaled(&v0, &half), 0.5 * dt, &k2v));
    let k4v = ns_rhs(&grid, &axpy(&scaled(&v0, &full), dt, &scaled(&k3v, &half)));

    let mut next = scaled(&v0, &full);
    next = axpy(&next, dt / 6.0, &scaled(&k1v, &full));
    next = axpy(&next, dt / 3.0, &scaled(&k2v, &half));
    next = axpy(&next, dt / 3.0, &scaled(&k3v, &half));
    next = axpy(&next, dt / 6.0, &k4v);

    let vx = ScalarField2::from_values(grid, inverse_fourier2(&grid, &next.x))?;
    let vy = ScalarField2::from_values(grid, inverse_fourier2(&grid, &next.y))?;
    Ok(LimitState2::from_solenoidal(
        VectorField2::new(vx, vy)?,
        state.time + dt,
    ))
}

/// Instantaneous time derivative of the velocity: Leray-projected advection
/// plus viscous diffusion.  Needed when a trajectory of this system serves
/// as a comparison velocity inside the slab energy functional.
pub fn velocity_tendency(state: &LimitState2, viscosity: f64) -> Result<VectorField2> {
    if viscosity < 0.0 {
        return Err(Error::invalid("viscosity must be nonnegative"));
    }
    let grid = state.grid();
    let mut v0 = SpecVec {
        x: state.velocity.x().to_spectral().coef().clone(),
        y: state.velocity.y().to_spectral().coef().clone(),
    };
    dealias2(&grid, &mut v0.x);
    dealias2(&grid, &mut v0.y);
    let mut out = ns_rhs(&grid, &v0);
    let n = grid.modes();
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let visc = -viscosity * (k1 * k1 + k2 * k2);
            out.x[[i, j]] += v0.x[[i, j]] * visc;
            out.y[[i, j]] += v0.y[[i, j]] * visc;
        }
    }
    let vx = ScalarField2::from_values(grid, inverse_fourier2(&grid, &out.x))?;
    let vy = ScalarField2::from_values(grid, inverse_fourier2(&grid, &out.y))?;
    VectorField2::new(vx, vy)
}

/// Biot-Savart reconstruction, with the mean slots supplied separately.
fn biot_savart(grid: &Torus2, omega: &Array2<Complex64>, mean: (Complex64, Complex64)) -> SpecVec {
    let n = grid.modes();
    let mut vx = Array2::zeros((n, n));
    let mut vy = Array2::zeros((n, n));
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                vx[[i, j]] = mean.0;
                vy[[i, j]] = mean.1;
                continue;
            }
            // v = grad^perp laplace^{-1} omega
            let s = omega[[i, j]] / ksq;
            vx[[i, j]] = Complex64::new(0.0, k2) * s;
            vy[[i, j]] = Complex64::new(0.0, -k1) * s;
        }
    }
    SpecVec { x: vx, y: vy }
}

fn euler_rhs(grid: &Torus2, omega: &Array2<Complex64>, mean: (Complex64, Complex64)) -> Array2<Complex64> {
    let v = biot_savart(grid, omega, mean);
    let vx = inverse_fourier2(grid, &v.x);
    let vy = inverse_fourier2(grid, &v.y);
    let wx = ddx(grid, omega);
    let wy = ddy(grid, omega);
    let adv = &vx * &wx + &vy * &wy;
    let mut out = fourier2(grid, &adv);
    dealias2(grid, &mut out);
    out.mapv_inplace(|c| -c);
    out
}

/// One step of incompressible Euler in vorticity-stream form, RK4 with
/// dealiased advection.  Energy and enstrophy are conserved by the
/// semi-discrete system, so the drift is pure time-integration error.
pub fn euler2d_step(state: &LimitState2, dt: f64) -> Result<LimitState2> {
    check_cfl(state, dt)?;
    let tail = state.spectral_tail();
    if tail > EULER_TAIL_THRESHOLD {
        return Err(Error::UnderResolvedField { fraction: tail, threshold: EULER_TAIL_THRESHOLD });
    }
    let grid = state.grid();
    let mean = (
        state.velocity.x().to_spectral().coef()[[0, 0]],
        state.velocity.y().to_spectral().coef()[[0, 0]],
    );
    let mut w0 = state.vorticity().to_spectral().coef().clone();
    dealias2(&grid, &mut w0);

    let k1 = euler_rhs(&grid, &w0, mean);
    let k2 = euler_rhs(&grid, &(&w0 + &(&k1 * Complex64::from(0.5 * dt))), mean);
    let k3 = euler_rhs(&grid, &(&w0 + &(&k2 * Complex64::from(0.5 * dt))), mean);
    let k4 = euler_rhs(&grid, &(&w0 + &(&k3 * Complex64::from(dt))), mean);

    let sixth = dt / 6.0;
    let mut w1 = w0;
    ndarray::Zip::from(&mut w1).and(&k1).and(&k2).and(&k3).and(&k4).for_each(|w, a, b, c, d| {
        *w += (*a + *d + (*b + *c) * 2.0) * sixth;
    });

    let v = biot_savart(&grid, &w1, mean);
    let vx = ScalarField2::from_values(grid, inverse_fourier2(&grid, &v.x))?;
    let vy = ScalarField2::from_values(grid, inverse_fourier2(&grid, &v.y))?;
    Ok(LimitState2::from_solenoidal(
        VectorField2::new(vx, vy)?,
        state.time + dt,
    ))
}

/// Mean-zero pressure from the velocity: solves laplace pi = -div(v.grad v).
pub fn euler_pressure(state: &LimitState2) -> ScalarField2 {
    state.pressure.clone()
}

fn pressure_from_velocity(v: &VectorField2) -> ScalarField2 {
    let grid = v.grid();
    let sx = v.x().to_spectral().coef().clone();
    let sy = v.y().to_spectral().coef().clone();
    let sv = SpecVec { x: sx, y: sy };
    let vx = inverse_fourier2(&grid, &sv.x);
    let vy = inverse_fourier2(&grid, &sv.y);
    let ax = &vx * &ddx(&grid, &sv.x) + &vy * &ddy(&grid, &sv.x);
    let ay = &vx * &ddx(&grid, &sv.y) + &vy * &ddy(&grid, &sv.y);
    let mut fx = fourier2(&grid, &ax);
    let mut fy = fourier2(&grid, &ay);
    dealias2(&grid, &mut fx);
    dealias2(&grid, &mut fy);
    let n = grid.modes();
    let mut pi = Array2::zeros((n, n));
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                continue;
            }
            // div(v.grad v) in spectral form, then -laplace^{-1}
            let divadv = Complex64::new(0.0, k1) * fx[[i, j]] + Complex64::new(0.0, k2) * fy[[i, j]];
            pi[[i, j]] = divadv / ksq;
        }
    }
    SpectralScalar2::new(grid, pi).expect("shape").to_physical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Torus2 {
        Torus2::new(2.0 * PI, 48).unwrap()
    }

    fn taylor_green(g: Torus2, decay: f64) -> VectorField2 {
        VectorField2::from_fns(
            g,
            |x, y| -x.cos() * y.sin() * decay,
            |x, y| x.sin() * y.cos() * decay,
        )
    }

    fn smooth_random(g: Torus2) -> VectorField2 {
        // fixed-phase band-limited stream function, amplitude below 1
        let psi = ScalarField2::from_fn(g, |x, y| {
            0.31 * (x + 0.3).sin() * (y - 0.1).cos()
                + 0.17 * (2.0 * x - 1.0).cos() * (y + 0.8).sin()
                + 0.09 * (3.0 * x).sin() * (2.0 * y).sin()
        });
        let spec = psi.to_spectral();
        VectorField2::new(
            spec.derivative(0, 1).to_physical().scale(-1.0),
            spec.derivative(1, 0).to_physical(),
        )
        .unwrap()
    }

    #[test]
    fn projection_splits_and_recombines() {
        let g = grid();
        let sol = smooth_random(g);
        let pot = ScalarField2::from_fn(g, |x, y| 0.4 * x.cos() * (2.0 * y).sin());
        let mixed = sol.add(&pot.grad_h());
        let (state, grad) = project_initial(&mixed).unwrap();
        let err_sol = state.velocity().sub(&sol).max_abs();
        let err_sum = state.velocity().add(&grad).sub(&mixed).max_abs();
        assert!(err_sol < 1e-12, "solenoidal part off by {err_sol}");
        assert!(err_sum < 1e-12, "parts must recombine, off by {err_sum}");

        let (pure, grad) = project_initial(&sol).unwrap();
        assert!(pure.velocity().sub(&sol).max_abs() < 1e-12);
        assert!(grad.max_abs() < 1e-12);

        let (zero, grad) = project_initial(&pot.grad_h()).unwrap();
        assert!(zero.velocity().max_abs() < 1e-12);
        assert!(grad.sub(&pot.grad_h()).max_abs() < 1e-12);
    }

    #[test]
    fn zero_stays_zero() {
        let g = grid();
        let state = LimitState2::new(VectorField2::zeros(g), 0.0).unwrap();
        let after_ns = ns2d_step(&state, 0.01, 0.1).unwrap();
        assert_eq!(after_ns.velocity().max_abs(), 0.0);
        let after_euler = euler2d_step(&state, 0.01).unwrap();
        assert_eq!(after_euler.velocity().max_abs(), 0.0);
        assert_eq!(euler_pressure(&state).max_abs(), 0.0);
    }

    #[test]
    fn taylor_green_matches_closed_form() {
        let g = grid();
        let mu = 0.05;
        let mut state = LimitState2::new(taylor_green(g, 1.0), 0.0).unwrap();
        let dt = 0.01;
        for _ in 0..100 {
            state = ns2d_step(&state, dt, mu).unwrap();
        }
        let exact = taylor_green(g, (-2.0 * mu * state.time()).exp());
        let err = state.velocity().sub(&exact).max_abs();
        assert!(err < 1e-6, "Taylor-Green error {err:.3e} at t=1");
        let div = state.velocity().div_h().max_abs();
        assert!(div < 1e-10 * state.velocity().max_abs());
    }

    #[test]
    fn ns_energy_balance_audit() {
        let g = grid();
        let mu = 0.02;
        let mut state = LimitState2::new(smooth_random(g), 0.0).unwrap();
        let dt = 2e-3;
        let e0 = state.kinetic_energy();
        let mut dissipated = 0.0;
        let mut prev_rate = state.gradient_l2_sq();
        for _ in 0..250 {
            state = ns2d_step(&state, dt, mu).unwrap();
            let rate = state.gradient_l2_sq();
            dissipated += 0.5 * dt * mu * (prev_rate + rate);
            prev_rate = rate;
        }
        let balance = (state.kinetic_energy() + dissipated - e0).abs() / e0;
        assert!(balance < 1e-6, "energy balance drift {balance:.3e}");
    }

    #[test]
    fn ns_step_is_fourth_order() {
        let g = grid();
        let v0 = smooth_random(g);
        let mu = 0.05;
        let t_end = 0.25;
        let run = |steps: usize| {
            let mut s = LimitState2::new(v0.clone(), 0.0).unwrap();
            let dt = t_end / steps as f64;
            for _ in 0..steps {
                s = ns2d_step(&s, dt, mu).unwrap();
            }
            s
        };
        let reference = run(400);
        let coarse = run(25);
        let mid = run(50);
        let e_c = coarse.velocity().sub(reference.velocity()).max_abs();
        let e_m = mid.velocity().sub(reference.velocity()).max_abs();
        let order = (e_c / e_m).log2();
        assert!(
            (order - 4.0).abs() < 0.5,
            "observed order {order} (coarse {e_c:.3e}, mid {e_m:.3e})"
        );
    }

    #[test]
    fn eigenfunction_vortex_is_stationary() {
        let g = grid();
        let v0 = VectorField2::from_fns(g, |x, y| -x.sin() * y.cos(), |x, y| x.cos() * y.sin());
        let mut state = LimitState2::new(v0.clone(), 0.0).unwrap();
        let dt = 0.005;
        for _ in 0..200 {
            state = euler2d_step(&state, dt).unwrap();
        }
        let drift = state.velocity().sub(&v0).max_abs();
        assert!(drift < 1e-8, "steady vortex drifted by {drift:.3e}");
    }

    #[test]
    fn eigenfunction_vortex_pressure() {
        let g = grid();
        let v0 = VectorField2::from_fns(g, |x, y| -x.sin() * y.cos(), |x, y| x.cos() * y.sin());
        let state = LimitState2::new(v0, 0.0).unwrap();
        let pi = euler_pressure(&state);
        let exact = ScalarField2::from_fn(g, |x, y| 0.25 * ((2.0 * x).cos() + (2.0 * y).cos()));
        let err = pi.sub(&exact).max_abs();
        assert!(err < 1e-8, "pressure error {err:.3e}");
        assert!(pi.mean().abs() < 1e-12);
    }

    #[test]
    fn pressure_solves_its_equation() {
        let g = grid();
        let v = smooth_random(g);
        let state = LimitState2::new(v.clone(), 0.0).unwrap();
        let pi = euler_pressure(&state);
        // assemble div(v.grad v) the same dealiased way
        let gxx = v.x().to_spectral();
        let gyy = v.y().to_spectral();
        let ax = v.x().mul(&gxx.derivative(1, 0).to_physical()).add(&v.y().mul(&gxx.derivative(0, 1).to_physical()));
        let ay = v.x().mul(&gyy.derivative(1, 0).to_physical()).add(&v.y().mul(&gyy.derivative(0, 1).to_physical()));
        let mut sax = ax.to_spectral();
        sax.dealias();
        let mut say = ay.to_spectral();
        say.dealias();
        let adv = VectorField2::new(sax.to_physical(), say.to_physical()).unwrap();
        let residual = pi.laplace_h().add(&adv.div_h()).max_abs();
        assert!(residual < 1e-10, "defining identity residual {residual:.3e}");
    }

    #[test]
    fn euler_conserves_energy_and_enstrophy() {
        let g = grid();
        let mut state = LimitState2::new(smooth_random(g), 0.0).unwrap();
        let e0 = state.kinetic_energy();
        let z0 = state.enstrophy();
        let dt = 1e-3;
        for _ in 0..1000 {
            state = euler2d_step(&state, dt).unwrap();
        }
        let de = (state.kinetic_energy() - e0).abs() / e0;
        let dz = (state.enstrophy() - z0).abs() / z0;
        assert!(de < 1e-8, "energy drift {de:.3e}");
        assert!(dz < 1e-8, "enstrophy drift {dz:.3e}");
    }

    #[test]
    fn cfl_refusal() {
        let g = grid();
        let state = LimitState2::new(taylor_green(g, 1.0), 0.0).unwrap();
        match ns2d_step(&state, 1.0, 0.0) {
            Err(Error::CflViolation { .. }) => {}
            other => panic!("expected CFL refusal, got {other:?}"),
        }
        match euler2d_step(&state, 1.0) {
            Err(Error::CflViolation { .. }) => {}
            other => panic!("expected CFL refusal, got {other:?}"),
        }
    }

    #[test]
    fn euler_refuses_rough_vorticity() {
        let g = Torus2::new(2.0 * PI, 32).unwrap();
        let cap = g.dealias_cap() as f64;
        // vorticity concentrated near the dealias cap
        let k = cap - 1.0;
        let v = VectorField2::from_fns(
            g,
            move |_, y| (k * y).sin() / k,
            move |x, _| (k * x).sin() / k,
        );
        let state = LimitState2::new(v, 0.0).unwrap();
        match euler2d_step(&state, 1e-4) {
            Err(Error::UnderResolvedField { fraction, .. }) => {
                assert!(fraction > EULER_TAIL_THRESHOLD);
            }
            other => panic!("expected resolution refusal, got {other:?}"),
        }
    }

    #[test]
    fn refinement_limits_agree() {
        let g = grid();
        let v0 = smooth_random(g);
        let t_end = 0.2;
        let run = |steps: usize| {
            let mut s = LimitState2::new(v0.clone(), 0.0).unwrap();
            for _ in 0..steps {
                s = euler2d_step(&s, t_end / steps as f64).unwrap();
            }
            s
        };
        let a = run(200);
        let b = run(317);
        let gap = a.velocity().sub(b.velocity()).max_abs();
        assert!(gap < 1e-9, "two refined integrations disagree by {gap:.3e}");
    }

    #[test]
    fn tendency_matches_taylor_green_decay() {
        let g = Torus2::new(2.0 * PI, 32).unwrap();
        let v = VectorField2::from_fns(
            g,
            |x, y| x.sin() * y.cos(),
            |x, y| -(x.cos() * y.sin()),
        );
        let state = LimitState2::new(v.clone(), 0.0).unwrap();
        let mu = 0.05;
        // advection is a pure gradient, so d/dt v = mu laplace v = -2 mu v
        let rate = velocity_tendency(&state, mu).unwrap();
        let expect = v.scale(-2.0 * mu);
        assert!(rate.sub(&expect).max_abs() < 1e-10);
    }
}
