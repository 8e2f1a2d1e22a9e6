//! Linear acoustic system on the horizontal torus:
//!
//!   eps d/dt psi + laplace Psi = 0,
//!   eps d/dt grad Psi + a^2 grad psi = 0.
//!
//! Each Fourier mode rotates with frequency a|k|/eps, which the exact
//! propagator applies in closed form.  The forced system is advanced by a
//! midpoint Duhamel rule on top of the exact flow.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field2::{gradient_potential, ScalarField2, SpectralScalar2, VectorField2};
use crate::grid::Torus2;
use crate::norms::{mixed_norm, Exponent, MixedNormSpec};

/// Spectral state of the wave pair `(psi, Psi)`; only `grad Psi` is
/// physically meaningful, so the potential's mean slot is pinned to zero.
#[derive(Debug, Clone)]
pub struct AcousticState {
    grid: Torus2,
    psi: Array2<Complex64>,
    potential: Array2<Complex64>,
    time: f64,
}

impl AcousticState {
    /// Build from the scalar part and the curl-free velocity part.
    pub fn new(psi: &ScalarField2, grad_potential: &VectorField2, time: f64) -> Result<Self> {
        psi.grid().same(&grad_potential.grid())?;
        let curl = grad_potential.curl_h().max_abs();
        let scale = grad_potential.max_abs().max(1.0);
        if curl > 1e-8 * scale {
            return Err(Error::invalid(format!(
                "acoustic velocity part must be curl-free; curl sup {curl:.3e}"
            )));
        }
        let pot = gradient_potential(grad_potential);
        Ok(AcousticState {
            grid: psi.grid(),
            psi: psi.to_spectral().coef().clone(),
            potential: pot.to_spectral().coef().clone(),
            time,
        })
    }

    /// Build directly from the two scalar potentials.
    pub fn from_potentials(psi: &ScalarField2, potential: &ScalarField2, time: f64) -> Result<Self> {
        psi.grid().same(&potential.grid())?;
        let mut pot = potential.to_spectral().coef().clone();
        pot[[0, 0]] = Complex64::new(0.0, 0.0);
        Ok(AcousticState { grid: psi.grid(), psi: psi.to_spectral().coef().clone(), potential: pot, time })
    }

    pub fn grid(&self) -> Torus2 {
        self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn psi(&self) -> ScalarField2 {
        SpectralScalar2::new(self.grid, self.psi.clone()).expect("shape").to_physical()
    }

    pub fn potential(&self) -> ScalarField2 {
        SpectralScalar2::new(self.grid, self.potential.clone()).expect("shape").to_physical()
    }

    pub fn grad_potential(&self) -> VectorField2 {
        let spec = SpectralScalar2::new(self.grid, self.potential.clone()).expect("shape");
        VectorField2::new(
            spec.derivative(1, 0).to_physical(),
            spec.derivative(0, 1).to_physical(),
        )
        .expect("same grid")
    }

    /// Time derivative of grad Psi, from the momentum equation.
    pub fn grad_potential_rate(&self, eps: f64, sound_speed: f64) -> VectorField2 {
        let spec = SpectralScalar2::new(self.grid, self.psi.clone()).expect("shape");
        let c = -sound_speed * sound_speed / eps;
        VectorField2::new(
            spec.derivative(1, 0).to_physical().scale(c),
            spec.derivative(0, 1).to_physical().scale(c),
        )
        .expect("same grid")
    }

    /// Time derivative of psi, from the mass equation.
    pub fn psi_rate(&self, eps: f64) -> ScalarField2 {
        let spec = SpectralScalar2::new(self.grid, self.potential.clone()).expect("shape");
        spec.scaled_by(|k1, k2| k1 * k1 + k2 * k2).to_physical().scale(1.0 / eps)
    }

    /// Conserved quadratic energy (1/2) * integral(a^2 psi^2 + |grad Psi|^2).
    pub fn energy(&self, sound_speed: f64) -> f64 {
        let l = self.grid.length();
        let a2 = sound_speed * sound_speed;
        let n = self.grid.modes();
        let mut sum = 0.0;
        for i in 0..n {
            let k1 = self.grid.wavenumber(i);
            for j in 0..n {
                let k2 = self.grid.wavenumber(j);
                let ksq = k1 * k1 + k2 * k2;
                sum += a2 * self.psi[[i, j]].norm_sqr() + ksq * self.potential[[i, j]].norm_sqr();
            }
        }
        0.5 * l * l * sum
    }

    /// Energy with Sobolev weight (1 + |k|^2)^order, conserved as well.
    pub fn energy_weighted(&self, sound_speed: f64, order: usize) -> f64 {
        let l = self.grid.length();
        let a2 = sound_speed * sound_speed;
        let n = self.grid.modes();
        let mut sum = 0.0;
        for i in 0..n {
            let k1 = self.grid.wavenumber(i);
            for j in 0..n {
                let k2 = self.grid.wavenumber(j);
                let ksq = k1 * k1 + k2 * k2;
                let w = (1.0 + ksq).powi(order as i32);
                sum += w * (a2 * self.psi[[i, j]].norm_sqr() + ksq * self.potential[[i, j]].norm_sqr());
            }
        }
        0.5 * l * l * sum
    }

    /// Apply the Fourier low-pass mollifier to both components.
    pub fn mollify(&self, eta: f64) -> Result<AcousticState> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::invalid(format!("mollifier scale must lie in (0,1), got {eta}")));
        }
        let profile = |k1: f64, k2: f64| crate::bump::lowpass_profile(eta * (k1 * k1 + k2 * k2).sqrt());
        let psi = SpectralScalar2::new(self.grid, self.psi.clone()).expect("shape").scaled_by(profile);
        let pot = SpectralScalar2::new(self.grid, self.potential.clone()).expect("shape").scaled_by(profile);
        Ok(AcousticState {
            grid: self.grid,
            psi: psi.coef().clone(),
            potential: pot.coef().clone(),
            time: self.time,
        })
    }

    pub fn linear_combination(&self, a: f64, other: &AcousticState, b: f64) -> Result<AcousticState> {
        self.grid.same(&other.grid)?;
        let psi = ndarray::Zip::from(&self.psi).and(&other.psi).map_collect(|x, y| x * a + y * b);
        let potential = ndarray::Zip::from(&self.potential)
            .and(&other.potential)
            .map_collect(|x, y| x * a + y * b);
        Ok(AcousticState { grid: self.grid, psi, potential, time: self.time })
    }
}

/// Closed-form propagation by time `t`.
pub fn propagate_exact(state: &AcousticState, t: f64, eps: f64, sound_speed: f64) -> Result<AcousticState> {
    if !(eps > 0.0) || !(sound_speed > 0.0) {
        return Err(Error::invalid("propagation needs eps > 0 and a > 0"));
    }
    let grid = state.grid;
    let n = grid.modes();
    let mut psi = Array2::zeros((n, n));
    let mut pot = Array2::zeros((n, n));
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let kmag = (k1 * k1 + k2 * k2).sqrt();
            let p0 = state.psi[[i, j]];
            let q0 = state.potential[[i, j]];
            if kmag == 0.0 {
                // mean of psi is invariant; the potential mean is gauge
                psi[[i, j]] = p0;
                pot[[i, j]] = Complex64::new(0.0, 0.0);
                continue;
            }
            let omega = sound_speed * kmag / eps;
            let (s, c) = (omega * t).sin_cos();
            psi[[i, j]] = p0 * c + q0 * (kmag / sound_speed) * s;
            pot[[i, j]] = q0 * c - p0 * (sound_speed / kmag) * s;
        }
    }
    Ok(AcousticState { grid, psi, potential: pot, time: state.time + t })
}

/// Time-sampled forcing for the Duhamel propagator.  `f1` forces the psi
/// equation, `f2` (curl-free) forces the velocity equation.
#[derive(Debug, Clone)]
pub struct AcousticForcing {
    times: Vec<f64>,
    f1: Vec<ScalarField2>,
    f2: Vec<VectorField2>,
}

impl AcousticForcing {
    pub fn new(times: Vec<f64>, f1: Vec<ScalarField2>, f2: Vec<VectorField2>) -> Result<Self> {
        if times.len() < 2 || times.len() != f1.len() || times.len() != f2.len() {
            return Err(Error::invalid("forcing needs matching times, f1, f2 with at least two samples"));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("forcing sample times must increase"));
            }
        }
        for v in &f2 {
            let curl = v.curl_h().max_abs();
            if curl > 1e-8 * v.max_abs().max(1.0) {
                return Err(Error::invalid(format!(
                    "velocity forcing must be curl-free; curl sup {curl:.3e}"
                )));
            }
        }
        Ok(AcousticForcing { times, f1, f2 })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn sample_midpoint(&self, idx: usize) -> (ScalarField2, VectorField2) {
        let f1 = self.f1[idx].add(&self.f1[idx + 1]).scale(0.5);
        let f2 = self.f2[idx].add(&self.f2[idx + 1]).scale(0.5);
        (f1, f2)
    }
}

/// Largest admissible dt is this factor times eps/(a*k_max).
pub const DUHAMEL_RESOLVE: f64 = 0.9;

/// Advance the forced system to `t_end` in uniform steps of `dt` and
/// return the state at every sample time.  Each step applies the exact
/// free flow and a midpoint rule on the Duhamel integral; the error is
/// O(dt^2).  Refuses dt that cannot resolve the fastest retained mode.
pub fn propagate_duhamel(
    state: &AcousticState,
    forcing: &AcousticForcing,
    eps: f64,
    sound_speed: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<AcousticState>> {
    if !(eps > 0.0) || !(sound_speed > 0.0) {
        return Err(Error::invalid("propagation needs eps > 0 and a > 0"));
    }
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(Error::invalid("propagation needs t_end > 0 and dt > 0"));
    }
    let grid = state.grid;
    let kmax = (2.0 * std::f64::consts::PI / grid.length())
        * (grid.modes() as f64 / 2.0)
        * std::f64::consts::SQRT_2;
    let dt_limit = DUHAMEL_RESOLVE * eps / (sound_speed * kmax);
    if dt > dt_limit {
        return Err(Error::UnderResolvedDt { dt, limit: dt_limit });
    }
    let steps = (t_end / dt).round() as usize;
    if steps == 0 || (t_end - steps as f64 * dt).abs() > 1e-9 * dt {
        return Err(Error::invalid("t_end must be an integer number of steps"));
    }
    if forcing.times.len() != steps + 1 {
        return Err(Error::invalid(format!(
            "forcing has {} samples but the step grid needs {}",
            forcing.times.len(),
            steps + 1
        )));
    }
    let t0 = forcing.times[0];
    for (i, &t) in forcing.times.iter().enumerate() {
        if (t - (t0 + i as f64 * dt)).abs() > 1e-9 * dt {
            return Err(Error::invalid("forcing must be sampled on the uniform step grid"));
        }
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut current = state.clone();
    current.time = t0;
    out.push(current.clone());
    for idx in 0..steps {
        let (f1m, f2m) = forcing.sample_midpoint(idx);
        // free flow over the whole step
        let mut next = propagate_exact(&current, dt, eps, sound_speed)?;
        // midpoint source, propagated over the remaining half step
        let src = AcousticState::new(&f1m, &helmholtz_gradient_part(&f2m), 0.0)?;
        let src = propagate_exact(&src, 0.5 * dt, eps, sound_speed)?;
        next = next.linear_combination(1.0, &src, dt)?;
        next.time = t0 + (idx + 1) as f64 * dt;
        current = next;
        out.push(current.clone());
    }
    Ok(out)
}

fn helmholtz_gradient_part(v: &VectorField2) -> VectorField2 {
    let (_, grad) = crate::field2::helmholtz_split(v);
    // keep any mean drift of the forcing out of the potential; the mean of
    // f2 moves only the k = 0 momentum slot, which grad Psi cannot carry
    grad
}

/// Admissible dispersive exponents: given p in (2, inf), returns (q, sigma)
/// with 2/q = 1/2 - 1/p and sigma = 3/q.
pub fn strichartz_exponents(p: f64) -> Result<(f64, f64)> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::invalid(format!("admissible range is p in (2, inf), got {p}")));
    }
    let q = 2.0 / (0.5 - 1.0 / p);
    Ok((q, 3.0 / q))
}

/// One row of the scaling study.
#[derive(Debug, Clone)]
pub struct ScalingSample {
    pub eps: f64,
    pub mixed: f64,
    /// mixed / eps^{1/q}; bounded iff the scaling law holds
    pub ratio: f64,
    pub rescaled_reference: f64,
    pub identity_error: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingStudy {
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub samples: Vec<ScalingSample>,
    pub fitted_slope: f64,
}

/// Mixed-norm scaling of the free wave in the Mach number.
///
/// For each eps the trajectory psi_eps(t) = psi_1(t/eps) is sampled over
/// (0, horizon) finely enough to resolve the fastest mode, and the
/// L^q((0,T); L^p) norm is compared against the time-rescaled reference
/// eps^{1/q} * ||psi_1||_{L^q((0,T/eps); L^p)} computed on its own grid.
pub fn strichartz_scaling_check(
    state: &AcousticState,
    p: f64,
    horizon: f64,
    eps_list: &[f64],
    sound_speed: f64,
    samples_per_period: usize,
) -> Result<ScalingStudy> {
    let (q, sigma) = strichartz_exponents(p)?;
    if !(horizon > 0.0) {
        return Err(Error::invalid("scaling study needs a positive horizon"));
    }
    if samples_per_period < 4 {
        return Err(Error::invalid("need at least 4 samples per fast period"));
    }
    if eps_list.is_empty() {
        return Err(Error::invalid("scaling study needs at least one eps"));
    }
    for w in eps_list.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::invalid("eps list must be strictly decreasing"));
        }
    }
    let grid = state.grid();
    let kmax = (2.0 * std::f64::consts::PI / grid.length())
        * (grid.modes() as f64 / 2.0)
        * std::f64::consts::SQRT_2;
    let spec = MixedNormSpec::lebesgue(Exponent::finite(p)?, Exponent::finite(q)?);

    let norm_over = |eps: f64, horizon: f64| -> Result<f64> {
        let period = 2.0 * std::f64::consts::PI * eps / (sound_speed * kmax);
        let dt = period / samples_per_period as f64;
        let count = (horizon / dt).ceil() as usize + 1;
        let mut times = Vec::with_capacity(count);
        let mut fields = Vec::with_capacity(count);
        for i in 0..count {
            let t = horizon * i as f64 / (count - 1) as f64;
            times.push(t);
            fields.push(propagate_exact(state, t, eps, sound_speed)?.psi());
        }
        mixed_norm(&times, &fields, spec)
    };

    let mut rows = Vec::new();
    let mut logs = Vec::new();
    for &eps in eps_list {
        let mixed = norm_over(eps, horizon)?;
        let reference = eps.powf(1.0 / q) * norm_over(1.0, horizon / eps)?;
        let identity_error = (mixed - reference).abs() / reference.abs().max(1e-300);
        logs.push((eps.ln(), mixed.ln()));
        rows.push(ScalingSample {
            eps,
            mixed,
            ratio: mixed / eps.powf(1.0 / q),
            rescaled_reference: reference,
            identity_error,
        });
    }
    let fitted_slope = if logs.len() >= 2 { least_squares_slope(&logs) } else { f64::NAN };
    Ok(ScalingStudy { p, q, sigma, samples: rows, fitted_slope })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
