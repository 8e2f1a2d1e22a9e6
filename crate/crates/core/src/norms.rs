//! Lebesgue, Sobolev and mixed space-time norms evaluated on collocation
//! data.  L^p norms use the trapezoid-exact equal-weight rule on the
//! periodic grid; W^{k,2} norms are evaluated through Plancherel.

use crate::error::{Error, Result};
use crate::field2::{ScalarField2, VectorField2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::invalid(format!("Lebesgue exponent must lie in [1, inf], got {p}")))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

/// Space-time norm specification: L^q in time of W^{k,p} in space.
#[derive(Debug, Clone, Copy)]
pub struct MixedNormSpec {
    pub p: Exponent,
    pub q: Exponent,
    pub k: usize,
}

impl MixedNormSpec {
    pub fn new(p: Exponent, q: Exponent, k: usize) -> Self {
        MixedNormSpec { p, q, k }
    }

    pub fn lebesgue(p: Exponent, q: Exponent) -> Self {
        MixedNormSpec { p, q, k: 0 }
    }
}

pub fn norm_lp(f: &ScalarField2, p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => f.max_abs(),
        Exponent::Finite(p) => {
            let h = f.grid().spacing();
            let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
            (sum * h * h).powf(1.0 / p)
        }
    }
}

pub fn norm_lp_vector(v: &VectorField2, p: Exponent) -> f64 {
    let mag = v.magnitude_sq().map(f64::sqrt);
    norm_lp(&mag, p)
}

/// W^{k,2} norm via the multiplier (1 + |k|^2)^{s}.
pub fn norm_sobolev(f: &ScalarField2, order: usize) -> f64 {
    let grid = f.grid();
    let spec = f.to_spectral();
    let l = grid.length();
    let mut sum = 0.0;
    let n = grid.modes();
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let weight = (1.0 + k1 * k1 + k2 * k2).powi(order as i32);
            sum += weight * spec.coef()[[i, j]].norm_sqr();
        }
    }
    (l * l * sum).sqrt()
}

/// W^{k,p} norm for general p: sum over all derivatives of order <= k.
fn norm_wkp(f: &ScalarField2, k: usize, p: Exponent) -> f64 {
    if k == 0 {
        return norm_lp(f, p);
    }
    if let Exponent::Finite(pv) = p {
        if (pv - 2.0).abs() < 1e-14 {
            return norm_sobolev(f, k);
        }
    }
    let spec = f.to_spectral();
    let mut terms = Vec::new();
    for a in 0..=k as u32 {
        for b in 0..=(k as u32 - a) {
            let d = spec.derivative(a, b).to_physical();
            terms.push(norm_lp(&d, p));
        }
    }
    match p {
        Exponent::Infinity => terms.into_iter().fold(0.0, f64::max),
        Exponent::Finite(pv) => terms.into_iter().map(|t| t.powf(pv)).sum::<f64>().powf(1.0 / pv),
    }
}

/// L^q-in-time of the spatial W^{k,p} norm, by composite trapezoid over the
/// (not necessarily uniform) sample times.
pub fn mixed_norm(times: &[f64], fields: &[ScalarField2], spec: MixedNormSpec) -> Result<f64> {
    if times.is_empty() || fields.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if times.len() != fields.len() {
        return Err(Error::invalid("trajectory times and fields have different lengths"));
    }
    let spatial: Vec<f64> = fields.iter().map(|f| norm_wkp(f, spec.k, spec.p)).collect();
    match spec.q {
        Exponent::Infinity => Ok(spatial.into_iter().fold(0.0, f64::max)),
        Exponent::Finite(q) => {
            if times.len() == 1 {
                return Err(Error::invalid("time quadrature needs at least two samples"));
            }
            let mut acc = 0.0;
            for i in 0..times.len() - 1 {
                let dt = times[i + 1] - times[i];
                if dt <= 0.0 {
                    return Err(Error::invalid("sample times must increase"));
                }
                acc += 0.5 * dt * (spatial[i].powf(q) + spatial[i + 1].powf(q));
            }
            Ok(acc.powf(1.0 / q))
        }
    }
}

/// L^2 norm restricted to the centered square window covering `fraction`
/// of the torus side per axis.
pub fn norm_l2_window(f: &ScalarField2, fraction: f64) -> f64 {
    let grid = f.grid();
    let l = grid.length();
    let lo = 0.5 * l * (1.0 - fraction);
    let hi = 0.5 * l * (1.0 + fraction);
    let h = grid.spacing();
    let n = grid.modes();
    let mut sum = 0.0;
    for i in 0..n {
        let x = grid.point(i);
        if x < lo || x >= hi {
            continue;
        }
        for j in 0..n {
            let y = grid.point(j);
            if y < lo || y >= hi {
                continue;
            }
            sum += f.values()[[i, j]] * f.values()[[i, j]];
        }
    }
    (sum * h * h).sqrt()
}

pub fn norm_l2_window_vector(v: &VectorField2, fraction: f64) -> f64 {
    let x = norm_l2_window(v.x(), fraction);
    let y = norm_l2_window(v.y(), fraction);
    (x * x + y * y).sqrt()
}
