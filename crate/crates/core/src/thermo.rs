//! Isentropic pressure law, pressure potential, relative entropy and the
//! essential/residual splitting around the reference density 1.

use crate::bump::smooth_transition;
use crate::error::{Error, Result};
use crate::field2::ScalarField2;
use crate::field3::ScalarField3;

/// Pressure law p(rho) = A rho^gamma with gamma > 3/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasLaw {
    coefficient: f64,
    gamma: f64,
}

impl GasLaw {
    pub fn new(coefficient: f64, gamma: f64) -> Result<Self> {
        if !(coefficient > 0.0) {
            return Err(Error::invalid(format!("pressure coefficient must be positive, got {coefficient}")));
        }
        if !(gamma > 1.5) {
            return Err(Error::invalid(format!("adiabatic exponent must exceed 3/2, got {gamma}")));
        }
        Ok(GasLaw { coefficient, gamma })
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Reference sound speed squared, p'(1) = A gamma.
    pub fn sound_speed_sq(&self) -> f64 {
        self.coefficient * self.gamma
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed_sq().sqrt()
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.coefficient * rho.powf(self.gamma)
    }

    pub fn pressure_derivative(&self, rho: f64) -> f64 {
        self.coefficient * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// Pressure potential H(rho) = rho * integral_1^rho p(z)/z^2 dz in closed
    /// form: A (rho^gamma - rho) / (gamma - 1).  Extends continuously to
    /// rho = 0 with H(0) = 0.
    pub fn pressure_potential(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(Error::invalid(format!("pressure potential needs rho > 0, got {rho}")));
        }
        Ok(self.potential_raw(rho))
    }

    fn potential_raw(&self, rho: f64) -> f64 {
        let g = self.gamma;
        self.coefficient * (rho.powf(g) - rho) / (g - 1.0)
    }

    fn potential_derivative(&self, rho: f64) -> f64 {
        let g = self.gamma;
        self.coefficient * (g * rho.powf(g - 1.0) - 1.0) / (g - 1.0)
    }

    /// H'(r), the multiplier appearing in the relative entropy.
    pub fn potential_slope(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::invalid(format!("potential slope needs r > 0, got {r}")));
        }
        Ok(self.potential_derivative(r))
    }

    /// H''(r) = A gamma r^(gamma-2); equals the squared sound speed at r = 1.
    pub fn potential_curvature(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::invalid(format!("potential curvature needs r > 0, got {r}")));
        }
        Ok(self.coefficient * self.gamma * r.powf(self.gamma - 2.0))
    }

    /// Relative entropy E(rho, r) = H(rho) - H'(r)(rho - r) - H(r).
    /// Defined for rho >= 0 (H extends continuously to 0) and r > 0.
    pub fn rel_entropy(&self, rho: f64, r: f64) -> Result<f64> {
        if rho < 0.0 {
            return Err(Error::invalid(format!("relative entropy needs rho >= 0, got {rho}")));
        }
        if r <= 0.0 {
            return Err(Error::invalid(format!("relative entropy needs r > 0, got {r}")));
        }
        Ok(self.potential_raw(rho) - self.potential_derivative(r) * (rho - r) - self.potential_raw(r))
    }
}

/// Smooth cutoff around the reference density: 1 on |rho - 1| <= inner,
/// 0 on |rho - 1| >= outer.
#[derive(Debug, Clone, Copy)]
pub struct CutoffKappa {
    inner: f64,
    outer: f64,
}

impl Default for CutoffKappa {
    fn default() -> Self {
        CutoffKappa { inner: 0.5, outer: 0.75 }
    }
}

impl CutoffKappa {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer < 1.0) {
            return Err(Error::invalid(format!(
                "cutoff needs 0 < inner < outer < 1, got inner={inner}, outer={outer}"
            )));
        }
        Ok(CutoffKappa { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let s = ((rho - 1.0).abs() - self.inner) / (self.outer - self.inner);
        smooth_transition(s)
    }
}

/// Essential/residual splitting of `f` driven by the density: returns
/// (kappa(rho) f, f - kappa(rho) f).  The parts recombine to `f` up to one
/// rounding per point.
pub fn ess_res_split(f: &ScalarField2, rho: &ScalarField2, cutoff: &CutoffKappa) -> Result<(ScalarField2, ScalarField2)> {
    f.grid().same(&rho.grid())?;
    let ess = f.zip_with(rho, |fv, rv| cutoff.eval(rv) * fv);
    let res = f.sub(&ess);
    Ok((ess, res))
}

pub fn ess_res_split3(
    f: &ScalarField3,
    rho: &ScalarField3,
    cutoff: &CutoffKappa,
) -> Result<(ScalarField3, ScalarField3)> {
    f.grid().same(&rho.grid())?;
    let ess = f.zip_with(rho, |fv, rv| cutoff.eval(rv) * fv);
    let res = f.sub(&ess);
    Ok((ess, res))
}
