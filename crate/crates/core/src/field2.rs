//! Scalar and vector fields on the periodic horizontal cross-section, with
//! spectral differential operators, the Helmholtz splitting and the Fourier
//! low-pass mollifier.

use ndarray::Array2;
use num_complex::Complex64;

use crate::bump::lowpass_profile;
use crate::error::{Error, Result};
use crate::grid::{dealias2, fourier2, inverse_fourier2, Torus2};

#[derive(Debug, Clone)]
pub struct ScalarField2 {
    grid: Torus2,
    values: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralScalar2 {
    grid: Torus2,
    coef: Array2<Complex64>,
}

#[derive(Debug, Clone)]
pub struct VectorField2 {
    x: ScalarField2,
    y: ScalarField2,
}

impl ScalarField2 {
    pub fn zeros(grid: Torus2) -> Self {
        let n = grid.modes();
        ScalarField2 { grid, values: Array2::zeros((n, n)) }
    }

    pub fn from_fn(grid: Torus2, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.modes();
        let values = Array2::from_shape_fn((n, n), |(i, j)| f(grid.point(i), grid.point(j)));
        ScalarField2 { grid, values }
    }

    pub fn from_values(grid: Torus2, values: Array2<f64>) -> Result<Self> {
        let n = grid.modes();
        if values.dim() != (n, n) {
            return Err(Error::GridMismatch(format!(
                "value array {:?} does not match grid {n}x{n}",
                values.dim()
            )));
        }
        Ok(ScalarField2 { grid, values })
    }

    pub fn grid(&self) -> Torus2 {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn to_spectral(&self) -> SpectralScalar2 {
        SpectralScalar2 { grid: self.grid, coef: fourier2(&self.grid, &self.values) }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField2 {
        ScalarField2 { grid: self.grid, values: self.values.mapv(|v| f(v)) }
    }

    pub fn zip_with(&self, other: &ScalarField2, f: impl Fn(f64, f64) -> f64) -> ScalarField2 {
        assert_eq!(self.grid, other.grid, "field grids differ");
        let values = ndarray::Zip::from(&self.values)
            .and(&other.values)
            .map_collect(|&a, &b| f(a, b));
        ScalarField2 { grid: self.grid, values }
    }

    pub fn add(&self, other: &ScalarField2) -> ScalarField2 {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField2) -> ScalarField2 {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField2) -> ScalarField2 {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> ScalarField2 {
        self.map(|v| c * v)
    }

    pub fn offset(&self, c: f64) -> ScalarField2 {
        self.map(|v| v + c)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Domain average (1/L^2) * integral.
    pub fn mean(&self) -> f64 {
        self.values.sum() / (self.values.len() as f64)
    }

    /// Collocation integral over the torus.
    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.length() * self.grid.length()
    }

    pub fn grad_h(&self) -> VectorField2 {
        let spec = self.to_spectral();
        let gx = spec.derivative(1, 0).to_physical();
        let gy = spec.derivative(0, 1).to_physical();
        VectorField2 { x: gx, y: gy }
    }

    pub fn laplace_h(&self) -> ScalarField2 {
        self.to_spectral().scaled_by(|k1, k2| -(k1 * k1 + k2 * k2)).to_physical()
    }

    /// Fourier low-pass with profile chi(eta |k|): identity on `eta|k| <= 1`,
    /// zero on `eta|k| >= 2`.
    pub fn mollify(&self, eta: f64) -> Result<ScalarField2> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::invalid(format!("mollifier scale must lie in (0,1), got {eta}")));
        }
        Ok(self
            .to_spectral()
            .scaled_by(move |k1, k2| lowpass_profile(eta * (k1 * k1 + k2 * k2).sqrt()))
            .to_physical())
    }

    /// Spectral interpolation onto a finer grid with the same side length.
    pub fn resample(&self, target: Torus2) -> Result<ScalarField2> {
        self.to_spectral().resample(target).map(|s| s.to_physical())
    }

    /// Fraction of spectral mass carried by modes above `cap` (signed index).
    pub fn spectral_tail_fraction(&self, cap: i64) -> f64 {
        let spec = self.to_spectral();
        let mut tail = 0.0;
        let mut total = 0.0;
        let n = self.grid.modes();
        for i in 0..n {
            for j in 0..n {
                if self.grid.mode_index(i) == 0 && self.grid.mode_index(j) == 0 {
                    continue;
                }
                let e = spec.coef[[i, j]].norm_sqr();
                total += e;
                if self.grid.mode_index(i).abs() > cap || self.grid.mode_index(j).abs() > cap {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

impl SpectralScalar2 {
    pub fn new(grid: Torus2, coef: Array2<Complex64>) -> Result<Self> {
        let n = grid.modes();
        if coef.dim() != (n, n) {
            return Err(Error::GridMismatch(format!(
                "coefficient array {:?} does not match grid {n}x{n}",
                coef.dim()
            )));
        }
        Ok(SpectralScalar2 { grid, coef })
    }

    pub fn grid(&self) -> Torus2 {
        self.grid
    }

    pub fn coef(&self) -> &Array2<Complex64> {
        &self.coef
    }

    pub fn to_physical(&self) -> ScalarField2 {
        ScalarField2 { grid: self.grid, values: inverse_fourier2(&self.grid, &self.coef) }
    }

    /// Multiply each coefficient by a real function of the wavenumbers.
    pub fn scaled_by(&self, f: impl Fn(f64, f64) -> f64) -> SpectralScalar2 {
        let n = self.grid.modes();
        let mut coef = self.coef.clone();
        for i in 0..n {
            let k1 = self.grid.wavenumber(i);
            for j in 0..n {
                let k2 = self.grid.wavenumber(j);
                coef[[i, j]] *= f(k1, k2);
            }
        }
        SpectralScalar2 { grid: self.grid, coef }
    }

    /// Spectral partial derivative of order (a, b); the Nyquist slot is
    /// zeroed for odd orders to keep real fields real.
    pub fn derivative(&self, a: u32, b: u32) -> SpectralScalar2 {
        let n = self.grid.modes();
        let nyq = (n / 2) as i64;
        let mut coef = self.coef.clone();
        for i in 0..n {
            let idx1 = self.grid.mode_index(i);
            let k1 = self.grid.wavenumber(i);
            for j in 0..n {
                let idx2 = self.grid.mode_index(j);
                let k2 = self.grid.wavenumber(j);
                let kill = (a % 2 == 1 && idx1.abs() == nyq) || (b % 2 == 1 && idx2.abs() == nyq);
                if kill {
                    coef[[i, j]] = Complex64::new(0.0, 0.0);
                } else {
                    let m = Complex64::new(0.0, k1).powu(a) * Complex64::new(0.0, k2).powu(b);
                    coef[[i, j]] *= m;
                }
            }
        }
        SpectralScalar2 { grid: self.grid, coef }
    }

    pub fn dealias(&mut self) {
        dealias2(&self.grid, &mut self.coef);
    }

    pub fn resample(&self, target: Torus2) -> Result<SpectralScalar2> {
        if (target.length() - self.grid.length()).abs() > 1e-12 * self.grid.length() {
            return Err(Error::GridMismatch("resample requires the same side length".into()));
        }
        if target.modes() < self.grid.modes() {
            return Err(Error::invalid("resample only refines; target grid is coarser"));
        }
        let n_src = self.grid.modes();
        let n_dst = target.modes();
        let mut coef = Array2::zeros((n_dst, n_dst));
        for i in 0..n_src {
            let ki = self.grid.mode_index(i);
            let di = if ki >= 0 { ki as usize } else { (n_dst as i64 + ki) as usize };
            for j in 0..n_src {
                let kj = self.grid.mode_index(j);
                let dj = if kj >= 0 { kj as usize } else { (n_dst as i64 + kj) as usize };
                coef[[di, dj]] = self.coef[[i, j]];
            }
        }
        SpectralScalar2::new(target, coef)
    }
}

impl VectorField2 {
    pub fn new(x: ScalarField2, y: ScalarField2) -> Result<Self> {
        x.grid().same(&y.grid())?;
        Ok(VectorField2 { x, y })
    }

    pub fn zeros(grid: Torus2) -> Self {
        VectorField2 { x: ScalarField2::zeros(grid), y: ScalarField2::zeros(grid) }
    }

    pub fn from_fns(grid: Torus2, fx: impl Fn(f64, f64) -> f64, fy: impl Fn(f64, f64) -> f64) -> Self {
        VectorField2 { x: ScalarField2::from_fn(grid, fx), y: ScalarField2::from_fn(grid, fy) }
    }

    pub fn grid(&self) -> Torus2 {
        self.x.grid()
    }

    pub fn x(&self) -> &ScalarField2 {
        &self.x
    }

    pub fn y(&self) -> &ScalarField2 {
        &self.y
    }

    pub fn add(&self, other: &VectorField2) -> VectorField2 {
        VectorField2 { x: self.x.add(&other.x), y: self.y.add(&other.y) }
    }

    pub fn sub(&self, other: &VectorField2) -> VectorField2 {
        VectorField2 { x: self.x.sub(&other.x), y: self.y.sub(&other.y) }
    }

    pub fn scale(&self, c: f64) -> VectorField2 {
        VectorField2 { x: self.x.scale(c), y: self.y.scale(c) }
    }

    pub fn dot(&self, other: &VectorField2) -> ScalarField2 {
        self.x.mul(&other.x).add(&self.y.mul(&other.y))
    }

    pub fn magnitude_sq(&self) -> ScalarField2 {
        self.dot(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude_sq().max().sqrt()
    }

    pub fn div_h(&self) -> ScalarField2 {
        let dx = self.x.to_spectral().derivative(1, 0);
        let dy = self.y.to_spectral().derivative(0, 1);
        let coef = &dx.coef + &dy.coef;
        SpectralScalar2 { grid: self.grid(), coef }.to_physical()
    }

    pub fn curl_h(&self) -> ScalarField2 {
        let dyx = self.y.to_spectral().derivative(1, 0);
        let dxy = self.x.to_spectral().derivative(0, 1);
        let coef = &dyx.coef - &dxy.coef;
        SpectralScalar2 { grid: self.grid(), coef }.to_physical()
    }

    pub fn mollify(&self, eta: f64) -> Result<VectorField2> {
        Ok(VectorField2 { x: self.x.mollify(eta)?, y: self.y.mollify(eta)? })
    }
}

/// Orthogonal splitting `v = solenoidal + gradient`.  The mean mode is
/// assigned to the solenoidal part.  Returns `(solenoidal, gradient)`.
///
/// Slots on the shared +-N/2 row are unrepresentable for the odd-order
/// derivative operators, so they are dropped from both parts; the split
/// recombines to `v` exactly on Nyquist-free fields.
pub fn helmholtz_split(v: &VectorField2) -> (VectorField2, VectorField2) {
    let grid = v.grid();
    let n = grid.modes();
    let nyq = (n / 2) as i64;
    let sx = v.x.to_spectral();
    let sy = v.y.to_spectral();
    let mut gx = Array2::zeros((n, n));
    let mut gy = Array2::zeros((n, n));
    let mut hx = Array2::zeros((n, n));
    let mut hy = Array2::zeros((n, n));
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            if n % 2 == 0
                && (grid.mode_index(i).abs() == nyq || grid.mode_index(j).abs() == nyq)
            {
                continue;
            }
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                hx[[i, j]] = sx.coef[[i, j]];
                hy[[i, j]] = sy.coef[[i, j]];
                continue;
            }
            let proj = (k1 * sx.coef[[i, j]] + k2 * sy.coef[[i, j]]) / ksq;
            gx[[i, j]] = k1 * proj;
            gy[[i, j]] = k2 * proj;
            hx[[i, j]] = sx.coef[[i, j]] - gx[[i, j]];
            hy[[i, j]] = sy.coef[[i, j]] - gy[[i, j]];
        }
    }
    let grad = VectorField2 {
        x: SpectralScalar2 { grid, coef: gx }.to_physical(),
        y: SpectralScalar2 { grid, coef: gy }.to_physical(),
    };
    let sol = VectorField2 {
        x: SpectralScalar2 { grid, coef: hx }.to_physical(),
        y: SpectralScalar2 { grid, coef: hy }.to_physical(),
    };
    (sol, grad)
}

/// Scalar potential of the gradient part of `v`, mean-zero.
pub fn gradient_potential(v: &VectorField2) -> ScalarField2 {
    let grid = v.grid();
    let n = grid.modes();
    let nyq = (n / 2) as i64;
    let sx = v.x.to_spectral();
    let sy = v.y.to_spectral();
    let mut phi = Array2::zeros((n, n));
    for i in 0..n {
        let k1 = grid.wavenumber(i);
        for j in 0..n {
            let k2 = grid.wavenumber(j);
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                continue;
            }
            if n % 2 == 0
                && (grid.mode_index(i).abs() == nyq || grid.mode_index(j).abs() == nyq)
            {
                continue;
            }
            // v = grad phi  =>  phi_hat = (k . v_hat) / (i |k|^2)
            let dot = k1 * sx.coef[[i, j]] + k2 * sy.coef[[i, j]];
            phi[[i, j]] = dot / Complex64::new(0.0, ksq);
        }
    }
    SpectralScalar2 { grid, coef: phi }.to_physical()
}

/// Solve `laplace u = f` for the mean-zero solution.
pub fn inverse_laplace(f: &ScalarField2) -> ScalarField2 {
    f.to_spectral()
        .scaled_by(|k1, k2| {
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                0.0
            } else {
                -1.0 / ksq
            }
        })
        .to_physical()
}
