//! Fields on the thin slab.  Values are stored at vertical collocation
//! levels over the horizontal grid; the vertical basis (cosine or sine,
//! chosen by parity) encodes the complete-slip wall conditions exactly.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field2::{ScalarField2, VectorField2};
use crate::grid::{
    fourier2, inverse_fourier2, vertical_analyze, vertical_synthesize, Parity, SlabGrid,
};

#[derive(Debug, Clone)]
pub struct ScalarField3 {
    grid: SlabGrid,
    parity: Parity,
    values: Array3<f64>,
}

#[derive(Debug, Clone)]
pub struct VectorField3 {
    x: ScalarField3,
    y: ScalarField3,
    z: ScalarField3,
}

impl ScalarField3 {
    pub fn zeros(grid: SlabGrid, parity: Parity) -> Self {
        let q = grid.levels();
        let n = grid.horizontal().modes();
        ScalarField3 { grid, parity, values: Array3::zeros((q, n, n)) }
    }

    pub fn from_fn(grid: SlabGrid, parity: Parity, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let q_count = grid.levels();
        let n = grid.horizontal().modes();
        let h = grid.horizontal();
        let values = Array3::from_shape_fn((q_count, n, n), |(q, i, j)| {
            f(h.point(i), h.point(j), grid.level_point(q))
        });
        ScalarField3 { grid, parity, values }
    }

    pub fn from_values(grid: SlabGrid, parity: Parity, values: Array3<f64>) -> Result<Self> {
        let expect = (grid.levels(), grid.horizontal().modes(), grid.horizontal().modes());
        if values.dim() != expect {
            return Err(Error::GridMismatch(format!(
                "value array {:?} does not match slab layout {expect:?}",
                values.dim()
            )));
        }
        Ok(ScalarField3 { grid, parity, values })
    }

    /// Lift a horizontal field to the slab, constant in the vertical.
    pub fn lift(grid: SlabGrid, base: &ScalarField2) -> Result<Self> {
        grid.horizontal().same(&base.grid())?;
        let q_count = grid.levels();
        let n = grid.horizontal().modes();
        let values = Array3::from_shape_fn((q_count, n, n), |(_, i, j)| base.values()[[i, j]]);
        Ok(ScalarField3 { grid, parity: Parity::Even, values })
    }

    pub fn grid(&self) -> SlabGrid {
        self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn level(&self, q: usize) -> ScalarField2 {
        let slice = self.values.index_axis(Axis(0), q).to_owned();
        ScalarField2::from_values(self.grid.horizontal(), slice).expect("level shape")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField3 {
        ScalarField3 { grid: self.grid, parity: self.parity, values: self.values.mapv(|v| f(v)) }
    }

    pub fn zip_with(&self, other: &ScalarField3, f: impl Fn(f64, f64) -> f64) -> ScalarField3 {
        assert_eq!(self.grid, other.grid, "slab grids differ");
        let values = ndarray::Zip::from(&self.values)
            .and(&other.values)
            .map_collect(|&a, &b| f(a, b));
        let parity = if self.parity == other.parity { Parity::Even } else { Parity::Odd };
        // Pointwise combination has definite parity only for products; for
        // sums the caller must keep parities equal.
        ScalarField3 { grid: self.grid, parity, values }
    }

    pub fn add(&self, other: &ScalarField3) -> ScalarField3 {
        assert_eq!(self.parity, other.parity, "cannot add fields of different parity");
        let mut out = self.zip_with(other, |a, b| a + b);
        out.parity = self.parity;
        out
    }

    pub fn sub(&self, other: &ScalarField3) -> ScalarField3 {
        assert_eq!(self.parity, other.parity, "cannot subtract fields of different parity");
        let mut out = self.zip_with(other, |a, b| a - b);
        out.parity = self.parity;
        out
    }

    /// Pointwise product; the parity of the result follows the sign rule
    /// (even*even = even, even*odd = odd, odd*odd = even).
    pub fn mul(&self, other: &ScalarField3) -> ScalarField3 {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> ScalarField3 {
        self.map(|v| c * v)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Mean over all collocation points; equals (1/(delta L^2)) * integral.
    pub fn mean(&self) -> f64 {
        self.values.sum() / self.values.len() as f64
    }

    /// Thickness-normalized integral (1/delta) * integral over the slab.
    pub fn slab_integral(&self) -> f64 {
        let l = self.grid.horizontal().length();
        self.mean() * l * l
    }

    /// Exact vertical average: the zeroth cosine coefficient for even
    /// fields, identically zero for sine fields.
    pub fn vertical_average(&self) -> ScalarField2 {
        let h = self.grid.horizontal();
        match self.parity {
            Parity::Odd => ScalarField2::zeros(h),
            Parity::Even => {
                let q_count = self.grid.levels();
                let n = h.modes();
                let mut acc = Array2::<f64>::zeros((n, n));
                for q in 0..q_count {
                    acc += &self.values.index_axis(Axis(0), q);
                }
                acc.mapv_inplace(|v| v / q_count as f64);
                ScalarField2::from_values(h, acc).expect("average shape")
            }
        }
    }

    fn vertical_coefficients(&self) -> Array3<Complex64> {
        let complex = self.values.mapv(|v| Complex64::new(v, 0.0));
        vertical_analyze(&self.grid, self.parity, &complex)
    }

    /// Projection onto the spanned vertical modes.  Collocation values can
    /// carry content the mode basis cannot represent (products and
    /// quotients are formed pointwise on the levels); this drops it, like
    /// every spectral operator does implicitly.
    pub fn vertical_project(&self) -> ScalarField3 {
        let coef = self.vertical_coefficients();
        let values = vertical_synthesize(&self.grid, self.parity, &coef).mapv(|c| c.re);
        ScalarField3 { grid: self.grid, parity: self.parity, values }
    }

    /// Vertical derivative; flips parity.
    pub fn deriv_z(&self) -> ScalarField3 {
        let coef = self.vertical_coefficients();
        let m_count = self.grid.vertical_modes();
        let mut out = Array3::zeros(coef.dim());
        let (new_parity, sign) = match self.parity {
            Parity::Even => (Parity::Odd, -1.0),
            Parity::Odd => (Parity::Even, 1.0),
        };
        for m in 0..m_count {
            let lambda = self.grid.vertical_wavenumber(m);
            let src = coef.index_axis(Axis(0), m);
            let mut dst = out.index_axis_mut(Axis(0), m);
            dst.zip_mut_with(&src, |d, s| *d = s * (sign * lambda));
        }
        let values = vertical_synthesize(&self.grid, new_parity, &out).mapv(|c| c.re);
        ScalarField3 { grid: self.grid, parity: new_parity, values }
    }

    fn deriv_horizontal(&self, axis: usize) -> ScalarField3 {
        let h = self.grid.horizontal();
        let q_count = self.grid.levels();
        let mut values = self.values.clone();
        for q in 0..q_count {
            let slice = values.index_axis(Axis(0), q).to_owned();
            let spec = fourier2(&h, &slice);
            let field = crate::field2::SpectralScalar2::new(h, spec).expect("shape");
            let d = if axis == 0 { field.derivative(1, 0) } else { field.derivative(0, 1) };
            let phys = inverse_fourier2(&h, d.coef());
            values.index_axis_mut(Axis(0), q).assign(&phys);
        }
        ScalarField3 { grid: self.grid, parity: self.parity, values }
    }

    pub fn deriv_x(&self) -> ScalarField3 {
        self.deriv_horizontal(0)
    }

    pub fn deriv_y(&self) -> ScalarField3 {
        self.deriv_horizontal(1)
    }

    /// Apply the 2/3-rule horizontal mask level by level.
    pub fn dealias_h(&self) -> ScalarField3 {
        let h = self.grid.horizontal();
        let q_count = self.grid.levels();
        let mut values = self.values.clone();
        for q in 0..q_count {
            let slice = values.index_axis(Axis(0), q).to_owned();
            let mut spec = fourier2(&h, &slice);
            crate::grid::dealias2(&h, &mut spec);
            let phys = inverse_fourier2(&h, &spec);
            values.index_axis_mut(Axis(0), q).assign(&phys);
        }
        ScalarField3 { grid: self.grid, parity: self.parity, values }
    }

    /// Spectral interpolation onto a slab grid with at least as many
    /// horizontal and vertical modes and identical physical dimensions.
    pub fn resample(&self, target: SlabGrid) -> Result<ScalarField3> {
        if (target.thickness() - self.grid.thickness()).abs() > 1e-12 {
            return Err(Error::GridMismatch("resample requires equal thickness".into()));
        }
        if target.vertical_modes() < self.grid.vertical_modes() {
            return Err(Error::invalid("resample only refines the vertical basis"));
        }
        let coef = self.vertical_coefficients();
        let h_src = self.grid.horizontal();
        let m_src = self.grid.vertical_modes();
        let n_dst = target.horizontal().modes();
        let mut coef_dst = Array3::zeros((target.vertical_modes(), n_dst, n_dst));
        for m in 0..m_src {
            // each vertical coefficient slice is real collocation data on
            // the horizontal grid (imaginary parts vanish by construction)
            let slice = coef.index_axis(Axis(0), m).mapv(|c| c.re);
            let spec = fourier2(&h_src, &slice);
            let mut dst = coef_dst.index_axis_mut(Axis(0), m);
            for i in 0..h_src.modes() {
                let ki = h_src.mode_index(i);
                let di = if ki >= 0 { ki as usize } else { (n_dst as i64 + ki) as usize };
                for j in 0..h_src.modes() {
                    let kj = h_src.mode_index(j);
                    let dj = if kj >= 0 { kj as usize } else { (n_dst as i64 + kj) as usize };
                    dst[[di, dj]] = spec[[i, j]];
                }
            }
        }
        let levels = vertical_synthesize(&target, self.parity, &coef_dst);
        let q_count = target.levels();
        let mut out = Array3::zeros((q_count, n_dst, n_dst));
        for q in 0..q_count {
            let slice = levels.index_axis(Axis(0), q).to_owned();
            let phys = crate::grid::inverse_fourier2_complex(&target.horizontal(), &slice).mapv(|c| c.re);
            out.index_axis_mut(Axis(0), q).assign(&phys);
        }
        ScalarField3::from_values(target, self.parity, out)
    }
}

impl VectorField3 {
    pub fn new(x: ScalarField3, y: ScalarField3, z: ScalarField3) -> Result<Self> {
        x.grid().same(&y.grid())?;
        x.grid().same(&z.grid())?;
        if x.parity() != Parity::Even || y.parity() != Parity::Even || z.parity() != Parity::Odd {
            return Err(Error::invalid(
                "slab vector fields need even horizontal components and an odd vertical component",
            ));
        }
        Ok(VectorField3 { x, y, z })
    }

    pub fn zeros(grid: SlabGrid) -> Self {
        VectorField3 {
            x: ScalarField3::zeros(grid, Parity::Even),
            y: ScalarField3::zeros(grid, Parity::Even),
            z: ScalarField3::zeros(grid, Parity::Odd),
        }
    }

    /// Lift a horizontal vector field, zero vertical component.
    pub fn lift(grid: SlabGrid, base: &VectorField2) -> Result<Self> {
        Ok(VectorField3 {
            x: ScalarField3::lift(grid, base.x())?,
            y: ScalarField3::lift(grid, base.y())?,
            z: ScalarField3::zeros(grid, Parity::Odd),
        })
    }

    pub fn grid(&self) -> SlabGrid {
        self.x.grid()
    }

    pub fn x(&self) -> &ScalarField3 {
        &self.x
    }

    pub fn y(&self) -> &ScalarField3 {
        &self.y
    }

    pub fn z(&self) -> &ScalarField3 {
        &self.z
    }

    pub fn sub(&self, other: &VectorField3) -> VectorField3 {
        VectorField3 { x: self.x.sub(&other.x), y: self.y.sub(&other.y), z: self.z.sub(&other.z) }
    }

    pub fn add(&self, other: &VectorField3) -> VectorField3 {
        VectorField3 { x: self.x.add(&other.x), y: self.y.add(&other.y), z: self.z.add(&other.z) }
    }

    pub fn scale(&self, c: f64) -> VectorField3 {
        VectorField3 { x: self.x.scale(c), y: self.y.scale(c), z: self.z.scale(c) }
    }

    pub fn magnitude_sq(&self) -> ScalarField3 {
        let mut s = self.x.mul(&self.x).add(&self.y.mul(&self.y));
        s = s.add(&self.z.mul(&self.z));
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude_sq().max_abs().sqrt()
    }

    /// Averages of the horizontal components (the vertical one averages to
    /// zero exactly).
    pub fn vertical_average(&self) -> VectorField2 {
        VectorField2::new(self.x.vertical_average(), self.y.vertical_average()).expect("same grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Torus2;
    use std::f64::consts::PI;

    fn slab() -> SlabGrid {
        let t = Torus2::new(2.0 * PI, 16).unwrap();
        SlabGrid::new(t, 0.5, 6).unwrap()
    }

    #[test]
    fn vertical_average_kills_cosine_mode() {
        let g = slab();
        let d = g.thickness();
        let f = ScalarField3::from_fn(g, Parity::Even, |_, _, z| (PI * z / d).cos());
        let avg = f.vertical_average();
        assert!(avg.max_abs() < 1e-13, "cos(pi z/delta) must average to zero");
    }

    #[test]
    fn vertical_average_of_sine_field_is_structurally_zero() {
        let g = slab();
        let d = g.thickness();
        let f = ScalarField3::from_fn(g, Parity::Odd, |_, _, z| (PI * z / d).sin());
        assert_eq!(f.vertical_average().max_abs(), 0.0);
    }

    #[test]
    fn vertical_average_is_exact_on_constants() {
        let g = slab();
        let f = ScalarField3::from_fn(g, Parity::Even, |x, _, _| 2.0 + x.sin());
        let avg = f.vertical_average();
        let expect = ScalarField2::from_fn(g.horizontal(), |x, _| 2.0 + x.sin());
        assert!(avg.sub(&expect).max_abs() < 1e-13);
    }

    #[test]
    fn deriv_z_flips_parity_and_matches_analytic() {
        let g = slab();
        let d = g.thickness();
        let f = ScalarField3::from_fn(g, Parity::Even, |_, _, z| (2.0 * PI * z / d).cos());
        let dz = f.deriv_z();
        assert_eq!(dz.parity(), Parity::Odd);
        let expect =
            ScalarField3::from_fn(g, Parity::Odd, |_, _, z| -(2.0 * PI / d) * (2.0 * PI * z / d).sin());
        assert!(dz.sub(&expect).max_abs() < 1e-10);
    }

    #[test]
    fn horizontal_derivative_on_slab() {
        let g = slab();
        let f = ScalarField3::from_fn(g, Parity::Even, |x, y, _| (2.0 * x).sin() * y.cos());
        let dx = f.deriv_x();
        let expect = ScalarField3::from_fn(g, Parity::Even, |x, y, _| 2.0 * (2.0 * x).cos() * y.cos());
        assert!(dx.sub(&expect).max_abs() < 1e-10);
    }

    #[test]
    fn vector_field_enforces_parities() {
        let g = slab();
        let even = ScalarField3::zeros(g, Parity::Even);
        let odd = ScalarField3::zeros(g, Parity::Odd);
        assert!(VectorField3::new(even.clone(), even.clone(), odd.clone()).is_ok());
        assert!(VectorField3::new(even.clone(), even.clone(), even.clone()).is_err());
        assert!(VectorField3::new(odd.clone(), even.clone(), odd.clone()).is_err());
    }

    #[test]
    fn resample_refines_without_changing_content() {
        let g = slab();
        let d = g.thickness();
        let f = ScalarField3::from_fn(g, Parity::Even, |x, _, z| x.sin() * (PI * z / d).cos());
        let fine = SlabGrid::new(Torus2::new(2.0 * PI, 32).unwrap(), d, 12).unwrap();
        let rf = f.resample(fine).unwrap();
        // compare slab-normalized integrals of the square, which the exact
        // interpolation preserves
        let a = f.mul(&f).slab_integral();
        let b = rf.mul(&rf).slab_integral();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }
}
