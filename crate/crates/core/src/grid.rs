//! Periodic horizontal grids, thin-slab grids and the spectral transforms
//! between collocation values and Fourier / vertical-basis coefficients.
//!
//! Horizontal directions are periodic with side `L` and `N` collocation
//! points per axis.  The vertical direction spans `(0, delta)` and carries a
//! cosine basis for wall-symmetric fields and a sine basis for fields that
//! vanish on the walls, which encodes complete slip exactly.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Square periodic domain with side `length` and `modes` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus2 {
    length: f64,
    modes: usize,
}

impl Torus2 {
    pub fn new(length: f64, modes: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::invalid(format!("torus side must be positive, got {length}")));
        }
        if modes < 4 || modes % 2 != 0 {
            return Err(Error::invalid(format!("torus modes must be even and >= 4, got {modes}")));
        }
        Ok(Torus2 { length, modes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.modes as f64
    }

    /// Collocation abscissa along either axis.
    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Signed integer mode index in FFT storage order.
    pub fn mode_index(&self, i: usize) -> i64 {
        let n = self.modes as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Wavenumber for FFT slot `i`: 2*pi/L times the signed index.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.length * self.mode_index(i) as f64
    }

    /// Largest mode index kept by the 2/3 dealiasing rule.
    pub fn dealias_cap(&self) -> i64 {
        (self.modes / 3) as i64
    }

    /// Largest retained wavenumber magnitude per axis after dealiasing.
    pub fn max_kept_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length * self.dealias_cap() as f64
    }

    pub fn same(&self, other: &Torus2) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Thin slab: periodic horizontal cross-section times `(0, thickness)`.
///
/// `vertical_modes` counts cosine modes `0..M`; sine fields use modes
/// `1..M` and keep a structurally zero slot at index 0.  Collocation in the
/// vertical uses `2M` midpoints, enough to project cubic products of
/// band-limited factors without vertical aliasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabGrid {
    horizontal: Torus2,
    thickness: f64,
    vertical_modes: usize,
}

impl SlabGrid {
    pub fn new(horizontal: Torus2, thickness: f64, vertical_modes: usize) -> Result<Self> {
        if !(thickness > 0.0 && thickness <= 1.0) {
            return Err(Error::invalid(format!("slab thickness must lie in (0, 1], got {thickness}")));
        }
        if vertical_modes < 1 {
            return Err(Error::invalid("slab needs at least one vertical mode"));
        }
        Ok(SlabGrid { horizontal, thickness, vertical_modes })
    }

    pub fn horizontal(&self) -> Torus2 {
        self.horizontal
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn vertical_modes(&self) -> usize {
        self.vertical_modes
    }

    /// Number of vertical collocation levels.
    pub fn levels(&self) -> usize {
        2 * self.vertical_modes
    }

    /// Midpoint abscissa of level `q` in `(0, thickness)`.
    pub fn level_point(&self, q: usize) -> f64 {
        (q as f64 + 0.5) * self.thickness / self.levels() as f64
    }

    /// Vertical wavenumber of basis mode `m`.
    pub fn vertical_wavenumber(&self, m: usize) -> f64 {
        m as f64 * std::f64::consts::PI / self.thickness
    }

    pub fn same(&self, other: &SlabGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Vertical symmetry class of a slab field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Cosine basis; normal derivative vanishes on the walls.
    Even,
    /// Sine basis; the field vanishes on the walls.
    Odd,
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn fft2_inplace(data: &mut Array2<Complex64>, inverse: bool) {
    let n0 = data.nrows();
    let n1 = data.ncols();
    let fft_rows = plan(n1, inverse);
    let mut scratch = vec![Complex64::default(); fft_rows.get_inplace_scratch_len()];
    for mut row in data.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        fft_rows.process_with_scratch(slice, &mut scratch);
    }
    let fft_cols = plan(n0, inverse);
    let mut scratch = vec![Complex64::default(); fft_cols.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); n0];
    for j in 0..n1 {
        for i in 0..n0 {
            buf[i] = data[[i, j]];
        }
        fft_cols.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n0 {
            data[[i, j]] = buf[i];
        }
    }
}

/// Physical values -> Fourier coefficients, normalized so that
/// `f(x) = sum_k fhat_k exp(i k.x)`.
pub fn fourier2(grid: &Torus2, values: &Array2<f64>) -> Array2<Complex64> {
    let n = grid.modes();
    debug_assert_eq!(values.dim(), (n, n));
    let mut data = values.mapv(|v| Complex64::new(v, 0.0));
    fft2_inplace(&mut data, false);
    let scale = 1.0 / (n * n) as f64;
    data.mapv_inplace(|c| c * scale);
    data
}

/// Fourier coefficients -> physical values (real part of the inverse sum).
pub fn inverse_fourier2(grid: &Torus2, coef: &Array2<Complex64>) -> Array2<f64> {
    let n = grid.modes();
    debug_assert_eq!(coef.dim(), (n, n));
    let mut data = coef.clone();
    fft2_inplace(&mut data, true);
    data.mapv(|c| c.re)
}

/// Complex-valued inverse transform, for intermediates that are not
/// guaranteed to be Hermitian-symmetric.
pub fn inverse_fourier2_complex(grid: &Torus2, coef: &Array2<Complex64>) -> Array2<Complex64> {
    let n = grid.modes();
    debug_assert_eq!(coef.dim(), (n, n));
    let mut data = coef.clone();
    fft2_inplace(&mut data, true);
    data
}

/// Zero all coefficients with a signed index above the 2/3 cap on either axis.
pub fn dealias2(grid: &Torus2, coef: &mut Array2<Complex64>) {
    let cap = grid.dealias_cap();
    let n = grid.modes();
    for i in 0..n {
        let ki = grid.mode_index(i).abs();
        for j in 0..n {
            if ki > cap || grid.mode_index(j).abs() > cap {
                coef[[i, j]] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Vertical transform matrices for one slab grid.  Shapes are small
/// (modes x levels), so these are rebuilt on demand.
pub struct VerticalBasis {
    /// levels x modes evaluation matrix: `phi_m(z_q)`.
    pub synth: Array2<f64>,
    /// modes x levels analysis matrix, the discrete inverse of `synth`.
    pub analyze: Array2<f64>,
}

pub fn vertical_basis(grid: &SlabGrid, parity: Parity) -> VerticalBasis {
    let m_count = grid.vertical_modes();
    let q_count = grid.levels();
    let mut synth = Array2::zeros((q_count, m_count));
    let mut analyze = Array2::zeros((m_count, q_count));
    for q in 0..q_count {
        let theta = (q as f64 + 0.5) * std::f64::consts::PI / q_count as f64;
        for m in 0..m_count {
            let phase = m as f64 * theta;
            match parity {
                Parity::Even => {
                    synth[[q, m]] = phase.cos();
                    let w = if m == 0 { 1.0 } else { 2.0 };
                    analyze[[m, q]] = w * phase.cos() / q_count as f64;
                }
                Parity::Odd => {
                    if m == 0 {
                        synth[[q, m]] = 0.0;
                        analyze[[m, q]] = 0.0;
                    } else {
                        synth[[q, m]] = phase.sin();
                        analyze[[m, q]] = 2.0 * phase.sin() / q_count as f64;
                    }
                }
            }
        }
    }
    VerticalBasis { synth, analyze }
}

/// Vertical coefficients (m, i, j) -> collocation values (q, i, j).
pub fn vertical_synthesize(grid: &SlabGrid, parity: Parity, coef: &Array3<Complex64>) -> Array3<Complex64> {
    let basis = vertical_basis(grid, parity);
    let (m_count, n0, n1) = coef.dim();
    debug_assert_eq!(m_count, grid.vertical_modes());
    let q_count = grid.levels();
    let mut out = Array3::zeros((q_count, n0, n1));
    for q in 0..q_count {
        for m in 0..m_count {
            let w = basis.synth[[q, m]];
            if w == 0.0 {
                continue;
            }
            let src = coef.index_axis(ndarray::Axis(0), m);
            let mut dst = out.index_axis_mut(ndarray::Axis(0), q);
            dst.zip_mut_with(&src, |d, s| *d += s * w);
        }
    }
    out
}

/// Collocation values (q, i, j) -> vertical coefficients (m, i, j).
pub fn vertical_analyze(grid: &SlabGrid, parity: Parity, values: &Array3<Complex64>) -> Array3<Complex64> {
    let basis = vertical_basis(grid, parity);
    let (q_count, n0, n1) = values.dim();
    debug_assert_eq!(q_count, grid.levels());
    let m_count = grid.vertical_modes();
    let mut out = Array3::zeros((m_count, n0, n1));
    for m in 0..m_count {
        for q in 0..q_count {
            let w = basis.analyze[[m, q]];
            if w == 0.0 {
                continue;
            }
            let src = values.index_axis(ndarray::Axis(0), q);
            let mut dst = out.index_axis_mut(ndarray::Axis(0), m);
            dst.zip_mut_with(&src, |d, s| *d += s * w);
        }
    }
    out
}
