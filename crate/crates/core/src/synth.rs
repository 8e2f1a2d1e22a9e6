//! Closed-form and seeded initial data used by the benchmark runs and the
//! test batteries.  Everything here is deterministic: the random builders
//! take an explicit seed and a fixed generator.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cns3d::IllPreparedData;
use crate::error::Result;
use crate::field2::{ScalarField2, VectorField2};
use crate::field3::{ScalarField3, VectorField3};
use crate::grid::{Parity, SlabGrid, Torus2};

/// Periodized Gaussian `amp * exp(-|x-c|^2 / width^2)`, summed over the
/// nearest 5x5 block of torus images so the seam values match smoothly for
/// widths up to about a fifth of the period.
pub fn gaussian_bump(grid: Torus2, center: (f64, f64), width: f64, amp: f64) -> ScalarField2 {
    let length = grid.length();
    ScalarField2::from_fn(grid, |x, y| {
        let mut sum = 0.0;
        for ix in -2..=2 {
            for iy in -2..=2 {
                let dx = x - center.0 + ix as f64 * length;
                let dy = y - center.1 + iy as f64 * length;
                sum += (-(dx * dx + dy * dy) / (width * width)).exp();
            }
        }
        amp * sum
    })
}

/// Divergence-free velocity from a stream function: v = (-d_y psi, d_x psi),
/// evaluated spectrally so the discrete horizontal divergence vanishes.
pub fn rotational_from_stream(stream: &ScalarField2) -> VectorField2 {
    let spec = stream.to_spectral();
    VectorField2::new(
        spec.derivative(0, 1).to_physical().scale(-1.0),
        spec.derivative(1, 0).to_physical(),
    )
    .expect("stream derivatives share the grid")
}

/// Curl-free velocity from a potential: w = grad phi, evaluated spectrally.
pub fn gradient_from_potential(potential: &ScalarField2) -> VectorField2 {
    let spec = potential.to_spectral();
    VectorField2::new(
        spec.derivative(1, 0).to_physical(),
        spec.derivative(0, 1).to_physical(),
    )
    .expect("potential derivatives share the grid")
}

/// Counter-rotating Gaussian vortex pair: stream function is the difference
/// of two bumps separated along x, so the total circulation vanishes.
pub fn vortex_pair(grid: Torus2, amp: f64, width: f64) -> VectorField2 {
    let length = grid.length();
    let c1 = (0.5 * length - 0.15 * length, 0.5 * length);
    let c2 = (0.5 * length + 0.15 * length, 0.5 * length);
    let stream = gaussian_bump(grid, c1, width, amp).sub(&gaussian_bump(grid, c2, width, amp));
    rotational_from_stream(&stream)
}

/// Gradient pulse: grad of a single Gaussian potential, mean-free by
/// construction.
pub fn gradient_pulse(grid: Torus2, amp: f64, width: f64) -> VectorField2 {
    let length = grid.length();
    let potential = gaussian_bump(grid, (0.35 * length, 0.6 * length), width, amp);
    gradient_from_potential(&potential)
}

/// Random real field with spectrum confined to |k_a|, |k_b| <= band (in mode
/// units).  Coefficients are seeded Gaussians; the result is rescaled to the
/// requested sup amplitude.
pub fn random_band_limited(grid: Torus2, band: usize, amp: f64, seed: u64) -> ScalarField2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kappa = 2.0 * PI / grid.length();
    let mut modes = Vec::new();
    let b = band as i64;
    for a in -b..=b {
        for c in -b..=b {
            if a == 0 && c == 0 {
                continue;
            }
            // keep one representative of each {k, -k} pair
            if a < 0 || (a == 0 && c < 0) {
                continue;
            }
            let amp_c: f64 = rng.random_range(-1.0..1.0);
            let amp_s: f64 = rng.random_range(-1.0..1.0);
            modes.push((a as f64 * kappa, c as f64 * kappa, amp_c, amp_s));
        }
    }
    let raw = ScalarField2::from_fn(grid, |x, y| {
        let mut sum = 0.0;
        for &(kx, ky, ac, as_) in &modes {
            let phase = kx * x + ky * y;
            sum += ac * phase.cos() + as_ * phase.sin();
        }
        sum
    });
    let peak = raw.max_abs();
    if peak == 0.0 {
        raw
    } else {
        raw.scale(amp / peak)
    }
}

/// Parameters for the standard benchmark data family.
#[derive(Debug, Clone, Copy)]
pub struct BenchmarkParams {
    pub vortex_amp: f64,
    pub vortex_width: f64,
    pub pulse_amp: f64,
    pub pulse_width: f64,
    pub bump_amp: f64,
    pub bump_width: f64,
    /// Relative size of the x3-dependent perturbation; 0 keeps the data
    /// planar (independent of x3).
    pub vertical_amp: f64,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        BenchmarkParams {
            vortex_amp: 0.8,
            vortex_width: 0.0, // 0 means "scale with the box", resolved below
            pulse_amp: 0.6,
            pulse_width: 0.0,
            bump_amp: 0.5,
            bump_width: 0.0,
            vertical_amp: 0.0,
        }
    }
}

fn resolved_width(requested: f64, length: f64, fraction: f64) -> f64 {
    if requested > 0.0 {
        requested
    } else {
        fraction * length
    }
}

/// Benchmark family: velocity is a vortex pair plus a gradient pulse, the
/// density deviation is a Gaussian bump.  Planar unless `vertical_amp` is
/// set, in which case the lowest odd/even vertical modes are excited with
/// that relative amplitude.
pub fn benchmark_data(grid: SlabGrid, p: &BenchmarkParams) -> Result<IllPreparedData> {
    let h = grid.horizontal();
    let length = h.length();
    let vw = resolved_width(p.vortex_width, length, 0.08);
    let pw = resolved_width(p.pulse_width, length, 0.10);
    let bw = resolved_width(p.bump_width, length, 0.12);

    let v2 = vortex_pair(h, p.vortex_amp, vw).add(&gradient_pulse(h, p.pulse_amp, pw));
    let bump = gaussian_bump(h, (0.5 * length, 0.45 * length), bw, p.bump_amp);
    let centered = bump.offset(-bump.mean());

    let mut rho1 = ScalarField3::lift(grid, &centered)?;
    let mut u0 = VectorField3::lift(grid, &v2)?;
    if p.vertical_amp != 0.0 {
        let d = grid.thickness();
        let a = p.vertical_amp;
        let wiggle = ScalarField3::from_fn(grid, Parity::Even, |x, y, z| {
            a * (2.0 * PI * x / length).sin() * (2.0 * PI * y / length).cos() * (PI * z / d).cos()
        });
        rho1 = rho1.add(&wiggle.scale(p.bump_amp));
        let uz = ScalarField3::from_fn(grid, Parity::Odd, |x, _, z| {
            a * (2.0 * PI * x / length).cos() * (PI * z / d).sin()
        });
        u0 = VectorField3::new(
            u0.x().add(&wiggle.scale(0.5)),
            u0.y().clone(),
            uz,
        )?;
    }
    IllPreparedData::new(rho1, u0)
}

/// Probe family for the residual-set scaling study.  The density deviation
/// amplitude grows like (1 + eps) / (2 eps), so after multiplication by eps
/// the density excursion peaks at (1 + eps)/2: it crosses the essential-set
/// threshold 1/2 on a shrinking neighborhood of the bump peak while the
/// total density stays inside (0, 2).
pub fn residual_probe_data(grid: SlabGrid, eps: f64) -> Result<IllPreparedData> {
    let h = grid.horizontal();
    let length = h.length();
    let amp = (1.0 + eps) / (2.0 * eps);
    let bump = gaussian_bump(h, (0.5 * length, 0.5 * length), 0.12 * length, amp);
    let rho1 = ScalarField3::lift(grid, &bump)?;
    let u0 = VectorField3::zeros(grid);
    IllPreparedData::new(rho1, u0)
}

/// Random solenoidal 2D velocity with band-limited stream function.
pub fn random_solenoidal(grid: Torus2, band: usize, amp: f64, seed: u64) -> VectorField2 {
    let stream = random_band_limited(grid, band, 1.0, seed);
    let v = rotational_from_stream(&stream);
    let peak = v.max_abs();
    if peak == 0.0 {
        v
    } else {
        v.scale(amp / peak)
    }
}
