//! Explicit integrator for the Mach-scaled barotropic flow on the thin
//! slab.  Conservative variables (rho, m = rho u) advance with RK4; space
//! is Fourier in the horizontal directions and cosine/sine Galerkin in the
//! vertical, which encodes the slip walls structurally.
//!
//! The smooth regime is the only target: the vacuum floor aborts a run
//! instead of regularizing it, and no shock capturing is attempted.

use crate::error::{Error, Result};
use crate::field2::{ScalarField2, VectorField2};
use crate::field3::{ScalarField3, VectorField3};
use crate::grid::{Parity, SlabGrid};
use crate::norms::{norm_lp, norm_lp_vector, Exponent};
use crate::thermo::GasLaw;

/// Runs abort when min rho falls to this level.
pub const VACUUM_FLOOR: f64 = 1e-6;

/// Default acoustic CFL factor for `step`.
pub const DEFAULT_CFL: f64 = 0.4;

/// Stability margin of RK4 on the imaginary axis, used for the vertical
/// acoustic limit.
const RK4_IMAGINARY_REACH: f64 = 2.8;

#[derive(Debug, Clone, Copy)]
pub struct Params {
    eps: f64,
    delta: f64,
    mu: f64,
    law: GasLaw,
    cfl: f64,
}

impl Params {
    pub fn new(eps: f64, delta: f64, mu: f64, law: GasLaw) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::invalid(format!("Mach number must lie in (0,1], got {eps}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid(format!("slab thickness must lie in (0,1], got {delta}")));
        }
        if !(mu >= 0.0) {
            return Err(Error::invalid(format!("shear viscosity must be nonnegative, got {mu}")));
        }
        Ok(Params { eps, delta, mu, law, cfl: DEFAULT_CFL })
    }

    pub fn with_cfl(mut self, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::invalid(format!("CFL factor must lie in (0,1], got {cfl}")));
        }
        self.cfl = cfl;
        Ok(self)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn law(&self) -> &GasLaw {
        &self.law
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }
}

#[derive(Debug, Clone)]
pub struct FluidState3 {
    rho: ScalarField3,
    momentum: VectorField3,
    time: f64,
}

impl FluidState3 {
    pub fn new(rho: ScalarField3, momentum: VectorField3, time: f64) -> Result<Self> {
        if rho.parity() != Parity::Even {
            return Err(Error::invalid("density must use the cosine vertical basis"));
        }
        rho.grid().same(&momentum.grid())?;
        let min = rho.min();
        if !(min > 0.0) {
            return Err(Error::invalid(format!("density must be positive; min {min:.3e}")));
        }
        Ok(FluidState3 { rho, momentum, time })
    }

    fn assemble(rho: ScalarField3, momentum: VectorField3, time: f64) -> Self {
        FluidState3 { rho, momentum, time }
    }

    pub fn grid(&self) -> SlabGrid {
        self.rho.grid()
    }

    pub fn rho(&self) -> &ScalarField3 {
        &self.rho
    }

    pub fn momentum(&self) -> &VectorField3 {
        &self.momentum
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Pointwise m / rho.
    pub fn velocity(&self) -> VectorField3 {
        let ux = self.momentum.x().zip_with(&self.rho, |m, r| m / r);
        let uy = self.momentum.y().zip_with(&self.rho, |m, r| m / r);
        let uz = self.momentum.z().zip_with(&self.rho, |m, r| m / r);
        VectorField3::new(ux, uy, uz).expect("quotient parities")
    }

    /// Thickness-normalized integral of (rho - 1); constant along a run.
    pub fn mass_deviation(&self) -> f64 {
        self.rho.map(|r| r - 1.0).slab_integral()
    }

    pub fn max_speed(&self) -> f64 {
        self.velocity().max_abs()
    }
}

#[derive(Debug, Clone)]
pub struct Tendency {
    pub drho: ScalarField3,
    pub dmomentum: VectorField3,
}

fn divergence(v: &VectorField3) -> ScalarField3 {
    v.x().deriv_x().add(&v.y().deriv_y()).add(&v.z().deriv_z())
}

fn laplacian(f: &ScalarField3) -> ScalarField3 {
    f.deriv_x().deriv_x().add(&f.deriv_y().deriv_y()).add(&f.deriv_z().deriv_z())
}

/// Semi-discrete right-hand side of the mass and momentum balances.
///
/// The quotient u = m/rho and the pressure rho^gamma are evaluated
/// pointwise and carry some aliasing; all quadratic products are formed
/// from dealiased factors and masked again afterwards, which keeps the
/// error at the spectral-truncation level for smooth resolved states.
pub fn rhs(state: &FluidState3, params: &Params) -> Result<Tendency> {
    let min = state.rho.min();
    if min <= VACUUM_FLOOR {
        return Err(Error::VacuumProximity { min, floor: VACUUM_FLOOR });
    }

    let m = &state.momentum;
    let u = state.velocity();
    let ux = u.x().dealias_h();
    let uy = u.y().dealias_h();
    let uz = u.z().dealias_h();

    // mass: -div m, linear and alias-free
    let drho = divergence(m).scale(-1.0);

    // convective flux: component i of div(u (x) m) = sum_j d_j(u_j m_i)
    let convect = |mi: &ScalarField3| -> ScalarField3 {
        ux.mul(mi)
            .dealias_h()
            .deriv_x()
            .add(&uy.mul(mi).dealias_h().deriv_y())
            .add(&uz.mul(mi).dealias_h().deriv_z())
    };
    let cx = convect(m.x());
    let cy = convect(m.y());
    let cz = convect(m.z());

    // pressure gradient
    let law = params.law();
    let p = state.rho.map(|r| law.pressure(r)).dealias_h();
    let scale_p = 1.0 / (params.eps() * params.eps());

    // div S(grad u) = laplace u + (1/3) grad div u for zero bulk viscosity
    let divu = divergence(&u).dealias_h();
    let mu = params.mu();
    let third = 1.0 / 3.0;

    let dmx = cx
        .add(&p.deriv_x().scale(scale_p))
        .scale(-1.0)
        .add(&laplacian(&ux).add(&divu.deriv_x().scale(third)).scale(mu));
    let dmy = cy
        .add(&p.deriv_y().scale(scale_p))
        .scale(-1.0)
        .add(&laplacian(&uy).add(&divu.deriv_y().scale(third)).scale(mu));
    let dmz = cz
        .add(&p.deriv_z().scale(scale_p))
        .scale(-1.0)
        .add(&laplacian(&uz).add(&divu.deriv_z().scale(third)).scale(mu));

    Ok(Tendency { drho, dmomentum: VectorField3::new(dmx, dmy, dmz)? })
}

/// Largest dt accepted by `step` for this state.
pub fn cfl_limit(state: &FluidState3, params: &Params) -> f64 {
    let h = state.grid().horizontal().spacing();
    let a = params.law().sound_speed();
    params.cfl() * params.eps() * h / (a + state.max_speed())
}

/// Explicit stability limit of the fastest vertical acoustic mode; infinite
/// when only the constant vertical mode is present.
pub fn vertical_stability_limit(grid: &SlabGrid, params: &Params) -> f64 {
    let m_top = grid.vertical_modes() - 1;
    if m_top == 0 {
        return f64::INFINITY;
    }
    let lambda = grid.vertical_wavenumber(m_top);
    RK4_IMAGINARY_REACH * params.eps() / (params.law().sound_speed() * lambda)
}

/// One RK4 step; refuses dt above the acoustic CFL limit and propagates
/// vacuum-proximity aborts from the stage evaluations.
pub fn step(state: &FluidState3, dt: f64, params: &Params) -> Result<FluidState3> {
    if !(dt > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    let limit = cfl_limit(state, params);
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }

    let k1 = rhs(state, params)?;
    let s2 = FluidState3::assemble(
        state.rho.add(&k1.drho.scale(0.5 * dt)),
        state.momentum.add(&k1.dmomentum.scale(0.5 * dt)),
        state.time + 0.5 * dt,
    );
    let k2 = rhs(&s2, params)?;
    let s3 = FluidState3::assemble(
        state.rho.add(&k2.drho.scale(0.5 * dt)),
        state.momentum.add(&k2.dmomentum.scale(0.5 * dt)),
        state.time + 0.5 * dt,
    );
    let k3 = rhs(&s3, params)?;
    let s4 = FluidState3::assemble(
        state.rho.add(&k3.drho.scale(dt)),
        state.momentum.add(&k3.dmomentum.scale(dt)),
        state.time + dt,
    );
    let k4 = rhs(&s4, params)?;

    let sixth = dt / 6.0;
    let third = dt / 3.0;
    let rho = state
        .rho
        .add(&k1.drho.scale(sixth))
        .add(&k2.drho.scale(third))
        .add(&k3.drho.scale(third))
        .add(&k4.drho.scale(sixth));
    let momentum = state
        .momentum
        .add(&k1.dmomentum.scale(sixth))
        .add(&k2.dmomentum.scale(third))
        .add(&k3.dmomentum.scale(third))
        .add(&k4.dmomentum.scale(sixth));
    let min = rho.min();
    if min <= VACUUM_FLOOR {
        return Err(Error::VacuumProximity { min, floor: VACUUM_FLOOR });
    }
    Ok(FluidState3::assemble(rho, momentum, state.time + dt))
}

/// (1/delta) integral of (1/2) rho |u|^2 + E(rho,1)/eps^2.
pub fn energy_total(state: &FluidState3, params: &Params) -> f64 {
    let u = state.velocity();
    let kinetic = state.rho.mul(&u.magnitude_sq()).scale(0.5);
    let law = *params.law();
    let internal = state
        .rho
        .map(|r| law.rel_entropy(r, 1.0).expect("positive density"));
    kinetic.add(&internal.scale(1.0 / (params.eps() * params.eps()))).slab_integral()
}

/// mu * (1/delta) integral of S(grad u) : grad u, nonnegative.
pub fn dissipation(state: &FluidState3, params: &Params) -> f64 {
    let u = state.velocity();
    params.mu() * strain_density(&u).slab_integral()
}

/// Pointwise S(grad u) : grad u = 2|D|^2 - (2/3)(tr D)^2, D the symmetric
/// gradient.  Nonnegative because the deviatoric and trace parts split.
pub(crate) fn strain_density(u: &VectorField3) -> ScalarField3 {
    let dxx = u.x().deriv_x();
    let dxy = u.x().deriv_y();
    let dxz = u.x().deriv_z();
    let dyx = u.y().deriv_x();
    let dyy = u.y().deriv_y();
    let dyz = u.y().deriv_z();
    let dzx = u.z().deriv_x();
    let dzy = u.z().deriv_y();
    let dzz = u.z().deriv_z();

    // S : grad u = 2|D|^2 - (2/3)(tr D)^2 with D the symmetric part
    let sym_sq = |a: &ScalarField3, b: &ScalarField3| {
        let s = a.add(b).scale(0.5);
        s.mul(&s)
    };
    let mut total = dxx.mul(&dxx).add(&dyy.mul(&dyy)).add(&dzz.mul(&dzz));
    total = total.add(&sym_sq(&dxy, &dyx).scale(2.0));
    total = total.add(&sym_sq(&dxz, &dzx).scale(2.0));
    total = total.add(&sym_sq(&dyz, &dzy).scale(2.0));
    let div = dxx.add(&dyy).add(&dzz);
    total.scale(2.0).sub(&div.mul(&div).scale(2.0 / 3.0))
}

#[derive(Debug, Clone)]
pub struct IllPreparedData {
    rho1: ScalarField3,
    u0: VectorField3,
}

impl IllPreparedData {
    pub fn new(rho1: ScalarField3, u0: VectorField3) -> Result<Self> {
        if rho1.parity() != Parity::Even {
            return Err(Error::invalid("density perturbation must use the cosine basis"));
        }
        rho1.grid().same(&u0.grid())?;
        Ok(IllPreparedData { rho1, u0 })
    }

    pub fn rho1(&self) -> &ScalarField3 {
        &self.rho1
    }

    pub fn u0(&self) -> &VectorField3 {
        &self.u0
    }
}

/// Norms of the vertically averaged data, recorded in run manifests.
#[derive(Debug, Clone, Copy)]
pub struct DataReport {
    pub avg_density_l1: f64,
    pub avg_density_l2: f64,
    pub avg_density_sup: f64,
    pub avg_velocity_l1: f64,
    pub avg_velocity_l2: f64,
    pub avg_velocity_sup: f64,
}

/// Build the state with rho_0 = 1 + eps * rho1 and m_0 = rho_0 u_0.
pub fn init_illprepared(data: &IllPreparedData, params: &Params) -> Result<(FluidState3, DataReport)> {
    let eps = params.eps();
    let rho = data.rho1.scale(eps).map(|v| 1.0 + v);
    let min = rho.min();
    if !(min > 0.0) {
        return Err(Error::invalid(format!(
            "1 + eps * perturbation must stay positive; min {min:.3e} at eps {eps}"
        )));
    }
    let mx = rho.mul(data.u0.x());
    let my = rho.mul(data.u0.y());
    let mz = rho.mul(data.u0.z());
    let state = FluidState3::new(rho, VectorField3::new(mx, my, mz)?, 0.0)?;

    let avg_rho = data.rho1.vertical_average();
    let avg_u = data.u0.vertical_average();
    let report = DataReport {
        avg_density_l1: norm_lp(&avg_rho, Exponent::finite(1.0)?),
        avg_density_l2: norm_lp(&avg_rho, Exponent::finite(2.0)?),
        avg_density_sup: norm_lp(&avg_rho, Exponent::Infinity),
        avg_velocity_l1: norm_lp_vector(&avg_u, Exponent::finite(1.0)?),
        avg_velocity_l2: norm_lp_vector(&avg_u, Exponent::finite(2.0)?),
        avg_velocity_sup: norm_lp_vector(&avg_u, Exponent::Infinity),
    };
    Ok((state, report))
}

/// Planar restriction of the same system, used to cross-check that
/// x3-independent slab data reduce exactly.  The viscous operator is the
/// slab one restricted to planar fields: laplace u + (1/3) grad div u.
#[derive(Debug, Clone)]
pub struct FluidState2 {
    pub rho: ScalarField2,
    pub mx: ScalarField2,
    pub my: ScalarField2,
    pub time: f64,
}

impl FluidState2 {
    pub fn new(rho: ScalarField2, mx: ScalarField2, my: ScalarField2, time: f64) -> Result<Self> {
        rho.grid().same(&mx.grid())?;
        rho.grid().same(&my.grid())?;
        let min = rho.min();
        if !(min > 0.0) {
            return Err(Error::invalid(format!("density must be positive; min {min:.3e}")));
        }
        Ok(FluidState2 { rho, mx, my, time })
    }

    pub fn velocity(&self) -> VectorField2 {
        VectorField2::new(
            self.mx.zip_with(&self.rho, |m, r| m / r),
            self.my.zip_with(&self.rho, |m, r| m / r),
        )
        .expect("same grid")
    }
}

fn dl(f: &ScalarField2) -> ScalarField2 {
    let mut s = f.to_spectral();
    s.dealias();
    s.to_physical()
}

fn rhs2(state: &FluidState2, params: &Params) -> Result<(ScalarField2, ScalarField2, ScalarField2)> {
    let min = state.rho.min();
    if min <= VACUUM_FLOOR {
        return Err(Error::VacuumProximity { min, floor: VACUUM_FLOOR });
    }
    let grid = state.rho.grid();
    let u = state.velocity();
    let ux = dl(u.x());
    let uy = dl(u.y());

    let dx = |f: &ScalarField2| f.to_spectral().derivative(1, 0).to_physical();
    let dy = |f: &ScalarField2| f.to_spectral().derivative(0, 1).to_physical();

    let drho = dx(&state.mx).add(&dy(&state.my)).scale(-1.0);

    let convect = |mi: &ScalarField2| dx(&dl(&ux.mul(mi))).add(&dy(&dl(&uy.mul(mi))));
    let law = params.law();
    let p = dl(&state.rho.map(|r| law.pressure(r)));
    let scale_p = 1.0 / (params.eps() * params.eps());
    let divu = dl(&dx(&ux).add(&dy(&uy)));
    let mu = params.mu();
    let third = 1.0 / 3.0;

    let lap = |f: &ScalarField2| f.laplace_h();
    let dmx = convect(&state.mx)
        .add(&dx(&p).scale(scale_p))
        .scale(-1.0)
        .add(&lap(&ux).add(&dx(&divu).scale(third)).scale(mu));
    let dmy = convect(&state.my)
        .add(&dy(&p).scale(scale_p))
        .scale(-1.0)
        .add(&lap(&uy).add(&dy(&divu).scale(third)).scale(mu));
    let _ = grid;
    Ok((drho, dmx, dmy))
}

pub fn step2(state: &FluidState2, dt: f64, params: &Params) -> Result<FluidState2> {
    if !(dt > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    let h = state.rho.grid().spacing();
    let a = params.law().sound_speed();
    let umax = state.velocity().max_abs();
    let limit = params.cfl() * params.eps() * h / (a + umax);
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let lin = |s: &FluidState2, k: &(ScalarField2, ScalarField2, ScalarField2), w: f64| FluidState2 {
        rho: s.rho.add(&k.0.scale(w)),
        mx: s.mx.add(&k.1.scale(w)),
        my: s.my.add(&k.2.scale(w)),
        time: s.time + w,
    };
    let k1 = rhs2(state, params)?;
    let k2 = rhs2(&lin(state, &k1, 0.5 * dt), params)?;
    let k3 = rhs2(&lin(state, &k2, 0.5 * dt), params)?;
    let k4 = rhs2(&lin(state, &k3, dt), params)?;
    let rho = state
        .rho
        .add(&k1.0.scale(dt / 6.0))
        .add(&k2.0.scale(dt / 3.0))
        .add(&k3.0.scale(dt / 3.0))
        .add(&k4.0.scale(dt / 6.0));
    let mx = state
        .mx
        .add(&k1.1.scale(dt / 6.0))
        .add(&k2.1.scale(dt / 3.0))
        .add(&k3.1.scale(dt / 3.0))
        .add(&k4.1.scale(dt / 6.0));
    let my = state
        .my
        .add(&k1.2.scale(dt / 6.0))
        .add(&k2.2.scale(dt / 3.0))
        .add(&k3.2.scale(dt / 3.0))
        .add(&k4.2.scale(dt / 6.0));
    let min = rho.min();
    if min <= VACUUM_FLOOR {
        return Err(Error::VacuumProximity { min, floor: VACUUM_FLOOR });
    }
    Ok(FluidState2 { rho, mx, my, time: state.time + dt })
}
