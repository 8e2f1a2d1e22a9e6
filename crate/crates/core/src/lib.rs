//! Numerical laboratory for Mach-number scaling of barotropic flow on a
//! thin periodic slab with slip walls: a compressible 3D integrator, its
//! 2D incompressible targets, the linear acoustic subsystem, and the
//! averaging/energy diagnostics connecting them.

pub mod acoustics;
pub mod bump;
pub mod checkpoint;
pub mod cns3d;
pub mod diagnostics;
pub mod error;
pub mod field2;
pub mod field3;
pub mod grid;
pub mod limit2d;
pub mod norms;
pub mod synth;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
