//! Bit-exact binary snapshots of solver states.  Floats travel as raw IEEE
//! bits in little-endian order, so a save/load round trip reproduces the
//! state exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array2, Array3};

use crate::cns3d::{FluidState3, Params};
use crate::error::{Error, Result};
use crate::field2::{ScalarField2, VectorField2};
use crate::field3::{ScalarField3, VectorField3};
use crate::grid::{Parity, SlabGrid, Torus2};
use crate::limit2d::LimitState2;
use crate::thermo::GasLaw;

const MAGIC: u32 = 0x534c_4142; // "SLAB"
const VERSION: u32 = 1;
const KIND_SLAB: u8 = 1;
const KIND_PLANAR: u8 = 2;

fn write_field3<W: Write>(w: &mut W, f: &ScalarField3) -> Result<()> {
    for &v in f.values().iter() {
        w.write_u64::<LittleEndian>(v.to_bits())?;
    }
    Ok(())
}

fn read_field3<R: Read>(r: &mut R, grid: SlabGrid, parity: Parity) -> Result<ScalarField3> {
    let n = grid.horizontal().modes();
    let mut values = Array3::zeros((grid.levels(), n, n));
    for v in values.iter_mut() {
        *v = f64::from_bits(r.read_u64::<LittleEndian>()?);
    }
    ScalarField3::from_values(grid, parity, values)
}

fn write_field2<W: Write>(w: &mut W, f: &ScalarField2) -> Result<()> {
    for &v in f.values().iter() {
        w.write_u64::<LittleEndian>(v.to_bits())?;
    }
    Ok(())
}

fn read_field2<R: Read>(r: &mut R, grid: Torus2) -> Result<ScalarField2> {
    let n = grid.modes();
    let mut values = Array2::zeros((n, n));
    for v in values.iter_mut() {
        *v = f64::from_bits(r.read_u64::<LittleEndian>()?);
    }
    ScalarField2::from_values(grid, values)
}

fn write_header<W: Write>(w: &mut W, kind: u8) -> Result<()> {
    w.write_u32::<LittleEndian>(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u8(kind)?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<u8> {
    let magic = r.read_u32::<LittleEndian>()?;
    if magic != MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:#x}")));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    Ok(r.read_u8()?)
}

pub fn save_state3(path: &Path, state: &FluidState3, params: &Params) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, KIND_SLAB)?;
    let grid = state.grid();
    let h = grid.horizontal();
    w.write_f64::<LittleEndian>(h.length())?;
    w.write_u64::<LittleEndian>(h.modes() as u64)?;
    w.write_f64::<LittleEndian>(grid.thickness())?;
    w.write_u64::<LittleEndian>(grid.vertical_modes() as u64)?;
    for v in [
        params.eps(),
        params.delta(),
        params.mu(),
        params.law().coefficient(),
        params.law().gamma(),
        params.cfl(),
        state.time(),
    ] {
        w.write_u64::<LittleEndian>(v.to_bits())?;
    }
    write_field3(&mut w, state.rho())?;
    write_field3(&mut w, state.momentum().x())?;
    write_field3(&mut w, state.momentum().y())?;
    write_field3(&mut w, state.momentum().z())?;
    w.flush()?;
    Ok(())
}

pub fn load_state3(path: &Path) -> Result<(FluidState3, Params)> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    if read_header(&mut r)? != KIND_SLAB {
        return Err(Error::Checkpoint("not a slab-state checkpoint".into()));
    }
    let length = r.read_f64::<LittleEndian>()?;
    let modes = r.read_u64::<LittleEndian>()? as usize;
    let thickness = r.read_f64::<LittleEndian>()?;
    let vmodes = r.read_u64::<LittleEndian>()? as usize;
    let grid = SlabGrid::new(Torus2::new(length, modes)?, thickness, vmodes)?;
    let mut scalars = [0.0f64; 7];
    for v in scalars.iter_mut() {
        *v = f64::from_bits(r.read_u64::<LittleEndian>()?);
    }
    let [eps, delta, mu, coeff, gamma, cfl, time] = scalars;
    let params = Params::new(eps, delta, mu, GasLaw::new(coeff, gamma)?)?.with_cfl(cfl)?;
    let rho = read_field3(&mut r, grid, Parity::Even)?;
    let mx = read_field3(&mut r, grid, Parity::Even)?;
    let my = read_field3(&mut r, grid, Parity::Even)?;
    let mz = read_field3(&mut r, grid, Parity::Odd)?;
    let state = FluidState3::new(rho, VectorField3::new(mx, my, mz)?, time)?;
    Ok((state, params))
}

pub fn save_state2(path: &Path, state: &LimitState2) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, KIND_PLANAR)?;
    let grid = state.grid();
    w.write_f64::<LittleEndian>(grid.length())?;
    w.write_u64::<LittleEndian>(grid.modes() as u64)?;
    w.write_u64::<LittleEndian>(state.time().to_bits())?;
    write_field2(&mut w, state.velocity().x())?;
    write_field2(&mut w, state.velocity().y())?;
    w.flush()?;
    Ok(())
}

pub fn load_state2(path: &Path) -> Result<LimitState2> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    if read_header(&mut r)? != KIND_PLANAR {
        return Err(Error::Checkpoint("not a planar-state checkpoint".into()));
    }
    let length = r.read_f64::<LittleEndian>()?;
    let modes = r.read_u64::<LittleEndian>()? as usize;
    let time = f64::from_bits(r.read_u64::<LittleEndian>()?);
    let grid = Torus2::new(length, modes)?;
    let vx = read_field2(&mut r, grid)?;
    let vy = read_field2(&mut r, grid)?;
    LimitState2::new(VectorField2::new(vx, vy)?, time)
}
