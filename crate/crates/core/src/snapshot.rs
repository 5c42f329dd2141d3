//! The `ANSF` binary snapshot format.
//!
//! Layout (little-endian): magic `ANSF`, `u32` version, `u32` n1 n2 n3,
//! `f64` L1 L2 L3, then for each component the coefficients as `(re, im)`
//! `f64` pairs. Modes run over ascending signed wavenumbers with `m3`
//! fastest, then `m2`, then `m1`. Scalar fields carry one component,
//! vector fields three.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"ANSF";
pub const VERSION: u32 = 1;

fn signed_modes(n: usize) -> impl Iterator<Item = i64> {
    let lo = if n == 1 { 0 } else { -(n as i64 / 2) };
    lo..lo + n as i64
}

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

fn write_header(w: &mut impl Write, grid: &Grid) -> Result<()> {
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    for n in grid.n() {
        w.write_all(&(n as u32).to_le_bytes()).map_err(io_err)?;
    }
    for l in grid.lengths() {
        w.write_all(&l.to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

fn write_component(w: &mut impl Write, f: &SpectralField) -> Result<()> {
    let g = f.grid();
    let [n1, n2, n3] = g.n();
    let mut buf = Vec::with_capacity(16 * g.size());
    for m1 in signed_modes(n1) {
        for m2 in signed_modes(n2) {
            for m3 in signed_modes(n3) {
                let z = f.coeff([m1, m2, m3]);
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    w.write_all(&buf).map_err(io_err)
}

/// Write the components of a field sharing one grid.
pub fn write_components(w: &mut impl Write, comps: &[&SpectralField]) -> Result<()> {
    let Some(first) = comps.first() else {
        return Err(Error::Format("no components to write".into()));
    };
    let grid = *first.grid();
    if comps.iter().any(|c| *c.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    write_header(w, &grid)?;
    comps.iter().try_for_each(|c| write_component(w, c))
}

pub fn write_vector(w: &mut impl Write, v: &VectorField) -> Result<()> {
    let [a, b, c] = v.comps();
    write_components(w, &[a, b, c])
}

pub fn write_scalar(w: &mut impl Write, f: &SpectralField) -> Result<()> {
    write_components(w, &[f])
}

fn read_array<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let end = *at + N;
    let s = bytes.get(*at..end).ok_or_else(|| Error::Format("truncated header".into()))?;
    *at = end;
    Ok(s.try_into().unwrap())
}

/// Read every component stored in a snapshot.
pub fn read_components(r: &mut impl Read) -> Result<Vec<SpectralField>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err)?;
    let mut at = 0;
    if &read_array::<4>(&bytes, &mut at)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&bytes, &mut at)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut n = [0usize; 3];
    for ni in &mut n {
        *ni = u32::from_le_bytes(read_array(&bytes, &mut at)?) as usize;
    }
    let mut len = [0.0; 3];
    for li in &mut len {
        *li = f64::from_le_bytes(read_array(&bytes, &mut at)?);
    }
    let grid = Grid::with_lengths(n, len)?;
    let body = &bytes[at..];
    let per = 16 * grid.size();
    if body.is_empty() || body.len() % per != 0 {
        return Err(Error::Format(format!("payload of {} bytes is not a whole number of {per}-byte components", body.len())));
    }
    let mut out = Vec::new();
    for chunk in body.chunks_exact(per) {
        let mut f = SpectralField::zeros(grid);
        let mut vals = chunk.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
        for m1 in signed_modes(n[0]) {
            for m2 in signed_modes(n[1]) {
                for m3 in signed_modes(n[2]) {
                    let re = vals.next().unwrap();
                    let im = vals.next().unwrap();
                    f.set_coeff([m1, m2, m3], Complex64::new(re, im));
                }
            }
        }
        out.push(f);
    }
    Ok(out)
}

pub fn read_vector(r: &mut impl Read) -> Result<VectorField> {
    let comps = read_components(r)?;
    if comps.len() != 3 {
        return Err(Error::Format(format!("expected 3 components, found {}", comps.len())));
    }
    let mut it = comps.into_iter();
    VectorField::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
}

pub fn read_scalar(r: &mut impl Read) -> Result<SpectralField> {
    let mut comps = read_components(r)?;
    if comps.len() != 1 {
        return Err(Error::Format(format!("expected 1 component, found {}", comps.len())));
    }
    Ok(comps.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_of_a_single_mode() {
        let g = Grid::new(8, 8, 8).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_coeff([-4, -4, -3], Complex64::new(1.5, -2.0));
        let mut buf = Vec::new();
        write_scalar(&mut buf, &f).unwrap();
        assert_eq!(&buf[..4], b"ANSF");
        assert_eq!(buf.len(), 4 + 4 + 12 + 24 + 16 * 512);
        // (m1, m2, m3) = (-4, -4, -3) is the second entry.
        let at = 44 + 16;
        assert_eq!(f64::from_le_bytes(buf[at..at + 8].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(buf[at + 8..at + 16].try_into().unwrap()), -2.0);
        let back = read_scalar(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid::planar(8, 8).unwrap();
        let f = SpectralField::zeros(g);
        let mut buf = Vec::new();
        write_scalar(&mut buf, &f).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_scalar(&mut bad.as_slice()).is_err());
        assert!(read_scalar(&mut &buf[..buf.len() - 1]).is_err());
        assert!(read_vector(&mut buf.as_slice()).is_err());
    }
}
