//! Binary field snapshots.
//!
//! Layout (little-endian): magic `SDNS`, version `u32`, `d` as `u32`,
//! `n` as `u32`, `L` as `f64`, time as `f64`, then `d·n^d` complex
//! coefficients as `(re, im)` `f64` pairs, component-major and row-major
//! over the lattice.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid, SpectralField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SDNS";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut out: W, time: f64, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&grid.length().to_le_bytes())?;
    out.write_all(&time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(field.coeffs().len() * 16);
    for z in field.coeffs() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input
        .read_exact(&mut b)
        .map_err(|e| Error::Snapshot(format!("truncated header: {e}")))?;
    Ok(b)
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<(f64, SpectralField)> {
    let magic: [u8; 4] = read_array(&mut input)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let n = u32::from_le_bytes(read_array(&mut input)?) as usize;
    let length = f64::from_le_bytes(read_array(&mut input)?);
    let time = f64::from_le_bytes(read_array(&mut input)?);
    let grid = Grid::new(dim, n, length)?;
    let count = dim * grid.len();
    let mut raw = vec![0u8; count * 16];
    input
        .read_exact(&mut raw)
        .map_err(|e| Error::Snapshot(format!("truncated coefficients: {e}")))?;
    let coeffs = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((time, SpectralField::from_coeffs(grid, coeffs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random::{random_field, FieldSpectrum};
    use rand::SeedableRng;

    #[test]
    fn header_layout_is_fixed() {
        let grid = Grid::periodic(2, 8).unwrap();
        let v = SpectralField::zeros(grid);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, 1.5, &v).unwrap();
        assert_eq!(&bytes[..4], b"SDNS");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), grid.length());
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 1.5);
        assert_eq!(bytes.len(), 32 + 2 * 64 * 16);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = Grid::periodic(3, 8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let v = random_field(&grid, &mut rng, &FieldSpectrum::default());
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, 0.25, &v).unwrap();
        let (t, w) = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(t, 0.25);
        assert_eq!(w, v);
        assert!(read_snapshot(&bytes[..40]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_snapshot(bad.as_slice()).is_err());
    }
}
