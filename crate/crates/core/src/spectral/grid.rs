use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Periodic box `[0, L)^d` sampled with `n` points per axis.
///
/// Lattice indices follow FFT ordering: index `i < n/2` is wavenumber `i`,
/// index `i >= n/2` is `i - n`. The index `n/2` is the Nyquist row and is
/// kept at zero by every operation in this crate.
#[derive(Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid(d={}, n={}, L={})", self.dim, self.n, self.length)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} n={} L={}", self.dim, self.n, self.length)
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n must be even and >= 8, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        Ok(Self { dim, n, length })
    }

    /// The `2π`-periodic box, on which wavenumbers are integers.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Torus volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    /// Spacing of the wavenumber lattice, `2π/L`.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed integer wavenumber for an FFT index along one axis.
    #[inline]
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// FFT index of a signed wavenumber along one axis.
    #[inline]
    pub fn wrap_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Integer lattice coordinates of a flat index (trailing axes zero for d=2).
    #[inline]
    pub fn lattice(&self, flat: usize) -> [i64; 3] {
        let n = self.n;
        let mut out = [0i64; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = self.signed_index(rem % n);
            rem /= n;
        }
        out
    }

    #[inline]
    pub fn flat_index(&self, lattice: [i64; 3]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.n + self.wrap_index(lattice[axis]))
    }

    /// Physical wavevector `k = (2π/L) · lattice`.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let lat = self.lattice(flat);
        let s = self.k_unit();
        [lat[0] as f64 * s, lat[1] as f64 * s, lat[2] as f64 * s]
    }

    #[inline]
    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// True when any axis sits on the Nyquist row.
    #[inline]
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = -(self.n as i64 / 2);
        self.lattice(flat)[..self.dim].iter().any(|&k| k == half)
    }

    /// Flat index of `-k`.
    #[inline]
    pub fn mirror(&self, flat: usize) -> usize {
        let lat = self.lattice(flat);
        self.flat_index([-lat[0], -lat[1], -lat[2]])
    }

    /// Table of `|k|^2` for every flat index.
    pub fn k_squared_table(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.k_squared(i)).collect()
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let h = self.length / self.n as f64;
        let mut out = [0.0; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = (rem % self.n) as f64 * h;
            rem /= self.n;
        }
        out
    }

    /// Same box and dimension, different resolution.
    pub fn refined(&self, n: usize) -> Result<Self> {
        Self::new(self.dim, n, self.length)
    }
}
