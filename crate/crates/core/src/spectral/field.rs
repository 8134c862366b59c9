use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{fft, Grid};
use crate::error::{Error, Result};

/// Real vector field on a periodic grid, stored as Fourier coefficients.
///
/// `coeffs` is component-major: component `c` occupies
/// `coeffs[c * n^d .. (c + 1) * n^d]`, each block row-major over the lattice.
/// The physical field is `v(x) = Σ_k v̂(k) e^{ik·x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

/// Point values of a vector field, component-major like [`SpectralField`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.dim() * grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.dim() * grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients for {grid}, got {}",
                grid.dim() * grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Real single-mode field `a e^{ik·x} + conj(a) e^{-ik·x}`.
    pub fn single_mode(grid: Grid, lattice: [i64; 3], amplitude: [Complex64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        let flat = grid.flat_index(lattice);
        let mirror = grid.mirror(flat);
        for c in 0..grid.dim() {
            out.component_mut(c)[flat] += amplitude[c];
            out.component_mut(c)[mirror] += amplitude[c].conj();
        }
        out.zero_nyquist();
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Vector coefficient at one lattice point.
    pub fn mode(&self, flat: usize) -> [Complex64; 3] {
        let mut out = [Complex64::default(); 3];
        for (c, slot) in out.iter_mut().enumerate().take(self.dim()) {
            *slot = self.component(c)[flat];
        }
        out
    }

    pub fn set_mode(&mut self, flat: usize, value: [Complex64; 3]) {
        for (c, v) in value.iter().enumerate().take(self.dim()) {
            self.component_mut(c)[flat] = *v;
        }
    }

    pub(crate) fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.to_string(),
                right: other.grid.to_string(),
            });
        }
        Ok(())
    }

    /// The same trigonometric polynomial on another grid of equal dimension
    /// and side: shared modes are copied, the rest are zero.
    pub fn resample(&self, grid: Grid) -> Result<Self> {
        if grid.dim() != self.grid.dim() || grid.length() != self.grid.length() {
            return Err(Error::GridMismatch {
                left: self.grid.to_string(),
                right: grid.to_string(),
            });
        }
        let mut out = Self::zeros(grid);
        let half = (grid.n().min(self.grid.n()) / 2) as i64;
        for flat in 0..self.grid.len() {
            let lat = self.grid.lattice(flat);
            if lat[..grid.dim()].iter().all(|k| k.abs() < half) {
                out.set_mode(grid.flat_index(lat), self.mode(flat));
            }
        }
        Ok(out)
    }

    /// Multiply every mode by a real factor depending on the flat index,
    /// then clear the Nyquist rows.
    pub fn map_modes(&self, factor: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        out.scale_modes(factor);
        out
    }

    pub fn scale_modes(&mut self, factor: impl Fn(usize) -> f64) {
        let len = self.grid.len();
        let factors: Vec<f64> = (0..len).map(&factor).collect();
        for c in 0..self.dim() {
            for (value, f) in self.component_mut(c).iter_mut().zip(&factors) {
                *value *= *f;
            }
        }
        self.zero_nyquist();
    }

    pub fn zero_nyquist(&mut self) {
        let grid = self.grid;
        let len = grid.len();
        let n = grid.n();
        let half = n / 2;
        for flat in 0..len {
            // cheap test on raw indices instead of signed lattice
            let mut rem = flat;
            let mut nyq = false;
            for _ in 0..grid.dim() {
                if rem % n == half {
                    nyq = true;
                    break;
                }
                rem /= n;
            }
            if nyq {
                for c in 0..grid.dim() {
                    self.coeffs[c * len + flat] = Complex64::default();
                }
            }
        }
    }

    /// Largest `|v̂(-k) - conj v̂(k)|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let len = self.grid.len();
        let mut worst: f64 = 0.0;
        for c in 0..self.dim() {
            let comp = self.component(c);
            for flat in 0..len {
                let m = self.grid.mirror(flat);
                worst = worst.max((comp[m] - comp[flat].conj()).norm());
            }
        }
        worst / scale
    }

    /// Project onto Hermitian-symmetric coefficients (the real part in
    /// physical space) and clear the Nyquist rows.
    pub fn enforce_hermitian(&mut self) {
        let len = self.grid.len();
        let mirrors: Vec<usize> = (0..len).map(|f| self.grid.mirror(f)).collect();
        for c in 0..self.dim() {
            let comp = self.component(c).to_vec();
            let out = self.component_mut(c);
            for flat in 0..len {
                out[flat] = 0.5 * (comp[flat] + comp[mirrors[flat]].conj());
            }
        }
        self.zero_nyquist();
    }

    /// Largest `|k·v̂(k)| / |v̂(k)|` over nonzero modes.
    pub fn max_divergence_ratio(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for flat in 1..self.grid.len() {
            let v = self.mode(flat);
            let mag = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if mag == 0.0 {
                continue;
            }
            let k = self.grid.wavevector(flat);
            let div: Complex64 = (0..self.dim()).map(|c| v[c] * k[c]).sum();
            worst = worst.max(div.norm() / mag);
        }
        worst
    }

    pub fn is_divergence_free(&self) -> bool {
        self.max_divergence_ratio() <= 1e-10
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert_eq!(self.grid, x.grid);
        for (y, xv) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += a * *xv;
        }
    }

    pub fn to_physical(&self) -> PhysicalField {
        let spectra: Vec<&[Complex64]> = (0..self.dim()).map(|c| self.component(c)).collect();
        let values = synthesize_real(&self.grid, &spectra).concat();
        PhysicalField {
            grid: self.grid,
            values,
        }
    }

    pub fn from_physical(field: &PhysicalField) -> Self {
        let grid = field.grid;
        let comps: Vec<&[f64]> = (0..grid.dim()).map(|c| field.component(c)).collect();
        let coeffs = analyze_real(&grid, &comps).concat();
        let mut out = Self { grid, coeffs };
        out.zero_nyquist();
        out
    }
}

/// Inverse transforms of Hermitian spectra, two per complex FFT.
pub(crate) fn synthesize_real(grid: &Grid, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let len = grid.len();
    let mut out = Vec::with_capacity(spectra.len());
    let mut buf = vec![Complex64::default(); len];
    let i = Complex64::new(0.0, 1.0);
    for pair in spectra.chunks(2) {
        match pair {
            [a, b] => {
                for ((slot, x), y) in buf.iter_mut().zip(a.iter()).zip(b.iter()) {
                    *slot = x + i * y;
                }
                fft::inverse(grid, &mut buf);
                out.push(buf.iter().map(|z| z.re).collect());
                out.push(buf.iter().map(|z| z.im).collect());
            }
            [a] => {
                buf.copy_from_slice(a);
                fft::inverse(grid, &mut buf);
                out.push(buf.iter().map(|z| z.re).collect());
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Forward transforms of real fields, two per complex FFT, normalized by `1/n^d`.
pub(crate) fn analyze_real(grid: &Grid, values: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let len = grid.len();
    let mut out = Vec::with_capacity(values.len());
    let mut buf = vec![Complex64::default(); len];
    let mirrors: Vec<usize> = (0..len).map(|f| grid.mirror(f)).collect();
    for pair in values.chunks(2) {
        match pair {
            [a, b] => {
                for ((slot, x), y) in buf.iter_mut().zip(a.iter()).zip(b.iter()) {
                    *slot = Complex64::new(*x, *y);
                }
                fft::forward(grid, &mut buf);
                let mut fa = vec![Complex64::default(); len];
                let mut fb = vec![Complex64::default(); len];
                for k in 0..len {
                    let f = buf[k];
                    let g = buf[mirrors[k]].conj();
                    fa[k] = 0.5 * (f + g);
                    fb[k] = Complex64::new(0.0, -0.5) * (f - g);
                }
                out.push(fa);
                out.push(fb);
            }
            [a] => {
                for (slot, x) in buf.iter_mut().zip(a.iter()) {
                    *slot = Complex64::new(*x, 0.0);
                }
                fft::forward(grid, &mut buf);
                out.push(buf.clone());
            }
            _ => unreachable!(),
        }
    }
    out
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.dim() * grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.dim() * grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for {grid}, got {}",
                grid.dim() * grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += *b;
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        let mut out = rhs.clone();
        for z in out.coeffs.iter_mut() {
            *z *= self;
        }
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        -1.0 * self
    }
}
