//! Uniform periodic lattices, their conjugate momentum lattices and the
//! discrete Fourier pair with the continuum `1/sqrt(2 pi hbar)` convention.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest lattice accepted by [`Grid1D::new`].
pub const MIN_POINTS: usize = 64;
/// Smallest transverse axis accepted by [`Grid1D::axis`].
pub const MIN_AXIS_POINTS: usize = 8;

/// Serializable description of a symmetric 1D lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n_points: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_points: 32768, half_width: 64.0 }
    }
}

impl GridSpec {
    pub fn build<T: Real>(&self) -> Result<Grid1D<T>> {
        if !(self.half_width > 0.0) {
            return Err(Error::config("grid.half_width", "must be > 0"));
        }
        Grid1D::symmetric(self.n_points, T::lit(self.half_width))
    }
}

/// Uniform periodic lattice `z_j = z_min + j dz`, `dz = (z_max - z_min) / n`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D<T> {
    n_points: usize,
    z_min: T,
    z_max: T,
}

impl<T: fmt::Debug> fmt::Debug for Grid1D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid1D({} pts, [{:?}, {:?}))", self.n_points, self.z_min, self.z_max)
    }
}

impl<T: Real> Grid1D<T> {
    pub fn new(n_points: usize, z_min: T, z_max: T) -> Result<Self> {
        Self::with_min(n_points, z_min, z_max, MIN_POINTS)
    }

    /// Transverse axis of a 3D lattice, where coarser sampling is allowed.
    pub fn axis(n_points: usize, half_width: T) -> Result<Self> {
        Self::with_min(n_points, -half_width, half_width, MIN_AXIS_POINTS)
    }

    fn with_min(n_points: usize, z_min: T, z_max: T, min: usize) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < min {
            return Err(Error::config("grid.n_points", format!("{n_points} is not a power of two >= {min}")));
        }
        if !(z_max > z_min) || !z_min.is_finite() || !z_max.is_finite() {
            return Err(Error::config("grid.z_max", format!("degenerate interval [{z_min}, {z_max}]")));
        }
        Ok(Grid1D { n_points, z_min, z_max })
    }

    /// Symmetric window `[-half_width, half_width)`.
    pub fn symmetric(n_points: usize, half_width: T) -> Result<Self> {
        Self::new(n_points, -half_width, half_width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn z_min(&self) -> T {
        self.z_min
    }

    pub fn z_max(&self) -> T {
        self.z_max
    }

    pub fn length(&self) -> T {
        self.z_max - self.z_min
    }

    #[inline]
    pub fn dz(&self) -> T {
        self.length() / T::from_usize_lossy(self.n_points)
    }

    #[inline]
    pub fn z(&self, i: usize) -> T {
        self.z_min + T::from_usize_lossy(i) * self.dz()
    }

    pub fn positions(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.z(i)).collect()
    }

    /// Momentum lattice spacing `2 pi / (n dz)`.
    pub fn dp(&self) -> T {
        T::TAU() / self.length()
    }

    /// Largest representable momentum magnitude `pi / dz`.
    pub fn p_max(&self) -> T {
        T::PI() / self.dz()
    }

    /// Momentum of FFT bin `k` (FFT ordering: non-negative first).
    #[inline]
    pub fn p_fft(&self, k: usize) -> T {
        let n = self.n_points;
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        T::lit(signed) * self.dp()
    }

    /// Momenta in FFT bin order.
    pub fn momenta_fft(&self) -> Vec<T> {
        (0..self.n_points).map(|k| self.p_fft(k)).collect()
    }

    /// Momenta in increasing order, spanning `[-pi/dz, pi/dz)`.
    pub fn momenta_sorted(&self) -> Vec<T> {
        let n = self.n_points;
        (0..n).map(|j| T::lit(j as f64 - (n / 2) as f64) * self.dp()).collect()
    }

    /// Index of the lattice point closest to `z` (clamped to the lattice).
    pub fn nearest_index(&self, z: T) -> usize {
        let x = ((z - self.z_min) / self.dz()).round().to_f64_lossy();
        x.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// True when `z` coincides with a lattice point to rounding accuracy.
    pub fn is_on_lattice(&self, z: T) -> bool {
        let x = ((z - self.z_min) / self.dz()).to_f64_lossy();
        (x - x.round()).abs() < 1e-9 && x >= 0.0 && x < self.n_points as f64
    }

    /// Centered sub-lattice with `n_points` points spaced `stride * dz`.
    pub fn centered_subgrid(&self, n_points: usize, stride: usize) -> Result<(Self, usize)> {
        let center = self.nearest_index(T::zero());
        let half = (n_points / 2) * stride;
        if stride == 0 || half > center || center + (n_points - n_points / 2) * stride > self.n_points {
            return Err(Error::config("subgrid", "sub-lattice does not fit inside the parent lattice"));
        }
        let first = center - half;
        let dz = self.dz() * T::from_usize_lossy(stride);
        let z_min = self.z(first);
        let grid = Grid1D::new(n_points, z_min, z_min + dz * T::from_usize_lossy(n_points))?;
        Ok((grid, first))
    }

    pub fn cast<U: Real>(&self) -> Grid1D<U> {
        Grid1D {
            n_points: self.n_points,
            z_min: U::lit(self.z_min.to_f64_lossy()),
            z_max: U::lit(self.z_max.to_f64_lossy()),
        }
    }
}

/// Reorder FFT-ordered data into increasing-momentum order.
pub fn fft_shift<V: Copy>(data: &[V]) -> Vec<V> {
    let n = data.len();
    let h = n / 2;
    data[h..].iter().chain(data[..h].iter()).copied().collect()
}

/// Inverse of [`fft_shift`].
pub fn ifft_shift<V: Copy>(data: &[V]) -> Vec<V> {
    let n = data.len();
    let h = n - n / 2;
    data[h..].iter().chain(data[..h].iter()).copied().collect()
}

/// Planned forward/inverse transforms for one lattice length.
///
/// The inverse is normalized, so `inverse(forward(x)) == x`.
#[derive(Clone)]
pub struct Spectral1D<T: Real> {
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    n: usize,
}

impl<T: Real> fmt::Debug for Spectral1D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Spectral1D({})", self.n)
    }
}

impl<T: Real> Spectral1D<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Spectral1D { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward DFT (any multiple of `n` transforms consecutive blocks).
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.fwd.process(data);
    }

    /// Normalized inverse DFT.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.inv.process(data);
        let s = T::one() / T::from_usize_lossy(self.n);
        data.iter_mut().for_each(|c| *c = c.scale(s));
    }

    /// Apply a diagonal momentum-space multiplier (FFT ordering).
    pub fn apply_multiplier(&self, data: &mut [Complex<T>], mult: &[Complex<T>]) {
        self.forward(data);
        data.iter_mut().zip(mult).for_each(|(c, m)| *c = *c * m);
        self.inverse(data);
    }

    /// Same as [`Self::apply_multiplier`] for a real multiplier.
    pub fn apply_real_multiplier(&self, data: &mut [Complex<T>], mult: &[T]) {
        self.forward(data);
        data.iter_mut().zip(mult).for_each(|(c, m)| *c = c.scale(*m));
        self.inverse(data);
    }
}

/// Complex field on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    pub grid: Grid1D<T>,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> WaveFunction<T> {
    pub fn zeros(grid: Grid1D<T>) -> Self {
        WaveFunction { data: vec![Complex::new(T::zero(), T::zero()); grid.len()], grid }
    }

    pub fn from_data(grid: Grid1D<T>, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::config("wave_function", format!("{} samples for a {}-point grid", data.len(), grid.len())));
        }
        Ok(WaveFunction { grid, data })
    }

    pub fn from_fn(grid: Grid1D<T>, f: impl Fn(T) -> Complex<T>) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.z(i))).collect();
        WaveFunction { grid, data }
    }

    pub fn from_real_fn(grid: Grid1D<T>, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(grid, |z| Complex::new(f(z), T::zero()))
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `sum |phi_j|^2 dz`.
    pub fn norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()) * self.grid.dz()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Domain(format!("cannot normalize a field with norm {n}")));
        }
        let s = T::one() / n.sqrt();
        self.data.iter_mut().for_each(|c| *c = c.scale(s));
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `sum conj(self_j) other_j dz`.
    pub fn overlap(&self, other: &Self) -> Complex<T> {
        let s = self
            .data
            .iter()
            .zip(&other.data)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
        s.scale(self.grid.dz())
    }

    pub fn density(&self) -> Vec<T> {
        self.data.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn max_density(&self) -> T {
        self.data.iter().map(|c| c.norm_sqr()).fold(T::zero(), T::max)
    }

    pub fn real_part(&self) -> Vec<T> {
        self.data.iter().map(|c| c.re).collect()
    }

    pub fn max_imag(&self) -> T {
        self.data.iter().map(|c| c.im.abs()).fold(T::zero(), T::max)
    }

    /// L2 distance `sqrt(sum |a - b|^2 dz)`.
    pub fn l2_distance(&self, other: &Self) -> T {
        let s = self.data.iter().zip(&other.data).fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr());
        (s * self.grid.dz()).sqrt()
    }

    /// Norm of `phi(z) - phi(-z)` about the lattice point nearest `z = 0`.
    pub fn asymmetry(&self) -> T {
        let n = self.len();
        let c = self.grid.nearest_index(T::zero());
        let reach = c.min(n - 1 - c);
        let s = (1..=reach).fold(T::zero(), |acc, k| acc + (self.data[c + k] - self.data[c - k]).norm_sqr());
        (s * self.grid.dz()).sqrt()
    }

    /// Multiply by a global phase so that the sample of largest modulus is real and positive.
    pub fn fix_global_phase(&mut self) {
        let (mut best, mut arg) = (T::zero(), T::zero());
        for c in &self.data {
            let a = c.norm_sqr();
            if a > best {
                best = a;
                arg = c.arg();
            }
        }
        let rot = Complex::from_polar(T::one(), -arg);
        self.data.iter_mut().for_each(|c| *c = *c * rot);
    }

    /// Momentum representation, sorted by increasing `p`.
    pub fn to_momentum(&self, spectral: &Spectral1D<T>) -> MomentumWaveFunction<T> {
        let g = &self.grid;
        let mut buf = self.data.clone();
        spectral.forward(&mut buf);
        let scale = g.dz() / T::TAU().sqrt();
        for (k, c) in buf.iter_mut().enumerate() {
            let phase = Complex::from_polar(scale, -g.p_fft(k) * g.z_min());
            *c = *c * phase;
        }
        MomentumWaveFunction { grid: *g, values: fft_shift(&buf) }
    }

    /// Samples on a centered sub-lattice (see [`Grid1D::centered_subgrid`]).
    pub fn restrict(&self, n_points: usize, stride: usize) -> Result<Self> {
        let (grid, first) = self.grid.centered_subgrid(n_points, stride)?;
        let data = (0..n_points).map(|j| self.data[first + j * stride]).collect();
        Ok(WaveFunction { grid, data })
    }

    pub fn cast<U: Real>(&self) -> WaveFunction<U> {
        WaveFunction {
            grid: self.grid.cast(),
            data: self.data.iter().map(|c| Complex::new(U::lit(c.re.to_f64_lossy()), U::lit(c.im.to_f64_lossy()))).collect(),
        }
    }
}

/// Momentum amplitudes `phi~(p)` on the sorted conjugate lattice of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumWaveFunction<T> {
    /// Position lattice this representation is conjugate to.
    pub grid: Grid1D<T>,
    /// Amplitudes at [`Grid1D::momenta_sorted`].
    pub values: Vec<Complex<T>>,
}

impl<T: Real> MomentumWaveFunction<T> {
    pub fn momenta(&self) -> Vec<T> {
        self.grid.momenta_sorted()
    }

    pub fn density(&self) -> Vec<T> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `sum |phi~_k|^2 dp`.
    pub fn norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()) * self.grid.dp()
    }

    pub fn to_position(&self, spectral: &Spectral1D<T>) -> WaveFunction<T> {
        let g = &self.grid;
        let mut buf = ifft_shift(&self.values);
        let scale = T::TAU().sqrt() / g.dz();
        for (k, c) in buf.iter_mut().enumerate() {
            *c = *c * Complex::from_polar(scale, g.p_fft(k) * g.z_min());
        }
        spectral.inverse(&mut buf);
        WaveFunction { grid: *g, data: buf }
    }
}

/// Tensor product of three lattices; storage index `(ix * ny + iy) * nz + iz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3D<T> {
    pub x: Grid1D<T>,
    pub y: Grid1D<T>,
    pub z: Grid1D<T>,
}

impl<T: Real> Grid3D<T> {
    pub fn new(x: Grid1D<T>, y: Grid1D<T>, z: Grid1D<T>) -> Self {
        Grid3D { x, y, z }
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len() * self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.x.len(), self.y.len(), self.z.len())
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.y.len() + iy) * self.z.len() + iz
    }

    pub fn cell_volume(&self) -> T {
        self.x.dz() * self.y.dz() * self.z.dz()
    }

    /// Bytes needed for one complex field on this grid.
    pub fn field_bytes(&self) -> usize {
        self.len() * 2 * std::mem::size_of::<T>()
    }
}

/// Planned 3D transform built from three axis transforms.
#[derive(Debug, Clone)]
pub struct Spectral3D<T: Real> {
    shape: (usize, usize, usize),
    sx: Spectral1D<T>,
    sy: Spectral1D<T>,
    sz: Spectral1D<T>,
}

impl<T: Real> Spectral3D<T> {
    pub fn new(grid: &Grid3D<T>) -> Self {
        let (nx, ny, nz) = grid.shape();
        Spectral3D { shape: (nx, ny, nz), sx: Spectral1D::new(nx), sy: Spectral1D::new(ny), sz: Spectral1D::new(nz) }
    }

    /// Unnormalized forward transform over all three axes.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, false);
    }

    /// Normalized inverse transform.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, true);
        let s = T::one() / T::from_usize_lossy(data.len());
        data.iter_mut().for_each(|c| *c = c.scale(s));
    }

    fn transform(&self, data: &mut [Complex<T>], inverse: bool) {
        let (nx, ny, nz) = self.shape;
        let pick = |s: &Spectral1D<T>| if inverse { s.inv.clone() } else { s.fwd.clone() };
        let (fx, fy, fz) = (pick(&self.sx), pick(&self.sy), pick(&self.sz));
        // z lines are contiguous
        fz.process(data);
        // y: transpose each (ny x nz) slab to (nz x ny), transform rows, transpose back
        let mut slab = vec![Complex::new(T::zero(), T::zero()); ny.max(nx) * nz];
        for ix in 0..nx {
            let block = &mut data[ix * ny * nz..(ix + 1) * ny * nz];
            for iy in 0..ny {
                for iz in 0..nz {
                    slab[iz * ny + iy] = block[iy * nz + iz];
                }
            }
            fy.process(&mut slab[..ny * nz]);
            for iy in 0..ny {
                for iz in 0..nz {
                    block[iy * nz + iz] = slab[iz * ny + iy];
                }
            }
        }
        // x: for each y, gather the (nx x nz) plane
        for iy in 0..ny {
            for ix in 0..nx {
                let base = (ix * ny + iy) * nz;
                for iz in 0..nz {
                    slab[iz * nx + ix] = data[base + iz];
                }
            }
            fx.process(&mut slab[..nx * nz]);
            for ix in 0..nx {
                let base = (ix * ny + iy) * nz;
                for iz in 0..nz {
                    data[base + iz] = slab[iz * nx + ix];
                }
            }
        }
    }
}

/// Complex field on a [`Grid3D`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction3D<T> {
    pub grid: Grid3D<T>,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> WaveFunction3D<T> {
    pub fn zeros(grid: Grid3D<T>) -> Self {
        WaveFunction3D { data: vec![Complex::new(T::zero(), T::zero()); grid.len()], grid }
    }

    pub fn from_fn(grid: Grid3D<T>, f: impl Fn(T, T, T) -> Complex<T>) -> Self {
        let (nx, ny, nz) = grid.shape();
        let mut data = Vec::with_capacity(grid.len());
        for ix in 0..nx {
            let x = grid.x.z(ix);
            for iy in 0..ny {
                let y = grid.y.z(iy);
                for iz in 0..nz {
                    data.push(f(x, y, grid.z.z(iz)));
                }
            }
        }
        WaveFunction3D { grid, data }
    }

    pub fn norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()) * self.grid.cell_volume()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Domain(format!("cannot normalize a field with norm {n}")));
        }
        let s = T::one() / n.sqrt();
        self.data.iter_mut().for_each(|c| *c = c.scale(s));
        Ok(())
    }

    /// Transversely integrated density `P(z) = int dx dy |psi|^2`.
    pub fn z_marginal(&self) -> Vec<T> {
        let (_, _, nz) = self.grid.shape();
        let mut out = vec![T::zero(); nz];
        for line in self.data.chunks_exact(nz) {
            for (o, c) in out.iter_mut().zip(line) {
                *o = *o + c.norm_sqr();
            }
        }
        let a = self.grid.x.dz() * self.grid.y.dz();
        out.iter_mut().for_each(|o| *o = *o * a);
        out
    }
}
