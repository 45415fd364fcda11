//! Wigner quasi-probability on the lattice phase space.
//!
//! The field is first interpolated spectrally to half the lattice spacing so
//! that `phi(z +- y/2)` is available at every `y = j dz`; the momentum axis
//! is then the ordinary conjugate lattice of the input grid.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{fft_shift, Spectral1D, WaveFunction};
use crate::scalar::Real;

/// `W(z_i, p_k)` stored row-major (one row per `z`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub z: Vec<f64>,
    /// Increasing momenta.
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    pub dz: f64,
    pub dp: f64,
    /// Largest discarded imaginary part.
    pub max_imag: f64,
}

impl WignerGrid {
    pub fn n_z(&self) -> usize {
        self.z.len()
    }

    pub fn n_p(&self) -> usize {
        self.p.len()
    }

    #[inline]
    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.p.len() + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.p.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `sum W dz dp`.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dz * self.dp
    }

    /// `2 pi sum W^2 dz dp`, equal to one for pure states.
    pub fn purity(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.values.iter().map(|w| w * w).sum::<f64>() * self.dz * self.dp
    }

    /// `int |min(W, 0)| dz dp`.
    pub fn negativity_volume(&self) -> f64 {
        self.values.iter().map(|w| (-w).max(0.0)).sum::<f64>() * self.dz * self.dp
    }

    /// `int W dp` for every `z`.
    pub fn marginal_position(&self) -> Vec<f64> {
        (0..self.n_z()).map(|i| self.row(i).iter().sum::<f64>() * self.dp).collect()
    }

    /// `int W dz` for every `p`.
    pub fn marginal_momentum(&self) -> Vec<f64> {
        let np = self.n_p();
        let mut out = vec![0.0; np];
        for i in 0..self.n_z() {
            for (o, w) in out.iter_mut().zip(self.row(i)) {
                *o += w;
            }
        }
        out.iter_mut().for_each(|o| *o *= self.dz);
        out
    }

    /// Free-flight map `W(z - p t, p)`, linear interpolation along `z` on the
    /// periodic position lattice.
    pub fn sheared(&self, t: f64) -> WignerGrid {
        let (nz, np) = (self.n_z(), self.n_p());
        let period = nz as f64 * self.dz;
        let z0 = self.z[0];
        let mut values = vec![0.0; nz * np];
        for (k, &p) in self.p.iter().enumerate() {
            for i in 0..nz {
                let x = (self.z[i] - p * t - z0).rem_euclid(period) / self.dz;
                let j = x.floor() as usize % nz;
                let w = x - x.floor();
                values[i * np + k] = self.at(j, k) * (1.0 - w) + self.at((j + 1) % nz, k) * w;
            }
        }
        WignerGrid { values, ..self.clone() }
    }

    /// Keep every `stride`-th row and column.
    pub fn downsample(&self, stride_z: usize, stride_p: usize) -> WignerGrid {
        let (sz, sp) = (stride_z.max(1), stride_p.max(1));
        let z: Vec<f64> = self.z.iter().step_by(sz).cloned().collect();
        let p: Vec<f64> = self.p.iter().step_by(sp).cloned().collect();
        let mut values = Vec::with_capacity(z.len() * p.len());
        for i in (0..self.n_z()).step_by(sz) {
            values.extend(self.row(i).iter().step_by(sp));
        }
        WignerGrid { z, p, values, dz: self.dz * sz as f64, dp: self.dp * sp as f64, max_imag: self.max_imag }
    }
}

/// Band-limited interpolation of `phi` onto the lattice with half the spacing.
fn upsample<T: Real>(phi: &WaveFunction<T>) -> Vec<Complex<T>> {
    let n = phi.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut spec = phi.data.clone();
    Spectral1D::new(n).forward(&mut spec);
    let mut big = vec![zero; 2 * n];
    let h = n / 2;
    big[..h].copy_from_slice(&spec[..h]);
    big[n + h + 1..2 * n].copy_from_slice(&spec[h + 1..n]);
    // split the Nyquist bin symmetrically
    let half = T::lit(0.5);
    big[h] = spec[h].scale(half);
    big[2 * n - h] = spec[h].scale(half);
    Spectral1D::new(2 * n).inverse(&mut big);
    big.iter_mut().for_each(|c| *c = c.scale(T::lit(2.0)));
    big
}

/// `W(z, p) = (1/2 pi) int dy e^{i p y} phi*(z + y/2) phi(z - y/2)`.
pub fn wigner_transform<T: Real>(phi: &WaveFunction<T>) -> WignerGrid {
    let n = phi.len();
    let grid = phi.grid;
    let psi = upsample(phi);
    let m = 2 * n;
    let spectral = Spectral1D::<T>::new(n);
    let dz = grid.dz().to_f64_lossy();
    let scale = dz / (2.0 * std::f64::consts::PI);
    let h = n / 2;

    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut c = vec![Complex::new(T::zero(), T::zero()); n];
            // y_j = j dz for |j| < n/2; the unpaired j = -n/2 term is dropped
            for j in -(h as isize) + 1..h as isize {
                let a = (2 * i as isize + j).rem_euclid(m as isize) as usize;
                let b = (2 * i as isize - j).rem_euclid(m as isize) as usize;
                c[j.rem_euclid(n as isize) as usize] = psi[a].conj() * psi[b];
            }
            // sum_j c_j e^{+2 pi i j k / n}: the unnormalized inverse transform
            spectral.inverse(&mut c);
            let nf = T::from_usize_lossy(n);
            let mut imag = 0.0f64;
            let row: Vec<f64> = fft_shift(&c)
                .iter()
                .map(|v| {
                    let v = v.scale(nf);
                    imag = imag.max((v.im.to_f64_lossy() * scale).abs());
                    v.re.to_f64_lossy() * scale
                })
                .collect();
            (row, imag)
        })
        .collect();

    let mut values = Vec::with_capacity(n * n);
    let mut max_imag = 0.0f64;
    for (r, im) in rows {
        values.extend(r);
        max_imag = max_imag.max(im);
    }
    WignerGrid {
        z: grid.positions().iter().map(|z| z.to_f64_lossy()).collect(),
        p: grid.momenta_sorted().iter().map(|p| p.to_f64_lossy()).collect(),
        values,
        dz,
        dp: grid.dp().to_f64_lossy(),
        max_imag,
    }
}

/// Position-marginal convenience wrapper.
pub fn marginal_position(w: &WignerGrid) -> Vec<f64> {
    w.marginal_position()
}

pub fn marginal_momentum(w: &WignerGrid) -> Vec<f64> {
    w.marginal_momentum()
}

pub fn negativity_volume(w: &WignerGrid) -> f64 {
    w.negativity_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn oscillator(grid: Grid1D<f64>, excited: bool) -> WaveFunction<f64> {
        WaveFunction::from_real_fn(grid, |z| {
            let g = (-z * z / 2.0).exp();
            if excited {
                z * g
            } else {
                g
            }
        })
        .normalized()
        .unwrap()
    }

    #[test]
    fn coherent_state_is_gaussian_and_positive() {
        // wide enough that the kernel cut at |y| = 12 is below e^-36
        let grid = Grid1D::symmetric(256, 12.0).unwrap();
        let w = wigner_transform(&oscillator(grid, false));
        assert!(w.max_imag < 1e-10);
        let mut err = 0.0f64;
        for i in 0..w.n_z() {
            for k in 0..w.n_p() {
                let (z, p) = (w.z[i], w.p[k]);
                err = err.max((w.at(i, k) - (-z * z - p * p).exp() / PI).abs());
            }
        }
        assert!(err < 1e-10, "{err}");
        assert!(w.min() >= -1e-12);
        assert!(w.negativity_volume() < 1e-8);
        assert_relative_eq!(w.normalization(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(w.purity(), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn first_excited_state_is_negative_at_origin() {
        // W_1(z, p) = (2 (z^2 + p^2) - 1) exp(-z^2 - p^2) / pi
        let grid = Grid1D::symmetric(128, 8.0).unwrap();
        let w = wigner_transform(&oscillator(grid, true));
        let (i, k) = (grid.nearest_index(0.0), w.p.iter().position(|&p| p == 0.0).unwrap());
        assert!((w.at(i, k) + 1.0 / PI).abs() < 0.01 / PI);
        assert!(w.negativity_volume() > 0.1);
    }

    #[test]
    fn marginals_of_a_rectangle() {
        let grid = Grid1D::symmetric(256, 4.0).unwrap();
        let rect = crate::metrics::rectangle_state(1.0, &grid).unwrap();
        let w = wigner_transform(&rect);
        for (a, b) in w.marginal_position().iter().zip(rect.density()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(w.negativity_volume() > 1e-3);
    }

    #[test]
    fn downsample_keeps_axes_consistent() {
        let grid = Grid1D::symmetric(128, 8.0).unwrap();
        let w = wigner_transform(&oscillator(grid, false)).downsample(2, 2);
        assert_eq!((w.n_z(), w.n_p()), (64, 64));
        assert_eq!(w.values.len(), 64 * 64);
        assert_relative_eq!(w.normalization(), 1.0, max_relative = 1e-6);
    }
}
