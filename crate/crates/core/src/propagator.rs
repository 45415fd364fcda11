//! Diagonal-in-momentum operators on a 1D lattice.
//!
//! With a hard box whose walls sit on lattice points the kinetic operator is
//! applied through the odd extension of the interior samples (a sine basis),
//! so Dirichlet conditions hold exactly. Otherwise the lattice is periodic
//! and a hard box, if any, acts as a projector afterwards.

use num_complex::Complex;

use crate::grid::{Grid1D, Spectral1D, WaveFunction};
use crate::potentials::PotentialSpec;
use crate::scalar::Real;

#[derive(Debug, Clone)]
enum Basis {
    Periodic,
    /// Walls at lattice indices `lo` and `hi` (field vanishes there).
    Dirichlet { lo: usize, hi: usize },
}

/// Kinetic operator `p^2 / 2` on a lattice, with optional hard walls.
#[derive(Debug, Clone)]
pub struct Kinetic<T: Real> {
    grid: Grid1D<T>,
    basis: Basis,
    spectral: Spectral1D<T>,
    /// `p^2 / 2` for every mode of the working transform.
    half_p2: Vec<T>,
    /// Lattice indices forced to zero after each application.
    outside: Vec<usize>,
}

impl<T: Real> Kinetic<T> {
    /// Operator for `grid`; a [`PotentialSpec::HardBox`] in `walls` adds
    /// Dirichlet conditions at its edges.
    pub fn new(grid: &Grid1D<T>, walls: Option<&PotentialSpec>) -> Self {
        let n = grid.len();
        let halfwidth = match walls {
            Some(PotentialSpec::HardBox { halfwidth }) => Some(*halfwidth),
            _ => None,
        };
        let outside: Vec<usize> = match halfwidth {
            Some(hw) => (0..n).filter(|&i| grid.z(i).to_f64_lossy().abs() >= hw).collect(),
            None => Vec::new(),
        };
        if let Some(hw) = halfwidth {
            let (a, b) = (T::lit(-hw), T::lit(hw));
            if grid.is_on_lattice(a) && grid.is_on_lattice(b) {
                let (lo, hi) = (grid.nearest_index(a), grid.nearest_index(b));
                let m = hi - lo;
                let len = 2 * m;
                let dp = T::PI() / (T::from_usize_lossy(m) * grid.dz());
                let half_p2 = (0..len)
                    .map(|k| {
                        let s = if k <= m { k as f64 } else { k as f64 - len as f64 };
                        let p = T::lit(s) * dp;
                        p * p * T::lit(0.5)
                    })
                    .collect();
                return Kinetic { grid: *grid, basis: Basis::Dirichlet { lo, hi }, spectral: Spectral1D::new(len), half_p2, outside };
            }
        }
        let half_p2 = grid.momenta_fft().into_iter().map(|p| p * p * T::lit(0.5)).collect();
        Kinetic { grid: *grid, basis: Basis::Periodic, spectral: Spectral1D::new(n), half_p2, outside }
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self.basis, Basis::Dirichlet { .. })
    }

    /// Mode energies `p^2/2` of the working transform.
    pub fn mode_energies(&self) -> &[T] {
        &self.half_p2
    }

    /// Multiplier `f(p^2/2)` for every mode, for use with [`Self::apply`].
    pub fn multiplier(&self, f: impl Fn(T) -> Complex<T>) -> Vec<Complex<T>> {
        self.half_p2.iter().map(|&e| f(e)).collect()
    }

    pub fn real_multiplier(&self, f: impl Fn(T) -> T) -> Vec<T> {
        self.half_p2.iter().map(|&e| f(e)).collect()
    }

    /// Zero the samples outside the box.
    pub fn project(&self, data: &mut [Complex<T>]) {
        for &i in &self.outside {
            data[i] = Complex::new(T::zero(), T::zero());
        }
    }

    /// Apply a complex momentum-space multiplier; `scratch` is reused between calls.
    pub fn apply(&self, data: &mut [Complex<T>], mult: &[Complex<T>], scratch: &mut Vec<Complex<T>>) {
        self.run(data, scratch, |buf| buf.iter_mut().zip(mult).for_each(|(c, m)| *c = *c * m));
    }

    pub fn apply_real(&self, data: &mut [Complex<T>], mult: &[T], scratch: &mut Vec<Complex<T>>) {
        self.run(data, scratch, |buf| buf.iter_mut().zip(mult).for_each(|(c, m)| *c = c.scale(*m)));
    }

    fn run(&self, data: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>, op: impl FnOnce(&mut [Complex<T>])) {
        match self.basis {
            Basis::Periodic => {
                self.spectral.forward(data);
                op(data);
                self.spectral.inverse(data);
                self.project(data);
            }
            Basis::Dirichlet { lo, hi } => {
                let m = hi - lo;
                scratch.clear();
                scratch.resize(2 * m, Complex::new(T::zero(), T::zero()));
                for k in 1..m {
                    scratch[k] = data[lo + k];
                    scratch[2 * m - k] = -data[lo + k];
                }
                self.spectral.forward(scratch);
                op(scratch);
                self.spectral.inverse(scratch);
                data[lo + 1..lo + m].copy_from_slice(&scratch[1..m]);
                self.project(data);
                data[lo] = Complex::new(T::zero(), T::zero());
                data[hi] = Complex::new(T::zero(), T::zero());
            }
        }
    }

    /// `<psi| p^2/2 |psi>` on the lattice.
    pub fn energy(&self, psi: &WaveFunction<T>, scratch: &mut Vec<Complex<T>>) -> T {
        let mut t = psi.data.clone();
        self.apply_real(&mut t, &self.half_p2, scratch);
        psi.data.iter().zip(&t).fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re) * self.grid.dz()
    }
}
