//! Classical phase-space trajectories in the mean-field potential
//! `g |phi(z, t)|^2` of a recorded density movie.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::DensityMovie;
use crate::error::{Error, Result};
use crate::grid::Spectral1D;

/// Density frames and their spectral gradients.
#[derive(Debug, Clone)]
pub struct ForceField {
    z0: f64,
    dz: f64,
    times: Vec<f64>,
    density: Vec<Vec<f64>>,
    gradient: Vec<Vec<f64>>,
    frozen: bool,
}

fn spectral_gradient(frame: &[f64], dz: f64, spectral: &Spectral1D<f64>) -> Vec<f64> {
    let n = frame.len();
    let mut buf: Vec<Complex<f64>> = frame.iter().map(|&d| Complex::new(d, 0.0)).collect();
    spectral.forward(&mut buf);
    let dp = 2.0 * std::f64::consts::PI / (n as f64 * dz);
    for (k, c) in buf.iter_mut().enumerate() {
        let s = if k < n / 2 {
            k as f64
        } else if k == n / 2 {
            0.0
        } else {
            k as f64 - n as f64
        };
        *c *= Complex::new(0.0, s * dp);
    }
    spectral.inverse(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

impl ForceField {
    /// Frames on a uniform periodic lattice starting at `z[0]`.
    pub fn from_movie(movie: &DensityMovie) -> Result<Self> {
        if movie.frames.is_empty() || movie.z.len() < 4 {
            return Err(Error::config("trajectories.movie", "density movie is empty"));
        }
        if movie.frames.iter().any(|f| f.len() != movie.z.len()) || movie.times.len() != movie.frames.len() {
            return Err(Error::config("trajectories.movie", "frame sizes do not match the lattice"));
        }
        let dz = movie.z[1] - movie.z[0];
        let spectral = Spectral1D::new(movie.z.len());
        let gradient = movie.frames.iter().map(|f| spectral_gradient(f, dz, &spectral)).collect();
        Ok(ForceField { z0: movie.z[0], dz, times: movie.times.clone(), density: movie.frames.clone(), gradient, frozen: false })
    }

    /// One density frame held fixed for all times.
    pub fn frozen(z: &[f64], density: &[f64]) -> Result<Self> {
        let movie = DensityMovie { z: z.to_vec(), times: vec![0.0], frames: vec![density.to_vec()] };
        let mut f = Self::from_movie(&movie)?;
        f.frozen = true;
        Ok(f)
    }

    pub fn t_max(&self) -> f64 {
        if self.frozen {
            f64::INFINITY
        } else {
            *self.times.last().unwrap()
        }
    }

    fn n_z(&self) -> usize {
        self.density[0].len()
    }

    /// Cubic Lagrange interpolation of `frame` at `z`; `None` outside the
    /// stencil-safe part of the lattice.
    fn cubic(&self, frame: &[f64], z: f64) -> Option<f64> {
        let x = (z - self.z0) / self.dz;
        let k = x.floor();
        if !(k >= 1.0) || k + 2.0 > (self.n_z() - 1) as f64 {
            return None;
        }
        let k = k as usize;
        let s = x - k as f64;
        let (a, b, c, d) = (frame[k - 1], frame[k], frame[k + 1], frame[k + 2]);
        Some(
            -s * (s - 1.0) * (s - 2.0) / 6.0 * a + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * b
                - (s + 1.0) * s * (s - 2.0) / 2.0 * c
                + (s + 1.0) * s * (s - 1.0) / 6.0 * d,
        )
    }

    fn sample(&self, frames: &[Vec<f64>], z: f64, t: f64) -> Option<f64> {
        if self.frozen || frames.len() == 1 {
            return self.cubic(&frames[0], z);
        }
        let n = self.times.len();
        let k = self.times.partition_point(|&v| v <= t).clamp(1, n - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Some(self.cubic(&frames[k - 1], z)? * (1.0 - w) + self.cubic(&frames[k], z)? * w)
    }

    /// `|phi(z, t)|^2`.
    pub fn density(&self, z: f64, t: f64) -> Option<f64> {
        self.sample(&self.density, z, t)
    }

    /// `d/dz |phi(z, t)|^2`.
    pub fn gradient(&self, z: f64, t: f64) -> Option<f64> {
        self.sample(&self.gradient, z, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub z0: f64,
    pub p0: f64,
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    /// True when the path left the lattice and was cut short.
    pub truncated: bool,
}

/// RK4 integration of `dZ/dt = P`, `dP/dt = -g d/dz |phi(Z, t)|^2`.
pub fn integrate_trajectory(start: (f64, f64), field: &ForceField, g: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::config("trajectories.dt", "dt and t_end must be > 0"));
    }
    if t_end > field.t_max() * (1.0 + 1e-12) {
        return Err(Error::config("trajectories.t_end", format!("movie ends at {} before t_end = {t_end}", field.t_max())));
    }
    let (z0, p0) = start;
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut tr = Trajectory { z0, p0, times: vec![0.0], z: vec![z0], p: vec![p0], truncated: false };
    let force = |z: f64, t: f64| field.gradient(z, t).map(|d| -g * d);
    let (mut z, mut p) = (z0, p0);
    for s in 0..steps {
        let t = s as f64 * dt;
        let step = (|| {
            let a1 = force(z, t)?;
            let (z2, p2) = (z + 0.5 * dt * p, p + 0.5 * dt * a1);
            let a2 = force(z2, t + 0.5 * dt)?;
            let (z3, p3) = (z + 0.5 * dt * p2, p + 0.5 * dt * a2);
            let a3 = force(z3, t + 0.5 * dt)?;
            let (z4, p4) = (z + dt * p3, p + dt * a3);
            let a4 = force(z4, t + dt)?;
            Some((z + dt / 6.0 * (p + 2.0 * p2 + 2.0 * p3 + p4), p + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)))
        })();
        match step {
            Some((zn, pn)) if field.gradient(zn, t + dt).is_some() => {
                z = zn;
                p = pn;
                tr.times.push((s + 1) as f64 * dt);
                tr.z.push(z);
                tr.p.push(p);
            }
            _ => {
                tr.truncated = true;
                break;
            }
        }
    }
    Ok(tr)
}

/// Independent trajectories from several starting points.
pub fn integrate_many(starts: &[(f64, f64)], field: &ForceField, g: f64, t_end: f64, dt: f64) -> Result<Vec<Trajectory>> {
    starts.par_iter().map(|&s| integrate_trajectory(s, field, g, t_end, dt)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lattice(n: usize, half: f64) -> Vec<f64> {
        (0..n).map(|i| -half + 2.0 * half * i as f64 / n as f64).collect()
    }

    #[test]
    fn free_motion_is_straight() {
        let z = lattice(256, 8.0);
        let d: Vec<f64> = z.iter().map(|x| (-x * x).exp()).collect();
        let f = ForceField::frozen(&z, &d).unwrap();
        let tr = integrate_trajectory((0.3, 1.7), &f, 0.0, 2.0, 1e-3).unwrap();
        for (t, (zz, pp)) in tr.times.iter().zip(tr.z.iter().zip(&tr.p)) {
            assert!((zz - (0.3 + 1.7 * t)).abs() < 1e-10);
            assert_eq!(*pp, 1.7);
        }
        assert_eq!((tr.z[0], tr.p[0]), (0.3, 1.7));
    }

    #[test]
    fn spectral_gradient_of_gaussian() {
        let z = lattice(256, 8.0);
        let d: Vec<f64> = z.iter().map(|x| (-x * x).exp()).collect();
        let f = ForceField::frozen(&z, &d).unwrap();
        for x in [-1.3, -0.2, 0.05, 0.77] {
            assert!((f.gradient(x, 0.0).unwrap() + 2.0 * x * (-x * x).exp()).abs() < 1e-5);
        }
    }

    #[test]
    fn energy_is_conserved_in_a_frozen_well() {
        let z = lattice(4096, 8.0);
        let d: Vec<f64> = z.iter().map(|x| (-x * x).exp()).collect();
        let f = ForceField::frozen(&z, &d).unwrap();
        let g = -3.0;
        let tr = integrate_trajectory((0.5, 0.2), &f, g, 2.0, 1e-4).unwrap();
        let h = |zz: f64, pp: f64| 0.5 * pp * pp + g * f.density(zz, 0.0).unwrap();
        let h0 = h(tr.z[0], tr.p[0]);
        let h1 = h(*tr.z.last().unwrap(), *tr.p.last().unwrap());
        assert!(((h1 - h0) / h0).abs() < 1e-6, "{h0} {h1}");
    }

    #[test]
    fn mirrored_start_mirrors_path() {
        let z = lattice(512, 8.0);
        let d: Vec<f64> = z.iter().map(|x| (-x * x / 2.0).exp() * (1.0 + 0.3 * x * x)).collect();
        let f = ForceField::frozen(&z, &d).unwrap();
        let a = integrate_trajectory((0.4, 0.9), &f, 5.0, 1.0, 1e-3).unwrap();
        let b = integrate_trajectory((-0.4, -0.9), &f, 5.0, 1.0, 1e-3).unwrap();
        for i in 0..a.z.len() {
            assert!((a.z[i] + b.z[i]).abs() < 1e-10 && (a.p[i] + b.p[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn leaving_the_window_truncates() {
        let z = lattice(128, 2.0);
        let d = vec![0.0; 128];
        let f = ForceField::frozen(&z, &d).unwrap();
        let tr = integrate_trajectory((0.0, 10.0), &f, 1.0, 1.0, 1e-3).unwrap();
        assert!(tr.truncated);
        assert!(*tr.z.last().unwrap() < 2.0);
    }

    #[test]
    fn movie_time_interpolation() {
        let z = lattice(64, 4.0);
        let frames = vec![vec![1.0; 64], vec![3.0; 64]];
        let f = ForceField::from_movie(&DensityMovie { z, times: vec![0.0, 1.0], frames }).unwrap();
        assert_relative_eq!(f.density(0.1, 0.25).unwrap(), 1.5, max_relative = 1e-12);
        assert!(integrate_trajectory((0.0, 0.0), &f, 1.0, 2.0, 1e-2).is_err());
    }
}
