//! Reduced-resolution 3D solver and its comparison with the quasi-1D model.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_1d, evolve_3d, DensityTrace, EvolutionConfig};
use crate::error::{Error, Result};
use crate::groundstate::{initial_guess, solve_ground_1d, solve_ground_3d, Energetics, ItpConfig};
use crate::grid::{Grid1D, Grid3D, Spectral3D, WaveFunction, WaveFunction3D};
use crate::metrics::{focusing_factor, FocusReport};
use crate::potentials::PotentialSpec;
use crate::scalar::Real;
use crate::units::{g3d, InteractionParams, PhysicalParams, Regime};

/// Default cap on the memory used by one 3D solver (bytes).
pub const DEFAULT_MEMORY_CAP: usize = 4 << 30;

/// `-1/2 laplacian + V_perp(x, y) + V_z(z) + gn |psi|^2` on a [`Grid3D`].
#[derive(Debug, Clone)]
pub struct Hamiltonian3D<T: Real> {
    grid: Grid3D<T>,
    spectral: Spectral3D<T>,
    half_p2: Vec<T>,
    v: Vec<T>,
    gn: T,
}

impl<T: Real> Hamiltonian3D<T> {
    pub fn new(grid: &Grid3D<T>, v_perp: &PotentialSpec, v_z: &PotentialSpec, gn: f64, memory_cap: usize) -> Result<Self> {
        v_perp.validate()?;
        v_z.validate()?;
        if matches!(v_z, PotentialSpec::Harmonic2D { .. }) {
            return Err(Error::config("potential.z", "transverse trap given as longitudinal potential"));
        }
        // psi, a working copy, the kinetic multiplier, V and p^2/2
        let bytes = grid.field_bytes() * 3 + 2 * grid.len() * std::mem::size_of::<T>();
        if bytes > memory_cap {
            return Err(Error::MemoryBudget { points: grid.len(), bytes, cap: memory_cap });
        }
        let (nx, ny, nz) = grid.shape();
        let (px, py, pz) = (grid.x.momenta_fft(), grid.y.momenta_fft(), grid.z.momenta_fft());
        let vz = v_z.sample(&grid.z);
        let half = T::lit(0.5);
        let mut half_p2 = Vec::with_capacity(grid.len());
        let mut v = Vec::with_capacity(grid.len());
        for ix in 0..nx {
            let x = grid.x.z(ix).to_f64_lossy();
            for iy in 0..ny {
                let y = grid.y.z(iy).to_f64_lossy();
                let vt = T::lit(v_perp.evaluate_transverse(x, y));
                let pt = px[ix] * px[ix] + py[iy] * py[iy];
                for iz in 0..nz {
                    half_p2.push((pt + pz[iz] * pz[iz]) * half);
                    v.push(vt + vz[iz]);
                }
            }
        }
        Ok(Hamiltonian3D { grid: *grid, spectral: Spectral3D::new(grid), half_p2, v, gn: T::lit(gn) })
    }

    pub fn grid(&self) -> &Grid3D<T> {
        &self.grid
    }

    pub fn mode_energies(&self) -> &[T] {
        &self.half_p2
    }

    pub fn kinetic_real(&self, data: &mut [Complex<T>], mult: &[T]) {
        self.spectral.forward(data);
        data.iter_mut().zip(mult).for_each(|(c, m)| *c = c.scale(*m));
        self.spectral.inverse(data);
    }

    pub fn kinetic_complex(&self, data: &mut [Complex<T>], mult: &[Complex<T>]) {
        self.spectral.forward(data);
        data.iter_mut().zip(mult).for_each(|(c, m)| *c = *c * m);
        self.spectral.inverse(data);
    }

    pub fn imaginary_potential_step(&self, data: &mut [Complex<T>], dtau: T) {
        for (c, &vi) in data.iter_mut().zip(&self.v) {
            let w = vi + self.gn * c.norm_sqr();
            *c = if w.is_finite() { c.scale((-w * dtau).exp()) } else { Complex::new(T::zero(), T::zero()) };
        }
    }

    pub fn real_potential_step(&self, data: &mut [Complex<T>], tau: T) {
        for (c, &vi) in data.iter_mut().zip(&self.v) {
            if !vi.is_finite() {
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            let w = vi + self.gn * c.norm_sqr();
            *c = *c * Complex::from_polar(T::one(), -w * tau);
        }
    }

    /// `int dx dy |psi(x, y, z_iz)|^2`.
    pub fn plane_density(&self, data: &[Complex<T>], iz: usize) -> T {
        let nz = self.grid.z.len();
        let s = data.iter().skip(iz).step_by(nz).fold(T::zero(), |acc, c| acc + c.norm_sqr());
        s * self.grid.x.dz() * self.grid.y.dz()
    }

    pub fn energetics(&self, psi: &WaveFunction3D<T>) -> Energetics {
        let mut buf = psi.data.clone();
        self.spectral.forward(&mut buf);
        let n = psi.data.len() as f64;
        let dv = self.grid.cell_volume().to_f64_lossy();
        let kin: f64 = buf.iter().zip(&self.half_p2).map(|(c, e)| c.norm_sqr().to_f64_lossy() * e.to_f64_lossy()).sum();
        let (mut pot, mut int) = (0.0, 0.0);
        for (c, &vi) in psi.data.iter().zip(&self.v) {
            let d = c.norm_sqr().to_f64_lossy();
            let vi = vi.to_f64_lossy();
            if vi.is_finite() {
                pot += vi * d;
            }
            int += d * d;
        }
        Energetics { kinetic: kin * dv / n, potential: pot * dv, interaction: self.gn.to_f64_lossy() * int * dv }
    }

    /// Oscillator ground state across, the default 1D guess along `z`.
    pub fn default_guess(&self) -> Result<WaveFunction3D<T>> {
        let along = initial_guess(&PotentialSpec::Harmonic1D { omega: 1.0 }, 0.0, &self.grid.z)?;
        let (nx, ny, nz) = self.grid.shape();
        let mut psi = WaveFunction3D::zeros(self.grid);
        // infer oscillator widths from the sampled potential curvature
        let wx = self.transverse_width(0);
        let wy = self.transverse_width(1);
        for ix in 0..nx {
            let x = self.grid.x.z(ix).to_f64_lossy();
            for iy in 0..ny {
                let y = self.grid.y.z(iy).to_f64_lossy();
                let a = T::lit((-(x * x) / (2.0 * wx * wx) - y * y / (2.0 * wy * wy)).exp());
                let base = self.grid.index(ix, iy, 0);
                for iz in 0..nz {
                    psi.data[base + iz] = along.data[iz].scale(a);
                }
            }
        }
        psi.normalize()?;
        Ok(psi)
    }

    fn transverse_width(&self, axis: usize) -> f64 {
        let g = if axis == 0 { &self.grid.x } else { &self.grid.y };
        let i = g.nearest_index(T::zero());
        let j = (i + 1).min(g.len() - 1);
        let iz = self.grid.z.nearest_index(T::zero());
        let (cx, cy) = (self.grid.x.nearest_index(T::zero()), self.grid.y.nearest_index(T::zero()));
        let at = |k: usize| {
            let idx = if axis == 0 { self.grid.index(k, cy, iz) } else { self.grid.index(cx, k, iz) };
            self.v[idx].to_f64_lossy()
        };
        let h = g.z(j).to_f64_lossy() - g.z(i).to_f64_lossy();
        let curv = 2.0 * (at(j) - at(i)) / (h * h);
        if curv > 0.0 && curv.is_finite() {
            1.0 / curv.sqrt().sqrt()
        } else {
            g.length().to_f64_lossy() / 8.0
        }
    }
}

/// Local Thomas-Fermi field `|psi|^2 = (mu(z) - V_perp) / gn` whose
/// transverse integral reproduces `phi_z`'s density.
pub fn local_tf_guess<T: Real>(grid: &Grid3D<T>, omega_perp: f64, gn: f64, phi_z: &WaveFunction<T>) -> Result<WaveFunction3D<T>> {
    if !(gn > 0.0) {
        return Err(Error::Domain("local Thomas-Fermi guess needs gn > 0".into()));
    }
    let (nx, ny, nz) = grid.shape();
    let mut psi = WaveFunction3D::zeros(*grid);
    // mu(z)^2 = omega^2 gn |phi|^2 / pi
    let mu: Vec<f64> = phi_z.data.iter().map(|c| (omega_perp * omega_perp * gn * c.norm_sqr().to_f64_lossy() / std::f64::consts::PI).sqrt()).collect();
    for ix in 0..nx {
        let x = grid.x.z(ix).to_f64_lossy();
        for iy in 0..ny {
            let y = grid.y.z(iy).to_f64_lossy();
            let vt = 0.5 * omega_perp * omega_perp * (x * x + y * y);
            let base = grid.index(ix, iy, 0);
            for iz in 0..nz {
                psi.data[base + iz] = Complex::new(T::lit(((mu[iz] - vt) / gn).max(0.0).sqrt()), T::zero());
            }
        }
    }
    psi.normalize()?;
    Ok(psi)
}

/// Settings for [`validate_quasi1d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Validate3DConfig {
    pub l: u32,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Transverse half window in units of `L_perp`.
    pub transverse_halfwidth: f64,
    /// Longitudinal half window in units of `L_z`.
    pub z_halfwidth: f64,
    pub itp_1d: ItpConfig,
    pub itp_3d: ItpConfig,
    pub evolution: EvolutionConfig,
    pub memory_cap: usize,
}

impl Default for Validate3DConfig {
    fn default() -> Self {
        Validate3DConfig {
            l: 10,
            nx: 64,
            ny: 64,
            nz: 512,
            transverse_halfwidth: 6.0,
            z_halfwidth: 4.0,
            itp_1d: ItpConfig::default(),
            itp_3d: ItpConfig { dtau: 5e-5, convergence_tol: 1e-9, renormalize_every: 10, max_iters: 200_000 },
            evolution: EvolutionConfig { dt: 1e-4, t_end: 0.3, boundary_threshold: None, ..EvolutionConfig::default() },
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

/// 3D trace against the two quasi-1D closures of the transverse overlap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a_s_final: f64,
    pub times: Vec<f64>,
    pub d_3d: Vec<f64>,
    pub d_1d_weak: Vec<f64>,
    pub d_1d_tf: Vec<f64>,
    /// RMS of `d_1d_weak - d_3d` (non-interacting transverse closure).
    pub rms_weak: f64,
    /// RMS of `d_1d_tf - d_3d` (Thomas-Fermi transverse closure).
    pub rms_tf: f64,
    pub focus_3d: FocusReport,
    pub focus_weak: FocusReport,
    pub focus_tf: FocusReport,
    pub mu_3d: f64,
    pub norm_drift_3d: f64,
    pub grid_shape: (usize, usize, usize),
    pub dt: f64,
}

fn rms_against(reference: &DensityTrace, other: &DensityTrace) -> (Vec<f64>, f64) {
    let resampled: Vec<f64> = reference.times.iter().map(|&t| other.interpolate(t)).collect();
    let ss: f64 = resampled.iter().zip(&reference.on_axis).map(|(a, b)| (a - b) * (a - b)).sum();
    (resampled, (ss / reference.len() as f64).sqrt())
}

/// Run the full 3D quench and both quasi-1D models on the same `z` lattice.
pub fn validate_quasi1d(params: &PhysicalParams, a_s_final: f64, cfg: &Validate3DConfig) -> Result<ComparisonReport> {
    let mut v = validate_quasi1d_many(params, &[a_s_final], cfg)?;
    Ok(v.remove(0))
}

/// As [`validate_quasi1d`] for several final scattering lengths; the ground
/// states are computed once.
pub fn validate_quasi1d_many(params: &PhysicalParams, a_s_finals: &[f64], cfg: &Validate3DConfig) -> Result<Vec<ComparisonReport>> {
    params.validate()?;
    let units = params.units();
    let omega_perp = units.frequency(params.omega_perp());
    let l_perp = units.length(params.l_perp());
    let zgrid = Grid1D::<f64>::symmetric(cfg.nz, cfg.z_halfwidth)?;
    let grid3 = Grid3D::new(
        Grid1D::axis(cfg.nx, cfg.transverse_halfwidth * l_perp)?,
        Grid1D::axis(cfg.ny, cfg.transverse_halfwidth * l_perp)?,
        zgrid,
    );
    let v_perp = PotentialSpec::Harmonic2D { omega_x: units.frequency(params.omega_x), omega_y: units.frequency(params.omega_y) };
    let v_z = PotentialSpec::lg_power_law_from_laser(params, cfg.l)?;
    let gn_i = units.coupling_3d(g3d(params)) * params.atom_count;
    let g_tf_i = InteractionParams::new(params, Regime::WeaklyInteracting)?.g_tilde_dimensionless(&units);
    let g_wk_i = InteractionParams::new(params, Regime::NonInteracting)?.g_tilde_dimensionless(&units);

    let (phi_tf, _) = solve_ground_1d(&v_z, g_tf_i, &zgrid, &cfg.itp_1d)?;
    let (phi_wk, _) = solve_ground_1d(&v_z, g_wk_i, &zgrid, &cfg.itp_1d)?;
    let guess = local_tf_guess(&grid3, omega_perp, gn_i, &phi_tf)?;
    let (psi0, rep3) = solve_ground_3d(&v_perp, &v_z, gn_i, &grid3, &cfg.itp_3d, cfg.memory_cap, Some(guess))?;

    let mut out = Vec::with_capacity(a_s_finals.len());
    for &a_s_final in a_s_finals {
        if !(a_s_final >= 0.0) {
            return Err(Error::config("validate3d.a_s_final", format!("must be >= 0, got {a_s_final}")));
        }
        let ratio = a_s_final / params.scattering_length;
        let ev3 = evolve_3d(&psi0, gn_i * ratio, &v_perp, &PotentialSpec::Zero, &cfg.evolution, cfg.memory_cap)?;
        let tr_tf = evolve_1d(&phi_tf, g_tf_i * ratio, &PotentialSpec::Zero, &cfg.evolution)?.trace;
        let tr_wk = evolve_1d(&phi_wk, g_wk_i * ratio, &PotentialSpec::Zero, &cfg.evolution)?.trace;
        let (d_tf, rms_tf) = rms_against(&ev3.trace, &tr_tf);
        let (d_wk, rms_weak) = rms_against(&ev3.trace, &tr_wk);
        out.push(ComparisonReport {
            a_s_final,
            times: ev3.trace.times.clone(),
            d_3d: ev3.trace.on_axis.clone(),
            d_1d_weak: d_wk,
            d_1d_tf: d_tf,
            rms_weak,
            rms_tf,
            focus_3d: focusing_factor(&ev3.trace)?,
            focus_weak: focusing_factor(&tr_wk)?,
            focus_tf: focusing_factor(&tr_tf)?,
            mu_3d: rep3.mu,
            norm_drift_3d: (ev3.norm_final - ev3.norm_initial).abs(),
            grid_shape: grid3.shape(),
            dt: cfg.evolution.dt,
        });
    }
    Ok(out)
}
