//! Real-time split-step propagation of the 1D and 3D equations after an
//! instantaneous interaction quench.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpe3d::Hamiltonian3D;
use crate::groundstate::{energetics, Energetics};
use crate::grid::{WaveFunction, WaveFunction3D};
use crate::potentials::PotentialSpec;
use crate::propagator::Kinetic;
use crate::scalar::Real;
use crate::units::{InteractionParams, PhysicalParams, Regime};

/// Time stepping and recording settings (dimensionless time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between trace samples.
    pub store_every: usize,
    /// Steps between full density frames; `None` records no frames.
    pub snapshot_every: Option<usize>,
    /// Keep every `snapshot_stride`-th lattice point in the frames.
    pub snapshot_stride: usize,
    /// Abort when `|phi|^2` within `boundary_points` of an edge exceeds this.
    pub boundary_threshold: Option<f64>,
    pub boundary_points: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-4,
            t_end: 0.4,
            store_every: 1,
            snapshot_every: None,
            snapshot_stride: 1,
            boundary_threshold: Some(1e-6),
            boundary_points: 5,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.abs() > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("evolution.dt", format!("must be nonzero and finite, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::config("evolution.t_end", format!("must be > 0, got {}", self.t_end)));
        }
        if self.store_every == 0 {
            return Err(Error::config("evolution.store_every", "must be >= 1"));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::config("evolution.snapshot_every", "must be >= 1"));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::config("evolution.snapshot_stride", "must be >= 1"));
        }
        Ok(())
    }

    /// Forward runs require `dt > 0`; `n_steps` rounds `t_end / |dt|`.
    pub fn validate_forward(&self) -> Result<()> {
        self.validate()?;
        if self.dt < 0.0 {
            return Err(Error::config("evolution.dt", format!("must be > 0, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt.abs()).round().max(1.0) as usize
    }
}

/// Sampled full-lattice densities `|phi(z, t)|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMovie {
    pub z: Vec<f64>,
    pub times: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
}

/// On-axis density normalized by the initial spatial maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    pub times: Vec<f64>,
    /// `d(t) = |phi(0,t)|^2 / max_z |phi(z,0)|^2`.
    pub on_axis: Vec<f64>,
    /// `max_z |phi(z,t)|^2 / max_z |phi(z,0)|^2`.
    pub peak: Vec<f64>,
    /// `max_z |phi(z,0)|^2`.
    pub reference: f64,
    pub t_end: f64,
    pub movie: Option<DensityMovie>,
}

impl DensityTrace {
    /// Build from raw (unnormalized) on-axis and peak densities.
    pub fn from_raw(times: Vec<f64>, on_axis: Vec<f64>, peak: Vec<f64>, reference: f64, t_end: f64) -> Self {
        let s = 1.0 / reference;
        DensityTrace {
            times,
            on_axis: on_axis.into_iter().map(|d| d * s).collect(),
            peak: peak.into_iter().map(|d| d * s).collect(),
            reference,
            t_end,
            movie: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation of `d(t)`, clamped to the sampled range.
    pub fn interpolate(&self, t: f64) -> f64 {
        interp(&self.times, &self.on_axis, t)
    }
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x).max(1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] * (1.0 - w) + ys[k] * w
}

/// Instantaneous change of the scattering length at `t = 0` with the
/// transverse overlap `c_perp` frozen at its initial value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchProtocol {
    /// Initial scattering length (m).
    pub a_s_initial: f64,
    /// Final scattering length (m).
    pub a_s_final: f64,
    pub regime: Regime,
}

impl QuenchProtocol {
    /// Dimensionless `(g_i, g_f)` for `params` (whose scattering length is replaced by `a_s_initial`).
    pub fn couplings(&self, params: &PhysicalParams) -> Result<(f64, f64)> {
        if !(self.a_s_final >= 0.0) {
            return Err(Error::config("quench.a_s_final", format!("must be >= 0, got {}", self.a_s_final)));
        }
        let p = params.with_scattering_length(self.a_s_initial);
        let g_i = InteractionParams::new(&p, self.regime)?.g_tilde_dimensionless(&p.units());
        let g_f = if self.a_s_initial > 0.0 { g_i * self.a_s_final / self.a_s_initial } else { 0.0 };
        if self.a_s_initial == 0.0 && self.a_s_final > 0.0 {
            return Err(Error::Domain("cannot rescale a zero initial coupling".into()));
        }
        Ok((g_i, g_f))
    }
}

/// Strang split-step propagator for the 1D equation.
#[derive(Debug, Clone)]
pub struct SplitStep1D<T: Real> {
    kinetic: Kinetic<T>,
    kin: Vec<Complex<T>>,
    v: Vec<T>,
    g: T,
    g_f64: f64,
    dt: T,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> SplitStep1D<T> {
    pub fn new(grid: &crate::grid::Grid1D<T>, g: f64, v: &PotentialSpec, dt: f64) -> Self {
        let kinetic = Kinetic::new(grid, Some(v));
        let dtt = T::lit(dt);
        let kin = kinetic.multiplier(|e| Complex::from_polar(T::one(), -e * dtt));
        SplitStep1D { v: v.sample(grid), kinetic, kin, g: T::lit(g), g_f64: g, dt: dtt, scratch: Vec::new() }
    }

    /// `phi *= exp(-i frac dt (V + g |phi|^2))`; infinite `V` projects out.
    pub fn potential_step(&self, data: &mut [Complex<T>], frac: T) {
        let tau = self.dt * frac;
        for (c, &vi) in data.iter_mut().zip(&self.v) {
            if !vi.is_finite() {
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            let w = vi + self.g * c.norm_sqr();
            *c = *c * Complex::from_polar(T::one(), -w * tau);
        }
    }

    pub fn kinetic_step(&mut self, data: &mut [Complex<T>]) {
        self.kinetic.apply(data, &self.kin, &mut self.scratch);
    }

    /// Advance `n` full steps, merging adjacent nonlinear half steps.
    pub fn advance(&mut self, psi: &mut WaveFunction<T>, n: usize) {
        if n == 0 {
            return;
        }
        let half = T::lit(0.5);
        self.potential_step(&mut psi.data, half);
        for k in 0..n {
            self.kinetic_step(&mut psi.data);
            let frac = if k + 1 == n { half } else { T::one() };
            self.potential_step(&mut psi.data, frac);
        }
    }

    pub fn energetics(&mut self, psi: &WaveFunction<T>) -> Energetics {
        energetics(psi, &self.v, self.g_f64, &self.kinetic, &mut self.scratch)
    }
}

/// Output of a real-time run.
#[derive(Debug, Clone)]
pub struct Evolution<T> {
    pub trace: DensityTrace,
    pub final_state: WaveFunction<T>,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub steps: usize,
}

impl<T> Evolution<T> {
    pub fn norm_drift(&self) -> f64 {
        (self.norm_final - self.norm_initial).abs()
    }

    pub fn relative_energy_drift(&self) -> f64 {
        (self.energy_final - self.energy_initial).abs() / self.energy_initial.abs().max(f64::MIN_POSITIVE)
    }
}

fn edge_density<T: Real>(data: &[Complex<T>], points: usize) -> f64 {
    let n = data.len();
    let k = points.min(n / 2);
    data[..k].iter().chain(&data[n - k..]).map(|c| c.norm_sqr().to_f64_lossy()).fold(0.0, f64::max)
}

/// Propagate `phi0` with coupling `g_f` in potential `v_after`.
pub fn evolve_1d<T: Real>(
    phi0: &WaveFunction<T>,
    g_f: f64,
    v_after: &PotentialSpec,
    cfg: &EvolutionConfig,
) -> Result<Evolution<T>> {
    cfg.validate()?;
    v_after.validate()?;
    if !g_f.is_finite() {
        return Err(Error::config("g_tilde_f", "must be finite"));
    }
    let grid = phi0.grid;
    let mut stepper = SplitStep1D::new(&grid, g_f, v_after, cfg.dt);
    let mut psi = phi0.clone();
    let n_steps = cfg.n_steps();
    let center = grid.nearest_index(T::zero());
    let dens0 = psi.density();
    let reference = psi.max_density().to_f64_lossy();
    if !(reference > 0.0) {
        return Err(Error::Domain("initial field vanishes".into()));
    }
    let norm_initial = psi.norm().to_f64_lossy();
    let energy_initial = stepper.energetics(&psi).energy();
    let dt = cfg.dt;

    let mut times = vec![0.0];
    let mut on_axis = vec![dens0[center].to_f64_lossy()];
    let mut peak = vec![reference];
    let mut movie = cfg.snapshot_every.map(|_| DensityMovie {
        z: grid.positions().iter().step_by(cfg.snapshot_stride).map(|z| z.to_f64_lossy()).collect(),
        times: Vec::new(),
        frames: Vec::new(),
    });
    let record_frame = |movie: &mut Option<DensityMovie>, t: f64, data: &[Complex<T>]| {
        if let Some(m) = movie {
            m.times.push(t);
            m.frames.push(data.iter().step_by(cfg.snapshot_stride).map(|c| c.norm_sqr().to_f64_lossy()).collect());
        }
    };
    record_frame(&mut movie, 0.0, &psi.data);

    let half = T::lit(0.5);
    stepper.potential_step(&mut psi.data, half);
    for step in 1..=n_steps {
        stepper.kinetic_step(&mut psi.data);
        // |phi|^2 is unchanged by the pending potential half step.
        let t = step as f64 * dt;
        if step % cfg.store_every == 0 || step == n_steps {
            let c = psi.data[center].norm_sqr().to_f64_lossy();
            let m = psi.data.iter().map(|c| c.norm_sqr().to_f64_lossy()).fold(0.0, f64::max);
            if !c.is_finite() || !m.is_finite() {
                return Err(Error::Numeric(format!("non-finite density at t = {t}")));
            }
            times.push(t);
            on_axis.push(c);
            peak.push(m);
            if let Some(threshold) = cfg.boundary_threshold {
                let e = edge_density(&psi.data, cfg.boundary_points);
                if e > threshold {
                    return Err(Error::WindowTooSmall { time: t, density: e, threshold });
                }
            }
        }
        if let Some(every) = cfg.snapshot_every {
            if step % every == 0 {
                record_frame(&mut movie, t, &psi.data);
            }
        }
        let frac = if step == n_steps { half } else { T::one() };
        stepper.potential_step(&mut psi.data, frac);
    }

    let norm_final = psi.norm().to_f64_lossy();
    if !norm_final.is_finite() {
        return Err(Error::Numeric("non-finite norm after propagation".into()));
    }
    let energy_final = stepper.energetics(&psi).energy();
    let mut trace = DensityTrace::from_raw(times, on_axis, peak, reference, n_steps as f64 * dt);
    trace.movie = movie;
    Ok(Evolution { trace, final_state: psi, norm_initial, norm_final, energy_initial, energy_final, steps: n_steps })
}

/// Short-time solution `phi(z,0) exp(-i g t |phi(z,0)|^2)`: for short times
/// the interaction only imprints a density-dependent phase.
pub fn phase_imprint_shorttime<T: Real>(phi0: &WaveFunction<T>, g: f64, t: f64) -> WaveFunction<T> {
    let gt = T::lit(g * t);
    let data = phi0.data.iter().map(|c| *c * Complex::from_polar(T::one(), -gt * c.norm_sqr())).collect();
    WaveFunction { grid: phi0.grid, data }
}

/// Output of a 3D real-time run; the trace uses the transversely integrated density.
#[derive(Debug, Clone)]
pub struct Evolution3D<T> {
    pub trace: DensityTrace,
    pub final_state: WaveFunction3D<T>,
    pub norm_initial: f64,
    pub norm_final: f64,
    pub steps: usize,
}

/// Propagate a 3D field with coupling `gn_f` in `v_perp + v_z`.
pub fn evolve_3d<T: Real>(
    psi0: &WaveFunction3D<T>,
    gn_f: f64,
    v_perp: &PotentialSpec,
    v_z: &PotentialSpec,
    cfg: &EvolutionConfig,
    memory_cap: usize,
) -> Result<Evolution3D<T>> {
    cfg.validate()?;
    let grid = psi0.grid;
    let ham = Hamiltonian3D::new(&grid, v_perp, v_z, gn_f, memory_cap)?;
    let dt = T::lit(cfg.dt);
    let kin: Vec<Complex<T>> = ham.mode_energies().iter().map(|&e| Complex::from_polar(T::one(), -e * dt)).collect();
    let mut psi = psi0.clone();
    let n_steps = cfg.n_steps();
    let marg0 = psi.z_marginal();
    let iz0 = grid.z.nearest_index(T::zero());
    let reference = marg0.iter().map(|v| v.to_f64_lossy()).fold(0.0, f64::max);
    if !(reference > 0.0) {
        return Err(Error::Domain("initial field vanishes".into()));
    }
    let norm_initial = psi.norm().to_f64_lossy();
    let mut times = vec![0.0];
    let mut on_axis = vec![marg0[iz0].to_f64_lossy()];
    let mut peak = vec![reference];
    let half = T::lit(0.5);
    ham.real_potential_step(&mut psi.data, dt * half);
    for step in 1..=n_steps {
        ham.kinetic_complex(&mut psi.data, &kin);
        let t = step as f64 * cfg.dt;
        if step % cfg.store_every == 0 || step == n_steps {
            let c = ham.plane_density(&psi.data, iz0).to_f64_lossy();
            if !c.is_finite() {
                return Err(Error::Numeric(format!("non-finite density at t = {t}")));
            }
            times.push(t);
            on_axis.push(c);
            peak.push(f64::NAN);
        }
        let frac = if step == n_steps { half } else { T::one() };
        ham.real_potential_step(&mut psi.data, dt * frac);
    }
    let norm_final = psi.norm().to_f64_lossy();
    if !norm_final.is_finite() {
        return Err(Error::Numeric("non-finite norm after propagation".into()));
    }
    let trace = DensityTrace::from_raw(times, on_axis, peak, reference, n_steps as f64 * cfg.dt);
    Ok(Evolution3D { trace, final_state: psi, norm_initial, norm_final, steps: n_steps })
}
