//! Ground states by split-step imaginary-time propagation.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpe3d::Hamiltonian3D;
use crate::grid::{Grid1D, Grid3D, WaveFunction, WaveFunction3D};
use crate::potentials::{tf_parameters, tf_profile_lg, PotentialSpec};
use crate::propagator::Kinetic;
use crate::scalar::Real;

/// Imaginary-time propagation settings (dimensionless units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ItpConfig {
    pub dtau: f64,
    pub max_iters: usize,
    /// Stop once the relative change of `mu` per step falls below this.
    pub convergence_tol: f64,
    /// Steps between evaluations of `mu`, `E` and the convergence test.
    /// The field itself is renormalized after every step.
    pub renormalize_every: usize,
}

impl Default for ItpConfig {
    fn default() -> Self {
        ItpConfig { dtau: 1e-4, max_iters: 2_000_000, convergence_tol: 1e-10, renormalize_every: 1 }
    }
}

impl ItpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0) || !self.dtau.is_finite() {
            return Err(Error::config("itp.dtau", format!("must be > 0, got {}", self.dtau)));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::config("itp.convergence_tol", format!("must be > 0, got {}", self.convergence_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::config("itp.max_iters", "must be >= 1"));
        }
        if self.renormalize_every == 0 {
            return Err(Error::config("itp.renormalize_every", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub converged: bool,
    pub iterations: usize,
    /// Chemical potential from the functional `<T + V + g|phi|^2>`.
    pub mu: f64,
    /// Energy per particle `<T + V + g|phi|^2 / 2>`.
    pub energy: f64,
    /// Relative change of `mu` per step at the last check.
    pub residual: f64,
    /// Checks at which the energy rose (beyond rounding) since the previous one.
    pub energy_increases: usize,
    /// Imaginary time step actually used (see [`stable_dtau`]).
    pub dtau: f64,
}

/// Largest `dtau * g * max|phi|^2` used by the solvers.
pub const MAX_NONLINEAR_STEP: f64 = 0.9;

/// `requested`, reduced so that `dtau * peak < MAX_NONLINEAR_STEP`, where
/// `peak` is the largest nonlinear energy `g |phi|^2` of the starting field.
/// Beyond about 1 the renormalized nonlinear step overshoots and the
/// iteration settles into a two-cycle instead of converging.
pub fn stable_dtau(requested: f64, peak: f64) -> f64 {
    if peak > 0.0 && peak.is_finite() {
        requested.min(MAX_NONLINEAR_STEP / peak)
    } else {
        requested
    }
}

/// Energy and chemical potential of a 1D field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energetics {
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
}

impl Energetics {
    pub fn energy(&self) -> f64 {
        self.kinetic + self.potential + 0.5 * self.interaction
    }

    pub fn mu(&self) -> f64 {
        self.kinetic + self.potential + self.interaction
    }
}

/// Energy terms of `psi`; `v` is the sampled potential (infinite samples are
/// treated as projected out).
pub fn energetics<T: Real>(
    psi: &WaveFunction<T>,
    v: &[T],
    g: f64,
    kinetic: &Kinetic<T>,
    scratch: &mut Vec<Complex<T>>,
) -> Energetics {
    let dz = psi.grid.dz().to_f64_lossy();
    let (mut pot, mut int) = (0.0, 0.0);
    for (c, &vi) in psi.data.iter().zip(v) {
        let d = c.norm_sqr().to_f64_lossy();
        let vi = vi.to_f64_lossy();
        if vi.is_finite() {
            pot += vi * d;
        }
        int += d * d;
    }
    Energetics {
        kinetic: kinetic.energy(psi, scratch).to_f64_lossy(),
        potential: pot * dz,
        interaction: g * int * dz,
    }
}

/// Default starting field for [`solve_ground_1d`].
pub fn initial_guess<T: Real>(spec: &PotentialSpec, g: f64, grid: &Grid1D<T>) -> Result<WaveFunction<T>> {
    let gaussian = |width: f64| {
        WaveFunction::from_real_fn(*grid, |z| {
            let z = z.to_f64_lossy();
            T::lit((-z * z / (2.0 * width * width)).exp())
        })
    };
    let psi = match *spec {
        PotentialSpec::LgFull { l, w0, v_l } | PotentialSpec::LgPowerLaw { l, w0, v_l } if g >= 1.0 && l >= 1 => {
            tf_profile_lg(l, w0, v_l, g, grid)?.psi
        }
        PotentialSpec::LgFull { w0, .. } | PotentialSpec::LgPowerLaw { w0, .. } => gaussian(0.5 * w0),
        PotentialSpec::Harmonic1D { omega } => gaussian(1.0 / omega.sqrt()),
        PotentialSpec::HardBox { halfwidth } => WaveFunction::from_real_fn(*grid, |z| {
            let z = z.to_f64_lossy();
            T::lit(if z.abs() < halfwidth { (std::f64::consts::FRAC_PI_2 * z / halfwidth).cos() } else { 0.0 })
        }),
        PotentialSpec::Zero | PotentialSpec::Harmonic2D { .. } => {
            return Err(Error::Domain("no bound longitudinal ground state for this potential".into()))
        }
    };
    psi.normalized()
}

fn check_window<T: Real>(spec: &PotentialSpec, g: f64, grid: &Grid1D<T>) -> Result<()> {
    let reach = grid.z_max().to_f64_lossy().min(-grid.z_min().to_f64_lossy());
    let needed = match *spec {
        PotentialSpec::LgFull { l, w0, v_l } | PotentialSpec::LgPowerLaw { l, w0, v_l } if g > 0.0 && l >= 1 => {
            Some(1.2 * tf_parameters(l, w0, v_l, g)?.1)
        }
        PotentialSpec::HardBox { halfwidth } => Some(halfwidth),
        _ => None,
    };
    match needed {
        Some(r) if r > reach => Err(Error::config(
            "grid",
            format!("window half-width {reach:.4} does not hold the cloud radius estimate {r:.4}"),
        )),
        _ => Ok(()),
    }
}

/// Ground state of `-1/2 d^2/dz^2 + V + g |phi|^2` on `grid`.
pub fn solve_ground_1d<T: Real>(
    spec: &PotentialSpec,
    g: f64,
    grid: &Grid1D<T>,
    cfg: &ItpConfig,
) -> Result<(WaveFunction<T>, GroundStateReport)> {
    spec.validate()?;
    check_window(spec, g, grid)?;
    let guess = initial_guess(spec, g, grid)?;
    solve_ground_1d_from(spec, g, guess, cfg)
}

/// As [`solve_ground_1d`], starting from a caller-supplied field.
pub fn solve_ground_1d_from<T: Real>(
    spec: &PotentialSpec,
    g: f64,
    mut psi: WaveFunction<T>,
    cfg: &ItpConfig,
) -> Result<(WaveFunction<T>, GroundStateReport)> {
    cfg.validate()?;
    if !g.is_finite() || g < 0.0 {
        return Err(Error::config("g_tilde", format!("must be finite and >= 0, got {g}")));
    }
    let grid = psi.grid;
    let kinetic = Kinetic::new(&grid, Some(spec));
    let v = spec.sample(&grid);
    kinetic.project(&mut psi.data);
    psi.normalize()?;
    let dtau_used = stable_dtau(cfg.dtau, g * psi.max_density().to_f64_lossy());
    let dtau = T::lit(dtau_used);
    let gt = T::lit(g);
    let half_kin = kinetic.real_multiplier(|e| (-e * dtau * T::lit(0.5)).exp());
    let mut scratch = Vec::new();
    let mut last = energetics(&psi, &v, g, &kinetic, &mut scratch);
    let mut report = GroundStateReport {
        converged: false,
        iterations: 0,
        mu: last.mu(),
        energy: last.energy(),
        residual: f64::INFINITY,
        energy_increases: 0,
        dtau: dtau_used,
    };

    for it in 1..=cfg.max_iters {
        kinetic.apply_real(&mut psi.data, &half_kin, &mut scratch);
        for (c, &vi) in psi.data.iter_mut().zip(&v) {
            let w = vi + gt * c.norm_sqr();
            *c = if w.is_finite() { c.scale((-w * dtau).exp()) } else { Complex::new(T::zero(), T::zero()) };
        }
        kinetic.apply_real(&mut psi.data, &half_kin, &mut scratch);
        psi.normalize().map_err(|_| Error::Numeric(format!("field vanished at imaginary-time step {it}")))?;

        if it % cfg.renormalize_every == 0 || it == cfg.max_iters {
            let now = energetics(&psi, &v, g, &kinetic, &mut scratch);
            if !now.mu().is_finite() {
                return Err(Error::Numeric(format!("non-finite chemical potential at imaginary-time step {it}")));
            }
            let steps = (it - report.iterations) as f64;
            report.residual = (now.mu() - last.mu()).abs() / now.mu().abs().max(f64::MIN_POSITIVE) / steps;
            if now.energy() > last.energy() + 1e-12 * last.energy().abs() + 1e-14 {
                report.energy_increases += 1;
            }
            report.iterations = it;
            report.mu = now.mu();
            report.energy = now.energy();
            last = now;
            if report.residual <= cfg.convergence_tol {
                report.converged = true;
                break;
            }
        }
    }
    if !report.converged {
        return Err(Error::NotConverged { report });
    }
    psi.fix_global_phase();
    Ok((psi, report))
}

/// Ground state of the 3D equation with `V_perp(x, y) + V_z(z)` and coupling
/// `gn` (the 3D coupling times `N`, dimensionless).
pub fn solve_ground_3d<T: Real>(
    v_perp: &PotentialSpec,
    v_z: &PotentialSpec,
    gn: f64,
    grid: &Grid3D<T>,
    cfg: &ItpConfig,
    memory_cap: usize,
    initial: Option<WaveFunction3D<T>>,
) -> Result<(WaveFunction3D<T>, GroundStateReport)> {
    cfg.validate()?;
    let ham = Hamiltonian3D::new(grid, v_perp, v_z, gn, memory_cap)?;
    let mut psi = match initial {
        Some(p) => p,
        None => ham.default_guess()?,
    };
    psi.normalize()?;
    let peak = psi.data.iter().map(|c| c.norm_sqr().to_f64_lossy()).fold(0.0, f64::max);
    let dtau_used = stable_dtau(cfg.dtau, gn * peak);
    let dtau = T::lit(dtau_used);
    let half_kin: Vec<T> = ham.mode_energies().iter().map(|&e| (-e * dtau * T::lit(0.5)).exp()).collect();
    let mut last = ham.energetics(&psi);
    let mut report = GroundStateReport {
        converged: false,
        iterations: 0,
        mu: last.mu(),
        energy: last.energy(),
        residual: f64::INFINITY,
        energy_increases: 0,
        dtau: dtau_used,
    };
    for it in 1..=cfg.max_iters {
        ham.kinetic_real(&mut psi.data, &half_kin);
        ham.imaginary_potential_step(&mut psi.data, dtau);
        ham.kinetic_real(&mut psi.data, &half_kin);
        psi.normalize().map_err(|_| Error::Numeric(format!("field vanished at imaginary-time step {it}")))?;
        if it % cfg.renormalize_every == 0 || it == cfg.max_iters {
            let now = ham.energetics(&psi);
            if !now.mu().is_finite() {
                return Err(Error::Numeric(format!("non-finite chemical potential at imaginary-time step {it}")));
            }
            let steps = (it - report.iterations) as f64;
            report.residual = (now.mu() - last.mu()).abs() / now.mu().abs().max(f64::MIN_POSITIVE) / steps;
            if now.energy() > last.energy() + 1e-12 * last.energy().abs() + 1e-14 {
                report.energy_increases += 1;
            }
            report.iterations = it;
            report.mu = now.mu();
            report.energy = now.energy();
            last = now;
            if report.residual <= cfg.convergence_tol {
                report.converged = true;
                break;
            }
        }
    }
    if !report.converged {
        return Err(Error::NotConverged { report });
    }
    Ok((psi, report))
}
