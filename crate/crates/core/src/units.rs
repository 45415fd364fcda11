//! Dimensional constants, the nondimensionalization contract and the closed
//! form Thomas-Fermi estimates for a condensate in a transverse harmonic trap
//! closed by hard longitudinal walls.
//!
//! Everything downstream of this module works in the dimensionless system
//! `hbar = m = 1` with length unit `L_z`, time unit `1/omega_z` and energy unit
//! `hbar * omega_z`, where `omega_z = hbar / (m L_z^2)`. SI values only appear
//! here and at the I/O boundary. These functions are plain `f64`: the SI
//! magnitudes (hbar^2 ~ 1e-68) are not representable in `f32`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Bohr radius (m), CODATA 2018.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Atomic mass of 87Rb (kg).
pub const RB87_MASS: f64 = 1.443_160_60e-25;

/// Dimensional atomic and trap parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Number of atoms `N`.
    pub atom_count: f64,
    /// Atomic mass (kg).
    pub mass: f64,
    /// s-wave scattering length (m).
    pub scattering_length: f64,
    /// Transverse trap frequencies (rad/s).
    pub omega_x: f64,
    pub omega_y: f64,
    /// Longitudinal half length `L_z` (m); also the length unit.
    pub box_halflength: f64,
    /// Waist of the Laguerre-Gaussian beam (m).
    pub beam_waist: f64,
    /// Detuning (rad/s).
    pub detuning: f64,
    /// Natural decay rate (rad/s).
    pub decay_rate: f64,
    /// Saturation intensity (W/m^2).
    pub saturation_intensity: f64,
    /// Beam power (W).
    pub laser_power: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::table1()
    }
}

impl PhysicalParams {
    /// 87Rb in a 2.5 kHz transverse trap with a 15 um LG box beam.
    pub fn table1() -> Self {
        let two_pi = 2.0 * PI;
        PhysicalParams {
            atom_count: 1.0e4,
            mass: RB87_MASS,
            scattering_length: 100.0 * BOHR_RADIUS,
            omega_x: two_pi * 2.5e3,
            omega_y: two_pi * 2.5e3,
            box_halflength: 15.0e-6,
            beam_waist: 15.0e-6,
            detuning: two_pi * 1.0e13,
            decay_rate: two_pi * 6.1e6,
            saturation_intensity: 16.0,
            laser_power: 0.1,
        }
    }

    /// Same parameters with a different scattering length.
    pub fn with_scattering_length(mut self, a_s: f64) -> Self {
        self.scattering_length = a_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool, &str); 10] = [
            ("atom_count", self.atom_count >= 1.0, "must be >= 1"),
            ("mass", self.mass > 0.0, "must be > 0"),
            ("scattering_length", self.scattering_length >= 0.0, "must be >= 0"),
            ("omega_x", self.omega_x > 0.0, "must be > 0"),
            ("omega_y", self.omega_y > 0.0, "must be > 0"),
            ("box_halflength", self.box_halflength > 0.0, "must be > 0"),
            ("beam_waist", self.beam_waist > 0.0, "must be > 0"),
            ("saturation_intensity", self.saturation_intensity > 0.0, "must be > 0"),
            ("laser_power", self.laser_power >= 0.0, "must be >= 0"),
            ("detuning", self.detuning != 0.0, "must be nonzero"),
        ];
        for (key, ok, msg) in checks {
            if !ok {
                return Err(Error::config(format!("physical.{key}"), msg));
            }
        }
        let all = [
            self.atom_count,
            self.mass,
            self.scattering_length,
            self.omega_x,
            self.omega_y,
            self.box_halflength,
            self.beam_waist,
            self.detuning,
            self.decay_rate,
            self.saturation_intensity,
            self.laser_power,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("physical", "all parameters must be finite"));
        }
        Ok(())
    }

    pub fn l_x(&self) -> f64 {
        (HBAR / (self.mass * self.omega_x)).sqrt()
    }

    pub fn l_y(&self) -> f64 {
        (HBAR / (self.mass * self.omega_y)).sqrt()
    }

    /// Geometric-mean transverse oscillator length.
    pub fn l_perp(&self) -> f64 {
        (self.l_x() * self.l_y()).sqrt()
    }

    pub fn omega_perp(&self) -> f64 {
        (self.omega_x * self.omega_y).sqrt()
    }

    /// Effective longitudinal frequency `hbar / (m L_z^2)`.
    pub fn omega_z(&self) -> f64 {
        HBAR / (self.mass * self.box_halflength * self.box_halflength)
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem::new(self.mass, self.box_halflength)
    }
}

/// Base units of the dimensionless system: `L_z`, `1/omega_z`, `hbar omega_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub length_unit: f64,
    pub time_unit: f64,
    pub energy_unit: f64,
}

impl UnitSystem {
    pub fn new(mass: f64, length_unit: f64) -> Self {
        let energy_unit = HBAR * HBAR / (mass * length_unit * length_unit);
        UnitSystem { length_unit, time_unit: HBAR / energy_unit, energy_unit }
    }

    pub fn length(&self, meters: f64) -> f64 {
        meters / self.length_unit
    }

    pub fn length_si(&self, x: f64) -> f64 {
        x * self.length_unit
    }

    pub fn time(&self, seconds: f64) -> f64 {
        seconds / self.time_unit
    }

    pub fn time_si(&self, t: f64) -> f64 {
        t * self.time_unit
    }

    pub fn energy(&self, joules: f64) -> f64 {
        joules / self.energy_unit
    }

    pub fn energy_si(&self, e: f64) -> f64 {
        e * self.energy_unit
    }

    pub fn frequency(&self, rad_per_s: f64) -> f64 {
        rad_per_s * self.time_unit
    }

    /// Effective 1D coupling (J m) to units of `hbar omega_z L_z`.
    pub fn coupling_1d(&self, joule_meter: f64) -> f64 {
        joule_meter / (self.energy_unit * self.length_unit)
    }

    pub fn coupling_1d_si(&self, g: f64) -> f64 {
        g * self.energy_unit * self.length_unit
    }

    /// 3D coupling (J m^3) to units of `hbar omega_z L_z^3`.
    pub fn coupling_3d(&self, joule_m3: f64) -> f64 {
        joule_m3 / (self.energy_unit * self.length_unit.powi(3))
    }
}

/// Limiting regime used to close the transverse overlap integral `c_perp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Transverse harmonic-oscillator ground state.
    NonInteracting,
    /// Transverse Thomas-Fermi profile.
    WeaklyInteracting,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::NonInteracting => "non_interacting",
            Regime::WeaklyInteracting => "weakly_interacting",
        }
    }
}

/// Interaction constants for a given regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionParams {
    /// `4 pi hbar^2 a_s / m` (J m^3).
    pub g3d: f64,
    /// Transverse overlap `int Phi_0^4 dx dy` (1/m^2).
    pub c_perp: f64,
    /// `g3d N c_perp` (J m).
    pub g_tilde: f64,
    pub regime: Regime,
}

impl InteractionParams {
    pub fn new(params: &PhysicalParams, regime: Regime) -> Result<Self> {
        let g = g3d(params);
        let c = c_perp(params, regime)?;
        Ok(InteractionParams { g3d: g, c_perp: c, g_tilde: g * params.atom_count * c, regime })
    }

    /// `g_tilde` in units of `hbar omega_z L_z`.
    pub fn g_tilde_dimensionless(&self, units: &UnitSystem) -> f64 {
        units.coupling_1d(self.g_tilde)
    }
}

/// 3D contact coupling `4 pi hbar^2 a_s / m`.
pub fn g3d(params: &PhysicalParams) -> f64 {
    4.0 * PI * HBAR * HBAR * params.scattering_length / params.mass
}

/// Transverse overlap integral in the two closed-form regimes.
pub fn c_perp(params: &PhysicalParams, regime: Regime) -> Result<f64> {
    let base = 1.0 / (2.0 * PI * params.l_perp().powi(2));
    match regime {
        Regime::NonInteracting => Ok(base),
        Regime::WeaklyInteracting => {
            let n_as = params.atom_count * params.scattering_length;
            if n_as <= 0.0 {
                return Err(Error::Domain(
                    "weakly interacting c_perp needs N a_s > 0".into(),
                ));
            }
            Ok(base * (8.0 / 9.0 * params.box_halflength / n_as).sqrt())
        }
    }
}

/// `N a_s / L_perp`: small values favour the non-interacting closure.
pub fn interaction_ratio(params: &PhysicalParams) -> f64 {
    params.atom_count * params.scattering_length / params.l_perp()
}

/// Regime suggested by [`interaction_ratio`], if it is clearly on one side.
pub fn advised_regime(params: &PhysicalParams) -> Option<Regime> {
    let r = interaction_ratio(params);
    if r < 0.1 {
        Some(Regime::NonInteracting)
    } else if r > 10.0 {
        Some(Regime::WeaklyInteracting)
    } else {
        None
    }
}

/// Warning text when the configured regime disagrees with the advisory check.
pub fn regime_warning(params: &PhysicalParams, regime: Regime) -> Option<String> {
    match advised_regime(params) {
        Some(advised) if advised != regime => Some(format!(
            "regime {} configured but N a_s / L_perp = {:.3} suggests {}",
            regime.as_str(),
            interaction_ratio(params),
            advised.as_str()
        )),
        _ => None,
    }
}

/// Thomas-Fermi chemical potential (J) for transverse harmonic confinement
/// and hard walls at `|z| = L_z`.
pub fn chemical_potential_3d(params: &PhysicalParams) -> Result<f64> {
    if params.scattering_length <= 0.0 {
        return Err(Error::Domain("Thomas-Fermi chemical potential needs a_s > 0".into()));
    }
    let m = params.mass;
    let val = m * g3d(params) * params.atom_count * params.omega_x * params.omega_y
        / (2.0 * PI * params.box_halflength);
    Ok(val.sqrt())
}

/// Thomas-Fermi total energy and the per-particle estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfEnergy {
    /// Chemical potential (J).
    pub mu: f64,
    /// `E = (2/3) N mu` (J).
    pub total: f64,
    /// `(2 sqrt 2 / 3) hbar omega_perp sqrt(N a_s / L_z)` (J), equal to `total / N`.
    pub per_particle: f64,
}

pub fn total_energy_tf(params: &PhysicalParams) -> Result<TfEnergy> {
    let mu = chemical_potential_3d(params)?;
    let total = 2.0 / 3.0 * params.atom_count * mu;
    let per_particle = 2.0 * 2f64.sqrt() / 3.0
        * HBAR
        * params.omega_perp()
        * (params.atom_count * params.scattering_length / params.box_halflength).sqrt();
    Ok(TfEnergy { mu, total, per_particle })
}

/// Transverse energy offset `epsilon_0` (J) removed from the 1D equation.
pub fn epsilon0(params: &PhysicalParams, regime: Regime) -> Result<f64> {
    match regime {
        Regime::NonInteracting => Ok(0.5 * HBAR * (params.omega_x + params.omega_y)),
        Regime::WeaklyInteracting => Ok(chemical_potential_3d(params)? / 3.0),
    }
}

/// Effective 1D coupling in units of `hbar omega_z L_z`, evaluated entirely
/// from dimensionless inputs (`a_s / L_z`, `L_perp / L_z`). Independent of the
/// SI route through [`InteractionParams`].
pub fn g_tilde_from_dimensionless(
    atom_count: f64,
    a_s_over_lz: f64,
    l_perp_over_lz: f64,
    regime: Regime,
) -> Result<f64> {
    let mut c = 1.0 / (2.0 * PI * l_perp_over_lz * l_perp_over_lz);
    if regime == Regime::WeaklyInteracting {
        let n_as = atom_count * a_s_over_lz;
        if n_as <= 0.0 {
            return Err(Error::Domain("weakly interacting c_perp needs N a_s > 0".into()));
        }
        c *= (8.0 / 9.0 / n_as).sqrt();
    }
    Ok(4.0 * PI * a_s_over_lz * atom_count * c)
}
