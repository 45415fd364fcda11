//! External potentials in dimensionless units and the Thomas-Fermi profile of
//! the Laguerre-Gaussian box.
//!
//! Lengths are in `L_z`, energies in `hbar omega_z` and trap frequencies in
//! `omega_z`. The only SI entry points are [`lg_intensity`] and the
//! `*_from_laser` constructors.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveFunction};
use crate::scalar::Real;
use crate::units::{PhysicalParams, HBAR};

/// Largest supported Laguerre-Gaussian order.
/// Ceiling applied by [`PotentialSpec::sample`].
pub const V_CLIP: f64 = 1e12;

pub const MAX_LG_ORDER: u32 = 16;

/// Potential families, all in dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// Transverse trap `(omega_x^2 x^2 + omega_y^2 y^2) / 2`.
    Harmonic2D { omega_x: f64, omega_y: f64 },
    /// Longitudinal oscillator `omega^2 z^2 / 2`.
    Harmonic1D { omega: f64 },
    /// Dipole potential of the LG beam, `v_l (z/w0)^(2l) exp(-2 z^2 / w0^2)`.
    LgFull { l: u32, w0: f64, v_l: f64 },
    /// Small-`z` power law `v_l (z/w0)^(2l)`.
    LgPowerLaw { l: u32, w0: f64, v_l: f64 },
    /// Zero inside `|z| < halfwidth`, infinite outside.
    HardBox { halfwidth: f64 },
    Zero,
}

/// `l!` in floating point (exact for `l <= 18`).
pub fn factorial(l: u32) -> f64 {
    (1..=l).map(f64::from).product()
}

/// LG intensity profile (W/m^2) at radius `rho` (m).
pub fn lg_intensity(l: u32, w0: f64, power: f64, rho: f64) -> f64 {
    let s = 2.0 * rho * rho / (w0 * w0);
    2.0 / (PI * factorial(l)) * power / (w0 * w0) * s.powi(l as i32) * (-s).exp()
}

/// Amplitude `v_l` (J) of the power-law potential built from beam parameters.
pub fn v_l_si(params: &PhysicalParams, l: u32) -> f64 {
    let w0 = params.beam_waist;
    2f64.powi(l as i32) / (4.0 * PI * factorial(l)) * HBAR * params.decay_rate.powi(2) / params.detuning
        * params.laser_power
        / (params.saturation_intensity * w0 * w0)
}

/// Dipole potential (J) of the LG beam at `rho` (m) straight from the intensity.
pub fn lg_dipole_si(params: &PhysicalParams, l: u32, rho: f64) -> f64 {
    HBAR * params.decay_rate.powi(2) / (8.0 * params.detuning)
        * lg_intensity(l, params.beam_waist, params.laser_power, rho)
        / params.saturation_intensity
}

fn check_order(l: u32) -> Result<()> {
    if l > MAX_LG_ORDER {
        return Err(Error::config("potential.l", format!("order {l} exceeds {MAX_LG_ORDER}")));
    }
    Ok(())
}

impl PotentialSpec {
    /// Power-law LG potential of order `l` from the laser parameters.
    pub fn lg_power_law_from_laser(params: &PhysicalParams, l: u32) -> Result<Self> {
        check_order(l)?;
        let u = params.units();
        Ok(PotentialSpec::LgPowerLaw { l, w0: u.length(params.beam_waist), v_l: u.energy(v_l_si(params, l)) })
    }

    pub fn lg_full_from_laser(params: &PhysicalParams, l: u32) -> Result<Self> {
        check_order(l)?;
        let u = params.units();
        Ok(PotentialSpec::LgFull { l, w0: u.length(params.beam_waist), v_l: u.energy(v_l_si(params, l)) })
    }

    /// Transverse trap of `params` in units of `omega_z`.
    pub fn transverse_from(params: &PhysicalParams) -> Self {
        let u = params.units();
        PotentialSpec::Harmonic2D { omega_x: u.frequency(params.omega_x), omega_y: u.frequency(params.omega_y) }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("potential.{key}"), format!("must be positive and finite, got {v}")))
            }
        };
        match *self {
            PotentialSpec::Harmonic2D { omega_x, omega_y } => {
                positive("omega_x", omega_x)?;
                positive("omega_y", omega_y)
            }
            PotentialSpec::Harmonic1D { omega } => positive("omega", omega),
            PotentialSpec::LgFull { l, w0, v_l } | PotentialSpec::LgPowerLaw { l, w0, v_l } => {
                check_order(l)?;
                positive("w0", w0)?;
                positive("v_l", v_l)
            }
            PotentialSpec::HardBox { halfwidth } => positive("halfwidth", halfwidth),
            PotentialSpec::Zero => Ok(()),
        }
    }

    /// True for the families that depend on `z` only.
    pub fn is_longitudinal(&self) -> bool {
        !matches!(self, PotentialSpec::Harmonic2D { .. })
    }

    /// Potential at position `z`; `f64::INFINITY` outside a hard box.
    /// Transverse traps evaluate to zero along the axis.
    pub fn evaluate(&self, z: f64) -> f64 {
        match *self {
            PotentialSpec::Harmonic2D { .. } | PotentialSpec::Zero => 0.0,
            PotentialSpec::Harmonic1D { omega } => 0.5 * omega * omega * z * z,
            PotentialSpec::LgFull { l, w0, v_l } => {
                let s = z / w0;
                v_l * s.powi(2 * l as i32) * (-2.0 * s * s).exp()
            }
            PotentialSpec::LgPowerLaw { l, w0, v_l } => v_l * (z / w0).powi(2 * l as i32),
            PotentialSpec::HardBox { halfwidth } => {
                if z.abs() < halfwidth {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Transverse value at `(x, y)`; zero for longitudinal families.
    pub fn evaluate_transverse(&self, x: f64, y: f64) -> f64 {
        match *self {
            PotentialSpec::Harmonic2D { omega_x, omega_y } => 0.5 * (omega_x * omega_x * x * x + omega_y * omega_y * y * y),
            _ => 0.0,
        }
    }

    /// Values on the lattice, finite ones clipped at [`V_CLIP`]. Far up a
    /// steep wall the field is zero to round-off, and unclipped values
    /// (`~1e33` for l = 10 at the window edge) would turn that round-off into
    /// O(1) errors in the potential energy.
    pub fn sample<T: Real>(&self, grid: &Grid1D<T>) -> Vec<T> {
        (0..grid.len())
            .map(|i| {
                let v = self.evaluate(grid.z(i).to_f64_lossy());
                T::lit(if v.is_finite() { v.min(V_CLIP) } else { v })
            })
            .collect()
    }

    /// Position `w0 sqrt(l/2)` of the maximum of the full LG potential.
    pub fn wall_position(&self) -> Option<f64> {
        match *self {
            PotentialSpec::LgFull { l, w0, .. } | PotentialSpec::LgPowerLaw { l, w0, .. } => Some(w0 * (l as f64 / 2.0).sqrt()),
            PotentialSpec::HardBox { halfwidth } => Some(halfwidth),
            _ => None,
        }
    }

    /// `mu / V_l(z_l)` for LG potentials: values well below one mean the
    /// power law is a fair description of the occupied region.
    pub fn wall_ratio(&self, mu: f64) -> Option<f64> {
        match *self {
            PotentialSpec::LgFull { l, w0, v_l } | PotentialSpec::LgPowerLaw { l, w0, v_l } => {
                let full = PotentialSpec::LgFull { l, w0, v_l };
                Some(mu / full.evaluate(w0 * (l as f64 / 2.0).sqrt()))
            }
            _ => None,
        }
    }
}

/// Thomas-Fermi solution of the 1D equation in the power-law LG trap.
#[derive(Debug, Clone)]
pub struct TfProfile1D<T> {
    pub mu_tf: f64,
    pub z_tf: f64,
    pub l: u32,
    pub psi: WaveFunction<T>,
}

/// Closed-form `(mu_TF, z_TF)` for `v_l (z/w0)^(2l)` at coupling `g`.
pub fn tf_parameters(l: u32, w0: f64, v_l: f64, g: f64) -> Result<(f64, f64)> {
    if !(g > 0.0) {
        return Err(Error::Domain(format!("Thomas-Fermi profile needs g_tilde > 0, got {g}")));
    }
    if l == 0 {
        return Err(Error::Domain("Thomas-Fermi profile needs l >= 1".into()));
    }
    let two_l = 2.0 * l as f64;
    let mu = (1.0 + 1.0 / two_l).powf(two_l / (two_l + 1.0))
        * (v_l * g.powf(two_l) / (2f64.powf(two_l) * w0.powf(two_l))).powf(1.0 / (two_l + 1.0));
    let z = w0 * (mu / v_l).powf(1.0 / two_l);
    Ok((mu, z))
}

/// Sampled Thomas-Fermi profile, renormalized on `grid`.
pub fn tf_profile_lg<T: Real>(l: u32, w0: f64, v_l: f64, g: f64, grid: &Grid1D<T>) -> Result<TfProfile1D<T>> {
    let (mu_tf, z_tf) = tf_parameters(l, w0, v_l, g)?;
    let v = PotentialSpec::LgPowerLaw { l, w0, v_l };
    let psi = WaveFunction::from_real_fn(*grid, |z| {
        let z = z.to_f64_lossy();
        T::lit(if z.abs() < z_tf { ((mu_tf - v.evaluate(z)) / g).max(0.0).sqrt() } else { 0.0 })
    });
    let psi = psi.normalized().map_err(|_| {
        Error::Domain(format!("Thomas-Fermi radius {z_tf:.3e} is not resolved by the grid"))
    })?;
    Ok(TfProfile1D { mu_tf, z_tf, l, psi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn intensity_closed_forms() {
        let (w0, p) = (15e-6, 0.1);
        assert_relative_eq!(lg_intensity(0, w0, p, 0.0), 2.0 * p / (PI * w0 * w0), max_relative = 1e-15);
        for l in 1..=16 {
            assert_eq!(lg_intensity(l, w0, p, 0.0), 0.0);
        }
    }

    #[test]
    fn intensity_peak_by_scan() {
        let w0 = 1.0;
        for l in [1u32, 2, 6, 10, 12] {
            let n = 200_000;
            let (mut best, mut at) = (0.0, 0.0);
            for i in 0..=n {
                let rho = 3.0 * i as f64 / n as f64;
                let v = lg_intensity(l, w0, 1.0, rho);
                if v > best {
                    best = v;
                    at = rho;
                }
            }
            assert!((at - w0 * (l as f64 / 2.0).sqrt()).abs() < 2e-5, "l={l}: {at}");
        }
    }

    #[test]
    fn intensity_carries_beam_power() {
        // Radial quadrature of 2 pi rho I(rho) with Simpson's rule.
        let (w0, p) = (15e-6, 0.1);
        for l in [0u32, 2, 10] {
            let n = 20_000;
            let r_max = 8.0 * w0;
            let h = r_max / n as f64;
            let f = |r: f64| 2.0 * PI * r * lg_intensity(l, w0, p, r);
            let mut s = f(0.0) + f(r_max);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            assert_relative_eq!(s * h / 3.0, p, max_relative = 1e-6);
        }
    }

    #[test]
    fn dipole_potential_matches_power_law_prefactor() {
        let params = PhysicalParams::table1();
        let u = params.units();
        let spec = PotentialSpec::lg_full_from_laser(&params, 10).unwrap();
        for zi in [0.1, 0.4, 0.9, 1.7] {
            let si = lg_dipole_si(&params, 10, zi * params.beam_waist);
            assert_relative_eq!(u.energy(si), spec.evaluate(zi / u.length(params.beam_waist)), max_relative = 1e-12);
        }
    }

    #[test]
    fn power_law_amplitude_and_validity() {
        let params = PhysicalParams::table1();
        let pl = PotentialSpec::lg_power_law_from_laser(&params, 10).unwrap();
        let full = PotentialSpec::lg_full_from_laser(&params, 10).unwrap();
        let (w0, v_l) = match pl {
            PotentialSpec::LgPowerLaw { w0, v_l, .. } => (w0, v_l),
            _ => unreachable!(),
        };
        assert_relative_eq!(pl.evaluate(w0), v_l, max_relative = 1e-15);
        // v_10 from the beam parameters: 2^10/(4 pi 10!) (hbar Gamma^2/Delta) P/(I_s w0^2)
        // divided by hbar omega_z, evaluated independently.
        let two_pi = 2.0 * PI;
        let omega_z = HBAR / (params.mass * 15e-6f64.powi(2));
        let expect = 1024.0 / (4.0 * PI * 3_628_800.0) * (two_pi * 6.1e6).powi(2) / (two_pi * 1e13) * 0.1
            / (16.0 * 15e-6f64.powi(2))
            / omega_z;
        assert_relative_eq!(v_l, expect, max_relative = 1e-12);
        for i in 1..=400 {
            // e^{-2 z^2 / w0^2} > 0.99 needs z < 0.0709 w0
            let z = 0.07 * w0 * i as f64 / 400.0;
            let (a, b) = (pl.evaluate(z), full.evaluate(z));
            assert!((a - b).abs() <= 0.01 * b.max(a), "z={z}: {a} vs {b}");
        }
    }

    #[test]
    fn other_families() {
        assert_eq!(PotentialSpec::Harmonic2D { omega_x: 3.0, omega_y: 2.0 }.evaluate_transverse(0.0, 0.0), 0.0);
        assert_eq!(PotentialSpec::Harmonic2D { omega_x: 3.0, omega_y: 2.0 }.evaluate_transverse(1.0, 1.0), 6.5);
        let b = PotentialSpec::HardBox { halfwidth: 1.0 };
        assert_eq!(b.evaluate(0.99), 0.0);
        assert!(b.evaluate(1.0).is_infinite() && b.evaluate(-3.0).is_infinite());
        assert_eq!(PotentialSpec::Zero.evaluate(5.0), 0.0);
        assert!(PotentialSpec::LgPowerLaw { l: 17, w0: 1.0, v_l: 1.0 }.validate().is_err());
        assert!(PotentialSpec::HardBox { halfwidth: -1.0 }.validate().is_err());
    }

    #[test]
    fn tf_identities() {
        let g = 17129.71;
        for l in 1..=16u32 {
            let (mu, z) = tf_parameters(l, 1.0, 4490.4 * 2f64.powi(l as i32 - 10) * factorial(10) / factorial(l), g).unwrap();
            let two_l = 2.0 * l as f64;
            assert_relative_eq!(2.0 * two_l / (two_l + 1.0) * mu / g * z, 1.0, max_relative = 1e-10);
        }
        assert!(tf_parameters(10, 1.0, 1.0, 0.0).is_err());
        assert!(tf_parameters(0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tf_profile_sampling() {
        let grid = Grid1D::<f64>::symmetric(4096, 4.0).unwrap();
        let tf = tf_profile_lg(10, 1.0, 4490.4, 17129.71, &grid).unwrap();
        // closed form (1 + 1/2l)^(2l/(2l+1)) (v g^2l / 2^2l)^(1/(2l+1))
        let closed = 1.05f64.powf(20.0 / 21.0) * (4490.4 * (17129.71f64 / 2.0).powi(20)).powf(1.0 / 21.0);
        assert_relative_eq!(tf.mu_tf, closed, max_relative = 1e-12);
        assert!((tf.mu_tf - 8700.54).abs() < 0.01, "{}", tf.mu_tf);
        let v = PotentialSpec::LgPowerLaw { l: 10, w0: 1.0, v_l: 4490.4 };
        assert_relative_eq!(v.evaluate(tf.z_tf), tf.mu_tf, max_relative = 1e-10);
        assert_relative_eq!(tf.psi.norm(), 1.0, max_relative = 1e-12);
        for (z, c) in grid.positions().iter().zip(&tf.psi.data) {
            assert!(c.re >= 0.0 && c.im == 0.0);
            if z.abs() > tf.z_tf {
                assert_eq!(c.re, 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn lg_is_even_with_zero_minimum(l in 1u32..=16, z in 0.0f64..2.0, w0 in 0.5f64..2.0) {
            for spec in [PotentialSpec::LgFull { l, w0, v_l: 100.0 }, PotentialSpec::LgPowerLaw { l, w0, v_l: 100.0 }] {
                prop_assert_eq!(spec.evaluate(z), spec.evaluate(-z));
                prop_assert!(spec.evaluate(z) >= 0.0);
                prop_assert_eq!(spec.evaluate(0.0), 0.0);
            }
        }

        #[test]
        fn tf_mu_grows_with_coupling(l in 1u32..=16, g in 1.0f64..1e5, k in 1.01f64..10.0) {
            let (a, _) = tf_parameters(l, 1.0, 1000.0, g).unwrap();
            let (b, _) = tf_parameters(l, 1.0, 1000.0, g * k).unwrap();
            prop_assert!(b > a);
        }
    }
}
