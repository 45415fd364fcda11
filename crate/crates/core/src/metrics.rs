//! Focusing factor, focal time and rectangularity of a profile.

use serde::{Deserialize, Serialize};

use crate::dynamics::DensityTrace;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, WaveFunction};
use crate::scalar::Real;

/// Traces with fewer samples than this are flagged as sparse.
pub const MIN_DENSE_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusReport {
    /// Largest sampled `d(t)`.
    pub f: f64,
    /// Focal time from a parabola through the samples around the maximum.
    pub t_f: f64,
    /// Vertex value of that parabola.
    pub f_interpolated: f64,
    /// Time of the largest sample.
    pub t_sample: f64,
    /// `|phi(0, t_f)|^2` in lattice units (`f` times the reference density).
    pub peak_density: f64,
    /// `max_z |phi(z, 0)|^2` used for the normalization.
    pub reference: f64,
    /// False when the maximum sits on the first or last sample.
    pub bracketed: bool,
    /// False when the trace has fewer than [`MIN_DENSE_SAMPLES`] samples.
    pub dense: bool,
    /// Largest `max_z` density along the trace, when recorded.
    pub spatial_peak: Option<f64>,
}

/// Vertex of the parabola through three points (Newton form), if it opens downwards.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d12 - d01) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    let xv = 0.5 * (x[0] + x[1]) - d01 / (2.0 * a);
    Some((xv, y[0] + d01 * (xv - x[0]) + a * (xv - x[0]) * (xv - x[1])))
}

pub fn focusing_factor(trace: &DensityTrace) -> Result<FocusReport> {
    let n = trace.len();
    if n < 3 || trace.on_axis.len() != n {
        return Err(Error::config("trace", format!("need at least 3 samples, got {n}")));
    }
    if trace.on_axis.iter().any(|d| !d.is_finite()) {
        return Err(Error::Numeric("non-finite sample in density trace".into()));
    }
    let mut k = 0;
    for (i, &d) in trace.on_axis.iter().enumerate() {
        if d > trace.on_axis[k] {
            k = i;
        }
    }
    let f = trace.on_axis[k];
    let bracketed = k > 0 && k + 1 < n;
    let (t_f, f_interpolated) = if bracketed {
        let xs = [trace.times[k - 1], trace.times[k], trace.times[k + 1]];
        let ys = [trace.on_axis[k - 1], trace.on_axis[k], trace.on_axis[k + 1]];
        match parabola_vertex(xs, ys) {
            Some((t, v)) if t >= xs[0] && t <= xs[2] => (t, v.max(f)),
            _ => (trace.times[k], f),
        }
    } else {
        (trace.times[k], f)
    };
    let spatial_peak = trace.peak.iter().cloned().filter(|v| v.is_finite()).fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(FocusReport {
        f,
        t_f,
        f_interpolated,
        t_sample: trace.times[k],
        peak_density: f * trace.reference,
        reference: trace.reference,
        bracketed,
        dense: n >= MIN_DENSE_SAMPLES,
        spatial_peak,
    })
}

/// Flat-top state of amplitude `h` on `|z| < 1/(2 h^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleState {
    pub h: f64,
    pub halfwidth: f64,
}

impl RectangleState {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("rectangle amplitude must be > 0, got {h}")));
        }
        Ok(RectangleState { h, halfwidth: 1.0 / (2.0 * h * h) })
    }

    /// Rectangle with the amplitude of `phi` (its largest modulus).
    pub fn matching<T: Real>(phi: &WaveFunction<T>) -> Result<Self> {
        Self::new(phi.max_density().to_f64_lossy().sqrt())
    }

    /// Fraction of the cell `[z - dz/2, z + dz/2]` inside the support.
    pub fn coverage(&self, z: f64, dz: f64) -> f64 {
        let lo = (z - 0.5 * dz).max(-self.halfwidth);
        let hi = (z + 0.5 * dz).min(self.halfwidth);
        ((hi - lo) / dz).clamp(0.0, 1.0)
    }

    /// Cell-averaged samples, renormalized on the lattice.
    pub fn wave_function<T: Real>(&self, grid: &Grid1D<T>) -> Result<WaveFunction<T>> {
        let reach = grid.z_max().to_f64_lossy().min(-grid.z_min().to_f64_lossy());
        if self.halfwidth >= reach {
            return Err(Error::config("rectangle", format!("support {:.4} exceeds the window {reach:.4}", self.halfwidth)));
        }
        let dz = grid.dz().to_f64_lossy();
        let psi = WaveFunction::from_real_fn(*grid, |z| T::lit(self.h * self.coverage(z.to_f64_lossy(), dz)));
        psi.normalized()
    }
}

/// Rectangle of amplitude `h` on `grid`.
pub fn rectangle_state<T: Real>(h: f64, grid: &Grid1D<T>) -> Result<WaveFunction<T>> {
    RectangleState::new(h)?.wave_function(grid)
}

fn check_real<T: Real>(phi: &WaveFunction<T>, what: &str) -> Result<()> {
    let im = phi.max_imag().to_f64_lossy();
    if im > 1e-8 {
        return Err(Error::Domain(format!("{what} is not real (max imaginary part {im:.2e})")));
    }
    Ok(())
}

/// Real overlap `int phi ref dz` of two real profiles.
pub fn fidelity<T: Real>(phi: &WaveFunction<T>, reference: &WaveFunction<T>) -> Result<f64> {
    check_real(phi, "profile")?;
    check_real(reference, "reference")?;
    if phi.len() != reference.len() {
        return Err(Error::config("fidelity", "profiles live on different lattices"));
    }
    let s: f64 = phi.data.iter().zip(&reference.data).map(|(a, b)| (a.re * b.re).to_f64_lossy()).sum();
    Ok(s * phi.grid.dz().to_f64_lossy())
}

/// Overlap of `phi` with the exact rectangle of the same amplitude, each
/// lattice cell weighted by the fraction of it inside the support.
pub fn fidelity_to_rectangle<T: Real>(phi: &WaveFunction<T>) -> Result<f64> {
    check_real(phi, "profile")?;
    let rect = RectangleState::matching(phi)?;
    let dz = phi.grid.dz().to_f64_lossy();
    let s: f64 = (0..phi.len())
        .map(|i| phi.data[i].re.to_f64_lossy() * rect.h * rect.coverage(phi.grid.z(i).to_f64_lossy(), dz))
        .sum();
    Ok(s * dz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn trace_of(times: Vec<f64>, d: Vec<f64>) -> DensityTrace {
        let n = d.len();
        DensityTrace::from_raw(times, d, vec![f64::NAN; n], 1.0, 1.0)
    }

    #[test]
    fn parabola_is_recovered() {
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 * 1e-3).collect();
        let d: Vec<f64> = times.iter().map(|t| 1.5 - 40.0 * (t - 0.2213f64).powi(2)).collect();
        let r = focusing_factor(&trace_of(times, d)).unwrap();
        assert!((r.t_f - 0.2213).abs() < 1e-10);
        assert_relative_eq!(r.f_interpolated, 1.5, max_relative = 1e-12);
        assert!(r.bracketed && r.dense);
        assert!((r.t_f - r.t_sample).abs() < 1e-3);
    }

    #[test]
    fn stationary_trace_is_flagged() {
        let times: Vec<f64> = (0..600).map(|i| i as f64).collect();
        let r = focusing_factor(&trace_of(times, vec![1.0; 600])).unwrap();
        assert_eq!(r.f, 1.0);
        assert!(!r.bracketed);
    }

    #[test]
    fn rectangle_state_basics() {
        let g = Grid1D::<f64>::symmetric(1024, 2.0).unwrap();
        let r = rectangle_state(1.0, &g).unwrap();
        assert_relative_eq!(r.norm(), 1.0, max_relative = 1e-12);
        let c = g.nearest_index(0.0);
        // edges at +-0.5 fall on lattice points, each half covered
        let n_inside = (1.0 / g.dz()).round() - 1.0;
        let amp = 1.0 / ((n_inside + 0.5) * g.dz()).sqrt();
        assert_relative_eq!(r.data[c].re, amp, max_relative = 1e-12);
        assert_relative_eq!(r.data[g.nearest_index(0.5)].re, 0.5 * amp, max_relative = 1e-12);
        assert_eq!(r.data[g.nearest_index(0.75)].re, 0.0);
        assert!(rectangle_state(0.3, &g).is_err());
        let s = RectangleState::new(2.0).unwrap();
        assert_relative_eq!(s.h * s.h * 2.0 * s.halfwidth, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn fidelity_of_self_and_complex_rejection() {
        let g = Grid1D::symmetric(512, 8.0).unwrap();
        let phi = WaveFunction::from_real_fn(g, |z: f64| (-z * z).exp()).normalized().unwrap();
        assert_relative_eq!(fidelity(&phi, &phi).unwrap(), 1.0, max_relative = 1e-12);
        let mut c = phi.clone();
        c.data[100].im = 1e-3;
        assert!(fidelity(&c, &phi).is_err());
        let rect = rectangle_state(0.7, &g).unwrap();
        assert!(fidelity_to_rectangle(&rect).unwrap() > 1.0 - 1e-3);
    }

    proptest! {
        #[test]
        fn trace_scaling_invariance(scale in 1e-3f64..1e3, t0 in 0.1f64..0.3) {
            let times: Vec<f64> = (0..=600).map(|i| i as f64 * 1e-3).collect();
            let raw: Vec<f64> = times.iter().map(|t| 2.0 - 20.0 * (t - t0).powi(2)).collect();
            let r0 = raw[0];
            let a = focusing_factor(&DensityTrace::from_raw(times.clone(), raw.clone(), raw.clone(), r0, 0.6)).unwrap();
            let scaled: Vec<f64> = raw.iter().map(|d| d * scale).collect();
            let b = focusing_factor(&DensityTrace::from_raw(times, scaled.clone(), scaled, r0 * scale, 0.6)).unwrap();
            prop_assert!((a.f - b.f).abs() <= 1e-12 * a.f);
            prop_assert!((a.t_f - b.t_f).abs() < 1e-9);
            prop_assert!((a.t_f - a.t_sample).abs() <= 1e-3);
        }

        #[test]
        fn fidelity_is_bounded(w in 0.2f64..2.0, h in 0.5f64..1.5) {
            let g = Grid1D::symmetric(1024, 8.0).unwrap();
            let phi = WaveFunction::from_real_fn(g, |z| (-(z / w).powi(4)).exp()).normalized().unwrap();
            let r = rectangle_state(h, &g).unwrap();
            let f = fidelity(&phi, &r).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
            let f2 = fidelity_to_rectangle(&phi).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f2));
        }
    }
}
