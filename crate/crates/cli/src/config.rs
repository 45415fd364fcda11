use std::path::{Path, PathBuf};

use bec_focus::dynamics::EvolutionConfig;
use bec_focus::gpe3d::Validate3DConfig;
use bec_focus::grid::GridSpec;
use bec_focus::groundstate::ItpConfig;
use bec_focus::potentials::PotentialSpec;
use bec_focus::sweep::{gt_from_as, Axis, InitialMode, SweepConfig};
use bec_focus::units::{PhysicalParams, Regime, BOHR_RADIUS};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionBlock {
    pub regime: Regime,
    /// Overrides the coupling derived from `physical`.
    pub g_tilde_i: Option<f64>,
    /// Final scattering length in Bohr radii.
    pub a_s_f: f64,
    /// Overrides `a_s_f`.
    pub g_tilde_f: Option<f64>,
}

impl Default for InteractionBlock {
    fn default() -> Self {
        InteractionBlock { regime: Regime::WeaklyInteracting, g_tilde_i: None, a_s_f: 0.0, g_tilde_f: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerBlock {
    pub times: Vec<f64>,
    /// Points of the centered sub-lattice the transform runs on.
    pub n_points: usize,
    /// Lattice decimation before the transform.
    pub stride: usize,
    /// Output decimation along z and p.
    pub out_stride_z: usize,
    pub out_stride_p: usize,
    /// Only rows and columns with |z| and |p| below these are written.
    pub z_max: f64,
    pub p_max: f64,
}

impl Default for WignerBlock {
    fn default() -> Self {
        WignerBlock { times: vec![0.0, 0.05, 0.1, 0.2], n_points: 1024, stride: 4, out_stride_z: 2, out_stride_p: 2, z_max: 4.0, p_max: 60.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryBlock {
    /// Initial `(z, p)` pairs.
    pub starts: Vec<[f64; 2]>,
    pub dt: f64,
    /// Defaults to `evolution.t_end`.
    pub t_end: Option<f64>,
    /// Spacing of the recorded density frames.
    pub frame_interval: f64,
}

impl Default for TrajectoryBlock {
    fn default() -> Self {
        let p0 = std::f64::consts::FRAC_PI_2;
        TrajectoryBlock { starts: vec![[0.5, p0], [0.5, -p0], [-0.5, p0], [-0.5, -p0]], dt: 1e-4, t_end: None, frame_interval: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub axes: Vec<Axis>,
    pub cache_dir: Option<PathBuf>,
    /// Retries on a doubled window when the boundary monitor trips.
    pub window_doublings: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DumpBlock {
    pub orders: Vec<u32>,
    /// Also write the full LG profile next to the power law.
    pub full: bool,
    pub z_max: f64,
}

impl Default for DumpBlock {
    fn default() -> Self {
        DumpBlock { orders: vec![2, 6, 10, 12], full: true, z_max: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Recorded in provenance; every code path is deterministic regardless of thread count.
    pub deterministic: bool,
    pub physical: PhysicalParams,
    pub interaction: InteractionBlock,
    /// LG order of the trap.
    pub l: u32,
    /// Explicit trap; defaults to the power-law LG trap of order `l`.
    pub potential: Option<PotentialSpec>,
    pub initial: InitialMode,
    pub grid: GridSpec,
    pub itp: ItpConfig,
    pub evolution: EvolutionConfig,
    pub wigner: WignerBlock,
    pub trajectory: TrajectoryBlock,
    pub sweep: Option<SweepBlock>,
    pub validate3d: Validate3DConfig,
    pub potential_dump: DumpBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("out"),
            deterministic: true,
            physical: PhysicalParams::table1(),
            interaction: InteractionBlock::default(),
            l: 10,
            potential: None,
            initial: InitialMode::GroundState,
            grid: GridSpec::default(),
            itp: ItpConfig::default(),
            evolution: EvolutionConfig::default(),
            wigner: WignerBlock::default(),
            trajectory: TrajectoryBlock::default(),
            sweep: None,
            validate3d: Validate3DConfig::default(),
            potential_dump: DumpBlock::default(),
        }
    }
}

fn cfg_err(key: &str, msg: impl Into<String>) -> CliError {
    CliError::from(bec_focus::Error::config(key, msg))
}

impl RunConfig {
    /// Parse a TOML or JSON file (chosen by extension, TOML otherwise), then
    /// apply `key.path=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut value = match path {
            None => Value::Object(Default::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::validation("config", format!("cannot read {}: {e}", p.display())))?;
                if p.extension().is_some_and(|e| e == "json") {
                    serde_json::from_str(&text).map_err(|e| CliError::validation("config", format!("{}: {e}", p.display())))?
                } else {
                    toml::from_str::<Value>(&text).map_err(|e| CliError::validation("config", format!("{}: {e}", p.display())))?
                }
            }
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| CliError::validation("config", e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.physical.validate()?;
        if self.l > bec_focus::potentials::MAX_LG_ORDER {
            return Err(cfg_err("l", format!("must be <= {}", bec_focus::potentials::MAX_LG_ORDER)));
        }
        if let Some(p) = &self.potential {
            p.validate()?;
        }
        self.grid.build::<f64>()?;
        self.itp.validate()?;
        self.evolution.validate_forward()?;
        let i = &self.interaction;
        if !(i.a_s_f >= 0.0) {
            return Err(cfg_err("interaction.a_s_f", "must be >= 0"));
        }
        for (k, v) in [("interaction.g_tilde_i", i.g_tilde_i), ("interaction.g_tilde_f", i.g_tilde_f)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(cfg_err(k, "must be finite"));
                }
            }
        }
        let w = &self.wigner;
        if w.times.iter().any(|t| !(*t >= 0.0)) {
            return Err(cfg_err("wigner.times", "times must be >= 0"));
        }
        if w.stride == 0 || w.out_stride_z == 0 || w.out_stride_p == 0 {
            return Err(cfg_err("wigner.stride", "strides must be >= 1"));
        }
        if !w.n_points.is_power_of_two() || w.n_points < 64 {
            return Err(cfg_err("wigner.n_points", "must be a power of two >= 64"));
        }
        let t = &self.trajectory;
        if !(t.dt > 0.0) {
            return Err(cfg_err("trajectory.dt", "must be > 0"));
        }
        if !(t.frame_interval >= self.evolution.dt) {
            return Err(cfg_err("trajectory.frame_interval", "must be >= evolution.dt"));
        }
        if let Some(te) = t.t_end {
            if !(te > 0.0) {
                return Err(cfg_err("trajectory.t_end", "must be > 0"));
            }
        }
        if let Some(s) = &self.sweep {
            self.sweep_config(s, None).validate()?;
        }
        let v = &self.validate3d;
        if v.nx < 8 || v.ny < 8 || v.nz < 64 {
            return Err(cfg_err("validate3d.nx", "3D lattice too small"));
        }
        if self.potential_dump.orders.iter().any(|&l| l > bec_focus::potentials::MAX_LG_ORDER) {
            return Err(cfg_err("potential_dump.orders", "order too large"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    /// SHA-256 of the resolved configuration; the output location is left out.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("output_dir");
        }
        hex::encode(Sha256::digest(serde_json::to_vec(&v).expect("config serializes")))
    }

    pub fn trap(&self) -> Result<PotentialSpec, CliError> {
        Ok(match &self.potential {
            Some(p) => *p,
            None => PotentialSpec::lg_power_law_from_laser(&self.physical, self.l)?,
        })
    }

    pub fn g_tilde_i(&self) -> Result<f64, CliError> {
        Ok(match self.interaction.g_tilde_i {
            Some(g) => g,
            None => gt_from_as(self.physical.scattering_length, &self.physical, self.interaction.regime)?,
        })
    }

    /// Final coupling at fixed `c_perp`.
    pub fn g_tilde_f(&self) -> Result<f64, CliError> {
        Ok(match self.interaction.g_tilde_f {
            Some(g) => g,
            None => self.g_tilde_i()? * self.interaction.a_s_f * BOHR_RADIUS / self.physical.scattering_length,
        })
    }

    pub fn sweep_config(&self, block: &SweepBlock, threads: Option<usize>) -> SweepConfig {
        SweepConfig {
            physical: self.physical,
            regime: self.interaction.regime,
            l: self.l,
            g_tilde_i: self.interaction.g_tilde_i,
            a_s_f: self.interaction.a_s_f,
            mode: self.initial,
            axes: block.axes.clone(),
            grid: self.grid,
            itp: self.itp,
            evolution: self.evolution,
            threads,
            cache_dir: block.cache_dir.clone(),
            window_doublings: block.window_doublings.unwrap_or(SweepConfig::default().window_doublings),
        }
    }
}

/// `a.b.c=value`: the value is parsed as a TOML literal, falling back to a string.
fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::validation("set", format!("override `{spec}` is not of the form key=value")))?;
    let parsed: Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|t| t.get("v").cloned())
        .and_then(|v| serde_json::to_value(v).ok())
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::validation("set", format!("bad key `{path}`")));
    }
    let mut cur = root;
    for k in &keys[..keys.len() - 1] {
        if !cur.is_object() {
            return Err(CliError::validation(path, "cannot descend into a non-table value"));
        }
        cur = cur.as_object_mut().unwrap().entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    match cur.as_object_mut() {
        Some(obj) => {
            obj.insert(keys[keys.len() - 1].to_string(), parsed);
            Ok(())
        }
        None => Err(CliError::validation(path, "cannot descend into a non-table value")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let json = serde_json::to_value(&cfg).unwrap();
        let back: RunConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn overrides_are_typed() {
        let cfg = RunConfig::load(None, &["evolution.dt=5e-4".into(), "l=6".into(), "interaction.regime=\"non_interacting\"".into()]).unwrap();
        assert_eq!(cfg.evolution.dt, 5e-4);
        assert_eq!(cfg.l, 6);
        assert_eq!(cfg.interaction.regime, Regime::NonInteracting);
        assert!(RunConfig::load(None, &["evolution.dtt=1".into()]).is_err());
        assert!(RunConfig::load(None, &["novalue".into()]).is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.l = 6;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn quench_coupling_keeps_c_perp() {
        let cfg = RunConfig::load(None, &["interaction.a_s_f=0.58".into()]).unwrap();
        let (gi, gf) = (cfg.g_tilde_i().unwrap(), cfg.g_tilde_f().unwrap());
        assert!((gi - 17129.71).abs() < 0.2);
        assert!((gf - gi * 0.0058).abs() < 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn float_overrides_round_trip(dt in 1e-7f64..1e-2, a in 0.0f64..5.0) {
            let cfg = RunConfig::load(None, &[format!("evolution.dt={dt:e}"), format!("interaction.a_s_f={a:?}")]).unwrap();
            proptest::prop_assert_eq!(cfg.evolution.dt, dt);
            proptest::prop_assert_eq!(cfg.interaction.a_s_f, a);
            let mut other = cfg.clone();
            other.evolution.dt *= 2.0;
            proptest::prop_assert_ne!(cfg.hash(), other.hash());
        }
    }
}
