//! Parameter scans of the focusing factor over interaction strengths and
//! LG orders, with a shared ground-state cache.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{evolve_1d, EvolutionConfig};
use crate::error::{Error, Result};
use crate::groundstate::{solve_ground_1d, ItpConfig};
use crate::grid::{GridSpec, WaveFunction};
use crate::metrics::{focusing_factor, rectangle_state, FocusReport, RectangleState};
use crate::potentials::PotentialSpec;
use crate::units::{InteractionParams, PhysicalParams, Regime, BOHR_RADIUS};
use crate::wavefile;

/// Dimensionless `g_tilde` for scattering length `a_s` (m), with `c_perp`
/// evaluated at that same `a_s`.
pub fn gt_from_as(a_s: f64, params: &PhysicalParams, regime: Regime) -> Result<f64> {
    if !(a_s >= 0.0) {
        return Err(Error::Domain(format!("scattering length must be >= 0, got {a_s}")));
    }
    if a_s == 0.0 {
        return Ok(0.0);
    }
    let p = params.with_scattering_length(a_s);
    Ok(InteractionParams::new(&p, regime)?.g_tilde_dimensionless(&p.units()))
}

/// Inverse of [`gt_from_as`]. In the Thomas-Fermi closure `g_tilde` grows
/// like `sqrt(a_s)`, otherwise linearly.
pub fn as_from_gt(g: f64, params: &PhysicalParams, regime: Regime) -> Result<f64> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::Domain(format!("g_tilde must be >= 0, got {g}")));
    }
    if g == 0.0 {
        return Ok(0.0);
    }
    let a_ref = params.scattering_length.max(BOHR_RADIUS);
    let g_ref = gt_from_as(a_ref, params, regime)?;
    Ok(match regime {
        Regime::NonInteracting => a_ref * g / g_ref,
        Regime::WeaklyInteracting => a_ref * (g / g_ref).powi(2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxisName {
    /// Final scattering length in Bohr radii (`c_perp` fixed by the initial state).
    #[serde(rename = "a_s_f")]
    AsFinal,
    #[serde(rename = "g_tilde_i")]
    GTildeInitial,
    #[serde(rename = "g_tilde_f")]
    GTildeFinal,
    #[serde(rename = "l")]
    Order,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::AsFinal => "a_s_f",
            AxisName::GTildeInitial => "g_tilde_i",
            AxisName::GTildeFinal => "g_tilde_f",
            AxisName::Order => "l",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One scan axis: an explicit list or a `count`-point range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn list(name: AxisName, values: Vec<f64>) -> Self {
        Axis { name, values: Some(values), start: None, stop: None, count: None, spacing: Spacing::Linear }
    }

    pub fn range(name: AxisName, start: f64, stop: f64, count: usize, spacing: Spacing) -> Self {
        Axis { name, values: None, start: Some(start), stop: Some(stop), count: Some(count), spacing }
    }

    pub fn resolve(&self) -> Result<Vec<f64>> {
        let key = format!("sweep.axes.{}", self.name.as_str());
        let vals = match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) if n >= 1 => match self.spacing {
                Spacing::Linear => (0..n).map(|i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
                Spacing::Log => {
                    if !(a > 0.0 && b > 0.0) {
                        return Err(Error::config(key, "log spacing needs positive bounds"));
                    }
                    let (la, lb) = (a.ln(), b.ln());
                    (0..n).map(|i| if n == 1 { a } else { (la + (lb - la) * i as f64 / (n - 1) as f64).exp() }).collect()
                }
            },
            _ => return Err(Error::config(key, "give either `values` or `start`, `stop` and `count >= 1`")),
        };
        if vals.is_empty() {
            return Err(Error::config(key, "axis is empty"));
        }
        for &v in &vals {
            let ok = match self.name {
                AxisName::Order => (0.0..=16.0).contains(&v) && v.fract() == 0.0,
                _ => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return Err(Error::config(key, format!("invalid value {v}")));
            }
        }
        Ok(vals)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialMode {
    #[default]
    GroundState,
    Rectangle,
}

impl InitialMode {
    /// Evolution settings for this initial state. A sampled rectangle has
    /// lattice-scale content moving at the Nyquist momentum, which reaches any
    /// window edge early, so the boundary monitor is dropped for it.
    pub fn evolution(self, cfg: &EvolutionConfig) -> EvolutionConfig {
        match self {
            InitialMode::GroundState => *cfg,
            InitialMode::Rectangle => EvolutionConfig { boundary_threshold: None, ..*cfg },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub physical: PhysicalParams,
    pub regime: Regime,
    /// LG order when `l` is not swept.
    pub l: u32,
    /// Initial coupling when not swept; defaults to the value of `physical`.
    pub g_tilde_i: Option<f64>,
    /// Final scattering length (Bohr radii) when neither final axis is swept.
    pub a_s_f: f64,
    pub mode: InitialMode,
    pub axes: Vec<Axis>,
    pub grid: GridSpec,
    pub itp: ItpConfig,
    pub evolution: EvolutionConfig,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Directory for cached ground states.
    pub cache_dir: Option<PathBuf>,
    /// Times a cell is retried on a window of twice the width (same spacing)
    /// when the boundary monitor trips.
    pub window_doublings: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            physical: PhysicalParams::table1(),
            regime: Regime::WeaklyInteracting,
            l: 10,
            g_tilde_i: None,
            a_s_f: 0.0,
            mode: InitialMode::GroundState,
            axes: Vec::new(),
            grid: GridSpec::default(),
            itp: ItpConfig::default(),
            evolution: EvolutionConfig::default(),
            threads: None,
            cache_dir: None,
            window_doublings: 2,
        }
    }
}

/// Parameters of one scan cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub l: u32,
    pub g_tilde_i: f64,
    pub g_tilde_f: f64,
    /// Final scattering length in Bohr radii, when it defines the cell.
    pub a_s_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    /// Axis values in configuration order.
    pub coords: Vec<f64>,
    pub params: CellParams,
    pub focus: Option<FocusReport>,
    pub error: Option<String>,
    /// Half-width of the window the cell finished on.
    pub half_width: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<String>,
    pub cells: Vec<CellResult>,
    pub config_hash: String,
    pub version: String,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        self.grid.build::<f64>()?;
        self.itp.validate()?;
        self.evolution.validate_forward()?;
        let mut seen = Vec::new();
        for a in &self.axes {
            if seen.contains(&a.name) {
                return Err(Error::config("sweep.axes", format!("axis `{}` given twice", a.name.as_str())));
            }
            seen.push(a.name);
            a.resolve()?;
        }
        if seen.contains(&AxisName::AsFinal) && seen.contains(&AxisName::GTildeFinal) {
            return Err(Error::config("sweep.axes", "`a_s_f` and `g_tilde_f` cannot both be swept"));
        }
        if self.l > 16 {
            return Err(Error::config("sweep.l", "must be <= 16"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("sweep.threads", "must be >= 1"));
        }
        if !(self.a_s_f >= 0.0) {
            return Err(Error::config("sweep.a_s_f", "must be >= 0"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    fn default_g_i(&self) -> Result<f64> {
        match self.g_tilde_i {
            Some(g) => Ok(g),
            None => gt_from_as(self.physical.scattering_length, &self.physical, self.regime),
        }
    }

    /// All cells in row-major axis order (last axis fastest).
    pub fn cells(&self) -> Result<Vec<(Vec<f64>, CellParams)>> {
        let axes: Vec<(AxisName, Vec<f64>)> = self.axes.iter().map(|a| Ok((a.name, a.resolve()?))).collect::<Result<_>>()?;
        let g_i0 = self.default_g_i()?;
        let a_i = self.physical.scattering_length / BOHR_RADIUS;
        let total: usize = axes.iter().map(|(_, v)| v.len()).product();
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut coords = vec![0.0; axes.len()];
            for (d, (_, vals)) in axes.iter().enumerate().rev() {
                coords[d] = vals[rem % vals.len()];
                rem /= vals.len();
            }
            let get = |n: AxisName| axes.iter().position(|(a, _)| *a == n).map(|d| coords[d]);
            let l = get(AxisName::Order).map_or(self.l, |v| v as u32);
            let g_i = get(AxisName::GTildeInitial).unwrap_or(g_i0);
            let (g_f, a_f) = match get(AxisName::GTildeFinal) {
                Some(g) => (g, None),
                None => {
                    let a_f = get(AxisName::AsFinal).unwrap_or(self.a_s_f);
                    (g_i * a_f / a_i, Some(a_f))
                }
            };
            out.push((coords, CellParams { l, g_tilde_i: g_i, g_tilde_f: g_f, a_s_f: a_f }));
        }
        Ok(out)
    }
}

type Shared = Arc<OnceLock<std::result::Result<Arc<WaveFunction<f64>>, String>>>;

/// Ground states keyed by `(l, g_tilde_i, grid, itp)`, computed once per key
/// and optionally persisted as GPEF files with a JSON manifest.
#[derive(Debug, Default)]
pub struct GroundStateCache {
    dir: Option<PathBuf>,
    entries: Mutex<HashMap<String, Shared>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheManifest {
    l: u32,
    g_tilde_i: f64,
    grid: GridSpec,
    itp: ItpConfig,
    mu: f64,
    iterations: usize,
}

impl GroundStateCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        GroundStateCache { dir, entries: Mutex::new(HashMap::new()) }
    }

    pub fn key(l: u32, g: f64, grid: &GridSpec, itp: &ItpConfig) -> String {
        let raw = format!("l={l};g={g:?};grid={:?};itp={:?}", grid, itp);
        hex::encode(&Sha256::digest(raw.as_bytes())[..12])
    }

    pub fn get(&self, params: &PhysicalParams, l: u32, g: f64, grid: &GridSpec, itp: &ItpConfig) -> Result<Arc<WaveFunction<f64>>> {
        let key = Self::key(l, g, grid, itp);
        let slot = self.entries.lock().expect("cache lock").entry(key.clone()).or_default().clone();
        slot.get_or_init(|| self.load_or_solve(&key, params, l, g, grid, itp).map(Arc::new).map_err(|e| e.to_string()))
            .clone()
            .map_err(Error::Numeric)
    }

    fn load_or_solve(&self, key: &str, params: &PhysicalParams, l: u32, g: f64, grid: &GridSpec, itp: &ItpConfig) -> Result<WaveFunction<f64>> {
        let g1 = grid.build()?;
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{key}.gpef"));
            if path.exists() {
                if let Ok(data) = wavefile::read(&path) {
                    if let Ok(psi) = WaveFunction::from_data(g1, data) {
                        return Ok(psi);
                    }
                }
            }
        }
        let v = PotentialSpec::lg_power_law_from_laser(params, l)?;
        let (psi, rep) = solve_ground_1d(&v, g, &g1, itp)?;
        if let Some(dir) = &self.dir {
            std::fs::create_dir_all(dir)?;
            wavefile::write(&dir.join(format!("{key}.gpef")), &psi.data)?;
            let manifest = CacheManifest { l, g_tilde_i: g, grid: *grid, itp: *itp, mu: rep.mu, iterations: rep.iterations };
            let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Numeric(e.to_string()))?;
            std::fs::write(dir.join(format!("{key}.json")), text)?;
        }
        Ok(psi)
    }
}

fn run_cell(cfg: &SweepConfig, cache: &GroundStateCache, p: &CellParams) -> (Result<FocusReport>, GridSpec) {
    let mut grid = cfg.grid;
    let mut left = cfg.window_doublings;
    loop {
        match run_cell_on(cfg, cache, p, &grid) {
            Err(Error::WindowTooSmall { .. }) if left > 0 => {
                left -= 1;
                grid = GridSpec { n_points: 2 * grid.n_points, half_width: 2.0 * grid.half_width };
            }
            r => return (r, grid),
        }
    }
}

fn run_cell_on(cfg: &SweepConfig, cache: &GroundStateCache, p: &CellParams, grid: &GridSpec) -> Result<FocusReport> {
    let gs = cache.get(&cfg.physical, p.l, p.g_tilde_i, grid, &cfg.itp)?;
    let initial = match cfg.mode {
        InitialMode::GroundState => (*gs).clone(),
        InitialMode::Rectangle => rectangle_state(RectangleState::matching(&gs)?.h, &gs.grid)?,
    };
    let ev = evolve_1d(&initial, p.g_tilde_f, &PotentialSpec::Zero, &cfg.mode.evolution(&cfg.evolution))?;
    focusing_factor(&ev.trace)
}

/// Evaluate every cell; failures are recorded per cell.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let cells = cfg.cells()?;
    let cache = GroundStateCache::new(cfg.cache_dir.clone());
    let work = || -> Vec<CellResult> {
        cells
            .par_iter()
            .map(|(coords, p)| {
                let start = Instant::now();
                let (r, grid) = run_cell(cfg, &cache, p);
                let runtime_s = start.elapsed().as_secs_f64();
                let (focus, error) = match r {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                CellResult { coords: coords.clone(), params: *p, focus, error, half_width: grid.half_width, runtime_s }
            })
            .collect()
    };
    let results = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numeric(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(SweepResult {
        axes: cfg.axes.iter().map(|a| a.name.as_str().to_string()).collect(),
        cells: results,
        config_hash: cfg.config_hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn coupling_conversions() {
        let p = PhysicalParams::table1();
        for regime in [Regime::NonInteracting, Regime::WeaklyInteracting] {
            assert_eq!(gt_from_as(0.0, &p, regime).unwrap(), 0.0);
            assert_eq!(as_from_gt(0.0, &p, regime).unwrap(), 0.0);
        }
        let g = gt_from_as(100.0 * BOHR_RADIUS, &p, Regime::WeaklyInteracting).unwrap();
        assert!((g - 17129.71).abs() / 17129.71 < 1e-5, "{g}");
        assert!(as_from_gt(-1.0, &p, Regime::WeaklyInteracting).is_err());
        // sqrt scaling of the composite expression
        let g4 = gt_from_as(400.0 * BOHR_RADIUS, &p, Regime::WeaklyInteracting).unwrap();
        assert_relative_eq!(g4, 2.0 * g, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip(a in 1e-3f64..500.0, weak in any::<bool>()) {
            let p = PhysicalParams::table1();
            let regime = if weak { Regime::WeaklyInteracting } else { Regime::NonInteracting };
            let a_s = a * BOHR_RADIUS;
            let back = as_from_gt(gt_from_as(a_s, &p, regime).unwrap(), &p, regime).unwrap();
            prop_assert!(((back - a_s) / a_s).abs() < 1e-10);
        }
    }

    #[test]
    fn axis_resolution() {
        let lin = Axis::range(AxisName::AsFinal, 0.0, 2.0, 5, Spacing::Linear).resolve().unwrap();
        assert_eq!(lin, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let log = Axis::range(AxisName::GTildeInitial, 1.0, 100.0, 3, Spacing::Log).resolve().unwrap();
        assert_relative_eq!(log[1], 10.0, max_relative = 1e-12);
        assert!(Axis::range(AxisName::GTildeInitial, 0.0, 100.0, 3, Spacing::Log).resolve().is_err());
        assert!(Axis::list(AxisName::Order, vec![2.5]).resolve().is_err());
        assert!(Axis::list(AxisName::Order, vec![]).resolve().is_err());
    }

    #[test]
    fn cell_layout_and_fixed_c_perp_quench() {
        let cfg = SweepConfig {
            axes: vec![Axis::list(AxisName::Order, vec![2.0, 10.0]), Axis::list(AxisName::AsFinal, vec![0.0, 0.58, 1.0])],
            ..SweepConfig::default()
        };
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[1].0, vec![2.0, 0.58]);
        let p = cells[4].1;
        assert_eq!(p.l, 10);
        assert_relative_eq!(p.g_tilde_f, p.g_tilde_i * 0.0058, max_relative = 1e-12);
        let both = SweepConfig {
            axes: vec![Axis::list(AxisName::AsFinal, vec![0.0]), Axis::list(AxisName::GTildeFinal, vec![0.0])],
            ..SweepConfig::default()
        };
        assert!(both.validate().is_err());
    }

    #[test]
    fn small_sweep_is_deterministic_and_records_failures() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SweepConfig {
            l: 6,
            g_tilde_i: Some(200.0),
            axes: vec![Axis::list(AxisName::GTildeFinal, vec![0.0, 20.0]), ],
            grid: GridSpec { n_points: 1024, half_width: 8.0 },
            itp: ItpConfig { dtau: 5e-4, convergence_tol: 1e-9, ..ItpConfig::default() },
            evolution: EvolutionConfig { dt: 5e-4, t_end: 0.3, boundary_threshold: None, ..EvolutionConfig::default() },
            threads: Some(2),
            cache_dir: Some(dir.path().to_path_buf()),
            ..SweepConfig::default()
        };
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 2);
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.focus, y.focus);
        }
        assert!(a.cells[0].focus.unwrap().f > a.cells[1].focus.unwrap().f);
        let bad = SweepConfig { axes: vec![Axis::list(AxisName::Order, vec![10.0])], grid: GridSpec { n_points: 128, half_width: 0.5 }, ..cfg };
        let r = run_sweep(&bad).unwrap();
        assert!(r.cells[0].error.is_some() && r.cells[0].focus.is_none());
    }

    #[test]
    fn tight_window_is_widened() {
        let cfg = SweepConfig {
            a_s_f: 0.58,
            axes: vec![Axis::list(AxisName::Order, vec![10.0])],
            grid: GridSpec { n_points: 2048, half_width: 4.0 },
            evolution: EvolutionConfig { t_end: 0.12, ..EvolutionConfig::default() },
            threads: Some(1),
            window_doublings: 0,
            ..SweepConfig::default()
        };
        let r = run_sweep(&cfg).unwrap();
        assert!(r.cells[0].error.as_deref().unwrap().contains("window"));
        let r = run_sweep(&SweepConfig { window_doublings: 2, ..cfg }).unwrap();
        let c = &r.cells[0];
        assert_eq!(c.half_width, 16.0);
        assert_relative_eq!(c.focus.unwrap().f, 1.25, max_relative = 0.01);
    }
}
