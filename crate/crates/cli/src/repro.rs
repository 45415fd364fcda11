//! Canned runs for each figure: data files plus `summary.json`.

use bec_focus::groundstate::solve_ground_1d;
use bec_focus::metrics::fidelity_to_rectangle;
use bec_focus::potentials::PotentialSpec;
use bec_focus::sweep::{run_sweep, Axis, AxisName, InitialMode, Spacing, SweepResult};
use bec_focus::units::BOHR_RADIUS;
use clap::ValueEnum;
use serde_json::{json, Value};

use crate::commands::{self, write_sweep};
use crate::config::{RunConfig, SweepBlock};
use crate::output::Output;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }
}

pub const FIG4_ORDERS: [u32; 4] = [2, 6, 10, 12];
pub const RED_CROSS_A_S_F: f64 = 0.58;

fn quench(base: &RunConfig, a_s_f: f64) -> RunConfig {
    let mut c = base.clone();
    c.interaction.a_s_f = a_s_f;
    c.interaction.g_tilde_f = None;
    c
}

pub fn run(fig: Figure, base: &RunConfig, out: &mut Output, threads: Option<usize>) -> Result<Value, CliError> {
    let mut dir = out.sub(fig.name())?;
    let summary = match fig {
        Figure::Fig3a | Figure::Fig3b => {
            let a = if fig == Figure::Fig3a { 0.0 } else { RED_CROSS_A_S_F };
            let mut cfg = quench(base, a);
            cfg.initial = InitialMode::GroundState;
            if cfg.evolution.snapshot_every.is_none() {
                cfg.evolution.snapshot_every = Some(((0.005 / cfg.evolution.dt).round() as usize).max(1));
                cfg.evolution.snapshot_stride = 8;
            }
            let s = commands::evolve(&cfg, &mut dir)?;
            json!({ "a_s_f_bohr": a, "f": s["f"], "t_f": s["t_f"], "fidelity_to_rectangle": s["fidelity_to_rectangle"],
                    "g_tilde_i": s["g_tilde_i"], "g_tilde_f": s["g_tilde_f"] })
        }
        Figure::Fig4 => fig4(base, &mut dir, threads)?,
        Figure::Fig5 => fig5(base, &mut dir, threads)?,
        Figure::Fig6 => {
            let runs = commands::validate3d_many(base, &[0.0, RED_CROSS_A_S_F], &mut dir)?;
            json!({ "runs": runs })
        }
        Figure::Fig7 => {
            let mut runs = Vec::new();
            for (tag, a) in [("free", 0.0), ("interacting", RED_CROSS_A_S_F)] {
                let mut cfg = quench(base, a);
                cfg.initial = InitialMode::GroundState;
                let mut sub = dir.sub(tag)?;
                let w = commands::wigner(&cfg, &mut sub)?;
                let t = commands::trajectories(&cfg, &mut sub)?;
                runs.push(json!({ "a_s_f_bohr": a, "wigner": w, "trajectories": t }));
            }
            json!({ "runs": runs })
        }
    };
    dir.json("summary.json", summary.clone())?;
    Ok(summary)
}

/// Nonincreasing check with a relative slack for round-off.
pub fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
}

fn column(res: &SweepResult, l: u32, pick: impl Fn(&bec_focus::metrics::FocusReport) -> f64) -> Vec<f64> {
    res.cells.iter().filter(|c| c.params.l == l).map(|c| c.focus.as_ref().map_or(f64::NAN, &pick)).collect()
}

fn fig4(base: &RunConfig, dir: &mut Output, threads: Option<usize>) -> Result<Value, CliError> {
    let axes = vec![
        Axis::list(AxisName::Order, FIG4_ORDERS.iter().map(|&l| l as f64).collect()),
        Axis::range(AxisName::AsFinal, 0.0, 2.0, 15, Spacing::Linear),
    ];
    let block = SweepBlock { axes, cache_dir: base.sweep.as_ref().and_then(|s| s.cache_dir.clone()), ..Default::default() };
    let mut results = Vec::new();
    for mode in [InitialMode::GroundState, InitialMode::Rectangle] {
        let mut cfg = base.clone();
        cfg.initial = mode;
        let res = run_sweep(&cfg.sweep_config(&block, threads))?;
        let name = if mode == InitialMode::GroundState { "sweep_ground" } else { "sweep_rectangle" };
        write_sweep(&res, dir, name)?;
        results.push(res);
    }
    let mut per_l = Vec::new();
    for l in FIG4_ORDERS {
        let f = column(&results[0], l, |r| r.f);
        let t = column(&results[0], l, |r| r.t_f);
        let tr = column(&results[1], l, |r| r.t_f);
        let gap = t.iter().zip(&tr).map(|(a, b)| ((b - a) / a).abs()).fold(0.0, f64::max);
        per_l.push(json!({
            "l": l, "f": f, "t_f": t, "t_f_rectangle": tr,
            "f_nonincreasing": nonincreasing(&f), "t_f_nonincreasing": nonincreasing(&t),
            "max_relative_t_f_gap": gap,
        }));
    }
    // fidelity of each order's ground state to its rectangle
    let grid = base.grid.build::<f64>()?;
    let g_i = base.g_tilde_i()?;
    let mut fid = Vec::new();
    for l in 2..=12 {
        let trap = PotentialSpec::lg_power_law_from_laser(&base.physical, l)?;
        let (phi, _) = solve_ground_1d(&trap, g_i, &grid, &base.itp)?;
        fid.push(vec![l as f64, fidelity_to_rectangle(&phi)?]);
    }
    dir.csv("fidelity.csv", &["l", "fidelity"], fid.clone())?;
    Ok(json!({ "orders": per_l, "fidelity": fid }))
}

fn fig5(base: &RunConfig, dir: &mut Output, threads: Option<usize>) -> Result<Value, CliError> {
    let g_i = base.g_tilde_i()?;
    let cache = base.sweep.as_ref().and_then(|s| s.cache_dir.clone());
    let mut cfg = base.clone();
    cfg.initial = InitialMode::GroundState;
    let grid_block = SweepBlock {
        axes: vec![
            Axis::range(AxisName::GTildeInitial, 1e2, 1e5, 24, Spacing::Log),
            Axis::range(AxisName::GTildeFinal, 1.0, 1e3, 24, Spacing::Log),
        ],
        cache_dir: cache.clone(),
        ..Default::default()
    };
    let contour = run_sweep(&cfg.sweep_config(&grid_block, threads))?;
    write_sweep(&contour, dir, "contour")?;
    let g_red = g_i * RED_CROSS_A_S_F * BOHR_RADIUS / base.physical.scattering_length;
    let checks = SweepBlock {
        axes: vec![Axis::list(AxisName::GTildeInitial, vec![1e2, g_i]), Axis::list(AxisName::GTildeFinal, vec![0.0, g_red])],
        cache_dir: cache,
        ..Default::default()
    };
    let pts = run_sweep(&cfg.sweep_config(&checks, threads))?;
    write_sweep(&pts, dir, "reference_cells")?;
    let f = |i: usize| pts.cells[i].focus.map_or(f64::NAN, |r| r.f);
    Ok(json!({
        "g_tilde_i": g_i,
        "g_tilde_f_red_cross": g_red,
        "f_red_cross": f(3),
        "f_weak_initial_free": f(0),
        "f_reference_initial_free": f(2),
        "weak_initial_focuses_less": f(0) < f(2),
    }))
}
