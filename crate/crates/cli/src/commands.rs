use bec_focus::dynamics::{evolve_1d, EvolutionConfig, SplitStep1D};
use bec_focus::gpe3d::{validate_quasi1d, validate_quasi1d_many, ComparisonReport};
use bec_focus::groundstate::{solve_ground_1d, GroundStateReport};
use bec_focus::metrics::{fidelity_to_rectangle, focusing_factor, rectangle_state, FocusReport, RectangleState};
use bec_focus::potentials::{tf_parameters, PotentialSpec};
use bec_focus::sweep::{run_sweep, InitialMode, SweepResult};
use bec_focus::trajectories::{integrate_many, ForceField};
use bec_focus::units::{regime_warning, BOHR_RADIUS};
use bec_focus::wigner::wigner_transform;
use bec_focus::{wavefile, Spectral1D, WaveFunction};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{fmt9, Output};
use crate::CliError;

/// Ground state of the configured trap and the state evolved after the quench.
pub struct Prepared {
    pub ground: WaveFunction,
    pub report: GroundStateReport,
    pub initial: WaveFunction,
    pub g_i: f64,
    pub g_f: f64,
    pub trap: PotentialSpec,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let trap = cfg.trap()?;
    let g_i = cfg.g_tilde_i()?;
    let g_f = cfg.g_tilde_f()?;
    let grid = cfg.grid.build::<f64>()?;
    let (ground, report) = solve_ground_1d(&trap, g_i, &grid, &cfg.itp)?;
    let initial = match cfg.initial {
        InitialMode::GroundState => ground.clone(),
        InitialMode::Rectangle => rectangle_state(RectangleState::matching(&ground)?.h, &grid)?,
    };
    Ok(Prepared { ground, report, initial, g_i, g_f, trap })
}

fn focus_json(f: &FocusReport) -> Value {
    serde_json::to_value(f).unwrap_or(Value::Null)
}

pub fn ground(cfg: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let p = prepare(cfg)?;
    let psi = &p.ground;
    let z = psi.grid.positions();
    out.csv(
        "ground.csv",
        &["z", "re", "im", "density"],
        z.iter().zip(&psi.data).map(|(z, c)| vec![*z, c.re, c.im, c.norm_sqr()]),
    )?;
    out.bytes("ground.gpef", &wavefile::encode(&psi.data))?;
    let rect = RectangleState::matching(psi)?;
    let tf = match p.trap {
        PotentialSpec::LgPowerLaw { l, w0, v_l } if p.g_i > 0.0 => tf_parameters(l, w0, v_l, p.g_i).ok(),
        _ => None,
    };
    let summary = json!({
        "g_tilde_i": p.g_i,
        "report": p.report,
        "fidelity_to_rectangle": fidelity_to_rectangle(psi)?,
        "rectangle": rect,
        "mu_tf": tf.map(|t| t.0),
        "z_tf": tf.map(|t| t.1),
        "regime_warning": regime_warning(&cfg.physical, cfg.interaction.regime),
    });
    out.json("ground.json", summary.clone())?;
    Ok(summary)
}

pub fn evolve(cfg: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let p = prepare(cfg)?;
    let ev = evolve_1d(&p.initial, p.g_f, &PotentialSpec::Zero, &cfg.initial.evolution(&cfg.evolution))?;
    let tr = &ev.trace;
    out.csv(
        "trace.csv",
        &["t", "d", "peak"],
        (0..tr.len()).map(|i| vec![tr.times[i], tr.on_axis[i], tr.peak[i]]),
    )?;
    let z = ev.final_state.grid.positions();
    out.csv("final.csv", &["z", "density"], z.iter().zip(ev.final_state.density()).map(|(z, d)| vec![*z, d]))?;
    if let Some(m) = &tr.movie {
        let rows = m.times.iter().zip(&m.frames).flat_map(|(t, f)| m.z.iter().zip(f).map(move |(z, d)| vec![*t, *z, *d]));
        out.csv("movie.csv", &["t", "z", "density"], rows)?;
    }
    let focus = focusing_factor(tr)?;
    let summary = json!({
        "g_tilde_i": p.g_i,
        "g_tilde_f": p.g_f,
        "initial": cfg.initial,
        "focus": focus_json(&focus),
        "f": focus.f,
        "t_f": focus.t_f,
        "fidelity_to_rectangle": fidelity_to_rectangle(&p.ground)?,
        "norm_drift": ev.norm_drift(),
        "relative_energy_drift": ev.relative_energy_drift(),
        "steps": ev.steps,
    });
    out.json("focus.json", summary.clone())?;
    Ok(summary)
}

pub fn wigner(cfg: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let w = &cfg.wigner;
    if w.n_points * w.stride > cfg.grid.n_points {
        return Err(CliError::validation("wigner.n_points", "n_points * stride must not exceed grid.n_points"));
    }
    let p = prepare(cfg)?;
    let mut times = w.times.clone();
    times.sort_by(f64::total_cmp);
    let dt = cfg.evolution.dt;
    let mut stepper = SplitStep1D::new(&p.initial.grid, p.g_f, &PotentialSpec::Zero, dt);
    let mut psi = p.initial.clone();
    let mut step = 0usize;
    let mut frames = Vec::new();
    for (idx, &t) in times.iter().enumerate() {
        let target = (t / dt).round() as usize;
        stepper.advance(&mut psi, target - step);
        step = target;
        let sub = psi.restrict(w.n_points, w.stride)?;
        let wg = wigner_transform(&sub);
        let dens = sub.density();
        let mom = sub.to_momentum(&Spectral1D::new(sub.len())).density();
        let err_z = wg.marginal_position().iter().zip(&dens).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let err_p = wg.marginal_momentum().iter().zip(&mom).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let ds = wg.downsample(w.out_stride_z, w.out_stride_p);
        let mut rows = Vec::new();
        for (i, z) in ds.z.iter().enumerate() {
            if z.abs() > w.z_max {
                continue;
            }
            for (k, pk) in ds.p.iter().enumerate() {
                if pk.abs() <= w.p_max {
                    rows.push(vec![*z, *pk, ds.at(i, k)]);
                }
            }
        }
        out.csv(&format!("wigner_{idx}.csv"), &["z", "p", "W"], rows)?;
        frames.push(json!({
            "index": idx,
            "t": step as f64 * dt,
            "min": wg.min(),
            "max": wg.max(),
            "normalization": wg.normalization(),
            "purity": wg.purity(),
            "negativity_volume": wg.negativity_volume(),
            "marginal_position_error": err_z,
            "marginal_momentum_error": err_p,
            "max_imag": wg.max_imag,
        }));
    }
    let summary = json!({ "g_tilde_i": p.g_i, "g_tilde_f": p.g_f, "frames": frames });
    out.json("wigner.json", summary.clone())?;
    Ok(summary)
}

pub fn trajectories(cfg: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let p = prepare(cfg)?;
    let tb = &cfg.trajectory;
    let t_end = tb.t_end.unwrap_or(cfg.evolution.t_end);
    let every = ((tb.frame_interval / cfg.evolution.dt).round() as usize).max(1);
    let ecfg = EvolutionConfig { t_end, snapshot_every: Some(every), ..cfg.evolution };
    let ev = evolve_1d(&p.initial, p.g_f, &PotentialSpec::Zero, &cfg.initial.evolution(&ecfg))?;
    let movie = ev.trace.movie.as_ref().ok_or_else(|| CliError::numeric("no density frames recorded"))?;
    let field = ForceField::from_movie(movie)?;
    let starts: Vec<(f64, f64)> = tb.starts.iter().map(|s| (s[0], s[1])).collect();
    let t_field = t_end.min(field.t_max());
    let paths = integrate_many(&starts, &field, p.g_f, t_field, tb.dt)?;
    let mut list = Vec::new();
    for (i, tr) in paths.iter().enumerate() {
        out.csv(&format!("trajectory_{i}.csv"), &["t", "z", "p"], (0..tr.times.len()).map(|k| vec![tr.times[k], tr.z[k], tr.p[k]]))?;
        list.push(json!({
            "index": i,
            "z0": tr.z0,
            "p0": tr.p0,
            "z_final": tr.z.last(),
            "p_final": tr.p.last(),
            "truncated": tr.truncated,
        }));
    }
    let summary = json!({ "g_tilde_f": p.g_f, "t_end": t_field, "trajectories": list });
    out.json("trajectories.json", summary.clone())?;
    Ok(summary)
}

pub fn write_sweep(res: &SweepResult, out: &mut Output, name: &str) -> Result<(), CliError> {
    let mut cols: Vec<&str> = res.axes.iter().map(String::as_str).collect();
    cols.extend(["l", "g_tilde_i", "g_tilde_f", "f", "t_f", "f_interpolated", "bracketed", "half_width", "status"]);
    let rows = res.cells.iter().map(|c| {
        let mut r: Vec<String> = c.coords.iter().map(|v| fmt9(*v)).collect();
        r.push(c.params.l.to_string());
        r.push(fmt9(c.params.g_tilde_i));
        r.push(fmt9(c.params.g_tilde_f));
        match (&c.focus, &c.error) {
            (Some(f), _) => {
                r.extend([fmt9(f.f), fmt9(f.t_f), fmt9(f.f_interpolated), f.bracketed.to_string(), fmt9(c.half_width), "ok".into()]);
            }
            (None, e) => {
                let msg = e.clone().unwrap_or_default().replace([',', '\n'], ";");
                r.extend(["NaN".into(), "NaN".into(), "NaN".into(), "false".into(), fmt9(c.half_width), format!("error: {msg}")]);
            }
        }
        r
    });
    out.csv_text(&format!("{name}.csv"), &cols, rows)?;
    out.json(&format!("{name}.json"), serde_json::to_value(res).map_err(|e| CliError::numeric(e.to_string()))?)?;
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out: &mut Output, threads: Option<usize>) -> Result<Value, CliError> {
    let block = cfg.sweep.as_ref().ok_or_else(|| CliError::validation("sweep", "the sweep subcommand needs a [sweep] block with axes"))?;
    let sc = cfg.sweep_config(block, threads);
    let res = run_sweep(&sc)?;
    write_sweep(&res, out, "sweep")?;
    let failed = res.cells.iter().filter(|c| c.error.is_some()).count();
    Ok(json!({ "cells": res.cells.len(), "failed": failed }))
}

pub fn comparison_json(r: &ComparisonReport) -> Value {
    json!({
        "a_s_f_bohr": r.a_s_final / BOHR_RADIUS,
        "rms_weak": r.rms_weak,
        "rms_tf": r.rms_tf,
        "tf_closer": r.rms_tf < r.rms_weak,
        "focus_3d": focus_json(&r.focus_3d),
        "focus_weak": focus_json(&r.focus_weak),
        "focus_tf": focus_json(&r.focus_tf),
        "mu_3d": r.mu_3d,
        "norm_drift_3d": r.norm_drift_3d,
        "grid_shape": r.grid_shape,
        "dt": r.dt,
    })
}

/// Runs the 3D comparison for each final scattering length (Bohr radii).
pub fn validate3d_many(cfg: &RunConfig, a_s_f_bohr: &[f64], out: &mut Output) -> Result<Vec<Value>, CliError> {
    let a: Vec<f64> = a_s_f_bohr.iter().map(|a| a * BOHR_RADIUS).collect();
    let reports = validate_quasi1d_many(&cfg.physical, &a, &cfg.validate3d)?;
    reports.iter().zip(a_s_f_bohr).map(|(r, a)| write_comparison(r, out, &format!("_{a}"))).collect()
}

fn write_comparison(r: &ComparisonReport, out: &mut Output, tag: &str) -> Result<Value, CliError> {
    out.csv(
        &format!("traces{tag}.csv"),
        &["t", "d_3d", "d_1d_weak", "d_1d_tf"],
        (0..r.times.len()).map(|i| vec![r.times[i], r.d_3d[i], r.d_1d_weak[i], r.d_1d_tf[i]]),
    )?;
    let v = comparison_json(r);
    out.json(&format!("comparison{tag}.json"), v.clone())?;
    Ok(v)
}

pub fn validate3d(cfg: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let r = validate_quasi1d(&cfg.physical, cfg.interaction.a_s_f * BOHR_RADIUS, &cfg.validate3d)?;
    write_comparison(&r, out, "")
}

pub fn potential_dump(cfg: &RunConfig, out: &mut Output) -> Result<Value, CliError> {
    let d = &cfg.potential_dump;
    let grid = cfg.grid.build::<f64>()?;
    let z: Vec<f64> = grid.positions().into_iter().filter(|z| z.abs() <= d.z_max).collect();
    let mut names = vec!["z".to_string()];
    let mut specs = Vec::new();
    for &l in &d.orders {
        names.push(format!("v{l}_power_law"));
        specs.push(PotentialSpec::lg_power_law_from_laser(&cfg.physical, l)?);
        if d.full {
            names.push(format!("v{l}_full"));
            specs.push(PotentialSpec::lg_full_from_laser(&cfg.physical, l)?);
        }
    }
    let cols: Vec<&str> = names.iter().map(String::as_str).collect();
    out.csv(
        "potentials.csv",
        &cols,
        z.iter().map(|&z| std::iter::once(z).chain(specs.iter().map(|s| s.evaluate(z))).collect()),
    )?;
    let summary = json!({ "orders": d.orders, "points": z.len(), "potentials": specs });
    out.json("potentials.json", summary.clone())?;
    Ok(summary)
}
