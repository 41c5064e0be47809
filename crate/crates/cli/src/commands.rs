//! Subcommand dispatch onto the engines.

use std::fmt::Write;
use std::path::Path;
use std::time::Instant;

use chiral_core::bath::{lattice_integral, lattice_integral_asymptotic};
use chiral_core::markov::{drive_sweep, integrate_markov_with, optimize_drives, ChiralMarkovParams, MarkovRun};
use chiral_core::mps::{run_mps_experiment, MpsRun};
use chiral_core::quantum::trace_norm;
use chiral_core::robustness::{beta_factor_scan, run_disorder_ensemble, BetaEngine};
use chiral_core::tcl::{
    blp_witness, derive_generator_terms, distance_sweep, optimize_parameters, table_entries, Bounds, TclEngine,
};
use chiral_core::trajectory::Trajectory;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, Engine, ExperimentConfig};
use crate::output::{select_columns, Sink};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] chiral_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Engine(_) => "engine",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Disorder,
    Kernels,
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Disorder => "disorder",
            Command::Kernels => "kernels",
            Command::Optimize => "optimize",
        }
    }
}

/// Runs `command` and writes the summary; returns the summary document.
pub fn run(command: Command, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Value, CliError> {
    let start = Instant::now();
    let mut sink = Sink::new(out_dir, cfg, command.name())?;
    let results = match command {
        Command::Simulate => simulate(cfg, &mut sink)?,
        Command::Sweep => sweep(cfg, &mut sink)?,
        Command::Disorder => disorder(cfg, &mut sink)?,
        Command::Kernels => kernels(cfg, &mut sink)?,
        Command::Optimize => optimize(cfg, &mut sink)?,
    };
    Ok(sink.summary(command.name(), cfg, results, start.elapsed().as_secs_f64())?)
}

fn peaks(traj: &Trajectory, fidelity: &str) -> Value {
    let gp = traj.peak("concurrence");
    let fp = traj.first_peak("concurrence");
    let fid = traj.peak(fidelity);
    json!({
        "peak_concurrence": gp.map(|p| p.value),
        "peak_time": gp.map(|p| p.time),
        "first_peak_concurrence": fp.map(|p| p.value),
        "first_peak_time": fp.map(|p| p.time),
        "fidelity_at_first_peak": fp.and_then(|p| traj.series(fidelity).map(|s| s[p.index])),
        "max_fidelity": fid.map(|p| p.value),
        "max_fidelity_time": fid.map(|p| p.time),
    })
}

fn markov_run(cfg: &ExperimentConfig, params: &ChiralMarkovParams) -> Result<Trajectory, CliError> {
    let rho0 = cfg.initial.density_matrix().map_err(CliError::Usage)?;
    let run = MarkovRun {
        t_max: cfg.time.t_max,
        dt: cfg.time.dt,
        record_every: cfg.time.record_every,
    };
    Ok(integrate_markov_with(params, &rho0, &run)?)
}

fn simulate(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value, CliError> {
    match cfg.engine {
        Engine::Markov => {
            let m = cfg.markov_section();
            if m.chirality_scan.is_empty() {
                let traj = markov_run(cfg, &m.params())?;
                sink.write("trajectory", &select_columns(&traj.to_csv(sink.header()), &cfg.outputs))?;
                return Ok(peaks(&traj, "bell_fidelity"));
            }
            let mut rows = Vec::new();
            for g_r in &m.chirality_scan {
                let mut p = m.params();
                p.gamma_r = *g_r;
                p.gamma_l = 1.0 - g_r;
                let traj = markov_run(cfg, &p)?;
                let kind = format!("trajectory_gr{g_r}");
                sink.write(&kind, &select_columns(&traj.to_csv(sink.header()), &cfg.outputs))?;
                let mut v = peaks(&traj, "bell_fidelity");
                v["gamma_r"] = json!(g_r);
                rows.push(v);
            }
            Ok(json!({ "curves": rows }))
        }
        Engine::Mps => simulate_mps(cfg, sink),
        _ => {
            let tcl = cfg.tcl_config();
            let traj = TclEngine::new(&tcl)?.run()?;
            sink.write("trajectory", &select_columns(&traj.to_csv(sink.header()), &cfg.outputs))?;
            let mut v = peaks(&traj, "fidelity");
            if let Some(partner) = &cfg.blp_partner {
                let blp = blp_witness(&tcl, (&tcl.initial, partner))?;
                let mut csv = comment(sink.header());
                csv.push_str("t,trace_distance\n");
                for (t, d) in blp.times.iter().zip(&blp.distance) {
                    let _ = writeln!(csv, "{t},{d}");
                }
                sink.write("trace_distance", &csv)?;
                v["blp_positive_integral"] = json!(blp.positive_integral);
                v["blp_positive_integral_5_20"] = json!(blp.positive_integral_in(5.0, 20.0));
            }
            Ok(v)
        }
    }
}

fn comment(header: &str) -> String {
    header.lines().map(|l| format!("# {l}\n")).collect()
}

fn mps_summary(run: &MpsRun) -> Value {
    let s = run.summary();
    json!({
        "first_peak_concurrence": s.map(|p| p.c_peak),
        "first_peak_time": s.map(|p| p.t_peak),
        "max_trace_drift": s.map(|p| p.max_trace_drift),
        "min_eigenvalue": run.min_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

fn simulate_mps(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let m = cfg.mps_section();
    if !m.d_max_scan.is_empty() {
        let mut csv = comment(sink.header());
        csv.push_str("d_max,t_peak,c_peak,max_trace_drift\n");
        let mut rows = Vec::new();
        for &d in &m.d_max_scan {
            let run = run_mps_experiment(&cfg.mps_config(d))?;
            sink.write(&format!("trajectory_d{d}"), &run.to_csv(sink.header()))?;
            let s = run.summary();
            let (t, c, drift) = s.map(|p| (p.t_peak, p.c_peak, p.max_trace_drift)).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
            let _ = writeln!(csv, "{d},{t},{c},{drift}");
            let mut v = mps_summary(&run);
            v["d_max"] = json!(d);
            rows.push(v);
        }
        sink.write("convergence", &csv)?;
        return Ok(json!({ "rows": rows }));
    }
    let mcfg = cfg.mps_config(m.d_max);
    let run = run_mps_experiment(&mcfg)?;
    sink.write("trajectory", &run.to_csv(sink.header()))?;
    if m.heatmaps {
        sink.write("populations", &run.heatmap_csv(&run.populations, sink.header()))?;
        sink.write("currents", &run.heatmap_csv(&run.currents, sink.header()))?;
        sink.write("coherence", &run.heatmap_csv(&run.coherence, sink.header()))?;
    }
    if m.correlations {
        let mut csv = comment(sink.header());
        csv.push_str("t,concurrence,mutual_information,trace_distance_correlation\n");
        for k in 0..run.times.len() {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                run.times[k], run.concurrence[k], run.mutual_information[k], run.trace_distance_correlation[k]
            );
        }
        sink.write("correlations", &csv)?;
    }
    let mut v = mps_summary(&run);
    if let Some(partner) = &cfg.blp_partner {
        let other = run_mps_experiment(&chiral_core::mps::MpsConfig {
            initial: partner.clone(),
            correlations: false,
            ..mcfg
        })?;
        let mut csv = comment(sink.header());
        csv.push_str("t,trace_distance\n");
        let mut rising = 0.0;
        let mut prev: Option<f64> = None;
        for (k, t) in run.times.iter().enumerate() {
            let d = 0.5 * trace_norm(&(&run.emitter_states[k] - &other.emitter_states[k]));
            if let Some(p) = prev {
                rising += (d - p).max(0.0);
            }
            prev = Some(d);
            let _ = writeln!(csv, "{t},{d}");
        }
        sink.write("trace_distance", &csv)?;
        v["blp_positive_integral"] = json!(rising);
    }
    Ok(v)
}

fn sweep(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let s = cfg.sweep.as_ref().ok_or_else(|| CliError::Usage("sweep needs a [sweep] section".into()))?;
    match cfg.engine {
        Engine::Markov => {
            let o2 = s.omega_2.ok_or_else(|| CliError::Usage("markov sweep needs sweep.omega_2".into()))?;
            let rho0 = cfg.initial.density_matrix().map_err(CliError::Usage)?;
            let surf = drive_sweep(
                &cfg.markov_section().params(),
                &s.omega_1.grid(),
                &o2.grid(),
                &rho0,
                cfg.time.t_max,
                cfg.time.dt,
            )?;
            sink.write("surface", &surf.to_csv(sink.header()))?;
            let (c1, c2, cp) = surf.argmax_concurrence();
            let (f1, f2, fpk) = surf.argmax_fidelity();
            let corner = surf.cell(0, 0);
            Ok(json!({
                "max_concurrence": cp.max_concurrence,
                "argmax_concurrence": [c1, c2],
                "t_max_concurrence": cp.t_max_concurrence,
                "max_bell_fidelity": fpk.max_bell_fidelity,
                "argmax_fidelity": [f1, f2],
                "corner_concurrence": corner.max_concurrence,
            }))
        }
        Engine::Mps => Err(CliError::Usage("sweep is not available for the mps engine".into())),
        _ => {
            if s.distances.is_empty() {
                return Err(CliError::Usage("TCL sweep needs sweep.distances".into()));
            }
            let surf = distance_sweep(&cfg.tcl_config(), &s.omega_1.grid(), &s.distances)?;
            sink.write("surface", &surf.to_csv(sink.header()))?;
            let level = 2.0 / std::f64::consts::E;
            let mut best = (0.0, 0, f64::NEG_INFINITY);
            for (di, d) in surf.distances.iter().enumerate() {
                for (oi, o) in surf.omegas.iter().enumerate() {
                    if surf.at(oi, di) > best.2 {
                        best = (*o, *d, surf.at(oi, di));
                    }
                }
            }
            Ok(json!({
                "max_concurrence": best.2,
                "argmax": { "omega_1": best.0, "d": best.1 },
                "cells_above_2_over_e": surf.above(level).len(),
            }))
        }
    }
}

fn disorder(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let mut out = json!({});
    if cfg.disorder.is_none() && cfg.beta.is_none() {
        return Err(CliError::Usage("disorder needs a [disorder] or [beta] section".into()));
    }
    if let Some(spec) = &cfg.disorder {
        if cfg.engine.tcl_mode().is_none() {
            return Err(CliError::Usage("disorder ensembles run on the TCL engines".into()));
        }
        let base = cfg.tcl_config();
        let res = run_disorder_ensemble(&base, spec)?;
        for (i, e) in &res.failures {
            sink.warnings.push(format!("realization {i} failed: {e}"));
        }
        sink.write("ensemble", &res.to_csv(sink.header()))?;
        let nominal = TclEngine::new(&base)?.peak()?.first_peak_concurrence;
        out["nominal_first_peak"] = json!(nominal);
        out["mean_first_peak"] = json!(res.mean_first_peak());
        out["realizations"] = json!(res.realizations);
        out["failed"] = json!(res.failed);
    }
    if let Some(b) = &cfg.beta {
        let engine = match cfg.engine {
            Engine::Markov => {
                let m = cfg.markov_section();
                BetaEngine::Markov {
                    params: m.params(),
                    t_max: cfg.time.t_max,
                    dt: cfg.time.dt,
                }
            }
            Engine::Mps => return Err(CliError::Usage("beta scans run on the markov or TCL engines".into())),
            _ => BetaEngine::Tcl(cfg.tcl_config()),
        };
        let mut csv = comment(sink.header());
        csv.push_str("pattern,a,c_max,t_max,c_ss\n");
        let mut rows = Vec::new();
        for p in &b.patterns {
            let name = serde_json::to_value(p).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            for pt in beta_factor_scan(&b.a, *p, &engine)? {
                let _ = writeln!(csv, "{name},{},{},{},{}", pt.a, pt.c_max, pt.t_max, pt.c_ss);
                rows.push(json!({ "pattern": name, "a": pt.a, "c_max": pt.c_max, "c_ss": pt.c_ss }));
            }
        }
        sink.write("beta", &csv)?;
        out["beta"] = json!(rows);
    }
    Ok(out)
}

fn kernels(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let k = cfg.kernels.clone().unwrap_or_default();
    let ch = cfg.chain_section();
    let mut csv = comment(sink.header());
    csv.push_str("n,omega,t,re,im,regime,limit_re,limit_im\n");
    let mut count = 0;
    for n in 0..=k.n_max {
        for &w in &k.omegas {
            let asym = lattice_integral_asymptotic(n, w, ch.j);
            let regime = serde_json::to_value(asym.regime).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            let (lr, li) = asym.value.map(|v| (v.re, v.im)).unwrap_or((f64::NAN, f64::NAN));
            for &t in &k.times {
                let v = lattice_integral(n, w, t, ch.j)?;
                let _ = writeln!(csv, "{n},{w},{t},{},{},{regime},{lr},{li}", v.re, v.im);
                count += 1;
            }
        }
    }
    sink.write("lattice_integrals", &csv)?;
    let mut out = json!({ "lattice_integral_rows": count });
    if k.generator_table {
        let terms = derive_generator_terms(ch.omega[0], ch.omega[1])?;
        let mut csv = comment(sink.header());
        csv.push_str("i,j,xi_units,alpha,beta,chi_units,sign\n");
        let entries = table_entries(&terms, ch.omega[0])?;
        for e in &entries {
            let _ = writeln!(csv, "{},{},{},{},{},{},{}", e.pair.0, e.pair.1, e.xi_units, e.alpha, e.beta, e.chi_units, e.sign);
        }
        sink.write("generator_terms", &csv)?;
        out["generator_terms"] = json!(entries.len());
    }
    if k.kernel_table {
        if cfg.engine.tcl_mode().is_none() {
            return Err(CliError::Usage("kernel_table needs a TCL engine".into()));
        }
        let engine = TclEngine::new(&cfg.tcl_config())?;
        let mut csv = comment(sink.header());
        csv.push_str("t,omega,i,j,re,im\n");
        let rows = engine.kernels().rows();
        for (t, w, i, j, v) in &rows {
            let _ = writeln!(csv, "{t},{w},{i},{j},{},{}", v.re, v.im);
        }
        sink.write("kernel_table", &csv)?;
        out["kernel_table_rows"] = json!(rows.len());
    }
    Ok(out)
}

fn optimize(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Value, CliError> {
    let o = cfg.optimize.as_ref().ok_or_else(|| CliError::Usage("optimize needs an [optimize] section".into()))?;
    match cfg.engine {
        Engine::Markov => {
            let rho0 = cfg.initial.density_matrix().map_err(CliError::Usage)?;
            let (surf, b1, b2, best) = optimize_drives(
                &cfg.markov_section().params(),
                (o.omega_1.lo, o.omega_1.hi),
                o.omega_1.n,
                o.refinements,
                &rho0,
                cfg.time.t_max,
                cfg.time.dt,
            )?;
            sink.write("surface", &surf.to_csv(sink.header()))?;
            Ok(json!({
                "omega": [b1, b2],
                "max_concurrence": best.max_concurrence,
                "t_max_concurrence": best.t_max_concurrence,
                "max_bell_fidelity": best.max_bell_fidelity,
            }))
        }
        Engine::Mps => Err(CliError::Usage("optimize is not available for the mps engine".into())),
        _ => {
            let ch = cfg.chain_section();
            let g1 = o.g_1.map(|a| a.bounds()).unwrap_or(Bounds::point(ch.g[0]));
            let g2 = o.g_2.map(|a| a.bounds()).unwrap_or(Bounds::point(ch.g[1]));
            let opt = optimize_parameters(&cfg.tcl_config(), [o.omega_1.bounds(), o.omega_2.bounds(), g1, g2], o.refinements)?;
            let mut csv = comment(sink.header());
            csv.push_str("omega_1,omega_2,g_1,g_2,first_peak\n");
            for p in &opt.surface {
                let _ = writeln!(csv, "{},{},{},{},{}", p.x[0], p.x[1], p.x[2], p.x[3], p.value);
            }
            sink.write("samples", &csv)?;
            Ok(json!({
                "best": { "omega_1": opt.best.x[0], "omega_2": opt.best.x[1], "g_1": opt.best.x[2], "g_2": opt.best.x[3] },
                "first_peak_concurrence": opt.best.value,
                "samples": opt.surface.len(),
            }))
        }
    }
}
