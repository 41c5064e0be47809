use std::fmt::Write;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{bad_param, Error};
use crate::quantum::{
    concurrence_clipped, hermitian_eigenvalues, mutual_information, r, trace_distance_correlation, CMat, DensityMatrix,
    SubsystemSplit,
};
use crate::trajectory::{first_peak, Peak};
use crate::Result;

use super::model::{build_chain_model, ChainModel, ChainParams};
use super::mpo::build_liouvillian_mpo;
use super::state::VectorizedMps;
use super::tdvp::{Tdvp, TdvpConfig};

/// Runs abort once |Tr rho - 1| exceeds this.
pub const TRACE_DRIFT_ABORT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpsConfig {
    pub chain: ChainParams,
    pub tdvp: TdvpConfig,
    pub t_max: f64,
    /// Two-emitter label: gg, ge, eg or ee. The chain starts in its ground state.
    pub initial: String,
    pub record_every: usize,
    /// Emitter-window correlation measures at every record (costly).
    pub correlations: bool,
}

impl Default for MpsConfig {
    fn default() -> Self {
        Self {
            chain: ChainParams::reference(),
            tdvp: TdvpConfig::default(),
            t_max: 40.0,
            initial: "gg".into(),
            record_every: 1,
            correlations: false,
        }
    }
}

impl MpsConfig {
    pub fn validate(&self) -> Result<()> {
        self.tdvp.validate()?;
        build_chain_model(&self.chain)?;
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(bad_param("t_max", "must be finite and >= 0"));
        }
        if self.record_every == 0 {
            return Err(bad_param("record_every", "must be >= 1"));
        }
        emitter_states(&self.initial)?;
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.tdvp.dt).round() as usize
    }
}

fn emitter_states(label: &str) -> Result<[CMat; 2]> {
    let site = |c: char| -> Result<CMat> {
        let mut m = CMat::zeros(2, 2);
        match c {
            'g' => m[(0, 0)] = r(1.0),
            'e' => m[(1, 1)] = r(1.0),
            _ => return Err(bad_param("initial", format!("unknown label `{label}`"))),
        }
        Ok(m)
    };
    let chars: Vec<char> = label.chars().collect();
    if chars.len() != 2 {
        return Err(bad_param("initial", format!("unknown label `{label}`")));
    }
    Ok([site(chars[0])?, site(chars[1])?])
}

#[derive(Debug, Clone, Default)]
pub struct MpsRun {
    pub times: Vec<f64>,
    /// Trace-normalized emitter-pair states.
    pub emitter_states: Vec<CMat>,
    pub concurrence: Vec<f64>,
    pub trace: Vec<f64>,
    pub trace_drift: Vec<f64>,
    pub min_eigenvalue: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub currents: Vec<Vec<f64>>,
    pub coherence: Vec<Vec<f64>>,
    /// Emitters vs the plaquette bath sites.
    pub mutual_information: Vec<f64>,
    pub trace_distance_correlation: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpsPeak {
    pub t_peak: f64,
    pub c_peak: f64,
    pub max_trace_drift: f64,
}

impl MpsRun {
    pub fn first_peak(&self) -> Option<Peak> {
        first_peak(&self.times, &self.concurrence, 0.02)
    }

    pub fn summary(&self) -> Option<MpsPeak> {
        let p = self.first_peak()?;
        Some(MpsPeak {
            t_peak: p.time,
            c_peak: p.value,
            max_trace_drift: self.trace_drift.iter().copied().fold(0.0, f64::max),
        })
    }

    /// Columns: t, concurrence, trace, trace_drift, min_eigenvalue.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("t,concurrence,trace,trace_drift,min_eigenvalue\n");
        for k in 0..self.times.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.times[k], self.concurrence[k], self.trace[k], self.trace_drift[k], self.min_eigenvalue[k]
            );
        }
        out
    }

    /// Long format (t, site, value) for a per-site series such as populations or coherence.
    pub fn heatmap_csv(&self, series: &[Vec<f64>], comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("t,site,value\n");
        for (t, row) in self.times.iter().zip(series) {
            for (s, v) in row.iter().enumerate() {
                let _ = writeln!(out, "{t},{s},{v}");
            }
        }
        out
    }
}

/// Nearest unit-trace PSD matrix in Frobenius norm after clipping negative eigenvalues.
/// Truncated states are slightly non-positive; the entropy-based measures need a state.
fn psd_projection(m: &CMat) -> CMat {
    let h = (m + m.adjoint()) * r(0.5);
    let eig = SymmetricEigen::new(h);
    let ev: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = ev.iter().sum();
    let u = &eig.eigenvectors;
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(ev.len(), ev.iter().map(|v| r(v / total))));
    u * d * u.adjoint()
}

struct Recorder<'a> {
    model: &'a ChainModel,
    correlations: bool,
    run: MpsRun,
}

impl Recorder<'_> {
    fn record(&mut self, t: f64, state: &VectorizedMps) -> Result<()> {
        let [n1, n2] = self.model.emitters;
        let tr = state.trace().re;
        let drift = (tr - 1.0).abs();
        let pair = state.reduced(&[n1, n2])?;
        let norm = pair.trace().re;
        let pair = (&pair + pair.adjoint()) * r(0.5 / norm);
        let (pops, cur) = state.populations_and_currents(&self.model.j1);
        let run = &mut self.run;
        run.times.push(t);
        run.concurrence.push(concurrence_clipped(&pair));
        run.min_eigenvalue.push(hermitian_eigenvalues(&pair)[0]);
        run.emitter_states.push(pair);
        run.trace.push(tr);
        run.trace_drift.push(drift);
        run.populations.push(pops);
        run.currents.push(cur);
        run.coherence.push(state.transverse_coherence());
        if self.correlations {
            let sites = [n1, n2, n1 - 1, n1 + 1, n2 - 1, n2 + 1];
            let m = state.reduced(&sites)?;
            let rho = DensityMatrix::from_raw(psd_projection(&m));
            let split = SubsystemSplit::qubits(6, vec![0, 1])?;
            run.mutual_information.push(mutual_information(&rho, &split).unwrap_or(f64::NAN));
            run.trace_distance_correlation.push(trace_distance_correlation(&rho, &split).unwrap_or(f64::NAN));
        }
        if drift > TRACE_DRIFT_ABORT {
            return Err(Error::Integration {
                t,
                reason: format!("trace drift {drift:e} exceeds {TRACE_DRIFT_ABORT}"),
            });
        }
        Ok(())
    }
}

/// Evolve from ground chain plus the labelled emitter state, recording every `record_every` steps.
pub fn run_mps_experiment(cfg: &MpsConfig) -> Result<MpsRun> {
    cfg.validate()?;
    let model = build_chain_model(&cfg.chain)?;
    run_model(&model, cfg)
}

/// As [`run_mps_experiment`] on an explicitly built (possibly modified) model.
pub fn run_model(model: &ChainModel, cfg: &MpsConfig) -> Result<MpsRun> {
    cfg.validate()?;
    let mpo = build_liouvillian_mpo(model)?;
    let [a, b] = emitter_states(&cfg.initial)?;
    let mut state = VectorizedMps::chain_state(model.n, model.emitters, [&a, &b], cfg.tdvp.d_max)?;
    let mut tdvp = Tdvp::new(&mpo, cfg.tdvp, &mut state)?;
    let mut rec = Recorder {
        model,
        correlations: cfg.correlations,
        run: MpsRun::default(),
    };
    rec.record(0.0, &state)?;
    for k in 1..=cfg.steps() {
        tdvp.step(&mut state)?;
        if k % cfg.record_every == 0 {
            rec.record(k as f64 * cfg.tdvp.dt, &state)?;
        }
    }
    Ok(rec.run)
}
