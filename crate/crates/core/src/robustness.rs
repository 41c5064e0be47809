//! Disorder ensembles and beta-factor scans around the optimum.
//!
//! Position disorder shifts emitter 2's coupling points by a continuous q (cross-kernel phase),
//! detuning disorder adds delta_i sigma_i^+ sigma_i^- to the coherent part. Kernels stay nominal.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{bad_param, Error};
use crate::markov::ChiralMarkovParams;
use crate::quantum::{concurrence_clipped, r, CMat, DensityMatrix};
use crate::tcl::{Perturbation, TclConfig, TclEngine};
use crate::trajectory::first_peak;
use crate::{par, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderTarget {
    Position,
    Detuning1,
    Detuning2,
    DetuningBoth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    QuasiStatic,
    DynamicOu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub target: DisorderTarget,
    pub kind: DisorderKind,
    /// Lattice units for position, units of J for detuning.
    pub sigma: f64,
    /// OU correlation time (dynamic only).
    pub tau: f64,
    pub realizations: usize,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(bad_param("sigma", "must be finite and >= 0"));
        }
        if self.kind == DisorderKind::DynamicOu && !(self.tau > 0.0) {
            return Err(bad_param("tau", "must be > 0 for dynamic disorder"));
        }
        if self.realizations == 0 {
            return Err(bad_param("realizations", "must be >= 1"));
        }
        Ok(())
    }
}

/// Independent stream per realization: ChaCha seeded by `seed`, stream number `index`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_quasi_static<R: Rng>(sigma: f64, rng: &mut R) -> f64 {
    let xi: f64 = rng.sample(StandardNormal);
    sigma * xi
}

/// Exact OU discretization on `steps + 1` grid points with a stationary start.
pub fn ou_path<R: Rng>(sigma: f64, tau: f64, dt: f64, steps: usize, rng: &mut R) -> Vec<f64> {
    let decay = (-dt / tau).exp();
    let kick = sigma * (1.0 - decay * decay).sqrt();
    let mut q = sample_quasi_static(sigma, rng);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(q);
    for _ in 0..steps {
        let xi: f64 = rng.sample(StandardNormal);
        q = q * decay + kick * xi;
        out.push(q);
    }
    out
}

fn draw<R: Rng>(spec: &DisorderSpec, dt: f64, steps: usize, rng: &mut R) -> Vec<f64> {
    match spec.kind {
        DisorderKind::QuasiStatic => vec![sample_quasi_static(spec.sigma, rng)],
        DisorderKind::DynamicOu => ou_path(spec.sigma, spec.tau, dt, steps, rng),
    }
}

pub fn realization_perturbation(spec: &DisorderSpec, dt: f64, steps: usize, index: u64) -> Perturbation {
    let mut rng = realization_rng(spec.seed, index);
    let mut p = Perturbation::default();
    match spec.target {
        DisorderTarget::Position => p.position = draw(spec, dt, steps, &mut rng),
        DisorderTarget::Detuning1 => p.detuning[0] = draw(spec, dt, steps, &mut rng),
        DisorderTarget::Detuning2 => p.detuning[1] = draw(spec, dt, steps, &mut rng),
        DisorderTarget::DetuningBoth => {
            p.detuning[0] = draw(spec, dt, steps, &mut rng);
            p.detuning[1] = draw(spec, dt, steps, &mut rng);
        }
    }
    p
}

/// Streaming mean and variance.
#[derive(Debug, Clone, Default)]
pub struct Welford {
    pub n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    pub fn push(&mut self, x: &[f64]) {
        if self.n == 0 {
            self.mean = vec![0.0; x.len()];
            self.m2 = vec![0.0; x.len()];
        }
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Sample standard deviation (zero for a single sample).
    pub fn std(&self) -> Vec<f64> {
        let denom = (self.n.max(2) - 1) as f64;
        self.m2.iter().map(|s| (s / denom).max(0.0).sqrt()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub mean_concurrence: Vec<f64>,
    pub std_concurrence: Vec<f64>,
    /// Concurrence of the ensemble-averaged state.
    pub concurrence_of_mean: Vec<f64>,
    pub realizations: usize,
    pub failed: usize,
    pub failures: Vec<(usize, String)>,
}

impl EnsembleResult {
    /// First peak of the mean single-realization concurrence.
    pub fn mean_first_peak(&self) -> f64 {
        first_peak(&self.times, &self.mean_concurrence, 0.02).map(|p| p.value).unwrap_or(0.0)
    }

    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("t,mean_C,std_C,C_of_mean_state\n");
        for k in 0..self.times.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.times[k], self.mean_concurrence[k], self.std_concurrence[k], self.concurrence_of_mean[k]
            );
        }
        out
    }
}

/// Realizations of the TCL-2 engine under `spec`; failed realizations are excluded and counted.
pub fn run_disorder_ensemble(base: &TclConfig, spec: &DisorderSpec) -> Result<EnsembleResult> {
    spec.validate()?;
    let engine = TclEngine::new(base)?;
    let steps = base.steps();
    let dt = base.dt;
    let runs = par::map_range(spec.realizations, |i| {
        let p = realization_perturbation(spec, dt, steps, i as u64);
        engine.concurrence_series(&p)
    });
    let mut stats = Welford::default();
    let mut sum: Vec<CMat> = Vec::new();
    let mut times = Vec::new();
    let mut failures = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        match run {
            Ok((t, c, states)) => {
                stats.push(&c);
                if sum.is_empty() {
                    sum = states;
                    times = t;
                } else {
                    for (acc, s) in sum.iter_mut().zip(&states) {
                        *acc += s;
                    }
                }
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    if stats.n == 0 {
        return Err(Error::Integration {
            t: 0.0,
            reason: format!("all {} realizations failed", spec.realizations),
        });
    }
    let k = r(1.0 / stats.n as f64);
    Ok(EnsembleResult {
        concurrence_of_mean: sum.iter().map(|s| concurrence_clipped(&(s * k))).collect(),
        mean_concurrence: stats.mean().to_vec(),
        std_concurrence: stats.std(),
        times,
        realizations: stats.n,
        failed: failures.len(),
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossPattern {
    Both,
    UpstreamOnly,
    DownstreamOnly,
}

impl LossPattern {
    pub const ALL: [LossPattern; 3] = [LossPattern::Both, LossPattern::UpstreamOnly, LossPattern::DownstreamOnly];

    pub fn betas(self, a: f64) -> [f64; 2] {
        match self {
            LossPattern::Both => [a, a],
            LossPattern::UpstreamOnly => [a, 1.0],
            LossPattern::DownstreamOnly => [1.0, a],
        }
    }
}

#[derive(Debug, Clone)]
pub enum BetaEngine {
    /// Guided rate 2 g_i^2 / J per emitter; loss added so that beta_i = a.
    Tcl(TclConfig),
    /// Waveguide model with gamma_tot fixed; the guided part is beta_i gamma_tot.
    Markov { params: ChiralMarkovParams, t_max: f64, dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaPoint {
    pub a: f64,
    pub c_max: f64,
    pub t_max: f64,
    /// Mean over the final 10% of the run.
    pub c_ss: f64,
}

fn late_average(c: &[f64]) -> f64 {
    let start = c.len() - (c.len() / 10).max(1);
    c[start..].iter().sum::<f64>() / (c.len() - start) as f64
}

pub fn beta_factor_scan(a_values: &[f64], pattern: LossPattern, engine: &BetaEngine) -> Result<Vec<BetaPoint>> {
    for a in a_values {
        if !(*a > 0.0 && *a <= 1.0) {
            return Err(bad_param("a", format!("{a} outside (0, 1]")));
        }
    }
    let out = par::map(a_values, |&a| -> Result<BetaPoint> {
        let beta = pattern.betas(a);
        match engine {
            BetaEngine::Tcl(base) => {
                let mut cfg = base.clone();
                for (i, b) in beta.iter().enumerate() {
                    let guided = 2.0 * base.bath.g[i].powi(2) / base.bath.j;
                    cfg.gamma_loss[i] = guided * (1.0 - b) / b;
                }
                let (times, c, _) = TclEngine::new(&cfg)?.concurrence_series(&Perturbation::default())?;
                let p = first_peak(&times, &c, 0.02).ok_or_else(|| bad_param("t_max", "empty run"))?;
                Ok(BetaPoint {
                    a,
                    c_max: p.value,
                    t_max: p.time,
                    c_ss: late_average(&c),
                })
            }
            BetaEngine::Markov { params, t_max, dt } => {
                let gamma_tot = params.gamma_l + params.gamma_r;
                let chirality = params.gamma_r / gamma_tot;
                let mut p = ChiralMarkovParams::with_beta(gamma_tot, chirality, beta, params.phi);
                p.omega = params.omega;
                p.detuning = params.detuning;
                let rho0 = DensityMatrix::basis(4, 0);
                let traj = crate::markov::integrate_markov(&p, &rho0, *t_max, *dt)?;
                let c = traj.series("concurrence").unwrap_or(&[]);
                let fp = first_peak(&traj.times, c, 0.02).ok_or_else(|| bad_param("t_max", "empty run"))?;
                Ok(BetaPoint {
                    a,
                    c_max: fp.value,
                    t_max: fp.time,
                    c_ss: late_average(c),
                })
            }
        }
    });
    out.into_iter().collect()
}
