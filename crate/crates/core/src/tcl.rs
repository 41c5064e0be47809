//! Second-order time-convolutionless (TCL-2) dynamics of two driven emitters on the spin-chain bath,
//! with Redfield and secular variants.
//!
//! Interaction picture with respect to H_S = sum_i Omega_i sigma_x^(i). Each lowering operator is split
//! into Bohr components, sigma_i(t) = sum_nu e^{i nu t} S_i(nu), and the generator reads
//!
//!   d rho/dt = sum_ij sum_{nu, nu'} e^{i (nu - nu') t} Gamma_ij(t; nu) [S_j(nu) rho, S_i(nu')^+] + h.c.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::bath::{tcl_kernel, KernelCache, SpinChainBathParams};
use crate::error::{bad_param, Error, Result};
use crate::par;
use crate::quantum::{
    c, concurrence_clipped, hermitian_eigenvalues, on_qubit, r, sigma_minus, sigma_x, sigma_y, sigma_z,
    trace_norm, two_qubit_basis_state, CMat, DensityMatrix, PureState, C64, I,
};
use crate::trajectory::{first_peak, global_peak, Trajectory};

type M4 = Matrix4<C64>;

pub const MAX_TRACE_DRIFT: f64 = 1e-6;
const FREQ_TOL: f64 = 1e-9;

/// A = sigma_x and B = (sigma_z - i sigma_y)/2, so that sigma^- = (A + B - B^+)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedOperators {
    pub a: CMat,
    pub b: CMat,
}

impl Default for DressedOperators {
    fn default() -> Self {
        Self::new()
    }
}

impl DressedOperators {
    pub fn new() -> Self {
        Self {
            a: sigma_x(),
            b: (sigma_z() - sigma_y() * I) * r(0.5),
        }
    }

    /// max |(A + B - B^+)/2 - sigma^-|.
    pub fn decomposition_residual(&self) -> f64 {
        let s = (&self.a + &self.b - self.b.adjoint()) * r(0.5) - sigma_minus();
        s.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// One Bohr component of a local operator: e^{iHt} X e^{-iHt} = sum e^{i nu t} op.
#[derive(Debug, Clone)]
pub struct FrequencyComponent {
    pub nu: f64,
    pub op: CMat,
}

/// Bohr decomposition of `op` under the Hermitian `h` via its eigenprojectors.
pub fn frequency_components(h: &CMat, op: &CMat) -> Result<Vec<FrequencyComponent>> {
    if h.nrows() != op.nrows() || !h.is_square() || !op.is_square() {
        return Err(Error::Dimension("frequency decomposition needs matching square operators".into()));
    }
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let scale = 1.0 + eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // group degenerate eigenvalues
    let mut groups: Vec<(f64, CMat)> = Vec::new();
    for k in 0..n {
        let e = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        let p = &v * v.adjoint();
        match groups.iter_mut().find(|(g, _)| (g - e).abs() < FREQ_TOL * scale) {
            Some((_, proj)) => *proj += p,
            None => groups.push((e, p)),
        }
    }
    let mut out: Vec<FrequencyComponent> = Vec::new();
    for (ea, pa) in &groups {
        for (eb, pb) in &groups {
            let piece = pa * op * pb;
            let nu = ea - eb;
            match out.iter_mut().find(|f| (f.nu - nu).abs() < FREQ_TOL * scale) {
                Some(f) => f.op += piece,
                None => out.push(FrequencyComponent { nu, op: piece }),
            }
        }
    }
    out.retain(|f| f.op.iter().any(|v| v.norm() > 1e-12));
    for f in out.iter_mut() {
        if f.nu.abs() < FREQ_TOL * scale {
            f.nu = 0.0;
        }
    }
    out.sort_by(|a, b| a.nu.partial_cmp(&b.nu).unwrap());
    Ok(out)
}

/// e^{i chi t} Gamma_ij(t; kernel_omega) [alpha rho, beta] (+ h.c. applied globally). Emitters 0-based.
#[derive(Debug, Clone)]
pub struct GeneratorTerm {
    pub kernel_omega: f64,
    pub pair: (usize, usize),
    pub alpha_op: CMat,
    pub beta_op: CMat,
    pub chi: f64,
    /// Overall sign once alpha and beta are written as +-(1/2) dressed or bare operators.
    pub sign: f64,
}

fn local_hamiltonian(omega: f64) -> CMat {
    sigma_x() * r(omega)
}

fn emitter_components(omega: [f64; 2]) -> Result<[Vec<FrequencyComponent>; 2]> {
    let mut out: [Vec<FrequencyComponent>; 2] = [Vec::new(), Vec::new()];
    for (i, slot) in out.iter_mut().enumerate() {
        let local = frequency_components(&local_hamiltonian(omega[i]), &sigma_minus())?;
        *slot = local
            .into_iter()
            .map(|f| FrequencyComponent {
                nu: f.nu,
                op: on_qubit(&f.op, i),
            })
            .collect();
    }
    Ok(out)
}

/// All terms of the compact generator for drives Omega_1, Omega_2 (H_S = sum Omega_i sigma_x).
pub fn derive_generator_terms(omega_1: f64, omega_2: f64) -> Result<Vec<GeneratorTerm>> {
    let comps = emitter_components([omega_1, omega_2])?;
    let mut terms = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for sj in &comps[j] {
                for si in &comps[i] {
                    let beta = si.op.adjoint();
                    let sign = label_sign(&sj.op) * label_sign(&beta);
                    terms.push(GeneratorTerm {
                        kernel_omega: sj.nu,
                        pair: (i, j),
                        alpha_op: sj.op.clone(),
                        beta_op: beta,
                        chi: sj.nu - si.nu,
                        sign,
                    });
                }
            }
        }
    }
    Ok(terms)
}

fn label_candidates() -> Vec<(&'static str, CMat)> {
    let d = DressedOperators::new();
    let bd = d.b.adjoint();
    vec![
        ("A", on_qubit(&d.a, 0)),
        ("B", on_qubit(&d.b, 0)),
        ("B+", on_qubit(&bd, 0)),
        ("s1-", on_qubit(&sigma_minus(), 0)),
        ("s1+", on_qubit(&sigma_minus().adjoint(), 0)),
        ("A2", on_qubit(&d.a, 1)),
        ("B2", on_qubit(&d.b, 1)),
        ("B2+", on_qubit(&bd, 1)),
        ("s2-", on_qubit(&sigma_minus(), 1)),
        ("s2+", on_qubit(&sigma_minus().adjoint(), 1)),
    ]
}

/// Writes `op` as coeff * X for a named X; returns (name, coeff).
pub fn identify_operator(op: &CMat) -> Option<(&'static str, C64)> {
    for (name, x) in label_candidates() {
        let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let coeff = x.iter().zip(op.iter()).map(|(a, b)| a.conj() * b).sum::<C64>() / norm;
        let res: f64 = (op - &x * coeff).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if res < 1e-10 && coeff.norm() > 1e-12 {
            return Some((name, coeff));
        }
    }
    None
}

fn label_sign(op: &CMat) -> f64 {
    match identify_operator(op) {
        Some((_, k)) if k.re < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// One row of the term table: kernel Gamma_ij(t; xi_units * Omega_1), operators, chi in units of Omega_1.
/// Emitters are reported 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TableEntry {
    pub pair: (usize, usize),
    pub xi_units: i32,
    pub alpha: String,
    pub beta: String,
    pub chi_units: i32,
    pub sign: i32,
}

/// Symbolic view of the generator terms in units of `omega_1`, with A = A^+ written as "A".
pub fn table_entries(terms: &[GeneratorTerm], omega_1: f64) -> Result<Vec<TableEntry>> {
    let unit = |x: f64| -> i32 {
        if omega_1 == 0.0 {
            0
        } else {
            (x / omega_1).round() as i32
        }
    };
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let (a, _) = identify_operator(&t.alpha_op)
            .ok_or_else(|| Error::InvalidState("unrecognised alpha operator".into()))?;
        let (b, _) = identify_operator(&t.beta_op)
            .ok_or_else(|| Error::InvalidState("unrecognised beta operator".into()))?;
        out.push(TableEntry {
            pair: (t.pair.0 + 1, t.pair.1 + 1),
            xi_units: unit(t.kernel_omega),
            alpha: a.to_string(),
            beta: b.to_string(),
            chi_units: unit(t.chi),
            sign: t.sign as i32,
        });
    }
    out.sort();
    Ok(out)
}

/// Keep only chi = 0 terms.
pub fn secular_filter(terms: &[GeneratorTerm]) -> Vec<GeneratorTerm> {
    terms
        .iter()
        .filter(|t| t.chi.abs() < FREQ_TOL * (1.0 + t.kernel_omega.abs()))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TclMode {
    Tcl2,
    Redfield,
    Secular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TclConfig {
    pub mode: TclMode,
    pub omega_1: f64,
    pub omega_2: f64,
    pub bath: SpinChainBathParams,
    pub t_max: f64,
    pub dt: f64,
    /// Store every n-th step.
    #[serde(default = "one")]
    pub record_every: usize,
    /// Basis label of the initial product state ("gg", "ge", "eg", "ee").
    #[serde(default = "gg")]
    pub initial: String,
    /// Extra local decay gamma_loss,i D[sigma_i] outside the guided bath.
    #[serde(default)]
    pub gamma_loss: [f64; 2],
}

fn one() -> usize {
    1
}

fn gg() -> String {
    "gg".into()
}

impl TclConfig {
    /// Optimum-style point: plaquettes at separation d, phi on both emitters.
    pub fn new(omega_1: f64, omega_2: f64, g1: f64, g2: f64, d: i64, phi: f64) -> Self {
        Self {
            mode: TclMode::Tcl2,
            omega_1,
            omega_2,
            bath: SpinChainBathParams::plaquettes(1.0, g1, g2, phi, d),
            t_max: 120.0,
            dt: 0.05,
            record_every: 1,
            initial: gg(),
            gamma_loss: [0.0; 2],
        }
    }

    pub fn with_mode(mut self, mode: TclMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.bath.validate()?;
        if !self.omega_1.is_finite() || !self.omega_2.is_finite() {
            return Err(bad_param("omega", "drives must be finite"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(bad_param("dt", "must be > 0"));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(bad_param("t_max", "must be finite and >= 0"));
        }
        if self.gamma_loss.iter().any(|g| !(*g >= 0.0)) {
            return Err(bad_param("gamma_loss", "must be >= 0"));
        }
        self.initial_state()?;
        Ok(())
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        two_qubit_basis_state(&self.initial)
            .ok_or_else(|| bad_param("initial", format!("unknown basis label '{}'", self.initial)))
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Time-dependent perturbations held piecewise constant over integrator steps.
/// Empty vectors mean no perturbation; a single value is quasi-static; longer vectors are
/// indexed by step (last value held).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Perturbation {
    /// delta_i sigma_i^+ sigma_i^- added to the coherent part.
    pub detuning: [Vec<f64>; 2],
    /// Shift q of emitter 2's coupling points in lattice units (cross-kernel phase e^{-i pi q / 2}).
    pub position: Vec<f64>,
}

fn held(v: &[f64], k: usize) -> f64 {
    match v.len() {
        0 => 0.0,
        n => v[k.min(n - 1)],
    }
}

impl Perturbation {
    pub fn is_empty(&self) -> bool {
        self.detuning.iter().all(|d| d.iter().all(|x| *x == 0.0)) && self.position.iter().all(|x| *x == 0.0)
    }
}

#[derive(Debug, Clone)]
struct Compiled {
    pair: usize,
    freq: usize,
    chi: f64,
    alpha: M4,
    beta: M4,
    beta_alpha: M4,
}

fn to_m4(m: &CMat) -> M4 {
    M4::from_fn(|i, j| m[(i, j)])
}

fn from_m4(m: &M4) -> CMat {
    CMat::from_fn(4, 4, |i, j| m[(i, j)])
}

/// Prepared generator: terms, kernel table and local frame.
#[derive(Debug, Clone)]
pub struct TclEngine {
    pub config: TclConfig,
    terms: Vec<GeneratorTerm>,
    compiled: Vec<Compiled>,
    kernels: KernelCache,
    components: [Vec<(f64, M4)>; 2],
    h_eig: (Vec<f64>, CMat),
}

impl TclEngine {
    pub fn new(config: &TclConfig) -> Result<Self> {
        config.validate()?;
        let mut terms = derive_generator_terms(config.omega_1, config.omega_2)?;
        if config.mode == TclMode::Secular {
            terms = secular_filter(&terms);
        }
        let mut freqs: Vec<f64> = Vec::new();
        for t in &terms {
            if !freqs.iter().any(|f| (f - t.kernel_omega).abs() < FREQ_TOL) {
                freqs.push(t.kernel_omega);
            }
        }
        freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let kernels = match config.mode {
            TclMode::Tcl2 => KernelCache::build(&config.bath, &freqs, 0.5 * config.dt, 2 * config.steps() + 2)?,
            TclMode::Redfield | TclMode::Secular => KernelCache::redfield(&config.bath, &freqs)?,
        };
        let compiled = terms
            .iter()
            .map(|t| {
                let alpha = to_m4(&t.alpha_op);
                let beta = to_m4(&t.beta_op);
                Compiled {
                    pair: 2 * t.pair.0 + t.pair.1,
                    freq: kernels.freq_index(t.kernel_omega).unwrap(),
                    chi: t.chi,
                    alpha,
                    beta,
                    beta_alpha: beta * alpha,
                }
            })
            .collect();
        let comps = emitter_components([config.omega_1, config.omega_2])?;
        let components = [
            comps[0].iter().map(|f| (f.nu, to_m4(&f.op))).collect(),
            comps[1].iter().map(|f| (f.nu, to_m4(&f.op))).collect(),
        ];
        let h = on_qubit(&local_hamiltonian(config.omega_1), 0) + on_qubit(&local_hamiltonian(config.omega_2), 1);
        let eig = h.symmetric_eigen();
        Ok(Self {
            config: config.clone(),
            terms,
            compiled,
            kernels,
            components,
            h_eig: (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors),
        })
    }

    pub fn terms(&self) -> &[GeneratorTerm] {
        &self.terms
    }

    pub fn kernels(&self) -> &KernelCache {
        &self.kernels
    }

    /// U(t) = exp(-i H_S t).
    pub fn frame(&self, t: f64) -> CMat {
        let (e, v) = &self.h_eig;
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            4,
            e.iter().map(|x| C64::from_polar(1.0, -x * t)),
        ));
        v * d * v.adjoint()
    }

    /// Interaction picture to Schroedinger picture.
    pub fn to_schrodinger(&self, t: f64, rho_tilde: &CMat) -> CMat {
        let u = self.frame(t);
        &u * rho_tilde * u.adjoint()
    }

    fn kernel_table(&self, t: f64, position: f64) -> Result<Vec<C64>> {
        let nf = self.kernels.freqs.len();
        let mut out = vec![r(0.0); 4 * nf];
        let shift = C64::from_polar(1.0, -std::f64::consts::FRAC_PI_2 * position);
        for p in 0..4 {
            for f in 0..nf {
                let mut v = self.kernels.at(p / 2, p % 2, f, t)?;
                if p == 1 || p == 2 {
                    v *= shift;
                }
                out[p * nf + f] = v;
            }
        }
        Ok(out)
    }

    fn sigma_tilde(&self, i: usize, t: f64) -> M4 {
        self.components[i]
            .iter()
            .fold(M4::zeros(), |acc, (nu, op)| acc + op * C64::from_polar(1.0, nu * t))
    }

    fn apply(&self, t: f64, rho: &M4, kern: &[C64], detuning: [f64; 2]) -> M4 {
        let nf = self.kernels.freqs.len();
        let mut out = M4::zeros();
        for c in &self.compiled {
            let k = kern[c.pair * nf + c.freq];
            if k == r(0.0) {
                continue;
            }
            let w = k * C64::from_polar(1.0, c.chi * t);
            let ar = c.alpha * rho;
            out += (ar * c.beta - c.beta_alpha * rho) * w;
        }
        out += out.adjoint();
        for i in 0..2 {
            let g = self.config.gamma_loss[i];
            let d = detuning[i];
            if g == 0.0 && d == 0.0 {
                continue;
            }
            let s = self.sigma_tilde(i, t);
            let n = s.adjoint() * s;
            if g != 0.0 {
                out += (s * rho * s.adjoint() - (n * rho + rho * n) * r(0.5)) * r(g);
            }
            if d != 0.0 {
                out -= (n * rho - rho * n) * c(0.0, d);
            }
        }
        out
    }

    /// Generator applied to rho~ with tabulated kernels.
    pub fn rhs(&self, t: f64, rho: &CMat) -> Result<CMat> {
        check4(rho)?;
        let kern = self.kernel_table(t, 0.0)?;
        Ok(from_m4(&self.apply(t, &to_m4(rho), &kern, [0.0; 2])))
    }

    /// Generator with kernels evaluated directly by quadrature at t (no table).
    pub fn rhs_exact(&self, t: f64, rho: &CMat) -> Result<CMat> {
        check4(rho)?;
        if self.kernels.is_constant() {
            return self.rhs(t, rho);
        }
        let nf = self.kernels.freqs.len();
        let mut kern = vec![r(0.0); 4 * nf];
        for p in 0..4 {
            for (f, w) in self.kernels.freqs.iter().enumerate() {
                kern[p * nf + f] = tcl_kernel(p / 2, p % 2, t, *w, &self.config.bath)?.value;
            }
        }
        Ok(from_m4(&self.apply(t, &to_m4(rho), &kern, [0.0; 2])))
    }

    /// RK4 over the configured grid; `visit(step, t, rho_tilde)` sees every step.
    fn integrate(&self, pert: &Perturbation, mut visit: impl FnMut(usize, f64, &M4) -> Result<()>) -> Result<()> {
        let cfg = &self.config;
        let steps = cfg.steps();
        let dt = cfg.dt;
        let mut rho = to_m4(cfg.initial_state()?.matrix());
        for s in 0..=steps {
            let t = s as f64 * dt;
            let tr = rho.trace().re;
            if (tr - 1.0).abs() > MAX_TRACE_DRIFT {
                return Err(Error::Integration {
                    t,
                    reason: format!("trace drift {:e} exceeds {MAX_TRACE_DRIFT:e}", tr - 1.0),
                });
            }
            visit(s, t, &rho)?;
            if s == steps {
                break;
            }
            let q = held(&pert.position, s);
            let det = [held(&pert.detuning[0], s), held(&pert.detuning[1], s)];
            let k0 = self.kernel_table(t, q)?;
            let kh = self.kernel_table(t + 0.5 * dt, q)?;
            let k1 = self.kernel_table(t + dt, q)?;
            let a = self.apply(t, &rho, &k0, det);
            let b = self.apply(t + 0.5 * dt, &(rho + a * r(0.5 * dt)), &kh, det);
            let cc = self.apply(t + 0.5 * dt, &(rho + b * r(0.5 * dt)), &kh, det);
            let d = self.apply(t + dt, &(rho + cc * r(dt)), &k1, det);
            rho += (a + (b + cc) * r(2.0) + d) * r(dt / 6.0);
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_perturbed(&Perturbation::default())
    }

    pub fn run_perturbed(&self, pert: &Perturbation) -> Result<Trajectory> {
        let every = self.config.record_every.max(1);
        let steps = self.config.steps();
        let targets = fidelity_targets();
        let mut traj = Trajectory::default();
        self.integrate(pert, |s, t, rho| {
            if s % every != 0 && s != steps {
                return Ok(());
            }
            let m = self.to_schrodinger(t, &from_m4(rho));
            let herm = (&m + m.adjoint()) * r(0.5);
            traj.times.push(t);
            traj.push_observable("concurrence", concurrence_clipped(&herm));
            traj.push_observable("p_ee", herm[(3, 3)].re);
            traj.push_observable("p_eg", herm[(2, 2)].re);
            traj.push_observable("p_ge", herm[(1, 1)].re);
            traj.push_observable("p_gg", herm[(0, 0)].re);
            traj.push_observable("fidelity", overlap(&herm, &targets.0));
            traj.push_observable("fidelity_chi_minus_literal", overlap(&herm, &targets.1));
            traj.push_observable("trace_drift", herm.trace().re - 1.0);
            traj.push_observable("min_eigenvalue", hermitian_eigenvalues(&herm)[0]);
            traj.states.push(DensityMatrix::from_raw(herm));
            Ok(())
        })?;
        Ok(traj)
    }

    /// Concurrence series only (sweep workhorse).
    pub fn concurrence_series(&self, pert: &Perturbation) -> Result<(Vec<f64>, Vec<f64>, Vec<CMat>)> {
        let mut times = Vec::new();
        let mut conc = Vec::new();
        let mut states = Vec::new();
        self.integrate(pert, |_, t, rho| {
            let m = from_m4(rho);
            let herm = (&m + m.adjoint()) * r(0.5);
            times.push(t);
            conc.push(concurrence_clipped(&herm));
            states.push(herm);
            Ok(())
        })?;
        Ok((times, conc, states))
    }

    pub fn peak(&self) -> Result<TclPeak> {
        let targets = fidelity_targets();
        let mut times = Vec::new();
        let mut conc = Vec::new();
        let mut fid = Vec::new();
        let mut pee = Vec::new();
        self.integrate(&Perturbation::default(), |_, t, rho| {
            let m = self.to_schrodinger(t, &from_m4(rho));
            let herm = (&m + m.adjoint()) * r(0.5);
            times.push(t);
            conc.push(concurrence_clipped(&herm));
            fid.push(overlap(&herm, &targets.0));
            pee.push(herm[(3, 3)].re);
            Ok(())
        })?;
        let fp = first_peak(&times, &conc, 0.02).unwrap();
        let gp = global_peak(&times, &conc).unwrap();
        Ok(TclPeak {
            first_peak_concurrence: fp.value,
            t_first_peak: fp.time,
            max_concurrence: gp.value,
            t_max_concurrence: gp.time,
            fidelity_at_peak: fid[fp.index],
            p_ee_at_peak: pee[fp.index],
        })
    }

    /// Per-frequency secular rate matrices gamma_ij = Gamma_ij + Gamma_ji^*, over the emitters that have
    /// a component at that frequency (Redfield kernels).
    pub fn secular_rate_matrices(&self) -> Result<Vec<(f64, CMat)>> {
        let mut out = Vec::new();
        for (f, nu) in self.kernels.freqs.iter().enumerate() {
            let present: Vec<usize> = (0..2)
                .filter(|i| self.components[*i].iter().any(|(w, _)| (w - nu).abs() < FREQ_TOL))
                .collect();
            let t = self.kernels.t_max().min(self.config.t_max);
            let mut g = CMat::zeros(present.len(), present.len());
            for (a, i) in present.iter().enumerate() {
                for (b, j) in present.iter().enumerate() {
                    g[(a, b)] = self.kernels.at(*i, *j, f, t)? + self.kernels.at(*j, *i, f, t)?.conj();
                }
            }
            out.push((*nu, g));
        }
        Ok(out)
    }
}

fn check4(rho: &CMat) -> Result<()> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::Dimension(format!("two-emitter state needs 4x4, got {}x{}", rho.nrows(), rho.ncols())));
    }
    Ok(())
}

/// (target, literal chi_-). The basis here orders emitter 1 as the slow index; with that ordering the
/// phase-shifted singlet reached from |gg> is (|eg> + i|ge>)/sqrt2, which is chi_- with the emitter labels
/// exchanged.
fn fidelity_targets() -> (PureState, PureState) {
    (crate::quantum::chi_plus(), crate::quantum::chi_minus())
}

fn overlap(m: &CMat, v: &PureState) -> f64 {
    let a = v.amplitudes();
    (a.adjoint() * m * a)[(0, 0)].re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TclPeak {
    pub first_peak_concurrence: f64,
    pub t_first_peak: f64,
    pub max_concurrence: f64,
    pub t_max_concurrence: f64,
    pub fidelity_at_peak: f64,
    pub p_ee_at_peak: f64,
}

/// Generator applied to rho~ at time t. Builds the engine; use [`TclEngine::rhs`] in loops.
pub fn tcl2_rhs(t: f64, rho_tilde: &DensityMatrix, config: &TclConfig) -> Result<CMat> {
    let engine = TclEngine::new(config)?;
    if t > engine.kernels.t_max() + 1e-12 {
        return Err(Error::Integration {
            t,
            reason: format!("outside kernel cache [0, {}]", engine.kernels.t_max()),
        });
    }
    engine.rhs(t, rho_tilde.matrix())
}

pub fn integrate_tcl(config: &TclConfig) -> Result<Trajectory> {
    TclEngine::new(config)?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x, n: 1 }
    }

    fn grid(&self) -> Vec<f64> {
        crate::markov::linspace(self.lo, self.hi, self.n.max(1))
    }

    fn step(&self) -> f64 {
        if self.n > 1 {
            (self.hi - self.lo) / (self.n - 1) as f64
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePoint {
    /// (Omega_1, Omega_2, g_1, g_2)
    pub x: [f64; 4],
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimum {
    pub best: SamplePoint,
    /// Every sampled point, coarse grid first then refinements.
    pub surface: Vec<SamplePoint>,
}

/// Coarse grid over (Omega_1, Omega_2, g_1, g_2) then `refinements` rounds of a 3^k local grid with
/// halved spacing, maximizing the first-peak concurrence. `base` fixes d, phi, mode and time grid.
pub fn optimize_parameters(base: &TclConfig, bounds: [Bounds; 4], refinements: usize) -> Result<Optimum> {
    for b in &bounds {
        if !b.lo.is_finite() || !b.hi.is_finite() || b.hi < b.lo {
            return Err(bad_param("bounds", "must be finite with lo <= hi"));
        }
    }
    let eval = |x: [f64; 4]| -> Result<SamplePoint> {
        let mut cfg = base.clone();
        cfg.omega_1 = x[0];
        cfg.omega_2 = x[1];
        cfg.bath.g = [x[2], x[3]];
        let p = TclEngine::new(&cfg)?.peak()?;
        Ok(SamplePoint {
            x,
            value: p.first_peak_concurrence,
        })
    };
    let grids: Vec<Vec<f64>> = bounds.iter().map(|b| b.grid()).collect();
    let mut pts = Vec::new();
    for a in &grids[0] {
        for b in &grids[1] {
            for cc in &grids[2] {
                for d in &grids[3] {
                    pts.push([*a, *b, *cc, *d]);
                }
            }
        }
    }
    let mut surface: Vec<SamplePoint> = par::map(&pts, |x| eval(*x)).into_iter().collect::<Result<_>>()?;
    let mut best = *surface
        .iter()
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .ok_or_else(|| bad_param("bounds", "empty grid"))?;
    let mut h: Vec<f64> = bounds.iter().map(|b| b.step()).collect();
    for _ in 0..refinements {
        h.iter_mut().for_each(|v| *v *= 0.5);
        let mut local = Vec::new();
        let offs = [-1.0, 0.0, 1.0];
        for a in offs {
            for b in offs {
                for cc in offs {
                    for d in offs {
                        let o = [a, b, cc, d];
                        let mut x = best.x;
                        let mut skip = false;
                        for k in 0..4 {
                            if h[k] == 0.0 && o[k] != 0.0 {
                                skip = true;
                            }
                            x[k] = (x[k] + o[k] * h[k]).clamp(bounds[k].lo, bounds[k].hi);
                        }
                        if !skip && o != [0.0; 4] {
                            local.push(x);
                        }
                    }
                }
            }
        }
        let vals: Vec<SamplePoint> = par::map(&local, |x| eval(*x)).into_iter().collect::<Result<_>>()?;
        for v in vals {
            if v.value > best.value {
                best = v;
            }
            surface.push(v);
        }
    }
    Ok(Optimum { best, surface })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceSurface {
    pub omegas: Vec<f64>,
    pub distances: Vec<i64>,
    /// cmax[d_index][omega_index], maximum concurrence over the run.
    pub cmax: Vec<Vec<f64>>,
}

impl DistanceSurface {
    pub fn at(&self, omega_index: usize, d_index: usize) -> f64 {
        self.cmax[d_index][omega_index]
    }

    /// Cells at or above `level` (e.g. 2/e contour), as (omega, d).
    pub fn above(&self, level: f64) -> Vec<(f64, i64)> {
        let mut out = Vec::new();
        for (di, row) in self.cmax.iter().enumerate() {
            for (oi, v) in row.iter().enumerate() {
                if *v >= level {
                    out.push((self.omegas[oi], self.distances[di]));
                }
            }
        }
        out
    }

    pub fn to_csv(&self, comment: &str) -> String {
        let mut s = String::new();
        for line in comment.lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s.push_str("omega_1,d,c_max\n");
        for (di, row) in self.cmax.iter().enumerate() {
            for (oi, v) in row.iter().enumerate() {
                s.push_str(&format!("{},{},{}\n", self.omegas[oi], self.distances[di], v));
            }
        }
        s
    }
}

/// Maximum concurrence over (Omega_1, d) with Omega_2 = 0 and the couplings of `base`.
pub fn distance_sweep(base: &TclConfig, omegas: &[f64], distances: &[i64]) -> Result<DistanceSurface> {
    if distances.iter().any(|d| *d < 1) {
        return Err(bad_param("d", "separations must be >= 1"));
    }
    let cells: Vec<(usize, usize)> = (0..distances.len())
        .flat_map(|di| (0..omegas.len()).map(move |oi| (di, oi)))
        .collect();
    let vals = par::map(&cells, |(di, oi)| -> Result<f64> {
        let mut cfg = base.clone();
        cfg.omega_1 = omegas[*oi];
        cfg.omega_2 = 0.0;
        cfg.bath = SpinChainBathParams::plaquettes(
            base.bath.j,
            base.bath.g[0],
            base.bath.g[1],
            base.bath.phi[0],
            distances[*di],
        );
        cfg.bath.delta = base.bath.delta;
        Ok(TclEngine::new(&cfg)?.peak()?.max_concurrence)
    });
    let mut cmax = vec![vec![0.0; omegas.len()]; distances.len()];
    for ((di, oi), v) in cells.into_iter().zip(vals) {
        cmax[di][oi] = v?;
    }
    Ok(DistanceSurface {
        omegas: omegas.to_vec(),
        distances: distances.to_vec(),
        cmax,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlpResult {
    pub times: Vec<f64>,
    pub distance: Vec<f64>,
    /// Sum of the positive increments of D(t) over the whole run.
    pub positive_integral: f64,
}

impl BlpResult {
    /// Positive increments restricted to [t0, t1].
    pub fn positive_integral_in(&self, t0: f64, t1: f64) -> f64 {
        self.times
            .windows(2)
            .zip(self.distance.windows(2))
            .filter(|(t, _)| t[0] >= t0 - 1e-12 && t[1] <= t1 + 1e-12)
            .map(|(_, d)| (d[1] - d[0]).max(0.0))
            .sum()
    }
}

/// Trace distance between the evolutions of two basis states and its positive-slope integral.
pub fn blp_witness(config: &TclConfig, pair: (&str, &str)) -> Result<BlpResult> {
    let mut a = config.clone();
    a.initial = pair.0.to_string();
    let mut b = config.clone();
    b.initial = pair.1.to_string();
    let (times, _, sa) = TclEngine::new(&a)?.concurrence_series(&Perturbation::default())?;
    let (_, _, sb) = TclEngine::new(&b)?.concurrence_series(&Perturbation::default())?;
    // the frame is unitary, so the distance can be taken in the interaction picture
    let distance: Vec<f64> = sa.iter().zip(&sb).map(|(x, y)| 0.5 * trace_norm(&(x - y))).collect();
    let positive_integral = distance.windows(2).map(|d| (d[1] - d[0]).max(0.0)).sum();
    Ok(BlpResult {
        times,
        distance,
        positive_integral,
    })
}

/// Brute-force generator from the double-commutator form with the bath correlator integrated
/// numerically over tau in [0, t]; independent of the Bohr decomposition and the kernel table.
pub fn double_commutator_generator(config: &TclConfig, t: f64, rho: &CMat, panels: usize) -> Result<CMat> {
    check4(rho)?;
    let bath = &config.bath;
    let h = on_qubit(&local_hamiltonian(config.omega_1), 0) + on_qubit(&local_hamiltonian(config.omega_2), 1);
    let eig = h.symmetric_eigen();
    let heis = |op: &CMat, s: f64| -> CMat {
        let u = &eig.eigenvectors
            * CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                4,
                eig.eigenvalues.iter().map(|x| C64::from_polar(1.0, -x * s)),
            ))
            * eig.eigenvectors.adjoint();
        u.adjoint() * op * u
    };
    let sig = [on_qubit(&sigma_minus(), 0), on_qubit(&sigma_minus(), 1)];
    let corr = |i: usize, j: usize, tau: f64| -> C64 {
        bath.kernel_terms(i, j)
            .iter()
            .map(|(n, w)| *w * crate::bath::magnon_propagator(*n, tau, bath))
            .sum()
    };
    let (x, wts) = crate::bath::gauss_legendre(12);
    let hp = t / panels.max(1) as f64;
    let mut out = CMat::zeros(4, 4);
    for i in 0..2 {
        let si_t = heis(&sig[i], t);
        let sip_t = si_t.adjoint();
        for j in 0..2 {
            let mut acc = CMat::zeros(4, 4);
            for p in 0..panels.max(1) {
                for (xk, wk) in x.iter().zip(&wts) {
                    let tau = hp * (p as f64 + 0.5 * (1.0 + xk));
                    let sj = heis(&sig[j], t - tau);
                    let cij = corr(i, j, tau);
                    let term = (&sj * rho * &sip_t - &sip_t * &sj * rho) * cij;
                    acc += term * r(0.5 * hp * wk);
                }
            }
            out += &acc + acc.adjoint();
        }
    }
    Ok(out)
}
