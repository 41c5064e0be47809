//! Born-Markov master equation of two emitters on a chiral channel.

use serde::{Deserialize, Serialize};

use crate::error::{bad_param, Error, Result};
use crate::par;
use crate::quantum::{
    c, concurrence_clipped, devectorize, hermitian_eigenvalues, eye, kron, on_qubit, r, sigma_minus, vectorize, CMat, CVec,
    DensityMatrix, PureState, C64, I,
};
use crate::trajectory::{first_peak, global_peak, Trajectory};

pub const MAX_TRACE_DRIFT: f64 = 1e-6;
/// RK4 is not positivity preserving; negative eigenvalues above this are step-size noise.
pub const MAX_NEGATIVITY: f64 = 1e-6;

fn step_concurrence(m: &CMat, t: f64) -> Result<f64> {
    let lo = hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min);
    if lo < -MAX_NEGATIVITY {
        return Err(Error::Integration {
            t,
            reason: format!("state eigenvalue {lo:e} below -{MAX_NEGATIVITY:e}; reduce dt"),
        });
    }
    Ok(concurrence_clipped(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiralMarkovParams {
    pub gamma_l: f64,
    pub gamma_r: f64,
    /// Nonguided decay rate of each emitter.
    pub gamma_loss: [f64; 2],
    /// Multiplier of each emitter's guided rates (1 = nominal).
    pub guided: [f64; 2],
    /// Propagation phase kd.
    pub phi: f64,
    pub omega: [C64; 2],
    pub detuning: f64,
}

impl Default for ChiralMarkovParams {
    fn default() -> Self {
        Self {
            gamma_l: 0.0,
            gamma_r: 1.0,
            gamma_loss: [0.0; 2],
            guided: [1.0; 2],
            phi: 0.0,
            omega: [C64::new(0.0, 0.0); 2],
            detuning: 0.0,
        }
    }
}

impl ChiralMarkovParams {
    pub fn chiral(gamma_l: f64, gamma_r: f64, phi: f64) -> Self {
        Self {
            gamma_l,
            gamma_r,
            phi,
            ..Self::default()
        }
    }

    pub fn with_drives(mut self, omega_1: f64, omega_2: f64) -> Self {
        self.omega = [r(omega_1), r(omega_2)];
        self
    }

    /// Per-emitter guided fractions at fixed total rate `gamma_tot` per emitter.
    /// `chirality` in [0,1] is gamma_R / (gamma_L + gamma_R) of a perfectly coupled emitter.
    pub fn with_beta(gamma_tot: f64, chirality: f64, beta: [f64; 2], phi: f64) -> Self {
        Self {
            gamma_l: gamma_tot * (1.0 - chirality),
            gamma_r: gamma_tot * chirality,
            gamma_loss: [gamma_tot * (1.0 - beta[0]), gamma_tot * (1.0 - beta[1])],
            guided: beta,
            phi,
            ..Self::default()
        }
    }

    pub fn gamma_bar(&self) -> f64 {
        0.5 * (self.gamma_l + self.gamma_r)
    }

    pub fn gamma_tot(&self, emitter: usize) -> f64 {
        self.guided[emitter] * (self.gamma_l + self.gamma_r) + self.gamma_loss[emitter]
    }

    pub fn beta(&self, emitter: usize) -> f64 {
        let tot = self.gamma_tot(emitter);
        if tot == 0.0 {
            return 1.0;
        }
        (tot - self.gamma_loss[emitter]) / tot
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma_l", self.gamma_l),
            ("gamma_r", self.gamma_r),
            ("gamma_loss[0]", self.gamma_loss[0]),
            ("gamma_loss[1]", self.gamma_loss[1]),
            ("guided[0]", self.guided[0]),
            ("guided[1]", self.guided[1]),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return Err(bad_param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.phi.is_finite() || !self.detuning.is_finite() {
            return Err(bad_param("phi/detuning", "must be finite"));
        }
        Ok(())
    }

    pub fn jump_operators(&self) -> Vec<CMat> {
        let s1 = on_qubit(&sigma_minus(), 0);
        let s2 = on_qubit(&sigma_minus(), 1);
        let e = C64::from_polar(1.0, self.phi);
        let [a1, a2] = self.guided;
        let mut out = vec![
            &s1 * r((self.gamma_l * a1).sqrt()) + &s2 * (e * (self.gamma_l * a2).sqrt()),
            &s1 * r((self.gamma_r * a1).sqrt()) + &s2 * (e.conj() * (self.gamma_r * a2).sqrt()),
        ];
        out.push(&s1 * r(self.gamma_loss[0].sqrt()));
        out.push(&s2 * r(self.gamma_loss[1].sqrt()));
        out
    }

    pub fn hamiltonian(&self) -> CMat {
        let s1 = on_qubit(&sigma_minus(), 0);
        let s2 = on_qubit(&sigma_minus(), 1);
        let e = C64::from_polar(1.0, self.phi);
        let [a1, a2] = self.guided;
        let coef = I * 0.5
            * (e.conj() * self.gamma_r * (a1 * a2).sqrt() - e * self.gamma_l * (a1 * a2).sqrt());
        let hc = s1.adjoint() * &s2 * coef;
        let mut h = &hc + hc.adjoint();
        for (k, s) in [&s1, &s2].into_iter().enumerate() {
            let drive = s * self.omega[k] + s.adjoint() * self.omega[k].conj();
            h += drive * r(0.5);
            h += s.adjoint() * s * r(self.detuning);
        }
        h
    }
}

/// Column-stacked Lindblad generator of an arbitrary Hamiltonian and jump set.
pub fn lindblad_superoperator(h: &CMat, jumps: &[CMat]) -> CMat {
    let n = h.nrows();
    let id = eye(n);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
    for cj in jumps {
        let cdc = cj.adjoint() * cj;
        l += kron(&cj.conjugate(), cj) - kron(&id, &cdc) * r(0.5) - kron(&cdc.transpose(), &id) * r(0.5);
    }
    l
}

pub fn build_liouvillian(params: &ChiralMarkovParams) -> Result<CMat> {
    params.validate()?;
    Ok(lindblad_superoperator(&params.hamiltonian(), &params.jump_operators()))
}

/// One RK4 step of a constant linear generator written as its Taylor polynomial.
pub fn rk4_propagator(l: &CMat, dt: f64) -> CMat {
    let n = l.nrows();
    let a = l * r(dt);
    let mut p = eye(n);
    let mut term = eye(n);
    for k in 1..=4 {
        term = &term * &a / r(k as f64);
        p += &term;
    }
    p
}

#[derive(Debug, Clone, Copy)]
pub struct MarkovRun {
    pub t_max: f64,
    pub dt: f64,
    /// Keep every n-th state in the trajectory (observables are stored at the same stride).
    pub record_every: usize,
}

impl MarkovRun {
    pub fn new(t_max: f64, dt: f64) -> Self {
        Self {
            t_max,
            dt,
            record_every: 1,
        }
    }
}

pub fn bell_states() -> [PureState; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = r(0.0);
    [
        PureState::from_slice(&[r(s), z, z, r(s)]).unwrap(),
        PureState::from_slice(&[r(s), z, z, r(-s)]).unwrap(),
        PureState::from_slice(&[z, r(s), r(s), z]).unwrap(),
        PureState::from_slice(&[z, r(-s), r(s), z]).unwrap(),
    ]
}

/// Largest fidelity with any of the four Bell states.
pub fn bell_fidelity(m: &CMat) -> f64 {
    bell_states()
        .iter()
        .map(|b| {
            let v = b.amplitudes();
            (v.adjoint() * m * v)[(0, 0)].re
        })
        .fold(0.0, f64::max)
}

fn check_run(rho0: &DensityMatrix, run: &MarkovRun) -> Result<usize> {
    if rho0.dim() != 4 {
        return Err(Error::Dimension(format!("two-emitter state needs dim 4, got {}", rho0.dim())));
    }
    if !(run.dt > 0.0) || !run.dt.is_finite() {
        return Err(bad_param("dt", "must be > 0"));
    }
    if !(run.t_max >= 0.0) {
        return Err(bad_param("t_max", "must be >= 0"));
    }
    Ok((run.t_max / run.dt).round() as usize)
}

/// Fixed-step RK4 integration with concurrence, Bell fidelity and populations attached.
pub fn integrate_markov(
    params: &ChiralMarkovParams,
    rho0: &DensityMatrix,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_markov_with(params, rho0, &MarkovRun::new(t_max, dt))
}

pub fn integrate_markov_with(
    params: &ChiralMarkovParams,
    rho0: &DensityMatrix,
    run: &MarkovRun,
) -> Result<Trajectory> {
    let steps = check_run(rho0, run)?;
    let prop = rk4_propagator(&build_liouvillian(params)?, run.dt);
    let mut v = vectorize(rho0.matrix());
    let mut traj = Trajectory::default();
    let every = run.record_every.max(1);
    for k in 0..=steps {
        let t = k as f64 * run.dt;
        let m = devectorize(&v)?;
        let tr = m.trace().re;
        if (tr - rho0.trace()).abs() > MAX_TRACE_DRIFT {
            return Err(Error::Integration {
                t,
                reason: format!("trace drift {:e} exceeds {MAX_TRACE_DRIFT:e}; reduce dt", tr - 1.0),
            });
        }
        if k % every == 0 || k == steps {
            record(&mut traj, t, m, tr)?;
        }
        if k < steps {
            v = &prop * v;
        }
    }
    Ok(traj)
}

fn record(traj: &mut Trajectory, t: f64, m: CMat, tr: f64) -> Result<()> {
    let herm = (&m + m.adjoint()) * r(0.5);
    let diag = &herm / r(tr);
    traj.times.push(t);
    traj.push_observable("concurrence", step_concurrence(&diag, t)?);
    traj.push_observable("bell_fidelity", bell_fidelity(&diag));
    traj.push_observable("fidelity_singlet", {
        let s = crate::quantum::singlet();
        let v = s.amplitudes();
        (v.adjoint() * &diag * v)[(0, 0)].re
    });
    for (k, name) in ["p_gg", "p_ge", "p_eg", "p_ee"].iter().enumerate() {
        traj.push_observable(name, herm[(k, k)].re);
    }
    traj.push_observable("trace_drift", tr - 1.0);
    traj.states.push(DensityMatrix::from_raw(herm));
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakSummary {
    pub max_concurrence: f64,
    pub t_max_concurrence: f64,
    pub first_peak_concurrence: f64,
    pub t_first_peak: f64,
    pub max_bell_fidelity: f64,
    pub t_max_fidelity: f64,
}

/// Peak statistics without storing the trajectory (sweep workhorse).
pub fn peak_summary(
    params: &ChiralMarkovParams,
    rho0: &DensityMatrix,
    t_max: f64,
    dt: f64,
) -> Result<PeakSummary> {
    let run = MarkovRun::new(t_max, dt);
    let steps = check_run(rho0, &run)?;
    let prop = rk4_propagator(&build_liouvillian(params)?, dt);
    let mut v = vectorize(rho0.matrix());
    let mut times = Vec::with_capacity(steps + 1);
    let mut conc = Vec::with_capacity(steps + 1);
    let mut fid = Vec::with_capacity(steps + 1);
    let mut next = CVec::zeros(16);
    for k in 0..=steps {
        let m = devectorize(&v)?;
        let herm = (&m + m.adjoint()) * r(0.5);
        times.push(k as f64 * dt);
        conc.push(step_concurrence(&herm, k as f64 * dt)?);
        fid.push(bell_fidelity(&herm));
        if k < steps {
            next.gemv(c(1.0, 0.0), &prop, &v, c(0.0, 0.0));
            std::mem::swap(&mut v, &mut next);
        }
    }
    let gp = global_peak(&times, &conc).unwrap();
    let fp = first_peak(&times, &conc, 0.02).unwrap();
    let ff = global_peak(&times, &fid).unwrap();
    Ok(PeakSummary {
        max_concurrence: gp.value,
        t_max_concurrence: gp.time,
        first_peak_concurrence: fp.value,
        t_first_peak: fp.time,
        max_bell_fidelity: ff.value,
        t_max_fidelity: ff.time,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DriveSurface {
    pub omega_1: Vec<f64>,
    pub omega_2: Vec<f64>,
    /// Row-major over (omega_1, omega_2).
    pub cells: Vec<PeakSummary>,
}

impl DriveSurface {
    pub fn cell(&self, i: usize, j: usize) -> &PeakSummary {
        &self.cells[i * self.omega_2.len() + j]
    }

    pub fn argmax_concurrence(&self) -> (f64, f64, PeakSummary) {
        self.argmax_by(|p| p.max_concurrence)
    }

    pub fn argmax_fidelity(&self) -> (f64, f64, PeakSummary) {
        self.argmax_by(|p| p.max_bell_fidelity)
    }

    fn argmax_by(&self, f: impl Fn(&PeakSummary) -> f64) -> (f64, f64, PeakSummary) {
        let mut best = 0;
        for k in 1..self.cells.len() {
            if f(&self.cells[k]) > f(&self.cells[best]) {
                best = k;
            }
        }
        let n2 = self.omega_2.len();
        (self.omega_1[best / n2], self.omega_2[best % n2], self.cells[best])
    }

    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str("omega_1,omega_2,c_max,t_c_max,first_peak,bell_fidelity_max,t_fidelity_max\n");
        for (i, o1) in self.omega_1.iter().enumerate() {
            for (j, o2) in self.omega_2.iter().enumerate() {
                let p = self.cell(i, j);
                out.push_str(&format!(
                    "{o1},{o2},{},{},{},{},{}\n",
                    p.max_concurrence,
                    p.t_max_concurrence,
                    p.first_peak_concurrence,
                    p.max_bell_fidelity,
                    p.t_max_fidelity
                ));
            }
        }
        out
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Peak concurrence/fidelity over a grid of real drive amplitudes.
pub fn drive_sweep(
    base: &ChiralMarkovParams,
    omega_1: &[f64],
    omega_2: &[f64],
    rho0: &DensityMatrix,
    t_max: f64,
    dt: f64,
) -> Result<DriveSurface> {
    let n2 = omega_2.len();
    let cells = par::map_range(omega_1.len() * n2, |k| {
        let p = base.with_drives(omega_1[k / n2], omega_2[k % n2]);
        peak_summary(&p, rho0, t_max, dt)
    });
    Ok(DriveSurface {
        omega_1: omega_1.to_vec(),
        omega_2: omega_2.to_vec(),
        cells: cells.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

/// Coarse grid followed by successive local refinements around the concurrence argmax.
pub fn optimize_drives(
    base: &ChiralMarkovParams,
    range: (f64, f64),
    n: usize,
    refinements: usize,
    rho0: &DensityMatrix,
    t_max: f64,
    dt: f64,
) -> Result<(DriveSurface, f64, f64, PeakSummary)> {
    let grid = linspace(range.0, range.1, n);
    let coarse = drive_sweep(base, &grid, &grid, rho0, t_max, dt)?;
    let (mut b1, mut b2, mut best) = coarse.argmax_concurrence();
    let mut h = (range.1 - range.0) / (n.max(2) - 1) as f64;
    for _ in 0..refinements {
        let g1 = linspace((b1 - h).max(range.0), (b1 + h).min(range.1), 9);
        let g2 = linspace((b2 - h).max(range.0), (b2 + h).min(range.1), 9);
        let fine = drive_sweep(base, &g1, &g2, rho0, t_max, dt)?;
        let (f1, f2, fb) = fine.argmax_concurrence();
        if fb.max_concurrence >= best.max_concurrence {
            b1 = f1;
            b2 = f2;
            best = fb;
        }
        h /= 4.0;
    }
    Ok((coarse, b1, b2, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{max_abs, sandwich};

    #[test]
    fn zero_rates_give_zero_generator() {
        let p = ChiralMarkovParams {
            gamma_r: 0.0,
            ..Default::default()
        };
        assert_eq!(max_abs(&build_liouvillian(&p).unwrap()), 0.0);
    }

    #[test]
    fn trace_preserving() {
        let mut p = ChiralMarkovParams::chiral(0.3, 0.9, 0.7).with_drives(0.4, 1.1);
        p.gamma_loss = [0.1, 0.2];
        p.detuning = 0.3;
        let l = build_liouvillian(&p).unwrap();
        let id = vectorize(&eye(4));
        let row = id.adjoint() * &l;
        assert!(row.iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn negative_rate_rejected() {
        let p = ChiralMarkovParams::chiral(-0.1, 1.0, 0.0);
        assert!(build_liouvillian(&p).is_err());
    }

    #[test]
    fn cascaded_decay_feeds_ground_state() {
        // gamma_L = 0, gamma_R = 1: d rho_gg/dt from |eg><eg| equals +1
        let p = ChiralMarkovParams::chiral(0.0, 1.0, 0.0);
        let l = build_liouvillian(&p).unwrap();
        let eg = DensityMatrix::basis(4, 2);
        let d = devectorize(&(&l * vectorize(eg.matrix()))).unwrap();
        assert!((d[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((d[(2, 2)].re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn dissipator_matches_direct_sandwich() {
        let s = on_qubit(&sigma_minus(), 0);
        let l = lindblad_superoperator(&CMat::zeros(4, 4), std::slice::from_ref(&s));
        let direct = sandwich(&s, &s) - kron(&eye(4), &(s.adjoint() * &s)) * r(0.5)
            - kron(&(s.adjoint() * &s).transpose(), &eye(4)) * r(0.5);
        assert!(max_abs(&(l - direct)) < 1e-15);
    }
}
