//! XX spin-chain bath: magnon propagator, lattice integrals and the TCL-2 kernels.
//!
//! Coupling layout of emitter i: sites x_iL and x_iR = x_iL + 1, amplitudes
//! lambda_iL = g_i e^{-i phi_i}, lambda_iR = g_i e^{+i phi_i}. The separation d counts
//! d = x_2L - x_1R + 1, so d = 1 means the two plaquettes share the site x_1R = x_2L:
//!
//! ```text
//!   emitter 1        emitter 2 (d = 1)
//!    /    \           /    \
//!  x1L -- x1R ===== x2L -- x2R       (x1R and x2L are the same site)
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_j_all};
use crate::error::{bad_param, Error, Result};
use crate::quantum::{c, r, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainBathParams {
    /// Hopping J > 0.
    pub j: f64,
    /// Uniform bath detuning.
    pub delta: f64,
    pub g: [f64; 2],
    pub phi: [f64; 2],
    /// [emitter][L = 0, R = 1] coupling sites.
    pub x: [[i64; 2]; 2],
}

impl SpinChainBathParams {
    pub fn plaquettes(j: f64, g1: f64, g2: f64, phi: f64, d: i64) -> Self {
        Self {
            j,
            delta: 0.0,
            g: [g1, g2],
            phi: [phi, phi],
            x: [[0, 1], [d, d + 1]],
        }
    }

    pub fn separation(&self) -> i64 {
        self.x[1][0] - self.x[0][1] + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0) || !self.j.is_finite() {
            return Err(bad_param("j", "hopping must be > 0"));
        }
        if self.g.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(bad_param("g", "couplings must be finite and >= 0"));
        }
        if !self.delta.is_finite() || self.phi.iter().any(|p| !p.is_finite()) {
            return Err(bad_param("delta/phi", "must be finite"));
        }
        let [[a, b], [cc, d]] = self.x;
        if !(a < b && b <= cc && cc < d) {
            return Err(bad_param(
                "x",
                format!("need x1L < x1R <= x2L < x2R, got {:?}", self.x),
            ));
        }
        Ok(())
    }

    /// lambda_{i alpha} = g_i e^{i s_alpha phi_i}, s_L = -1, s_R = +1.
    pub fn lambda(&self, i: usize, alpha: usize) -> C64 {
        let s = if alpha == 0 { -1.0 } else { 1.0 };
        C64::from_polar(self.g[i], s * self.phi[i])
    }

    /// The four (n, weight) pairs of Gamma_ij: n = x_ia - x_jb, weight = lambda_ia lambda_jb^*.
    pub fn kernel_terms(&self, i: usize, j: usize) -> [(i64, C64); 4] {
        let mut out = [(0, r(0.0)); 4];
        for a in 0..2 {
            for b in 0..2 {
                out[2 * a + b] = (self.x[i][a] - self.x[j][b], self.lambda(i, a) * self.lambda(j, b).conj());
            }
        }
        out
    }

    pub fn max_separation(&self) -> usize {
        let mut m = 0;
        for i in 0..2 {
            for j in 0..2 {
                for (n, _) in self.kernel_terms(i, j) {
                    m = m.max(n.unsigned_abs() as usize);
                }
            }
        }
        m
    }
}

/// G_d(t) = e^{-i Delta t} (-i)^d J_d(2 J t).
pub fn magnon_propagator(d: i64, t: f64, params: &SpinChainBathParams) -> C64 {
    let m = d.unsigned_abs() as u32;
    C64::from_polar(1.0, -params.delta * t) * I.powu(m).conj() * bessel_j(m as i64, 2.0 * params.j * t)
}

fn mi_pow(m: usize) -> C64 {
    match m % 4 {
        0 => r(1.0),
        1 => c(0.0, -1.0),
        2 => r(-1.0),
        _ => c(0.0, 1.0),
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let legendre = |z: f64| -> (f64, f64) {
        let (mut p0, mut p1) = (1.0, z);
        for l in 2..=n {
            let p2 = ((2 * l - 1) as f64 * z * p1 - (l - 1) as f64 * p0) / l as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
    };
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n {
        let mut z = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(z);
        x[k] = z;
        w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn gl_panel(f: &dyn Fn(f64) -> C64, a: f64, b: f64, nodes: &(Vec<f64>, Vec<f64>)) -> C64 {
    let (h, mid) = (0.5 * (b - a), 0.5 * (b + a));
    nodes
        .0
        .iter()
        .zip(&nodes.1)
        .map(|(x, w)| f(mid + h * x) * *w)
        .sum::<C64>()
        * h
}

/// Panel Gauss-Legendre with half-panel Richardson acceptance.
fn adaptive_panel(
    f: &dyn Fn(f64) -> C64,
    a: f64,
    b: f64,
    whole: C64,
    tol: f64,
    depth: u32,
    nodes: &(Vec<f64>, Vec<f64>),
) -> std::result::Result<C64, f64> {
    let m = 0.5 * (a + b);
    let left = gl_panel(f, a, m, nodes);
    let right = gl_panel(f, m, b, nodes);
    let err = (left + right - whole).norm();
    if err <= tol {
        return Ok(left + right);
    }
    if depth == 0 {
        return Err(err);
    }
    Ok(adaptive_panel(f, a, m, left, 0.5 * tol, depth - 1, nodes)?
        + adaptive_panel(f, m, b, right, 0.5 * tol, depth - 1, nodes)?)
}

pub const LATTICE_REL_TOL: f64 = 1e-8;

/// I_n(t; omega) = (-i)^m int_0^t e^{-i omega s} J_m(2 J s) ds, m = |n|.
pub fn lattice_integral(n: i64, omega: f64, t: f64, j: f64) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(bad_param("t", "must be >= 0"));
    }
    let m = n.unsigned_abs() as usize;
    let scale = (1.0 / j).max(short_time_magnitude(m, t, j));
    Ok(mi_pow(m) * interval_integral(m, omega, 0.0, t, j, scale)?)
}

/// I_n on an increasing list of times, accumulated interval by interval.
pub fn lattice_integral_series(n: i64, omega: f64, times: &[f64], j: f64) -> Result<Vec<C64>> {
    let m = n.unsigned_abs() as usize;
    let mut out = Vec::with_capacity(times.len());
    let mut acc = r(0.0);
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev) {
            return Err(bad_param("times", "must be increasing and >= 0"));
        }
        let scale = (1.0 / j).max(short_time_magnitude(m, t, j));
        acc += interval_integral(m, omega, prev, t, j, scale)?;
        prev = t;
        out.push(mi_pow(m) * acc);
    }
    Ok(out)
}

fn interval_integral(m: usize, omega: f64, a: f64, b: f64, j: f64, scale: f64) -> Result<C64> {
    if b <= a {
        return Ok(r(0.0));
    }
    let f = |s: f64| C64::from_polar(1.0, -omega * s) * bessel_j(m as i64, 2.0 * j * s);
    let nodes = gauss_legendre(10);
    let width = PI / (4.0 * omega.abs().max(2.0 * j));
    let panels = (((b - a) / width).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    // absolute target: the integral is O(1/J), or O(t^{m+1}) at short times
    let tol = LATTICE_REL_TOL * scale / panels as f64;
    let mut total = r(0.0);
    let mut worst = 0.0f64;
    for p in 0..panels {
        let (lo, hi) = (a + p as f64 * h, a + (p + 1) as f64 * h);
        let whole = gl_panel(&f, lo, hi, &nodes);
        match adaptive_panel(&f, lo, hi, whole, tol, 12, &nodes) {
            Ok(v) => total += v,
            Err(e) => worst = worst.max(e),
        }
    }
    if worst > 0.0 {
        return Err(Error::Quadrature {
            achieved: worst / scale,
            target: LATTICE_REL_TOL,
        });
    }
    Ok(total)
}

fn short_time_magnitude(m: usize, t: f64, j: f64) -> f64 {
    let mut v = t / (m as f64 + 1.0);
    for k in 1..=m {
        v *= j * t / k as f64;
    }
    v.min(1.0 / j)
}

/// Leading short-time form (-i)^m J^m t^{m+1} / (m! (m+1)).
pub fn lattice_integral_short_time(n: i64, t: f64, j: f64) -> C64 {
    let m = n.unsigned_abs() as usize;
    let mut v = t / (m as f64 + 1.0);
    for k in 1..=m {
        v *= j * t / k as f64;
    }
    mi_pow(m) * v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BandCenter,
    InsideBand,
    BandEdge,
    OutsideBand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRegime {
    pub regime: Regime,
    /// Wavenumber q = arccos(-omega / 2J) inside the band.
    pub q: Option<f64>,
    /// kappa = arcosh(|omega| / 2J) outside the band.
    pub kappa: Option<f64>,
    /// Lambda = sqrt(omega^2 - 4J^2) outside the band.
    pub lambda: Option<f64>,
    /// Long-time limit when it exists.
    pub value: Option<C64>,
    /// I_n(t) ~ C_n sqrt(t) at the band edge.
    pub edge_coefficient: Option<C64>,
}

const EDGE_TOL: f64 = 1e-12;

pub fn lattice_integral_asymptotic(n: i64, omega: f64, j: f64) -> AsymptoticRegime {
    let m = n.unsigned_abs() as usize;
    let a = 2.0 * j;
    let mut out = AsymptoticRegime {
        regime: Regime::InsideBand,
        q: None,
        kappa: None,
        lambda: None,
        value: None,
        edge_coefficient: None,
    };
    if (omega.abs() - a).abs() <= EDGE_TOL * a {
        out.regime = Regime::BandEdge;
        let phase = (m as f64) * PI / 2.0 + PI / 4.0;
        let sign = if omega > 0.0 { -1.0 } else { 1.0 };
        out.edge_coefficient = Some(mi_pow(m) * C64::from_polar(1.0, sign * phase) / (PI * j).sqrt());
    } else if omega.abs() < a {
        let q = (-omega / a).acos();
        out.regime = if omega == 0.0 { Regime::BandCenter } else { Regime::InsideBand };
        out.q = Some(q);
        out.value = Some(C64::from_polar(1.0, -(m as f64) * q) / (a * a - omega * omega).sqrt());
    } else {
        let lambda = (omega * omega - a * a).sqrt();
        let kappa = (omega.abs() / a).acosh();
        out.regime = Regime::OutsideBand;
        out.kappa = Some(kappa);
        out.lambda = Some(lambda);
        let mag = (-(m as f64) * kappa).exp() / lambda;
        out.value = Some(if omega > 0.0 {
            c(0.0, -1.0) * if m % 2 == 0 { 1.0 } else { -1.0 } * mag
        } else {
            c(0.0, mag)
        });
    }
    out
}

/// Long-time limit of I_n; errors at the band edge where it does not exist.
pub fn lattice_integral_infinite(n: i64, omega: f64, j: f64) -> Result<C64> {
    lattice_integral_asymptotic(n, omega, j)
        .value
        .ok_or(Error::BandEdge { omega })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: C64,
    pub t: f64,
    pub omega: f64,
    pub pair: (usize, usize),
}

fn check_pair(i: usize, j: usize) -> Result<()> {
    if i > 1 || j > 1 {
        return Err(bad_param("pair", format!("emitter indices must be 0 or 1, got ({i}, {j})")));
    }
    Ok(())
}

/// Gamma_ij(t; omega) = sum_ab lambda_ia lambda_jb^* I_{x_ia - x_jb}(t; omega + Delta). Indices 0-based.
pub fn tcl_kernel(i: usize, j: usize, t: f64, omega: f64, params: &SpinChainBathParams) -> Result<KernelValue> {
    check_pair(i, j)?;
    let mut value = r(0.0);
    for (n, w) in params.kernel_terms(i, j) {
        value += w * lattice_integral(n, omega + params.delta, t, params.j)?;
    }
    Ok(KernelValue {
        value,
        t,
        omega,
        pair: (i, j),
    })
}

/// Closed-form long-time kernel from the regime formulas.
pub fn redfield_kernel_closed_form(i: usize, j: usize, omega: f64, params: &SpinChainBathParams) -> Result<C64> {
    check_pair(i, j)?;
    let mut value = r(0.0);
    for (n, w) in params.kernel_terms(i, j) {
        value += w * lattice_integral_infinite(n, omega + params.delta, params.j)?;
    }
    Ok(value)
}

/// On-shell (delta-function) part gamma_ij / 2.
pub fn on_shell_rate(i: usize, j: usize, omega: f64, params: &SpinChainBathParams) -> Result<C64> {
    check_pair(i, j)?;
    let w = omega + params.delta;
    let a = 2.0 * params.j;
    if (w.abs() - a).abs() <= EDGE_TOL * a {
        return Err(Error::BandEdge { omega });
    }
    if w.abs() > a {
        return Ok(r(0.0));
    }
    let q = (-w / a).acos();
    // (1/2pi) pi sum over k = +-q of e^{ikn} / |2J sin q|
    let dos = 1.0 / (a * q.sin());
    let mut value = r(0.0);
    for (n, wt) in params.kernel_terms(i, j) {
        value += wt * ((n as f64) * q).cos() * dos;
    }
    Ok(value)
}

/// Redfield kernel gamma_ij/2 + i J_ij with the dispersive part from principal-value quadrature.
pub fn redfield_kernel(i: usize, j: usize, omega: f64, params: &SpinChainBathParams) -> Result<C64> {
    Ok(on_shell_rate(i, j, omega, params)? + I * dispersive_shift(i, j, omega, params)?)
}

/// Principal value of int_{k0-a}^{k0+a} f(k) dk where f has a simple pole at k0,
/// computed by folding f(k0+u) + f(k0-u) onto [0, a] with `levels` geometric panels toward u = 0.
/// Keep `levels` small: the folded integrand is smooth, but rounding of k0 makes it blow up like
/// eps/u^2 at u near machine precision.
pub fn pv_fold(f: &dyn Fn(f64) -> C64, k0: f64, a: f64, levels: usize) -> C64 {
    let nodes = gauss_legendre(12);
    let g = |u: f64| f(k0 + u) + f(k0 - u);
    // geometric panels toward u = 0
    let mut total = r(0.0);
    let mut hi = a;
    for _ in 0..levels {
        let lo = hi * 0.25;
        total += gl_panel(&g, lo, hi, &nodes);
        hi = lo;
    }
    total + gl_panel(&g, 0.0, hi, &nodes)
}

fn composite(f: &dyn Fn(f64) -> C64, a: f64, b: f64, panels: usize) -> C64 {
    let nodes = gauss_legendre(12);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| gl_panel(f, a + p as f64 * h, a + (p + 1) as f64 * h, &nodes))
        .sum()
}

/// PV of (1/2pi) int_{-pi}^{pi} F(k) / (w + 2J cos k) dk.
fn pv_band_integral(f: &dyn Fn(f64) -> C64, w: f64, jj: f64) -> Result<C64> {
    let a = 2.0 * jj;
    if (w.abs() - a).abs() <= EDGE_TOL * a {
        return Err(Error::BandEdge { omega: w });
    }
    let integrand = |k: f64| f(k) / (w + a * k.cos());
    let eval = |panels: usize| -> C64 {
        if w.abs() > a {
            return composite(&integrand, -PI, PI, 2 * panels);
        }
        let q = (-w / a).acos();
        let half = 0.5 * q.min(PI - q);
        let mut s = r(0.0);
        for k0 in [-q, q] {
            s += pv_fold(&integrand, k0, half, 6);
        }
        // the rest of [-pi, pi] outside the two windows
        let cuts = [-PI, -q - half, -q + half, q - half, q + half, PI];
        for seg in [(0, 1), (2, 3), (4, 5)] {
            let (lo, hi) = (cuts[seg.0], cuts[seg.1]);
            if hi > lo {
                s += composite(&integrand, lo, hi, panels);
            }
        }
        s
    };
    let mut panels = 16;
    let mut prev = eval(panels);
    loop {
        panels *= 2;
        let next = eval(panels);
        let err = (next - prev).norm();
        if err < 1e-12 * (1.0 + next.norm()) {
            return Ok(next / (2.0 * PI));
        }
        if panels > 4096 {
            return Err(Error::Quadrature {
                achieved: err,
                target: 1e-8,
            });
        }
        prev = next;
    }
}

/// J_ij(omega) = -sum lambda lambda^* (1/2pi) PV int e^{ikn} / (omega + Delta + 2J cos k) dk.
pub fn dispersive_shift(i: usize, j: usize, omega: f64, params: &SpinChainBathParams) -> Result<C64> {
    check_pair(i, j)?;
    let terms = params.kernel_terms(i, j);
    let f = |k: f64| -> C64 {
        terms
            .iter()
            .map(|(n, w)| *w * C64::from_polar(1.0, k * *n as f64))
            .sum()
    };
    Ok(-pv_band_integral(&f, omega + params.delta, params.j)?)
}

/// Principal value of int_{-w}^{w} rho(e) / (e - e0) de for a density given on the band;
/// analytic test hook for flat densities (returns 0 for rho = const and e0 = 0).
pub fn principal_value_flat(rho: f64, half_width: f64, e0: f64) -> C64 {
    let f = |e: f64| r(rho / (e - e0));
    let a = (half_width - e0.abs()).max(0.0);
    let mut s = pv_fold(&f, e0, a, 6);
    let (lo, hi) = (e0 - a, e0 + a);
    if lo > -half_width {
        s += composite(&f, -half_width, lo, 64);
    }
    if hi < half_width {
        s += composite(&f, hi, half_width, 64);
    }
    s
}

/// Phi_d = Omega_1 d / J (mid-band delay phase between the dressed sidebands).
pub fn delay_phase(omega_1: f64, d: f64, j: f64) -> f64 {
    omega_1 * d / j
}

/// Operational bath timescale 1/(2J), reported only.
pub fn bath_timescale(j: f64) -> f64 {
    1.0 / (2.0 * j)
}

/// Gamma_ij(t; omega) tabulated on a uniform grid, built by cumulative Gauss-Legendre.
#[derive(Debug, Clone)]
pub struct KernelCache {
    pub h: f64,
    pub freqs: Vec<f64>,
    data: Vec<Vec<C64>>,
}

impl KernelCache {
    /// Tabulate on t_k = k h, k = 0..=steps, for all pairs and `freqs`.
    pub fn build(params: &SpinChainBathParams, freqs: &[f64], h: f64, steps: usize) -> Result<Self> {
        params.validate()?;
        if !(h > 0.0) {
            return Err(bad_param("h", "grid step must be > 0"));
        }
        let mmax = params.max_separation();
        let nodes = gauss_legendre(8);
        let nf = freqs.len();
        // cumulative integrals of e^{-i w s} J_m(2Js) for every m and w
        let mut acc = vec![vec![r(0.0); mmax + 1]; nf];
        let mut data = vec![vec![r(0.0); steps + 1]; 4 * nf];
        let terms: Vec<[(i64, C64); 4]> =
            (0..4).map(|p| params.kernel_terms(p / 2, p % 2)).collect();
        // sub-panels so each stays below an eighth of the fastest oscillation
        let fastest = freqs.iter().fold(2.0 * params.j, |a, w| a.max((w + params.delta).abs()));
        let sub = ((h * fastest / (PI / 4.0)).ceil() as usize).max(1);
        let hs = h / sub as f64;
        for k in 0..steps {
            for s in 0..sub {
                let a = k as f64 * h + s as f64 * hs;
                for (x, w) in nodes.0.iter().zip(&nodes.1) {
                    let tau = a + 0.5 * hs * (1.0 + x);
                    let jm = bessel_j_all(mmax, 2.0 * params.j * tau);
                    for (fi, fw) in freqs.iter().enumerate() {
                        let ph = C64::from_polar(0.5 * hs * w, -(fw + params.delta) * tau);
                        for m in 0..=mmax {
                            acc[fi][m] += ph * jm[m];
                        }
                    }
                }
            }
            for fi in 0..nf {
                for (p, tp) in terms.iter().enumerate() {
                    let mut v = r(0.0);
                    for (n, wt) in tp {
                        let m = n.unsigned_abs() as usize;
                        v += *wt * mi_pow(m) * acc[fi][m];
                    }
                    data[p * nf + fi][k + 1] = v;
                }
            }
        }
        Ok(Self {
            h,
            freqs: freqs.to_vec(),
            data,
        })
    }

    /// Time-independent cache holding the Redfield (t -> infinity) kernels.
    pub fn redfield(params: &SpinChainBathParams, freqs: &[f64]) -> Result<Self> {
        params.validate()?;
        let nf = freqs.len();
        let mut data = vec![vec![r(0.0); 1]; 4 * nf];
        for p in 0..4 {
            for (fi, w) in freqs.iter().enumerate() {
                data[p * nf + fi][0] = redfield_kernel_closed_form(p / 2, p % 2, *w, params)?;
            }
        }
        Ok(Self {
            h: f64::INFINITY,
            freqs: freqs.to_vec(),
            data,
        })
    }

    pub fn is_constant(&self) -> bool {
        self.data.first().map(|v| v.len() == 1).unwrap_or(true)
    }

    pub fn t_max(&self) -> f64 {
        if self.is_constant() {
            f64::INFINITY
        } else {
            self.h * (self.data[0].len() - 1) as f64
        }
    }

    pub fn freq_index(&self, w: f64) -> Option<usize> {
        self.freqs.iter().position(|f| (f - w).abs() <= 1e-12 * (1.0 + w.abs()))
    }

    /// Linear interpolation between grid points (exact on the grid).
    pub fn at(&self, i: usize, j: usize, freq: usize, t: f64) -> Result<C64> {
        let series = &self.data[(2 * i + j) * self.freqs.len() + freq];
        if series.len() == 1 {
            return Ok(series[0]);
        }
        let x = t / self.h;
        let k = x.floor();
        if x < -1e-9 || k as usize > series.len() - 1 {
            return Err(Error::Integration {
                t,
                reason: format!("outside kernel cache [0, {}]", self.t_max()),
            });
        }
        let k = (k.max(0.0) as usize).min(series.len() - 1);
        if k == series.len() - 1 {
            return Ok(series[k]);
        }
        let f = x - k as f64;
        Ok(series[k] * (1.0 - f) + series[k + 1] * f)
    }

    /// Kernel-table rows (t, omega, i, j, value) for CSV dumps; i, j reported 1-based.
    pub fn rows(&self) -> Vec<(f64, f64, usize, usize, C64)> {
        let mut out = Vec::new();
        let nf = self.freqs.len();
        for p in 0..4 {
            for (fi, w) in self.freqs.iter().enumerate() {
                for (k, v) in self.data[p * nf + fi].iter().enumerate() {
                    let t = if self.is_constant() { f64::INFINITY } else { k as f64 * self.h };
                    out.push((t, *w, p / 2 + 1, p % 2 + 1, *v));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 2..=24 {
            let (x, w) = gauss_legendre(n);
            let p = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
            assert!((s - 2.0 / (p as f64 + 1.0)).abs() < 1e-13, "n = {n}");
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn propagator_at_zero() {
        let p = SpinChainBathParams::plaquettes(1.0, 0.1, 0.1, 0.0, 1);
        assert_eq!(magnon_propagator(0, 0.0, &p), r(1.0));
        assert_eq!(magnon_propagator(3, 0.0, &p).norm(), 0.0);
    }

    #[test]
    fn kernel_vanishes_at_zero_time() {
        let p = SpinChainBathParams::plaquettes(1.0, 0.14, 0.3, PI / 4.0, 1);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(tcl_kernel(i, j, 0.0, 0.3, &p).unwrap().value, r(0.0));
        }
    }

    #[test]
    fn regimes_classified() {
        assert_eq!(lattice_integral_asymptotic(1, 0.0, 1.0).regime, Regime::BandCenter);
        assert_eq!(lattice_integral_asymptotic(1, 1.0, 1.0).regime, Regime::InsideBand);
        assert_eq!(lattice_integral_asymptotic(1, 2.0, 1.0).regime, Regime::BandEdge);
        assert_eq!(lattice_integral_asymptotic(1, -3.0, 1.0).regime, Regime::OutsideBand);
        let v = lattice_integral_asymptotic(1, 0.0, 1.0).value.unwrap();
        assert!((v - c(0.0, -0.5)).norm() < 1e-15);
        assert!(lattice_integral_infinite(0, 2.0, 1.0).is_err());
    }

    #[test]
    fn outside_band_is_purely_dispersive() {
        let p = SpinChainBathParams::plaquettes(1.0, 0.2, 0.2, 0.3, 2);
        assert_eq!(on_shell_rate(0, 1, 2.5, &p).unwrap(), r(0.0));
        assert!(redfield_kernel(0, 0, 2.0, &p).is_err());
    }

    #[test]
    fn flat_band_principal_value_vanishes() {
        assert!(principal_value_flat(0.7, 1.0, 0.0).norm() < 1e-12);
    }

    #[test]
    fn delay_phase_examples() {
        assert!((delay_phase(0.1, 31.0, 1.0) - 3.1).abs() < 1e-12);
        assert_eq!(delay_phase(0.1, 0.0, 1.0), 0.0);
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut p = SpinChainBathParams::plaquettes(1.0, 0.1, 0.1, 0.0, 1);
        p.x = [[0, 1], [0, 1]];
        assert!(p.validate().is_err());
        assert_eq!(SpinChainBathParams::plaquettes(1.0, 0.1, 0.1, 0.0, 9).separation(), 9);
    }
}
