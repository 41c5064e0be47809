//! Open spin chain with two plaquette-coupled emitter sites and lossy edges.
//!
//! ```text
//!           J_B (bypass)
//!        .-------------.
//!   ... n-2 --- n-1 -- n -- n+1 --- n+2 ...
//!          J_B   g e^{-i phi}  J_B
//! ```

use serde::{Deserialize, Serialize};

use crate::error::bad_param;
use crate::quantum::{eye, kron, sigma_minus, sigma_plus, CMat, C64, I};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub j_b: f64,
    pub g: [f64; 2],
    pub phi: [f64; 2],
    pub zeta_edge: f64,
    pub omega: [f64; 2],
}

impl ChainParams {
    /// N = 16, emitters at 3 and 13, optimum drive and couplings.
    pub fn reference() -> Self {
        Self {
            n: 16,
            n1: 3,
            n2: 13,
            j_b: 1.0,
            g: [0.14, 0.30],
            phi: [std::f64::consts::FRAC_PI_4; 2],
            zeta_edge: 2.0,
            omega: [0.063, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    pub n: usize,
    pub j_b: f64,
    pub delta: Vec<f64>,
    pub omega: Vec<C64>,
    /// J1[i] couples i and i+1.
    pub j1: Vec<C64>,
    /// J2[i] couples i and i+2.
    pub j2: Vec<C64>,
    pub zeta: Vec<f64>,
    pub emitters: [usize; 2],
}

pub fn build_chain_model(p: &ChainParams) -> Result<ChainModel> {
    let ChainParams { n, n1, n2, .. } = *p;
    if n1 < 1 || n2 < n1 + 3 || n2 + 2 > n {
        return Err(bad_param(
            "n1/n2",
            format!("plaquettes must be interior and disjoint: need 1 <= n1, n1 + 3 <= n2 <= N - 2 (N={n}, n1={n1}, n2={n2})"),
        ));
    }
    if !(p.j_b > 0.0) {
        return Err(bad_param("j_b", "must be positive"));
    }
    if p.zeta_edge < 0.0 || !p.zeta_edge.is_finite() {
        return Err(bad_param("zeta_edge", "must be finite and >= 0"));
    }
    for (k, v) in p.g.iter().chain(&p.phi).chain(&p.omega).enumerate() {
        if !v.is_finite() {
            return Err(bad_param("g/phi/omega", format!("entry {k} is not finite")));
        }
    }
    let mut j1 = vec![C64::new(p.j_b, 0.0); n - 1];
    let mut j2 = vec![C64::new(0.0, 0.0); n - 2];
    let mut omega = vec![C64::new(0.0, 0.0); n];
    for (e, &site) in [n1, n2].iter().enumerate() {
        let amp = C64::from_polar(p.g[e], -p.phi[e]);
        j1[site - 1] = amp;
        j1[site] = amp;
        j2[site - 1] = C64::new(p.j_b, 0.0);
        omega[site] = C64::new(p.omega[e], 0.0);
    }
    let mut zeta = vec![0.0; n];
    zeta[0] = p.zeta_edge;
    zeta[n - 1] = p.zeta_edge;
    Ok(ChainModel {
        n,
        j_b: p.j_b,
        delta: vec![0.0; n],
        omega,
        j1,
        j2,
        zeta,
        emitters: [n1, n2],
    })
}

/// Single-site operator embedded in the full 2^n space, site 0 most significant.
pub fn site_operator(op: &CMat, site: usize, n: usize) -> CMat {
    let left = eye(1usize << site);
    let right = eye(1usize << (n - site - 1));
    kron(&kron(&left, op), &right)
}

impl ChainModel {
    pub fn hamiltonian_dense(&self) -> Result<CMat> {
        let n = self.n;
        if n > 12 {
            return Err(bad_param("n", "dense Hamiltonian limited to 12 sites"));
        }
        let sm: Vec<CMat> = (0..n).map(|i| site_operator(&sigma_minus(), i, n)).collect();
        let sp: Vec<CMat> = (0..n).map(|i| site_operator(&sigma_plus(), i, n)).collect();
        let mut h = CMat::zeros(1 << n, 1 << n);
        for i in 0..n {
            h += (&sp[i] * &sm[i]) * C64::new(self.delta[i], 0.0);
            h += &sm[i] * self.omega[i] + &sp[i] * self.omega[i].conj();
        }
        for (i, j) in self.j1.iter().enumerate() {
            h += &sp[i + 1] * &sm[i] * *j + &sp[i] * &sm[i + 1] * j.conj();
        }
        for (i, j) in self.j2.iter().enumerate() {
            h += &sp[i + 2] * &sm[i] * *j + &sp[i] * &sm[i + 2] * j.conj();
        }
        Ok(h)
    }

    /// H - (i/2) sum zeta_i n_i.
    pub fn effective_hamiltonian_dense(&self) -> Result<CMat> {
        let mut h = self.hamiltonian_dense()?;
        for (i, z) in self.zeta.iter().enumerate() {
            if *z != 0.0 {
                let nop = site_operator(&(sigma_plus() * sigma_minus()), i, self.n);
                h -= nop * (I * (0.5 * z));
            }
        }
        Ok(h)
    }

    /// Lindblad right-hand side for a dense density matrix.
    pub fn lindblad_rhs(&self, h_eff: &CMat, sm: &[CMat], rho: &CMat) -> CMat {
        let mut d = (rho * h_eff.adjoint() - h_eff * rho) * I;
        for (i, z) in self.zeta.iter().enumerate() {
            if *z != 0.0 {
                d += &sm[i] * rho * sm[i].adjoint() * C64::new(*z, 0.0);
            }
        }
        d
    }
}
