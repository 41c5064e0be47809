//! Dense density-matrix reference for short chains: RK4 on the Lindblad equation.

use crate::error::bad_param;
use crate::quantum::{partial_trace_matrix, sigma_minus, CMat, C64, SubsystemSplit};
use crate::Result;

use super::model::{site_operator, ChainModel};

pub const MAX_DENSE_SITES: usize = 8;

pub struct DenseChain {
    model: ChainModel,
    h_eff: CMat,
    sm: Vec<CMat>,
    pub rho: CMat,
    pub t: f64,
}

impl DenseChain {
    pub fn new(model: &ChainModel, site_states: &[CMat]) -> Result<Self> {
        let n = model.n;
        if n > MAX_DENSE_SITES {
            return Err(bad_param("n", format!("dense reference limited to {MAX_DENSE_SITES} sites")));
        }
        if site_states.len() != n {
            return Err(bad_param("site_states", "one 2x2 state per site"));
        }
        let rho = site_states[1..]
            .iter()
            .fold(site_states[0].clone(), |acc, s| acc.kronecker(s));
        Ok(Self {
            model: model.clone(),
            h_eff: model.effective_hamiltonian_dense()?,
            sm: (0..n).map(|i| site_operator(&sigma_minus(), i, n)).collect(),
            rho,
            t: 0.0,
        })
    }

    fn rhs(&self, rho: &CMat) -> CMat {
        self.model.lindblad_rhs(&self.h_eff, &self.sm, rho)
    }

    pub fn step(&mut self, dt: f64) {
        let h = C64::new(dt, 0.0);
        let half = C64::new(0.5 * dt, 0.0);
        let k1 = self.rhs(&self.rho);
        let k2 = self.rhs(&(&self.rho + &k1 * half));
        let k3 = self.rhs(&(&self.rho + &k2 * half));
        let k4 = self.rhs(&(&self.rho + &k3 * h));
        self.rho += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * (h / 6.0);
        self.t += dt;
    }

    /// Reduced operator of `sites`, first listed site most significant.
    pub fn reduced(&self, sites: &[usize]) -> Result<CMat> {
        let split = SubsystemSplit::qubits(self.model.n, sites.to_vec())?;
        let r = partial_trace_matrix(&self.rho, &split)?;
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        if sorted == sites {
            return Ok(r);
        }
        // reorder to the requested site order
        let k = sites.len();
        let pos: Vec<usize> = sites.iter().map(|s| sorted.iter().position(|x| x == s).unwrap()).collect();
        let map = |idx: usize| {
            pos.iter().fold(0, |acc, &p| acc * 2 + ((idx >> (k - 1 - p)) & 1))
        };
        let dim = 1 << k;
        let mut out = CMat::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                out[(map(a), map(b))] = r[(a, b)];
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }
}
