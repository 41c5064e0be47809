//! Arnoldi approximation of exp(tau G) v for non-Hermitian G.

use crate::error::Error;
use crate::quantum::{CMat, CVec, C64};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    pub max_dim: usize,
    pub tol: f64,
    /// Times the step may be halved when the subspace limit is hit.
    pub max_splits: u32,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            max_dim: 30,
            tol: 1e-10,
            max_splits: 8,
        }
    }
}

/// exp(tau G) v with G given by its action.
pub fn local_exponential<F>(apply: &F, v: &CVec, tau: f64, cfg: &KrylovConfig) -> Result<CVec>
where
    F: Fn(&CVec) -> CVec,
{
    expm_split(apply, v, tau, cfg, cfg.max_splits)
}

fn expm_split<F>(apply: &F, v: &CVec, tau: f64, cfg: &KrylovConfig, splits: u32) -> Result<CVec>
where
    F: Fn(&CVec) -> CVec,
{
    match arnoldi_expm(apply, v, tau, cfg) {
        Ok(w) => Ok(w),
        Err(Error::Krylov { residual }) if splits > 0 => {
            let _ = residual;
            let half = expm_split(apply, v, 0.5 * tau, cfg, splits - 1)?;
            expm_split(apply, &half, 0.5 * tau, cfg, splits - 1)
        }
        Err(e) => Err(e),
    }
}

fn arnoldi_expm<F>(apply: &F, v: &CVec, tau: f64, cfg: &KrylovConfig) -> Result<CVec>
where
    F: Fn(&CVec) -> CVec,
{
    let beta = v.norm();
    if beta == 0.0 || tau == 0.0 {
        return Ok(v.clone());
    }
    let m_max = cfg.max_dim.min(v.len()).max(1);
    let mut basis: Vec<CVec> = vec![v / C64::new(beta, 0.0)];
    let mut h = CMat::zeros(m_max + 1, m_max);
    let mut residual = f64::INFINITY;
    for j in 0..m_max {
        let mut w = apply(&basis[j]);
        let scale = w.norm();
        // modified Gram-Schmidt with one reorthogonalization pass
        for _ in 0..2 {
            for (i, b) in basis.iter().enumerate() {
                let c = b.dotc(&w);
                h[(i, j)] += c;
                w.axpy(-c, b, C64::new(1.0, 0.0));
            }
        }
        let hn = w.norm();
        h[(j + 1, j)] = C64::new(hn, 0.0);
        let m = j + 1;
        let happy = hn <= 1e-13 * scale.max(1e-300) || m == v.len();
        let small = h.view((0, 0), (m, m)).into_owned() * C64::new(tau, 0.0);
        let e = small.exp();
        residual = hn * e[(m - 1, 0)].norm();
        if happy || residual < cfg.tol {
            let mut out = CVec::zeros(v.len());
            for (i, b) in basis.iter().enumerate().take(m) {
                out.axpy(e[(i, 0)] * beta, b, C64::new(1.0, 0.0));
            }
            return Ok(out);
        }
        basis.push(w / C64::new(hn, 0.0));
    }
    Err(Error::Krylov { residual })
}
