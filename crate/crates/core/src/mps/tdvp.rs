//! One-site projector-splitting TDVP for d|rho>> / dt = L |rho>>.

use serde::{Deserialize, Serialize};

use crate::error::bad_param;
use crate::quantum::{CMat, CVec, C64};
use crate::Result;

use super::krylov::{local_exponential, KrylovConfig};
use super::mpo::{LiouvillianMpo, Local, MpoSite};
use super::state::{left_qr, right_lq, SiteTensor, VectorizedMps, LOCAL_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdvpConfig {
    pub dt: f64,
    pub d_max: usize,
    pub krylov_dim: usize,
    pub krylov_tol: f64,
}

impl Default for TdvpConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            d_max: 18,
            krylov_dim: 30,
            krylov_tol: 1e-10,
        }
    }
}

impl TdvpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(bad_param("dt", "must be positive"));
        }
        if self.d_max == 0 {
            return Err(bad_param("d_max", "must be >= 1"));
        }
        if self.krylov_dim < 2 {
            return Err(bad_param("krylov_dim", "must be >= 2"));
        }
        if !(self.krylov_tol > 0.0) {
            return Err(bad_param("krylov_tol", "must be positive"));
        }
        Ok(())
    }

    fn krylov(&self) -> KrylovConfig {
        KrylovConfig {
            max_dim: self.krylov_dim,
            tol: self.krylov_tol,
            ..KrylovConfig::default()
        }
    }
}

/// Environment: one matrix per MPO bond channel.
type Env = Vec<CMat>;

fn unit_env() -> Env {
    vec![CMat::from_element(1, 1, C64::new(1.0, 0.0))]
}

fn is_nonzero(c: &C64) -> bool {
    c.re != 0.0 || c.im != 0.0
}

/// U[w_out][nu] = sum over blocks (w_in -> w_out) of op[nu][mu] T[w_in][mu].
fn mix(site: &MpoSite, t: &[[CMat; LOCAL_DIM]], rows: usize, cols: usize, out_index_is_in: bool) -> Vec<[CMat; LOCAL_DIM]> {
    let n_out = if out_index_is_in { site.w_in } else { site.w_out };
    let mut u: Vec<[CMat; LOCAL_DIM]> = (0..n_out).map(|_| std::array::from_fn(|_| CMat::zeros(rows, cols))).collect();
    for (wi, wo, op) in &site.blocks {
        let (src, dst) = if out_index_is_in { (*wo, *wi) } else { (*wi, *wo) };
        accumulate(&mut u[dst], op, &t[src]);
    }
    u
}

fn accumulate(dst: &mut [CMat; LOCAL_DIM], op: &Local, src: &[CMat; LOCAL_DIM]) {
    for (nu, row) in op.iter().enumerate() {
        for (mu, c) in row.iter().enumerate() {
            if is_nonzero(c) {
                for (d, s) in dst[nu].as_mut_slice().iter_mut().zip(src[mu].as_slice()) {
                    *d += c * s;
                }
            }
        }
    }
}

fn update_left(env: &Env, a: &SiteTensor, site: &MpoSite) -> Env {
    let (dr, dl) = (a[0].ncols(), a[0].nrows());
    let t: Vec<[CMat; LOCAL_DIM]> = env.iter().map(|e| std::array::from_fn(|mu| e * &a[mu])).collect();
    let u = mix(site, &t, dl, dr, false);
    u.iter()
        .map(|un| (0..LOCAL_DIM).fold(CMat::zeros(dr, dr), |acc, nu| acc + a[nu].adjoint() * &un[nu]))
        .collect()
}

fn update_right(env: &Env, a: &SiteTensor, site: &MpoSite) -> Env {
    let (dr, dl) = (a[0].ncols(), a[0].nrows());
    let t: Vec<[CMat; LOCAL_DIM]> = env.iter().map(|e| std::array::from_fn(|mu| &a[mu] * e)).collect();
    let u = mix(site, &t, dl, dr, true);
    u.iter()
        .map(|un| (0..LOCAL_DIM).fold(CMat::zeros(dl, dl), |acc, nu| acc + &un[nu] * a[nu].adjoint()))
        .collect()
}

fn apply_site(left: &Env, right: &Env, site: &MpoSite, a: &SiteTensor) -> SiteTensor {
    let (dl, dr) = (a[0].nrows(), a[0].ncols());
    let t: Vec<[CMat; LOCAL_DIM]> = left.iter().map(|e| std::array::from_fn(|mu| e * &a[mu])).collect();
    let u = mix(site, &t, dl, dr, false);
    let mut out: SiteTensor = std::array::from_fn(|_| CMat::zeros(dl, dr));
    for (w, un) in u.iter().enumerate() {
        for nu in 0..LOCAL_DIM {
            if un[nu].iter().any(is_nonzero) {
                out[nu].gemm(C64::new(1.0, 0.0), &un[nu], &right[w], C64::new(1.0, 0.0));
            }
        }
    }
    out
}

fn apply_bond(left: &Env, right: &Env, c: &CMat) -> CMat {
    let mut out = CMat::zeros(c.nrows(), c.ncols());
    for (l, r) in left.iter().zip(right) {
        out += l * c * r;
    }
    out
}

fn flatten(t: &SiteTensor) -> CVec {
    let mut v = Vec::with_capacity(LOCAL_DIM * t[0].len());
    for a in t {
        v.extend_from_slice(a.as_slice());
    }
    CVec::from_vec(v)
}

fn unflatten(v: &CVec, dl: usize, dr: usize) -> SiteTensor {
    let n = dl * dr;
    std::array::from_fn(|mu| CMat::from_column_slice(dl, dr, &v.as_slice()[mu * n..(mu + 1) * n]))
}

/// Evolution driver holding the generator and the environment caches.
pub struct Tdvp<'a> {
    mpo: &'a LiouvillianMpo,
    cfg: TdvpConfig,
    left: Vec<Env>,
    right: Vec<Env>,
}

impl<'a> Tdvp<'a> {
    /// Builds right environments; the state's centre is moved to site 0.
    pub fn new(mpo: &'a LiouvillianMpo, cfg: TdvpConfig, state: &mut VectorizedMps) -> Result<Self> {
        cfg.validate()?;
        let n = state.len();
        if mpo.len() != n {
            return Err(bad_param("mpo", format!("{} sites for a {n}-site state", mpo.len())));
        }
        state.move_center(0);
        let mut right = vec![unit_env(); n + 1];
        for i in (1..n).rev() {
            right[i] = update_right(&right[i + 1], &state.tensors[i], &mpo.sites[i]);
        }
        let mut left = vec![unit_env(); n + 1];
        left[0] = unit_env();
        Ok(Self { mpo, cfg, left, right })
    }

    pub fn config(&self) -> &TdvpConfig {
        &self.cfg
    }

    fn evolve_site(&self, i: usize, a: &SiteTensor, tau: f64) -> Result<SiteTensor> {
        let (dl, dr) = (a[0].nrows(), a[0].ncols());
        let (l, r, w) = (&self.left[i], &self.right[i + 1], &self.mpo.sites[i]);
        let f = |x: &CVec| flatten(&apply_site(l, r, w, &unflatten(x, dl, dr)));
        let v = local_exponential(&f, &flatten(a), tau, &self.cfg.krylov())?;
        Ok(unflatten(&v, dl, dr))
    }

    /// Bond between sites b-1 and b.
    fn evolve_bond(&self, b: usize, c: &CMat, tau: f64) -> Result<CMat> {
        let (rows, cols) = (c.nrows(), c.ncols());
        let (l, r) = (&self.left[b], &self.right[b]);
        let f = |x: &CVec| {
            let m = CMat::from_column_slice(rows, cols, x.as_slice());
            let y = apply_bond(l, r, &m);
            CVec::from_column_slice(y.as_slice())
        };
        let v = local_exponential(&f, &CVec::from_column_slice(c.as_slice()), tau, &self.cfg.krylov())?;
        Ok(CMat::from_column_slice(rows, cols, v.as_slice()))
    }

    /// One symmetric sweep advancing the state by dt.
    pub fn step(&mut self, state: &mut VectorizedMps) -> Result<()> {
        let n = state.len();
        let h = 0.5 * self.cfg.dt;
        if state.center != 0 {
            return Err(bad_param("state", "centre must be at site 0 between steps"));
        }
        for i in 0..n - 1 {
            let ac = self.evolve_site(i, &state.tensors[i], h)?;
            let (al, c) = left_qr(&ac);
            self.left[i + 1] = update_left(&self.left[i], &al, &self.mpo.sites[i]);
            state.tensors[i] = al;
            let c = self.evolve_bond(i + 1, &c, -h)?;
            for a in state.tensors[i + 1].iter_mut() {
                *a = &c * &*a;
            }
        }
        state.tensors[n - 1] = self.evolve_site(n - 1, &state.tensors[n - 1], self.cfg.dt)?;
        for i in (1..n).rev() {
            let (c, ar) = right_lq(&state.tensors[i]);
            self.right[i] = update_right(&self.right[i + 1], &ar, &self.mpo.sites[i]);
            state.tensors[i] = ar;
            let c = self.evolve_bond(i, &c, -h)?;
            let mut prev = state.tensors[i - 1].clone();
            for a in prev.iter_mut() {
                *a = &*a * &c;
            }
            state.tensors[i - 1] = self.evolve_site(i - 1, &prev, h)?;
        }
        state.center = 0;
        Ok(())
    }
}

/// Single step from a fresh environment build.
pub fn tdvp_step(state: &VectorizedMps, mpo: &LiouvillianMpo, cfg: &TdvpConfig) -> Result<VectorizedMps> {
    let mut s = state.clone();
    let mut t = Tdvp::new(mpo, *cfg, &mut s)?;
    t.step(&mut s)?;
    Ok(s)
}
