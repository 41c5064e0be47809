//! Liouvillian as a bond-dimension-10 MPO.
//!
//! Local Liouville index mu = 2 b + k for rho_{k b} (bra digit slow), so the
//! superoperator "A (x) B" acts with A on the bra side (already conjugated) and B on the ket side.
//! Bond channels: 0 done, 1..4 nearest-neighbour strings, 5..8 next-nearest strings, 9 not started.

use crate::error::bad_param;
use crate::quantum::{eye, kron, sigma_minus, sigma_plus, CMat, C64, I};
use crate::Result;

use super::model::ChainModel;

pub const MPO_BOND: usize = 10;
pub type Local = [[C64; 4]; 4];

const DONE: usize = 0;
const START: usize = 9;

#[derive(Debug, Clone)]
pub struct MpoSite {
    pub w_in: usize,
    pub w_out: usize,
    /// Nonzero blocks (w_in, w_out, operator).
    pub blocks: Vec<(usize, usize, Local)>,
}

#[derive(Debug, Clone)]
pub struct LiouvillianMpo {
    pub sites: Vec<MpoSite>,
}

fn to_local(m: &CMat) -> Local {
    let mut out = [[C64::new(0.0, 0.0); 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    out
}

fn sup(bra: &CMat, ket: &CMat) -> CMat {
    kron(bra, ket)
}

fn is_zero(l: &Local) -> bool {
    l.iter().flatten().all(|v| *v == C64::new(0.0, 0.0))
}

fn onsite(model: &ChainModel, i: usize) -> CMat {
    let (sm, sp, id) = (sigma_minus(), sigma_plus(), eye(2));
    let n = &sp * &sm;
    let z = model.zeta[i];
    let d = model.delta[i];
    let om = model.omega[i];
    let bra = &n * C64::new(d, 0.5 * z) + &sm * om.conj() + &sp * om;
    let ket = &n * C64::new(d, -0.5 * z) + &sm * om + &sp * om.conj();
    sup(&bra, &id) * I - sup(&id, &ket) * I + sup(&sm, &sm) * C64::new(z, 0.0)
}

/// Channel openers (with couplings) and closers.
fn channels(j: C64) -> [CMat; 4] {
    let (sm, sp, id) = (sigma_minus(), sigma_plus(), eye(2));
    [
        sup(&sm, &id) * j.conj(),
        sup(&sp, &id) * j,
        sup(&id, &sm) * j,
        sup(&id, &sp) * j.conj(),
    ]
}

fn closers() -> [CMat; 4] {
    let (sm, sp, id) = (sigma_minus(), sigma_plus(), eye(2));
    [
        sup(&sp, &id) * I,
        sup(&sm, &id) * I,
        sup(&id, &sp) * (-I),
        sup(&id, &sm) * (-I),
    ]
}

/// Full 10 x 10 block matrix of site i (rows incoming, columns outgoing).
fn bulk_blocks(model: &ChainModel, i: usize) -> Vec<(usize, usize, CMat)> {
    let id4 = eye(4);
    let mut b = vec![(DONE, DONE, id4.clone()), (START, START, id4.clone())];
    for (k, e) in closers().into_iter().enumerate() {
        b.push((1 + k, DONE, e));
        b.push((5 + k, 1 + k, id4.clone()));
    }
    b.push((START, DONE, onsite(model, i)));
    let zero = C64::new(0.0, 0.0);
    let j1 = model.j1.get(i).copied().unwrap_or(zero);
    let j2 = model.j2.get(i).copied().unwrap_or(zero);
    for (k, op) in channels(j1).into_iter().enumerate() {
        b.push((START, 1 + k, op));
    }
    for (k, op) in channels(j2).into_iter().enumerate() {
        b.push((START, 5 + k, op));
    }
    b
}

pub fn build_liouvillian_mpo(model: &ChainModel) -> Result<LiouvillianMpo> {
    let n = model.n;
    if n < 2 {
        return Err(bad_param("n", "chain needs at least two sites"));
    }
    let mut sites = Vec::with_capacity(n);
    for i in 0..n {
        let all = bulk_blocks(model, i);
        let (w_in, w_out) = match i {
            0 => (1, MPO_BOND),
            _ if i == n - 1 => (MPO_BOND, 1),
            _ => (MPO_BOND, MPO_BOND),
        };
        let blocks = all
            .into_iter()
            .filter(|(r, c, _)| (i > 0 || *r == START) && (i < n - 1 || *c == DONE))
            .map(|(r, c, m)| {
                let r = if i == 0 { 0 } else { r };
                let c = if i == n - 1 { 0 } else { c };
                (r, c, to_local(&m))
            })
            .filter(|(_, _, l)| !is_zero(l))
            .collect();
        sites.push(MpoSite { w_in, w_out, blocks });
    }
    Ok(LiouvillianMpo { sites })
}

impl LiouvillianMpo {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|s| s.w_out).collect()
    }

    /// Dense 4^n x 4^n matrix in interleaved site ordering (site 0 slowest).
    pub fn to_dense(&self) -> CMat {
        let mut acc: Vec<CMat> = vec![CMat::from_element(1, 1, C64::new(1.0, 0.0))];
        for s in &self.sites {
            let dim = acc[0].nrows() * 4;
            let mut next = vec![CMat::zeros(dim, dim); s.w_out];
            for (r, c, l) in &s.blocks {
                let loc = CMat::from_fn(4, 4, |a, b| l[a][b]);
                next[*c] += kron(&acc[*r], &loc);
            }
            acc = next;
        }
        acc.swap_remove(0)
    }
}

/// Largest entry of <<I| applied to each local piece of the generator: the onsite blocks and
/// the assembled nearest and next-nearest hopping strings. All vanish for a trace-preserving L.
pub fn trace_covector_residual(model: &ChainModel) -> f64 {
    let id2 = CMat::from_row_slice(1, 4, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    let id22 = kron(&id2, &id2);
    let mut worst: f64 = 0.0;
    let mut check = |m: CMat| worst = worst.max(crate::quantum::max_abs(&m));
    for i in 0..model.n {
        check(&id2 * onsite(model, i));
    }
    for j in model.j1.iter().chain(&model.j2) {
        let pair = channels(*j)
            .iter()
            .zip(closers().iter())
            .fold(CMat::zeros(16, 16), |acc, (o, c)| acc + kron(o, c));
        check(&id22 * pair);
    }
    worst
}

/// <<I| for n sites in interleaved ordering.
pub fn identity_covector(n: usize) -> Vec<C64> {
    let dim = 1usize << (2 * n);
    (0..dim)
        .map(|idx| {
            let diag = (0..n).all(|s| {
                let mu = (idx >> (2 * (n - 1 - s))) & 3;
                mu == 0 || mu == 3
            });
            C64::new(if diag { 1.0 } else { 0.0 }, 0.0)
        })
        .collect()
}

/// Interleaved index of a (ket, bra) pair of n-site basis labels, site 0 most significant.
pub fn interleave(n: usize, ket: usize, bra: usize) -> usize {
    let mut idx = 0;
    for s in 0..n {
        let k = (ket >> (n - 1 - s)) & 1;
        let b = (bra >> (n - 1 - s)) & 1;
        idx = idx * 4 + 2 * b + k;
    }
    idx
}

/// Liouvillian assembled directly from H_eff and the recycling term in column stacking,
/// then permuted to the interleaved ordering. Independent of the MPO construction.
pub fn dense_liouvillian(model: &ChainModel) -> Result<CMat> {
    let n = model.n;
    if n > 5 {
        return Err(bad_param("n", "dense Liouvillian limited to 5 sites"));
    }
    let h = model.effective_hamiltonian_dense()?;
    let d = 1usize << n;
    let id = eye(d);
    let mut l = (kron(&h.conjugate(), &id) - kron(&id, &h)) * I;
    for (i, z) in model.zeta.iter().enumerate() {
        if *z != 0.0 {
            let sm = super::model::site_operator(&sigma_minus(), i, n);
            l += kron(&sm.conjugate(), &sm) * C64::new(*z, 0.0);
        }
    }
    // column-stacked index = ket + d * bra
    let perm: Vec<usize> = (0..d * d).map(|v| interleave(n, v % d, v / d)).collect();
    let mut out = CMat::zeros(d * d, d * d);
    for a in 0..d * d {
        for b in 0..d * d {
            out[(perm[a], perm[b])] = l[(a, b)];
        }
    }
    Ok(out)
}
