//! Vectorized density matrix as an open-boundary MPS with local Liouville dimension 4.

use std::io::{Read, Write};

use crate::error::{bad_param, Error};
use crate::quantum::{sigma_minus, sigma_plus, CMat, C64};
use crate::Result;

pub const LOCAL_DIM: usize = 4;
pub const MAX_REDUCED_SITES: usize = 6;
pub type SiteTensor = [CMat; LOCAL_DIM];

const CHECKPOINT_MAGIC: &[u8; 8] = b"LVMPS\x00\x00\x01";

/// Covector c with Tr(X rho_site) = sum_mu c[mu] rho_mu, mu = 2 b + k.
pub fn covector(x: &CMat) -> [C64; 4] {
    [x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)]]
}

pub const IDENTITY_COVECTOR: [C64; 4] = [
    C64 { re: 1.0, im: 0.0 },
    C64 { re: 0.0, im: 0.0 },
    C64 { re: 0.0, im: 0.0 },
    C64 { re: 1.0, im: 0.0 },
];

/// Local Liouville vector of a 2x2 site density matrix.
pub fn local_vector(rho: &CMat) -> [C64; 4] {
    [rho[(0, 0)], rho[(1, 0)], rho[(0, 1)], rho[(1, 1)]]
}

pub fn contract_covector(t: &SiteTensor, c: &[C64; 4]) -> CMat {
    let mut m = CMat::zeros(t[0].nrows(), t[0].ncols());
    for (mu, w) in c.iter().enumerate() {
        if *w != C64::new(0.0, 0.0) {
            m += &t[mu] * *w;
        }
    }
    m
}

/// Bond dimensions D_0..D_n with D_k = min(d_max, 4^k, 4^(n-k)).
pub fn bond_dims(n: usize, d_max: usize) -> Vec<usize> {
    (0..=n)
        .map(|k| {
            let e = k.min(n - k);
            let full = if e >= 16 { usize::MAX } else { 1usize << (2 * e) };
            full.min(d_max)
        })
        .collect()
}

/// Split A_C = A_L R with A_L left-orthonormal.
pub fn left_qr(t: &SiteTensor) -> (SiteTensor, CMat) {
    let (dl, dr) = (t[0].nrows(), t[0].ncols());
    let mut m = CMat::zeros(LOCAL_DIM * dl, dr);
    for (mu, a) in t.iter().enumerate() {
        m.view_mut((mu * dl, 0), (dl, dr)).copy_from(a);
    }
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let k = q.ncols();
    let al = std::array::from_fn(|mu| q.view((mu * dl, 0), (dl, k)).into_owned());
    (al, r)
}

/// Split A_C = L A_R with A_R right-orthonormal.
pub fn right_lq(t: &SiteTensor) -> (CMat, SiteTensor) {
    let (dl, dr) = (t[0].nrows(), t[0].ncols());
    let mut m = CMat::zeros(LOCAL_DIM * dr, dl);
    for (mu, a) in t.iter().enumerate() {
        m.view_mut((mu * dr, 0), (dr, dl)).copy_from(&a.adjoint());
    }
    let qr = m.qr();
    let q = qr.q();
    let l = qr.r().adjoint();
    let k = q.ncols();
    let ar = std::array::from_fn(|mu| q.view((mu * dr, 0), (dr, k)).adjoint());
    (l, ar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedMps {
    pub tensors: Vec<SiteTensor>,
    /// Orthogonality centre: sites left of it are left-orthonormal, right of it right-orthonormal.
    pub center: usize,
}

impl VectorizedMps {
    /// Product state padded with zero blocks up to `d_max`, brought to right-canonical form.
    pub fn product(site_states: &[CMat], d_max: usize) -> Result<Self> {
        let n = site_states.len();
        if n < 2 {
            return Err(bad_param("n", "need at least two sites"));
        }
        if d_max == 0 {
            return Err(bad_param("d_max", "must be >= 1"));
        }
        let dims = bond_dims(n, d_max);
        let mut tensors: Vec<SiteTensor> = site_states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let v = local_vector(s);
                std::array::from_fn(|mu| {
                    let mut m = CMat::zeros(dims[i], dims[i + 1]);
                    m[(0, 0)] = v[mu];
                    m
                })
            })
            .collect();
        for i in (1..n).rev() {
            let (l, ar) = right_lq(&tensors[i]);
            tensors[i] = ar;
            for a in tensors[i - 1].iter_mut() {
                *a = &*a * &l;
            }
        }
        Ok(Self { tensors, center: 0 })
    }

    /// All-ground chain with the two emitters in the given 2x2 states.
    pub fn chain_state(n: usize, emitters: [usize; 2], states: [&CMat; 2], d_max: usize) -> Result<Self> {
        let mut g = CMat::zeros(2, 2);
        g[(0, 0)] = C64::new(1.0, 0.0);
        let mut s = vec![g; n];
        for (e, &site) in emitters.iter().enumerate() {
            if site >= n {
                return Err(bad_param("emitters", "site outside chain"));
            }
            s[site] = states[e].clone();
        }
        Self::product(&s, d_max)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.tensors.iter().map(|t| t[0].nrows()).collect();
        d.push(self.tensors.last().map(|t| t[0].ncols()).unwrap_or(1));
        d
    }

    /// Worst deviation from the gauge conditions around the centre.
    pub fn gauge_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, t) in self.tensors.iter().enumerate() {
            if i == self.center {
                continue;
            }
            let g = if i < self.center {
                t.iter().fold(CMat::zeros(t[0].ncols(), t[0].ncols()), |acc, a| acc + a.adjoint() * a)
            } else {
                t.iter().fold(CMat::zeros(t[0].nrows(), t[0].nrows()), |acc, a| acc + a * a.adjoint())
            };
            let id = CMat::identity(g.nrows(), g.ncols());
            worst = worst.max(crate::quantum::max_abs(&(g - id)));
        }
        worst
    }

    /// Move the orthogonality centre to `site` with QR steps.
    pub fn move_center(&mut self, site: usize) {
        while self.center < site {
            let i = self.center;
            let (al, r) = left_qr(&self.tensors[i]);
            self.tensors[i] = al;
            for a in self.tensors[i + 1].iter_mut() {
                *a = &r * &*a;
            }
            self.center += 1;
        }
        while self.center > site {
            let i = self.center;
            let (l, ar) = right_lq(&self.tensors[i]);
            self.tensors[i] = ar;
            for a in self.tensors[i - 1].iter_mut() {
                *a = &*a * &l;
            }
            self.center -= 1;
        }
    }

    /// Row vectors <<I| contracted over sites 0..i, for i = 0..=n.
    pub fn identity_left(&self) -> Vec<CMat> {
        let mut out = vec![CMat::from_element(1, 1, C64::new(1.0, 0.0))];
        for t in &self.tensors {
            let next = out.last().unwrap() * contract_covector(t, &IDENTITY_COVECTOR);
            out.push(next);
        }
        out
    }

    /// Column vectors <<I| contracted over sites i..n, for i = 0..=n.
    pub fn identity_right(&self) -> Vec<CMat> {
        let n = self.len();
        let mut out = vec![CMat::from_element(1, 1, C64::new(1.0, 0.0)); n + 1];
        for i in (0..n).rev() {
            out[i] = contract_covector(&self.tensors[i], &IDENTITY_COVECTOR) * &out[i + 1];
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.identity_left().last().unwrap()[(0, 0)]
    }

    /// Tr(O rho) for a product of single-site operators (site, 2x2 operator), sites distinct.
    pub fn expect(&self, ops: &[(usize, CMat)]) -> Result<C64> {
        let mut row = CMat::from_element(1, 1, C64::new(1.0, 0.0));
        for (i, t) in self.tensors.iter().enumerate() {
            let hits: Vec<&CMat> = ops.iter().filter(|(s, _)| *s == i).map(|(_, o)| o).collect();
            let c = match hits.len() {
                0 => IDENTITY_COVECTOR,
                1 => covector(hits[0]),
                _ => return Err(bad_param("ops", format!("site {i} repeated"))),
            };
            row = row * contract_covector(t, &c);
        }
        if let Some((s, _)) = ops.iter().find(|(s, _)| *s >= self.len()) {
            return Err(bad_param("ops", format!("site {s} outside chain")));
        }
        Ok(row[(0, 0)])
    }

    /// Unnormalized reduced operator of up to six sites, first listed site most significant.
    pub fn reduced(&self, sites: &[usize]) -> Result<CMat> {
        let k = sites.len();
        if k == 0 || k > MAX_REDUCED_SITES {
            return Err(bad_param("sites", "reduced operator needs 1 to 6 sites"));
        }
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k || sorted[k - 1] >= self.len() {
            return Err(bad_param("sites", "sites must be distinct and inside the chain"));
        }
        // open multi-index over sorted sites, each entry a row vector over the bond
        let mut rows: Vec<CMat> = vec![CMat::from_element(1, 1, C64::new(1.0, 0.0))];
        for (i, t) in self.tensors.iter().enumerate() {
            if sorted.contains(&i) {
                let mut next = Vec::with_capacity(rows.len() * 4);
                for r in &rows {
                    for a in t.iter() {
                        next.push(r * a);
                    }
                }
                rows = next;
            } else {
                let m = contract_covector(t, &IDENTITY_COVECTOR);
                for r in rows.iter_mut() {
                    *r = &*r * &m;
                }
            }
        }
        let dim = 1usize << k;
        let pos: Vec<usize> = sites.iter().map(|s| sorted.iter().position(|x| x == s).unwrap()).collect();
        let mut out = CMat::zeros(dim, dim);
        for (idx, r) in rows.iter().enumerate() {
            // digits in sorted order, mu = 2 b + k
            let mut ket = 0;
            let mut bra = 0;
            for &p in &pos {
                let mu = (idx >> (2 * (k - 1 - p))) & 3;
                ket = ket * 2 + (mu & 1);
                bra = bra * 2 + (mu >> 1);
            }
            out[(ket, bra)] = r[(0, 0)];
        }
        Ok(out)
    }

    /// Populations <n_j> and bond currents across (i, i+1) with hopping amplitudes `j1`.
    /// The current is d<n_{i+1}>/dt from that bond, positive for flow towards larger index.
    pub fn populations_and_currents(&self, j1: &[C64]) -> (Vec<f64>, Vec<f64>) {
        let left = self.identity_left();
        let right = self.identity_right();
        let nop = sigma_plus() * sigma_minus();
        let cn = covector(&nop);
        let cp = covector(&sigma_plus());
        let cm = covector(&sigma_minus());
        let n = self.len();
        let pops = (0..n)
            .map(|i| (&left[i] * contract_covector(&self.tensors[i], &cn) * &right[i + 1])[(0, 0)].re)
            .collect();
        let currents = (0..n - 1)
            .map(|i| {
                let z = (&left[i]
                    * contract_covector(&self.tensors[i], &cp)
                    * contract_covector(&self.tensors[i + 1], &cm)
                    * &right[i + 2])[(0, 0)];
                -2.0 * (j1[i].conj() * z).im
            })
            .collect();
        (pops, currents)
    }

    /// sqrt(<sigma_x>^2 + <sigma_y>^2) per site.
    pub fn transverse_coherence(&self) -> Vec<f64> {
        let left = self.identity_left();
        let right = self.identity_right();
        let cm = covector(&sigma_minus());
        (0..self.len())
            .map(|i| 2.0 * (&left[i] * contract_covector(&self.tensors[i], &cm) * &right[i + 1])[(0, 0)].norm())
            .collect()
    }

    /// Full vector in interleaved ordering; small chains only.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        if self.len() > 8 {
            return Err(bad_param("n", "dense contraction limited to 8 sites"));
        }
        let mut rows: Vec<CMat> = vec![CMat::from_element(1, 1, C64::new(1.0, 0.0))];
        for t in &self.tensors {
            rows = rows.iter().flat_map(|r| t.iter().map(move |a| r * a)).collect();
        }
        Ok(rows.iter().map(|r| r[(0, 0)]).collect())
    }

    /// Little-endian binary dump: magic, n, d_max, center, n+1 bond dims, then per site,
    /// per mu, column-major (re, im) f64 pairs.
    pub fn write_checkpoint<W: Write>(&self, d_max: usize, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Checkpoint(e.to_string());
        w.write_all(CHECKPOINT_MAGIC).map_err(io)?;
        for v in [self.len(), d_max, self.center] {
            w.write_all(&(v as u64).to_le_bytes()).map_err(io)?;
        }
        for d in self.bond_dims() {
            w.write_all(&(d as u64).to_le_bytes()).map_err(io)?;
        }
        for t in &self.tensors {
            for a in t {
                for z in a.iter() {
                    w.write_all(&z.re.to_le_bytes()).map_err(io)?;
                    w.write_all(&z.im.to_le_bytes()).map_err(io)?;
                }
            }
        }
        Ok(())
    }

    /// Returns the state and the stored d_max.
    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(Self, usize)> {
        let io = |e: std::io::Error| Error::Checkpoint(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let mut u = || -> Result<usize> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(io)?;
            usize::try_from(u64::from_le_bytes(b)).map_err(|_| Error::Checkpoint("size overflow".into()))
        };
        let n = u()?;
        let d_max = u()?;
        let center = u()?;
        if n < 2 || n > 4096 || center >= n {
            return Err(Error::Checkpoint(format!("implausible header n={n} center={center}")));
        }
        let dims: Vec<usize> = (0..=n).map(|_| u()).collect::<Result<_>>()?;
        if dims[0] != 1 || dims[n] != 1 || dims.iter().any(|&d| d == 0 || d > 1 << 16) {
            return Err(Error::Checkpoint("bad bond dimensions".into()));
        }
        let mut f = || -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(io)?;
            Ok(f64::from_le_bytes(b))
        };
        let mut tensors = Vec::with_capacity(n);
        for i in 0..n {
            let mut t: Vec<CMat> = Vec::with_capacity(4);
            for _ in 0..LOCAL_DIM {
                let mut data = Vec::with_capacity(dims[i] * dims[i + 1]);
                for _ in 0..dims[i] * dims[i + 1] {
                    let re = f()?;
                    let im = f()?;
                    data.push(C64::new(re, im));
                }
                t.push(CMat::from_vec(dims[i], dims[i + 1], data));
            }
            let t: SiteTensor = t.try_into().map_err(|_| Error::Checkpoint("tensor count".into()))?;
            tensors.push(t);
        }
        Ok((Self { tensors, center }, d_max))
    }
}
