//! Density matrices, two-qubit operators and the entanglement/correlation metrics.
//!
//! Two-qubit basis ordering is |gg>, |ge>, |eg>, |ee> with emitter 1 (upstream) as the
//! slower index, |g> = 0 and |e> = 1. Vectorization is column stacking everywhere.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const NEG_EIG_TOL: f64 = 1e-8;
const ENTROPY_ZERO: f64 = 1e-14;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// sigma^- = |g><e|.
pub fn sigma_minus() -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = r(1.0);
    m
}

pub fn sigma_plus() -> CMat {
    sigma_minus().adjoint()
}

pub fn sigma_x() -> CMat {
    sigma_minus() + sigma_plus()
}

pub fn sigma_y() -> CMat {
    (sigma_plus() - sigma_minus()) * (-I)
}

/// sigma_z = |e><e| - |g><g|.
pub fn sigma_z() -> CMat {
    let sp = sigma_plus();
    let sm = sigma_minus();
    &sp * &sm - &sm * &sp
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Operator `op` on qubit `which` (0 or 1) of the emitter pair.
pub fn on_qubit(op: &CMat, which: usize) -> CMat {
    if which == 0 {
        kron(op, &eye(2))
    } else {
        kron(&eye(2), op)
    }
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_error(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * r(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

fn clip_eigenvalues(ev: &mut [f64]) -> Result<()> {
    for v in ev.iter_mut() {
        if *v < -NEG_EIG_TOL {
            return Err(Error::InvalidState(format!(
                "eigenvalue {v:e} below -{NEG_EIG_TOL:e}"
            )));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Square root of a Hermitian PSD matrix (eigenvalues clipped per the repo rule).
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    let h = (m + m.adjoint()) * r(0.5);
    let eig = SymmetricEigen::new(h);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    clip_eigenvalues(&mut ev)?;
    let u = &eig.eigenvectors;
    let d = CMat::from_diagonal(&CVec::from_iterator(ev.len(), ev.iter().map(|v| r(v.sqrt()))));
    Ok(u * d * u.adjoint())
}

fn psd_sqrt_clipped(m: &CMat) -> CMat {
    let h = (m + m.adjoint()) * r(0.5);
    let eig = SymmetricEigen::new(h);
    let u = &eig.eigenvectors;
    let d = CMat::from_diagonal(&CVec::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|v| r(v.max(0.0).sqrt())),
    ));
    u * d * u.adjoint()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVec,
}

impl PureState {
    pub fn new(amps: CVec) -> Result<Self> {
        let n = amps.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("pure state norm {n} != 1")));
        }
        Ok(Self { amps })
    }

    pub fn normalized(amps: CVec) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite amplitude vector".into()));
        }
        Ok(Self { amps: amps / r(n) })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::normalized(CVec::from_column_slice(amps))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[k] = r(1.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn apply(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "operator {}x{} on state of dim {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        Ok(Self { amps: u * &self.amps })
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_raw(&self.amps * self.amps.adjoint())
    }
}

/// Phase-shifted singlet (|eg> - i|ge>)/sqrt(2).
pub fn chi_minus() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(CVec::from_column_slice(&[r(0.0), c(0.0, -s), r(s), r(0.0)])).unwrap()
}

/// (|eg> + i|ge>)/sqrt(2).
pub fn chi_plus() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(CVec::from_column_slice(&[r(0.0), c(0.0, s), r(s), r(0.0)])).unwrap()
}

/// Singlet (|eg> - |ge>)/sqrt(2).
pub fn singlet() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::new(CVec::from_column_slice(&[r(0.0), r(-s), r(s), r(0.0)])).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMat,
    normalized: bool,
}

impl DensityMatrix {
    /// Validated, trace-one density matrix.
    pub fn new(m: CMat) -> Result<Self> {
        Self::check(&m, true)?;
        Ok(Self { m, normalized: true })
    }

    /// Hermitian PSD operator whose trace is not required to be one (lossy diagnostics).
    pub fn unnormalized(m: CMat) -> Result<Self> {
        Self::check(&m, false)?;
        Ok(Self {
            m,
            normalized: false,
        })
    }

    pub(crate) fn from_raw(m: CMat) -> Self {
        Self { m, normalized: true }
    }

    fn check(m: &CMat, want_trace: bool) -> Result<()> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = hermiticity_error(m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (max |rho - rho^+| = {herm:e})")));
        }
        if want_trace {
            let tr = m.trace();
            if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
                return Err(Error::InvalidState(format!("trace {tr} != 1")));
            }
        }
        let lo = hermitian_eigenvalues(m)[0];
        if lo < -NEG_EIG_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        PureState::basis(dim, k).projector()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_raw(eye(dim) / r(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Copy rescaled to unit trace.
    pub fn normalized_copy(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize trace {tr}")));
        }
        Ok(Self::from_raw(&self.m / r(tr)))
    }

    pub fn population(&self, k: usize) -> f64 {
        self.m[(k, k)].re
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemSplit {
    dims: Vec<usize>,
    keep: Vec<usize>,
}

impl SubsystemSplit {
    pub fn new(dims: Vec<usize>, keep: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Dimension("subsystem dimensions must be positive".into()));
        }
        let mut seen = vec![false; dims.len()];
        for &k in &keep {
            if k >= dims.len() {
                return Err(Error::Dimension(format!("keep index {k} out of range")));
            }
            if seen[k] {
                return Err(Error::Dimension(format!("keep index {k} repeated")));
            }
            seen[k] = true;
        }
        let mut keep = keep;
        keep.sort_unstable();
        Ok(Self { dims, keep })
    }

    pub fn qubits(n: usize, keep: Vec<usize>) -> Result<Self> {
        Self::new(vec![2; n], keep)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn joint_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn kept_dim(&self) -> usize {
        self.keep.iter().map(|&k| self.dims[k]).product()
    }

    pub fn complement(&self) -> Self {
        let keep = (0..self.dims.len()).filter(|k| !self.keep.contains(k)).collect();
        Self {
            dims: self.dims.clone(),
            keep,
        }
    }

    fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        out
    }

    fn sub_index(&self, digits: &[usize], which: &[usize]) -> usize {
        which.iter().fold(0, |acc, &k| acc * self.dims[k] + digits[k])
    }
}

pub fn partial_trace(rho: &DensityMatrix, split: &SubsystemSplit) -> Result<DensityMatrix> {
    Ok(DensityMatrix {
        m: partial_trace_matrix(rho.matrix(), split)?,
        normalized: rho.normalized,
    })
}

pub fn partial_trace_matrix(m: &CMat, split: &SubsystemSplit) -> Result<CMat> {
    let n = split.joint_dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "split of joint dim {n} applied to {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let traced = split.complement();
    let kd = split.kept_dim();
    let mut out = CMat::zeros(kd, kd);
    let digits: Vec<Vec<usize>> = (0..n).map(|i| split.digits(i)).collect();
    let kept: Vec<usize> = digits.iter().map(|d| split.sub_index(d, &split.keep)).collect();
    let env: Vec<usize> = digits.iter().map(|d| split.sub_index(d, &traced.keep)).collect();
    for i in 0..n {
        for j in 0..n {
            if env[i] == env[j] {
                out[(kept[i], kept[j])] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

fn require_dim(rho: &DensityMatrix, dim: usize, what: &str) -> Result<()> {
    if rho.dim() != dim {
        return Err(Error::Dimension(format!("{what} needs dim {dim}, got {}", rho.dim())));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_dim(rho, 4, "concurrence")?;
    concurrence_matrix(rho.matrix())
}

pub(crate) fn concurrence_matrix(m: &CMat) -> Result<f64> {
    let herm = hermiticity_error(m);
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!("not Hermitian ({herm:e})")));
    }
    psd_sqrt(m)?;
    Ok(wootters(m))
}

/// Concurrence of the Hermitian part with negative eigenvalues clipped to zero.
/// For generators that are not completely positive (TCL-2, Redfield) where small negative
/// eigenvalues are physical artefacts rather than bugs.
pub fn concurrence_clipped(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * r(0.5);
    wootters(&h)
}

fn wootters(m: &CMat) -> f64 {
    let yy = kron(&sigma_y(), &sigma_y());
    let tilde = &yy * m.conjugate() * &yy;
    let s = psd_sqrt_clipped(m);
    let mut lam: Vec<f64> = hermitian_eigenvalues(&(&s * tilde * &s))
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0)
}

pub fn state_fidelity(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    require_dim(rho, target.dim(), "fidelity")?;
    let v = target.amplitudes();
    Ok((v.adjoint() * rho.matrix() * v)[(0, 0)].re)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut ev = hermitian_eigenvalues(rho.matrix());
    clip_eigenvalues(&mut ev)?;
    Ok(ev
        .into_iter()
        .filter(|&p| p > ENTROPY_ZERO)
        .map(|p| -p * p.ln())
        .sum())
}

pub fn mutual_information(rho: &DensityMatrix, split: &SubsystemSplit) -> Result<f64> {
    let a = partial_trace(rho, split)?;
    let b = partial_trace(rho, &split.complement())?;
    let mi = von_neumann_entropy(&a)? + von_neumann_entropy(&b)? - von_neumann_entropy(rho)?;
    Ok(mi.max(0.0))
}

pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("trace distance of dims {} and {}", a.dim(), b.dim())));
    }
    Ok(0.5 * trace_norm(&(a.matrix() - b.matrix())))
}

/// rho_A (x) rho_B laid out in the joint ordering of `split`.
pub fn product_of_marginals(rho: &DensityMatrix, split: &SubsystemSplit) -> Result<CMat> {
    let a = partial_trace_matrix(rho.matrix(), split)?;
    let comp = split.complement();
    let b = partial_trace_matrix(rho.matrix(), &comp)?;
    let n = split.joint_dim();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| split.digits(i)).collect();
    let ia: Vec<usize> = digits.iter().map(|d| split.sub_index(d, &split.keep)).collect();
    let ib: Vec<usize> = digits.iter().map(|d| split.sub_index(d, &comp.keep)).collect();
    Ok(CMat::from_fn(n, n, |i, j| a[(ia[i], ia[j])] * b[(ib[i], ib[j])]))
}

pub fn trace_distance_correlation(rho: &DensityMatrix, split: &SubsystemSplit) -> Result<f64> {
    let prod = product_of_marginals(rho, split)?;
    Ok(0.5 * trace_norm(&(rho.matrix() - prod)))
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn devectorize(v: &CVec) -> Result<CMat> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::Dimension(format!("length {} is not a perfect square", v.len())));
    }
    Ok(CMat::from_column_slice(n, n, v.as_slice()))
}

/// Superoperator of rho -> A rho B^+ in column stacking, B^* (x) A.
pub fn sandwich(a: &CMat, b: &CMat) -> CMat {
    kron(&b.conjugate(), a)
}

/// Superoperator of rho -> A rho B (no adjoint), B^T (x) A.
pub fn left_right(a: &CMat, b: &CMat) -> CMat {
    kron(&b.transpose(), a)
}

pub fn two_qubit_basis_state(label: &str) -> Option<DensityMatrix> {
    let k = match label {
        "gg" => 0,
        "ge" => 1,
        "eg" => 2,
        "ee" => 3,
        _ => return None,
    };
    Some(DensityMatrix::basis(4, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> DensityMatrix {
        singlet().projector()
    }

    #[test]
    fn paulis_have_expected_action() {
        // sigma^- |e> = |g>
        let e = CVec::from_column_slice(&[r(0.0), r(1.0)]);
        let g = sigma_minus() * e;
        assert_eq!(g[0], r(1.0));
        assert_eq!(max_abs(&(sigma_z() - CMat::from_diagonal(&CVec::from_column_slice(&[r(-1.0), r(1.0)])))), 0.0);
        let comm = commutator(&sigma_x(), &sigma_y());
        assert!(max_abs(&(comm - sigma_z() * c(0.0, 2.0))) < 1e-15);
    }

    #[test]
    fn bell_partial_trace_is_maximally_mixed() {
        let split = SubsystemSplit::qubits(2, vec![0]).unwrap();
        let red = partial_trace(&bell(), &split).unwrap();
        assert!(max_abs(&(red.matrix() - eye(2) * r(0.5))) < 1e-15);
    }

    #[test]
    fn keep_all_is_identity() {
        let rho = bell();
        let split = SubsystemSplit::qubits(2, vec![0, 1]).unwrap();
        assert_eq!(partial_trace(&rho, &split).unwrap().matrix(), rho.matrix());
    }

    #[test]
    fn concurrence_basics() {
        assert!((concurrence(&bell()).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence(&DensityMatrix::basis(4, 0)).unwrap().abs() < 1e-12);
        assert!(concurrence(&DensityMatrix::maximally_mixed(4)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fidelity_basics() {
        let eg = DensityMatrix::basis(4, 2);
        assert!((state_fidelity(&eg, &chi_minus()).unwrap() - 0.5).abs() < 1e-15);
        assert!((state_fidelity(&chi_minus().projector(), &chi_minus()).unwrap() - 1.0).abs() < 1e-15);
        assert!((state_fidelity(&DensityMatrix::maximally_mixed(4), &chi_minus()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bell_mutual_information_is_two_ln_two() {
        let split = SubsystemSplit::qubits(2, vec![0]).unwrap();
        let mi = mutual_information(&bell(), &split).unwrap();
        assert!((mi - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn correlation_examples() {
        let split = SubsystemSplit::qubits(2, vec![0]).unwrap();
        assert!((trace_distance_correlation(&bell(), &split).unwrap() - 0.75).abs() < 1e-12);
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = r(0.5);
        m[(3, 3)] = r(0.5);
        let cl = DensityMatrix::new(m).unwrap();
        assert!((trace_distance_correlation(&cl, &split).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_orthogonal() {
        let a = DensityMatrix::basis(2, 0);
        let b = DensityMatrix::basis(2, 1);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn vectorize_is_column_stacking() {
        let v = vectorize(&(eye(2) * r(0.5)));
        assert_eq!(v.as_slice(), &[r(0.5), r(0.0), r(0.0), r(0.5)]);
        let mut m = CMat::zeros(2, 2);
        m[(1, 0)] = r(7.0);
        assert_eq!(vectorize(&m)[1], r(7.0));
        assert!(devectorize(&CVec::zeros(3)).is_err());
    }

    #[test]
    fn validation_rejects_bad_states() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = r(1.5);
        m[(1, 1)] = r(-0.5);
        assert!(DensityMatrix::new(m).is_err());
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = r(1.0);
        m[(0, 0)] = r(1.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(SubsystemSplit::qubits(2, vec![0, 0]).is_err());
        assert!(SubsystemSplit::qubits(2, vec![2]).is_err());
    }
}
