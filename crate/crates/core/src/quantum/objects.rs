//! Density matrices, POVMs and channels.

use super::matrix::{self, c, dagger, eigenvalues, is_hermitian, max_abs, CMat, C64};
use crate::error::{Error, Result};

/// Validation tolerance for quantum objects.
pub const QTOL: f64 = 1e-10;

/// A positive semidefinite unit-trace operator on a (possibly composite)
/// Hilbert space with subsystem dimensions `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        let d = mat.nrows();
        Self::with_dims(mat, vec![d])
    }

    pub fn with_dims(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !mat.is_square() || mat.nrows() != total || total == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for subsystem dims {dims:?}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !is_hermitian(&mat, QTOL) {
            return Err(Error::InvalidQuantum("density matrix is not Hermitian".into()));
        }
        let tr = matrix::trace(&mat);
        if (tr - c(1.0)).norm() > QTOL {
            return Err(Error::InvalidQuantum(format!("density matrix has trace {tr}")));
        }
        let min = eigenvalues(&mat).first().copied().unwrap_or(0.0);
        if min < -QTOL {
            return Err(Error::InvalidQuantum(format!("density matrix has eigenvalue {min}")));
        }
        Ok(Self { dims, mat })
    }

    /// `|ψ⟩⟨ψ|` for a ket, normalized.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidQuantum("zero ket".into()));
        }
        let v: Vec<C64> = ket.iter().map(|z| z / norm).collect();
        Self::new(matrix::outer(&v))
    }

    pub fn pure_real(ket: &[f64]) -> Result<Self> {
        Self::pure(&ket.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    /// Computational basis state `|k⟩` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut m = CMat::zeros(d, d);
        m[(k, k)] = c(1.0);
        Self { dims: vec![d], mat: m }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { dims: vec![d], mat: matrix::identity(d).scale(1.0 / d as f64) }
    }

    /// Qubit state with Bloch vector `r`, `|r| ≤ 1`.
    pub fn bloch(r: [f64; 3]) -> Result<Self> {
        Self::new((matrix::identity(2) + matrix::bloch_operator(r)).scale(0.5))
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(CMat::from_diagonal(&nalgebra::DVector::from_iterator(p.len(), p.iter().map(|&x| c(x)))))
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::pure_real(&[s, 0.0, 0.0, s]).expect("valid state").regrouped(vec![2, 2]).expect("2x2")
    }

    /// `(|01⟩ − |10⟩)/√2`.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::pure_real(&[0.0, s, -s, 0.0]).expect("valid state").regrouped(vec![2, 2]).expect("2x2")
    }

    /// `(|000⟩ + |111⟩)/√2`.
    pub fn ghz() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut ket = vec![0.0; 8];
        ket[0] = s;
        ket[7] = s;
        Self::pure_real(&ket).expect("valid").regrouped(vec![2, 2, 2]).expect("2x2x2")
    }

    /// `(|001⟩ + |010⟩ + |100⟩)/√3`.
    pub fn w_state() -> Self {
        let mut ket = vec![0.0; 8];
        ket[1] = 1.0;
        ket[2] = 1.0;
        ket[4] = 1.0;
        Self::pure_real(&ket).expect("valid").regrouped(vec![2, 2, 2]).expect("2x2x2")
    }

    /// Same operator, different subsystem split.
    pub fn regrouped(self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim() {
            return Err(Error::DimensionMismatch(format!("cannot split dimension {} as {dims:?}", self.dim())));
        }
        Ok(Self { dims, mat: self.mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, mat: matrix::kron(&self.mat, &other.mat) }
    }

    /// Reduced state on the listed subsystems.
    pub fn reduced(&self, keep: &[usize]) -> Self {
        let dims = (0..self.dims.len()).filter(|i| keep.contains(i)).map(|i| self.dims[i]).collect::<Vec<_>>();
        let mat = matrix::partial_trace(&self.mat, &self.dims, keep);
        Self { dims: if dims.is_empty() { vec![1] } else { dims }, mat }
    }

    /// Transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self { dims: self.dims.clone(), mat: self.mat.transpose() }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues(&self.mat)
    }

    /// `Tr(E ρ)`, real part.
    pub fn expectation(&self, op: &CMat) -> f64 {
        (op * &self.mat).trace().re
    }

    pub fn trace_distance(&self, other: &Self) -> f64 {
        matrix::trace_distance(&self.mat, &other.mat)
    }

    /// Wraps a matrix known to be a state up to rounding: Hermitian part,
    /// renormalized trace.
    pub(crate) fn from_numerical(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        let h = matrix::hermitian_part(&mat);
        let tr = h.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidQuantum("operator has no weight".into()));
        }
        Self::with_dims(h.unscale(tr), dims)
    }
}

/// A positive operator-valued measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidQuantum("POVM has no elements".into()));
        };
        let d = first.nrows();
        let mut sum = CMat::zeros(d, d);
        for e in &elements {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::DimensionMismatch("POVM elements differ in size".into()));
            }
            if !is_hermitian(e, QTOL) {
                return Err(Error::InvalidQuantum("POVM element is not Hermitian".into()));
            }
            if eigenvalues(e).first().copied().unwrap_or(0.0) < -QTOL {
                return Err(Error::InvalidQuantum("POVM element is not positive".into()));
            }
            sum += e;
        }
        if max_abs(&(sum - matrix::identity(d))) > QTOL {
            return Err(Error::InvalidQuantum("POVM elements do not sum to identity".into()));
        }
        Ok(Self { elements })
    }

    /// Rank-one projective measurement onto the given (orthonormal) kets.
    pub fn projective(kets: &[Vec<C64>]) -> Result<Self> {
        Self::new(kets.iter().map(|k| matrix::outer(k)).collect())
    }

    pub fn computational(d: usize) -> Self {
        Self { elements: (0..d).map(|k| DensityMatrix::basis(d, k).into_matrix()).collect() }
    }

    /// Two-outcome qubit measurement along unit vector `n`; outcome 0 is the
    /// `+1` eigenspace of `n·σ`.
    pub fn qubit_axis(n: [f64; 3]) -> Result<Self> {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len == 0.0 {
            return Err(Error::InvalidQuantum("zero measurement axis".into()));
        }
        let u = [n[0] / len, n[1] / len, n[2] / len];
        let op = matrix::bloch_operator(u);
        let id = matrix::identity(2);
        Self::new(vec![(&id + &op).scale(0.5), (&id - &op).scale(0.5)])
    }

    pub fn pauli_x() -> Self {
        Self::qubit_axis([1.0, 0.0, 0.0]).expect("unit axis")
    }

    pub fn pauli_y() -> Self {
        Self::qubit_axis([0.0, 1.0, 0.0]).expect("unit axis")
    }

    pub fn pauli_z() -> Self {
        Self::qubit_axis([0.0, 0.0, 1.0]).expect("unit axis")
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// Elementwise transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self { elements: self.elements.iter().map(|e| e.transpose()).collect() }
    }

    /// Outcome `k` becomes outcome `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.outcomes();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::ArityMismatch(format!("{perm:?} is not a permutation of {n} outcomes")));
        }
        let mut elements = vec![CMat::zeros(self.dim(), self.dim()); n];
        for (k, e) in self.elements.iter().enumerate() {
            elements[perm[k]] = e.clone();
        }
        Ok(Self { elements })
    }

    /// Born probabilities `Tr(E_k ρ)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "POVM on dimension {} applied to state of dimension {}",
                self.dim(),
                rho.dim()
            )));
        }
        Ok(self.elements.iter().map(|e| rho.expectation(e).clamp(0.0, 1.0)).collect())
    }
}

/// A CPTP map in Kraus form, `ρ ↦ Σ K ρ K†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    kraus: Vec<CMat>,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidQuantum("channel has no Kraus operators".into()));
        };
        let (dout, din) = first.shape();
        let mut sum = CMat::zeros(din, din);
        for k in &kraus {
            if k.shape() != (dout, din) {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            sum += dagger(k) * k;
        }
        if max_abs(&(sum - matrix::identity(din))) > QTOL {
            return Err(Error::InvalidQuantum("channel is not trace preserving".into()));
        }
        Ok(Self { kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![matrix::identity(d)] }
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `ρ ↦ Tr(ρ) I/d`.
    pub fn fully_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let mut kraus = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMat::zeros(d, d);
                k[(i, j)] = c(s);
                kraus.push(k);
            }
        }
        Self { kraus }
    }

    /// `ρ ↦ Tr(ρ) σ` from input dimension `din`.
    pub fn replacement(din: usize, sigma: &DensityMatrix) -> Self {
        let (vals, vecs) = matrix::eigh(sigma.matrix());
        let dout = sigma.dim();
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            for j in 0..din {
                let mut op = CMat::zeros(dout, din);
                for r in 0..dout {
                    op[(r, j)] = vecs[(r, k)] * lam.sqrt();
                }
                kraus.push(op);
            }
        }
        Self { kraus }
    }

    /// Isometry `|i⟩ ↦ |i⟩^{⊗copies}` in the computational basis.
    pub fn basis_copy(d: usize, copies: usize) -> Self {
        let dout = d.pow(copies as u32);
        let mut v = CMat::zeros(dout, d);
        for i in 0..d {
            let idx = (0..copies).fold(0, |acc, _| acc * d + i);
            v[(idx, i)] = c(1.0);
        }
        Self { kraus: vec![v] }
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// Applies the map to any operator on the input space.
    pub fn apply_operator(&self, rho: &CMat) -> CMat {
        self.kraus.iter().fold(CMat::zeros(self.output_dim(), self.output_dim()), |acc, k| acc + k * rho * dagger(k))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} but state dimension {}",
                self.input_dim(),
                rho.dim()
            )));
        }
        DensityMatrix::from_numerical(self.apply_operator(rho.matrix()), vec![self.output_dim()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_objects() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::diagonal(&[1.2, -0.2]).is_err());
        assert!(Povm::new(vec![matrix::identity(2).scale(0.5)]).is_err());
        assert!(Channel::new(vec![matrix::identity(2).scale(0.5)]).is_err());
        let nonherm = CMat::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(nonherm).is_err());
    }

    #[test]
    fn channels_preserve_trace() {
        let rho = DensityMatrix::bloch([0.3, -0.2, 0.5]).unwrap();
        for ch in
            [Channel::identity(2), Channel::fully_depolarizing(2), Channel::replacement(2, &DensityMatrix::basis(3, 1))]
        {
            let out = ch.apply(&rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        }
        let dep = Channel::fully_depolarizing(2).apply(&rho).unwrap();
        assert!(max_abs(&(dep.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-12);
    }

    #[test]
    fn copy_isometry_on_basis_states() {
        let out = Channel::basis_copy(2, 2).apply(&DensityMatrix::basis(2, 1)).unwrap();
        assert!((out.matrix()[(3, 3)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn qubit_axis_probabilities() {
        let zero = DensityMatrix::basis(2, 0);
        assert_eq!(Povm::pauli_z().probabilities(&zero).unwrap(), vec![1.0, 0.0]);
        let px = Povm::pauli_x().probabilities(&zero).unwrap();
        assert!((px[0] - 0.5).abs() < 1e-15 && (px[1] - 0.5).abs() < 1e-15);
        assert!(Povm::pauli_z().probabilities(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn relabeling_checks_permutation() {
        let z = Povm::pauli_z();
        assert!(z.relabeled(&[0, 0]).is_err());
        let swapped = z.relabeled(&[1, 0]).unwrap();
        assert_eq!(swapped.elements()[0], z.elements()[1]);
    }
}
