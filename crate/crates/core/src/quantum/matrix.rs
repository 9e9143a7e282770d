//! Dense complex linear algebra helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Eigenvalues in `[-CLAMP_TOL, 0)` are treated as zero.
pub const CLAMP_TOL: f64 = 1e-10;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all<'a>(ms: impl IntoIterator<Item = &'a CMat>) -> CMat {
    ms.into_iter().fold(identity(1), |acc, m| kron(&acc, m))
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - dagger(m))) <= tol
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + dagger(m)).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn eigenvalues(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// `U f(Λ) U†` for a Hermitian `m`.
pub fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.into_iter().map(|v| c(f(v)))));
    &vecs * d * dagger(&vecs)
}

/// Square root of a PSD matrix, after clamping tiny negative eigenvalues.
pub fn psd_sqrt(m: &CMat) -> CMat {
    spectral_map(m, |v| v.max(0.0).sqrt())
}

/// Pseudo-inverse square root on the support `{λ > cutoff}`.
pub fn pinv_sqrt(m: &CMat, cutoff: f64) -> CMat {
    spectral_map(m, |v| if v > cutoff { 1.0 / v.sqrt() } else { 0.0 })
}

/// Projector onto the support `{λ > cutoff}`.
pub fn support_projector(m: &CMat, cutoff: f64) -> CMat {
    spectral_map(m, |v| if v > cutoff { 1.0 } else { 0.0 })
}

pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * eigenvalues(&(a - b)).iter().map(|v| v.abs()).sum::<f64>()
}

/// Traces out every subsystem not listed in `keep` (kept in ascending order).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let n = dims.len();
    let kept: Vec<usize> = (0..n).filter(|i| keep.contains(i)).collect();
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let kd: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
    let td: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kdim: usize = kd.iter().product();
    let tdim: usize = td.iter().product();

    let compose = |k: &[usize], t: &[usize]| {
        let mut idx = vec![0; n];
        for (slot, &v) in kept.iter().zip(k) {
            idx[*slot] = v;
        }
        for (slot, &v) in traced.iter().zip(t) {
            idx[*slot] = v;
        }
        idx.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
    };
    let split = |mut flat: usize, ds: &[usize]| {
        let mut out = vec![0; ds.len()];
        for (slot, &d) in out.iter_mut().zip(ds).rev() {
            *slot = flat % d;
            flat /= d;
        }
        out
    };

    let mut out = CMat::zeros(kdim, kdim);
    for r in 0..kdim {
        let kr = split(r, &kd);
        for col in 0..kdim {
            let kc = split(col, &kd);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..tdim {
                let ti = split(t, &td);
                acc += m[(compose(&kr, &ti), compose(&kc, &ti))];
            }
            out[(r, col)] = acc;
        }
    }
    out
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// `n·σ` for a real 3-vector `n`.
pub fn bloch_operator(n: [f64; 3]) -> CMat {
    pauli_x().scale(n[0]) + pauli_y().scale(n[1]) + pauli_z().scale(n[2])
}

/// `|v⟩⟨v|`.
pub fn outer(v: &[C64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_trace_of_product() {
        let a = outer(&[c(1.0), c(0.0)]);
        let b = identity(3).scale(1.0 / 3.0);
        let ab = kron(&a, &b);
        assert!(max_abs(&(partial_trace(&ab, &[2, 3], &[0]) - &a)) < 1e-14);
        assert!(max_abs(&(partial_trace(&ab, &[2, 3], &[1]) - &b)) < 1e-14);
        assert!((partial_trace(&ab, &[2, 3], &[])[(0, 0)] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = CMat::from_row_slice(2, 2, &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]);
        let s = psd_sqrt(&m);
        assert!(max_abs(&(&s * &s - &m)) < 1e-12);
    }

    #[test]
    fn pauli_algebra() {
        let i2 = identity(2);
        for p in [pauli_x(), pauli_y(), pauli_z()] {
            assert!(max_abs(&(&p * &p - &i2)) < 1e-15);
        }
        let xy = pauli_x() * pauli_y();
        assert!(max_abs(&(xy - pauli_z().scale(1.0) * C64::new(0.0, 1.0))) < 1e-15);
    }
}
