//! Seeded random quantum objects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{self, dagger, CMat, C64};
use super::objects::{DensityMatrix, Povm};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n × m` matrix of independent standard complex Gaussians.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// `G G† / Tr(G G†)` on the given subsystem split; full rank almost surely.
pub fn ginibre_state(dims: &[usize], rng: &mut impl Rng) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let g = ginibre(d, d, rng);
    let m = &g * dagger(&g);
    let tr = m.trace().re;
    DensityMatrix::with_dims(m.unscale(tr), dims.to_vec()).expect("Ginibre state is valid")
}

/// Haar-random pure state.
pub fn pure_state(dims: &[usize], rng: &mut impl Rng) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let g = ginibre(d, 1, rng);
    let ket: Vec<C64> = g.iter().copied().collect();
    DensityMatrix::pure(&ket).and_then(|s| s.regrouped(dims.to_vec())).expect("random ket is valid")
}

/// Haar-random unitary via QR with phase correction.
pub fn unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMat::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Uniform point on the unit sphere.
pub fn unit_vector(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-9 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Random two-outcome POVM `{E, I − E}` with `E = U diag(λ) U†`, `λ ∈ [0,1]`.
pub fn binary_povm(d: usize, rng: &mut impl Rng) -> Povm {
    let u = unitary(d, rng);
    let lam = nalgebra::DVector::from_fn(d, |_, _| C64::new(rng.random::<f64>(), 0.0));
    let e = matrix::hermitian_part(&(&u * CMat::from_diagonal(&lam) * dagger(&u)));
    let rest = matrix::identity(d) - &e;
    Povm::new(vec![e, rest]).expect("random binary POVM is valid")
}

/// Random projective qubit measurement along a uniform axis.
pub fn qubit_axis_povm(rng: &mut impl Rng) -> Povm {
    Povm::qubit_axis(unit_vector(rng)).expect("unit axis")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::max_abs;

    #[test]
    fn reproducible_and_valid() {
        let a = ginibre_state(&[2, 2], &mut seeded(7));
        let b = ginibre_state(&[2, 2], &mut seeded(7));
        assert_eq!(a, b);
        assert_eq!(a.dims(), &[2, 2]);
        let u = unitary(3, &mut seeded(1));
        assert!(max_abs(&(dagger(&u) * &u - matrix::identity(3))) < 1e-12);
        let p = binary_povm(2, &mut seeded(3));
        assert_eq!(p.outcomes(), 2);
    }
}
