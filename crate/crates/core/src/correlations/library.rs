//! Standard boxes.

use super::CorrelationBox;
use crate::scalar::Scalar;

fn binary_shape(parties: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    CorrelationBox::<f64>::uniform_shape(parties, 2, 2)
}

/// `p(ab|xy) = ½` iff `a ⊕ b = x·y`.
pub fn pr_box<S: Scalar>() -> CorrelationBox<S> {
    let (s, o) = binary_shape(2);
    CorrelationBox::from_fn(s, o, |x, a| if (a[0] ^ a[1]) == (x[0] & x[1]) { S::half() } else { S::zero() })
        .expect("PR box is valid")
}

/// Uniformly random outputs for every party.
pub fn uniform_noise<S: Scalar>(parties: usize) -> CorrelationBox<S> {
    let (s, o) = binary_shape(parties);
    let w = S::one() / S::from_usize_exact(1 << parties);
    CorrelationBox::from_fn(s, o, |_, _| w.clone()).expect("uniform box is valid")
}

/// `v·PR + (1−v)·uniform`; its CHSH value is `4v`.
pub fn isotropic<S: Scalar>(visibility: S) -> CorrelationBox<S> {
    pr_box::<S>().mix(&visibility, &uniform_noise(2)).expect("same shape")
}

/// Each party outputs `outputs[k][x_k]` deterministically.
pub fn deterministic<S: Scalar>(outputs: &[Vec<usize>]) -> CorrelationBox<S> {
    let parties = outputs.len();
    let settings: Vec<usize> = outputs.iter().map(Vec::len).collect();
    let outcomes = settings.iter().map(|&s| vec![2; s]).collect();
    CorrelationBox::from_fn(settings, outcomes, |x, a| {
        if (0..parties).all(|k| a[k] == outputs[k][x[k]]) {
            S::one()
        } else {
            S::zero()
        }
    })
    .expect("deterministic box is valid")
}

/// A uniform classical bit copied to every party; every setting reads it.
pub fn shared_bit<S: Scalar>(parties: usize) -> CorrelationBox<S> {
    let (s, o) = binary_shape(parties);
    CorrelationBox::from_fn(s, o, |_, a| if a.iter().all(|&v| v == a[0]) { S::half() } else { S::zero() })
        .expect("shared bit box is valid")
}

/// Bipartite box where Alice outputs Bob's setting and Bob outputs 0.
pub fn signalling_box<S: Scalar>() -> CorrelationBox<S> {
    let (s, o) = binary_shape(2);
    CorrelationBox::from_fn(s, o, |x, a| if a[0] == x[1] && a[1] == 0 { S::one() } else { S::zero() })
        .expect("signalling box is valid")
}

/// Independent parties, party `k` outputting 0 with probability `p0[k][x_k]`.
pub fn product<S: Scalar>(p0: &[Vec<S>]) -> CorrelationBox<S> {
    let settings: Vec<usize> = p0.iter().map(Vec::len).collect();
    let outcomes = settings.iter().map(|&s| vec![2; s]).collect();
    CorrelationBox::from_fn(settings, outcomes, |x, a| {
        p0.iter().enumerate().fold(S::one(), |acc, (k, row)| {
            let q = row[x[k]].clone();
            acc * if a[k] == 0 { q } else { S::one() - q }
        })
    })
    .expect("product box is valid")
}
