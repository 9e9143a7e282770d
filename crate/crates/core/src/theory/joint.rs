use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{max_of, Scalar};
use crate::theory::EPS_NORM;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    pub arity: usize,
}

impl Axis {
    pub fn new(label: impl Into<String>, arity: usize) -> Self {
        Self { label: label.into(), arity }
    }
}

/// A normalized probability table over a product of finite outcome sets.
///
/// Entries are stored row-major, the first axis most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<S> {
    axes: Vec<Axis>,
    probs: Vec<S>,
}

impl<S: Scalar> JointDistribution<S> {
    pub fn new(axes: Vec<Axis>, probs: Vec<S>) -> Result<Self> {
        let size: usize = axes.iter().map(|a| a.arity).product();
        if axes.is_empty() || size != probs.len() {
            return Err(Error::ArityMismatch(format!(
                "axes describe {size} outcomes but {} probabilities given",
                probs.len()
            )));
        }
        let tol = S::from_f64_lossy(EPS_NORM);
        if let Some(bad) = probs.iter().find(|p| **p < -tol.clone() || **p > S::one() + tol.clone()) {
            return Err(Error::InvalidProbability(format!("joint entry {bad:?} outside [0,1]")));
        }
        let total = probs.iter().cloned().fold(S::zero(), |a, b| a + b);
        if (total.clone() - S::one()).abs() > tol {
            return Err(Error::InvalidProbability(format!("joint distribution sums to {total:?}")));
        }
        Ok(Self { axes, probs })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn arities(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.arity).collect()
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn total(&self) -> S {
        self.probs.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    fn offset(&self, outcome: &[usize]) -> Option<usize> {
        if outcome.len() != self.axes.len() {
            return None;
        }
        let mut idx = 0;
        for (x, axis) in outcome.iter().zip(&self.axes) {
            if *x >= axis.arity {
                return None;
            }
            idx = idx * axis.arity + x;
        }
        Some(idx)
    }

    pub fn get(&self, outcome: &[usize]) -> Option<&S> {
        self.offset(outcome).map(|i| &self.probs[i])
    }

    /// Iterates `(outcome tuple, probability)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &S)> + '_ {
        let arities = self.arities();
        self.probs.iter().enumerate().map(move |(i, p)| (unflatten(i, &arities), p))
    }

    /// Largest entrywise deviation; errors unless both tables share arities.
    pub fn max_abs_diff(&self, other: &Self) -> Result<S> {
        if self.arities() != other.arities() {
            return Err(Error::ArityMismatch(format!("{:?} vs {:?}", self.arities(), other.arities())));
        }
        Ok(self.probs.iter().zip(&other.probs).map(|(a, b)| (a.clone() - b.clone()).abs()).fold(S::zero(), max_of))
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> JointDistribution<T> {
        JointDistribution { axes: self.axes.clone(), probs: self.probs.iter().map(f).collect() }
    }
}

/// Row-major multi-index of `flat` for the given arities.
pub fn unflatten(mut flat: usize, arities: &[usize]) -> Vec<usize> {
    let mut out = vec![0; arities.len()];
    for (slot, &n) in out.iter_mut().zip(arities).rev() {
        *slot = flat % n;
        flat /= n;
    }
    out
}

/// Row-major flat index of a multi-index.
pub fn flatten(index: &[usize], arities: &[usize]) -> usize {
    index.iter().zip(arities).fold(0, |acc, (&x, &n)| acc * n + x)
}
