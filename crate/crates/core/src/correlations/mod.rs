//! Multipartite correlation boxes `p(a₁…aₙ | x₁…xₙ)` and the checks run on
//! them: CHSH values, Bell nonlocality, no-signalling and monogamy.

mod chsh;
mod file;
pub mod library;
mod monogamy;
mod signalling;

pub use chsh::{chsh, chsh_prepare_measure, chsh_with, is_bell_nonlocal, max_chsh, ChshSettings, ChshValue, PartyPair};
pub use file::BoxFile;
pub use monogamy::{check_ns_monogamy, check_strong_monogamy, MonogamyKind, MonogamyReport, MonogamyWitness};
pub use signalling::{check_no_signalling, NoSignallingReport, SignallingWitness};

use crate::error::{Error, Result};
use crate::scalar::{exact_from_f64, Scalar};
use crate::theory::joint::{flatten, unflatten};
use crate::theory::EPS_NORM;

/// At most this many parties are supported.
pub const MAX_PARTIES: usize = 3;

/// Conditional distribution table. Setting tuples and outcome tuples are both
/// stored row-major with party 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationBox<S> {
    settings: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
    table: Vec<Vec<S>>,
}

impl<S: Scalar> CorrelationBox<S> {
    /// `settings[k]` is party k's setting count, `outcomes[k][x]` the arity of
    /// party k's setting x, and `table` holds one row per setting tuple.
    pub fn new(settings: Vec<usize>, outcomes: Vec<Vec<usize>>, table: Vec<Vec<S>>) -> Result<Self> {
        let n = settings.len();
        if n == 0 || n > MAX_PARTIES {
            return Err(Error::Unsupported(format!("{n} parties; 1 to {MAX_PARTIES} supported")));
        }
        if outcomes.len() != n || outcomes.iter().zip(&settings).any(|(o, &s)| o.len() != s || s == 0 || o.contains(&0))
        {
            return Err(Error::ArityMismatch("outcome arities must list one positive count per setting".into()));
        }
        let shape = Self { settings, outcomes, table: Vec::new() };
        let rows = shape.num_setting_tuples();
        if table.len() != rows {
            return Err(Error::ArityMismatch(format!("{rows} setting tuples but {} rows", table.len())));
        }
        let tol = S::from_f64_lossy(EPS_NORM);
        for (flat, row) in table.iter().enumerate() {
            let x = unflatten(flat, &shape.settings);
            let want: usize = shape.outcome_arities(&x).iter().product();
            if row.len() != want {
                return Err(Error::ArityMismatch(format!("settings {x:?} need {want} entries, got {}", row.len())));
            }
            if let Some(bad) = row.iter().find(|p| **p < -tol.clone() || **p > S::one() + tol.clone()) {
                return Err(Error::InvalidProbability(format!("entry {bad:?} at settings {x:?} outside [0,1]")));
            }
            let total = row.iter().cloned().fold(S::zero(), |a, b| a + b);
            if (total.clone() - S::one()).abs() > tol {
                return Err(Error::InvalidProbability(format!("settings {x:?} sum to {total:?}")));
            }
        }
        Ok(Self { table, ..shape })
    }

    /// Builds the table from `f(settings, outcomes)`.
    pub fn from_fn(
        settings: Vec<usize>,
        outcomes: Vec<Vec<usize>>,
        f: impl Fn(&[usize], &[usize]) -> S,
    ) -> Result<Self> {
        let shape = Self { settings: settings.clone(), outcomes: outcomes.clone(), table: Vec::new() };
        if settings.is_empty()
            || outcomes.len() != settings.len()
            || outcomes.iter().zip(&settings).any(|(o, &s)| o.len() != s)
        {
            return Err(Error::ArityMismatch("outcome arities must list one count per setting".into()));
        }
        let table = (0..shape.num_setting_tuples())
            .map(|flat| {
                let x = unflatten(flat, &settings);
                let ar = shape.outcome_arities(&x);
                let size: usize = ar.iter().product();
                (0..size).map(|k| f(&x, &unflatten(k, &ar))).collect()
            })
            .collect();
        Self::new(settings, outcomes, table)
    }

    /// Every party has `settings` settings with `arity` outcomes each.
    pub fn uniform_shape(parties: usize, settings: usize, arity: usize) -> (Vec<usize>, Vec<Vec<usize>>) {
        (vec![settings; parties], vec![vec![arity; settings]; parties])
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    pub fn num_setting_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn outcome_arities(&self, x: &[usize]) -> Vec<usize> {
        x.iter().enumerate().map(|(k, &xk)| self.outcomes[k][xk]).collect()
    }

    /// Every setting of every party has exactly two outcomes.
    pub fn is_binary(&self) -> bool {
        self.outcomes.iter().flatten().all(|&o| o == 2)
    }

    fn check_settings(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.parties() || x.iter().zip(&self.settings).any(|(&xi, &s)| xi >= s) {
            return Err(Error::ArityMismatch(format!("setting tuple {x:?} invalid for {:?}", self.settings)));
        }
        Ok(())
    }

    /// The row `p(· | x)`.
    pub fn row(&self, x: &[usize]) -> Result<&[S]> {
        self.check_settings(x)?;
        Ok(&self.table[flatten(x, &self.settings)])
    }

    pub fn prob(&self, x: &[usize], a: &[usize]) -> Result<S> {
        let row = self.row(x)?;
        let ar = self.outcome_arities(x);
        if a.len() != ar.len() || a.iter().zip(&ar).any(|(&ai, &n)| ai >= n) {
            return Err(Error::ArityMismatch(format!("outcome tuple {a:?} invalid for arities {ar:?}")));
        }
        Ok(row[flatten(a, &ar)].clone())
    }

    /// Distribution of the kept parties' outcomes given the full setting
    /// tuple `x`, over the kept parties' outcome product in ascending party order.
    pub fn marginal(&self, keep: &[usize], x: &[usize]) -> Result<Vec<S>> {
        let row = self.row(x)?;
        let ar = self.outcome_arities(x);
        let kept: Vec<usize> = (0..self.parties()).filter(|k| keep.contains(k)).collect();
        let kept_ar: Vec<usize> = kept.iter().map(|&k| ar[k]).collect();
        let mut out = vec![S::zero(); kept_ar.iter().product()];
        for (flat, p) in row.iter().enumerate() {
            let a = unflatten(flat, &ar);
            let ka: Vec<usize> = kept.iter().map(|&k| a[k]).collect();
            let slot = &mut out[flatten(&ka, &kept_ar)];
            *slot = slot.clone() + p.clone();
        }
        Ok(out)
    }

    /// Iterator over all setting tuples in storage order.
    pub fn setting_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_setting_tuples()).map(|f| unflatten(f, &self.settings))
    }

    /// Mixture `w·self + (1−w)·other` of two boxes of identical shape.
    pub fn mix(&self, w: &S, other: &Self) -> Result<Self> {
        if self.settings != other.settings || self.outcomes != other.outcomes {
            return Err(Error::ArityMismatch("cannot mix boxes of different shape".into()));
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(r, s)| {
                r.iter().zip(s).map(|(p, q)| w.clone() * p.clone() + (S::one() - w.clone()) * q.clone()).collect()
            })
            .collect();
        Self::new(self.settings.clone(), self.outcomes.clone(), table)
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CorrelationBox<T> {
        CorrelationBox {
            settings: self.settings.clone(),
            outcomes: self.outcomes.clone(),
            table: self.table.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }

    pub fn to_f64(&self) -> CorrelationBox<f64> {
        self.map_scalar(Scalar::to_f64_lossy)
    }

    /// Rows as stored.
    pub fn table(&self) -> &[Vec<S>] {
        &self.table
    }
}

impl CorrelationBox<f64> {
    /// The same table in exact rationals (each `f64` converted exactly).
    pub fn to_exact(&self) -> CorrelationBox<crate::Exact> {
        self.map_scalar(|x| exact_from_f64(*x))
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;

    #[test]
    fn shape_validation() {
        assert!(CorrelationBox::<f64>::new(vec![], vec![], vec![]).is_err());
        assert!(CorrelationBox::<f64>::new(vec![1; 4], vec![vec![1]; 4], vec![vec![1.0]]).is_err());
        assert!(CorrelationBox::new(vec![1], vec![vec![2]], vec![vec![0.5, 0.6]]).is_err());
        assert!(CorrelationBox::new(vec![1], vec![vec![2]], vec![vec![0.5]]).is_err());
        assert!(CorrelationBox::new(vec![1], vec![vec![2]], vec![vec![0.5, 0.5]]).is_ok());
    }

    #[test]
    fn marginals_of_pr_box() {
        let pr = pr_box::<f64>();
        for x in pr.setting_tuples().collect::<Vec<_>>() {
            assert_eq!(pr.marginal(&[0], &x).unwrap(), vec![0.5, 0.5]);
            assert_eq!(pr.marginal(&[1], &x).unwrap(), vec![0.5, 0.5]);
        }
        assert_eq!(pr.prob(&[1, 1], &[0, 1]).unwrap(), 0.5);
        assert_eq!(pr.prob(&[1, 1], &[0, 0]).unwrap(), 0.0);
        assert!(pr.prob(&[2, 0], &[0, 0]).is_err());
    }

    #[test]
    fn mixed_arity_boxes() {
        let b = CorrelationBox::from_fn(vec![2, 1], vec![vec![2, 3], vec![2]], |x, _| {
            let na = if x[0] == 0 { 2.0 } else { 3.0 };
            1.0 / (na * 2.0)
        })
        .unwrap();
        assert_eq!(b.row(&[1, 0]).unwrap().len(), 6);
        assert!(!b.is_binary());
    }
}
