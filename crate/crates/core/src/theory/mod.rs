//! Finite operational theories as explicit probability tables.
//!
//! A theory is a set of preparations, transformations (always including the
//! identity) and measurements, together with the table `p(M^x | P, T)`.
//! Entries for the identity transformation are mandatory; entries for other
//! transformations may be absent.

mod file;
mod ids;
pub mod joint;
pub mod rank;

use std::collections::HashMap;

pub use file::{TheoryFile, TheoryRow};
pub use ids::{MeasId, PrepId, TransId};
pub use joint::{Axis, JointDistribution};

use crate::error::{Error, Result};
use crate::scalar::{within, Scalar};

/// Normalization tolerance for probability tables.
pub const EPS_NORM: f64 = 1e-9;
/// Default tolerance for operational equivalence.
pub const EQUIV_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasSpec {
    pub id: MeasId,
    pub arity: usize,
}

/// An ensemble preparation: draw branch `i` with probability `weights[i]`,
/// then perform preparation `branches[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsemblePreparation<S> {
    weights: Vec<S>,
    branches: Vec<PrepId>,
}

impl<S: Scalar> EnsemblePreparation<S> {
    pub fn new(weights: Vec<S>, branches: Vec<PrepId>) -> Result<Self> {
        if weights.len() != branches.len() || weights.is_empty() {
            return Err(Error::ArityMismatch(format!("{} weights for {} branches", weights.len(), branches.len())));
        }
        let tol = S::from_f64_lossy(EPS_NORM);
        if weights.iter().any(|w| *w < S::zero() || *w > S::one() + tol.clone()) {
            return Err(Error::InvalidProbability("ensemble weights must lie in [0,1]".into()));
        }
        let total = weights.iter().cloned().fold(S::zero(), |a, b| a + b);
        if !within(&total, &S::one(), &tol) {
            return Err(Error::InvalidProbability(format!("ensemble weights sum to {total:?}")));
        }
        for (i, b) in branches.iter().enumerate() {
            if branches[..i].contains(b) {
                return Err(Error::InvalidProbability(format!("branch `{b}` repeated in ensemble")));
            }
        }
        Ok(Self { weights, branches })
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn branches(&self) -> &[PrepId] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Outcome of [`OperationalTheory::affine_dimension`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubtheoryDimension {
    pub affine_parameter_count: usize,
    pub claimed_dimension: Option<usize>,
}

impl SubtheoryDimension {
    pub fn from_count(count: usize) -> Self {
        let claimed_dimension = (2..).take_while(|d| d * d - 1 <= count).find(|d| d * d - 1 == count);
        Self { affine_parameter_count: count, claimed_dimension }
    }
}

#[derive(Clone, Debug)]
pub struct OperationalTheory<S> {
    preparations: Vec<PrepId>,
    transformations: Vec<TransId>,
    measurements: Vec<MeasSpec>,
    // rows[m][t][p]
    rows: Vec<Vec<Vec<Option<Vec<S>>>>>,
    absorbed: HashMap<(usize, usize), usize>,
}

impl<S: Scalar> OperationalTheory<S> {
    /// An empty table over the given labels. The identity transformation is
    /// inserted first if `transformations` does not already contain it.
    pub fn new(preparations: Vec<PrepId>, transformations: Vec<TransId>, measurements: Vec<MeasSpec>) -> Result<Self> {
        let mut trans = vec![TransId::identity()];
        trans.extend(transformations.into_iter().filter(|t| !t.is_identity()));
        check_distinct("preparation", preparations.iter().map(PrepId::as_str))?;
        check_distinct("transformation", trans.iter().map(TransId::as_str))?;
        check_distinct("measurement", measurements.iter().map(|m| m.id.as_str()))?;
        if let Some(m) = measurements.iter().find(|m| m.arity == 0) {
            return Err(Error::ArityMismatch(format!("measurement `{}` has no outcomes", m.id)));
        }
        let rows = measurements.iter().map(|_| vec![vec![None; preparations.len()]; trans.len()]).collect();
        Ok(Self { preparations, transformations: trans, measurements, rows, absorbed: HashMap::new() })
    }

    /// Sets one row of the table after checking range and normalization.
    pub fn set_row(&mut self, prep: &PrepId, trans: &TransId, meas: &MeasId, probs: Vec<S>) -> Result<()> {
        let (p, t, m) = (self.prep_index(prep)?, self.trans_index(trans)?, self.meas_index(meas)?);
        check_row(&probs, self.measurements[m].arity, &self.measurements[m].id)?;
        self.rows[m][t][p] = Some(probs);
        Ok(())
    }

    /// Errors unless every identity-transformation row is present.
    pub fn check_complete(&self) -> Result<()> {
        for (m, spec) in self.measurements.iter().enumerate() {
            for (p, prep) in self.preparations.iter().enumerate() {
                if self.rows[m][0][p].is_none() {
                    return Err(Error::MissingEntry {
                        prep: prep.to_string(),
                        trans: TransId::IDENTITY.into(),
                        meas: spec.id.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn preparations(&self) -> &[PrepId] {
        &self.preparations
    }

    pub fn transformations(&self) -> &[TransId] {
        &self.transformations
    }

    pub fn measurements(&self) -> &[MeasSpec] {
        &self.measurements
    }

    pub fn arity(&self, meas: &MeasId) -> Result<usize> {
        Ok(self.measurements[self.meas_index(meas)?].arity)
    }

    pub fn prep_index(&self, id: &PrepId) -> Result<usize> {
        self.preparations.iter().position(|p| p == id).ok_or_else(|| unknown("preparation", id.as_str()))
    }

    pub fn trans_index(&self, id: &TransId) -> Result<usize> {
        self.transformations.iter().position(|t| t == id).ok_or_else(|| unknown("transformation", id.as_str()))
    }

    pub fn meas_index(&self, id: &MeasId) -> Result<usize> {
        self.measurements.iter().position(|m| &m.id == id).ok_or_else(|| unknown("measurement", id.as_str()))
    }

    fn row(&self, p: usize, t: usize, m: usize) -> Result<&[S]> {
        self.rows[m][t][p].as_deref().ok_or_else(|| Error::MissingEntry {
            prep: self.preparations[p].to_string(),
            trans: self.transformations[t].to_string(),
            meas: self.measurements[m].id.to_string(),
        })
    }

    /// `p(M^x | P, T)` for every outcome `x`.
    pub fn outcome_distribution(&self, prep: &PrepId, trans: &TransId, meas: &MeasId) -> Result<Vec<S>> {
        let (p, t, m) = (self.prep_index(prep)?, self.trans_index(trans)?, self.meas_index(meas)?);
        Ok(self.row(p, t, m)?.to_vec())
    }

    /// Returns a measurement `N` with `p(N^x | P) = p(M^x | P, T)` for every
    /// preparation, adding it to the theory on first use.
    pub fn absorb_transformation(&mut self, trans: &TransId, meas: &MeasId) -> Result<MeasId> {
        let (t, m) = (self.trans_index(trans)?, self.meas_index(meas)?);
        if t == 0 {
            return Ok(meas.clone());
        }
        if let Some(&n) = self.absorbed.get(&(t, m)) {
            return Ok(self.measurements[n].id.clone());
        }
        let identity_rows = (0..self.preparations.len())
            .map(|p| self.row(p, t, m).map(|r| Some(r.to_vec())))
            .collect::<Result<Vec<_>>>()?;
        let mut id = MeasId(format!("{}@{}", meas, trans));
        while self.meas_index(&id).is_ok() {
            id.0.push('\'');
        }
        let mut rows = vec![vec![None; self.preparations.len()]; self.transformations.len()];
        rows[0] = identity_rows;
        self.measurements.push(MeasSpec { id: id.clone(), arity: self.measurements[m].arity });
        self.rows.push(rows);
        self.absorbed.insert((t, m), self.measurements.len() - 1);
        Ok(id)
    }

    /// Adds the coarse-grained preparation "run the ensemble and forget the
    /// branch". Rows are present wherever every branch has one.
    pub fn add_mixture(&mut self, id: PrepId, ensemble: &EnsemblePreparation<S>) -> Result<PrepId> {
        if self.prep_index(&id).is_ok() {
            return Err(Error::InvalidProbability(format!("preparation `{id}` already exists")));
        }
        let branch_idx = ensemble.branches().iter().map(|b| self.prep_index(b)).collect::<Result<Vec<_>>>()?;
        for (m, spec) in self.measurements.iter().enumerate() {
            for t in 0..self.transformations.len() {
                let mut acc: Option<Vec<S>> = Some(vec![S::zero(); spec.arity]);
                for (w, &p) in ensemble.weights().iter().zip(&branch_idx) {
                    acc = match (acc, &self.rows[m][t][p]) {
                        (Some(mut a), Some(row)) => {
                            for (ai, ri) in a.iter_mut().zip(row) {
                                *ai = ai.clone() + w.clone() * ri.clone();
                            }
                            Some(a)
                        }
                        _ => None,
                    };
                }
                self.rows[m][t].push(acc);
            }
        }
        self.preparations.push(id.clone());
        Ok(id)
    }

    /// Joint distribution over the ensemble branch and the outcome of each
    /// `(channel, measurement)` pair. Entry `(i, x_2, …, x_n)` is
    /// `p(i) · ∏_k p(M_k^{x_k} | Q_i, T_k)`; correlated multi-output channels
    /// are expressed as one composite measurement of product arity.
    pub fn ensemble_joint(
        &self,
        ensemble: &EnsemblePreparation<S>,
        chans: &[TransId],
        meass: &[MeasId],
    ) -> Result<JointDistribution<S>> {
        if chans.len() != meass.len() || chans.is_empty() {
            return Err(Error::ArityMismatch(format!("{} channels but {} measurements", chans.len(), meass.len())));
        }
        let branch_idx = ensemble.branches().iter().map(|b| self.prep_index(b)).collect::<Result<Vec<_>>>()?;
        let pairs = chans
            .iter()
            .zip(meass)
            .map(|(t, m)| Ok((self.trans_index(t)?, self.meas_index(m)?)))
            .collect::<Result<Vec<_>>>()?;

        let mut axes = vec![Axis::new("branch", ensemble.len())];
        axes.extend(pairs.iter().map(|&(t, m)| {
            Axis::new(format!("{}@{}", self.measurements[m].id, self.transformations[t]), self.measurements[m].arity)
        }));
        let arities: Vec<usize> = axes.iter().map(|a| a.arity).collect();
        let size: usize = arities.iter().product();
        let mut probs = Vec::with_capacity(size);
        for flat in 0..size {
            let idx = joint::unflatten(flat, &arities);
            let branch = idx[0];
            let mut v = ensemble.weights()[branch].clone();
            for (k, &(t, m)) in pairs.iter().enumerate() {
                v = v * self.row(branch_idx[branch], t, m)?[idx[k + 1]].clone();
            }
            probs.push(v);
        }
        JointDistribution::new(axes, probs)
    }

    /// True iff the two preparations give outcome distributions within `tol`
    /// for every `(T, M)` row defined for both.
    pub fn operationally_equivalent(&self, a: &PrepId, b: &PrepId, tol: &S) -> Result<bool> {
        Ok(self.distinguishing_row(a, b, tol)?.is_none())
    }

    /// First `(T, M)` pair whose outcome distributions differ by more than `tol`.
    pub fn distinguishing_row(&self, a: &PrepId, b: &PrepId, tol: &S) -> Result<Option<(TransId, MeasId)>> {
        let (pa, pb) = (self.prep_index(a)?, self.prep_index(b)?);
        for (m, spec) in self.measurements.iter().enumerate() {
            for (t, trans) in self.transformations.iter().enumerate() {
                if let (Some(ra), Some(rb)) = (&self.rows[m][t][pa], &self.rows[m][t][pb]) {
                    if ra.iter().zip(rb).any(|(x, y)| !within(x, y, tol)) {
                        return Ok(Some((trans.clone(), spec.id.clone())));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Stacked outcome-probability vectors, one per preparation, built from
    /// every row that is defined for all preparations.
    pub fn stacked_vectors(&self) -> Vec<Vec<f64>> {
        let mut cols: Vec<(usize, usize)> = Vec::new();
        for m in 0..self.measurements.len() {
            for t in 0..self.transformations.len() {
                if self.rows[m][t].iter().all(Option::is_some) {
                    cols.push((m, t));
                }
            }
        }
        (0..self.preparations.len())
            .map(|p| {
                cols.iter()
                    .flat_map(|&(m, t)| {
                        self.rows[m][t][p]
                            .as_ref()
                            .map(|r| r.iter().map(Scalar::to_f64_lossy).collect::<Vec<_>>())
                            .unwrap_or_default()
                    })
                    .collect()
            })
            .collect()
    }

    /// Affine rank of the preparations' outcome statistics, with a claimed
    /// dimension `d` whenever that rank equals `d² − 1` for some `d ≥ 2`.
    /// Surjectivity onto the parameter range is not checked.
    pub fn affine_dimension(&self) -> SubtheoryDimension {
        self.affine_dimension_with(rank::RANK_RTOL)
    }

    /// [`Self::affine_dimension`] with relative singular-value cutoff `rtol`.
    pub fn affine_dimension_with(&self, rtol: f64) -> SubtheoryDimension {
        SubtheoryDimension::from_count(rank::affine_rank_with(&self.stacked_vectors(), rtol))
    }

    /// Whether two binary measurements carry independent information about
    /// the preparation: the points `(p(M₁⁰|P), p(M₂⁰|P))` must span the plane.
    pub fn are_orthogonal(&self, m1: &MeasId, m2: &MeasId) -> Result<bool> {
        let (a, b) = (self.meas_index(m1)?, self.meas_index(m2)?);
        for idx in [a, b] {
            if self.measurements[idx].arity != 2 {
                return Err(Error::Unsupported(format!(
                    "orthogonality is defined for two-outcome measurements; `{}` has {}",
                    self.measurements[idx].id, self.measurements[idx].arity
                )));
            }
        }
        let points = (0..self.preparations.len())
            .map(|p| Ok(vec![self.row(p, 0, a)?[0].to_f64_lossy(), self.row(p, 0, b)?[0].to_f64_lossy()]))
            .collect::<Result<Vec<_>>>()?;
        Ok(rank::affine_rank(&points) == 2)
    }

    /// Converts every table entry.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> OperationalTheory<T> {
        OperationalTheory {
            preparations: self.preparations.clone(),
            transformations: self.transformations.clone(),
            measurements: self.measurements.clone(),
            rows: self
                .rows
                .iter()
                .map(|by_t| {
                    by_t.iter()
                        .map(|by_p| by_p.iter().map(|r| r.as_ref().map(|r| r.iter().map(&f).collect())).collect())
                        .collect()
                })
                .collect(),
            absorbed: self.absorbed.clone(),
        }
    }

    /// Every defined row as `(prep, trans, meas, probs)`.
    pub fn rows(&self) -> impl Iterator<Item = (&PrepId, &TransId, &MeasId, &[S])> + '_ {
        self.measurements.iter().enumerate().flat_map(move |(m, spec)| {
            self.transformations.iter().enumerate().flat_map(move |(t, trans)| {
                self.preparations
                    .iter()
                    .enumerate()
                    .filter_map(move |(p, prep)| self.rows[m][t][p].as_deref().map(|r| (prep, trans, &spec.id, r)))
            })
        })
    }
}

fn unknown(kind: &'static str, id: &str) -> Error {
    Error::UnknownId { kind, id: id.to_owned() }
}

fn check_distinct<'a>(kind: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::InvalidProbability(format!("duplicate {kind} id `{id}`")));
        }
    }
    Ok(())
}

fn check_row<S: Scalar>(probs: &[S], arity: usize, meas: &MeasId) -> Result<()> {
    if probs.len() != arity {
        return Err(Error::ArityMismatch(format!(
            "measurement `{meas}` has {arity} outcomes, row has {}",
            probs.len()
        )));
    }
    let tol = S::from_f64_lossy(EPS_NORM);
    if let Some(bad) = probs.iter().find(|p| **p < S::zero() - tol.clone() || **p > S::one() + tol.clone()) {
        return Err(Error::InvalidProbability(format!("probability {bad:?} for `{meas}` outside [0,1]")));
    }
    let total = probs.iter().cloned().fold(S::zero(), |a, b| a + b);
    if !within(&total, &S::one(), &tol) {
        return Err(Error::InvalidProbability(format!("outcomes of `{meas}` sum to {total:?}")));
    }
    Ok(())
}
