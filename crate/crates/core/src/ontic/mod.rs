//! Ontological models: ontic states, preparation distributions, response
//! functions and stochastic transformations, plus the local-model LP.

mod local;

pub use local::{
    bell_witness, find_local_model, noncontextual_chsh_bound, BellWitness, LocalModelCertificate, NoncontextualVerdict,
    Strategy, EXACT_RECHECK_LIMIT, LP_FEAS_TOL, MAX_STRATEGIES,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{MeasId, OperationalTheory, PrepId, TransId, EPS_NORM};

/// A finite ontological model over `n_ontic` ontic states.
///
/// `xi[M][x][λ]` is the response function of outcome `x`; `trans[T][λ'][λ]`
/// is the probability of moving from `λ` to `λ'`, so columns sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnticModel<S> {
    pub n_ontic: usize,
    pub mu: BTreeMap<PrepId, Vec<S>>,
    pub xi: BTreeMap<MeasId, Vec<Vec<S>>>,
    #[serde(default)]
    pub trans: BTreeMap<TransId, Vec<Vec<S>>>,
}

/// Which validity condition an object breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `μ_P(λ) ∈ [0,1]`
    MuRange,
    /// `Σ_λ μ_P(λ) = 1`
    MuNormalized,
    /// `ξ_{M,x}(λ) ∈ [0,1]`
    XiRange,
    /// `Σ_x ξ_{M,x}(λ) = 1`
    XiNormalized,
    /// `T_O` column-stochastic
    ColumnStochastic,
    /// Vector or matrix of the wrong size.
    Shape,
}

impl Condition {
    /// Number of the positivity/normalization condition, 0 for shape errors.
    pub fn number(self) -> u8 {
        match self {
            Condition::MuRange => 1,
            Condition::MuNormalized => 2,
            Condition::XiRange => 3,
            Condition::XiNormalized => 4,
            Condition::ColumnStochastic => 5,
            Condition::Shape => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub object: String,
    /// Offending indices: `[λ]`, `[x, λ]`, `[row, column]` or a column `[λ]`.
    pub index: Vec<usize>,
    pub detail: String,
}

fn in_unit<S: Scalar>(v: &S, tol: &S) -> bool {
    *v >= -tol.clone() && *v <= S::one() + tol.clone()
}

fn sum<'a, S: Scalar>(it: impl IntoIterator<Item = &'a S>) -> S {
    it.into_iter().fold(S::zero(), |a, b| a + b.clone())
}

impl<S: Scalar> OnticModel<S> {
    /// All violations of the five validity conditions, within `ε_norm`.
    pub fn validate(&self) -> Vec<Violation> {
        self.validate_within(&S::from_f64_lossy(EPS_NORM))
    }

    /// [`Self::validate`] with an explicit tolerance.
    pub fn validate_within(&self, tol: &S) -> Vec<Violation> {
        let n = self.n_ontic;
        let tol = tol.clone();
        let mut out = Vec::new();
        let mut push = |condition, object: String, index: Vec<usize>, detail: String| {
            out.push(Violation { condition, object, index, detail })
        };
        for (p, mu) in &self.mu {
            if mu.len() != n {
                push(Condition::Shape, p.to_string(), vec![], format!("{} entries, expected {n}", mu.len()));
                continue;
            }
            for (l, v) in mu.iter().enumerate() {
                if !in_unit(v, &tol) {
                    push(Condition::MuRange, p.to_string(), vec![l], format!("μ = {v:?}"));
                }
            }
            let total = sum(mu);
            if (total.clone() - S::one()).abs() > tol {
                push(Condition::MuNormalized, p.to_string(), vec![], format!("Σμ = {total:?}"));
            }
        }
        for (m, xi) in &self.xi {
            if xi.is_empty() || xi.iter().any(|r| r.len() != n) {
                push(Condition::Shape, m.to_string(), vec![], format!("response rows must have {n} entries"));
                continue;
            }
            for (x, row) in xi.iter().enumerate() {
                for (l, v) in row.iter().enumerate() {
                    if !in_unit(v, &tol) {
                        push(Condition::XiRange, m.to_string(), vec![x, l], format!("ξ = {v:?}"));
                    }
                }
            }
            for l in 0..n {
                let total = sum(xi.iter().map(|r| &r[l]));
                if (total.clone() - S::one()).abs() > tol {
                    push(Condition::XiNormalized, m.to_string(), vec![l], format!("Σ_x ξ = {total:?}"));
                }
            }
        }
        for (t, mat) in &self.trans {
            if mat.len() != n || mat.iter().any(|r| r.len() != n) {
                push(Condition::Shape, t.to_string(), vec![], format!("matrix must be {n}x{n}"));
                continue;
            }
            for (i, row) in mat.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if *v < -tol.clone() {
                        push(Condition::ColumnStochastic, t.to_string(), vec![i, j], format!("entry {v:?}"));
                    }
                }
            }
            for j in 0..n {
                let total = sum(mat.iter().map(|r| &r[j]));
                if (total.clone() - S::one()).abs() > tol {
                    push(Condition::ColumnStochastic, t.to_string(), vec![j], format!("column sums to {total:?}"));
                }
            }
        }
        out
    }

    /// `T_O μ_P`, with the identity when `trans` is the identity id and not listed.
    pub fn evolved(&self, prep: &PrepId, trans: &TransId) -> Result<Vec<S>> {
        let mu = self.mu.get(prep).ok_or_else(|| Error::UnknownId { kind: "preparation", id: prep.to_string() })?;
        if mu.len() != self.n_ontic {
            return Err(Error::ArityMismatch(format!("μ of `{prep}` has {} entries", mu.len())));
        }
        match self.trans.get(trans) {
            Some(t) => Ok(t
                .iter()
                .map(|row| row.iter().zip(mu).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
                .collect()),
            None if trans.is_identity() => Ok(mu.clone()),
            None => Err(Error::UnknownId { kind: "transformation", id: trans.to_string() }),
        }
    }

    fn response(&self, meas: &MeasId) -> Result<&Vec<Vec<S>>> {
        self.xi.get(meas).ok_or_else(|| Error::UnknownId { kind: "measurement", id: meas.to_string() })
    }

    /// `p(x) = Σ_λ ξ_{M,x}(λ) (T_O μ_P)(λ)`.
    pub fn predict(&self, prep: &PrepId, trans: &TransId, meas: &MeasId) -> Result<Vec<S>> {
        let state = self.evolved(prep, trans)?;
        Ok(self
            .response(meas)?
            .iter()
            .map(|row| row.iter().zip(&state).fold(S::zero(), |a, (x, m)| a + x.clone() * m.clone()))
            .collect())
    }

    /// Factorizable joint `Σ_λ μ_P(λ) Π_k ξ_{M_k, x_k}(λ)` over the outcome
    /// product of `meas`, first measurement most significant.
    pub fn predict_joint(&self, prep: &PrepId, meas: &[MeasId]) -> Result<Vec<S>> {
        let state = self.evolved(prep, &TransId::identity())?;
        let responses = meas.iter().map(|m| self.response(m)).collect::<Result<Vec<_>>>()?;
        let arities: Vec<usize> = responses.iter().map(|r| r.len()).collect();
        let size: usize = arities.iter().product();
        Ok((0..size)
            .map(|flat| {
                let x = crate::theory::joint::unflatten(flat, &arities);
                (0..self.n_ontic).fold(S::zero(), |acc, l| {
                    let w = responses.iter().zip(&x).fold(state[l].clone(), |w, (r, &xk)| w * r[xk][l].clone());
                    acc + w
                })
            })
            .collect())
    }

    /// Largest entrywise gap between the model's predictions and the theory's
    /// identity-transformation rows (plus rows of transformations the model knows).
    pub fn max_deviation_from(&self, theory: &OperationalTheory<S>) -> Result<S> {
        let mut worst = S::zero();
        for (p, t, m, row) in theory.rows() {
            if !t.is_identity() && !self.trans.contains_key(t) {
                continue;
            }
            let pred = self.predict(p, t, m)?;
            if pred.len() != row.len() {
                return Err(Error::ArityMismatch(format!("measurement `{m}` arity differs")));
            }
            for (a, b) in pred.iter().zip(row) {
                let d = (a.clone() - b.clone()).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        Ok(worst)
    }
}

impl OnticModel<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Free-standing form of [`OnticModel::validate`].
pub fn validate_model<S: Scalar>(model: &OnticModel<S>) -> Vec<Violation> {
    model.validate()
}
