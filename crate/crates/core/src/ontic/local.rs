//! Local (factorizable) models of correlation boxes by linear programming.

use std::collections::BTreeMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use serde::Serialize;

use super::OnticModel;
use crate::correlations::{max_chsh, CorrelationBox};
use crate::error::{Error, Result};
use crate::scalar::{exact_from_f64, Scalar};
use crate::theory::joint::unflatten;
use crate::theory::{MeasId, PrepId};
use crate::Exact;

/// Feasibility tolerance on the largest reconstruction error.
pub const LP_FEAS_TOL: f64 = 1e-7;
/// Refuse boxes with more deterministic strategies than this.
pub const MAX_STRATEGIES: usize = 1 << 20;
/// Certificates with at most this many strategies are re-checked exactly.
pub const EXACT_RECHECK_LIMIT: usize = 256;

/// Deterministic local strategy: `outputs[k][x]` is party k's answer to setting x.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Strategy {
    pub outputs: Vec<Vec<usize>>,
}

impl Strategy {
    /// `"a,b|c,d"`: parties separated by `|`, one output per setting.
    pub fn key(&self) -> String {
        self.outputs
            .iter()
            .map(|o| o.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Flat index of the single outcome tuple this strategy produces for `x`.
    fn entry(&self, x: &[usize], arities: &[usize]) -> usize {
        x.iter().enumerate().fold(0, |acc, (k, &xk)| acc * arities[k] + self.outputs[k][xk])
    }
}

fn strategy_count<S: Scalar>(bx: &CorrelationBox<S>) -> Option<usize> {
    bx.outcomes().iter().flatten().try_fold(1usize, |acc, &o| acc.checked_mul(o))
}

fn strategies<S: Scalar>(bx: &CorrelationBox<S>) -> Result<Vec<Strategy>> {
    let count = strategy_count(bx)
        .filter(|&c| c <= MAX_STRATEGIES)
        .ok_or_else(|| Error::TooLarge(format!("more than {MAX_STRATEGIES} deterministic strategies")))?;
    let arities: Vec<usize> = bx.outcomes().iter().flatten().copied().collect();
    Ok((0..count)
        .map(|flat| {
            let digits = unflatten(flat, &arities);
            let mut it = digits.into_iter();
            Strategy { outputs: bx.settings().iter().map(|&s| it.by_ref().take(s).collect()).collect() }
        })
        .collect())
}

/// Convex weights over deterministic strategies reproducing a box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalModelCertificate {
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
    pub strategies: Vec<(Strategy, f64)>,
    /// Largest entrywise reconstruction error in floating point.
    pub residual: f64,
    /// The same error recomputed in exact rationals, when re-checked.
    pub exact_residual: Option<f64>,
}

impl LocalModelCertificate {
    /// `{strategy → weight}`.
    pub fn weights_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, f64> = self.strategies.iter().map(|(s, w)| (s.key(), *w)).collect();
        serde_json::to_value(map).expect("map serializes")
    }

    pub fn reconstruct<S: Scalar>(&self) -> CorrelationBox<S> {
        let weights: Vec<(Strategy, S)> =
            self.strategies.iter().map(|(s, w)| (s.clone(), S::from_f64_lossy(*w))).collect();
        reconstruct(&self.settings, &self.outcomes, &weights)
    }

    /// The strategies as ontic states: one preparation `"P"` with the weights
    /// as `μ`, and measurement `"k:x"` reading party k's answer to setting x.
    pub fn to_ontic_model(&self) -> OnticModel<f64> {
        let n = self.strategies.len();
        let mu = [(PrepId::from("P"), self.strategies.iter().map(|(_, w)| *w).collect())].into_iter().collect();
        let mut xi = BTreeMap::new();
        for (k, &settings) in self.settings.iter().enumerate() {
            for x in 0..settings {
                let rows = (0..self.outcomes[k][x])
                    .map(|a| (0..n).map(|l| f64::from(u8::from(self.strategies[l].0.outputs[k][x] == a))).collect())
                    .collect();
                xi.insert(MeasId::from(format!("{k}:{x}")), rows);
            }
        }
        OnticModel { n_ontic: n, mu, xi, trans: BTreeMap::new() }
    }
}

fn reconstruct<S: Scalar>(settings: &[usize], outcomes: &[Vec<usize>], weights: &[(Strategy, S)]) -> CorrelationBox<S> {
    let rows: usize = settings.iter().product();
    let table = (0..rows)
        .map(|flat| {
            let x = unflatten(flat, settings);
            let ar: Vec<usize> = x.iter().enumerate().map(|(k, &xk)| outcomes[k][xk]).collect();
            let mut row = vec![S::zero(); ar.iter().product()];
            for (s, w) in weights {
                let e = s.entry(&x, &ar);
                row[e] = row[e].clone() + w.clone();
            }
            row
        })
        .collect();
    CorrelationBox::new(settings.to_vec(), outcomes.to_vec(), table).expect("weights sum to one")
}

fn max_residual<S: Scalar>(bx: &CorrelationBox<S>, strategies: &[Strategy], weights: &[S]) -> S {
    let mut worst = S::zero();
    for x in bx.setting_tuples() {
        let ar = bx.outcome_arities(&x);
        let mut row: Vec<S> = bx.row(&x).expect("own settings").to_vec();
        for (s, w) in strategies.iter().zip(weights) {
            let e = s.entry(&x, &ar);
            row[e] = row[e].clone() - w.clone();
        }
        for d in row {
            let d = d.abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

fn solver_error(e: minilp::Error) -> Error {
    Error::Solver(e.to_string())
}

/// Searches for convex weights over deterministic strategies reproducing
/// `bx` to within `tol` entrywise. Solves `min t` subject to
/// `|Σ_s w_s D_s − p| ≤ t`, `w` in the simplex.
pub fn find_local_model(bx: &CorrelationBox<f64>, tol: f64) -> Result<Option<LocalModelCertificate>> {
    let strats = strategies(bx)?;
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    let w: Vec<Variable> = strats.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    lp.add_constraint(w.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    for x in bx.setting_tuples() {
        let ar = bx.outcome_arities(&x);
        let row = bx.row(&x)?;
        let mut terms: Vec<Vec<(Variable, f64)>> = vec![Vec::new(); row.len()];
        for (s, &v) in strats.iter().zip(&w) {
            terms[s.entry(&x, &ar)].push((v, 1.0));
        }
        for (e, mut expr) in terms.into_iter().enumerate() {
            expr.push((t, -1.0));
            lp.add_constraint(expr.iter().copied(), ComparisonOp::Le, row[e]);
            let neg: Vec<(Variable, f64)> = expr.iter().map(|&(v, c)| (v, if v == t { -1.0 } else { -c })).collect();
            lp.add_constraint(neg, ComparisonOp::Le, -row[e]);
        }
    }
    let sol = lp.solve().map_err(solver_error)?;
    if sol.objective() > tol {
        return Ok(None);
    }
    let raw: Vec<f64> = w.iter().map(|&v| sol[v].max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    let kept: Vec<(Strategy, f64)> =
        strats.into_iter().zip(raw).filter(|(_, v)| *v > 1e-12).map(|(s, v)| (s, v / total)).collect();
    let (ks, kw): (Vec<Strategy>, Vec<f64>) = kept.iter().cloned().unzip();
    let residual = max_residual(bx, &ks, &kw);
    if residual > tol {
        return Err(Error::Solver(format!("LP optimum within tolerance but certificate residual {residual:e}")));
    }
    let exact_residual = if ks.len() <= EXACT_RECHECK_LIMIT {
        let ew: Vec<Exact> = kw.iter().map(|&v| exact_from_f64(v)).collect();
        let sum = ew.iter().fold(Exact::from_integer(0.into()), |a, b| a + b);
        let ew: Vec<Exact> = ew.into_iter().map(|v| v / sum.clone()).collect();
        let r = max_residual(&bx.to_exact(), &ks, &ew);
        if r > exact_from_f64(tol) {
            return Err(Error::Solver(format!("certificate fails exact re-check (residual {})", r.to_f64_lossy())));
        }
        Some(r.to_f64_lossy())
    } else {
        None
    };
    Ok(Some(LocalModelCertificate {
        settings: bx.settings().to_vec(),
        outcomes: bx.outcomes().to_vec(),
        strategies: kept,
        residual,
        exact_residual,
    }))
}

/// Bell functional `Σ c(x,a) p(a|x)` with `|c| ≤ 1`, maximizing the gap
/// between the box's value and the best deterministic strategy's.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellWitness {
    /// One coefficient row per setting tuple, shaped like the box table.
    pub coefficients: Vec<Vec<f64>>,
    pub local_bound: f64,
    pub value: f64,
    pub violation: f64,
}

/// Dual of the local-model LP: a positive violation certifies that no
/// local model exists.
pub fn bell_witness(bx: &CorrelationBox<f64>) -> Result<BellWitness> {
    let strats = strategies(bx)?;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let z = lp.add_var(-1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let tuples: Vec<Vec<usize>> = bx.setting_tuples().collect();
    let mut coeffs: Vec<Vec<Variable>> = Vec::new();
    for x in &tuples {
        let row = bx.row(x)?;
        coeffs.push(row.iter().map(|&p| lp.add_var(p, (-1.0, 1.0))).collect());
    }
    for s in &strats {
        let mut expr: Vec<(Variable, f64)> =
            tuples.iter().zip(&coeffs).map(|(x, c)| (c[s.entry(x, &bx.outcome_arities(x))], 1.0)).collect();
        expr.push((z, -1.0));
        lp.add_constraint(expr, ComparisonOp::Le, 0.0);
    }
    let sol = lp.solve().map_err(solver_error)?;
    let coefficients: Vec<Vec<f64>> = coeffs.iter().map(|r| r.iter().map(|&v| sol[v]).collect()).collect();
    let value: f64 =
        coefficients.iter().zip(bx.table()).map(|(c, p)| c.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()).sum();
    let local_bound = strats
        .iter()
        .map(|s| tuples.iter().zip(&coefficients).map(|(x, c)| c[s.entry(x, &bx.outcome_arities(x))]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BellWitness { coefficients, local_bound, value, violation: value - local_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoncontextualVerdict {
    pub local_model: bool,
    pub max_chsh: f64,
    /// A local model implies `max_chsh ≤ 2 + tol`.
    pub implication_holds: bool,
}

/// Local-model existence against the largest CHSH value of a bipartite box.
pub fn noncontextual_chsh_bound(bx: &CorrelationBox<f64>, tol: f64) -> Result<NoncontextualVerdict> {
    if bx.parties() != 2 {
        return Err(Error::Unsupported("expected a bipartite box".into()));
    }
    let local_model = find_local_model(bx, LP_FEAS_TOL)?.is_some();
    let max_chsh = max_chsh(bx, 0, 1)?.value;
    Ok(NoncontextualVerdict { local_model, max_chsh, implication_holds: !local_model || max_chsh <= 2.0 + tol })
}
