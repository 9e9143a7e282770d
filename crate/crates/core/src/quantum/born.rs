//! Born-rule tables and boxes.

use super::matrix::kron_all;
use super::objects::{Channel, DensityMatrix, Povm};
use crate::correlations::CorrelationBox;
use crate::error::{Error, Result};
use crate::theory::joint::unflatten;
use crate::theory::{MeasId, MeasSpec, OperationalTheory, PrepId, TransId};

/// Clamps tiny negative round-off and renormalizes.
fn tidy(mut p: Vec<f64>) -> Vec<f64> {
    for x in &mut p {
        *x = x.max(0.0);
    }
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        for x in &mut p {
            *x /= total;
        }
    }
    p
}

/// Table with entries `Tr(M^x T(ρ))` for every state, channel and POVM.
/// The identity channel is always present under [`TransId::IDENTITY`]; an
/// entry of `channels` with that id replaces nothing and is rejected.
pub fn born_table(
    states: &[(PrepId, DensityMatrix)],
    povms: &[(MeasId, Povm)],
    channels: &[(TransId, Channel)],
) -> Result<OperationalTheory<f64>> {
    let d = match (states.first(), povms.first()) {
        (Some((_, s)), _) => s.dim(),
        (None, Some((_, m))) => m.dim(),
        (None, None) => 0,
    };
    if let Some((id, _)) = states.iter().find(|(_, s)| s.dim() != d) {
        return Err(Error::DimensionMismatch(format!("state `{id}` is not of dimension {d}")));
    }
    if let Some((id, _)) = povms.iter().find(|(_, m)| m.dim() != d) {
        return Err(Error::DimensionMismatch(format!("POVM `{id}` is not of dimension {d}")));
    }
    if let Some((id, _)) = channels.iter().find(|(_, c)| c.input_dim() != d || c.output_dim() != d) {
        return Err(Error::DimensionMismatch(format!("channel `{id}` does not act on dimension {d}")));
    }
    if channels.iter().any(|(id, _)| id.is_identity()) {
        return Err(Error::Precondition(format!("channel id `{}` is reserved", TransId::IDENTITY)));
    }
    let mut theory = OperationalTheory::new(
        states.iter().map(|(id, _)| id.clone()).collect(),
        channels.iter().map(|(id, _)| id.clone()).collect(),
        povms.iter().map(|(id, m)| MeasSpec { id: id.clone(), arity: m.outcomes() }).collect(),
    )?;
    let mut all: Vec<(TransId, Option<&Channel>)> = vec![(TransId::identity(), None)];
    all.extend(channels.iter().map(|(id, c)| (id.clone(), Some(c))));
    for (pid, rho) in states {
        for (tid, chan) in &all {
            let out = match chan {
                Some(c) => c.apply(rho)?,
                None => rho.clone(),
            };
            for (mid, povm) in povms {
                theory.set_row(pid, tid, mid, tidy(povm.probabilities(&out)?))?;
            }
        }
    }
    Ok(theory)
}

/// `p(a|x) = Tr((M^{x₁}_{a₁} ⊗ … ⊗ M^{xₙ}_{aₙ}) ρ)` with `settings[k]` the
/// POVMs of party k acting on subsystem k of `state`.
pub fn born_box(state: &DensityMatrix, settings: &[Vec<Povm>]) -> Result<CorrelationBox<f64>> {
    let dims = state.dims();
    if dims.len() != settings.len() {
        return Err(Error::DimensionMismatch(format!("{} parties but state has subsystems {dims:?}", settings.len())));
    }
    for (k, povms) in settings.iter().enumerate() {
        if povms.is_empty() {
            return Err(Error::ArityMismatch(format!("party {k} has no settings")));
        }
        if let Some(m) = povms.iter().find(|m| m.dim() != dims[k]) {
            return Err(Error::DimensionMismatch(format!(
                "party {k} POVM on dimension {} but subsystem has dimension {}",
                m.dim(),
                dims[k]
            )));
        }
    }
    let counts: Vec<usize> = settings.iter().map(Vec::len).collect();
    let outcomes: Vec<Vec<usize>> = settings.iter().map(|s| s.iter().map(Povm::outcomes).collect()).collect();
    let rows: usize = counts.iter().product();
    let mut table = Vec::with_capacity(rows);
    for flat in 0..rows {
        let x = unflatten(flat, &counts);
        let arities: Vec<usize> = x.iter().enumerate().map(|(k, &xk)| outcomes[k][xk]).collect();
        let size: usize = arities.iter().product();
        let row = (0..size)
            .map(|o| {
                let a = unflatten(o, &arities);
                let op = kron_all(a.iter().enumerate().map(|(k, &ak)| &settings[k][x[k]].elements()[ak]));
                state.expectation(&op)
            })
            .collect();
        table.push(tidy(row));
    }
    CorrelationBox::new(counts, outcomes, table)
}

/// Two-party [`born_box`].
pub fn bipartite_box(state: &DensityMatrix, povms_a: &[Povm], povms_b: &[Povm]) -> Result<CorrelationBox<f64>> {
    born_box(state, &[povms_a.to_vec(), povms_b.to_vec()])
}
