//! Broadcasting of state families, the commutation predicate, and the
//! tripartite box obtained by copying an ensemble branch to two wings.

use rand::Rng;
use serde::Serialize;

use crate::correlations::{
    check_ns_monogamy, check_strong_monogamy, chsh_with, is_bell_nonlocal, ChshSettings, CorrelationBox,
    MonogamyReport, PartyPair,
};
use crate::error::{Error, Result};
use crate::quantum::matrix::{c, dagger, eigh, max_abs, CMat};
use crate::quantum::random::seeded;
use crate::quantum::{Channel, DensityMatrix};
use crate::scalar::Scalar;

/// Default commutator tolerance.
pub const COMMUTE_TOL: f64 = 1e-10;
/// Seed of the random combinations used for simultaneous diagonalization.
const DIAG_SEED: u64 = 0x5eed_b0ad;
const MAX_DEPTH: usize = 32;

fn same_dimension(states: &[DensityMatrix]) -> Result<()> {
    if let Some(s) = states.iter().find(|s| s.dim() != states[0].dim()) {
        return Err(Error::DimensionMismatch(format!("states of dimension {} and {}", states[0].dim(), s.dim())));
    }
    Ok(())
}

/// Largest entry of any commutator `ρᵢρⱼ − ρⱼρᵢ`.
pub fn max_commutator(states: &[DensityMatrix]) -> Result<f64> {
    same_dimension(states)?;
    let mut worst: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            let (a, b) = (a.matrix(), b.matrix());
            worst = worst.max(max_abs(&(a * b - b * a)));
        }
    }
    Ok(worst)
}

/// Every pair of states commutes to within `tol` in max-norm.
pub fn pairwise_commuting(states: &[DensityMatrix], tol: f64) -> Result<bool> {
    Ok(max_commutator(states)? <= tol)
}

/// Whether the family fails to commute, i.e. cannot be broadcast.
pub fn interference_flag(states: &[DensityMatrix], tol: f64) -> Result<bool> {
    Ok(!pairwise_commuting(states, tol)?)
}

/// Per-state marginal errors of a candidate broadcasting channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BroadcastCheck {
    /// `max(D(Tr_B M(ρ), ρ), D(Tr_A M(ρ), ρ))` per input, `D` the trace distance.
    pub errors: Vec<f64>,
    pub max_error: f64,
}

/// Measures how well `chan` (from `d` to `d ⊗ d`) broadcasts each state.
pub fn check_broadcast(states: &[DensityMatrix], chan: &Channel) -> Result<BroadcastCheck> {
    same_dimension(states)?;
    let mut errors = Vec::with_capacity(states.len());
    for rho in states {
        let d = rho.dim();
        if chan.input_dim() != d || chan.output_dim() != d * d {
            return Err(Error::DimensionMismatch(format!("channel must map {d} to {d}x{d}")));
        }
        let out = chan.apply(rho)?.regrouped(vec![d, d])?;
        let e = out.reduced(&[0]).trace_distance(rho).max(out.reduced(&[1]).trace_distance(rho));
        errors.push(e);
    }
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(BroadcastCheck { errors, max_error })
}

/// Orthonormal columns diagonalizing every matrix in `ms` (all Hermitian
/// and mutually commuting), restricted to the span of `basis`.
fn common_eigenbasis(ms: &[CMat], basis: CMat, rng: &mut impl Rng, depth: usize) -> Result<Vec<CMat>> {
    let m = basis.ncols();
    let restricted: Vec<CMat> = ms.iter().map(|a| dagger(&basis) * a * &basis).collect();
    let scalar_block = restricted.iter().all(|r| {
        let mean = r.trace() / c(m as f64);
        max_abs(&(r - CMat::identity(m, m) * mean)) <= 1e-9
    });
    if m == 1 || scalar_block {
        return Ok((0..m).map(|k| basis.columns(k, 1).into_owned()).collect());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Precondition("simultaneous diagonalization did not converge".into()));
    }
    let mix = restricted.iter().fold(CMat::zeros(m, m), |acc, r| acc + r.scale(rng.random::<f64>() - 0.5));
    let (vals, vecs) = eigh(&mix);
    let scale = vals.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=m {
        if k == m || (vals[k] - vals[k - 1]).abs() > 1e-8 * scale {
            let block = vecs.columns(start, k - start).into_owned();
            out.extend(common_eigenbasis(ms, &basis * block, rng, depth + 1)?);
            start = k;
        }
    }
    Ok(out)
}

/// Measure-in-the-common-eigenbasis-and-prepare-twice channel for a
/// commuting family, with its marginal errors.
pub fn broadcast_commuting(states: &[DensityMatrix], tol: f64) -> Result<(Channel, BroadcastCheck)> {
    if states.is_empty() {
        return Err(Error::Precondition("no states to broadcast".into()));
    }
    let worst = max_commutator(states)?;
    if worst > tol {
        return Err(Error::Precondition(format!("states do not commute (commutator entry {worst:e})")));
    }
    let d = states[0].dim();
    let mats: Vec<CMat> = states.iter().map(|s| s.matrix().clone()).collect();
    let basis = common_eigenbasis(&mats, CMat::identity(d, d), &mut seeded(DIAG_SEED), 0)?;
    let kraus = basis
        .iter()
        .map(|e| {
            let ee = crate::quantum::matrix::kron(e, e);
            &ee * dagger(e)
        })
        .collect();
    let chan = Channel::new(kraus)?;
    let check = check_broadcast(states, &chan)?;
    Ok((chan, check))
}

/// `p(a,b,c|x,y,z) = p(a|x) p(b|a,x,y) p(c|a,x,z)`: the first party's
/// outcome conditions two independent copies of the second wing.
///
/// Requires the first party's marginal to be independent of the second
/// party's setting. Where `p(a|x) = 0` the conditional is irrelevant and
/// taken uniform.
#[allow(clippy::needless_range_loop)]
pub fn broadcast_extension<S: Scalar>(bx: &CorrelationBox<S>) -> Result<CorrelationBox<S>> {
    if bx.parties() != 2 {
        return Err(Error::Unsupported("broadcast extension needs a bipartite box".into()));
    }
    let (sa, sb) = (bx.settings()[0], bx.settings()[1]);
    let tol = S::from_f64_lossy(crate::theory::EPS_NORM);
    for x in 0..sa {
        let first = bx.marginal(&[0], &[x, 0])?;
        for y in 1..sb {
            let other = bx.marginal(&[0], &[x, y])?;
            if first.iter().zip(&other).any(|(p, q)| (p.clone() - q.clone()).abs() > tol) {
                return Err(Error::Precondition(format!(
                    "first party's marginal at setting {x} depends on the second's"
                )));
            }
        }
    }
    let outcomes = vec![bx.outcomes()[0].clone(), bx.outcomes()[1].clone(), bx.outcomes()[1].clone()];
    let conditional = |x: usize, y: usize, a: usize, b: usize| -> Result<S> {
        let pa = bx.marginal(&[0], &[x, y])?[a].clone();
        if pa <= S::from_f64_lossy(1e-15) {
            return Ok(S::one() / S::from_usize_exact(bx.outcomes()[1][y]));
        }
        Ok(bx.prob(&[x, y], &[a, b])? / pa)
    };
    let mut table = Vec::new();
    for x in 0..sa {
        for y in 0..sb {
            for z in 0..sb {
                let pa = bx.marginal(&[0], &[x, 0])?;
                let mut row = Vec::new();
                for a in 0..outcomes[0][x] {
                    for b in 0..outcomes[1][y] {
                        for cc in 0..outcomes[2][z] {
                            row.push(pa[a].clone() * conditional(x, y, a, b)? * conditional(x, z, a, cc)?);
                        }
                    }
                }
                table.push(row);
            }
        }
    }
    CorrelationBox::new(vec![sa, sb, sb], outcomes, table)
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    /// CHSH witness of the input box.
    pub witness: f64,
    pub ab: f64,
    pub ac: f64,
    pub squared_sum: f64,
    pub strong: MonogamyReport,
    pub ns: MonogamyReport,
}

/// The broadcast extension of a Bell-violating box, with both CHSH terms
/// through the first party evaluated at the witness settings and both
/// monogamy verdicts.
pub fn theorem1_construct<S: Scalar>(bx: &CorrelationBox<S>, tol: &S) -> Result<(CorrelationBox<S>, Theorem1Report)> {
    let (nonlocal, witness) = is_bell_nonlocal(bx, tol)?;
    if !nonlocal {
        return Err(Error::Precondition(format!("box does not violate CHSH ≤ 2 (largest value {:?})", witness.value)));
    }
    let ext = broadcast_extension(bx)?;
    let report = broadcast_report(&ext, witness.settings.as_ref().expect("box witness"), tol)?;
    Ok((ext, Theorem1Report { witness: witness.value.to_f64_lossy(), ..report }))
}

/// CHSH values of the pairs (0,1) and (0,2) of an extension at the given
/// bipartite settings, plus both monogamy verdicts.
pub fn broadcast_report<S: Scalar>(ext: &CorrelationBox<S>, s: &ChshSettings, tol: &S) -> Result<Theorem1Report> {
    let (first, second) = if s.parties == PartyPair(0, 1) {
        ((s.first, s.flip_first), (s.second, s.flip_second))
    } else {
        ((s.second, s.flip_second), (s.first, s.flip_first))
    };
    let term = |k: usize| {
        chsh_with(
            ext,
            &ChshSettings {
                parties: PartyPair(0, k),
                first: first.0,
                second: second.0,
                flip_first: first.1,
                flip_second: second.1,
                spectators: vec![0; 3],
            },
        )
    };
    let ab = term(1)?.value;
    let ac = term(2)?.value;
    let squared_sum = ab.clone() * ab.clone() + ac.clone() * ac.clone();
    Ok(Theorem1Report {
        witness: ab.to_f64_lossy(),
        ab: ab.to_f64_lossy(),
        ac: ac.to_f64_lossy(),
        squared_sum: squared_sum.to_f64_lossy(),
        strong: check_strong_monogamy(ext, tol)?,
        ns: check_ns_monogamy(ext, tol)?,
    })
}
