use serde::Serialize;

use super::CorrelationBox;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{EnsemblePreparation, MeasId, OperationalTheory, TransId};

/// Two distinct parties of a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PartyPair(pub usize, pub usize);

/// A concrete choice of the four measurements entering a CHSH expression.
///
/// Outcome `a` is valued `(−1)^a`, or `−(−1)^a` when the corresponding flip
/// is set (a deterministic relabeling of that setting's outcomes).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChshSettings {
    pub parties: PartyPair,
    pub first: [usize; 2],
    pub second: [usize; 2],
    pub flip_first: [bool; 2],
    pub flip_second: [bool; 2],
    /// Settings of the remaining parties while the pair is measured; entries
    /// for the pair itself are ignored.
    pub spectators: Vec<usize>,
}

impl ChshSettings {
    pub fn plain(parties: PartyPair, first: [usize; 2], second: [usize; 2], n: usize) -> Self {
        Self { parties, first, second, flip_first: [false; 2], flip_second: [false; 2], spectators: vec![0; n] }
    }

    fn labels(&self) -> Vec<String> {
        let tag = |p: usize, x: usize, f: bool| format!("P{p}:{x}{}", if f { "'" } else { "" });
        vec![
            tag(self.parties.0, self.first[0], self.flip_first[0]),
            tag(self.parties.0, self.first[1], self.flip_first[1]),
            tag(self.parties.1, self.second[0], self.flip_second[0]),
            tag(self.parties.1, self.second[1], self.flip_second[1]),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChshValue<S> {
    pub value: S,
    /// Human-readable identifiers of the two measurements per side.
    pub settings_used: Vec<String>,
    /// Box-level settings, when the value comes from a box.
    pub settings: Option<ChshSettings>,
}

fn sign<S: Scalar>(negative: bool) -> S {
    if negative {
        -S::one()
    } else {
        S::one()
    }
}

/// `E(xᵢ, xⱼ) = Σ (−1)^{a⊕b} p(a, b | x)` over the pair marginal.
fn correlator<S: Scalar>(
    bx: &CorrelationBox<S>,
    pair: PartyPair,
    xi: usize,
    xj: usize,
    spectators: &[usize],
) -> Result<S> {
    let PartyPair(i, j) = pair;
    let mut x = spectators.to_vec();
    x.resize(bx.parties(), 0);
    x[i] = xi;
    x[j] = xj;
    if bx.outcomes()[i][xi] != 2 || bx.outcomes()[j][xj] != 2 {
        return Err(Error::Unsupported("CHSH needs two-outcome settings".into()));
    }
    let keep = [i.min(j), i.max(j)];
    let m = bx.marginal(&keep, &x)?;
    Ok(m[0].clone() - m[1].clone() - m[2].clone() + m[3].clone())
}

fn check_pair<S: Scalar>(bx: &CorrelationBox<S>, pair: PartyPair) -> Result<()> {
    let PartyPair(i, j) = pair;
    if i == j || i >= bx.parties() || j >= bx.parties() {
        return Err(Error::ArityMismatch(format!("invalid party pair ({i}, {j})")));
    }
    Ok(())
}

/// `E(a0,b0) + E(a0,b1) + E(a1,b0) − E(a1,b1)` for the given settings.
pub fn chsh_with<S: Scalar>(bx: &CorrelationBox<S>, s: &ChshSettings) -> Result<ChshValue<S>> {
    check_pair(bx, s.parties)?;
    let mut value = S::zero();
    for (u, &xa) in s.first.iter().enumerate() {
        for (v, &xb) in s.second.iter().enumerate() {
            let e = correlator(bx, s.parties, xa, xb, &s.spectators)?;
            let negate = (u == 1 && v == 1) ^ s.flip_first[u] ^ s.flip_second[v];
            value = value + sign::<S>(negate) * e;
        }
    }
    Ok(ChshValue { value, settings_used: s.labels(), settings: Some(s.clone()) })
}

/// CHSH value of parties `(i, j)` with settings `a` and `b`, other parties at setting 0.
pub fn chsh<S: Scalar>(
    bx: &CorrelationBox<S>,
    i: usize,
    j: usize,
    a: [usize; 2],
    b: [usize; 2],
) -> Result<ChshValue<S>> {
    chsh_with(bx, &ChshSettings::plain(PartyPair(i, j), a, b, bx.parties()))
}

/// All ordered setting pairs (repetition allowed) with every outcome relabeling.
pub(crate) fn side_choices(settings: usize) -> Vec<([usize; 2], [bool; 2])> {
    let mut out = Vec::new();
    for x0 in 0..settings {
        for x1 in 0..settings {
            for f in 0..4u8 {
                out.push(([x0, x1], [f & 1 == 1, f & 2 == 2]));
            }
        }
    }
    out
}

/// All assignments of settings to the parties outside `pair`.
pub(crate) fn spectator_choices<S: Scalar>(bx: &CorrelationBox<S>, pair: PartyPair) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; bx.parties()]];
    for k in 0..bx.parties() {
        if k == pair.0 || k == pair.1 {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..bx.settings()[k]).map(move |s| {
                    let mut t = t.clone();
                    t[k] = s;
                    t
                })
            })
            .collect();
    }
    out
}

/// Largest CHSH value of the pair over the box's settings, outcome
/// relabelings and spectator settings.
pub fn max_chsh<S: Scalar>(bx: &CorrelationBox<S>, i: usize, j: usize) -> Result<ChshValue<S>> {
    let pair = PartyPair(i, j);
    check_pair(bx, pair)?;
    let mut best: Option<ChshValue<S>> = None;
    let firsts = side_choices(bx.settings()[i]);
    let seconds = side_choices(bx.settings()[j]);
    for spectators in spectator_choices(bx, pair) {
        for (first, flip_first) in &firsts {
            if first.iter().any(|&x| bx.outcomes()[i][x] != 2) {
                continue;
            }
            for (second, flip_second) in &seconds {
                if second.iter().any(|&x| bx.outcomes()[j][x] != 2) {
                    continue;
                }
                let s = ChshSettings {
                    parties: pair,
                    first: *first,
                    second: *second,
                    flip_first: *flip_first,
                    flip_second: *flip_second,
                    spectators: spectators.clone(),
                };
                let v = chsh_with(bx, &s)?;
                if best.as_ref().is_none_or(|b| v.value > b.value) {
                    best = Some(v);
                }
            }
        }
    }
    best.ok_or_else(|| Error::Unsupported("no two-outcome settings for CHSH".into()))
}

/// Whether some pair of parties violates CHSH ≤ 2 by more than `tol`;
/// returns the largest value found as witness.
pub fn is_bell_nonlocal<S: Scalar>(bx: &CorrelationBox<S>, tol: &S) -> Result<(bool, ChshValue<S>)> {
    if bx.parties() < 2 {
        return Err(Error::Unsupported("Bell nonlocality needs at least two parties".into()));
    }
    let mut best: Option<ChshValue<S>> = None;
    for i in 0..bx.parties() {
        for j in i + 1..bx.parties() {
            let v = max_chsh(bx, i, j)?;
            if best.as_ref().is_none_or(|b| v.value > b.value) {
                best = Some(v);
            }
        }
    }
    let best = best.expect("at least one pair");
    let two = S::one() + S::one();
    Ok((best.value > two + tol.clone(), best))
}

/// CHSH quantity for two binary ensemble preparations followed by `trans`
/// and one of two binary measurements; the ensemble branch index stands in
/// for the first party's outcome.
pub fn chsh_prepare_measure<S: Scalar>(
    theory: &OperationalTheory<S>,
    ens0: &EnsemblePreparation<S>,
    ens1: &EnsemblePreparation<S>,
    trans: &TransId,
    m0: &MeasId,
    m1: &MeasId,
) -> Result<ChshValue<S>> {
    for ens in [ens0, ens1] {
        if ens.len() != 2 {
            return Err(Error::Unsupported(format!("ensemble has {} branches; CHSH needs 2", ens.len())));
        }
    }
    for m in [m0, m1] {
        if theory.arity(m)? != 2 {
            return Err(Error::Unsupported(format!("measurement `{m}` is not two-outcome")));
        }
    }
    let mut value = S::zero();
    for (u, ens) in [ens0, ens1].into_iter().enumerate() {
        for (v, m) in [m0, m1].into_iter().enumerate() {
            let joint = theory.ensemble_joint(ens, std::slice::from_ref(trans), std::slice::from_ref(m))?;
            let p = joint.probs();
            let e = p[0].clone() - p[1].clone() - p[2].clone() + p[3].clone();
            value = value + sign::<S>(u == 1 && v == 1) * e;
        }
    }
    Ok(ChshValue {
        value,
        settings_used: vec!["P0".into(), "P1".into(), format!("{m0}@{trans}"), format!("{m1}@{trans}")],
        settings: None,
    })
}
