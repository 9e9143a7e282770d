use serde::Serialize;

use super::chsh::{chsh_with, side_choices, spectator_choices, ChshSettings, ChshValue, PartyPair};
use super::CorrelationBox;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonogamyKind {
    /// `𝓑_AB + 𝓑_BC ≤ 4`
    Ns,
    /// `𝓑_AB² + 𝓑_BC² ≤ 8`
    Strong,
}

impl MonogamyKind {
    pub fn bound(self) -> f64 {
        match self {
            MonogamyKind::Ns => 4.0,
            MonogamyKind::Strong => 8.0,
        }
    }

    fn combine<S: Scalar>(self, u: &S, v: &S) -> S {
        match self {
            MonogamyKind::Ns => u.clone() + v.clone(),
            MonogamyKind::Strong => u.clone() * u.clone() + v.clone() * v.clone(),
        }
    }
}

/// The measurement choice attaining the largest left-hand side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonogamyWitness {
    /// The party shared by both CHSH terms.
    pub hub: usize,
    pub first: ChshSettings,
    pub second: ChshSettings,
    pub first_value: f64,
    pub second_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonogamyReport {
    pub kind: MonogamyKind,
    pub holds: bool,
    pub value: f64,
    pub bound: f64,
    pub witness: MonogamyWitness,
}

/// Largest CHSH value between `other` and `hub` with the hub's measurements fixed.
fn best_against<S: Scalar>(
    bx: &CorrelationBox<S>,
    hub: usize,
    other: usize,
    hub_side: &([usize; 2], [bool; 2]),
) -> Result<Option<ChshValue<S>>> {
    let pair = PartyPair(other, hub);
    let mut best: Option<ChshValue<S>> = None;
    for spectators in spectator_choices(bx, pair) {
        for (first, flip_first) in side_choices(bx.settings()[other]) {
            if first.iter().any(|&x| bx.outcomes()[other][x] != 2) {
                continue;
            }
            let s = ChshSettings {
                parties: pair,
                first,
                second: hub_side.0,
                flip_first,
                flip_second: hub_side.1,
                spectators: spectators.clone(),
            };
            let v = chsh_with(bx, &s)?;
            if best.as_ref().is_none_or(|b| v.value > b.value) {
                best = Some(v);
            }
        }
    }
    Ok(best)
}

fn check<S: Scalar>(bx: &CorrelationBox<S>, kind: MonogamyKind, tol: &S) -> Result<MonogamyReport> {
    if bx.parties() != 3 {
        return Err(Error::Unsupported(format!("monogamy needs a tripartite box, got {} parties", bx.parties())));
    }
    let mut best: Option<(S, MonogamyWitness)> = None;
    for hub in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&k| k != hub).collect();
        for hub_side in side_choices(bx.settings()[hub]) {
            if hub_side.0.iter().any(|&x| bx.outcomes()[hub][x] != 2) {
                continue;
            }
            // With the hub fixed the two terms are independent, and flipping
            // the other party keeps each maximum nonnegative, so maximizing
            // each term also maximizes both combinations.
            let (Some(u), Some(v)) =
                (best_against(bx, hub, others[0], &hub_side)?, best_against(bx, hub, others[1], &hub_side)?)
            else {
                continue;
            };
            let total = kind.combine(&u.value, &v.value);
            if best.as_ref().is_none_or(|b| total > b.0) {
                let witness = MonogamyWitness {
                    hub,
                    first_value: u.value.to_f64_lossy(),
                    second_value: v.value.to_f64_lossy(),
                    first: u.settings.expect("box value"),
                    second: v.settings.expect("box value"),
                };
                best = Some((total, witness));
            }
        }
    }
    let (total, witness) = best.ok_or_else(|| Error::Unsupported("no two-outcome settings for CHSH".into()))?;
    let bound = S::from_usize_exact(kind.bound() as usize);
    Ok(MonogamyReport {
        kind,
        holds: total <= bound + tol.clone(),
        value: total.to_f64_lossy(),
        bound: kind.bound(),
        witness,
    })
}

/// `𝓑_AB + 𝓑_BC ≤ 4 + tol` for every hub and every choice of the box's settings.
pub fn check_ns_monogamy<S: Scalar>(bx: &CorrelationBox<S>, tol: &S) -> Result<MonogamyReport> {
    check(bx, MonogamyKind::Ns, tol)
}

/// `𝓑_AB² + 𝓑_BC² ≤ 8 + tol` for every hub and every choice of the box's settings.
pub fn check_strong_monogamy<S: Scalar>(bx: &CorrelationBox<S>, tol: &S) -> Result<MonogamyReport> {
    check(bx, MonogamyKind::Strong, tol)
}

#[cfg(test)]
mod tests {
    use super::super::library::*;
    use super::*;
    use crate::Exact;

    fn exact(n: i64) -> Exact {
        Exact::from_integer(n.into())
    }

    #[test]
    fn shared_bit_saturates_both() {
        let bx = shared_bit::<Exact>(3);
        let ns = check_ns_monogamy(&bx, &exact(0)).unwrap();
        assert!(ns.holds);
        assert_eq!(ns.value, 4.0);
        let strong = check_strong_monogamy(&bx, &exact(0)).unwrap();
        assert!(strong.holds);
        assert_eq!(strong.value, 8.0);
    }

    #[test]
    fn product_box_holds() {
        let bx = product::<f64>(&[vec![0.3, 0.9], vec![0.5, 0.1], vec![1.0, 0.0]]);
        assert!(check_ns_monogamy(&bx, &1e-12).unwrap().holds);
        assert!(check_strong_monogamy(&bx, &1e-12).unwrap().holds);
    }

    #[test]
    fn two_pr_boxes_sharing_a_hub_fail() {
        // p(abc|xyz) = ½ iff a⊕b = xy and a⊕c = xz: both pairs through A are PR boxes.
        let bx = CorrelationBox::from_fn(vec![2; 3], vec![vec![2, 2]; 3], |x, a| {
            if (a[0] ^ a[1]) == (x[0] & x[1]) && (a[0] ^ a[2]) == (x[0] & x[2]) {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        let ns = check_ns_monogamy(&bx, &1e-9).unwrap();
        assert!(!ns.holds);
        assert_eq!(ns.value, 8.0);
        assert_eq!(ns.witness.hub, 0);
        let strong = check_strong_monogamy(&bx, &1e-9).unwrap();
        assert!(!strong.holds);
        assert_eq!(strong.value, 32.0);
    }

    #[test]
    fn rejects_bipartite() {
        assert!(check_ns_monogamy(&pr_box::<f64>(), &0.0).is_err());
    }
}
