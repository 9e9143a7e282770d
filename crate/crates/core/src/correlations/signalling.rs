use serde::Serialize;

use super::CorrelationBox;
use crate::error::Result;
use crate::scalar::{max_of, Scalar};

/// Two setting tuples that agree on `subset` but induce different marginals there.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignallingWitness {
    pub subset: Vec<usize>,
    pub settings_a: Vec<usize>,
    pub settings_b: Vec<usize>,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoSignallingReport {
    pub no_signalling: bool,
    pub max_deviation: f64,
    pub witness: Option<SignallingWitness>,
}

/// Checks that the marginal of every proper nonempty subset of parties is
/// independent of the settings of the others, to within `tol` per entry.
pub fn check_no_signalling<S: Scalar>(bx: &CorrelationBox<S>, tol: &S) -> Result<NoSignallingReport> {
    let n = bx.parties();
    let tuples: Vec<Vec<usize>> = bx.setting_tuples().collect();
    let mut worst = S::zero();
    let mut witness: Option<(SignallingWitness, S)> = None;
    for mask in 1..(1usize << n) - 1 {
        let subset: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        for (u, xa) in tuples.iter().enumerate() {
            for xb in &tuples[u + 1..] {
                if subset.iter().any(|&k| xa[k] != xb[k]) {
                    continue;
                }
                let ma = bx.marginal(&subset, xa)?;
                let mb = bx.marginal(&subset, xb)?;
                let dev = ma.iter().zip(&mb).map(|(p, q)| (p.clone() - q.clone()).abs()).fold(S::zero(), max_of);
                if dev > worst {
                    worst = dev.clone();
                    witness = Some((
                        SignallingWitness {
                            subset: subset.clone(),
                            settings_a: xa.clone(),
                            settings_b: xb.clone(),
                            deviation: dev.to_f64_lossy(),
                        },
                        dev,
                    ));
                }
            }
        }
    }
    let ok = worst <= *tol;
    Ok(NoSignallingReport {
        no_signalling: ok,
        max_deviation: worst.to_f64_lossy(),
        witness: if ok { None } else { witness.map(|w| w.0) },
    })
}

#[cfg(test)]
mod tests {
    use super::super::library::*;
    use super::*;
    use crate::Exact;

    #[test]
    fn standard_boxes_are_no_signalling() {
        let zero = Exact::from_integer(0.into());
        assert!(check_no_signalling(&pr_box::<Exact>(), &zero).unwrap().no_signalling);
        assert!(check_no_signalling(&shared_bit::<Exact>(3), &zero).unwrap().no_signalling);
        assert!(check_no_signalling(&isotropic(0.3), &1e-12).unwrap().no_signalling);
    }

    #[test]
    fn signalling_box_is_caught() {
        let r = check_no_signalling(&signalling_box::<f64>(), &1e-9).unwrap();
        assert!(!r.no_signalling);
        assert_eq!(r.max_deviation, 1.0);
        let w = r.witness.unwrap();
        assert_eq!(w.subset, vec![0]);
        assert_eq!(w.settings_a[0], w.settings_b[0]);
        assert_ne!(w.settings_a[1], w.settings_b[1]);
    }

    #[test]
    fn tripartite_signalling_from_pair_to_third() {
        // party 2 outputs x0 xor x1: each single marginal of 2 depends on the others
        let bx = CorrelationBox::from_fn(vec![2; 3], vec![vec![2, 2]; 3], |x, a| {
            if a[2] == x[0] ^ x[1] && a[0] == 0 && a[1] == 0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let r = check_no_signalling(&bx, &1e-9).unwrap();
        assert!(!r.no_signalling);
        assert!(r.witness.unwrap().subset.contains(&2));
    }
}
