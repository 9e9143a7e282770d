//! The `(i, j, k)` preparation quadruple, the CHSH game strategy built on it,
//! and the fine-grained uncertainty bound for two orthogonal measurements.

use rand::Rng;
use serde::Serialize;

use crate::correlations::CorrelationBox;
use crate::error::{Error, Result};
use crate::quantum::born::born_box;
use crate::quantum::choi::{dressed_choi_state, QuantumEnsemble};
use crate::quantum::matrix::{eigh, outer};
use crate::quantum::random::seeded;
use crate::quantum::{Channel, DensityMatrix, Povm};
use crate::scalar::Scalar;
use crate::theory::{MeasId, OperationalTheory, PrepId, TransId};

/// Optimal quantum CHSH-game win probability, `cos²(π/8)`.
pub const TSIRELSON_WIN: f64 = 0.853_553_390_593_273_8;
/// `1 + 1/√2`.
pub const FINEGRAINED_BOUND: f64 = 1.707_106_781_186_547_5;
/// Allowed deviation of `p(a|c)` from `½` in a game strategy.
pub const MARGINAL_TOL: f64 = 1e-6;

/// Outcome-0 probabilities of a preparation for `M₁`, `M₂`, `M₃`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UncertaintyTriple<S> {
    pub i: S,
    pub j: S,
    pub k: S,
}

impl<S: Scalar> UncertaintyTriple<S> {
    pub fn new(i: S, j: S, k: S) -> Result<Self> {
        for (name, v) in [("i", &i), ("j", &j), ("k", &k)] {
            if *v < S::zero() || *v > S::one() {
                return Err(Error::InvalidProbability(format!("{name} = {v:?} is outside [0,1]")));
            }
        }
        Ok(Self { i, j, k })
    }

    /// `p(0|M_{d+1})` for `d ∈ {0, 1}`.
    fn outcome0(&self, d: usize) -> &S {
        if d == 0 {
            &self.i
        } else {
            &self.j
        }
    }
}

/// `[P_a, P_b, P_c, P_d]` with `P_a = (i,j,k)`, `P_b = (1−i,1−j,k)`,
/// `P_c = (i,1−j,k)`, `P_d = (1−i,j,k)`.
pub fn build_quadruple<S: Scalar>(t: &UncertaintyTriple<S>) -> [UncertaintyTriple<S>; 4] {
    let ni = S::one() - t.i.clone();
    let nj = S::one() - t.j.clone();
    let k = t.k.clone();
    [
        t.clone(),
        UncertaintyTriple { i: ni.clone(), j: nj.clone(), k: k.clone() },
        UncertaintyTriple { i: t.i.clone(), j: nj, k: k.clone() },
        UncertaintyTriple { i: ni, j: t.j.clone(), k },
    ]
}

/// `(i + j) / 2`.
pub fn win_probability<S: Scalar>(t: &UncertaintyTriple<S>) -> S {
    (t.i.clone() + t.j.clone()) * S::half()
}

/// Index into the quadruple of the state Bob holds after Alice measures
/// `S_c` and sees `a`.
fn steered(c: usize, a: usize) -> usize {
    2 * c + a
}

/// A two-party strategy: Alice's input `c` and Bob's input `d` select the
/// settings of a binary box.
#[derive(Clone, Debug)]
pub struct GameStrategy<S> {
    bx: CorrelationBox<S>,
}

impl<S: Scalar> GameStrategy<S> {
    /// Accepts a bipartite binary box with two settings per party whose
    /// Alice marginals are uniform.
    pub fn new(bx: CorrelationBox<S>) -> Result<Self> {
        check_game_shape(&bx)?;
        let tol = S::from_f64_lossy(MARGINAL_TOL);
        for c in 0..2 {
            let marg = bx.marginal(&[0], &[c, 0])?;
            for (a, p) in marg.iter().enumerate() {
                if (p.clone() - S::half()).abs() > tol {
                    return Err(Error::Strategy(format!("p(a={a}|c={c}) = {p:?}, expected 1/2")));
                }
            }
        }
        Ok(Self { bx })
    }

    /// Table-level strategy: `p(a,b|c,d) = ½ q(b | P_{c,a}, M_{d+1})` over
    /// the quadruple of `t`.
    pub fn from_triple(t: &UncertaintyTriple<S>) -> Self {
        let quad = build_quadruple(t);
        let (settings, outcomes) = CorrelationBox::<S>::uniform_shape(2, 2, 2);
        let bx = CorrelationBox::from_fn(settings, outcomes, |x, a| {
            let p0 = quad[steered(x[0], a[0])].outcome0(x[1]).clone();
            let q = if a[1] == 0 { p0 } else { S::one() - p0 };
            q * S::half()
        })
        .expect("game box shape");
        Self { bx }
    }

    pub fn correlation_box(&self) -> &CorrelationBox<S> {
        &self.bx
    }

    pub fn simulate(&self, seed: u64, rounds: usize, tol: f64) -> Result<GameReport> {
        simulate_game(&self.bx, seed, rounds, tol)
    }
}

/// Quantum realization of the strategy: a bipartite state, Alice's
/// measurements `S₀, S₁` and Bob's `M₁, M₂`.
#[derive(Clone, Debug)]
pub struct QuantumStrategy {
    pub state: DensityMatrix,
    pub alice: [Povm; 2],
    pub bob: [Povm; 2],
}

impl QuantumStrategy {
    /// Qubit construction from the Bloch vector `r` of `P_a`, with
    /// `M₁ = X`, `M₂ = Z`, `M₃ = Y`. Both halves of the quadruple average to
    /// the same state `χ`; the joint state is the dressed Choi state of the
    /// identity channel on `χ`, and `S_c` is the transposed pretty-good
    /// measurement of `{P_{c,0}, P_{c,1}}`.
    pub fn from_bloch(r: [f64; 3]) -> Result<(Self, UncertaintyTriple<f64>)> {
        let [rx, ry, rz] = r;
        let quad = [[rx, ry, rz], [-rx, ry, -rz], [rx, ry, -rz], [-rx, ry, rz]]
            .into_iter()
            .map(DensityMatrix::bloch)
            .collect::<Result<Vec<_>>>()?;
        let half = [0.5, 0.5];
        let e0 = QuantumEnsemble::from_branches(&half, &quad[0..2])?;
        let e1 = QuantumEnsemble::from_branches(&half, &quad[2..4])?;
        let state = dressed_choi_state(&e0.average, &Channel::identity(2), &[2])?;
        let triple = UncertaintyTriple::new(
            ((1.0 + rx) / 2.0).clamp(0.0, 1.0),
            ((1.0 + rz) / 2.0).clamp(0.0, 1.0),
            ((1.0 + ry) / 2.0).clamp(0.0, 1.0),
        )?;
        let strategy =
            Self { state, alice: [e0.povm.transpose(), e1.povm.transpose()], bob: [Povm::pauli_x(), Povm::pauli_z()] };
        Ok((strategy, triple))
    }

    pub fn correlation_box(&self) -> Result<CorrelationBox<f64>> {
        born_box(&self.state, &[self.alice.to_vec(), self.bob.to_vec()])
    }

    pub fn game(&self) -> Result<GameStrategy<f64>> {
        GameStrategy::new(self.correlation_box()?)
    }
}

fn check_game_shape<S: Scalar>(bx: &CorrelationBox<S>) -> Result<()> {
    if bx.parties() != 2 || bx.settings().iter().any(|&s| s < 2) || !bx.is_binary() {
        return Err(Error::Strategy(format!(
            "game needs a bipartite binary box with two settings per party, got settings {:?}",
            bx.settings()
        )));
    }
    Ok(())
}

/// Exact and sampled win rates of a box in the CHSH game with uniform
/// inputs; settings `0, 1` of each party answer inputs `0, 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameReport {
    pub exact_rate: f64,
    pub empirical_rate: f64,
    pub rounds: usize,
    pub seed: u64,
    /// Quantum optimum `cos²(π/8)`.
    pub bound: f64,
    /// `exact_rate ≤ bound + tol`.
    pub pass: bool,
    /// `|exact_rate − empirical_rate|`.
    pub sampling_gap: f64,
    /// `4/√rounds`.
    pub sampling_tol: f64,
}

/// `¼ Σ_{c,d} Σ_{a⊕b=cd} p(a,b|c,d)`, plus a seeded Monte Carlo estimate.
/// No marginal condition is imposed on the box.
#[allow(clippy::needless_range_loop)]
pub fn simulate_game<S: Scalar>(bx: &CorrelationBox<S>, seed: u64, rounds: usize, tol: f64) -> Result<GameReport> {
    check_game_shape(bx)?;
    let mut rows = [[[0.0; 4]; 2]; 2];
    let mut exact = 0.0;
    for c in 0..2 {
        for d in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let p = bx.prob(&[c, d], &[a, b])?.to_f64_lossy();
                    rows[c][d][2 * a + b] = p;
                    if a ^ b == c & d {
                        exact += p / 4.0;
                    }
                }
            }
        }
    }
    let mut rng = seeded(seed);
    let mut wins = 0usize;
    for _ in 0..rounds {
        let (c, d) = (rng.random_range(0..2), rng.random_range(0..2));
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = 3;
        for (ab, p) in rows[c][d].iter().enumerate() {
            acc += p;
            if u < acc {
                pick = ab;
                break;
            }
        }
        if (pick >> 1) ^ (pick & 1) == c & d {
            wins += 1;
        }
    }
    let empirical = if rounds == 0 { f64::NAN } else { wins as f64 / rounds as f64 };
    let sampling_tol = if rounds == 0 { f64::INFINITY } else { 4.0 / (rounds as f64).sqrt() };
    Ok(GameReport {
        exact_rate: exact,
        empirical_rate: empirical,
        rounds,
        seed,
        bound: TSIRELSON_WIN,
        pass: exact <= TSIRELSON_WIN + tol,
        sampling_gap: (exact - empirical).abs(),
        sampling_tol,
    })
}

fn binary_row<S: Scalar>(theory: &OperationalTheory<S>, p: &PrepId, t: &TransId, m: &MeasId) -> Result<Vec<S>> {
    if theory.arity(m)? != 2 {
        return Err(Error::Unsupported(format!("`{m}` is not a two-outcome measurement")));
    }
    theory.outcome_distribution(p, t, m)
}

/// The preparation maximizing `p(0|M₁) + p(0|M₂)` and its triple, `k`
/// read from `M₃`. Ties go to the first preparation.
pub fn harvest_triple<S: Scalar>(
    theory: &OperationalTheory<S>,
    m1: &MeasId,
    m2: &MeasId,
    m3: &MeasId,
) -> Result<(PrepId, UncertaintyTriple<S>)> {
    let id = TransId::identity();
    let mut best: Option<(PrepId, UncertaintyTriple<S>)> = None;
    for p in theory.preparations() {
        let i = binary_row(theory, p, &id, m1)?[0].clone();
        let j = binary_row(theory, p, &id, m2)?[0].clone();
        let k = binary_row(theory, p, &id, m3)?[0].clone();
        let better = match &best {
            None => true,
            Some((_, t)) => i.clone() + j.clone() > t.i.clone() + t.j.clone(),
        };
        if better {
            best = Some((p.clone(), UncertaintyTriple::new(i, j, k)?));
        }
    }
    best.ok_or_else(|| Error::Precondition("theory has no preparations".into()))
}

/// `max_ρ Tr(ρ(M₁⁰ + M₂⁰))`: the top eigenvalue and an optimal pure state.
pub fn quantum_max_sum(m1: &Povm, m2: &Povm) -> Result<(f64, DensityMatrix)> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch("measurements act on different dimensions".into()));
    }
    let (vals, vecs) = eigh(&(&m1.elements()[0] + &m2.elements()[0]));
    let top = (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("nonempty spectrum");
    let ket: Vec<_> = vecs.column(top).iter().copied().collect();
    Ok((vals[top], DensityMatrix::new(outer(&ket))?))
}

/// One `(P, T, m, n)` case of the fine-grained check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinegrainedCase<S> {
    pub prep: PrepId,
    pub trans: TransId,
    pub m: usize,
    pub n: usize,
    /// `p(m|M₁) + p(n|M₂)`.
    pub value: S,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinegrainedReport<S> {
    pub holds: bool,
    pub bound: f64,
    pub worst: FinegrainedCase<S>,
    pub cases: Vec<FinegrainedCase<S>>,
}

/// Checks `p(m|M₁) + p(n|M₂) ≤ 1 + 1/√2 + tol` for every preparation,
/// every transformation with both rows defined, and every outcome pair.
/// Requires a claimed dimension of 2 and orthogonal `M₁`, `M₂`.
pub fn check_finegrained<S: Scalar>(
    theory: &OperationalTheory<S>,
    m1: &MeasId,
    m2: &MeasId,
    tol: &S,
) -> Result<FinegrainedReport<S>> {
    let dim = theory.affine_dimension();
    if dim.claimed_dimension != Some(2) {
        return Err(Error::Precondition(format!(
            "fine-grained bound needs a dimension-2 theory; affine parameter count is {}",
            dim.affine_parameter_count
        )));
    }
    if !theory.are_orthogonal(m1, m2)? {
        return Err(Error::Precondition(format!("`{m1}` and `{m2}` are not orthogonal")));
    }
    let limit = S::from_f64_lossy(FINEGRAINED_BOUND) + tol.clone();
    let mut cases = Vec::new();
    for p in theory.preparations() {
        for t in theory.transformations() {
            let (Ok(r1), Ok(r2)) = (binary_row(theory, p, t, m1), binary_row(theory, p, t, m2)) else {
                continue;
            };
            for (m, a) in r1.iter().enumerate() {
                for (n, b) in r2.iter().enumerate() {
                    let value = a.clone() + b.clone();
                    cases.push(FinegrainedCase {
                        prep: p.clone(),
                        trans: t.clone(),
                        m,
                        n,
                        pass: value <= limit,
                        value,
                    });
                }
            }
        }
    }
    let worst = cases
        .iter()
        .fold(None::<&FinegrainedCase<S>>, |w, c| match w {
            Some(w) if w.value >= c.value => Some(w),
            _ => Some(c),
        })
        .cloned()
        .ok_or_else(|| Error::Precondition("theory has no preparations".into()))?;
    Ok(FinegrainedReport { holds: worst.pass, bound: FINEGRAINED_BOUND, worst, cases })
}
