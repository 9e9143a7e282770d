//! Spatial (joint preparation, one measurement per party) and temporal
//! (ensemble preparation, channels, measurements) scenarios, with the
//! quantum constructions that turn one into the other.
//!
//! The channels `T₂…Tₙ` of a temporal scenario are applied simultaneously,
//! so they are held as one channel from the prepared system to the product
//! of the outputs; each `Tₖ` is its marginal.

use crate::correlations::{chsh, chsh_prepare_measure, ChshValue};
use crate::error::{Error, Result};
use crate::quantum::matrix::{kron_all, CMat};
use crate::quantum::{
    bipartite_box, born_box, born_table, conditional_channel, dressed_choi_state, leifer_ensemble, Channel,
    DensityMatrix, Povm, QuantumEnsemble,
};
use crate::scalar::Scalar;
use crate::theory::joint::{unflatten, Axis, JointDistribution};
use crate::theory::{EnsemblePreparation, MeasId, PrepId, TransId};

/// Supported party counts.
pub const MIN_PARTIES: usize = 2;
pub const MAX_PARTIES: usize = 3;

fn check_parties(n: usize) -> Result<()> {
    if !(MIN_PARTIES..=MAX_PARTIES).contains(&n) {
        return Err(Error::Unsupported(format!("{n} parties; {MIN_PARTIES} or {MAX_PARTIES} supported")));
    }
    Ok(())
}

/// A joint state measured once on each subsystem.
#[derive(Clone, Debug)]
pub struct SpatialScenario {
    pub state: DensityMatrix,
    pub measurements: Vec<Povm>,
}

impl SpatialScenario {
    pub fn new(state: DensityMatrix, measurements: Vec<Povm>) -> Result<Self> {
        check_parties(measurements.len())?;
        if state.dims().len() != measurements.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} measurements for subsystems {:?}",
                measurements.len(),
                state.dims()
            )));
        }
        if let Some((k, m)) = measurements.iter().enumerate().find(|(k, m)| m.dim() != state.dims()[*k]) {
            return Err(Error::DimensionMismatch(format!("measurement {k} acts on dimension {}", m.dim())));
        }
        Ok(Self { state, measurements })
    }

    pub fn parties(&self) -> usize {
        self.measurements.len()
    }

    /// `p(x₁…xₙ) = Tr((M₁ ⊗ … ⊗ Mₙ) ρ)`.
    pub fn distribution(&self) -> Result<JointDistribution<f64>> {
        let settings: Vec<Vec<Povm>> = self.measurements.iter().map(|m| vec![m.clone()]).collect();
        let bx = born_box(&self.state, &settings)?;
        let axes =
            (0..self.parties()).map(|k| Axis::new(format!("M{}", k + 1), self.measurements[k].outcomes())).collect();
        JointDistribution::new(axes, bx.table()[0].clone())
    }
}

/// An ensemble preparation, a channel to the remaining parties and their measurements.
#[derive(Clone, Debug)]
pub struct TemporalScenario {
    pub ensemble: QuantumEnsemble,
    pub channel: Channel,
    pub output_dims: Vec<usize>,
    pub measurements: Vec<Povm>,
}

impl TemporalScenario {
    pub fn new(
        ensemble: QuantumEnsemble,
        channel: Channel,
        output_dims: Vec<usize>,
        measurements: Vec<Povm>,
    ) -> Result<Self> {
        check_parties(measurements.len() + 1)?;
        if ensemble.average.dim() != channel.input_dim() {
            return Err(Error::DimensionMismatch("ensemble and channel input differ".into()));
        }
        if output_dims.len() != measurements.len() || output_dims.iter().product::<usize>() != channel.output_dim() {
            return Err(Error::DimensionMismatch(format!(
                "output split {output_dims:?} for {} measurements and channel output {}",
                measurements.len(),
                channel.output_dim()
            )));
        }
        if let Some((k, m)) = measurements.iter().enumerate().find(|(k, m)| m.dim() != output_dims[*k]) {
            return Err(Error::DimensionMismatch(format!("measurement {} acts on dimension {}", k + 2, m.dim())));
        }
        Ok(Self { ensemble, channel, output_dims, measurements })
    }

    pub fn parties(&self) -> usize {
        self.measurements.len() + 1
    }

    /// `p(i, x₂…xₙ) = p(i) Tr((M₂ ⊗ … ⊗ Mₙ) T(ρ_i))`.
    pub fn distribution(&self) -> Result<JointDistribution<f64>> {
        let branches = self.ensemble.branches()?;
        let mut axes = vec![Axis::new("branch", branches.weights.len())];
        axes.extend(self.measurements.iter().enumerate().map(|(k, m)| Axis::new(format!("M{}", k + 2), m.outcomes())));
        let out_arities: Vec<usize> = self.measurements.iter().map(Povm::outcomes).collect();
        let out_size: usize = out_arities.iter().product();
        let ops: Vec<CMat> = (0..out_size)
            .map(|o| {
                let a = unflatten(o, &out_arities);
                kron_all(a.iter().enumerate().map(|(k, &ak)| &self.measurements[k].elements()[ak]))
            })
            .collect();
        let mut probs = Vec::with_capacity(branches.weights.len() * out_size);
        for ((w, rho), &zero) in branches.weights.iter().zip(&branches.states).zip(&branches.zero_weight) {
            let out = self.channel.apply_operator(rho.matrix());
            for op in &ops {
                probs.push(if zero { 0.0 } else { w * (op * &out).trace().re.max(0.0) });
            }
        }
        JointDistribution::new(axes, probs)
    }
}

/// Temporal dual of a quantum spatial scenario: ensemble
/// `(ρ_Aᵀ, M₁ᵀ)`, channel read off the conditional state, same remaining
/// measurements.
pub fn spatial_to_temporal(s: &SpatialScenario) -> Result<TemporalScenario> {
    let rho_a = s.state.reduced(&[0]);
    let ensemble = QuantumEnsemble::new(rho_a.transpose(), s.measurements[0].transpose())?;
    let channel = conditional_channel(&s.state)?;
    TemporalScenario::new(ensemble, channel, s.state.dims()[1..].to_vec(), s.measurements[1..].to_vec())
}

/// Spatial dual of a quantum temporal scenario: the channel's Choi state
/// dressed by the ensemble average, first party measuring `Nᵀ`.
pub fn temporal_to_spatial(t: &TemporalScenario) -> Result<SpatialScenario> {
    let state = dressed_choi_state(&t.ensemble.average, &t.channel, &t.output_dims)?;
    let mut measurements = vec![t.ensemble.povm.transpose()];
    measurements.extend(t.measurements.iter().cloned());
    SpatialScenario::new(state, measurements)
}

/// Largest entrywise gap between two joint distributions of equal shape.
pub fn distribution_gap<S: Scalar>(a: &JointDistribution<S>, b: &JointDistribution<S>) -> Result<S> {
    a.max_abs_diff(b)
}

/// The two scenarios give the same joint distribution to within `tol`.
pub fn verify_ocj(spatial: &SpatialScenario, temporal: &TemporalScenario, tol: f64) -> Result<bool> {
    Ok(distribution_gap(&spatial.distribution()?, &temporal.distribution()?)? <= tol)
}

/// The CHSH value of `state` with settings `a`, `b`, computed both on the
/// bipartite box and in prepare-and-measure form on the temporal duals
/// (one ensemble per setting of the first party, shared channel).
pub fn chsh_both_forms(
    state: &DensityMatrix,
    a: &[Povm; 2],
    b: &[Povm; 2],
) -> Result<(ChshValue<f64>, ChshValue<f64>)> {
    let spatial = chsh(&bipartite_box(state, a, b)?, 0, 1, [0, 1], [0, 1])?;
    let duals = a
        .iter()
        .map(|m| spatial_to_temporal(&SpatialScenario::new(state.clone(), vec![m.clone(), b[0].clone()])?))
        .collect::<Result<Vec<_>>>()?;
    let mut preps = Vec::new();
    let mut ensembles = Vec::new();
    for (x, dual) in duals.iter().enumerate() {
        let br = leifer_ensemble(&dual.ensemble.average, &dual.ensemble.povm)?;
        let ids: Vec<PrepId> = (0..br.states.len()).map(|i| PrepId::from(format!("P{x}_{i}"))).collect();
        preps.extend(ids.iter().cloned().zip(br.states));
        ensembles.push(EnsemblePreparation::new(br.weights, ids)?);
    }
    let trans = TransId::from("T");
    let theory = born_table(
        &preps,
        &[(MeasId::from("O0"), b[0].clone()), (MeasId::from("O1"), b[1].clone())],
        &[(trans.clone(), duals[0].channel.clone())],
    )?;
    let temporal = chsh_prepare_measure(&theory, &ensembles[0], &ensembles[1], &trans, &"O0".into(), &"O1".into())?;
    Ok((spatial, temporal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::max_abs;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn bell_pair_in_z() {
        let s = SpatialScenario::new(DensityMatrix::phi_plus(), vec![Povm::pauli_z(), Povm::pauli_z()]).unwrap();
        let t = spatial_to_temporal(&s).unwrap();
        let br = t.ensemble.branches().unwrap();
        assert!(close(&br.weights, &[0.5, 0.5], 1e-12));
        assert!(br.states[0].trace_distance(&DensityMatrix::basis(2, 0)) < 1e-10);
        assert!(br.states[1].trace_distance(&DensityMatrix::basis(2, 1)) < 1e-10);
        let id = Channel::identity(2);
        let rho = DensityMatrix::pure_real(&[0.6, 0.8]).unwrap();
        assert!(t.channel.apply(&rho).unwrap().trace_distance(&id.apply(&rho).unwrap()) < 1e-10);
        assert!(close(t.distribution().unwrap().probs(), &[0.5, 0.0, 0.0, 0.5], 1e-10));
        assert!(verify_ocj(&s, &t, 1e-8).unwrap());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn product_state_gives_constant_channel() {
        let rho_b = DensityMatrix::bloch([0.3, -0.2, 0.5]).unwrap();
        let rho = DensityMatrix::bloch([0.1, 0.4, -0.6]).unwrap().tensor(&rho_b);
        let s = SpatialScenario::new(rho, vec![Povm::pauli_x(), Povm::pauli_y()]).unwrap();
        let t = spatial_to_temporal(&s).unwrap();
        for k in 0..2 {
            let out = t.channel.apply(&DensityMatrix::basis(2, k)).unwrap();
            assert!(out.trace_distance(&rho_b) < 1e-10);
        }
        let p = s.distribution().unwrap();
        let pa = [p.probs()[0] + p.probs()[1], p.probs()[2] + p.probs()[3]];
        let pb = [p.probs()[0] + p.probs()[2], p.probs()[1] + p.probs()[3]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.probs()[2 * i + j] - pa[i] * pb[j]).abs() < 1e-12);
            }
        }
        assert!(verify_ocj(&s, &t, 1e-8).unwrap());
    }

    #[test]
    fn ghz_uses_a_copy_channel() {
        let s = SpatialScenario::new(DensityMatrix::ghz(), vec![Povm::pauli_z(); 3]).unwrap();
        let t = spatial_to_temporal(&s).unwrap();
        assert_eq!(t.output_dims, vec![2, 2]);
        let copy = Channel::basis_copy(2, 2);
        for k in 0..2 {
            let e = DensityMatrix::basis(2, k);
            assert!(t.channel.apply(&e).unwrap().trace_distance(&copy.apply(&e).unwrap()) < 1e-10);
        }
        let p = t.distribution().unwrap();
        assert!((p.get(&[0, 0, 0]).unwrap() - 0.5).abs() < 1e-10);
        assert!((p.get(&[1, 1, 1]).unwrap() - 0.5).abs() < 1e-10);
        assert!(verify_ocj(&s, &t, 1e-8).unwrap());
    }

    #[test]
    fn temporal_examples() {
        // uniform |0⟩/|1⟩ ensemble, identity channel, Z
        let ens =
            QuantumEnsemble::from_branches(&[0.5, 0.5], &[DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)])
                .unwrap();
        let t = TemporalScenario::new(ens, Channel::identity(2), vec![2], vec![Povm::pauli_z()]).unwrap();
        let s = temporal_to_spatial(&t).unwrap();
        assert!(s.state.trace_distance(&DensityMatrix::phi_plus()) < 1e-10);
        for (e, f) in s.measurements[0].elements().iter().zip(Povm::pauli_z().elements()) {
            assert!(max_abs(&(e - f)) < 1e-12);
        }
        assert!(verify_ocj(&s, &t, 1e-8).unwrap());

        // |+⟩/|−⟩ with X: perfect correlation
        let h = FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure_real(&[h, h]).unwrap();
        let minus = DensityMatrix::pure_real(&[h, -h]).unwrap();
        let ens = QuantumEnsemble::from_branches(&[0.5, 0.5], &[plus, minus]).unwrap();
        let t = TemporalScenario::new(ens, Channel::identity(2), vec![2], vec![Povm::pauli_x()]).unwrap();
        let s = temporal_to_spatial(&t).unwrap();
        let p = s.distribution().unwrap();
        assert!(close(p.probs(), &[0.5, 0.0, 0.0, 0.5], 1e-10));
        assert!(verify_ocj(&s, &t, 1e-8).unwrap());

        // one-branch ensemble: trivial first party
        let sigma = DensityMatrix::bloch([0.2, 0.0, 0.3]).unwrap();
        let ens =
            QuantumEnsemble::new(sigma.clone(), Povm::new(vec![crate::quantum::matrix::identity(2)]).unwrap()).unwrap();
        let t = TemporalScenario::new(ens, Channel::fully_depolarizing(2), vec![2], vec![Povm::pauli_z()]).unwrap();
        let s = temporal_to_spatial(&t).unwrap();
        assert!(max_abs(&(s.state.reduced(&[0]).matrix() - sigma.transpose().matrix())) < 1e-10);
        assert!(close(s.distribution().unwrap().probs(), &[0.5, 0.5], 1e-10));
        assert!(verify_ocj(&s, &t, 1e-8).unwrap());
    }

    #[test]
    fn verify_detects_perturbation() {
        let a = JointDistribution::new(vec![Axis::new("a", 2), Axis::new("b", 2)], vec![0.25; 4]).unwrap();
        let b =
            JointDistribution::new(vec![Axis::new("a", 2), Axis::new("b", 2)], vec![0.35, 0.15, 0.25, 0.25]).unwrap();
        assert_eq!(distribution_gap(&a, &a).unwrap(), 0.0);
        assert!(distribution_gap(&a, &b).unwrap() > 0.09);
        let c = JointDistribution::new(vec![Axis::new("a", 4)], vec![0.25; 4]).unwrap();
        assert!(distribution_gap(&a, &c).is_err());
    }

    #[test]
    fn chsh_forms_agree_on_singlet() {
        let h = FRAC_1_SQRT_2;
        let a = [Povm::pauli_z(), Povm::pauli_x()];
        let b = [Povm::qubit_axis([-h, 0.0, -h]).unwrap(), Povm::qubit_axis([h, 0.0, -h]).unwrap()];
        let (s, t) = chsh_both_forms(&DensityMatrix::singlet(), &a, &b).unwrap();
        assert!((s.value - 2.0 * SQRT_2).abs() < 1e-10);
        assert!((s.value - t.value).abs() < 1e-8);
    }

    #[test]
    fn party_count_limits() {
        assert!(SpatialScenario::new(DensityMatrix::basis(2, 0), vec![Povm::pauli_z()]).is_err());
        let four = DensityMatrix::ghz().tensor(&DensityMatrix::basis(2, 0));
        assert!(SpatialScenario::new(four, vec![Povm::pauli_z(); 4]).is_err());
    }
}
