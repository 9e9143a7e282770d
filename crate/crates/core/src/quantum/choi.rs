//! Choi states, conditional (steered) ensembles and the channel/state
//! correspondence between bipartite states and `(ρ_A, ε)` pairs.
//!
//! Tensor order is reference first: a Choi state lives on `A' ⊗ B`, with the
//! channel acting on the second factor, so that the reference system plays
//! the role of party A in a bipartite scenario. All transposes are taken in
//! the computational basis.

use super::matrix::{self, c, dagger, kron, CMat};
use super::objects::{Channel, DensityMatrix, Povm};
use crate::error::{Error, Result};

/// Branch weights at or below this are treated as impossible.
pub const EPS_ZERO: f64 = 1e-12;
/// Eigenvalue cutoff defining the support of a reduced state.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

/// `ρ^ε = (𝕀 ⊗ ε)(|Φ⟩⟨Φ|)` with `|Φ⟩ = Σ_i |ii⟩/√d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState {
    pub state: DensityMatrix,
    pub input_dim: usize,
    pub output_dim: usize,
}

/// Unnormalized Choi matrix `Σ_{kl} |k⟩⟨l| ⊗ ε(|k⟩⟨l|)`.
pub fn choi_matrix(chan: &Channel) -> CMat {
    let (din, dout) = (chan.input_dim(), chan.output_dim());
    let mut j = CMat::zeros(din * dout, din * dout);
    for k in 0..din {
        for l in 0..din {
            let mut unit = CMat::zeros(din, din);
            unit[(k, l)] = c(1.0);
            let block = chan.apply_operator(&unit);
            for r in 0..dout {
                for s in 0..dout {
                    j[(k * dout + r, l * dout + s)] = block[(r, s)];
                }
            }
        }
    }
    j
}

pub fn choi_of_channel(chan: &Channel) -> ChoiState {
    let (din, dout) = (chan.input_dim(), chan.output_dim());
    let state = DensityMatrix::from_numerical(choi_matrix(chan).unscale(din as f64), vec![din, dout])
        .expect("Choi state of a CPTP map is a state");
    ChoiState { state, input_dim: din, output_dim: dout }
}

impl Channel {
    /// Kraus form of the CP map with unnormalized Choi matrix `j` (reference
    /// first). Fails unless the map is trace preserving.
    pub fn from_choi_matrix(j: &CMat, din: usize, dout: usize) -> Result<Self> {
        if j.nrows() != din * dout || !j.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} Choi matrix for {din} -> {dout}",
                j.nrows(),
                j.ncols()
            )));
        }
        let (vals, vecs) = matrix::eigh(j);
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let s = lam.sqrt();
            kraus.push(CMat::from_fn(dout, din, |b, a| vecs[(a * dout + b, k)] * s));
        }
        Channel::new(kraus)
    }
}

/// Elementwise transpose of every POVM element.
pub fn transpose_povm(povm: &Povm) -> Povm {
    povm.transpose()
}

/// Branches of the ensemble `{p(i) = Tr(ρ M_i), ρ_i = √ρ M_i √ρ / p(i)}`.
#[derive(Clone, Debug)]
pub struct LeiferEnsemble {
    pub weights: Vec<f64>,
    /// Zero-weight branches carry the maximally mixed state as a placeholder.
    pub states: Vec<DensityMatrix>,
    pub zero_weight: Vec<bool>,
}

impl LeiferEnsemble {
    /// `Σ_i p(i) ρ_i`.
    pub fn average(&self) -> CMat {
        let d = self.states[0].dim();
        self.weights
            .iter()
            .zip(&self.states)
            .zip(&self.zero_weight)
            .filter(|(_, &z)| !z)
            .fold(CMat::zeros(d, d), |acc, ((w, s), _)| acc + s.matrix().scale(*w))
    }
}

pub fn leifer_ensemble(rho: &DensityMatrix, povm: &Povm) -> Result<LeiferEnsemble> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs POVM dimension {}",
            rho.dim(),
            povm.dim()
        )));
    }
    let root = matrix::psd_sqrt(rho.matrix());
    let mut weights = Vec::new();
    let mut states = Vec::new();
    let mut zero_weight = Vec::new();
    for e in povm.elements() {
        let unnorm = &root * e * &root;
        let w = unnorm.trace().re.max(0.0);
        weights.push(w);
        if w <= EPS_ZERO {
            zero_weight.push(true);
            states.push(DensityMatrix::maximally_mixed(rho.dim()));
        } else {
            zero_weight.push(false);
            states.push(DensityMatrix::from_numerical(unnorm, vec![rho.dim()])?);
        }
    }
    Ok(LeiferEnsemble { weights, states, zero_weight })
}

/// A quantum ensemble preparation described by an average state `σ` and a
/// POVM `N`: branch `i` has weight `Tr(σ N_i)` and state `√σ N_i √σ / p(i)`.
#[derive(Clone, Debug)]
pub struct QuantumEnsemble {
    pub average: DensityMatrix,
    pub povm: Povm,
}

impl QuantumEnsemble {
    pub fn new(average: DensityMatrix, povm: Povm) -> Result<Self> {
        if average.dim() != povm.dim() {
            return Err(Error::DimensionMismatch("ensemble state and POVM differ in dimension".into()));
        }
        Ok(Self { average, povm })
    }

    /// Recovers `(σ, N)` from explicit weights and branch states, with
    /// `N_i = σ^{-1/2} p_i ρ_i σ^{-1/2}` on the support of `σ`; the
    /// complement of the support is added to the first element.
    pub fn from_branches(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::ArityMismatch("weights and states differ in length".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > crate::theory::EPS_NORM {
            return Err(Error::InvalidProbability("ensemble weights must form a distribution".into()));
        }
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch("branch states differ in dimension".into()));
        }
        let sigma = states.iter().zip(weights).fold(CMat::zeros(d, d), |acc, (s, &w)| acc + s.matrix().scale(w));
        let inv = matrix::pinv_sqrt(&sigma, SUPPORT_CUTOFF);
        let outside = matrix::identity(d) - matrix::support_projector(&sigma, SUPPORT_CUTOFF);
        let mut elements: Vec<CMat> = states
            .iter()
            .zip(weights)
            .map(|(s, &w)| matrix::hermitian_part(&(&inv * s.matrix().scale(w) * &inv)))
            .collect();
        elements[0] += outside;
        Ok(Self { average: DensityMatrix::from_numerical(sigma, vec![d])?, povm: Povm::new(elements)? })
    }

    pub fn branches(&self) -> Result<LeiferEnsemble> {
        leifer_ensemble(&self.average, &self.povm)
    }
}

/// The channel `ε: A → (rest)` read off a state on `A ⊗ rest` by
/// normalizing against `ρ_A^{-1/2}` on the support of `ρ_A`. Outside that
/// support the channel prepares the maximally mixed state.
pub fn conditional_channel(rho_ab: &DensityMatrix) -> Result<Channel> {
    let dims = rho_ab.dims();
    if dims.len() < 2 {
        return Err(Error::DimensionMismatch("conditional channel needs a composite state".into()));
    }
    let da = dims[0];
    let drest: usize = dims[1..].iter().product();
    let rho_a = rho_ab.reduced(&[0]);
    let inv = kron(&matrix::pinv_sqrt(rho_a.matrix(), SUPPORT_CUTOFF), &matrix::identity(drest));
    let mut j = &inv * rho_ab.matrix() * dagger(&inv);
    let outside = matrix::identity(da) - matrix::support_projector(rho_a.matrix(), SUPPORT_CUTOFF);
    j += kron(&outside, &matrix::identity(drest).unscale(drest as f64));
    Channel::from_choi_matrix(&matrix::hermitian_part(&j), da, drest)
}

/// `(√σᵀ ⊗ 𝕀) J_ε (√σᵀ ⊗ 𝕀)`: the bipartite state whose steered ensemble,
/// under the transposed POVM, reproduces the `(σ, ε)` prepare-and-measure
/// statistics.
pub fn dressed_choi_state(sigma: &DensityMatrix, chan: &Channel, output_dims: &[usize]) -> Result<DensityMatrix> {
    if sigma.dim() != chan.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} but channel input {}",
            sigma.dim(),
            chan.input_dim()
        )));
    }
    if output_dims.iter().product::<usize>() != chan.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "output split {output_dims:?} does not match channel output {}",
            chan.output_dim()
        )));
    }
    let root = kron(&matrix::psd_sqrt(&sigma.matrix().transpose()), &matrix::identity(chan.output_dim()));
    let mut dims = vec![sigma.dim()];
    dims.extend_from_slice(output_dims);
    DensityMatrix::from_numerical(&root * choi_matrix(chan) * &root, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::{max_abs, pauli_x};

    #[test]
    fn identity_choi_is_maximally_entangled() {
        let choi = choi_of_channel(&Channel::identity(2));
        assert!(max_abs(&(choi.state.matrix() - DensityMatrix::phi_plus().matrix())) < 1e-15);
    }

    #[test]
    fn depolarizing_choi_is_maximally_mixed() {
        let choi = choi_of_channel(&Channel::fully_depolarizing(2));
        assert!(max_abs(&(choi.state.matrix() - matrix::identity(4).scale(0.25))) < 1e-15);
    }

    #[test]
    fn unitary_choi_matches_local_rotation() {
        let x = pauli_x();
        let choi = choi_of_channel(&Channel::unitary(x.clone()).unwrap());
        let ix = kron(&matrix::identity(2), &x);
        let expected = &ix * DensityMatrix::phi_plus().matrix() * dagger(&ix);
        assert!(max_abs(&(choi.state.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn choi_round_trip_recovers_the_channel_action() {
        let rho = DensityMatrix::bloch([0.2, 0.4, -0.1]).unwrap();
        let chan = Channel::unitary(pauli_x()).unwrap();
        let back = Channel::from_choi_matrix(&choi_matrix(&chan), 2, 2).unwrap();
        assert!(rho_close(&back.apply(&rho).unwrap(), &chan.apply(&rho).unwrap()));
    }

    fn rho_close(a: &DensityMatrix, b: &DensityMatrix) -> bool {
        max_abs(&(a.matrix() - b.matrix())) < 1e-12
    }

    #[test]
    fn leifer_examples() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let z = Povm::pauli_z();
        let ens = leifer_ensemble(&mixed, &z).unwrap();
        assert!(ens.weights.iter().all(|w| (w - 0.5).abs() < 1e-15));
        assert!(rho_close(&ens.states[0], &DensityMatrix::basis(2, 0)));
        assert!(rho_close(&ens.states[1], &DensityMatrix::basis(2, 1)));

        let ens = leifer_ensemble(&DensityMatrix::basis(2, 0), &z).unwrap();
        assert_eq!(ens.zero_weight, vec![false, true]);
        assert!((ens.weights[0] - 1.0).abs() < 1e-15 && ens.weights[1].abs() < 1e-15);
        assert!(rho_close(&ens.states[0], &DensityMatrix::basis(2, 0)));

        let ens = leifer_ensemble(&mixed, &Povm::pauli_x()).unwrap();
        assert!(rho_close(&ens.states[0], &DensityMatrix::bloch([1.0, 0.0, 0.0]).unwrap()));
        assert!(rho_close(&ens.states[1], &DensityMatrix::bloch([-1.0, 0.0, 0.0]).unwrap()));
    }

    #[test]
    fn transposes_of_pauli_povms() {
        assert_eq!(transpose_povm(&Povm::pauli_z()), Povm::pauli_z());
        assert_eq!(transpose_povm(&Povm::pauli_x()), Povm::pauli_x());
        let y = Povm::pauli_y();
        assert_eq!(transpose_povm(&y), y.relabeled(&[1, 0]).unwrap());
    }

    #[test]
    fn product_state_gives_replacement_channel() {
        let rho_a = DensityMatrix::bloch([0.1, 0.0, 0.6]).unwrap();
        let rho_b = DensityMatrix::bloch([0.0, 0.5, -0.3]).unwrap();
        let chan = conditional_channel(&rho_a.tensor(&rho_b)).unwrap();
        for input in [DensityMatrix::basis(2, 0), DensityMatrix::bloch([0.0, -1.0, 0.0]).unwrap()] {
            assert!(rho_close(&chan.apply(&input).unwrap(), &rho_b));
        }
    }

    #[test]
    fn pretty_good_measurement_recovers_branches() {
        let plus = DensityMatrix::bloch([1.0, 0.0, 0.0]).unwrap();
        let minus = DensityMatrix::bloch([-1.0, 0.0, 0.0]).unwrap();
        let ens = QuantumEnsemble::from_branches(&[0.5, 0.5], &[plus.clone(), minus]).unwrap();
        assert!(max_abs(&(&ens.povm.elements()[0] - Povm::pauli_x().elements()[0].clone())) < 1e-12);
        let branches = ens.branches().unwrap();
        assert!(rho_close(&branches.states[0], &plus));
    }
}
