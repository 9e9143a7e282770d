//! Quantum instantiation of operational theories: states, POVMs, channels,
//! Born-rule tables and the Choi/conditional-state constructions.

pub mod born;
pub mod choi;
pub mod file;
pub mod matrix;
pub mod objects;
pub mod random;

pub use born::{bipartite_box, born_box, born_table};
pub use choi::{
    choi_of_channel, conditional_channel, dressed_choi_state, leifer_ensemble, transpose_povm, ChoiState,
    LeiferEnsemble, QuantumEnsemble,
};
pub use matrix::{CMat, C64};
pub use objects::{Channel, DensityMatrix, Povm};
