//! JSON forms of quantum objects. A complex matrix is a list of rows, each
//! row a list of `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use super::matrix::{CMat, C64};
use super::objects::{Channel, DensityMatrix, Povm};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixFile(pub Vec<Vec<[f64; 2]>>);

impl MatrixFile {
    pub fn from_matrix(m: &CMat) -> Self {
        Self((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            C64::new(re, im)
        }))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    /// Subsystem dimensions; a single system when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub matrix: MatrixFile,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self { dims: Some(rho.dims().to_vec()), matrix: MatrixFile::from_matrix(rho.matrix()) }
    }

    pub fn into_state(self) -> Result<DensityMatrix> {
        let m = self.matrix.to_matrix()?;
        let dims = self.dims.unwrap_or_else(|| vec![m.nrows()]);
        DensityMatrix::with_dims(m, dims)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmFile {
    pub elements: Vec<MatrixFile>,
}

impl PovmFile {
    pub fn from_povm(p: &Povm) -> Self {
        Self { elements: p.elements().iter().map(MatrixFile::from_matrix).collect() }
    }

    pub fn into_povm(self) -> Result<Povm> {
        Povm::new(self.elements.iter().map(MatrixFile::to_matrix).collect::<Result<_>>()?)
    }
}

/// Either one POVM or, for boxes, a list of settings per party.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PovmSetFile {
    Single(PovmFile),
    Parties { parties: Vec<Vec<PovmFile>> },
}

impl PovmSetFile {
    pub fn into_parties(self) -> Result<Vec<Vec<Povm>>> {
        match self {
            PovmSetFile::Single(p) => Ok(vec![vec![p.into_povm()?]]),
            PovmSetFile::Parties { parties } => {
                parties.into_iter().map(|s| s.into_iter().map(PovmFile::into_povm).collect()).collect()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub kraus: Vec<MatrixFile>,
}

impl ChannelFile {
    pub fn from_channel(c: &Channel) -> Self {
        Self { kraus: c.kraus().iter().map(MatrixFile::from_matrix).collect() }
    }

    pub fn into_channel(self) -> Result<Channel> {
        Channel::new(self.kraus.iter().map(MatrixFile::to_matrix).collect::<Result<_>>()?)
    }
}

impl DensityMatrix {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<StateFile>(text)?.into_state()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&StateFile::from_state(self)).expect("state serializes")
    }
}

impl Channel {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ChannelFile>(text)?.into_channel()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ChannelFile::from_channel(self)).expect("channel serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_round_trip() {
        let rho = DensityMatrix::singlet();
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert_eq!(back.dims(), &[2, 2]);
        assert!(back.trace_distance(&rho) < 1e-15);
    }

    #[test]
    fn complex_entries_parse() {
        let text = r#"{"matrix": [[[0.5, 0], [0, -0.5]], [[0, 0.5], [0.5, 0]]]}"#;
        let rho = DensityMatrix::from_json(text).unwrap();
        assert!((rho.expectation(&super::super::matrix::pauli_y()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn povm_sets() {
        let one = format!(
            r#"{{"elements": {}}}"#,
            serde_json::to_string(&PovmFile::from_povm(&Povm::pauli_x()).elements).unwrap()
        );
        let set: PovmSetFile = serde_json::from_str(&one).unwrap();
        assert_eq!(set.into_parties().unwrap()[0][0], Povm::pauli_x());
        let z = serde_json::to_string(&PovmFile::from_povm(&Povm::pauli_z())).unwrap();
        let two = format!(r#"{{"parties": [[{z}, {z}], [{z}]]}}"#);
        let set: PovmSetFile = serde_json::from_str(&two).unwrap();
        let parties = set.into_parties().unwrap();
        assert_eq!(parties.len(), 2);
        assert_eq!(parties[0].len(), 2);
    }

    #[test]
    fn channel_round_trip_and_errors() {
        let c = Channel::fully_depolarizing(2);
        assert_eq!(Channel::from_json(&c.to_json()).unwrap(), c);
        assert!(Channel::from_json(r#"{"kraus": [[[[0.5, 0]]]]}"#).is_err());
        let bad = DensityMatrix::from_json("{\"matrix\": [[[1, 0]],\n [[0, 0]]");
        assert!(matches!(bad, Err(Error::Parse { line: 2, .. })));
    }
}
