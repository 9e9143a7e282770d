//! JSON theory files.
//!
//! ```json
//! {"preparations": ["zero", "plus"],
//!  "transformations": ["id", "X"],
//!  "measurements": [{"id": "Z", "arity": 2}],
//!  "table": [{"prep": "zero", "trans": "id", "meas": "Z", "probs": [1.0, 0.0]}]}
//! ```

use serde::{Deserialize, Serialize};

use super::{MeasId, MeasSpec, OperationalTheory, PrepId, TransId};
use crate::error::Result;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoryFile {
    pub preparations: Vec<PrepId>,
    #[serde(default)]
    pub transformations: Vec<TransId>,
    pub measurements: Vec<MeasFileEntry>,
    pub table: Vec<TheoryRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasFileEntry {
    pub id: MeasId,
    pub arity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoryRow {
    pub prep: PrepId,
    pub trans: TransId,
    pub meas: MeasId,
    pub probs: Vec<f64>,
}

impl OperationalTheory<f64> {
    /// Parses and re-validates a theory file; every identity row must be present.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TheoryFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn from_file(file: TheoryFile) -> Result<Self> {
        let meas = file.measurements.into_iter().map(|m| MeasSpec { id: m.id, arity: m.arity }).collect();
        let mut theory = Self::new(file.preparations, file.transformations, meas)?;
        for row in file.table {
            theory.set_row(&row.prep, &row.trans, &row.meas, row.probs)?;
        }
        theory.check_complete()?;
        Ok(theory)
    }

    pub fn to_file(&self) -> TheoryFile {
        TheoryFile {
            preparations: self.preparations().to_vec(),
            transformations: self.transformations().to_vec(),
            measurements: self
                .measurements()
                .iter()
                .map(|m| MeasFileEntry { id: m.id.clone(), arity: m.arity })
                .collect(),
            table: self
                .rows()
                .map(|(p, t, m, r)| TheoryRow { prep: p.clone(), trans: t.clone(), meas: m.clone(), probs: r.to_vec() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("theory serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const BIT: &str = r#"{"preparations":["zero","one"],"transformations":["id"],
        "measurements":[{"id":"Z","arity":2}],
        "table":[{"prep":"zero","trans":"id","meas":"Z","probs":[1.0,0.0]},
                 {"prep":"one","trans":"id","meas":"Z","probs":[0.0,1.0]}]}"#;

    #[test]
    fn loads_and_round_trips() {
        let th = OperationalTheory::from_json(BIT).unwrap();
        let again = OperationalTheory::from_json(&th.to_json()).unwrap();
        assert_eq!(th.to_json(), again.to_json());
        assert_eq!(
            again.outcome_distribution(&"one".into(), &TransId::identity(), &"Z".into()).unwrap(),
            vec![0.0, 1.0]
        );
    }

    #[test]
    fn loader_revalidates_normalization() {
        let bad = BIT.replace("[1.0,0.0]", "[0.9,0.0]");
        assert!(matches!(OperationalTheory::from_json(&bad), Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = OperationalTheory::from_json("{\n  \"preparations\": [,]\n}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
