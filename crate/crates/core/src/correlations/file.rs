use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CorrelationBox;
use crate::error::{Error, Result};
use crate::theory::joint::unflatten;

/// On-disk box: `table` maps `"x1,...,xn"` to the flattened outcome row.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub parties: usize,
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
    pub table: BTreeMap<String, Vec<f64>>,
}

fn key(x: &[usize]) -> String {
    x.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

impl BoxFile {
    pub fn from_box(bx: &CorrelationBox<f64>) -> Self {
        let table = bx.setting_tuples().zip(bx.table()).map(|(x, row)| (key(&x), row.clone())).collect();
        Self { parties: bx.parties(), settings: bx.settings().to_vec(), outcomes: bx.outcomes().to_vec(), table }
    }

    pub fn into_box(self) -> Result<CorrelationBox<f64>> {
        if self.parties != self.settings.len() {
            return Err(Error::ArityMismatch(format!(
                "parties = {} but {} setting counts",
                self.parties,
                self.settings.len()
            )));
        }
        let rows: usize = self.settings.iter().product();
        let mut table = self.table;
        let mut ordered = Vec::with_capacity(rows);
        for flat in 0..rows {
            let x = unflatten(flat, &self.settings);
            let row = table
                .remove(&key(&x))
                .ok_or_else(|| Error::ArityMismatch(format!("missing table row \"{}\"", key(&x))))?;
            ordered.push(row);
        }
        if let Some(extra) = table.keys().next() {
            return Err(Error::ArityMismatch(format!("unexpected table row \"{extra}\"")));
        }
        CorrelationBox::new(self.settings, self.outcomes, ordered)
    }
}

impl CorrelationBox<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<BoxFile>(text)?.into_box()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BoxFile::from_box(self)).expect("box serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::super::library::*;
    use super::*;

    #[test]
    fn round_trip() {
        let bx = shared_bit::<f64>(3);
        assert_eq!(CorrelationBox::from_json(&bx.to_json()).unwrap(), bx);
    }

    #[test]
    fn explicit_keys() {
        let text = r#"{"parties":2,"settings":[1,2],"outcomes":[[2],[2,2]],
            "table":{"0,0":[0.5,0,0,0.5],"0,1":[0.25,0.25,0.25,0.25]}}"#;
        let bx = CorrelationBox::from_json(text).unwrap();
        assert_eq!(bx.prob(&[0, 0], &[1, 1]).unwrap(), 0.5);
        let missing = text.replace(r#","0,1":[0.25,0.25,0.25,0.25]"#, "");
        assert!(CorrelationBox::from_json(&missing).is_err());
    }
}
