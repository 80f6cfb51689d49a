//! The JSON family-set file.
//!
//! ```json
//! {
//!   "n": 4,
//!   "sets": [["0000", "1111"], ["0011", "0101"]],
//!   "metadata": { "E": 1, "N": 4, "t": 1, "created_by": "qdel construct" }
//! }
//! ```

use std::collections::BTreeMap;

use qdel::delsets::WordSet;
use qdel::partition::FamilySet;
use qdel::BitString;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub bits_per_symbol: Option<u32>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_by: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySetFile {
    pub n: usize,
    pub sets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl FamilySetFile {
    pub fn from_family(fam: &FamilySet, metadata: Option<Metadata>) -> Self {
        Self::from_sets(fam.n(), fam.cells(), metadata)
    }

    pub fn from_sets(n: usize, sets: &[WordSet], metadata: Option<Metadata>) -> Self {
        Self {
            n,
            sets: sets
                .iter()
                .map(|s| s.iter().map(|w| w.to_string()).collect())
                .collect(),
            metadata,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Parses the JSON text; syntax errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    /// Validates the sets; errors name the offending set and entry (1-based).
    pub fn to_family(&self) -> Result<FamilySet, CliError> {
        if self.n == 0 {
            return Err(CliError::Parse("n must be positive".into()));
        }
        if self.sets.is_empty() {
            return Err(CliError::Parse("no sets given".into()));
        }
        let mut seen: BTreeMap<BitString, usize> = BTreeMap::new();
        let mut cells = Vec::with_capacity(self.sets.len());
        for (s, set) in self.sets.iter().enumerate() {
            if set.is_empty() {
                return Err(CliError::Parse(format!("set {} is empty", s + 1)));
            }
            let mut cell = WordSet::new();
            for (e, literal) in set.iter().enumerate() {
                let at = || format!("set {}, entry {}", s + 1, e + 1);
                let w: BitString = literal
                    .parse()
                    .map_err(|err| CliError::Parse(format!("{}: {err}", at())))?;
                if w.len() != self.n {
                    return Err(CliError::Parse(format!(
                        "{}: {literal:?} has length {}, expected {}",
                        at(),
                        w.len(),
                        self.n
                    )));
                }
                if let Some(&prev) = seen.get(&w) {
                    return Err(CliError::Parse(format!(
                        "{}: {literal:?} already appears in set {}",
                        at(),
                        prev + 1
                    )));
                }
                seen.insert(w.clone(), s);
                cell.insert(w);
            }
            cells.push(cell);
        }
        FamilySet::new(self.n, cells).map_err(|e| CliError::Parse(e.to_string()))
    }
}

/// Reads and validates a family-set file.
pub fn read_family(path: &std::path::Path) -> Result<(FamilySet, Option<Metadata>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let located = |e: CliError| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    };
    let file = FamilySetFile::parse(&text).map_err(located)?;
    let fam = file.to_family().map_err(located)?;
    Ok((fam, file.metadata))
}
