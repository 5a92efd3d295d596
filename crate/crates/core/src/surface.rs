//! A finite set of prime closed characteristics in dimension `2n`, and its
//! JSON file form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::iteration::{mean_index, PathGerm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceModel {
    pub n: u32,
    pub characteristics: Vec<PathGerm>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl SurfaceModel {
    pub fn new(n: u32, characteristics: Vec<PathGerm>) -> Self {
        SurfaceModel { n, characteristics, metadata: BTreeMap::new() }
    }

    /// Parses and validates: dimensions agree, names are unique, relations
    /// are consistent.
    pub fn from_json(src: &str) -> Result<Self> {
        let m: SurfaceModel = serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("n must be positive".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.characteristics {
            if !seen.insert(c.label.as_str()) {
                return Err(Error::Invalid(format!("duplicate characteristic name {}", c.label)));
            }
            if c.half_dim() != self.n {
                return Err(Error::Invalid(format!(
                    "{} has half-dimension {}, model has n = {}",
                    c.label,
                    c.half_dim(),
                    self.n
                )));
            }
            c.check_relations()?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&PathGerm> {
        self.characteristics
            .iter()
            .find(|c| c.label == name)
            .ok_or_else(|| Error::Invalid(format!("no characteristic named {}", name)))
    }

    /// Number of characteristics with positive mean index. Errors on an
    /// undecidable sign.
    pub fn positive_count(&self) -> Result<usize> {
        let mut q0 = 0;
        for c in &self.characteristics {
            if mean_index(c)?.sign_i64() > 0 {
                q0 += 1;
            }
        }
        Ok(q0)
    }

    /// Stable reorder putting positive mean indices first.
    pub fn mmi_ordered(&self) -> Result<Self> {
        let mut keyed = Vec::new();
        for c in &self.characteristics {
            keyed.push((mean_index(c)?.sign_i64() <= 0, c.clone()));
        }
        keyed.sort_by_key(|(k, _)| *k);
        Ok(SurfaceModel {
            n: self.n,
            characteristics: keyed.into_iter().map(|(_, c)| c).collect(),
            metadata: self.metadata.clone(),
        })
    }
}

/// Hex SHA-256 of the model file bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
