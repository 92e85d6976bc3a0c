//! Synthetic categorical relations with per-attribute value distributions.

use std::sync::Arc;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellValue, Relation, Schema, TupleId};

/// Weights over the value list, by position.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution {
    #[default]
    Uniform,
    /// Bell curve over value positions; defaults centre it with a spread of
    /// a quarter of the domain.
    Gaussian {
        #[serde(default)]
        mean: Option<f64>,
        #[serde(default)]
        std_dev: Option<f64>,
    },
    /// Weight `1 / rank^exponent`, first value ranked 1.
    Zipf { exponent: f64 },
}

impl Distribution {
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        let bad = |what: &str| Err(Error::Config(format!("invalid distribution parameter: {what}")));
        match *self {
            Distribution::Uniform => Ok(vec![1.0; n]),
            Distribution::Gaussian { mean, std_dev } => {
                let mean = mean.unwrap_or((n as f64 - 1.0) / 2.0);
                let sd = std_dev.unwrap_or((n as f64 / 4.0).max(0.5));
                if !mean.is_finite() {
                    return bad("mean must be finite");
                }
                if !(sd.is_finite() && sd > 0.0) {
                    return bad("std_dev must be positive");
                }
                Ok((0..n).map(|i| (-((i as f64 - mean).powi(2)) / (2.0 * sd * sd)).exp()).collect())
            }
            Distribution::Zipf { exponent } => {
                if !(exponent.is_finite() && exponent >= 0.0) {
                    return bad("exponent must be non-negative");
                }
                Ok((1..=n).map(|rank| (rank as f64).powf(-exponent)).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Qi,
    Sensitive,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default)]
    pub distribution: Distribution,
    #[serde(default)]
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub rows: usize,
    pub seed: u64,
    pub attributes: Vec<AttributeSpec>,
}

impl SynthSpec {
    pub fn schema(&self) -> Result<Schema> {
        let names: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        let with = |role| self.attributes.iter().filter(|a| a.role == role).map(|a| a.name.as_str()).collect::<Vec<_>>();
        Schema::new(&names, &with(Role::Qi), &with(Role::Sensitive))
    }
}

/// Samples `spec.rows` tuples, ids `0..rows`. Deterministic in the seed.
pub fn synth_generate(spec: &SynthSpec) -> Result<Relation> {
    let schema = Arc::new(spec.schema()?);
    let mut columns = Vec::with_capacity(spec.attributes.len());
    for a in &spec.attributes {
        if a.values.is_empty() {
            return Err(Error::Config(format!("attribute `{}` has an empty domain", a.name)));
        }
        if a.values.iter().any(|v| v == crate::model::SUPPRESSED_LITERAL) {
            return Err(Error::Config(format!("attribute `{}` uses the reserved value `*`", a.name)));
        }
        let weights = a.distribution.weights(a.values.len())?;
        let index = WeightedIndex::new(&weights)
            .map_err(|e| Error::Config(format!("attribute `{}`: {e}", a.name)))?;
        let values: Vec<CellValue> = a.values.iter().map(|v| CellValue::value(v)).collect();
        columns.push((index, values));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tuples = (0..spec.rows)
        .map(|i| {
            let row = columns.iter().map(|(index, values)| values[index.sample(&mut rng)].clone()).collect();
            (TupleId(i as u32), row)
        })
        .collect();
    Relation::new(schema, tuples)
}
