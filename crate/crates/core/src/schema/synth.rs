//! Synthetic registries with planted category proportions.
//!
//! Generation is driven by a [`SynthSpec`]: a row count, a seed, a planting
//! mode and a list of blocks. A block covers one column (independent
//! sampling) or several columns (a joint distribution over label tuples).
//! Blocks are generated in declaration order from a single
//! `ChaCha8Rng::seed_from_u64(seed)` stream ([`RNG_ALGORITHM`]):
//!
//! * exact-counts: the block's outcome indices are laid out with their
//!   exact multiplicities, in outcome order, and Fisher–Yates shuffled;
//! * sampled: each row draws one outcome from the weight vector.
//!
//! Category counts in exact-counts mode are therefore reproducible by any
//! implementation, even one whose shuffle order differs.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::dictionary::{ColumnKind, ColumnSpec, DataDictionary};
use super::table::RawTable;
use crate::error::{Error, Result};

pub const RNG_ALGORITHM: &str = "chacha8-seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantingMode {
    Sampled,
    ExactCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthBlock {
    pub columns: Vec<String>,
    /// One label per column for every outcome.
    pub outcomes: Vec<Vec<String>>,
    /// Probabilities (sampled) or integer counts (exact-counts).
    pub weights: Vec<f64>,
}

impl SynthBlock {
    pub fn single<S: Into<String>>(
        column: impl Into<String>,
        labels: impl IntoIterator<Item = S>,
        weights: Vec<f64>,
    ) -> Self {
        Self {
            columns: vec![column.into()],
            outcomes: labels.into_iter().map(|l| vec![l.into()]).collect(),
            weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub seed: u64,
    pub mode: PlantingMode,
    pub blocks: Vec<SynthBlock>,
    /// Columns declared as integer; all others are categorical.
    pub integer_columns: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    n_rows: i64,
    seed: u64,
    mode: PlantingMode,
    #[serde(default)]
    column: Vec<ColumnDoc>,
    #[serde(default)]
    joint: Vec<JointDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnDoc {
    name: String,
    #[serde(default)]
    kind: Option<String>,
    categories: Vec<String>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    columns: Vec<String>,
    #[serde(default)]
    integer_columns: Vec<String>,
    outcomes: Vec<Vec<String>>,
    weights: Vec<f64>,
}

impl SynthSpec {
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let doc: SpecDoc =
            toml::from_str(source).map_err(|e| Error::Synth(e.message().to_string()))?;
        if doc.n_rows < 0 {
            return Err(Error::Synth("n_rows must be positive".into()));
        }
        let mut blocks = Vec::new();
        let mut integer_columns = Vec::new();
        for c in doc.column {
            match c.kind.as_deref() {
                None | Some("categorical") => {}
                Some("integer") => integer_columns.push(c.name.clone()),
                Some(k) => {
                    return Err(Error::Synth(format!(
                        "column {:?}: unsupported kind {k:?}",
                        c.name
                    )))
                }
            }
            blocks.push(SynthBlock::single(c.name, c.categories, c.weights));
        }
        for j in doc.joint {
            integer_columns.extend(j.integer_columns);
            blocks.push(SynthBlock {
                columns: j.columns,
                outcomes: j.outcomes,
                weights: j.weights,
            });
        }
        let spec = SynthSpec {
            n_rows: doc.n_rows as usize,
            seed: doc.seed,
            mode: doc.mode,
            blocks,
            integer_columns,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Synth(m));
        if self.n_rows == 0 {
            return bad("n_rows must be positive".into());
        }
        if self.blocks.is_empty() {
            return bad("no columns declared".into());
        }
        let mut seen = HashMap::new();
        for (b, block) in self.blocks.iter().enumerate() {
            if block.columns.is_empty() {
                return bad(format!("block {} has no columns", b + 1));
            }
            for c in &block.columns {
                if c.trim().is_empty() {
                    return bad("empty column name".into());
                }
                if seen.insert(c.clone(), b).is_some() {
                    return bad(format!("column {c:?} declared twice"));
                }
            }
            let name = block.columns.join("×");
            if block.outcomes.is_empty() || block.outcomes.len() != block.weights.len() {
                return bad(format!(
                    "{name}: {} outcomes but {} weights",
                    block.outcomes.len(),
                    block.weights.len()
                ));
            }
            if let Some(o) = block.outcomes.iter().find(|o| o.len() != block.columns.len()) {
                return bad(format!("{name}: outcome {o:?} has wrong arity"));
            }
            for (i, a) in block.outcomes.iter().enumerate() {
                if block.outcomes[..i].contains(a) {
                    return bad(format!("{name}: outcome {a:?} listed twice"));
                }
            }
            if block.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return bad(format!("{name}: weights must be finite and non-negative"));
            }
            let total: f64 = block.weights.iter().sum();
            match self.mode {
                PlantingMode::Sampled => {
                    if (total - 1.0).abs() > 1e-9 {
                        return bad(format!("{name}: probabilities sum to {total}, not 1"));
                    }
                }
                PlantingMode::ExactCounts => {
                    if block.weights.iter().any(|w| w.fract() != 0.0) {
                        return bad(format!("{name}: exact counts must be integers"));
                    }
                    if total != self.n_rows as f64 {
                        return bad(format!(
                            "{name}: counts sum to {total}, not n_rows = {}",
                            self.n_rows
                        ));
                    }
                }
            }
        }
        for c in &self.integer_columns {
            if !seen.contains_key(c) {
                return bad(format!("integer column {c:?} is not declared"));
            }
        }
        for block in &self.blocks {
            for (ci, c) in block.columns.iter().enumerate() {
                if self.integer_columns.contains(c) {
                    if let Some(o) = block.outcomes.iter().find(|o| o[ci].parse::<i64>().is_err()) {
                        return bad(format!("integer column {c:?}: label {:?}", o[ci]));
                    }
                }
            }
        }
        Ok(())
    }

    /// Dictionary of the generated table: categorical columns list their
    /// labels (first-declared order) as allowed values.
    pub fn dictionary(&self) -> DataDictionary {
        let mut cols = Vec::new();
        for block in &self.blocks {
            for (ci, c) in block.columns.iter().enumerate() {
                if self.integer_columns.contains(c) {
                    cols.push(ColumnSpec::new(c.clone(), ColumnKind::Integer));
                } else {
                    let mut labels: Vec<String> = Vec::new();
                    for o in &block.outcomes {
                        if !labels.contains(&o[ci]) {
                            labels.push(o[ci].clone());
                        }
                    }
                    cols.push(ColumnSpec::new(c.clone(), ColumnKind::Categorical).with_allowed(labels));
                }
            }
        }
        DataDictionary::new(cols).expect("checked spec yields a valid dictionary")
    }
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<RawTable> {
    spec.check()?;
    let dict = spec.dictionary();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_rows;
    let mut rows: Vec<Vec<Option<String>>> = vec![vec![None; dict.len()]; n];
    let mut col = 0;
    for block in &spec.blocks {
        let draws: Vec<usize> = match spec.mode {
            PlantingMode::ExactCounts => {
                let mut v = Vec::with_capacity(n);
                for (k, w) in block.weights.iter().enumerate() {
                    v.extend(std::iter::repeat_n(k, *w as usize));
                }
                v.shuffle(&mut rng);
                v
            }
            PlantingMode::Sampled => {
                let dist = WeightedIndex::new(&block.weights)
                    .map_err(|e| Error::Synth(format!("{}: {e}", block.columns.join("×"))))?;
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
        };
        for (row, &k) in rows.iter_mut().zip(&draws) {
            for (ci, label) in block.outcomes[k].iter().enumerate() {
                row[col + ci] = Some(label.clone());
            }
        }
        col += block.columns.len();
    }
    RawTable::new(dict, rows)
}
