//! Analysis-ready categorical data and the descriptive tables built on it.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::schema::{ColumnKind, RawTable};

pub const MISSING_LABEL: &str = "(missing)";
pub const DEFAULT_AGE_BREAKS: [i64; 7] = [0, 18, 30, 40, 50, 60, 130];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
    MissingLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub labels: Vec<String>,
}

/// `n` individuals coded on `Q` categorical variables.
///
/// Codes are stored row-major (`codes[i * Q + q]`) as indices into each
/// variable's label list. Every listed category is observed at least once.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDataset {
    variables: Vec<Variable>,
    codes: Vec<usize>,
    n: usize,
    provenance: Vec<String>,
}

impl CategoricalDataset {
    /// Builds a dataset from explicit codes. Unobserved categories are
    /// pruned and codes remapped.
    pub fn from_codes(variables: Vec<Variable>, rows: &[Vec<usize>]) -> Result<Self> {
        let q = variables.len();
        if q == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one variable".into()));
        }
        if rows.is_empty() {
            return Err(Error::EmptyResult("dataset has no rows".into()));
        }
        let mut codes = Vec::with_capacity(rows.len() * q);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != q {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} codes, expected {q}",
                    i + 1,
                    r.len()
                )));
            }
            for (v, &c) in variables.iter().zip(r) {
                if c >= v.labels.len() {
                    return Err(Error::InvalidArgument(format!(
                        "row {}: code {c} out of range for {:?}",
                        i + 1,
                        v.name
                    )));
                }
            }
            codes.extend_from_slice(r);
        }
        let mut ds = Self {
            variables,
            codes,
            n: rows.len(),
            provenance: Vec::new(),
        };
        ds.prune();
        Ok(ds)
    }

    /// Convenience constructor from label rows; categories are ordered by
    /// first appearance.
    pub fn from_labels<S: AsRef<str>>(names: &[&str], rows: &[Vec<S>]) -> Result<Self> {
        let mut vars: Vec<Variable> = names
            .iter()
            .map(|n| Variable {
                name: n.to_string(),
                labels: Vec::new(),
            })
            .collect();
        let mut coded = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != vars.len() {
                return Err(Error::InvalidArgument("row arity mismatch".into()));
            }
            let codes = r
                .iter()
                .zip(vars.iter_mut())
                .map(|(l, v)| intern(&mut v.labels, l.as_ref()))
                .collect();
            coded.push(codes);
        }
        Self::from_codes(vars, &coded)
    }

    fn prune(&mut self) {
        let q = self.variables.len();
        for (vi, var) in self.variables.iter_mut().enumerate() {
            let mut counts = vec![0usize; var.labels.len()];
            for i in 0..self.n {
                counts[self.codes[i * q + vi]] += 1;
            }
            if counts.iter().all(|&c| c > 0) {
                continue;
            }
            let mut remap = vec![usize::MAX; counts.len()];
            let mut kept = Vec::new();
            for (old, label) in var.labels.iter().enumerate() {
                if counts[old] > 0 {
                    remap[old] = kept.len();
                    kept.push(label.clone());
                }
            }
            var.labels = kept;
            for i in 0..self.n {
                let c = &mut self.codes[i * q + vi];
                *c = remap[*c];
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    /// Total category count J.
    pub fn n_categories(&self) -> usize {
        self.variables.iter().map(|v| v.labels.len()).sum()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn row(&self, i: usize) -> &[usize] {
        let q = self.variables.len();
        &self.codes[i * q..(i + 1) * q]
    }

    pub fn code(&self, i: usize, var: usize) -> usize {
        self.codes[i * self.variables.len() + var]
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub(crate) fn with_provenance_prefix(mut self, mut trail: Vec<String>) -> Self {
        trail.append(&mut self.provenance);
        self.provenance = trail;
        self
    }

    pub fn category_counts(&self, var: usize) -> Vec<usize> {
        let mut counts = vec![0; self.variables[var].labels.len()];
        for i in 0..self.n {
            counts[self.code(i, var)] += 1;
        }
        counts
    }

    /// New dataset with rows selected (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let coded: Vec<Vec<usize>> = rows.iter().map(|&i| self.row(i).to_vec()).collect();
        let mut ds = Self::from_codes(self.variables.clone(), &coded)?;
        ds.provenance = self.provenance.clone();
        Ok(ds)
    }

    /// Keeps rows whose category for `variable` is one of `keep`.
    pub fn filter_rows(&self, variable: &str, keep: &[String]) -> Result<Self> {
        let vi = self.variable_index(variable)?;
        let labels = &self.variables[vi].labels;
        let keep: HashSet<&str> = keep.iter().map(String::as_str).collect();
        let rows: Vec<usize> = (0..self.n)
            .filter(|&i| keep.contains(labels[self.code(i, vi)].as_str()))
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyResult(format!(
                "no rows left after filtering {variable:?}"
            )));
        }
        let mut ds = self.select_rows(&rows)?;
        let mut kept: Vec<&str> = keep.into_iter().collect();
        kept.sort_unstable();
        ds.provenance
            .push(format!("filter {variable} in [{}]", kept.join("|")));
        Ok(ds)
    }
}

fn intern(labels: &mut Vec<String>, label: &str) -> usize {
    match labels.iter().position(|l| l == label) {
        Some(i) => i,
        None => {
            labels.push(label.to_string());
            labels.len() - 1
        }
    }
}

/// Label of the interval containing `age`. Intervals are `[b_i, b_{i+1})`
/// except the last, which is closed on both ends.
pub fn bin_age(age: i64, breaks: &[i64]) -> Result<String> {
    check_breaks(breaks)?;
    let lo = breaks[0];
    let hi = *breaks.last().unwrap();
    if age < lo || age > hi {
        return Err(Error::AgeOutOfRange { age, lo, hi });
    }
    let m = breaks.len() - 1;
    let i = breaks[1..m].partition_point(|&b| b <= age);
    Ok(interval_label(breaks, i))
}

fn interval_label(breaks: &[i64], i: usize) -> String {
    if i + 2 == breaks.len() {
        format!("[{},{}]", breaks[i], breaks[i + 1])
    } else {
        format!("[{},{})", breaks[i], breaks[i + 1])
    }
}

fn check_breaks(breaks: &[i64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::InvalidArgument("age breaks need at least two values".into()));
    }
    if breaks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "age breaks must be strictly ascending: {breaks:?}"
        )));
    }
    Ok(())
}

/// Builds the categorical dataset for the `active` columns of `raw`.
///
/// Integer columns are binned with `age_breaks`; an out-of-range value is
/// treated as missing. Category order follows the dictionary's
/// `allowed_values` when present, interval order for binned columns, and
/// first appearance otherwise; the missing level, if any, comes last.
pub fn from_raw(
    raw: &RawTable,
    active: &[String],
    age_breaks: Option<&[i64]>,
    missing_policy: MissingPolicy,
) -> Result<CategoricalDataset> {
    if active.is_empty() {
        return Err(Error::InvalidArgument("no active variables".into()));
    }
    let dict = raw.dictionary();
    let mut cols = Vec::with_capacity(active.len());
    let mut seen = HashSet::new();
    for name in active {
        if !seen.insert(name.as_str()) {
            return Err(Error::InvalidArgument(format!("variable {name:?} listed twice")));
        }
        let ci = dict
            .index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        let spec = &dict.columns()[ci];
        match spec.kind {
            ColumnKind::Identifier => {
                return Err(Error::InvalidArgument(format!(
                    "identifier column {name:?} cannot be an active variable"
                )))
            }
            ColumnKind::Integer if age_breaks.is_none() => {
                return Err(Error::InvalidArgument(format!(
                    "integer column {name:?} needs age breaks to be binned"
                )))
            }
            _ => {}
        }
        cols.push(ci);
    }
    if let Some(b) = age_breaks {
        check_breaks(b)?;
    }

    let mut variables: Vec<Variable> = cols
        .iter()
        .map(|&ci| {
            let spec = &dict.columns()[ci];
            let labels = match (spec.kind, &spec.allowed_values) {
                (ColumnKind::Integer, _) => {
                    let b = age_breaks.unwrap();
                    (0..b.len() - 1).map(|i| interval_label(b, i)).collect()
                }
                (_, Some(allowed)) => allowed.clone(),
                _ => Vec::new(),
            };
            Variable {
                name: spec.name.clone(),
                labels,
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(raw.n_rows());
    let mut dropped = 0usize;
    'rows: for row in raw.rows() {
        let mut codes = Vec::with_capacity(cols.len());
        for (var, &ci) in variables.iter_mut().zip(&cols) {
            let spec = &dict.columns()[ci];
            let label = match (&row[ci], spec.kind) {
                (None, _) => None,
                (Some(v), ColumnKind::Integer) => v
                    .trim()
                    .parse::<i64>()
                    .ok()
                    .and_then(|age| bin_age(age, age_breaks.unwrap()).ok()),
                (Some(v), _) => Some(v.clone()),
            };
            let label = match (label, missing_policy) {
                (Some(l), _) => l,
                (None, MissingPolicy::DropRow) => {
                    dropped += 1;
                    continue 'rows;
                }
                (None, MissingPolicy::MissingLevel) => MISSING_LABEL.to_string(),
            };
            codes.push(intern(&mut var.labels, &label));
        }
        rows.push(codes);
    }
    // the missing level always sorts last
    for (vi, var) in variables.iter_mut().enumerate() {
        if let Some(mpos) = var.labels.iter().position(|l| l == MISSING_LABEL) {
            let last = var.labels.len() - 1;
            if mpos != last {
                let label = var.labels.remove(mpos);
                var.labels.push(label);
                for r in rows.iter_mut() {
                    let c = &mut r[vi];
                    if *c == mpos {
                        *c = last;
                    } else if *c > mpos {
                        *c -= 1;
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no rows left ({} of {} dropped for missing active cells)",
            dropped,
            raw.n_rows()
        )));
    }
    let mut ds = CategoricalDataset::from_codes(variables, &rows)?;
    for v in &ds.variables {
        if v.labels.len() < 2 {
            return Err(Error::TooFewCategories {
                variable: v.name.clone(),
                count: v.labels.len(),
            });
        }
    }
    ds.provenance.push(format!("active [{}]", active.join(", ")));
    if let Some(b) = age_breaks {
        if cols.iter().any(|&ci| dict.columns()[ci].kind == ColumnKind::Integer) {
            ds.provenance.push(format!("age breaks {b:?}"));
        }
    }
    ds.provenance.push(match missing_policy {
        MissingPolicy::DropRow => format!("missing: drop-row ({dropped} dropped)"),
        MissingPolicy::MissingLevel => "missing: missing-level".to_string(),
    });
    Ok(ds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub label: String,
    pub count: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub variable: String,
    pub n: usize,
    pub rows: Vec<FrequencyRow>,
}

pub fn frequency_table(ds: &CategoricalDataset, variable: &str) -> Result<FrequencyTable> {
    let vi = ds.variable_index(variable)?;
    let n = ds.n();
    let rows = ds.variables()[vi]
        .labels
        .iter()
        .zip(ds.category_counts(vi))
        .map(|(label, count)| FrequencyRow {
            label: label.clone(),
            count,
            proportion: count as f64 / n as f64,
        })
        .collect();
    Ok(FrequencyTable {
        variable: variable.to_string(),
        n,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub label: String,
    pub count: usize,
    /// Full precision `100 * count / n`.
    pub percent: f64,
    /// `percent` rounded half away from zero to the table's decimals.
    pub percent_rounded: f64,
    #[serde(skip)]
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub variable: String,
    pub n: usize,
    pub decimals: u32,
    pub rows: Vec<RateRow>,
}

/// Rounds `100 * count / n` half away from zero to `decimals` places using
/// exact integer arithmetic. Returns the scaled integer (e.g. 284 for
/// 2.84 at two decimals).
pub fn rounded_percent_scaled(count: u64, n: u64, decimals: u32) -> u128 {
    let scale = 10u128.pow(decimals);
    let num = count as u128 * 100 * scale;
    let n = n as u128;
    (2 * num + n) / (2 * n)
}

pub fn format_scaled(scaled: u128, decimals: u32) -> String {
    if decimals == 0 {
        return scaled.to_string();
    }
    let scale = 10u128.pow(decimals);
    format!(
        "{}.{:0width$}",
        scaled / scale,
        scaled % scale,
        width = decimals as usize
    )
}

pub fn rate_by_group(ds: &CategoricalDataset, variable: &str, decimals: u32) -> Result<RateTable> {
    if decimals > 12 {
        return Err(Error::InvalidArgument("at most 12 decimals".into()));
    }
    let vi = ds.variable_index(variable)?;
    let n = ds.n();
    let rows = ds.variables()[vi]
        .labels
        .iter()
        .zip(ds.category_counts(vi))
        .map(|(label, count)| {
            let scaled = rounded_percent_scaled(count as u64, n as u64, decimals);
            RateRow {
                label: label.clone(),
                count,
                percent: 100.0 * count as f64 / n as f64,
                percent_rounded: scaled as f64 / 10f64.powi(decimals as i32),
                display: format_scaled(scaled, decimals),
            }
        })
        .collect();
    Ok(RateTable {
        variable: variable.to_string(),
        n,
        decimals,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionEstimate {
    pub count: u64,
    pub n: u64,
    pub estimate: f64,
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `count` successes out of `n`.
pub fn proportion_ci(count: u64, n: u64, level: f64) -> Result<ProportionEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if count > n {
        return Err(Error::CountExceedsTotal { count, n });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let nf = n as f64;
    let p = count as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if count == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if count == n { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok(ProportionEstimate {
        count,
        n,
        estimate: p,
        level,
        lo,
        hi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionRow {
    pub label: String,
    #[serde(flatten)]
    pub estimate: ProportionEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionTable {
    pub variable: String,
    pub level: f64,
    pub rows: Vec<ProportionRow>,
}

/// Wilson interval for the share of each category of `variable`.
pub fn proportion_table(ds: &CategoricalDataset, variable: &str, level: f64) -> Result<ProportionTable> {
    let vi = ds.variable_index(variable)?;
    let n = ds.n() as u64;
    let rows = ds.variables()[vi]
        .labels
        .iter()
        .zip(ds.category_counts(vi))
        .map(|(l, c)| {
            Ok(ProportionRow {
                label: l.clone(),
                estimate: proportion_ci(c as u64, n, level)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ProportionTable {
        variable: variable.to_string(),
        level,
        rows,
    })
}
