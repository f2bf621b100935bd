//! Options shared by every front end: raw table → filters → dataset → fit.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{from_raw, CategoricalDataset, MissingPolicy, DEFAULT_AGE_BREAKS};
use crate::error::{Error, Result};
use crate::mca::{fit_mca, Correction, FitOptions, McaModel, DEFAULT_RANK_TOL};
use crate::schema::{ColumnKind, DataDictionary, RawTable};

/// `VAR=label1|label2`: keep rows whose `VAR` is one of the labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterClause {
    pub variable: String,
    pub keep: Vec<String>,
}

impl FromStr for FilterClause {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (var, labels) = s.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("filter {s:?} is not of the form VAR=lab1|lab2"))
        })?;
        let variable = var.trim();
        if variable.is_empty() {
            return Err(Error::InvalidArgument(format!("filter {s:?} names no variable")));
        }
        let keep: Vec<String> = labels.split('|').map(str::to_string).collect();
        if keep.iter().all(|l| l.is_empty()) {
            return Err(Error::InvalidArgument(format!("filter {s:?} keeps no labels")));
        }
        Ok(Self {
            variable: variable.to_string(),
            keep,
        })
    }
}

/// Comma-separated 1-based axis list such as `1,2`.
pub fn parse_axes(s: &str) -> Result<Vec<usize>> {
    let axes = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&a| a >= 1)
                .ok_or_else(|| Error::InvalidArgument(format!("bad axis {t:?} in {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(axes)
}

/// Comma-separated integer breaks such as `0,18,30,130`.
pub fn parse_breaks(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidArgument(format!("bad age break {t:?} in {s:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Active variables; defaults to every categorical and integer column.
    pub active: Option<Vec<String>>,
    /// Breaks for integer columns; defaults to [`DEFAULT_AGE_BREAKS`].
    pub age_breaks: Option<Vec<i64>>,
    pub missing_policy: MissingPolicy,
    pub filters: Vec<FilterClause>,
    pub n_dims: Option<usize>,
    pub correction: Correction,
    pub rank_tol: Option<f64>,
}

pub fn default_active(dict: &DataDictionary) -> Vec<String> {
    dict.columns()
        .iter()
        .filter(|c| matches!(c.kind, ColumnKind::Categorical | ColumnKind::Integer))
        .map(|c| c.name.clone())
        .collect()
}

impl AnalysisOptions {
    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            n_dims: self.n_dims,
            rank_tol: self.rank_tol.unwrap_or(DEFAULT_RANK_TOL),
            correction: self.correction,
        }
    }

    /// Applies the filters to `raw`, then codes the active columns.
    pub fn build_dataset(&self, raw: &RawTable) -> Result<CategoricalDataset> {
        let mut table = raw.clone();
        for f in &self.filters {
            table = table.filter_rows(&f.variable, &f.keep)?;
        }
        let active = self
            .active
            .clone()
            .unwrap_or_else(|| default_active(raw.dictionary()));
        let breaks = self
            .age_breaks
            .clone()
            .unwrap_or_else(|| DEFAULT_AGE_BREAKS.to_vec());
        let mut ds = from_raw(&table, &active, Some(&breaks), self.missing_policy)?;
        if !self.filters.is_empty() {
            let trail: Vec<String> = self
                .filters
                .iter()
                .map(|f| format!("filter {} in [{}]", f.variable, f.keep.join("|")))
                .collect();
            ds = ds.with_provenance_prefix(trail);
        }
        Ok(ds)
    }

    pub fn fit(&self, ds: &CategoricalDataset) -> Result<McaModel> {
        fit_mca(ds, self.fit_options())
    }
}
