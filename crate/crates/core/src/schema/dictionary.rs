use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical,
    Integer,
    Date,
    Identifier,
}

impl ColumnKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "categorical" => Some(Self::Categorical),
            "integer" => Some(Self::Integer),
            "date" => Some(Self::Date),
            "identifier" => Some(Self::Identifier),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Categorical => "categorical",
            Self::Integer => "integer",
            Self::Date => "date",
            Self::Identifier => "identifier",
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepted on-disk date layouts. Values are always stored as ISO dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DateFormat {
    #[default]
    Iso,
    DayFirst,
}

impl DateFormat {
    pub fn parse_name(s: &str) -> Option<Self> {
        match s {
            "YYYY-MM-DD" => Some(Self::Iso),
            "DD/MM/YYYY" => Some(Self::DayFirst),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Iso => "YYYY-MM-DD",
            Self::DayFirst => "DD/MM/YYYY",
        }
    }

    fn pattern(self) -> &'static str {
        match self {
            Self::Iso => "%Y-%m-%d",
            Self::DayFirst => "%d/%m/%Y",
        }
    }

    pub fn parse_date(self, s: &str) -> Option<NaiveDate> {
        NaiveDate::parse_from_str(s.trim(), self.pattern()).ok()
    }

    /// Formats an ISO date string in this layout.
    pub fn render_iso(self, iso: &str) -> Option<String> {
        let d = DateFormat::Iso.parse_date(iso)?;
        Some(d.format(self.pattern()).to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub allowed_values: Option<Vec<String>>,
    pub date_format: Option<DateFormat>,
    /// Inclusive bounds, integer columns only.
    pub min: Option<i64>,
    pub max: Option<i64>,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
            allowed_values: None,
            date_format: None,
            min: None,
            max: None,
        }
    }

    pub fn with_allowed<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Self {
        self.allowed_values = Some(labels.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_range(mut self, min: Option<i64>, max: Option<i64>) -> Self {
        self.min = min;
        self.max = max;
        self
    }

    pub fn with_date_format(mut self, fmt: DateFormat) -> Self {
        self.date_format = Some(fmt);
        self
    }

    pub fn effective_date_format(&self) -> DateFormat {
        self.date_format.unwrap_or_default()
    }
}

/// Ordered, validated list of column declarations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDictionary {
    columns: Vec<ColumnSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DictionaryDoc {
    #[serde(default)]
    column: Vec<ColumnEntry>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ColumnEntry {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allowed_values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    date_format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<i64>,
}

impl DataDictionary {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        let mut seen = HashSet::new();
        for (i, col) in columns.iter().enumerate() {
            let position = i + 1;
            let err = |reason: String| Error::DictionaryColumn {
                position,
                column: col.name.clone(),
                reason,
            };
            if col.name.trim().is_empty() {
                return Err(err("empty column name".into()));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(err("duplicate column name".into()));
            }
            if let Some(labels) = &col.allowed_values {
                if col.kind != ColumnKind::Categorical {
                    return Err(err(format!("allowed_values given for {} column", col.kind)));
                }
                if labels.is_empty() {
                    return Err(err("allowed_values is empty".into()));
                }
                let mut uniq = HashSet::new();
                for l in labels {
                    if !uniq.insert(l.as_str()) {
                        return Err(err(format!("label {l:?} listed twice")));
                    }
                }
            }
            if col.date_format.is_some() && col.kind != ColumnKind::Date {
                return Err(err(format!("date_format given for {} column", col.kind)));
            }
            if (col.min.is_some() || col.max.is_some()) && col.kind != ColumnKind::Integer {
                return Err(err(format!("min/max given for {} column", col.kind)));
            }
            if let (Some(lo), Some(hi)) = (col.min, col.max) {
                if lo > hi {
                    return Err(err(format!("min {lo} exceeds max {hi}")));
                }
            }
        }
        Ok(Self { columns })
    }

    /// Parses the TOML dictionary document: one `[[column]]` table per
    /// column with `name`, `kind` and optional `allowed_values`,
    /// `date_format`, `min`, `max`.
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let doc: DictionaryDoc =
            toml::from_str(source).map_err(|e| Error::DictionarySyntax(e.message().to_string()))?;
        let mut columns = Vec::with_capacity(doc.column.len());
        for (i, entry) in doc.column.into_iter().enumerate() {
            let position = i + 1;
            let kind = ColumnKind::parse(&entry.kind).ok_or_else(|| Error::DictionaryColumn {
                position,
                column: entry.name.clone(),
                reason: format!("unknown kind {:?}", entry.kind),
            })?;
            let date_format = match &entry.date_format {
                None => None,
                Some(s) => Some(DateFormat::parse_name(s).ok_or_else(|| {
                    Error::DictionaryColumn {
                        position,
                        column: entry.name.clone(),
                        reason: format!(
                            "unsupported date_format {s:?} (expected YYYY-MM-DD or DD/MM/YYYY)"
                        ),
                    }
                })?),
            };
            columns.push(ColumnSpec {
                name: entry.name,
                kind,
                allowed_values: entry.allowed_values,
                date_format,
                min: entry.min,
                max: entry.max,
            });
        }
        Self::new(columns)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            column: &'a [ColumnEntry],
        }
        let entries: Vec<ColumnEntry> = self
            .columns
            .iter()
            .map(|c| ColumnEntry {
                name: c.name.clone(),
                kind: c.kind.as_str().into(),
                allowed_values: c.allowed_values.clone(),
                date_format: c.date_format.map(|f| f.name().to_string()),
                min: c.min,
                max: c.max,
            })
            .collect();
        toml::to_string(&Doc { column: &entries }).expect("dictionary serializes")
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }
}
