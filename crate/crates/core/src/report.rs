//! JSON and CSV renderings shared by the CLI and the HTTP service.
//!
//! JSON numbers use the shortest representation that parses back to the
//! same `f64`, so exports are exact and byte-stable.

use serde::Serialize;

use crate::dataset::{CategoricalDataset, FrequencyTable, RateTable};
use crate::inference::{format_p_value, DimensionDescription, GroupEllipses};
use crate::mca::{
    adjust_eigenvalues, contributions, coordinates, cos2, eigenvalue_table, variable_eta2,
    Correction, EigenTable, Eta2Table, McaModel, PointTable, Target,
};
use crate::schema::ValidationReport;

/// Pretty JSON with a trailing newline. Every report goes through here.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategorySummary {
    pub label: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableSummary {
    pub name: String,
    pub categories: Vec<CategorySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub n: usize,
    pub q: usize,
    pub j: usize,
    pub variables: Vec<VariableSummary>,
    pub provenance: Vec<String>,
}

pub fn dataset_summary(ds: &CategoricalDataset) -> DatasetSummary {
    DatasetSummary {
        n: ds.n(),
        q: ds.n_variables(),
        j: ds.n_categories(),
        variables: ds
            .variables()
            .iter()
            .enumerate()
            .map(|(vi, v)| VariableSummary {
                name: v.name.clone(),
                categories: v
                    .labels
                    .iter()
                    .zip(ds.category_counts(vi))
                    .map(|(l, count)| CategorySummary {
                        label: l.clone(),
                        count,
                    })
                    .collect(),
            })
            .collect(),
        provenance: ds.provenance().to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub rows: usize,
    pub validation: ValidationReport,
    pub summary: DatasetSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    pub labels: Vec<String>,
    pub coord: Vec<Vec<f64>>,
    pub cos2: Vec<Vec<f64>>,
    pub ctr: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eta2Block {
    pub variables: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectedBlock {
    pub mode: Correction,
    pub eigenvalues: Vec<f64>,
    pub percent: Vec<f64>,
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelOptions {
    pub n: usize,
    pub q: usize,
    pub j: usize,
    pub n_dims: usize,
    pub requested_dims: Option<usize>,
    pub rank_tol: f64,
    pub correction: Correction,
    pub total_inertia: f64,
}

/// The single-document model export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    pub eigenvalues: Vec<f64>,
    pub percent: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub categories: PointSet,
    pub individuals: PointSet,
    pub eta2: Eta2Block,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected: Option<CorrectedBlock>,
    pub options: ModelOptions,
}

fn point_set(model: &McaModel, target: Target) -> PointSet {
    let dims: Vec<usize> = (1..=model.n_dims()).collect();
    let coord = coordinates(model, target, &dims).expect("retained axes");
    let c2 = cos2(model, target, &dims).expect("retained axes");
    let ctr = contributions(model, target);
    PointSet {
        labels: coord.labels,
        coord: coord.values,
        cos2: c2.values,
        ctr: ctr.values,
    }
}

pub fn corrected_table(model: &McaModel) -> Option<CorrectedBlock> {
    let mode = model.options().correction;
    if mode == Correction::None || model.n_variables() < 2 {
        return None;
    }
    let t = adjust_eigenvalues(
        model.eigenvalues(),
        model.n_variables(),
        model.n_categories(),
        mode,
    )
    .ok()?;
    Some(CorrectedBlock {
        mode,
        eigenvalues: t.eigenvalues,
        percent: t.percent,
        cumulative: t.cumulative,
    })
}

pub fn model_report(model: &McaModel) -> ModelReport {
    let eig = eigenvalue_table(model);
    let eta = variable_eta2(model);
    let o = model.options();
    ModelReport {
        eigenvalues: eig.eigenvalues,
        percent: eig.percent,
        cumulative: eig.cumulative,
        categories: point_set(model, Target::Categories),
        individuals: point_set(model, Target::Individuals),
        eta2: Eta2Block {
            variables: eta.variables,
            values: eta.values,
        },
        corrected: corrected_table(model),
        options: ModelOptions {
            n: model.n(),
            q: model.n_variables(),
            j: model.n_categories(),
            n_dims: model.n_dims(),
            requested_dims: o.n_dims,
            rank_tol: o.rank_tol,
            correction: o.correction,
            total_inertia: model.total_inertia(),
        },
    }
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("write to Vec");
    for r in rows {
        w.write_record(&r).expect("write to Vec");
    }
    String::from_utf8(w.into_inner().expect("flush Vec")).expect("utf-8")
}

fn num(x: f64) -> String {
    // shortest round-trip form, same digits as the JSON exports
    serde_json::to_string(&x).expect("number")
}

pub fn rate_table_csv(t: &RateTable) -> String {
    csv_string(
        &["variable", "label", "count", "percent"],
        t.rows.iter().map(|r| {
            vec![
                t.variable.clone(),
                r.label.clone(),
                r.count.to_string(),
                r.display.clone(),
            ]
        }),
    )
}

pub fn frequency_table_csv(t: &FrequencyTable) -> String {
    csv_string(
        &["variable", "label", "count", "proportion"],
        t.rows.iter().map(|r| {
            vec![
                t.variable.clone(),
                r.label.clone(),
                r.count.to_string(),
                num(r.proportion),
            ]
        }),
    )
}

pub fn eigen_table_csv(t: &EigenTable) -> String {
    csv_string(
        &["dim", "eigenvalue", "percent", "cumulative"],
        (0..t.dims.len()).map(|k| {
            vec![
                t.dims[k].to_string(),
                num(t.eigenvalues[k]),
                num(t.percent[k]),
                num(t.cumulative[k]),
            ]
        }),
    )
}

pub fn point_table_csv(t: &PointTable) -> String {
    let cols: Vec<String> = t.dims.iter().map(|d| format!("dim{d}")).collect();
    let mut header = vec!["label"];
    header.extend(cols.iter().map(String::as_str));
    csv_string(
        &header,
        t.labels.iter().zip(&t.values).map(|(l, v)| {
            let mut r = vec![l.clone()];
            r.extend(v.iter().map(|x| num(*x)));
            r
        }),
    )
}

pub fn eta2_table_csv(t: &Eta2Table) -> String {
    let cols: Vec<String> = t.dims.iter().map(|d| format!("dim{d}")).collect();
    let mut header = vec!["variable"];
    header.extend(cols.iter().map(String::as_str));
    csv_string(
        &header,
        t.variables.iter().zip(&t.values).map(|(l, v)| {
            let mut r = vec![l.clone()];
            r.extend(v.iter().map(|x| num(*x)));
            r
        }),
    )
}

/// Variables first, then categories, in one long table.
pub fn dimension_description_csv(d: &DimensionDescription) -> String {
    let vars = d.variables.iter().map(|v| {
        vec![
            "variable".into(),
            v.variable.clone(),
            String::new(),
            num(v.eta2),
            format_p_value(v.p_value),
        ]
    });
    let cats = d.categories.iter().map(|c| {
        vec![
            "category".into(),
            c.variable.clone(),
            c.category.clone(),
            num(c.estimate),
            format_p_value(c.p_value),
        ]
    });
    csv_string(
        &["kind", "variable", "category", "statistic", "p_value"],
        vars.chain(cats),
    )
}

pub fn ellipses_csv(g: &GroupEllipses) -> String {
    csv_string(
        &[
            "group", "members", "center_x", "center_y", "semi_major", "semi_minor", "angle",
            "degenerate",
        ],
        g.ellipses.iter().map(|e| {
            vec![
                e.group.clone(),
                e.members.to_string(),
                num(e.center[0]),
                num(e.center[1]),
                num(e.semi_axes[0]),
                num(e.semi_axes[1]),
                num(e.angle),
                e.degenerate.to_string(),
            ]
        }),
    )
}
