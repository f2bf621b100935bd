//! Dimension descriptions and group confidence ellipses.

use serde::{Deserialize, Serialize};

use crate::dataset::CategoricalDataset;
use crate::error::{Error, Result};
use crate::mca::McaModel;
use crate::special::{chi2_2df_quantile, f_sf_from_eta2, t_two_sided};

pub const DEFAULT_P_THRESHOLD: f64 = 0.05;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableAssociation {
    pub variable: String,
    pub eta2: f64,
    pub f_statistic: f64,
    pub df: (usize, usize),
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryAssociation {
    pub variable: String,
    pub category: String,
    pub count: usize,
    /// Mean axis score of the category's individuals (grand mean is 0).
    pub estimate: f64,
    pub t_statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionDescription {
    pub axis: usize,
    pub p_threshold: f64,
    pub variables: Vec<VariableAssociation>,
    pub categories: Vec<CategoryAssociation>,
}

fn check_dataset(model: &McaModel, ds: &CategoricalDataset) -> Result<()> {
    if ds.n() != model.n() {
        return Err(Error::DatasetMismatch(format!(
            "dataset has {} individuals, model has {}",
            ds.n(),
            model.n()
        )));
    }
    let mut labels = Vec::with_capacity(model.n_categories());
    for v in ds.variables() {
        for l in &v.labels {
            labels.push(format!("{}::{}", v.name, l));
        }
    }
    if labels != model.category_labels() {
        return Err(Error::DatasetMismatch("category sets differ".into()));
    }
    Ok(())
}

/// Ranks variables (correlation ratio with a one-way ANOVA F test) and
/// categories (group mean of the axis scores with a t test against 0 on
/// the pooled within-group variance) by association with `axis`
/// (1-based). Only rows with `p ≤ p_threshold` are kept; both lists are
/// sorted by ascending p-value.
pub fn describe_dimension(
    model: &McaModel,
    ds: &CategoricalDataset,
    axis: usize,
    p_threshold: f64,
) -> Result<DimensionDescription> {
    let a = model.check_axes(&[axis])?[0];
    check_dataset(model, ds)?;
    if !(0.0..=1.0).contains(&p_threshold) {
        return Err(Error::InvalidArgument(format!(
            "p threshold {p_threshold} outside [0, 1]"
        )));
    }
    let n = ds.n();
    let scores: Vec<f64> = model.row_coords().column(a).iter().copied().collect();
    let mut variables = Vec::new();
    let mut categories = Vec::new();
    for (vi, var) in ds.variables().iter().enumerate() {
        let jq = var.labels.len();
        let mut sums = vec![0.0; jq];
        let counts = ds.category_counts(vi);
        for (i, s) in scores.iter().enumerate() {
            sums[ds.code(i, vi)] += s;
        }
        let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &m)| s / m as f64).collect();
        let ss_within: f64 = scores
            .iter()
            .enumerate()
            .map(|(i, s)| (s - means[ds.code(i, vi)]).powi(2))
            .sum();
        let eta2 = model.eta2()[(vi, a)];
        let d1 = jq - 1;
        let d2 = n.saturating_sub(jq);
        let (f_statistic, p_value) = if d2 == 0 {
            (f64::INFINITY, 1.0)
        } else if eta2 >= 1.0 {
            (f64::INFINITY, 0.0)
        } else {
            let f = (eta2 / d1 as f64) / ((1.0 - eta2) / d2 as f64);
            (f, f_sf_from_eta2(eta2, d1 as f64, d2 as f64))
        };
        variables.push(VariableAssociation {
            variable: var.name.clone(),
            eta2,
            f_statistic,
            df: (d1, d2),
            p_value,
        });

        let msw = if d2 > 0 { ss_within / d2 as f64 } else { f64::NAN };
        for (c, label) in var.labels.iter().enumerate() {
            let est = means[c];
            let se = (msw / counts[c] as f64).sqrt();
            let (t, p) = if d2 == 0 {
                (f64::NAN, 1.0)
            } else if se > 0.0 {
                let t = est / se;
                (t, t_two_sided(t, d2 as f64))
            } else if est.abs() > 0.0 {
                (est.signum() * f64::INFINITY, 0.0)
            } else {
                (0.0, 1.0)
            };
            categories.push(CategoryAssociation {
                variable: var.name.clone(),
                category: label.clone(),
                count: counts[c],
                estimate: est,
                t_statistic: t,
                p_value: p,
            });
        }
    }
    variables.retain(|v| v.p_value <= p_threshold);
    categories.retain(|c| c.p_value <= p_threshold);
    variables.sort_by(|x, y| x.p_value.total_cmp(&y.p_value));
    categories.sort_by(|x, y| x.p_value.total_cmp(&y.p_value));
    Ok(DimensionDescription {
        axis,
        p_threshold,
        variables,
        categories,
    })
}

/// Renders a p-value for display tables; underflowed values print as
/// `< 1e-16`.
pub fn format_p_value(p: f64) -> String {
    if p < 1e-16 {
        "< 1e-16".to_string()
    } else {
        format!("{p:.4e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EllipseKind {
    /// Confidence region of the group barycenter (covariance / m).
    #[default]
    Mean,
    /// Region covering the group's observations.
    Observation,
}

impl std::str::FromStr for EllipseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "observation" => Ok(Self::Observation),
            _ => Err(Error::InvalidArgument(format!(
                "ellipse kind must be mean or observation, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipseSpec {
    pub group: String,
    pub center: [f64; 2],
    /// Semi-axis lengths, major first.
    pub semi_axes: [f64; 2],
    /// Major-axis direction in radians, in (-π/2, π/2].
    pub angle: f64,
    pub level: f64,
    pub kind: EllipseKind,
    pub members: usize,
    /// Covariance is singular (all members on a point or a line).
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedGroup {
    pub group: String,
    pub members: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupEllipses {
    pub variable: String,
    pub axes: [usize; 2],
    pub level: f64,
    pub kind: EllipseKind,
    pub ellipses: Vec<EllipseSpec>,
    pub skipped: Vec<SkippedGroup>,
}

/// Ellipse for one point cloud. Needs at least three points.
pub fn ellipse_from_points(
    group: &str,
    points: &[[f64; 2]],
    level: f64,
    kind: EllipseKind,
) -> Result<EllipseSpec> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let m = points.len();
    if m < 3 {
        return Err(Error::InvalidArgument(format!(
            "group {group:?} has {m} members; at least 3 are needed"
        )));
    }
    let mf = m as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / mf;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / mf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let scale = match kind {
        EllipseKind::Observation => mf - 1.0,
        EllipseKind::Mean => (mf - 1.0) * mf,
    };
    let (a, d, b) = (sxx / scale, syy / scale, sxy / scale);
    let half_trace = 0.5 * (a + d);
    let radius = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let e1 = (half_trace + radius).max(0.0);
    let e2 = (half_trace - radius).max(0.0);
    let q = chi2_2df_quantile(level);
    let angle = 0.5 * (2.0 * b).atan2(a - d);
    let angle = if angle <= -std::f64::consts::FRAC_PI_2 {
        angle + std::f64::consts::PI
    } else {
        angle
    };
    Ok(EllipseSpec {
        group: group.to_string(),
        center: [cx, cy],
        semi_axes: [(q * e1).sqrt(), (q * e2).sqrt()],
        angle,
        level,
        kind,
        members: m,
        degenerate: e2 <= 1e-12 * e1.max(f64::MIN_POSITIVE),
    })
}

/// One ellipse per category of `group_variable` on the plane of the two
/// 1-based `axes`. Categories with fewer than three members are listed in
/// `skipped`.
pub fn group_ellipse(
    model: &McaModel,
    ds: &CategoricalDataset,
    group_variable: &str,
    axes: [usize; 2],
    level: f64,
    kind: EllipseKind,
) -> Result<GroupEllipses> {
    let cols = model.check_axes(&axes)?;
    check_dataset(model, ds)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let vi = ds.variable_index(group_variable)?;
    let f = model.row_coords();
    let labels = &ds.variables()[vi].labels;
    let mut groups: Vec<Vec<[f64; 2]>> = vec![Vec::new(); labels.len()];
    for i in 0..ds.n() {
        groups[ds.code(i, vi)].push([f[(i, cols[0])], f[(i, cols[1])]]);
    }
    let mut ellipses = Vec::new();
    let mut skipped = Vec::new();
    for (label, pts) in labels.iter().zip(&groups) {
        if pts.len() < 3 {
            skipped.push(SkippedGroup {
                group: label.clone(),
                members: pts.len(),
                reason: "fewer than 3 members".into(),
            });
            continue;
        }
        ellipses.push(ellipse_from_points(label, pts, level, kind)?);
    }
    Ok(GroupEllipses {
        variable: group_variable.to_string(),
        axes,
        level,
        kind,
        ellipses,
        skipped,
    })
}
