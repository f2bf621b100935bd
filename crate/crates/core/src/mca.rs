//! Multiple correspondence analysis on the indicator (disjunctive) table.
//!
//! With `n` individuals, `Q` variables and `J` categories, the fit takes the
//! thin SVD of the standardized residual matrix
//!
//! ```text
//! S = D_r^{-1/2} (P - r cᵀ) D_c^{-1/2},   P = Z / (nQ),  r_i = 1/n,  c_j = n_j / (nQ)
//! ```
//!
//! and derives principal coordinates `F = D_r^{-1/2} U Σ` (individuals) and
//! `G = D_c^{-1/2} V Σ` (categories). Eigenvalues are `λ_k = σ_k²`. Axes
//! with `σ_k < rank_tol · σ_1` are numerically trivial and dropped.
//!
//! Each retained axis is oriented so that its category coordinate of
//! largest magnitude is positive; ties (within a relative 1e-9) go to the
//! lowest category index.

use faer::Mat;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::CategoricalDataset;
use crate::error::{Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-12;
const SIGN_TIE_TOL: f64 = 1e-9;

/// n × J disjunctive coding of a dataset.
#[derive(Debug, Clone)]
pub struct IndicatorMatrix {
    z: DMatrix<f64>,
    n_variables: usize,
    counts: Vec<usize>,
    /// column → (variable, category)
    columns: Vec<(usize, usize)>,
    /// first column of each variable, plus J at the end
    offsets: Vec<usize>,
}

impl IndicatorMatrix {
    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }
    pub fn n(&self) -> usize {
        self.z.nrows()
    }
    pub fn n_variables(&self) -> usize {
        self.n_variables
    }
    pub fn n_categories(&self) -> usize {
        self.z.ncols()
    }
    pub fn category_counts(&self) -> &[usize] {
        &self.counts
    }
    pub fn column(&self, j: usize) -> (usize, usize) {
        self.columns[j]
    }
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

pub fn indicator_matrix(ds: &CategoricalDataset) -> Result<IndicatorMatrix> {
    if ds.n() < 2 {
        return Err(Error::Degenerate(format!(
            "MCA needs at least 2 individuals, got {}",
            ds.n()
        )));
    }
    let mut offsets = Vec::with_capacity(ds.n_variables() + 1);
    let mut columns = Vec::new();
    for (vi, v) in ds.variables().iter().enumerate() {
        if v.labels.len() < 2 {
            return Err(Error::TooFewCategories {
                variable: v.name.clone(),
                count: v.labels.len(),
            });
        }
        offsets.push(columns.len());
        columns.extend((0..v.labels.len()).map(|c| (vi, c)));
    }
    offsets.push(columns.len());
    let j = columns.len();
    let mut z = DMatrix::zeros(ds.n(), j);
    let mut counts = vec![0usize; j];
    for i in 0..ds.n() {
        for (vi, &c) in ds.row(i).iter().enumerate() {
            let col = offsets[vi] + c;
            z[(i, col)] = 1.0;
            counts[col] += 1;
        }
    }
    Ok(IndicatorMatrix {
        z,
        n_variables: ds.n_variables(),
        counts,
        columns,
        offsets,
    })
}

/// Burt table `ZᵀZ`: every pairwise cross-tabulation in block form.
pub fn burt_matrix(ind: &IndicatorMatrix) -> DMatrix<f64> {
    ind.z.transpose() * &ind.z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    #[default]
    None,
    Benzecri,
    Greenacre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    /// Axes kept for coordinates; `None` keeps every nontrivial axis.
    pub n_dims: Option<usize>,
    pub rank_tol: f64,
    pub correction: Correction,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_dims: None,
            rank_tol: DEFAULT_RANK_TOL,
            correction: Correction::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Categories,
    Individuals,
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "categories" | "cat" => Ok(Self::Categories),
            "individuals" | "ind" => Ok(Self::Individuals),
            _ => Err(Error::InvalidArgument(format!(
                "target must be categories or individuals, got {s:?}"
            ))),
        }
    }
}

/// A fitted analysis. Immutable once built.
#[derive(Debug, Clone)]
pub struct McaModel {
    n: usize,
    variable_names: Vec<String>,
    offsets: Vec<usize>,
    category_labels: Vec<String>,
    category_counts: Vec<usize>,
    column_masses: Vec<f64>,
    singular_values: Vec<f64>,
    eigenvalues: Vec<f64>,
    total_inertia: f64,
    row_coord: DMatrix<f64>,
    col_coord: DMatrix<f64>,
    row_cos2: DMatrix<f64>,
    col_cos2: DMatrix<f64>,
    row_ctr: DMatrix<f64>,
    col_ctr: DMatrix<f64>,
    eta2: DMatrix<f64>,
    options: FitOptions,
}

pub fn fit_mca(ds: &CategoricalDataset, options: FitOptions) -> Result<McaModel> {
    if options.n_dims == Some(0) {
        return Err(Error::InvalidArgument("n_dims must be at least 1".into()));
    }
    if !(options.rank_tol >= 0.0 && options.rank_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rank_tol {} outside [0, 1)",
            options.rank_tol
        )));
    }
    let ind = indicator_matrix(ds)?;
    let n = ind.n();
    let q = ind.n_variables();
    let j = ind.n_categories();
    let nf = n as f64;
    let qf = q as f64;

    let masses: Vec<f64> = ind.counts.iter().map(|&c| c as f64 / (nf * qf)).collect();
    let mut s = Mat::<f64>::zeros(n, j);
    let mut total_inertia = 0.0;
    for col in 0..j {
        let c = masses[col];
        let scale = (nf * c).sqrt();
        for i in 0..n {
            let v = (ind.z[(i, col)] / qf - c) / scale;
            s[(i, col)] = v;
            total_inertia += v * v;
        }
    }

    let svd = s
        .thin_svd()
        .map_err(|e| Error::Degenerate(format!("SVD did not converge: {e:?}")))?;
    let (u, v, sv) = (svd.U(), svd.V(), svd.S());
    let n_sv = n.min(j);
    let mut order: Vec<usize> = (0..n_sv).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let sigma_max = sv[order[0]];
    if sigma_max.is_nan() || sigma_max <= 0.0 {
        return Err(Error::Degenerate("indicator table has no inertia".into()));
    }
    let nontrivial: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| sv[k] >= options.rank_tol * sigma_max)
        .take(j - q)
        .collect();
    let singular_values: Vec<f64> = nontrivial.iter().map(|&k| sv[k]).collect();
    let eigenvalues: Vec<f64> = singular_values.iter().map(|s| s * s).collect();
    let k = options
        .n_dims
        .map_or(nontrivial.len(), |d| d.min(nontrivial.len()));

    let mut row_coord = DMatrix::zeros(n, k);
    let mut col_coord = DMatrix::zeros(j, k);
    for (axis, &src) in nontrivial.iter().take(k).enumerate() {
        let sigma = singular_values[axis];
        for col in 0..j {
            col_coord[(col, axis)] = v[(col, src)] * sigma / masses[col].sqrt();
        }
        for i in 0..n {
            row_coord[(i, axis)] = u[(i, src)] * sigma * nf.sqrt();
        }
        let mut lead = 0;
        let mut best = 0.0f64;
        for col in 0..j {
            let a = col_coord[(col, axis)].abs();
            if a > best * (1.0 + SIGN_TIE_TOL) {
                best = a;
                lead = col;
            }
        }
        if col_coord[(lead, axis)] < 0.0 {
            col_coord.column_mut(axis).neg_mut();
            row_coord.column_mut(axis).neg_mut();
        }
    }

    // squared chi-square distances to the centroid
    let col_d2: Vec<f64> = ind.counts.iter().map(|&c| nf / c as f64 - 1.0).collect();
    let row_d2: Vec<f64> = (0..n)
        .map(|i| {
            let inv: f64 = ds
                .row(i)
                .iter()
                .enumerate()
                .map(|(vi, &c)| 1.0 / ind.counts[ind.offsets[vi] + c] as f64)
                .sum();
            nf / qf * inv - 1.0
        })
        .collect();

    let cos2 = |coord: &DMatrix<f64>, d2: &[f64]| {
        DMatrix::from_fn(coord.nrows(), k, |r, a| {
            if d2[r] > 0.0 {
                (coord[(r, a)].powi(2) / d2[r]).min(1.0)
            } else {
                0.0
            }
        })
    };
    let col_cos2 = cos2(&col_coord, &col_d2);
    let row_cos2 = cos2(&row_coord, &row_d2);
    let col_ctr = DMatrix::from_fn(j, k, |c, a| {
        masses[c] * col_coord[(c, a)].powi(2) / eigenvalues[a]
    });
    let row_ctr = DMatrix::from_fn(n, k, |i, a| row_coord[(i, a)].powi(2) / (nf * eigenvalues[a]));

    let mut eta2 = DMatrix::zeros(q, k);
    for a in 0..k {
        let scores: Vec<f64> = row_coord.column(a).iter().copied().collect();
        for vi in 0..q {
            let codes: Vec<usize> = (0..n).map(|i| ds.code(i, vi)).collect();
            eta2[(vi, a)] = correlation_ratio(&scores, &codes, ind.offsets[vi + 1] - ind.offsets[vi]);
        }
    }

    let mut category_labels = Vec::with_capacity(j);
    for v in ds.variables() {
        for l in &v.labels {
            category_labels.push(format!("{}::{}", v.name, l));
        }
    }

    Ok(McaModel {
        n,
        variable_names: ds.variables().iter().map(|v| v.name.clone()).collect(),
        offsets: ind.offsets,
        category_labels,
        category_counts: ind.counts,
        column_masses: masses,
        singular_values,
        eigenvalues,
        total_inertia,
        row_coord,
        col_coord,
        row_cos2,
        col_cos2,
        row_ctr,
        col_ctr,
        eta2,
        options,
    })
}

/// Between-group over total sum of squares of `scores` grouped by `codes`.
pub fn correlation_ratio(scores: &[f64], codes: &[usize], n_groups: usize) -> f64 {
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let mut sums = vec![0.0; n_groups];
    let mut counts = vec![0usize; n_groups];
    for (&s, &c) in scores.iter().zip(codes) {
        sums[c] += s;
        counts[c] += 1;
    }
    let total: f64 = scores.iter().map(|s| (s - mean).powi(2)).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let between: f64 = sums
        .iter()
        .zip(&counts)
        .filter(|(_, &m)| m > 0)
        .map(|(s, &m)| m as f64 * (s / m as f64 - mean).powi(2))
        .sum();
    (between / total).clamp(0.0, 1.0)
}

impl McaModel {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn n_variables(&self) -> usize {
        self.variable_names.len()
    }
    pub fn n_categories(&self) -> usize {
        self.category_labels.len()
    }
    /// Number of axes with stored coordinates.
    pub fn n_dims(&self) -> usize {
        self.col_coord.ncols()
    }
    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }
    /// Category columns of variable `v`.
    pub fn variable_columns(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }
    pub fn category_labels(&self) -> &[String] {
        &self.category_labels
    }
    pub fn category_counts(&self) -> &[usize] {
        &self.category_counts
    }
    pub fn column_masses(&self) -> &[f64] {
        &self.column_masses
    }
    /// Every nontrivial singular value, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }
    /// Every nontrivial eigenvalue, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    /// Squared Frobenius norm of the standardized residuals, `(J - Q) / Q`.
    pub fn total_inertia(&self) -> f64 {
        self.total_inertia
    }
    pub fn row_coords(&self) -> &DMatrix<f64> {
        &self.row_coord
    }
    pub fn col_coords(&self) -> &DMatrix<f64> {
        &self.col_coord
    }
    pub fn row_cos2(&self) -> &DMatrix<f64> {
        &self.row_cos2
    }
    pub fn col_cos2(&self) -> &DMatrix<f64> {
        &self.col_cos2
    }
    pub fn row_ctr(&self) -> &DMatrix<f64> {
        &self.row_ctr
    }
    pub fn col_ctr(&self) -> &DMatrix<f64> {
        &self.col_ctr
    }
    pub fn eta2(&self) -> &DMatrix<f64> {
        &self.eta2
    }
    pub fn options(&self) -> &FitOptions {
        &self.options
    }

    /// Maps 1-based axis numbers to column indices.
    pub fn check_axes(&self, dims: &[usize]) -> Result<Vec<usize>> {
        dims.iter()
            .map(|&d| {
                if d == 0 || d > self.n_dims() {
                    Err(Error::AxisOutOfRange {
                        axis: d,
                        retained: self.n_dims(),
                    })
                } else {
                    Ok(d - 1)
                }
            })
            .collect()
    }

    pub fn individual_labels(&self) -> Vec<String> {
        (1..=self.n).map(|i| i.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenTable {
    pub dims: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub percent: Vec<f64>,
    pub cumulative: Vec<f64>,
}

fn percent_table(values: &[f64], denominator: f64) -> EigenTable {
    let percent: Vec<f64> = values.iter().map(|v| 100.0 * v / denominator).collect();
    let cumulative = percent
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    EigenTable {
        dims: (1..=values.len()).collect(),
        eigenvalues: values.to_vec(),
        percent,
        cumulative,
    }
}

pub fn eigenvalue_table(model: &McaModel) -> EigenTable {
    let total: f64 = model.eigenvalues.iter().sum();
    percent_table(&model.eigenvalues, total)
}

/// Benzécri or Greenacre adjusted eigenvalues with their percentages.
///
/// Both keep only axes with `λ > 1/Q` and use `((Q/(Q-1)) (λ - 1/Q))²`.
/// Benzécri percentages are relative to the sum of the adjusted values;
/// Greenacre's are relative to the adjusted total inertia
/// `Q/(Q-1) · (Σλ² - (J-Q)/Q²)`.
pub fn adjust_eigenvalues(
    eigenvalues: &[f64],
    n_variables: usize,
    n_categories: usize,
    mode: Correction,
) -> Result<EigenTable> {
    if n_variables < 2 {
        return Err(Error::InvalidArgument(
            "eigenvalue corrections need at least 2 variables".into(),
        ));
    }
    if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("eigenvalues must be descending".into()));
    }
    let q = n_variables as f64;
    let total: f64 = eigenvalues.iter().sum();
    if mode == Correction::None {
        return Ok(percent_table(eigenvalues, total));
    }
    let factor = q / (q - 1.0);
    let adjusted: Vec<f64> = eigenvalues
        .iter()
        .filter(|&&l| l > 1.0 / q)
        .map(|&l| (factor * (l - 1.0 / q)).powi(2))
        .collect();
    let denominator = match mode {
        Correction::Benzecri => adjusted.iter().sum(),
        _ => {
            let j = n_categories as f64;
            let sum_sq: f64 = eigenvalues.iter().map(|l| l * l).sum();
            factor * (sum_sq - (j - q) / (q * q))
        }
    };
    Ok(percent_table(&adjusted, denominator))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointTable {
    pub target: Target,
    pub measure: &'static str,
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

fn point_table(
    model: &McaModel,
    target: Target,
    dims: &[usize],
    measure: &'static str,
    pick: fn(&McaModel, Target) -> &DMatrix<f64>,
) -> Result<PointTable> {
    let cols = model.check_axes(dims)?;
    let m = pick(model, target);
    let labels = match target {
        Target::Categories => model.category_labels.clone(),
        Target::Individuals => model.individual_labels(),
    };
    let values = (0..m.nrows())
        .map(|r| cols.iter().map(|&c| m[(r, c)]).collect())
        .collect();
    Ok(PointTable {
        target,
        measure,
        dims: dims.to_vec(),
        labels,
        values,
    })
}

/// Principal coordinates on the 1-based axes `dims`.
pub fn coordinates(model: &McaModel, target: Target, dims: &[usize]) -> Result<PointTable> {
    point_table(model, target, dims, "coord", |m, t| match t {
        Target::Categories => &m.col_coord,
        Target::Individuals => &m.row_coord,
    })
}

/// Per-axis squared cosines; sum across axes for a plane's quality.
pub fn cos2(model: &McaModel, target: Target, dims: &[usize]) -> Result<PointTable> {
    point_table(model, target, dims, "cos2", |m, t| match t {
        Target::Categories => &m.col_cos2,
        Target::Individuals => &m.row_cos2,
    })
}

/// Contributions to every retained axis, as fractions summing to 1.
pub fn contributions(model: &McaModel, target: Target) -> PointTable {
    let dims: Vec<usize> = (1..=model.n_dims()).collect();
    point_table(model, target, &dims, "ctr", |m, t| match t {
        Target::Categories => &m.col_ctr,
        Target::Individuals => &m.row_ctr,
    })
    .expect("all retained axes are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eta2Table {
    pub variables: Vec<String>,
    pub dims: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

pub fn variable_eta2(model: &McaModel) -> Eta2Table {
    Eta2Table {
        variables: model.variable_names.clone(),
        dims: (1..=model.n_dims()).collect(),
        values: (0..model.n_variables())
            .map(|v| model.eta2.row(v).iter().copied().collect())
            .collect(),
    }
}

/// Places a supplementary category, given as 0/1 membership over the
/// individuals, at the barycenter of its members divided by `σ_k`.
pub fn project_supplementary(model: &McaModel, membership: &[bool]) -> Result<Vec<f64>> {
    if membership.len() != model.n {
        return Err(Error::InvalidArgument(format!(
            "membership has {} entries, model has {} individuals",
            membership.len(),
            model.n
        )));
    }
    let members: Vec<usize> = (0..model.n).filter(|&i| membership[i]).collect();
    if members.is_empty() {
        return Err(Error::InvalidArgument(
            "supplementary column has no members".into(),
        ));
    }
    let m = members.len() as f64;
    Ok((0..model.n_dims())
        .map(|a| {
            let sum: f64 = members.iter().map(|&i| model.row_coord[(i, a)]).sum();
            sum / m / model.singular_values[a]
        })
        .collect())
}
