//! Test-side oracles, written independently of the library's numerics.
#![allow(dead_code, clippy::needless_range_loop)]

use mcaw_core::dataset::{CategoricalDataset, Variable};
use mcaw_core::mca::McaModel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random dataset with every category observed. `levels[q]` ≥ 2.
pub fn random_dataset(seed: u64, n: usize, levels: &[usize]) -> CategoricalDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_levels = levels.iter().copied().max().unwrap();
    assert!(n >= max_levels);
    let mut rows: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            levels
                .iter()
                .map(|&l| if i < l { i } else { rng.random_range(0..l) })
                .collect()
        })
        .collect();
    // the first rows cover every level; make the cover less regular
    for q in 0..levels.len() {
        let mut col: Vec<usize> = rows.iter().map(|r| r[q]).collect();
        col.shuffle(&mut rng);
        for (r, c) in rows.iter_mut().zip(col) {
            r[q] = c;
        }
    }
    let variables = levels
        .iter()
        .enumerate()
        .map(|(q, &l)| Variable {
            name: format!("v{q}"),
            labels: (0..l).map(|c| format!("c{c}")).collect(),
        })
        .collect();
    CategoricalDataset::from_codes(variables, &rows).unwrap()
}

/// 40 rows: `x` splits them in half, `y` copies `x` except on two rows,
/// `z` is unrelated noise.
pub fn planted_40() -> CategoricalDataset {
    let rows: Vec<Vec<String>> = (0..40)
        .map(|i| {
            let x = if i < 20 { "x1" } else { "x2" };
            let y = match i {
                3 => "y2",
                37 => "y1",
                _ if i < 20 => "y1",
                _ => "y2",
            };
            let z = ["z1", "z2", "z3"][(i * 7 + i / 3) % 3];
            vec![x.to_string(), y.to_string(), z.to_string()]
        })
        .collect();
    CategoricalDataset::from_labels(&["x", "y", "z"], &rows).unwrap()
}

/// Random shape within Q ≤ 5, J ≤ 20, n ≤ 200.
pub fn random_shape(seed: u64) -> (usize, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let q = rng.random_range(2..=5);
    let mut levels = Vec::with_capacity(q);
    let mut budget = 20;
    for k in 0..q {
        let reserve = 2 * (q - k - 1);
        let hi = (budget - reserve).min(6);
        let l = rng.random_range(2..=hi);
        levels.push(l);
        budget -= l;
    }
    let n = rng.random_range(8..=200);
    (n, levels)
}

pub fn random_case(seed: u64) -> CategoricalDataset {
    let (n, levels) = random_shape(seed);
    random_dataset(seed, n, &levels)
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix (row-major, m × m).
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let m = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    e.sort_by(|x, y| y.total_cmp(x));
    e
}

/// One-sided Jacobi singular values of an r × c matrix, descending.
pub fn jacobi_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let r = a.len();
    let c = a[0].len();
    // work on the columns of the taller orientation
    let (rows, cols) = (r.max(c), r.min(c));
    let mut u: Vec<Vec<f64>> = if r >= c {
        (0..c).map(|j| (0..r).map(|i| a[i][j]).collect()).collect()
    } else {
        a.to_vec()
    };
    for _sweep in 0..200 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = cs * x - sn * y;
                    u[q][i] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = u.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Eigenvalues expected for two variables: (1 ± ρ)/2 per simple-CA
/// singular value ρ, plus |J1 − J2| halves. Descending.
pub fn two_variable_law(ds: &CategoricalDataset) -> Vec<f64> {
    assert_eq!(ds.n_variables(), 2);
    let j1 = ds.variables()[0].labels.len();
    let j2 = ds.variables()[1].labels.len();
    let n = ds.n() as f64;
    let mut tab = vec![vec![0.0; j2]; j1];
    for i in 0..ds.n() {
        tab[ds.code(i, 0)][ds.code(i, 1)] += 1.0;
    }
    let r: Vec<f64> = tab.iter().map(|row| row.iter().sum::<f64>() / n).collect();
    let c: Vec<f64> = (0..j2).map(|b| tab.iter().map(|row| row[b]).sum::<f64>() / n).collect();
    let s: Vec<Vec<f64>> = (0..j1)
        .map(|a| {
            (0..j2)
                .map(|b| (tab[a][b] / n - r[a] * c[b]) / (r[a] * c[b]).sqrt())
                .collect()
        })
        .collect();
    let rho = jacobi_singular_values(&s);
    let k = j1.min(j2) - 1;
    let mut out = Vec::new();
    for &p in rho.iter().take(k) {
        out.push((1.0 + p) / 2.0);
        out.push((1.0 - p) / 2.0);
    }
    out.extend(std::iter::repeat_n(0.5, j1.abs_diff(j2)));
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// Principal inertias of the simple CA of the Burt table, descending.
pub fn burt_ca_eigenvalues(ds: &CategoricalDataset) -> Vec<f64> {
    let offsets: Vec<usize> = ds
        .variables()
        .iter()
        .scan(0, |acc, v| {
            let o = *acc;
            *acc += v.labels.len();
            Some(o)
        })
        .collect();
    let j = ds.n_categories();
    let mut b = vec![vec![0.0; j]; j];
    for i in 0..ds.n() {
        let cols: Vec<usize> = ds.row(i).iter().enumerate().map(|(q, &c)| offsets[q] + c).collect();
        for &x in &cols {
            for &y in &cols {
                b[x][y] += 1.0;
            }
        }
    }
    let total: f64 = b.iter().flatten().sum();
    let m: Vec<f64> = b.iter().map(|row| row.iter().sum::<f64>() / total).collect();
    let s: Vec<Vec<f64>> = (0..j)
        .map(|x| (0..j).map(|y| (b[x][y] / total - m[x] * m[y]) / (m[x] * m[y]).sqrt()).collect())
        .collect();
    // S is symmetric, so its singular values are |eigenvalues|
    let mut sv: Vec<f64> = jacobi_eigenvalues(&s).into_iter().map(f64::abs).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.into_iter().map(|x| x * x).collect()
}

/// One-way ANOVA of `scores` grouped by `groups`: (η², F, d1, d2).
pub fn anova(scores: &[f64], groups: &[usize]) -> (f64, f64, f64, f64) {
    let k = groups.iter().max().unwrap() + 1;
    let n = scores.len() as f64;
    let grand = scores.iter().sum::<f64>() / n;
    let mut sum = vec![0.0; k];
    let mut cnt = vec![0.0; k];
    for (&s, &g) in scores.iter().zip(groups) {
        sum[g] += s;
        cnt[g] += 1.0;
    }
    let between: f64 = (0..k)
        .filter(|&g| cnt[g] > 0.0)
        .map(|g| cnt[g] * (sum[g] / cnt[g] - grand).powi(2))
        .sum();
    let total: f64 = scores.iter().map(|s| (s - grand).powi(2)).sum();
    let within = total - between;
    let d1 = (k - 1) as f64;
    let d2 = n - k as f64;
    (between / total, (between / d1) / (within / d2), d1, d2)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Smallest relative gap between consecutive retained eigenvalues.
pub fn min_eigen_gap(m: &McaModel) -> f64 {
    let e = m.eigenvalues();
    e.windows(2).map(|w| (w[0] - w[1]) / w[0]).fold(f64::INFINITY, f64::min)
}
