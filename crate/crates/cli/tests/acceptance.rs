//! Acceptance gate. Runs every primary criterion at its stated tolerance,
//! prints one PASS/FAIL line each and exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::Request;
use common::*;
use http_body_util::BodyExt;
use mcaw_core::dataset::{rate_by_group, CategoricalDataset};
use mcaw_core::inference::{describe_dimension, ellipse_from_points, EllipseKind};
use mcaw_core::mca::{fit_mca, indicator_matrix, project_supplementary, FitOptions, McaModel};
use mcaw_core::pipeline::AnalysisOptions;
use mcaw_core::schema::{generate_synthetic, SynthSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use tower::ServiceExt;

const SUITE_SEED: u64 = 0x6d63_6177;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fit(ds: &CategoricalDataset) -> McaModel {
    fit_mca(ds, FitOptions::default()).expect("fit")
}

fn suite() -> Vec<CategoricalDataset> {
    (0..100).map(|k| random_case(SUITE_SEED + k)).collect()
}

fn two_variable_law() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    for k in 0..200 {
        use rand::Rng;
        let (j1, j2) = (rng.random_range(2..=5), rng.random_range(2..=5));
        let n = rng.random_range(j1.max(j2)..=50);
        let ds = random_dataset(SUITE_SEED ^ k, n, &[j1, j2]);
        let m = fit(&ds);
        let law = common::two_variable_law(&ds);
        let kept = m.eigenvalues().len();
        worst = worst.max(max_abs_diff(m.eigenvalues(), &law[..kept]));
        worst = law[kept..].iter().fold(worst, |w, x| w.max(x.abs()));
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-9 && elapsed < Duration::from_secs(5),
        format!("200 datasets, max |err| {worst:.2e}, {elapsed:.2?}"),
    )
}

fn total_inertia(cases: &[CategoricalDataset]) -> Outcome {
    let mut worst = 0.0f64;
    for ds in cases {
        let m = fit(ds);
        let q = ds.n_variables() as f64;
        let expect = (ds.n_categories() as f64 - q) / q;
        worst = worst.max((m.eigenvalues().iter().sum::<f64>() - expect).abs());
    }
    outcome(worst < 1e-9, format!("{} datasets, max |err| {worst:.2e}", cases.len()))
}

fn burt_oracle(cases: &[CategoricalDataset]) -> Outcome {
    let mut worst = 0.0f64;
    for ds in cases {
        let m = fit(ds);
        let burt = burt_ca_eigenvalues(ds);
        for (k, l) in m.eigenvalues().iter().enumerate() {
            worst = worst.max((burt[k] - l * l).abs());
        }
        worst = burt[m.eigenvalues().len()..].iter().fold(worst, |w, x| w.max(x.abs()));
    }
    outcome(worst < 1e-8, format!("max |burt - lambda^2| {worst:.2e}"))
}

fn normalization(cases: &[CategoricalDataset]) -> Outcome {
    let (mut cos2, mut ctr, mut moments, mut eta) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for ds in cases {
        let m = fit(ds);
        let n = m.n() as f64;
        let q = m.n_variables() as f64;
        let c = m.column_masses();
        for r in 0..m.n_categories() {
            cos2 = cos2.max((m.col_cos2().row(r).sum() - 1.0).abs());
        }
        for i in 0..m.n() {
            let s = m.row_cos2().row(i).sum();
            if s != 0.0 {
                cos2 = cos2.max((s - 1.0).abs());
            }
        }
        for (k, &l) in m.eigenvalues().iter().enumerate() {
            let f = m.row_coords().column(k);
            let g = m.col_coords().column(k);
            ctr = ctr.max((m.col_ctr().column(k).sum() - 1.0).abs());
            ctr = ctr.max((m.row_ctr().column(k).sum() - 1.0).abs());
            moments = moments
                .max((f.sum() / n).abs())
                .max(g.iter().zip(c).map(|(x, w)| x * w).sum::<f64>().abs())
                .max((f.iter().map(|x| x * x).sum::<f64>() / n - l).abs())
                .max((g.iter().zip(c).map(|(x, w)| w * x * x).sum::<f64>() - l).abs());
            eta = eta.max((m.eta2().column(k).sum() - q * l).abs());
        }
    }
    outcome(
        cos2 < 1e-8 && ctr < 1e-9 && moments < 1e-9 && eta < 1e-8,
        format!("cos2 {cos2:.1e}, ctr {ctr:.1e}, centering/moments {moments:.1e}, eta2 {eta:.1e}"),
    )
}

fn transition(cases: &[CategoricalDataset]) -> Outcome {
    let (mut from_g, mut sup) = (0.0f64, 0.0f64);
    for ds in cases {
        let m = fit(ds);
        let ind = indicator_matrix(ds).expect("indicator");
        let q = ds.n_variables() as f64;
        for (k, &sigma) in m.singular_values().iter().enumerate() {
            for i in 0..ds.n() {
                let acc: f64 = (0..ds.n_categories())
                    .map(|j| ind.z()[(i, j)] * m.col_coords()[(j, k)])
                    .sum();
                from_g = from_g.max((acc / (q * sigma) - m.row_coords()[(i, k)]).abs());
            }
        }
        for j in 0..ds.n_categories() {
            let member: Vec<bool> = (0..ds.n()).map(|i| ind.z()[(i, j)] == 1.0).collect();
            let g = project_supplementary(&m, &member).expect("projection");
            for (k, v) in g.iter().enumerate() {
                sup = sup.max((v - m.col_coords()[(j, k)]).abs());
            }
        }
    }
    outcome(
        from_g < 1e-8 && sup < 1e-8,
        format!("F from G {from_g:.1e}, supplementary {sup:.1e}"),
    )
}

fn equivariance(cases: &[CategoricalDataset]) -> Outcome {
    let (mut worst, mut checked, mut tied) = (0.0f64, 0, 0);
    for (k, ds) in cases.iter().enumerate() {
        let m = fit(ds);
        // axes inside a repeated eigenvalue are not identifiable
        if min_eigen_gap(&m) <= 1e-5 {
            tied += 1;
            continue;
        }
        checked += 1;
        let n = ds.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + k as u64);
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let pm = fit(&ds.select_rows(&perm).expect("permute"));
        worst = worst
            .max(max_abs_diff(m.eigenvalues(), pm.eigenvalues()))
            .max((m.col_coords() - pm.col_coords()).amax())
            .max((m.eta2() - pm.eta2()).amax());
        for (new, &old) in perm.iter().enumerate() {
            for a in 0..m.n_dims() {
                worst = worst.max((pm.row_coords()[(new, a)] - m.row_coords()[(old, a)]).abs());
            }
        }
        let twice: Vec<usize> = (0..n).chain(0..n).collect();
        let dm = fit(&ds.select_rows(&twice).expect("replicate"));
        worst = worst
            .max(max_abs_diff(m.eigenvalues(), dm.eigenvalues()))
            .max((m.col_coords() - dm.col_coords()).amax());
    }
    outcome(
        worst < 1e-9 && checked >= cases.len() / 2,
        format!("{checked} datasets (skipped {tied} with tied eigenvalues), max |err| {worst:.2e}"),
    )
}

fn planted_rates() -> Outcome {
    let start = Instant::now();
    let spec = SynthSpec::load(fixture("planted_registry.toml")).expect("spec");
    let raw = generate_synthetic(&spec).expect("synth");
    let ds = AnalysisOptions::default().build_dataset(&raw).expect("dataset");
    let t = rate_by_group(&ds, "grupo_riesgo", 2).expect("rates");
    let elapsed = start.elapsed();
    let shown: Vec<&str> = t.rows.iter().map(|r| r.display.as_str()).collect();
    let counts: Vec<usize> = t.rows.iter().map(|r| r.count).collect();
    outcome(
        shown == ["0.41", "2.84", "96.76"] && counts == [16, 111, 3788] && elapsed < Duration::from_secs(1),
        format!("counts {counts:?}, rates {shown:?}, {elapsed:.2?}"),
    )
}

fn dimension_description() -> Outcome {
    let ds = planted_40();
    let m = fit(&ds);
    let d = describe_dimension(&m, &ds, 1, 1.0).expect("dimdesc");
    let scores: Vec<f64> = m.row_coords().column(0).iter().copied().collect();
    let (mut d_eta, mut d_p) = (0.0f64, 0.0f64);
    for (vi, var) in ds.variables().iter().enumerate() {
        let groups: Vec<usize> = (0..ds.n()).map(|i| ds.code(i, vi)).collect();
        let (eta2, f, d1, d2) = anova(&scores, &groups);
        let p = FisherSnedecor::new(d1, d2).expect("F").sf(f);
        let row = d.variables.iter().find(|v| v.variable == var.name).expect("row");
        d_eta = d_eta.max((row.eta2 - eta2).abs());
        d_p = d_p.max((row.p_value - p).abs());
    }
    let x = d.variables.iter().find(|v| v.variable == "x").expect("x");
    outcome(
        x.eta2 > 0.9 && x.p_value < 1e-6 && d_eta < 1e-10 && d_p < 1e-8,
        format!(
            "eta2 {:.4}, p {:.2e}, |d eta2| {d_eta:.1e}, |d p| {d_p:.1e}",
            x.eta2, x.p_value
        ),
    )
}

fn ellipse_calibration() -> Outcome {
    let (m, sigma) = (500usize, 0.8);
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let normal = Normal::new(0.0, sigma).expect("normal");
    let pts: Vec<[f64; 2]> = (0..m).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
    let mean = ellipse_from_points("g", &pts, 0.95, EllipseKind::Mean).expect("mean");
    let obs = ellipse_from_points("g", &pts, 0.95, EllipseKind::Observation).expect("obs");
    let target = (5.991 * sigma * sigma / m as f64).sqrt();
    let rel = mean
        .semi_axes
        .iter()
        .map(|a| (a - target).abs() / target)
        .fold(0.0, f64::max);
    let scale = (0..2)
        .map(|k| (obs.semi_axes[k] - (m as f64).sqrt() * mean.semi_axes[k]).abs())
        .fold(0.0, f64::max);
    outcome(
        rel < 0.10 && scale < 1e-9,
        format!("max relative error {:.1}%, |obs - sqrt(m) mean| {scale:.1e}", rel * 100.0),
    )
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .expect("output dir")
        .map(|e| {
            let e = e.expect("entry");
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).expect("read"))
        })
        .collect()
}

fn run_analyze(csv: &Path, dict: &Path, out: &Path) -> Result<(), String> {
    let res = Command::new(env!("CARGO_BIN_EXE_mcaw"))
        .args(["analyze", "--csv"])
        .arg(csv)
        .arg("--dict")
        .arg(dict)
        .arg("--out")
        .arg(out)
        .arg("--svg")
        .output()
        .map_err(|e| e.to_string())?;
    if res.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&res.stderr).into_owned())
    }
}

async fn service_get(app: &axum::Router, method: &str, uri: &str, body: String) -> (u16, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .expect("request");
    let res = app.clone().oneshot(req).await.expect("response");
    let status = res.status().as_u16();
    let bytes = res.into_body().collect().await.expect("body").to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

/// Files from `analyze` and the matching service request.
fn endpoint_for(file: &str, group: &str) -> Option<String> {
    let stem = file.strip_suffix(".json")?;
    Some(match stem {
        "model" => String::new(),
        "eigenvalues" | "eta2" => format!("/{stem}"),
        "summary" => return Some("dataset".into()),
        _ => {
            if let Some(t) = stem.strip_prefix("coordinates_") {
                format!("/coordinates?target={t}")
            } else if let Some(t) = stem.strip_prefix("cos2_") {
                format!("/cos2?target={t}")
            } else if let Some(t) = stem.strip_prefix("contributions_") {
                format!("/contributions?target={t}")
            } else if let Some(a) = stem.strip_prefix("dimdesc_") {
                format!("/dimdesc?axis={a}")
            } else if let Some(v) = stem.strip_prefix("rates_") {
                format!("/rates?var={v}")
            } else if stem.starts_with("ellipses_") {
                format!("/ellipses?group={group}")
            } else {
                return None;
            }
        }
    })
}

fn cross_channel(csv: &Path, dict: &Path, cli: &BTreeMap<String, Vec<u8>>) -> Result<usize, String> {
    let body = serde_json::json!({
        "csv": std::fs::read_to_string(csv).map_err(|e| e.to_string())?,
        "dictionary": std::fs::read_to_string(dict).map_err(|e| e.to_string())?,
    })
    .to_string();
    let group = cli
        .keys()
        .find_map(|k| k.strip_prefix("ellipses_").and_then(|s| s.strip_suffix(".json")))
        .unwrap_or("")
        .to_string();
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let app = mcaw_service::router(&mcaw_service::ServiceConfig::default());
        let (s, text) = service_get(&app, "POST", "/api/datasets", body).await;
        if s != 200 {
            return Err(format!("upload {s}: {text}"));
        }
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let ds = v["dataset_id"].as_str().unwrap_or_default().to_string();
        let (s, text) = service_get(&app, "POST", &format!("/api/datasets/{ds}/mca"), String::new()).await;
        if s != 200 {
            return Err(format!("fit {s}: {text}"));
        }
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let model = v["model_id"].as_str().unwrap_or_default().to_string();
        let mut compared = 0;
        for (file, bytes) in cli {
            let Some(path) = endpoint_for(file, &group) else { continue };
            let uri = if path == "dataset" {
                format!("/api/datasets/{ds}")
            } else {
                format!("/api/models/{model}{path}")
            };
            let (s, text) = service_get(&app, "GET", &uri, String::new()).await;
            if s != 200 || text.as_bytes() != bytes.as_slice() {
                return Err(format!("{file} differs from {uri} (status {s})"));
            }
            compared += 1;
        }
        Ok(compared)
    })
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().expect("tempdir");
    let cases = [
        ("sample_registry.csv", "registry_dictionary.toml"),
        ("perfect_association.csv", "binary_dictionary.toml"),
        ("balanced.csv", "binary_dictionary.toml"),
    ];
    let mut notes = Vec::new();
    let mut pass = true;
    for (i, (csv, dict)) in cases.iter().enumerate() {
        let (csv, dict) = (fixture(csv), fixture(dict));
        let (a, b) = (tmp.path().join(format!("{i}a")), tmp.path().join(format!("{i}b")));
        if let Err(e) = run_analyze(&csv, &dict, &a).and_then(|_| run_analyze(&csv, &dict, &b)) {
            return outcome(false, format!("analyze failed: {e}"));
        }
        let (ra, rb) = (read_dir(&a), read_dir(&b));
        if ra != rb || ra.is_empty() {
            pass = false;
            notes.push(format!("{} differs between runs", csv.display()));
            continue;
        }
        match cross_channel(&csv, &dict, &ra) {
            Ok(n) => notes.push(format!("{} files, {n} matched service", ra.len())),
            Err(e) => {
                pass = false;
                notes.push(e);
            }
        }
    }
    outcome(pass, notes.join("; "))
}

fn main() -> ExitCode {
    let cases = suite();
    let criteria: Vec<Criterion> = vec![
        ("two-variable eigenvalue law", Box::new(two_variable_law)),
        ("total inertia (J-Q)/Q", Box::new(|| total_inertia(&cases))),
        ("Burt oracle lambda^2", Box::new(|| burt_oracle(&cases))),
        ("normalization suite", Box::new(|| normalization(&cases))),
        ("transition formulas", Box::new(|| transition(&cases))),
        ("row permutation and replication", Box::new(|| equivariance(&cases))),
        ("planted registry rate table", Box::new(planted_rates)),
        ("dimension description vs ANOVA", Box::new(dimension_description)),
        ("ellipse calibration", Box::new(ellipse_calibration)),
        ("determinism, CLI and service", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
