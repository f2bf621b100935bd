use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn mcaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcaw")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn ingest_sample_summary() {
    let out = mcaw(&[
        "ingest",
        "--csv",
        s(&fixture("sample_registry.csv")),
        "--dict",
        s(&fixture("registry_dictionary.toml")),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["summary"]["n"], 12);
    let sexo = &v["summary"]["variables"][2];
    assert_eq!(sexo["name"], "sexo");
    assert_eq!(sexo["categories"][0], serde_json::json!({"label": "F", "count": 7}));
    assert_eq!(sexo["categories"][1], serde_json::json!({"label": "M", "count": 5}));
}

#[test]
fn exit_codes() {
    let csv = fixture("balanced.csv");
    let dict = fixture("binary_dictionary.toml");
    assert_eq!(mcaw(&["ingest", "--csv", s(&csv)]).status.code(), Some(1));
    assert_eq!(mcaw(&["bogus"]).status.code(), Some(1));
    let wrong_dict = mcaw(&["ingest", "--csv", s(&csv), "--dict", s(&fixture("registry_dictionary.toml"))]);
    assert_eq!(wrong_dict.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&wrong_dict.stderr).unwrap();
    assert_eq!(err["class"], "data");
    let dir = tempfile::tempdir().unwrap();
    let empty = mcaw(&["analyze", "--csv", s(&csv), "--dict", s(&dict), "--out", s(dir.path()), "--filter", "a=zz"]);
    assert_eq!(empty.status.code(), Some(3));
    let unknown = mcaw(&["analyze", "--csv", s(&csv), "--dict", s(&dict), "--out", s(dir.path()), "--active", "a,zz"]);
    assert_eq!(unknown.status.code(), Some(1));
    let bad_axis = mcaw(&["dimdesc", "--csv", s(&csv), "--dict", s(&dict), "--axis", "5"]);
    assert_eq!(bad_axis.status.code(), Some(1));
    assert_eq!(mcaw(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_cells_stop_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "a,b\na1,b1\nzz,b2\n").unwrap();
    let out = mcaw(&["ingest", "--csv", s(&csv), "--dict", s(&fixture("binary_dictionary.toml"))]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["issues"][0]["row"], 2);
}

fn eigen(csv: &str) -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let out = mcaw(&[
        "analyze",
        "--csv",
        s(&fixture(csv)),
        "--dict",
        s(&fixture("binary_dictionary.toml")),
        "--out",
        s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&std::fs::read_to_string(dir.path().join("eigenvalues.json")).unwrap()).unwrap()
}

#[test]
fn analyze_binary_fixtures() {
    let p = eigen("perfect_association.csv");
    assert_eq!(p["eigenvalues"], serde_json::json!([1.0]));
    assert_eq!(p["percent"], serde_json::json!([100.0]));
    let b = eigen("balanced.csv");
    assert_eq!(b["percent"], serde_json::json!([50.0, 50.0]));
}

#[test]
fn analyze_csv_format_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = mcaw(&[
        "analyze",
        "--csv",
        s(&fixture("sample_registry.csv")),
        "--dict",
        s(&fixture("registry_dictionary.toml")),
        "--out",
        s(dir.path()),
        "--format",
        "csv",
        "--svg",
        "--group",
        "fabricante",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eig = std::fs::read_to_string(dir.path().join("eigenvalues.csv")).unwrap();
    assert!(eig.starts_with("dim,eigenvalue,percent,cumulative\n1,"));
    let rates = std::fs::read_to_string(dir.path().join("rates_sexo.csv")).unwrap();
    assert_eq!(rates, "variable,label,count,percent\nsexo,F,7,58.33\nsexo,M,5,41.67\n");
    let svg = std::fs::read_to_string(dir.path().join("categories.svg")).unwrap();
    assert!(svg.contains("Dim 1 ("));
    assert!(dir.path().join("individuals.svg").exists());
    assert!(dir.path().join("ellipses_fabricante.csv").exists());
}

#[test]
fn synth_planted_counts_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let d = dir.path().join("dict.toml");
    let spec = fixture("planted_registry.toml");
    for out in [&a, &b] {
        let r = mcaw(&["synth", "--spec", s(&spec), "--out", s(out), "--dict-out", s(&d)]);
        assert!(r.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rates = mcaw(&["rates", "--csv", s(&a), "--dict", s(&d), "--var", "grupo_riesgo", "--format", "csv"]);
    assert_eq!(
        String::from_utf8(rates.stdout).unwrap(),
        "variable,label,count,percent\n\
         grupo_riesgo,ESTUDIANTE DE SALUD,16,0.41\n\
         grupo_riesgo,INTERNO DE SALUD,111,2.84\n\
         grupo_riesgo,PERSONAL DE SALUD,3788,96.76\n"
    );
    let other = dir.path().join("c.csv");
    assert!(mcaw(&["synth", "--spec", s(&spec), "--out", s(&other), "--seed", "7"]).status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&other).unwrap());

    let zero = dir.path().join("zero.toml");
    std::fs::write(&zero, "n_rows = 0\nseed = 1\nmode = \"sampled\"\n[[column]]\nname = \"x\"\ncategories = [\"a\"]\nweights = [1.0]\n").unwrap();
    let r = mcaw(&["synth", "--spec", s(&zero), "--out", s(&dir.path().join("z.csv"))]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn ellipses_and_dimdesc_subcommands() {
    let args: Vec<String> = vec![
        "--csv".into(),
        s(&fixture("sample_registry.csv")).into(),
        "--dict".into(),
        s(&fixture("registry_dictionary.toml")).into(),
    ];
    let mut e: Vec<String> = vec!["ellipses".into()];
    e.extend(args.iter().cloned());
    e.extend(["--group", "sexo", "--axes", "1,3", "--kind", "observation"].map(String::from));
    let out = mcaw(&e.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["axes"], serde_json::json!([1, 3]));
    assert_eq!(v["ellipses"].as_array().unwrap().len(), 2);
    let mut d: Vec<String> = vec!["dimdesc".into()];
    d.extend(args.iter().cloned());
    d.extend(["--axis", "2", "--threshold", "1", "--format", "csv"].map(String::from));
    let out = mcaw(&d.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("kind,variable,category,statistic,p_value\nvariable,"));
}
