use std::fs;
use std::path::Path;

use mcaw_core::dataset::{rate_by_group, CategoricalDataset};
use mcaw_core::inference::{describe_dimension, group_ellipse};
use mcaw_core::mca::{
    contributions, coordinates, cos2, eigenvalue_table, variable_eta2, McaModel, Target,
};
use mcaw_core::pipeline::{parse_axes, AnalysisOptions};
use mcaw_core::report::{
    dataset_summary, dimension_description_csv, eigen_table_csv, ellipses_csv, eta2_table_csv,
    model_report, point_table_csv, rate_table_csv, to_json, IngestReport,
};
use mcaw_core::schema::{generate_synthetic, parse_csv, validate, DataDictionary, RawTable, SynthSpec};
use mcaw_core::svg::{category_map, individual_map, render_svg};

use crate::{
    AnalyzeArgs, DimdescArgs, EllipsesArgs, Failure, Format, IngestArgs, InputArgs, RatesArgs,
    ServeArgs, SynthArgs,
};

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_raw(input: &InputArgs) -> Result<RawTable, Failure> {
    let dict = DataDictionary::load(&input.dict)?;
    Ok(parse_csv(&input.csv, &dict)?)
}

/// Raw table checked against its dictionary; any issue stops the run.
fn load_valid(input: &InputArgs) -> Result<(RawTable, AnalysisOptions), Failure> {
    let options = input.options()?;
    let raw = load_raw(input)?;
    let report = validate(&raw);
    if let Some(first) = report.issues.first() {
        return Err(Failure::data(format!(
            "{} validation issue(s); first at row {}, column {}: {}",
            report.issues.len(),
            first.row,
            first.column,
            first.message
        )));
    }
    Ok((raw, options))
}

fn load_model(input: &InputArgs) -> Result<(CategoricalDataset, McaModel), Failure> {
    let (raw, options) = load_valid(input)?;
    let ds = options.build_dataset(&raw)?;
    let model = options.fit(&ds)?;
    Ok((ds, model))
}

pub fn ingest(a: IngestArgs) -> Result<(), Failure> {
    let options = a.input.options()?;
    let raw = load_raw(&a.input)?;
    let validation = validate(&raw);
    if !validation.is_empty() {
        let n = validation.issues.len();
        emit(a.out.as_deref(), &to_json(&validation))?;
        return Err(Failure::data(format!("{n} validation issue(s)")));
    }
    let ds = options.build_dataset(&raw)?;
    let report = IngestReport {
        rows: raw.n_rows(),
        validation,
        summary: dataset_summary(&ds),
    };
    emit(a.out.as_deref(), &to_json(&report))
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Categories => "categories",
        Target::Individuals => "individuals",
    }
}

pub fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let format = a.format.resolve();
    let (ds, model) = load_model(&a.input)?;
    let group = match &a.group {
        Some(g) => {
            ds.variable_index(g)?;
            g.clone()
        }
        None => ds.variables()[0].name.clone(),
    };
    fs::create_dir_all(&a.out)
        .map_err(|e| Failure::data(format!("cannot create {}: {e}", a.out.display())))?;
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let put = |stem: &str, json: String, csv: String| -> Result<(), Failure> {
        let body = if format == Format::Json { json } else { csv };
        write_file(&a.out.join(format!("{stem}.{ext}")), &body)
    };

    write_file(&a.out.join("model.json"), &to_json(&model_report(&model)))?;
    write_file(&a.out.join("summary.json"), &to_json(&dataset_summary(&ds)))?;
    let eig = eigenvalue_table(&model);
    put("eigenvalues", to_json(&eig), eigen_table_csv(&eig))?;
    let all: Vec<usize> = (1..=model.n_dims()).collect();
    for t in [Target::Categories, Target::Individuals] {
        let name = target_name(t);
        let c = coordinates(&model, t, &all)?;
        put(&format!("coordinates_{name}"), to_json(&c), point_table_csv(&c))?;
        let c = cos2(&model, t, &all)?;
        put(&format!("cos2_{name}"), to_json(&c), point_table_csv(&c))?;
        let c = contributions(&model, t);
        put(&format!("contributions_{name}"), to_json(&c), point_table_csv(&c))?;
    }
    let eta = variable_eta2(&model);
    put("eta2", to_json(&eta), eta2_table_csv(&eta))?;
    for axis in 1..=model.n_dims().min(2) {
        let d = describe_dimension(&model, &ds, axis, a.threshold)?;
        put(&format!("dimdesc_{axis}"), to_json(&d), dimension_description_csv(&d))?;
    }
    for v in ds.variables() {
        let t = rate_by_group(&ds, &v.name, a.decimals)?;
        put(&format!("rates_{}", file_stem(&v.name)), to_json(&t), rate_table_csv(&t))?;
    }
    let ellipses = if model.n_dims() >= 2 {
        let g = group_ellipse(&model, &ds, &group, [1, 2], a.level, a.kind.into())?;
        put(&format!("ellipses_{}", file_stem(&group)), to_json(&g), ellipses_csv(&g))?;
        Some(g)
    } else {
        None
    };
    if a.svg {
        if let Some(g) = &ellipses {
            write_file(&a.out.join("categories.svg"), &render_svg(&category_map(&model, [1, 2])?))?;
            let map = individual_map(&model, &ds, &group, [1, 2], &g.ellipses)?;
            write_file(&a.out.join("individuals.svg"), &render_svg(&map))?;
        } else {
            eprintln!("{{\"warning\":\"factor maps need two retained axes; no SVG written\"}}");
        }
    }
    Ok(())
}

pub fn rates(a: RatesArgs) -> Result<(), Failure> {
    let (raw, options) = load_valid(&a.input)?;
    let ds = options.build_dataset(&raw)?;
    let t = rate_by_group(&ds, &a.var, a.decimals)?;
    let text = match a.format.resolve() {
        Format::Json => to_json(&t),
        Format::Csv => rate_table_csv(&t),
    };
    emit(a.out.as_deref(), &text)
}

pub fn dimdesc(a: DimdescArgs) -> Result<(), Failure> {
    let (ds, model) = load_model(&a.input)?;
    let d = describe_dimension(&model, &ds, a.axis, a.threshold)?;
    let text = match a.format.resolve() {
        Format::Json => to_json(&d),
        Format::Csv => dimension_description_csv(&d),
    };
    emit(a.out.as_deref(), &text)
}

pub fn ellipses(a: EllipsesArgs) -> Result<(), Failure> {
    let axes: [usize; 2] = parse_axes(&a.axes)?
        .try_into()
        .map_err(|_| Failure::usage("--axes must name exactly two axes"))?;
    let (ds, model) = load_model(&a.input)?;
    let g = group_ellipse(&model, &ds, &a.group, axes, a.level, a.kind.into())?;
    let text = match a.format.resolve() {
        Format::Json => to_json(&g),
        Format::Csv => ellipses_csv(&g),
    };
    emit(a.out.as_deref(), &text)
}

pub fn synth(a: SynthArgs) -> Result<(), Failure> {
    let mut spec = SynthSpec::load(&a.spec)?;
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let raw = generate_synthetic(&spec)?;
    write_file(&a.out, &raw.to_csv_string())?;
    if let Some(p) = &a.dict_out {
        write_file(p, &raw.dictionary().to_toml_string())?;
    }
    Ok(())
}

pub fn serve(a: ServeArgs) -> Result<(), Failure> {
    let mut config = mcaw_service::ServiceConfig::from_env().map_err(Failure::usage)?;
    if let Some(p) = a.port {
        config.port = p;
    }
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::data(format!("cannot start runtime: {e}")))?;
    rt.block_on(mcaw_service::serve(config))
        .map_err(|e| Failure::data(format!("server error: {e}")))
}
