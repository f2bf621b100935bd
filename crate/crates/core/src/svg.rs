//! Static SVG factor maps.

use std::fmt::Write as _;

use crate::dataset::CategoricalDataset;
use crate::error::Result;
use crate::inference::EllipseSpec;
use crate::mca::{eigenvalue_table, McaModel};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MapPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorMap {
    pub title: String,
    pub x_caption: String,
    pub y_caption: String,
    pub points: Vec<MapPoint>,
    pub ellipses: Vec<(EllipseSpec, String)>,
    /// Draw point labels (off for individual clouds).
    pub show_labels: bool,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// `Dim k (p%)` with the percentage of variance at one decimal.
pub fn axis_caption(model: &McaModel, axis: usize) -> String {
    let t = eigenvalue_table(model);
    match t.percent.get(axis.wrapping_sub(1)) {
        Some(p) => format!("Dim {axis} ({p:.1}%)"),
        None => format!("Dim {axis}"),
    }
}

pub fn render_svg(map: &FactorMap) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in &map.points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    for (e, _) in &map.ellipses {
        let r = e.semi_axes[0];
        x0 = x0.min(e.center[0] - r);
        x1 = x1.max(e.center[0] + r);
        y0 = y0.min(e.center[1] - r);
        y1 = y1.max(e.center[1] + r);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9) * 1.1;
    let scale = (WIDTH - 2.0 * MARGIN).min(HEIGHT - 2.0 * MARGIN) / span;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let sx = |x: f64| WIDTH / 2.0 + (x - cx) * scale;
    let sy = |y: f64| HEIGHT / 2.0 - (y - cy) * scale;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&map.title)
    );
    // axes through the origin
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
        MARGIN / 2.0,
        sy(0.0),
        WIDTH - MARGIN / 2.0,
        sy(0.0)
    );
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
        sx(0.0),
        MARGIN / 2.0,
        sx(0.0),
        HEIGHT - MARGIN / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text class="caption" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(&map.x_caption)
    );
    let _ = writeln!(
        s,
        r#"<text class="caption" x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&map.y_caption)
    );
    for (e, color) in &map.ellipses {
        let deg = -e.angle.to_degrees();
        let (ex, ey) = (sx(e.center[0]), sy(e.center[1]));
        let _ = writeln!(
            s,
            r#"<ellipse class="ellipse" cx="{ex:.2}" cy="{ey:.2}" rx="{:.2}" ry="{:.2}" transform="rotate({deg:.4} {ex:.2} {ey:.2})" fill="none" stroke="{}"><title>{}</title></ellipse>"#,
            e.semi_axes[0] * scale,
            e.semi_axes[1] * scale,
            escape(color),
            escape(&e.group)
        );
    }
    for p in &map.points {
        let (px, py) = (sx(p.x), sy(p.y));
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{px:.2}" cy="{py:.2}" r="3" fill="{}"/>"#,
            escape(&p.color)
        );
        if map.show_labels {
            let _ = writeln!(
                s,
                r#"<text class="label" x="{:.2}" y="{:.2}" fill="{}">{}</text>"#,
                px + 5.0,
                py - 5.0,
                escape(&p.color),
                escape(&p.label)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Category cloud on the plane of 1-based `axes`, colored by variable.
pub fn category_map(model: &McaModel, axes: [usize; 2]) -> Result<FactorMap> {
    let cols = model.check_axes(&axes)?;
    let g = model.col_coords();
    let mut points = Vec::with_capacity(model.n_categories());
    for v in 0..model.n_variables() {
        for c in model.variable_columns(v) {
            points.push(MapPoint {
                label: model.category_labels()[c].clone(),
                x: g[(c, cols[0])],
                y: g[(c, cols[1])],
                color: PALETTE[v % PALETTE.len()].to_string(),
            });
        }
    }
    Ok(FactorMap {
        title: "Categories".into(),
        x_caption: axis_caption(model, axes[0]),
        y_caption: axis_caption(model, axes[1]),
        points,
        ellipses: Vec::new(),
        show_labels: true,
    })
}

/// Individual cloud colored by `group` categories, with optional ellipses.
pub fn individual_map(
    model: &McaModel,
    ds: &CategoricalDataset,
    group: &str,
    axes: [usize; 2],
    ellipses: &[EllipseSpec],
) -> Result<FactorMap> {
    let cols = model.check_axes(&axes)?;
    let vi = ds.variable_index(group)?;
    let labels = &ds.variables()[vi].labels;
    let f = model.row_coords();
    let points = (0..ds.n())
        .map(|i| {
            let c = ds.code(i, vi);
            MapPoint {
                label: format!("{} ({})", i + 1, labels[c]),
                x: f[(i, cols[0])],
                y: f[(i, cols[1])],
                color: PALETTE[c % PALETTE.len()].to_string(),
            }
        })
        .collect();
    let ellipses = ellipses
        .iter()
        .map(|e| {
            let c = labels.iter().position(|l| *l == e.group).unwrap_or(0);
            (e.clone(), PALETTE[c % PALETTE.len()].to_string())
        })
        .collect();
    Ok(FactorMap {
        title: format!("Individuals by {group}"),
        x_caption: axis_caption(model, axes[0]),
        y_caption: axis_caption(model, axes[1]),
        points,
        ellipses,
        show_labels: false,
    })
}
