use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ComparisonReport;
use crate::error::{Error, Result};
use crate::roles::UserCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg];

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Svg => "svg",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReportFormat::ALL
            .into_iter()
            .find(|f| f.extension().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown report format {s:?}")))
    }
}

pub fn emit_report(r: &ComparisonReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(r)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => csv_report(r),
        ReportFormat::Svg => Ok(svg_report(r).into_bytes()),
    }
}

/// One row per category; the scalar fields repeat on every row.
fn csv_report(r: &ComparisonReport) -> Result<Vec<u8>> {
    let echo = serde_json::to_string(&r.config_echo)?;
    let l1 = r.l1_distance.to_string();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "category",
        "observed",
        "predicted",
        "delta",
        "l1_distance",
        "population_scope",
        "config_echo",
    ])?;
    for c in UserCategory::ALL {
        let delta = r.per_category_delta.get(&c).copied().unwrap_or(0.0);
        wtr.write_record([
            c.as_str(),
            &r.observed.get(c).to_string(),
            &r.predicted.get(c).to_string(),
            &delta.to_string(),
            &l1,
            r.population_scope.as_str(),
            &echo,
        ])?;
    }
    wtr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const BOTTOM: f64 = 48.0;
const TOP: f64 = 40.0;

/// Grouped bars, observed next to predicted, with the config in `<metadata>`.
fn svg_report(r: &ComparisonReport) -> String {
    let plot_w = WIDTH - LEFT - 16.0;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let max = UserCategory::ALL
        .iter()
        .flat_map(|c| [r.observed.get(*c), r.predicted.get(*c)])
        .fold(0.0_f64, f64::max);
    let ymax = if max > 0.0 {
        (max * 10.0).ceil() / 10.0
    } else {
        1.0
    };
    let y = |v: f64| TOP + plot_h * (1.0 - v / ymax);
    let slot = plot_w / UserCategory::ALL.len() as f64;
    let bar = slot * 0.35;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        "<metadata>{}</metadata>",
        escape(&r.config_echo.to_string())
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">Role distribution ({}), L1 = {:.4}</text>"#,
        WIDTH / 2.0,
        r.population_scope.as_str(),
        r.l1_distance
    );
    for tick in 0..=5 {
        let v = ymax * tick as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{yy:.2}" x2="{x2:.2}" y2="{yy:.2}" stroke="#ddd"/><text x="{tx}" y="{ty:.2}" font-size="10" text-anchor="end">{v:.2}</text>"##,
            yy = y(v),
            x2 = LEFT + plot_w,
            tx = LEFT - 4.0,
            ty = y(v) + 3.0,
        );
    }
    for (i, c) in UserCategory::ALL.iter().enumerate() {
        let x0 = LEFT + slot * i as f64 + slot * 0.15;
        for (j, (v, fill, series)) in [
            (r.observed.get(*c), "#4e79a7", "observed"),
            (r.predicted.get(*c), "#f28e2b", "predicted"),
        ]
        .into_iter()
        .enumerate()
        {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"><title>{} {series}: {v:.4}</title></rect>"#,
                x0 + bar * j as f64,
                y(v),
                bar,
                y(0.0) - y(v),
                c.as_str(),
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            x0 + bar,
            HEIGHT - BOTTOM + 16.0,
            c.as_str()
        );
    }
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{b:.2}" x2="{x2:.2}" y2="{b:.2}" stroke="#000"/>"##,
        b = y(0.0),
        x2 = LEFT + plot_w
    );
    let ly = HEIGHT - 14.0;
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{:.2}" width="10" height="10" fill="#4e79a7"/><text x="{:.2}" y="{ly:.2}" font-size="11">observed</text>"##,
        ly - 9.0,
        LEFT + 14.0
    );
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="#f28e2b"/><text x="{:.2}" y="{ly:.2}" font-size="11">predicted</text>"##,
        LEFT + 90.0,
        ly - 9.0,
        LEFT + 104.0
    );
    s.push_str("</svg>\n");
    s
}
