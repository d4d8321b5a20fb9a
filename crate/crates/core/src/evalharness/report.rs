use std::collections::BTreeMap;
use std::fmt::Write;

use super::{EvalError, MetricReport};

/// Row order of the comparison table; other names follow alphabetically.
pub const CONFIG_ORDER: [&str; 5] = ["base", "dpo", "dpo_act", "dpo_fin", "hin_dpo"];

const BEST: char = '*';

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub text: String,
    pub json: String,
}

fn row_key(name: &str) -> (usize, &str) {
    (CONFIG_ORDER.iter().position(|c| *c == name).unwrap_or(CONFIG_ORDER.len()), name)
}

fn cell(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

/// Aligned text table (values ×100, two decimals, best per column marked
/// with `*`) and a JSON object keyed by configuration name.
pub fn report_table(reports: &[MetricReport]) -> Result<ReportTable, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut rows: Vec<&MetricReport> = reports.iter().collect();
    rows.sort_by(|a, b| row_key(&a.config_name).cmp(&row_key(&b.config_name)));

    // best is decided on the printed values so ties are all marked
    let printed: Vec<[String; 5]> = rows.iter().map(|r| r.values().map(cell)).collect();
    let best: Vec<f64> = (0..5)
        .map(|c| {
            printed
                .iter()
                .map(|p| p[c].parse::<f64>().expect("formatted number"))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let name_w = rows.iter().map(|r| r.config_name.chars().count()).max().unwrap_or(0).max(6);
    let col_w = MetricReport::COLUMNS.iter().map(|c| c.len()).max().unwrap_or(0).max(8);
    let mut text = String::new();
    write!(text, "{:<name_w$}", "config").unwrap();
    for c in MetricReport::COLUMNS {
        write!(text, " | {c:>col_w$}").unwrap();
    }
    text.push('\n');
    text.push_str(&"-".repeat(name_w));
    for _ in MetricReport::COLUMNS {
        write!(text, "-+-{}", "-".repeat(col_w)).unwrap();
    }
    text.push('\n');
    for (row, cells) in rows.iter().zip(&printed) {
        write!(text, "{:<name_w$}", row.config_name).unwrap();
        for (c, v) in cells.iter().enumerate() {
            let mark = if v.parse::<f64>().ok() == Some(best[c]) { BEST } else { ' ' };
            write!(text, " | {:>w$}{mark}", v, w = col_w - 1).unwrap();
        }
        text.push('\n');
    }
    Ok(ReportTable {
        text,
        json: report_json(reports)?,
    })
}

pub fn report_json(reports: &[MetricReport]) -> Result<String, EvalError> {
    let map: BTreeMap<&str, &MetricReport> = reports.iter().map(|r| (r.config_name.as_str(), r)).collect();
    let mut json = serde_json::to_string_pretty(&map)?;
    json.push('\n');
    Ok(json)
}

/// Reads a rendered table back; values are divided by 100.
pub fn parse_table(text: &str) -> Result<Vec<MetricReport>, EvalError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| EvalError::Parse("empty table".into()))?;
    let columns: Vec<&str> = header.split('|').skip(1).map(str::trim).collect();
    if columns != MetricReport::COLUMNS {
        return Err(EvalError::Parse(format!("unexpected header {header:?}")));
    }
    lines.next();
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut cells = line.split('|').map(str::trim);
            let name = cells.next().unwrap_or_default();
            let values: Vec<f64> = cells
                .map(|c| {
                    c.trim_end_matches(BEST)
                        .trim()
                        .parse::<f64>()
                        .map(|v| v / 100.0)
                        .map_err(|e| EvalError::Parse(format!("{line:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            let values: [f64; 5] = values
                .try_into()
                .map_err(|_| EvalError::Parse(format!("{line:?}: expected 5 values")))?;
            Ok(MetricReport::from_values(name, values))
        })
        .collect()
}
