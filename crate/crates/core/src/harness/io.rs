use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::config::{Format, RunConfig};
use super::tables::{FigureData, Table1Row, Table2Row, Table3Report};
use crate::error::{Error, Result};

pub const TABLE1_FILE: &str = "table1";
pub const TABLE2_FILE: &str = "table2";
pub const TABLE3_FILE: &str = "table3";
pub const FIGURE_FILES: [&str; 3] = ["figure1_fano", "figure2_count", "figure3_cv"];

/// Six significant digits in the style of C's `%g`: fixed notation for
/// decimal exponents in `[-4, 6)`, scientific otherwise, trailing zeros dropped.
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (5 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv(path: &Path, header: &[&str], records: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for rec in records {
        w.write_record(rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Invariant(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn prepare(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))
}

/// Writes `stem.csv` and/or `stem.json` and returns the paths written.
fn emit<T: Serialize + ?Sized>(
    cfg: &RunConfig,
    stem: &str,
    header: &[&str],
    records: &[Vec<String>],
    json: &T,
) -> Result<Vec<PathBuf>> {
    prepare(cfg)?;
    let mut written = Vec::new();
    for format in &cfg.formats {
        let path = match format {
            Format::Csv => {
                let p = cfg.output_dir.join(format!("{stem}.csv"));
                write_csv(&p, header, records)?;
                p
            }
            Format::Json => {
                let p = cfg.output_dir.join(format!("{stem}.json"));
                write_json(&p, json)?;
                p
            }
        };
        written.push(path);
    }
    Ok(written)
}

pub fn write_table1(cfg: &RunConfig, rows: &[Table1Row]) -> Result<Vec<PathBuf>> {
    let mut header = vec!["m0", "window", "twins", "mean", "var", "ratio"];
    if cfg.diagnostic {
        header.extend(["twins_inclusive", "twins_strict"]);
    }
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut rec = vec![
                r.m0.to_string(),
                r.window.to_string(),
                r.twins.to_string(),
                format_real(r.mean),
                format_real(r.var),
                format_real(r.ratio),
            ];
            if cfg.diagnostic {
                for extra in [r.twins_inclusive, r.twins_strict] {
                    rec.push(extra.map(|v| v.to_string()).unwrap_or_default());
                }
            }
            rec
        })
        .collect();
    emit(cfg, TABLE1_FILE, &header, &records, rows)
}

pub fn write_table2(cfg: &RunConfig, rows: &[Table2Row]) -> Result<Vec<PathBuf>> {
    let header = [
        "m0",
        "L",
        "twins",
        "mu_N",
        "sigma_diag",
        "sigma_off",
        "variance",
    ];
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.m0.to_string(),
                r.l.to_string(),
                r.twins.to_string(),
                format_real(r.mu_n),
                format_real(r.sigma_diag),
                format_real(r.sigma_off),
                format_real(r.variance),
            ]
        })
        .collect();
    emit(cfg, TABLE2_FILE, &header, &records, rows)
}

/// The CSV holds the rows; the decay fit goes to `table3_fit.csv` so the
/// table keeps a single schema.
pub fn write_table3(cfg: &RunConfig, report: &Table3Report) -> Result<Vec<PathBuf>> {
    let header = ["m0", "L", "weighted_sum", "theory", "rel_error_pct"];
    let records: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.m0.to_string(),
                r.l.to_string(),
                format_real(r.weighted_sum),
                format_real(r.theory),
                format_real(r.rel_error_pct),
            ]
        })
        .collect();
    let mut written = emit(cfg, TABLE3_FILE, &header, &records, report)?;
    if let (Some(fit), true) = (report.fit, cfg.formats.contains(&Format::Csv)) {
        let path = cfg.output_dir.join(format!("{TABLE3_FILE}_fit.csv"));
        write_csv(
            &path,
            &["alpha", "intercept"],
            &[vec![format_real(fit.alpha), format_real(fit.intercept)]],
        )?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_figures(cfg: &RunConfig, data: &FigureData) -> Result<Vec<PathBuf>> {
    let fano: Vec<Vec<String>> = data
        .fano
        .iter()
        .map(|p| {
            vec![
                p.m0.to_string(),
                format_real(p.fano_observed),
                format_real(p.fano_theoretical),
            ]
        })
        .collect();
    let count: Vec<Vec<String>> = data
        .count
        .iter()
        .map(|p| {
            vec![
                p.m0.to_string(),
                p.count_observed.to_string(),
                format_real(p.count_theory),
            ]
        })
        .collect();
    let cv: Vec<Vec<String>> = data
        .cv
        .iter()
        .map(|p| {
            vec![
                p.m0.to_string(),
                format_real(p.cv_observed),
                format_real(p.reference),
            ]
        })
        .collect();
    let mut written = emit(
        cfg,
        FIGURE_FILES[0],
        &["m0", "fano_observed", "fano_theoretical"],
        &fano,
        &data.fano,
    )?;
    written.extend(emit(
        cfg,
        FIGURE_FILES[1],
        &["m0", "count_observed", "count_theory"],
        &count,
        &data.count,
    )?);
    written.extend(emit(
        cfg,
        FIGURE_FILES[2],
        &["m0", "cv_observed", "reference"],
        &cv,
        &data.cv,
    )?);
    Ok(written)
}

/// Reads any of the emitted CSV files back into its row type.
pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| csv_error(path, e))
}
