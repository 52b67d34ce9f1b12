//! CSV input and output.
//!
//! Every writer goes through a sibling temporary file and a rename, so a
//! failed run never leaves a truncated table behind.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::IoError;
use crate::harness::{Experiment, Metric, PolicyRow, SweepResult};
use crate::metrics::{panel_peer_indices, DisclosureRecord, PanelCell};
use crate::reference::ROBUSTNESS_ROWS;
use crate::stats::StatSummary;

/// Columns of a raw disclosure panel.
pub const RAW_PANEL_COLUMNS: [&str; 6] =
    ["firm_id", "industry_id", "period", "n_descriptive", "n_substantive", "green_output"];

/// Columns of a scored panel, in this exact order.
pub const SCORED_PANEL_COLUMNS: [&str; 8] = [
    "firm_id",
    "industry_id",
    "period",
    "n_descriptive",
    "n_substantive",
    "washing_index",
    "peer_washing_index",
    "green_output",
];

/// One row per replication and period, fractions as simulated.
pub const TRAJECTORY_COLUMNS: [&str; 11] = [
    "scenario",
    "rep",
    "period",
    "washer_share",
    "mean_green_intensity_all",
    "mean_green_intensity_honest",
    "mean_green_intensity_washer",
    "consumer_utility_index",
    "mean_washing_index",
    "mean_peer_washing_index",
    "detected_count",
];

pub const SUMMARY_COLUMNS: [&str; 10] = ["scenario", "metric", "n", "mean", "sd", "cv_pct", "ci_lo", "ci_hi", "skewness", "kurtosis"];

pub const POLICY_COLUMNS: [&str; 7] = [
    "scenario",
    "washer_share_pct",
    "green_intensity_pct",
    "consumer_utility_index",
    "implementation_cost",
    "welfare_improvement_pct",
    "reference_welfare_pct",
];

pub const SWEEP_COLUMNS: [&str; 11] = [
    "parameter",
    "baseline_value",
    "adjusted_value",
    "reference_washer_share_pct",
    "reference_green_intensity_pct",
    "washer_share_pct",
    "green_intensity_pct",
    "direction",
    "param_change_pct",
    "outcome_change_pct",
    "sensitivity_coefficient",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.to_path_buf(), source }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Writes a header and rows to `path` atomically.
pub fn write_table<I>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let tmp = tmp_path(path);
    let result = (|| {
        let mut w = csv::Writer::from_path(&tmp).map_err(csv_err(path))?;
        w.write_record(header).map_err(csv_err(path))?;
        for row in rows {
            w.write_record(&row).map_err(csv_err(path))?;
        }
        w.flush().map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
        Ok(())
    })();
    match result {
        Ok(()) => fs::rename(&tmp, path).map_err(|source| IoError::Io { path: path.to_path_buf(), source }),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Writes text to `path` atomically.
pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let tmp = tmp_path(path);
    let io = |source| IoError::Io { path: path.to_path_buf(), source };
    fs::write(&tmp, text).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn write_trajectory(path: &Path, experiments: &[&Experiment]) -> Result<(), IoError> {
    let rows = experiments.iter().flat_map(|e| {
        let name = e.scenario.name.as_str();
        e.trajectories.iter().enumerate().flat_map(move |(k, t)| {
            t.records.iter().map(move |r| {
                vec![
                    name.to_string(),
                    k.to_string(),
                    r.period.to_string(),
                    r.washer_share.to_string(),
                    r.mean_green_intensity_all.to_string(),
                    opt(r.mean_green_intensity_honest),
                    opt(r.mean_green_intensity_washer),
                    r.consumer_utility_index.to_string(),
                    r.mean_washing_index.to_string(),
                    r.mean_peer_washing_index.to_string(),
                    r.detected_count.to_string(),
                ]
            })
        })
    });
    write_table(path, &TRAJECTORY_COLUMNS, rows)
}

fn summary_row(scenario: &str, metric: &str, s: &StatSummary) -> Vec<String> {
    vec![
        scenario.to_string(),
        metric.to_string(),
        s.n.to_string(),
        s.mean.to_string(),
        s.sd.to_string(),
        opt(s.cv.map(|c| c * 100.0)),
        s.ci_lo.to_string(),
        s.ci_hi.to_string(),
        opt(s.skewness),
        opt(s.kurtosis),
    ]
}

pub fn write_summary(path: &Path, experiments: &[&Experiment]) -> Result<(), IoError> {
    let rows = experiments.iter().flat_map(|e| {
        e.summaries.iter().map(|(m, s)| summary_row(e.scenario.name.as_str(), m.as_str(), s))
    });
    write_table(path, &SUMMARY_COLUMNS, rows)
}

/// Summary columns followed by the published mean, sd and cv for each
/// indicator that has one.
pub fn write_robustness(path: &Path, exp: &Experiment) -> Result<(), IoError> {
    let mut header: Vec<&str> = SUMMARY_COLUMNS.to_vec();
    header.extend(["reference_mean", "reference_sd", "reference_cv_pct"]);
    let rows = [Metric::WasherShare, Metric::GreenIntensity, Metric::UtilityIndex].map(|m| {
        let mut row = summary_row(exp.scenario.name.as_str(), m.as_str(), exp.summary(m));
        match ROBUSTNESS_ROWS.iter().find(|r| r.indicator == m.as_str()) {
            Some(r) => row.extend([r.mean.to_string(), r.sd.to_string(), r.cv_pct.to_string()]),
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        row
    });
    write_table(path, &header, rows)
}

pub fn write_policy(path: &Path, rows: &[PolicyRow]) -> Result<(), IoError> {
    let rows = rows.iter().map(|r| {
        vec![
            r.scenario.to_string(),
            r.washer_share_pct.to_string(),
            r.green_intensity_pct.to_string(),
            r.utility_index.to_string(),
            opt(r.implementation_cost),
            opt(r.welfare_computed),
            opt(r.welfare_reference),
        ]
    });
    write_table(path, &POLICY_COLUMNS, rows)
}

pub fn write_sweep(path: &Path, results: &[SweepResult]) -> Result<(), IoError> {
    let rows = results.iter().map(|r| {
        vec![
            r.parameter.as_str().to_string(),
            r.baseline_value.to_string(),
            r.adjusted_value.to_string(),
            r.reference_washer_share_pct.to_string(),
            r.reference_green_intensity_pct.to_string(),
            r.washer_share_pct.to_string(),
            r.green_intensity_pct.to_string(),
            r.direction.as_str().to_string(),
            r.param_change_pct.to_string(),
            r.outcome_change_pct.to_string(),
            r.sensitivity_coefficient.to_string(),
        ]
    });
    write_table(path, &SWEEP_COLUMNS, rows)
}

fn check_header(found: &csv::StringRecord) -> Result<bool, IoError> {
    let cols: Vec<&str> = found.iter().map(str::trim).collect();
    if cols == SCORED_PANEL_COLUMNS {
        return Ok(true);
    }
    if cols == RAW_PANEL_COLUMNS {
        return Ok(false);
    }
    // Report against whichever schema the header follows for longer.
    let prefix = |schema: &[&str]| schema.iter().zip(&cols).take_while(|(a, b)| a == b).count();
    let schema: &[&str] = if prefix(&SCORED_PANEL_COLUMNS) > prefix(&RAW_PANEL_COLUMNS) {
        &SCORED_PANEL_COLUMNS
    } else {
        &RAW_PANEL_COLUMNS
    };
    let position = prefix(schema);
    Err(IoError::Schema {
        position,
        expected: schema.get(position).map_or("<end of header>", |s| s).to_string(),
        found: cols.get(position).map_or("<end of header>", |s| s).to_string(),
    })
}

/// Reads a raw or scored panel. Washing indices are always recomputed from
/// the statement counts; stored index columns are ignored.
pub fn read_panel(path: &Path) -> Result<Vec<PanelCell>, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    let scored = check_header(r.headers().map_err(csv_err(path))?)?;
    let green_col = if scored { 7 } else { 5 };
    let mut cells = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(csv_err(path))?;
        let field = |k: usize| -> Result<u64, IoError> {
            let raw = rec.get(k).unwrap_or("");
            raw.parse::<u64>().map_err(|_| IoError::Row {
                row,
                message: format!("{}: expected a non-negative integer, got {raw:?}", column_name(scored, k)),
            })
        };
        let narrow = |k: usize| -> Result<u32, IoError> {
            u32::try_from(field(k)?).map_err(|_| IoError::Row { row, message: format!("{} out of range", column_name(scored, k)) })
        };
        let disclosure = DisclosureRecord { n_descriptive: narrow(3)?, n_substantive: narrow(4)? };
        cells.push(PanelCell::scored(narrow(0)?, narrow(1)?, narrow(2)?, disclosure, field(green_col)?));
    }
    Ok(cells)
}

fn column_name(scored: bool, k: usize) -> &'static str {
    if scored {
        SCORED_PANEL_COLUMNS[k]
    } else {
        RAW_PANEL_COLUMNS[k]
    }
}

/// Writes a scored panel with peer indices. Fails if any cell has no peer.
pub fn write_scored_panel(path: &Path, panel: &[PanelCell]) -> Result<(), IoError> {
    let peers = panel_peer_indices(panel)?;
    let rows = panel.iter().map(|c| {
        vec![
            c.firm_id.to_string(),
            c.industry_id.to_string(),
            c.period.to_string(),
            c.disclosure.n_descriptive.to_string(),
            c.disclosure.n_substantive.to_string(),
            c.washing_index.to_string(),
            peers[&(c.firm_id, c.period)].to_string(),
            c.green_output.to_string(),
        ]
    });
    write_table(path, &SCORED_PANEL_COLUMNS, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(firm: u32, industry: u32, desc: u32, green: u64) -> PanelCell {
        PanelCell::scored(firm, industry, 0, DisclosureRecord { n_descriptive: desc, n_substantive: 2 }, green)
    }

    #[test]
    fn scored_panel_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("panel.csv");
        let panel = vec![cell(0, 0, 3, 1), cell(1, 0, 0, 4), cell(2, 1, 5, 0), cell(3, 1, 1, 2)];
        write_scored_panel(&path, &panel).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "firm_id,industry_id,period,n_descriptive,n_substantive,washing_index,peer_washing_index,green_output\n"
        ));
        assert_eq!(read_panel(&path).unwrap(), panel);
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn raw_panel_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.csv");
        fs::write(&path, "firm_id,industry_id,period,n_descriptive,n_substantive,green_output\n7,1,3,6,4,2\n").unwrap();
        let cells = read_panel(&path).unwrap();
        assert_eq!(cells.len(), 1);
        assert!((cells[0].washing_index - 7f64.ln()).abs() < 1e-12);
        assert_eq!(cells[0].green_output, 2);
    }

    #[test]
    fn schema_error_names_first_bad_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "firm_id,industry,period,n_descriptive,n_substantive,green_output\n").unwrap();
        match read_panel(&path).unwrap_err() {
            IoError::Schema { position, found, expected } => {
                assert_eq!(position, 1);
                assert_eq!(found, "industry");
                assert_eq!(expected, "industry_id");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn bad_row_reports_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "firm_id,industry_id,period,n_descriptive,n_substantive,green_output\n1,0,0,2,2,1\n2,0,0,-1,2,1\n")
            .unwrap();
        assert!(matches!(read_panel(&path), Err(IoError::Row { row: 2, .. })));
    }

    #[test]
    fn lone_firm_industry_fails_scoring() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let err = write_scored_panel(&path, &[cell(0, 0, 1, 0), cell(1, 0, 1, 0), cell(2, 5, 1, 0)]).unwrap_err();
        assert!(err.to_string().contains("industry 5"), "{err}");
        assert!(!path.exists());
    }
}
