use std::fmt::Write as _;
use std::path::Path;

use super::{BenchError, SweepReport};

pub const CSV_HEADER: &str =
    "K,algorithm,trials,exact_rate,anmse,mean_iterations,mean_explored_nodes,mean_wall_time_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-5, 1e12)`.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = usize::try_from(11 - exp).unwrap_or(0);
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in &report.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.k,
            c.algorithm,
            c.trials,
            format_sig12(c.exact_rate),
            format_sig12(c.anmse),
            format_sig12(c.mean_iterations),
            format_sig12(c.mean_explored_nodes),
            format_sig12(c.mean_wall_time_s),
        )
        .expect("writing to a String");
    }
    out
}

pub fn emit_report(report: &SweepReport, format: ReportFormat) -> Result<String, BenchError> {
    match format {
        ReportFormat::Csv => Ok(csv(report)),
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
    }
}

pub fn write_report(report: &SweepReport, format: ReportFormat, path: &Path) -> Result<(), BenchError> {
    std::fs::write(path, emit_report(report, format)?)?;
    Ok(())
}

/// One JSON object per trial, newline separated.
pub fn trial_log(report: &SweepReport) -> Result<String, BenchError> {
    let mut out = String::new();
    for t in &report.trials {
        out.push_str(&serde_json::to_string(t)?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchlab::{CellSummary, ConfigTemplate, GeneratorOptions, SweepSpec};

    fn report(cells: Vec<CellSummary>) -> SweepReport {
        SweepReport {
            schema_version: 1,
            global_seed: 7,
            config: SweepSpec {
                n: 40,
                m: 20,
                k_values: vec![3, 5],
                trials_per_k: 2,
                configs: vec![ConfigTemplate::omp_k()],
                global_seed: 7,
                exact_tol: 1e-2,
                generator: GeneratorOptions::default(),
            },
            cells,
            trials: Vec::new(),
        }
    }

    fn cell(k: usize, rate: f64) -> CellSummary {
        CellSummary {
            k,
            algorithm: "OMP-K".into(),
            trials: 2,
            exact_rate: rate,
            anmse: 0.123456789012345,
            mean_iterations: 3.0,
            mean_explored_nodes: 3.0,
            mean_wall_time_s: 1.5e-6,
        }
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(0.5), "0.5");
        assert_eq!(format_sig12(0.123456789012345), "0.123456789012");
        assert_eq!(format_sig12(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_sig12(123456.0), "123456");
        assert_eq!(format_sig12(1.5e-6), "1.5e-6");
        assert_eq!(format_sig12(-2.5e13), "-2.5e13");
    }

    #[test]
    fn empty_report_is_header_only() {
        let text = emit_report(&report(vec![]), ReportFormat::Csv).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn two_cells_two_rows() {
        let text = emit_report(&report(vec![cell(3, 1.0), cell(5, 0.5)]), ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "3,OMP-K,2,1,0.123456789012,3,3,1.5e-6");
    }

    #[test]
    fn json_round_trip() {
        let r = report(vec![cell(3, 1.0), cell(5, 1.0 / 3.0)]);
        let text = emit_report(&r, ReportFormat::Json).unwrap();
        let back: SweepReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["global_seed"], 7);
        assert!(v["config"]["configs"].is_array());
    }

    #[test]
    fn unwritable_destination() {
        let r = report(vec![]);
        let err = write_report(&r, ReportFormat::Csv, Path::new("/nonexistent-dir/x/report.csv"));
        assert!(matches!(err, Err(BenchError::Io(_))));
    }
}
