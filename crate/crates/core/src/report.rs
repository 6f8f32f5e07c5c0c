//! Report emission: CSV, JSON, and a gnuplot-ready data file with one
//! series per reasoning kind, weather points ordered sunny → partly sunny
//! → rainy.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::grader::{GradeReport, ReportRow};
use crate::scenario::ReasoningKind;

/// Files written by [`emit_report`].
#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub plot: PathBuf,
}

/// `weather,reasoning,total,wrong,accuracy` with accuracy to four decimal
/// places. Rows with no countable items are omitted (their accuracy is
/// undefined); they stay visible in the JSON report.
pub fn write_csv(report: &GradeReport, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "weather,reasoning,total,wrong,accuracy")?;
    for row in &report.rows {
        if let Some(accuracy) = row.accuracy {
            writeln!(
                w,
                "{},{},{},{},{:.4}",
                row.weather, row.reasoning, row.total, row.wrong, accuracy
            )?;
        }
    }
    Ok(())
}

/// Full report as pretty JSON, including provenance and flag counts.
pub fn write_json(report: &GradeReport, mut w: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    Ok(())
}

fn weather_x(name: &str) -> Option<usize> {
    match name {
        "sunny" => Some(0),
        "partly_sunny" => Some(1),
        "rainy" => Some(2),
        _ => None,
    }
}

/// Gnuplot data: one indexed block per reasoning kind, columns
/// `x accuracy weather`. Plot with e.g. `plot "plot.dat" index 0 using 1:2`.
pub fn write_plot_data(report: &GradeReport, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "# accuracy by weather (x: 0=sunny 1=partly_sunny 2=rainy)")?;
    let mut first = true;
    for kind in ReasoningKind::ALL {
        let mut rows: Vec<&ReportRow> = report
            .rows
            .iter()
            .filter(|r| r.reasoning == kind && r.accuracy.is_some())
            .filter(|r| weather_x(&r.weather).is_some())
            .collect();
        if rows.is_empty() {
            continue;
        }
        rows.sort_by_key(|r| weather_x(&r.weather));
        if !first {
            // Two blank lines start a new gnuplot index block.
            writeln!(w)?;
            writeln!(w)?;
        }
        first = false;
        writeln!(w, "# reasoning: {kind}")?;
        for row in rows {
            writeln!(
                w,
                "{} {:.6} {}",
                weather_x(&row.weather).unwrap(),
                row.accuracy.unwrap(),
                row.weather
            )?;
        }
    }
    Ok(())
}

/// Write `report.csv`, `report.json`, and `plot.dat` into a directory.
pub fn emit_report(report: &GradeReport, dir: &Path) -> io::Result<ReportPaths> {
    fs::create_dir_all(dir)?;
    let paths = ReportPaths {
        csv: dir.join("report.csv"),
        json: dir.join("report.json"),
        plot: dir.join("plot.dat"),
    };
    write_csv(report, fs::File::create(&paths.csv)?)?;
    write_json(report, fs::File::create(&paths.json)?)?;
    write_plot_data(report, fs::File::create(&paths.plot)?)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grader::{Annotation, aggregate};
    use crate::scenario::nine_builtin_scenarios;

    fn sample_report() -> GradeReport {
        let scenarios = nine_builtin_scenarios();
        let annotations = vec![
            Annotation {
                scenario_id: "common-sense-sunny".into(),
                sample_index: 0,
                total_answers: 30,
                wrong_answers: 14,
                notes: vec![],
            },
            Annotation {
                scenario_id: "common-sense-partly-sunny".into(),
                sample_index: 0,
                total_answers: 29,
                wrong_answers: 15,
                notes: vec![],
            },
            Annotation {
                scenario_id: "common-sense-rainy".into(),
                sample_index: 0,
                total_answers: 43,
                wrong_answers: 21,
                notes: vec![],
            },
        ];
        aggregate(&[], &annotations, &scenarios).unwrap()
    }

    #[test]
    fn csv_matches_reported_line() {
        let mut buf = Vec::new();
        write_csv(&sample_report(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("weather,reasoning,total,wrong,accuracy"));
        assert_eq!(lines.next(), Some("sunny,common_sense,30,14,0.5333"));
        assert_eq!(lines.next(), Some("partly_sunny,common_sense,29,15,0.4828"));
        assert_eq!(lines.next(), Some("rainy,common_sense,43,21,0.5116"));
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&GradeReport::default(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "weather,reasoning,total,wrong,accuracy\n"
        );
    }

    #[test]
    fn plot_data_series_ordering() {
        let mut buf = Vec::new();
        write_plot_data(&sample_report(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data_lines: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .collect();
        assert_eq!(data_lines.len(), 3);
        assert!(data_lines[0].starts_with("0 ") && data_lines[0].ends_with("sunny"));
        assert!(data_lines[1].starts_with("1 ") && data_lines[1].ends_with("partly_sunny"));
        assert!(data_lines[2].starts_with("2 ") && data_lines[2].ends_with("rainy"));
    }

    #[test]
    fn emit_writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&sample_report(), dir.path()).unwrap();
        assert!(paths.csv.exists());
        assert!(paths.json.exists());
        assert!(paths.plot.exists());
        let json = fs::read_to_string(&paths.json).unwrap();
        assert!(json.contains("\"annotated\""));
    }
}
