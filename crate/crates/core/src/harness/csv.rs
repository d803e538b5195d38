//! CSV output: a fingerprint comment line, a header row, and one row per
//! sample with every value printed to 12 significant digits. Identical
//! configurations produce byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::runner::TimeSeries;

fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

/// Render a time series as CSV text.
pub fn csv_string(series: &TimeSeries) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config-sha256: {}\n", series.fingerprint));
    let mut header = vec!["t".to_string()];
    header.extend(series.columns.iter().map(|(name, _)| escape(name)));
    out.push_str(&header.join(","));
    out.push('\n');
    for (k, &t) in series.times.iter().enumerate() {
        let mut row = vec![format_value(t)];
        for (_, col) in &series.columns {
            row.push(format_value(col[k]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Write a time series to `path`, creating parent directories as needed.
pub fn write_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", parent.display()))))?;
        }
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    file.write_all(csv_string(series).as_bytes())
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> TimeSeries {
        TimeSeries {
            times: vec![0.0, 0.5],
            columns: vec![("pi_tangle".into(), vec![0.5494, 0.25])],
            fingerprint: "ab".repeat(32),
        }
    }

    #[test]
    fn layout_matches_contract() {
        let text = csv_string(&series());
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# config-sha256: abab"));
        assert_eq!(lines[1], "t,pi_tangle");
        assert_eq!(lines.len(), 4);
        // 12 significant digits
        assert!(lines[2].starts_with("0.00000000000e0,5.49400000000e-1"));
    }

    #[test]
    fn rerun_is_byte_identical() {
        assert_eq!(csv_string(&series()), csv_string(&series()));
    }

    #[test]
    fn fields_needing_quotes_are_quoted() {
        assert_eq!(escape("plain"), "plain");
        assert_eq!(escape("a,b"), "\"a,b\"");
        assert_eq!(escape("a\"b"), "\"a\"\"b\"");
    }

    #[test]
    fn writes_through_fresh_directories() {
        let dir = std::env::temp_dir().join(format!("qbath-csv-{}", std::process::id()));
        let path = dir.join("nested/out.csv");
        write_csv(&series(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("pi_tangle"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
