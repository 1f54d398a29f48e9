//! CSV and JSON artifacts with a provenance header.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, locale-free.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Comment header (version, command, config, scale factors and what the
    /// data reproduces) followed by the column row.
    pub fn new(command: &str, cfg: &RunConfig, reproduces: &str, columns: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# fedosov {VERSION}");
        let _ = writeln!(text, "# command: {command}");
        let _ = writeln!(text, "# config: {cfg}");
        if let Some(s) = cfg.scales() {
            let _ = writeln!(
                text,
                "# natural units in SI: energy = {} J; action = {} J s; length = {} m; time = {} s; momentum = {} kg m/s",
                num(s.energy),
                num(s.action),
                num(s.length),
                num(s.time),
                num(s.momentum)
            );
        }
        let _ = writeln!(text, "# reproduces: {reproduces}");
        let _ = writeln!(text, "{}", columns.join(","));
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn header_then_columns() {
        let mut csv = Csv::new("marginal --m 1", &RunConfig::default(), "test data", &["r", "P"]);
        csv.row(&[num(0.0), num(1.5)]);
        let text = csv.into_string();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# fedosov "));
        assert!(lines[2].starts_with("# config: units = natural"));
        assert_eq!(lines[lines.len() - 2], "r,P");
        assert_eq!(lines[lines.len() - 1], "0.0000000000000000e0,1.5000000000000000e0");
    }
}
