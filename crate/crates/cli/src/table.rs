//! Column tables shared by the CSV and SVG writers.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// One plotted quantity; `stderr`, when present, becomes a `<name>_stderr`
/// column and error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

impl Column {
    pub fn plain(name: &str, values: Vec<f64>) -> Self {
        Column {
            name: name.to_string(),
            values,
            stderr: None,
        }
    }

    pub fn with_error(name: &str, values: Vec<f64>, stderr: Vec<f64>) -> Self {
        Column {
            name: name.to_string(),
            values,
            stderr: Some(stderr),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub title: String,
    pub x_name: String,
    /// Print the x column as integers (steps, sites).
    pub x_integer: bool,
    pub x: Vec<f64>,
    pub y_label: String,
    pub columns: Vec<Column>,
}

impl SeriesTable {
    pub fn new(title: &str, x_name: &str, x: Vec<f64>, y_label: &str) -> Self {
        SeriesTable {
            title: title.to_string(),
            x_name: x_name.to_string(),
            x_integer: false,
            x,
            y_label: y_label.to_string(),
            columns: Vec::new(),
        }
    }

    pub fn integer_x(mut self) -> Self {
        self.x_integer = true;
        self
    }

    pub fn push(&mut self, column: Column) {
        self.columns.push(column);
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.x_name.clone()];
        for c in &self.columns {
            match c.stderr {
                Some(_) => {
                    h.push(format!("{}_mean", c.name));
                    h.push(format!("{}_stderr", c.name));
                }
                None => h.push(c.name.clone()),
            }
        }
        h
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.x.is_empty() || self.columns.is_empty() {
            return Err(CliError::Runtime(format!("table `{}` is empty", self.title)));
        }
        for c in &self.columns {
            let bad_err = c.stderr.as_ref().is_some_and(|e| e.len() != self.x.len());
            if c.values.len() != self.x.len() || bad_err {
                return Err(CliError::Runtime(format!(
                    "column `{}` of `{}` has the wrong length",
                    c.name, self.title
                )));
            }
        }
        Ok(())
    }

    /// CSV bytes: header row, comma separated, LF line ends, floats with 17
    /// significant digits.
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        self.validate()?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.header()).map_err(csv_err)?;
        for (i, &x) in self.x.iter().enumerate() {
            let mut row = vec![if self.x_integer {
                format!("{}", x as i64)
            } else {
                float(x)
            }];
            for c in &self.columns {
                row.push(float(c.values[i]));
                if let Some(e) = &c.stderr {
                    row.push(float(e[i]));
                }
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let bytes = self.to_csv()?;
        let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(&bytes).map_err(|e| CliError::io(path, e))
    }
}

/// 17 significant digits in scientific notation; parses back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_expands_error_columns() {
        let mut t = SeriesTable::new("x", "p", vec![0.0, 1.0], "y");
        t.push(Column::with_error("temporal", vec![1.0, 2.0], vec![0.1, 0.2]));
        t.push(Column::plain("ordered", vec![3.0, 3.0]));
        assert_eq!(t.header(), ["p", "temporal_mean", "temporal_stderr", "ordered"]);
        let csv = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 7.488850198639925, -2.5e-300, 0.0] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn empty_table_is_rejected() {
        assert!(SeriesTable::new("e", "t", vec![], "y").to_csv().is_err());
    }
}
