//! CSV tables whose rows carry their full parameter tuple.

use std::fmt;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    F(f64),
    I(i64),
    S(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::F(x) => write!(f, "{x:.16e}"),
            Value::I(i) => write!(f, "{i}"),
            Value::S(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::F(x)
    }
}

impl From<i32> for Value {
    fn from(x: i32) -> Self {
        Value::I(x.into())
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::I(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::I(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::I(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::I(x.into())
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::S(x.into())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::S(x)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    /// A table whose leading columns are `params`, repeated on every row.
    pub fn with_params(params: &[(&str, Value)], columns: &[&str]) -> Self {
        let header = params.iter().map(|p| p.0.to_string()).chain(columns.iter().map(|c| c.to_string())).collect();
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, params: &[(&str, Value)], values: Vec<Value>) {
        let row: Vec<Value> = params.iter().map(|p| p.1.clone()).chain(values).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Value::to_string))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// The run parameters shared by every table.
pub fn base_params(cfg: &ExperimentConfig) -> Vec<(&'static str, Value)> {
    let g = cfg.grid();
    let [n1, n2, n3] = g.n();
    let [l1, l2, l3] = g.lengths();
    let s = &cfg.solver;
    vec![
        ("command", cfg.command.clone().into()),
        ("n1", n1.into()),
        ("n2", n2.into()),
        ("n3", n3.into()),
        ("l1", l1.into()),
        ("l2", l2.into()),
        ("l3", l3.into()),
        ("nu_h", s.nu_h.into()),
        ("nu_3", s.nu_3.into()),
        ("dt", s.dt.into()),
        ("t_end", s.t_end.into()),
        ("n_cutoff", s.n_cutoff.into()),
        ("p", cfg.besov.p.into()),
        ("seed", cfg.seed.into()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        assert_eq!(Value::F(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(Value::F(1.0 / 3.0).to_string().parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn rows_are_prefixed_by_parameters() {
        let params = [("seed", Value::I(3))];
        let mut t = Table::with_params(&params, &["x"]);
        t.push(&params, vec![2.5.into()]);
        assert_eq!(t.header, ["seed", "x"]);
        assert_eq!(t.rows[0], [Value::I(3), Value::F(2.5)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("t.csv");
        t.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "seed,x\n3,2.5000000000000000e0\n");
    }
}
