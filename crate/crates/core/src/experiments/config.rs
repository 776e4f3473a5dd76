//! Flat `key = value` configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::{Matrix, RowVector, Vector};

/// An ordered set of string-valued keys. Experiments declare their defaults; files and
/// command-line flags may only override declared keys.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    order: Vec<String>,
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a key with its default.
    pub fn define(&mut self, key: &str, value: impl ToString) -> &mut Self {
        if !self.values.contains_key(key) {
            self.order.push(key.to_string());
        }
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(Error::Config(format!("unknown key '{key}'"))),
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Applies `key = value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for k in &self.order {
            let _ = writeln!(out, "{k} = {}", self.values[k]);
        }
        out
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{raw}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.get(key)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.get(key)
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.get(key)
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        parse_list(key, self.raw(key)?)
    }

    pub fn vector(&self, key: &str) -> Result<Vector> {
        Ok(Vector::from_vec(self.list(key)?))
    }

    pub fn row(&self, key: &str) -> Result<RowVector> {
        Ok(RowVector::from_vec(self.list(key)?))
    }

    /// Rows separated by `;`, entries by `,`.
    pub fn matrix(&self, key: &str) -> Result<Matrix> {
        let rows: Vec<Vec<f64>> =
            self.raw(key)?.split(';').map(|r| parse_list(key, r)).collect::<Result<_>>()?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Config(format!("{key}: ragged or empty matrix")));
        }
        Ok(Matrix::from_row_iterator(n, m, rows.into_iter().flatten()))
    }
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{t}'")))
        })
        .collect()
}

pub fn format_list(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn format_matrix(m: &Matrix) -> String {
    m.row_iter().map(|r| format_list(r.iter().copied())).collect::<Vec<_>>().join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overrides_and_comments() {
        let mut c = Config::new();
        c.define("dt", 1e-3).define("x0", "1, 0, 0");
        c.apply_text("# comment\n dt = 0.01  # trailing\n\n").unwrap();
        assert_eq!(c.f64("dt").unwrap(), 0.01);
        assert_eq!(c.list("x0").unwrap(), vec![1.0, 0.0, 0.0]);
        assert!(matches!(c.apply_text("nope = 1"), Err(Error::Config(_))));
        assert!(matches!(c.apply_text("dt 1"), Err(Error::Config(_))));
    }

    #[test]
    fn matrix_keys() {
        let mut c = Config::new();
        c.define("p", "1, 2; 3, 4");
        assert_eq!(c.matrix("p").unwrap(), Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        c.set("p", "1, 2; 3").unwrap();
        assert!(c.matrix("p").is_err());
    }

    proptest! {
        #[test]
        fn printed_config_reparses_to_itself(dt in 1e-6f64..1.0, xs in proptest::collection::vec(-1e3f64..1e3, 1..5)) {
            let mut c = Config::new();
            c.define("dt", dt).define("x0", format_list(xs.iter().copied()));
            let mut d = c.clone();
            d.set("dt", 0).unwrap();
            d.apply_text(&c.to_text()).unwrap();
            prop_assert_eq!(d.f64("dt").unwrap(), dt);
            prop_assert_eq!(d.list("x0").unwrap(), xs);
        }
    }
}
