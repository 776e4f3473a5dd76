//! Plain-text matrix and certificate files.
//!
//! A matrix is a header line `n m` followed by `n` rows of `m` whitespace-separated
//! decimals. A certificate is a sequence of named sections:
//!
//! ```text
//! [X]
//! 3 3
//! …
//! [Y]
//! 1 3
//! …
//! [mu]
//! 0.2
//! [gamma]
//! 0.44
//! ```
//!
//! Finite-time certificates use an `[a]` section instead of `[gamma]`.

use std::fmt::Write as _;

use super::verify::{GainCertificate, LmiKind};
use crate::error::{Error, Result};
use crate::{Matrix, RowVector};

pub fn write_matrix(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    read_matrix_lines(&mut lines)
}

fn read_matrix_lines<'a>(lines: &mut impl Iterator<Item = &'a str>) -> Result<Matrix> {
    let header = lines.next().ok_or_else(|| parse("missing matrix header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse(format!("bad dimension '{t}'"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(parse(format!("header '{header}' must be 'n m'")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines.next().ok_or_else(|| parse(format!("missing row {}", r + 1)))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse(format!("bad number '{t}'"))))
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(parse(format!("row {} has {} entries, expected {cols}", r + 1, row.len())));
        }
        data.extend(row);
    }
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

pub fn write_certificate(cert: &GainCertificate) -> String {
    let mut out = String::new();
    let _ = write!(out, "[X]\n{}", write_matrix(&cert.x));
    let y = Matrix::from_row_slice(1, cert.y.len(), cert.y.as_slice());
    let _ = write!(out, "[Y]\n{}", write_matrix(&y));
    let _ = writeln!(out, "[mu]\n{}", cert.mu);
    let name = match cert.which {
        LmiKind::FiniteTime => "a",
        LmiKind::Hyper => "gamma",
    };
    let _ = writeln!(out, "[{name}]\n{}", cert.gamma_or_a);
    out
}

pub fn read_certificate(text: &str) -> Result<GainCertificate> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let (mut x, mut y, mut mu, mut witness) = (None, None, None, None);
    while let Some(section) = lines.next() {
        match section {
            "[X]" => x = Some(read_matrix_lines(&mut lines)?),
            "[Y]" => y = Some(read_matrix_lines(&mut lines)?),
            "[mu]" => mu = Some(scalar(lines.next())?),
            "[gamma]" => witness = Some((scalar(lines.next())?, LmiKind::Hyper)),
            "[a]" => witness = Some((scalar(lines.next())?, LmiKind::FiniteTime)),
            other => return Err(parse(format!("unknown section '{other}'"))),
        }
    }
    let x = x.ok_or_else(|| parse("missing [X]"))?;
    let y = y.ok_or_else(|| parse("missing [Y]"))?;
    if y.nrows() != 1 {
        return Err(parse("[Y] must be a single row"));
    }
    let (value, which) = witness.ok_or_else(|| parse("missing [gamma] or [a]"))?;
    let y = RowVector::from_row_slice(y.as_slice());
    GainCertificate::from_xy(x, y, mu.ok_or_else(|| parse("missing [mu]"))?, value, which)
}

fn scalar(line: Option<&str>) -> Result<f64> {
    let line = line.ok_or_else(|| parse("missing scalar value"))?;
    line.parse().map_err(|_| parse(format!("bad number '{line}'")))
}

fn parse(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}
