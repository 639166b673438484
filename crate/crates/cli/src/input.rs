//! Symbols, points and matrices from command-line strings or files.

use anyhow::{Context, Result};
use ncfock::fock::read_csv;
use ncfock::ncpoly::{from_json, parse_ncpoly};
use ncfock::{CMat, MatPoly, RowTuple};
use std::fmt;
use std::path::Path;

/// A problem with what the user supplied; maps to exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// An expression, or a `.json` file written by `to_json`.
pub fn symbol(arg: &str, d: usize) -> Result<MatPoly<f64>> {
    if arg.ends_with(".json") {
        let p: MatPoly<f64> = from_json(&read(Path::new(arg))?)?;
        if p.d() != d {
            return Err(usage(format!("{arg} has d = {}, expected {d}", p.d())));
        }
        return Ok(p);
    }
    Ok(parse_ncpoly(arg, d).with_context(|| format!("parsing symbol {arg:?}"))?)
}

/// Split at commas outside brackets and parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let (mut depth, mut start, mut out) = (0i32, 0, Vec::new());
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// A constant expression or a CSV file.
pub fn matrix(arg: &str) -> Result<CMat<f64>> {
    if Path::new(arg).is_file() {
        return Ok(read_csv(&read(Path::new(arg))?)?);
    }
    constant(arg)
}

fn constant(arg: &str) -> Result<CMat<f64>> {
    let p: MatPoly<f64> = parse_ncpoly(arg, 1).with_context(|| format!("parsing constant {arg:?}"))?;
    if p.degree().unwrap_or(0) > 0 {
        return Err(usage(format!("{arg:?} is not a constant")));
    }
    Ok(p.coeff(&ncfock::Word::empty()))
}

/// A d-tuple of square matrices: a CSV row block `[Z_1 ... Z_d]`, or `d`
/// comma-separated constant expressions.
pub fn point(arg: &str, d: usize) -> Result<RowTuple<f64>> {
    if Path::new(arg).is_file() {
        let block: CMat<f64> = read_csv(&read(Path::new(arg))?)?;
        return Ok(RowTuple::from_row_block(&block, d)?);
    }
    let parts = split_top(arg);
    if parts.len() != d {
        return Err(usage(format!("point {arg:?} has {} entries, expected {d}", parts.len())));
    }
    let mats = parts.iter().map(|s| constant(s.trim())).collect::<Result<Vec<_>>>()?;
    Ok(RowTuple::new(mats)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points() {
        let z = point("0.3, 0.2i", 2).unwrap();
        assert_eq!(z.n, 1);
        assert_eq!(z.mats[1][(0, 0)].im, 0.2);
        let x = point("[[0,0.5],[0,0]],[[0,0],[0.1,0]]", 2).unwrap();
        assert_eq!(x.n, 2);
        assert_eq!(x.mats[1][(1, 0)].re, 0.1);
        assert!(point("0.3", 2).is_err());
        assert!(point("z1", 1).is_err());
    }
}
