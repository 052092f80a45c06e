//! Flat text formats for grid functions, cube collections and ρ tables.
//!
//! Grid function: line 1 is `N`, then `2^N` whitespace-separated values
//! (any line layout). Collection: line 1 is `N`, then one `level index` pair
//! per line. Blank lines and text after `#` are ignored in both.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, GridFunction};
use crate::sparse::SparseCollection;
use crate::weights::{Rho, RhoTable};

/// `%.17g`: 17 significant digits, plain or scientific, trailing zeros trimmed.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_resolution(first: Option<(usize, &str)>) -> Result<(usize, u32)> {
    let (line, text) = first.ok_or(Error::Parse { line: 1, message: "missing resolution line".into() })?;
    let n = text
        .parse::<u32>()
        .map_err(|_| Error::Parse { line, message: format!("expected resolution, found `{text}`") })?;
    Ok((line, n))
}

pub fn parse_grid_function(text: &str) -> Result<GridFunction> {
    let mut lines = content_lines(text);
    let (line_n, n) = parse_resolution(lines.next())?;
    if n > crate::grid::MAX_RESOLUTION {
        return Err(Error::Parse { line: line_n, message: format!("resolution {n} is too large") });
    }
    let expected = 1usize << n;
    let mut values = Vec::with_capacity(expected);
    let mut last_line = line_n;
    for (line, text) in lines {
        last_line = line;
        for tok in text.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("`{tok}` is not a number") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("`{tok}` is not finite") });
            }
            if values.len() == expected {
                return Err(Error::Parse { line, message: format!("more than {expected} values") });
            }
            values.push(v);
        }
    }
    if values.len() != expected {
        return Err(Error::Parse {
            line: last_line,
            message: format!("expected {expected} values, found {}", values.len()),
        });
    }
    GridFunction::new(n, values)
}

pub fn format_grid_function(f: &GridFunction) -> String {
    let mut out = format!("{}\n", f.resolution());
    let body: Vec<String> = f.values().iter().map(|v| format!("{v:?}")).collect();
    out.push_str(&body.join(" "));
    out.push('\n');
    out
}

pub fn parse_collection(text: &str) -> Result<SparseCollection> {
    let mut lines = content_lines(text);
    let (_, n) = parse_resolution(lines.next())?;
    let mut cubes = Vec::new();
    for (line, text) in lines {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let bad = |message: String| Error::Parse { line, message };
        let [l, i] = parts[..] else {
            return Err(bad(format!("expected `level index`, found `{text}`")));
        };
        let level: u32 = l.parse().map_err(|_| bad(format!("bad level `{l}`")))?;
        let index: u64 = i.parse().map_err(|_| bad(format!("bad index `{i}`")))?;
        let cube = DyadicCube::new(level, index).map_err(|e| bad(e.to_string()))?;
        if level > n {
            return Err(bad(format!("cube {cube} is finer than resolution {n}")));
        }
        cubes.push(cube);
    }
    SparseCollection::new(n, cubes)
}

pub fn format_collection(s: &SparseCollection) -> String {
    let mut out = format!("{}\n", s.resolution());
    for q in s.cubes() {
        writeln!(out, "{} {}", q.level(), q.index()).expect("string write");
    }
    out
}

/// CSV with header `level,index,rho,vacuous`.
pub fn format_rho_csv(table: &RhoTable) -> String {
    let mut out = String::from("level,index,rho,vacuous\n");
    for (q, r) in table.iter() {
        writeln!(out, "{},{},{},{}", q.level(), q.index(), fmt_g17(r.value()), matches!(r, Rho::Vacuous))
            .expect("string write");
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Parse errors keep their line number and gain the path.
fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    with_path(path, parse_grid_function(&read(path)?))
}

pub fn read_collection(path: &Path) -> Result<SparseCollection> {
    with_path(path, parse_collection(&read(path)?))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
