//! Plain-text operator files.
//!
//! ```text
//! kext-state v1
//! layout A:2 B:2
//! dim 4
//! 0.5 0
//! ...
//! ```
//!
//! The `layout` line is optional. After `dim N` follow `N²` lines `re im`
//! in row-major order. Numbers are written in shortest round-trip form, so
//! a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Dense, HermitianOperator, SystemLayout};
use crate::states::DensityOperator;

pub const HEADER: &str = "kext-state v1";

pub fn format_operator(op: &HermitianOperator) -> String {
    let n = op.dim();
    let mut out = String::with_capacity(n * n * 24 + 64);
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "layout {}", op.layout());
    let _ = writeln!(out, "dim {n}");
    for i in 0..n {
        for j in 0..n {
            let z = op.get(i, j);
            let _ = writeln!(out, "{} {}", z.re, z.im);
        }
    }
    out
}

pub fn save_operator(path: impl AsRef<Path>, op: &HermitianOperator) -> Result<()> {
    fs::write(path, format_operator(op))?;
    Ok(())
}

pub fn save_state(path: impl AsRef<Path>, state: &DensityOperator) -> Result<()> {
    save_operator(path, state.op())
}

/// Parsed file contents: the layout line if present and the matrix.
pub fn parse_matrix(text: &str) -> Result<(Option<SystemLayout>, Dense<Complex64>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: String| Error::Parse { line, msg };

    match lines.next() {
        Some((_, l)) if l == HEADER => {}
        Some((n, l)) => return Err(err(n, format!("expected `{HEADER}`, found `{l}`"))),
        None => return Err(err(1, "empty file".into())),
    }

    let mut layout = None;
    let (mut n_line, mut line) = lines.next().ok_or_else(|| err(2, "missing `dim` line".into()))?;
    if let Some(rest) = line.strip_prefix("layout") {
        layout = Some(parse_layout(rest).map_err(|m| err(n_line, m))?);
        (n_line, line) = lines
            .next()
            .ok_or_else(|| err(n_line + 1, "missing `dim` line".into()))?;
    }
    let dim: usize = line
        .strip_prefix("dim")
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(|| err(n_line, format!("expected `dim N`, found `{line}`")))?;

    let mut data = Vec::with_capacity(dim * dim);
    for (n, l) in lines.by_ref().take(dim * dim) {
        let mut parts = l.split_whitespace();
        let mut num = |what: &str| -> Result<f64> {
            let tok = parts.next().ok_or_else(|| err(n, format!("missing {what} part")))?;
            tok.parse().map_err(|_| err(n, format!("invalid number `{tok}`")))
        };
        let re = num("real")?;
        let im = num("imaginary")?;
        if parts.next().is_some() {
            return Err(err(n, "expected two numbers".into()));
        }
        data.push(Complex64::new(re, im));
    }
    if data.len() != dim * dim {
        return Err(err(
            n_line,
            format!("expected {} entries, found {}", dim * dim, data.len()),
        ));
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, "trailing content after matrix".into()));
    }
    Ok((layout, Dense::from_vec(dim, data)))
}

fn parse_layout(s: &str) -> std::result::Result<SystemLayout, String> {
    let parts = s
        .split_whitespace()
        .map(|tok| {
            let (label, d) = tok
                .split_once(':')
                .ok_or_else(|| format!("expected `label:dim`, found `{tok}`"))?;
            let d: usize = d.parse().map_err(|_| format!("invalid dimension in `{tok}`"))?;
            Ok((label.to_owned(), d))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    SystemLayout::new(parts).map_err(|e| e.to_string())
}

/// Reads an operator, using the file's layout line or the supplied layout.
///
/// When both are present their dimensions must agree; the supplied labels win.
pub fn load_operator(path: impl AsRef<Path>, layout: Option<&SystemLayout>) -> Result<HermitianOperator> {
    let text = fs::read_to_string(path)?;
    let (file_layout, m) = parse_matrix(&text)?;
    let layout = match (layout, file_layout) {
        (Some(given), Some(found)) if given.dims() != found.dims() => {
            return Err(Error::DimensionMismatch(format!(
                "file layout `{found}` does not match `{given}`"
            )))
        }
        (Some(given), _) => given.clone(),
        (None, Some(found)) => found,
        (None, None) => SystemLayout::new([("X", m.dim())])?,
    };
    HermitianOperator::from_complex(layout, m)
}

/// Reads and validates a state, rescaling it to unit trace.
pub fn load_state(path: impl AsRef<Path>, layout: &SystemLayout) -> Result<DensityOperator> {
    load_state_with(path, Some(layout), true)
}

pub fn load_state_with(
    path: impl AsRef<Path>,
    layout: Option<&SystemLayout>,
    normalize: bool,
) -> Result<DensityOperator> {
    let op = load_operator(path, layout)?;
    if normalize {
        DensityOperator::new(op)
    } else {
        DensityOperator::unnormalized(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "kext-state v1\ndim 1\n1 x\n";
        match parse_matrix(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_matrix("nope"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_matrix("kext-state v1\ndim 2\n1 0\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn layout_line_is_optional() {
        let (l, m) = parse_matrix("kext-state v1\ndim 1\n1 0\n").unwrap();
        assert!(l.is_none());
        assert_eq!(m.dim(), 1);
        let (l, _) = parse_matrix("kext-state v1\nlayout A:1\ndim 1\n1 0\n").unwrap();
        assert_eq!(l.unwrap().labels(), vec!["A"]);
    }
}
