//! Text formats for incidence structures, mosaics, class partitions,
//! distributions, density operators and channels.
//!
//! Incidence structure: a `v b` header line followed by `v` rows of `b`
//! characters from `{0,1}`. A mosaic file repeats that block, each preceded
//! by a `color <label>` line. Blank lines and lines starting with `#` are
//! ignored.
//!
//! Density operators and channels are JSON. Numbers are written with 17
//! significant digits so that a round trip is exact.

use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use crate::designs::{ClassPartition, DesignError, IncidenceStructure, Mosaic};
use crate::linalg::CMatrix;
use crate::quantum::{DensityOperator, QuantumError, Tolerances};
use crate::scalar::Real;
use crate::wiretap::{CqChannel, LeakageEvaluator, WiretapError};
use num_complex::Complex;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Wiretap(#[from] WiretapError),
    #[error("{0}")]
    Invalid(String),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn write_incidence(inc: &IncidenceStructure) -> String {
    let mut out = format!("{} {}\n", inc.points(), inc.blocks());
    for x in 0..inc.points() {
        out.extend(inc.row(x).iter().map(|&c| if c == 1 { '1' } else { '0' }));
        out.push('\n');
    }
    out
}

fn parse_header(line: usize, text: &str) -> Result<(usize, usize), FormatError> {
    let mut it = text.split_whitespace();
    let mut next = |name: &str| -> Result<usize, FormatError> {
        it.next()
            .ok_or_else(|| parse_err(line, format!("missing {name} in header")))?
            .parse()
            .map_err(|e| parse_err(line, format!("bad {name}: {e}")))
    };
    let v = next("v")?;
    let b = next("b")?;
    if it.next().is_some() {
        return Err(parse_err(line, "header must be `v b`"));
    }
    Ok((v, b))
}

fn parse_block<'a, I>(lines: &mut std::iter::Peekable<I>) -> Result<IncidenceStructure, FormatError>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
    let (v, b) = parse_header(hl, header)?;
    let mut cells = Vec::with_capacity(v * b);
    for row in 0..v {
        let (ln, text) = lines
            .next()
            .ok_or_else(|| parse_err(hl, format!("expected {v} rows, found {row}")))?;
        if text.chars().count() != b {
            return Err(parse_err(
                ln,
                format!("expected {b} cells, found {}", text.chars().count()),
            ));
        }
        for ch in text.chars() {
            cells.push(match ch {
                '0' => 0,
                '1' => 1,
                other => return Err(parse_err(ln, format!("invalid cell {other:?}"))),
            });
        }
    }
    Ok(IncidenceStructure::new(v, b, cells)?)
}

pub fn parse_incidence(text: &str) -> Result<IncidenceStructure, FormatError> {
    let mut lines = content_lines(text).peekable();
    let inc = parse_block(&mut lines)?;
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content"));
    }
    Ok(inc)
}

pub fn write_mosaic(mos: &Mosaic) -> String {
    let mut out = String::new();
    for (label, m) in mos.colors().iter().zip(mos.members()) {
        out.push_str("color ");
        out.push_str(label);
        out.push('\n');
        out.push_str(&write_incidence(m));
    }
    out
}

pub fn parse_mosaic(text: &str) -> Result<Mosaic, FormatError> {
    let mut lines = content_lines(text).peekable();
    let mut colors = Vec::new();
    let mut members = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let label = line
            .strip_prefix("color")
            .filter(|rest| rest.starts_with(char::is_whitespace))
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .ok_or_else(|| parse_err(ln, "expected `color <label>`"))?;
        colors.push(label.to_string());
        members.push(parse_block(&mut lines)?);
    }
    if members.is_empty() {
        return Err(parse_err(0, "no members"));
    }
    Ok(Mosaic::new(colors, members)?)
}

/// Whitespace- or comma-separated class label per point.
pub fn parse_classes(text: &str) -> Result<ClassPartition, FormatError> {
    let labels = parse_numbers::<usize>(text)?;
    Ok(ClassPartition::new(&labels)?)
}

fn parse_numbers<N: std::str::FromStr>(text: &str) -> Result<Vec<N>, FormatError>
where
    N::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for (ln, line) in content_lines(text) {
        for tok in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            out.push(
                tok.parse()
                    .map_err(|e| parse_err(ln, format!("bad number {tok:?}: {e}")))?,
            );
        }
    }
    Ok(out)
}

/// Distribution as a JSON array or a whitespace/comma-separated list.
pub fn parse_distribution(text: &str) -> Result<Vec<f64>, FormatError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return Ok(serde_json::from_str(trimmed)?);
    }
    parse_numbers(text)
}

/// 17 significant digits in scientific notation; zero is written as `0.0`.
fn num(x: f64) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    format!("{x:.16e}")
}

fn write_num_array(out: &mut String, xs: impl Iterator<Item = f64>) {
    out.push('[');
    for (i, x) in xs.enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&num(x));
    }
    out.push(']');
}

fn density_body<T: Real>(rho: &CMatrix<T>, indent: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "{indent}  \"dim\": {},", rho.dim());
    let _ = write!(out, "{indent}  \"re\": ");
    write_num_array(&mut out, rho.as_slice().iter().map(|z| z.re.to_f64_lossy()));
    let _ = writeln!(out, ",");
    let _ = write!(out, "{indent}  \"im\": ");
    write_num_array(&mut out, rho.as_slice().iter().map(|z| z.im.to_f64_lossy()));
    let _ = write!(out, "\n{indent}}}");
    out
}

pub fn write_density<T: Real>(rho: &DensityOperator<T>) -> String {
    density_body(rho.matrix(), "") + "\n"
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFile {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl DensityFile {
    fn into_state<T: Real>(self, tol: &Tolerances) -> Result<DensityOperator<T>, FormatError> {
        let n = self.dim * self.dim;
        if self.re.len() != n || self.im.len() != n {
            return Err(FormatError::Invalid(format!(
                "dim {} needs {n} entries, found re={} im={}",
                self.dim,
                self.re.len(),
                self.im.len()
            )));
        }
        let data = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex::new(T::c(r), T::c(i)))
            .collect();
        Ok(DensityOperator::new(CMatrix::from_vec(self.dim, data), tol)?)
    }
}

pub fn parse_density<T: Real>(text: &str, tol: &Tolerances) -> Result<DensityOperator<T>, FormatError> {
    serde_json::from_str::<DensityFile>(text)?.into_state(tol)
}

pub fn write_channel<T: Real>(ch: &CqChannel<T>) -> String {
    let mut out = String::from("{\n  \"labels\": ");
    out.push_str(&serde_json::to_string(ch.labels()).expect("strings serialize"));
    out.push_str(",\n  \"states\": [\n");
    for (i, s) in ch.states().iter().enumerate() {
        out.push_str("    ");
        out.push_str(&density_body(s.matrix(), "    "));
        out.push_str(if i + 1 < ch.inputs() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    labels: Vec<String>,
    states: Vec<DensityFile>,
}

pub fn parse_channel<T: Real>(text: &str, tol: &Tolerances) -> Result<CqChannel<T>, FormatError> {
    let file: ChannelFile = serde_json::from_str(text)?;
    let states = file
        .states
        .into_iter()
        .map(|d| d.into_state(tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CqChannel::new(file.labels, states)?)
}

/// One row per `(distribution, seed, color)`, in that nesting order.
pub fn leakage_csv<T: Real>(eval: &LeakageEvaluator<T>, dists: &[Vec<T>]) -> Result<String, FormatError> {
    let cells = eval.cells();
    let mut out = String::from("dist,seed,color,prob,seed_chi,renyi2_exp,trace_distance\n");
    for (di, dist) in dists.iter().enumerate() {
        let per_seed = eval.per_seed_chi(dist)?;
        for cell in &cells {
            let _ = writeln!(
                out,
                "{di},{},{},{},{},{},{}",
                cell.seed,
                cell.color,
                num(dist[cell.color].to_f64_lossy()),
                num(per_seed[cell.seed].to_f64_lossy()),
                num(cell.renyi2_exp),
                num(cell.trace_distance),
            );
        }
    }
    Ok(out)
}
