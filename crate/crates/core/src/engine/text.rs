//! Plain-text space-time format.
//!
//! One header line `origin=<a> time=<t> valid=<lo>..<hi>`, then one row per
//! line, one character per cell. Symbol characters are `'0'..'3'` for digits
//! and `'E'` for the emitter; rules over other alphabets use `'0'..='7'`.

use super::{EngineError, Sym, SymSet, WindowConfig};
use crate::engine::SpaceTimeDiagram;

pub const EMITTER_CHAR: char = 'E';

pub fn sym_to_char(s: Sym) -> char {
    match s {
        4 => EMITTER_CHAR,
        d => (b'0' + d) as char,
    }
}

pub fn char_to_sym(c: char) -> Result<Sym, EngineError> {
    match c {
        'E' => Ok(4),
        '0'..='7' => Ok(c as u8 - b'0'),
        _ => Err(EngineError::BadText(format!("unknown cell character {c:?}"))),
    }
}

pub fn row_to_string(cells: &[Sym]) -> String {
    cells.iter().map(|&s| sym_to_char(s)).collect()
}

pub fn parse_row(line: &str) -> Result<Vec<Sym>, EngineError> {
    line.trim().chars().map(char_to_sym).collect()
}

fn header_line(cfg: &WindowConfig) -> String {
    let (lo, hi) = cfg.valid();
    format!(
        "origin={} time={} valid={}..{}",
        cfg.origin(),
        cfg.time(),
        lo,
        hi
    )
}

/// Renders a window as header + one row.
pub fn write_window(cfg: &WindowConfig) -> String {
    format!("{}\n{}\n", header_line(cfg), row_to_string(cfg.cells()))
}

/// Renders a diagram: header of the first row, then one line per row.
/// Rows are printed over their own stored spans, left-padded with spaces so
/// that columns line up under the first row.
pub fn write_diagram(diagram: &SpaceTimeDiagram) -> String {
    let first = &diagram.rows[0];
    let base = first.origin();
    let mut out = format!("{}\n", header_line(first));
    for row in &diagram.rows {
        let pad = (row.origin() - base).max(0) as usize;
        out.push_str(&" ".repeat(pad));
        out.push_str(&row_to_string(row.cells()));
        out.push('\n');
    }
    out
}

fn parse_header(line: &str) -> Result<(i64, u32, i64, i64), EngineError> {
    let mut origin = None;
    let mut time = None;
    let mut valid = None;
    for part in line.split_whitespace() {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| EngineError::BadText(format!("bad header field {part:?}")))?;
        match key {
            "origin" => {
                origin = Some(value.parse::<i64>().map_err(|_| {
                    EngineError::BadText(format!("bad origin {value:?}"))
                })?)
            }
            "time" => {
                time = Some(value.parse::<u32>().map_err(|_| {
                    EngineError::BadText(format!("bad time {value:?}"))
                })?)
            }
            "valid" => {
                let (lo, hi) = value
                    .split_once("..")
                    .ok_or_else(|| EngineError::BadText(format!("bad valid range {value:?}")))?;
                let lo = lo
                    .parse::<i64>()
                    .map_err(|_| EngineError::BadText(format!("bad valid lo {lo:?}")))?;
                let hi = hi
                    .parse::<i64>()
                    .map_err(|_| EngineError::BadText(format!("bad valid hi {hi:?}")))?;
                valid = Some((lo, hi));
            }
            _ => return Err(EngineError::BadText(format!("unknown header key {key:?}"))),
        }
    }
    match (origin, time, valid) {
        (Some(o), Some(t), Some((lo, hi))) => Ok((o, t, lo, hi)),
        _ => Err(EngineError::BadText(
            "header must carry origin, time and valid".into(),
        )),
    }
}

/// Parses header + first row into a window.
pub fn read_window(text: &str) -> Result<WindowConfig, EngineError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| EngineError::BadText("empty input".into()))?;
    let (origin, time, lo, hi) = parse_header(header)?;
    let row = lines
        .next()
        .ok_or_else(|| EngineError::BadText("missing cell row".into()))?;
    let cells = parse_row(row)?;
    if cells.is_empty() {
        return Err(EngineError::BadText("empty cell row".into()));
    }
    let span_hi = origin + cells.len() as i64 - 1;
    if lo < origin || hi > span_hi || lo > hi {
        return Err(EngineError::BadText(format!(
            "valid range {lo}..{hi} outside stored span {origin}..{span_hi}"
        )));
    }
    Ok(WindowConfig::from_parts(origin, cells, time, lo, hi, false))
}

/// Parses header + all rows into raw rows (header only describes row 0).
pub fn read_rows(text: &str) -> Result<(i64, Vec<Vec<Sym>>), EngineError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| EngineError::BadText("empty input".into()))?;
    let (origin, _, _, _) = parse_header(header)?;
    let rows: Result<Vec<_>, _> = lines.map(parse_row).collect();
    let rows = rows?;
    if rows.is_empty() {
        return Err(EngineError::BadText("no cell rows".into()));
    }
    Ok((origin, rows))
}

/// Renders a set-valued row for diagnostics: singleton cells print their
/// symbol, wider cells print `*` (full) or `?`.
pub fn set_row_to_string(sets: &[SymSet], full: SymSet) -> String {
    sets.iter()
        .map(|s| {
            if let Some(sym) = s.the_symbol() {
                sym_to_char(sym)
            } else if *s == full {
                '*'
            } else {
                '?'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_roundtrip() {
        let cfg = WindowConfig::new(-3, vec![0, 4, 1, 1, 0, 4, 2]);
        let text = write_window(&cfg);
        let back = read_window(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_text_is_rejected(){
        assert!(read_window("origin=0 time=0 valid=0..4\n01x10").is_err());
        assert!(read_window("origin=0 valid=0..4\n01110").is_err());
        assert!(read_window("origin=0 time=0 valid=0..9\n011").is_err());
    }
}
