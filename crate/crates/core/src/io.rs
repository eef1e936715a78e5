//! Text formats: quadrature sample CSV and grid CSV.
//!
//! Sample files start with `# key: value` header lines, then a
//! `theta_radians,value` column header and one sample per line. Grid files
//! carry integer lattice indices next to coordinates so the lattice is
//! recovered exactly on reading. Floats are written in shortest round-trip
//! form.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ingest::QuadratureData;
use crate::lattice::Lattice;
use crate::phasespace::{CFGrid, WignerGrid};
use crate::sources::{Angle, QuadratureSample, StateModel};

pub const CONVENTION: &str = "hbar=1,var_vac=0.5";
pub const SAMPLE_COLUMNS: &str = "theta_radians,value";
pub const CF_COLUMNS: &str = "i,j,xi_q,xi_p,re,im";
pub const WIGNER_COLUMNS: &str = "i,j,z_q,z_p,w";

/// Distinct angles above which a headerless file is treated as
/// phase-randomized.
const PHASE_RANDOM_DISTINCT: usize = 64;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleHeader {
    pub state: Option<StateModel>,
    pub seed: Option<u64>,
    /// Angles as written, `;`-separated.
    pub angles: Vec<Angle>,
    pub count: Option<usize>,
    pub convention: Option<String>,
    /// Extra `# config: ...` line; ignored on reading.
    pub config: Option<String>,
}

impl SampleHeader {
    pub fn phase_random(&self) -> Option<bool> {
        if self.angles.is_empty() {
            None
        } else {
            Some(self.angles.iter().any(|a| matches!(a, Angle::PhaseRandom)))
        }
    }
}

pub fn write_samples(
    mut out: impl Write,
    header: &SampleHeader,
    samples: &[QuadratureSample],
) -> Result<()> {
    let mut s = String::new();
    if let Some(st) = &header.state {
        writeln!(s, "# state: {st}").unwrap();
    }
    if let Some(seed) = header.seed {
        writeln!(s, "# seed: {seed}").unwrap();
    }
    if !header.angles.is_empty() {
        let a: Vec<String> = header.angles.iter().map(|a| a.to_string()).collect();
        writeln!(s, "# angle: {}", a.join(";")).unwrap();
    }
    writeln!(s, "# count: {}", samples.len()).unwrap();
    writeln!(s, "# convention: {CONVENTION}").unwrap();
    if let Some(c) = &header.config {
        writeln!(s, "# config: {c}").unwrap();
    }
    writeln!(s, "{SAMPLE_COLUMNS}").unwrap();
    for x in samples {
        writeln!(s, "{},{}", x.theta, x.value).unwrap();
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line: line as u64, msg: msg.into() }
}

fn parse_f64(field: &str, line: usize, name: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{name}: cannot parse {:?} as a number", field.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{name}: non-finite value")));
    }
    Ok(v)
}

fn parse_header_line(h: &mut SampleHeader, body: &str, line: usize) -> Result<()> {
    let Some((key, value)) = body.split_once(':') else {
        return Ok(());
    };
    let value = value.trim();
    match key.trim() {
        "state" => h.state = Some(value.parse().map_err(|e: Error| parse_err(line, e.to_string()))?),
        "seed" => h.seed = Some(value.parse().map_err(|_| parse_err(line, "seed must be an integer"))?),
        "angle" => {
            h.angles = value
                .split(';')
                .map(|a| a.trim().parse().map_err(|e: Error| parse_err(line, e.to_string())))
                .collect::<Result<_>>()?
        }
        "config" => h.config = Some(value.to_string()),
        "count" => h.count = Some(value.parse().map_err(|_| parse_err(line, "count must be an integer"))?),
        "convention" => {
            if value != CONVENTION {
                return Err(parse_err(line, format!("unsupported convention {value:?}, expected {CONVENTION:?}")));
            }
            h.convention = Some(value.to_string())
        }
        _ => {}
    }
    Ok(())
}

/// Reads a sample file. Line numbers in errors are 1-based.
pub fn read_samples(input: impl BufRead) -> Result<(SampleHeader, QuadratureData)> {
    let mut header = SampleHeader::default();
    let mut samples = Vec::new();
    let mut seen_columns = false;
    for (k, text) in input.lines().enumerate() {
        let line = k + 1;
        let text = text?;
        let t = text.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(body) = t.strip_prefix('#') {
            parse_header_line(&mut header, body, line)?;
            continue;
        }
        if !seen_columns && t.replace(' ', "") == SAMPLE_COLUMNS {
            seen_columns = true;
            continue;
        }
        let fields: Vec<&str> = t.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_err(line, format!("expected 2 columns, found {}", fields.len())));
        }
        let theta = parse_f64(fields[0], line, "theta_radians")?;
        let value = parse_f64(fields[1], line, "value")?;
        samples.push(QuadratureSample::new(theta, value)?);
    }
    if samples.is_empty() {
        return Err(Error::EmptySelection);
    }
    if let Some(c) = header.count {
        if c != samples.len() {
            return Err(parse_err(0, format!("header announces {c} samples, file has {}", samples.len())));
        }
    }
    let phase_random = header.phase_random().unwrap_or_else(|| {
        let mut th: Vec<u64> = samples.iter().map(|s| s.theta.to_bits()).collect();
        th.sort_unstable();
        th.dedup();
        th.len() > PHASE_RANDOM_DISTINCT
    });
    Ok((header, QuadratureData::new(samples, phase_random)))
}

/// Writes `comments` as leading `# ` lines.
fn comment_block(comments: &[String]) -> String {
    comments.iter().flat_map(|c| c.lines()).map(|l| format!("# {l}\n")).collect()
}

pub fn write_cf_grid(mut out: impl Write, grid: &CFGrid, comments: &[String]) -> Result<()> {
    let l = grid.lattice();
    let mut s = comment_block(comments);
    writeln!(s, "{CF_COLUMNS}").unwrap();
    for ((i, j), v) in l.indices().zip(grid.values()) {
        let xi = l.coords(i, j);
        writeln!(s, "{i},{j},{},{},{},{}", xi[0], xi[1], v.re, v.im).unwrap();
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_wigner_grid(mut out: impl Write, grid: &WignerGrid, comments: &[String]) -> Result<()> {
    let l = &grid.grid;
    let mut s = comment_block(comments);
    writeln!(s, "{WIGNER_COLUMNS}").unwrap();
    for ((i, j), w) in l.indices().zip(&grid.values) {
        let z = l.coords(i, j);
        writeln!(s, "{i},{j},{},{},{w}", z[0], z[1]).unwrap();
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

type Row = (i32, i32, [f64; 2], Vec<f64>);

fn read_grid_rows(input: impl BufRead, columns: &str) -> Result<(Lattice, Vec<Row>)> {
    let width = columns.split(',').count();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (k, text) in input.lines().enumerate() {
        let line = k + 1;
        let text = text?;
        let t = text.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !seen_header {
            if t.replace(' ', "") != columns {
                return Err(parse_err(line, format!("expected header {columns:?}")));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = t.split(',').collect();
        if f.len() != width {
            return Err(parse_err(line, format!("expected {width} columns, found {}", f.len())));
        }
        let idx = |s: &str, name: &str| -> Result<i32> {
            s.trim().parse().map_err(|_| parse_err(line, format!("{name}: expected an integer")))
        };
        let i = idx(f[0], "i")?;
        let j = idx(f[1], "j")?;
        let xq = parse_f64(f[2], line, "q")?;
        let xp = parse_f64(f[3], line, "p")?;
        let rest = f[4..]
            .iter()
            .map(|s| parse_f64(s, line, "value"))
            .collect::<Result<_>>()?;
        rows.push((i, j, [xq, xp], rest));
    }
    let half = rows.iter().map(|r| r.0.abs().max(r.1.abs())).max().ok_or(Error::EmptySelection)?;
    let extent = rows
        .iter()
        .find(|r| r.0 == half)
        .map(|r| r.2[0])
        .ok_or(Error::EmptySelection)?;
    let lattice = Lattice::new(2 * half as usize + 1, extent)?;
    if rows.len() != lattice.len() {
        return Err(parse_err(0, format!("{} rows for a {}x{} lattice", rows.len(), lattice.side(), lattice.side())));
    }
    Ok((lattice, rows))
}

fn place<T: Copy + Default>(lattice: &Lattice, rows: &[Row], f: impl Fn(&[f64]) -> T) -> Result<Vec<T>> {
    let mut out = vec![T::default(); lattice.len()];
    let mut filled = vec![false; lattice.len()];
    for r in rows {
        let k = lattice
            .linear(r.0, r.1)
            .ok_or_else(|| parse_err(0, format!("index ({}, {}) outside the lattice", r.0, r.1)))?;
        if std::mem::replace(&mut filled[k], true) {
            return Err(parse_err(0, format!("index ({}, {}) repeated", r.0, r.1)));
        }
        out[k] = f(&r.3);
    }
    Ok(out)
}

pub fn read_cf_grid(input: impl BufRead) -> Result<CFGrid> {
    let (lattice, rows) = read_grid_rows(input, CF_COLUMNS)?;
    let values = place(&lattice, &rows, |v| C64::new(v[0], v[1]))?;
    CFGrid::from_values(lattice, values)
}

/// Reads the values of a Wigner grid CSV; cell volume follows from the
/// spacing.
pub fn read_wigner_grid(input: impl BufRead) -> Result<WignerGrid> {
    let (grid, rows) = read_grid_rows(input, WIGNER_COLUMNS)?;
    let values = place(&grid, &rows, |v| v[0])?;
    let ds = grid.spacing();
    Ok(WignerGrid {
        grid,
        values,
        cell_volume: ds * ds,
        imag_residue: 0.0,
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::sample_quadrature;

    #[test]
    fn samples_round_trip() {
        let st = StateModel::cat(1.77).unwrap();
        let s = sample_quadrature(&st, Angle::Fixed(0.3), 200, 5).unwrap();
        let h = SampleHeader {
            state: Some(st),
            seed: Some(5),
            angles: vec![Angle::Fixed(0.3)],
            ..Default::default()
        };
        let mut buf = Vec::new();
        write_samples(&mut buf, &h, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("# convention: hbar=1,var_vac=0.5"));
        assert!(text.contains("\ntheta_radians,value\n"));
        let (h2, data) = read_samples(buf.as_slice()).unwrap();
        assert_eq!(h2.state, Some(st));
        assert_eq!(h2.seed, Some(5));
        assert_eq!(h2.count, Some(200));
        assert!(!data.phase_random);
        assert_eq!(data.samples, s);
    }

    #[test]
    fn phase_random_flag_survives() {
        let st = StateModel::fock(1).unwrap();
        let s = sample_quadrature(&st, Angle::PhaseRandom, 50, 1).unwrap();
        let h = SampleHeader { angles: vec![Angle::PhaseRandom], ..Default::default() };
        let mut buf = Vec::new();
        write_samples(&mut buf, &h, &s).unwrap();
        assert!(read_samples(buf.as_slice()).unwrap().1.phase_random);
    }

    #[test]
    fn headerless_files_are_accepted() {
        let text = "0.0,1.5\n0.0,-0.25\n1.5707963267948966,0.1\n";
        let (h, d) = read_samples(text.as_bytes()).unwrap();
        assert_eq!(h.state, None);
        assert_eq!(d.len(), 3);
        assert!(!d.phase_random);
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let text = "# state: vacuum\ntheta_radians,value\n0.0,1.0\n0.0,abc\n";
        match read_samples(text.as_bytes()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("abc"));
            }
            other => panic!("{other:?}"),
        }
        let text = "theta_radians,value\n0.0,1.0,2.0\n";
        assert!(matches!(read_samples(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let text = "# convention: hbar=2\n0,1\n";
        assert!(matches!(read_samples(text.as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_samples("".as_bytes()), Err(Error::EmptySelection)));
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let text = "# count: 3\n0,1\n";
        assert!(matches!(read_samples(text.as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn cf_grid_csv_round_trip_is_exact() {
        let l = Lattice::new(7, 3.0).unwrap();
        let st = StateModel::coherent(C64::new(0.4, -0.3)).unwrap();
        let g = CFGrid::from_fn(l, |xi| st.chi(xi));
        let mut buf = Vec::new();
        write_cf_grid(&mut buf, &g, &["config: {}".into()]).unwrap();
        let back = read_cf_grid(buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn wigner_grid_csv_round_trip() {
        let l = Lattice::new(5, 2.0).unwrap();
        let g = CFGrid::from_fn(l, |xi| StateModel::vacuum().chi(xi));
        let w = crate::phasespace::wigner_from_cf(&g, &Default::default()).unwrap();
        let mut buf = Vec::new();
        write_wigner_grid(&mut buf, &w, &[]).unwrap();
        let back = read_wigner_grid(buf.as_slice()).unwrap();
        assert_eq!(back.values, w.values);
        assert_eq!(back.grid, w.grid);
        assert!((back.cell_volume - w.cell_volume).abs() < 1e-15);
    }

    #[test]
    fn grid_with_missing_rows_is_rejected() {
        let text = "i,j,xi_q,xi_p,re,im\n1,1,1,1,0,0\n";
        assert!(read_cf_grid(text.as_bytes()).is_err());
    }
}
