//! Field and tracer dumps, time-series CSV and report JSON.
//!
//! A dump is a one-line ASCII header `name nx ny nz Lx Ly Lz t` followed by
//! little-endian `f64` values in grid order (x fastest). Tracer dumps use the
//! name `tracers` and store twelve values per label point: the unwrapped
//! position and the deformation gradient, row major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use mhd_invariants::calculus::{Field, Grid, ScalarField};
use mhd_invariants::lagrange::LagrangianMap;
use mhd_invariants::solver::Diagnostics;

#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub name: String,
    pub n: [usize; 3],
    pub len: [f64; 3],
    pub t: f64,
}

impl DumpHeader {
    pub fn new(name: &str, grid: &Grid, t: f64) -> Self {
        Self {
            name: name.to_string(),
            n: grid.n(),
            len: grid.lengths(),
            t,
        }
    }

    fn line(&self) -> String {
        let [nx, ny, nz] = self.n;
        let [lx, ly, lz] = self.len;
        format!("{} {nx} {ny} {nz} {lx} {ly} {lz} {}\n", self.name, self.t)
    }

    fn parse(line: &str) -> Result<Self> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 8 {
            bail!("dump header needs 8 fields, found {}: `{}`", parts.len(), line.trim());
        }
        let n = |i: usize| parts[i].parse::<usize>().with_context(|| format!("bad size `{}`", parts[i]));
        let f = |i: usize| parts[i].parse::<f64>().with_context(|| format!("bad number `{}`", parts[i]));
        Ok(Self {
            name: parts[0].to_string(),
            n: [n(1)?, n(2)?, n(3)?],
            len: [f(4)?, f(5)?, f(6)?],
            t: f(7)?,
        })
    }
}

pub fn write_dump(path: &Path, header: &DumpHeader, values: &[f64]) -> Result<()> {
    if header.name.contains(char::is_whitespace) || header.name.is_empty() {
        bail!("dump name `{}` must be a single word", header.name);
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(header.line().as_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dump(path: &Path) -> Result<(DumpHeader, Vec<f64>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut r = BufReader::new(file);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header = DumpHeader::parse(&line).with_context(|| format!("reading {}", path.display()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        bail!("{}: payload of {} bytes is not a whole number of f64", path.display(), bytes.len());
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, values))
}

pub fn write_scalar(dir: &Path, name: &str, f: &ScalarField, t: f64) -> Result<()> {
    write_dump(&dir.join(format!("{name}.bin")), &DumpHeader::new(name, f.grid(), t), f.values())
}

/// Scalars to `<name>.bin`, vectors to `<name>_x.bin`, `<name>_y.bin`, `<name>_z.bin`.
pub fn write_field(dir: &Path, name: &str, f: &Field, t: f64) -> Result<()> {
    match f {
        Field::Scalar(s) => write_scalar(dir, name, s, t),
        Field::Vector(v) => {
            for (c, axis) in v.c.iter().zip(["x", "y", "z"]) {
                write_scalar(dir, &format!("{name}_{axis}"), c, t)?;
            }
            Ok(())
        }
    }
}

pub fn write_tracers(path: &Path, map: &LagrangianMap) -> Result<()> {
    let grid = map.grid();
    let mut values = Vec::with_capacity(12 * grid.len());
    for i in 0..grid.len() {
        values.extend(map.position(i));
        for row in map.f.at(i) {
            values.extend(row);
        }
    }
    write_dump(path, &DumpHeader::new("tracers", grid, map.t), &values)
}

pub const TIMESERIES_HEADER: &str = "t,total_mass,total_energy,cross_helicity,divB_norm";

pub fn timeseries_csv(rows: &[Diagnostics]) -> String {
    let mut out = String::from(TIMESERIES_HEADER);
    out.push('\n');
    for d in rows {
        out.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e}\n",
            d.t, d.total_mass, d.total_energy, d.cross_helicity, d.div_b_norm
        ));
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
