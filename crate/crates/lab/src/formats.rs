//! On-disk formats.
//!
//! * Domain: a JSON object with keys `m`, `n`, `periods`, `box_length`, `grid`.
//! * Field: the domain JSON on one line, a newline, then `grid` product many
//!   complex values as little-endian `f64` pairs `(re, im)` in row-major order
//!   (last axis fastest). Whether the values are spatial samples or lattice
//!   coefficients is fixed by the producer (NLS snapshots are spatial,
//!   variation inputs are frequency data).
//! * Time series: a JSON header line `{"spec": {...}, "times": [...]}` with
//!   `null` for `+infinity`, then one field block (without header) per value.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use speclab_core::variation::TimeSeries;
use speclab_core::{Complex64, DomainSpec, FreqField, SpatialField};

pub fn domain_to_json(spec: &DomainSpec) -> String {
    serde_json::to_string(spec).expect("a domain always serializes")
}

pub fn domain_from_json(text: &str) -> Result<DomainSpec> {
    serde_json::from_str(text).context("invalid domain JSON")
}

pub fn read_domain(path: &Path) -> Result<DomainSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    domain_from_json(&text)
}

fn write_values<W: Write>(w: &mut W, data: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 * data.len());
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_values<R: Read>(r: &mut R, len: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; 16 * len];
    r.read_exact(&mut buf).context("field data is shorter than its domain")?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect())
}

fn read_header_line<R: BufRead>(r: &mut R) -> Result<String> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        bail!("missing header line");
    }
    line.pop();
    String::from_utf8(line).context("header is not UTF-8")
}

fn expect_end<R: Read>(r: &mut R) -> Result<()> {
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        bail!("trailing bytes after the field data");
    }
    Ok(())
}

pub fn write_field<W: Write>(w: &mut W, spec: &DomainSpec, data: &[Complex64]) -> Result<()> {
    if data.len() != spec.len() {
        bail!("field has {} values, domain needs {}", data.len(), spec.len());
    }
    w.write_all(domain_to_json(spec).as_bytes())?;
    w.write_all(b"\n")?;
    write_values(w, data)
}

pub fn read_field<R: BufRead>(r: &mut R) -> Result<(DomainSpec, Vec<Complex64>)> {
    let spec = domain_from_json(&read_header_line(r)?)?;
    let data = read_values(r, spec.len())?;
    expect_end(r)?;
    Ok((spec, data))
}

pub fn field_bytes(spec: &DomainSpec, data: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::new();
    write_field(&mut out, spec, data).expect("writing to memory");
    out
}

pub fn spatial_bytes(u: &SpatialField) -> Vec<u8> {
    field_bytes(u.spec(), u.data())
}

pub fn load_spatial(path: &Path) -> Result<SpatialField> {
    let (spec, data) = read_field(&mut open(path)?)?;
    Ok(SpatialField::new(spec, data)?)
}

pub fn load_freq(path: &Path) -> Result<FreqField> {
    let (spec, data) = read_field(&mut open(path)?)?;
    Ok(FreqField::new(spec, data)?)
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    let f = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(std::io::BufReader::new(f))
}

#[derive(Serialize, Deserialize)]
struct SeriesHeader {
    spec: DomainSpec,
    times: Vec<Option<f64>>,
}

pub fn write_time_series<W: Write>(w: &mut W, s: &TimeSeries) -> Result<()> {
    let spec = s.spec().context("cannot write an empty time series")?;
    let header =
        SeriesHeader { spec: spec.clone(), times: s.times().iter().map(|&t| t.is_finite().then_some(t)).collect() };
    w.write_all(serde_json::to_string(&header)?.as_bytes())?;
    w.write_all(b"\n")?;
    for v in s.values() {
        write_values(w, v.data())?;
    }
    Ok(())
}

pub fn read_time_series<R: BufRead>(r: &mut R) -> Result<TimeSeries> {
    let header: SeriesHeader = serde_json::from_str(&read_header_line(r)?).context("invalid time series header")?;
    let times: Vec<f64> = header.times.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
    let count = if times.last() == Some(&f64::INFINITY) { times.len() - 1 } else { times.len() };
    let values = (0..count)
        .map(|_| Ok(FreqField::new(header.spec.clone(), read_values(r, header.spec.len())?)?))
        .collect::<Result<Vec<_>>>()?;
    expect_end(r)?;
    Ok(TimeSeries::new(times, values)?)
}

pub fn series_bytes(s: &TimeSeries) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_time_series(&mut out, s)?;
    Ok(out)
}

pub fn load_time_series(path: &Path) -> Result<TimeSeries> {
    read_time_series(&mut open(path)?)
}

/// Fixed-header table rendered as CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| Ok(rec?.iter().map(str::to_string).collect())).collect::<Result<Vec<_>>>()?;
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}
