//! CSV and JSON interchange.
//!
//! Inputs are long-format CSV files; lines starting with `#` are comments.
//! Outputs carry the run configuration as `# key=value` comment lines (CSV)
//! or a `config` object (JSON) so each file documents how it was produced.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use indexmap::IndexMap;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::QuantileEnsemble;
use crate::grid;
use crate::quantile::QuantileFunction;
use crate::simulation::{Observation, RateTable};

pub const RAW_HEADER: [&str; 3] = ["subject_id", "component_id", "value"];
pub const HISTOGRAM_HEADER: [&str; 5] = ["unit_id", "index", "bin_lower", "bin_upper", "count"];
pub const GROUP_HEADER: [&str; 2] = ["subject_id", "group"];

/// Run settings embedded in output files, sorted by key.
pub type Config = BTreeMap<String, String>;

/// Observations grouped by `(subject, component)` cell, in order of first
/// appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct LongTable<T> {
    cells: IndexMap<String, IndexMap<String, Vec<T>>>,
    components: indexmap::IndexSet<String>,
}

impl<T> Default for LongTable<T> {
    fn default() -> Self {
        Self { cells: IndexMap::new(), components: indexmap::IndexSet::new() }
    }
}

impl<T> LongTable<T> {
    fn push(&mut self, subject: &str, component: &str, item: T) {
        self.components.insert(component.to_string());
        self.cells
            .entry(subject.to_string())
            .or_default()
            .entry(component.to_string())
            .or_default()
            .push(item);
    }

    pub fn subjects(&self) -> impl Iterator<Item = &str> {
        self.cells.keys().map(String::as_str)
    }

    pub fn components(&self) -> impl Iterator<Item = &str> {
        self.components.iter().map(String::as_str)
    }

    pub fn n_subjects(&self) -> usize {
        self.cells.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn cell(&self, subject: &str, component: &str) -> Option<&[T]> {
        self.cells.get(subject)?.get(component).map(Vec::as_slice)
    }

    /// Every `(subject, component)` pair without observations.
    pub fn missing_cells(&self) -> Vec<(String, String)> {
        let mut missing = Vec::new();
        for (s, row) in &self.cells {
            for c in &self.components {
                if !row.contains_key(c) {
                    missing.push((s.clone(), c.clone()));
                }
            }
        }
        missing
    }

    pub fn check_complete(&self) -> Result<()> {
        let missing = self.missing_cells();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingCells(missing))
        }
    }

    /// Keeps only the listed subjects, in their current order.
    pub fn retain_subjects(&mut self, keep: impl Fn(&str) -> bool) {
        self.cells.retain(|s, _| keep(s));
    }
}

/// One raw observation and the input line it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawValue {
    pub value: f64,
    pub line: u64,
}

pub type RawTable = LongTable<RawValue>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: f64,
    pub line: u64,
}

pub type HistogramTable = LongTable<Bin>;

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let line = rdr.position().line().max(1);
    let header = rdr.headers()?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_number(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{name} `{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, message: format!("{name} `{field}` is not finite") });
    }
    Ok(v)
}

fn records<R: Read>(
    rdr: &mut csv::Reader<R>,
    width: usize,
    mut f: impl FnMut(&csv::StringRecord, u64) -> Result<()>,
) -> Result<()> {
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(Error::Parse { line, message: format!("expected {width} fields, found {}", rec.len()) });
        }
        if rec.iter().take(2).any(str::is_empty) {
            return Err(Error::Parse { line, message: "empty identifier".into() });
        }
        f(&rec, line)?;
    }
    Ok(())
}

/// Reads `subject_id,component_id,value` rows.
pub fn read_raw_csv<R: Read>(input: R) -> Result<RawTable> {
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, &RAW_HEADER)?;
    let mut table = RawTable::default();
    records(&mut rdr, 3, |rec, line| {
        let value = parse_number(&rec[2], "value", line)?;
        table.push(&rec[0], &rec[1], RawValue { value, line });
        Ok(())
    })?;
    Ok(table)
}

/// Reads `unit_id,index,bin_lower,bin_upper,count` rows; `unit_id` plays the
/// subject and `index` the component.
pub fn read_histogram_csv<R: Read>(input: R) -> Result<HistogramTable> {
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, &HISTOGRAM_HEADER)?;
    let mut table = HistogramTable::default();
    records(&mut rdr, 5, |rec, line| {
        let lower = parse_number(&rec[2], "bin_lower", line)?;
        let upper = parse_number(&rec[3], "bin_upper", line)?;
        let count = parse_number(&rec[4], "count", line)?;
        if !(lower < upper) {
            return Err(Error::Parse { line, message: format!("bin [{lower}, {upper}] is empty") });
        }
        if count < 0.0 {
            return Err(Error::Parse { line, message: format!("negative count {count}") });
        }
        table.push(&rec[0], &rec[1], Bin { lower, upper, count, line });
        Ok(())
    })?;
    Ok(table)
}

/// Sorted, contiguous bin edges and counts of one histogram cell.
pub fn histogram_cell(bins: &[Bin]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut sorted = bins.to_vec();
    sorted.sort_by(|a, b| a.lower.total_cmp(&b.lower));
    let mut edges = vec![sorted[0].lower];
    for w in sorted.windows(2) {
        let scale = w[0].upper.abs().max(w[1].lower.abs()).max(1.0);
        if (w[0].upper - w[1].lower).abs() > 1e-9 * scale {
            return Err(Error::Parse {
                line: w[1].line,
                message: format!("bin starting at {} does not continue the bin ending at {}", w[1].lower, w[0].upper),
            });
        }
        edges.push(w[1].lower);
    }
    edges.push(sorted.last().unwrap().upper);
    Ok((edges, sorted.iter().map(|b| b.count).collect()))
}

/// Reads `subject_id,group` rows, preserving the order in which groups first
/// appear.
pub fn read_groups_csv<R: Read>(input: R) -> Result<IndexMap<String, String>> {
    let mut rdr = csv_reader(input);
    check_header(&mut rdr, &GROUP_HEADER)?;
    let mut groups = IndexMap::new();
    records(&mut rdr, 2, |rec, line| {
        if let Some(prev) = groups.insert(rec[0].to_string(), rec[1].to_string()) {
            if prev != rec[1] {
                return Err(Error::Parse {
                    line,
                    message: format!("subject {} assigned to both {prev} and {}", &rec[0], &rec[1]),
                });
            }
        }
        Ok(())
    })?;
    Ok(groups)
}

fn write_comments<W: Write>(out: &mut W, config: &Config) -> Result<()> {
    for (k, v) in config {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

/// Quantile functions of named subjects, the interchange format between
/// estimation and covariance runs.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub subjects: Vec<String>,
    pub ensemble: QuantileEnsemble,
}

/// Wide CSV: one row per `(subject, component)`, one column per grid point.
pub fn write_quantile_csv<W: Write>(mut out: W, table: &QuantileTable, config: &Config) -> Result<()> {
    write_comments(&mut out, config)?;
    let ens = &table.ensemble;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["subject_id".to_string(), "component_id".to_string()];
    header.extend(grid::unit_grid(ens.grid_size()).iter().map(f64::to_string));
    w.write_record(&header)?;
    for (i, s) in table.subjects.iter().enumerate() {
        for (j, c) in ens.labels().iter().enumerate() {
            let mut row = vec![s.clone(), c.clone()];
            row.extend(ens.curve(i, j).iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_quantile_csv<R: Read>(input: R) -> Result<QuantileTable> {
    let mut rdr = csv_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 5 || &header[0] != "subject_id" || &header[1] != "component_id" {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `subject_id,component_id,<t_0>,...` with at least 3 grid points".into(),
        });
    }
    let m = header.len() - 2;
    for (t, field) in grid::unit_grid(m).iter().zip(header.iter().skip(2)) {
        let v = parse_number(field, "grid point", 1)?;
        if (v - t).abs() > 1e-9 {
            return Err(Error::Parse { line: 1, message: format!("grid point {v} is not on the equispaced unit grid") });
        }
    }
    let mut table: LongTable<(Vec<f64>, u64)> = LongTable::default();
    records(&mut rdr, m + 2, |rec, line| {
        let values = rec.iter().skip(2).map(|f| parse_number(f, "quantile value", line)).collect::<Result<Vec<_>>>()?;
        if table.cell(&rec[0], &rec[1]).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate row for ({}, {})", &rec[0], &rec[1]) });
        }
        table.push(&rec[0], &rec[1], (values, line));
        Ok(())
    })?;
    table.check_complete()?;
    let labels: Vec<String> = table.components().map(String::from).collect();
    let subjects: Vec<String> = table.subjects().map(String::from).collect();
    let rows = subjects
        .iter()
        .map(|s| {
            labels
                .iter()
                .map(|c| {
                    let (values, line) = &table.cell(s, c).unwrap()[0];
                    QuantileFunction::new(values.clone())
                        .map_err(|e| Error::Parse { line: *line, message: e.to_string() })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantileTable { subjects, ensemble: QuantileEnsemble::new(labels, rows)? })
}

/// Square matrix with a header row and a first column of labels.
pub fn write_matrix_csv<W: Write>(mut out: W, labels: &[String], values: &DMatrix<f64>, config: &Config) -> Result<()> {
    write_comments(&mut out, config)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for (i, l) in labels.iter().enumerate() {
        let mut row = vec![l.clone()];
        row.extend(values.row(i).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time_index: Option<Vec<f64>>,
    pub n: usize,
    #[serde(rename = "M")]
    pub grid_size: usize,
    #[serde(default)]
    pub config: Config,
}

impl MatrixDocument {
    pub fn matrix(&self) -> DMatrix<f64> {
        let p = self.values.len();
        DMatrix::from_fn(p, p, |i, j| self.values[i][j])
    }
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Wide CSV of component-level quantile functions (`component_id,<t>...`).
pub fn write_mean_quantiles_csv<W: Write>(mut out: W, labels: &[String], means: &[QuantileFunction], config: &Config) -> Result<()> {
    write_comments(&mut out, config)?;
    let mut w = csv::Writer::from_writer(out);
    let m = means.first().map_or(0, QuantileFunction::grid_size);
    let mut header = vec!["component_id".to_string()];
    header.extend(grid::unit_grid(m).iter().map(f64::to_string));
    w.write_record(&header)?;
    for (l, q) in labels.iter().zip(means) {
        let mut row = vec![l.clone()];
        row.extend(q.values().iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Long CSV `component_id,x,density` of the densities behind quantile
/// functions.
pub fn write_mean_densities_csv<W: Write>(mut out: W, labels: &[String], means: &[QuantileFunction], config: &Config) -> Result<()> {
    write_comments(&mut out, config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["component_id", "x", "density"])?;
    for (l, q) in labels.iter().zip(means) {
        for (x, f) in q.density_points() {
            w.write_record([l.clone(), x.to_string(), f.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn observation_label(o: Observation) -> String {
    match o {
        Observation::Exact => "exact".into(),
        Observation::Sampled(n) => n.to_string(),
    }
}

/// `n,N,replicate_count,mean_error,se_error,slope`; the slope is filled on
/// the last row only.
pub fn write_rate_csv<W: Write>(mut out: W, table: &RateTable, config: &Config) -> Result<()> {
    write_comments(&mut out, config)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "N", "replicate_count", "mean_error", "se_error", "slope"])?;
    let last = table.rows.len().saturating_sub(1);
    for (i, r) in table.rows.iter().enumerate() {
        let slope = match (i == last, table.slope) {
            (true, Some(s)) => s.to_string(),
            _ => String::new(),
        };
        w.write_record([
            r.n.to_string(),
            observation_label(r.observation),
            r.replicates.to_string(),
            r.mean_error.to_string(),
            r.se_error.to_string(),
            slope,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_table_keeps_order_and_lines() {
        let csv = "subject_id,component_id,value\n# note\ns2,b,1.5\ns1,a,2\ns2,a,3\n";
        let t = read_raw_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.subjects().collect::<Vec<_>>(), ["s2", "s1"]);
        assert_eq!(t.components().collect::<Vec<_>>(), ["b", "a"]);
        assert_eq!(t.cell("s2", "a").unwrap(), &[RawValue { value: 3.0, line: 5 }]);
        assert_eq!(t.missing_cells(), vec![("s1".to_string(), "b".to_string())]);
        assert!(matches!(t.check_complete(), Err(Error::MissingCells(c)) if c.len() == 1));
    }

    #[test]
    fn raw_parse_errors_name_the_line() {
        let e = read_raw_csv("subject_id,component_id,value\na,b,1\na,b,x\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = read_raw_csv("subject,component_id,value\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = read_raw_csv("subject_id,component_id,value\na,b\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn histogram_cells_sorted_and_contiguous() {
        let csv = "unit_id,index,bin_lower,bin_upper,count\nu,1,1,2,3\nu,1,0,1,1\n";
        let t = read_histogram_csv(csv.as_bytes()).unwrap();
        let (edges, counts) = histogram_cell(t.cell("u", "1").unwrap()).unwrap();
        assert_eq!(edges, vec![0.0, 1.0, 2.0]);
        assert_eq!(counts, vec![1.0, 3.0]);
        let gap = "unit_id,index,bin_lower,bin_upper,count\nu,1,0,1,1\nu,1,2,3,1\n";
        let t = read_histogram_csv(gap.as_bytes()).unwrap();
        assert!(matches!(histogram_cell(t.cell("u", "1").unwrap()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn conflicting_groups_rejected() {
        let g = read_groups_csv("subject_id,group\na,x\nb,y\na,x\n".as_bytes()).unwrap();
        assert_eq!(g.len(), 2);
        assert!(read_groups_csv("subject_id,group\na,x\na,y\n".as_bytes()).is_err());
    }

    #[test]
    fn quantile_csv_round_trip() {
        let ens = QuantileEnsemble::new(
            vec!["c1".into(), "c2".into()],
            vec![
                vec![QuantileFunction::uniform(7, 0.0, 1.0).unwrap(), QuantileFunction::uniform(7, 0.1, 0.3).unwrap()],
                vec![QuantileFunction::uniform(7, 1.0, 2.0).unwrap(), QuantileFunction::uniform(7, -1.0, 1.0 / 3.0).unwrap()],
            ],
        )
        .unwrap();
        let table = QuantileTable { subjects: vec!["x".into(), "y".into()], ensemble: ens };
        let mut config = Config::new();
        config.insert("grid".into(), "7".into());
        let mut buf = Vec::new();
        write_quantile_csv(&mut buf, &table, &config).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# grid=7\nsubject_id,component_id,0,"));
        assert_eq!(read_quantile_csv(buf.as_slice()).unwrap(), table);
    }

    #[test]
    fn matrix_csv_layout() {
        let mut buf = Vec::new();
        let m = DMatrix::from_row_slice(2, 2, &[0.25, 0.5, 0.5, 1.0]);
        write_matrix_csv(&mut buf, &["a".into(), "b".into()], &m, &Config::new()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), ",a,b\na,0.25,0.5\nb,0.5,1\n");
    }
}
