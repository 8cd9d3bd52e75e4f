//! CSV datasets, reports, histograms and selections.
//!
//! Dataset layout: a header `label,t_<time>,…` followed by one row per curve,
//! the 0/1 label and then one value per grid time.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rkfda_core::{Curve, Grid, LabeledDataset, PriorMode, SelectionResult};

use crate::error::{Error, Result};

/// Relative equispacing tolerance for grid times read back from text.
pub const GRID_READ_TOL: f64 = 1e-6;

pub fn read_dataset(path: &Path) -> Result<LabeledDataset> {
    parse_dataset(BufReader::new(File::open(path)?))
}

pub fn parse_dataset<R: Read>(reader: R) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::parse(Some(1), "no header")),
        Some(r) => r.map_err(csv_error)?,
    };
    if header.get(0).map(str::trim) != Some("label") {
        return Err(Error::parse(Some(1), "header must start with 'label'"));
    }
    let mut times = Vec::with_capacity(header.len() - 1);
    for field in header.iter().skip(1) {
        let t = field
            .trim()
            .strip_prefix("t_")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::parse(Some(1), format!("bad grid column {field:?}")))?;
        times.push(t);
    }
    let grid = Grid::snapped(&times, GRID_READ_TOL).map_err(|e| Error::parse(Some(1), e.to_string()))?;
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
            continue;
        }
        if rec.len() != grid.len() + 1 {
            return Err(Error::parse(Some(line), format!("expected {} fields, found {}", grid.len() + 1, rec.len())));
        }
        let label = match rec[0].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::parse(Some(line), format!("label {other:?} is not 0 or 1"))),
        };
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::parse(Some(line), format!("bad value {v:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        curves.push(Curve::new(values).map_err(|e| Error::parse(Some(line), e.to_string()))?);
        labels.push(label);
    }
    LabeledDataset::new(grid, curves, labels, PriorMode::Estimated).map_err(|e| Error::parse(None, e.to_string()))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    Error::parse(line, e.to_string())
}

pub fn write_dataset(path: &Path, dataset: &LabeledDataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_dataset(&mut w, dataset)?;
    w.flush()?;
    Ok(())
}

/// Values use the shortest representation that reads back to the same `f64`.
pub fn format_dataset<W: Write>(w: W, dataset: &LabeledDataset) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["label".to_string()];
    header.extend(dataset.grid().points().iter().map(|t| format!("t_{t}")));
    wtr.write_record(&header).map_err(csv_write)?;
    for (curve, label) in dataset.iter() {
        let mut row = Vec::with_capacity(curve.len() + 1);
        row.push(label.to_string());
        row.extend(curve.values().iter().map(f64::to_string));
        wtr.write_record(&row).map_err(csv_write)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_write(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// One line of a benchmark report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub n: usize,
    pub method: String,
    pub runs: usize,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    /// Mean selected dimension (RK methods), neighbours (kNN) or truncation
    /// order (centroid).
    pub mean_d: Option<f64>,
    pub failed_runs: usize,
}

pub const REPORT_HEADER: [&str; 8] =
    ["model", "n", "method", "runs", "mean_accuracy", "sd_accuracy", "mean_d", "failed_runs"];

pub fn format_report<W: Write>(w: W, rows: &[ReportRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(REPORT_HEADER).map_err(csv_write)?;
    for r in rows {
        wtr.write_record([
            r.model.clone(),
            r.n.to_string(),
            r.method.clone(),
            r.runs.to_string(),
            format!("{:.6}", r.mean_accuracy),
            format!("{:.6}", r.sd_accuracy),
            r.mean_d.map_or_else(String::new, |d| format!("{d:.4}")),
            r.failed_runs.to_string(),
        ])
        .map_err(csv_write)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn parse_report<R: Read>(reader: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.iter().ne(REPORT_HEADER.iter().copied()) {
        return Err(Error::parse(Some(1), "unexpected report header"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::parse(line, format!("bad number {:?}", &rec[i])))
        };
        let int = |i: usize| -> Result<usize> {
            rec[i].parse().map_err(|_| Error::parse(line, format!("bad integer {:?}", &rec[i])))
        };
        rows.push(ReportRow {
            model: rec[0].to_string(),
            n: int(1)?,
            method: rec[2].to_string(),
            runs: int(3)?,
            mean_accuracy: num(4)?,
            sd_accuracy: num(5)?,
            mean_d: if rec[6].is_empty() { None } else { Some(num(6)?) },
            failed_runs: int(7)?,
        });
    }
    Ok(rows)
}

/// Selection frequencies of one (model, n) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub model: String,
    pub n: usize,
    pub runs: usize,
    pub times: Vec<f64>,
    /// `counts[rank][grid index]`: how often the point was selected at that rank.
    pub counts: Vec<Vec<usize>>,
    /// Per successful run: how many relevant times were matched.
    pub match_counts: Vec<usize>,
    /// Number of relevant times of the model.
    pub relevant: usize,
}

impl Histogram {
    /// Fraction of runs matching at least `min` relevant times.
    pub fn fraction_matching(&self, min: usize) -> f64 {
        if self.match_counts.is_empty() {
            return 0.0;
        }
        self.match_counts.iter().filter(|&&m| m >= min).count() as f64 / self.match_counts.len() as f64
    }

    pub fn total_counts(&self) -> Vec<usize> {
        (0..self.times.len()).map(|i| self.counts.iter().map(|r| r[i]).sum()).collect()
    }
}

/// Columns `t,total,rank_1,…,rank_d`.
pub fn format_histogram<W: Write>(w: W, h: &Histogram) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "total".to_string()];
    header.extend((1..=h.counts.len()).map(|r| format!("rank_{r}")));
    wtr.write_record(&header).map_err(csv_write)?;
    let totals = h.total_counts();
    for (i, t) in h.times.iter().enumerate() {
        let mut row = vec![t.to_string(), totals[i].to_string()];
        row.extend(h.counts.iter().map(|r| r[i].to_string()));
        wtr.write_record(&row).map_err(csv_write)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Columns `rank,t,psi`.
pub fn format_selection<W: Write>(w: W, sel: &SelectionResult) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["rank", "t", "psi"]).map_err(csv_write)?;
    for (r, (t, psi)) in sel.points().iter().zip(sel.psi_trace()).enumerate() {
        wtr.write_record([(r + 1).to_string(), t.to_string(), psi.to_string()]).map_err(csv_write)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_has_no_header() {
        let err = parse_dataset("".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("no header"), "{err}");
    }

    #[test]
    fn arity_error_reports_line() {
        let err = parse_dataset("label,t_0,t_1\n0,1,2\n1,1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn two_row_file() {
        let d = parse_dataset("label,t_0,t_1\n0,0.5,1\n1,2,3\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.labels(), &[0, 1]);
        assert_eq!(d.grid().points(), &[0.0, 1.0]);
    }

    #[test]
    fn bad_label_and_grid() {
        let err = parse_dataset("label,t_0,t_1\n2,0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(2), .. }));
        let err = parse_dataset("label,t_1,t_0\n0,0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(1), .. }));
    }
}
