//! Self-describing plain-text classifier files.
//!
//! ```text
//! rkfda-model 1
//! kind rkc
//! grid 100 0 1
//! indices 49 74
//! alphas 1.5 -0.25
//! midpoint 0.1 0.2
//! prior 0.5
//! ```
//!
//! kNN files store `k` followed by one `sample <label> <values…>` line per
//! training curve; centroid files store `r`, `proj0`, `proj1` and `psi`.

use std::io::{BufRead, Write};
use std::path::Path;

use rkfda_core::classify::{CentroidModel, RkcModel};
use rkfda_core::{make_grid, train_knn, Curve, Grid, LabeledDataset, PriorMode, TrainedClassifier};

use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "rkfda-model 1";

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_model<W: Write>(mut w: W, clf: &TrainedClassifier) -> Result<()> {
    let g = clf.grid();
    writeln!(w, "{FORMAT_TAG}")?;
    let kind = match clf {
        TrainedClassifier::Rkc(_) => "rkc",
        TrainedClassifier::Knn(_) => "knn",
        TrainedClassifier::Centroid(_) => "centroid",
    };
    writeln!(w, "kind {kind}")?;
    writeln!(w, "grid {} {} {}", g.len(), g.t_min(), g.t_max())?;
    match clf {
        TrainedClassifier::Rkc(m) => {
            writeln!(w, "indices {}", join(m.indices()))?;
            writeln!(w, "points {}", join(m.points()))?;
            writeln!(w, "alphas {}", join(m.alphas()))?;
            writeln!(w, "midpoint {}", join(m.midpoint()))?;
            writeln!(w, "prior {}", m.prior())?;
        }
        TrainedClassifier::Knn(m) => {
            writeln!(w, "k {}", m.k())?;
            let (curves, labels) = m.training();
            for (c, l) in curves.iter().zip(labels) {
                writeln!(w, "sample {l} {}", join(c))?;
            }
        }
        TrainedClassifier::Centroid(m) => {
            let (p0, p1) = m.projections();
            writeln!(w, "r {}", m.r())?;
            writeln!(w, "proj0 {p0}")?;
            writeln!(w, "proj1 {p1}")?;
            writeln!(w, "psi {}", join(m.psi()))?;
        }
    }
    Ok(())
}

pub fn save_model(path: &Path, clf: &TrainedClassifier) -> Result<()> {
    let mut buf = Vec::new();
    write_model(&mut buf, clf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrainedClassifier> {
    read_model(std::io::BufReader::new(std::fs::File::open(path)?))
}

struct Fields {
    lines: Vec<(usize, String, String)>,
}

impl Fields {
    fn take(&self, key: &str) -> Result<(usize, &str)> {
        self.lines
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::parse(None, format!("missing field {key:?}")))
    }

    fn floats(&self, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self.take(key)?;
        parse_list(line, v)
    }

    fn float(&self, key: &str) -> Result<f64> {
        let (line, v) = self.take(key)?;
        v.trim().parse().map_err(|_| Error::parse(Some(line), format!("bad number in {key}")))
    }

    fn usizes(&self, key: &str) -> Result<Vec<usize>> {
        let (line, v) = self.take(key)?;
        v.split_whitespace()
            .map(|x| x.parse().map_err(|_| Error::parse(Some(line), format!("bad integer {x:?}"))))
            .collect()
    }
}

fn parse_list(line: usize, v: &str) -> Result<Vec<f64>> {
    v.split_whitespace().map(|x| x.parse().map_err(|_| Error::parse(Some(line), format!("bad number {x:?}")))).collect()
}

pub fn read_model<R: BufRead>(r: R) -> Result<TrainedClassifier> {
    let mut lines = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != FORMAT_TAG {
                return Err(Error::parse(Some(1), format!("expected format tag {FORMAT_TAG:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        lines.push((i + 1, k.to_string(), v.to_string()));
    }
    if lines.is_empty() {
        return Err(Error::parse(Some(1), "empty model file"));
    }
    let f = Fields { lines };
    let grid = {
        let (line, v) = f.take("grid")?;
        let parts: Vec<&str> = v.split_whitespace().collect();
        let bad = || Error::parse(Some(line), "grid needs count, t_min and t_max");
        if parts.len() != 3 {
            return Err(bad());
        }
        let count: usize = parts[0].parse().map_err(|_| bad())?;
        let a: f64 = parts[1].parse().map_err(|_| bad())?;
        let b: f64 = parts[2].parse().map_err(|_| bad())?;
        make_grid(count, a, b).map_err(|e| Error::parse(Some(line), e.to_string()))?
    };
    let (kind_line, kind) = f.take("kind")?;
    let clf = match kind.trim() {
        "rkc" => {
            let p = f.float("prior")?;
            let m = RkcModel::new(grid, f.usizes("indices")?, f.floats("alphas")?, f.floats("midpoint")?, p)?;
            TrainedClassifier::Rkc(m)
        }
        "knn" => knn_from(&f, grid)?,
        "centroid" => {
            let r = f.usizes("r")?.first().copied().ok_or_else(|| Error::parse(None, "empty field r"))?;
            let m = CentroidModel::new(grid, f.floats("psi")?, f.float("proj0")?, f.float("proj1")?, r)?;
            TrainedClassifier::Centroid(m)
        }
        other => return Err(Error::parse(Some(kind_line), format!("unknown classifier kind {other:?}"))),
    };
    Ok(clf)
}

fn knn_from(f: &Fields, grid: Grid) -> Result<TrainedClassifier> {
    let k = f.usizes("k")?.first().copied().ok_or_else(|| Error::parse(None, "empty field k"))?;
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for (line, key, v) in &f.lines {
        if key != "sample" {
            continue;
        }
        let (label, rest) = v.split_once(' ').unwrap_or((v.as_str(), ""));
        let label = match label {
            "0" => 0,
            "1" => 1,
            _ => return Err(Error::parse(Some(*line), "sample label must be 0 or 1")),
        };
        let values = parse_list(*line, rest)?;
        curves.push(Curve::new(values).map_err(|e| Error::parse(Some(*line), e.to_string()))?);
        labels.push(label);
    }
    let ds = LabeledDataset::new(grid, curves, labels, PriorMode::Estimated)
        .map_err(|e| Error::parse(None, e.to_string()))?;
    Ok(train_knn(&ds, k)?)
}
