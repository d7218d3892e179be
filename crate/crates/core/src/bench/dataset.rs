use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, BbkbError, Result};
use crate::points::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Header row, comma separated, target in the last column.
    Csv,
    /// `target index:value ...` with 1-based feature indices.
    Libsvm,
}

impl std::str::FromStr for DataFormat {
    type Err = BbkbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DataFormat::Csv),
            "libsvm" => Ok(DataFormat::Libsvm),
            other => Err(invalid(format!("unknown data format `{other}`"))),
        }
    }
}

/// Synthetic objective families, evaluated on uniform points in `[0, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// `-|x - c|^2` for a random center `c`.
    Quadratic,
    /// Ten random Gaussian bumps of width 0.2 with weights in `[-0.5, 1]`.
    Rkhs,
    /// `sum_k sin(3 pi x_k + phi_k)` with random phases.
    Sines,
}

impl std::str::FromStr for SyntheticKind {
    type Err = BbkbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(SyntheticKind::Quadratic),
            "rkhs" => Ok(SyntheticKind::Rkhs),
            "sines" => Ok(SyntheticKind::Sines),
            other => Err(invalid(format!("unknown synthetic function `{other}`"))),
        }
    }
}

/// Candidates and their targets, rescaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: PointSet,
    targets: Vec<f64>,
    f_star: f64,
}

impl Dataset {
    /// Builds a dataset, min-max rescaling `raw_targets`.
    pub fn from_raw(name: impl Into<String>, features: PointSet, raw_targets: &[f64]) -> Result<Self> {
        if features.len() != raw_targets.len() {
            return Err(invalid(format!(
                "{} feature rows but {} targets",
                features.len(),
                raw_targets.len()
            )));
        }
        if features.is_empty() {
            return Err(BbkbError::DegenerateDataset("no rows".into()));
        }
        if raw_targets.iter().any(|v| !v.is_finite()) {
            return Err(BbkbError::DegenerateDataset("non-finite target".into()));
        }
        let lo = raw_targets.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw_targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(BbkbError::DegenerateDataset("target column is constant".into()));
        }
        let targets: Vec<f64> = raw_targets.iter().map(|v| (v - lo) / (hi - lo)).collect();
        let f_star = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Dataset {
            name: name.into(),
            features,
            targets,
            f_star,
        })
    }

    pub fn load(path: &Path, format: DataFormat) -> Result<Self> {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        let (features, y) = match format {
            DataFormat::Csv => read_csv(path)?,
            DataFormat::Libsvm => read_libsvm(&std::fs::read_to_string(path)?)?,
        };
        Self::from_raw(name, features, &y)
    }

    pub fn synthetic(kind: SyntheticKind, a: usize, d: usize, seed: u64) -> Result<Self> {
        if a == 0 || d == 0 {
            return Err(invalid("synthetic datasets need A >= 1 and d >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flat: Vec<f64> = (0..a * d).map(|_| rng.random::<f64>()).collect();
        let features = PointSet::from_flat(d, flat)?;
        let y: Vec<f64> = match kind {
            SyntheticKind::Quadratic => {
                let c: Vec<f64> = (0..d).map(|_| rng.random()).collect();
                features
                    .rows()
                    .map(|x| -x.iter().zip(&c).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
                    .collect()
            }
            SyntheticKind::Rkhs => {
                let bumps: Vec<(Vec<f64>, f64)> = (0..10)
                    .map(|_| {
                        let c: Vec<f64> = (0..d).map(|_| rng.random()).collect();
                        (c, rng.random_range(-0.5..1.0))
                    })
                    .collect();
                features
                    .rows()
                    .map(|x| {
                        bumps
                            .iter()
                            .map(|(c, w)| {
                                let sq: f64 = x.iter().zip(c).map(|(p, q)| (p - q) * (p - q)).sum();
                                w * (-sq / (2.0 * 0.04)).exp()
                            })
                            .sum()
                    })
                    .collect()
            }
            SyntheticKind::Sines => {
                let phase: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
                features
                    .rows()
                    .map(|x| {
                        x.iter()
                            .zip(&phase)
                            .map(|(v, p)| (3.0 * std::f64::consts::PI * v + p).sin())
                            .sum()
                    })
                    .collect()
            }
        };
        let name = format!("synthetic-{kind:?}-{a}x{d}-{seed}").to_lowercase();
        match Self::from_raw(name, features, &y) {
            // A single candidate has no range to rescale; give it value 1.
            Err(BbkbError::DegenerateDataset(_)) if a == 1 => Ok(Dataset {
                name: format!("synthetic-{kind:?}-1x{d}-{seed}").to_lowercase(),
                features: PointSet::from_flat(d, (0..d).map(|_| 0.5).collect())?,
                targets: vec![1.0],
                f_star: 1.0,
            }),
            other => other,
        }
    }

    /// Per-column standardization to zero mean and unit variance; constant
    /// columns are only centered.
    pub fn standardize(&mut self) {
        let d = self.features.dim();
        let n = self.features.len() as f64;
        let mut flat = self.features.as_flat().to_vec();
        for j in 0..d {
            let mean = flat.iter().skip(j).step_by(d).sum::<f64>() / n;
            let var = flat.iter().skip(j).step_by(d).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            for v in flat.iter_mut().skip(j).step_by(d) {
                *v -= mean;
                if sd > 0.0 {
                    *v /= sd;
                }
            }
        }
        self.features = PointSet::from_flat(d, flat).expect("same shape");
    }

    /// Writes a header `x1,...,xd,y` and one row per candidate with the
    /// rescaled target.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let d = self.features.dim();
        let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for (x, y) in self.features.rows().zip(&self.targets) {
            let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            row.push(y.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &PointSet {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| BbkbError::Parse {
        line,
        message: format!("`{field}` is not a number"),
    })
}

fn read_csv(path: &Path) -> Result<(PointSet, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let ncols = rdr.headers()?.len();
    if ncols < 2 {
        return Err(BbkbError::Parse {
            line: 1,
            message: "need at least one feature column and a target column".into(),
        });
    }
    let mut features = PointSet::empty(ncols - 1);
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != ncols {
            return Err(BbkbError::Parse {
                line,
                message: format!("expected {ncols} fields, found {}", rec.len()),
            });
        }
        let vals = rec.iter().map(|f| parse_f64(f, line)).collect::<Result<Vec<f64>>>()?;
        features.push(&vals[..ncols - 1])?;
        y.push(vals[ncols - 1]);
    }
    Ok((features, y))
}

fn read_libsvm(text: &str) -> Result<(PointSet, Vec<f64>)> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut y = Vec::new();
    let mut dim = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let target = parse_f64(parts.next().expect("nonempty line"), line)?;
        let mut row = Vec::new();
        for p in parts {
            let (i, v) = p.split_once(':').ok_or_else(|| BbkbError::Parse {
                line,
                message: format!("`{p}` is not index:value"),
            })?;
            let idx: usize = i.parse().map_err(|_| BbkbError::Parse {
                line,
                message: format!("bad feature index `{i}`"),
            })?;
            if idx == 0 {
                return Err(BbkbError::Parse {
                    line,
                    message: "feature indices start at 1".into(),
                });
            }
            dim = dim.max(idx);
            row.push((idx - 1, parse_f64(v, line)?));
        }
        rows.push(row);
        y.push(target);
    }
    if rows.is_empty() {
        return Err(BbkbError::DegenerateDataset("no rows".into()));
    }
    let dim = dim.max(1);
    let mut flat = vec![0.0; rows.len() * dim];
    for (r, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            flat[r * dim + j] = v;
        }
    }
    Ok((PointSet::from_flat(dim, flat)?, y))
}
