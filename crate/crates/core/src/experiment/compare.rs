use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::diagnostics::median;
use crate::{Error, Result};

const STATS: [&str; 3] = ["min", "median", "max"];

/// ESS per leapfrog step of several runs on the same model, side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub runs: Vec<PathBuf>,
    /// `(chain, per-run [min, median, max])`.
    pub rows: Vec<(usize, Vec<[f64; 3]>)>,
}

impl ComparisonTable {
    /// Per-run medians across chains.
    pub fn overall(&self) -> Vec<[f64; 3]> {
        (0..self.runs.len())
            .map(|r| {
                let mut out = [0.0; 3];
                for (s, o) in out.iter_mut().enumerate() {
                    let col: Vec<f64> = self.rows.iter().map(|(_, v)| v[r][s]).collect();
                    *o = median(&col);
                }
                out
            })
            .collect()
    }

    /// Columns for each run, then ratios of every later run to the first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("chain");
        for r in 0..self.runs.len() {
            for s in STATS {
                write!(out, ",run{r}_ess_per_leapfrog_{s}").unwrap();
            }
        }
        for r in 1..self.runs.len() {
            for s in STATS {
                write!(out, ",ratio_run{r}_run0_{s}").unwrap();
            }
        }
        out.push('\n');
        let overall = self.overall();
        let mut line = |label: String, vals: &[[f64; 3]]| {
            out.push_str(&label);
            for v in vals {
                for x in v {
                    write!(out, ",{x}").unwrap();
                }
            }
            for v in &vals[1..] {
                for (x, base) in v.iter().zip(&vals[0]) {
                    write!(out, ",{}", x / base).unwrap();
                }
            }
            out.push('\n');
        };
        for (c, vals) in &self.rows {
            line(c.to_string(), vals);
        }
        if !self.rows.is_empty() {
            line("median".into(), &overall);
        }
        out
    }
}

/// Loads finished run directories and lines them up chain by chain.
pub fn compare<P: AsRef<Path>>(dirs: &[P]) -> Result<ComparisonTable> {
    if dirs.len() < 2 {
        return Err(Error::Config("compare needs at least two run directories".into()));
    }
    let mut model = None;
    let mut per_run = Vec::new();
    for dir in dirs {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "run directory not found"),
            ));
        }
        let config = ExperimentConfig::load(&dir.join("config.toml"))?;
        match &model {
            None => model = Some((dir.to_path_buf(), config.model.clone())),
            Some((first, m)) if *m != config.model => {
                return Err(Error::Mismatch(format!(
                    "{} and {} were run on different models",
                    first.display(),
                    dir.display()
                )));
            }
            Some(_) => {}
        }
        per_run.push(read_summary(&dir.join("summary.csv"))?);
    }
    let mut rows = Vec::new();
    for (chain, first) in &per_run[0] {
        let vals: Option<Vec<[f64; 3]>> = std::iter::once(Some(*first))
            .chain(
                per_run[1..]
                    .iter()
                    .map(|run| run.iter().find(|(c, _)| c == chain).map(|(_, v)| *v)),
            )
            .collect();
        if let Some(vals) = vals {
            rows.push((*chain, vals));
        }
    }
    Ok(ComparisonTable {
        runs: dirs.iter().map(|d| d.as_ref().to_path_buf()).collect(),
        rows,
    })
}

fn read_summary(path: &Path) -> Result<Vec<(usize, [f64; 3])>> {
    let data_err = |reason: String| Error::Data {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => data_err(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| data_err(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data_err(format!("missing column `{name}`")))
    };
    let chain_col = col("chain")?;
    let stat_cols = [
        col("ess_per_leapfrog_min")?,
        col("ess_per_leapfrog_median")?,
        col("ess_per_leapfrog_max")?,
    ];
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| data_err(e.to_string()))?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let chain = field(chain_col)
            .parse()
            .map_err(|_| data_err(format!("row {}: bad chain index", i + 1)))?;
        let mut v = [0.0; 3];
        for (k, &j) in stat_cols.iter().enumerate() {
            v[k] = field(j)
                .parse()
                .map_err(|_| data_err(format!("row {}: bad number `{}`", i + 1, field(j))))?;
        }
        out.push((chain, v));
    }
    Ok(out)
}
