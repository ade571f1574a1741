use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "method",
    "m",
    "r",
    "repetition",
    "metric",
    "value",
    "stderr",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Avgm,
    Savgm,
    SgdAvgm,
    Single,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Avgm,
        Method::Savgm,
        Method::SgdAvgm,
        Method::Single,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Avgm => "avgm",
            Method::Savgm => "savgm",
            Method::SgdAvgm => "sgd_avgm",
            Method::Single => "single",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Mse,
    /// MSE minus the oracle's MSE on the same repetition.
    MseGap,
    Logloss,
    Auc,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Mse, Metric::MseGap, Metric::Logloss, Metric::Auc];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::MseGap => "mse_gap",
            Metric::Logloss => "logloss",
            Metric::Auc => "auc",
        }
    }
}

macro_rules! name_traits {
    ($t:ty, $what:literal) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.pad(self.name())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                <$t>::ALL
                    .into_iter()
                    .find(|x| x.name() == s)
                    .ok_or_else(|| Error::invalid(format!(concat!("unknown ", $what, " '{}'"), s)))
            }
        }
    };
}

name_traits!(Method, "method");
name_traits!(Metric, "metric");

/// One CSV row. Detail rows carry a repetition index and no standard
/// error; aggregate rows are the other way round.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub m: usize,
    /// Subsampling ratio, SAVGM only.
    pub r: Option<f64>,
    pub repetition: Option<usize>,
    pub metric: Metric,
    pub value: f64,
    pub stderr: Option<f64>,
    pub wall_ms: Option<f64>,
}

type GroupKey = (Method, usize, Option<u64>, Metric);

impl ResultRow {
    pub fn is_aggregate(&self) -> bool {
        self.repetition.is_none()
    }

    fn group_key(&self) -> GroupKey {
        (self.method, self.m, self.r.map(f64::to_bits), self.metric)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

impl ExperimentResult {
    pub fn detail_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| !r.is_aggregate())
    }

    pub fn aggregate_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.is_aggregate())
    }

    /// Aggregate row for `(method, m, r, metric)`.
    pub fn aggregate(
        &self,
        method: Method,
        m: usize,
        r: Option<f64>,
        metric: Metric,
    ) -> Option<&ResultRow> {
        self.aggregate_rows()
            .find(|row| row.method == method && row.m == m && row.r == r && row.metric == metric)
    }

    /// Mean value for `(method, m, r, metric)`.
    pub fn mean(&self, method: Method, m: usize, r: Option<f64>, metric: Metric) -> Option<f64> {
        self.aggregate(method, m, r, metric).map(|row| row.value)
    }

    /// Appends one aggregate row per `(method, m, r, metric)` group of
    /// detail rows, in order of first appearance: the mean, the standard
    /// error `s/√k` (NaN for a single repetition) and the mean wall time.
    pub fn push_aggregates(&mut self) {
        let mut groups: Vec<(GroupKey, Vec<&ResultRow>)> = Vec::new();
        for row in self.detail_rows() {
            let key = row.group_key();
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(row),
                None => groups.push((key, vec![row])),
            }
        }
        let aggregates: Vec<ResultRow> = groups
            .into_iter()
            .map(|(_, rows)| {
                let k = rows.len() as f64;
                let mean = rows.iter().map(|r| r.value).sum::<f64>() / k;
                let var = rows.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / (k - 1.0);
                let stderr = if rows.len() > 1 {
                    (var / k).sqrt()
                } else {
                    f64::NAN
                };
                let wall_ms = rows
                    .iter()
                    .map(|r| r.wall_ms)
                    .sum::<Option<f64>>()
                    .map(|t| t / k);
                ResultRow {
                    method: rows[0].method,
                    m: rows[0].m,
                    r: rows[0].r,
                    repetition: None,
                    metric: rows[0].metric,
                    value: mean,
                    stderr: Some(stderr),
                    wall_ms,
                }
            })
            .collect();
        self.rows.extend(aggregates);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(e.into());
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        for row in &self.rows {
            out.write_record([
                row.method.name().to_string(),
                row.m.to_string(),
                fmt_opt(row.r),
                row.repetition.map(|k| k.to_string()).unwrap_or_default(),
                row.metric.name().to_string(),
                fmt_float(row.value),
                fmt_opt(row.stderr),
                fmt_opt(row.wall_ms),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut rows = Vec::new();
        let mut saw_header = false;
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Error::Parse {
                    line,
                    message: e.to_string(),
                }
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let parse_err = |message: String| Error::Parse { line, message };
            if !saw_header {
                if rec.iter().ne(CSV_HEADER) {
                    return Err(parse_err(format!(
                        "expected header {}",
                        CSV_HEADER.join(",")
                    )));
                }
                saw_header = true;
                continue;
            }
            if rec.len() != CSV_HEADER.len() {
                return Err(parse_err(format!(
                    "expected {} fields, got {}",
                    CSV_HEADER.len(),
                    rec.len()
                )));
            }
            let float = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("{}: {e}", CSV_HEADER[i])))
            };
            let opt_float = |i: usize| -> Result<Option<f64>> {
                if rec[i].is_empty() {
                    Ok(None)
                } else {
                    float(i).map(Some)
                }
            };
            rows.push(ResultRow {
                method: rec[0]
                    .parse()
                    .map_err(|e: Error| parse_err(e.to_string()))?,
                m: rec[1].parse().map_err(|e| parse_err(format!("m: {e}")))?,
                r: opt_float(2)?,
                repetition: if rec[3].is_empty() {
                    None
                } else {
                    Some(
                        rec[3]
                            .parse()
                            .map_err(|e| parse_err(format!("repetition: {e}")))?,
                    )
                },
                metric: rec[4]
                    .parse()
                    .map_err(|e: Error| parse_err(e.to_string()))?,
                value: float(5)?,
                stderr: opt_float(6)?,
                wall_ms: opt_float(7)?,
            });
        }
        if !saw_header {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            });
        }
        Ok(Self { rows })
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path)
            .map_err(|e| Error::from(e).context(format!("creating {}", path.display())))?;
        self.write_csv(BufWriter::new(f))
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path)
            .map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
        Self::read_csv(f).map_err(|e| e.context(path.display().to_string()))
    }
}
