use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Mean of per-replication values with its Monte Carlo standard error
/// (`sd / √count`, sample sd with divisor `count - 1`; zero when fewer than
/// two values).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Estimate {
    /// An empty set of values gives a NaN mean.
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, count };
        }
        let k = count as f64;
        let mean = values.iter().sum::<f64>() / k;
        let stderr = if count < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (k - 1.0)).sqrt() / k.sqrt()
        };
        Self { mean, stderr, count }
    }

    /// Frequency of `hits` among `total` Bernoulli trials.
    pub fn proportion(hits: usize, total: usize) -> Self {
        if total == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, count: 0 };
        }
        let k = total as f64;
        let mean = hits as f64 / k;
        let stderr = if total < 2 { 0.0 } else { (mean * (1.0 - mean) / (k - 1.0)).sqrt() };
        Self { mean, stderr, count: total }
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Self {
        let (mut hits, mut total) = (0, 0);
        for f in flags {
            hits += usize::from(f);
            total += 1;
        }
        Self::proportion(hits, total)
    }

    /// A deterministic value with no sampling error.
    pub fn exact(value: f64) -> Self {
        Self { mean: value, stderr: 0.0, count: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(i) => write!(f, "{i}"),
            Param::Float(x) => write!(f, "{x}"),
            Param::Text(s) => f.write_str(s),
        }
    }
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as i64)
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Float(v)
    }
}

impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_owned())
    }
}

impl From<String> for Param {
    fn from(v: String) -> Self {
        Param::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub params: Vec<Param>,
    pub estimate: f64,
    pub stderr: f64,
    /// Replications behind the estimate; 0 for computed (non-random) rows.
    pub reps: usize,
}

/// Monte Carlo results on a parameter grid, one row per grid point and
/// quantity. Serializes to CSV as `param…,estimate,stderr,reps,seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub param_names: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, param_names: &[&str], seed: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            param_names: param_names.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
            seed,
        }
    }

    pub fn push(&mut self, params: Vec<Param>, est: Estimate) {
        assert_eq!(params.len(), self.param_names.len(), "row arity must match the header");
        self.rows.push(ReportRow { params, estimate: est.mean, stderr: est.stderr, reps: est.count });
    }

    /// First row whose named parameters render as the given strings.
    pub fn find(&self, filters: &[(&str, &str)]) -> Option<&ReportRow> {
        let idx: Vec<(usize, &str)> = filters
            .iter()
            .map(|(name, value)| {
                let i = self
                    .param_names
                    .iter()
                    .position(|p| p == name)
                    .unwrap_or_else(|| panic!("unknown parameter `{name}`"));
                (i, *value)
            })
            .collect();
        self.rows.iter().find(|row| idx.iter().all(|(i, v)| row.params[*i].to_string() == *v))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.param_names.iter().map(String::as_str).collect();
        header.extend(["estimate", "stderr", "reps", "seed"]);
        w.write_record(&header)?;
        let seed = self.seed.to_string();
        for row in &self.rows {
            let mut record: Vec<String> = row.params.iter().map(ToString::to_string).collect();
            record.push(row.estimate.to_string());
            record.push(row.stderr.to_string());
            record.push(row.reps.to_string());
            record.push(seed.clone());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_conventions() {
        let e = Estimate::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(Estimate::from_values(&[3.0]).stderr, 0.0);
        let p = Estimate::proportion(3, 10);
        let flags = Estimate::from_values(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((p.mean - flags.mean).abs() < 1e-15);
        assert!((p.stderr - flags.stderr).abs() < 1e-15);
        assert_eq!(Estimate::proportion(1, 1).stderr, 0.0);
        assert!(Estimate::proportion(0, 0).mean.is_nan());
    }

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new("demo", &["series", "n"], 42);
        r.push(vec!["simulated".into(), 10usize.into()], Estimate::proportion(1, 4));
        r.push(vec!["tracy_widom".into(), 10usize.into()], Estimate::exact(0.5));
        let text = r.to_csv_string().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "series,n,estimate,stderr,reps,seed");
        assert!(lines[1].starts_with("simulated,10,0.25,"));
        assert!(lines[1].ends_with(",4,42"));
        assert_eq!(lines[2], "tracy_widom,10,0.5,0,0,42");
        assert_eq!(r.find(&[("series", "tracy_widom"), ("n", "10")]).unwrap().estimate, 0.5);
        assert!(r.find(&[("n", "11")]).is_none());
    }
}
