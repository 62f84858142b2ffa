//! Sample summaries, normal-approximation confidence intervals and the
//! one-sided two-sample z-test used to compare optimizer results.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Sample size at or below which the normal approximation is flagged.
pub const NORMAL_APPROX_MIN_N: usize = 30;
/// Interval levels reported when none are requested.
pub const DEFAULT_CONFIDENCES: [f64; 2] = [0.95, 0.98];
pub const DEFAULT_SIGNIFICANCE: f64 = 0.05;

fn standard_normal() -> Normal {
    Normal::standard()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

/// Standard normal upper tail, `1 - cdf(x)`, computed without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    standard_normal().sf(x)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}

/// Two-sided critical value `z_{alpha/2}` for `confidence = 1 - alpha`.
pub fn z_critical(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence {confidence} must lie strictly between 0 and 1"
        )));
    }
    Ok(normal_quantile(0.5 + confidence / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (divisor `n - 1`); zero for a single value.
    pub std: f64,
}

impl SampleSummary {
    pub fn new(n: usize, mean: f64, std: f64) -> Result<Self> {
        if n == 0 || !(std >= 0.0) || !mean.is_finite() || !std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid summary n={n} mean={mean} std={std}"
            )));
        }
        Ok(Self { n, mean, std })
    }

    /// True when the sample is too small for the normal approximation.
    pub fn small_sample(&self) -> bool {
        self.n <= NORMAL_APPROX_MIN_N
    }
}

/// Mean and unbiased standard deviation, summed in input order.
pub fn summarize(values: &[f64]) -> Result<SampleSummary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot summarize an empty sample".into(),
        ));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SampleSummary::new(n, mean, std)
}

/// `mean -+ z * std / sqrt(n)`.
pub fn confidence_interval(summary: &SampleSummary, confidence: f64) -> Result<(f64, f64)> {
    if summary.n < 2 {
        return Err(Error::InvalidArgument(
            "a confidence interval needs at least two observations".into(),
        ));
    }
    let half = z_critical(confidence)? * summary.std / (summary.n as f64).sqrt();
    Ok((summary.mean - half, summary.mean + half))
}

/// Unequal-variance two-sample z-test of `mean_a > mean_b`. Returns the
/// statistic and the upper-tail p-value; small p is evidence that `a`
/// exceeds `b`.
pub fn one_sided_test(a: &SampleSummary, b: &SampleSummary) -> Result<(f64, f64)> {
    if a.n < 2 || b.n < 2 {
        return Err(Error::InvalidArgument(
            "the two-sample test needs at least two observations per sample".into(),
        ));
    }
    let se = (a.std * a.std / a.n as f64 + b.std * b.std / b.n as f64).sqrt();
    let diff = a.mean - b.mean;
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok((z, normal_sf(z)))
}

/// Reads one number per non-blank line; `#` starts a comment line.
pub fn parse_values(text: &str, source: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: source.to_path_buf(),
            line: i + 1,
            message: format!("not a number: {line:?}"),
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_values(&text, path)
}

/// Reads column `column` (by header name) of a CSV file.
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut rd = csv::Reader::from_path(path)?;
    let idx = rd
        .headers()?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("{}: no column named {column:?}", path.display()))
        })?;
    let mut out = Vec::new();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec?;
        let cell = rec.get(idx).unwrap_or("").trim();
        out.push(cell.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: row + 2,
            message: format!("not a number: {cell:?}"),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub confidence: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Summary block: mean, deviation and interval bounds at each confidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub label: String,
    #[serde(flatten)]
    pub summary: SampleSummary,
    pub intervals: Vec<Interval>,
    pub small_sample: bool,
}

impl SummaryReport {
    pub fn build(label: impl Into<String>, values: &[f64], confidences: &[f64]) -> Result<Self> {
        let summary = summarize(values)?;
        let intervals = confidences
            .iter()
            .map(|&c| {
                confidence_interval(&summary, c).map(|(lo, hi)| Interval {
                    confidence: c,
                    lo,
                    hi,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            label: label.into(),
            small_sample: summary.small_sample(),
            summary,
            intervals,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    /// Alternative under test: mean of the first sample exceeds the second.
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub samples: Vec<SummaryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<TestReport>,
}

fn percent(c: f64) -> String {
    let p = c * 100.0;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}%", p.round())
    } else {
        format!("{p}%")
    }
}

impl StatsReport {
    pub fn build(samples: &[(String, Vec<f64>)], confidences: &[f64]) -> Result<Self> {
        let samples: Vec<SummaryReport> = samples
            .iter()
            .map(|(label, v)| SummaryReport::build(label.clone(), v, confidences))
            .collect::<Result<_>>()?;
        let test = match samples.as_slice() {
            [a, b] => {
                let (z, p_value) = one_sided_test(&a.summary, &b.summary)?;
                Some(TestReport { z, p_value })
            }
            _ => None,
        };
        Ok(Self { samples, test })
    }

    /// Aligned text table, one column per sample, values to four decimals.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, Vec<String>)> = vec![
            (
                "".into(),
                self.samples.iter().map(|s| s.label.clone()).collect(),
            ),
            (
                "Sample size".into(),
                self.samples
                    .iter()
                    .map(|s| s.summary.n.to_string())
                    .collect(),
            ),
            (
                "Sample mean".into(),
                self.samples
                    .iter()
                    .map(|s| format!("{:.4}", s.summary.mean))
                    .collect(),
            ),
            (
                "Sample deviation".into(),
                self.samples
                    .iter()
                    .map(|s| format!("{:.4}", s.summary.std))
                    .collect(),
            ),
        ];
        if let Some(first) = self.samples.first() {
            for (k, iv) in first.intervals.iter().enumerate() {
                let pc = percent(iv.confidence);
                rows.push((
                    format!("max p.i. {pc}"),
                    self.samples
                        .iter()
                        .map(|s| format!("{:.4}", s.intervals[k].hi))
                        .collect(),
                ));
                rows.push((
                    format!("min p.i. {pc}"),
                    self.samples
                        .iter()
                        .map(|s| format!("{:.4}", s.intervals[k].lo))
                        .collect(),
                ));
            }
        }
        let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let col_w = rows
            .iter()
            .flat_map(|r| r.1.iter().map(|c| c.len()))
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (label, cells) in &rows {
            let _ = write!(out, "{label:<label_w$}");
            for c in cells {
                let _ = write!(out, "  {c:>col_w$}");
            }
            out.push('\n');
        }
        if self.samples.iter().any(|s| s.small_sample) {
            let _ = writeln!(
                out,
                "note: n <= {NORMAL_APPROX_MIN_N}; normal-approximation intervals may be optimistic"
            );
        }
        if let Some(t) = &self.test {
            let (a, b) = (&self.samples[0].label, &self.samples[1].label);
            let _ = writeln!(
                out,
                "H1: mean({a}) > mean({b})  z = {:.4}  p = {:.4e}",
                t.z, t.p_value
            );
        }
        out
    }
}
