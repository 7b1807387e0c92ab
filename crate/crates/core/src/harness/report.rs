use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Format};
use crate::error::Result;

pub const CSV_HEADER: [&str; 7] = ["experiment", "n_or_N", "L", "trial", "seed", "metric", "value"];

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    #[serde(rename = "n_or_N")]
    pub n_or_n: u64,
    #[serde(rename = "L")]
    pub length: u64,
    pub trial: u64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub metric: String,
    pub count: u64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    /// Standard error of the mean; for 0/1 metrics this is the error of the empirical probability.
    pub std_err: f64,
    /// The claim this aggregate checks.
    pub claim: String,
    /// Bound or target the claim compares against, when there is one.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Snake length the asymptotic analysis suggests, for comparison with the `L` used.
    pub nominal_length: Option<f64>,
    pub records: Vec<Record>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    pub fn aggregate(&self, metric: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.metric == metric)
    }
}

/// Summary statistics per metric, in order of first appearance.
pub fn aggregate(records: &[Record], claim: impl Fn(&str) -> (String, Option<f64>)) -> Vec<Aggregate> {
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !order.contains(&r.metric.as_str()) {
            order.push(&r.metric);
        }
    }
    order
        .into_iter()
        .map(|m| {
            let mut vals: Vec<f64> = records.iter().filter(|r| r.metric == m).map(|r| r.value).collect();
            let count = vals.len();
            let mean = vals.iter().sum::<f64>() / count as f64;
            let var = if count > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
            } else {
                0.0
            };
            vals.sort_by(f64::total_cmp);
            let median = if count % 2 == 1 {
                vals[count / 2]
            } else {
                (vals[count / 2 - 1] + vals[count / 2]) / 2.0
            };
            let (claim, reference) = claim(m);
            Aggregate {
                metric: m.to_string(),
                count: count as u64,
                mean,
                median,
                max: vals[count - 1],
                min: vals[0],
                std_err: (var / count as f64).sqrt(),
                claim,
                reference,
            }
        })
        .collect()
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report<W: Write>(rep: &ExperimentReport, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(&rep.records, out),
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rep)?;
            out.write_all(b"\n")?;
            Ok(())
        }
    }
}

pub fn emit_report(rep: &ExperimentReport, path: &Path, format: Format) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_report(rep, format, std::io::BufWriter::new(f))
}

pub fn read_csv(text: &str) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<Vec<Record>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(metric: &str, value: f64) -> Record {
        Record {
            experiment: "mixing".into(),
            n_or_n: 4,
            length: 0,
            trial: 0,
            seed: 1,
            metric: metric.into(),
            value,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "experiment,n_or_N,L,trial,seed,metric,value\n");
    }

    #[test]
    fn csv_round_trip() {
        let rs = vec![rec("a", 0.5), rec("b", 1e-300)];
        let mut buf = Vec::new();
        write_csv(&rs, &mut buf).unwrap();
        assert_eq!(read_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), rs);
    }

    #[test]
    fn aggregates() {
        let rs = vec![rec("x", 1.0), rec("y", 5.0), rec("x", 3.0), rec("x", 2.0), rec("x", 10.0)];
        let ag = aggregate(&rs, |m| (format!("claim {m}"), None));
        assert_eq!(ag.len(), 2);
        assert_eq!(ag[0].metric, "x");
        assert_eq!((ag[0].mean, ag[0].median, ag[0].max, ag[0].min), (4.0, 2.5, 10.0, 1.0));
        assert!((ag[0].std_err - (50f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(ag[1].std_err, 0.0);
        assert_eq!(ag[1].claim, "claim y");
    }
}
