use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{SampleRecord, SummaryReport};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "dataset_id,alpha,epsilon,sample_index,seed,kappa,dist_x,e_hat,ratio,converged,iterations,restarts_used";

/// Records as CSV with round-trip float formatting.
pub fn records_to_csv(records: &[SampleRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_records_csv(path: &Path, records: &[SampleRecord]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(records_to_csv(records)?.as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<SampleRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Format(format!("unexpected header {}", header.join(","))));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_summary_json(path: &Path, summary: &SummaryReport) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(i: usize) -> SampleRecord {
        SampleRecord {
            dataset_id: "n5".into(),
            alpha: 1e-4,
            epsilon: 10f64.powf(-12.5),
            sample_index: i,
            seed: u64::MAX - i as u64,
            kappa: 123456.789,
            dist_x: 0.1 + 0.2,
            e_hat: 1.0 / 3.0,
            ratio: 2e-300,
            converged: i % 2 == 0,
            iterations: 17,
            restarts_used: 10,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let recs: Vec<SampleRecord> = (0..3).map(sample).collect();
        let text = records_to_csv(&recs).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 4);
        let back = read_records_csv(text.as_bytes()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn empty_output_still_has_header() {
        let text = records_to_csv(&[]).unwrap();
        assert_eq!(text.trim_end(), CSV_HEADER);
        assert!(read_records_csv(text.as_bytes()).unwrap().is_empty());
        assert!(read_records_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let recs: Vec<SampleRecord> = (0..2).map(sample).collect();
        let csv_path = dir.path().join("records.csv");
        write_records_csv(&csv_path, &recs).unwrap();
        let back = read_records_csv(File::open(&csv_path).unwrap()).unwrap();
        assert_eq!(back, recs);
        let json_path = dir.path().join("summary.json");
        write_summary_json(&json_path, &super::super::summarize(&recs)).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
        assert!(v["cells"][0]["ratio_quantiles"]["q50"].is_number());
        assert!(v["global"]["kappa_alpha_geomean"].is_number());
    }
}
