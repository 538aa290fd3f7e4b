//! File formats: sparse triplet CSV for matrices with a JSON sidecar, and
//! writers for the record formats the parsers consume.

use std::collections::HashMap;
#[cfg(feature = "gzip")]
use std::io::Read;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ColumnMapping, FirmFinancials, IngestError, PatentFamilyRecord};
use crate::matrix::BipartiteMatrix;

/// Most frequent of comma, tab and semicolon on the header line; comma
/// when none occurs.
pub fn sniff_delimiter(data: &[u8]) -> u8 {
    let header = data.split(|&b| b == b'\n').next().unwrap_or_default();
    let count = |d: u8| header.iter().filter(|&&b| b == d).count();
    [b',', b'\t', b';']
        .into_iter()
        .fold((b',', 0), |best, d| if count(d) > best.1 { (d, count(d)) } else { best })
        .0
}

/// Read a whole file, transparently inflating gzip input.
pub fn read_input(path: &Path) -> Result<Vec<u8>, IngestError> {
    let raw = std::fs::read(path)?;
    decode(raw)
}

#[cfg(feature = "gzip")]
fn decode(raw: Vec<u8>) -> Result<Vec<u8>, IngestError> {
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::MultiGzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

#[cfg(not(feature = "gzip"))]
fn decode(raw: Vec<u8>) -> Result<Vec<u8>, IngestError> {
    if raw.starts_with(&[0x1f, 0x8b]) {
        return Err(IngestError::Io(std::io::Error::new(
            std::io::ErrorKind::Unsupported,
            "gzip input requires the `gzip` feature",
        )));
    }
    Ok(raw)
}

/// Metadata written next to a triplet file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub year: Option<i32>,
    pub level: Option<u8>,
    pub binarize: bool,
    pub threshold: f64,
    pub aggregation: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub nnz: usize,
    /// Full id lists so that the matrix shape survives a round trip.
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
}

impl MatrixSidecar {
    pub fn describe(matrix: &BipartiteMatrix) -> Self {
        MatrixSidecar {
            year: None,
            level: None,
            binarize: matrix.is_binary(),
            threshold: 0.0,
            aggregation: "firm".into(),
            n_rows: matrix.n_rows(),
            n_cols: matrix.n_cols(),
            nnz: matrix.nnz(),
            row_ids: matrix.row_ids().to_vec(),
            col_ids: matrix.col_ids().to_vec(),
        }
    }
}

/// Write `row_id,col_id,value` rows in row-major order.
pub fn write_triplets<W: Write>(matrix: &BipartiteMatrix, out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row_id", "col_id", "value"])?;
    for (r, c, v) in matrix.triplets() {
        w.write_record([
            matrix.row_ids()[r].as_str(),
            matrix.col_ids()[c].as_str(),
            &v.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a triplet file. Row and column order come from the sidecar when
/// given, otherwise from first appearance.
pub fn read_triplets(data: &[u8], sidecar: Option<&MatrixSidecar>) -> Result<BipartiteMatrix, IngestError> {
    let mut rows: Vec<String> = sidecar.map(|s| s.row_ids.clone()).unwrap_or_default();
    let mut cols: Vec<String> = sidecar.map(|s| s.col_ids.clone()).unwrap_or_default();
    let mut row_of: HashMap<String, usize> = rows.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
    let mut col_of: HashMap<String, usize> = cols.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let fixed = sidecar.is_some();
    let mut triplets = Vec::new();
    let mut reader = csv::Reader::from_reader(data);
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |reason: &str| IngestError::MalformedRow {
            line,
            reason: reason.to_string(),
        };
        if rec.len() != 3 {
            return Err(bad("expected row_id,col_id,value"));
        }
        let value: f64 = rec[2].parse().map_err(|_| bad("invalid value"))?;
        let index = |ids: &mut Vec<String>, map: &mut HashMap<String, usize>, key: &str| {
            if let Some(&i) = map.get(key) {
                return Ok(i);
            }
            if fixed {
                return Err(bad("id not declared in sidecar"));
            }
            ids.push(key.to_string());
            map.insert(key.to_string(), ids.len() - 1);
            Ok(ids.len() - 1)
        };
        let r = index(&mut rows, &mut row_of, &rec[0])?;
        let c = index(&mut cols, &mut col_of, &rec[1])?;
        triplets.push((r, c, value));
    }
    Ok(BipartiteMatrix::from_triplets(rows, cols, triplets)?)
}

/// Write the matrix and its sidecar as `<stem>.csv` / `<stem>.json`.
pub fn save_matrix(
    matrix: &BipartiteMatrix,
    sidecar: &MatrixSidecar,
    dir: &Path,
    stem: &str,
) -> Result<(), IngestError> {
    let f = std::fs::File::create(dir.join(format!("{stem}.csv")))?;
    write_triplets(matrix, std::io::BufWriter::new(f))?;
    let json = serde_json::to_string_pretty(sidecar)?;
    std::fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
    Ok(())
}

pub fn load_matrix(dir: &Path, stem: &str) -> Result<(BipartiteMatrix, MatrixSidecar), IngestError> {
    let sidecar: MatrixSidecar =
        serde_json::from_slice(&std::fs::read(dir.join(format!("{stem}.json")))?)?;
    let data = read_input(&dir.join(format!("{stem}.csv")))?;
    let m = read_triplets(&data, Some(&sidecar))?;
    Ok((m, sidecar))
}

/// Write family records in the layout described by `schema`.
pub fn write_families<W: Write>(
    records: &[PatentFamilyRecord],
    schema: &ColumnMapping,
    out: W,
) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(schema.delimiter.map_or(b',', |c| c as u8))
        .from_writer(out);
    let sep = schema.list_separator.to_string();
    let mut header = vec![
        schema.family_id.as_str(),
        schema.year.as_str(),
        schema.applicants.as_str(),
        schema.tech_codes.as_str(),
    ];
    if let Some(t) = &schema.triadic {
        header.push(t);
    }
    w.write_record(&header)?;
    for r in records {
        let apps = r.applicants.iter().cloned().collect::<Vec<_>>().join(&sep);
        let codes = r
            .tech_codes
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join(&sep);
        let mut row = vec![r.family_id.clone(), r.year.to_string(), apps, codes];
        if schema.triadic.is_some() {
            row.push(if r.triadic { "1" } else { "0" }.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_financials<W: Write>(records: &[FirmFinancials], out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["firm_id", "value_added", "employees", "total_assets", "country", "year"])?;
    for r in records {
        w.write_record([
            r.firm_id.clone(),
            r.value_added.to_string(),
            r.employees.to_string(),
            r.total_assets.to_string(),
            r.country.clone(),
            r.year.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_roundtrip() {
        let m = BipartiteMatrix::from_dense(&[vec![0.75, 0.25], vec![0.1, 0.0]]).unwrap();
        let mut buf = Vec::new();
        write_triplets(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("row_id,col_id,value\nf0,t0,0.75\n"));
        let back = read_triplets(&buf, Some(&MatrixSidecar::describe(&m))).unwrap();
        assert_eq!(back, m);
        let back = read_triplets(&buf, None).unwrap();
        assert_eq!(back, m);
    }

    #[cfg(feature = "gzip")]
    #[test]
    fn gzip_is_transparent() {
        use flate2::write::GzEncoder;
        let dir = std::env::temp_dir().join(format!("ck-gz-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("x.csv.gz");
        let mut enc = GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(b"a,b\n1,2\n").unwrap();
        std::fs::write(&path, enc.finish().unwrap()).unwrap();
        assert_eq!(read_input(&path).unwrap(), b"a,b\n1,2\n");
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn sniffing() {
        assert_eq!(sniff_delimiter(b"a\tb\n1,2\t3"), b'\t');
        assert_eq!(sniff_delimiter(b"a,b\n1\t2"), b',');
        assert_eq!(sniff_delimiter(b"a;b;c\n1,5;2;3"), b';');
        assert_eq!(sniff_delimiter(b"single"), b',');
    }
}
