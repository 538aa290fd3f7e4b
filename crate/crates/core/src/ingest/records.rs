use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::io::sniff_delimiter;
use super::IngestError;
use crate::ipc::IpcCode;

/// One patent family: the unit that carries weight 1 in matrix
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatentFamilyRecord {
    pub family_id: String,
    pub year: i32,
    pub applicants: BTreeSet<String>,
    pub tech_codes: BTreeSet<IpcCode>,
    pub triadic: bool,
}

/// Maps logical fields onto header names of the input table. List-valued
/// fields (applicants, codes) are split on `list_separator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub family_id: String,
    pub year: String,
    pub applicants: String,
    pub tech_codes: String,
    /// `None` means the input has no triadic column; every family is then
    /// treated as non-triadic.
    pub triadic: Option<String>,
    pub list_separator: char,
    /// Field delimiter; sniffed from the header line when unset.
    pub delimiter: Option<char>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            family_id: "family_id".into(),
            year: "year".into(),
            applicants: "applicants".into(),
            tech_codes: "ipc_codes".into(),
            triadic: Some("triadic".into()),
            list_separator: ';',
            delimiter: None,
        }
    }
}

/// Result of a lenient parse: accepted records plus per-row failures.
#[derive(Debug, Default)]
pub struct FamilyParse {
    pub records: Vec<PatentFamilyRecord>,
    pub rejected: Vec<IngestError>,
}

/// Parse family records, failing on the first malformed row.
pub fn parse_family_records(
    data: &[u8],
    schema: &ColumnMapping,
) -> Result<Vec<PatentFamilyRecord>, IngestError> {
    let parse = parse_inner(data, schema, true)?;
    Ok(parse.records)
}

/// Parse family records, collecting malformed rows instead of failing.
/// Conflicting duplicates are still fatal.
pub fn parse_family_records_lenient(
    data: &[u8],
    schema: &ColumnMapping,
) -> Result<FamilyParse, IngestError> {
    parse_inner(data, schema, false)
}

struct Columns {
    family_id: usize,
    year: usize,
    applicants: usize,
    tech_codes: usize,
    triadic: Option<usize>,
}

fn parse_inner(
    data: &[u8],
    schema: &ColumnMapping,
    strict: bool,
) -> Result<FamilyParse, IngestError> {
    let delimiter = schema.delimiter.map(|c| c as u8).unwrap_or_else(|| sniff_delimiter(data));
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(data);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IngestError::MalformedRow {
                line: 1,
                reason: format!("missing column {name:?}"),
            })
    };
    let cols = Columns {
        family_id: find(&schema.family_id)?,
        year: find(&schema.year)?,
        applicants: find(&schema.applicants)?,
        tech_codes: find(&schema.tech_codes)?,
        triadic: schema.triadic.as_deref().map(find).transpose()?,
    };

    let mut out = FamilyParse::default();
    let mut by_id: BTreeMap<String, (u64, usize)> = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let record = match parse_row(&row, line, &cols, schema.list_separator) {
            Ok(r) => r,
            Err(e) if strict => return Err(e),
            Err(e) => {
                out.rejected.push(e);
                continue;
            }
        };
        match by_id.entry(record.family_id.clone()) {
            Entry::Vacant(slot) => {
                slot.insert((line, out.records.len()));
                out.records.push(record);
            }
            Entry::Occupied(slot) => {
                let (first_line, idx) = *slot.get();
                if out.records[idx] != record {
                    return Err(IngestError::DuplicateFamily {
                        family_id: record.family_id,
                        first_line,
                        line,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn parse_row(
    row: &csv::StringRecord,
    line: u64,
    cols: &Columns,
    sep: char,
) -> Result<PatentFamilyRecord, IngestError> {
    let malformed = |reason: String| IngestError::MalformedRow { line, reason };
    let field = |idx: usize, name: &str| {
        row.get(idx)
            .map(str::trim)
            .ok_or_else(|| malformed(format!("missing field {name}")))
    };

    let family_id = field(cols.family_id, "family_id")?;
    if family_id.is_empty() {
        return Err(malformed("empty family id".into()));
    }
    let year_raw = field(cols.year, "year")?;
    let year: i32 = year_raw
        .parse()
        .map_err(|_| malformed(format!("invalid year {year_raw:?}")))?;

    let applicants: BTreeSet<String> = split_list(field(cols.applicants, "applicants")?, sep)
        .map(str::to_string)
        .collect();
    if applicants.is_empty() {
        return Err(malformed("empty applicant field".into()));
    }
    let tech_codes = split_list(field(cols.tech_codes, "tech_codes")?, sep)
        .map(|c| IpcCode::parse(c).map_err(|e| malformed(e.to_string())))
        .collect::<Result<BTreeSet<_>, _>>()?;
    if tech_codes.is_empty() {
        return Err(malformed("empty technology code field".into()));
    }
    let triadic = match cols.triadic {
        None => false,
        Some(idx) => parse_flag(field(idx, "triadic")?)
            .ok_or_else(|| malformed("unrecognised triadic flag".into()))?,
    };
    Ok(PatentFamilyRecord {
        family_id: family_id.to_string(),
        year,
        applicants,
        tech_codes,
        triadic,
    })
}

fn split_list(field: &str, sep: char) -> impl Iterator<Item = &str> {
    field.split(sep).map(str::trim).filter(|s| !s.is_empty())
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "y" => Some(true),
        "0" | "false" | "f" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}
