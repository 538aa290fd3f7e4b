//! Raw patent-family and balance-sheet records, and the bipartite matrices
//! built from them.

mod build;
mod financials;
pub mod io;
mod records;

pub use build::{active_families, aggregate_rows, build_matrix, truncate_codes, BuildOptions};
pub use financials::{load_financials, FinancialsLoad, FirmFinancials, Rejection};
pub use records::{
    parse_family_records, parse_family_records_lenient, ColumnMapping, FamilyParse,
    PatentFamilyRecord,
};

use thiserror::Error;

use crate::ipc::IpcError;
use crate::matrix::MatrixError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("family {family_id:?} appears on lines {first_line} and {line} with conflicting fields")]
    DuplicateFamily {
        family_id: String,
        first_line: u64,
        line: u64,
    },
    #[error(transparent)]
    InvalidLevel(#[from] IpcError),
    #[error("no active families in year {year}")]
    EmptyYear { year: i32 },
    #[error("binarization threshold {threshold} removed every cell")]
    AllPruned { threshold: f64 },
    #[error("row {0:?} has no group assignment")]
    UnmappedRow(String),
    #[error("line {line}: firm {firm_id:?} has non-positive employee count {employees}")]
    NonPositiveEmployees {
        line: u64,
        firm_id: String,
        employees: f64,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
