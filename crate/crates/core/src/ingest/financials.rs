use serde::{Deserialize, Serialize};

use super::io::sniff_delimiter;
use super::IngestError;

/// Balance-sheet variables for one firm-year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmFinancials {
    pub firm_id: String,
    pub value_added: f64,
    pub employees: f64,
    pub total_assets: f64,
    pub country: String,
    pub year: i32,
}

impl FirmFinancials {
    /// Value added per employee.
    pub fn labor_productivity(&self) -> f64 {
        self.value_added / self.employees
    }
}

#[derive(Debug)]
pub struct Rejection {
    pub line: u64,
    pub error: IngestError,
}

#[derive(Debug, Default)]
pub struct FinancialsLoad {
    pub records: Vec<FirmFinancials>,
    pub rejected: Vec<Rejection>,
}

const COLUMNS: [&str; 6] = [
    "firm_id",
    "value_added",
    "employees",
    "total_assets",
    "country",
    "year",
];

/// Load firm financials. A missing required column is fatal; bad rows are
/// collected in [`FinancialsLoad::rejected`].
pub fn load_financials(data: &[u8]) -> Result<FinancialsLoad, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(data))
        .flexible(true)
        .from_reader(data);
    let headers = reader.headers()?.clone();
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IngestError::MalformedRow {
                line: 1,
                reason: format!("missing column {name:?}"),
            })?;
    }

    let mut out = FinancialsLoad::default();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, line, &idx) {
            Ok(rec) => out.records.push(rec),
            Err(error) => out.rejected.push(Rejection { line, error }),
        }
    }
    Ok(out)
}

fn parse_row(row: &csv::StringRecord, line: u64, idx: &[usize; 6]) -> Result<FirmFinancials, IngestError> {
    let malformed = |reason: String| IngestError::MalformedRow { line, reason };
    let text = |k: usize| row.get(idx[k]).map(str::trim).unwrap_or("");
    let number = |k: usize| -> Result<f64, IngestError> {
        let raw = text(k);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| malformed(format!("{} is not a finite number: {raw:?}", COLUMNS[k])))
    };

    let firm_id = text(0);
    if firm_id.is_empty() {
        return Err(malformed("empty firm_id".into()));
    }
    let value_added = number(1)?;
    let employees = number(2)?;
    let total_assets = number(3)?;
    let year = text(5)
        .parse()
        .map_err(|_| malformed(format!("invalid year {:?}", text(5))))?;
    if employees <= 0.0 {
        return Err(IngestError::NonPositiveEmployees {
            line,
            firm_id: firm_id.to_string(),
            employees,
        });
    }
    Ok(FirmFinancials {
        firm_id: firm_id.to_string(),
        value_added,
        employees,
        total_assets,
        country: text(4).to_string(),
        year,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "firm_id,value_added,employees,total_assets,country,year\n";

    #[test]
    fn productivity() {
        let load = load_financials(format!("{HEADER}a,100,4,1000,IT,2011\n").as_bytes()).unwrap();
        assert_eq!(load.records[0].labor_productivity(), 25.0);
    }

    #[test]
    fn zero_employees_rejected() {
        let data = format!("{HEADER}a,100,4,1000,IT,2011\nb,50,0,10,DE,2011\nc,1,1,1,FR,2011\n");
        let load = load_financials(data.as_bytes()).unwrap();
        assert_eq!(load.records.len(), 2);
        assert_eq!(load.rejected.len(), 1);
        assert_eq!(load.rejected[0].line, 3);
        assert!(matches!(load.rejected[0].error, IngestError::NonPositiveEmployees { .. }));
    }

    #[test]
    fn non_finite_rejected() {
        let load = load_financials(format!("{HEADER}a,NaN,4,1000,IT,2011\n").as_bytes()).unwrap();
        assert!(matches!(load.rejected[0].error, IngestError::MalformedRow { .. }));
    }

    #[test]
    fn missing_column_is_fatal() {
        assert!(load_financials(b"firm_id,value_added\na,1\n").is_err());
    }
}
