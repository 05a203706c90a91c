use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::DataError;

/// `COLUMN=VALUE` row filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    pub column: String,
    pub value: String,
}

impl FromStr for Filter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('=') {
            Some((c, v)) if !c.trim().is_empty() => {
                Ok(Filter { column: c.trim().to_string(), value: v.trim().to_string() })
            }
            _ => Err(format!("expected COLUMN=VALUE, got {s:?}")),
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.column, self.value)
    }
}

impl Filter {
    /// Exact string match, or numeric equality when both sides parse.
    pub fn matches(&self, field: &str) -> bool {
        let field = field.trim();
        if field == self.value {
            return true;
        }
        match (field.parse::<f64>(), self.value.parse::<f64>()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

/// One numeric column pulled out of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub path: PathBuf,
    pub column: String,
    pub filter: Option<Filter>,
    pub values: Vec<f64>,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.values.len()
    }
}

/// Reads `path` (comma separated, header row), keeps rows passing `filter`
/// and parses `column` from them.
pub fn load_filter(path: &Path, filter: Option<&Filter>, column: &str) -> Result<Dataset, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::MissingFile { path: path.into(), source })?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let malformed = |source| DataError::Malformed { path: path.into(), source };
    let headers = rdr.headers().map_err(malformed)?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| DataError::MissingColumn {
            path: path.into(),
            column: name.to_string(),
            available: headers.iter().collect::<Vec<_>>().join(","),
        })
    };
    let col = find(column)?;
    let filter_col = filter.map(|f| find(&f.column)).transpose()?;

    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(malformed)?;
        if let (Some(f), Some(fc)) = (filter, filter_col) {
            if !f.matches(record.get(fc).unwrap_or("")) {
                continue;
            }
        }
        let raw = record.get(col).unwrap_or("");
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(DataError::Unparseable {
                    path: path.into(),
                    // 1-based, counting the header as row 1.
                    row: i + 2,
                    column: column.to_string(),
                    value: raw.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        let filter = filter.map_or_else(|| "(no filter)".to_string(), Filter::to_string);
        return Err(DataError::NoRows { path: path.into(), filter });
    }
    if values.len() < 2 {
        return Err(DataError::TooFewRows { path: path.into(), rows: values.len() });
    }
    Ok(Dataset { path: path.into(), column: column.to_string(), filter: filter.cloned(), values })
}
