//! CSV ingestion. Rows are treated as equally spaced observations.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// Numeric column read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: Option<String>,
    pub values: Vec<f64>,
    /// Rows dropped because the selected cell was empty or marked missing.
    pub missing: usize,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || ["na", "nan", "null", "missing", "-"].contains(&c.to_ascii_lowercase().as_str())
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Reads one column. The first row is taken as a header when its selected
/// cell is neither numeric nor missing, or when `column` names a header.
pub fn read_column(path: &Path, column: Option<&str>) -> CliResult<Column> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(std::io::BufReader::new(file));

    let mut records = reader.records();
    let csv_error = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::input(path, format!("malformed CSV: {other:?}")),
    };
    let Some(first) = records.next().transpose().map_err(csv_error)? else {
        return Err(CliError::input(path, "file contains no rows"));
    };

    let looks_like_header = first
        .iter()
        .any(|c| parse_cell(c).is_none() && !is_missing(c));
    let (index, name) = match column {
        Some(spec) => {
            let by_name = looks_like_header
                .then(|| first.iter().position(|c| c == spec))
                .flatten();
            match (by_name, spec.parse::<usize>()) {
                (Some(i), _) => (i, Some(spec.to_string())),
                (None, Ok(pos)) if pos >= 1 => {
                    let name =
                        looks_like_header.then(|| first.get(pos - 1).unwrap_or("").to_string());
                    (pos - 1, name)
                }
                _ => {
                    return Err(CliError::Usage(format!(
                        "column `{spec}` not found in {}",
                        path.display()
                    )))
                }
            }
        }
        None => {
            if first.len() > 1 {
                return Err(CliError::Usage(format!(
                    "{} has {} columns; choose one with --column",
                    path.display(),
                    first.len()
                )));
            }
            (
                0,
                looks_like_header.then(|| first.get(0).unwrap_or("").to_string()),
            )
        }
    };

    let mut values = Vec::new();
    let mut missing = 0usize;
    let mut take = |record: &csv::StringRecord| -> CliResult<()> {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        match record.get(index) {
            None => missing += 1,
            Some(cell) if is_missing(cell) => missing += 1,
            Some(cell) => match parse_cell(cell) {
                Some(x) => values.push(x),
                None => {
                    return Err(CliError::input(
                        path,
                        format!(
                            "row {line}: non-numeric value `{cell}` in column {}",
                            index + 1
                        ),
                    ))
                }
            },
        }
        Ok(())
    };
    if !looks_like_header {
        take(&first)?;
    }
    for record in records {
        take(&record.map_err(csv_error)?)?;
    }
    Ok(Column {
        name,
        values,
        missing,
    })
}
