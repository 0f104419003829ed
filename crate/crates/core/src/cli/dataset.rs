use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Observation;

fn parse_cell(cell: &str, line: usize) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(Some(x)),
        Ok(_) => Err(Error::Parse {
            line,
            message: format!("non-finite value `{cell}`"),
        }),
        Err(_) => Err(Error::Parse {
            line,
            message: format!("not a number: `{cell}`"),
        }),
    }
}

fn is_header(record: &csv::StringRecord) -> bool {
    record.iter().any(|c| {
        let c = c.trim();
        !c.is_empty() && !c.eq_ignore_ascii_case("na") && c.parse::<f64>().is_err()
    })
}

/// Reads observations from CSV text.
///
/// Two columns (optionally under a `left,right` header) give bounds: equal
/// bounds are exact, an empty left cell is left-censoring at the right bound,
/// an empty right cell right-censoring at the left bound, and `NA` counts as
/// empty. A single column is read as exact values. Errors carry line numbers.
pub fn parse_dataset_str(text: &str) -> Result<Vec<Observation>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let mut columns: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // the csv reader's positions do not account for skipped blank lines
        let line = record.position().map_or(i + 1, |p| {
            let bytes = text.as_bytes();
            let mut start = p.byte() as usize;
            while matches!(bytes.get(start), Some(b'\n' | b'\r')) {
                start += 1;
            }
            bytes[..start].iter().filter(|&&b| b == b'\n').count() + 1
        });
        if record.iter().all(|c| c.trim().is_empty()) && record.len() <= 1 {
            continue;
        }
        if i == 0 && is_header(&record) {
            let names: Vec<String> = record
                .iter()
                .map(|c| c.trim().to_ascii_lowercase())
                .collect();
            match names.as_slice() {
                [l, r] if l == "left" && r == "right" => columns = Some(2),
                [_] => columns = Some(1),
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "expected a `left,right` header or a single column, got `{}`",
                            names.join(",")
                        ),
                    })
                }
            }
            continue;
        }
        let width = *columns.get_or_insert(record.len());
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let obs = if width == 1 {
            match parse_cell(&record[0], line)? {
                Some(x) => Observation::exact(x),
                None => {
                    return Err(Error::Parse {
                        line,
                        message: "empty value".into(),
                    })
                }
            }
        } else if width == 2 {
            let (l, r) = (parse_cell(&record[0], line)?, parse_cell(&record[1], line)?);
            if let (Some(l), Some(r)) = (l, r) {
                if l > r {
                    return Err(Error::Parse {
                        line,
                        message: format!("left bound {l} exceeds right bound {r}"),
                    });
                }
            }
            Observation::from_bounds(l, r)
        } else {
            return Err(Error::Parse {
                line,
                message: format!("expected 1 or 2 fields, found {width}"),
            });
        };
        out.push(obs.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?);
    }
    if out.is_empty() {
        return Err(Error::Data("dataset contains no observations".into()));
    }
    Ok(out)
}

pub fn parse_dataset(path: &Path) -> Result<Vec<Observation>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_dataset_str(&text)
}

/// `left,right` CSV that [`parse_dataset_str`] reads back to the same
/// observations. Values use the shortest representation that round-trips.
pub fn format_dataset(data: &[Observation]) -> String {
    let mut s = String::from("left,right\n");
    for o in data {
        let cell = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        let (l, r) = match o.point() {
            Some(x) => (Some(x), Some(x)),
            None => (o.left(), o.right()),
        };
        s.push_str(&format!("{},{}\n", cell(l), cell(r)));
    }
    s
}
