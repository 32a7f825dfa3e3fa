use std::path::Path;

use super::ModelError;

/// Parses a two-column `y value` table with a `# period=1` header. Rows must
/// sample `[0, 1)` uniformly in increasing order; a closing row at `y = 1`
/// is accepted and dropped when it repeats the first value.
pub fn parse_table(text: &str) -> Result<Vec<f64>, ModelError> {
    let mut saw_header = false;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(p) = comment.trim().strip_prefix("period=") {
                let p: f64 = p.trim().parse().map_err(|_| {
                    ModelError::BadTable(format!("line {}: unreadable period", lineno + 1))
                })?;
                if (p - 1.0).abs() > 1e-12 {
                    return Err(ModelError::BadTable(format!("period must be 1, got {p}")));
                }
                saw_header = true;
            }
            continue;
        }
        let mut cols = line.split_whitespace().map(str::parse::<f64>);
        match (cols.next(), cols.next(), cols.next()) {
            (Some(Ok(y)), Some(Ok(v)), None) if y.is_finite() && v.is_finite() => rows.push((y, v)),
            _ => {
                return Err(ModelError::BadTable(format!(
                    "line {}: expected two finite numbers",
                    lineno + 1
                )))
            }
        }
    }
    if !saw_header {
        return Err(ModelError::BadTable("missing `# period=1` header".into()));
    }
    if let Some(&(y, _)) = rows.last() {
        if (y - 1.0).abs() < 1e-12 {
            rows.pop();
        }
    }
    let n = rows.len();
    if n < 3 {
        return Err(ModelError::BadTable(format!(
            "need at least 3 rows, got {n}"
        )));
    }
    for (j, &(y, _)) in rows.iter().enumerate() {
        let expect = j as f64 / n as f64;
        if (y - expect).abs() > 1e-9 {
            return Err(ModelError::BadTable(format!(
                "row {j}: y={y}, expected uniform grid value {expect}"
            )));
        }
    }
    Ok(rows.into_iter().map(|(_, v)| v).collect())
}

pub fn read_table(path: &Path) -> Result<Vec<f64>, ModelError> {
    parse_table(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_uniform_table() {
        let text = "# period=1\n0 1.0\n0.25 2\n0.5 3\n0.75 2\n1 1.0\n";
        assert_eq!(parse_table(text).unwrap(), vec![1.0, 2.0, 3.0, 2.0]);
    }

    #[test]
    fn rejects_missing_header_and_bad_grid() {
        assert!(parse_table("0 1\n0.5 2\n0.7 1\n").is_err());
        assert!(parse_table("# period=1\n0 1\n0.3 2\n0.7 1\n").is_err());
        assert!(parse_table("# period=2\n0 1\n0.5 2\n").is_err());
    }
}
