//! Plain-text file formats shared by the library and the CLI.
//!
//! Matrices and move lists use the 4ti2 layout: a `rows cols` header
//! followed by whitespace-separated integers in row-major order.

use crate::error::{Error, Result};

/// Parses a 4ti2-style integer matrix. Row breaks in the body are not
/// significant; only the header dimensions are.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(i, l)| l.split('#').next().unwrap_or("").split_whitespace().map(move |t| (i + 1, t)));
    let (line, rows) = tokens.next().ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let rows: usize = rows.parse().map_err(|_| Error::parse(line, format!("bad row count \"{rows}\"")))?;
    let (line, cols) = tokens.next().ok_or_else(|| Error::parse(line, "missing column count"))?;
    let cols: usize = cols.parse().map_err(|_| Error::parse(line, format!("bad column count \"{cols}\"")))?;
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut row = Vec::with_capacity(cols);
        for _ in 0..cols {
            let (line, tok) = tokens
                .next()
                .ok_or_else(|| Error::parse(line, format!("expected {} entries, file ends in row {}", rows * cols, r + 1)))?;
            row.push(tok.parse().map_err(|_| Error::parse(line, format!("\"{tok}\" is not an integer")))?);
        }
        out.push(row);
    }
    if let Some((line, tok)) = tokens.next() {
        return Err(Error::parse(line, format!("unexpected trailing entry \"{tok}\"")));
    }
    Ok(out)
}

/// Writes a matrix in the same layout, right-aligned columns.
pub fn write_matrix(rows: &[Vec<i64>], cols: usize) -> String {
    let width = rows.iter().flatten().map(|v| v.to_string().len()).max().unwrap_or(1);
    let mut out = format!("{} {}\n", rows.len(), cols);
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// One run of observed data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observation {
    pub count: i64,
    pub denominator: Option<i64>,
}

/// Parses a data file: one line per run holding either `count` or
/// `successes denominator`. All lines must use the same form.
pub fn parse_data(text: &str) -> Result<Vec<Observation>> {
    let mut out = Vec::new();
    let mut binomial = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| Error::parse(i + 1, format!("\"{t}\" is not an integer"))))
            .collect::<Result<_>>()?;
        let obs = match nums[..] {
            [c] => Observation { count: c, denominator: None },
            [c, n] => Observation { count: c, denominator: Some(n) },
            _ => return Err(Error::parse(i + 1, "expected \"count\" or \"successes denominator\"")),
        };
        if obs.count < 0 {
            return Err(Error::parse(i + 1, "counts must be nonnegative"));
        }
        if let Some(n) = obs.denominator {
            if obs.count > n {
                return Err(Error::parse(i + 1, "successes exceed denominator"));
            }
        }
        match binomial {
            None => binomial = Some(obs.denominator.is_some()),
            Some(b) if b != obs.denominator.is_some() => {
                return Err(Error::parse(i + 1, "mixed count and binomial lines"));
            }
            _ => {}
        }
        out.push(obs);
    }
    if out.is_empty() {
        return Err(Error::parse(1, "empty data file"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = vec![vec![1, -1, 0], vec![0, 2, -2]];
        let text = write_matrix(&m, 3);
        assert!(text.starts_with("2 3\n"));
        assert_eq!(parse_matrix(&text).unwrap(), m);
    }

    #[test]
    fn matrix_errors() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2 2\n1 2 3").is_err());
        assert!(parse_matrix("1 2\n1 2 3").is_err());
        assert!(parse_matrix("1 2\n1 x").is_err());
        assert_eq!(parse_matrix("0 16\n").unwrap(), Vec::<Vec<i64>>::new());
    }

    #[test]
    fn data_lines() {
        let d = parse_data("3\n# comment\n5\n").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].count, 5);
        let b = parse_data("338 1000\n826 1000").unwrap();
        assert_eq!(b[0].denominator, Some(1000));
        assert!(parse_data("3\n4 10").is_err());
        assert!(parse_data("11 10").is_err());
        assert!(parse_data("-1").is_err());
        assert!(parse_data("").is_err());
    }
}
