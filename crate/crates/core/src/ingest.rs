//! Age-specific rate tables read from comma-separated text.
//!
//! Two layouts are accepted:
//!
//! * long: `year,age,rate` per line, optional header (detected when any
//!   field of the first line is non-numeric). Absent `(year, age)` pairs are
//!   simply missing observations.
//! * wide: header `age,<year>,<year>,...`, then one line per age with a rate
//!   for every year. Empty cells are errors.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::error::{Error, Result};
use crate::smooth::RateCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Long,
    Wide,
}

/// Rates indexed by age (rows) and year label (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    ages: Vec<f64>,
    years: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
}

impl RateTable {
    /// Builds a table from complete data; `values[row][col]` is the rate at
    /// `ages[row]` in `years[col]`.
    pub fn new(ages: Vec<f64>, years: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let values = values
            .into_iter()
            .map(|row| row.into_iter().map(Some).collect())
            .collect();
        Self::from_cells(ages, years, values)
    }

    fn from_cells(
        ages: Vec<f64>,
        years: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if ages.is_empty() || years.is_empty() {
            return Err(Error::EmptyTable);
        }
        if values.len() != ages.len() || values.iter().any(|r| r.len() != years.len()) {
            return Err(Error::InvalidCurve(format!(
                "table values must be {} x {}",
                ages.len(),
                years.len()
            )));
        }
        if ages.windows(2).any(|w| w[0] >= w[1]) || ages.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidCurve(
                "ages must be finite and strictly increasing".into(),
            ));
        }
        for v in values.iter().flatten().flatten() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidCurve(format!("invalid rate {v}")));
            }
        }
        Ok(Self {
            ages,
            years,
            values,
        })
    }

    pub fn ages(&self) -> &[f64] {
        &self.ages
    }

    pub fn years(&self) -> &[String] {
        &self.years
    }

    /// Rate at `(row, col)`, `None` when the long-format input omitted it.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row][col]
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().flatten().all(Option::is_some)
    }

    fn year_index(&self, year: &str) -> Result<usize> {
        self.years
            .iter()
            .position(|y| y == year)
            .ok_or_else(|| Error::UnknownYear(year.to_string()))
    }

    /// The column for `year` as a curve over the ages observed that year.
    pub fn curve_for_year(&self, year: &str) -> Result<RateCurve> {
        let col = self.year_index(year)?;
        let (ages, rates) = self
            .ages
            .iter()
            .zip(&self.values)
            .filter_map(|(a, row)| row[col].map(|r| (*a, r)))
            .unzip();
        RateCurve::new(year, ages, rates)
    }

    /// Serializes with a header row. Wide output fails on missing cells.
    pub fn to_csv(&self, format: TableFormat) -> Result<String> {
        let mut out = String::new();
        match format {
            TableFormat::Long => {
                out.push_str("year,age,rate\n");
                for (col, year) in self.years.iter().enumerate() {
                    for (row, age) in self.ages.iter().enumerate() {
                        if let Some(v) = self.values[row][col] {
                            let _ = writeln!(out, "{year},{age},{v}");
                        }
                    }
                }
            }
            TableFormat::Wide => {
                out.push_str("age");
                for y in &self.years {
                    out.push(',');
                    out.push_str(y);
                }
                out.push('\n');
                for (row, age) in self.ages.iter().enumerate() {
                    let _ = write!(out, "{age}");
                    for (col, year) in self.years.iter().enumerate() {
                        let v = self.values[row][col].ok_or_else(|| Error::MissingCell {
                            year: year.clone(),
                            age: *age,
                        })?;
                        let _ = write!(out, ",{v}");
                    }
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::NonNumeric {
        line,
        value: field.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite { line });
    }
    Ok(v)
}

fn parse_rate(field: &str, line: usize) -> Result<f64> {
    let v = parse_number(field, line)?;
    if v < 0.0 {
        return Err(Error::NegativeRate { line, value: v });
    }
    Ok(v)
}

fn records(input: impl Read) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        // a lone empty field is a blank line
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

/// Parses a rate table in the given layout.
pub fn parse_table(input: impl Read, format: TableFormat) -> Result<RateTable> {
    let recs = records(input)?;
    match format {
        TableFormat::Long => parse_long(recs),
        TableFormat::Wide => parse_wide(recs),
    }
}

/// Parses a table held in memory.
pub fn parse_str(text: &str, format: TableFormat) -> Result<RateTable> {
    parse_table(text.as_bytes(), format)
}

fn parse_long(recs: Vec<(usize, Vec<String>)>) -> Result<RateTable> {
    let mut rows = recs.into_iter().peekable();
    if let Some((_, first)) = rows.peek() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            rows.next();
        }
    }
    let mut years: Vec<String> = Vec::new();
    let mut year_idx: HashMap<String, usize> = HashMap::new();
    let mut cells: Vec<(usize, f64, f64, usize)> = Vec::new();
    for (line, fields) in rows {
        if fields.len() != 3 {
            return Err(Error::MalformedRow {
                line,
                expected: 3,
                found: fields.len(),
            });
        }
        let year = fields[0].clone();
        if year.is_empty() {
            return Err(Error::NonNumeric { line, value: year });
        }
        let age = parse_number(&fields[1], line)?;
        let rate = parse_rate(&fields[2], line)?;
        let col = *year_idx.entry(year.clone()).or_insert_with(|| {
            years.push(year);
            years.len() - 1
        });
        cells.push((col, age, rate, line));
    }
    if cells.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut ages: Vec<f64> = cells.iter().map(|c| c.1).collect();
    ages.sort_by(f64::total_cmp);
    ages.dedup();
    let mut values = vec![vec![None; years.len()]; ages.len()];
    for (col, age, rate, _) in cells {
        let row = ages.partition_point(|a| *a < age);
        if values[row][col].is_some() {
            return Err(Error::DuplicateCell {
                year: years[col].clone(),
                age,
            });
        }
        values[row][col] = Some(rate);
    }
    RateTable::from_cells(ages, years, values)
}

fn parse_wide(recs: Vec<(usize, Vec<String>)>) -> Result<RateTable> {
    let mut rows = recs.into_iter();
    let (_, header) = rows.next().ok_or(Error::EmptyTable)?;
    let width = header.len();
    if width < 2 {
        return Err(Error::EmptyTable);
    }
    let years: Vec<String> = header[1..].to_vec();
    let mut body: Vec<(f64, Vec<Option<f64>>)> = Vec::new();
    for (line, fields) in rows {
        if fields.len() != width {
            return Err(Error::MalformedRow {
                line,
                expected: width,
                found: fields.len(),
            });
        }
        let age = parse_number(&fields[0], line)?;
        let vals = fields[1..]
            .iter()
            .zip(&years)
            .map(|(f, y)| {
                if f.is_empty() {
                    Err(Error::MissingCell {
                        year: y.clone(),
                        age,
                    })
                } else {
                    parse_rate(f, line).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        body.push((age, vals));
    }
    if body.is_empty() {
        return Err(Error::EmptyTable);
    }
    body.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = body.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateCell {
            year: years[0].clone(),
            age: w[0].0,
        });
    }
    let (ages, values) = body.into_iter().unzip();
    RateTable::from_cells(ages, years, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_two_rows() {
        let t = parse_str("1921,15,0.0106\n1921,16,0.0243\n", TableFormat::Long).unwrap();
        assert_eq!(t.years(), &["1921".to_string()]);
        assert_eq!(t.ages(), &[15.0, 16.0]);
        assert_eq!(t.get(1, 0), Some(0.0243));
    }

    #[test]
    fn long_with_header_and_crlf() {
        let t = parse_str(
            "year,age,rate\r\n1921,16,0.2\r\n1921,15,0.1\r\n",
            TableFormat::Long,
        )
        .unwrap();
        assert_eq!(t.ages(), &[15.0, 16.0]);
        assert_eq!(t.get(0, 0), Some(0.1));
    }

    #[test]
    fn wide_single_row() {
        let t = parse_str("age,1921,2006\n20,0.1,0.05\n", TableFormat::Wide).unwrap();
        assert_eq!(t.years().len(), 2);
        assert_eq!(t.get(0, 1), Some(0.05));
    }

    #[test]
    fn negative_rate_rejected() {
        assert_eq!(
            parse_str("1921,20,-0.1\n", TableFormat::Long),
            Err(Error::NegativeRate {
                line: 1,
                value: -0.1
            })
        );
    }

    #[test]
    fn error_classes() {
        assert!(matches!(
            parse_str("1921,20\n", TableFormat::Long),
            Err(Error::MalformedRow {
                expected: 3,
                found: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_str("1921,20,0.1\n1921,20,0.2\n", TableFormat::Long),
            Err(Error::DuplicateCell { .. })
        ));
        assert!(matches!(
            parse_str("year,age,rate\n1921,20,abc\n", TableFormat::Long),
            Err(Error::NonNumeric { line: 2, .. })
        ));
        assert_eq!(parse_str("", TableFormat::Long), Err(Error::EmptyTable));
        assert_eq!(
            parse_str("year,age,rate\n", TableFormat::Long),
            Err(Error::EmptyTable)
        );
        assert_eq!(
            parse_str("age,1921\n", TableFormat::Wide),
            Err(Error::EmptyTable)
        );
        assert!(matches!(
            parse_str("age,1921,2006\n20,0.1,\n", TableFormat::Wide),
            Err(Error::MissingCell { .. })
        ));
        assert!(matches!(
            parse_str("age,1921,2006\n20,0.1\n", TableFormat::Wide),
            Err(Error::MalformedRow { .. })
        ));
        assert!(matches!(
            parse_str("age,1921\n20,0.1\n20,0.2\n", TableFormat::Wide),
            Err(Error::DuplicateCell { .. })
        ));
        assert!(matches!(
            parse_str("1921,20,inf\n", TableFormat::Long),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn long_missing_ages_are_omitted() {
        let t = parse_str("1921,15,0.1\n1921,16,0.2\n2006,15,0.3\n", TableFormat::Long).unwrap();
        assert!(!t.is_complete());
        assert_eq!(t.curve_for_year("2006").unwrap().len(), 1);
        assert_eq!(t.curve_for_year("1921").unwrap().len(), 2);
        assert!(matches!(
            t.to_csv(TableFormat::Wide),
            Err(Error::MissingCell { .. })
        ));
        let again = parse_str(&t.to_csv(TableFormat::Long).unwrap(), TableFormat::Long).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn unknown_year() {
        let t = parse_str("age,1921\n20,0.1\n21,0.2\n", TableFormat::Wide).unwrap();
        assert_eq!(
            t.curve_for_year("1900"),
            Err(Error::UnknownYear("1900".into()))
        );
    }

    #[test]
    fn long_and_wide_agree() {
        let wide = "age,1921,2006\n15,0.01,0.02\n16,0.03,0.04\n";
        let long = "year,age,rate\n1921,15,0.01\n1921,16,0.03\n2006,15,0.02\n2006,16,0.04\n";
        assert_eq!(
            parse_str(wide, TableFormat::Wide).unwrap(),
            parse_str(long, TableFormat::Long).unwrap()
        );
    }
}
