//! Ingestion of externally computed newform eigenvalue data, used to
//! cross-check the trace formula against real tables.
//!
//! File format (ASCII, LF line endings, decimal floats):
//!
//! ```text
//! #LEVEL,243
//! #WEIGHT,4
//! #FORMS
//! label,root_number
//! a,1
//! b,-1
//! #EIGEN
//! label,n,lambda
//! a,2,0.70710678
//! b,2,-0.5
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::arith::is_prime_u64;
use crate::error::{Error, Result};
use crate::lfunc::HurwitzTable;
use crate::trace::{trace_closed, FamilyParams};

/// Slack on the Deligne bound |lambda(n)| <= 2 to absorb decimal rounding
/// in external data.
const DELIGNE_SLACK: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct FixtureForm {
    pub label: String,
    pub root_number: i8,
    pub eigenvalues: BTreeMap<u64, f64>,
}

#[derive(Clone, Debug)]
pub struct EigenFixture {
    pub level: u64,
    pub weight: u32,
    pub forms: Vec<FixtureForm>,
}

#[derive(Clone, Copy, Debug)]
pub struct CrosscheckReport {
    /// `sum_f root_number * lambda_f(n)` from the data.
    pub data_sum: f64,
    /// The normalized closed-trace value.
    pub trace_value: f64,
    pub abs_err: f64,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parse a fixture from any reader.
pub fn ingest_fixture(reader: impl Read) -> Result<EigenFixture> {
    #[derive(PartialEq)]
    enum Section {
        Head,
        Forms,
        Eigen,
    }
    let mut level: Option<u64> = None;
    let mut weight: Option<u32> = None;
    let mut section = Section::Head;
    let mut forms: Vec<FixtureForm> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut seen_header_forms = false;
    let mut seen_header_eigen = false;

    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#LEVEL,") {
            level = Some(
                rest.trim()
                    .parse::<u64>()
                    .map_err(|_| parse_err(lineno, format!("bad level '{rest}'")))?,
            );
            continue;
        }
        if let Some(rest) = line.strip_prefix("#WEIGHT,") {
            weight = Some(
                rest.trim()
                    .parse::<u32>()
                    .map_err(|_| parse_err(lineno, format!("bad weight '{rest}'")))?,
            );
            continue;
        }
        match line {
            "#FORMS" => {
                section = Section::Forms;
                continue;
            }
            "#EIGEN" => {
                section = Section::Eigen;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Head => {
                return Err(parse_err(lineno, format!("unexpected line before #FORMS: '{line}'")));
            }
            Section::Forms => {
                if !seen_header_forms {
                    if line != "label,root_number" {
                        return Err(parse_err(lineno, "expected header 'label,root_number'"));
                    }
                    seen_header_forms = true;
                    continue;
                }
                let (label, rn) = line
                    .split_once(',')
                    .ok_or_else(|| parse_err(lineno, "expected 'label,root_number'"))?;
                let root_number: i8 = match rn.trim() {
                    "1" | "+1" => 1,
                    "-1" => -1,
                    other => {
                        return Err(parse_err(lineno, format!("root number must be +-1, got '{other}'")))
                    }
                };
                if index.contains_key(label) {
                    return Err(parse_err(lineno, format!("duplicate form label '{label}'")));
                }
                index.insert(label.to_string(), forms.len());
                forms.push(FixtureForm {
                    label: label.to_string(),
                    root_number,
                    eigenvalues: BTreeMap::new(),
                });
            }
            Section::Eigen => {
                if !seen_header_eigen {
                    if line != "label,n,lambda" {
                        return Err(parse_err(lineno, "expected header 'label,n,lambda'"));
                    }
                    seen_header_eigen = true;
                    continue;
                }
                let mut parts = line.splitn(3, ',');
                let label = parts.next().unwrap();
                let n: u64 = parts
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing n"))?
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad n"))?;
                let lambda: f64 = parts
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing lambda"))?
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(lineno, "bad lambda"))?;
                let &fi = index
                    .get(label)
                    .ok_or_else(|| parse_err(lineno, format!("unknown form label '{label}'")))?;
                let lvl = level.ok_or_else(|| parse_err(lineno, "#LEVEL must precede #EIGEN"))?;
                if is_prime_u64(n) && lvl % n != 0 && lambda.abs() > 2.0 + DELIGNE_SLACK {
                    return Err(parse_err(
                        lineno,
                        format!("|lambda({n})| = {} violates the Deligne bound", lambda.abs()),
                    ));
                }
                if forms[fi].eigenvalues.insert(n, lambda).is_some() {
                    return Err(parse_err(lineno, format!("duplicate eigenvalue for ({label}, {n})")));
                }
            }
        }
    }

    let level = level.ok_or_else(|| parse_err(1, "missing #LEVEL"))?;
    let weight = weight.ok_or_else(|| parse_err(1, "missing #WEIGHT"))?;
    if !seen_header_forms {
        return Err(parse_err(1, "missing #FORMS section"));
    }
    Ok(EigenFixture { level, weight, forms })
}

pub fn ingest_fixture_path(path: impl AsRef<Path>) -> Result<EigenFixture> {
    ingest_fixture(std::fs::File::open(path)?)
}

/// Compare the fixture's `sum_f eps_f lambda_f(n)` with the closed trace.
pub fn fixture_crosscheck(
    fixture: &EigenFixture,
    params: &FamilyParams,
    n: u64,
    table: &HurwitzTable,
) -> Result<CrosscheckReport> {
    let level = params.level()?;
    if fixture.level != level {
        return Err(Error::domain(format!(
            "fixture level {} does not match family level {level}",
            fixture.level
        )));
    }
    if fixture.weight != params.weight() {
        return Err(Error::domain(format!(
            "fixture weight {} does not match family weight {}",
            fixture.weight,
            params.weight()
        )));
    }
    let mut data_sum = 0.0f64;
    for form in &fixture.forms {
        let lambda = form.eigenvalues.get(&n).ok_or_else(|| {
            Error::domain(format!("form '{}' has no eigenvalue at n = {n}", form.label))
        })?;
        data_sum += f64::from(form.root_number) * lambda;
    }
    let trace_value = trace_closed(params, n, table)?.normalized;
    Ok(CrosscheckReport { data_sum, trace_value, abs_err: (data_sum - trace_value).abs() })
}
