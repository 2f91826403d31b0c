//! Reading `--input`: a file path, `-` for stdin, or an inline payload.

use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use polyflow_core::{NormalizedPolynomial, RootSet};

use crate::error::{CliError, CliResult};

/// Raw text of the input plus whether it should be read as JSON.
pub struct Payload {
    pub text: String,
    pub json: bool,
}

pub fn read_payload(input: Option<&str>) -> CliResult<Payload> {
    let text = match input {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
        Some(arg) if looks_inline(arg) => arg.to_string(),
        Some(path) => std::fs::read_to_string(Path::new(path))
            .map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?,
    };
    let trimmed = text.trim_start();
    let json = trimmed.starts_with('[') || trimmed.starts_with('{');
    Ok(Payload { text, json })
}

fn looks_inline(arg: &str) -> bool {
    let t = arg.trim_start();
    t.starts_with('[') || t.starts_with('{') || (t.contains(',') && !Path::new(arg).exists())
}

/// One polynomial as supplied by the user.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PolySpec {
    Monic(Vec<f64>),
    Roots { roots: Vec<f64> },
    MonicObject { monic: Vec<f64> },
    Normalized(NormalizedPolynomial),
}

impl PolySpec {
    fn build(self) -> CliResult<NormalizedPolynomial> {
        Ok(match self {
            Self::Monic(c) | Self::MonicObject { monic: c } => NormalizedPolynomial::from_monic(&c)?,
            Self::Roots { roots } => NormalizedPolynomial::from_roots(&RootSet::new(roots)?)?,
            Self::Normalized(p) => p,
        })
    }
}

/// Parsed polynomials; `batch` is false for a single top-level polynomial.
pub struct PolyBatch {
    pub items: Vec<CliResult<NormalizedPolynomial>>,
    pub batch: bool,
}

/// Accepts monic coefficient arrays, `{"roots": [...]}`, `{"monic": [...]}`,
/// `{"degree", "p", "psq"}` objects, arrays of those, or CSV records
/// `degree,P1,…,P{n-1},psq` one per line.
pub fn parse_polynomials(payload: &Payload) -> CliResult<PolyBatch> {
    if !payload.json {
        let items: Vec<_> = payload
            .text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<NormalizedPolynomial>().map_err(CliError::from))
            .collect();
        if items.is_empty() {
            return Err(CliError::Schema("no polynomial records in input".into()));
        }
        let batch = items.len() > 1;
        return Ok(PolyBatch { items, batch });
    }

    let value: Value = serde_json::from_str(&payload.text)?;
    let is_batch = match &value {
        Value::Array(items) => items.first().is_some_and(|v| v.is_array() || v.is_object()),
        _ => false,
    };
    let specs: Vec<Value> = if is_batch {
        match value {
            Value::Array(items) => items,
            _ => unreachable!(),
        }
    } else {
        vec![value]
    };
    let items = specs
        .into_iter()
        .map(|v| {
            serde_json::from_value::<PolySpec>(v)
                .map_err(|e| CliError::Schema(format!("unrecognised polynomial: {e}")))
                .and_then(PolySpec::build)
        })
        .collect();
    Ok(PolyBatch {
        items,
        batch: is_batch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn json(s: &str) -> Payload {
        Payload {
            text: s.into(),
            json: true,
        }
    }

    #[test]
    fn accepted_shapes() {
        let b = parse_polynomials(&json("[1, -6, 11, -6]")).unwrap();
        assert!(!b.batch);
        assert_eq!(b.items[0].as_ref().unwrap().degree(), 3);

        let b = parse_polynomials(&json(r#"[{"roots": [1, 2]}, [1, 0, -1], {"monic": [1, -3, 2]}]"#)).unwrap();
        assert!(b.batch);
        assert_eq!(b.items.len(), 3);
        assert!(b.items.iter().all(Result::is_ok));

        let p = NormalizedPolynomial::from_monic(&[1.0, -3.0, 2.0]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let b = parse_polynomials(&json(&text)).unwrap();
        assert_eq!(b.items[0].as_ref().unwrap(), &p);
    }

    #[test]
    fn csv_records() {
        let payload = Payload {
            text: "3,2,5.5,6\n# comment\n2,1.5,2\n".into(),
            json: false,
        };
        let b = parse_polynomials(&payload).unwrap();
        assert!(b.batch);
        assert_eq!(b.items.len(), 2);
    }

    #[test]
    fn rejects_non_monic() {
        let b = parse_polynomials(&json("[2, 1, 1]")).unwrap();
        assert!(matches!(b.items[0], Err(CliError::Schema(_))));
        assert!(parse_polynomials(&json("[1, 2")).is_err());
    }
}
