//! Polynomial input: JSON `{"coefficients": [[re, im], ...]}` or whitespace
//! separated real coefficients, both in descending order.

use std::fmt;

use hroots::{Polynomial, DEFAULT_PRECISION};
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub enum InputError {
    /// Malformed text; `line` and `column` are 1-based.
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Polynomial(hroots::Error),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Parse {
                line,
                column,
                message,
            } => write!(f, "{line}:{column}: {message}"),
            InputError::Polynomial(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPoly {
    coefficients: Vec<[f64; 2]>,
}

/// Parses `text` into a polynomial at [`DEFAULT_PRECISION`] bits.
pub fn parse_input(text: &str) -> Result<Polynomial, InputError> {
    parse_input_with_precision(text, DEFAULT_PRECISION)
}

pub fn parse_input_with_precision(text: &str, prec: usize) -> Result<Polynomial, InputError> {
    let coeffs = if text.trim_start().starts_with('{') {
        parse_json(text)?
    } else {
        parse_plain(text)?
    };
    Polynomial::from_c64(&coeffs, prec).map_err(InputError::Polynomial)
}

fn parse_json(text: &str) -> Result<Vec<Complex64>, InputError> {
    let p: JsonPoly = serde_json::from_str(text).map_err(|e| InputError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(p.coefficients
        .iter()
        .map(|c| Complex64::new(c[0], c[1]))
        .collect())
}

fn parse_plain(text: &str) -> Result<Vec<Complex64>, InputError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_body = line.split('#').next().unwrap_or("");
        let mut col = 0;
        for tok in line_body.split(|c: char| c.is_whitespace() || c == ',') {
            if !tok.is_empty() {
                let start = line[col..].find(tok).map_or(col, |o| col + o);
                let value: f64 = tok.parse().map_err(|_| InputError::Parse {
                    line: i + 1,
                    column: start + 1,
                    message: format!("`{tok}` is not a number"),
                })?;
                if !value.is_finite() {
                    return Err(InputError::Parse {
                        line: i + 1,
                        column: start + 1,
                        message: format!("`{tok}` is not finite"),
                    });
                }
                out.push(Complex64::new(value, 0.0));
                col = start + tok.len();
            }
        }
    }
    Ok(out)
}
