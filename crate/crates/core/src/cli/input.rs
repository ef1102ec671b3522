use num_complex::Complex64;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::plant::{Plant, PlantError};
use crate::poly::RealPolynomial;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("malformed JSON at line {line}, column {column}: {source}")]
    Syntax {
        line: usize,
        column: usize,
        source: serde_json::Error,
    },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("invalid plant: {0}")]
    Plant(#[from] PlantError),
}

fn field_error(field: &str, message: impl Into<String>) -> InputError {
    InputError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Reads a plant from either `{alpha, delay, zeros, poles}` (roots as
/// `[re, im]` pairs) or `{num, den, delay}` (ascending coefficients).
pub fn parse_input(bytes: &[u8]) -> Result<Plant, InputError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| InputError::Syntax {
        line: e.line(),
        column: e.column(),
        source: e,
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| field_error("document", "expected a JSON object"))?;

    let delay = number(obj, "delay")?;
    if delay <= 0.0 {
        return Err(field_error("delay", format!("delay must be positive (got {delay})")));
    }

    if obj.contains_key("num") || obj.contains_key("den") {
        for key in ["alpha", "zeros", "poles"] {
            if obj.contains_key(key) {
                return Err(field_error(key, "cannot be combined with num/den"));
            }
        }
        let num = RealPolynomial::new(numbers(obj, "num")?);
        let den = RealPolynomial::new(numbers(obj, "den")?);
        if num.is_zero() {
            return Err(field_error("num", "numerator must be nonzero"));
        }
        if den.is_zero() {
            return Err(field_error("den", "denominator must be nonzero"));
        }
        return Ok(Plant::from_coefficients(&num, &den, delay)?);
    }

    let alpha = number(obj, "alpha")?;
    if alpha == 0.0 {
        return Err(field_error("alpha", "gain must be nonzero"));
    }
    let zeros = roots(obj, "zeros")?;
    let poles = roots(obj, "poles")?;
    Plant::new(alpha, delay, zeros, poles).map_err(|e| match e {
        PlantError::NotConjugateClosed { kind, value } => field_error(
            &format!("{kind}s"),
            format!("{value} has no complex-conjugate partner"),
        ),
        other => other.into(),
    })
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64, InputError> {
    let v = obj.get(key).ok_or_else(|| field_error(key, "missing"))?;
    let x = v
        .as_f64()
        .ok_or_else(|| field_error(key, format!("expected a number, found {v}")))?;
    if !x.is_finite() {
        return Err(field_error(key, "must be finite"));
    }
    Ok(x)
}

fn numbers(obj: &Map<String, Value>, key: &str) -> Result<Vec<f64>, InputError> {
    let arr = obj
        .get(key)
        .ok_or_else(|| field_error(key, "missing"))?
        .as_array()
        .ok_or_else(|| field_error(key, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| field_error(&format!("{key}[{i}]"), format!("expected a finite number, found {v}")))
        })
        .collect()
}

fn roots(obj: &Map<String, Value>, key: &str) -> Result<Vec<Complex64>, InputError> {
    let Some(v) = obj.get(key) else {
        return Ok(Vec::new());
    };
    let arr = v
        .as_array()
        .ok_or_else(|| field_error(key, "expected an array of [re, im] pairs"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            let at = format!("{key}[{i}]");
            match v.as_array().map(Vec::as_slice) {
                Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                    (Some(re), Some(im)) if re.is_finite() && im.is_finite() => Ok(Complex64::new(re, im)),
                    _ => Err(field_error(&at, "components must be finite numbers")),
                },
                _ => Err(field_error(&at, format!("expected [re, im], found {v}"))),
            }
        })
        .collect()
}
