//! Complex numbers in files and on the command line: `[re, im]` pairs, plain
//! numbers, or strings such as `"2"`, `"1.5-0.5i"`, `"-i"`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use ybx_core::Complex64;

use crate::error::YbxError;

/// Parses `a`, `bi`, `a+bi` or `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<Complex64, YbxError> {
    let err = || YbxError::Complex(s.to_string());
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(err());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| err())?,
    };
    let re = re.parse::<f64>().map_err(|_| err())?;
    Ok(Complex64::new(re, im))
}

/// Reads one complex value from JSON.
pub fn complex_from_json(v: &Value) -> Result<Complex64, YbxError> {
    let z = match v {
        Value::Number(n) => Complex64::new(n.as_f64().ok_or_else(|| YbxError::Complex(n.to_string()))?, 0.0),
        Value::String(s) => parse_complex(s)?,
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) => Complex64::new(re, im),
            _ => return Err(YbxError::Complex(v.to_string())),
        },
        _ => return Err(YbxError::Complex(v.to_string())),
    };
    Ok(z)
}

pub fn complex_to_json(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

/// Serde wrapper writing `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C(pub Complex64);

impl Serialize for C {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for C {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        complex_from_json(&v).map(C).map_err(D::Error::custom)
    }
}
