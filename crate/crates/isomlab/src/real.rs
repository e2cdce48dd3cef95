//! High-precision serialization helpers for real values.
//!
//! JSON output in this crate writes every real number in scientific notation
//! with 17 significant digits. That exceeds the 15-significant-digit floor the
//! report format promises and is enough for exact `f64` round-trips, so a
//! report can be re-read without losing a single bit. Non-finite values are
//! written as the strings `"inf"`, `"-inf"`, and `"nan"`.

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::Deserialize;

/// Formats a real number with 17 significant digits as a JSON token.
///
/// Finite values become plain JSON numbers (scientific notation); non-finite
/// values become quoted strings since JSON has no literal for them.
pub fn json_token(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "\"nan\"".to_owned()
    } else if x > 0.0 {
        "\"inf\"".to_owned()
    } else {
        "\"-inf\"".to_owned()
    }
}

/// Serde adapter: serialize an `f64` through [`json_token`].
pub fn serialize<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
    let token = json_token(*x);
    let raw = serde_json::value::RawValue::from_string(token)
        .expect("formatted real is always valid JSON");
    serde::Serialize::serialize(&raw, ser)
}

/// Serde adapter: deserialize an `f64` that may be a number or one of the
/// quoted non-finite tokens.
pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumberOrToken {
        Number(f64),
        Token(String),
    }
    match NumberOrToken::deserialize(de)? {
        NumberOrToken::Number(x) => Ok(x),
        NumberOrToken::Token(t) => match t.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!(
                "unrecognised real token {other:?}"
            ))),
        },
    }
}

/// Serde adapter for `Vec<f64>` vectors.
pub mod vector {
    use serde::ser::{SerializeSeq, Serializer};
    use serde::{Deserialize, Deserializer};

    pub fn serialize<S: Serializer>(v: &[f64], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(v.len()))?;
        for &x in v {
            let raw = serde_json::value::RawValue::from_string(super::json_token(x))
                .expect("formatted real is always valid JSON");
            seq.serialize_element(&raw)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(de)
    }
}

/// Serde adapter for `Vec<Vec<f64>>` matrices (row-major).
pub mod matrix {
    use serde::ser::{SerializeSeq, Serializer};
    use serde::{Deserialize, Deserializer};

    struct Row<'a>(&'a [f64]);

    impl serde::Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
            let mut seq = ser.serialize_seq(Some(self.0.len()))?;
            for &x in self.0 {
                let raw = serde_json::value::RawValue::from_string(super::json_token(x))
                    .expect("formatted real is always valid JSON");
                seq.serialize_element(&raw)?;
            }
            seq.end()
        }
    }

    pub fn serialize<S: Serializer>(m: &[Vec<f64>], ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(m.len()))?;
        for row in m {
            seq.serialize_element(&Row(row))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<f64>>::deserialize(de)
    }
}
