//! Extended-real exponents.
//!
//! Integrability exponents live in `[1, ∞]`. JSON has no infinity, so
//! infinite values serialize as the string `"inf"`.

use crate::error::{Error, Result};

/// Parses `"inf"`, `"infinity"` or a finite decimal.
pub fn parse_ext(s: &str) -> Result<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        _ => t
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("cannot parse exponent '{s}'"))),
    }
}

pub mod ext_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    struct ExtVisitor;

    impl Visitor<'_> for ExtVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            super::parse_ext(v).map_err(E::custom)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtVisitor)
    }
}

pub mod opt_ext_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::ext_f64")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct P {
        #[serde(with = "ext_f64")]
        p: f64,
    }

    #[test]
    fn infinity_round_trips_as_string() {
        let s = serde_json::to_string(&P { p: f64::INFINITY }).unwrap();
        assert_eq!(s, r#"{"p":"inf"}"#);
        assert_eq!(serde_json::from_str::<P>(&s).unwrap().p, f64::INFINITY);
        assert_eq!(serde_json::from_str::<P>(r#"{"p":2}"#).unwrap().p, 2.0);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_ext("two").is_err());
        assert_eq!(parse_ext("Inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_ext("2.5").unwrap(), 2.5);
    }
}
