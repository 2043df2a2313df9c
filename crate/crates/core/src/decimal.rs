//! Decimal-string encoding of `f64` values.
//!
//! Every number that leaves the library through JSON is written as a string
//! holding the shortest decimal that parses back to the identical `f64`, so
//! files round-trip bit for bit. Magnitudes outside `[1e-5, 1e16)` use
//! exponent notation to keep the strings short.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub fn format(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn parse(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("not a decimal number: {s:?}"))
}

/// Rounds to `digits` significant digits for human-readable output.
pub fn format_human(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let rounded: f64 = s.parse().unwrap_or(x);
    format(rounded)
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format(*x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(D::Error::custom)
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse(s).map_err(D::Error::custom))
            .collect()
    }
}

pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&format(*x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse(&s).map_err(D::Error::custom))
            .transpose()
    }
}

pub mod opt_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        Option::<Vec<String>>::deserialize(d)?
            .map(|v| {
                v.iter()
                    .map(|s| parse(s).map_err(D::Error::custom))
                    .collect()
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_integers_without_fraction() {
        assert_eq!(format(4.0), "4");
        assert_eq!(format(0.3), "0.3");
        assert_eq!(format(4.8), "4.8");
        assert_eq!(format(0.0), "0");
        assert_eq!(format(1e-20), "1e-20");
    }

    #[test]
    fn human_rounds_to_six_digits() {
        assert_eq!(format_human(1.0 / 3.0, 6), "0.333333");
        assert_eq!(format_human(4.800000000000001, 6), "4.8");
    }

    proptest! {
        #[test]
        fn round_trips_bit_exact(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let y = parse(&format(x)).unwrap();
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
