//! Bit-exact text encoding of binary64 values as 16 hex digits of their IEEE-754 bits.

use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub fn encode(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

pub fn decode(s: &str) -> Result<f64> {
    let digits = s.trim_start_matches("0x");
    u64::from_str_radix(digits, 16)
        .map(f64::from_bits)
        .map_err(|_| Error::Format(format!("`{s}` is not a hex-encoded binary64")))
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&encode(*v))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    decode(&s).map_err(serde::de::Error::custom)
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&encode(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter().map(|s| decode(s).map_err(serde::de::Error::custom)).collect()
    }
}
