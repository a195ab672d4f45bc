//! Big integers travel through JSON as decimal strings.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub mod natural {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::from_str(&s).map_err(D::Error::custom)
    }
}

fn serialize_seq<T: ToString, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for n in v {
        seq.serialize_element(&n.to_string())?;
    }
    seq.end()
}

fn deserialize_seq<'de, T, D>(d: D) -> Result<Vec<T>, D::Error>
where
    T: FromStr,
    T::Err: std::fmt::Display,
    D: Deserializer<'de>,
{
    let v = Vec::<String>::deserialize(d)?;
    v.iter()
        .map(|s| T::from_str(s).map_err(D::Error::custom))
        .collect()
}

pub mod integers {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        serialize_seq(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        deserialize_seq(d)
    }
}

pub mod rationals {
    use super::*;
    use num_rational::BigRational;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        serialize_seq(v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        deserialize_seq(d)
    }
}

pub mod pairs {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[(BigUint, u32)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (p, e) in v {
            seq.serialize_element(&(p.to_string(), *e))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(BigUint, u32)>, D::Error> {
        let v = Vec::<(String, u32)>::deserialize(d)?;
        v.into_iter()
            .map(|(p, e)| Ok((BigUint::from_str(&p).map_err(D::Error::custom)?, e)))
            .collect()
    }
}

pub mod rational {
    use super::*;
    use num_rational::BigRational;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        BigRational::from_str(&s).map_err(D::Error::custom)
    }
}
