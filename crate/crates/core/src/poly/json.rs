//! On-disk polynomial format:
//! `{"dim":N,"terms":[{"alpha":[a1,...,aN],"coef":c},...]}`.
//!
//! Writers emit terms in graded order; readers accept any order but reject
//! duplicate exponents, zero or non-finite coefficients, and wrong lengths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MultiIndex, Polynomial};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub alpha: Vec<u32>,
    pub coef: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolynomialFile {
    pub dim: usize,
    pub terms: Vec<TermFile>,
}

impl From<&Polynomial> for PolynomialFile {
    fn from(p: &Polynomial) -> Self {
        PolynomialFile {
            dim: p.dim(),
            terms: p
                .terms()
                .map(|(a, c)| TermFile {
                    alpha: a.entries().to_vec(),
                    coef: c,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialFile> for Polynomial {
    type Error = Error;

    fn try_from(file: PolynomialFile) -> Result<Polynomial> {
        if file.dim == 0 {
            return Err(Error::Parse("dim must be at least 1".into()));
        }
        let mut seen: BTreeMap<MultiIndex, usize> = BTreeMap::new();
        for (i, t) in file.terms.iter().enumerate() {
            if t.alpha.len() != file.dim {
                return Err(Error::Parse(format!(
                    "term {i}: alpha has length {} but dim is {}",
                    t.alpha.len(),
                    file.dim
                )));
            }
            if t.coef == 0.0 {
                return Err(Error::Parse(format!("term {i}: zero coefficient")));
            }
            if !t.coef.is_finite() {
                return Err(Error::Parse(format!("term {i}: non-finite coefficient")));
            }
            let alpha = MultiIndex::new(t.alpha.clone());
            if let Some(first) = seen.insert(alpha.clone(), i) {
                return Err(Error::Parse(format!(
                    "term {i}: duplicate alpha {alpha} (first seen at term {first})"
                )));
            }
        }
        Polynomial::from_terms(
            file.dim,
            file.terms
                .into_iter()
                .map(|t| (MultiIndex::new(t.alpha), t.coef)),
        )
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = PolynomialFile::deserialize(d)?;
        Polynomial::try_from(file).map_err(serde::de::Error::custom)
    }
}

pub fn to_json_string(p: &Polynomial) -> String {
    serde_json::to_string(&PolynomialFile::from(p)).expect("polynomial serializes")
}

pub fn from_json_str(s: &str) -> Result<Polynomial> {
    let file: PolynomialFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    Polynomial::try_from(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_sorted_compact_form() {
        let p = from_json_str(
            r#"{"dim":2,"terms":[{"alpha":[1,1],"coef":1},{"alpha":[0,0],"coef":3},{"alpha":[1,0],"coef":-2}]}"#,
        )
        .unwrap();
        assert_eq!(
            to_json_string(&p),
            r#"{"dim":2,"terms":[{"alpha":[0,0],"coef":3.0},{"alpha":[1,0],"coef":-2.0},{"alpha":[1,1],"coef":1.0}]}"#
        );
    }

    #[test]
    fn rejects_duplicates_with_position() {
        let err = from_json_str(
            r#"{"dim":1,"terms":[{"alpha":[2],"coef":1},{"alpha":[1],"coef":1},{"alpha":[2],"coef":5}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("term 2") && msg.contains("[2]") && msg.contains("term 0"), "{msg}");
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(from_json_str(r#"{"dim":2,"terms":[{"alpha":[1],"coef":1}]}"#).is_err());
        assert!(from_json_str(r#"{"dim":1,"terms":[{"alpha":[1],"coef":0}]}"#).is_err());
        assert!(from_json_str(r#"{"dim":0,"terms":[]}"#).is_err());
        assert!(from_json_str(r#"{"dim":1,"terms":[],"extra":1}"#).is_err());
    }

    #[test]
    fn empty_terms_is_zero() {
        let p = from_json_str(r#"{"dim":3,"terms":[]}"#).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.dim(), 3);
    }
}
