//! Verdicts, certificates and serde helpers for report fields that may hold
//! `inf` or `NaN`. JSON has no literal for those, so they are written as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

impl Verdict {
    /// HOLDS only if every part holds; FAILS if any part fails.
    pub fn all<I: IntoIterator<Item = Verdict>>(parts: I) -> Verdict {
        let mut out = Verdict::Holds;
        for v in parts {
            match v {
                Verdict::Fails => return Verdict::Fails,
                Verdict::Undecided => out = Verdict::Undecided,
                Verdict::Holds => {}
            }
        }
        out
    }

    /// HOLDS if some part holds; FAILS if every part fails.
    pub fn any<I: IntoIterator<Item = Verdict>>(parts: I) -> Verdict {
        let mut out = Verdict::Fails;
        for v in parts {
            match v {
                Verdict::Holds => return Verdict::Holds,
                Verdict::Undecided => out = Verdict::Undecided,
                Verdict::Fails => {}
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails => "FAILS",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Less,
    #[serde(rename = ">")]
    Greater,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Less => "<",
            Relation::Greater => ">",
        })
    }
}

/// The decisive inequality `lhs (<|>) rhs`, with the signed margin by which it
/// holds and the error budget the margin must beat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(with = "float")]
    pub lhs: f64,
    pub relation: Relation,
    #[serde(with = "float")]
    pub rhs: f64,
    #[serde(with = "float")]
    pub margin: f64,
    #[serde(with = "float")]
    pub budget: f64,
}

impl Certificate {
    pub fn new(lhs: f64, relation: Relation, rhs: f64, budget: f64) -> Self {
        let margin = match relation {
            Relation::Less => rhs - lhs,
            Relation::Greater => lhs - rhs,
        };
        Self {
            lhs,
            relation,
            rhs,
            margin: if margin.is_nan() && lhs == rhs { 0.0 } else { margin },
            budget,
        }
    }

    /// Ties and margins inside the budget are undecided.
    pub fn verdict(&self) -> Verdict {
        let m = self.margin;
        if m.is_nan() || self.lhs.is_nan() || self.rhs.is_nan() || m == 0.0 || m.abs() <= self.budget {
            Verdict::Undecided
        } else if m > 0.0 {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    /// Margin relative to the budget, used to rank alternatives.
    pub fn strength(&self) -> f64 {
        if self.margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            self.margin / self.budget.max(f64::MIN_POSITIVE)
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} {} {:.6} (margin {:.3e}, budget {:.3e})", self.lhs, self.relation, self.rhs, self.margin, self.budget)
    }
}

/// Verdict of one sufficient condition together with what justified it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub condition_id: String,
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    #[serde(with = "float_map")]
    pub inputs: BTreeMap<String, f64>,
    /// True when some quantity was estimated by sampling rather than declared.
    pub sampled: bool,
    pub notes: Vec<String>,
    pub parts: Vec<CriterionReport>,
}

impl CriterionReport {
    pub fn from_certificate(id: impl Into<String>, cert: Certificate, sampled: bool) -> Self {
        Self {
            condition_id: id.into(),
            verdict: cert.verdict(),
            certificate: Some(cert),
            inputs: BTreeMap::new(),
            sampled,
            notes: Vec::new(),
            parts: Vec::new(),
        }
    }

    /// Conjunction of parts; the certificate is that of the weakest part.
    pub fn conjunction(id: impl Into<String>, parts: Vec<CriterionReport>) -> Self {
        let verdict = Verdict::all(parts.iter().map(|p| p.verdict));
        let certificate = parts
            .iter()
            .filter_map(|p| p.certificate)
            .min_by(|a, b| a.strength().total_cmp(&b.strength()));
        Self {
            condition_id: id.into(),
            verdict,
            certificate,
            inputs: BTreeMap::new(),
            sampled: parts.iter().any(|p| p.sampled),
            notes: Vec::new(),
            parts,
        }
    }

    pub fn with_input(mut self, key: impl Into<String>, value: f64) -> Self {
        self.inputs.insert(key.into(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<10} {:<9}", self.condition_id, self.verdict.to_string())?;
        if let Some(c) = &self.certificate {
            write!(f, " {c}")?;
        }
        if self.sampled {
            f.write_str(" [sampled]")?;
        }
        Ok(())
    }
}

fn encode(x: f64) -> FloatRepr {
    if x.is_finite() {
        FloatRepr::Num(x)
    } else if x.is_nan() {
        FloatRepr::Text("nan".into())
    } else if x > 0.0 {
        FloatRepr::Text("inf".into())
    } else {
        FloatRepr::Text("-inf".into())
    }
}

fn decode<E: serde::de::Error>(r: FloatRepr) -> Result<f64, E> {
    match r {
        FloatRepr::Num(x) => Ok(x),
        FloatRepr::Text(s) => match s.as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            "nan" | "NaN" => Ok(f64::NAN),
            other => Err(E::custom(format!("not a number: {other:?}"))),
        },
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FloatRepr {
    Num(f64),
    Text(String),
}

/// `f64` as a JSON number, or a string when not finite.
pub mod float {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        encode(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(FloatRepr::deserialize(d)?)
    }
}

/// `Option<f64>` with the same encoding as [`float`].
pub mod opt_float {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(encode).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<FloatRepr>::deserialize(d)?.map(decode).transpose()
    }
}

/// `Vec<f64>` with the same encoding as [`float`].
pub mod float_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
        x.iter().copied().map(encode).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<FloatRepr>::deserialize(d)?.into_iter().map(decode).collect()
    }
}

/// `BTreeMap<String, f64>` with the same encoding as [`float`].
pub mod float_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        x.iter()
            .map(|(k, v)| (k.clone(), encode(*v)))
            .collect::<BTreeMap<_, _>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, FloatRepr>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| decode(v).map(|x| (k, x)))
            .collect()
    }
}
