//! Check records and the certification report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ConstantsConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    Constant,
    Exponent,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertRecord {
    pub name: String,
    #[serde(with = "extended")]
    pub lhs: f64,
    #[serde(with = "extended")]
    pub rhs: f64,
    #[serde(with = "extended")]
    pub ratio: f64,
    pub slack: f64,
    pub pass: bool,
    pub fit_kind: FitKind,
    #[serde(with = "extended")]
    pub fitted: f64,
    pub inputs_hash: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

/// JSON numbers, with non-finite values written as the strings `inf`, `-inf`, `nan`.
mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse::<f64>().map_err(serde::de::Error::custom),
        }
    }
}

/// `lhs / rhs`, with `0 / 0 = 0`.
pub fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Hex SHA-256 of the JSON encoding of `inputs`.
pub fn hash_inputs<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).unwrap_or_default();
    let digest = Sha256::digest(&bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl CertRecord {
    /// Inequality record `lhs <= rhs (1 + slack)`.
    pub fn inequality<T: Serialize + ?Sized>(name: &str, lhs: f64, rhs: f64, slack: f64, inputs: &T) -> Self {
        let ratio = ratio_of(lhs, rhs);
        CertRecord {
            name: name.to_string(),
            lhs,
            rhs,
            ratio,
            slack,
            pass: lhs <= rhs + slack * rhs.abs(),
            fit_kind: FitKind::None,
            fitted: f64::NAN,
            inputs_hash: hash_inputs(inputs),
            details: BTreeMap::new(),
        }
    }

    pub fn with_fit(mut self, kind: FitKind, value: f64) -> Self {
        self.fit_kind = kind;
        self.fitted = value;
        self
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub schema_version: u32,
    pub config: ConstantsConfig,
    pub metadata: BTreeMap<String, String>,
    pub records: Vec<CertRecord>,
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl CertReport {
    pub fn new(config: &ConstantsConfig) -> Self {
        CertReport { schema_version: SCHEMA_VERSION, config: config.clone(), metadata: BTreeMap::new(), records: Vec::new() }
    }

    pub fn push(&mut self, record: CertRecord) {
        self.records.push(record);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&CertRecord> {
        self.records.iter().filter(|r| !r.pass).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per check, preceded by a `#` comment line with the schema version.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# schema_version={}\n", self.schema_version);
        s.push_str("name,lhs,rhs,ratio,slack,pass,fit_kind,fitted,inputs_hash\n");
        for r in &self.records {
            let kind = match r.fit_kind {
                FitKind::Constant => "constant",
                FitKind::Exponent => "exponent",
                FitKind::None => "none",
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.name,
                num(r.lhs),
                num(r.rhs),
                num(r.ratio),
                num(r.slack),
                r.pass,
                kind,
                num(r.fitted),
                r.inputs_hash
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_follows_ratio_and_slack() {
        let r = CertRecord::inequality("a", 1.04, 1.0, 0.05, &1);
        assert!(r.pass);
        let r = CertRecord::inequality("a", 1.06, 1.0, 0.05, &1);
        assert!(!r.pass);
        assert_eq!(ratio_of(0.0, 0.0), 0.0);
        assert!(ratio_of(1.0, 0.0).is_infinite());
    }

    #[test]
    fn report_round_trip_and_csv() {
        let mut rep = CertReport::new(&ConstantsConfig::default());
        rep.push(CertRecord::inequality("x", 0.5, 1.0, 0.0, &[1.0, 2.0]).with_fit(FitKind::Constant, 0.5));
        let back = CertReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back.records[0].lhs, 0.5);
        assert_eq!(back.records[0].inputs_hash, rep.records[0].inputs_hash);
        let csv = rep.to_csv();
        assert!(csv.starts_with("# schema_version=1\nname,"));
        assert_eq!(rep.records[0].inputs_hash.len(), 64);
        rep.push(CertRecord::inequality("y", 1.0, 0.0, 0.0, &0));
        let back = CertReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert!(back.records[1].ratio.is_infinite() && back.records[1].fitted.is_nan());
    }
}
