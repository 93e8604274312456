//! Result containers shared by the norm engine, the experiments and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Named norm components and their sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub name: String,
    pub components: Vec<NormComponent>,
    pub total: f64,
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormComponent {
    pub label: String,
    pub value: f64,
}

impl NormReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            components: Vec::new(),
            total: 0.0,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Append a component; the total is kept as the plain sum.
    pub fn push(&mut self, label: impl Into<String>, value: f64) {
        self.components.push(NormComponent {
            label: label.into(),
            value,
        });
        self.total = self.components.iter().map(|c| c.value).sum();
    }

    pub fn with(mut self, label: impl Into<String>, value: f64) -> Self {
        self.push(label, value);
        self
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.components.iter().find(|c| c.label == label).map(|c| c.value)
    }
}

/// Where a reference value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Exponent or value stated by the underlying analysis.
    Literature,
    /// Independent numerical oracle computed by this tool.
    Oracle,
    /// Exact identity or definition.
    Identity,
    /// Measured quantity with no external reference.
    Measurement,
}

/// One pass/fail line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
    pub source: Source,
}

impl Check {
    /// Pass iff `lower ≤ value ≤ upper`.
    pub fn within(name: impl Into<String>, value: f64, lower: f64, upper: f64, source: Source) -> Self {
        Self {
            name: name.into(),
            value,
            target: None,
            lower,
            upper,
            passed: value.is_finite() && value >= lower && value <= upper,
            source,
        }
    }

    pub fn around(name: impl Into<String>, value: f64, target: f64, tol: f64, source: Source) -> Self {
        let mut c = Self::within(name, value, target - tol, target + tol, source);
        c.target = Some(target);
        c
    }

    pub fn at_most(name: impl Into<String>, value: f64, upper: f64, source: Source) -> Self {
        Self::within(name, value, f64::NEG_INFINITY, upper, source)
    }
}

/// Serde adapter for exponents in `[1, ∞]`: `∞` travels as the string `"inf"`
/// since JSON has no infinite numbers.
pub mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => match t.as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got \"{other}\""))),
            },
        }
    }
}

/// Least-squares line through `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

/// A table of rows (column name → value) plus scalars, fits and checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub scalars: BTreeMap<String, f64>,
    pub fits: BTreeMap<String, SlopeFit>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn row(&mut self, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn scalar(&mut self, key: impl Into<String>, value: f64) {
        self.scalars.insert(key.into(), value);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_tracks_components() {
        let r = NormReport::new("x").with("a", 1.5).with("b", 2.0);
        assert_eq!(r.total, 3.5);
        assert_eq!(r.get("b"), Some(2.0));
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("n", f64::NAN, 1.0, Source::Measurement).passed);
        assert!(Check::around("s", 1.05, 1.0, 0.1, Source::Literature).passed);
    }

    #[test]
    fn infinite_exponent_round_trips() {
        #[derive(Serialize, Deserialize)]
        struct E {
            #[serde(with = "extended")]
            q: f64,
        }
        let text = serde_json::to_string(&E { q: f64::INFINITY }).unwrap();
        assert_eq!(text, r#"{"q":"inf"}"#);
        assert!(serde_json::from_str::<E>(&text).unwrap().q.is_infinite());
        assert_eq!(serde_json::from_str::<E>(r#"{"q":6}"#).unwrap().q, 6.0);
    }
}
