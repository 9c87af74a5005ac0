//! Verification reports shared by every sweep.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max: f64,
    pub pass: bool,
}

/// Outcome of a sampled verification.
///
/// `max_residual` is the largest raw residual over the accepted points and
/// `worst_point` is where it occurred; `checks` carry the per-check maxima
/// on the scale their tolerance applies to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub params: BTreeMap<String, Value>,
    pub accepted: usize,
    pub rejected: usize,
    pub max_residual: f64,
    pub max_relative: f64,
    pub worst_point: Option<Vec<f64>>,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
    pub wall_ms: f64,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            params: BTreeMap::new(),
            accepted: 0,
            rejected: 0,
            max_residual: 0.0,
            max_relative: 0.0,
            worst_point: None,
            checks: Vec::new(),
            pass: true,
            wall_ms: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Records one accepted sample.
    pub fn observe(&mut self, point: &[f64], residual: f64, relative: f64) {
        self.accepted += 1;
        // a NaN maximum is sticky so that it fails every tolerance test
        if !self.max_residual.is_nan()
            && (residual.is_nan() || residual > self.max_residual || self.worst_point.is_none())
        {
            self.max_residual = residual;
            self.worst_point = Some(point.to_vec());
        }
        if !self.max_relative.is_nan() && (relative.is_nan() || relative > self.max_relative) {
            self.max_relative = relative;
        }
    }

    pub fn push_check(&mut self, name: impl Into<String>, max: f64, pass: bool) {
        self.checks.push(CheckResult {
            name: name.into(),
            max,
            pass,
        });
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    /// Combines several reports into one whose checks are the union.
    ///
    /// The parts are expected to sweep the same sample, so the counts are
    /// the largest per-part counts rather than sums.
    pub fn merge(subject: impl Into<String>, parts: Vec<VerificationReport>) -> Self {
        let mut out = Self::new(subject);
        for part in parts {
            out.accepted = out.accepted.max(part.accepted);
            out.rejected = out.rejected.max(part.rejected);
            if part.max_residual > out.max_residual || out.worst_point.is_none() {
                out.max_residual = part.max_residual;
                out.worst_point = part.worst_point.clone();
            }
            out.max_relative = out.max_relative.max(part.max_relative);
            for (k, v) in part.params {
                out.params.entry(k).or_insert(v);
            }
            out.checks.extend(part.checks);
            out.wall_ms += part.wall_ms;
        }
        out.pass = out.checks.iter().all(|c| c.pass);
        out
    }
}
