//! Machine-readable outcomes of identity checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex scalar serialized as a {re, im} pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CxPair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for CxPair {
    fn from(v: Complex64) -> Self {
        Self { re: v.re, im: v.im }
    }
}

impl From<CxPair> for Complex64 {
    fn from(v: CxPair) -> Self {
        Complex64::new(v.re, v.im)
    }
}

/// Residual assigned to a check that errored outright: finite, and far above
/// any sensible tolerance, so `passed == (max_residual < tolerance)` holds.
pub const ERROR_RESIDUAL: f64 = f64::MAX;

/// Outcome of one identity check.
///
/// Invariant: `passed` if and only if `max_residual < tolerance`. Skipped
/// grid points and auxiliary findings go into `notes`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub family: String,
    pub params: BTreeMap<String, CxPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(
        check_id: impl Into<String>,
        family: impl Into<String>,
        params: BTreeMap<String, CxPair>,
        max_residual: f64,
        tolerance: f64,
    ) -> Self {
        let max_residual = if max_residual.is_finite() { max_residual } else { ERROR_RESIDUAL };
        Self {
            check_id: check_id.into(),
            family: family.into(),
            params,
            n: None,
            m: None,
            max_residual,
            tolerance,
            passed: max_residual < tolerance,
            notes: Vec::new(),
        }
    }

    /// Report for a check that could not run at all.
    pub fn errored(
        check_id: impl Into<String>,
        family: impl Into<String>,
        params: BTreeMap<String, CxPair>,
        tolerance: f64,
        message: impl Into<String>,
    ) -> Self {
        let mut r = Self::new(check_id, family, params, ERROR_RESIDUAL, tolerance);
        r.notes.push(format!("error: {}", message.into()));
        r
    }

    pub fn with_n(mut self, n: i64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_m(mut self, m: i64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn push_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

/// Sort key giving the deterministic aggregation order.
pub fn sort_reports(reports: &mut [CheckReport]) {
    reports.sort_by(|a, b| {
        (a.check_id.as_str(), a.family.as_str(), a.n, a.m)
            .cmp(&(b.check_id.as_str(), b.family.as_str(), b.n, b.m))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_tracks_residual() {
        let r = CheckReport::new("x", "f", BTreeMap::new(), 1e-9, 1e-8);
        assert!(r.passed);
        let r = CheckReport::new("x", "f", BTreeMap::new(), 1e-7, 1e-8);
        assert!(!r.passed);
        let r = CheckReport::new("x", "f", BTreeMap::new(), f64::NAN, 1e-8);
        assert!(!r.passed);
        assert!(r.max_residual.is_finite());
    }

    #[test]
    fn json_round_trip() {
        let mut params = BTreeMap::new();
        params.insert("a".to_string(), CxPair::from(Complex64::new(0.5, -0.25)));
        let r = CheckReport::new("pearson", "askey-wilson", params, 1e-12, 1e-10)
            .with_n(3)
            .with_note("ok");
        let s = serde_json::to_string(&r).unwrap();
        let back: CheckReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.check_id, "pearson");
        assert_eq!(back.n, Some(3));
        assert_eq!(back.params["a"].re, 0.5);
    }
}
