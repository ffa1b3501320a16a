//! Machine-readable verdicts shared by every checker in the crate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Report schema tag; bump when the JSON layout changes.
pub const REPORT_SCHEMA: &str = "maxlab/verification-report/v1";

/// Outcome of a single check.
///
/// `ConclusionFailure` on a lemma check means the measured data falsified the
/// lemma's conclusion while its hypotheses held; that outcome is
/// build-blocking and must never occur. `HypothesisFailure` means a stated
/// precondition did not hold, which is an ordinary (often expected) outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    HypothesisFailure,
    ConclusionFailure,
    NumericalQuality,
    InconsistentHypotheses,
    Identical,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Pass => "pass",
            Verdict::HypothesisFailure => "hypothesis-failure",
            Verdict::ConclusionFailure => "conclusion-failure",
            Verdict::NumericalQuality => "numerical-quality",
            Verdict::InconsistentHypotheses => "inconsistent-hypotheses",
            Verdict::Identical => "identical",
        };
        f.write_str(s)
    }
}

/// One checker outcome: verdict, named residuals, witness data and the
/// parameters that produced it. Field order and `BTreeMap` keys make the
/// serialized form byte-stable for a fixed input and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub check: String,
    pub verdict: Verdict,
    pub residuals: BTreeMap<String, f64>,
    pub witness: serde_json::Value,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, verdict: Verdict) -> Self {
        VerificationReport {
            schema: REPORT_SCHEMA.to_string(),
            check: check.into(),
            verdict,
            residuals: BTreeMap::new(),
            witness: serde_json::Value::Null,
            params: serde_json::Value::Null,
            seed: None,
        }
    }

    pub fn pass(check: impl Into<String>) -> Self {
        Self::new(check, Verdict::Pass)
    }

    pub fn with_residual(mut self, name: impl Into<String>, value: f64) -> Self {
        self.residuals.insert(name.into(), value);
        self
    }

    pub fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Render as a stable, pretty-printed JSON string.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_serializes_kebab_case() {
        let v = serde_json::to_string(&Verdict::HypothesisFailure).unwrap();
        assert_eq!(v, "\"hypothesis-failure\"");
        let v = serde_json::to_string(&Verdict::InconsistentHypotheses).unwrap();
        assert_eq!(v, "\"inconsistent-hypotheses\"");
    }

    #[test]
    fn report_json_is_stable() {
        let mk = || {
            VerificationReport::pass("demo")
                .with_residual("b", 2.0)
                .with_residual("a", 1.0)
                .with_seed(7)
        };
        assert_eq!(mk().to_json(), mk().to_json());
    }
}
