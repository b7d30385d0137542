//! Result records shared by every inequality check and by the falsification
//! engine. Serialization is plain serde_json over structs, so field order and
//! float formatting are stable: identical inputs produce byte-identical
//! reports no matter how many worker threads ran.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Outcome of a single inequality check.
///
/// `margin` is the distance to violation (most negative eigenvalue slack or
/// scalar slack, depending on the check); `passed` holds exactly when
/// `margin >= -tol`. `witness` carries the serialized inputs when and only
/// when the check failed. `notes` flags documented oddities (for example the
/// two readings of the direct-sum counterexample) and is omitted from JSON
/// when empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub inputs_digest: String,
    pub margin: f64,
    pub passed: bool,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl CheckReport {
    /// Builds a report from a margin; attaches `witness_inputs` on failure.
    pub fn from_margin(
        check_id: &str,
        inputs_digest: String,
        margin: f64,
        tol: f64,
        witness_inputs: impl FnOnce() -> serde_json::Value,
    ) -> Self {
        let passed = margin >= -tol;
        Self {
            check_id: check_id.to_string(),
            inputs_digest,
            margin,
            passed,
            tol,
            witness: if passed { None } else { Some(witness_inputs()) },
            notes: None,
        }
    }

    pub fn with_notes(mut self, notes: String) -> Self {
        self.notes = Some(notes);
        self
    }
}

/// One falsification hit: the failing trial, its margin, and the inputs that
/// produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub margin: f64,
    pub trial: u64,
    pub witness: serde_json::Value,
}

/// Aggregate of a falsification run.
///
/// `violations` are sorted by `(margin, trial)` ascending — worst first —
/// and `best_margin` is the smallest margin seen over *all* trials, failing
/// or not, so a clean run still reports how close the search came.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsificationResult {
    pub check_id: String,
    pub trials: u64,
    pub violations: Vec<Violation>,
    pub best_margin: f64,
}

impl FalsificationResult {
    pub fn found_violation(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Short hex digest of any serializable input bundle. Used to key reports to
/// the exact inputs (and seed) that produced them.
pub fn digest(value: &impl Serialize) -> String {
    let json = serde_json::to_string(value).expect("digest inputs must serialize");
    let hash = Sha256::digest(json.as_bytes());
    hex::encode(&hash[..8])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_invariants() {
        let r = CheckReport::from_margin("demo", "abc".into(), 0.5, 1e-9, || {
            serde_json::json!({"x": 1})
        });
        assert!(r.passed && r.witness.is_none());
        let r = CheckReport::from_margin("demo", "abc".into(), -0.5, 1e-9, || {
            serde_json::json!({"x": 1})
        });
        assert!(!r.passed && r.witness.is_some());
        // Boundary: margin exactly at -tol passes.
        let r = CheckReport::from_margin("demo", "abc".into(), -1e-9, 1e-9, || {
            serde_json::json!({})
        });
        assert!(r.passed);
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let a = serde_json::json!({"n": 1, "data": [[1.0, 0.0]]});
        let b = serde_json::json!({"n": 1, "data": [[1.0, 1e-300]]});
        assert_eq!(digest(&a), digest(&a));
        assert_ne!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 16);
    }

    #[test]
    fn notes_omitted_when_absent() {
        let r = CheckReport::from_margin("demo", "abc".into(), 0.5, 1e-9, || {
            serde_json::json!({})
        });
        let s = serde_json::to_string(&r).unwrap();
        assert!(!s.contains("notes") && !s.contains("witness"));
        let s = serde_json::to_string(&r.with_notes("flag".into())).unwrap();
        assert!(s.contains("\"notes\":\"flag\""));
    }
}
