//! End-to-end search requests and responses.
//!
//! Both are plain serde types with stable field names. A response repeats the
//! request fields (`n`, `b`, `a`, `mode`, `shots`, `seed`), so a saved
//! response can be fed back as a request.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{run, Mode, QarnProblem, DEFAULT_STATE_CAP};
use crate::error::{invalid, Result};
use crate::measurement::{decide, index_distribution, sample, SUM_TOLERANCE};
use crate::oracle::classical_nearest;

/// Seed used when shots are requested without one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub n: u32,
    pub b: u64,
    pub a: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SearchRequest {
    pub fn problem(&self, state_cap: u128) -> Result<QarnProblem> {
        if self.shots == Some(0) {
            return invalid("shots must be at least 1");
        }
        QarnProblem::with_state_cap(
            self.n,
            self.a.clone(),
            self.b,
            self.mode.unwrap_or(Mode::Generalized),
            state_cap,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearestSummary {
    pub index: usize,
    pub distance: u64,
    pub tied: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub n: u32,
    pub b: u64,
    pub a: Vec<u64>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub probabilities: Vec<f64>,
    pub argmax: usize,
    pub is_tie: bool,
    pub classical_nearest: NearestSummary,
    pub agreement: bool,
    pub postselect_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<usize, u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl SearchResponse {
    /// The request this response answers.
    pub fn request(&self) -> SearchRequest {
        SearchRequest {
            n: self.n,
            b: self.b,
            a: self.a.clone(),
            mode: Some(self.mode),
            shots: self.shots,
            seed: self.seed,
        }
    }
}

pub fn execute(request: &SearchRequest) -> Result<SearchResponse> {
    execute_with_cap(request, DEFAULT_STATE_CAP)
}

pub fn execute_with_cap(request: &SearchRequest, state_cap: u128) -> Result<SearchResponse> {
    let problem = request.problem(state_cap)?;
    let dist = index_distribution(&run(&problem)?, &problem)?;
    debug_assert!((dist.probabilities.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE);
    let decision = decide(&dist);
    let oracle = classical_nearest(problem.a(), problem.b())?.with_decision(decision.index);
    let sampled = request
        .shots
        .map(|shots| sample(&dist, shots, request.seed.unwrap_or(DEFAULT_SEED)))
        .transpose()?;
    Ok(SearchResponse {
        n: request.n,
        b: request.b,
        a: request.a.clone(),
        mode: problem.mode(),
        shots: request.shots,
        seed: request.seed,
        probabilities: dist.probabilities,
        argmax: decision.index,
        is_tie: decision.is_tie,
        agreement: oracle.agreement == Some(true),
        classical_nearest: NearestSummary {
            index: oracle.nearest_index,
            distance: oracle.distance,
            tied: oracle.tied_indices,
        },
        postselect_probability: dist.postselect_probability,
        counts: sampled.as_ref().map(|s| s.counts.clone()),
        rejected: sampled.map(|s| s.rejected),
        elapsed_ms: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(a: Vec<u64>, mode: Option<Mode>) -> SearchRequest {
        SearchRequest {
            n: 3,
            b: 5,
            a,
            mode,
            shots: None,
            seed: None,
        }
    }

    #[test]
    fn paper_request() {
        let r = execute(&request(vec![2, 6], Some(Mode::PaperExact))).unwrap();
        assert_eq!(r.argmax, 1);
        assert!(r.agreement);
        assert!((r.probabilities[0] - 0.3647).abs() < 5e-5);
        assert_eq!(r.classical_nearest.index, 1);
        assert!(r.counts.is_none());
    }

    #[test]
    fn defaults_to_generalized() {
        let r = execute(&request(vec![5], None)).unwrap();
        assert_eq!(r.mode, Mode::Generalized);
        assert_eq!(r.argmax, 0);
        assert!((r.probabilities[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shots_are_counted() {
        let mut req = request(vec![2, 6, 5, 0], None);
        req.shots = Some(1000);
        req.seed = Some(42);
        let r = execute(&req).unwrap();
        assert_eq!(r.counts.as_ref().unwrap().values().sum::<u64>(), 1000);
        assert!(r.rejected.is_some());
        assert_eq!(execute(&req).unwrap(), r);
        req.shots = Some(0);
        assert!(execute(&req).is_err());
    }

    #[test]
    fn json_field_names() {
        let r = execute(&request(vec![2, 6], Some(Mode::PaperExact))).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "n", "b", "a", "mode", "probabilities", "argmax", "is_tie",
            "classical_nearest", "agreement", "postselect_probability",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["mode"], "paper");
        let back: SearchRequest = serde_json::from_value(v).unwrap();
        assert_eq!(back, r.request());
    }

    #[test]
    fn request_parsing() {
        let req: SearchRequest =
            serde_json::from_str(r#"{"n": 3, "b": 5, "a": [2, 6], "mode": "paper-exact"}"#).unwrap();
        assert_eq!(req.mode, Some(Mode::PaperExact));
        assert!(serde_json::from_str::<SearchRequest>(r#"{"n": 3, "a": [2]}"#).is_err());
    }
}
