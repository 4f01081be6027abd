//! Reading the decision out of a final state.
//!
//! Sampling uses `ChaCha8Rng::seed_from_u64(seed)`. Each accepted shot first
//! draws the number of post-selection rejections preceding it from a geometric
//! distribution (inverse CDF, one uniform draw, skipped when nothing is ever
//! rejected), then draws the index by inverse CDF over the conditional
//! probabilities (one uniform draw).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{build_layout, Mode, QarnProblem, Readout};
use crate::error::{invalid, QarnError, Result};
use crate::state::{SiteRole, StateVector};

/// Probabilities closer than this count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Allowed deviation of a distribution's total from one.
pub const SUM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexDistribution {
    pub probabilities: Vec<f64>,
    /// `P(S = 0)` in post-selected modes, `1.0` otherwise.
    pub postselect_probability: f64,
    pub mode: Mode,
}

impl IndexDistribution {
    pub fn new(probabilities: Vec<f64>, postselect_probability: f64, mode: Mode) -> Result<Self> {
        if probabilities.is_empty() {
            return invalid("distribution needs at least one index");
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return invalid("probabilities must be finite and non-negative");
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(QarnError::Numeric(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        if !(postselect_probability > 0.0 && postselect_probability <= 1.0 + SUM_TOLERANCE) {
            return Err(QarnError::Numeric(format!(
                "post-selection probability {postselect_probability} outside (0, 1]"
            )));
        }
        Ok(Self {
            probabilities,
            postselect_probability: postselect_probability.min(1.0),
            mode,
        })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Largest absolute difference between corresponding probabilities.
    pub fn max_deviation(&self, other: &IndexDistribution) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Index distribution of a state produced by [`run`](crate::circuit::run).
pub fn index_distribution(state: &StateVector, problem: &QarnProblem) -> Result<IndexDistribution> {
    let layout = build_layout(problem)?;
    if state.layout() != &layout {
        return invalid("state layout does not match the problem");
    }
    let m = problem.m();
    let d = layout.require(SiteRole::Index)?;
    match problem.readout() {
        Readout::IndexMarginal => {
            let marginal = state.marginal_probabilities(&[d])?;
            IndexDistribution::new(marginal.probabilities[..m].to_vec(), 1.0, problem.mode())
        }
        Readout::PostSelected => {
            let s = layout.require(SiteRole::Score)?;
            let joint = state.marginal_probabilities(&[d, s])?;
            let accepted: Vec<f64> = (0..m).map(|j| joint.get(&[j, 0])).collect();
            let p_sel: f64 = accepted.iter().sum();
            if p_sel <= 0.0 {
                return Err(QarnError::Numeric(
                    "score qubit never reads 0; post-selection impossible".into(),
                ));
            }
            IndexDistribution::new(
                accepted.iter().map(|p| p / p_sel).collect(),
                p_sel,
                problem.mode(),
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    /// Accepted shots per index; every index is present.
    pub counts: BTreeMap<usize, u64>,
    /// Accepted shots, equal to the sum of `counts`.
    pub shots: u64,
    /// Shots discarded by post-selection while collecting `shots`.
    pub rejected: u64,
    pub seed: u64,
}

impl ShotCounts {
    pub fn frequency(&self, index: usize) -> f64 {
        self.counts.get(&index).copied().unwrap_or(0) as f64 / self.shots as f64
    }

    /// Accepted fraction of all raw shots.
    pub fn acceptance_rate(&self) -> f64 {
        self.shots as f64 / (self.shots + self.rejected) as f64
    }
}

pub fn sample(dist: &IndexDistribution, shots: u64, seed: u64) -> Result<ShotCounts> {
    if shots == 0 {
        return invalid("shots must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for p in &dist.probabilities {
        acc += p;
        cdf.push(acc);
    }
    // Guard against rounding leaving the last bucket short of 1.
    let last = dist
        .probabilities
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(dist.len() - 1);

    let p_sel = dist.postselect_probability;
    let ln_reject = (1.0 - p_sel).ln();
    let mut raw = vec![0u64; dist.len()];
    let mut rejected = 0u64;
    for _ in 0..shots {
        if p_sel < 1.0 {
            let u: f64 = rng.random();
            // Failures before the first success of a Bernoulli(p_sel) sequence.
            let failures = ((1.0 - u).ln() / ln_reject).floor();
            rejected = rejected.saturating_add(failures as u64);
        }
        let u: f64 = rng.random();
        let idx = cdf.iter().position(|&c| u < c).unwrap_or(last).min(last);
        raw[idx] += 1;
    }
    Ok(ShotCounts {
        counts: raw.into_iter().enumerate().collect(),
        shots,
        rejected,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub index: usize,
    pub is_tie: bool,
}

/// Argmax; ties within [`TIE_TOLERANCE`] resolve to the lowest index.
pub fn decide(dist: &IndexDistribution) -> Decision {
    let max = dist
        .probabilities
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut near_max = dist
        .probabilities
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= max - TIE_TOLERANCE)
        .map(|(i, _)| i);
    let index = near_max.next().unwrap_or(0);
    Decision {
        index,
        is_tie: near_max.next().is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::run;

    fn dist(p: &[f64]) -> IndexDistribution {
        IndexDistribution::new(p.to_vec(), 1.0, Mode::Generalized).unwrap()
    }

    #[test]
    fn paper_instance_distribution() {
        let p = QarnProblem::new(3, vec![2, 6], 5, Mode::PaperExact).unwrap();
        let d = index_distribution(&run(&p).unwrap(), &p).unwrap();
        assert!((d.probabilities[0] - 0.3647).abs() < 5e-5);
        assert!((d.probabilities[1] - 0.6353).abs() < 5e-5);
        assert_eq!(d.postselect_probability, 1.0);
    }

    #[test]
    fn equal_elements_are_uniform() {
        let p = QarnProblem::new(3, vec![4, 4, 4], 4, Mode::Generalized).unwrap();
        let d = index_distribution(&run(&p).unwrap(), &p).unwrap();
        for q in &d.probabilities {
            assert!((q - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((d.postselect_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generalized_example() {
        let p = QarnProblem::new(3, vec![2, 6, 5, 0], 5, Mode::Generalized).unwrap();
        let d = index_distribution(&run(&p).unwrap(), &p).unwrap();
        let expected = [0.2334, 0.3248, 0.3376, 0.1042];
        for (q, e) in d.probabilities.iter().zip(expected) {
            assert!((q - e).abs() < 5e-5, "{q} vs {e}");
        }
        assert!((d.postselect_probability - 0.7405).abs() < 5e-5);
    }

    #[test]
    fn single_element() {
        let p = QarnProblem::new(3, vec![1], 6, Mode::Generalized).unwrap();
        let d = index_distribution(&run(&p).unwrap(), &p).unwrap();
        assert_eq!(d.probabilities.len(), 1);
        assert!((d.probabilities[0] - 1.0).abs() < 1e-12);
        assert_eq!(decide(&d), Decision { index: 0, is_tie: false });
    }

    #[test]
    fn layout_mismatch() {
        let p = QarnProblem::new(3, vec![2, 6], 5, Mode::PaperExact).unwrap();
        let g = p.in_mode(Mode::Generalized).unwrap();
        assert!(index_distribution(&run(&g).unwrap(), &p).is_err());
    }

    #[test]
    fn decisions() {
        assert_eq!(decide(&dist(&[0.3647, 0.6353])), Decision { index: 1, is_tie: false });
        assert_eq!(decide(&dist(&[0.5, 0.5])), Decision { index: 0, is_tie: true });
        assert_eq!(
            decide(&dist(&[0.2334, 0.3248, 0.3376, 0.1042])),
            Decision { index: 2, is_tie: false }
        );
        assert_eq!(
            decide(&dist(&[0.2, 0.4 - 1e-11, 0.4])),
            Decision { index: 1, is_tie: true }
        );
    }

    #[test]
    fn sampling_basics() {
        let certain = dist(&[1.0]);
        let s = sample(&certain, 1000, 3).unwrap();
        assert_eq!(s.counts[&0], 1000);
        assert_eq!(s.rejected, 0);
        assert!(sample(&certain, 0, 3).is_err());

        let d = dist(&[0.3647, 0.6353]);
        assert_eq!(sample(&d, 5000, 11).unwrap(), sample(&d, 5000, 11).unwrap());
        assert_ne!(sample(&d, 5000, 11).unwrap(), sample(&d, 5000, 12).unwrap());
    }

    #[test]
    fn sampling_skips_zero_buckets() {
        let d = dist(&[0.5, 0.0, 0.5]);
        let s = sample(&d, 10_000, 1).unwrap();
        assert_eq!(s.counts[&1], 0);
        assert_eq!(s.counts.values().sum::<u64>(), 10_000);
    }

    #[test]
    fn rejection_rate_tracks_postselection() {
        let d = IndexDistribution::new(vec![0.25, 0.75], 0.4, Mode::Generalized).unwrap();
        let s = sample(&d, 100_000, 5).unwrap();
        let sigma = (0.4f64 * 0.6 / (s.shots + s.rejected) as f64).sqrt();
        assert!((s.acceptance_rate() - 0.4).abs() < 4.0 * sigma);
    }

    #[test]
    fn distribution_validation() {
        assert!(IndexDistribution::new(vec![], 1.0, Mode::Generalized).is_err());
        assert!(IndexDistribution::new(vec![0.5, 0.6], 1.0, Mode::Generalized).is_err());
        assert!(IndexDistribution::new(vec![1.0], 0.0, Mode::Generalized).is_err());
        assert!(IndexDistribution::new(vec![-0.1, 1.1], 1.0, Mode::Generalized).is_err());
    }
}
