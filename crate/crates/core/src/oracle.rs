//! Classical ground truth and closed-form probabilities.
//!
//! With `θ_j = π(b − a[j]) / 2ⁿ`:
//!
//! * paper mode (`m = 2`): branch 0 starts in `D = 0` and branch 1 in
//!   `D = 1`, so `P(D=0) = [cos²(θ₀/2) + sin²(θ₁/2)] / 2` and
//!   `P(D=1) = [cos²(θ₁/2) + sin²(θ₀/2)] / 2`;
//! * generalized mode: `P(j | S=0) = cos²(θ_j/2) / Σ_i cos²(θ_i/2)` with
//!   `P(S=0) = Σ_i cos²(θ_i/2) / m`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{run, Mode, QarnProblem, Readout, MAX_BITS};
use crate::error::{invalid, Result};
use crate::measurement::{decide, index_distribution, IndexDistribution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub nearest_index: usize,
    pub distance: u64,
    /// Every index attaining `distance`, ascending.
    pub tied_indices: Vec<usize>,
    /// Whether a simulator decision attains the minimum; `None` until compared.
    pub agreement: Option<bool>,
}

impl OracleReport {
    pub fn is_unique(&self) -> bool {
        self.tied_indices.len() == 1
    }

    pub fn with_decision(mut self, decided: usize) -> Self {
        self.agreement = Some(self.tied_indices.contains(&decided));
        self
    }
}

/// Linear scan for the element closest to `b`; ties go to the lowest index.
pub fn classical_nearest(a: &[u64], b: u64) -> Result<OracleReport> {
    let distance = match a.iter().map(|&v| v.abs_diff(b)).min() {
        Some(d) => d,
        None => return invalid("array must contain at least one element"),
    };
    let tied_indices: Vec<usize> = a
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs_diff(b) == distance)
        .map(|(j, _)| j)
        .collect();
    Ok(OracleReport {
        nearest_index: tied_indices[0],
        distance,
        tied_indices,
        agreement: None,
    })
}

fn branch_angles(a: &[u64], b: u64, n: u32) -> Result<Vec<f64>> {
    if a.is_empty() {
        return invalid("array must contain at least one element");
    }
    if n == 0 || n > MAX_BITS {
        return invalid(format!("bit width {n} outside 1..={MAX_BITS}"));
    }
    let limit = 1u64 << n;
    if b >= limit || a.iter().any(|&v| v >= limit) {
        return invalid(format!("values must fit in {n} bits"));
    }
    let scale = std::f64::consts::PI / limit as f64;
    Ok(a.iter()
        .map(|&v| (b as i128 - v as i128) as f64 * scale)
        .collect())
}

pub fn closed_form_paper(a: &[u64], b: u64, n: u32) -> Result<IndexDistribution> {
    if a.len() != 2 {
        return invalid(format!("paper closed form needs 2 elements, got {}", a.len()));
    }
    let t = branch_angles(a, b, n)?;
    let (c0, s0) = ((t[0] / 2.0).cos().powi(2), (t[0] / 2.0).sin().powi(2));
    let (c1, s1) = ((t[1] / 2.0).cos().powi(2), (t[1] / 2.0).sin().powi(2));
    IndexDistribution::new(vec![(c0 + s1) / 2.0, (c1 + s0) / 2.0], 1.0, Mode::PaperExact)
}

pub fn closed_form_generalized(a: &[u64], b: u64, n: u32) -> Result<IndexDistribution> {
    let weights: Vec<f64> = branch_angles(a, b, n)?
        .iter()
        .map(|t| (t / 2.0).cos().powi(2))
        .collect();
    let total: f64 = weights.iter().sum();
    IndexDistribution::new(
        weights.iter().map(|w| w / total).collect(),
        total / a.len() as f64,
        Mode::Generalized,
    )
}

/// Closed form matching the readout of `problem`.
pub fn closed_form(problem: &QarnProblem) -> Result<IndexDistribution> {
    let mut dist = match problem.readout() {
        Readout::IndexMarginal => closed_form_paper(problem.a(), problem.b(), problem.n())?,
        Readout::PostSelected => closed_form_generalized(problem.a(), problem.b(), problem.n())?,
    };
    dist.mode = problem.mode();
    Ok(dist)
}

/// One simulated instance compared against the oracle and the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceCheck {
    pub oracle: OracleReport,
    pub distribution: IndexDistribution,
    pub decided: usize,
    pub closed_form_deviation: f64,
}

pub fn check_instance(problem: &QarnProblem) -> Result<InstanceCheck> {
    let distribution = index_distribution(&run(problem)?, problem)?;
    let decided = decide(&distribution).index;
    let closed_form_deviation = closed_form(problem)?.max_deviation(&distribution);
    let oracle = classical_nearest(problem.a(), problem.b())?.with_decision(decided);
    Ok(InstanceCheck {
        oracle,
        distribution,
        decided,
        closed_form_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: Mode,
    pub n: u32,
    pub m: usize,
    pub instances: usize,
    /// Instances whose minimum distance is attained once.
    pub unique: usize,
    /// Unique-minimum instances where the decision is the nearest index.
    pub unique_agree: usize,
    pub ties: usize,
    /// Tied instances where the decision attains the minimum distance.
    pub ties_at_min: usize,
    pub max_closed_form_deviation: f64,
}

impl SweepRow {
    pub fn unique_rate(&self) -> Option<f64> {
        (self.unique > 0).then(|| self.unique_agree as f64 / self.unique as f64)
    }

    pub fn tie_rate(&self) -> Option<f64> {
        (self.ties > 0).then(|| self.ties_at_min as f64 / self.ties as f64)
    }

    pub fn all_agree(&self) -> bool {
        self.unique_agree == self.unique && self.ties_at_min == self.ties
    }
}

/// Simulates every `(b, a)` instance in `mode` and tallies agreement.
pub fn evaluate_instances(mode: Mode, n: u32, instances: &[(u64, Vec<u64>)]) -> Result<SweepRow> {
    let m = instances.first().map_or(0, |(_, a)| a.len());
    let checks: Vec<InstanceCheck> = instances
        .par_iter()
        .map(|(b, a)| check_instance(&QarnProblem::new(n, a.clone(), *b, mode)?))
        .collect::<Result<_>>()?;
    let mut row = SweepRow {
        mode,
        n,
        m,
        instances: checks.len(),
        unique: 0,
        unique_agree: 0,
        ties: 0,
        ties_at_min: 0,
        max_closed_form_deviation: 0.0,
    };
    for c in &checks {
        let ok = c.oracle.agreement == Some(true);
        if c.oracle.is_unique() {
            row.unique += 1;
            row.unique_agree += usize::from(ok);
        } else {
            row.ties += 1;
            row.ties_at_min += usize::from(ok);
        }
        row.max_closed_form_deviation = row.max_closed_form_deviation.max(c.closed_form_deviation);
    }
    Ok(row)
}

/// Every `(b, a)` with `m` elements of `n` bits, `b` varying slowest.
pub fn exhaustive_instances(n: u32, m: usize) -> Vec<(u64, Vec<u64>)> {
    let base = 1u64 << n;
    let total = base.pow(m as u32 + 1);
    (0..total)
        .map(|mut code| {
            let mut digits = vec![0u64; m + 1];
            for d in digits.iter_mut().rev() {
                *d = code % base;
                code /= base;
            }
            (digits[0], digits[1..].to_vec())
        })
        .collect()
}

/// `count` uniform random instances; the stream is fixed by `(seed, n, m)`.
pub fn random_instances(n: u32, m: usize, count: usize, seed: u64) -> Vec<(u64, Vec<u64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(n) << 32) | m as u64);
    let limit = 1u64 << n;
    (0..count)
        .map(|_| {
            let b = rng.random_range(0..limit);
            let a = (0..m).map(|_| rng.random_range(0..limit)).collect();
            (b, a)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepConfig {
    pub max_bits: u32,
    pub max_m: usize,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_HEADER: &str =
    "mode,n,m,instances,unique,unique_agree,unique_rate,ties,ties_at_min,tie_rate,max_closed_form_dev";

impl SweepTable {
    /// Comma-separated rows under [`SWEEP_HEADER`]; an empty rate means no
    /// instances of that kind.
    pub fn to_csv(&self) -> String {
        let rate = |r: Option<f64>| r.map_or_else(String::new, |v| format!("{v:.4}"));
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{:.3e}",
                r.mode,
                r.n,
                r.m,
                r.instances,
                r.unique,
                r.unique_agree,
                rate(r.unique_rate()),
                r.ties,
                r.ties_at_min,
                rate(r.tie_rate()),
                r.max_closed_form_deviation
            );
        }
        out
    }
}

/// Random instances for every `n ≤ max_bits`, `m ≤ max_m` in generalized
/// mode, plus paper mode rows for `m = 2`.
pub fn agreement_sweep(config: &SweepConfig) -> Result<SweepTable> {
    if config.count == 0 {
        return invalid("sweep needs at least one instance per row");
    }
    if config.max_bits == 0 || config.max_bits > MAX_BITS {
        return invalid(format!("max bits must be in 1..={MAX_BITS}"));
    }
    if config.max_m == 0 {
        return invalid("max m must be at least 1");
    }
    let mut rows = Vec::new();
    for n in 1..=config.max_bits {
        for m in 1..=config.max_m {
            let instances = random_instances(n, m, config.count, config.seed);
            rows.push(evaluate_instances(Mode::Generalized, n, &instances)?);
            if m == 2 {
                rows.push(evaluate_instances(Mode::PaperExact, n, &instances)?);
            }
        }
    }
    Ok(SweepTable { rows })
}
