//! Nearest-element search circuits.
//!
//! A [`QarnProblem`] is compiled into a [`Circuit`] in one of three modes:
//!
//! * [`Mode::PaperExact`] (`m = 2`): sites `[C0 … C(n-1), D]`, rotations act
//!   on the index qubit `D` directly.
//! * [`Mode::Generalized`]: sites `[C0 … C(n-1), D, S]` with `D` of
//!   dimension `max(m, 2)`; rotations act on the score qubit `S` and the
//!   index distribution is read conditioned on `S = 0`.
//! * [`Mode::FullCircuit`]: the wire-level picture with the reference value
//!   and the array as quantum registers, sites
//!   `[B0 … B(n-1), A0.0 … A(m-1).(n-1), C0 … C(n-1), D]` plus `S` when
//!   `m ≠ 2`. With `m = 2` it follows paper-exact semantics, otherwise
//!   generalized semantics.
//!
//! In every register bit `0` is the most significant bit of the value.
//! The compiled modes fold the classical bits of `B` and `A` into gate
//! selection, so only the copy buffer, the index and the score are simulated.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, QarnError, Result};
use crate::gates::{comparison_gate, fourier, pauli_x, rx, Gate};
use crate::state::{required_amplitudes, Control, RegisterLayout, Site, SiteRole, StateVector};

/// Default bound on the number of simulated amplitudes.
pub const DEFAULT_STATE_CAP: u128 = 1 << 26;

/// Widest supported element, so every value fits in a `u64` with room to negate differences.
pub const MAX_BITS: u32 = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "paper", alias = "paper-exact")]
    PaperExact,
    #[serde(rename = "general", alias = "generalized")]
    Generalized,
    #[serde(rename = "full", alias = "full-circuit")]
    FullCircuit,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PaperExact => "paper",
            Mode::Generalized => "general",
            Mode::FullCircuit => "full",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = QarnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper-exact" => Ok(Mode::PaperExact),
            "general" | "generalized" => Ok(Mode::Generalized),
            "full" | "full-circuit" => Ok(Mode::FullCircuit),
            other => invalid(format!("unknown mode '{other}' (expected paper, general or full)")),
        }
    }
}

/// How the decision is read out of the final state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Rotations target `D`; the index distribution is the `D` marginal.
    IndexMarginal,
    /// Rotations target `S`; the index distribution is `D` given `S = 0`.
    PostSelected,
}

/// A search instance: `m` values of `n` bits and a reference value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QarnProblem {
    n: u32,
    a: Vec<u64>,
    b: u64,
    mode: Mode,
    state_cap: u128,
}

impl QarnProblem {
    pub fn new(n: u32, a: Vec<u64>, b: u64, mode: Mode) -> Result<Self> {
        Self::with_state_cap(n, a, b, mode, DEFAULT_STATE_CAP)
    }

    pub fn with_state_cap(n: u32, a: Vec<u64>, b: u64, mode: Mode, state_cap: u128) -> Result<Self> {
        if n == 0 {
            return invalid("bit width must be at least 1");
        }
        if n > MAX_BITS {
            return invalid(format!("bit width {n} exceeds the supported maximum of {MAX_BITS}"));
        }
        if a.is_empty() {
            return invalid("array must contain at least one element");
        }
        let limit = 1u64 << n;
        if b >= limit {
            return invalid(format!("reference value {b} does not fit in {n} bits"));
        }
        if let Some((j, v)) = a.iter().enumerate().find(|(_, &v)| v >= limit) {
            return invalid(format!("element {j} = {v} does not fit in {n} bits"));
        }
        if mode == Mode::PaperExact && a.len() != 2 {
            return invalid(format!(
                "paper mode needs exactly 2 elements, got {}",
                a.len()
            ));
        }
        let problem = Self {
            n,
            a,
            b,
            mode,
            state_cap,
        };
        build_layout(&problem)?;
        Ok(problem)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[u64] {
        &self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn state_cap(&self) -> u128 {
        self.state_cap
    }

    pub fn readout(&self) -> Readout {
        match (self.mode, self.m()) {
            (Mode::PaperExact, _) | (Mode::FullCircuit, 2) => Readout::IndexMarginal,
            _ => Readout::PostSelected,
        }
    }

    /// Dimension of the index qudit.
    pub fn index_dim(&self) -> usize {
        self.m().max(2)
    }

    /// Bit `k` of `value`, counting from the most significant.
    #[inline]
    pub fn bit(&self, value: u64, k: usize) -> usize {
        ((value >> (self.n as usize - 1 - k)) & 1) as usize
    }

    /// Net rotation angle of branch `j`, `π(b − a[j]) / 2ⁿ`.
    pub fn net_angle(&self, j: usize) -> f64 {
        let diff = self.b as i128 - self.a[j] as i128;
        PI * diff as f64 / (1u128 << self.n) as f64
    }

    /// Same instance in another mode.
    pub fn in_mode(&self, mode: Mode) -> Result<Self> {
        Self::with_state_cap(self.n, self.a.clone(), self.b, mode, self.state_cap)
    }
}

/// Per-bit rotation weights, most significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSchedule {
    weights: Vec<f64>,
}

impl RotationSchedule {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_k (b_k − a_k)·θ_k` accumulated bit by bit.
    pub fn net_angle(&self, b: u64, a: u64) -> f64 {
        let n = self.weights.len();
        self.weights
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let shift = n - 1 - k;
                let bk = ((b >> shift) & 1) as f64;
                let ak = ((a >> shift) & 1) as f64;
                (bk - ak) * w
            })
            .sum()
    }
}

/// `θ_k = π / 2^(k+1)` for `k = 0 … n−1`.
pub fn rotation_schedule(n: u32) -> RotationSchedule {
    let mut weights = Vec::with_capacity(n as usize);
    let mut w = PI / 2.0;
    for _ in 0..n {
        weights.push(w);
        w /= 2.0;
    }
    RotationSchedule { weights }
}

/// Which part of the algorithm an operation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Superpose,
    Copy,
    Compare,
}

impl Stage {
    fn as_str(self) -> &'static str {
        match self {
            Stage::Superpose => "superpose",
            Stage::Copy => "copy",
            Stage::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    pub stage: Stage,
    pub gate: Gate,
    pub controls: Vec<Control>,
    pub targets: Vec<usize>,
}

/// A layout plus an ordered gate list.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: Arc<RegisterLayout>,
    ops: Vec<Operation>,
}

impl Circuit {
    pub fn new(layout: impl Into<Arc<RegisterLayout>>) -> Self {
        Self {
            layout: layout.into(),
            ops: Vec::new(),
        }
    }

    pub fn layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn ops_mut(&mut self) -> &mut [Operation] {
        &mut self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn count(&self, stage: Stage) -> usize {
        self.ops.iter().filter(|op| op.stage == stage).count()
    }

    /// Appends an operation after checking its sites and gate dimension.
    pub fn push(&mut self, op: Operation) -> Result<()> {
        let layout = &self.layout;
        let sites = layout.len();
        if op.targets.is_empty() {
            return invalid("operation has no target");
        }
        if let Some(s) = op
            .targets
            .iter()
            .chain(op.controls.iter().map(|c| &c.site))
            .find(|&&s| s >= sites)
        {
            return invalid(format!("site {s} not in circuit layout"));
        }
        let span: usize = op.targets.iter().map(|&t| layout.dim(t)).product();
        if span != op.gate.dim() {
            return invalid(format!(
                "gate '{}' of dimension {} does not fit targets spanning {span}",
                op.gate.label(),
                op.gate.dim()
            ));
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn execute(&self, state: StateVector) -> Result<StateVector> {
        if state.layout() != &*self.layout {
            return invalid("state layout does not match circuit layout");
        }
        self.ops.iter().try_fold(state, |s, op| {
            s.apply(&op.controls, &op.targets, &op.gate)
        })
    }

    /// Line-oriented text listing, one operation per line.
    ///
    /// ```text
    /// # sites B0:2,C0:2,D:2
    /// 0 superpose F2 target=D controls=- angle=-
    /// 1 copy X target=C0 controls=D=1,A1.0=1 angle=-
    /// 2 compare CMP target=B0,C0,D controls=- angle=1.570796326795
    /// ```
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let site_name = |s: usize| self.layout.sites()[s].role.to_string();
        let sites: Vec<String> = self
            .layout
            .sites()
            .iter()
            .map(|s| format!("{}:{}", s.role, s.dim))
            .collect();
        let _ = writeln!(out, "# sites {}", sites.join(","));
        for (i, op) in self.ops.iter().enumerate() {
            let targets: Vec<String> = op.targets.iter().map(|&t| site_name(t)).collect();
            let controls = if op.controls.is_empty() {
                "-".to_string()
            } else {
                op.controls
                    .iter()
                    .map(|c| format!("{}={}", site_name(c.site), c.value))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let angle = op
                .gate
                .angle()
                .map_or_else(|| "-".to_string(), |a| format!("{a:.12}"));
            let _ = writeln!(
                out,
                "{i} {} {} target={} controls={controls} angle={angle}",
                op.stage.as_str(),
                op.gate.label(),
                targets.join(",")
            );
        }
        out
    }
}

/// Canonical site list for `problem`.
pub fn build_layout(problem: &QarnProblem) -> Result<RegisterLayout> {
    let n = problem.n as usize;
    let m = problem.m();
    let cbits = (0..n).map(|k| Site::qubit(SiteRole::CBit(k)));
    let index = Site::new(SiteRole::Index, problem.index_dim());
    let score = Site::qubit(SiteRole::Score);

    // Check size before materialising huge site lists.
    let mut dims: Vec<usize> = vec![2; n];
    dims.push(problem.index_dim());
    if problem.readout() == Readout::PostSelected {
        dims.push(2);
    }
    if problem.mode == Mode::FullCircuit {
        dims.extend(std::iter::repeat_n(2, n * (m + 1)));
    }
    let required = required_amplitudes(dims);
    if required > problem.state_cap {
        return Err(QarnError::Capacity {
            required,
            cap: problem.state_cap,
        });
    }

    let mut sites = Vec::new();
    if problem.mode == Mode::FullCircuit {
        sites.extend((0..n).map(|k| Site::qubit(SiteRole::BBit(k))));
        for element in 0..m {
            sites.extend((0..n).map(|bit| Site::qubit(SiteRole::ABit { element, bit })));
        }
    }
    sites.extend(cbits);
    sites.push(index);
    if problem.readout() == Readout::PostSelected {
        sites.push(score);
    }
    RegisterLayout::with_cap(sites, problem.state_cap)
}

/// Input basis state: classical registers hold `b` and `a`, ancillas are zero.
pub fn initial_state(problem: &QarnProblem, layout: Arc<RegisterLayout>) -> Result<StateVector> {
    let digits: Vec<usize> = layout
        .sites()
        .iter()
        .map(|s| match s.role {
            SiteRole::BBit(k) => problem.bit(problem.b, k),
            SiteRole::ABit { element, bit } => problem.bit(problem.a[element], bit),
            _ => 0,
        })
        .collect();
    StateVector::basis(layout, &digits)
}

fn superposition_ops(problem: &QarnProblem, layout: &RegisterLayout) -> Result<Vec<Operation>> {
    let n = problem.n as usize;
    let d = layout.require(SiteRole::Index)?;
    let mut ops = Vec::new();
    // With a single element the index stays in |0⟩.
    if problem.m() > 1 {
        ops.push(Operation {
            stage: Stage::Superpose,
            gate: fourier(layout.dim(d))?,
            controls: vec![],
            targets: vec![d],
        });
    }
    let x = pauli_x(2)?;
    for (j, &value) in problem.a.iter().enumerate() {
        for k in 0..n {
            let c = layout.require(SiteRole::CBit(k))?;
            let controls = if problem.mode == Mode::FullCircuit {
                let wire = layout.require(SiteRole::ABit { element: j, bit: k })?;
                vec![Control::new(d, j), Control::new(wire, 1)]
            } else if problem.bit(value, k) == 1 {
                vec![Control::new(d, j)]
            } else {
                continue;
            };
            ops.push(Operation {
                stage: Stage::Copy,
                gate: x.clone(),
                controls,
                targets: vec![c],
            });
        }
    }
    Ok(ops)
}

fn rotation_target(problem: &QarnProblem, layout: &RegisterLayout) -> Result<usize> {
    match problem.readout() {
        Readout::IndexMarginal => layout.require(SiteRole::Index),
        Readout::PostSelected => layout.require(SiteRole::Score),
    }
}

fn comparison_ops(problem: &QarnProblem, layout: &RegisterLayout) -> Result<Vec<Operation>> {
    let target = rotation_target(problem, layout)?;
    let schedule = rotation_schedule(problem.n);
    let mut ops = Vec::with_capacity(schedule.len());
    for (k, &theta) in schedule.weights().iter().enumerate() {
        let c = layout.require(SiteRole::CBit(k))?;
        let op = if problem.mode == Mode::FullCircuit {
            let b = layout.require(SiteRole::BBit(k))?;
            Operation {
                stage: Stage::Compare,
                gate: comparison_gate(theta)?,
                controls: vec![],
                targets: vec![b, c, target],
            }
        } else if problem.bit(problem.b, k) == 1 {
            // B bit set: rotate forward where the copy bit is clear.
            Operation {
                stage: Stage::Compare,
                gate: rx(theta)?,
                controls: vec![Control::new(c, 0)],
                targets: vec![target],
            }
        } else {
            Operation {
                stage: Stage::Compare,
                gate: rx(-theta)?,
                controls: vec![Control::new(c, 1)],
                targets: vec![target],
            }
        };
        ops.push(op);
    }
    Ok(ops)
}

/// Full gate list for `problem` in its own mode.
pub fn build_circuit(problem: &QarnProblem) -> Result<Circuit> {
    let layout = Arc::new(build_layout(problem)?);
    let mut circuit = Circuit::new(layout.clone());
    for op in superposition_ops(problem, &layout)?
        .into_iter()
        .chain(comparison_ops(problem, &layout)?)
    {
        circuit.push(op)?;
    }
    Ok(circuit)
}

/// Wire-level circuit with `B` and `A` as quantum registers.
pub fn build_full_circuit(problem: &QarnProblem) -> Result<Circuit> {
    if problem.mode != Mode::FullCircuit {
        return invalid(format!(
            "full circuit requested for a problem in {} mode",
            problem.mode
        ));
    }
    build_circuit(problem)
}

/// Prepares `(1/√m) Σ_j |A_j⟩_C |j⟩_D` (with `S = 0` and the classical
/// registers untouched where present).
pub fn load_superposition(problem: &QarnProblem) -> Result<StateVector> {
    let layout = Arc::new(build_layout(problem)?);
    let state = initial_state(problem, layout.clone())?;
    superposition_ops(problem, &layout)?
        .iter()
        .try_fold(state, |s, op| s.apply(&op.controls, &op.targets, &op.gate))
}

/// Applies the bit-weighted comparison rotations to a loaded state.
pub fn apply_comparison_stage(state: StateVector, problem: &QarnProblem) -> Result<StateVector> {
    let layout = build_layout(problem)?;
    if state.layout() != &layout {
        return invalid(format!(
            "state layout does not match a {} mode problem with n = {}, m = {}",
            problem.mode,
            problem.n,
            problem.m()
        ));
    }
    comparison_ops(problem, &layout)?
        .iter()
        .try_fold(state, |s, op| s.apply(&op.controls, &op.targets, &op.gate))
}

/// Loading followed by comparison.
pub fn run(problem: &QarnProblem) -> Result<StateVector> {
    let circuit = build_circuit(problem)?;
    let start = initial_state(problem, circuit.layout().clone())?;
    circuit.execute(start)
}
