//! Fixed workloads shared by the criterion benches.

use qarn_core::{Mode, QarnProblem, RegisterLayout, StateVector};

/// A deterministic generalized instance: `a_j = (j·(2ⁿ−1)/m) mod 2ⁿ`, `b` at mid-range.
pub fn spread_instance(n: u32, m: usize) -> QarnProblem {
    let top = (1u64 << n) - 1;
    let a = (0..m as u64).map(|j| (j * top / m as u64) & top).collect();
    QarnProblem::new(n, a, top / 2 + 1, Mode::Generalized).expect("valid bench instance")
}

/// The two-element example as a wire-level circuit.
pub fn paper_full() -> QarnProblem {
    QarnProblem::new(3, vec![2, 6], 5, Mode::FullCircuit).expect("valid bench instance")
}

/// `|0…0⟩` on `qubits` two-level sites.
pub fn qubit_register(qubits: usize) -> StateVector {
    let layout = RegisterLayout::from_dims(&vec![2; qubits]).expect("valid bench layout");
    StateVector::basis(layout, &vec![0; qubits]).expect("valid bench state")
}
