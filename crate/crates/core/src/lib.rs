//! Mixed-radix state-vector simulation of a nearest-element search circuit.
//!
//! Given an array `A` of `m` values of `n` bits and a reference `B`, the
//! circuit loads `(1/√m) Σ_j |A_j⟩|j⟩` into a copy buffer `C` and an index
//! qudit `D`, then applies one controlled X-rotation per bit whose direction
//! follows the sign of `B_k − C_k` and whose weight halves from the most
//! significant bit down. Branch `j` ends up rotated by `π(B − A_j)/2ⁿ`, so
//! elements closer to `B` keep more weight on their index when `D` is
//! measured.
//!
//! ```
//! use qarn_core::{decide, index_distribution, run, Mode, QarnProblem};
//!
//! let problem = QarnProblem::new(3, vec![2, 6], 5, Mode::PaperExact)?;
//! let dist = index_distribution(&run(&problem)?, &problem)?;
//! assert_eq!(decide(&dist).index, 1);
//! assert!((dist.probabilities[1] - 0.6353).abs() < 1e-4);
//! # Ok::<(), qarn_core::QarnError>(())
//! ```

pub mod circuit;
pub mod error;
pub mod gates;
pub mod measurement;
pub mod oracle;
pub mod search;
pub mod state;

pub use circuit::{
    apply_comparison_stage, build_circuit, build_full_circuit, build_layout, initial_state,
    load_superposition, rotation_schedule, run, Circuit, Mode, Operation, QarnProblem, Readout,
    RotationSchedule, Stage, DEFAULT_STATE_CAP,
};
pub use error::{QarnError, Result};
pub use gates::{comparison_gate, fourier, hadamard, pauli_x, rx, Gate};
pub use measurement::{decide, index_distribution, sample, Decision, IndexDistribution, ShotCounts};
pub use oracle::{
    agreement_sweep, classical_nearest, closed_form, closed_form_generalized, closed_form_paper,
    OracleReport, SweepConfig, SweepRow, SweepTable,
};
pub use search::{execute, SearchRequest, SearchResponse};
pub use state::{Control, Marginal, RegisterLayout, Site, SiteRole, StateVector};
