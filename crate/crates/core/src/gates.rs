//! Gate library.
//!
//! Every constructor returns an explicit dense matrix so circuits can be
//! audited entry by entry. Matrices are stored row-major.
//!
//! Rotation convention: `rx(θ)` has `cos(θ/2)` on the diagonal and
//! `-i·sin(θ/2)` off the diagonal. The comparison gate acts on
//! `B-bit ⊗ C-bit ⊗ target` and rotates the target by `+θ` when the B bit is
//! set and the C bit is clear, by `-θ` in the opposite case, and leaves it
//! alone when the two bits agree.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Largest `‖M·M† − I‖_max` accepted when a gate is built from raw entries.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A unitary acting on a register of `dim` levels.
#[derive(Clone, PartialEq)]
pub struct Gate {
    label: String,
    dim: usize,
    matrix: Vec<Complex64>,
    angle: Option<f64>,
}

impl Gate {
    /// Builds a gate from row-major entries, rejecting non-square or
    /// non-unitary input.
    pub fn new(label: impl Into<String>, dim: usize, matrix: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return invalid("gate dimension must be positive");
        }
        if matrix.len() != dim * dim {
            return invalid(format!(
                "gate of dimension {dim} needs {} entries, got {}",
                dim * dim,
                matrix.len()
            ));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("gate matrix has non-finite entries");
        }
        let gate = Self {
            label: label.into(),
            dim,
            matrix,
            angle: None,
        };
        let err = gate.unitarity_error();
        if err > UNITARY_TOLERANCE {
            return invalid(format!(
                "gate '{}' is not unitary (‖M·M†−I‖ = {err:e})",
                gate.label
            ));
        }
        Ok(gate)
    }

    fn from_parts(label: String, dim: usize, matrix: Vec<Complex64>, angle: Option<f64>) -> Self {
        Self {
            label,
            dim,
            matrix,
            angle,
        }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("gate dimension must be positive");
        }
        let mut m = vec![ZERO; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = ONE;
        }
        Ok(Self::from_parts("I".into(), dim, m, None))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rotation angle for parametrised gates (`rx`, comparison gate).
    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                m[c * d + r] = self.matrix[r * d + c].conj();
            }
        }
        Self::from_parts(
            format!("{}†", self.label),
            d,
            m,
            self.angle.map(|a| -a),
        )
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Gate) -> Result<Self> {
        if self.dim != rhs.dim {
            return invalid(format!(
                "cannot compose gates of dimension {} and {}",
                self.dim, rhs.dim
            ));
        }
        let d = self.dim;
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let lhs = self.matrix[r * d + k];
                if lhs == ZERO {
                    continue;
                }
                for c in 0..d {
                    m[r * d + c] += lhs * rhs.matrix[k * d + c];
                }
            }
        }
        Ok(Self::from_parts(
            format!("{}·{}", self.label, rhs.label),
            d,
            m,
            None,
        ))
    }

    /// `‖M·M† − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += self.matrix[r * d + k] * self.matrix[c * d + k].conj();
                }
                if r == c {
                    acc -= ONE;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Largest entrywise distance to `other`; infinite if dimensions differ.
    pub fn max_distance(&self, other: &Gate) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Multiplies a column vector of length `dim`.
    pub fn apply_to(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length must match gate dimension");
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.matrix[r * self.dim + c] * v[c])
                    .sum()
            })
            .collect()
    }
}

impl fmt::Debug for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gate")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("angle", &self.angle)
            .finish_non_exhaustive()
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        invalid(format!("rotation angle must be finite, got {theta}"))
    }
}

fn rx_entries(theta: f64) -> [Complex64; 4] {
    let half = theta / 2.0;
    let c = Complex64::new(half.cos(), 0.0);
    let s = Complex64::new(0.0, -half.sin());
    [c, s, s, c]
}

/// Rotation about the X axis by `theta` radians.
pub fn rx(theta: f64) -> Result<Gate> {
    check_angle(theta)?;
    Ok(Gate::from_parts(
        "RX".into(),
        2,
        rx_entries(theta).to_vec(),
        Some(theta),
    ))
}

pub fn hadamard() -> Gate {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Gate::from_parts("H".into(), 2, vec![h, h, h, -h], None)
}

/// Bit flip for `d = 2`, cyclic shift `|k⟩ → |k+1 mod d⟩` otherwise.
pub fn pauli_x(d: usize) -> Result<Gate> {
    if d < 2 {
        return invalid(format!("X needs dimension ≥ 2, got {d}"));
    }
    let mut m = vec![ZERO; d * d];
    for k in 0..d {
        m[((k + 1) % d) * d + k] = ONE;
    }
    Ok(Gate::from_parts("X".into(), d, m, None))
}

/// Discrete Fourier matrix `ω^{jk}/√d` with `ω = exp(2πi/d)`.
pub fn fourier(d: usize) -> Result<Gate> {
    if d < 2 {
        return invalid(format!("Fourier gate needs dimension ≥ 2, got {d}"));
    }
    if d == 2 {
        let mut h = hadamard();
        h.label = "F2".into();
        return Ok(h);
    }
    let norm = 1.0 / (d as f64).sqrt();
    let mut m = vec![ZERO; d * d];
    for j in 0..d {
        for k in 0..d {
            // Reduce the exponent mod d so the phase stays accurate for large jk.
            let e = (j * k) % d;
            m[j * d + k] = Complex64::from_polar(norm, 2.0 * PI * e as f64 / d as f64);
        }
    }
    Ok(Gate::from_parts(format!("F{d}"), d, m, None))
}

/// The signed comparison rotation on `B-bit ⊗ C-bit ⊗ target` (8×8).
///
/// Block layout by control value `(B, C)`: `(0,0)` and `(1,1)` identity,
/// `(0,1)` is `rx(−θ)`, `(1,0)` is `rx(θ)`.
pub fn comparison_gate(theta: f64) -> Result<Gate> {
    check_angle(theta)?;
    let mut m = vec![ZERO; 64];
    let blocks = [
        [ONE, ZERO, ZERO, ONE],
        rx_entries(-theta),
        rx_entries(theta),
        [ONE, ZERO, ZERO, ONE],
    ];
    for (b, block) in blocks.iter().enumerate() {
        let off = 2 * b;
        m[off * 8 + off] = block[0];
        m[off * 8 + off + 1] = block[1];
        m[(off + 1) * 8 + off] = block[2];
        m[(off + 1) * 8 + off + 1] = block[3];
    }
    Ok(Gate::from_parts("CMP".into(), 8, m, Some(theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= TOL
    }

    #[test]
    fn rx_zero_is_identity() {
        let g = rx(0.0).unwrap();
        assert!(g.max_distance(&Gate::identity(2).unwrap()) <= TOL);
    }

    #[test]
    fn rx_pi_is_minus_i_x() {
        let g = rx(PI).unwrap();
        assert!(close(g.entry(0, 0), c(0.0, 0.0)));
        assert!(close(g.entry(0, 1), c(0.0, -1.0)));
        assert!(close(g.entry(1, 0), c(0.0, -1.0)));
        assert!(close(g.entry(1, 1), c(0.0, 0.0)));
    }

    #[test]
    fn rx_half_pi_on_zero() {
        let out = rx(FRAC_PI_2).unwrap().apply_to(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(close(out[0], c(FRAC_PI_4.cos(), 0.0)));
        assert!(close(out[1], c(0.0, -FRAC_PI_4.sin())));
        assert!((out[1].norm_sqr() - 0.5).abs() <= TOL);
    }

    #[test]
    fn rx_rejects_non_finite() {
        assert!(rx(f64::NAN).is_err());
        assert!(rx(f64::INFINITY).is_err());
        assert!(comparison_gate(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn rx_negative_is_adjoint() {
        let a = rx(0.731).unwrap();
        assert!(rx(-0.731).unwrap().max_distance(&a.adjoint()) <= TOL);
    }

    #[test]
    fn hadamard_properties() {
        let h = hadamard();
        let out = h.apply_to(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(close(out[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(out[1], c(FRAC_1_SQRT_2, 0.0)));
        let hh = h.compose(&h).unwrap();
        assert!(hh.max_distance(&Gate::identity(2).unwrap()) <= TOL);
        assert!(h.max_distance(&fourier(2).unwrap()) <= TOL);
    }

    #[test]
    fn pauli_x_shift() {
        let x2 = pauli_x(2).unwrap();
        assert_eq!(x2.apply_to(&[ONE, ZERO]), vec![ZERO, ONE]);
        assert!(x2
            .compose(&x2)
            .unwrap()
            .max_distance(&Gate::identity(2).unwrap())
            <= TOL);
        let x3 = pauli_x(3).unwrap();
        assert_eq!(x3.apply_to(&[ZERO, ZERO, ONE]), vec![ONE, ZERO, ZERO]);
        assert!(pauli_x(1).is_err());
        assert!(pauli_x(0).is_err());
    }

    #[test]
    fn fourier_columns_and_errors() {
        let f3 = fourier(3).unwrap();
        let out = f3.apply_to(&[ONE, ZERO, ZERO]);
        let amp = 1.0 / 3f64.sqrt();
        for z in out {
            assert!(close(z, c(amp, 0.0)));
        }
        assert!(fourier(4).unwrap().unitarity_error() <= TOL);
        assert!(fourier(1).is_err());
    }

    #[test]
    fn comparison_gate_blocks() {
        let theta = FRAC_PI_2;
        let g = comparison_gate(theta).unwrap();
        // (1,0) block is rx(+θ).
        let (cs, sn) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
        assert!(close(g.entry(4, 4), c(cs, 0.0)));
        assert!(close(g.entry(4, 5), c(0.0, -sn)));
        assert!(close(g.entry(5, 4), c(0.0, -sn)));
        // (0,1) block is rx(−θ).
        assert!(close(g.entry(2, 3), c(0.0, sn)));
        // Equal bits untouched.
        for basis in [0usize, 1, 6, 7] {
            let mut v = vec![ZERO; 8];
            v[basis] = ONE;
            assert_eq!(g.apply_to(&v), v);
        }
    }

    #[test]
    fn comparison_gate_inverse_pair() {
        let g = comparison_gate(0.4).unwrap();
        let h = comparison_gate(-0.4).unwrap();
        assert!(g
            .compose(&h)
            .unwrap()
            .max_distance(&Gate::identity(8).unwrap())
            <= TOL);
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(Gate::new("bad", 2, vec![ONE; 4]).is_err());
        assert!(Gate::new("short", 2, vec![ONE; 3]).is_err());
        assert!(Gate::new("ok", 2, rx_entries(1.0).to_vec()).is_ok());
    }

    fn block(g: &Gate, off: usize) -> [Complex64; 4] {
        [
            g.entry(off, off),
            g.entry(off, off + 1),
            g.entry(off + 1, off),
            g.entry(off + 1, off + 1),
        ]
    }

    proptest! {
        #[test]
        fn constructors_are_unitary(theta in -20.0f64..20.0, d in 2usize..=8) {
            prop_assert!(rx(theta).unwrap().unitarity_error() <= TOL);
            prop_assert!(comparison_gate(theta).unwrap().unitarity_error() <= TOL);
            prop_assert!(pauli_x(d).unwrap().unitarity_error() <= TOL);
            prop_assert!(fourier(d).unwrap().unitarity_error() <= TOL);
        }

        #[test]
        fn rx_is_additive(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let ab = rx(a).unwrap().compose(&rx(b).unwrap()).unwrap();
            prop_assert!(ab.max_distance(&rx(a + b).unwrap()) <= TOL);
        }

        #[test]
        fn comparison_blocks_are_mutual_inverses(theta in -10.0f64..10.0) {
            let g = comparison_gate(theta).unwrap();
            let neg = comparison_gate(-theta).unwrap();
            // (0,1) block at θ equals the (1,0) block at −θ.
            let lhs = block(&g, 2);
            let rhs = block(&neg, 4);
            for (x, y) in lhs.iter().zip(rhs.iter()) {
                prop_assert!((x - y).norm() <= TOL);
            }
            let lo = Gate::new("lo", 2, lhs.to_vec()).unwrap();
            let hi = Gate::new("hi", 2, block(&g, 4).to_vec()).unwrap();
            prop_assert!(lo.compose(&hi).unwrap().max_distance(&Gate::identity(2).unwrap()) <= TOL);
        }
    }
}
