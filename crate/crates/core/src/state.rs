//! Dense state vectors over mixed-radix registers.
//!
//! A [`RegisterLayout`] is an ordered list of sites. Amplitudes are stored
//! row-major over that list: the last site varies fastest, so the stride of
//! site `i` is the product of the dimensions of the sites after it.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, QarnError, Result};
use crate::gates::Gate;

/// Allowed `|‖ψ‖² − 1|` after any operation.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// What a site holds in the search circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteRole {
    /// Bit `k` (0 = most significant) of the reference value.
    BBit(usize),
    /// Bit `bit` (0 = most significant) of array element `element`.
    ABit { element: usize, bit: usize },
    /// Bit `k` of the copy buffer.
    CBit(usize),
    /// The index qudit entangled with the copy buffer.
    Index,
    /// Score qubit collecting comparison rotations.
    Score,
    /// Free-standing site with no circuit meaning.
    Generic(usize),
}

impl fmt::Display for SiteRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteRole::BBit(k) => write!(f, "B{k}"),
            SiteRole::ABit { element, bit } => write!(f, "A{element}.{bit}"),
            SiteRole::CBit(k) => write!(f, "C{k}"),
            SiteRole::Index => f.write_str("D"),
            SiteRole::Score => f.write_str("S"),
            SiteRole::Generic(i) => write!(f, "q{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Site {
    pub role: SiteRole,
    pub dim: usize,
}

impl Site {
    pub fn new(role: SiteRole, dim: usize) -> Self {
        Self { role, dim }
    }

    pub fn qubit(role: SiteRole) -> Self {
        Self { role, dim: 2 }
    }
}

/// Ordered sites plus the derived row-major strides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    sites: Vec<Site>,
    strides: Vec<usize>,
    total: usize,
}

impl RegisterLayout {
    /// Builds a layout, enforcing `dim ≥ 2` per site and `max_amplitudes` on
    /// the product of dimensions.
    pub fn with_cap(sites: Vec<Site>, max_amplitudes: u128) -> Result<Self> {
        if sites.is_empty() {
            return invalid("layout needs at least one site");
        }
        if let Some(s) = sites.iter().find(|s| s.dim < 2) {
            return invalid(format!("site {} has dimension {} < 2", s.role, s.dim));
        }
        let required = required_amplitudes(sites.iter().map(|s| s.dim));
        let cap = max_amplitudes.min(usize::MAX as u128);
        if required > cap {
            return Err(QarnError::Capacity { required, cap });
        }
        let mut strides = vec![1usize; sites.len()];
        for i in (0..sites.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sites[i + 1].dim;
        }
        Ok(Self {
            total: required as usize,
            sites,
            strides,
        })
    }

    pub fn new(sites: Vec<Site>) -> Result<Self> {
        Self::with_cap(sites, u128::MAX)
    }

    /// Layout of anonymous sites with the given dimensions.
    pub fn from_dims(dims: &[usize]) -> Result<Self> {
        Self::new(
            dims.iter()
                .enumerate()
                .map(|(i, &d)| Site::new(SiteRole::Generic(i), d))
                .collect(),
        )
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.dim).collect()
    }

    pub fn dim(&self, site: usize) -> usize {
        self.sites[site].dim
    }

    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn total_dimension(&self) -> usize {
        self.total
    }

    /// Position of the first site with `role`.
    pub fn find(&self, role: SiteRole) -> Option<usize> {
        self.sites.iter().position(|s| s.role == role)
    }

    /// Like [`find`](Self::find) but an error when absent.
    pub fn require(&self, role: SiteRole) -> Result<usize> {
        self.find(role)
            .ok_or_else(|| QarnError::InvalidInput(format!("layout has no site {role}")))
    }

    pub fn flatten(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.sites.len() {
            return invalid(format!(
                "expected {} digits, got {}",
                self.sites.len(),
                digits.len()
            ));
        }
        let mut idx = 0;
        for (i, (&d, site)) in digits.iter().zip(&self.sites).enumerate() {
            if d >= site.dim {
                return invalid(format!(
                    "digit {d} out of range for site {i} ({}) of dimension {}",
                    site.role, site.dim
                ));
            }
            idx += d * self.strides[i];
        }
        Ok(idx)
    }

    pub fn unflatten(&self, index: usize) -> Vec<usize> {
        self.sites
            .iter()
            .zip(&self.strides)
            .map(|(s, &st)| (index / st) % s.dim)
            .collect()
    }

    #[inline]
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.sites[site].dim
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site < self.sites.len() {
            Ok(())
        } else {
            invalid(format!(
                "site {site} not in layout of {} sites",
                self.sites.len()
            ))
        }
    }
}

/// Product of `dims` in `u128`, saturating on overflow.
pub(crate) fn required_amplitudes(dims: impl IntoIterator<Item = usize>) -> u128 {
    dims.into_iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d as u128))
        .unwrap_or(u128::MAX)
}

/// A control condition: `site` must hold `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub site: usize,
    pub value: usize,
}

impl Control {
    pub fn new(site: usize, value: usize) -> Self {
        Self { site, value }
    }
}

/// Probability table over the digit tuples of a subset of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub sites: Vec<usize>,
    pub dims: Vec<usize>,
    /// Row-major over `sites` in the order given.
    pub probabilities: Vec<f64>,
}

impl Marginal {
    pub fn get(&self, digits: &[usize]) -> f64 {
        assert_eq!(digits.len(), self.dims.len());
        let idx = digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&d, &dim)| acc * dim + d);
        self.probabilities[idx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Arc<RegisterLayout>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state `|digits⟩`.
    pub fn basis(layout: impl Into<Arc<RegisterLayout>>, digits: &[usize]) -> Result<Self> {
        let layout = layout.into();
        let idx = layout.flatten(digits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.total_dimension()];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    /// Wraps explicit amplitudes; they must already have unit norm.
    pub fn from_amplitudes(
        layout: impl Into<Arc<RegisterLayout>>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let layout = layout.into();
        if amplitudes.len() != layout.total_dimension() {
            return invalid(format!(
                "layout has {} amplitudes, got {}",
                layout.total_dimension(),
                amplitudes.len()
            ));
        }
        let state = Self { layout, amplitudes };
        let drift = (state.norm_sqr() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return invalid(format!("amplitudes are not normalised (drift {drift:e})"));
        }
        Ok(state)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn shared_layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.layout.flatten(digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Applies `gate` to a single `target` site when every control matches.
    pub fn apply_controlled(self, controls: &[Control], target: usize, gate: &Gate) -> Result<Self> {
        self.apply(controls, &[target], gate)
    }

    /// Applies `gate` to the tensor product of `targets` (first target most
    /// significant) when every control matches.
    pub fn apply(mut self, controls: &[Control], targets: &[usize], gate: &Gate) -> Result<Self> {
        self.apply_in_place(controls, targets, gate)?;
        Ok(self)
    }

    pub(crate) fn apply_in_place(
        &mut self,
        controls: &[Control],
        targets: &[usize],
        gate: &Gate,
    ) -> Result<()> {
        let layout = &*self.layout;
        if targets.is_empty() {
            return invalid("gate needs at least one target site");
        }
        for &t in targets {
            layout.check_site(t)?;
        }
        for (i, &t) in targets.iter().enumerate() {
            if targets[..i].contains(&t) {
                return invalid(format!("target site {t} listed twice"));
            }
        }
        for (i, c) in controls.iter().enumerate() {
            layout.check_site(c.site)?;
            if targets.contains(&c.site) {
                return invalid(format!("site {} is both control and target", c.site));
            }
            if controls[..i].iter().any(|o| o.site == c.site) {
                return invalid(format!("control site {} listed twice", c.site));
            }
            if c.value >= layout.dim(c.site) {
                return invalid(format!(
                    "control value {} out of range for site {} of dimension {}",
                    c.value,
                    c.site,
                    layout.dim(c.site)
                ));
            }
        }
        let block: usize = targets.iter().map(|&t| layout.dim(t)).product();
        if block != gate.dim() {
            return invalid(format!(
                "gate '{}' has dimension {} but targets span {block}",
                gate.label(),
                gate.dim()
            ));
        }

        // Flat offsets of each target digit tuple relative to the block base.
        let mut offsets = vec![0usize; block];
        for (q, off) in offsets.iter_mut().enumerate() {
            let mut rem = q;
            for &t in targets.iter().rev() {
                let d = layout.dim(t);
                *off += (rem % d) * layout.stride(t);
                rem /= d;
            }
        }

        // Block bases: controls pinned, targets at zero, free sites enumerated
        // with an odometer (last site fastest).
        let pinned: usize = controls.iter().map(|c| c.value * layout.stride(c.site)).sum();
        let free: Vec<usize> = (0..layout.len())
            .filter(|s| !targets.contains(s) && !controls.iter().any(|c| c.site == *s))
            .collect();
        let mut digits = vec![0usize; free.len()];
        let mut base = pinned;

        let matrix = gate.matrix();
        let mut gathered = vec![Complex64::new(0.0, 0.0); block];
        loop {
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base + off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let row = &matrix[r * block..(r + 1) * block];
                self.amplitudes[base + off] = row.iter().zip(&gathered).map(|(m, a)| m * a).sum();
            }

            let mut pos = free.len();
            loop {
                if pos == 0 {
                    return self.check_norm();
                }
                pos -= 1;
                let site = free[pos];
                digits[pos] += 1;
                base += layout.stride(site);
                if digits[pos] < layout.dim(site) {
                    break;
                }
                base -= digits[pos] * layout.stride(site);
                digits[pos] = 0;
            }
        }
    }

    fn check_norm(&self) -> Result<()> {
        let drift = (self.norm_sqr() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            Err(QarnError::Numeric(format!(
                "state norm drifted by {drift:e}"
            )))
        } else {
            Ok(())
        }
    }

    /// Probabilities of the digit tuples of `sites`, summing out the rest.
    pub fn marginal_probabilities(&self, sites: &[usize]) -> Result<Marginal> {
        if sites.is_empty() {
            return invalid("marginal needs at least one site");
        }
        for (i, &s) in sites.iter().enumerate() {
            self.layout.check_site(s)?;
            if sites[..i].contains(&s) {
                return invalid(format!("site {s} listed twice"));
            }
        }
        let dims: Vec<usize> = sites.iter().map(|&s| self.layout.dim(s)).collect();
        let mut probabilities = vec![0.0; dims.iter().product()];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let key = sites
                .iter()
                .zip(&dims)
                .fold(0, |acc, (&s, &d)| acc * d + self.layout.digit(idx, s));
            probabilities[key] += p;
        }
        Ok(Marginal {
            sites: sites.to_vec(),
            dims,
            probabilities,
        })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.layout != other.layout {
            return invalid("inner product of states with different layouts");
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest per-amplitude distance to `other`; infinite if layouts differ.
    pub fn max_distance(&self, other: &StateVector) -> f64 {
        if self.layout != other.layout {
            return f64::INFINITY;
        }
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
