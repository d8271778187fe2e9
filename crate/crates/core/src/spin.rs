// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Basis conventions, state vectors and spin-½ operators embedded in the
//! product space of a lattice.
//!
//! Conventions used throughout the crate:
//!
//! * `Sᶻ|0⟩ = +½|0⟩` and `Sᶻ|1⟩ = −½|1⟩`, so `S⁺|1⟩ = |0⟩` and `S⁻|0⟩ = |1⟩`.
//! * Spins are ordered qubits first (`q0 … q(N−1)`), then isolators
//!   interleaved (`a0, b0, a1, b1, …`).
//! * Spin at position `p` (of `n`) carries bit weight `2^(n−1−p)`, i.e. the
//!   last spin in the ordering is the least-significant bit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Dense complex operator over a lattice basis.
pub type OperatorMatrix = DMatrix<C64>;

/// Largest lattice simulated with dense matrices (`2^7 = 128` amplitudes).
pub const MAX_DENSE_SPINS: usize = 7;

/// A single spin of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Site {
    /// Information qubit `qk`.
    Qubit(usize),
    /// Upper isolator `ak`, between qubits `k` and `k+1`.
    IsolatorA(usize),
    /// Lower isolator `bk`, between qubits `k` and `k+1`.
    IsolatorB(usize),
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Qubit(k) => write!(f, "q{k}"),
            Site::IsolatorA(k) => write!(f, "a{k}"),
            Site::IsolatorB(k) => write!(f, "b{k}"),
        }
    }
}

impl FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid site label `{s}` (expected q<k>, a<k> or b<k>)"));
        let mut chars = s.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let index: usize = chars.as_str().parse().map_err(|_| bad())?;
        match kind {
            'q' => Ok(Site::Qubit(index)),
            'a' => Ok(Site::IsolatorA(index)),
            'b' => Ok(Site::IsolatorB(index)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Site {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Site> for String {
    fn from(site: Site) -> Self {
        site.to_string()
    }
}

/// `N` information qubits and the `N − 1` isolator pairs between them, with a
/// fixed total ordering of the `3N − 2` spins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeLayout {
    num_qubits: usize,
    sites: Vec<Site>,
}

impl LatticeLayout {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::Config("a lattice needs at least one qubit".into()));
        }
        let mut sites: Vec<Site> = (0..num_qubits).map(Site::Qubit).collect();
        for k in 0..num_qubits - 1 {
            sites.push(Site::IsolatorA(k));
            sites.push(Site::IsolatorB(k));
        }
        Ok(Self { num_qubits, sites })
    }

    /// The four-spin elementary cell: qubits `q0, q1` and isolators `a0, b0`.
    pub fn cell() -> Self {
        Self::new(2).expect("two-qubit layout is valid")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_isolator_pairs(&self) -> usize {
        self.num_qubits - 1
    }

    pub fn num_spins(&self) -> usize {
        self.sites.len()
    }

    /// Hilbert-space dimension `2^(3N−2)`.
    pub fn dim(&self) -> usize {
        1 << self.num_spins()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn contains(&self, site: Site) -> bool {
        self.position(site).is_ok()
    }

    /// Tensor-product position of `site` in the ordering.
    pub fn position(&self, site: Site) -> Result<usize> {
        let n = self.num_qubits;
        match site {
            Site::Qubit(k) if k < n => Ok(k),
            Site::IsolatorA(k) if k + 1 < n => Ok(n + 2 * k),
            Site::IsolatorB(k) if k + 1 < n => Ok(n + 2 * k + 1),
            _ => Err(Error::UnknownSite(site.to_string())),
        }
    }

    /// Bit mask of `site` inside a basis index.
    pub fn mask(&self, site: Site) -> Result<usize> {
        let p = self.position(site)?;
        Ok(1 << (self.num_spins() - 1 - p))
    }

    /// Occupation bit of `site` in basis state `index`.
    pub fn bit(&self, index: usize, site: Site) -> Result<u8> {
        Ok(u8::from(index & self.mask(site)? != 0))
    }

    /// Decode a basis index into the occupation of every site.
    pub fn occupation(&self, index: usize) -> Result<BTreeMap<Site, u8>> {
        if index >= self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: index });
        }
        self.sites.iter().map(|&s| Ok((s, self.bit(index, s)?))).collect()
    }

    /// Refuse layouts too large for dense simulation.
    pub fn ensure_dense_capacity(&self) -> Result<()> {
        if self.num_spins() > MAX_DENSE_SPINS {
            return Err(Error::Capacity { spins: self.num_spins(), max: MAX_DENSE_SPINS });
        }
        Ok(())
    }
}

/// Deterministic index of a computational basis state; the inverse of
/// [`LatticeLayout::occupation`].
pub fn basis_index(occupation: &BTreeMap<Site, u8>, layout: &LatticeLayout) -> Result<usize> {
    let mut index = 0;
    for &site in layout.sites() {
        let bit = *occupation
            .get(&site)
            .ok_or_else(|| Error::Config(format!("occupation is missing site {site}")))?;
        if bit > 1 {
            return Err(Error::Config(format!("occupation of {site} must be 0 or 1, got {bit}")));
        }
        if bit == 1 {
            index |= layout.mask(site)?;
        }
    }
    if let Some(extra) = occupation.keys().find(|s| !layout.contains(**s)) {
        return Err(Error::UnknownSite(extra.to_string()));
    }
    Ok(index)
}

/// Single-spin operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinOp {
    Sz,
    Splus,
    Sminus,
    Sx,
    Sy,
}

impl SpinOp {
    /// The 2×2 matrix in the `{|0⟩, |1⟩}` basis.
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let z = C64::new(0.0, 0.0);
        let h = C64::new(0.5, 0.0);
        let o = C64::new(1.0, 0.0);
        let ih = C64::new(0.0, 0.5);
        match self {
            SpinOp::Sz => [[h, z], [z, -h]],
            SpinOp::Splus => [[z, o], [z, z]],
            SpinOp::Sminus => [[z, z], [o, z]],
            SpinOp::Sx => [[z, h], [h, z]],
            SpinOp::Sy => [[z, -ih], [ih, z]],
        }
    }
}

/// Embed a 2×2 single-spin matrix at `site`, identity elsewhere.
pub fn embed_single(m: &[[C64; 2]; 2], site: Site, layout: &LatticeLayout) -> Result<OperatorMatrix> {
    let mask = layout.mask(site)?;
    let dim = layout.dim();
    let mut out = OperatorMatrix::zeros(dim, dim);
    for col in 0..dim {
        let b_in = usize::from(col & mask != 0);
        for (b_out, m_row) in m.iter().enumerate() {
            let v = m_row[b_in];
            if v != C64::new(0.0, 0.0) {
                let row = if b_out == 1 { col | mask } else { col & !mask };
                out[(row, col)] = v;
            }
        }
    }
    Ok(out)
}

/// `kind` acting on `site`, identity on every other spin of `layout`.
pub fn embed_operator(kind: SpinOp, site: Site, layout: &LatticeLayout) -> Result<OperatorMatrix> {
    embed_single(&kind.matrix(), site, layout)
}

/// Normalised pure state over the layout's product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<C64>,
}

/// Norm tolerance accepted by [`QuantumState::from_normalized`].
pub const NORM_TOLERANCE: f64 = 1e-10;

impl QuantumState {
    /// Normalise an arbitrary non-zero amplitude vector.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Config("state vector must be finite and non-zero".into()));
        }
        Ok(Self { amplitudes: amplitudes / C64::new(norm, 0.0) })
    }

    /// Wrap amplitudes that are already normalised (within
    /// [`NORM_TOLERANCE`]); nothing is rescaled.
    pub fn from_normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let dev = (amplitudes.norm() - 1.0).abs();
        if !(dev <= NORM_TOLERANCE) {
            return Err(Error::Config(format!("state is not normalised (|‖ψ‖ − 1| = {dev:e})")));
        }
        Ok(Self { amplitudes })
    }

    /// Propagator output; the norm is whatever the dynamics produced.
    pub(crate) fn from_raw(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// Product of single-spin states, one `(amp0, amp1)` per spin in layout
    /// order. Each factor is normalised.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
        for f in factors {
            let n = (f[0].norm_sqr() + f[1].norm_sqr()).sqrt();
            if !(n > 0.0) {
                return Err(Error::Config("single-spin factor must be non-zero".into()));
            }
            let mut next = DVector::zeros(v.len() * 2);
            for (k, a) in v.iter().enumerate() {
                next[2 * k] = a * f[0] / n;
                next[2 * k + 1] = a * f[1] / n;
            }
            v = next;
        }
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Apply an operator (assumed unitary) to the state.
    pub fn apply(&self, op: &OperatorMatrix) -> Result<QuantumState> {
        check_dim(op.nrows(), self.dim())?;
        check_dim(op.ncols(), self.dim())?;
        Ok(Self { amplitudes: op * &self.amplitudes })
    }

    /// `max_k |ψ_k − φ_k|`.
    pub fn max_abs_diff(&self, other: &QuantumState) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `⟨ψ|Ô|ψ⟩`.
pub fn expectation(state: &QuantumState, op: &OperatorMatrix) -> Result<C64> {
    check_dim(op.nrows(), state.dim())?;
    check_dim(op.ncols(), state.dim())?;
    Ok(state.amplitudes.dotc(&(op * &state.amplitudes)))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
