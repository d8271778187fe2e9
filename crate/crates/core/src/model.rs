// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Lattice and cell Hamiltonians, the initial register state, and the
//! closed-form cell spectrum and detunings.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::spin::{embed_operator, LatticeLayout, OperatorMatrix, QuantumState, Site, SpinOp};
use crate::{Error, Result, C64};

/// Frequencies and couplings of a full lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Larmor frequencies `ω_k` of the `N` qubits.
    pub qubit_freqs: Vec<f64>,
    /// Frequencies `ω_ak` of the `N − 1` upper isolators.
    pub isolator_a_freqs: Vec<f64>,
    /// Frequencies `ω_bk` of the `N − 1` lower isolators.
    pub isolator_b_freqs: Vec<f64>,
    /// Qubit–isolator coupling.
    pub j: f64,
    /// Isolator–isolator coupling.
    pub j0: f64,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.qubit_freqs.len();
        if n == 0 {
            return Err(Error::Config("lattice needs at least one qubit frequency".into()));
        }
        for (name, list) in [("isolator_a_freqs", &self.isolator_a_freqs), ("isolator_b_freqs", &self.isolator_b_freqs)] {
            if list.len() != n - 1 {
                return Err(Error::Config(format!(
                    "{name} has {} entries, expected {} for {n} qubits",
                    list.len(),
                    n - 1
                )));
            }
        }
        let all = self.qubit_freqs.iter().chain(&self.isolator_a_freqs).chain(&self.isolator_b_freqs);
        if let Some(bad) = all.copied().find(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config(format!("frequencies must be finite and positive, got {bad}")));
        }
        if !self.j.is_finite() || !self.j0.is_finite() {
            return Err(Error::Config("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_freqs.len()
    }

    pub fn layout(&self) -> Result<LatticeLayout> {
        self.validate()?;
        LatticeLayout::new(self.num_qubits())
    }

    /// Energy of every computational basis state. The Hamiltonian is a sum of
    /// `Sᶻ` products, so this is its full diagonal.
    pub fn diagonal_energies(&self) -> Result<Vec<f64>> {
        let layout = self.layout()?;
        layout.ensure_dense_capacity()?;
        let n = self.num_qubits();
        let energies = (0..layout.dim())
            .map(|index| {
                let sz = |site: Site| {
                    if layout.bit(index, site).expect("site in layout") == 0 {
                        0.5
                    } else {
                        -0.5
                    }
                };
                let mut e = 0.0;
                for k in 0..n {
                    e -= self.qubit_freqs[k] * sz(Site::Qubit(k));
                }
                for k in 0..n.saturating_sub(1) {
                    let (za, zb) = (sz(Site::IsolatorA(k)), sz(Site::IsolatorB(k)));
                    e += self.isolator_a_freqs[k] * za;
                    e -= self.isolator_b_freqs[k] * zb;
                    e -= 2.0 * self.j0 * za * zb;
                    e -= 2.0 * self.j * (sz(Site::Qubit(k)) + sz(Site::Qubit(k + 1))) * (za + zb);
                }
                e
            })
            .collect();
        Ok(energies)
    }
}

/// Two qubits and the isolator pair between them. In the cell layout the
/// qubits are `q0`, `q1` and the isolators `a0`, `b0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub omega_1: f64,
    pub omega_2: f64,
    pub omega_a1: f64,
    pub omega_b1: f64,
    pub j: f64,
    pub j0: f64,
}

impl CellSpec {
    pub fn validate(&self) -> Result<()> {
        self.to_lattice().validate()
    }

    pub fn to_lattice(&self) -> LatticeSpec {
        LatticeSpec {
            qubit_freqs: vec![self.omega_1, self.omega_2],
            isolator_a_freqs: vec![self.omega_a1],
            isolator_b_freqs: vec![self.omega_b1],
            j: self.j,
            j0: self.j0,
        }
    }

    /// Basis index of `|a⟩|b⟩|q1 q2⟩` in the cell layout.
    pub fn basis_index(q1: u8, q2: u8, a: u8, b: u8) -> usize {
        (usize::from(q1) << 3) | (usize::from(q2) << 2) | (usize::from(a) << 1) | usize::from(b)
    }

    /// Index of group `j` (qubits `j = 2·q1 + q2`) with the isolator in its
    /// idle configuration `|1_a⟩|0_b⟩`.
    pub fn idle_index(j: usize) -> usize {
        Self::basis_index((j >> 1) as u8, (j & 1) as u8, 1, 0)
    }

    /// Index of group `j` with the `a` isolator flipped, `|0_a⟩|0_b⟩`.
    pub fn excited_index(j: usize) -> usize {
        Self::basis_index((j >> 1) as u8, (j & 1) as u8, 0, 0)
    }
}

/// One rectangular RF pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    /// Drive angular frequency `ω_a`.
    pub drive_freq: f64,
    /// Rabi frequency `Ω ≥ 0`.
    pub rabi_freq: f64,
    /// Duration `τ ≥ 0`.
    pub duration: f64,
    /// The driven spin.
    pub target: Site,
    #[serde(default)]
    pub carrier_phase: f64,
    /// Further spins that see the same RF field (off-resonant neighbours in
    /// crosstalk studies). Empty for an ideally addressed pulse.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spectators: Vec<Site>,
}

impl PulseSpec {
    pub fn new(drive_freq: f64, rabi_freq: f64, duration: f64, target: Site) -> Self {
        Self { drive_freq, rabi_freq, duration, target, carrier_phase: 0.0, spectators: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::Config(format!("pulse duration must be ≥ 0, got {}", self.duration)));
        }
        if !(self.rabi_freq.is_finite() && self.rabi_freq >= 0.0) {
            return Err(Error::Config(format!("Rabi frequency must be ≥ 0, got {}", self.rabi_freq)));
        }
        if !self.drive_freq.is_finite() || !self.carrier_phase.is_finite() {
            return Err(Error::Config("drive frequency and carrier phase must be finite".into()));
        }
        Ok(())
    }

    /// Every spin the field couples to, target first.
    pub fn driven_sites(&self) -> impl Iterator<Item = Site> + '_ {
        std::iter::once(self.target).chain(self.spectators.iter().copied())
    }
}

/// Energies of the eight cell basis states reachable from `|1_a⟩|0_b⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpectrum {
    /// `E_j` of `|1_a⟩|0_b⟩|q1 q2⟩`, `j = 2·q1 + q2`.
    pub e: [f64; 4],
    /// `Ẽ_j` of `|0_a⟩|0_b⟩|q1 q2⟩`.
    pub e_tilde: [f64; 4],
    /// Isolator-pair energy.
    pub e_ab: f64,
}

/// Detunings of the four driven two-level groups and their generalised Rabi
/// frequencies `λ_j = √(Δ_j² + Ω²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningSet {
    /// `Δ = Δ₁ = Δ₂`.
    pub delta: f64,
    pub delta0: f64,
    pub delta3: f64,
    pub lambda0: f64,
    pub lambda12: f64,
    pub lambda3: f64,
}

impl DetuningSet {
    pub fn delta_j(&self, j: usize) -> f64 {
        [self.delta0, self.delta, self.delta, self.delta3][j]
    }

    pub fn lambda_j(&self, j: usize) -> f64 {
        [self.lambda0, self.lambda12, self.lambda12, self.lambda3][j]
    }
}

fn diagonal_operator(energies: &[f64]) -> OperatorMatrix {
    OperatorMatrix::from_diagonal(&DVector::from_iterator(energies.len(), energies.iter().map(|&e| C64::new(e, 0.0))))
}

/// The static lattice Hamiltonian `Ĥ₀`. Diagonal in the computational basis.
pub fn build_lattice_hamiltonian(spec: &LatticeSpec) -> Result<OperatorMatrix> {
    Ok(diagonal_operator(&spec.diagonal_energies()?))
}

/// Register start state — qubits `|0⟩`, `a` isolators `|1⟩`, `b` isolators
/// `|0⟩` — and its energy `−½[Σω_k + Σ(ω_ak + ω_bk) − J₀(N−1)]`.
pub fn initial_state(spec: &LatticeSpec) -> Result<(QuantumState, f64)> {
    let layout = spec.layout()?;
    layout.ensure_dense_capacity()?;
    let mut index = 0;
    for k in 0..layout.num_isolator_pairs() {
        index |= layout.mask(Site::IsolatorA(k))?;
    }
    let state = QuantumState::basis(layout.dim(), index)?;
    let n = spec.num_qubits() as f64;
    let isolators: f64 = spec.isolator_a_freqs.iter().zip(&spec.isolator_b_freqs).map(|(a, b)| a + b).sum();
    let energy = -0.5 * (spec.qubit_freqs.iter().sum::<f64>() + isolators - spec.j0 * (n - 1.0));
    Ok((state, energy))
}

/// Static part of the driven-cell Hamiltonian: a 16×16 diagonal matrix over
/// `q0, q1, a0, b0`.
pub fn build_cell_drift(spec: &CellSpec) -> Result<OperatorMatrix> {
    build_lattice_hamiltonian(&spec.to_lattice())
}

/// The circular RF drive at time `t`:
/// `−(Ω/2) Σ_s [S⁻_s e^{i(ω_a t + φ)} + S⁺_s e^{−i(ω_a t + φ)}]` over the
/// driven sites.
///
/// The drive co-rotates with the `a` isolator, whose Zeeman term enters with
/// the opposite sign to the qubits; with `Sᶻ|0⟩ = +½|0⟩` this places the
/// `|1_a⟩ → |0_a⟩` resonance at `ω_a ≈ ω_a1` and produces the two-level
/// equations with detuning `Δ_j = ω_a − (Ẽ_j − E_j)`.
pub fn build_drive(pulse: &PulseSpec, layout: &LatticeLayout, t: f64) -> Result<OperatorMatrix> {
    let dim = layout.dim();
    let mut out = OperatorMatrix::zeros(dim, dim);
    let phase = C64::from_polar(1.0, pulse.drive_freq * t + pulse.carrier_phase);
    let half = C64::new(-0.5 * pulse.rabi_freq, 0.0);
    for site in pulse.driven_sites() {
        let sm = embed_operator(SpinOp::Sminus, site, layout)?;
        let sp = embed_operator(SpinOp::Splus, site, layout)?;
        out += (sm * phase + sp * phase.conj()) * half;
    }
    Ok(out)
}

/// Closed-form energies of the cell basis states reachable by driving `a`.
pub fn cell_spectrum(spec: &CellSpec) -> CellSpectrum {
    let &CellSpec { omega_1: w1, omega_2: w2, omega_a1: wa, omega_b1: wb, j, j0 } = spec;
    let e_ab = -(wb + wa - j0) / 2.0;
    let e = [-(w1 + w2) / 2.0 + e_ab, (w2 - w1) / 2.0 + e_ab, (w1 - w2) / 2.0 + e_ab, (w1 + w2) / 2.0 + e_ab];
    let shift = wa - j0;
    let e_tilde = [e[0] + shift - 2.0 * j, e[1] + shift, e[2] + shift, e[3] + shift + 2.0 * j];
    CellSpectrum { e, e_tilde, e_ab }
}

/// Detunings for drive frequency `drive_freq` and Rabi frequency `rabi`.
pub fn detunings(spec: &CellSpec, drive_freq: f64, rabi: f64) -> DetuningSet {
    let delta = drive_freq - spec.omega_a1 + spec.j0;
    let delta0 = delta + 2.0 * spec.j;
    let delta3 = delta - 2.0 * spec.j;
    DetuningSet {
        delta,
        delta0,
        delta3,
        lambda0: delta0.hypot(rabi),
        lambda12: delta.hypot(rabi),
        lambda3: delta3.hypot(rabi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_deviation, is_diagonal, max_abs, max_abs_diff};
    use crate::spin::expectation;
    use approx::assert_abs_diff_eq;

    fn cell() -> CellSpec {
        CellSpec { omega_1: 10.0, omega_2: 15.0, omega_a1: 50.0, omega_b1: 60.0, j: 1.0, j0: 0.2 }
    }

    fn small_lattice() -> LatticeSpec {
        LatticeSpec {
            qubit_freqs: vec![1.0, 1.0],
            isolator_a_freqs: vec![2.0],
            isolator_b_freqs: vec![2.0],
            j: 0.05,
            j0: 0.1,
        }
    }

    /// Independent route: assemble `Ĥ₀` from embedded `Sᶻ` operators.
    fn hamiltonian_from_operators(spec: &LatticeSpec) -> OperatorMatrix {
        let layout = spec.layout().unwrap();
        let sz = |s| embed_operator(SpinOp::Sz, s, &layout).unwrap();
        let r = |x: f64| C64::new(x, 0.0);
        let n = spec.num_qubits();
        let mut h = OperatorMatrix::zeros(layout.dim(), layout.dim());
        for k in 0..n {
            h -= sz(Site::Qubit(k)) * r(spec.qubit_freqs[k]);
        }
        for k in 0..n - 1 {
            let (za, zb) = (sz(Site::IsolatorA(k)), sz(Site::IsolatorB(k)));
            h += &za * r(spec.isolator_a_freqs[k]);
            h -= &zb * r(spec.isolator_b_freqs[k]);
            h -= &za * &zb * r(2.0 * spec.j0);
            h -= (sz(Site::Qubit(k)) + sz(Site::Qubit(k + 1))) * (&za + &zb) * r(2.0 * spec.j);
        }
        h
    }

    #[test]
    fn single_qubit_hamiltonian() {
        let spec = LatticeSpec { qubit_freqs: vec![1.0], isolator_a_freqs: vec![], isolator_b_freqs: vec![], j: 0.3, j0: 0.1 };
        let h = build_lattice_hamiltonian(&spec).unwrap();
        assert_eq!(h[(0, 0)], C64::new(-0.5, 0.0));
        assert_eq!(h[(1, 1)], C64::new(0.5, 0.0));
        let (_, e) = initial_state(&spec).unwrap();
        assert_eq!(e, -0.5);
    }

    #[test]
    fn two_qubit_reference_entry_and_energy() {
        let spec = small_lattice();
        let h = build_lattice_hamiltonian(&spec).unwrap();
        let layout = spec.layout().unwrap();
        let idx = layout.mask(Site::IsolatorA(0)).unwrap();
        assert_abs_diff_eq!(h[(idx, idx)].re, -2.95, epsilon = 1e-14);
        let (psi, e) = initial_state(&spec).unwrap();
        assert_abs_diff_eq!(e, -2.95, epsilon = 1e-14);
        assert!(is_diagonal(&h));
        let residual = h * psi.amplitudes() - psi.amplitudes() * C64::new(e, 0.0);
        assert!(residual.norm() < 1e-12);
        assert!((expectation(&psi, &build_lattice_hamiltonian(&spec).unwrap()).unwrap().re - e).abs() < 1e-12);
    }

    #[test]
    fn lattice_hamiltonian_matches_operator_sum() {
        let spec = LatticeSpec {
            qubit_freqs: vec![3.1, 4.7, 5.3],
            isolator_a_freqs: vec![20.0, 23.0],
            isolator_b_freqs: vec![31.0, 37.0],
            j: 0.7,
            j0: -0.4,
        };
        let h = build_lattice_hamiltonian(&spec).unwrap();
        assert!(max_abs_diff(&h, &hamiltonian_from_operators(&spec)) < 1e-12);
        assert!(hermitian_deviation(&h) == 0.0);
        let layout = spec.layout().unwrap();
        for &site in layout.sites() {
            let sz = embed_operator(SpinOp::Sz, site, &layout).unwrap();
            assert_eq!(max_abs(&(&h * &sz - &sz * &h)), 0.0);
        }
    }

    #[test]
    fn opposite_isolators_cancel_qubit_coupling_exactly() {
        let mut spec = LatticeSpec {
            qubit_freqs: vec![3.1, 4.7, 5.3],
            isolator_a_freqs: vec![20.0, 23.0],
            isolator_b_freqs: vec![31.0, 37.0],
            j: 0.7,
            j0: 0.4,
        };
        let with_j = spec.diagonal_energies().unwrap();
        spec.j = 0.0;
        let without_j = spec.diagonal_energies().unwrap();
        let layout = spec.layout().unwrap();
        for index in 0..layout.dim() {
            let opposite = (0..2).all(|k| {
                layout.bit(index, Site::IsolatorA(k)).unwrap() != layout.bit(index, Site::IsolatorB(k)).unwrap()
            });
            if opposite {
                assert_eq!(with_j[index], without_j[index], "J leaked into index {index}");
            }
        }
    }

    #[test]
    fn mismatched_frequency_lists_are_rejected() {
        let mut spec = small_lattice();
        spec.isolator_b_freqs.push(3.0);
        assert!(matches!(build_lattice_hamiltonian(&spec), Err(Error::Config(_))));
        let mut spec = small_lattice();
        spec.qubit_freqs[0] = -1.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn cell_drift_against_spectrum() {
        let spec = cell();
        let drift = build_cell_drift(&spec).unwrap();
        let s = cell_spectrum(&spec);
        for j in 0..4 {
            let (i, x) = (CellSpec::idle_index(j), CellSpec::excited_index(j));
            assert_abs_diff_eq!(drift[(i, i)].re, s.e[j], epsilon = 1e-12);
            assert_abs_diff_eq!(drift[(x, x)].re, s.e_tilde[j], epsilon = 1e-12);
        }
        let gap = drift[(CellSpec::excited_index(0), CellSpec::excited_index(0))].re
            - drift[(CellSpec::idle_index(0), CellSpec::idle_index(0))].re;
        assert_abs_diff_eq!(gap, spec.omega_a1 - spec.j0 - 2.0 * spec.j, epsilon = 1e-12);
    }

    #[test]
    fn cell_drift_all_sixteen_entries_match_direct_sum() {
        let spec = cell();
        let drift = build_cell_drift(&spec).unwrap();
        for q1 in 0..2u8 {
            for q2 in 0..2u8 {
                for a in 0..2u8 {
                    for b in 0..2u8 {
                        let z = |bit: u8| if bit == 0 { 0.5 } else { -0.5 };
                        let e = -spec.omega_1 * z(q1) - spec.omega_2 * z(q2) + spec.omega_a1 * z(a)
                            - spec.omega_b1 * z(b)
                            - 2.0 * spec.j * (z(q1) + z(q2)) * (z(a) + z(b))
                            - 2.0 * spec.j0 * z(a) * z(b);
                        let i = CellSpec::basis_index(q1, q2, a, b);
                        assert_abs_diff_eq!(drift[(i, i)].re, e, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_cell_is_pure_zeeman() {
        let spec = CellSpec { j: 0.0, j0: 0.0, ..cell() };
        let drift = build_cell_drift(&spec).unwrap();
        let i = CellSpec::basis_index(1, 0, 1, 1);
        assert_abs_diff_eq!(drift[(i, i)].re, 5.0 - 7.5 - 25.0 + 30.0, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_symmetries() {
        let spec = CellSpec { omega_2: 10.0, ..cell() };
        let s = cell_spectrum(&spec);
        assert_eq!(s.e[1], s.e_ab);
        assert_eq!(s.e[2], s.e_ab);
        let s = cell_spectrum(&cell());
        assert_abs_diff_eq!(s.e[0] + s.e[3], 2.0 * s.e_ab, epsilon = 1e-12);
        assert_abs_diff_eq!(s.e[1] + s.e[2], 2.0 * s.e_ab, epsilon = 1e-12);
        assert_abs_diff_eq!(s.e_tilde[1] - s.e[1], 50.0 - 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.e_tilde[3] - s.e[3], 50.0 - 0.2 + 2.0, epsilon = 1e-12);
    }

    #[test]
    fn drive_properties() {
        let layout = LatticeLayout::cell();
        let mut pulse = PulseSpec::new(50.0, 0.0, 1.0, Site::IsolatorA(0));
        assert_eq!(max_abs(&build_drive(&pulse, &layout, 0.3).unwrap()), 0.0);
        pulse.rabi_freq = 0.8;
        let sx = embed_operator(SpinOp::Sx, Site::IsolatorA(0), &layout).unwrap();
        let v0 = build_drive(&pulse, &layout, 0.0).unwrap();
        assert!(max_abs_diff(&v0, &(sx * C64::new(-0.8, 0.0))) < 1e-15);
        for t in [0.0, 0.1, 1.3, 7.9] {
            let v = build_drive(&pulse, &layout, t).unwrap();
            assert!(hermitian_deviation(&v) < 1e-15);
            assert_abs_diff_eq!(v.norm(), v0.norm(), epsilon = 1e-12);
        }
        pulse.target = Site::IsolatorA(3);
        assert!(matches!(build_drive(&pulse, &layout, 0.0), Err(Error::UnknownSite(_))));
    }

    #[test]
    fn detuning_examples() {
        let spec = cell();
        let d = detunings(&spec, spec.omega_a1 - spec.j0 + 2.0 * spec.j, 0.1);
        assert_abs_diff_eq!(d.delta, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.delta0, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.delta3, 0.0, epsilon = 1e-12);

        let d = detunings(&spec, 47.3, 0.0);
        for j in 0..4 {
            assert_eq!(d.lambda_j(j), d.delta_j(j).abs());
        }

        let omega = (27.0f64 / 5.0).sqrt();
        let d = detunings(&spec, spec.omega_a1 - spec.j0 - 1.0, omega);
        assert_abs_diff_eq!(d.delta, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.lambda0, (32.0f64 / 5.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.lambda3, (72.0f64 / 5.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn detunings_are_consistent_with_spectrum() {
        let spec = cell();
        let s = cell_spectrum(&spec);
        for drive in [45.0, 49.5, 51.8, 55.0] {
            let d = detunings(&spec, drive, 0.7);
            assert_eq!(d.delta0, d.delta + 2.0 * spec.j);
            assert_eq!(d.delta3, d.delta - 2.0 * spec.j);
            for j in 0..4 {
                assert_abs_diff_eq!(d.delta_j(j), drive - (s.e_tilde[j] - s.e[j]), epsilon = 1e-12);
                assert!(d.lambda_j(j) >= d.delta_j(j).abs() && d.lambda_j(j) >= 0.7);
            }
        }
    }
}
