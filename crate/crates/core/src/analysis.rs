// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate extraction and verification: effective two-qubit gates with their
//! leakage, fidelity and global phase, idle-mode interaction cancellation,
//! and pulse crosstalk on small lattices.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_eigen, max_abs_diff, unitary_deviation};
use crate::model::{build_lattice_hamiltonian, CellSpec, LatticeSpec};
use crate::protocols::{GateSchedule, GateStep, TargetGate};
use crate::spin::{LatticeLayout, QuantumState, Site};
use crate::{Error, Result, C64};

/// Below this `|Tr(T†G)|` no global phase is recovered.
const ALIGNMENT_FLOOR: f64 = 1e-12;

/// Leakage below which an extracted gate must be unitary to
/// [`UNITARITY_TOLERANCE`].
pub const LOW_LEAKAGE: f64 = 1e-6;
pub const UNITARITY_TOLERANCE: f64 = 1e-5;

/// Effective qubit-subspace gate of a cell schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    /// 4×4 matrix over `|q1 q2⟩` in the interaction picture, restricted to
    /// the isolator-returned subspace `|1_a⟩|0_b⟩`.
    pub gate: DMatrix<C64>,
    pub target: TargetGate,
    /// `max_j (1 − ‖column j‖²)`.
    pub leakage: f64,
    /// `min_j ‖column j‖²`.
    pub min_survival: f64,
    /// Phase-aligned max-entry distance to the target; unaligned when the
    /// phase is undefined.
    pub distance: f64,
    /// Recovered global phase in `(−π, π]`, if defined.
    pub global_phase: Option<f64>,
    pub fidelity: f64,
    /// `max |G†G − 1|`.
    pub unitarity_deviation: f64,
}

impl GateReport {
    pub fn infidelity(&self) -> f64 {
        // Roundoff can push F a hair above one.
        (1.0 - self.fidelity).max(0.0)
    }

    /// Flag for reports computed on a leaky, non-unitary `G`.
    pub fn is_near_unitary(&self) -> bool {
        self.unitarity_deviation <= UNITARITY_TOLERANCE
    }
}

fn wrap_phase(theta: f64) -> f64 {
    // atan2 already lands in [−π, π]; move the lower endpoint up.
    if theta <= -PI {
        theta + 2.0 * PI
    } else {
        theta
    }
}

/// `Θ̂ = arg Tr(T†G)` and `max |e^{−iΘ̂}G − T|`.
pub fn phase_aligned_distance(g: &DMatrix<C64>, t: &DMatrix<C64>) -> Result<(f64, f64)> {
    if g.shape() != (4, 4) || t.shape() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, found: if g.shape() != (4, 4) { g.nrows() } else { t.nrows() } });
    }
    let tr = (t.adjoint() * g).trace();
    if tr.norm() < ALIGNMENT_FLOOR {
        return Err(Error::UndefinedAlignment { unaligned_distance: max_abs_diff(g, t) });
    }
    let theta = wrap_phase(tr.arg());
    let aligned = g * C64::from_polar(1.0, -theta);
    Ok((max_abs_diff(&aligned, t), theta))
}

/// `(|Tr(T†G)|² + d) / (d(d + 1))` with `d = 4`.
pub fn average_gate_fidelity(g: &DMatrix<C64>, t: &DMatrix<C64>) -> f64 {
    let d = g.nrows() as f64;
    let tr = (t.adjoint() * g).trace();
    (tr.norm_sqr() + d) / (d * (d + 1.0))
}

/// Qubit-subspace block of a cell unitary: `G[i][j] = U[idle(i), idle(j)]`.
fn qubit_block(u: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| u[(CellSpec::idle_index(r), CellSpec::idle_index(c))])
}

/// Run `schedule` on the four register states `|1_a⟩|0_b⟩|q1 q2⟩` and report
/// the effective gate against the schedule's target.
pub fn extract_gate(schedule: &GateSchedule, spec: &CellSpec) -> Result<GateReport> {
    extract_gate_against(schedule, spec, &schedule.target.matrix()).map(|mut r| {
        r.target = schedule.target;
        r
    })
}

/// As [`extract_gate`] with an explicit target matrix.
pub fn extract_gate_against(schedule: &GateSchedule, spec: &CellSpec, target: &DMatrix<C64>) -> Result<GateReport> {
    let cell_sites = GateSchedule::empty(0).cell_sites();
    if schedule.cell != 0 {
        return Err(Error::Scope(format!("a single-cell spec has only cell 0, schedule targets cell {}", schedule.cell)));
    }
    if let Some(site) = schedule.sites().into_iter().find(|s| !cell_sites.contains(s)) {
        return Err(Error::Scope(format!("schedule touches {site}, outside the target cell")));
    }
    let u = schedule.unitary(&spec.to_lattice())?;
    let gate = qubit_block(&u);
    let survival: Vec<f64> = gate.column_iter().map(|c| c.norm_squared()).collect();
    let min_survival = survival.iter().copied().fold(f64::INFINITY, f64::min);
    let leakage = survival.iter().map(|s| (1.0 - s).max(0.0)).fold(0.0, f64::max);
    let (distance, global_phase) = match phase_aligned_distance(&gate, target) {
        Ok((d, theta)) => (d, Some(theta)),
        Err(Error::UndefinedAlignment { unaligned_distance }) => (unaligned_distance, None),
        Err(e) => return Err(e),
    };
    Ok(GateReport {
        fidelity: average_gate_fidelity(&gate, target),
        unitarity_deviation: unitary_deviation(&gate),
        gate,
        target: schedule.target,
        leakage,
        min_survival,
        distance,
        global_phase,
    })
}

/// Reduced density matrix of `keep` (first site most significant).
pub fn reduced_density_matrix(state: &QuantumState, layout: &LatticeLayout, keep: &[Site]) -> Result<DMatrix<C64>> {
    if state.dim() != layout.dim() {
        return Err(Error::DimensionMismatch { expected: layout.dim(), found: state.dim() });
    }
    let masks = keep.iter().map(|&s| layout.mask(s)).collect::<Result<Vec<_>>>()?;
    let kept: usize = masks.iter().fold(0, |acc, m| acc | m);
    let k = keep.len();
    let mut blocks: BTreeMap<usize, DVector<C64>> = BTreeMap::new();
    for (i, amp) in state.amplitudes().iter().enumerate() {
        let sub = masks.iter().fold(0, |acc, m| (acc << 1) | usize::from(i & m != 0));
        blocks.entry(i & !kept).or_insert_with(|| DVector::zeros(1 << k))[sub] = *amp;
    }
    let mut rho = DMatrix::zeros(1 << k, 1 << k);
    for v in blocks.values() {
        rho += v * v.adjoint();
    }
    Ok(rho)
}

/// Eigenvalues of a density matrix below this are treated as zero in
/// [`concurrence`].
const RANK_FLOOR: f64 = 1e-13;

/// Wootters concurrence of a two-qubit density matrix.
///
/// Computed from the decomposition `ρ = Σ x_i x_i†` (eigenvectors scaled by
/// `√p_i`): the λ's are the singular values of `τ_ij = x_iᵀ (σʸ⊗σʸ) x_j`,
/// which avoids square roots of roundoff-level eigenvalues.
pub fn concurrence(rho: &DMatrix<C64>) -> Result<f64> {
    if rho.shape() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.nrows() });
    }
    let (vals, vecs) = hermitian_eigen(rho);
    let xs: Vec<DVector<C64>> = vals
        .iter()
        .zip(vecs.column_iter())
        .filter(|(p, _)| **p > RANK_FLOOR)
        .map(|(p, v)| v.into_owned() * C64::new(p.sqrt(), 0.0))
        .collect();
    if xs.is_empty() {
        return Ok(0.0);
    }
    // σʸ⊗σʸ in the |00⟩,|01⟩,|10⟩,|11⟩ basis is the anti-diagonal (−1, 1, 1, −1).
    let yy = |x: &DVector<C64>| DVector::from_vec(vec![-x[3], x[2], x[1], -x[0]]);
    let tau = DMatrix::from_fn(xs.len(), xs.len(), |i, j| xs[i].dot(&yy(&xs[j])));
    let mut s: Vec<f64> = tau.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let c = s[0] - s[1..].iter().sum::<f64>();
    Ok(c.max(0.0))
}

/// Preparation of every isolator pair for idle checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsolatorConfig {
    /// `|1_a⟩|0_b⟩`, the register's idle configuration.
    Opposite,
    /// `|0_a⟩|1_b⟩`.
    Flipped,
    /// `|0_a⟩|0_b⟩`; breaks the cancellation.
    BothZero,
    /// `|1_a⟩|1_b⟩`.
    BothOne,
}

impl IsolatorConfig {
    fn bits(self) -> (u8, u8) {
        match self {
            IsolatorConfig::Opposite => (1, 0),
            IsolatorConfig::Flipped => (0, 1),
            IsolatorConfig::BothZero => (0, 0),
            IsolatorConfig::BothOne => (1, 1),
        }
    }
}

/// Bloch-sphere qubit preparation `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    /// `|+⟩ = (|0⟩ + |1⟩)/√2`.
    pub const PLUS: BlochAngles = BlochAngles { theta: PI / 2.0, phi: 0.0 };

    fn amplitudes(self) -> [C64; 2] {
        [C64::new((self.theta / 2.0).cos(), 0.0), C64::from_polar((self.theta / 2.0).sin(), self.phi)]
    }
}

/// Product state of the lattice with the given qubit and isolator
/// preparations.
pub fn prepare_product_state(layout: &LatticeLayout, qubits: &[BlochAngles], isolators: IsolatorConfig) -> Result<QuantumState> {
    if qubits.len() != layout.num_qubits() {
        return Err(Error::Config(format!(
            "{} qubit preparations given for {} qubits",
            qubits.len(),
            layout.num_qubits()
        )));
    }
    let basis = |b: u8| if b == 0 { [C64::new(1.0, 0.0), C64::new(0.0, 0.0)] } else { [C64::new(0.0, 0.0), C64::new(1.0, 0.0)] };
    let (a, b) = isolators.bits();
    let factors: Vec<[C64; 2]> = layout
        .sites()
        .iter()
        .map(|site| match site {
            Site::Qubit(k) => qubits[*k].amplitudes(),
            Site::IsolatorA(_) => basis(a),
            Site::IsolatorB(_) => basis(b),
        })
        .collect();
    QuantumState::product(&factors)
}

/// Entanglement and drift generated by free evolution of the register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdleReport {
    /// `(k, l, max_t C(ρ_kl(t)))` for every qubit pair.
    pub pair_concurrence: Vec<(usize, usize, f64)>,
    pub max_concurrence: f64,
    /// `max_{k,t} |P_k(1, t) − P_k(1, 0)|`.
    pub population_drift: f64,
    /// `max_t (1 − |⟨ψ_{J=0}(t)|ψ(t)⟩|²)`: how far the register departs from
    /// evolution with the qubit–isolator coupling switched off.
    pub interaction_error: f64,
    pub grid_points: usize,
}

fn diagonal_evolve(energies: &[f64], psi: &QuantumState, t: f64) -> QuantumState {
    QuantumState::from_raw(DVector::from_iterator(
        psi.dim(),
        psi.amplitudes().iter().zip(energies).map(|(a, e)| a * C64::from_polar(1.0, -e * t)),
    ))
}

/// Evolve a product register under the static lattice Hamiltonian on the grid
/// `t_i = duration · i / grid`, `i = 0..=grid`, and measure what the
/// qubit–isolator coupling does to the qubits.
pub fn idle_invariance_check(
    spec: &LatticeSpec,
    qubits: &[BlochAngles],
    isolators: IsolatorConfig,
    duration: f64,
    grid: usize,
) -> Result<IdleReport> {
    let layout = spec.layout()?;
    layout.ensure_dense_capacity()?;
    if grid == 0 || !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::Config("idle check needs grid ≥ 1 and a finite duration ≥ 0".into()));
    }
    let psi0 = prepare_product_state(&layout, qubits, isolators)?;
    let energies = spec.diagonal_energies()?;
    let free = LatticeSpec { j: 0.0, ..spec.clone() }.diagonal_energies()?;
    let n = layout.num_qubits();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).collect();
    let mut pair_max = vec![0.0f64; pairs.len()];
    let population = |psi: &QuantumState, k: usize| -> Result<f64> {
        let rho = reduced_density_matrix(psi, &layout, &[Site::Qubit(k)])?;
        Ok(rho[(1, 1)].re)
    };
    let p0 = (0..n).map(|k| population(&psi0, k)).collect::<Result<Vec<_>>>()?;
    let (mut drift, mut interaction_error) = (0.0f64, 0.0f64);
    for i in 0..=grid {
        let t = duration * i as f64 / grid as f64;
        let psi = diagonal_evolve(&energies, &psi0, t);
        let reference = diagonal_evolve(&free, &psi0, t);
        for (slot, &(k, l)) in pair_max.iter_mut().zip(&pairs) {
            let rho = reduced_density_matrix(&psi, &layout, &[Site::Qubit(k), Site::Qubit(l)])?;
            *slot = slot.max(concurrence(&rho)?);
        }
        for (k, p) in p0.iter().enumerate() {
            drift = drift.max((population(&psi, k)? - p).abs());
        }
        interaction_error = interaction_error.max((1.0 - reference.inner(&psi)?.norm_sqr()).max(0.0));
    }
    let pair_concurrence: Vec<_> = pairs.iter().zip(&pair_max).map(|(&(k, l), &c)| (k, l, c)).collect();
    Ok(IdleReport {
        max_concurrence: pair_max.iter().copied().fold(0.0, f64::max),
        pair_concurrence,
        population_drift: drift,
        interaction_error,
        grid_points: grid + 1,
    })
}

/// One point of a crosstalk sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkPoint {
    /// `ω_(a, spectator) − ω_(a, target)`; infinite means the spectators are
    /// decoupled from the field.
    pub separation: f64,
    /// Probability that some spectator isolator left `|1_a⟩|0_b⟩`.
    pub spectator_excitation: f64,
    /// `1 − |⟨ψ_ref|ψ⟩|²` against the run with spectators decoupled.
    pub disturbance: f64,
}

/// Run a cell-0 schedule on the full lattice while the RF field also reaches
/// every other `a` isolator, detuned by each `separation` in turn.
///
/// Every spectator isolator gets frequency `ω_a0 + separation`. The register
/// starts from `qubits` with all isolators opposite.
pub fn crosstalk_sweep(
    spec: &LatticeSpec,
    schedule: &GateSchedule,
    qubits: &[BlochAngles],
    separations: &[f64],
) -> Result<Vec<CrosstalkPoint>> {
    let layout = spec.layout()?;
    layout.ensure_dense_capacity()?;
    if layout.num_isolator_pairs() < 2 {
        return Err(Error::Config("crosstalk needs at least one spectator isolator pair (N ≥ 3)".into()));
    }
    if schedule.cell != 0 {
        return Err(Error::Scope(format!("crosstalk sweeps drive cell 0, schedule targets cell {}", schedule.cell)));
    }
    let spectators: Vec<Site> = (1..layout.num_isolator_pairs()).map(Site::IsolatorA).collect();
    let psi0 = prepare_product_state(&layout, qubits, IsolatorConfig::Opposite)?;
    let mut exposed = schedule.clone();
    for step in &mut exposed.steps {
        if let GateStep::Pulse(p) = step {
            p.spectators = spectators.clone();
        }
    }
    let idle_mask = |index: usize| -> Result<bool> {
        for k in 1..layout.num_isolator_pairs() {
            if layout.bit(index, Site::IsolatorA(k))? != 1 || layout.bit(index, Site::IsolatorB(k))? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    separations
        .iter()
        .map(|&separation| {
            let mut shifted = spec.clone();
            let base = spec.isolator_a_freqs[0];
            if separation.is_finite() {
                for w in shifted.isolator_a_freqs.iter_mut().skip(1) {
                    *w = base + separation;
                }
            }
            shifted.validate()?;
            let reference = schedule.simulate(&shifted, &psi0)?;
            let psi = if separation.is_finite() { exposed.simulate(&shifted, &psi0)? } else { reference.clone() };
            let mut survived = 0.0;
            for (i, a) in psi.amplitudes().iter().enumerate() {
                if idle_mask(i)? {
                    survived += a.norm_sqr();
                }
            }
            Ok(CrosstalkPoint {
                separation,
                spectator_excitation: (1.0 - survived).max(0.0),
                disturbance: (1.0 - reference.inner(&psi)?.norm_sqr()).max(0.0),
            })
        })
        .collect()
}

/// Infidelity and leakage of the schedule's gate, for sweeps.
pub fn gate_infidelity(schedule: &GateSchedule, spec: &CellSpec) -> Result<(f64, f64)> {
    let r = extract_gate(schedule, spec)?;
    Ok((r.infidelity(), r.leakage))
}

/// Energy expectation helper for diagonal lattice Hamiltonians.
pub fn energy_expectation(spec: &LatticeSpec, psi: &QuantumState) -> Result<f64> {
    let h = build_lattice_hamiltonian(spec)?;
    Ok(crate::spin::expectation(psi, &h)?.re)
}
