// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse design for the two controlled-phase protocols and gate schedules
//! built from them.
//!
//! *Strong coupling* (`J ≫ Ω`): drive the `a` isolator resonantly with the
//! `|11⟩` group only (`Δ₃ = 0`) for a 2π pulse. The other groups are detuned
//! by `2J` or `4J` and are left (approximately) untouched.
//!
//! *Matched pulse* (`Ω ~ J`): choose `Δ`, `Ω` and `τ` so that every group
//! completes a whole number of generalised Rabi cycles, the `|11⟩` group an
//! odd number of half cycles:
//!
//! ```text
//! λ₀τ/2 = 2πk₀,   λ₁₂τ/2 = 2πk₁,   λ₃τ/2 = π(1 + 2k₃)
//! ```
//!
//! The resulting diagonal gate is turned into CPHASE by `Rz(−Jτ/2)` on both
//! qubits.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{pulse_propagator, FrameSpec};
use crate::model::{build_lattice_hamiltonian, CellSpec, LatticeSpec, PulseSpec};
use crate::spin::{embed_single, LatticeLayout, OperatorMatrix, QuantumState, Site};
use crate::{Error, Result, C64};

/// Above this `Ω/|J|` the strong-coupling design is outside its regime.
pub const STRONG_REGIME_LIMIT: f64 = 0.2;

/// Default search bound for [`enumerate_matched`].
pub const DEFAULT_K_MAX: u32 = 5;

/// Relative tolerance of the solution self-checks.
const SOLUTION_RTOL: f64 = 1e-10;

/// Pulse parameters satisfying the matched-pulse conditions for one integer
/// triple `(k₀, k₁, k₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPulseSolution {
    pub k0: u32,
    pub k1: u32,
    pub k3: u32,
    pub j: f64,
    /// `D = 4k₀² − 8k₁² + (1 + 2k₃)²`.
    pub denominator: i64,
    pub delta: f64,
    pub omega: f64,
    pub tau: f64,
    pub lambda0: f64,
    pub lambda12: f64,
    pub lambda3: f64,
}

impl MatchedPulseSolution {
    pub fn triple(&self) -> [u32; 3] {
        [self.k0, self.k1, self.k3]
    }

    /// Relative residuals of the three cycle conditions.
    pub fn cycle_residuals(&self) -> [f64; 3] {
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        [
            rel(self.lambda0 * self.tau / 2.0, 2.0 * PI * f64::from(self.k0)),
            rel(self.lambda12 * self.tau / 2.0, 2.0 * PI * f64::from(self.k1)),
            rel(self.lambda3 * self.tau / 2.0, PI * f64::from(1 + 2 * self.k3)),
        ]
    }

    /// `λ_j² − Δ_j²` for the three distinct groups; all equal `Ω²`.
    pub fn omega_squared_estimates(&self) -> [f64; 3] {
        let d = self.delta;
        [
            self.lambda0.powi(2) - (d + 2.0 * self.j).powi(2),
            self.lambda12.powi(2) - d.powi(2),
            self.lambda3.powi(2) - (d - 2.0 * self.j).powi(2),
        ]
    }
}

fn check_k(k: u32, name: &str) -> Result<()> {
    if k < 1 {
        return Err(Error::Config(format!("{name} = {k}: k must be ≥ 1")));
    }
    Ok(())
}

/// Solve the matched-pulse conditions for `(k₀, k₁, k₃)` at coupling `j`:
///
/// ```text
/// λ₀² = 32k₀²J²/D,  λ₁₂² = 32k₁²J²/D,  λ₃² = 8(1+2k₃)²J²/D,
/// Δ = J(4k₀² − (1+2k₃)²)/D,  Ω = √(λ₁₂² − Δ²),  τ = 4πk₁/λ₁₂.
/// ```
pub fn solve_matched_params(k0: u32, k1: u32, k3: u32, j: f64) -> Result<MatchedPulseSolution> {
    check_k(k0, "k0")?;
    check_k(k1, "k1")?;
    check_k(k3, "k3")?;
    if !(j.is_finite() && j != 0.0) {
        return Err(Error::Config(format!("coupling J must be finite and non-zero, got {j}")));
    }
    let (a, b, odd) = (i64::from(k0), i64::from(k1), 1 + 2 * i64::from(k3));
    let denominator = 4 * a * a - 8 * b * b + odd * odd;
    if denominator <= 0 {
        return Err(Error::NoSolution(format!(
            "(k0, k1, k3) = ({k0}, {k1}, {k3}) gives denominator {denominator} ≤ 0"
        )));
    }
    let d = denominator as f64;
    let j2 = j * j;
    let lambda0_sq = 32.0 * (a * a) as f64 * j2 / d;
    let lambda12_sq = 32.0 * (b * b) as f64 * j2 / d;
    let lambda3_sq = 8.0 * (odd * odd) as f64 * j2 / d;
    let delta = j * (4 * a * a - odd * odd) as f64 / d;
    let omega_sq = lambda12_sq - delta * delta;
    if !(omega_sq > 0.0) {
        return Err(Error::NoSolution(format!(
            "(k0, k1, k3) = ({k0}, {k1}, {k3}) requires Ω² = {omega_sq:e} ≤ 0"
        )));
    }
    let lambda12 = lambda12_sq.sqrt();
    let sol = MatchedPulseSolution {
        k0,
        k1,
        k3,
        j,
        denominator,
        delta,
        omega: omega_sq.sqrt(),
        tau: 4.0 * PI * f64::from(k1) / lambda12,
        lambda0: lambda0_sq.sqrt(),
        lambda12,
        lambda3: lambda3_sq.sqrt(),
    };
    let tol = SOLUTION_RTOL * j2;
    let est = sol.omega_squared_estimates();
    if est.iter().any(|e| (e - omega_sq).abs() > tol) {
        return Err(Error::InternalConsistency(format!(
            "(k0, k1, k3) = ({k0}, {k1}, {k3}): λ²−Δ² estimates {est:?} disagree"
        )));
    }
    if let Some(r) = sol.cycle_residuals().into_iter().find(|r| *r > SOLUTION_RTOL) {
        return Err(Error::InternalConsistency(format!(
            "(k0, k1, k3) = ({k0}, {k1}, {k3}): cycle condition residual {r:e}"
        )));
    }
    Ok(sol)
}

/// Every valid triple with components in `1..=k_max`, fastest gate first.
/// Ties in `τ` fall back to lexicographic order of the triple.
pub fn enumerate_matched(k_max: u32, j: f64) -> Vec<MatchedPulseSolution> {
    let mut out: Vec<_> = (1..=k_max)
        .flat_map(|k0| (1..=k_max).flat_map(move |k1| (1..=k_max).map(move |k3| (k0, k1, k3))))
        .filter_map(|(k0, k1, k3)| solve_matched_params(k0, k1, k3, j).ok())
        .collect();
    out.sort_by(|x, y| x.tau.total_cmp(&y.tau).then_with(|| x.triple().cmp(&y.triple())));
    out
}

/// A designed pulse plus any regime annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseDesign {
    pub pulse: PulseSpec,
    pub warning: Option<String>,
}

/// Isolator sites of cell `k` in a lattice layout.
fn cell_isolator(cell: usize) -> Site {
    Site::IsolatorA(cell)
}

/// 2π pulse resonant with the `|11⟩` group: `ω_a = ω_a1 − J₀ + 2J`,
/// `τ = 2π/Ω`.
pub fn strong_coupling_cphase(spec: &CellSpec, omega: f64) -> Result<PulseDesign> {
    spec.validate()?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Config(format!("Rabi frequency must be positive, got {omega}")));
    }
    let pulse = PulseSpec::new(spec.omega_a1 - spec.j0 + 2.0 * spec.j, omega, 2.0 * PI / omega, cell_isolator(0));
    let ratio = omega / spec.j.abs();
    let warning = (ratio > STRONG_REGIME_LIMIT).then(|| {
        format!("Ω/J = {ratio:.3} exceeds {STRONG_REGIME_LIMIT}: off-resonant groups are no longer negligible")
    });
    Ok(PulseDesign { pulse, warning })
}

/// Single pulse realising a matched-pulse solution on the cell.
pub fn matched_pulse(spec: &CellSpec, solution: &MatchedPulseSolution) -> PulseSpec {
    PulseSpec::new(spec.omega_a1 - spec.j0 + solution.delta, solution.omega, solution.tau, cell_isolator(0))
}

/// How the controlled phase is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CphaseMode {
    Strong { rabi: f64 },
    Matched { k: [u32; 3] },
}

/// Ideal, instantaneous single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SingleQubitGate {
    /// `diag(e^{iφ}, e^{−iφ})`.
    Rz(f64),
    Hadamard,
}

impl SingleQubitGate {
    pub fn matrix(self) -> [[C64; 2]; 2] {
        match self {
            SingleQubitGate::Rz(phi) => {
                [[C64::from_polar(1.0, phi), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::from_polar(1.0, -phi)]]
            }
            SingleQubitGate::Hadamard => {
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
        }
    }
}

/// Embedded single-qubit gate. Only information qubits may be addressed.
pub fn ideal_single_qubit(kind: SingleQubitGate, qubit: Site, layout: &LatticeLayout) -> Result<OperatorMatrix> {
    if !matches!(qubit, Site::Qubit(_)) {
        return Err(Error::Config(format!("single-qubit gates act on qubits, not {qubit}")));
    }
    embed_single(&kind.matrix(), qubit, layout)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum GateStep {
    Pulse(PulseSpec),
    Gate { kind: SingleQubitGate, qubit: Site },
}

/// The two-qubit gate a schedule is meant to realise on its cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetGate {
    Identity,
    Cphase,
    /// CNOT acting on cell qubit `target` (1 or 2), controlled by the other.
    Cnot { target: u8 },
}

impl TargetGate {
    /// 4×4 matrix over `|q1 q2⟩`, `q1` most significant.
    pub fn matrix(self) -> DMatrix<C64> {
        let one = C64::new(1.0, 0.0);
        let mut m = DMatrix::<C64>::identity(4, 4);
        match self {
            TargetGate::Identity => {}
            TargetGate::Cphase => m[(3, 3)] = -one,
            TargetGate::Cnot { target } => {
                let (x, y) = if target == 2 { (2, 3) } else { (1, 3) };
                m[(x, x)] = C64::new(0.0, 0.0);
                m[(y, y)] = C64::new(0.0, 0.0);
                m[(x, y)] = one;
                m[(y, x)] = one;
            }
        }
        m
    }
}

/// Ordered pulses and ideal gates on one cell of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    /// Cell index `k`: qubits `q_k`, `q_(k+1)` and isolators `a_k`, `b_k`.
    pub cell: usize,
    pub steps: Vec<GateStep>,
    pub target: TargetGate,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl GateSchedule {
    pub fn empty(cell: usize) -> Self {
        Self { cell, steps: Vec::new(), target: TargetGate::Identity, warnings: Vec::new() }
    }

    /// Sum of pulse durations; ideal gates take no time.
    pub fn total_duration(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                GateStep::Pulse(p) => p.duration,
                GateStep::Gate { .. } => 0.0,
            })
            .sum()
    }

    /// Every site the schedule touches, pulse spectators included.
    pub fn sites(&self) -> Vec<Site> {
        let mut out = Vec::new();
        for step in &self.steps {
            match step {
                GateStep::Pulse(p) => out.extend(p.driven_sites()),
                GateStep::Gate { qubit, .. } => out.push(*qubit),
            }
        }
        out
    }

    pub fn cell_sites(&self) -> [Site; 4] {
        let k = self.cell;
        [Site::Qubit(k), Site::Qubit(k + 1), Site::IsolatorA(k), Site::IsolatorB(k)]
    }

    pub fn validate(&self, layout: &LatticeLayout) -> Result<()> {
        for site in self.cell_sites() {
            layout.position(site)?;
        }
        for site in self.sites() {
            layout.position(site)?;
        }
        Ok(())
    }

    /// Interaction-picture unitary of every step, in order. The frame is the
    /// drift diagonal with `t0 = 0`; a pulse running from `t_s` to `t_s + τ`
    /// contributes `e^{iD(t_s+τ)} U_lab e^{−iD t_s}`, ideal gates contribute
    /// their own matrix at the instant they act.
    pub fn step_unitaries(&self, spec: &LatticeSpec) -> Result<Vec<OperatorMatrix>> {
        let layout = spec.layout()?;
        layout.ensure_dense_capacity()?;
        self.validate(&layout)?;
        let drift = build_lattice_hamiltonian(spec)?;
        let frame = FrameSpec::from_drift(&drift, 0.0)?;
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            match step {
                GateStep::Pulse(p) => {
                    let lab = pulse_propagator(&drift, &layout, p, t)?;
                    let t_end = t + p.duration;
                    out.push(frame.phase_operator(t_end, 1.0) * lab * frame.phase_operator(t, -1.0));
                    t = t_end;
                }
                GateStep::Gate { kind, qubit } => out.push(ideal_single_qubit(*kind, *qubit, &layout)?),
            }
        }
        Ok(out)
    }

    /// Ordered product of [`Self::step_unitaries`].
    pub fn unitary(&self, spec: &LatticeSpec) -> Result<OperatorMatrix> {
        let dim = spec.layout()?.dim();
        Ok(self
            .step_unitaries(spec)?
            .into_iter()
            .fold(OperatorMatrix::identity(dim, dim), |acc, u| u * acc))
    }

    /// Interaction-picture state after running the schedule on `state`
    /// (itself given in the interaction picture at `t = 0`).
    pub fn simulate(&self, spec: &LatticeSpec, state: &QuantumState) -> Result<QuantumState> {
        let mut psi = state.clone();
        for u in self.step_unitaries(spec)? {
            psi = psi.apply(&u)?;
        }
        Ok(psi)
    }
}

/// Pulse plus corrections that realise CPHASE on the cell.
///
/// Strong mode is a lone 2π pulse. Matched mode adds `Rz(−Jτ/2)` on both
/// qubits after the pulse.
pub fn cphase_schedule(spec: &CellSpec, mode: CphaseMode) -> Result<GateSchedule> {
    spec.validate()?;
    let mut schedule = GateSchedule { cell: 0, steps: Vec::new(), target: TargetGate::Cphase, warnings: Vec::new() };
    match mode {
        CphaseMode::Strong { rabi } => {
            let design = strong_coupling_cphase(spec, rabi)?;
            schedule.steps.push(GateStep::Pulse(design.pulse));
            schedule.warnings.extend(design.warning);
        }
        CphaseMode::Matched { k: [k0, k1, k3] } => {
            let sol = solve_matched_params(k0, k1, k3, spec.j)?;
            schedule.steps.push(GateStep::Pulse(matched_pulse(spec, &sol)));
            let angle = -spec.j * sol.tau / 2.0;
            for q in [Site::Qubit(0), Site::Qubit(1)] {
                schedule.steps.push(GateStep::Gate { kind: SingleQubitGate::Rz(angle), qubit: q });
            }
        }
    }
    Ok(schedule)
}

/// `H(target) · CPHASE · H(target)`: CNOT on cell qubit `target_qubit`
/// (1 or 2), controlled by the other qubit.
pub fn cnot_schedule(spec: &CellSpec, mode: CphaseMode, target_qubit: u8) -> Result<GateSchedule> {
    let qubit = match target_qubit {
        1 => Site::Qubit(0),
        2 => Site::Qubit(1),
        other => return Err(Error::Config(format!("CNOT target qubit must be 1 or 2, got {other}"))),
    };
    let inner = cphase_schedule(spec, mode)?;
    let hadamard = GateStep::Gate { kind: SingleQubitGate::Hadamard, qubit };
    let mut steps = vec![hadamard.clone()];
    steps.extend(inner.steps);
    steps.push(hadamard);
    Ok(GateSchedule { cell: 0, steps, target: TargetGate::Cnot { target: target_qubit }, warnings: inner.warnings })
}
