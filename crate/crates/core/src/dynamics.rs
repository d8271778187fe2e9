// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! State propagation under the static Hamiltonian plus one rectangular pulse.
//!
//! Two independent routes are provided. [`propagate_exact`] moves into the
//! frame co-rotating with the driven spins, where the Hamiltonian is constant,
//! and exponentiates it by eigendecomposition. [`propagate_ode`] integrates the
//! lab-frame Schrödinger equation with an adaptive Dormand–Prince 5(4)
//! scheme and serves as an oracle for the first. [`rabi_evolve`] is the closed
//! form for one driven two-level group.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::linalg::{expm_hermitian, hermitian_deviation, is_diagonal};
use crate::model::{build_cell_drift, build_drive, CellSpec, PulseSpec};
use crate::spin::{check_dim, embed_operator, LatticeLayout, OperatorMatrix, QuantumState, SpinOp};
use crate::{Error, Result, C64};

/// Drift matrices must be Hermitian to this tolerance.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Amplitudes of one driven two-level group: `C_j` on `|1_a⟩` and `C̃_j` on
/// `|0_a⟩`, for qubit configuration `j = 2·q1 + q2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelAmplitudes {
    pub c: C64,
    pub c_tilde: C64,
}

impl TwoLevelAmplitudes {
    pub fn probability(&self) -> f64 {
        self.c.norm_sqr() + self.c_tilde.norm_sqr()
    }
}

/// `sin(x)/x`, evaluated by series near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Closed-form interaction-picture solution for a rectangular pulse of
/// duration `tau`, starting from `C_j = c0`, `C̃_j = 0`:
///
/// ```text
/// C_j(τ)  = c0 e^{iΔτ/2} (cos(λτ/2) − i(Δ/λ) sin(λτ/2))
/// C̃_j(τ) = c0 (iΩ/λ) e^{−iΔτ/2} sin(λτ/2)
/// ```
///
/// with `λ = √(Δ² + Ω²)`. The ratios `sin(λτ/2)/λ` are evaluated through
/// `sinc`, so `λ → 0` needs no special case.
pub fn rabi_evolve(c0: C64, delta: f64, omega: f64, tau: f64) -> TwoLevelAmplitudes {
    let lambda = delta.hypot(omega);
    let half = 0.5 * lambda * tau;
    // sin(λτ/2)/λ
    let s_over_l = 0.5 * tau * sinc(half);
    let c = c0 * C64::from_polar(1.0, 0.5 * delta * tau) * C64::new(half.cos(), -delta * s_over_l);
    let c_tilde = c0 * C64::new(0.0, omega * s_over_l) * C64::from_polar(1.0, -0.5 * delta * tau);
    TwoLevelAmplitudes { c, c_tilde }
}

fn check_square(op: &OperatorMatrix, dim: usize) -> Result<()> {
    check_dim(dim, op.nrows())?;
    check_dim(dim, op.ncols())
}

fn check_hermitian(op: &OperatorMatrix) -> Result<()> {
    let deviation = hermitian_deviation(op);
    if !(deviation <= HERMITIAN_TOLERANCE) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Sum of `Sᶻ` over the driven sites: the generator of the rotating frame.
fn driven_sz(pulse: &PulseSpec, layout: &LatticeLayout) -> Result<OperatorMatrix> {
    let mut g = OperatorMatrix::zeros(layout.dim(), layout.dim());
    for site in pulse.driven_sites() {
        g += embed_operator(SpinOp::Sz, site, layout)?;
    }
    Ok(g)
}

/// Lab-frame propagator of a pulse applied between `t_start` and
/// `t_start + τ`.
///
/// With `R(t) = exp(−iω_a t Σ Sᶻ_driven)` the rotating-frame Hamiltonian
/// `H_rot = H_drift − ω_a ΣSᶻ_driven + V(0)` is time-independent, and
/// `U = R(t_start + τ) · exp(−i H_rot τ) · R(t_start)†`.
pub fn pulse_propagator(
    drift: &OperatorMatrix,
    layout: &LatticeLayout,
    pulse: &PulseSpec,
    t_start: f64,
) -> Result<OperatorMatrix> {
    pulse.validate()?;
    check_square(drift, layout.dim())?;
    check_hermitian(drift)?;
    let g = driven_sz(pulse, layout)?;
    let h_rot = drift - &g * C64::new(pulse.drive_freq, 0.0) + build_drive(pulse, layout, 0.0)?;
    let frame = |t: f64| expm_hermitian(&g, pulse.drive_freq * t);
    let t_end = t_start + pulse.duration;
    Ok(frame(t_end) * expm_hermitian(&h_rot, pulse.duration) * frame(t_start).adjoint())
}

/// Lab-frame state after a pulse that starts at `t = 0`.
pub fn propagate_exact(
    drift: &OperatorMatrix,
    layout: &LatticeLayout,
    pulse: &PulseSpec,
    state: &QuantumState,
) -> Result<QuantumState> {
    check_dim(layout.dim(), state.dim())?;
    let u = pulse_propagator(drift, layout, pulse, 0.0)?;
    Ok(QuantumState::from_raw(u * state.amplitudes()))
}

/// Lab-frame `H(t) = H_drift + V(t)` for a pulse starting at `t = 0`.
pub fn lab_hamiltonian(
    drift: &OperatorMatrix,
    layout: &LatticeLayout,
    pulse: &PulseSpec,
) -> Result<impl Fn(f64) -> OperatorMatrix> {
    pulse.validate()?;
    check_square(drift, layout.dim())?;
    let (mut sm, mut sp) = (OperatorMatrix::zeros(layout.dim(), layout.dim()), OperatorMatrix::zeros(layout.dim(), layout.dim()));
    for site in pulse.driven_sites() {
        sm += embed_operator(SpinOp::Sminus, site, layout)?;
        sp += embed_operator(SpinOp::Splus, site, layout)?;
    }
    let half = C64::new(-0.5 * pulse.rabi_freq, 0.0);
    let (drift, w, phi) = (drift.clone(), pulse.drive_freq, pulse.carrier_phase);
    Ok(move |t: f64| {
        let phase = C64::from_polar(1.0, w * t + phi);
        &drift + (&sm * phase + &sp * phase.conj()) * half
    })
}

/// Diagnostics from [`propagate_ode`].
#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub state: QuantumState,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// `|‖ψ(τ)‖ − 1|`. The integrator does not renormalise.
    pub norm_drift: f64,
}

const MAX_ODE_STEPS: usize = 10_000_000;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `i dψ/dt = H(t) ψ` from `t = 0` to `tau` with adaptive step
/// control to absolute local tolerance `tol` per amplitude.
pub fn propagate_ode<F>(hamiltonian_at: F, state: &QuantumState, tau: f64, tol: f64) -> Result<OdeOutcome>
where
    F: Fn(f64) -> OperatorMatrix,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("ODE tolerance must be positive, got {tol}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("integration time must be ≥ 0, got {tau}")));
    }
    let h0 = hamiltonian_at(0.0);
    check_square(&h0, state.dim())?;
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, psi: &DVector<C64>| (hamiltonian_at(t) * psi) * minus_i;

    let mut psi = state.amplitudes().clone();
    let mut t = 0.0;
    let scale = h0.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-12);
    let mut h = (0.1 / scale).min(tau);
    let (mut accepted, mut rejected) = (0, 0);
    let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);

    while t < tau {
        if accepted + rejected > MAX_ODE_STEPS || !(h >= 1e-14 * t.abs().max(1.0)) {
            return Err(Error::IntegrationFailure { t, step: h });
        }
        let step = h.min(tau - t);
        k.clear();
        for s in 0..7 {
            let mut y = psi.clone();
            for (a, kj) in A[s].iter().zip(&k) {
                if *a != 0.0 {
                    y.axpy(C64::new(step * a, 0.0), kj, C64::new(1.0, 0.0));
                }
            }
            k.push(rhs(t + C[s] * step, &y));
        }
        let mut next = psi.clone();
        let mut err = DVector::<C64>::zeros(psi.len());
        for s in 0..7 {
            next.axpy(C64::new(step * B5[s], 0.0), &k[s], C64::new(1.0, 0.0));
            err.axpy(C64::new(step * (B5[s] - B4[s]), 0.0), &k[s], C64::new(1.0, 0.0));
        }
        // f64::max swallows NaN, so non-finite stages are flagged explicitly.
        let err_ratio = if next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            err.iter().map(|e| e.norm()).fold(0.0, f64::max) / tol
        } else {
            f64::INFINITY
        };
        if err_ratio <= 1.0 {
            psi = next;
            t = if step == tau - t { tau } else { t + step };
            accepted += 1;
        } else {
            rejected += 1;
        }
        let factor = if err_ratio == 0.0 {
            5.0
        } else if err_ratio.is_finite() {
            (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            0.2
        };
        h = step * factor;
    }
    let norm_drift = (psi.norm() - 1.0).abs();
    Ok(OdeOutcome { state: QuantumState::from_raw(psi), accepted_steps: accepted, rejected_steps: rejected, norm_drift })
}

/// Reference for the interaction picture: the drift energy of every basis
/// state and the time origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub energies: Vec<f64>,
    pub t0: f64,
}

impl FrameSpec {
    /// Frame of a diagonal drift Hamiltonian.
    pub fn from_drift(drift: &OperatorMatrix, t0: f64) -> Result<Self> {
        if drift.nrows() != drift.ncols() || !is_diagonal(drift) {
            return Err(Error::Config("interaction-picture frame requires a diagonal drift".into()));
        }
        Ok(Self { energies: (0..drift.nrows()).map(|k| drift[(k, k)].re).collect(), t0 })
    }

    pub fn for_cell(spec: &CellSpec, t0: f64) -> Result<Self> {
        Self::from_drift(&build_cell_drift(spec)?, t0)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Diagonal operator `exp(i s E (t − t0))` with `s = ±1`.
    pub fn phase_operator(&self, t: f64, sign: f64) -> OperatorMatrix {
        let dt = t - self.t0;
        OperatorMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.energies.iter().map(|e| C64::from_polar(1.0, sign * e * dt)),
        ))
    }
}

/// Strip the drift phase from every amplitude: `c_k → c_k e^{+iE_k(t−t0)}`.
pub fn to_interaction_picture(state: &QuantumState, frame: &FrameSpec, t: f64) -> Result<QuantumState> {
    map_phases(state, frame, t, 1.0)
}

/// Inverse of [`to_interaction_picture`].
pub fn from_interaction_picture(state: &QuantumState, frame: &FrameSpec, t: f64) -> Result<QuantumState> {
    map_phases(state, frame, t, -1.0)
}

fn map_phases(state: &QuantumState, frame: &FrameSpec, t: f64, sign: f64) -> Result<QuantumState> {
    check_dim(frame.dim(), state.dim())?;
    let dt = t - frame.t0;
    let amps = DVector::from_iterator(
        state.dim(),
        state.amplitudes().iter().zip(&frame.energies).map(|(a, e)| a * C64::from_polar(1.0, sign * e * dt)),
    );
    Ok(QuantumState::from_raw(amps))
}
