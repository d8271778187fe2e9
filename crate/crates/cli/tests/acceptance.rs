// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line. The process fails if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use isolator_cli::{emit_report, parse_config, run_experiment, ExperimentKind, OutputFormat};
use isolator_core::analysis::{energy_expectation, extract_gate, extract_gate_against, idle_invariance_check};
use isolator_core::analysis::{BlochAngles, IsolatorConfig};
use isolator_core::dynamics::{lab_hamiltonian, propagate_exact, propagate_ode, rabi_evolve, to_interaction_picture};
use isolator_core::linalg::max_abs_diff;
use isolator_core::model::{build_cell_drift, detunings, initial_state};
use isolator_core::protocols::{
    cnot_schedule, cphase_schedule, matched_pulse, solve_matched_params, TargetGate,
};
use isolator_core::{
    CellSpec, CphaseMode, Error, FrameSpec, GateSchedule, GateStep, LatticeLayout, LatticeSpec, PulseSpec,
    QuantumState, Site, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn cell() -> CellSpec {
    CellSpec { omega_1: 10.0, omega_2: 15.0, omega_a1: 50.0, omega_b1: 60.0, j: 1.0, j0: 0.2 }
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

fn matched_parameters() -> Outcome {
    let s = solve_matched_params(1, 1, 1, 1.0).unwrap();
    let errs = [rel(s.delta, -1.0), rel(s.omega, (27.0f64 / 5.0).sqrt()), rel(s.tau, 2.5f64.sqrt() * PI)];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("Δ={:.12}, Ω={:.12}, τ={:.12}, worst rel err {worst:.2e}", s.delta, s.omega, s.tau))
}

fn gate_matrix() -> Outcome {
    let spec = cell();
    let start = Instant::now();
    let sol = solve_matched_params(1, 1, 1, spec.j).unwrap();
    let schedule = GateSchedule {
        cell: 0,
        steps: vec![GateStep::Pulse(matched_pulse(&spec, &sol))],
        target: TargetGate::Identity,
        warnings: vec![],
    };
    let (j, tau) = (spec.j, sol.tau);
    let mut expected = diag4([
        C64::from_polar(1.0, j * tau),
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        -C64::from_polar(1.0, -j * tau),
    ]);
    expected *= C64::from_polar(1.0, -j * tau / 2.0);
    let report = extract_gate_against(&schedule, &spec, &expected).unwrap();
    let err = max_abs_diff(&report.gate, &expected);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        err < 1e-6 && report.leakage < 1e-8 && secs < 1.0,
        format!("max entry error {err:.2e}, leakage {:.2e}, {secs:.3} s", report.leakage),
    )
}

fn diag4(d: [C64; 4]) -> isolator_core::OperatorMatrix {
    let mut m = isolator_core::OperatorMatrix::zeros(4, 4);
    for (k, z) in d.into_iter().enumerate() {
        m[(k, k)] = z;
    }
    m
}

fn cphase_with_corrections() -> Outcome {
    let spec = cell();
    let r = extract_gate(&cphase_schedule(&spec, CphaseMode::Matched { k: [1, 1, 1] }).unwrap(), &spec).unwrap();
    let want = wrap(-PI * (5.0f64 / 8.0).sqrt());
    let theta = r.global_phase.unwrap_or(f64::NAN);
    let phase_err = wrap(theta - want).abs();
    outcome(
        r.distance < 1e-6 && phase_err < 1e-6,
        format!("distance {:.2e}, Θ̂ = {theta:.9} (want {want:.9}), phase err {phase_err:.2e}", r.distance),
    )
}

fn strong_scaling() -> Outcome {
    let spec = cell();
    let start = Instant::now();
    let inf: Vec<f64> = [0.1, 0.05, 0.02]
        .iter()
        .map(|r| extract_gate(&cphase_schedule(&spec, CphaseMode::Strong { rabi: r * spec.j }).unwrap(), &spec).unwrap().infidelity())
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let ratio = inf[0] / inf[1];
    let monotone = inf[0] > inf[1] && inf[1] > inf[2];
    outcome(
        monotone && (3.0..=5.0).contains(&ratio) && secs < 5.0,
        format!("1−F = {:.3e}, {:.3e}, {:.3e}; ratio {ratio:.3}; {secs:.2} s", inf[0], inf[1], inf[2]),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_005);
    let layout = LatticeLayout::cell();
    let (mut analytic, mut ode_exact, mut ode_analytic) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let mut d = || rng.random_range(0.1..3.0);
        let spec = CellSpec { omega_1: d(), omega_2: d(), omega_a1: d(), omega_b1: d(), j: d(), j0: d() };
        let pulse = PulseSpec::new(
            spec.omega_a1 - spec.j0 + rng.random_range(-3.0..3.0) * spec.j,
            rng.random_range(0.1..3.0),
            rng.random_range(0.1..3.0),
            Site::IsolatorA(0),
        );
        let c0: Vec<C64> = (0..4).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = c0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); 16];
        for (j, c) in c0.iter().enumerate() {
            amps[CellSpec::idle_index(j)] = c / norm;
        }
        let psi = QuantumState::new(amps.into()).unwrap();
        let drift = build_cell_drift(&spec).unwrap();
        let frame = FrameSpec::for_cell(&spec, 0.0).unwrap();
        let exact = propagate_exact(&drift, &layout, &pulse, &psi).unwrap();
        let ode = propagate_ode(lab_hamiltonian(&drift, &layout, &pulse).unwrap(), &psi, pulse.duration, 1e-10).unwrap().state;
        let exact_ip = to_interaction_picture(&exact, &frame, pulse.duration).unwrap();
        let ode_ip = to_interaction_picture(&ode, &frame, pulse.duration).unwrap();
        ode_exact = ode_exact.max(ode.max_abs_diff(&exact).unwrap());
        let det = detunings(&spec, pulse.drive_freq, pulse.rabi_freq);
        for (j, c) in c0.iter().enumerate() {
            let r = rabi_evolve(c / norm, det.delta_j(j), pulse.rabi_freq, pulse.duration);
            for (k, want) in [(CellSpec::idle_index(j), r.c), (CellSpec::excited_index(j), r.c_tilde)] {
                analytic = analytic.max((exact_ip.amplitude(k) - want).norm());
                ode_analytic = ode_analytic.max((ode_ip.amplitude(k) - want).norm());
            }
        }
    }
    outcome(
        analytic < 1e-9 && ode_exact < 1e-8 && ode_analytic < 1e-8,
        format!("exact vs closed form {analytic:.2e}; ODE vs exact {ode_exact:.2e}; ODE vs closed form {ode_analytic:.2e}"),
    )
}

fn three_qubit_lattice() -> LatticeSpec {
    LatticeSpec {
        qubit_freqs: vec![10.0, 15.0, 20.0],
        isolator_a_freqs: vec![50.0, 70.0],
        isolator_b_freqs: vec![60.0, 80.0],
        j: 1.0,
        j0: 0.2,
    }
}

fn idle_cancellation() -> Outcome {
    let spec = three_qubit_lattice();
    let plus = vec![BlochAngles::PLUS; 3];
    let idle = idle_invariance_check(&spec, &plus, IsolatorConfig::Opposite, 100.0 / spec.j, 1000).unwrap();
    let control = idle_invariance_check(&spec, &plus, IsolatorConfig::BothZero, 1.0 / spec.j, 100).unwrap();
    outcome(
        idle.max_concurrence < 1e-10 && control.max_concurrence > 1e-3,
        format!(
            "opposite: max concurrence {:.2e} over t ≤ 100/J; both |0⟩: max concurrence {:.2e} by t = 1/J \
             (phase error vs J = 0: {:.2e})",
            idle.max_concurrence, control.max_concurrence, control.interaction_error
        ),
    )
}

fn initial_energy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_007);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(1..=3usize);
        let mut d = |len: usize| (0..len).map(|_| rng.random_range(0.1..100.0)).collect::<Vec<f64>>();
        let qubit_freqs = d(n);
        let isolator_a_freqs = d(n - 1);
        let isolator_b_freqs = d(n - 1);
        let (j, j0) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let spec = LatticeSpec { qubit_freqs, isolator_a_freqs, isolator_b_freqs, j, j0 };
        let (psi, closed) = initial_state(&spec).unwrap();
        worst = worst.max((energy_expectation(&spec, &psi).unwrap() - closed).abs());
    }
    outcome(worst < 1e-12, format!("worst |⟨H⟩ − E₀| = {worst:.2e} over 20 specs"))
}

fn cnot_composition() -> Outcome {
    let spec = cell();
    let mut details = Vec::new();
    let mut pass = true;
    for (mode, limit, label) in [
        (CphaseMode::Matched { k: [1, 1, 1] }, 1e-6, "matched"),
        (CphaseMode::Strong { rabi: 0.05 * spec.j }, 5e-3, "strong Ω/J=0.05"),
    ] {
        for target in [1, 2] {
            let r = extract_gate(&cnot_schedule(&spec, mode, target).unwrap(), &spec).unwrap();
            pass &= r.distance < limit;
            details.push(format!("{label} target q{target}: {:.2e} (limit {limit:.0e})", r.distance));
        }
    }
    outcome(pass, details.join("; "))
}

fn invalid_triple() -> Outcome {
    let direct = solve_matched_params(1, 2, 1, 1.0);
    let cfg = parse_config("[experiment]\nkind = \"solve-params\"\nk = [1, 2, 1]\n").unwrap();
    let via_cli = run_experiment(&cfg);
    let ok = matches!(direct, Err(Error::NoSolution(_))) && via_cli.as_ref().is_err_and(|e| e.exit_code() == 3);
    outcome(ok, format!("library: {:?}; runner exit code {:?}", direct.err().map(|e| e.to_string()), via_cli.err().map(|e| e.exit_code())))
}

fn determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut failures = Vec::new();
    for kind in ExperimentKind::ALL {
        let path = dir.join(format!("{kind}.toml"));
        let text = std::fs::read_to_string(&path).unwrap();
        let cfg = parse_config(&text).unwrap().with_kind(kind).unwrap();
        let lib: Vec<Vec<u8>> =
            (0..2).map(|_| emit_report(&run_experiment(&cfg).unwrap(), OutputFormat::Json).unwrap()).collect();
        let bin: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let out = Command::new(env!("CARGO_BIN_EXE_isolator-qc"))
                    .args([kind.as_str(), "--config"])
                    .arg(&path)
                    .output()
                    .unwrap();
                out.stdout
            })
            .collect();
        if lib[0] != lib[1] || bin[0] != bin[1] || lib[0] != bin[0] {
            failures.push(kind.as_str());
        }
    }
    outcome(failures.is_empty(), format!("{} kinds × 2 runs (library and binary); differing: {failures:?}", ExperimentKind::ALL.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("matched-pulse parameters", matched_parameters),
        ("gate matrix reproduction", gate_matrix),
        ("CPHASE with corrections", cphase_with_corrections),
        ("strong-coupling scaling", strong_scaling),
        ("analytic-numeric oracle equivalence", oracle_equivalence),
        ("idle-mode cancellation", idle_cancellation),
        ("initial energy", initial_energy),
        ("CNOT composition", cnot_composition),
        ("invalid-triple handling", invalid_triple),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
