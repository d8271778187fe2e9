// Copyright 2026 The isolator-qc Authors
// SPDX-License-Identifier: Apache-2.0

use isolator_core::analysis::extract_gate;
use isolator_core::protocols::{cphase_schedule, enumerate_matched, solve_matched_params};
use isolator_core::{CellSpec, CphaseMode, Error};
use proptest::prelude::*;

fn cell() -> CellSpec {
    CellSpec { omega_1: 10.0, omega_2: 15.0, omega_a1: 50.0, omega_b1: 60.0, j: 1.0, j0: 0.2 }
}

proptest! {
    #[test]
    fn solutions_are_finite_or_rejected(k0 in 1u32..12, k1 in 1u32..12, k3 in 1u32..12, j in 0.05f64..20.0, flip in any::<bool>()) {
        let j = if flip { -j } else { j };
        match solve_matched_params(k0, k1, k3, j) {
            Ok(s) => {
                prop_assert!(s.denominator > 0);
                for v in [s.delta, s.omega, s.tau, s.lambda0, s.lambda12, s.lambda3] {
                    prop_assert!(v.is_finite());
                }
                prop_assert!(s.omega > 0.0 && s.tau > 0.0);
                prop_assert!(s.cycle_residuals().iter().all(|r| *r < 1e-10));
            }
            Err(Error::NoSolution(_)) => {
                let d = 4 * i64::from(k0).pow(2) - 8 * i64::from(k1).pow(2) + (1 + 2 * i64::from(k3)).pow(2);
                let delta = f64::from(4 * k0 * k0) - f64::from((1 + 2 * k3).pow(2));
                // Either D ≤ 0 or the implied Ω² is not positive.
                prop_assert!(d <= 0 || 32.0 * f64::from(k1 * k1) * d as f64 <= delta * delta);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn delta_and_tau_scale_with_coupling(j in 0.1f64..10.0) {
        let unit = solve_matched_params(1, 1, 1, 1.0).unwrap();
        let s = solve_matched_params(1, 1, 1, j).unwrap();
        prop_assert!((s.delta - unit.delta * j).abs() < 1e-12 * j);
        prop_assert!((s.omega - unit.omega * j).abs() < 1e-12 * j);
        prop_assert!((s.tau - unit.tau / j).abs() < 1e-12 / j);
    }
}

#[test]
fn every_enumerated_solution_returns_the_isolator() {
    let spec = cell();
    let list = enumerate_matched(3, spec.j);
    assert!(!list.is_empty());
    for sol in list {
        let schedule = cphase_schedule(&spec, CphaseMode::Matched { k: sol.triple() }).unwrap();
        let report = extract_gate(&schedule, &spec).unwrap();
        assert!(report.leakage < 1e-8, "{:?} leaks {:e}", sol.triple(), report.leakage);
    }
}

#[test]
fn enumeration_grows_with_search_space() {
    let small = enumerate_matched(2, 1.0);
    let large = enumerate_matched(3, 1.0);
    for s in &small {
        assert!(large.iter().any(|l| l.triple() == s.triple()));
    }
    assert!(large.windows(2).all(|w| w[0].tau <= w[1].tau));
}
