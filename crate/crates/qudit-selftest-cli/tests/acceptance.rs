//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with:
//!   cargo test -p qudit-selftest-cli --test acceptance -- --nocapture

use qudit_selftest::bell::{build_bell, expectation, folding_check, BellCoeffs};
use qudit_selftest::hw::{char_closed_form, char_function, rotated_bell_state, PhaseIndex};
use qudit_selftest::iso::extract;
use qudit_selftest::lhv::{lhv_bound, LhvMethod};
use qudit_selftest::nu::NuSpec;
use qudit_selftest::runner::run_selftest;
use qudit_selftest::sopo_residual;
use qudit_selftest::strategy::{ideal_strategy, NoiseKind};
use qudit_selftest::zmod::{Poly, PrimeDim};
use std::time::Instant;

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {name}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {name} failed: {detail}");
}

fn dim(d: u64) -> PrimeDim {
    PrimeDim::new(d).unwrap()
}

#[test]
fn criterion_01_tsirelson_values() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for d in [3u64, 5, 7, 11] {
        let p = dim(d);
        let nu = NuSpec::canonical(p);
        let set = build_bell(p, &nu).unwrap();
        let v = expectation(&set.b_d, &rotated_bell_state(&nu));
        worst = worst.max((v.re - (d * (d - 1)) as f64).abs()).max(v.im.abs());
    }
    let dt = t0.elapsed().as_secs_f64();
    verdict(
        "1 (Tsirelson values d=3,5,7,11)",
        worst <= 1e-9 && dt < 5.0,
        &format!("worst deviation {worst:.3e}, {dt:.2} s (< 5 s)"),
    );
}

#[test]
fn criterion_02_full_operator_value() {
    let mut worst = 0.0f64;
    for d in [5u64, 7] {
        let p = dim(d);
        let nu = NuSpec::canonical(p);
        let set = build_bell(p, &nu).unwrap();
        let v = expectation(&set.b_full, &rotated_bell_state(&nu));
        worst = worst.max((v.re - (d * d) as f64).abs()).max(v.im.abs());
    }
    verdict(
        "2 (<B_full> = d^2 for d=5,7)",
        worst <= 1e-9,
        &format!("worst deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_03_sopo_residuals() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for d in [3u64, 5, 7, 11] {
        let p = dim(d);
        let r = sopo_residual(p, &NuSpec::canonical(p)).unwrap();
        worst = worst.max(r.c_residual).max(r.d_residual);
    }
    let dt = t0.elapsed().as_secs_f64();
    verdict(
        "3 (SOPO residuals, both families, d=3,5,7,11)",
        worst <= 1e-9 && dt < 30.0,
        &format!("worst residual {worst:.3e}, {dt:.2} s (< 30 s)"),
    );
}

#[test]
fn criterion_04_g_unitarity_and_folding() {
    let mut worst_unitarity = 0.0f64;
    let mut worst_folding = 0.0f64;
    for d in [5u64, 7] {
        let p = dim(d);
        let nu = NuSpec::canonical(p);
        worst_unitarity = worst_unitarity.max(BellCoeffs::build(&nu).unitarity_defect());
        worst_folding = worst_folding.max(folding_check(p, &nu, 0).unwrap());
    }
    verdict(
        "4 (G_n unitarity + exhaustive folding identity, d=5,7)",
        worst_unitarity <= 1e-9 && worst_folding <= 1e-9,
        &format!("unitarity {worst_unitarity:.3e}, folding {worst_folding:.3e}"),
    );
}

#[test]
fn criterion_05_closed_form_char_function() {
    let mut worst = 0.0f64;
    for d in [5u64, 7] {
        let p = dim(d);
        let nu = NuSpec::canonical(p);
        let psi = rotated_bell_state(&nu);
        for x1 in 0..d as i64 {
            for z1 in 0..d as i64 {
                for x2 in 0..d as i64 {
                    for z2 in 0..d as i64 {
                        let u = PhaseIndex::new(p.elem(x1), p.elem(z1));
                        let v = PhaseIndex::new(p.elem(x2), p.elem(z2));
                        let direct = char_function(&psi, u, v).unwrap();
                        let closed = char_closed_form(&nu, u, v).unwrap();
                        worst = worst.max((direct - closed).norm());
                    }
                }
            }
        }
    }
    verdict(
        "5 (closed-form chi = direct trace on all d^4 pairs, d=5,7)",
        worst <= 1e-9,
        &format!("worst deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_06_lhv_bounds() {
    let p3 = dim(3);
    let c3 = lhv_bound(p3, &NuSpec::canonical(p3), LhvMethod::Exhaustive, None).unwrap();
    let qutrit_ok = c3.best_value < 5.640 && c3.gap >= 0.36;

    let mut others_ok = true;
    let mut detail = format!(
        "d=3 best {:.6} gap {:.4}",
        c3.best_value, c3.gap
    );
    let t0 = Instant::now();
    for d in [5u64, 7] {
        let p = dim(d);
        let cert = lhv_bound(
            p,
            &NuSpec::canonical(p),
            LhvMethod::BestResponseExhaustive,
            None,
        )
        .unwrap();
        others_ok &= cert.best_value < (d * (d - 1)) as f64 && cert.gap > 0.0;
        detail.push_str(&format!("; d={d} best {:.6} gap {:.4}", cert.best_value, cert.gap));
    }
    let dt = t0.elapsed().as_secs_f64();
    detail.push_str(&format!("; d=5,7 enumerated in {dt:.2} s (< 600 s)"));
    verdict(
        "6 (LHV bounds: d=3 exhaustive, d=5,7 best-response)",
        qutrit_ok && others_ok && dt < 600.0,
        &detail,
    );
}

#[test]
fn criterion_07_ideal_extraction() {
    let mut worst_state = 0.0f64;
    let mut worst_op = 0.0f64;
    for d in [3u64, 5, 7] {
        let p = dim(d);
        let nu = NuSpec::canonical(p);
        let s = ideal_strategy(p, &nu).unwrap();
        let rep = extract(&s, &nu).unwrap();
        worst_state = worst_state.max(rep.state_distance);
        for od in &rep.op_distances {
            worst_op = worst_op.max(od.distance);
        }
    }
    verdict(
        "7 (ideal extraction exact, d=3,5,7)",
        worst_state <= 1e-9 && worst_op <= 1e-9,
        &format!("state distance {worst_state:.3e}, operator distances {worst_op:.3e}"),
    );
}

#[test]
fn criterion_08_robustness_suite() {
    let t0 = Instant::now();
    let seeds: Vec<u64> = (1..=20).collect();
    let magnitudes = [1e-4, 1e-3, 1e-2];
    let mut all_ok = true;
    let mut in_regime_rows = 0usize;
    let mut total_rows = 0usize;
    for d in [3u64, 5] {
        let p = dim(d);
        let nu = NuSpec::canonical(p);
        let rep = run_selftest(p, &nu, &seeds, &magnitudes, NoiseKind::Both, None);
        all_ok &= rep.pass;
        for row in &rep.rows {
            total_rows += 1;
            if row.in_regime {
                in_regime_rows += 1;
                all_ok &= row.c_bound_ok
                    && row.pair_bound_ok
                    && row.commutator_bound_ok
                    && row.bound_satisfied
                    && row.qutrit.as_ref().map(|q| q.all_ok).unwrap_or(true);
            }
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    verdict(
        "8 (robustness bounds over 20 seeds x 3 magnitudes, d=3,5)",
        all_ok && in_regime_rows > 60 && dt < 300.0,
        &format!("{in_regime_rows}/{total_rows} rows in regime, all bounds hold, {dt:.2} s (< 300 s)"),
    );
}

#[test]
fn criterion_09_gamma_equals_sqrt_d() {
    let mut worst = 0.0f64;
    for d in [5u64, 7] {
        let p = dim(d);
        let gamma = BellCoeffs::build(&NuSpec::canonical(p)).gamma();
        worst = worst.max((gamma - (d as f64).sqrt()).abs());
    }
    verdict(
        "9 (gamma(nu) = sqrt(d) for canonical cubic, d=5,7)",
        worst <= 1e-9,
        &format!("worst |gamma - sqrt(d)| = {worst:.3e}"),
    );
}

#[test]
fn criterion_10_degenerate_nu_negative_control() {
    let p = dim(5);
    let quad = Poly::new(p, &[0, 1, 2]);
    let rejected = NuSpec::cubic(quad.clone()).is_err();
    // the debug path lets the degenerate polynomial through, and the
    // flat-modulus property collapses: |g| hits 0 and 1
    let coeffs = BellCoeffs::build(&NuSpec::cubic_unchecked(quad));
    let (lo, hi) = coeffs.modulus_range();
    verdict(
        "10 (degree-2 nu rejected; forced table hits |g| = 0 and 1)",
        rejected && lo < 1e-9 && (hi - 1.0).abs() < 1e-9,
        &format!("rejected = {rejected}, |g| range [{lo:.3e}, {hi:.6}]"),
    );
}

#[test]
fn criterion_11_sweep_determinism() {
    let exe = env!("CARGO_BIN_EXE_qudit-selftest");
    let out_dir = std::env::temp_dir();
    let f1 = out_dir.join("qudit_selftest_acceptance_sweep_1.csv");
    let f2 = out_dir.join("qudit_selftest_acceptance_sweep_2.csv");
    for f in [&f1, &f2] {
        let status = std::process::Command::new(exe)
            .args([
                "sweep",
                "--d",
                "5",
                "--seeds",
                "1,2,3,4",
                "--magnitudes",
                "0.0001,0.001",
                "--out",
                f.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        assert!(status.success());
    }
    let b1 = std::fs::read(&f1).unwrap();
    let b2 = std::fs::read(&f2).unwrap();
    verdict(
        "11 (sweep re-run is byte-identical)",
        b1 == b2 && !b1.is_empty(),
        &format!("{} bytes, identical = {}", b1.len(), b1 == b2),
    );
}
