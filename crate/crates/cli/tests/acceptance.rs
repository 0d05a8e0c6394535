//! Acceptance suite: each numbered criterion runs in order and prints one
//! PASS/FAIL line; the test fails at the end if any criterion failed.
//!
//! Criteria 6, 7 and 9 drive the `gatefloor` binary exactly
//! as a user would; the rest call the library directly.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gatefloor::gates::{self, permute_qubits, QubitPermutation};
use gatefloor::matrix::{eigenvalues_unitary, schmidt_vector, EigenMultiset};
use gatefloor::random::{haar_unitary, random_state};
use gatefloor::structure::{eigen_multiset_match, eigen_pair_product_exists, product_state_in_span};
use gatefloor::synthesis::engine::{optimize, optimize_all, SynthesisConfig};
use gatefloor::synthesis::template::{enumerate_templates, CircuitTemplate};
use gatefloor::synthesis::verify::verify_known_decompositions;
use gatefloor::ComplexMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

// Tolerances.
const IDENTITY_TOL: f64 = 1e-12;
const SCHMIDT_TOL: f64 = 1e-8;
const SPECTRUM_TOL: f64 = 1e-6;
const VERIFY_TOL: f64 = 1e-10;
const SUCCESS_TOL: f64 = 1e-6;
const FLOOR_BOUND: f64 = 1e-3;

// Experiment settings.
const SEED: u64 = 7;
const SAMPLES: usize = 1000;
const WITNESS: &str = "BC-AB-BC-AB-AC";
const WITNESS_RESTARTS: usize = 20;
const WITNESS_ITERS: usize = 20000;
const FLOOR_RESTARTS: usize = 50;
const FLOOR_ITERS: usize = 3000;
const STEP: f64 = 4.0;
/// Deutsch angle π/2 at full precision.
const DEUTSCH_HALF_PI: &str = "deutsch:1.5707963267948966";

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

/// Written straight to stderr so the lines show up even when output is captured.
fn report(n: usize, title: &str, o: &Outcome, seconds: f64) {
    let verdict = if o.passed { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {n} [{verdict}] {title}: {} ({seconds:.1} s)",
        o.detail
    );
}

fn gatefloor(args: &[String]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gatefloor"))
        .args(args)
        .output()
        .expect("binary runs");
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap_or(-1), text)
}

fn synthesize_args(target: &str, selection: &[&str], restarts: usize, iters: usize, out: &Path) -> Vec<String> {
    let mut args: Vec<String> = vec!["synthesize".into(), "--target".into(), target.into()];
    args.extend(selection.iter().map(|s| s.to_string()));
    for (flag, value) in [
        ("--restarts", restarts.to_string()),
        ("--seed", SEED.to_string()),
        ("--max-iters", iters.to_string()),
        ("--step", STEP.to_string()),
        ("--tol", SUCCESS_TOL.to_string()),
        ("--out", out.display().to_string()),
    ] {
        args.push(flag.into());
        args.push(value);
    }
    args
}

/// `(template, bestCost)` per line of a results file.
fn best_costs(dir: &Path) -> Vec<(String, f64)> {
    fs::read_to_string(dir.join("results.jsonl"))
        .map(|text| {
            text.lines()
                .map(|l| {
                    let v: Value = serde_json::from_str(l).expect("JSON line");
                    let template: Vec<String> = v["result"]["template"]
                        .as_array()
                        .expect("template")
                        .iter()
                        .map(|p| p.as_str().unwrap().to_string())
                        .collect();
                    (template.join("-"), v["result"]["bestCost"].as_f64().expect("cost"))
                })
                .collect()
        })
        .unwrap_or_default()
}

fn criterion_1() -> Outcome {
    let t = gates::toffoli();
    let mut perm = ComplexMatrix::zeros(8);
    for i in 0..8 {
        let j = match i {
            6 => 7,
            7 => 6,
            i => i,
        };
        perm.as_mut_slice()[j * 8 + i] = Complex64::new(1.0, 0.0);
    }
    let toffoli_exact = t == perm;
    let mut diag = vec![1.0; 8];
    diag[7] = -1.0;
    let v_exact = gates::v_abc() == gates::real_diag(&diag);
    let h = gates::hadamard_on_c();
    let conj = (&(&h * &t) * &h).distance(&gates::v_abc());
    outcome(
        toffoli_exact && v_exact && conj <= IDENTITY_TOL,
        format!("toffoli exact {toffoli_exact}, v_abc exact {v_exact}, H-conjugation distance {conj:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let v = gates::v_abc();
    let worst = QubitPermutation::all()
        .iter()
        .map(|p| permute_qubits(&v, p).unwrap().distance(&v))
        .fold(0.0, f64::max);
    outcome(worst <= IDENTITY_TOL, format!("largest deviation over 6 permutations {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..SAMPLES {
        let (u, v) = (random_state(4, &mut rng), random_state(4, &mut rng));
        let p = product_state_in_span(&u, &v).unwrap();
        let second = schmidt_vector(&p, [2, 2]).unwrap().coefficients[1];
        worst = worst.max(second);
        if second <= SCHMIDT_TOL {
            ok += 1;
        }
    }
    outcome(ok == SAMPLES, format!("{ok}/{SAMPLES} product, largest second Schmidt coefficient {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let one = Complex64::new(1.0, 0.0);
    let flip = EigenMultiset::new(vec![one, one, one, -one]);
    let pair = eigen_pair_product_exists(&flip, SPECTRUM_TOL).unwrap();
    let z = gates::pauli_z();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut matches = 0;
    let mut closest = f64::INFINITY;
    for _ in 0..SAMPLES {
        let u = haar_unitary(2, &mut rng);
        let a = eigenvalues_unitary(&u).unwrap();
        let b = eigenvalues_unitary(&(&u * &z)).unwrap();
        let m = eigen_multiset_match(&a, &b, SPECTRUM_TOL).unwrap();
        closest = closest.min(m.max_distance);
        if m.matched {
            matches += 1;
        }
    }
    outcome(
        !pair.holds && matches == 0,
        format!(
            "pair product on {{1,1,1,-1}}: {}; spectra of u and uZ matched {matches}/{SAMPLES} (closest {closest:.2e})",
            pair.holds
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (length, classes, total) in [(2, 1, 6), (3, 2, 12), (4, 3, 24)] {
        let found = enumerate_templates(length).unwrap();
        let sum: usize = found.iter().map(|c| c.orbit_size).sum();
        ok &= found.len() == classes && sum == total;
        parts.push(format!("length {length}: {} classes, orbit sum {sum}", found.len()));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6(out: &Path) -> (Outcome, Option<f64>) {
    let report = verify_known_decompositions(VERIFY_TOL).unwrap();
    let exact_ok = report.passed;
    let args = synthesize_args("toffoli", &["--template", WITNESS], WITNESS_RESTARTS, WITNESS_ITERS, out);
    let (code, text) = gatefloor(&args);
    let best = best_costs(out).first().map(|(_, c)| *c);
    let ok = exact_ok && code == 0 && best.is_some_and(|c| c <= SUCCESS_TOL);
    let residuals: Vec<String> = report.checks.iter().map(|c| format!("{} {:.1e}", c.name, c.residual)).collect();
    let detail = format!(
        "known decompositions [{}]; {WITNESS} best cost {} over {WITNESS_RESTARTS} restarts (exit {code})",
        residuals.join(", "),
        best.map_or("missing".into(), |c| format!("{c:.3e}")),
    );
    if code != 0 {
        eprintln!("{text}");
    }
    (outcome(ok, detail), best)
}

fn criterion_7(out: &Path) -> (Outcome, Vec<(String, f64)>) {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut toffoli_rows = Vec::new();
    for (label, target) in [("toffoli", "toffoli"), ("deutsch(pi/2)", DEUTSCH_HALF_PI)] {
        let dir = out.join(label.replace(['(', ')', '/'], "_"));
        let args = synthesize_args(target, &["--all", "--length", "4"], FLOOR_RESTARTS, FLOOR_ITERS, &dir);
        let (code, text) = gatefloor(&args);
        let rows = best_costs(&dir);
        let floor = rows.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
        ok &= code == 0 && rows.len() == 3 && floor > FLOOR_BOUND;
        if code != 0 {
            eprintln!("{text}");
        }
        let listing: Vec<String> = rows.iter().map(|(t, c)| format!("{t} {c:.4e}")).collect();
        parts.push(format!("{label}: {}", listing.join(", ")));
        if label == "toffoli" {
            toffoli_rows = rows;
        }
    }
    (outcome(ok, format!("floors with {FLOOR_RESTARTS} restarts; {}", parts.join("; "))), toffoli_rows)
}

fn verdict_config(restarts: usize, max_iters: usize) -> SynthesisConfig {
    SynthesisConfig {
        restarts,
        seed: SEED,
        max_iters,
        step_size: STEP,
        success_tol: SUCCESS_TOL,
        ..Default::default()
    }
}

fn any_converged(length: usize, target: &ComplexMatrix, cfg: &SynthesisConfig) -> bool {
    optimize_all(length, target, cfg).unwrap().iter().any(|r| r.converged)
}

fn criterion_8(witness_best: Option<f64>, toffoli_four: &[(String, f64)]) -> Outcome {
    let short = verdict_config(10, FLOOR_ITERS);
    let toffoli = gates::toffoli();
    let v_abc = gates::v_abc();
    let witness: CircuitTemplate = WITNESS.parse().unwrap();

    let mut toffoli_verdicts: Vec<bool> = (1..=3).map(|l| any_converged(l, &toffoli, &short)).collect();
    toffoli_verdicts.push(toffoli_four.iter().any(|(_, c)| *c <= SUCCESS_TOL));
    toffoli_verdicts.push(witness_best.is_some_and(|c| c <= SUCCESS_TOL));

    let mut v_verdicts: Vec<bool> = (1..=3).map(|l| any_converged(l, &v_abc, &short)).collect();
    v_verdicts.push(any_converged(4, &v_abc, &verdict_config(20, FLOOR_ITERS)));
    v_verdicts.push(optimize(&witness, &v_abc, &verdict_config(5, WITNESS_ITERS)).unwrap().converged);

    let show = |v: &[bool]| v.iter().map(|&b| if b { "y" } else { "n" }).collect::<Vec<_>>().join("");
    outcome(
        toffoli_verdicts == v_verdicts && toffoli_verdicts == [false, false, false, false, true],
        format!(
            "converged at lengths 1-5: toffoli {}, v_abc {}",
            show(&toffoli_verdicts),
            show(&v_verdicts)
        ),
    )
}

fn criterion_9(first: &Path, second: &Path) -> Outcome {
    let args = synthesize_args("toffoli", &["--template", WITNESS], WITNESS_RESTARTS, WITNESS_ITERS, second);
    let (code, _) = gatefloor(&args);
    let a = fs::read(first.join("results.jsonl")).unwrap_or_default();
    let b = fs::read(second.join("results.jsonl")).unwrap_or_default();
    outcome(
        code == 0 && !a.is_empty() && a == b,
        format!("rerun exit {code}; results.jsonl {} bytes, byte-identical {}", a.len(), a == b),
    )
}

#[test]
fn acceptance_criteria() {
    let work = tempfile::tempdir().unwrap();
    let witness_dir = work.path().join("witness");
    let mut results: Vec<(usize, bool)> = Vec::new();
    let mut run = |n: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        report(n, title, &o, start.elapsed().as_secs_f64());
        results.push((n, o.passed));
    };

    run(1, "exact gate identities", &mut criterion_1);
    run(2, "permutation symmetry of v_abc", &mut criterion_2);
    run(3, "product state in every 2-dim subspace", &mut criterion_3);
    run(4, "spectral obstructions", &mut criterion_4);
    run(5, "template class counts", &mut criterion_5);

    let mut witness_best = None;
    run(6, "five-gate sufficiency", &mut || {
        let (o, best) = criterion_6(&witness_dir);
        witness_best = best;
        o
    });
    let mut toffoli_four = Vec::new();
    run(7, "four-gate floors", &mut || {
        let (o, rows) = criterion_7(&work.path().join("floors"));
        toffoli_four = rows;
        o
    });
    run(8, "toffoli and v_abc verdicts agree", &mut || criterion_8(witness_best, &toffoli_four));
    run(9, "deterministic reruns", &mut || criterion_9(&witness_dir, &work.path().join("rerun")));

    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
