//! Seeded multi-start optimization of a template against a target, and the
//! minimum-length search across all template classes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::{CircuitCost, PARAMS_PER_SLOT};
use super::optimizer::{Objective, OptimizerRegistry, OptimizerSettings, StopReason};
use super::template::{enumerate_templates, CircuitTemplate, TemplateClass};
use crate::error::{invalid, Result};
use crate::matrix::ComplexMatrix;

/// Longest template the minimum-length search accepts.
pub const MAX_SEARCH_LENGTH: usize = 6;

/// Gradient norm below which a restart stops.
pub const GRAD_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SynthesisConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub step_size: f64,
    pub grad_epsilon: f64,
    /// A restart counts as converged at cost ≤ this; it stops early at a tenth of it.
    pub success_tol: f64,
    /// Label of the target (gate name or file path); informational.
    pub target: String,
    pub optimizer: String,
    /// Keep per-iteration costs of every restart.
    #[serde(default)]
    pub record_traces: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            max_iters: 1000,
            step_size: 1.0,
            grad_epsilon: 1e-6,
            success_tol: 1e-6,
            target: String::new(),
            optimizer: OptimizerRegistry::DEFAULT.to_string(),
            record_traces: false,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(invalid("restarts must be at least 1"));
        }
        if !(self.success_tol > 0.0) {
            return Err(invalid(format!("success tolerance must be positive, got {}", self.success_tol)));
        }
        if !(self.grad_epsilon > 0.0 && self.grad_epsilon <= 1e-3) {
            return Err(invalid(format!("gradient epsilon must lie in (0, 1e-3], got {}", self.grad_epsilon)));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(invalid(format!("step size must be positive, got {}", self.step_size)));
        }
        OptimizerRegistry::with_builtin().get(&self.optimizer)?;
        Ok(())
    }

    fn settings(&self) -> OptimizerSettings {
        OptimizerSettings {
            max_iters: self.max_iters,
            step_size: self.step_size,
            grad_epsilon: self.grad_epsilon,
            target_cost: self.success_tol / 10.0,
            grad_tol: GRAD_TOL,
            record_trace: self.record_traces,
        }
    }
}

/// Seed of restart `r`: a SplitMix64 step over `(seed, r)`.
pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    let mut z = seed.wrapping_add((restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Initial parameters of one restart, uniform in [−π, π].
pub fn initial_params(template: &CircuitTemplate, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..template.len() * PARAMS_PER_SLOT).map(|_| rng.gen_range(-PI..=PI)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RestartRecord {
    pub restart: usize,
    pub seed: u64,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassSummary {
    pub canonical: CircuitTemplate,
    pub orbit_size: usize,
    /// How the optimized template maps onto `canonical`.
    pub symmetries_applied: String,
}

impl ClassSummary {
    pub fn of(template: &CircuitTemplate) -> Self {
        let class = TemplateClass::of(template);
        let symmetry = class.symmetry_from(template).expect("member of its own class");
        Self {
            canonical: class.canonical,
            orbit_size: class.orbit_size,
            symmetries_applied: symmetry.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SynthesisResult {
    pub template: CircuitTemplate,
    pub class: ClassSummary,
    pub best_cost: f64,
    pub best_restart: usize,
    pub best_params: Vec<f64>,
    pub per_restart: Vec<RestartRecord>,
    pub converged: bool,
    /// Per-restart cost traces, kept out of the JSON record.
    #[serde(skip)]
    pub traces: Vec<Vec<f64>>,
}

/// Runs `cfg.restarts` seeded local minimizations of the phase-invariant cost.
///
/// Restarts run in parallel but are collected in index order, and the best
/// restart is the least `(final cost, index)`, so the result depends only
/// on `cfg`.
pub fn optimize(template: &CircuitTemplate, target: &ComplexMatrix, cfg: &SynthesisConfig) -> Result<SynthesisResult> {
    cfg.validate()?;
    if target.dim() != 8 {
        return Err(invalid(format!("target must be 8x8, got {}x{}", target.dim(), target.dim())));
    }
    let optimizer = OptimizerRegistry::with_builtin().get(&cfg.optimizer)?;
    let objective = CircuitCost::new(template, target)?;
    let settings = cfg.settings();

    let runs: Vec<(RestartRecord, Vec<f64>, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let seed = restart_seed(cfg.seed, restart);
            let x0 = initial_params(template, seed);
            let initial_cost = objective.value(&x0);
            let m = optimizer.minimize(&objective, x0, &settings);
            let record = RestartRecord {
                restart,
                seed,
                initial_cost,
                final_cost: m.cost,
                iterations: m.iterations,
                stop: m.stop,
            };
            (record, m.x, m.trace)
        })
        .collect();

    let best = runs
        .iter()
        .min_by(|a, b| a.0.final_cost.total_cmp(&b.0.final_cost).then(a.0.restart.cmp(&b.0.restart)))
        .expect("at least one restart");
    let best_cost = best.0.final_cost;
    let best_restart = best.0.restart;
    let best_params = best.1.clone();
    let mut per_restart = Vec::with_capacity(runs.len());
    let mut traces = Vec::with_capacity(runs.len());
    for (record, _, trace) in runs {
        per_restart.push(record);
        traces.push(trace);
    }
    Ok(SynthesisResult {
        template: template.clone(),
        class: ClassSummary::of(template),
        best_cost,
        best_restart,
        best_params,
        per_restart,
        converged: best_cost <= cfg.success_tol,
        traces,
    })
}

/// Optimizes the canonical representative of every class of `length`.
pub fn optimize_all(length: usize, target: &ComplexMatrix, cfg: &SynthesisConfig) -> Result<Vec<SynthesisResult>> {
    enumerate_templates(length)?
        .iter()
        .map(|class| optimize(&class.canonical, target, cfg))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchRow {
    pub length: usize,
    pub class: CircuitTemplate,
    pub best_cost: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchReport {
    pub max_length: usize,
    pub rows: Vec<SearchRow>,
    /// Smallest length at which some class converged.
    pub smallest_converged_length: Option<usize>,
    #[serde(skip)]
    pub results: Vec<SynthesisResult>,
}

impl SearchReport {
    /// Whether any class of `length` converged; `None` if the length was not searched.
    pub fn converged_at(&self, length: usize) -> Option<bool> {
        let rows: Vec<&SearchRow> = self.rows.iter().filter(|r| r.length == length).collect();
        (!rows.is_empty()).then(|| rows.iter().any(|r| r.converged))
    }
}

/// Optimizes every class at every length up to `max_length` and reports the
/// smallest length whose best class converges.
pub fn min_gate_search(target: &ComplexMatrix, max_length: usize, cfg: &SynthesisConfig) -> Result<SearchReport> {
    if !(1..=MAX_SEARCH_LENGTH).contains(&max_length) {
        return Err(invalid(format!("max length must be in 1..={MAX_SEARCH_LENGTH}, got {max_length}")));
    }
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for length in 1..=max_length {
        for result in optimize_all(length, target, cfg)? {
            rows.push(SearchRow {
                length,
                class: result.class.canonical.clone(),
                best_cost: result.best_cost,
                converged: result.converged,
            });
            results.push(result);
        }
    }
    let smallest_converged_length = rows.iter().find(|r| r.converged).map(|r| r.length);
    Ok(SearchReport {
        max_length,
        rows,
        smallest_converged_length,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{self, PairLabel, QubitPermutation};
    use crate::random::haar_unitary;
    use crate::synthesis::circuit::{cost, ParamCircuit};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn quick(restarts: usize, max_iters: usize) -> SynthesisConfig {
        SynthesisConfig {
            restarts,
            seed: 11,
            max_iters,
            step_size: 4.0,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SynthesisConfig::default().validate().is_ok());
        for bad in [
            SynthesisConfig { restarts: 0, ..Default::default() },
            SynthesisConfig { success_tol: 0.0, ..Default::default() },
            SynthesisConfig { grad_epsilon: 1e-2, ..Default::default() },
            SynthesisConfig { grad_epsilon: 0.0, ..Default::default() },
            SynthesisConfig { step_size: -1.0, ..Default::default() },
            SynthesisConfig { optimizer: "annealing".into(), ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn identity_target_converges_immediately() {
        let t: CircuitTemplate = "AB-BC".parse().unwrap();
        let r = optimize(&t, &ComplexMatrix::identity(8), &quick(1, 2000)).unwrap();
        assert!(r.best_cost <= 1e-10 || r.converged);
        assert!(r.best_cost <= 1e-6);
    }

    #[test]
    fn single_gate_target_needs_one_slot() {
        let target = gates::embed_pair(PairLabel::AB, &gates::cnot()).unwrap();
        let report = min_gate_search(&target, 2, &SynthesisConfig { optimizer: "bfgs".into(), ..quick(4, 500) }).unwrap();
        assert_eq!(report.smallest_converged_length, Some(1));
        assert_eq!(report.rows.len(), 2);
    }

    #[test]
    fn rejects_bad_targets() {
        let t: CircuitTemplate = "AB".parse().unwrap();
        assert!(optimize(&t, &ComplexMatrix::identity(4), &quick(1, 1)).is_err());
        assert!(optimize(&t, &gates::real_diag(&[1., 1., 1., 1., 1., 1., 1., 2.]), &quick(1, 1)).is_err());
        assert!(min_gate_search(&gates::toffoli(), 7, &quick(1, 1)).is_err());
    }

    #[test]
    fn best_cost_is_minimum_over_restarts_and_deterministic() {
        let t: CircuitTemplate = "AB-BC-AB".parse().unwrap();
        let cfg = quick(4, 60);
        let a = optimize(&t, &gates::toffoli(), &cfg).unwrap();
        let b = optimize(&t, &gates::toffoli(), &cfg).unwrap();
        let min = a.per_restart.iter().map(|r| r.final_cost).fold(f64::INFINITY, f64::min);
        assert_eq!(a.best_cost, min);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let pc = ParamCircuit::new(t, a.best_params.clone()).unwrap();
        assert!((cost(&pc, &gates::toffoli()).unwrap() - a.best_cost).abs() < 1e-12);
        assert_eq!(a.class.canonical.to_string(), "AB-BC-AB");
    }

    #[test]
    fn traces_are_recorded_on_request() {
        let t: CircuitTemplate = "AB-AC".parse().unwrap();
        let cfg = SynthesisConfig { record_traces: true, ..quick(2, 5) };
        let r = optimize(&t, &gates::toffoli(), &cfg).unwrap();
        for (trace, rec) in r.traces.iter().zip(&r.per_restart) {
            assert_eq!(trace.len(), rec.iterations + 1);
            assert_eq!(trace[0], rec.initial_cost);
            assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        }
        assert!(!serde_json::to_string(&r).unwrap().contains("traces"));
    }

    #[test]
    fn restart_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|r| restart_seed(7, r)).collect();
        assert_eq!(seeds.len(), 1000);
        let x = initial_params(&"AB-BC".parse().unwrap(), 3);
        assert_eq!(x.len(), 32);
        assert!(x.iter().all(|v| v.abs() <= PI));
    }

    fn random_circuit(seed: u64, len: usize) -> ParamCircuit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut slots = vec![PairLabel::ALL[rng.gen_range(0..3)]];
        while slots.len() < len {
            let p = PairLabel::ALL[rng.gen_range(0..3)];
            if *slots.last().unwrap() != p {
                slots.push(p);
            }
        }
        let t = CircuitTemplate::new(slots).unwrap();
        let params = initial_params(&t, seed);
        ParamCircuit::new(t, params).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn relabelling_preserves_cost_against_v_abc(seed in any::<u64>(), len in 1usize..=6) {
            let pc = random_circuit(seed, len);
            let c = cost(&pc, &gates::v_abc()).unwrap();
            for p in QubitPermutation::all() {
                let c2 = cost(&pc.relabeled(&p), &gates::v_abc()).unwrap();
                prop_assert!((c - c2).abs() <= 1e-12);
            }
        }

        #[test]
        fn reversal_preserves_cost_for_hermitian_targets(seed in any::<u64>(), len in 1usize..=6) {
            let pc = random_circuit(seed, len);
            for target in [gates::v_abc(), gates::toffoli()] {
                let c = cost(&pc, &target).unwrap();
                let c2 = cost(&pc.inverse(), &target).unwrap();
                prop_assert!((c - c2).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn finite_differences_converge_at_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t: CircuitTemplate = "AB-BC-AC".parse().unwrap();
        let target = haar_unitary(8, &mut rng);
        let objective = CircuitCost::new(&t, &target).unwrap();
        let n = objective.dim();
        let mut checked = 0;
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let along = |s: f64| {
                let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + s * b).collect();
                objective.value(&y)
            };
            let fd = |h: f64| (along(h) - along(-h)) / (2.0 * h);
            // Independent reference: Richardson extrapolation at a much finer step.
            let reference = (4.0 * fd(5e-4) - fd(1e-3)) / 3.0;
            let eps = 1e-2;
            let (e1, e2) = ((fd(eps) - reference).abs(), (fd(eps / 2.0) - reference).abs());
            if e1 < 1e-9 {
                continue; // curvature too flat along d to resolve the order
            }
            let ratio = e1 / e2;
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
            checked += 1;
        }
        assert!(checked >= 90);
    }

    #[test]
    fn fast_gradient_is_a_directional_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t: CircuitTemplate = "AB-BC-AB-AC".parse().unwrap();
        let objective = CircuitCost::new(&t, &gates::toffoli()).unwrap();
        let n = objective.dim();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut g = vec![0.0; n];
            objective.gradient(&x, 1e-6, &mut g);
            let along = |s: f64| {
                let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + s * b).collect();
                objective.value(&y)
            };
            let dd = (along(1e-5) - along(-1e-5)) / 2e-5;
            let gd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            assert!((dd - gd).abs() < 1e-6, "{dd} vs {gd}");
        }
    }
}
