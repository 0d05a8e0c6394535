//! Local optimizers behind a common trait, looked up by name at runtime.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth real function of a parameter vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Central finite-difference gradient with step `eps`.
    ///
    /// Implementations may override this with a faster evaluation of the same
    /// central differences.
    fn gradient(&self, x: &[f64], eps: f64, out: &mut [f64]) {
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            probe[i] = x[i] + eps;
            let plus = self.value(&probe);
            probe[i] = x[i] - eps;
            let minus = self.value(&probe);
            probe[i] = x[i];
            out[i] = (plus - minus) / (2.0 * eps);
        }
    }
}

/// Objective backed by a closure; gradients come from the default central differences.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub max_iters: usize,
    /// Initial trial step of every line search.
    pub step_size: f64,
    pub grad_epsilon: f64,
    /// Stop as soon as the cost is at or below this value.
    pub target_cost: f64,
    pub grad_tol: f64,
    pub record_trace: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            step_size: 1.0,
            grad_epsilon: 1e-6,
            target_cost: 0.0,
            grad_tol: 1e-12,
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    TargetReached,
    MaxIterations,
    SmallGradient,
    LineSearchFailed,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StopReason::TargetReached => "target-reached",
            StopReason::MaxIterations => "max-iterations",
            StopReason::SmallGradient => "small-gradient",
            StopReason::LineSearchFailed => "line-search-failed",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Cost after each iteration, starting with the initial point (when recorded).
    pub trace: Vec<f64>,
}

pub trait LocalOptimizer: Send + Sync {
    fn name(&self) -> &'static str;

    fn minimize(&self, objective: &dyn Objective, x0: Vec<f64>, settings: &OptimizerSettings) -> Minimum;
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Backtracking along `dir` from `step`; returns the accepted point and its cost.
fn backtrack(
    objective: &dyn Objective,
    x: &[f64],
    fx: f64,
    dir: &[f64],
    slope: f64,
    mut step: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let mut trial = vec![0.0; x.len()];
    while step >= MIN_STEP {
        for ((t, xi), di) in trial.iter_mut().zip(x).zip(dir) {
            *t = xi + step * di;
        }
        let ft = objective.value(&trial);
        if ft <= fx + ARMIJO * step * slope {
            return Some((trial, ft, step));
        }
        step *= 0.5;
    }
    None
}

/// Steepest descent on finite-difference gradients with an Armijo
/// backtracking line search that restarts from `step_size` every iteration.
#[derive(Clone, Copy, Debug, Default)]
pub struct GradientDescent;

impl LocalOptimizer for GradientDescent {
    fn name(&self) -> &'static str {
        "gradient-descent"
    }

    fn minimize(&self, objective: &dyn Objective, x0: Vec<f64>, s: &OptimizerSettings) -> Minimum {
        let mut x = x0;
        let mut fx = objective.value(&x);
        let mut grad = vec![0.0; x.len()];
        let mut trace = Vec::new();
        if s.record_trace {
            trace.push(fx);
        }
        let mut iterations = 0;
        let stop = loop {
            if fx <= s.target_cost {
                break StopReason::TargetReached;
            }
            if iterations >= s.max_iters {
                break StopReason::MaxIterations;
            }
            objective.gradient(&x, s.grad_epsilon, &mut grad);
            let gnorm2 = dot(&grad, &grad);
            if gnorm2.sqrt() <= s.grad_tol {
                break StopReason::SmallGradient;
            }
            let dir: Vec<f64> = grad.iter().map(|g| -g).collect();
            match backtrack(objective, &x, fx, &dir, -gnorm2, s.step_size) {
                Some((next, fnext, _)) => {
                    x = next;
                    fx = fnext;
                }
                None => break StopReason::LineSearchFailed,
            }
            iterations += 1;
            if s.record_trace {
                trace.push(fx);
            }
        };
        Minimum {
            x,
            cost: fx,
            iterations,
            stop,
            trace,
        }
    }
}

/// Quasi-Newton (BFGS inverse-Hessian update) on the same finite-difference
/// gradients and line search. Falls back to steepest descent whenever the
/// quasi-Newton direction is not a descent direction.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bfgs;

impl LocalOptimizer for Bfgs {
    fn name(&self) -> &'static str {
        "bfgs"
    }

    fn minimize(&self, objective: &dyn Objective, x0: Vec<f64>, s: &OptimizerSettings) -> Minimum {
        let n = x0.len();
        let mut x = x0;
        let mut fx = objective.value(&x);
        let mut grad = vec![0.0; n];
        objective.gradient(&x, s.grad_epsilon, &mut grad);
        // Inverse Hessian approximation, row-major.
        let mut hinv = identity(n);
        let mut trace = Vec::new();
        if s.record_trace {
            trace.push(fx);
        }
        let mut iterations = 0;
        let mut next_grad = vec![0.0; n];
        let stop = loop {
            if fx <= s.target_cost {
                break StopReason::TargetReached;
            }
            if iterations >= s.max_iters {
                break StopReason::MaxIterations;
            }
            if dot(&grad, &grad).sqrt() <= s.grad_tol {
                break StopReason::SmallGradient;
            }
            let mut dir: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &grad)).collect();
            let mut slope = dot(&dir, &grad);
            if slope >= 0.0 {
                hinv = identity(n);
                dir = grad.iter().map(|g| -g).collect();
                slope = -dot(&grad, &grad);
            }
            let accepted = backtrack(objective, &x, fx, &dir, slope, s.step_size).or_else(|| {
                // Retry along the plain gradient before giving up.
                hinv = identity(n);
                let sd: Vec<f64> = grad.iter().map(|g| -g).collect();
                backtrack(objective, &x, fx, &sd, -dot(&grad, &grad), s.step_size)
            });
            let Some((next, fnext, _)) = accepted else {
                break StopReason::LineSearchFailed;
            };
            objective.gradient(&next, s.grad_epsilon, &mut next_grad);
            let step: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            let dgrad: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&step, &dgrad);
            if sy > 1e-16 * dot(&step, &step).sqrt() * dot(&dgrad, &dgrad).sqrt() {
                bfgs_update(&mut hinv, &step, &dgrad, sy);
            }
            x = next;
            fx = fnext;
            grad.copy_from_slice(&next_grad);
            iterations += 1;
            if s.record_trace {
                trace.push(fx);
            }
        };
        Minimum {
            x,
            cost: fx,
            iterations,
            stop,
            trace,
        }
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Name → optimizer table.
#[derive(Clone)]
pub struct OptimizerRegistry {
    entries: BTreeMap<String, Arc<dyn LocalOptimizer>>,
}

impl OptimizerRegistry {
    pub const DEFAULT: &'static str = "gradient-descent";

    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(GradientDescent)).expect("distinct");
        r.register(Arc::new(Bfgs)).expect("distinct");
        r
    }

    pub fn register(&mut self, opt: Arc<dyn LocalOptimizer>) -> Result<()> {
        let name = opt.name().to_string();
        if self.entries.contains_key(&name) {
            return Err(Error::InvalidArgument(format!("optimizer `{name}` is already registered")));
        }
        self.entries.insert(name, opt);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn LocalOptimizer>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl Default for OptimizerRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}
