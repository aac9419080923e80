use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::{call_function, run_module, ExecOutcome, RuntimeErrorKind, Status, DEFAULT_STEP_LIMIT};
use super::value::Value;
use crate::analysis::CLConfig;
use crate::syntax::{FunctionDef, ModuleAst};

/// Per-call step budget for fuzzed function invocations.
pub const FUZZ_STEP_LIMIT: u64 = 100_000;

const POOL_SIZE: usize = 14;

/// Fresh copies of the fuzzing pool: ints -3..=3, `""`, `"ab"`, `True`,
/// `False`, `None`, `[]`, `[1, 2, 3]`.
pub fn value_pool() -> Vec<Value> {
    let mut pool: Vec<Value> = (-3..=3).map(Value::Int).collect();
    pool.extend([
        Value::str(""),
        Value::str("ab"),
        Value::Bool(true),
        Value::Bool(false),
        Value::None,
        Value::list(vec![]),
        Value::list(vec![Value::Int(1), Value::Int(2), Value::Int(3)]),
    ]);
    debug_assert_eq!(pool.len(), POOL_SIZE);
    pool
}

fn pool_args(indices: &[usize]) -> Vec<Value> {
    let pool = value_pool();
    indices.iter().map(|&i| pool[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Counterexample {
    Outcome {
        function: String,
        args: Vec<String>,
        original: ExecOutcome,
        view: ExecOutcome,
    },
    Arity {
        function: String,
        arity: ArityPair,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArityPair {
    pub original: usize,
    pub view: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// Executions compared, the whole-program run included.
    pub trials: usize,
    pub counterexample: Option<Counterexample>,
}

impl EquivalenceVerdict {
    fn from_search(trials: usize, counterexample: Option<Counterexample>) -> Self {
        EquivalenceVerdict { equivalent: counterexample.is_none(), trials, counterexample }
    }
}

/// Names introduced by inlining or lifting; they have no counterpart to
/// compare against.
pub fn is_transform_artifact(name: &str) -> bool {
    if name.starts_with("__inl_") {
        return true;
    }
    match name.rfind("_L") {
        Some(i) => {
            let digits = &name[i + 2..];
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

/// Two executions agree when every observable field matches. Runs that
/// both exhaust the step budget agree regardless of partial output.
fn outcomes_agree(a: &ExecOutcome, b: &ExecOutcome) -> bool {
    let limit = Status::RuntimeError(RuntimeErrorKind::StepLimit);
    (a.status == limit && b.status == limit) || a == b
}

fn shared_functions<'a>(orig: &'a ModuleAst, view: &'a ModuleAst) -> Vec<(&'a FunctionDef, &'a FunctionDef)> {
    orig.functions()
        .filter(|f| !is_transform_artifact(&f.name))
        .filter_map(|f| view.function(&f.name).map(|g| (f, g)))
        .collect()
}

fn name_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a keeps per-function streams independent of declaration order.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed ^ h
}

fn compare_call(orig: &ModuleAst, view: &ModuleAst, name: &str, indices: &[usize]) -> Option<Counterexample> {
    let a = call_function(orig, name, pool_args(indices), FUZZ_STEP_LIMIT);
    let b = call_function(view, name, pool_args(indices), FUZZ_STEP_LIMIT);
    if outcomes_agree(&a, &b) {
        return None;
    }
    Some(Counterexample::Outcome {
        function: name.to_string(),
        args: pool_args(indices).iter().map(Value::repr).collect(),
        original: a,
        view: b,
    })
}

fn compare_programs(orig: &ModuleAst, view: &ModuleAst) -> Option<Counterexample> {
    let a = run_module(orig, DEFAULT_STEP_LIMIT);
    let b = run_module(view, DEFAULT_STEP_LIMIT);
    if outcomes_agree(&a, &b) {
        return None;
    }
    Some(Counterexample::Outcome { function: "<module>".into(), args: Vec::new(), original: a, view: b })
}

fn arity_check(f: &FunctionDef, g: &FunctionDef) -> Option<Counterexample> {
    (f.params.len() != g.params.len()).then(|| Counterexample::Arity {
        function: f.name.clone(),
        arity: ArityPair { original: f.params.len(), view: g.params.len() },
    })
}

/// Differential check: the whole programs, then every shared function on
/// `cfg.fuzz_trials` seeded argument vectors drawn from [`value_pool`].
pub fn check_equivalence(orig: &ModuleAst, view: &ModuleAst, cfg: &CLConfig) -> EquivalenceVerdict {
    let mut trials = 1;
    if let Some(cx) = compare_programs(orig, view) {
        return EquivalenceVerdict::from_search(trials, Some(cx));
    }
    for (f, g) in shared_functions(orig, view) {
        if let Some(cx) = arity_check(f, g) {
            return EquivalenceVerdict::from_search(trials, Some(cx));
        }
        let arity = f.params.len();
        let runs = if arity == 0 { 1.min(cfg.fuzz_trials) } else { cfg.fuzz_trials };
        let mut rng = ChaCha8Rng::seed_from_u64(name_seed(cfg.seed, &f.name));
        for _ in 0..runs {
            let indices: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..POOL_SIZE)).collect();
            trials += 1;
            if let Some(cx) = compare_call(orig, view, &f.name, &indices) {
                return EquivalenceVerdict::from_search(trials, Some(cx));
            }
        }
    }
    EquivalenceVerdict::from_search(trials, None)
}

/// Exhaustive variant: every argument tuple from the pool for each shared
/// function of arity at most `max_arity`.
pub fn check_exhaustive(orig: &ModuleAst, view: &ModuleAst, max_arity: usize) -> EquivalenceVerdict {
    let mut trials = 1;
    if let Some(cx) = compare_programs(orig, view) {
        return EquivalenceVerdict::from_search(trials, Some(cx));
    }
    for (f, g) in shared_functions(orig, view) {
        if let Some(cx) = arity_check(f, g) {
            return EquivalenceVerdict::from_search(trials, Some(cx));
        }
        let arity = f.params.len();
        if arity > max_arity {
            continue;
        }
        let mut indices = vec![0usize; arity];
        loop {
            trials += 1;
            if let Some(cx) = compare_call(orig, view, &f.name, &indices) {
                return EquivalenceVerdict::from_search(trials, Some(cx));
            }
            // odometer increment over the pool
            let mut pos = 0;
            while pos < arity {
                indices[pos] += 1;
                if indices[pos] < POOL_SIZE {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
            if pos == arity {
                break;
            }
        }
    }
    EquivalenceVerdict::from_search(trials, None)
}
