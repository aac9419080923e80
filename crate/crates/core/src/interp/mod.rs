//! Reference interpreter and differential equivalence oracle.

mod equiv;
mod eval;
mod value;

pub use equiv::{
    check_equivalence, check_exhaustive, is_transform_artifact, value_pool, Counterexample,
    EquivalenceVerdict, FUZZ_STEP_LIMIT,
};
pub use eval::{
    call_function, run_module, ExecOutcome, RuntimeErrorKind, Status, DEFAULT_STEP_LIMIT, MAX_CALL_DEPTH,
};
pub use value::Value;
