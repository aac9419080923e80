//! Virtual code views for MiniPy: measure cognitive-load metrics of a
//! program and rewrite it into an equivalent, flatter, narrower form.

pub mod analysis;
pub mod cli;
pub mod emit;
pub mod interp;
pub mod refactor;
pub mod syntax;
