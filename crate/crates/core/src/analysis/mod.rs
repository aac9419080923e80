//! Cognitive-load metrics: live-variable load against working-memory
//! capacity, block nesting, call-stack depth and line length, combined into
//! one weighted score.

mod callgraph;
mod cfg;
mod config;
mod liveness;
mod nesting;
mod report;

pub use callgraph::{call_depth, resolve_callee, CallGraphInfo, CallSite, BUILTINS, TOP_FRAME};
pub use cfg::{Cfg, CfgNode, NodeKind};
pub use config::{CLConfig, ConfigError};
pub use liveness::{liveness, module_liveness, solve, LivenessMap};
pub use nesting::{nesting_profile, NestingProfile, MODULE_SCOPE};
pub use report::{
    cl_report, overlong_lines, score_number, CallSummary, CognitiveLoadReport, FunctionMetrics, MetricGroups,
    OverlongLine,
};

use thiserror::Error;

use crate::syntax::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("call to undefined function '{name}'")]
    UnresolvedCallee { name: String, span: Span },
}

impl AnalysisError {
    pub fn span(&self) -> Span {
        match self {
            AnalysisError::UnresolvedCallee { span, .. } => *span,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AnalysisError::UnresolvedCallee { .. } => "UnresolvedCallee",
        }
    }
}
