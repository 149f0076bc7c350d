//! Exact policy iteration on small MDPs for the regularized objective
//! J(π) = E_s E_{a∼π}[Q + c (log π_k − log π_adv) − α log π].

mod mdp;
mod pi;

pub use mdp::{TabularMdp, TabularPolicy, PROB_FLOOR};
pub use pi::{
    closed_form_update, greedy_return, kl_regularized_reduction_check, mean_kl, pi_objective, q_eval, q_from_v, run_pi,
    v_eval, write_trace_csv, AdversaryRule, AdversaryRuleRegistry, EmaRule, FixedRule, PiIterate, PiObjective,
    PiTraceRow, PreviousRule, QTable,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("invalid tabular input: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("singular Bellman system")]
    Singular,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown adversary rule {0:?}")]
    UnknownRule(String),
    #[error("trace output: {0}")]
    Io(String),
}
