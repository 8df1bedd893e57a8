//! Reference semantics for state machines and the bounded equivalence
//! check between a machine and its generated net.

mod equiv;
mod interp;

pub use equiv::{
    check_trace_equivalence, Counterexample, EquivError, Move, NetProjection, Outcome, Side, Verdict,
    DEFAULT_CHAIN_BOUND,
};
pub use interp::{enabled_transitions, initial_configuration, inject, step, Choice, Configuration, StepError, TraceStep};
