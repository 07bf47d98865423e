//! Sieve basis, certification windows, the composite signal `S_C(r)` and the
//! counts derived from it, plus the independent oracles used to check them.

mod basis;
mod engine;
mod goldbach;
mod oracle;
mod window;

pub use basis::{build_basis, SieveBasis};
pub use engine::{
    certify, certify_with_survivors, composite_signal, composite_signal_with, signal_summary,
    CertifiedResult, HitRule, SignalOptions, SignalSummary, SignalTrace, TraceMode,
    MAX_FULL_TRACE_M0,
};
pub use goldbach::{goldbach_count, goldbach_count_with_pairs};
pub use oracle::{classical_oracle_count, classical_oracle_window, torus_average};
pub use window::{Window, MAX_WINDOW_END};
