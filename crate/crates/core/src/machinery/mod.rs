//! Bootstrap schedules, doubling and time selection, ball covers.

mod cover;
mod schedule;
mod selection;

pub use cover::{c_of_m, cover_ball, r_k};
pub use schedule::{
    bootstrap_schedule, exponents, ladder, min_gain_over_range, minimal_l, BootstrapSchedule, Inequality, Ladder,
    DYADIC_BITS, EPS_PER_DELTA, ETA,
};
pub use selection::{
    doubling_select, m_indicator, time_select, DiscreteField, DoublingResult, TimeSelectInput, TimeSelection,
    SAMPLES_PER_UNIT,
};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MachineryError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no admissible time; bad set has measure {bad_measure:.4}")]
    NoAdmissibleTime { bad_measure: f64 },
    #[error("indicator vanishes at the starting point")]
    NonPositiveStart,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
