//! Relaxation-oscillator chemical clocks.
//!
//! Build the oscillator and counter systems as polynomial ODEs
//! ([`oscillator`]), integrate them ([`integrator`]), analyse the sampled
//! output ([`trajectory`]), estimate periods by quadrature ([`periodest`]) and
//! compile realizable systems to mass-action reaction networks ([`compiler`],
//! [`crn`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod crn;
pub mod integrator;
pub mod oscillator;
pub mod periodest;
pub mod polyode;
pub mod trajectory;

pub use compiler::{compile, roundtrip_check, CompileError, RoundtripReport};
pub use crn::{Complex, Crn, Reaction};
pub use integrator::{integrate, integrate_with_stats, IntegrateError, IntegrationSpec, IntegrationStats};
pub use oscillator::{
    assign_catalysts, build_core, build_counter, build_stack, ClockAssignment, CounterParams, OscillatorParams,
    Schedule,
};
pub use periodest::{estimate_period, PeriodEstimate};
pub use polyode::{Monomial, PolyError, PolyOde, Species, Term};
pub use trajectory::{
    detect_crossings, find_plateaus, measure_period, Direction, PeriodOptions, PeriodStats, Plateau, Trajectory,
};
