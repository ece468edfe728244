//! Driver scheduling by improved squeaky wheel optimisation.
//!
//! The pipeline is: read an [`Instance`](model::Instance), enumerate its legal
//! shifts into a [`CandidatePool`](shiftgen::CandidatePool), solve the LP
//! relaxation once for the fractional-cover signal, then run
//! [`solve_iswo`](engine::solve_iswo) (or the [`solve_swo`](engine::solve_swo)
//! baseline) to pick a low-cost covering set of shifts. The
//! [`oracle`] module gives exact optima for tiny instances.

pub mod engine;
pub mod evaluate;
pub mod generate;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod shiftgen;

pub use engine::{Algorithm, Params, Problem, Schedule, SolveError, SolveResult};
pub use evaluate::Weights;
pub use model::{Instance, InstanceData};
