//! Time integration of the full system and of the Friedrichs system for
//! the remainder `w`.

mod accumulator;
mod config;
mod friedrichs;
mod integrator;
mod run;

pub use accumulator::NormAccumulator;
pub use config::{dealiased_radius, max_resolvable_radius, Dealiasing, Integrator, SolverConfig};
pub use friedrichs::{friedrichs_projectors, rhs_w, FriedrichsMasks};
pub use integrator::IfRk4;
pub use run::{
    continuous_dependence_run, rhs_u, solve_u, solve_u_observed, solve_w, solve_w_observed, ContinuousDependenceReport, Run,
    RunRecord, UEvolution, WEvolution, BLOW_UP_NORM,
};
