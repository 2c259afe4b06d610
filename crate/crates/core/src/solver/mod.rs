//! Explicit first-order integrators: forward mixed problem, backward
//! problem, Cauchy problem on the determinate domain and sidewise problem.

pub mod backward;
pub mod cauchy;
pub mod convergence;
pub mod forward;
pub mod sidewise;

pub use backward::{solve_backward, solve_backward_with_rule, PrescribedTraceRule, ReversedRule};
pub use cauchy::{solve_cauchy_max_domain, DeterminateDomain};
pub use convergence::{convergence_study, scheme_error_estimate, ConvergenceRow, ConvergenceTable, Reference};
pub use forward::{cfl_dt, solve_forward, solve_forward_final, SolverOptions, CFL_FACTOR};
pub use sidewise::{solve_sidewise, solve_sidewise_problem, SidewiseOptions, SidewiseProblem};
