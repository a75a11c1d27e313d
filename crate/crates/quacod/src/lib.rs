//! Hybrid quantum-classical solver for drone route scheduling.
//!
//! Assigning `n` routes to `q` identical drones to minimize the latest
//! completion time (with a fixed recharge delay between consecutive routes)
//! is an NP-hard load balancing problem. Encoding it as a penalty QUBO takes
//! `n * q` binary variables, far beyond what a small simulated quantum
//! register can hold, so the solver runs block coordinate descent instead:
//! each iteration frees a small route/drone block, minimizes the block's
//! QUBO with a simulated single-layer hardware-efficient VQE, repairs the
//! decoded bits into a feasible schedule, and keeps the best makespan seen.
//!
//! Module map:
//! - [`model`]: instances, assignments, completion-time arithmetic, bounds
//! - [`qubo`]: penalty QUBO construction, evaluation, clamping
//! - [`selection`]: legal route/drone block selection
//! - [`quantum`]: statevector ansatz, energy tables, expectation, VQE
//! - [`engine`]: the outer solve loop
//! - [`oracle`]: exhaustive references for tests and acceptance checks
//! - [`io`]: instance files, trace CSV, benchmark conversion
//! - [`cli`]: the `quacod` command-line tool
//!
//! ```
//! use quacod::engine::{solve, SolverConfig};
//! use quacod::model::ScheduleInstance;
//!
//! let inst = ScheduleInstance::new(2, 1.15, vec![3.4, 2.8, 4.4]).unwrap();
//! let cfg = SolverConfig { max_iterations: 50, ..Default::default() };
//! let result = solve(&inst, cfg).unwrap();
//! assert!((result.best_makespan - 7.35).abs() < 1e-9);
//! ```

pub mod cli;
pub mod engine;
pub mod io;
pub mod model;
mod optimize;
pub mod oracle;
pub mod quantum;
pub mod qubo;
pub mod selection;
