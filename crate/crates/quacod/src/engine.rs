//! The outer solve loop: initialize greedily, then repeatedly free a random
//! route/drone block, minimize the block's QUBO with the simulated VQE, decode
//! and repair the result, and track the best schedule seen.
//!
//! The loop optimizes the balance surrogate (squared deviation of completion
//! times from their fixed mean) but ranks the best-so-far schedule by the true
//! makespan; the surrogate can prefer balanced-but-worse schedules, so the two
//! are kept separate throughout. With the default `always` acceptance the
//! trace fluctuates while the best-so-far column is non-increasing; `monotone`
//! acceptance forces descent in the surrogate instead.
//!
//! The full QUBO is never materialized here: every iteration expands only the
//! selected block, so memory stays independent of the instance size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{self, Assignment, ModelError, ScheduleInstance};
use crate::quantum::{self, VqeConfig, MAX_TABLE_QUBITS};
use crate::qubo;
use crate::selection::{self, Selection, SelectionPolicy};

/// How a repaired candidate replaces the current schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Acceptance {
    /// Adopt every repaired candidate; best-so-far tracking keeps the winner.
    #[default]
    Always,
    /// Adopt only candidates that do not increase the balance objective.
    Monotone,
}

/// Solve-loop configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Qubit budget `m`: per-iteration block size cap.
    pub qubit_budget: usize,
    pub max_iterations: usize,
    /// Stop after this many iterations without a best-makespan improvement;
    /// 0 disables the early stop.
    pub stagnation_window: usize,
    pub acceptance: Acceptance,
    /// Penalty weight override; defaults to [`qubo::default_penalty`].
    pub penalty: Option<f64>,
    /// Preferred drone-subset size for block selection.
    pub target_drones: usize,
    /// Redraws allowed for a degenerate block before the iteration is skipped.
    pub selection_retries: usize,
    /// VQE budget override; defaults to a schedule scaled by block size.
    pub vqe: Option<VqeConfig>,
    /// Master seed; selection and VQE draw from separate streams derived
    /// from it.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            qubit_budget: 20,
            max_iterations: 400,
            stagnation_window: 0,
            acceptance: Acceptance::Always,
            penalty: None,
            target_drones: 4,
            selection_retries: 32,
            vqe: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("qubit budget {budget} outside supported range 2..={cap}")]
    BadQubitBudget { budget: usize, cap: usize },
    #[error("penalty override must be finite and non-negative, got {0}")]
    BadPenalty(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One row of the per-iteration convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Balance objective of the accepted current schedule.
    pub objective: f64,
    /// Makespan of the accepted current schedule.
    pub makespan: f64,
    pub best_makespan: f64,
    /// Routes in the block; 0 when the iteration was skipped.
    pub selected_routes: usize,
    /// Drones in the block; 0 when the iteration was skipped.
    pub selected_drones: usize,
    /// Whether the candidate replaced the current schedule.
    pub accepted: bool,
}

/// Mutable loop state, exposed read-only through [`Solver::state`].
#[derive(Debug, Clone)]
pub struct SolverState {
    pub iteration: usize,
    pub current: Assignment,
    /// Completion times of `current`.
    pub completion: Vec<f64>,
    pub current_objective: f64,
    pub current_makespan: f64,
    pub best: Assignment,
    pub best_makespan: f64,
    /// Balance objective of `best` (tie-break key).
    pub best_objective: f64,
    pub trace: Vec<TraceRecord>,
}

/// Final solve output.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub best: Assignment,
    pub best_makespan: f64,
    pub best_objective: f64,
    pub trace: Vec<TraceRecord>,
}

/// Greedy longest-processing-time-first schedule.
///
/// Routes are placed in order of decreasing time (index order on ties), each
/// onto the drone whose completion time after the placement is smallest
/// (lowest index on ties). An empty drone's resulting time is just the route
/// time, which is always smaller than any occupied drone's, so the first `q`
/// routes seed all `q` drones and the result never leaves a drone idle.
pub fn initialize(inst: &ScheduleInstance) -> Assignment {
    let n = inst.num_routes();
    let q = inst.num_drones();
    let r = inst.route_times();
    let c = inst.recharge();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        r[b].partial_cmp(&r[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut drone_of = vec![0usize; n];
    let mut load = vec![0.0f64; q];
    let mut count = vec![0usize; q];
    for &route in &order {
        let mut best_drone = 0usize;
        let mut best_time = f64::INFINITY;
        for j in 0..q {
            let resulting = if count[j] == 0 {
                r[route]
            } else {
                load[j] + r[route] + c
            };
            if resulting < best_time {
                best_time = resulting;
                best_drone = j;
            }
        }
        drone_of[route] = best_drone;
        load[best_drone] = best_time;
        count[best_drone] += 1;
    }
    Assignment::new(drone_of, q).expect("drones chosen in range")
}

/// Balance objective of a feasible schedule: `sum_j (T_j - T/q)^2`.
///
/// Equals the full penalty QUBO energy at the schedule's one-hot encoding,
/// since the constraint penalty vanishes on feasible points.
pub fn balanced_objective(inst: &ScheduleInstance, a: &Assignment) -> Result<f64, ModelError> {
    let times = model::completion_times(inst, a)?;
    let mean = model::total_time(inst) / inst.num_drones() as f64;
    Ok(times.iter().map(|&t| (t - mean) * (t - mean)).sum())
}

/// Turn a block bit pattern into a full feasible schedule, or reject.
///
/// Bit `route_pos * |Q| + drone_pos` of `block_bits` addresses the selected
/// routes and drones in sorted order, matching
/// [`qubo::build_subproblem_qubo`]'s variable layout. Routes are processed by
/// decreasing time; a route with exactly one drone bit keeps that drone, one
/// with several keeps the least loaded of them, and an unassigned route goes
/// to the least loaded selected drone. `None` when the result would leave any
/// drone idle.
pub fn repair(
    block_bits: usize,
    sel: &Selection,
    inst: &ScheduleInstance,
    current: &Assignment,
) -> Option<Assignment> {
    let q = inst.num_drones();
    let r = inst.route_times();
    let c = inst.recharge();
    let num_sel_drones = sel.drones().len();

    let in_block = {
        let mut v = vec![false; inst.num_routes()];
        for &i in sel.routes() {
            v[i] = true;
        }
        v
    };

    let mut drone_of = current.drone_of().to_vec();
    let mut load = vec![0.0f64; q];
    let mut count = vec![0usize; q];
    for (i, &j) in current.drone_of().iter().enumerate() {
        if !in_block[i] {
            load[j] += r[i];
            count[j] += 1;
        }
    }

    let mut order: Vec<usize> = sel.routes().to_vec();
    order.sort_by(|&a, &b| {
        r[b].partial_cmp(&r[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    // Completion time of drone j if route i joins it now.
    let resulting = |j: usize, i: usize, load: &[f64], count: &[usize]| -> f64 {
        load[j] + r[i] + c * count[j] as f64
    };

    for &route in &order {
        let route_pos = sel
            .routes()
            .binary_search(&route)
            .expect("route comes from the selection");
        let set: Vec<usize> = (0..num_sel_drones)
            .filter(|&dp| (block_bits >> (route_pos * num_sel_drones + dp)) & 1 == 1)
            .map(|dp| sel.drones()[dp])
            .collect();
        let pick_min = |choices: &[usize], load: &[f64], count: &[usize]| -> usize {
            let mut best = choices[0];
            let mut best_time = resulting(best, route, load, count);
            for &j in &choices[1..] {
                let t = resulting(j, route, load, count);
                if t < best_time {
                    best_time = t;
                    best = j;
                }
            }
            best
        };
        let chosen = match set.len() {
            1 => set[0],
            0 => pick_min(sel.drones(), &load, &count),
            _ => pick_min(&set, &load, &count),
        };
        drone_of[route] = chosen;
        load[chosen] += r[route];
        count[chosen] += 1;
    }

    if count.contains(&0) {
        return None;
    }
    Some(Assignment::new(drone_of, q).expect("drones chosen in range"))
}

/// VQE budget scaled by block size.
///
/// A statevector evaluation costs `O(k * 2^k)`, so the evaluation allowance
/// shrinks as blocks grow to keep per-iteration work roughly level; small
/// blocks get the full standalone budget. The outer loop tolerates weak block
/// minimization: decode-and-repair still yields a usable candidate.
fn auto_vqe_config(block_vars: usize) -> VqeConfig {
    let k = block_vars.max(1);
    let (restarts, max_evaluations) = match k {
        0..=8 => (4, 200 * k),
        9..=10 => (2, 100 * k),
        11..=12 => (1, 40 * k),
        13..=14 => (1, 8 * k),
        15..=16 => (1, 3 * k),
        _ => (1, 16),
    };
    VqeConfig {
        layers: 1,
        restarts,
        max_evaluations,
        top_k: 16,
        value_tol_factor: 1e-6,
    }
}

/// Driver for one solve; step once per iteration or [`Solver::run`] to the end.
pub struct Solver<'a> {
    inst: &'a ScheduleInstance,
    cfg: SolverConfig,
    penalty: f64,
    state: SolverState,
    stagnant_iterations: usize,
    rng_select: ChaCha8Rng,
    rng_vqe: ChaCha8Rng,
}

impl<'a> Solver<'a> {
    pub fn new(inst: &'a ScheduleInstance, cfg: SolverConfig) -> Result<Self, SolveError> {
        if cfg.qubit_budget < 2 || cfg.qubit_budget > MAX_TABLE_QUBITS {
            return Err(SolveError::BadQubitBudget {
                budget: cfg.qubit_budget,
                cap: MAX_TABLE_QUBITS,
            });
        }
        if let Some(p) = cfg.penalty {
            if !(p.is_finite() && p >= 0.0) {
                return Err(SolveError::BadPenalty(p));
            }
        }
        let penalty = cfg.penalty.unwrap_or_else(|| qubo::default_penalty(inst));

        let current = initialize(inst);
        let completion = model::completion_times(inst, &current)?;
        let current_makespan = completion.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let current_objective = balanced_objective(inst, &current)?;

        let mut rng_select = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng_select.set_stream(1);
        let mut rng_vqe = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng_vqe.set_stream(2);

        Ok(Self {
            inst,
            cfg,
            penalty,
            state: SolverState {
                iteration: 0,
                best: current.clone(),
                best_makespan: current_makespan,
                best_objective: current_objective,
                current,
                completion,
                current_objective,
                current_makespan,
                trace: Vec::new(),
            },
            stagnant_iterations: 0,
            rng_select,
            rng_vqe,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.cfg.max_iterations
            || (self.cfg.stagnation_window > 0
                && self.stagnant_iterations >= self.cfg.stagnation_window)
    }

    fn selection_policy(&self) -> SelectionPolicy {
        SelectionPolicy {
            qubit_budget: self.cfg.qubit_budget,
            target_drones: self.cfg.target_drones,
            max_retries: self.cfg.selection_retries,
        }
    }

    fn push_trace(&mut self, selected: Option<&Selection>, accepted: bool) {
        self.state.trace.push(TraceRecord {
            iteration: self.state.iteration,
            objective: self.state.current_objective,
            makespan: self.state.current_makespan,
            best_makespan: self.state.best_makespan,
            selected_routes: selected.map_or(0, |s| s.routes().len()),
            selected_drones: selected.map_or(0, |s| s.drones().len()),
            accepted,
        });
    }

    /// Run one iteration. Degenerate selections and rejected candidates still
    /// append a trace row; the solve never aborts mid-loop.
    pub fn step(&mut self) {
        self.state.iteration += 1;

        let sel = match selection::select_subsets(
            &self.state.current,
            &self.state.completion,
            &self.selection_policy(),
            &mut self.rng_select,
        ) {
            Ok(sel) => sel,
            Err(_) => {
                self.note_stagnation(false);
                self.push_trace(None, false);
                return;
            }
        };

        let built = qubo::build_subproblem_qubo(self.inst, self.penalty, &self.state.current, &sel)
            .ok()
            .and_then(|(sub, _)| quantum::precompute_energy_table(&sub).ok());
        let Some(table) = built else {
            // Unreachable with a validated config; recorded as a skip.
            self.note_stagnation(false);
            self.push_trace(Some(&sel), false);
            return;
        };

        let vqe_cfg = self
            .cfg
            .vqe
            .clone()
            .unwrap_or_else(|| auto_vqe_config(sel.block_size()));
        let outcome = quantum::vqe_minimize(&table, &vqe_cfg, &mut self.rng_vqe);

        let Some(candidate) = repair(outcome.best_bits, &sel, self.inst, &self.state.current)
        else {
            self.note_stagnation(false);
            self.push_trace(Some(&sel), false);
            return;
        };

        let cand_completion =
            model::completion_times(self.inst, &candidate).expect("repair keeps all drones busy");
        let cand_makespan = cand_completion
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mean = model::total_time(self.inst) / self.inst.num_drones() as f64;
        let cand_objective: f64 = cand_completion
            .iter()
            .map(|&t| (t - mean) * (t - mean))
            .sum();

        // Best-so-far ranks by true makespan, broken by the balance objective;
        // every repaired candidate counts, accepted or not.
        let makespan_improved = cand_makespan < self.state.best_makespan;
        if makespan_improved
            || (cand_makespan == self.state.best_makespan
                && cand_objective < self.state.best_objective)
        {
            self.state.best = candidate.clone();
            self.state.best_makespan = cand_makespan;
            self.state.best_objective = cand_objective;
        }
        self.note_stagnation(makespan_improved);

        let accept = match self.cfg.acceptance {
            Acceptance::Always => true,
            Acceptance::Monotone => cand_objective <= self.state.current_objective,
        };
        if accept {
            self.state.current = candidate;
            self.state.completion = cand_completion;
            self.state.current_makespan = cand_makespan;
            self.state.current_objective = cand_objective;
        }
        self.push_trace(Some(&sel), accept);
    }

    fn note_stagnation(&mut self, improved: bool) {
        if improved {
            self.stagnant_iterations = 0;
        } else {
            self.stagnant_iterations += 1;
        }
    }

    pub fn run(&mut self) {
        while !self.is_finished() {
            self.step();
        }
    }

    pub fn into_result(self) -> SolveResult {
        SolveResult {
            best: self.state.best,
            best_makespan: self.state.best_makespan,
            best_objective: self.state.best_objective,
            trace: self.state.trace,
        }
    }
}

/// Initialize, iterate to the stopping condition, and return the best
/// schedule found. Deterministic for a fixed instance and config.
pub fn solve(inst: &ScheduleInstance, cfg: SolverConfig) -> Result<SolveResult, SolveError> {
    let mut solver = Solver::new(inst, cfg)?;
    solver.run();
    Ok(solver.into_result())
}
