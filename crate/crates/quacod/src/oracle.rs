//! Exhaustive reference solvers for testing and acceptance checks.
//!
//! Everything here enumerates the full search space and is intended for
//! desk-scale inputs only; the solver never calls into this module.

use thiserror::Error;

use crate::model;
use crate::model::{Assignment, ScheduleInstance};
use crate::qubo::QuboModel;

/// Default enumeration budget for [`brute_force_makespan`].
pub const DEFAULT_ENUM_BUDGET: u128 = 10_000_000;

/// Variable cap for [`brute_force_qubo_min`].
pub const MAX_BRUTE_FORCE_VARS: usize = 24;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("enumeration needs {required} states, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("brute-force QUBO limited to {cap} variables, model has {vars}")]
    TooManyVars { vars: usize, cap: usize },
}

/// Optimal makespan and the first optimal assignment in lexicographic
/// drone-map order.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub makespan: f64,
    pub assignment: Assignment,
}

/// Exact minimum of a QUBO and the first minimizing bit pattern.
#[derive(Debug, Clone)]
pub struct QuboMinimum {
    pub energy: f64,
    pub bits: Vec<u8>,
}

/// How the balance surrogate relates to the true objective on one instance.
#[derive(Debug, Clone)]
pub struct SurrogateGapReport {
    /// Makespan of the assignment minimizing the squared-deviation surrogate.
    pub balance_optimal_makespan: f64,
    /// True optimal makespan.
    pub optimal_makespan: f64,
    pub balance_argmin: Assignment,
    pub makespan_argmin: Assignment,
    /// Whether both optima have the same makespan (within 1e-9).
    pub agree: bool,
}

fn enumeration_size(inst: &ScheduleInstance) -> u128 {
    (inst.num_drones() as u128).pow(inst.num_routes() as u32)
}

/// Visit every route-to-drone map in lexicographic order, calling `visit`
/// with each map that keeps all drones busy and its completion times.
fn for_each_feasible(inst: &ScheduleInstance, mut visit: impl FnMut(&[usize], &[f64])) {
    let n = inst.num_routes();
    let q = inst.num_drones();
    let r = inst.route_times();
    let c = inst.recharge();
    let mut drone_of = vec![0usize; n];
    let mut sums = vec![0.0f64; q];
    let mut counts = vec![0usize; q];
    let mut times = vec![0.0f64; q];
    loop {
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|k| *k = 0);
        for (i, &j) in drone_of.iter().enumerate() {
            sums[j] += r[i];
            counts[j] += 1;
        }
        if counts.iter().all(|&k| k > 0) {
            for j in 0..q {
                times[j] = sums[j] + c * (counts[j] as f64 - 1.0);
            }
            visit(&drone_of, &times);
        }
        // Next map, most significant digit first so maps ascend
        // lexicographically as vectors.
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            drone_of[pos] += 1;
            if drone_of[pos] < q {
                break;
            }
            drone_of[pos] = 0;
        }
    }
}

/// Exact optimal makespan by exhaustive enumeration.
pub fn brute_force_makespan(inst: &ScheduleInstance) -> Result<BruteForceResult, OracleError> {
    brute_force_makespan_budgeted(inst, DEFAULT_ENUM_BUDGET)
}

pub fn brute_force_makespan_budgeted(
    inst: &ScheduleInstance,
    budget: u128,
) -> Result<BruteForceResult, OracleError> {
    let required = enumeration_size(inst);
    if required > budget {
        return Err(OracleError::BudgetExceeded { required, budget });
    }
    let mut best = f64::INFINITY;
    let mut best_map: Option<Vec<usize>> = None;
    for_each_feasible(inst, |drone_of, times| {
        let cmax = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if cmax < best {
            best = cmax;
            best_map = Some(drone_of.to_vec());
        }
    });
    let drone_of = best_map.expect("n > q guarantees a feasible assignment");
    Ok(BruteForceResult {
        makespan: best,
        assignment: Assignment::new(drone_of, inst.num_drones()).expect("enumerated in range"),
    })
}

/// Exact QUBO minimum over all bit patterns, lowest pattern kept on ties.
pub fn brute_force_qubo_min(model: &QuboModel) -> Result<QuboMinimum, OracleError> {
    let k = model.num_vars();
    if k > MAX_BRUTE_FORCE_VARS {
        return Err(OracleError::TooManyVars {
            vars: k,
            cap: MAX_BRUTE_FORCE_VARS,
        });
    }
    let mut couple = vec![0.0f64; k * k];
    for (i, j, a) in model.quad_terms() {
        couple[i * k + j] = a;
    }
    let linear = model.linear();

    let mut best_energy = f64::INFINITY;
    let mut best_z = 0usize;
    for z in 0..(1usize << k) {
        // Fresh evaluation per state keeps the scan free of accumulated
        // rounding drift.
        let mut e = model.offset();
        let mut t = z;
        while t != 0 {
            let i = t.trailing_zeros() as usize;
            t &= t - 1;
            e += linear[i];
            let mut u = t;
            while u != 0 {
                let j = u.trailing_zeros() as usize;
                u &= u - 1;
                e += couple[i * k + j];
            }
        }
        if e < best_energy {
            best_energy = e;
            best_z = z;
        }
    }
    Ok(QuboMinimum {
        energy: best_energy,
        bits: (0..k).map(|b| ((best_z >> b) & 1) as u8).collect(),
    })
}

/// Compare the balance-surrogate optimum with the true makespan optimum.
///
/// The surrogate is a heuristic, so disagreement is reported rather than
/// treated as a failure.
pub fn surrogate_gap_report(inst: &ScheduleInstance) -> Result<SurrogateGapReport, OracleError> {
    let required = enumeration_size(inst);
    if required > DEFAULT_ENUM_BUDGET {
        return Err(OracleError::BudgetExceeded {
            required,
            budget: DEFAULT_ENUM_BUDGET,
        });
    }
    let mean = model::total_time(inst) / inst.num_drones() as f64;
    let mut best_balance = f64::INFINITY;
    let mut best_balance_map: Option<Vec<usize>> = None;
    let mut best_makespan = f64::INFINITY;
    let mut best_makespan_map: Option<Vec<usize>> = None;
    for_each_feasible(inst, |drone_of, times| {
        let cmax = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let balance: f64 = times.iter().map(|&t| (t - mean) * (t - mean)).sum();
        if balance < best_balance {
            best_balance = balance;
            best_balance_map = Some(drone_of.to_vec());
        }
        if cmax < best_makespan {
            best_makespan = cmax;
            best_makespan_map = Some(drone_of.to_vec());
        }
    });
    let q = inst.num_drones();
    let balance_argmin = Assignment::new(best_balance_map.unwrap(), q).unwrap();
    let makespan_argmin = Assignment::new(best_makespan_map.unwrap(), q).unwrap();
    let balance_optimal_makespan = model::makespan(inst, &balance_argmin).unwrap();
    Ok(SurrogateGapReport {
        balance_optimal_makespan,
        optimal_makespan: best_makespan,
        balance_argmin,
        makespan_argmin,
        agree: (balance_optimal_makespan - best_makespan).abs() <= 1e-9,
    })
}
