//! Problem instances, route-to-drone assignments, and completion-time
//! arithmetic.
//!
//! An instance is a set of `n` routes with known completion times, a fleet of
//! `q` identical drones, and a fixed recharge delay `c` that a drone incurs
//! between consecutive routes. A drone assigned routes `S` finishes at
//! `sum(r_i for i in S) + c * (|S| - 1)`; the makespan is the maximum finish
//! time over the fleet.

use thiserror::Error;

/// Errors raised when building or evaluating instances and assignments.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("instance must have more routes than drones (routes={routes}, drones={drones})")]
    TooFewRoutes { routes: usize, drones: usize },
    #[error("instance must have at least one drone")]
    NoDrones,
    #[error("route {index} has non-positive or non-finite time {value}")]
    BadRouteTime { index: usize, value: f64 },
    #[error("recharge time must be finite and non-negative, got {0}")]
    BadRecharge(f64),
    #[error("assignment maps {got} routes, instance has {expected}")]
    RouteCountMismatch { got: usize, expected: usize },
    #[error("route {route} assigned to drone {drone}, but only {drones} drones exist")]
    DroneOutOfRange {
        route: usize,
        drone: usize,
        drones: usize,
    },
    #[error("drone {0} has no routes assigned")]
    IdleDrone(usize),
    #[error("bit vector has length {got}, expected routes*drones = {expected}")]
    BitLengthMismatch { got: usize, expected: usize },
    #[error("bit vector entry {index} is {value}, expected 0 or 1")]
    BadBit { index: usize, value: u8 },
}

/// A scheduling problem: route completion times, fleet size, recharge delay.
///
/// Invariants enforced on construction: more routes than drones, at least one
/// drone, strictly positive finite route times, non-negative finite recharge.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleInstance {
    drones: usize,
    recharge: f64,
    route_times: Vec<f64>,
}

impl ScheduleInstance {
    pub fn new(drones: usize, recharge: f64, route_times: Vec<f64>) -> Result<Self, ModelError> {
        if drones == 0 {
            return Err(ModelError::NoDrones);
        }
        if route_times.len() <= drones {
            return Err(ModelError::TooFewRoutes {
                routes: route_times.len(),
                drones,
            });
        }
        if !(recharge.is_finite() && recharge >= 0.0) {
            return Err(ModelError::BadRecharge(recharge));
        }
        for (index, &value) in route_times.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::BadRouteTime { index, value });
            }
        }
        Ok(Self {
            drones,
            recharge,
            route_times,
        })
    }

    /// Number of routes `n`.
    pub fn num_routes(&self) -> usize {
        self.route_times.len()
    }

    /// Number of drones `q`.
    pub fn num_drones(&self) -> usize {
        self.drones
    }

    /// Recharge delay `c` between consecutive routes of one drone.
    pub fn recharge(&self) -> f64 {
        self.recharge
    }

    /// Route completion times `r`.
    pub fn route_times(&self) -> &[f64] {
        &self.route_times
    }
}

/// Dense route-to-drone map: entry `i` is the drone (0-based) flying route `i`.
///
/// This encoding satisfies the one-drone-per-route constraint by construction;
/// whether every drone is used is checked where it matters (see
/// [`completion_times`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    drone_of: Vec<usize>,
}

impl Assignment {
    pub fn new(drone_of: Vec<usize>, drones: usize) -> Result<Self, ModelError> {
        for (route, &drone) in drone_of.iter().enumerate() {
            if drone >= drones {
                return Err(ModelError::DroneOutOfRange {
                    route,
                    drone,
                    drones,
                });
            }
        }
        Ok(Self { drone_of })
    }

    pub fn num_routes(&self) -> usize {
        self.drone_of.len()
    }

    /// Drone index flying each route.
    pub fn drone_of(&self) -> &[usize] {
        &self.drone_of
    }

    /// Routes per drone.
    pub fn route_counts(&self, drones: usize) -> Vec<usize> {
        let mut counts = vec![0usize; drones];
        for &d in &self.drone_of {
            counts[d] += 1;
        }
        counts
    }

    /// True when every drone flies at least one route.
    pub fn uses_all_drones(&self, drones: usize) -> bool {
        self.route_counts(drones).iter().all(|&c| c > 0)
    }
}

/// Flat binary encoding of an assignment matrix, route-major: bit
/// `route * drones + drone` is 1 iff the route is assigned to the drone.
///
/// Feasible exactly when each route block contains a single 1. This is the
/// raw search-space encoding used at the QUBO boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitAssignment {
    bits: Vec<u8>,
    routes: usize,
    drones: usize,
}

impl BitAssignment {
    pub fn new(bits: Vec<u8>, routes: usize, drones: usize) -> Result<Self, ModelError> {
        if bits.len() != routes * drones {
            return Err(ModelError::BitLengthMismatch {
                got: bits.len(),
                expected: routes * drones,
            });
        }
        for (index, &value) in bits.iter().enumerate() {
            if value > 1 {
                return Err(ModelError::BadBit { index, value });
            }
        }
        Ok(Self {
            bits,
            routes,
            drones,
        })
    }

    /// One-hot encoding of a dense assignment.
    pub fn from_assignment(a: &Assignment, drones: usize) -> Self {
        let routes = a.num_routes();
        let mut bits = vec![0u8; routes * drones];
        for (route, &drone) in a.drone_of().iter().enumerate() {
            bits[route * drones + drone] = 1;
        }
        Self {
            bits,
            routes,
            drones,
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Decode back to a dense assignment; `None` unless every route block has
    /// exactly one bit set.
    pub fn decode(&self) -> Option<Assignment> {
        let mut drone_of = Vec::with_capacity(self.routes);
        for route in 0..self.routes {
            let block = &self.bits[route * self.drones..(route + 1) * self.drones];
            let mut chosen = None;
            for (drone, &bit) in block.iter().enumerate() {
                if bit == 1 {
                    if chosen.is_some() {
                        return None;
                    }
                    chosen = Some(drone);
                }
            }
            drone_of.push(chosen?);
        }
        Some(Assignment { drone_of })
    }
}

/// Per-drone completion times `T_j = sum of assigned route times + c * (count - 1)`.
///
/// Idle drones are a hard error: the recharge bookkeeping (and the fixed-total
/// identity checked by [`total_time`]) assumes every drone flies at least one
/// route.
pub fn completion_times(inst: &ScheduleInstance, a: &Assignment) -> Result<Vec<f64>, ModelError> {
    if a.num_routes() != inst.num_routes() {
        return Err(ModelError::RouteCountMismatch {
            got: a.num_routes(),
            expected: inst.num_routes(),
        });
    }
    let q = inst.num_drones();
    let mut sums = vec![0.0f64; q];
    let mut counts = vec![0usize; q];
    for (route, &drone) in a.drone_of().iter().enumerate() {
        if drone >= q {
            return Err(ModelError::DroneOutOfRange {
                route,
                drone,
                drones: q,
            });
        }
        sums[drone] += inst.route_times()[route];
        counts[drone] += 1;
    }
    for (drone, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(ModelError::IdleDrone(drone));
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(&s, &k)| s + inst.recharge() * (k as f64 - 1.0))
        .collect())
}

/// Maximum completion time over all drones.
pub fn makespan(inst: &ScheduleInstance, a: &Assignment) -> Result<f64, ModelError> {
    Ok(completion_times(inst, a)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Total busy time `T = sum(r) + c * (n - q)`, identical for every assignment
/// that keeps all drones busy.
pub fn total_time(inst: &ScheduleInstance) -> f64 {
    let sum: f64 = inst.route_times().iter().sum();
    sum + inst.recharge() * (inst.num_routes() - inst.num_drones()) as f64
}

/// Provable floor on the optimal makespan: `max(max_i r_i, T / q)`.
///
/// The makespan is at least the mean completion time `T / q`, and the drone
/// hosting the longest route finishes no earlier than that route.
pub fn lower_bound(inst: &ScheduleInstance) -> f64 {
    let longest = inst
        .route_times()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &r| acc.max(r));
    longest.max(total_time(inst) / inst.num_drones() as f64)
}
