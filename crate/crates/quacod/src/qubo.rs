//! Penalty QUBO construction, evaluation, and clamping.
//!
//! The scheduling objective is traded for a balance surrogate: with the total
//! busy time `T` fixed, driving every drone's completion time toward the mean
//! `T/q` also drives down the makespan. Adding the one-drone-per-route
//! equality constraints with a penalty weight `p` gives an unconstrained
//! quadratic over the assignment bits:
//!
//! ```text
//! f(x) = sum_j (T_j(x) - T/q)^2 + p * sum_i (sum_j x_{i,j} - 1)^2
//! ```
//!
//! [`build_full_qubo`] expands `f` over all `n*q` bits (testing path, the term
//! count grows as `O(n^2 q^2)`); [`build_subproblem_qubo`] expands only a
//! selected route/drone block with everything else frozen at the current
//! assignment, in memory independent of `n` and `q` (solving path).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model;
use crate::model::{Assignment, ScheduleInstance};
use crate::selection::Selection;

/// Default cap on the number of stored coefficients in [`build_full_qubo`].
pub const DEFAULT_FULL_TERM_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum QuboError {
    #[error("bit vector has length {got}, model has {expected} variables")]
    LengthMismatch { got: usize, expected: usize },
    #[error("variable {var} out of range for model with {num_vars} variables")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("bit value {value} for variable {var} is not 0/1")]
    BadBit { var: usize, value: u8 },
    #[error("full QUBO needs {required} terms, budget is {budget}")]
    CapacityExceeded { required: usize, budget: usize },
    #[error("penalty weight must be finite and non-negative, got {0}")]
    BadPenalty(f64),
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
}

/// Quadratic pseudo-boolean function `offset + sum b_i x_i + sum_{i<j} a_ij x_i x_j`.
///
/// Quadratic coefficients are stored sparsely with strictly upper-triangular
/// keys; repeated additions to the same key accumulate. The explicit constant
/// offset keeps clamped energies comparable with the full model.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    num_vars: usize,
    offset: f64,
    linear: Vec<f64>,
    quad: BTreeMap<(usize, usize), f64>,
}

impl QuboModel {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            offset: 0.0,
            linear: vec![0.0; num_vars],
            quad: BTreeMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Upper-triangular quadratic coefficients, keyed `(i, j)` with `i < j`.
    pub fn quad_terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.quad.iter().map(|(&(i, j), &a)| (i, j, a))
    }

    pub fn num_quad_terms(&self) -> usize {
        self.quad.len()
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn add_linear(&mut self, var: usize, value: f64) -> Result<(), QuboError> {
        if var >= self.num_vars {
            return Err(QuboError::VarOutOfRange {
                var,
                num_vars: self.num_vars,
            });
        }
        self.linear[var] += value;
        Ok(())
    }

    /// Accumulate a quadratic coefficient; the key is normalized to `i < j`.
    pub fn add_quad(&mut self, i: usize, j: usize, value: f64) -> Result<(), QuboError> {
        if i >= self.num_vars || j >= self.num_vars {
            return Err(QuboError::VarOutOfRange {
                var: i.max(j),
                num_vars: self.num_vars,
            });
        }
        assert_ne!(i, j, "diagonal terms belong in the linear part");
        let key = (i.min(j), i.max(j));
        *self.quad.entry(key).or_insert(0.0) += value;
        Ok(())
    }

    /// Evaluate the model at a 0/1 vector.
    pub fn energy(&self, bits: &[u8]) -> Result<f64, QuboError> {
        if bits.len() != self.num_vars {
            return Err(QuboError::LengthMismatch {
                got: bits.len(),
                expected: self.num_vars,
            });
        }
        for (var, &value) in bits.iter().enumerate() {
            if value > 1 {
                return Err(QuboError::BadBit { var, value });
            }
        }
        let mut e = self.offset;
        for (var, &b) in self.linear.iter().enumerate() {
            if bits[var] == 1 {
                e += b;
            }
        }
        for (&(i, j), &a) in &self.quad {
            if bits[i] == 1 && bits[j] == 1 {
                e += a;
            }
        }
        Ok(e)
    }

    /// Substitute fixed values for a subset of variables.
    ///
    /// Returns the reduced model over the remaining free variables together
    /// with the map from new variable index to original index (ascending
    /// original order). For every completion of the free variables the reduced
    /// energy equals the full energy at the merged point.
    pub fn clamp(&self, fixed: &BTreeMap<usize, u8>) -> Result<(QuboModel, Vec<usize>), QuboError> {
        for (&var, &value) in fixed {
            if var >= self.num_vars {
                return Err(QuboError::VarOutOfRange {
                    var,
                    num_vars: self.num_vars,
                });
            }
            if value > 1 {
                return Err(QuboError::BadBit { var, value });
            }
        }
        let free: Vec<usize> = (0..self.num_vars)
            .filter(|v| !fixed.contains_key(v))
            .collect();
        let mut new_index = vec![usize::MAX; self.num_vars];
        for (new, &orig) in free.iter().enumerate() {
            new_index[orig] = new;
        }

        let mut reduced = QuboModel::new(free.len());
        reduced.offset = self.offset;
        for (var, &b) in self.linear.iter().enumerate() {
            match fixed.get(&var) {
                Some(&1) => reduced.offset += b,
                Some(_) => {}
                None => reduced.linear[new_index[var]] += b,
            }
        }
        for (&(i, j), &a) in &self.quad {
            match (fixed.get(&i), fixed.get(&j)) {
                (Some(&bi), Some(&bj)) => {
                    if bi == 1 && bj == 1 {
                        reduced.offset += a;
                    }
                }
                (Some(&bi), None) => {
                    if bi == 1 {
                        reduced.linear[new_index[j]] += a;
                    }
                }
                (None, Some(&bj)) => {
                    if bj == 1 {
                        reduced.linear[new_index[i]] += a;
                    }
                }
                (None, None) => {
                    *reduced
                        .quad
                        .entry((new_index[i], new_index[j]))
                        .or_insert(0.0) += a;
                }
            }
        }
        Ok((reduced, free))
    }
}

/// Default penalty weight `p = sum(r) + c * n`.
///
/// Large enough that breaking a one-drone-per-route constraint always costs
/// more than any balance improvement it could buy.
pub fn default_penalty(inst: &ScheduleInstance) -> f64 {
    let sum: f64 = inst.route_times().iter().sum();
    sum + inst.recharge() * inst.num_routes() as f64
}

fn check_penalty(p: f64) -> Result<(), QuboError> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(QuboError::BadPenalty(p));
    }
    Ok(())
}

/// Expand the full penalty objective over all `n * q` assignment bits.
///
/// Variable `route * q + drone` is the route-major one-hot layout of
/// [`crate::model::BitAssignment`]. This is the small-instance/testing path;
/// see [`build_subproblem_qubo`] for the solver path.
pub fn build_full_qubo(inst: &ScheduleInstance, penalty: f64) -> Result<QuboModel, QuboError> {
    build_full_qubo_capped(inst, penalty, DEFAULT_FULL_TERM_BUDGET)
}

/// [`build_full_qubo`] with an explicit coefficient budget.
pub fn build_full_qubo_capped(
    inst: &ScheduleInstance,
    penalty: f64,
    term_budget: usize,
) -> Result<QuboModel, QuboError> {
    check_penalty(penalty)?;
    let n = inst.num_routes();
    let q = inst.num_drones();
    // n*q linear, q*C(n,2) same-drone quads, n*C(q,2) same-route quads.
    let required = n * q + q * (n * (n - 1)) / 2 + n * (q * (q - 1)) / 2;
    if required > term_budget {
        return Err(QuboError::CapacityExceeded {
            required,
            budget: term_budget,
        });
    }

    let c = inst.recharge();
    let mean = model::total_time(inst) / q as f64;
    // T_j = sum_i (r_i + c) x_{i,j} - c, so each squared deviation expands
    // around the shifted target d = c + T/q.
    let d = c + mean;
    let weights: Vec<f64> = inst.route_times().iter().map(|&r| r + c).collect();

    let mut m = QuboModel::new(n * q);
    m.add_offset(q as f64 * d * d + penalty * n as f64);
    for (i, &wi) in weights.iter().enumerate() {
        for j in 0..q {
            m.add_linear(i * q + j, wi * wi - 2.0 * d * wi - penalty)?;
        }
    }
    for j in 0..q {
        for (i, &wi) in weights.iter().enumerate() {
            for (i2, &wi2) in weights.iter().enumerate().skip(i + 1) {
                m.add_quad(i * q + j, i2 * q + j, 2.0 * wi * wi2)?;
            }
        }
    }
    for i in 0..n {
        for j in 0..q {
            for j2 in (j + 1)..q {
                m.add_quad(i * q + j, i * q + j2, 2.0 * penalty)?;
            }
        }
    }
    Ok(m)
}

/// Expand the penalty objective over a selected block only.
///
/// Variables outside `sel.routes() x sel.drones()` are frozen at `current`;
/// the result is coefficient-identical to clamping [`build_full_qubo`] at
/// those values, but is built directly in `O(|N|^2 |Q|^2)` memory so it never
/// materializes the full model. Returns the reduced model and the
/// `(route, drone)` pair for each block variable, in route-major block order.
pub fn build_subproblem_qubo(
    inst: &ScheduleInstance,
    penalty: f64,
    current: &Assignment,
    sel: &Selection,
) -> Result<(QuboModel, Vec<(usize, usize)>), QuboError> {
    check_penalty(penalty)?;
    let n = inst.num_routes();
    let q = inst.num_drones();
    if current.num_routes() != n {
        return Err(QuboError::InvalidSelection(format!(
            "assignment covers {} routes, instance has {n}",
            current.num_routes()
        )));
    }
    if let Some(&route) = sel.routes().iter().find(|&&i| i >= n) {
        return Err(QuboError::InvalidSelection(format!(
            "route {route} out of range"
        )));
    }
    if let Some(&drone) = sel.drones().iter().find(|&&j| j >= q) {
        return Err(QuboError::InvalidSelection(format!(
            "drone {drone} out of range"
        )));
    }
    let in_q: Vec<bool> = {
        let mut v = vec![false; q];
        for &j in sel.drones() {
            v[j] = true;
        }
        v
    };
    let in_n: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in sel.routes() {
            v[i] = true;
        }
        v
    };
    // Every selected route must currently sit on a selected drone, otherwise
    // the frozen bits would pin it outside the block and the block could only
    // duplicate it.
    for &i in sel.routes() {
        if !in_q[current.drone_of()[i]] {
            return Err(QuboError::InvalidSelection(format!(
                "route {i} is assigned to drone {} outside the selected drones",
                current.drone_of()[i]
            )));
        }
    }

    let c = inst.recharge();
    let mean = model::total_time(inst) / q as f64;
    let weights: Vec<f64> = inst.route_times().iter().map(|&r| r + c).collect();

    // Fixed-load part of T_j per drone from routes outside the block.
    let mut out_sum = vec![0.0f64; q];
    let mut out_count = vec![0usize; q];
    for (i, &j) in current.drone_of().iter().enumerate() {
        if !in_n[i] {
            out_sum[j] += inst.route_times()[i];
            out_count[j] += 1;
        }
    }
    // base_j folds the -c recharge offset in: with k outside routes the fixed
    // contribution to T_j is sum(r) + c*(k - 1), which also covers k = 0.
    let base: Vec<f64> = (0..q)
        .map(|j| out_sum[j] + c * (out_count[j] as f64 - 1.0))
        .collect();

    let nn = sel.routes().len();
    let nq = sel.drones().len();
    let var = |route_pos: usize, drone_pos: usize| route_pos * nq + drone_pos;

    let mut m = QuboModel::new(nn * nq);
    // Constant part: unselected drones keep their full squared deviation,
    // selected drones contribute their fixed-load deviation, and each selected
    // route starts from the all-zero penalty p*(0 - 1)^2.
    let mut offset = penalty * nn as f64;
    for j in 0..q {
        if in_q[j] {
            let dev = base[j] - mean;
            offset += dev * dev;
        } else {
            // Drone untouched by the block: T_j is the current completion time.
            let t = out_sum[j] + c * (out_count[j] as f64 - 1.0);
            let dev = t - mean;
            offset += dev * dev;
        }
    }
    m.add_offset(offset);

    for (jp, &j) in sel.drones().iter().enumerate() {
        let shift = base[j] - mean;
        for (ip, &i) in sel.routes().iter().enumerate() {
            m.add_linear(
                var(ip, jp),
                weights[i] * weights[i] + 2.0 * shift * weights[i] - penalty,
            )?;
        }
        for ip in 0..nn {
            let wi = weights[sel.routes()[ip]];
            for ip2 in (ip + 1)..nn {
                let wi2 = weights[sel.routes()[ip2]];
                m.add_quad(var(ip, jp), var(ip2, jp), 2.0 * wi * wi2)?;
            }
        }
    }
    for ip in 0..nn {
        for jp in 0..nq {
            for jp2 in (jp + 1)..nq {
                m.add_quad(var(ip, jp), var(ip, jp2), 2.0 * penalty)?;
            }
        }
    }

    let index_map: Vec<(usize, usize)> = sel
        .routes()
        .iter()
        .flat_map(|&i| sel.drones().iter().map(move |&j| (i, j)))
        .collect();
    Ok((m, index_map))
}

/// Clamp the full model at `current` outside the selected block.
///
/// Reference implementation of the subproblem construction used by tests and
/// the equivalence suite; materializes the full model first.
pub fn clamped_full_qubo(
    inst: &ScheduleInstance,
    penalty: f64,
    current: &Assignment,
    sel: &Selection,
) -> Result<(QuboModel, Vec<usize>), QuboError> {
    let full = build_full_qubo(inst, penalty)?;
    let q = inst.num_drones();
    let selected: std::collections::BTreeSet<usize> = sel
        .routes()
        .iter()
        .flat_map(|&i| sel.drones().iter().map(move |&j| i * q + j))
        .collect();
    let mut fixed = BTreeMap::new();
    for i in 0..inst.num_routes() {
        for j in 0..q {
            let v = i * q + j;
            if !selected.contains(&v) {
                fixed.insert(v, u8::from(current.drone_of()[i] == j));
            }
        }
    }
    full.clamp(&fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BitAssignment;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn fig1() -> ScheduleInstance {
        ScheduleInstance::new(2, 1.15, vec![3.4, 2.8, 4.4]).unwrap()
    }

    /// Independent evaluation of the penalty objective straight from its
    /// definition; deliberately avoids the coefficient expansion under test.
    fn direct_objective(inst: &ScheduleInstance, penalty: f64, bits: &[u8]) -> f64 {
        let n = inst.num_routes();
        let q = inst.num_drones();
        assert_eq!(bits.len(), n * q);
        let mean = model::total_time(inst) / q as f64;
        let mut f = 0.0;
        for j in 0..q {
            let mut tj = -inst.recharge();
            for i in 0..n {
                if bits[i * q + j] == 1 {
                    tj += inst.route_times()[i] + inst.recharge();
                }
            }
            f += (tj - mean) * (tj - mean);
        }
        for i in 0..n {
            let row: i64 = (0..q).map(|j| i64::from(bits[i * q + j])).sum();
            f += penalty * ((row - 1) * (row - 1)) as f64;
        }
        f
    }

    fn all_bit_vectors(len: usize) -> impl Iterator<Item = Vec<u8>> {
        (0u64..(1 << len)).map(move |z| (0..len).map(|b| ((z >> b) & 1) as u8).collect())
    }

    fn scale_of(m: &QuboModel) -> f64 {
        let mut s = m.offset().abs();
        for &b in m.linear() {
            s = s.max(b.abs());
        }
        for (_, _, a) in m.quad_terms() {
            s = s.max(a.abs());
        }
        s.max(1.0)
    }

    #[test]
    fn default_penalty_examples() {
        assert!((default_penalty(&fig1()) - 14.05).abs() < 1e-12);
        let inst = ScheduleInstance::new(1, 0.0, vec![1.0, 1.0]).unwrap();
        assert!((default_penalty(&inst) - 2.0).abs() < 1e-12);
        let inst = ScheduleInstance::new(2, 0.0, vec![1.0, 1.0, 2.0]).unwrap();
        assert!((default_penalty(&inst) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn energy_basics() {
        let mut m = QuboModel::new(1);
        m.add_linear(0, 1.0).unwrap();
        assert_eq!(m.energy(&[0]).unwrap(), 0.0);
        assert_eq!(m.energy(&[1]).unwrap(), 1.0);

        let mut m = QuboModel::new(2);
        m.add_offset(3.0);
        m.add_linear(0, -2.0).unwrap();
        m.add_linear(1, -2.0).unwrap();
        m.add_quad(0, 1, 4.0).unwrap();
        assert_eq!(m.energy(&[0, 0]).unwrap(), 3.0);
        assert_eq!(m.energy(&[1, 0]).unwrap(), 1.0);
        assert_eq!(m.energy(&[0, 1]).unwrap(), 1.0);
        assert_eq!(m.energy(&[1, 1]).unwrap(), 3.0);

        assert!(matches!(
            m.energy(&[1]),
            Err(QuboError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn full_qubo_balanced_assignment_has_zero_energy() {
        let inst = ScheduleInstance::new(2, 0.0, vec![1.0, 1.0, 2.0]).unwrap();
        let m = build_full_qubo(&inst, 4.0).unwrap();
        let a = Assignment::new(vec![0, 0, 1], 2).unwrap();
        let bits = BitAssignment::from_assignment(&a, 2);
        assert!(m.energy(bits.bits()).unwrap().abs() < 1e-12);

        // All-zero vector: offset = q * (T/q)^2 + p * n for c = 0.
        assert!((m.energy(&[0; 6]).unwrap() - 20.0).abs() < 1e-12);
        assert!((m.offset() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn full_qubo_matches_direct_objective_exhaustively() {
        for (q, c, r) in [
            (2usize, 0.0, vec![1.0, 1.0, 2.0]),
            (2, 1.15, vec![3.4, 2.8, 4.4]),
            (3, 0.6, vec![0.5, 2.0, 1.5, 0.9]),
        ] {
            let inst = ScheduleInstance::new(q, c, r).unwrap();
            let p = default_penalty(&inst);
            let m = build_full_qubo(&inst, p).unwrap();
            let scale = scale_of(&m);
            for bits in all_bit_vectors(inst.num_routes() * q) {
                let got = m.energy(&bits).unwrap();
                let want = direct_objective(&inst, p, &bits);
                assert!(
                    (got - want).abs() <= 1e-9 * scale,
                    "bits {bits:?}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn double_assignment_costs_at_least_penalty() {
        let inst = ScheduleInstance::new(2, 0.0, vec![1.0, 1.0, 2.0]).unwrap();
        let p = 4.0;
        let m = build_full_qubo(&inst, p).unwrap();
        // Balanced feasible point, then duplicate one route on both drones.
        for route in 0..3 {
            let a = Assignment::new(vec![0, 0, 1], 2).unwrap();
            let mut bits = BitAssignment::from_assignment(&a, 2).bits().to_vec();
            bits[route * 2] = 1;
            bits[route * 2 + 1] = 1;
            assert!(m.energy(&bits).unwrap() >= p - 1e-12);
        }
    }

    #[test]
    fn feasible_points_reduce_to_pure_balance_term() {
        // Exhaustive over every bit vector on small shapes: the penalty part
        // vanishes exactly on feasible encodings.
        for (q, c, r) in [(2usize, 0.5, vec![1.0, 2.0, 3.0]), (3, 0.0, vec![1.0, 1.0, 2.0, 3.0])] {
            let inst = ScheduleInstance::new(q, c, r).unwrap();
            let p = default_penalty(&inst);
            let m = build_full_qubo(&inst, p).unwrap();
            let n = inst.num_routes();
            for bits in all_bit_vectors(n * q) {
                let ba = BitAssignment::new(bits.clone(), n, q).unwrap();
                if ba.decode().is_some() {
                    let balance = direct_objective(&inst, 0.0, &bits);
                    let full = m.energy(&bits).unwrap();
                    assert!((full - balance).abs() < 1e-9);
                }
                assert!(m.energy(&bits).unwrap() >= -1e-9);
            }
        }
    }

    fn random_model(rng: &mut ChaCha8Rng, num_vars: usize) -> QuboModel {
        let mut m = QuboModel::new(num_vars);
        m.add_offset(rng.gen_range(-5.0..5.0));
        for v in 0..num_vars {
            m.add_linear(v, rng.gen_range(-5.0..5.0)).unwrap();
        }
        for i in 0..num_vars {
            for j in (i + 1)..num_vars {
                if rng.gen_bool(0.6) {
                    m.add_quad(i, j, rng.gen_range(-5.0..5.0)).unwrap();
                }
            }
        }
        m
    }

    #[test]
    fn clamp_identity_and_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_model(&mut rng, 6);

        let (same, free) = m.clamp(&BTreeMap::new()).unwrap();
        assert_eq!(free, (0..6).collect::<Vec<_>>());
        assert_eq!(same, m);

        let point: Vec<u8> = (0..6).map(|_| rng.gen_range(0u8..2)).collect();
        let fixed: BTreeMap<usize, u8> = point.iter().copied().enumerate().collect();
        let (zero_var, free) = m.clamp(&fixed).unwrap();
        assert!(free.is_empty());
        assert_eq!(zero_var.num_vars(), 0);
        assert!((zero_var.offset() - m.energy(&point).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn clamp_matches_full_energy_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let num_vars = rng.gen_range(3..=10);
            let m = random_model(&mut rng, num_vars);
            let mut fixed = BTreeMap::new();
            for v in 0..num_vars {
                if rng.gen_bool(0.4) {
                    fixed.insert(v, rng.gen_range(0u8..2));
                }
            }
            let (reduced, free) = m.clamp(&fixed).unwrap();
            for free_bits in all_bit_vectors(free.len()) {
                let mut merged = vec![0u8; num_vars];
                for (&v, &b) in &fixed {
                    merged[v] = b;
                }
                for (pos, &v) in free.iter().enumerate() {
                    merged[v] = free_bits[pos];
                }
                let got = reduced.energy(&free_bits).unwrap();
                let want = m.energy(&merged).unwrap();
                assert!((got - want).abs() < 1e-9, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn clamp_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = random_model(&mut rng, 8);
        let f1: BTreeMap<usize, u8> = [(1, 1u8), (4, 0u8)].into_iter().collect();
        let f2_orig: BTreeMap<usize, u8> = [(0, 1u8), (6, 1u8)].into_iter().collect();

        let (step1, free1) = m.clamp(&f1).unwrap();
        // Rewrite the second fixing in the reduced index space.
        let f2_reduced: BTreeMap<usize, u8> = f2_orig
            .iter()
            .map(|(&v, &b)| (free1.iter().position(|&o| o == v).unwrap(), b))
            .collect();
        let (two_step, _) = step1.clamp(&f2_reduced).unwrap();

        let mut joint = f1.clone();
        joint.extend(f2_orig.iter().map(|(&v, &b)| (v, b)));
        let (one_step, _) = m.clamp(&joint).unwrap();

        for bits in all_bit_vectors(one_step.num_vars()) {
            let a = two_step.energy(&bits).unwrap();
            let b = one_step.energy(&bits).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    fn random_feasible_assignment(rng: &mut ChaCha8Rng, n: usize, q: usize) -> Assignment {
        loop {
            let drone_of: Vec<usize> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let a = Assignment::new(drone_of, q).unwrap();
            if a.uses_all_drones(q) {
                return a;
            }
        }
    }

    fn random_selection(
        rng: &mut ChaCha8Rng,
        current: &Assignment,
        n: usize,
        q: usize,
    ) -> Selection {
        loop {
            let mut drones: Vec<usize> = (0..q).collect();
            drones.shuffle(rng);
            drones.truncate(rng.gen_range(1..=q));
            drones.sort_unstable();
            let hosted: Vec<usize> = (0..n)
                .filter(|&i| drones.contains(&current.drone_of()[i]))
                .collect();
            if hosted.is_empty() {
                continue;
            }
            let mut routes = hosted;
            routes.shuffle(rng);
            routes.truncate(rng.gen_range(1..=routes.len()));
            routes.sort_unstable();
            return Selection::new(routes, drones).unwrap();
        }
    }

    #[test]
    fn subproblem_equals_clamped_full_on_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let q = rng.gen_range(2..=3);
            let n = rng.gen_range(q + 1..=5);
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..5.0)).collect();
            let c = if rng.gen_bool(0.5) { 0.0 } else { 1.25 };
            let inst = ScheduleInstance::new(q, c, r).unwrap();
            let p = default_penalty(&inst);
            let current = random_feasible_assignment(&mut rng, n, q);
            let sel = random_selection(&mut rng, &current, n, q);

            let (sub, index_map) = build_subproblem_qubo(&inst, p, &current, &sel).unwrap();
            let (clamped, free) = clamped_full_qubo(&inst, p, &current, &sel).unwrap();

            // Same variable order: route-major over sorted (routes, drones).
            assert_eq!(sub.num_vars(), clamped.num_vars());
            let expect_free: Vec<usize> = index_map.iter().map(|&(i, j)| i * q + j).collect();
            assert_eq!(free, expect_free);

            let scale = scale_of(&clamped);
            let tol = 1e-9 * scale;
            assert!((sub.offset() - clamped.offset()).abs() <= tol);
            for v in 0..sub.num_vars() {
                assert!((sub.linear()[v] - clamped.linear()[v]).abs() <= tol);
            }
            let quads: BTreeMap<(usize, usize), f64> =
                clamped.quad_terms().map(|(i, j, a)| ((i, j), a)).collect();
            for (i, j, a) in sub.quad_terms() {
                let b = quads.get(&(i, j)).copied().unwrap_or(0.0);
                assert!((a - b).abs() <= tol, "quad ({i},{j}): {a} vs {b}");
            }
            for ((i, j), b) in &quads {
                if !sub.quad_terms().any(|(si, sj, _)| si == *i && sj == *j) {
                    assert!(b.abs() <= tol);
                }
            }
        }
    }

    #[test]
    fn subproblem_with_everything_selected_equals_full() {
        let inst = fig1();
        let p = default_penalty(&inst);
        let current = Assignment::new(vec![0, 0, 1], 2).unwrap();
        let sel = Selection::new(vec![0, 1, 2], vec![0, 1]).unwrap();
        let (sub, index_map) = build_subproblem_qubo(&inst, p, &current, &sel).unwrap();
        let full = build_full_qubo(&inst, p).unwrap();

        assert_eq!(index_map.len(), 6);
        assert_eq!(sub.num_vars(), full.num_vars());
        let scale = scale_of(&full);
        assert!((sub.offset() - full.offset()).abs() <= 1e-9 * scale);
        for v in 0..6 {
            assert!((sub.linear()[v] - full.linear()[v]).abs() <= 1e-9 * scale);
        }
        let full_quads: BTreeMap<(usize, usize), f64> =
            full.quad_terms().map(|(i, j, a)| ((i, j), a)).collect();
        for (i, j, a) in sub.quad_terms() {
            assert!((a - full_quads[&(i, j)]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn subproblem_block_size_matches_selection() {
        // Four routes, seven drones, two routes and four drones selected
        // gives an 8-variable block.
        let routes = vec![1usize, 2];
        let drones = vec![1usize, 3, 4, 5];
        let sel = Selection::new(routes, drones).unwrap();
        // A wide instance: 8 routes so every drone can be busy.
        let inst = ScheduleInstance::new(7, 0.5, vec![1.0; 8]).unwrap();
        let current = Assignment::new(vec![3, 1, 4, 0, 2, 5, 6, 3], 7).unwrap();
        let (sub, index_map) =
            build_subproblem_qubo(&inst, default_penalty(&inst), &current, &sel).unwrap();
        assert_eq!(sub.num_vars(), 8);
        assert_eq!(index_map.len(), 8);
        assert_eq!(index_map[0], (1, 1));
        assert_eq!(index_map[7], (2, 5));
    }

    #[test]
    fn subproblem_rejects_route_hosted_outside_block() {
        let inst = fig1();
        let current = Assignment::new(vec![0, 0, 1], 2).unwrap();
        // Route 2 sits on drone 1, which is not selected.
        let sel = Selection::new(vec![2], vec![0]).unwrap();
        assert!(matches!(
            build_subproblem_qubo(&inst, 1.0, &current, &sel),
            Err(QuboError::InvalidSelection(_))
        ));
    }

    #[test]
    fn full_qubo_capacity_budget() {
        let inst = ScheduleInstance::new(2, 0.0, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            build_full_qubo_capped(&inst, 1.0, 5),
            Err(QuboError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn global_minimizers_decode_to_balance_optima() {
        // Exhaustive argmin correspondence on tiny shapes: every global QUBO
        // minimizer encodes a feasible assignment minimizing the balance term.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let n = rng.gen_range(3..=4);
            let q = 2;
            let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..5.0)).collect();
            let inst = ScheduleInstance::new(q, 0.8, r).unwrap();
            let p = default_penalty(&inst);
            let m = build_full_qubo(&inst, p).unwrap();

            let mut best_energy = f64::INFINITY;
            let mut minimizers = Vec::new();
            for bits in all_bit_vectors(n * q) {
                let e = m.energy(&bits).unwrap();
                if e < best_energy - 1e-9 {
                    best_energy = e;
                    minimizers = vec![bits];
                } else if (e - best_energy).abs() <= 1e-9 {
                    minimizers.push(bits);
                }
            }

            let mut best_balance = f64::INFINITY;
            for bits in all_bit_vectors(n * q) {
                let ba = BitAssignment::new(bits.clone(), n, q).unwrap();
                if ba.decode().is_some() {
                    best_balance = best_balance.min(direct_objective(&inst, 0.0, &bits));
                }
            }

            for bits in minimizers {
                let ba = BitAssignment::new(bits.clone(), n, q).unwrap();
                assert!(ba.decode().is_some(), "minimizer must be feasible");
                let balance = direct_objective(&inst, 0.0, &bits);
                assert!((balance - best_balance).abs() < 1e-9);
            }
        }
    }
}
