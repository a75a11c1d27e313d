//! Statevector simulation of the hardware-efficient ansatz and a VQE driver
//! for diagonal Hamiltonians.
//!
//! One ansatz layer is a block of per-qubit `Ry` rotations, a `CZ` chain on
//! consecutive qubit pairs, and a second `Ry` block, applied to `|0...0>`.
//! Because `Ry` and `CZ` are real, amplitudes stay real throughout; the
//! public [`StateVector`] still exposes complex amplitudes.
//!
//! Subproblem Hamiltonians are diagonal in the computational basis, so they
//! are held as an explicit [`EnergyTable`] of all `2^k` energies and every
//! expectation value is an exact weighted average, with no shot noise.
//!
//! Basis ordering is little-endian: qubit 0 is the least significant bit of
//! the basis-state index.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::qubo::QuboModel;

/// Default cap on subproblem size for the energy table (`2^20` entries).
pub const MAX_TABLE_QUBITS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("parameter vector of length {got} is not a positive multiple of 2*qubits = {per_layer}")]
    ParamLength { got: usize, per_layer: usize },
    #[error("need at least one qubit")]
    NoQubits,
    #[error("energy table needs {qubits} qubits, cap is {cap}")]
    TableTooLarge { qubits: usize, cap: usize },
    #[error("state has {state_qubits} qubits, table has {table_qubits}")]
    DimensionMismatch {
        state_qubits: usize,
        table_qubits: usize,
    },
    #[error("energy table contains a non-finite entry at {0}")]
    NonFiniteEnergy(usize),
}

/// Amplitudes of a `k`-qubit state, little-endian basis ordering.
#[derive(Debug, Clone)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn num_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// QUBO energies of every basis state: entry `z` is the energy of the bit
/// pattern where bit `i` of `z` is variable `i`.
#[derive(Debug, Clone)]
pub struct EnergyTable {
    energies: Vec<f64>,
}

impl EnergyTable {
    pub fn num_qubits(&self) -> usize {
        self.energies.len().trailing_zeros() as usize
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn min(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.energies
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// VQE driver knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct VqeConfig {
    /// Ansatz layers; each layer holds `2k` rotation parameters.
    pub layers: usize,
    /// Independent random restarts of the classical optimizer.
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_evaluations: usize,
    /// How many of the most probable basis states to decode.
    pub top_k: usize,
    /// Value tolerance as a fraction of the table's energy range.
    pub value_tol_factor: f64,
}

impl VqeConfig {
    /// Standalone defaults for a `k`-qubit subproblem: 4 restarts of up to
    /// `200 k` evaluations each.
    pub fn for_qubits(k: usize) -> Self {
        Self {
            layers: 1,
            restarts: 4,
            max_evaluations: 200 * k.max(1),
            top_k: 16,
            value_tol_factor: 1e-6,
        }
    }
}

/// Result of one VQE run against an energy table.
#[derive(Debug, Clone)]
pub struct VqeOutcome {
    /// Decoded bit pattern (bit `i` is variable `i`).
    pub best_bits: usize,
    /// Table energy at `best_bits`.
    pub best_energy: f64,
    /// Circuit parameters of the best restart.
    pub final_params: Vec<f64>,
    /// Total objective evaluations across restarts.
    pub eval_count: usize,
}

/// Rotate qubit `target` by `Ry(theta)` in a real amplitude vector.
fn apply_ry(amps: &mut [f64], target: usize, theta: f64) {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let stride = 1 << target;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let x = *a;
            let y = *b;
            *a = c * x - s * y;
            *b = s * x + c * y;
        }
    }
}

/// Rotate qubits `target` and `target + 1` in one memory pass: the two
/// rotations commute, and fusing them halves the traffic of a full block.
fn apply_ry_pair(amps: &mut [f64], target: usize, theta_low: f64, theta_high: f64) {
    let ca = (theta_low / 2.0).cos();
    let sa = (theta_low / 2.0).sin();
    let cb = (theta_high / 2.0).cos();
    let sb = (theta_high / 2.0).sin();
    let stride = 1 << target;
    for block in amps.chunks_exact_mut(stride << 2) {
        let (g0, rest) = block.split_at_mut(stride);
        let (g1, rest) = rest.split_at_mut(stride);
        let (g2, g3) = rest.split_at_mut(stride);
        for (((a00, a01), a10), a11) in g0
            .iter_mut()
            .zip(g1.iter_mut())
            .zip(g2.iter_mut())
            .zip(g3.iter_mut())
        {
            let u0 = ca * *a00 - sa * *a01;
            let u1 = sa * *a00 + ca * *a01;
            let v0 = ca * *a10 - sa * *a11;
            let v1 = sa * *a10 + ca * *a11;
            *a00 = cb * u0 - sb * v0;
            *a01 = cb * u1 - sb * v1;
            *a10 = sb * u0 + cb * v0;
            *a11 = sb * u1 + cb * v1;
        }
    }
}

/// Apply one full block of per-qubit `Ry` rotations, two qubits at a time.
fn apply_ry_block(amps: &mut [f64], thetas: &[f64]) {
    let k = thetas.len();
    let mut qb = 0;
    while qb + 1 < k {
        apply_ry_pair(amps, qb, thetas[qb], thetas[qb + 1]);
        qb += 2;
    }
    if qb < k {
        apply_ry(amps, qb, thetas[qb]);
    }
}

/// Flip the sign of every basis state with an adjacent `11` qubit pair:
/// the diagonal of the full CZ chain in one pass.
fn apply_cz_chain(amps: &mut [f64], k: usize) {
    if k < 2 {
        return;
    }
    let pair_mask = (1usize << (k - 1)) - 1;
    for (z, amp) in amps.iter_mut().enumerate() {
        let adjacent = (z & (z >> 1)) & pair_mask;
        if (adjacent.count_ones() & 1) == 1 {
            *amp = -*amp;
        }
    }
}

/// Real-amplitude ansatz kernel, writing into a caller-provided buffer so the
/// optimizer can reuse one allocation across evaluations. `theta` holds `2k`
/// parameters per layer: first rotation block, then (after the CZ chain) the
/// second block.
fn fill_ansatz_amplitudes(amps: &mut [f64], theta: &[f64], k: usize, layers: usize) {
    debug_assert_eq!(amps.len(), 1usize << k);
    for layer in 0..layers {
        let base = layer * 2 * k;
        if layer == 0 {
            // First block acts on |0...0>: build the product state directly
            // by doubling the populated prefix one qubit at a time.
            amps[0] = 1.0;
            let mut size = 1usize;
            for qb in 0..k {
                let c = (theta[base + qb] / 2.0).cos();
                let s = (theta[base + qb] / 2.0).sin();
                let (lo, hi) = amps.split_at_mut(size);
                for (a, b) in lo.iter_mut().zip(hi[..size].iter_mut()) {
                    let x = *a;
                    *a = c * x;
                    *b = s * x;
                }
                size <<= 1;
            }
        } else {
            apply_ry_block(amps, &theta[base..base + k]);
        }
        apply_cz_chain(amps, k);
        apply_ry_block(amps, &theta[base + k..base + 2 * k]);
    }
}

fn ansatz_amplitudes(theta: &[f64], k: usize, layers: usize) -> Vec<f64> {
    let mut amps = vec![0.0f64; 1usize << k];
    fill_ansatz_amplitudes(&mut amps, theta, k, layers);
    amps
}

/// Prepare the ansatz state for the given rotation angles.
///
/// The layer count is inferred from the parameter length, which must be a
/// positive multiple of `2 * num_qubits`.
pub fn apply_ansatz(theta: &[f64], num_qubits: usize) -> Result<StateVector, QuantumError> {
    if num_qubits == 0 {
        return Err(QuantumError::NoQubits);
    }
    let per_layer = 2 * num_qubits;
    if theta.is_empty() || !theta.len().is_multiple_of(per_layer) {
        return Err(QuantumError::ParamLength {
            got: theta.len(),
            per_layer,
        });
    }
    let layers = theta.len() / per_layer;
    let amps = ansatz_amplitudes(theta, num_qubits, layers);
    Ok(StateVector {
        amps: amps.into_iter().map(|a| Complex64::new(a, 0.0)).collect(),
    })
}

/// Tabulate the QUBO energy of every bit pattern (exact diagonalization of
/// the subproblem Hamiltonian).
pub fn precompute_energy_table(model: &QuboModel) -> Result<EnergyTable, QuantumError> {
    precompute_energy_table_capped(model, MAX_TABLE_QUBITS)
}

pub fn precompute_energy_table_capped(
    model: &QuboModel,
    cap: usize,
) -> Result<EnergyTable, QuantumError> {
    let k = model.num_vars();
    if k > cap {
        return Err(QuantumError::TableTooLarge { qubits: k, cap });
    }
    // Dense symmetric coupling matrix for O(popcount) incremental sums.
    let mut couple = vec![0.0f64; k * k];
    for (i, j, a) in model.quad_terms() {
        couple[i * k + j] = a;
        couple[j * k + i] = a;
    }
    let linear = model.linear();

    let dim = 1usize << k;
    let mut energies = vec![0.0f64; dim];
    energies[0] = model.offset();
    for z in 1..dim {
        let b = z.trailing_zeros() as usize;
        let rest = z & (z - 1);
        let mut e = energies[rest] + linear[b];
        let row = &couple[b * k..(b + 1) * k];
        let mut t = rest;
        while t != 0 {
            let i = t.trailing_zeros() as usize;
            e += row[i];
            t &= t - 1;
        }
        energies[z] = e;
    }
    for (z, &e) in energies.iter().enumerate() {
        if !e.is_finite() {
            return Err(QuantumError::NonFiniteEnergy(z));
        }
    }
    Ok(EnergyTable { energies })
}

/// Exact expectation of a diagonal Hamiltonian: `sum_z |amp_z|^2 E_z`.
pub fn expectation(state: &StateVector, table: &EnergyTable) -> Result<f64, QuantumError> {
    if state.amps.len() != table.energies.len() {
        return Err(QuantumError::DimensionMismatch {
            state_qubits: state.num_qubits(),
            table_qubits: table.num_qubits(),
        });
    }
    Ok(state
        .amps
        .iter()
        .zip(&table.energies)
        .map(|(a, &e)| a.norm_sqr() * e)
        .sum())
}

fn expectation_real(amps: &[f64], energies: &[f64]) -> f64 {
    // Eight independent accumulators keep the reduction off the critical
    // latency path and let it vectorize; the order is fixed, so results stay
    // deterministic.
    const LANES: usize = 8;
    let mut acc = [0.0f64; LANES];
    let a_chunks = amps.chunks_exact(LANES);
    let e_chunks = energies.chunks_exact(LANES);
    let a_rem = a_chunks.remainder();
    let e_rem = e_chunks.remainder();
    for (a, e) in a_chunks.zip(e_chunks) {
        for lane in 0..LANES {
            acc[lane] += a[lane] * a[lane] * e[lane];
        }
    }
    let mut tail = 0.0;
    for (&a, &e) in a_rem.iter().zip(e_rem) {
        tail += a * a * e;
    }
    acc.iter().sum::<f64>() + tail
}

/// Indices of the `top_k` largest probabilities, ties toward lower index.
fn top_probability_states(probs: &[f64], top_k: usize) -> Vec<usize> {
    let keep = top_k.min(probs.len()).max(1);
    // probs vectors are large and keep is small; one linear scan with a
    // running min of the kept set.
    let mut kept: Vec<usize> = Vec::with_capacity(keep);
    let mut min_pos = 0usize;
    for (z, &p) in probs.iter().enumerate() {
        if kept.len() < keep {
            kept.push(z);
            if kept.len() == keep {
                min_pos = (0..kept.len()).min_by(|&a, &b| {
                    probs[kept[a]]
                        .partial_cmp(&probs[kept[b]])
                        .unwrap_or(std::cmp::Ordering::Equal)
                }).unwrap();
            }
        } else if p > probs[kept[min_pos]] {
            kept[min_pos] = z;
            min_pos = (0..kept.len()).min_by(|&a, &b| {
                probs[kept[a]]
                    .partial_cmp(&probs[kept[b]])
                    .unwrap_or(std::cmp::Ordering::Equal)
            }).unwrap();
        }
    }
    kept
}

/// Minimize a tabulated diagonal Hamiltonian with the single-layer ansatz.
///
/// Runs the simplex optimizer from `restarts` random parameter draws uniform
/// in `[-pi, pi]`, keeps the restart with the lowest expectation, then decodes
/// the `top_k` most probable basis states of that statevector plus the most
/// probable one and returns whichever has the lowest table energy. The
/// reported energy is always the exact table entry of the returned bits; VQE
/// is a heuristic, so that entry may exceed the table minimum.
pub fn vqe_minimize<R: Rng>(table: &EnergyTable, cfg: &VqeConfig, rng: &mut R) -> VqeOutcome {
    let k = table.num_qubits();
    if k == 0 {
        return VqeOutcome {
            best_bits: 0,
            best_energy: table.energies[0],
            final_params: Vec::new(),
            eval_count: 0,
        };
    }
    let layers = cfg.layers.max(1);
    let num_params = 2 * k * layers;
    let range = table.max() - table.min();
    let nm_opts = NelderMeadOptions {
        max_evaluations: cfg.max_evaluations.max(1),
        value_tolerance: cfg.value_tol_factor * range,
        param_tolerance: 1e-7,
        initial_step: std::f64::consts::FRAC_PI_2,
    };

    let mut eval_count = 0usize;
    let mut best_value = f64::INFINITY;
    let mut best_params: Option<Vec<f64>> = None;
    let mut scratch = vec![0.0f64; table.energies.len()];
    for _ in 0..cfg.restarts.max(1) {
        let start: Vec<f64> = (0..num_params)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let outcome = nelder_mead(
            |theta| {
                fill_ansatz_amplitudes(&mut scratch, theta, k, layers);
                expectation_real(&scratch, &table.energies)
            },
            &start,
            &nm_opts,
        );
        eval_count += outcome.evaluations;
        if outcome.best_value < best_value || best_params.is_none() {
            best_value = outcome.best_value;
            best_params = Some(outcome.best_point);
        }
    }

    let final_params = best_params.expect("at least one restart");
    let amps = ansatz_amplitudes(&final_params, k, layers);
    let probs: Vec<f64> = amps.iter().map(|&a| a * a).collect();

    let mut candidates = top_probability_states(&probs, cfg.top_k);
    // The most probable state is decoded unconditionally.
    let argmax = probs
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (z, &p)| {
            if p > acc.1 {
                (z, p)
            } else {
                acc
            }
        })
        .0;
    if !candidates.contains(&argmax) {
        candidates.push(argmax);
    }

    let mut best_bits = argmax;
    let mut best_energy = table.energies[argmax];
    for &z in &candidates {
        let e = table.energies[z];
        if e < best_energy || (e == best_energy && z < best_bits) {
            best_bits = z;
            best_energy = e;
        }
    }

    VqeOutcome {
        best_bits,
        best_energy,
        final_params,
        eval_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table_from(values: &[f64]) -> EnergyTable {
        assert!(values.len().is_power_of_two());
        EnergyTable {
            energies: values.to_vec(),
        }
    }

    #[test]
    fn zero_angles_leave_ground_state() {
        for k in 1..=5 {
            let state = apply_ansatz(&vec![0.0; 2 * k], k).unwrap();
            assert!((state.amplitudes()[0].re - 1.0).abs() < 1e-15);
            for amp in &state.amplitudes()[1..] {
                assert_eq!(amp.norm_sqr(), 0.0);
            }
        }
    }

    #[test]
    fn single_qubit_pi_rotation_flips() {
        let state = apply_ansatz(&[std::f64::consts::PI, 0.0], 1).unwrap();
        assert!(state.amplitudes()[0].norm_sqr() < 1e-20);
        assert!((state.amplitudes()[1].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_qubit_quarter_rotations_show_cz_sign() {
        let h = std::f64::consts::FRAC_PI_2;
        let state = apply_ansatz(&[h, h, 0.0, 0.0], 2).unwrap();
        let amps = state.amplitudes();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (z, &want) in expect.iter().enumerate() {
            assert!(
                (amps[z].re - want).abs() < 1e-12 && amps[z].im.abs() < 1e-15,
                "state {z}: {:?} vs {want}",
                amps[z]
            );
        }
    }

    #[test]
    fn param_length_must_match() {
        assert!(matches!(
            apply_ansatz(&[0.0; 3], 2),
            Err(QuantumError::ParamLength { .. })
        ));
        assert!(matches!(apply_ansatz(&[], 2), Err(QuantumError::ParamLength { .. })));
        assert!(matches!(apply_ansatz(&[0.0; 2], 0), Err(QuantumError::NoQubits)));
        // Two layers are fine.
        assert!(apply_ansatz(&[0.1; 8], 2).is_ok());
    }

    #[test]
    fn norm_is_preserved_for_random_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in [1usize, 3, 6, 8] {
            for _ in 0..20 {
                let theta: Vec<f64> = (0..2 * k)
                    .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                    .collect();
                let state = apply_ansatz(&theta, k).unwrap();
                assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_rotation_matches_analytic_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for k in 1..=6usize {
            for qubit in 0..k {
                let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                let mut params = vec![0.0; 2 * k];
                params[qubit] = theta;
                let probs = apply_ansatz(&params, k).unwrap().probabilities();
                let p1: f64 = probs
                    .iter()
                    .enumerate()
                    .filter(|(z, _)| (z >> qubit) & 1 == 1)
                    .map(|(_, &p)| p)
                    .sum();
                let p0 = 1.0 - p1;
                let half = theta / 2.0;
                assert!((p0 - half.cos().powi(2)).abs() < 1e-12);
                assert!((p1 - half.sin().powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_table_examples() {
        let mut m = QuboModel::new(1);
        m.add_linear(0, 1.0).unwrap();
        let t = precompute_energy_table(&m).unwrap();
        assert_eq!(t.energies(), &[0.0, 1.0]);

        let mut m = QuboModel::new(2);
        m.add_offset(3.0);
        m.add_linear(0, -2.0).unwrap();
        m.add_linear(1, -2.0).unwrap();
        m.add_quad(0, 1, 4.0).unwrap();
        let t = precompute_energy_table(&m).unwrap();
        assert_eq!(t.energies(), &[3.0, 1.0, 1.0, 3.0]);

        let mut m = QuboModel::new(3);
        m.add_offset(2.5);
        let t = precompute_energy_table(&m).unwrap();
        assert_eq!(t.energies(), &[2.5; 8]);
    }

    #[test]
    fn energy_table_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let k = rng.gen_range(1..=8);
            let mut m = QuboModel::new(k);
            m.add_offset(rng.gen_range(-4.0..4.0));
            for v in 0..k {
                m.add_linear(v, rng.gen_range(-4.0..4.0)).unwrap();
            }
            for i in 0..k {
                for j in (i + 1)..k {
                    if rng.gen_bool(0.5) {
                        m.add_quad(i, j, rng.gen_range(-4.0..4.0)).unwrap();
                    }
                }
            }
            let t = precompute_energy_table(&m).unwrap();
            for z in 0..t.len() {
                let bits: Vec<u8> = (0..k).map(|b| ((z >> b) & 1) as u8).collect();
                assert!((t.energies()[z] - m.energy(&bits).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn energy_table_cap() {
        let m = QuboModel::new(21);
        assert!(matches!(
            precompute_energy_table(&m),
            Err(QuantumError::TableTooLarge { qubits: 21, cap: 20 })
        ));
        assert!(precompute_energy_table_capped(&QuboModel::new(4), 3).is_err());
    }

    #[test]
    fn expectation_examples() {
        let table = table_from(&[3.0, 1.0, 1.0, 3.0]);

        // Basis states hit the table directly.
        for z in 0..4usize {
            let mut amps = vec![Complex64::new(0.0, 0.0); 4];
            amps[z] = Complex64::new(1.0, 0.0);
            let state = StateVector { amps };
            assert_eq!(expectation(&state, &table).unwrap(), table.energies()[z]);
        }

        // Uniform superposition averages the table.
        let uniform = StateVector {
            amps: vec![Complex64::new(0.5, 0.0); 4],
        };
        assert!((expectation(&uniform, &table).unwrap() - 2.0).abs() < 1e-12);

        let two = table_from(&[0.0, 2.0]);
        let uniform2 = StateVector {
            amps: vec![Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2],
        };
        assert!((expectation(&uniform2, &two).unwrap() - 1.0).abs() < 1e-12);

        // The quarter-rotation state from the ansatz example.
        let h = std::f64::consts::FRAC_PI_2;
        let state = apply_ansatz(&[h, h, 0.0, 0.0], 2).unwrap();
        assert!((expectation(&state, &table).unwrap() - 2.0).abs() < 1e-12);

        assert!(matches!(
            expectation(&uniform2, &table),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_stays_within_table_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let k = rng.gen_range(1..=6);
            let energies: Vec<f64> = (0..1usize << k).map(|_| rng.gen_range(-9.0..9.0)).collect();
            let table = table_from(&energies);
            let theta: Vec<f64> = (0..2 * k)
                .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let state = apply_ansatz(&theta, k).unwrap();
            let e = expectation(&state, &table).unwrap();
            assert!(e >= table.min() - 1e-9 && e <= table.max() + 1e-9);
        }
    }

    #[test]
    fn vqe_solves_tiny_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = vqe_minimize(&table_from(&[0.0, 1.0]), &VqeConfig::for_qubits(1), &mut rng);
        assert_eq!(out.best_bits, 0);
        assert_eq!(out.best_energy, 0.0);

        let out = vqe_minimize(
            &table_from(&[3.0, 1.0, 1.0, 3.0]),
            &VqeConfig::for_qubits(2),
            &mut rng,
        );
        assert_eq!(out.best_energy, 1.0);
        assert!(out.best_bits == 1 || out.best_bits == 2);

        let out = vqe_minimize(
            &table_from(&[7.5; 8]),
            &VqeConfig::for_qubits(3),
            &mut rng,
        );
        assert_eq!(out.best_energy, 7.5);
    }

    #[test]
    fn vqe_never_beats_the_table_minimum_and_usually_attains_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut exact = 0usize;
        let total = 50usize;
        for _ in 0..total {
            let k = rng.gen_range(1..=4);
            let energies: Vec<f64> =
                (0..1usize << k).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let table = table_from(&energies);
            let cfg = VqeConfig {
                restarts: 4,
                max_evaluations: 2000,
                ..VqeConfig::for_qubits(k)
            };
            let out = vqe_minimize(&table, &cfg, &mut rng);
            assert!(out.best_energy >= table.min() - 1e-12);
            assert_eq!(out.best_energy, table.energies()[out.best_bits]);
            if (out.best_energy - table.min()).abs() < 1e-12 {
                exact += 1;
            }
        }
        assert!(
            exact * 10 >= total * 9,
            "exact minimum in {exact}/{total} runs"
        );
    }

    #[test]
    fn decode_never_worse_than_most_probable_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let k = rng.gen_range(2..=5);
            let energies: Vec<f64> =
                (0..1usize << k).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let table = table_from(&energies);
            let cfg = VqeConfig {
                restarts: 2,
                max_evaluations: 300,
                ..VqeConfig::for_qubits(k)
            };
            let out = vqe_minimize(&table, &cfg, &mut rng);
            let state = apply_ansatz(&out.final_params, k).unwrap();
            let probs = state.probabilities();
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert!(out.best_energy <= table.energies()[argmax] + 1e-12);
        }
    }

    #[test]
    fn vqe_is_deterministic_for_fixed_seed() {
        let energies: Vec<f64> = (0..16).map(|z| ((z * 7 + 3) % 13) as f64).collect();
        let table = table_from(&energies);
        let cfg = VqeConfig::for_qubits(4);
        let a = vqe_minimize(&table, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let b = vqe_minimize(&table, &cfg, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a.best_bits, b.best_bits);
        assert_eq!(a.final_params, b.final_params);
        assert_eq!(a.eval_count, b.eval_count);
    }

    #[test]
    fn zero_variable_table_short_circuits() {
        let m = QuboModel::new(0);
        let t = precompute_energy_table(&m).unwrap();
        assert_eq!(t.len(), 1);
        let out = vqe_minimize(&t, &VqeConfig::for_qubits(0), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.best_bits, 0);
        assert_eq!(out.eval_count, 0);
    }
}
