//! Random route/drone block selection for the coordinate-descent outer loop.
//!
//! Each iteration frees the assignment bits of a route subset `N` crossed
//! with a drone subset `Q`. A legal block (i) fits the qubit budget,
//! `|N| * |Q| <= m`, (ii) only frees routes currently hosted on drones in
//! `Q`, and (iii) contains both the most and the least loaded drone, so the
//! block always spans the current bottleneck and the best absorber.

use rand::Rng;
use thiserror::Error;

use crate::model::Assignment;

/// The route and drone subsets whose cross product forms the free block.
///
/// Both index lists are sorted ascending and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    routes: Vec<usize>,
    drones: Vec<usize>,
}

impl Selection {
    pub fn new(mut routes: Vec<usize>, mut drones: Vec<usize>) -> Result<Self, SelectionError> {
        routes.sort_unstable();
        drones.sort_unstable();
        if routes.is_empty() || drones.is_empty() {
            return Err(SelectionError::EmptySelection);
        }
        if routes.windows(2).any(|w| w[0] == w[1]) || drones.windows(2).any(|w| w[0] == w[1]) {
            return Err(SelectionError::DuplicateIndex);
        }
        Ok(Self { routes, drones })
    }

    pub fn routes(&self) -> &[usize] {
        &self.routes
    }

    pub fn drones(&self) -> &[usize] {
        &self.drones
    }

    /// Number of free variables `|N| * |Q|`.
    pub fn block_size(&self) -> usize {
        self.routes.len() * self.drones.len()
    }
}

/// Sizing knobs for [`select_subsets`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionPolicy {
    /// Qubit budget `m`: the block never exceeds this many variables.
    pub qubit_budget: usize,
    /// Preferred drone-subset size before the budget cap kicks in.
    pub target_drones: usize,
    /// Redraws allowed before a degenerate iteration is reported.
    pub max_retries: usize,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self {
            qubit_budget: 20,
            target_drones: 4,
            max_retries: 32,
        }
    }
}

impl SelectionPolicy {
    pub fn with_budget(qubit_budget: usize) -> Self {
        Self {
            qubit_budget,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectionError {
    #[error("selection must contain at least one route and one drone")]
    EmptySelection,
    #[error("selection contains a duplicate index")]
    DuplicateIndex,
    #[error("nothing to rebalance with fewer than two drones")]
    TooFewDrones,
    #[error("qubit budget must be at least 2, got {0}")]
    BudgetTooSmall(usize),
    #[error("no usable block after {0} redraws: every candidate drone subset holds one route per drone")]
    Degenerate(usize),
}

/// The first violated legality condition, reported by [`validate_selection`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectionViolation {
    /// An index points outside the instance.
    IndexOutOfRange { what: &'static str, index: usize },
    /// `|N| * |Q|` exceeds the qubit budget.
    BlockExceedsBudget { block: usize, budget: usize },
    /// A selected route is currently assigned to a drone outside `Q`.
    RouteNotHosted { route: usize, drone: usize },
    /// The drone with the highest completion time is missing from `Q`.
    MaxLoadedDroneMissing { drone: usize },
    /// The drone with the lowest completion time is missing from `Q`.
    MinLoadedDroneMissing { drone: usize },
}

impl std::fmt::Display for SelectionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::IndexOutOfRange { what, index } => write!(f, "{what} index {index} out of range"),
            Self::BlockExceedsBudget { block, budget } => {
                write!(f, "block of {block} variables exceeds qubit budget {budget}")
            }
            Self::RouteNotHosted { route, drone } => write!(
                f,
                "route {route} is hosted on drone {drone} outside the selected drones"
            ),
            Self::MaxLoadedDroneMissing { drone } => {
                write!(f, "most loaded drone {drone} not selected")
            }
            Self::MinLoadedDroneMissing { drone } => {
                write!(f, "least loaded drone {drone} not selected")
            }
        }
    }
}

fn argmax_lowest_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn argmin_lowest_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Check a selection against the current state.
///
/// Conditions are checked in a fixed order (index ranges, budget, hosting,
/// extreme drones) and the first failure is returned.
pub fn validate_selection(
    current: &Assignment,
    completion: &[f64],
    sel: &Selection,
    qubit_budget: usize,
) -> Result<(), SelectionViolation> {
    let n = current.num_routes();
    let q = completion.len();
    if let Some(&i) = sel.routes().iter().find(|&&i| i >= n) {
        return Err(SelectionViolation::IndexOutOfRange {
            what: "route",
            index: i,
        });
    }
    if let Some(&j) = sel.drones().iter().find(|&&j| j >= q) {
        return Err(SelectionViolation::IndexOutOfRange {
            what: "drone",
            index: j,
        });
    }
    if sel.block_size() > qubit_budget {
        return Err(SelectionViolation::BlockExceedsBudget {
            block: sel.block_size(),
            budget: qubit_budget,
        });
    }
    for &route in sel.routes() {
        let drone = current.drone_of()[route];
        if !sel.drones().contains(&drone) {
            return Err(SelectionViolation::RouteNotHosted { route, drone });
        }
    }
    let jmax = argmax_lowest_index(completion);
    if !sel.drones().contains(&jmax) {
        return Err(SelectionViolation::MaxLoadedDroneMissing { drone: jmax });
    }
    let jmin = argmin_lowest_index(completion);
    if !sel.drones().contains(&jmin) {
        return Err(SelectionViolation::MinLoadedDroneMissing { drone: jmin });
    }
    Ok(())
}

/// Partial Fisher-Yates draw of `count` distinct elements, order-normalized
/// by the caller. Deterministic for a fixed rng state.
fn sample_without_replacement<R: Rng>(pool: &mut [usize], count: usize, rng: &mut R) -> Vec<usize> {
    let count = count.min(pool.len());
    for i in 0..count {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool[..count].to_vec()
}

/// Draw a legal block for the next iteration.
///
/// The drone subset starts from the most and least loaded drones (lowest
/// index on ties) and is padded with uniformly random distinct drones up to
/// `min(q, target_drones, m/2)`. The route subset holds `m / |Q|` routes
/// drawn uniformly from those currently hosted inside the drone subset (all
/// of them if fewer exist). A draw whose drones all hold exactly one route
/// cannot move any load and is redrawn, up to `max_retries` times.
pub fn select_subsets<R: Rng>(
    current: &Assignment,
    completion: &[f64],
    policy: &SelectionPolicy,
    rng: &mut R,
) -> Result<Selection, SelectionError> {
    let n = current.num_routes();
    let q = completion.len();
    if q < 2 {
        return Err(SelectionError::TooFewDrones);
    }
    if policy.qubit_budget < 2 {
        return Err(SelectionError::BudgetTooSmall(policy.qubit_budget));
    }

    let jmax = argmax_lowest_index(completion);
    let jmin = argmin_lowest_index(completion);
    let mut forced = vec![jmax];
    if jmin != jmax {
        forced.push(jmin);
    }

    let size_q = q
        .min(policy.target_drones)
        .min(policy.qubit_budget / 2)
        .max(forced.len());

    let counts = current.route_counts(q);

    for _ in 0..policy.max_retries.max(1) {
        let mut pool: Vec<usize> = (0..q).filter(|j| !forced.contains(j)).collect();
        let mut drones = forced.clone();
        drones.extend(sample_without_replacement(
            &mut pool,
            size_q - forced.len(),
            rng,
        ));
        drones.sort_unstable();

        // A subset where every drone flies a single route can only permute
        // routes or empty a drone; redraw the pad instead.
        if drones.iter().all(|&j| counts[j] == 1) {
            continue;
        }

        let hosted: Vec<usize> = (0..n)
            .filter(|&i| drones.binary_search(&current.drone_of()[i]).is_ok())
            .collect();
        debug_assert!(!hosted.is_empty());

        let size_n = (policy.qubit_budget / drones.len()).min(hosted.len());
        if size_n == 0 {
            continue;
        }
        let mut hosted_pool = hosted;
        let mut routes = sample_without_replacement(&mut hosted_pool, size_n, rng);
        routes.sort_unstable();

        return Selection::new(routes, drones);
    }
    Err(SelectionError::Degenerate(policy.max_retries))
}
