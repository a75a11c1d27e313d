//! Minimal Nelder-Mead simplex minimizer for the circuit-parameter search.
//!
//! Deterministic given the start point; the evaluation budget is a hard cap
//! checked before every objective call, so a truncated run still returns the
//! best vertex seen.

#[derive(Debug, Clone)]
pub(crate) struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Stop when the simplex value spread drops below this.
    pub value_tolerance: f64,
    /// Stop when every vertex coordinate is within this of the best vertex.
    pub param_tolerance: f64,
    /// Offset used to build the initial simplex around the start point.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 1000,
            value_tolerance: 1e-8,
            param_tolerance: 1e-7,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NelderMeadOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const BETA: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadOutcome {
    let dim = start.len();
    let mut evaluations = 0usize;
    let budget = opts.max_evaluations.max(1);

    let mut eval = |point: &[f64], evaluations: &mut usize| -> f64 {
        *evaluations += 1;
        f(point)
    };

    // Initial simplex: start point plus one offset vertex per coordinate.
    // Evaluate lazily so a tiny budget still yields the best prefix.
    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = start.to_vec();
    let f0 = eval(&v0, &mut evaluations);
    vertices.push((v0, f0));
    for i in 0..dim {
        if evaluations >= budget {
            break;
        }
        let mut v = start.to_vec();
        v[i] += opts.initial_step;
        let fv = eval(&v, &mut evaluations);
        vertices.push((v, fv));
    }

    let best_of = |vertices: &[(Vec<f64>, f64)]| {
        let mut bi = 0;
        for (i, v) in vertices.iter().enumerate().skip(1) {
            if v.1 < vertices[bi].1 {
                bi = i;
            }
        }
        bi
    };

    if vertices.len() < dim + 1 || dim == 0 {
        let bi = best_of(&vertices);
        return NelderMeadOutcome {
            best_point: vertices[bi].0.clone(),
            best_value: vertices[bi].1,
            evaluations,
        };
    }

    loop {
        vertices.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = vertices[dim].1 - vertices[0].1;
        if spread <= opts.value_tolerance {
            break;
        }
        let max_drift = vertices[1..]
            .iter()
            .flat_map(|(v, _)| {
                v.iter()
                    .zip(&vertices[0].0)
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0f64, f64::max);
        if max_drift <= opts.param_tolerance {
            break;
        }
        if evaluations >= budget {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (v, _) in &vertices[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }
        let worst = vertices[dim].clone();

        let blend = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = blend(ALPHA);
        let f_reflected = eval(&reflected, &mut evaluations);

        if f_reflected < vertices[0].1 {
            // Try to expand past the reflection.
            if evaluations < budget {
                let expanded = blend(GAMMA);
                let f_expanded = eval(&expanded, &mut evaluations);
                vertices[dim] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
            } else {
                vertices[dim] = (reflected, f_reflected);
            }
            continue;
        }
        if f_reflected < vertices[dim - 1].1 {
            vertices[dim] = (reflected, f_reflected);
            continue;
        }
        if evaluations >= budget {
            if f_reflected < vertices[dim].1 {
                vertices[dim] = (reflected, f_reflected);
            }
            break;
        }

        // Contract toward the better of the worst vertex and its reflection.
        let contracted = if f_reflected < worst.1 {
            blend(BETA)
        } else {
            blend(-BETA)
        };
        let f_contracted = eval(&contracted, &mut evaluations);
        if f_contracted < worst.1.min(f_reflected) {
            vertices[dim] = (contracted, f_contracted);
            continue;
        }

        // Shrink everything toward the best vertex.
        let best = vertices[0].0.clone();
        for vertex in &mut vertices[1..] {
            if evaluations >= budget {
                break;
            }
            let shrunk: Vec<f64> = vertex
                .0
                .iter()
                .zip(&best)
                .map(|(x, b)| b + SIGMA * (x - b))
                .collect();
            let fs = eval(&shrunk, &mut evaluations);
            *vertex = (shrunk, fs);
        }
    }

    let bi = best_of(&vertices);
    NelderMeadOutcome {
        best_point: vertices[bi].0.clone(),
        best_value: vertices[bi].1,
        evaluations,
    }
}
