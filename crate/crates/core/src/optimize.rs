//! Derivative-free multistart minimisation of `F_p` over the `2p` angles.
//!
//! Each local search is a Nelder-Mead simplex descent. Starts come from a
//! deterministic nested lattice over `[0, pi]^{2p}`; the restriction to that
//! box uses the even symmetry `F_p(gamma, beta) = F_p(-gamma, -beta)`. The
//! local searches themselves are not clamped to the box.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::encoding::IsingModel;
use crate::error::{Error, Result};
use crate::qaoa::{prepare_ansatz_from_diagonal, QaoaParams};
use crate::statevector::check_qubits;

/// Settings for [`minimize_fp`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub multistarts: usize,
    pub max_evals_per_start: usize,
    /// Stop when the simplex values span less than this...
    pub value_tolerance: f64,
    /// ...and every vertex lies within this distance of the best one.
    pub step_tolerance: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Seeds the shifted fill points used once the lattice levels run out.
    pub seed: u64,
    pub record_trace: bool,
}

impl OptimizerConfig {
    /// 9 starts at `p = 1`, 25 otherwise, `200 p` evaluations per start.
    pub fn for_level(level: usize) -> Self {
        Self {
            multistarts: if level <= 1 { 9 } else { 25 },
            max_evals_per_start: 200 * level.max(1),
            value_tolerance: 1e-8,
            step_tolerance: 1e-8,
            initial_step: PI / 8.0,
            seed: 0,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.multistarts == 0 {
            return Err(Error::argument("multistarts must be at least 1"));
        }
        if self.max_evals_per_start < 2 {
            return Err(Error::argument("max_evals_per_start must be at least 2"));
        }
        for (name, v) in [
            ("value_tolerance", self.value_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("initial_step", self.initial_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::argument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// One accepted best point of a local search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub start: usize,
    pub evaluations: usize,
    pub angles: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_params: QaoaParams,
    pub best_value: f64,
    pub best_start: usize,
    pub evaluations: usize,
    pub start_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

/// Outcome of a single Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct LocalSearch {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub start_value: f64,
    /// Best value after every iteration, with the evaluation count.
    pub history: Vec<(usize, Vec<f64>, f64)>,
}

/// Nelder-Mead with standard coefficients (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2).
pub fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    initial_step: f64,
    value_tolerance: f64,
    step_tolerance: f64,
    max_evals: usize,
) -> LocalSearch {
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let start_value = eval(start, &mut evals);
    simplex.push((start.to_vec(), start_value));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut history = Vec::new();

    loop {
        // stable sort keeps the older vertex first on equal values
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push((evals, simplex[0].0.clone(), simplex[0].1));

        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (spread <= value_tolerance && diameter <= step_tolerance) || evals >= max_evals {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let fr = eval(&reflected, &mut evals);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded, &mut evals);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let x = along(0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }

    let (point, value) = simplex.swap_remove(0);
    LocalSearch {
        point,
        value,
        evaluations: evals,
        start_value,
        history,
    }
}

const MAX_LATTICE_POINTS: usize = 1 << 20;

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn first_primes(count: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn seed_points_flat(level: usize, starts: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = 2 * level;
    let mut chosen = vec![vec![PI / 2.0; dim]];
    let mut per_axis = 1usize;
    while chosen.len() < starts {
        per_axis *= 3;
        let total = match per_axis.checked_pow(dim as u32) {
            Some(t) if t <= MAX_LATTICE_POINTS => t,
            _ => break,
        };
        // lattice of midpoints (2i + 1) pi / (2m); points of coarser levels
        // have every index congruent to 1 mod 3
        let mut candidates: Vec<Vec<f64>> = (0..total)
            .filter_map(|flat| {
                let mut rest = flat;
                let mut all_coarse = true;
                let mut point = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let i = rest % per_axis;
                    rest /= per_axis;
                    all_coarse &= i % 3 == 1;
                    point.push((2 * i + 1) as f64 * PI / (2 * per_axis) as f64);
                }
                point.reverse();
                (!all_coarse).then_some(point)
            })
            .collect();
        candidates.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let mut nearest: Vec<f64> = candidates
            .iter()
            .map(|c| chosen.iter().map(|s| dist2(c, s)).fold(f64::INFINITY, f64::min))
            .collect();
        let mut taken = vec![false; candidates.len()];
        while chosen.len() < starts && taken.iter().any(|t| !t) {
            // farthest remaining candidate, lowest lexicographic index on ties
            let mut pick = None;
            let mut best = f64::NEG_INFINITY;
            for (i, &d) in nearest.iter().enumerate() {
                if !taken[i] && d > best + 1e-12 {
                    best = d;
                    pick = Some(i);
                }
            }
            let i = pick.expect("an untaken candidate exists");
            taken[i] = true;
            let p = candidates[i].clone();
            for (j, c) in candidates.iter().enumerate() {
                if !taken[j] {
                    nearest[j] = nearest[j].min(dist2(c, &p));
                }
            }
            chosen.push(p);
        }
    }

    if chosen.len() < starts {
        // randomly shifted Halton points for the remainder
        let primes = first_primes(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let mut index = 1;
        while chosen.len() < starts {
            chosen.push(
                primes
                    .iter()
                    .zip(&shift)
                    .map(|(&b, s)| ((halton(index, b) + s) % 1.0) * PI)
                    .collect(),
            );
            index += 1;
        }
    }
    chosen.truncate(starts);
    chosen
}

/// Deterministic, evenly spread starting angles in `[0, pi]^{2p}`.
///
/// The first point is the centroid. Further points come from nested
/// midpoint lattices with `3, 9, 27, ...` values per axis, each level
/// ordered greedily by distance to the points already chosen, so a list of
/// `k` starts is always a prefix of a longer list.
pub fn grid_seed_points(level: usize, starts: usize) -> Result<Vec<QaoaParams>> {
    grid_seed_points_seeded(level, starts, 0)
}

pub fn grid_seed_points_seeded(level: usize, starts: usize, seed: u64) -> Result<Vec<QaoaParams>> {
    if level == 0 || starts == 0 {
        return Err(Error::argument("level and starts must be at least 1"));
    }
    seed_points_flat(level, starts, seed)
        .iter()
        .map(|p| QaoaParams::from_flat(p))
        .collect()
}

/// Minimises `F_p` for the model with a multistart Nelder-Mead search.
///
/// Starts are independent and run in parallel; the best value wins, the
/// lowest start index on ties.
pub fn minimize_fp(model: &IsingModel, level: usize, config: &OptimizerConfig) -> Result<OptimizationResult> {
    check_qubits(model.num_spins())?;
    config.validate()?;
    if level == 0 {
        return Err(Error::argument("QAOA level must be at least 1"));
    }
    let diag = model.diagonal()?;
    let n = model.num_spins();
    let starts = seed_points_flat(level, config.multistarts, config.seed);

    let runs: Vec<LocalSearch> = starts
        .par_iter()
        .map(|start| {
            let mut objective = |angles: &[f64]| {
                let (g, b) = angles.split_at(level);
                prepare_ansatz_from_diagonal(n, &diag, g, b)
                    .and_then(|s| s.expectation_diagonal(&diag))
                    .expect("dimensions fixed by the model")
            };
            nelder_mead(
                &mut objective,
                start,
                config.initial_step,
                config.value_tolerance,
                config.step_tolerance,
                config.max_evals_per_start,
            )
        })
        .collect();

    let (best_start, best) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &LocalSearch)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.value <= r.value => acc,
            _ => Some((i, r)),
        })
        .expect("at least one start");

    let trace = config.record_trace.then(|| {
        runs.iter()
            .enumerate()
            .flat_map(|(start, r)| {
                r.history.iter().map(move |(evaluations, angles, value)| TraceEntry {
                    start,
                    evaluations: *evaluations,
                    angles: angles.clone(),
                    value: *value,
                })
            })
            .collect()
    });

    Ok(OptimizationResult {
        best_params: QaoaParams::from_flat(&best.point)?,
        best_value: best.value,
        best_start,
        evaluations: runs.iter().map(|r| r.evaluations).sum(),
        start_values: runs.iter().map(|r| r.start_value).collect(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{encode_mimo, Coupling, Form};
    use crate::fixtures;
    use crate::qaoa::expectation_fp;
    use proptest::prelude::*;

    fn single_spin(b: f64) -> IsingModel {
        IsingModel::new(1, vec![], vec![b], 0.0, Form::Simplified).unwrap()
    }

    #[test]
    fn seed_points_small_cases() {
        let one = grid_seed_points(1, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].gammas(), &[PI / 2.0]);
        assert_eq!(one[0].betas(), &[PI / 2.0]);

        let nine = grid_seed_points(1, 9).unwrap();
        let levels = [PI / 6.0, PI / 2.0, 5.0 * PI / 6.0];
        let mut seen = [false; 9];
        for p in &nine {
            let gi = levels.iter().position(|l| (l - p.gammas()[0]).abs() < 1e-14).unwrap();
            let bi = levels.iter().position(|l| (l - p.betas()[0]).abs() < 1e-14).unwrap();
            assert!(!seen[gi * 3 + bi]);
            seen[gi * 3 + bi] = true;
        }
        assert!(seen.iter().all(|s| *s));
        assert_eq!(nine[0], one[0]);
        assert_eq!(grid_seed_points(1, 9).unwrap(), nine);
    }

    #[test]
    fn seed_points_prefix_stable_and_in_box() {
        for level in 1..=3 {
            let long = grid_seed_points(level, 40).unwrap();
            for k in [1, 5, 17, 33] {
                assert_eq!(grid_seed_points(level, k).unwrap(), long[..k].to_vec());
            }
            for p in &long {
                assert!(p.to_flat().iter().all(|&a| (0.0..=PI).contains(&a)));
            }
        }
        // more starts than the first lattice level holds at p = 1
        let many = grid_seed_points(1, 100).unwrap();
        assert_eq!(many.len(), 100);
        assert!(grid_seed_points(0, 3).is_err());
        assert!(grid_seed_points(1, 0).is_err());
    }

    #[test]
    fn nelder_mead_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let r = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 1e-12, 1e-8, 2000);
        assert!((r.point[0] - 1.0).abs() < 1e-6);
        assert!((r.point[1] + 2.0).abs() < 1e-6);
        assert!(r.history.windows(2).all(|w| w[1].2 <= w[0].2));
    }

    #[test]
    fn unit_field_reaches_minus_one() {
        let result = minimize_fp(&single_spin(1.0), 1, &OptimizerConfig::for_level(1)).unwrap();
        assert!((result.best_value + 1.0).abs() < 1e-6);
        let g = result.best_params.gammas()[0];
        let b = result.best_params.betas()[0];
        assert!(((2.0 * b).sin() * (2.0 * g).sin() + 1.0).abs() < 1e-6);
        assert!(result.best_value <= result.start_values.iter().copied().fold(f64::INFINITY, f64::min) + 1e-12);
    }

    #[test]
    fn zero_model_is_flat() {
        let model = IsingModel::new(2, vec![Coupling { k: 0, l: 1, value: 0.0 }], vec![0.0, 0.0], 0.0, Form::Simplified).unwrap();
        let result = minimize_fp(&model, 1, &OptimizerConfig::for_level(1)).unwrap();
        assert!(result.best_value.abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_traced() {
        let model = encode_mimo(&fixtures::two_qubit(), Form::Simplified);
        let mut cfg = OptimizerConfig::for_level(2);
        cfg.record_trace = true;
        let a = minimize_fp(&model, 2, &cfg).unwrap();
        let b = minimize_fp(&model, 2, &cfg).unwrap();
        assert_eq!(a, b);
        let trace = a.trace.as_ref().unwrap();
        for s in 0..cfg.multistarts {
            let values: Vec<f64> = trace.iter().filter(|t| t.start == s).map(|t| t.value).collect();
            assert!(!values.is_empty());
            assert!(values.windows(2).all(|w| w[1] <= w[0]));
        }
        let check = expectation_fp(&model, &a.best_params).unwrap();
        assert!((check - a.best_value).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let model = single_spin(1.0);
        let mut cfg = OptimizerConfig::for_level(1);
        cfg.multistarts = 0;
        assert!(minimize_fp(&model, 1, &cfg).is_err());
        let mut cfg = OptimizerConfig::for_level(1);
        cfg.value_tolerance = 0.0;
        assert!(minimize_fp(&model, 1, &cfg).is_err());
        assert!(minimize_fp(&model, 0, &OptimizerConfig::for_level(1)).is_err());
    }

    #[test]
    fn more_starts_never_worse() {
        let model = encode_mimo(&fixtures::three_qubit(), Form::Simplified);
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let mut cfg = OptimizerConfig::for_level(1);
            cfg.multistarts = k;
            let r = minimize_fp(&model, 1, &cfg).unwrap();
            assert!(r.best_value <= prev);
            prev = r.best_value;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn never_below_ground_energy(vals in proptest::collection::vec(-2.0f64..2.0, 6), level in 1usize..=2) {
            let model = IsingModel::new(
                3,
                vec![
                    Coupling { k: 0, l: 1, value: vals[0] },
                    Coupling { k: 0, l: 2, value: vals[1] },
                    Coupling { k: 1, l: 2, value: vals[2] },
                ],
                vals[3..].to_vec(),
                0.0,
                Form::Simplified,
            ).unwrap();
            let mut cfg = OptimizerConfig::for_level(level);
            cfg.multistarts = 4;
            let r = minimize_fp(&model, level, &cfg).unwrap();
            let ground = model.diagonal().unwrap().into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(r.best_value >= ground - 1e-9);
        }
    }
}
