//! Level-p QAOA on the simplified Ising model, evaluated exactly from
//! amplitudes.
//!
//! The cost layer is one diagonal phase pass `exp(-i gamma H_f)`; every term
//! of `H_f` commutes, so this equals the per-term gate product. The mixer is
//! `exp(-i beta sum_k X_k)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::IsingModel;
use crate::error::{Error, Result};
use crate::statevector::{bit_of_index, StateVector};

/// Angles of a level-p ansatz.
///
/// `beta` is reduced into `[0, pi)`: shifting it by `pi` multiplies the
/// state by the global phase `(-1)^N`. `gamma` is stored as given because
/// `exp(-i gamma H_f)` is only `2 pi`-periodic when the energies are
/// integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::argument("QAOA level must be at least 1"));
        }
        if gammas.len() != betas.len() {
            return Err(Error::dimension("beta angles", gammas.len(), betas.len()));
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(Error::argument("QAOA angles must be finite"));
        }
        let betas = betas.into_iter().map(|b| b.rem_euclid(PI)).collect();
        Ok(Self { gammas, betas })
    }

    /// Level-1 parameters.
    pub fn single(gamma: f64, beta: f64) -> Result<Self> {
        Self::new(vec![gamma], vec![beta])
    }

    /// Splits `[gamma_1..gamma_p, beta_1..beta_p]`.
    pub fn from_flat(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() || !angles.len().is_multiple_of(2) {
            return Err(Error::argument("flat angle vector must have even, non-zero length"));
        }
        let p = angles.len() / 2;
        Self::new(angles[..p].to_vec(), angles[p..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn level(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// Runs the ansatz on a precomputed cost diagonal.
pub fn prepare_ansatz_from_diagonal(
    num_qubits: usize,
    diagonal: &[f64],
    gammas: &[f64],
    betas: &[f64],
) -> Result<StateVector> {
    let mut state = StateVector::uniform_superposition(num_qubits)?;
    for (&gamma, &beta) in gammas.iter().zip(betas) {
        state.apply_diagonal_phase(diagonal, gamma)?;
        state.apply_x_rotations(beta);
    }
    Ok(state)
}

/// `|psi_p(gamma, beta)> = prod_j U_B(beta_j) U_f(gamma_j) |+...+>`.
pub fn prepare_ansatz(model: &IsingModel, params: &QaoaParams) -> Result<StateVector> {
    let diag = model.diagonal()?;
    prepare_ansatz_from_diagonal(model.num_spins(), &diag, &params.gammas, &params.betas)
}

/// `F_p = <psi_p| H_f |psi_p>`.
pub fn expectation_fp(model: &IsingModel, params: &QaoaParams) -> Result<f64> {
    let diag = model.diagonal()?;
    prepare_ansatz_from_diagonal(model.num_spins(), &diag, &params.gammas, &params.betas)?
        .expectation_diagonal(&diag)
}

/// Level-1 expectation for `H_f = -b Z`: `b sin(2 beta) sin(2 b gamma)`.
pub fn analytic_f1_single(b: f64, gamma: f64, beta: f64) -> f64 {
    b * (2.0 * beta).sin() * (2.0 * b * gamma).sin()
}

/// Per-term breakdown of `F_1`.
#[derive(Debug, Clone)]
pub struct FactoredF1 {
    /// `(k, l, <Z_k Z_l>)` in the order of the model's couplings.
    pub pair_terms: Vec<(usize, usize, f64)>,
    /// `<Z_k>` per qubit.
    pub single_terms: Vec<f64>,
    pub value: f64,
}

/// `F_1 = sum_{l>k} J_kl <Z_k Z_l> - sum_k h_k <Z_k> (+ offset)`, each Pauli
/// term evaluated on the full level-1 state.
pub fn f1_factored_terms(model: &IsingModel, gamma: f64, beta: f64) -> Result<FactoredF1> {
    let state = prepare_ansatz(model, &QaoaParams::single(gamma, beta)?)?;
    let probs = state.probabilities();
    let n = model.num_spins();
    let spin = |idx: usize, k: usize| 1.0 - 2.0 * bit_of_index(idx, n, k + 1) as f64;

    let single_terms: Vec<f64> = (0..n)
        .map(|k| probs.iter().enumerate().map(|(i, p)| p * spin(i, k)).sum())
        .collect();
    let pair_terms: Vec<(usize, usize, f64)> = model
        .couplings()
        .iter()
        .map(|c| {
            let f = probs
                .iter()
                .enumerate()
                .map(|(i, p)| p * spin(i, c.k) * spin(i, c.l))
                .sum();
            (c.k, c.l, f)
        })
        .collect();

    let pair: f64 = model
        .couplings()
        .iter()
        .zip(&pair_terms)
        .map(|(c, (_, _, f))| c.value * f)
        .sum();
    let single: f64 = model.fields().iter().zip(&single_terms).map(|(h, g)| h * g).sum();
    Ok(FactoredF1 {
        pair_terms,
        single_terms,
        value: pair - single + model.offset(),
    })
}

pub fn f1_factored(model: &IsingModel, gamma: f64, beta: f64) -> Result<f64> {
    f1_factored_terms(model, gamma, beta).map(|f| f.value)
}

/// `F_1` sampled on a rectangular `(gamma, beta)` grid.
#[derive(Debug, Clone, Serialize)]
pub struct LandscapeGrid {
    pub gamma_axis: Vec<f64>,
    pub beta_axis: Vec<f64>,
    /// `values[i][j] = F_1(gamma_axis[i], beta_axis[j])`.
    pub values: Vec<Vec<f64>>,
}

impl LandscapeGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,beta,F1\n");
        for (g, row) in self.gamma_axis.iter().zip(&self.values) {
            for (b, v) in self.beta_axis.iter().zip(row) {
                out.push_str(&format!("{g:.16e},{b:.16e},{v:.16e}\n"));
            }
        }
        out
    }
}

/// `points` evenly spaced values covering `[lo, hi]` inclusive.
pub fn uniform_axis(points: usize, lo: f64, hi: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Level-1 landscape over the given axes.
pub fn landscape(model: &IsingModel, gamma_axis: &[f64], beta_axis: &[f64]) -> Result<LandscapeGrid> {
    let diag = model.diagonal()?;
    let n = model.num_spins();
    let values = gamma_axis
        .par_iter()
        .map(|&g| {
            beta_axis
                .iter()
                .map(|&b| {
                    prepare_ansatz_from_diagonal(n, &diag, &[g], &[b])?.expectation_diagonal(&diag)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeGrid {
        gamma_axis: gamma_axis.to_vec(),
        beta_axis: beta_axis.to_vec(),
        values,
    })
}

/// Gate counts of the circuit decomposition: per level, `N(N-1)/2` two-qubit
/// phase gates, `N` single-qubit phase gates and `N` mixer rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateCount {
    pub qubits: usize,
    pub level: usize,
    pub per_level: u64,
    pub hadamards: u64,
    pub total: u64,
}

pub fn gate_count(qubits: usize, level: usize) -> Result<GateCount> {
    if qubits == 0 || level == 0 {
        return Err(Error::argument("qubits and level must be at least 1"));
    }
    let n = qubits as u64;
    let p = level as u64;
    Ok(GateCount {
        qubits,
        level,
        per_level: (n + 3) * n / 2,
        hadamards: n,
        total: (n + 5) * n * p / 2,
    })
}

/// Memory of a complex128 state vector versus a dense unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MemoryEstimate {
    pub qubits: usize,
    pub state_bytes: u128,
    pub dense_unitary_bytes: u128,
}

pub fn memory_estimate(qubits: usize) -> Result<MemoryEstimate> {
    if qubits == 0 || qubits > 62 {
        return Err(Error::argument(format!("qubit count must be in 1..=62, got {qubits}")));
    }
    Ok(MemoryEstimate {
        qubits,
        state_bytes: 1u128 << (qubits + 3),
        dense_unitary_bytes: 1u128 << (2 * qubits + 3),
    })
}
