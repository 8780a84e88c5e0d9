//! Spectrum of the interpolation `(1 - tau) H_B + tau H_f` with
//! `H_B = sum_k X_k`, and first-order Trotterised adiabatic evolution.
//!
//! `H_B` and its negation are unitarily equivalent through `Z^{(x)N}`, which
//! also fixes the diagonal `H_f`, so both signs give the same spectrum. The
//! spectrum path uses `+sum X_k`. The evolution path drives with `-sum X_k`,
//! whose ground state is the starting state `|+...+>`.

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::SymmetricMatrix;
use crate::encoding::{argmin, Form, IsingModel};
use crate::error::{Error, Result};
use crate::statevector::StateVector;

/// Largest register for dense spectral analysis (`2^12 = 4096`).
pub const MAX_ANALYSIS_QUBITS: usize = 12;

/// Grid size used when the caller does not choose one.
pub const DEFAULT_GRID_POINTS: usize = 201;

fn check_analysis_model(model: &IsingModel) -> Result<()> {
    if model.form() != Form::Full {
        return Err(Error::argument("adiabatic analysis expects the full-form model"));
    }
    if model.num_spins() > MAX_ANALYSIS_QUBITS {
        return Err(Error::SizeCap {
            what: "qubits",
            got: model.num_spins(),
            cap: MAX_ANALYSIS_QUBITS,
            reason: "dense spectral analysis",
        });
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::argument(format!("tau must lie in [0, 1], got {tau}")));
    }
    Ok(())
}

fn interpolate(diag: &[f64], tau: f64) -> Result<SymmetricMatrix> {
    let mix = 1.0 - tau;
    SymmetricMatrix::from_upper_fn(diag.len(), |i, j| {
        if i == j {
            tau * diag[i]
        } else if (i ^ j).count_ones() == 1 {
            mix
        } else {
            0.0
        }
    })
}

/// Dense `(1 - tau) sum_k X_k + tau diag(H_f)`.
pub fn interpolated_hamiltonian(model: &IsingModel, tau: f64) -> Result<SymmetricMatrix> {
    check_analysis_model(model)?;
    check_tau(tau)?;
    interpolate(&model.diagonal()?, tau)
}

/// Ascending eigenvalues of the interpolation on a uniform tau grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTrace {
    pub tau_grid: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    pub min_gap: f64,
    pub gap_location: f64,
}

impl SpectrumTrace {
    pub fn gaps(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|ev| ev[1] - ev[0]).collect()
    }

    /// `tau,lambda_0,...,lambda_{d-1}` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let dim = self.eigenvalues.first().map_or(0, Vec::len);
        let mut out = String::from("tau");
        for i in 0..dim {
            out.push_str(&format!(",lambda_{i}"));
        }
        out.push('\n');
        for (tau, row) in self.tau_grid.iter().zip(&self.eigenvalues) {
            out.push_str(&format!("{tau:.16e}"));
            for v in row {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Eigenvalues of the interpolation at `grid_points` uniformly spaced taus.
///
/// The minimum gap is read off the grid without interpolation.
pub fn spectrum_trace(model: &IsingModel, grid_points: usize) -> Result<SpectrumTrace> {
    check_analysis_model(model)?;
    if grid_points < 2 {
        return Err(Error::argument("spectrum grid needs at least 2 points"));
    }
    let diag = model.diagonal()?;
    let last = (grid_points - 1) as f64;
    let tau_grid: Vec<f64> = (0..grid_points).map(|i| i as f64 / last).collect();
    let eigenvalues = tau_grid
        .par_iter()
        .map(|&tau| interpolate(&diag, tau).map(|m| m.eigen().values))
        .collect::<Result<Vec<_>>>()?;

    let (min_gap, gap_location) = tau_grid
        .iter()
        .zip(&eigenvalues)
        .map(|(&tau, ev)| (ev[1] - ev[0], tau))
        .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best });

    Ok(SpectrumTrace {
        tau_grid,
        eigenvalues,
        min_gap: min_gap.max(0.0),
        gap_location,
    })
}

/// Eigenvalues `(a + c) tau -+ sqrt(1 - 2 tau + (1 + 4 b^2) tau^2)` of the
/// single-qubit interpolation.
pub fn single_qubit_spectrum_closed_form(a: f64, b: f64, c: f64, tau: f64) -> Result<(f64, f64)> {
    check_tau(tau)?;
    let centre = (a + c) * tau;
    let radius = (1.0 - 2.0 * tau + (1.0 + 4.0 * b * b) * tau * tau).sqrt();
    Ok((centre - radius, centre + radius))
}

/// Adiabatic runtime scale `xi / g^2`.
pub fn runtime_bound(spectrum: &SpectrumTrace, xi: f64) -> Result<f64> {
    runtime_bound_for_gap(spectrum.min_gap, xi)
}

pub fn runtime_bound_for_gap(gap: f64, xi: f64) -> Result<f64> {
    if gap <= 0.0 {
        return Err(Error::DegenerateGap);
    }
    Ok(xi / (gap * gap))
}

/// Output of [`trotter_evolve`].
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    /// `|<z*|psi(T)>|^2` with `z*` the lowest-index minimiser of `H_f`.
    pub ground_overlap: f64,
    pub ground_index: usize,
    pub total_time: f64,
    pub slices: usize,
    pub trotter_substeps: usize,
}

/// Evolves `|+...+>` for time `total_time` under the interpolating
/// Hamiltonian, using `slices` piecewise-constant steps sampled at the slice
/// midpoints `tau_j = (j - 1/2)/p`, each split into `substeps` first-order
/// Trotter steps (phase first, then mixer).
pub fn trotter_evolve(
    model: &IsingModel,
    total_time: f64,
    slices: usize,
    substeps: usize,
) -> Result<EvolutionResult> {
    check_analysis_model(model)?;
    if slices == 0 || substeps == 0 {
        return Err(Error::argument("slices and substeps must be at least 1"));
    }
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(Error::argument(format!(
            "total time must be finite and non-negative, got {total_time}"
        )));
    }
    let diag = model.diagonal()?;
    let mut state = StateVector::uniform_superposition(model.num_spins())?;
    let dt = total_time / slices as f64 / substeps as f64;
    for j in 1..=slices {
        let tau = (j as f64 - 0.5) / slices as f64;
        for _ in 0..substeps {
            state.apply_diagonal_phase(&diag, tau * dt)?;
            // exp(-i (1 - tau) dt (-sum X)) = exp(+i (1 - tau) dt sum X)
            state.apply_x_rotations(-(1.0 - tau) * dt);
        }
    }
    let ground_index = argmin(&diag);
    let ground_overlap = state.amplitudes()[ground_index].norm_sqr();
    Ok(EvolutionResult {
        final_state: state,
        ground_overlap,
        ground_index,
        total_time,
        slices,
        trotter_substeps: substeps,
    })
}
