//! Quantum-approximate-optimisation toolkit for BPSK MIMO maximum-likelihood
//! detection.
//!
//! The pipeline encodes `min ||y - H s||^2` as a diagonal Ising Hamiltonian
//! ([`encoding`]), studies the spectrum of its adiabatic interpolation with
//! the transverse field ([`adiabatic`]), evaluates level-p QAOA exactly on a
//! dense state vector ([`statevector`], [`qaoa`]), tunes the angles with a
//! derivative-free multistart search ([`optimize`]) and benchmarks the
//! resulting detector against brute-force ML and linear MMSE ([`detect`]).

pub mod adiabatic;
pub mod cli;
pub mod detect;
pub mod eigen;
pub mod encoding;
pub mod error;
pub mod fixtures;
pub mod optimize;
pub mod qaoa;
pub mod statevector;

pub use error::{Error, Result};
