//! Dense state-vector primitives.
//!
//! Basis convention: a bitstring `z = (z_1, ..., z_N)` maps to the index
//! `sum_k z_k * 2^(N-k)`, so qubit 1 is the most significant bit. Qubit `k`
//! (1-based) therefore owns the bit mask `1 << (N - k)`.
//!
//! Gates are applied as structured in-place updates; no `2^N x 2^N` unitary
//! is ever materialised here.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 15;

/// Tolerance on `sum |amp|^2 = 1`.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Normalised amplitudes of an `N`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

pub(crate) fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::argument("qubit count must be at least 1"));
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "qubits",
            got: num_qubits,
            cap: MAX_QUBITS,
            reason: "15-qubit cap of the dense simulator",
        });
    }
    Ok(())
}

impl StateVector {
    /// `|+>^N`, every amplitude `1/sqrt(2^N)`.
    pub fn uniform_superposition(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        let amp = Complex64::new((1.0 / dim as f64).sqrt(), 0.0);
        Ok(Self {
            num_qubits,
            amplitudes: vec![amp; dim],
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::argument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes, checking length and normalisation.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::argument(format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::argument(format!("state is not normalised (norm^2 = {norm})")));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::dimension("fidelity", self.dim(), other.dim()));
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }

    /// `amp_z <- amp_z * exp(-i * gamma * energies[z])`, i.e. `exp(-i gamma H)`
    /// for a diagonal `H`.
    pub fn apply_diagonal_phase(&mut self, energies: &[f64], gamma: f64) -> Result<()> {
        if energies.len() != self.dim() {
            return Err(Error::dimension("diagonal phase", self.dim(), energies.len()));
        }
        for (amp, &e) in self.amplitudes.iter_mut().zip(energies) {
            *amp *= Complex64::from_polar(1.0, -gamma * e);
        }
        Ok(())
    }

    /// `prod_k exp(-i * beta * X_k)` over every qubit.
    pub fn apply_x_rotations(&mut self, beta: f64) {
        let (s, c) = beta.sin_cos();
        let minus_i_sin = Complex64::new(0.0, -s);
        let dim = self.dim();
        for q in 0..self.num_qubits {
            let mask = 1usize << q;
            for i in 0..dim {
                if i & mask != 0 {
                    continue;
                }
                let j = i | mask;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = a * c + b * minus_i_sin;
                self.amplitudes[j] = a * minus_i_sin + b * c;
            }
        }
    }

    /// Exact `sum_z |amp_z|^2 * energies[z]`.
    pub fn expectation_diagonal(&self, energies: &[f64]) -> Result<f64> {
        if energies.len() != self.dim() {
            return Err(Error::dimension("expectation", self.dim(), energies.len()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(energies)
            .map(|(a, e)| a.norm_sqr() * e)
            .sum())
    }

    /// Draws `shots` computational-basis measurements, keyed by basis index.
    pub fn sample_indices(&self, shots: usize, seed: u64) -> Result<BTreeMap<usize, usize>> {
        if shots == 0 {
            return Err(Error::argument("shots must be at least 1"));
        }
        let mut cumulative = Vec::with_capacity(self.dim());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            // first index whose cumulative mass exceeds u; skips zero-probability states
            let idx = cumulative
                .partition_point(|&c| c <= u)
                .min(self.dim() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Like [`sample_indices`](Self::sample_indices) but keyed by bitstring
    /// (`z_1` first).
    pub fn sample_bitstrings(&self, shots: usize, seed: u64) -> Result<BTreeMap<String, usize>> {
        let n = self.num_qubits;
        Ok(self
            .sample_indices(shots, seed)?
            .into_iter()
            .map(|(idx, count)| (index_to_bitstring(idx, n), count))
            .collect())
    }
}

/// Bit `z_k` (1-based `k`) of basis index `index` in an `n`-qubit register.
#[inline]
pub fn bit_of_index(index: usize, n: usize, k: usize) -> u8 {
    ((index >> (n - k)) & 1) as u8
}

pub fn index_to_bits(index: usize, n: usize) -> Vec<u8> {
    (1..=n).map(|k| bit_of_index(index, n, k)).collect()
}

pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

pub fn index_to_bitstring(index: usize, n: usize) -> String {
    index_to_bits(index, n)
        .into_iter()
        .map(|b| if b == 1 { '1' } else { '0' })
        .collect()
}

pub fn bitstring_to_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::argument(format!("invalid bit character {other:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn uniform_superposition_amplitudes() {
        let s1 = StateVector::uniform_superposition(1).unwrap();
        for a in s1.amplitudes() {
            assert_eq!(a.re, std::f64::consts::FRAC_1_SQRT_2);
            assert_eq!(a.im, 0.0);
        }
        let s2 = StateVector::uniform_superposition(2).unwrap();
        assert!(s2.amplitudes().iter().all(|a| *a == Complex64::new(0.5, 0.0)));
        let s3 = StateVector::uniform_superposition(3).unwrap();
        assert_eq!(s3.dim(), 8);
        assert!(s3
            .amplitudes()
            .iter()
            .all(|a| (a.re - 0.35355339059327373).abs() < 1e-15));
    }

    #[test]
    fn uniform_superposition_rejects_out_of_range() {
        assert!(StateVector::uniform_superposition(0).is_err());
        let err = StateVector::uniform_superposition(16).unwrap_err();
        assert!(err.to_string().contains("15"));
    }

    #[test]
    fn phase_identity_and_sign_flip() {
        let mut s = StateVector::uniform_superposition(1).unwrap();
        let before = s.clone();
        s.apply_diagonal_phase(&[-1.0, 1.0], 0.0).unwrap();
        assert_eq!(s, before);

        s.apply_diagonal_phase(&[-1.0, 1.0], PI).unwrap();
        let expected = Complex64::new(-FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitudes()[0], expected, 1e-15));
        assert!(close(s.amplitudes()[1], expected, 1e-15));
    }

    #[test]
    fn phase_preserves_norm() {
        let mut s = random_state(4, 7);
        let energies: Vec<f64> = (0..16).map(|i| (i as f64 * 0.77).sin() * 3.0).collect();
        let before = s.norm_sqr();
        s.apply_diagonal_phase(&energies, 0.37).unwrap();
        assert!((s.norm_sqr() - before).abs() < 1e-12);
    }

    #[test]
    fn phase_length_mismatch() {
        let mut s = StateVector::uniform_superposition(2).unwrap();
        assert!(matches!(
            s.apply_diagonal_phase(&[1.0, 2.0], 0.1),
            Err(Error::Dimension { expected: 4, actual: 2, .. })
        ));
    }

    #[test]
    fn x_rotation_cases() {
        let mut s = StateVector::uniform_superposition(2).unwrap();
        let before = s.clone();
        s.apply_x_rotations(0.0);
        assert_eq!(s, before);

        let mut zero = StateVector::basis_state(1, 0).unwrap();
        zero.apply_x_rotations(PI / 2.0);
        assert!(close(zero.amplitudes()[0], Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(zero.amplitudes()[1], Complex64::new(0.0, -1.0), 1e-15));

        // |+>^2 is an eigenstate of X1 + X2 with eigenvalue 2
        let mut plus = StateVector::uniform_superposition(2).unwrap();
        plus.apply_x_rotations(0.3);
        let expected = Complex64::from_polar(0.5, -0.6);
        for a in plus.amplitudes() {
            assert!(close(*a, expected, 1e-14));
        }
        for p in plus.probabilities() {
            assert!((p - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn x_rotation_acts_on_msb_for_qubit_one() {
        // exp(-i pi/2 X) on every qubit of |00> gives (-i)^2 |11>
        let mut s = StateVector::basis_state(2, 0).unwrap();
        s.apply_x_rotations(PI / 2.0);
        assert!(close(s.amplitudes()[3], Complex64::new(-1.0, 0.0), 1e-14));
    }

    #[test]
    fn expectation_cases() {
        let plus = StateVector::uniform_superposition(1).unwrap();
        assert!(plus.expectation_diagonal(&[-1.0, 1.0]).unwrap().abs() < 1e-15);
        let zero = StateVector::basis_state(1, 0).unwrap();
        assert_eq!(zero.expectation_diagonal(&[3.5, -2.0]).unwrap(), 3.5);
        let plus2 = StateVector::uniform_superposition(2).unwrap();
        assert!((plus2.expectation_diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 2.5).abs() < 1e-15);
        assert!(plus2.expectation_diagonal(&[1.0]).is_err());
    }

    #[test]
    fn sampling_deterministic_state() {
        let zero = StateVector::basis_state(1, 0).unwrap();
        let counts = zero.sample_bitstrings(100, 9).unwrap();
        assert_eq!(counts.len(), 1);
        assert_eq!(counts["0"], 100);
        assert!(zero.sample_bitstrings(0, 1).is_err());
    }

    #[test]
    fn sampling_fair_coin_and_determinism() {
        let plus = StateVector::uniform_superposition(1).unwrap();
        let shots = 1_000_000;
        let a = plus.sample_bitstrings(shots, 42).unwrap();
        let b = plus.sample_bitstrings(shots, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values().sum::<usize>(), shots);
        for v in a.values() {
            let f = *v as f64 / shots as f64;
            assert!((f - 0.5).abs() < 0.002, "frequency {f}");
        }
    }

    #[test]
    fn sampling_chi_square() {
        let s = random_state(3, 11);
        let shots = 1_000_000;
        let counts = s.sample_indices(shots, 5).unwrap();
        let probs = s.probabilities();
        let chi2: f64 = probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let expected = p * shots as f64;
                let observed = *counts.get(&i).unwrap_or(&0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        // 7 degrees of freedom; the 0.999 quantile is 24.32
        assert!(chi2 < 24.32, "chi2 = {chi2}");
    }

    #[test]
    fn bit_helpers() {
        assert_eq!(index_to_bits(0b110, 3), vec![1, 1, 0]);
        assert_eq!(bits_to_index(&[1, 1, 0]), 6);
        assert_eq!(index_to_bitstring(1, 3), "001");
        assert_eq!(bitstring_to_bits("01").unwrap(), vec![0, 1]);
        assert!(bitstring_to_bits("0x").is_err());
    }

    proptest! {
        #[test]
        fn norm_conserved_under_gate_sequences(
            n in 1usize..=6,
            angles in proptest::collection::vec((-7.0f64..7.0, -4.0f64..4.0), 1..6),
            seed in 0u64..1000,
        ) {
            let mut s = random_state(n, seed);
            let energies: Vec<f64> = (0..1 << n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            for (g, b) in angles {
                s.apply_diagonal_phase(&energies, g).unwrap();
                s.apply_x_rotations(b);
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
        }

        #[test]
        fn phase_composition(g1 in -5.0f64..5.0, g2 in -5.0f64..5.0, seed in 0u64..1000) {
            let energies = [0.3, -1.7, 2.2, 0.0, 4.1, -0.6, 1.1, -3.3];
            let mut a = random_state(3, seed);
            let mut b = a.clone();
            a.apply_diagonal_phase(&energies, g1).unwrap();
            a.apply_diagonal_phase(&energies, g2).unwrap();
            b.apply_diagonal_phase(&energies, g1 + g2).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn rotation_periodicity(n in 1usize..=5, beta in -4.0f64..4.0, seed in 0u64..1000) {
            let mut a = random_state(n, seed);
            let mut b = a.clone();
            a.apply_x_rotations(beta);
            b.apply_x_rotations(beta + PI);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((x * sign - y).norm() < 1e-12);
            }
            for (p, q) in a.probabilities().iter().zip(b.probabilities()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }
}
