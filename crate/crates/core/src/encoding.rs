//! BPSK MIMO maximum-likelihood detection as an Ising problem.
//!
//! With `A = H^T H`, `b = H^T y` and `c = y^T y`, the residual
//! `||y - H s||^2` over `s in {-1,+1}^N` expands to
//!
//! ```text
//! 2 sum_{l>k} A_kl s_k s_l - 2 sum_k b_k s_k + c + sum_k A_kk
//! ```
//!
//! which is the *full* form kept here. The *simplified* form halves the
//! couplings and fields and drops the constant; it has the same minimiser.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{bit_of_index, check_qubits};

/// Received-signal model `y = H s + n` with real entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    channel: DMatrix<f64>,
    received: DVector<f64>,
    noise_variance: f64,
    true_symbols: Option<SpinAssignment>,
}

impl ChannelInstance {
    pub fn new(
        channel: DMatrix<f64>,
        received: DVector<f64>,
        noise_variance: f64,
        true_symbols: Option<SpinAssignment>,
    ) -> Result<Self> {
        if channel.nrows() == 0 || channel.ncols() == 0 {
            return Err(Error::argument("channel: matrix must be at least 1x1"));
        }
        if received.len() != channel.nrows() {
            return Err(Error::argument(format!(
                "received: length {} does not match the {} channel rows",
                received.len(),
                channel.nrows()
            )));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::argument(format!(
                "noise_variance: must be positive and finite, got {noise_variance}"
            )));
        }
        if let Some(s) = &true_symbols {
            if s.len() != channel.ncols() {
                return Err(Error::argument(format!(
                    "true_symbols: length {} does not match the {} channel columns",
                    s.len(),
                    channel.ncols()
                )));
            }
        }
        if channel.iter().chain(received.iter()).any(|x| !x.is_finite()) {
            return Err(Error::argument("channel/received: entries must be finite"));
        }
        Ok(Self {
            channel,
            received,
            noise_variance,
            true_symbols,
        })
    }

    /// Builds `y = H s + n` from a known transmission.
    pub fn from_transmission(
        channel: DMatrix<f64>,
        symbols: SpinAssignment,
        noise: DVector<f64>,
        noise_variance: f64,
    ) -> Result<Self> {
        if symbols.len() != channel.ncols() {
            return Err(Error::dimension("transmitted symbols", channel.ncols(), symbols.len()));
        }
        if noise.len() != channel.nrows() {
            return Err(Error::dimension("noise vector", channel.nrows(), noise.len()));
        }
        let received = &channel * symbols.to_vector() + noise;
        Self::new(channel, received, noise_variance, Some(symbols))
    }

    pub fn channel(&self) -> &DMatrix<f64> {
        &self.channel
    }

    pub fn received(&self) -> &DVector<f64> {
        &self.received
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn true_symbols(&self) -> Option<&SpinAssignment> {
        self.true_symbols.as_ref()
    }

    pub fn num_tx(&self) -> usize {
        self.channel.ncols()
    }

    pub fn num_rx(&self) -> usize {
        self.channel.nrows()
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let raw: InstanceRecord = serde_json::from_str(text).map_err(|e| e.to_string())?;
        raw.try_into().map_err(|e: Error| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceRecord::from(self)).expect("instance serialises")
    }
}

/// On-disk JSON layout of a [`ChannelInstance`]; `channel` is row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub channel: Vec<Vec<f64>>,
    pub received: Vec<f64>,
    pub noise_variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_symbols: Option<Vec<f64>>,
}

impl TryFrom<InstanceRecord> for ChannelInstance {
    type Error = Error;

    fn try_from(raw: InstanceRecord) -> Result<Self> {
        let rows = raw.channel.len();
        let cols = raw.channel.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::argument("channel: must be a non-empty array of non-empty rows"));
        }
        if let Some(i) = raw.channel.iter().position(|r| r.len() != cols) {
            return Err(Error::argument(format!(
                "channel: row {i} has {} entries, expected {cols}",
                raw.channel[i].len()
            )));
        }
        let channel = DMatrix::from_row_iterator(rows, cols, raw.channel.into_iter().flatten());
        let received = DVector::from_vec(raw.received);
        let true_symbols = raw
            .true_symbols
            .map(|s| {
                SpinAssignment::from_f64(&s)
                    .map_err(|_| Error::argument("true_symbols: entries must be exactly -1 or +1"))
            })
            .transpose()?;
        ChannelInstance::new(channel, received, raw.noise_variance, true_symbols)
    }
}

impl From<&ChannelInstance> for InstanceRecord {
    fn from(inst: &ChannelInstance) -> Self {
        InstanceRecord {
            channel: inst
                .channel
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            received: inst.received.iter().copied().collect(),
            noise_variance: inst.noise_variance,
            true_symbols: inst
                .true_symbols
                .as_ref()
                .map(|s| s.as_slice().iter().map(|&x| x as f64).collect()),
        }
    }
}

/// A BPSK symbol vector, entries exactly `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinAssignment(Vec<i8>);

impl SpinAssignment {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::argument(format!("spin must be -1 or +1, got {bad}")));
        }
        Ok(Self(symbols))
    }

    fn from_f64(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| {
                if v == 1.0 {
                    Ok(1)
                } else if v == -1.0 {
                    Ok(-1)
                } else {
                    Err(Error::argument(format!("spin must be -1 or +1, got {v}")))
                }
            })
            .collect::<Result<Vec<i8>>>()
            .map(Self)
    }

    /// Spins `g(z_k) = 1 - 2 z_k` of basis index `index`.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self(
            (1..=n)
                .map(|k| 1 - 2 * bit_of_index(index, n, k) as i8)
                .collect(),
        )
    }

    /// Basis index of the bitstring `z` with `g(z) = self`.
    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | usize::from(s == -1))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.0.iter().map(|&s| u8::from(s == -1)).collect()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|&s| s as f64))
    }

    /// Number of positions where the two assignments differ.
    pub fn hamming_distance(&self, other: &SpinAssignment) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl TryFrom<Vec<i8>> for SpinAssignment {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinAssignment> for Vec<i8> {
    fn from(s: SpinAssignment) -> Self {
        s.0
    }
}

/// `g(z) = 1 - 2z`.
pub fn spin_of_bit(z: u8) -> Result<i8> {
    match z {
        0 => Ok(1),
        1 => Ok(-1),
        _ => Err(Error::argument(format!("bit must be 0 or 1, got {z}"))),
    }
}

/// Inverse of [`spin_of_bit`].
pub fn bit_of_spin(s: i8) -> Result<u8> {
    match s {
        1 => Ok(0),
        -1 => Ok(1),
        _ => Err(Error::argument(format!("spin must be -1 or +1, got {s}"))),
    }
}

/// Scaling of an [`IsingModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `2A`, `2b` and the constant `c + tr A`; energies equal the residual.
    Full,
    /// `A`, `b`, no constant.
    Simplified,
}

/// One `J * Z_k Z_l` term, `k < l`, 0-based qubit indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub k: usize,
    pub l: usize,
    pub value: f64,
}

/// Diagonal Hamiltonian `sum_{l>k} J_kl Z_k Z_l - sum_k h_k Z_k + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    num_spins: usize,
    couplings: Vec<Coupling>,
    fields: Vec<f64>,
    offset: f64,
    form: Form,
}

impl IsingModel {
    /// Builds a model from its coefficients. Couplings must have `k < l`.
    pub fn new(
        num_spins: usize,
        couplings: Vec<Coupling>,
        fields: Vec<f64>,
        offset: f64,
        form: Form,
    ) -> Result<Self> {
        if num_spins == 0 {
            return Err(Error::argument("model needs at least one spin"));
        }
        if fields.len() != num_spins {
            return Err(Error::dimension("ising fields", num_spins, fields.len()));
        }
        for c in &couplings {
            if c.k >= c.l || c.l >= num_spins {
                return Err(Error::argument(format!(
                    "coupling ({}, {}) must satisfy k < l < {num_spins}",
                    c.k, c.l
                )));
            }
        }
        Ok(Self {
            num_spins,
            couplings,
            fields,
            offset,
            form,
        })
    }

    /// Builds the model from `A`, `b` and `c`.
    pub fn from_quadratic(a: &DMatrix<f64>, b: &DVector<f64>, c: f64, form: Form) -> Self {
        let n = a.ncols();
        let weight = match form {
            Form::Full => 2.0,
            Form::Simplified => 1.0,
        };
        let mut couplings = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for k in 0..n {
            for l in (k + 1)..n {
                couplings.push(Coupling {
                    k,
                    l,
                    value: weight * a[(k, l)],
                });
            }
        }
        let fields = b.iter().map(|v| weight * v).collect();
        let offset = match form {
            Form::Full => c + a.trace(),
            Form::Simplified => 0.0,
        };
        Self {
            num_spins: n,
            couplings,
            fields,
            offset,
            form,
        }
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    /// Coupling `J_kl` for `k < l` (0-based), zero if absent.
    pub fn coupling(&self, k: usize, l: usize) -> f64 {
        self.couplings
            .iter()
            .filter(|c| c.k == k && c.l == l)
            .map(|c| c.value)
            .sum()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn form(&self) -> Form {
        self.form
    }

    fn energy_of_spins(&self, spins: &[f64]) -> f64 {
        let pair: f64 = self
            .couplings
            .iter()
            .map(|c| c.value * spins[c.k] * spins[c.l])
            .sum();
        let field: f64 = self.fields.iter().zip(spins).map(|(h, s)| h * s).sum();
        pair - field + self.offset
    }

    /// Energy of bitstring `z` (`z_1` first).
    pub fn energy(&self, z: &[u8]) -> Result<f64> {
        if z.len() != self.num_spins {
            return Err(Error::dimension("bitstring", self.num_spins, z.len()));
        }
        let spins = z
            .iter()
            .map(|&b| spin_of_bit(b).map(f64::from))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.energy_of_spins(&spins))
    }

    pub fn energy_of_index(&self, index: usize) -> f64 {
        let n = self.num_spins;
        let spins: Vec<f64> = (1..=n)
            .map(|k| 1.0 - 2.0 * bit_of_index(index, n, k) as f64)
            .collect();
        self.energy_of_spins(&spins)
    }

    /// All `2^N` energies in basis-index order.
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        check_qubits(self.num_spins)?;
        Ok((0..1usize << self.num_spins)
            .map(|i| self.energy_of_index(i))
            .collect())
    }
}

/// Index of the smallest entry; the lowest index wins ties.
pub fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| {
            if v < bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Ising model of the ML problem for `instance`.
pub fn encode_mimo(instance: &ChannelInstance, form: Form) -> IsingModel {
    let h = instance.channel();
    let y = instance.received();
    let a = h.transpose() * h;
    let b = h.transpose() * y;
    let c = y.dot(y);
    IsingModel::from_quadratic(&a, &b, c, form)
}

/// Places per-user channel blocks side by side, `y = sum_k H_k s_k + n`.
pub fn stack_users(user_channels: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let first = user_channels
        .first()
        .ok_or_else(|| Error::argument("at least one user channel is required"))?;
    let rows = first.nrows();
    for h in user_channels {
        if h.nrows() != rows {
            return Err(Error::dimension("user channel rows", rows, h.nrows()));
        }
        if h.ncols() == 0 {
            return Err(Error::argument("user channel must have at least one column"));
        }
    }
    let cols: usize = user_channels.iter().map(|h| h.ncols()).sum();
    let mut stacked = DMatrix::zeros(rows, cols);
    let mut col = 0;
    for h in user_channels {
        stacked.columns_mut(col, h.ncols()).copy_from(h);
        col += h.ncols();
    }
    Ok(stacked)
}

/// Multi-user ML problem with one spin per user antenna.
pub fn encode_multiuser(
    user_channels: &[DMatrix<f64>],
    received: &DVector<f64>,
    form: Form,
) -> Result<IsingModel> {
    let stacked = stack_users(user_channels)?;
    if received.len() != stacked.nrows() {
        return Err(Error::dimension("received vector", stacked.nrows(), received.len()));
    }
    let a = stacked.transpose() * &stacked;
    let b = stacked.transpose() * received;
    Ok(IsingModel::from_quadratic(&a, &b, received.dot(received), form))
}

/// `||y - H s||^2`.
pub fn classical_objective(instance: &ChannelInstance, s: &SpinAssignment) -> Result<f64> {
    if s.len() != instance.num_tx() {
        return Err(Error::dimension("spin assignment", instance.num_tx(), s.len()));
    }
    let residual = instance.received() - instance.channel() * s.to_vector();
    Ok(residual.norm_squared())
}
