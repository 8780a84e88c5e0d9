//! Brute-force ML, linear MMSE and QAOA-based ML detectors, plus the
//! Monte-Carlo bit-error-rate harness.
//!
//! SNR convention: channel entries and symbols have unit power and the
//! noise variance is `sigma^2 = M_t * 10^(-SNR_dB / 10)`, so the average
//! per-receive-antenna SNR `E||Hs||^2 / (M_r sigma^2)` equals
//! `10^(SNR_dB / 10)`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode_mimo, ChannelInstance, Form, SpinAssignment};
use crate::error::{Error, Result};
use crate::optimize::{minimize_fp, OptimizationResult, OptimizerConfig};
use crate::qaoa::prepare_ansatz;
use crate::statevector::MAX_QUBITS;

/// Largest transmit dimension searched exhaustively.
pub const MAX_CML_TX: usize = 20;

pub const DEFAULT_SHOTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Cml,
    Mmse,
    Qml,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::Cml, DetectorKind::Mmse, DetectorKind::Qml];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Cml => "cml",
            DetectorKind::Mmse => "mmse",
            DetectorKind::Qml => "qml",
        }
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cml" => Ok(DetectorKind::Cml),
            "mmse" | "cmmse" => Ok(DetectorKind::Mmse),
            "qml" => Ok(DetectorKind::Qml),
            other => Err(Error::argument(format!("unknown detector {other:?}"))),
        }
    }
}

/// Default QAOA level for an `n`-antenna system: 1 up to two antennas, 3 above.
pub fn default_level(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        3
    }
}

/// Exhaustive `argmin ||y - H s||^2`; ties go to the lowest basis index.
pub fn detect_cml(instance: &ChannelInstance) -> Result<SpinAssignment> {
    let n = instance.num_tx();
    if n > MAX_CML_TX {
        return Err(Error::SizeCap {
            what: "transmit antennas",
            got: n,
            cap: MAX_CML_TX,
            reason: "exhaustive ML search",
        });
    }
    let h = instance.channel();
    let y = instance.received();
    let mut residual = DVector::zeros(instance.num_rx());
    let mut best = (0usize, f64::INFINITY);
    for index in 0..1usize << n {
        residual.copy_from(y);
        for k in 0..n {
            // spin of qubit k+1 is -1 when its (MSB-first) bit is set
            let s = if (index >> (n - 1 - k)) & 1 == 1 { -1.0 } else { 1.0 };
            residual.axpy(-s, &h.column(k), 1.0);
        }
        let value = residual.norm_squared();
        if value < best.1 {
            best = (index, value);
        }
    }
    Ok(SpinAssignment::from_index(best.0, n))
}

/// `sign((H^T H + sigma^2 I)^{-1} H^T y)` with `sign(0) = +1`.
pub fn detect_mmse(instance: &ChannelInstance) -> Result<SpinAssignment> {
    let h = instance.channel();
    let n = instance.num_tx();
    let gram = h.transpose() * h + DMatrix::identity(n, n) * instance.noise_variance();
    let rhs = h.transpose() * instance.received();
    let estimate = gram
        .cholesky()
        .ok_or_else(|| Error::argument("regularised Gram matrix is not positive definite"))?
        .solve(&rhs);
    SpinAssignment::new(estimate.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect())
}

/// Everything produced by one QAOA detection.
#[derive(Debug, Clone)]
pub struct QmlOutcome {
    pub symbols: SpinAssignment,
    /// Basis index -> shot count.
    pub samples: BTreeMap<usize, usize>,
    pub optimization: OptimizationResult,
}

/// QAOA detection: optimise angles on the simplified model, sample the
/// optimised ansatz and keep the sampled bitstring of lowest residual
/// (lowest index on ties).
pub fn detect_qml_detailed(
    instance: &ChannelInstance,
    level: usize,
    optimizer: &OptimizerConfig,
    shots: usize,
    seed: u64,
) -> Result<QmlOutcome> {
    let n = instance.num_tx();
    if n > MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "transmit antennas",
            got: n,
            cap: MAX_QUBITS,
            reason: "15-qubit cap of the dense simulator",
        });
    }
    let simplified = encode_mimo(instance, Form::Simplified);
    let full = encode_mimo(instance, Form::Full);
    let optimization = minimize_fp(&simplified, level, optimizer)?;
    let state = prepare_ansatz(&simplified, &optimization.best_params)?;
    let samples = state.sample_indices(shots, seed)?;
    let (best_index, _) = samples
        .keys()
        .map(|&i| (i, full.energy_of_index(i)))
        .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(QmlOutcome {
        symbols: SpinAssignment::from_index(best_index, n),
        samples,
        optimization,
    })
}

pub fn detect_qml(
    instance: &ChannelInstance,
    level: usize,
    optimizer: &OptimizerConfig,
    shots: usize,
    seed: u64,
) -> Result<SpinAssignment> {
    detect_qml_detailed(instance, level, optimizer, shots, seed).map(|o| o.symbols)
}

/// Monte-Carlo campaign settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialConfig {
    pub system_size: usize,
    pub snr_db_list: Vec<f64>,
    pub trials_per_snr: usize,
    pub qaoa_level: usize,
    pub shots: usize,
    pub optimizer: OptimizerConfig,
    pub master_seed: u64,
}

impl TrialConfig {
    pub fn new(system_size: usize, snr_db_list: Vec<f64>, trials_per_snr: usize, master_seed: u64) -> Self {
        let level = default_level(system_size);
        Self {
            system_size,
            snr_db_list,
            trials_per_snr,
            qaoa_level: level,
            shots: DEFAULT_SHOTS,
            optimizer: OptimizerConfig::for_level(level),
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.system_size == 0 || self.system_size > MAX_QUBITS {
            return Err(Error::argument(format!(
                "system size must be in 1..={MAX_QUBITS}, got {}",
                self.system_size
            )));
        }
        if self.trials_per_snr == 0 {
            return Err(Error::argument("trials per SNR must be at least 1"));
        }
        if self.trials_per_snr > u32::MAX as usize || self.snr_db_list.len() > u32::MAX as usize {
            return Err(Error::argument("trial and SNR counts must fit in 32 bits"));
        }
        if self.shots == 0 {
            return Err(Error::argument("shots must be at least 1"));
        }
        if self.qaoa_level == 0 {
            return Err(Error::argument("QAOA level must be at least 1"));
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::argument("SNR values must be finite"));
        }
        self.optimizer.validate()
    }

    /// Noise variance for `snr_db` under the module's SNR convention.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        self.system_size as f64 * 10f64.powf(-snr_db / 10.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `master XOR splitmix64(snr_index << 32 | trial_index)`.
///
/// splitmix64 is a bijection, so distinct `(snr, trial)` pairs below `2^32`
/// always get distinct seeds.
pub fn trial_seed(master: u64, snr_index: usize, trial_index: usize) -> u64 {
    let key = ((snr_index as u64) << 32) | (trial_index as u64 & 0xFFFF_FFFF);
    master ^ splitmix64(key)
}

/// One random transmission: `H_ij ~ N(0,1)`, uniform BPSK symbols and
/// `n ~ N(0, sigma^2)`. Returns the instance and an RNG for the detectors.
pub fn generate_trial(config: &TrialConfig, snr_index: usize, trial_index: usize) -> Result<(ChannelInstance, ChaCha8Rng)> {
    let n = config.system_size;
    let snr = *config
        .snr_db_list
        .get(snr_index)
        .ok_or_else(|| Error::argument(format!("SNR index {snr_index} out of range")))?;
    let sigma2 = config.noise_variance(snr);
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config.master_seed, snr_index, trial_index));
    let channel = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let symbols = SpinAssignment::new((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())?;
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::argument(e.to_string()))?;
    let noise = DVector::from_fn(n, |_, _| normal.sample(&mut rng));
    let instance = ChannelInstance::from_transmission(channel, symbols, noise, sigma2)?;
    Ok((instance, rng))
}

fn run_detector(
    kind: DetectorKind,
    instance: &ChannelInstance,
    config: &TrialConfig,
    rng: &mut ChaCha8Rng,
) -> Result<SpinAssignment> {
    match kind {
        DetectorKind::Cml => detect_cml(instance),
        DetectorKind::Mmse => detect_mmse(instance),
        DetectorKind::Qml => {
            let mut optimizer = config.optimizer.clone();
            optimizer.seed = rng.random();
            let shot_seed = rng.random();
            detect_qml(instance, config.qaoa_level, &optimizer, config.shots, shot_seed)
        }
    }
}

/// Error counts of one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRow {
    pub snr_db: f64,
    pub noise_variance: f64,
    pub trials: usize,
    pub bits: usize,
    pub errors: BTreeMap<DetectorKind, usize>,
    pub ber: BTreeMap<DetectorKind, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerReport {
    pub config: TrialConfig,
    pub detectors: Vec<DetectorKind>,
    pub rows: Vec<BerRow>,
}

impl BerReport {
    /// `snr_db,trials,ber_cml,ber_mmse,ber_qml`; detectors not run leave
    /// their cell empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,trials,ber_cml,ber_mmse,ber_qml\n");
        for row in &self.rows {
            out.push_str(&format!("{},{}", row.snr_db, row.trials));
            for kind in DetectorKind::ALL {
                out.push(',');
                if let Some(b) = row.ber.get(&kind) {
                    out.push_str(&format!("{b}"));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Runs every detector on `trials_per_snr` random transmissions per SNR.
///
/// Trials run in parallel; each draws from its own seed, so the report does
/// not depend on scheduling.
pub fn run_ber(config: &TrialConfig, detectors: &[DetectorKind]) -> Result<BerReport> {
    config.validate()?;
    let mut kinds = detectors.to_vec();
    kinds.sort();
    kinds.dedup();
    if kinds.is_empty() {
        return Err(Error::argument("at least one detector is required"));
    }

    let mut rows = Vec::with_capacity(config.snr_db_list.len());
    for (snr_index, &snr_db) in config.snr_db_list.iter().enumerate() {
        let per_trial = (0..config.trials_per_snr)
            .into_par_iter()
            .map(|trial| {
                let (instance, mut rng) = generate_trial(config, snr_index, trial)?;
                let truth = instance.true_symbols().expect("generated with symbols").clone();
                kinds
                    .iter()
                    .map(|&k| {
                        run_detector(k, &instance, config, &mut rng).map(|s| s.hamming_distance(&truth))
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let bits = config.trials_per_snr * config.system_size;
        let mut errors = BTreeMap::new();
        let mut ber = BTreeMap::new();
        for (i, &kind) in kinds.iter().enumerate() {
            let count: usize = per_trial.iter().map(|e| e[i]).sum();
            errors.insert(kind, count);
            ber.insert(kind, count as f64 / bits as f64);
        }
        rows.push(BerRow {
            snr_db,
            noise_variance: config.noise_variance(snr_db),
            trials: config.trials_per_snr,
            bits,
            errors,
            ber,
        });
    }
    Ok(BerReport {
        config: config.clone(),
        detectors: kinds,
        rows,
    })
}

/// Wilson score interval at 95% for `errors` out of `bits`.
pub fn binomial_ci95(errors: usize, bits: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054_f64;
    let n = bits as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
