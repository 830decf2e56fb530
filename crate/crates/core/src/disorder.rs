//! Long-range-correlated on-site disorder with power-law spectrum S(k) ∝ 1/k^α.
//!
//! A sequence of N field values is synthesized as a sum of K = floor(N/2)
//! cosine modes with spectral weights k^(-α/2) and independent uniform random
//! phases:
//!
//! ```text
//! omega_n = sum_{k=1}^{K} k^(-α/2) cos(2πnk/N + φ_k),   n = 1..N
//! ```
//!
//! α = 0 gives white noise; increasing α strengthens the long-range
//! correlations. Sequences are shifted and rescaled to zero mean and unit
//! (population) variance before use as magnetic fields.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seed-to-phases mapping is part of the stable output contract: the
/// ChaCha8 stream is keyed with `seed_from_u64(seed)` and each phase is the
/// top 53 bits of one `u64` draw, scaled to [0, 2π).
pub const RNG_CONTRACT: &str = "ChaCha8Rng::seed_from_u64(seed); phase_k = 2*pi * (u64 >> 11) / 2^53";

const METADATA_SCHEMA_VERSION: u32 = 1;

/// Parameters of one disorder realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderParams {
    /// Channel length N (number of sites).
    pub n: usize,
    /// Spectral exponent α ≥ 0.
    pub alpha: f64,
    /// Master seed for the phase generator.
    pub seed: u64,
}

impl DisorderParams {
    pub fn new(n: usize, alpha: f64, seed: u64) -> Result<Self> {
        let params = DisorderParams { n, alpha, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "channel length N = {} leaves no Fourier components (need N >= 2)",
                self.n
            )));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(Error::InvalidInput(format!(
                "spectral exponent alpha = {} must be >= 0",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Number of Fourier components K = floor(N/2).
    pub fn num_modes(&self) -> usize {
        self.n / 2
    }
}

/// Random phases φ_k ∈ [0, 2π), one per Fourier component.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    pub phases: Vec<f64>,
}

/// One realization of the on-site fields ω_n (in units of J).
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderSequence {
    pub values: Vec<f64>,
    pub params: DisorderParams,
    pub normalized: bool,
}

/// Draw K = floor(N/2) phases i.i.d. uniform on [0, 2π).
///
/// Deterministic in `params.seed`; see [`RNG_CONTRACT`].
pub fn sample_phases(params: &DisorderParams) -> Result<PhaseVector> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let phases = (0..params.num_modes())
        .map(|_| {
            // 53-bit mantissa draw, exact on every platform
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            TAU * u
        })
        .collect();
    Ok(PhaseVector { phases })
}

/// Evaluate the cosine-sum synthesis for the given phases. The result is
/// unnormalized (`normalized = false`).
pub fn generate_raw(params: &DisorderParams, phases: &PhaseVector) -> Result<DisorderSequence> {
    params.validate()?;
    let k_max = params.num_modes();
    if phases.phases.len() != k_max {
        return Err(Error::InvalidInput(format!(
            "phase vector has {} entries, expected floor(N/2) = {}",
            phases.phases.len(),
            k_max
        )));
    }

    let n = params.n;
    let weights: Vec<f64> = (1..=k_max)
        .map(|k| (k as f64).powf(-params.alpha / 2.0))
        .collect();

    let values = (1..=n)
        .map(|site| {
            let mut acc = 0.0;
            for (k, (&w, &phi)) in weights.iter().zip(&phases.phases).enumerate() {
                // nk mod N keeps the cosine argument in [0, 2π) + φ
                let nk = (site * (k + 1)) % n;
                acc += w * (TAU * nk as f64 / n as f64 + phi).cos();
            }
            acc
        })
        .collect();

    Ok(DisorderSequence {
        values,
        params: *params,
        normalized: false,
    })
}

/// Convenience composition: phases from the seed, then the cosine sum, then
/// normalization. Pure function of (N, α, seed).
pub fn generate(params: &DisorderParams) -> Result<DisorderSequence> {
    let phases = sample_phases(params)?;
    normalize(&generate_raw(params, &phases)?)
}

/// Shift and rescale to zero mean and unit population variance.
///
/// Idempotent; ordering is preserved. Fails with `DegenerateSequence` when
/// the population variance is at or below 1e-24.
pub fn normalize(seq: &DisorderSequence) -> Result<DisorderSequence> {
    let n = seq.values.len() as f64;
    let mean = seq.values.iter().sum::<f64>() / n;
    let variance = seq.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if variance <= 1e-24 {
        return Err(Error::DegenerateSequence { variance });
    }
    let scale = variance.sqrt();
    Ok(DisorderSequence {
        values: seq.values.iter().map(|v| (v - mean) / scale).collect(),
        params: seq.params,
        normalized: true,
    })
}

impl DisorderSequence {
    /// All-zero fields (the noiseless channel).
    pub fn zeros(n: usize) -> Self {
        DisorderSequence {
            values: vec![0.0; n],
            params: DisorderParams { n, alpha: 0.0, seed: 0 },
            normalized: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Write the sequence as CSV (`n,omega`) plus a `.meta.json` sidecar
    /// recording {N, alpha, seed, normalized} and the RNG contract.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "n,omega")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, v)?;
        }
        w.flush()?;

        let meta = serde_json::json!({
            "schema_version": METADATA_SCHEMA_VERSION,
            "N": self.params.n,
            "alpha": self.params.alpha,
            "seed": self.params.seed,
            "normalized": self.normalized,
            "rng": RNG_CONTRACT,
        });
        let sidecar = sidecar_path(path);
        let mut w = BufWriter::new(File::create(sidecar)?);
        serde_json::to_writer_pretty(&mut w, &meta)
            .map_err(|e| Error::MalformedFile { file: "metadata".into(), detail: e.to_string() })?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

fn sidecar_path(csv: &Path) -> std::path::PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    csv.with_file_name(name)
}
