//! Symbol mapping, AWGN, Eb/N0 bookkeeping and prior-aware LLR demapping.
//!
//! Eb/N0 convention: Eb/N0 = SNR/(2R) for complex AWGN at coderate R, so
//! σ² = P/(2·R·10^(Eb/N0 dB / 10)) with P the mean symbol energy. P defaults
//! to the nominal uniform-constellation energy (10 for QAM-16), which keeps
//! the scaling factor literal; both shaped and uniform systems then transmit
//! at the same mean power and see the same σ² at a grid point.
//!
//! LLR sign convention matches the decoder: positive means bit 0.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constellation::{compensated_sum, ShapedConstellation};
use crate::{Error, Result};

const LLR_CLIP: f64 = 40.0;

/// Inverts Eb/N0 (dB) into the per-complex-symbol noise variance:
/// σ² = P / (2·R·10^(ebno_db/10)).
pub fn ebno_to_sigma2(ebno_db: f64, rate: f64, power: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::NoiseSpec(format!("coderate {rate} outside (0, 1]")));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::NoiseSpec(format!("power {power} must be positive")));
    }
    if !ebno_db.is_finite() {
        return Err(Error::NoiseSpec(format!("Eb/N0 {ebno_db} dB is not finite")));
    }
    Ok(power / (2.0 * rate * 10f64.powf(ebno_db / 10.0)))
}

/// One operating point: Eb/N0, coderate, mean symbol power and the implied σ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub ebno_db: f64,
    pub rate: f64,
    pub power: f64,
    pub sigma2: f64,
}

impl NoiseSpec {
    pub fn new(ebno_db: f64, rate: f64, power: f64) -> Result<Self> {
        let sigma2 = ebno_to_sigma2(ebno_db, rate, power)?;
        Ok(Self {
            ebno_db,
            rate,
            power,
            sigma2,
        })
    }
}

/// Maps a label bit stream (chunks of log2(m) bits, label order) to scaled
/// constellation points μ·x.
pub fn modulate(label_bits: &[u8], cons: &ShapedConstellation) -> Result<Vec<Complex64>> {
    let bits = cons.bits_per_symbol();
    if !label_bits.len().is_multiple_of(bits) {
        return Err(Error::LengthMismatch {
            what: "label bit stream (must be a multiple of bits/symbol)",
            expected: (label_bits.len() / bits + 1) * bits,
            actual: label_bits.len(),
        });
    }
    let mu = cons.scale();
    let mut out = Vec::with_capacity(label_bits.len() / bits);
    for chunk in label_bits.chunks(bits) {
        let mut label = 0usize;
        for &b in chunk {
            if b > 1 {
                return Err(Error::InvalidDistribution(format!(
                    "label bit {b} is not binary"
                )));
            }
            label = (label << 1) | b as usize;
        }
        out.push(cons.points()[label] * mu);
    }
    Ok(out)
}

/// Adds circular complex Gaussian noise of total variance σ² (σ²/2 per real
/// dimension). Deterministic per RNG state.
pub fn awgn<R: Rng>(symbols: &[Complex64], sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    assert!(sigma2 > 0.0, "sigma2 must be positive");
    let s = (sigma2 / 2.0).sqrt();
    symbols
        .iter()
        .map(|x| {
            let nr: f64 = rng.sample(StandardNormal);
            let ni: f64 = rng.sample(StandardNormal);
            Complex64::new(x.re + s * nr, x.im + s * ni)
        })
        .collect()
}

/// Demapper kernel: exact log-MAP or the max-log approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemapKernel {
    #[default]
    Exact,
    MaxLog,
}

/// Bitwise soft demapper taking the transmit-side point distribution and
/// scale into account.
///
/// For bit position j:
/// `LLR_j = ln Σ_{x: b_j(x)=0} p(x)·exp(−|y−μx|²/σ²) − ln Σ_{x: b_j(x)=1} …`,
/// evaluated with log-sum-exp stabilization and clipped to ±40 (unless built
/// with `clip = None`, which the oracle-equivalence tests use). Zero prior
/// mass on one side of a bit saturates at the clip value.
#[derive(Debug, Clone)]
pub struct Demapper {
    scaled_points: Vec<Complex64>,
    log_priors: Vec<f64>,
    /// point indices with bit 0 / bit 1, per label position
    partitions: Vec<(Vec<usize>, Vec<usize>)>,
    kernel: DemapKernel,
    clip: Option<f64>,
    bits: usize,
}

impl Demapper {
    pub fn new(cons: &ShapedConstellation, kernel: DemapKernel) -> Self {
        Self::with_clip(cons, kernel, Some(LLR_CLIP))
    }

    pub fn with_clip(cons: &ShapedConstellation, kernel: DemapKernel, clip: Option<f64>) -> Self {
        let mu = cons.scale();
        let scaled_points = cons.points().iter().map(|x| x * mu).collect();
        let log_priors = cons
            .probabilities()
            .iter()
            .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
            .collect();
        let bits = cons.bits_per_symbol();
        let partitions = (0..bits)
            .map(|j| {
                let mut zero = Vec::new();
                let mut one = Vec::new();
                for (i, label) in cons.labels().iter().enumerate() {
                    if label[j] == 0 {
                        zero.push(i);
                    } else {
                        one.push(i);
                    }
                }
                (zero, one)
            })
            .collect();
        Self {
            scaled_points,
            log_priors,
            partitions,
            kernel,
            clip,
            bits,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    /// LLRs for one received symbol, label-bit order.
    pub fn llrs(&self, y: Complex64, sigma2: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.bits);
        self.llrs_into(y, sigma2, &mut out);
        out
    }

    /// Appends this symbol's LLRs onto `out`; the allocation-free hot path.
    pub fn llrs_into(&self, y: Complex64, sigma2: f64, out: &mut Vec<f64>) {
        // per-point metric ln p(x) − |y−μx|²/σ², on the stack (m ≤ 256)
        let mut buf = [0.0f64; 256];
        let metrics = &mut buf[..self.scaled_points.len()];
        for ((m, x), lp) in metrics
            .iter_mut()
            .zip(&self.scaled_points)
            .zip(&self.log_priors)
        {
            *m = lp - (y - x).norm_sqr() / sigma2;
        }
        let metrics = &metrics[..];
        for (zero, one) in &self.partitions {
            let (a, b) = match self.kernel {
                DemapKernel::Exact => (
                    log_sum_exp(zero.iter().map(|&i| metrics[i])),
                    log_sum_exp(one.iter().map(|&i| metrics[i])),
                ),
                DemapKernel::MaxLog => (
                    zero.iter().map(|&i| metrics[i]).fold(f64::NEG_INFINITY, f64::max),
                    one.iter().map(|&i| metrics[i]).fold(f64::NEG_INFINITY, f64::max),
                ),
            };
            let llr = a - b;
            out.push(match self.clip {
                Some(c) => {
                    if llr.is_nan() {
                        0.0
                    } else {
                        llr.clamp(-c, c)
                    }
                }
                None => llr,
            });
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = compensated_sum(values.map(|v| (v - max).exp()));
    max + sum.ln()
}
