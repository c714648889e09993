//! End-to-end Monte Carlo BLER harness.
//!
//! A trial runs the full transmit/receive chain: draw information bits,
//! (shaped mode) split them into shaper input and sign bits, shape the
//! amplitudes, LDPC-encode, scatter onto symbol labels, modulate, add AWGN,
//! demap with the transmit priors, decode, gather, deshape and compare. A
//! block error is any mismatch in the recovered information bits, including
//! `invalid` deshaper results.
//!
//! Determinism contract: every trial owns a ChaCha stream derived from the
//! master seed and its global (point, trial) index, and trials are executed
//! in fixed-size batches whose boundaries do not depend on the worker count.
//! Aggregation is integer addition, so serial and parallel runs of the same
//! seeded config produce identical counts.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{awgn, ebno_to_sigma2, modulate, DemapKernel, Demapper};
use crate::constellation::ShapedConstellation;
use crate::framing::{assemble, disassemble, CodeBlockLayout, Interleaver};
use crate::ldpc::{DecodeConfig, DecodeKernel, ParityCheckCode};
use crate::shaping::{Deshaped, EssCodebook};
use crate::{Error, Result};

/// Wilson 95% interval z-score.
const WILSON_Z: f64 = 1.959963984540054;
/// Stop-condition check granularity; fixed so batch boundaries (and thus the
/// set of trials run) are independent of the worker count.
const BATCH: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapingMode {
    Uniform,
    Shaped,
}

fn default_max_iters() -> usize {
    20
}
fn default_min_block_errors() -> u64 {
    100
}
fn default_max_trials() -> u64 {
    100_000
}
fn default_ldpc_seed() -> u64 {
    1
}
fn default_true() -> bool {
    true
}
fn default_workers() -> usize {
    1
}

/// Full description of one simulation run (JSON-serializable; the `sweep`
/// subcommand reads this from `--config`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub qam_order: usize,
    pub mode: ShapingMode,
    /// Shaper output bits per frame (shaped mode only).
    #[serde(default)]
    pub n_sh: usize,
    /// Shaper input bits per frame (shaped mode only).
    #[serde(default)]
    pub k_sh: usize,
    /// FEC rate; in shaped mode the sign split k_sign is derived from it.
    pub r_fec: f64,
    pub n_fec: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    pub ebno_db_grid: Vec<f64>,
    #[serde(default = "default_min_block_errors")]
    pub min_block_errors: u64,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
    /// Run exactly `max_trials` per point regardless of error count.
    #[serde(default)]
    pub flat_trials: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub demapper: DemapKernel,
    #[serde(default)]
    pub decoder: DecodeKernel,
    #[serde(default = "default_ldpc_seed")]
    pub ldpc_seed: u64,
    #[serde(default = "default_true")]
    pub interleave: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Default output path for the CLI `sweep` subcommand.
    #[serde(default)]
    pub out: Option<std::path::PathBuf>,
}

/// One Monte Carlo sweep point.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BlerRecord {
    pub ebno_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub wall_time_s: f64,
}

/// Sweep output: per-point records plus the interpolated Eb/N0 at 10% BLER
/// (log-linear between the bracketing grid points), when the grid brackets it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<BlerRecord>,
    pub ebno_at_10pct_bler: Option<f64>,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z = WILSON_Z;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// The built transmit/receive chain for one configuration.
pub struct Chain {
    cons: ShapedConstellation,
    code: ParityCheckCode,
    demapper: Demapper,
    decode_cfg: DecodeConfig,
    interleaver: Interleaver,
    shaped: Option<ShapedParts>,
    /// Mean transmit symbol power (nominal uniform energy).
    pub power: f64,
    /// Overall information rate per coded bit.
    pub rate: f64,
    /// Information bits per block.
    pub info_len: usize,
}

struct ShapedParts {
    layout: CodeBlockLayout,
    codebook: EssCodebook,
}

/// Overall rate implied by a config, from layout arithmetic alone (no code
/// or codebook construction). Used by the CLI to refuse mismatched-rate
/// comparisons cheaply.
pub fn planned_rate(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.mode {
        ShapingMode::Uniform => Ok(cfg.r_fec),
        ShapingMode::Shaped => {
            let layout = shaped_layout(cfg)?;
            Ok(layout.rates().map_err(|e| Error::Config(e.to_string()))?.r)
        }
    }
}

fn shaped_layout(cfg: &ExperimentConfig) -> Result<CodeBlockLayout> {
    let c = match cfg.qam_order {
        16 => 1,
        64 => 2,
        256 => 3,
        4 => {
            return Err(Error::Config(
                "QAM-4 has no amplitude bits to shape; use uniform mode".into(),
            ))
        }
        other => return Err(Error::UnsupportedOrder(other)),
    };
    let probe = CodeBlockLayout::solve(cfg.n_sh, cfg.n_fec, c, cfg.k_sh, 0)
        .map_err(|e| Error::Config(e.to_string()))?;
    let cw_len = probe.codeword_len();
    let fec_info_f = cfg.r_fec * cw_len as f64;
    if (fec_info_f - fec_info_f.round()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "r_fec·codeword_len = {fec_info_f} is not integral"
        )));
    }
    let fec_info = fec_info_f.round() as usize;
    if fec_info < probe.n_a {
        return Err(Error::Config(format!(
            "r_fec = {} leaves no room for the {} amplitude bits in {} FEC info bits",
            cfg.r_fec, probe.n_a, fec_info
        )));
    }
    let k_sign_tot = fec_info - probe.n_a;
    if !k_sign_tot.is_multiple_of(probe.n_fr_sh) {
        return Err(Error::Config(format!(
            "derived k_sign total {k_sign_tot} does not split over {} shaper frames",
            probe.n_fr_sh
        )));
    }
    CodeBlockLayout::solve(cfg.n_sh, cfg.n_fec, c, cfg.k_sh, k_sign_tot / probe.n_fr_sh)
        .map_err(|e| Error::Config(e.to_string()))
}

impl Chain {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let uniform = ShapedConstellation::build_qam(cfg.qam_order)?;
        let power = uniform.energy();
        let decode_cfg = DecodeConfig {
            max_iters: cfg.max_iters,
            kernel: cfg.decoder,
            early_exit: true,
        };
        let interleaver = if cfg.interleave {
            Interleaver::Seeded(cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15))
        } else {
            Interleaver::Identity
        };

        match cfg.mode {
            ShapingMode::Uniform => {
                let bits = uniform.bits_per_symbol();
                if !cfg.n_fec.is_multiple_of(bits) {
                    return Err(Error::Config(format!(
                        "n_fec = {} is not a whole number of QAM-{} symbols",
                        cfg.n_fec, cfg.qam_order
                    )));
                }
                let code = ParityCheckCode::peg(cfg.n_fec, cfg.r_fec, cfg.ldpc_seed)
                    .map_err(|e| Error::Config(e.to_string()))?;
                let info_len = code.k();
                let demapper = Demapper::new(&uniform, cfg.demapper);
                Ok(Self {
                    cons: uniform,
                    code,
                    demapper,
                    decode_cfg,
                    interleaver,
                    shaped: None,
                    power,
                    rate: cfg.r_fec,
                    info_len,
                })
            }
            ShapingMode::Shaped => {
                let layout = shaped_layout(cfg)?;
                let c = layout.c;
                let n_symbols = cfg.n_sh / c;
                if n_symbols * c != cfg.n_sh {
                    return Err(Error::Config(format!(
                        "n_sh = {} is not a whole number of {c}-bit amplitude symbols",
                        cfg.n_sh
                    )));
                }
                let codebook = EssCodebook::build(n_symbols, cfg.k_sh, cfg.qam_order)
                    .map_err(|e| Error::Config(e.to_string()))?;
                let amp_probs = codebook.amplitude_probabilities();
                let cons = uniform.with_amplitude_probs(&amp_probs)?;
                let code =
                    ParityCheckCode::peg(layout.codeword_len(), cfg.r_fec, cfg.ldpc_seed)
                        .map_err(|e| Error::Config(e.to_string()))?;
                debug_assert_eq!(code.k(), layout.fec_info_len());
                let rate = layout.rates().map_err(|e| Error::Config(e.to_string()))?.r;
                let info_len = layout.info_len();
                let demapper = Demapper::new(&cons, cfg.demapper);
                Ok(Self {
                    cons,
                    code,
                    demapper,
                    decode_cfg,
                    interleaver,
                    shaped: Some(ShapedParts { layout, codebook }),
                    power,
                    rate,
                    info_len,
                })
            }
        }
    }

    pub fn constellation(&self) -> &ShapedConstellation {
        &self.cons
    }

    pub fn layout(&self) -> Option<&CodeBlockLayout> {
        self.shaped.as_ref().map(|s| &s.layout)
    }

    pub fn codebook(&self) -> Option<&EssCodebook> {
        self.shaped.as_ref().map(|s| &s.codebook)
    }

    /// One end-to-end trial; returns (block_error, information bit errors).
    fn run_trial(&self, sigma2: f64, rng: &mut ChaCha8Rng) -> (bool, u64) {
        match &self.shaped {
            None => self.run_trial_uniform(sigma2, rng),
            Some(parts) => self.run_trial_shaped(parts, sigma2, rng),
        }
    }

    fn run_trial_uniform(&self, sigma2: f64, rng: &mut ChaCha8Rng) -> (bool, u64) {
        let info: Vec<u8> = (0..self.info_len).map(|_| rng.random_range(0..=1)).collect();
        let cw = self.code.encode(&info).expect("length fixed by chain");
        let tx_bits = self.interleaver.scatter(&cw);
        let symbols = modulate(&tx_bits, &self.cons).expect("codeword is whole symbols");
        let received = awgn(&symbols, sigma2, rng);

        let mut llrs = Vec::with_capacity(tx_bits.len());
        for y in received {
            self.demapper.llrs_into(y, sigma2, &mut llrs);
        }
        let cw_llrs = self.interleaver.gather(&llrs);
        let out = self.code.decode(&cw_llrs, &self.decode_cfg).expect("finite LLRs");
        let info_hat = self.code.extract_info(&out.hard);
        let bit_errors = info_hat.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        (bit_errors > 0, bit_errors)
    }

    fn run_trial_shaped(
        &self,
        parts: &ShapedParts,
        sigma2: f64,
        rng: &mut ChaCha8Rng,
    ) -> (bool, u64) {
        let layout = &parts.layout;
        let k_sh_tot = layout.k_sh_total();
        let k_sign_tot = layout.k_sign_total();

        let shaper_bits: Vec<u8> = (0..k_sh_tot).map(|_| rng.random_range(0..=1)).collect();
        let sign_info: Vec<u8> = (0..k_sign_tot).map(|_| rng.random_range(0..=1)).collect();

        let mut amp_bits = Vec::with_capacity(layout.n_a);
        for frame in shaper_bits.chunks(layout.k_sh) {
            amp_bits.extend(parts.codebook.shape(frame).expect("frame length fixed"));
        }

        let mut fec_info = Vec::with_capacity(layout.fec_info_len());
        fec_info.extend_from_slice(&sign_info);
        fec_info.extend_from_slice(&amp_bits);
        let cw = self.code.encode(&fec_info).expect("length fixed by layout");
        let parity = self.code.extract_parity(&cw);

        let tx_bits = assemble(&amp_bits, &sign_info, &parity, layout, &self.cons, &self.interleaver)
            .expect("lengths fixed by layout");
        let symbols = modulate(&tx_bits, &self.cons).expect("block is whole symbols");
        let received = awgn(&symbols, sigma2, rng);

        let mut llrs = Vec::with_capacity(tx_bits.len());
        for y in received {
            self.demapper.llrs_into(y, sigma2, &mut llrs);
        }
        let gathered = disassemble(&llrs, layout, &self.cons, &self.interleaver)
            .expect("lengths fixed by layout");
        let mut info_llrs = gathered.sign_info;
        info_llrs.extend(gathered.amp_bits);
        let cw_llrs = self
            .code
            .scatter_info_parity(&info_llrs, &gathered.parity)
            .expect("lengths fixed by layout");
        let out = self.code.decode(&cw_llrs, &self.decode_cfg).expect("finite LLRs");

        let info_hat = self.code.extract_info(&out.hard);
        let (sign_hat, amp_hat) = info_hat.split_at(k_sign_tot);

        let mut bit_errors = sign_hat
            .iter()
            .zip(&sign_info)
            .filter(|(a, b)| a != b)
            .count() as u64;
        let mut invalid = false;
        for (frame_hat, frame_sent) in amp_hat
            .chunks(layout.n_sh)
            .zip(shaper_bits.chunks(layout.k_sh))
        {
            match parts.codebook.deshape(frame_hat).expect("frame length fixed") {
                Deshaped::Valid(bits) => {
                    bit_errors += bits.iter().zip(frame_sent).filter(|(a, b)| a != b).count() as u64;
                }
                Deshaped::Invalid => {
                    // conservative accounting: the whole frame payload is lost
                    invalid = true;
                    bit_errors += layout.k_sh as u64;
                }
            }
        }
        (invalid || bit_errors > 0, bit_errors)
    }
}

fn trial_rng(seed: u64, point_idx: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point_idx as u64) << 40) | trial);
    rng
}

/// Runs one Eb/N0 point to the stopping rule (`min_block_errors` or
/// `max_trials`, whichever first; `flat_trials` forces the full trial count).
pub fn run_point(cfg: &ExperimentConfig, ebno_db: f64) -> Result<BlerRecord> {
    let chain = Chain::build(cfg)?;
    let point_idx = cfg
        .ebno_db_grid
        .iter()
        .position(|&e| e == ebno_db)
        .unwrap_or(0);
    run_point_on(&chain, cfg, ebno_db, point_idx)
}

fn run_point_on(
    chain: &Chain,
    cfg: &ExperimentConfig,
    ebno_db: f64,
    point_idx: usize,
) -> Result<BlerRecord> {
    let sigma2 = ebno_to_sigma2(ebno_db, chain.rate, chain.power)?;
    let start = Instant::now();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let mut trials = 0u64;
    let mut block_errors = 0u64;
    let mut bit_errors = 0u64;
    while trials < cfg.max_trials {
        if !cfg.flat_trials && block_errors >= cfg.min_block_errors {
            break;
        }
        let batch = BATCH.min(cfg.max_trials - trials);
        let range = trials..trials + batch;
        let (be, bbe) = if cfg.workers > 1 {
            pool.install(|| {
                range
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(cfg.seed, point_idx, t);
                        let (err, bits) = chain.run_trial(sigma2, &mut rng);
                        (err as u64, bits)
                    })
                    .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
            })
        } else {
            range.fold((0u64, 0u64), |acc, t| {
                let mut rng = trial_rng(cfg.seed, point_idx, t);
                let (err, bits) = chain.run_trial(sigma2, &mut rng);
                (acc.0 + err as u64, acc.1 + bits)
            })
        };
        block_errors += be;
        bit_errors += bbe;
        trials += batch;
    }

    let (ci_lo, ci_hi) = wilson_interval(block_errors, trials);
    Ok(BlerRecord {
        ebno_db,
        trials,
        block_errors,
        bler: block_errors as f64 / trials as f64,
        bit_errors,
        ber: bit_errors as f64 / (trials as f64 * chain.info_len as f64),
        ci_lo,
        ci_hi,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs every grid point and interpolates the 10%-BLER crossing.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, |_| {})
}

/// [`run_sweep`] with a per-point progress callback.
pub fn run_sweep_with(
    cfg: &ExperimentConfig,
    mut on_point: impl FnMut(&BlerRecord),
) -> Result<SweepResult> {
    if cfg.ebno_db_grid.is_empty() {
        return Err(Error::Config("ebno_db_grid must be non-empty".into()));
    }
    let chain = Chain::build(cfg)?;
    let mut records = Vec::with_capacity(cfg.ebno_db_grid.len());
    for (i, &ebno) in cfg.ebno_db_grid.iter().enumerate() {
        let rec = run_point_on(&chain, cfg, ebno, i)?;
        on_point(&rec);
        records.push(rec);
    }
    let crossing = interpolate_crossing(&records, 0.1);
    Ok(SweepResult {
        records,
        ebno_at_10pct_bler: crossing,
    })
}

/// Log-linear interpolation of the Eb/N0 where BLER crosses `target`,
/// scanning bracketing pairs in ascending Eb/N0. Zero-BLER points get a
/// half-trial floor so a bracketing pair stays interpolable.
pub fn interpolate_crossing(records: &[BlerRecord], target: f64) -> Option<f64> {
    let mut sorted: Vec<&BlerRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.ebno_db.partial_cmp(&b.ebno_db).unwrap());
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let floor_b = if b.bler > 0.0 {
            b.bler
        } else {
            0.5 / b.trials as f64
        };
        if a.bler >= target && target >= floor_b && a.bler > floor_b {
            let t = (a.bler.ln() - target.ln()) / (a.bler.ln() - floor_b.ln());
            return Some(a.ebno_db + t * (b.ebno_db - a.ebno_db));
        }
        if a.bler == target {
            return Some(a.ebno_db);
        }
    }
    None
}

pub const CSV_HEADER: &str =
    "ebno_db,trials,block_errors,bler,bit_errors,ber,ci_lo,ci_hi,wall_time_s";

/// Renders records as CSV, bit-exact stable column order.
pub fn records_to_csv(records: &[BlerRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.ebno_db,
            r.trials,
            r.block_errors,
            r.bler,
            r.bit_errors,
            r.ber,
            r.ci_lo,
            r.ci_hi,
            r.wall_time_s
        ));
    }
    out
}

/// Parses CSV produced by [`records_to_csv`].
pub fn records_from_csv(text: &str) -> Result<Vec<BlerRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected CSV header: {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Config(format!(
                "CSV line {}: expected 9 fields, got {}",
                i + 2,
                f.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Config(format!("CSV line {}: bad float {s:?}", i + 2)))
        };
        let parse_u = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Config(format!("CSV line {}: bad integer {s:?}", i + 2)))
        };
        records.push(BlerRecord {
            ebno_db: parse_f(f[0])?,
            trials: parse_u(f[1])?,
            block_errors: parse_u(f[2])?,
            bler: parse_f(f[3])?,
            bit_errors: parse_u(f[4])?,
            ber: parse_f(f[5])?,
            ci_lo: parse_f(f[6])?,
            ci_hi: parse_f(f[7])?,
            wall_time_s: parse_f(f[8])?,
        });
    }
    Ok(records)
}

/// Writes the CSV at `path` plus a JSON sidecar (same stem, `.json`)
/// embedding the resolved config and library version.
pub fn write_results(records: &[BlerRecord], path: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let io_err = |e: std::io::Error, p: &Path| Error::Io {
        path: p.display().to_string(),
        source: e,
    };
    std::fs::write(path, records_to_csv(records)).map_err(|e| io_err(e, path))?;
    let sidecar = path.with_extension("json");
    // overall rate in the sidecar: runs are comparable only at matched rate
    let body = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "overall_rate": planned_rate(cfg).ok(),
        "csv": path.file_name().and_then(|n| n.to_str()),
    });
    std::fs::write(&sidecar, serde_json::to_string_pretty(&body).unwrap())
        .map_err(|e| io_err(e, &sidecar))?;
    Ok(())
}

/// Text block for the CLI `describe` subcommand: layout, rates, shaping
/// probabilities and the constellation table.
pub fn describe(cfg: &ExperimentConfig) -> Result<String> {
    let chain = Chain::build(cfg)?;
    let mut out = String::new();
    out.push_str(&format!(
        "mode={}\nqam_order={}\noverall_rate={}\npower={}\n",
        match cfg.mode {
            ShapingMode::Uniform => "uniform",
            ShapingMode::Shaped => "shaped",
        },
        cfg.qam_order,
        chain.rate,
        chain.power
    ));
    if let Some(layout) = chain.layout() {
        out.push('\n');
        out.push_str(&layout.describe());
    }
    if let Some(codebook) = chain.codebook() {
        out.push('\n');
        out.push_str(&codebook.summary_text());
    }
    out.push('\n');
    out.push_str(&chain.constellation().to_table());
    Ok(out)
}

/// ESS probability table over a k_sh grid (the Tables 1–2 reproduction).
/// `n_sh_bits` counts amplitude bits; columns are amplitudes in increasing
/// magnitude.
pub fn shaping_table(order: usize, n_sh_bits: usize, k_list: &[usize]) -> Result<String> {
    let amp_bits = match order {
        16 => 1,
        64 => 2,
        256 => 3,
        other => return Err(Error::UnsupportedOrder(other)),
    };
    if !n_sh_bits.is_multiple_of(amp_bits) {
        return Err(Error::Config(format!(
            "n_sh = {n_sh_bits} amplitude bits is not a whole number of {amp_bits}-bit symbols"
        )));
    }
    let n_symbols = n_sh_bits / amp_bits;
    let mut out = format!("# ESS amplitude probabilities, QAM-{order}, n_sh={n_sh_bits} amplitude bits\n");
    let amps: Vec<usize> = (0..1usize << amp_bits).map(|j| 2 * j + 1).collect();
    out.push_str("k_sh");
    for a in &amps {
        out.push_str(&format!(" p({a})"));
    }
    out.push('\n');
    for &k in k_list {
        let cb = EssCodebook::build(n_symbols, k, order)?;
        let probs = cb.amplitude_probabilities();
        out.push_str(&format!("{k}"));
        for p in probs {
            out.push_str(&format!(" {p:.4}"));
        }
        out.push('\n');
    }
    Ok(out)
}
