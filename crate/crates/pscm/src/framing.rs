//! Code-block arrangement and the scatter/gather between FEC codewords and
//! mapper-ready symbol labels.
//!
//! A block multiplexes `N_A` shaped amplitude bits with `N_S` uniform sign
//! bits (sign-information plus LDPC parity). The integer system
//!
//! ```text
//! N_A = n_sh · N_fr^sh,   C·N_S = N_A,   N_S + N_A = N_fr^FEC · n_FEC
//! ```
//!
//! is solved exactly with least-common-multiple arithmetic (C = 1 for QAM-16,
//! 2 for QAM-64, 3 for QAM-256). Within a block, amplitude bits fill the
//! amplitude label positions frame by frame in shaper-output order, and the
//! (optionally interleaved) sign stream `sign-info ‖ parity` fills the sign
//! positions — a fixed, documented serialization so byte-exact golden tests
//! are possible.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constellation::ShapedConstellation;
use crate::{Error, Result};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// The solved integer arrangement of one code block, together with the
/// shaper/sign split of the information bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBlockLayout {
    /// Constellation system constant: 1 for QAM-16, 2 for QAM-64, 3 for QAM-256.
    pub c: usize,
    /// Shaper output bits per frame.
    pub n_sh: usize,
    /// Shaper input bits per frame.
    pub k_sh: usize,
    /// Sign-information bits per frame.
    pub k_sign: usize,
    /// Parity bits per frame; k_sign + Δn equals the per-frame sign budget
    /// (n_sh for C = 1).
    pub delta_n: usize,
    /// FEC codeword length (before the N_fr^FEC multiplier).
    pub n_fec: usize,
    /// Frame multipliers.
    pub n_fr_sh: usize,
    pub n_fr_fec: usize,
    /// Total amplitude / sign bits in the block.
    pub n_a: usize,
    pub n_s: usize,
}

/// Rate bookkeeping for a layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSplit {
    pub r_sh: f64,
    pub r_fec: f64,
    /// Overall information rate (k_sh + k_sign)/n_FEC per frame.
    pub r: f64,
}

impl CodeBlockLayout {
    /// Solves the integer block arrangement for `(n_sh, n_fec, c)` with the
    /// minimal frame multipliers, then fixes the information split
    /// `(k_sh, k_sign)` per shaper frame.
    pub fn solve(n_sh: usize, n_fec: usize, c: usize, k_sh: usize, k_sign: usize) -> Result<Self> {
        if n_sh == 0 || n_fec == 0 {
            return Err(Error::Layout("n_sh and n_fec must be ≥ 1".into()));
        }
        if !(1..=3).contains(&c) {
            return Err(Error::Layout(format!("C = {c} outside {{1, 2, 3}}")));
        }
        // N_fr^sh · n_sh·(C+1) = N_fr^FEC · n_fec·C, minimal positive solution
        let a = (n_sh as u64) * (c as u64 + 1);
        let b = (n_fec as u64) * (c as u64);
        let l = lcm(a, b);
        let mut n_fr_sh = (l / a) as usize;
        let mut n_fr_fec = (l / b) as usize;
        let mut n_a = n_sh * n_fr_sh;
        if !n_a.is_multiple_of(c) {
            return Err(Error::Layout(format!(
                "C = {c} does not divide N_A = {n_a} for any multiplier"
            )));
        }
        let mut n_s = n_a / c;
        // every symbol carries exactly two sign bits, so N_S must be even for
        // the block to tile into symbols; the smallest implementable solution
        // doubles both multipliers
        if !n_s.is_multiple_of(2) {
            n_fr_sh *= 2;
            n_fr_fec *= 2;
            n_a *= 2;
            n_s *= 2;
        }
        debug_assert_eq!(n_s + n_a, n_fr_fec * n_fec);

        if !n_s.is_multiple_of(n_fr_sh) {
            return Err(Error::Layout(format!(
                "per-frame sign budget N_S/N_fr^sh = {n_s}/{n_fr_sh} is not integral"
            )));
        }
        let sign_budget = n_s / n_fr_sh; // = n_sh/C; equals n_sh when C = 1
        if k_sh == 0 || k_sh > n_sh {
            return Err(Error::Layout(format!("k_sh = {k_sh} outside 1..={n_sh}")));
        }
        if k_sign > sign_budget {
            return Err(Error::Layout(format!(
                "k_sign = {k_sign} exceeds the per-frame sign budget {sign_budget}"
            )));
        }
        let delta_n = sign_budget - k_sign;
        Ok(Self {
            c,
            n_sh,
            k_sh,
            k_sign,
            delta_n,
            n_fec,
            n_fr_sh,
            n_fr_fec,
            n_a,
            n_s,
        })
    }

    /// Total codeword length N_S + N_A = N_fr^FEC · n_FEC.
    pub fn codeword_len(&self) -> usize {
        self.n_s + self.n_a
    }

    pub fn k_sh_total(&self) -> usize {
        self.k_sh * self.n_fr_sh
    }

    pub fn k_sign_total(&self) -> usize {
        self.k_sign * self.n_fr_sh
    }

    pub fn parity_total(&self) -> usize {
        self.delta_n * self.n_fr_sh
    }

    /// FEC information length: all amplitude bits plus the sign-information bits.
    pub fn fec_info_len(&self) -> usize {
        self.n_a + self.k_sign_total()
    }

    /// Transmitted information bits per block (pre-shaper + sign info).
    pub fn info_len(&self) -> usize {
        self.k_sh_total() + self.k_sign_total()
    }

    /// QAM symbols per block.
    pub fn symbols(&self) -> usize {
        self.n_s / 2
    }

    /// Shaper, FEC and overall rates. The overall rate comes from
    /// first-principles bit counting, R = (k_sh + k_sign)/n_FEC per frame;
    /// for C = 1 it is cross-checked against the equivalent closed form
    /// ½(R_sh + 2·R_FEC − 1) to 1e-12.
    pub fn rates(&self) -> Result<RateSplit> {
        let r_sh = self.k_sh as f64 / self.n_sh as f64;
        let r_fec = self.fec_info_len() as f64 / self.codeword_len() as f64;
        let r = self.info_len() as f64 / self.codeword_len() as f64;
        if self.c == 1 {
            let paper_form = 0.5 * (r_sh + 2.0 * r_fec - 1.0);
            if (paper_form - r).abs() > 1e-12 {
                return Err(Error::Layout(format!(
                    "rate identity violated: ½(R_sh + 2R_FEC − 1) = {paper_form} vs (k_sh+k_sign)/n_FEC = {r}"
                )));
            }
        }
        Ok(RateSplit { r_sh, r_fec, r })
    }

    /// Key=value description used by the CLI `describe` output.
    pub fn describe(&self) -> String {
        let rates = self.rates();
        let mut out = String::new();
        for (k, v) in [
            ("c", self.c),
            ("n_sh", self.n_sh),
            ("k_sh", self.k_sh),
            ("k_sign", self.k_sign),
            ("delta_n", self.delta_n),
            ("n_fec", self.n_fec),
            ("n_fr_sh", self.n_fr_sh),
            ("n_fr_fec", self.n_fr_fec),
            ("n_a", self.n_a),
            ("n_s", self.n_s),
            ("codeword_len", self.codeword_len()),
            ("info_len", self.info_len()),
            ("symbols", self.symbols()),
        ] {
            out.push_str(&format!("{k}={v}\n"));
        }
        if let Ok(r) = rates {
            out.push_str(&format!("r_sh={}\nr_fec={}\nr={}\n", r.r_sh, r.r_fec, r.r));
        }
        out
    }
}

/// Bit interleaver for the sign stream: identity, or a seeded pseudo-random
/// permutation (deterministic per seed and length).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleaver {
    Identity,
    Seeded(u64),
}

impl Interleaver {
    /// The permutation applied as `out[i] = in[perm[i]]`.
    pub fn permutation(&self, len: usize) -> Vec<usize> {
        match self {
            Interleaver::Identity => (0..len).collect(),
            Interleaver::Seeded(seed) => {
                let mut perm: Vec<usize> = (0..len).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                perm.shuffle(&mut rng);
                perm
            }
        }
    }

    pub fn scatter<T: Copy>(&self, input: &[T]) -> Vec<T> {
        let perm = self.permutation(input.len());
        perm.iter().map(|&p| input[p]).collect()
    }

    pub fn gather<T: Copy + Default>(&self, input: &[T]) -> Vec<T> {
        let perm = self.permutation(input.len());
        let mut out = vec![T::default(); input.len()];
        for (i, &p) in perm.iter().enumerate() {
            out[p] = input[i];
        }
        out
    }
}

/// The three bit streams recovered from a symbol-label stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Disassembled<T> {
    pub amp_bits: Vec<T>,
    pub sign_info: Vec<T>,
    pub parity: Vec<T>,
}

impl<T> Disassembled<T> {
    /// The deinterleaved sign stream `sign-info ‖ parity`.
    pub fn sign_stream(self) -> Vec<T> {
        let mut s = self.sign_info;
        s.extend(self.parity);
        s
    }
}

/// Scatters the per-block streams onto symbol labels: amplitude bits fill the
/// amplitude label positions in shaper-output order, and the interleaved
/// `sign_info ‖ parity` stream fills the sign positions. Generic over the
/// element type so the same layout logic serves bits and LLRs.
pub fn assemble<T: Copy + Default>(
    amp_bits: &[T],
    sign_info: &[T],
    parity: &[T],
    layout: &CodeBlockLayout,
    cons: &ShapedConstellation,
    interleaver: &Interleaver,
) -> Result<Vec<T>> {
    check_geometry(layout, cons)?;
    if amp_bits.len() != layout.n_a {
        return Err(Error::LengthMismatch {
            what: "amplitude bits",
            expected: layout.n_a,
            actual: amp_bits.len(),
        });
    }
    if sign_info.len() + parity.len() != layout.n_s {
        return Err(Error::LengthMismatch {
            what: "sign-info + parity bits",
            expected: layout.n_s,
            actual: sign_info.len() + parity.len(),
        });
    }
    let mut sign_stream = Vec::with_capacity(layout.n_s);
    sign_stream.extend_from_slice(sign_info);
    sign_stream.extend_from_slice(parity);
    let sign_stream = interleaver.scatter(&sign_stream);

    let bits = cons.bits_per_symbol();
    let amp_per_symbol = bits - 2;
    let symbols = layout.symbols();
    let sign_positions = cons.sign_bit_positions();
    let amp_positions = cons.amplitude_bit_positions();

    let mut out = vec![T::default(); symbols * bits];
    for s in 0..symbols {
        for (d, &pos) in sign_positions.iter().enumerate() {
            out[s * bits + pos] = sign_stream[2 * s + d];
        }
        for (t, &pos) in amp_positions.iter().enumerate() {
            out[s * bits + pos] = amp_bits[amp_per_symbol * s + t];
        }
    }
    Ok(out)
}

/// Exact inverse of [`assemble`], including deinterleaving: gathers the
/// amplitude stream and splits the sign stream back into sign-information
/// and parity.
pub fn disassemble<T: Copy + Default>(
    stream: &[T],
    layout: &CodeBlockLayout,
    cons: &ShapedConstellation,
    interleaver: &Interleaver,
) -> Result<Disassembled<T>> {
    check_geometry(layout, cons)?;
    if stream.len() != layout.codeword_len() {
        return Err(Error::LengthMismatch {
            what: "symbol label stream",
            expected: layout.codeword_len(),
            actual: stream.len(),
        });
    }
    let bits = cons.bits_per_symbol();
    let amp_per_symbol = bits - 2;
    let symbols = layout.symbols();
    let sign_positions = cons.sign_bit_positions();
    let amp_positions = cons.amplitude_bit_positions();

    let mut amp_bits = vec![T::default(); layout.n_a];
    let mut sign_stream = vec![T::default(); layout.n_s];
    for s in 0..symbols {
        for (d, &pos) in sign_positions.iter().enumerate() {
            sign_stream[2 * s + d] = stream[s * bits + pos];
        }
        for (t, &pos) in amp_positions.iter().enumerate() {
            amp_bits[amp_per_symbol * s + t] = stream[s * bits + pos];
        }
    }
    let mut sign_stream = interleaver.gather(&sign_stream);
    let parity = sign_stream.split_off(layout.k_sign_total());
    Ok(Disassembled {
        amp_bits,
        sign_info: sign_stream,
        parity,
    })
}

fn check_geometry(layout: &CodeBlockLayout, cons: &ShapedConstellation) -> Result<()> {
    let expected_order = 1usize << (2 * (layout.c + 1));
    if cons.order() != expected_order {
        return Err(Error::Layout(format!(
            "layout C = {} implies QAM-{expected_order}, constellation is QAM-{}",
            layout.c,
            cons.order()
        )));
    }
    Ok(())
}
