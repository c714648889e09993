//! Sparse binary parity-check codes: construction, alist I/O, systematic
//! encoding and iterative belief-propagation decoding on LLRs.
//!
//! The built-in construction is a quasi-regular column-weight-3 code grown by
//! progressive edge growth (PEG), deterministic per seed, with girth ≥ 6
//! wherever the BFS can avoid short cycles. A systematic encoder is derived
//! from H by Gauss-Jordan elimination over GF(2): the pivot columns carry
//! parity, every other column carries an information bit in order.
//!
//! LLR sign convention, used consistently with the demapper: positive means
//! bit 0 is more likely; a nonpositive LLR hard-decides to bit 1. LLRs are
//! clipped to ±40 on entry and messages are clamped to the same range.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const LLR_CLIP: f64 = 40.0;

/// Check-node kernel for [`ParityCheckCode::decode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeKernel {
    /// Exact tanh-product sum-product updates.
    #[default]
    SumProduct,
    /// Min-sum with scaling factor 0.75.
    MinSum,
}

/// Decoding knobs; flooding schedule, early exit on parity satisfaction.
#[derive(Debug, Clone, Copy)]
pub struct DecodeConfig {
    pub max_iters: usize,
    pub kernel: DecodeKernel,
    pub early_exit: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            max_iters: 20,
            kernel: DecodeKernel::SumProduct,
            early_exit: true,
        }
    }
}

/// Decoder output: hard decisions, whether H·ĉᵀ = 0 was reached, the
/// iteration count used, and the final posterior LLRs.
#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub hard: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
    pub posteriors: Vec<f64>,
}

/// A binary parity-check code with a derived systematic encoder.
#[derive(Debug, Clone)]
pub struct ParityCheckCode {
    n: usize,
    m: usize,
    /// H rows as sorted column indices.
    rows: Vec<Vec<usize>>,
    /// Columns carrying information bits, ascending.
    systematic_cols: Vec<usize>,
    /// parity_cols[r] is the pivot column solved by reduced row r.
    parity_cols: Vec<usize>,
    /// Reduced rows restricted to systematic columns, bit-packed over the
    /// info index space: parity r = ⊕ info bits selected by parity_gen[r].
    parity_gen: Vec<Vec<u64>>,
    // flattened Tanner graph for decoding
    check_offsets: Vec<usize>,
    edge_var: Vec<usize>,
    var_offsets: Vec<usize>,
    var_edge_ids: Vec<usize>,
}

impl ParityCheckCode {
    /// Builds a quasi-regular LDPC code of length `n_fec` at exactly the
    /// requested rate via seeded progressive edge growth (column weight 3),
    /// re-drawing if Gaussian elimination finds H rank-deficient.
    pub fn peg(n_fec: usize, rate: f64, seed: u64) -> Result<Self> {
        if n_fec == 0 {
            return Err(Error::CodeConstruction("n_fec must be ≥ 1".into()));
        }
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::CodeConstruction(format!(
                "rate {rate} outside (0, 1)"
            )));
        }
        let k_f = n_fec as f64 * rate;
        if (k_f - k_f.round()).abs() > 1e-9 {
            return Err(Error::CodeConstruction(format!(
                "n_fec·rate = {k_f} is not integral"
            )));
        }
        let k = k_f.round() as usize;
        let m = n_fec - k;
        if m == 0 || k == 0 {
            return Err(Error::CodeConstruction(
                "degenerate code: zero parity or zero information bits".into(),
            ));
        }
        let col_weight = 3usize.min(m);
        const ATTEMPTS: u64 = 32;
        for attempt in 0..ATTEMPTS {
            let rows = peg_rows(n_fec, m, col_weight, seed.wrapping_add(attempt));
            match Self::from_rows(rows, n_fec) {
                Ok(code) => return Ok(code),
                Err(_) if attempt + 1 < ATTEMPTS => continue,
                Err(e) => return Err(e),
            }
        }
        unreachable!()
    }

    /// Builds the code from explicit check rows (column indices), deriving
    /// the systematic encoder; fails if H is rank-deficient over GF(2).
    pub fn from_rows(rows: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let m = rows.len();
        if m == 0 || m >= n {
            return Err(Error::CodeConstruction(format!(
                "need 0 < checks < bits, got {m} checks over {n} bits"
            )));
        }
        let mut rows = rows;
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            if row.iter().any(|&c| c >= n) {
                return Err(Error::CodeConstruction("column index out of range".into()));
            }
        }

        // Gauss-Jordan over GF(2) on a packed copy, pivots chosen rightmost
        // so parity tends to occupy the tail columns.
        let words = n.div_ceil(64);
        let mut mat: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| {
                let mut w = vec![0u64; words];
                for &c in row {
                    w[c / 64] |= 1u64 << (c % 64);
                }
                w
            })
            .collect();
        let mut parity_cols = Vec::with_capacity(m);
        for r in 0..m {
            let src = (r..m).find(|&r2| mat[r2].iter().any(|&w| w != 0));
            let Some(src) = src else {
                return Err(Error::CodeConstruction(format!(
                    "H is rank-deficient: rank {r} < {m}"
                )));
            };
            mat.swap(r, src);
            let p = highest_set_bit(&mat[r]).expect("nonzero row");
            parity_cols.push(p);
            let pivot_row = mat[r].clone();
            for (r2, row) in mat.iter_mut().enumerate() {
                if r2 != r && (row[p / 64] >> (p % 64)) & 1 == 1 {
                    for (w, pw) in row.iter_mut().zip(&pivot_row) {
                        *w ^= pw;
                    }
                }
            }
        }

        let mut is_parity = vec![false; n];
        for &p in &parity_cols {
            is_parity[p] = true;
        }
        let systematic_cols: Vec<usize> = (0..n).filter(|&c| !is_parity[c]).collect();
        let mut sys_index = vec![usize::MAX; n];
        for (i, &c) in systematic_cols.iter().enumerate() {
            sys_index[c] = i;
        }
        let k = systematic_cols.len();
        let gen_words = k.div_ceil(64).max(1);
        let parity_gen: Vec<Vec<u64>> = (0..m)
            .map(|r| {
                let mut g = vec![0u64; gen_words];
                for &c in &systematic_cols {
                    if (mat[r][c / 64] >> (c % 64)) & 1 == 1 {
                        let i = sys_index[c];
                        g[i / 64] |= 1u64 << (i % 64);
                    }
                }
                g
            })
            .collect();

        // flattened Tanner graph
        let mut check_offsets = Vec::with_capacity(m + 1);
        let mut edge_var = Vec::new();
        check_offsets.push(0);
        for row in &rows {
            edge_var.extend_from_slice(row);
            check_offsets.push(edge_var.len());
        }
        let mut var_degree = vec![0usize; n];
        for &v in &edge_var {
            var_degree[v] += 1;
        }
        let mut var_offsets = Vec::with_capacity(n + 1);
        var_offsets.push(0);
        for v in 0..n {
            var_offsets.push(var_offsets[v] + var_degree[v]);
        }
        let mut cursor = var_offsets.clone();
        let mut var_edge_ids = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edge_ids[cursor[v]] = e;
            cursor[v] += 1;
        }

        Ok(Self {
            n,
            m,
            rows,
            systematic_cols,
            parity_cols,
            parity_gen,
            check_offsets,
            edge_var,
            var_offsets,
            var_edge_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Information length k = n − rank(H).
    pub fn k(&self) -> usize {
        self.systematic_cols.len()
    }

    pub fn checks(&self) -> usize {
        self.m
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn systematic_cols(&self) -> &[usize] {
        &self.systematic_cols
    }

    pub fn parity_cols(&self) -> &[usize] {
        &self.parity_cols
    }

    /// H·cᵀ = 0 over GF(2)?
    pub fn check(&self, bits: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ bits[c]) == 0)
    }

    /// Systematic encoding: info bits land on the systematic columns in
    /// order, parity fills the pivot columns.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::LengthMismatch {
                what: "encoder information bits",
                expected: self.k(),
                actual: info.len(),
            });
        }
        let gen_words = self.k().div_ceil(64).max(1);
        let mut packed = vec![0u64; gen_words];
        for (i, &b) in info.iter().enumerate() {
            debug_assert!(b <= 1);
            packed[i / 64] |= (b as u64) << (i % 64);
        }
        let mut cw = vec![0u8; self.n];
        for (i, &c) in self.systematic_cols.iter().enumerate() {
            cw[c] = info[i];
        }
        for (r, gen) in self.parity_gen.iter().enumerate() {
            let ones: u32 = gen
                .iter()
                .zip(&packed)
                .map(|(g, w)| (g & w).count_ones())
                .sum();
            cw[self.parity_cols[r]] = (ones & 1) as u8;
        }
        debug_assert!(self.check(&cw));
        Ok(cw)
    }

    /// Information bits of a codeword (systematic columns in order).
    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.systematic_cols.iter().map(|&c| codeword[c]).collect()
    }

    /// Parity bits of a codeword (pivot columns in row order).
    pub fn extract_parity(&self, codeword: &[u8]) -> Vec<u8> {
        self.parity_cols.iter().map(|&c| codeword[c]).collect()
    }

    /// Places per-info and per-parity values into codeword order; the generic
    /// dual of [`Self::extract_info`]/[`Self::extract_parity`], used to put
    /// demapped LLRs in front of the decoder.
    pub fn scatter_info_parity<T: Copy + Default>(&self, info: &[T], parity: &[T]) -> Result<Vec<T>> {
        if info.len() != self.k() {
            return Err(Error::LengthMismatch {
                what: "info values",
                expected: self.k(),
                actual: info.len(),
            });
        }
        if parity.len() != self.m {
            return Err(Error::LengthMismatch {
                what: "parity values",
                expected: self.m,
                actual: parity.len(),
            });
        }
        let mut out = vec![T::default(); self.n];
        for (i, &c) in self.systematic_cols.iter().enumerate() {
            out[c] = info[i];
        }
        for (r, &c) in self.parity_cols.iter().enumerate() {
            out[c] = parity[r];
        }
        Ok(out)
    }

    /// Flooding belief propagation. Checks the channel hard decisions first,
    /// so a valid codeword is returned untouched with `iterations = 0`.
    pub fn decode(&self, llrs: &[f64], cfg: &DecodeConfig) -> Result<DecodeOutput> {
        if llrs.len() != self.n {
            return Err(Error::LengthMismatch {
                what: "decoder LLRs",
                expected: self.n,
                actual: llrs.len(),
            });
        }
        if let Some(bad) = llrs.iter().position(|l| !l.is_finite()) {
            return Err(Error::NonFiniteLlr(bad));
        }
        assert!(cfg.max_iters >= 1, "max_iters must be ≥ 1");

        let channel: Vec<f64> = llrs.iter().map(|l| l.clamp(-LLR_CLIP, LLR_CLIP)).collect();
        let hard_of = |post: &[f64]| -> Vec<u8> {
            post.iter().map(|&t| if t > 0.0 { 0u8 } else { 1u8 }).collect()
        };

        let mut hard = hard_of(&channel);
        if cfg.early_exit && self.check(&hard) {
            return Ok(DecodeOutput {
                hard,
                converged: true,
                iterations: 0,
                posteriors: channel,
            });
        }

        let n_edges = self.edge_var.len();
        let mut q = vec![0.0f64; n_edges]; // var → check
        let mut r = vec![0.0f64; n_edges]; // check → var
        for (e, &v) in self.edge_var.iter().enumerate() {
            q[e] = channel[v];
        }
        let max_deg = (0..self.m)
            .map(|c| self.check_offsets[c + 1] - self.check_offsets[c])
            .max()
            .unwrap_or(0);
        let mut tanhs = vec![0.0f64; max_deg];
        let mut suffixes = vec![0.0f64; max_deg];
        let mut posteriors = channel.clone();

        let mut converged = false;
        let mut iterations = cfg.max_iters;
        for it in 1..=cfg.max_iters {
            match cfg.kernel {
                DecodeKernel::SumProduct => {
                    for c in 0..self.m {
                        let lo = self.check_offsets[c];
                        let hi = self.check_offsets[c + 1];
                        let deg = hi - lo;
                        for (i, e) in (lo..hi).enumerate() {
                            tanhs[i] = (q[e] / 2.0).tanh();
                        }
                        // exclusive products via prefix/suffix, no division
                        let mut acc = 1.0f64;
                        for i in (0..deg).rev() {
                            suffixes[i] = acc;
                            acc *= tanhs[i];
                        }
                        let mut prefix = 1.0f64;
                        for (i, e) in (lo..hi).enumerate() {
                            let excl = (prefix * suffixes[i]).clamp(
                                -0.999_999_999_999_999_9,
                                0.999_999_999_999_999_9,
                            );
                            prefix *= tanhs[i];
                            r[e] = (2.0 * excl.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
                        }
                    }
                }
                DecodeKernel::MinSum => {
                    const SCALE: f64 = 0.75;
                    for c in 0..self.m {
                        let lo = self.check_offsets[c];
                        let hi = self.check_offsets[c + 1];
                        let mut sign = 1.0f64;
                        let mut min1 = f64::INFINITY;
                        let mut min2 = f64::INFINITY;
                        let mut argmin = lo;
                        for e in lo..hi {
                            let mag = q[e].abs();
                            if q[e] < 0.0 {
                                sign = -sign;
                            }
                            if mag < min1 {
                                min2 = min1;
                                min1 = mag;
                                argmin = e;
                            } else if mag < min2 {
                                min2 = mag;
                            }
                        }
                        for e in lo..hi {
                            let mag = if e == argmin { min2 } else { min1 };
                            let s = if q[e] < 0.0 { -sign } else { sign };
                            r[e] = (SCALE * s * mag).clamp(-LLR_CLIP, LLR_CLIP);
                        }
                    }
                }
            }

            for v in 0..self.n {
                let lo = self.var_offsets[v];
                let hi = self.var_offsets[v + 1];
                let mut total = channel[v];
                for i in lo..hi {
                    total += r[self.var_edge_ids[i]];
                }
                posteriors[v] = total;
                for i in lo..hi {
                    let e = self.var_edge_ids[i];
                    q[e] = (total - r[e]).clamp(-LLR_CLIP, LLR_CLIP);
                }
            }

            hard = hard_of(&posteriors);
            if self.check(&hard) {
                converged = true;
                iterations = it;
                if cfg.early_exit {
                    break;
                }
            } else {
                converged = false;
                iterations = it;
            }
        }

        Ok(DecodeOutput {
            hard,
            converged,
            iterations,
            posteriors,
        })
    }

    /// Serializes H in MacKay's alist format, entries padded with zeros to
    /// the maximal degree as the format prescribes.
    pub fn to_alist(&self) -> String {
        let mut col_lists: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                col_lists[c].push(r);
            }
        }
        let max_col = col_lists.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.n, self.m));
        out.push_str(&format!("{max_col} {max_row}\n"));
        let join = |it: Vec<String>| it.join(" ");
        out.push_str(&join(col_lists.iter().map(|l| l.len().to_string()).collect()));
        out.push('\n');
        out.push_str(&join(self.rows.iter().map(|l| l.len().to_string()).collect()));
        out.push('\n');
        for list in &col_lists {
            let mut entries: Vec<String> = list.iter().map(|&r| (r + 1).to_string()).collect();
            entries.resize(max_col, "0".to_string());
            out.push_str(&join(entries));
            out.push('\n');
        }
        for row in &self.rows {
            let mut entries: Vec<String> = row.iter().map(|&c| (c + 1).to_string()).collect();
            entries.resize(max_row, "0".to_string());
            out.push_str(&join(entries));
            out.push('\n');
        }
        out
    }

    /// Parses MacKay's alist format (padding zeros tolerated either way) and
    /// derives the systematic encoder.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut tokens = AlistTokens::new(text);
        let n = tokens.next_int("number of columns")?;
        let m = tokens.next_int("number of rows")?;
        if n == 0 || m == 0 {
            return Err(tokens.error("dimensions must be positive"));
        }
        let max_col = tokens.next_int("max column degree")?;
        let max_row = tokens.next_int("max row degree")?;
        let col_degs: Vec<usize> = (0..n)
            .map(|_| tokens.next_int("column degree list"))
            .collect::<Result<_>>()?;
        let row_degs: Vec<usize> = (0..m)
            .map(|_| tokens.next_int("row degree list"))
            .collect::<Result<_>>()?;
        if let Some(&d) = col_degs.iter().find(|&&d| d > max_col) {
            return Err(tokens.error(&format!("column degree {d} exceeds declared max {max_col}")));
        }
        if let Some(&d) = row_degs.iter().find(|&&d| d > max_row) {
            return Err(tokens.error(&format!("row degree {d} exceeds declared max {max_row}")));
        }
        if col_degs.iter().sum::<usize>() != row_degs.iter().sum::<usize>() {
            return Err(tokens.error("column and row degree sums disagree"));
        }

        let mut from_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, &deg) in col_degs.iter().enumerate() {
            let mut seen = 0usize;
            // lines may be padded with zeros up to max_col or stop at the degree;
            // accept both by reading exactly `deg` nonzero entries, skipping zeros
            while seen < deg {
                let v = tokens.next_int("column entry list")?;
                if v == 0 {
                    continue;
                }
                if v > m {
                    return Err(tokens.error(&format!("row index {v} out of range 1..={m}")));
                }
                from_cols[v - 1].push(c);
                seen += 1;
            }
            tokens.skip_padding_zeros(max_col - deg)?;
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (r, &deg) in row_degs.iter().enumerate() {
            let mut seen = 0usize;
            while seen < deg {
                let v = tokens.next_int("row entry list")?;
                if v == 0 {
                    continue;
                }
                if v > n {
                    return Err(tokens.error(&format!("column index {v} out of range 1..={n}")));
                }
                rows[r].push(v - 1);
                seen += 1;
            }
            tokens.skip_padding_zeros(max_row - deg)?;
        }
        // cross-check the two redundant encodings describe the same matrix
        for r in 0..m {
            let mut a = from_cols[r].clone();
            let mut b = rows[r].clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(Error::AlistParse {
                    line: 0,
                    message: format!("row {} disagrees between column and row entry sections", r + 1),
                });
            }
        }
        Self::from_rows(rows, n)
    }
}

fn highest_set_bit(words: &[u64]) -> Option<usize> {
    for (wi, &w) in words.iter().enumerate().rev() {
        if w != 0 {
            return Some(wi * 64 + 63 - w.leading_zeros() as usize);
        }
    }
    None
}

/// Whitespace tokenizer with line tracking for alist diagnostics.
struct AlistTokens<'a> {
    tokens: std::vec::IntoIter<(usize, &'a str)>,
    line: usize,
}

impl<'a> AlistTokens<'a> {
    fn new(text: &'a str) -> Self {
        let tokens: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
            .collect();
        Self {
            tokens: tokens.into_iter(),
            line: 1,
        }
    }

    fn next_int(&mut self, section: &str) -> Result<usize> {
        match self.tokens.next() {
            Some((line, tok)) => {
                self.line = line;
                tok.parse().map_err(|_| Error::AlistParse {
                    line,
                    message: format!("expected integer in {section}, got {tok:?}"),
                })
            }
            None => Err(Error::AlistParse {
                line: self.line,
                message: format!("file truncated: missing {section}"),
            }),
        }
    }

    fn skip_padding_zeros(&mut self, count: usize) -> Result<()> {
        // peek-free: padded writers emit exactly `count` zeros; unpadded emit
        // none. Cloning the iterator lets us look ahead without committing.
        for _ in 0..count {
            let mut look = self.tokens.clone();
            match look.next() {
                Some((_, "0")) => {
                    self.tokens.next();
                }
                _ => break,
            }
        }
        Ok(())
    }

    fn error(&self, message: &str) -> Error {
        Error::AlistParse {
            line: self.line,
            message: message.to_string(),
        }
    }
}

/// Progressive edge growth: for each variable node, the first edge goes to a
/// minimum-degree check; later edges go to the check farthest from the
/// variable in the current graph (unreached preferred), minimum degree among
/// candidates, seeded tie-breaking.
fn peg_rows(n: usize, m: usize, col_weight: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n];

    let pick = |cands: Vec<usize>, check_adj: &[Vec<usize>], rng: &mut rand_chacha::ChaCha8Rng| -> usize {
        let min_deg = cands.iter().map(|&c| check_adj[c].len()).min().unwrap();
        let minimal: Vec<usize> = cands
            .into_iter()
            .filter(|&c| check_adj[c].len() == min_deg)
            .collect();
        minimal[rng.random_range(0..minimal.len())]
    };

    for v in 0..n {
        for edge in 0..col_weight {
            let chosen = if edge == 0 {
                pick((0..m).collect(), &check_adj, &mut rng)
            } else {
                // BFS through the bipartite graph from v
                let mut reached_check = vec![false; m];
                let mut reached_var = vec![false; n];
                reached_var[v] = true;
                let mut frontier: Vec<usize> = var_adj[v].clone();
                for &c in &frontier {
                    reached_check[c] = true;
                }
                let mut last_new = frontier.clone();
                loop {
                    let mut next = Vec::new();
                    for &c in &frontier {
                        for &u in &check_adj[c] {
                            if !reached_var[u] {
                                reached_var[u] = true;
                                for &c2 in &var_adj[u] {
                                    if !reached_check[c2] {
                                        reached_check[c2] = true;
                                        next.push(c2);
                                    }
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    last_new = next.clone();
                    frontier = next;
                }
                let unreached: Vec<usize> = (0..m).filter(|&c| !reached_check[c]).collect();
                let cands = if !unreached.is_empty() {
                    unreached
                } else {
                    let already: std::collections::HashSet<usize> =
                        var_adj[v].iter().copied().collect();
                    let far: Vec<usize> = last_new
                        .iter()
                        .copied()
                        .filter(|c| !already.contains(c))
                        .collect();
                    if far.is_empty() {
                        (0..m).filter(|c| !already.contains(c)).collect()
                    } else {
                        far
                    }
                };
                pick(cands, &check_adj, &mut rng)
            };
            check_adj[chosen].push(v);
            var_adj[v].push(chosen);
        }
    }
    check_adj
}
