//! Gray-labeled square QAM constellations with sign/amplitude bit structure.
//!
//! Points live on the nominal odd-integer grid (±1, ±3, … per dimension) and
//! are kept unnormalized; power normalization is a separate `scale` factor
//! applied at modulation time, so the energy bookkeeping of the shaping
//! design (uniform QAM-16 energy = 10, etc.) stays literal.
//!
//! Label convention, declared once and used everywhere bits meet the mapper:
//! a label is `[s_I, s_Q, a_I…, a_Q…]` — one sign bit per dimension first,
//! then the per-dimension amplitude bits (MSB first). Sign bit 0 means the
//! positive half-axis. Amplitude bits are the reflected Gray code of the
//! amplitude index, so for 8-PAM dimensions 00→1, 01→3, 11→5, 10→7. This
//! makes any two grid-adjacent points differ in exactly one label bit and
//! keeps amplitude bits invariant under sign reflection.

use num_complex::Complex64;

use crate::{Error, Result};

/// Reflected binary Gray code of `i`.
pub fn gray_code(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Inverse of [`gray_code`].
pub fn gray_decode(g: usize) -> usize {
    let mut i = g;
    let mut shift = 1;
    while (g >> shift) != 0 {
        i ^= g >> shift;
        shift += 1;
    }
    i
}

/// Neumaier-compensated summation; keeps the probability/energy identities
/// tight to the last ulp even for long streams.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn validate_distribution(probs: &[f64], expected_len: usize) -> Result<()> {
    if probs.len() != expected_len {
        return Err(Error::InvalidDistribution(format!(
            "expected {expected_len} probabilities, got {}",
            probs.len()
        )));
    }
    for (i, &p) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {p}, outside [0, 1]"
            )));
        }
    }
    let total = compensated_sum(probs.iter().copied());
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "sum is {total}, not 1 within 1e-12"
        )));
    }
    Ok(())
}

/// A square QAM constellation together with a point distribution and the
/// power-preserving scale factor applied at modulation time.
#[derive(Debug, Clone)]
pub struct ShapedConstellation {
    order: usize,
    points: Vec<Complex64>,
    labels: Vec<Vec<u8>>,
    sign_bit_positions: Vec<usize>,
    amplitude_bit_positions: Vec<usize>,
    probabilities: Vec<f64>,
    scale: f64,
}

impl ShapedConstellation {
    /// Builds the uniform-probability constellation for `order` ∈ {4, 16, 64, 256}
    /// on nominal odd-integer coordinates with per-dimension Gray labeling.
    pub fn build_qam(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64 | 256) {
            return Err(Error::UnsupportedOrder(order));
        }
        let bits = order.trailing_zeros() as usize;
        let bits_per_dim = bits / 2;
        let amp_bits = bits_per_dim - 1;

        let mut points = Vec::with_capacity(order);
        let mut labels = Vec::with_capacity(order);
        for label in 0..order {
            let label_bits: Vec<u8> = (0..bits)
                .map(|pos| ((label >> (bits - 1 - pos)) & 1) as u8)
                .collect();
            let re = Self::coordinate(&label_bits, 0, amp_bits);
            let im = Self::coordinate(&label_bits, 1, amp_bits);
            points.push(Complex64::new(re, im));
            labels.push(label_bits);
        }

        let sign_bit_positions = vec![0, 1];
        let amplitude_bit_positions = (2..bits).collect();
        Ok(Self {
            order,
            points,
            labels,
            sign_bit_positions,
            amplitude_bit_positions,
            probabilities: vec![1.0 / order as f64; order],
            scale: 1.0,
        })
    }

    fn coordinate(label_bits: &[u8], dim: usize, amp_bits: usize) -> f64 {
        let sign = label_bits[dim];
        let mut pattern = 0usize;
        for t in 0..amp_bits {
            pattern = (pattern << 1) | label_bits[2 + dim * amp_bits + t] as usize;
        }
        let magnitude = (2 * gray_decode(pattern) + 1) as f64;
        if sign == 0 {
            magnitude
        } else {
            -magnitude
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Amplitude bits per dimension (0 for QAM-4, 1 for QAM-16, 2 for QAM-64, …).
    pub fn amp_bits_per_dim(&self) -> usize {
        self.bits_per_symbol() / 2 - 1
    }

    /// Distinct amplitude magnitudes per dimension.
    pub fn amplitudes_per_dim(&self) -> usize {
        1 << self.amp_bits_per_dim()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[Vec<u8>] {
        &self.labels
    }

    pub fn sign_bit_positions(&self) -> &[usize] {
        &self.sign_bit_positions
    }

    pub fn amplitude_bit_positions(&self) -> &[usize] {
        &self.amplitude_bit_positions
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Amplitude index (0-based, increasing magnitude) of point `label` in
    /// dimension `dim` (0 = I, 1 = Q).
    pub fn amplitude_index(&self, label: usize, dim: usize) -> usize {
        let amp_bits = self.amp_bits_per_dim();
        let bits = &self.labels[label];
        let mut pattern = 0usize;
        for t in 0..amp_bits {
            pattern = (pattern << 1) | bits[2 + dim * amp_bits + t] as usize;
        }
        gray_decode(pattern)
    }

    /// Constellation energy Σᵢ pᵢ·|xᵢ|² on nominal (unscaled) coordinates.
    pub fn energy(&self) -> f64 {
        energy_under(&self.points, &self.probabilities)
    }

    /// Shannon entropy of the point distribution in bits; zero-probability
    /// terms contribute zero.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probabilities)
    }

    /// Maxwell-Boltzmann point distribution p̂ᵢ ∝ exp(−λ·|xᵢ|²), evaluated
    /// with the minimum energy subtracted in the exponent for stability.
    ///
    /// λ = 0 is uniform; λ → ∞ concentrates on the minimal-energy points.
    pub fn maxwell_boltzmann(&self, lambda: f64) -> Vec<f64> {
        assert!(
            lambda >= 0.0 && lambda.is_finite(),
            "lambda must be finite and nonnegative"
        );
        let energies: Vec<f64> = self.points.iter().map(|x| x.norm_sqr()).collect();
        let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = energies.iter().map(|e| (-lambda * (e - e_min)).exp()).collect();
        let z = compensated_sum(weights.iter().copied());
        weights.iter().map(|w| w / z).collect()
    }

    /// Finds λ ≥ 0 such that the Maxwell-Boltzmann distribution has the given
    /// entropy, to within 1e-9 bits, by bisection with geometric expansion of
    /// the upper bracket. Entropy is strictly decreasing in λ down to the
    /// infimum log₂(#minimal-energy points); targets below that are rejected.
    pub fn solve_mb_for_entropy(&self, target_bits: f64) -> Result<f64> {
        const TOL: f64 = 1e-9;
        const MAX_ITERS: usize = 200;
        let h_max = (self.order as f64).log2();
        if !(target_bits > 0.0 && target_bits <= h_max) {
            return Err(Error::EntropyTargetOutOfRange {
                target: target_bits,
                max: h_max,
            });
        }
        let entropy_at = |lambda: f64| entropy_of(&self.maxwell_boltzmann(lambda));
        if h_max - target_bits <= TOL {
            return Ok(0.0);
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while entropy_at(hi) > target_bits {
            lo = hi;
            hi *= 2.0;
            if hi > 1e30 {
                return Err(Error::EntropyTargetUnreachable {
                    target: target_bits,
                    floor: entropy_at(hi),
                });
            }
        }
        for _ in 0..MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            let h = entropy_at(mid);
            if (h - target_bits).abs() <= TOL {
                return Ok(mid);
            }
            if h > target_bits {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::EntropyTargetUnreachable {
            target: target_bits,
            floor: entropy_at(hi),
        })
    }

    /// Power-preserving scale μ = √(E_self / E_shaped) on nominal coordinates:
    /// multiplying the shaped points by μ restores this constellation's mean
    /// power.
    pub fn scaling_factor(&self, shaped_probs: &[f64]) -> Result<f64> {
        validate_distribution(shaped_probs, self.order)?;
        let e_ref = self.energy();
        let e_shaped = energy_under(&self.points, shaped_probs);
        if e_shaped <= 0.0 {
            return Err(Error::ZeroShapedEnergy);
        }
        Ok((e_ref / e_shaped).sqrt())
    }

    /// Point probabilities induced by a per-dimension amplitude distribution:
    /// each point gets (1/2)^(#sign bits) times the product of its two
    /// per-dimension amplitude-pattern probabilities. `amp_probs` is indexed
    /// by amplitude (increasing magnitude), so for QAM-16 it is
    /// `[p_a(0), p_a(1)]` and for QAM-64 the four joint 2-bit patterns.
    pub fn point_probs_from_amplitude(&self, amp_probs: &[f64]) -> Result<Vec<f64>> {
        validate_distribution(amp_probs, self.amplitudes_per_dim())?;
        let probs: Vec<f64> = (0..self.order)
            .map(|label| {
                let ji = self.amplitude_index(label, 0);
                let jq = self.amplitude_index(label, 1);
                0.25 * amp_probs[ji] * amp_probs[jq]
            })
            .collect();
        Ok(probs)
    }

    /// Returns a copy of this constellation carrying `probs` as the point
    /// distribution, scaled so its mean transmit power equals this
    /// constellation's energy.
    pub fn with_point_probs(&self, probs: Vec<f64>) -> Result<Self> {
        let scale = self.scaling_factor(&probs)?;
        let mut shaped = self.clone();
        shaped.probabilities = probs;
        shaped.scale = scale;
        Ok(shaped)
    }

    /// Convenience: point probabilities from a per-dimension amplitude
    /// distribution plus the matching power-preserving scale.
    pub fn with_amplitude_probs(&self, amp_probs: &[f64]) -> Result<Self> {
        let probs = self.point_probs_from_amplitude(amp_probs)?;
        self.with_point_probs(probs)
    }

    /// Plain-text dump: one row per point (label bits, re, im, probability),
    /// with the labeling conventions recorded in the header.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# qam order={} scale={}\n", self.order, self.scale));
        out.push_str("# conventions: sign bit 0 => positive half-axis; amplitude bits are the\n");
        out.push_str("# per-dimension reflected Gray code of the amplitude index (00->1 01->3 11->5 10->7)\n");
        out.push_str("# label re im probability\n");
        for i in 0..self.order {
            let label: String = self.labels[i].iter().map(|b| char::from(b'0' + b)).collect();
            out.push_str(&format!(
                "{} {} {} {}\n",
                label, self.points[i].re, self.points[i].im, self.probabilities[i]
            ));
        }
        out
    }

    /// Parses a table produced by [`Self::to_table`], validating geometry and
    /// labels against a freshly built constellation of the same order.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut order: Option<usize> = None;
        let mut scale = 1.0f64;
        let mut rows: Vec<(usize, String, f64, f64, f64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("order=") {
                        order = Some(v.parse().map_err(|_| Error::TableParse {
                            line: lineno + 1,
                            message: format!("bad order value {v:?}"),
                        })?);
                    } else if let Some(v) = tok.strip_prefix("scale=") {
                        scale = v.parse().map_err(|_| Error::TableParse {
                            line: lineno + 1,
                            message: format!("bad scale value {v:?}"),
                        })?;
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::TableParse {
                    line: lineno + 1,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::TableParse {
                    line: lineno + 1,
                    message: format!("bad number {s:?}"),
                })
            };
            rows.push((
                lineno + 1,
                fields[0].to_string(),
                parse(fields[1])?,
                parse(fields[2])?,
                parse(fields[3])?,
            ));
        }
        let order = order.ok_or(Error::TableParse {
            line: 1,
            message: "missing '# qam order=…' header".into(),
        })?;
        if rows.len() != order {
            return Err(Error::TableParse {
                line: 1,
                message: format!("expected {order} point rows, got {}", rows.len()),
            });
        }
        let base = Self::build_qam(order)?;
        let mut probs = vec![0.0f64; order];
        let mut seen = vec![false; order];
        for (line, label_str, re, im, p) in rows {
            let bits = base.bits_per_symbol();
            if label_str.len() != bits || !label_str.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::TableParse {
                    line,
                    message: format!("label {label_str:?} is not {bits} binary digits"),
                });
            }
            let label = usize::from_str_radix(&label_str, 2).unwrap();
            if seen[label] {
                return Err(Error::TableParse {
                    line,
                    message: format!("duplicate label {label_str}"),
                });
            }
            seen[label] = true;
            let expect = base.points[label];
            if expect.re != re || expect.im != im {
                return Err(Error::TableParse {
                    line,
                    message: format!(
                        "label {label_str} maps to ({}, {}), row says ({re}, {im})",
                        expect.re, expect.im
                    ),
                });
            }
            probs[label] = p;
        }
        validate_distribution(&probs, order)?;
        let mut cons = base;
        cons.probabilities = probs;
        cons.scale = scale;
        Ok(cons)
    }
}

/// Σᵢ pᵢ·|xᵢ|² with compensated summation.
pub fn energy_under(points: &[Complex64], probs: &[f64]) -> f64 {
    compensated_sum(points.iter().zip(probs).map(|(x, p)| p * x.norm_sqr()))
}

/// −Σᵢ pᵢ·log₂ pᵢ with zero-probability terms dropped.
pub fn entropy_of(probs: &[f64]) -> f64 {
    compensated_sum(
        probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The paper's example shaped distribution on QAM-16: inner points 0.125,
    /// edge points 0.0375, corner points 0.05.
    fn paper_example_probs(c: &ShapedConstellation) -> Vec<f64> {
        c.points()
            .iter()
            .map(|x| match x.norm_sqr() as u32 {
                2 => 0.125,
                10 => 0.0375,
                18 => 0.05,
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn build_qam_orders_and_uniform_energies() {
        for (order, energy) in [(4usize, 2.0), (16, 10.0), (64, 42.0), (256, 170.0)] {
            let c = ShapedConstellation::build_qam(order).unwrap();
            assert_eq!(c.points().len(), order);
            assert_eq!(c.labels().len(), order);
            assert_eq!(c.energy(), energy, "uniform energy for QAM-{order}");
        }
        assert!(ShapedConstellation::build_qam(32).is_err());
        assert!(ShapedConstellation::build_qam(0).is_err());
    }

    #[test]
    fn qam4_has_no_amplitude_bits() {
        let c = ShapedConstellation::build_qam(4).unwrap();
        assert_eq!(c.sign_bit_positions(), &[0, 1]);
        assert!(c.amplitude_bit_positions().is_empty());
        assert_eq!(c.amplitudes_per_dim(), 1);
        for x in c.points() {
            assert_eq!(x.norm_sqr(), 2.0);
        }
    }

    #[test]
    fn qam64_sign_and_amplitude_structure() {
        let c = ShapedConstellation::build_qam(64).unwrap();
        assert_eq!(c.sign_bit_positions().len(), 2);
        assert_eq!(c.amplitude_bit_positions().len(), 4);
        // amplitude alphabet per dimension is {1,3,5,7}
        let mut mags: Vec<f64> = c.points().iter().map(|x| x.re.abs()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        mags.dedup();
        assert_eq!(mags, vec![1.0, 3.0, 5.0, 7.0]);
    }

    #[test]
    fn labels_distinct_and_sign_flip_reflects() {
        for order in [4usize, 16, 64, 256] {
            let c = ShapedConstellation::build_qam(order).unwrap();
            let mut seen = std::collections::HashSet::new();
            for l in c.labels() {
                assert!(seen.insert(l.clone()));
            }
            for (label, x) in c.points().iter().enumerate() {
                for (dim, &pos) in c.sign_bit_positions().iter().enumerate() {
                    let bits = c.bits_per_symbol();
                    let flipped = label ^ (1 << (bits - 1 - pos));
                    let y = c.points()[flipped];
                    if dim == 0 {
                        assert_eq!((y.re, y.im), (-x.re, x.im));
                    } else {
                        assert_eq!((y.re, y.im), (x.re, -x.im));
                    }
                    // amplitude bits unchanged under the reflection
                    for &apos in c.amplitude_bit_positions() {
                        assert_eq!(c.labels()[label][apos], c.labels()[flipped][apos]);
                    }
                }
            }
        }
    }

    #[test]
    fn gray_property_adjacent_points_differ_in_one_bit() {
        for order in [4usize, 16, 64, 256] {
            let c = ShapedConstellation::build_qam(order).unwrap();
            for (i, xi) in c.points().iter().enumerate() {
                for (j, xj) in c.points().iter().enumerate() {
                    let d = (xi - xj).norm_sqr();
                    if d == 4.0 {
                        let diff: usize = c.labels()[i]
                            .iter()
                            .zip(&c.labels()[j])
                            .filter(|(a, b)| a != b)
                            .count();
                        assert_eq!(diff, 1, "order {order}: {xi} vs {xj}");
                    }
                }
            }
        }
    }

    #[test]
    fn energy_paper_example_is_7_6_exactly() {
        let c = ShapedConstellation::build_qam(16).unwrap();
        let shaped = paper_example_probs(&c);
        assert_eq!(energy_under(c.points(), &shaped), 7.6);
    }

    #[test]
    fn energy_single_inner_point() {
        let c = ShapedConstellation::build_qam(16).unwrap();
        let mut probs = vec![0.0; 16];
        let inner = c.points().iter().position(|x| x.norm_sqr() == 2.0).unwrap();
        probs[inner] = 1.0;
        assert_eq!(energy_under(c.points(), &probs), 2.0);
    }

    #[test]
    fn entropy_examples() {
        let c = ShapedConstellation::build_qam(16).unwrap();
        assert_eq!(c.entropy(), 4.0);

        let mut single = vec![0.0; 16];
        single[3] = 1.0;
        assert_eq!(entropy_of(&single), 0.0);

        // paper 7.6-energy distribution: oracle = independent direct summation
        let shaped = paper_example_probs(&c);
        let oracle = -(4.0 * 0.125 * 0.125f64.log2()
            + 8.0 * 0.0375 * 0.0375f64.log2()
            + 4.0 * 0.05 * 0.05f64.log2());
        let got = entropy_of(&shaped);
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
        // frozen value from the oracle
        assert!((got - 3.7854752972273342).abs() < 1e-12, "{got}");
    }

    #[test]
    fn maxwell_boltzmann_limits_and_oracle() {
        let c = ShapedConstellation::build_qam(16).unwrap();

        let uniform = c.maxwell_boltzmann(0.0);
        for p in &uniform {
            assert!((p - 1.0 / 16.0).abs() < 1e-15);
        }

        let degenerate = c.maxwell_boltzmann(1e3);
        for (p, x) in degenerate.iter().zip(c.points()) {
            if x.norm_sqr() == 2.0 {
                assert!((p - 0.25).abs() < 1e-12);
            } else {
                assert!(*p < 1e-12);
            }
        }

        // direct evaluation oracle at lambda = 0.1
        let lambda = 0.1;
        let got = c.maxwell_boltzmann(lambda);
        let raw: Vec<f64> = c.points().iter().map(|x| (-lambda * x.norm_sqr()).exp()).collect();
        let z: f64 = raw.iter().sum();
        for (g, r) in got.iter().zip(&raw) {
            assert!((g - r / z).abs() < 1e-14);
        }
        let total = compensated_sum(got.iter().copied());
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mb_entropy_and_energy_strictly_decreasing_in_lambda() {
        let c = ShapedConstellation::build_qam(64).unwrap();
        let grid = [0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];
        let mut prev_h = f64::INFINITY;
        let mut prev_e = f64::INFINITY;
        for &l in &grid {
            let p = c.maxwell_boltzmann(l);
            let h = entropy_of(&p);
            let e = energy_under(c.points(), &p);
            assert!(h < prev_h);
            assert!(e < prev_e);
            prev_h = h;
            prev_e = e;
        }
    }

    #[test]
    fn solve_mb_for_entropy_roundtrips() {
        let c = ShapedConstellation::build_qam(16).unwrap();
        assert_eq!(c.solve_mb_for_entropy(4.0).unwrap(), 0.0);
        for target in [3.0, 2.5, 3.9] {
            let lambda = c.solve_mb_for_entropy(target).unwrap();
            let h = entropy_of(&c.maxwell_boltzmann(lambda));
            assert!((h - target).abs() <= 1e-9, "target {target}: got {h}");
        }
    }

    #[test]
    fn solve_mb_for_entropy_rejects_bad_targets() {
        let c = ShapedConstellation::build_qam(16).unwrap();
        assert!(matches!(
            c.solve_mb_for_entropy(4.5),
            Err(Error::EntropyTargetOutOfRange { .. })
        ));
        assert!(matches!(
            c.solve_mb_for_entropy(0.0),
            Err(Error::EntropyTargetOutOfRange { .. })
        ));
        // below the sign-symmetry entropy floor of 2 bits
        match c.solve_mb_for_entropy(0.1) {
            Err(Error::EntropyTargetUnreachable { floor, .. }) => {
                assert!((floor - 2.0).abs() < 1e-9)
            }
            other => panic!("expected unreachable-target error, got {other:?}"),
        }
    }

    #[test]
    fn scaling_factor_and_identity() {
        let c = ShapedConstellation::build_qam(16).unwrap();
        let uniform = vec![1.0 / 16.0; 16];
        assert_eq!(c.scaling_factor(&uniform).unwrap(), 1.0);

        let shaped = paper_example_probs(&c);
        let mu = c.scaling_factor(&shaped).unwrap();
        // μ² is the energy ratio (Eq. computed pre-sqrt); the shaped energy is
        // exactly 7.6 so the ratio is exactly 10/7.6
        assert_eq!(energy_under(c.points(), &shaped), 7.6);
        assert_eq!(10.0 / energy_under(c.points(), &shaped), 10.0 / 7.6);
        assert_eq!(mu, (10.0f64 / 7.6).sqrt());
        assert!((mu - 1.1470786693528088).abs() < 1e-15);
        assert!((mu * mu - 10.0 / 7.6).abs() < 1e-15);

        // Σ p̂ᵢ|μxᵢ|² == Σ (1/m)|xᵢ|² within 1e-12
        let scaled_energy = compensated_sum(
            c.points()
                .iter()
                .zip(&shaped)
                .map(|(x, p)| p * (mu * mu) * x.norm_sqr()),
        );
        assert!((scaled_energy - 10.0).abs() < 1e-12);
    }

    #[test]
    fn point_probs_from_amplitude_qam16() {
        let c = ShapedConstellation::build_qam(16).unwrap();
        let uniform = c.point_probs_from_amplitude(&[0.5, 0.5]).unwrap();
        for p in &uniform {
            assert!((p - 1.0 / 16.0).abs() < 1e-15);
        }

        let shaped = c.point_probs_from_amplitude(&[0.84, 0.16]).unwrap();
        for (label, x) in c.points().iter().enumerate() {
            if x.norm_sqr() == 2.0 {
                assert!((shaped[label] - 0.25 * 0.84 * 0.84).abs() < 1e-15);
            }
        }
        let total = compensated_sum(shaped.iter().copied());
        assert!((total - 1.0).abs() < 1e-12);

        assert!(c.point_probs_from_amplitude(&[0.9, 0.2]).is_err());
    }

    #[test]
    fn point_probs_from_published_qam64_column() {
        // joint per-dimension pattern probabilities with zero entries induce
        // a valid 64-point distribution
        let c = ShapedConstellation::build_qam(64).unwrap();
        let probs = c.point_probs_from_amplitude(&[0.87, 0.13, 0.0, 0.0]).unwrap();
        assert_eq!(probs.len(), 64);
        let total = compensated_sum(probs.iter().copied());
        assert!((total - 1.0).abs() < 1e-12);
        // any point with an amplitude-5 or -7 coordinate has zero probability
        for (label, x) in c.points().iter().enumerate() {
            if x.re.abs() > 3.0 || x.im.abs() > 3.0 {
                assert_eq!(probs[label], 0.0);
            } else {
                assert!(probs[label] > 0.0);
            }
        }
    }

    #[test]
    fn point_probs_reflection_symmetric() {
        let c = ShapedConstellation::build_qam(64).unwrap();
        let amp = [0.6, 0.25, 0.1, 0.05];
        let probs = c.point_probs_from_amplitude(&amp).unwrap();
        let total = compensated_sum(probs.iter().copied());
        assert!((total - 1.0).abs() < 1e-12);
        for (label, x) in c.points().iter().enumerate() {
            // all four sign reflections share the probability
            for other in 0..64 {
                let y = c.points()[other];
                if y.re.abs() == x.re.abs() && y.im.abs() == x.im.abs() {
                    assert_eq!(probs[label], probs[other]);
                }
            }
        }
    }

    #[test]
    fn table_dump_and_load_roundtrip() {
        let c = ShapedConstellation::build_qam(16)
            .unwrap()
            .with_amplitude_probs(&[0.84, 0.16])
            .unwrap();
        let text = c.to_table();
        let back = ShapedConstellation::from_table(&text).unwrap();
        assert_eq!(back.order(), 16);
        assert_eq!(back.scale(), c.scale());
        assert_eq!(back.probabilities(), c.probabilities());
        assert_eq!(back.points(), c.points());

        // golden shape of the first data row of the uniform QAM-4 table
        let q4 = ShapedConstellation::build_qam(4).unwrap();
        let table = q4.to_table();
        let first_row = table.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(first_row, "00 1 1 0.25");
    }

    #[test]
    fn table_load_rejects_garbage() {
        assert!(ShapedConstellation::from_table("").is_err());
        let c = ShapedConstellation::build_qam(4).unwrap();
        let mut text = c.to_table();
        text.push_str("extra junk line\n");
        assert!(ShapedConstellation::from_table(&text).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn amplitude_induced_distributions_normalize(
                raw in prop::collection::vec(0.005f64..1.0, 4),
            ) {
                let total: f64 = raw.iter().sum();
                let amp: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let c = ShapedConstellation::build_qam(64).unwrap();
                let probs = c.point_probs_from_amplitude(&amp).unwrap();
                let sum = compensated_sum(probs.iter().copied());
                prop_assert!((sum - 1.0).abs() < 1e-12);
                for (label, &p) in probs.iter().enumerate() {
                    prop_assert!((0.0..=1.0).contains(&p));
                    // sign reflections share the probability
                    let bits = c.bits_per_symbol();
                    for d in 0..2 {
                        let flipped = label ^ (1 << (bits - 1 - d));
                        prop_assert_eq!(p, probs[flipped]);
                    }
                }
                // the scaling identity holds for every induced distribution
                let mu = c.scaling_factor(&probs).unwrap();
                let scaled = compensated_sum(
                    c.points().iter().zip(&probs).map(|(x, q)| q * mu * mu * x.norm_sqr()),
                );
                prop_assert!((scaled - c.energy()).abs() < 1e-12);
            }
        }
    }
}
