//! Random codebooks with binned compression indices, and the covering
//! encoder over an explicit codebook.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::typical::{sample_index, typical_set_test, TypicalityConfig};
use crate::error::{QrpsError, Result};

/// (R, R_s, R̃_s) in bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeRates {
    pub r: f64,
    pub r_s: f64,
    pub r_s_tilde: f64,
}

impl CodeRates {
    pub fn new(r: f64, r_s: f64, r_s_tilde: f64) -> Result<Self> {
        for (v, name) in [(r, "R"), (r_s, "R_s"), (r_s_tilde, "R~_s")] {
            if !v.is_finite() || v < 0.0 {
                return Err(QrpsError::validation(format!(
                    "rate {name} must be non-negative, got {v}"
                )));
            }
        }
        if r_s > r_s_tilde {
            return Err(QrpsError::validation(format!(
                "bin rate R_s = {r_s} exceeds the covering rate R~_s = {r_s_tilde}"
            )));
        }
        Ok(Self { r, r_s, r_s_tilde })
    }
}

/// floor(2^{n·rate}), at least 1. Large counts are kept as floats.
fn count(n: usize, rate: f64) -> f64 {
    (n as f64 * rate).exp2().floor().max(1.0)
}

/// Index-set sizes after rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CodeSizes {
    pub n: usize,
    pub messages: f64,
    pub bins: f64,
    pub bin_size: f64,
}

impl CodeSizes {
    pub fn new(n: usize, rates: &CodeRates) -> Result<Self> {
        if n == 0 {
            return Err(QrpsError::validation("blocklength must be positive"));
        }
        Ok(Self {
            n,
            messages: count(n, rates.r),
            bins: count(n, rates.r_s),
            bin_size: count(n, rates.r_s_tilde - rates.r_s),
        })
    }

    /// Covering indices 2^{nR̃_s} after rounding: bins × bin size.
    pub fn covering(&self) -> f64 {
        self.bins * self.bin_size
    }

    /// Rates actually realized by the rounded counts.
    pub fn achieved(&self) -> CodeRates {
        let n = self.n as f64;
        CodeRates {
            r: self.messages.log2() / n,
            r_s: self.bins.log2() / n,
            r_s_tilde: self.covering().log2() / n,
        }
    }
}

/// Upper limit on explicitly stored sequences.
pub const MAX_EXPLICIT_SEQUENCES: f64 = (1u64 << 20) as f64;

/// Explicit codebook x^n(m, ℓ) and z^n(k | m, ℓ); indices are 0-based.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub sizes: CodeSizes,
    /// `x[m * bins + ℓ]`
    pub x: Vec<Vec<usize>>,
    /// `z[m * bins + ℓ][k]`
    pub z: Vec<Vec<Vec<usize>>>,
}

impl Codebook {
    /// Draws x^n i.i.d. from `p_x` and z^n from `p_z_given_x[x]`.
    pub fn generate(
        n: usize,
        rates: &CodeRates,
        p_x: &[f64],
        p_z_given_x: &[Vec<f64>],
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let sizes = CodeSizes::new(n, rates)?;
        let total = sizes.messages * sizes.bins * (1.0 + sizes.covering());
        if total * n as f64 > MAX_EXPLICIT_SEQUENCES * 64.0 || total > MAX_EXPLICIT_SEQUENCES {
            return Err(QrpsError::Config(format!(
                "explicit codebook with {total} sequences is too large"
            )));
        }
        if p_z_given_x.len() != p_x.len() {
            return Err(QrpsError::dimension("p(z|x) needs one row per x"));
        }
        let rows = (sizes.messages * sizes.bins) as usize;
        let k = sizes.covering() as usize;
        let mut x = Vec::with_capacity(rows);
        let mut z = Vec::with_capacity(rows);
        for _ in 0..rows {
            let xs: Vec<usize> = (0..n).map(|_| sample_index(p_x, rng)).collect();
            let zs = (0..k)
                .map(|_| {
                    xs.iter()
                        .map(|&xi| sample_index(&p_z_given_x[xi], rng))
                        .collect()
                })
                .collect();
            x.push(xs);
            z.push(zs);
        }
        Ok(Self { sizes, x, z })
    }

    pub fn bins(&self) -> usize {
        self.sizes.bins as usize
    }

    pub fn bin_size(&self) -> usize {
        self.sizes.bin_size as usize
    }

    /// Bin ℓ containing covering index k.
    pub fn bin_of(&self, k: usize) -> usize {
        k / self.bin_size()
    }

    /// Covering indices of bin ℓ.
    pub fn bin(&self, ell: usize) -> std::ops::Range<usize> {
        ell * self.bin_size()..(ell + 1) * self.bin_size()
    }
}

/// Result of a covering search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoverOutcome {
    pub k: usize,
    /// No index worked and `k` is the fallback index 0.
    pub failed: bool,
}

/// Smallest k with (s^n, x^n(m, ℓ), z^n(k | m, ℓ)) jointly δ-typical under a
/// pmf over (s, x, z) flattened as `(s * nx + x) * nz + z`.
pub fn covering_encode(
    s_block: &[usize],
    codebook: &Codebook,
    m: usize,
    ell_prev: usize,
    nx: usize,
    nz: usize,
    cfg: &TypicalityConfig,
) -> Result<CoverOutcome> {
    let row = m * codebook.bins() + ell_prev;
    let x = codebook
        .x
        .get(row)
        .ok_or_else(|| QrpsError::validation(format!("codeword ({m}, {ell_prev}) out of range")))?;
    if s_block.len() != x.len() {
        return Err(QrpsError::dimension(
            "parameter block and codeword lengths differ",
        ));
    }
    if !cfg.pmf.len().is_multiple_of(nx * nz) {
        return Err(QrpsError::dimension(
            "typicality pmf does not factor as S × X × Z",
        ));
    }
    for (k, z) in codebook.z[row].iter().enumerate() {
        let joint: Vec<usize> = s_block
            .iter()
            .zip(x)
            .zip(z)
            .map(|((&s, &xi), &zi)| (s * nx + xi) * nz + zi)
            .collect();
        if typical_set_test(&joint, cfg)? {
            return Ok(CoverOutcome { k, failed: false });
        }
    }
    Ok(CoverOutcome { k: 0, failed: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn sizes_round_down_but_stay_positive() {
        let s = CodeSizes::new(10, &CodeRates::new(0.25, 0.1, 0.1).unwrap()).unwrap();
        assert_eq!(s.messages, 5.0);
        assert_eq!(s.bins, 2.0);
        assert_eq!(s.bin_size, 1.0);
        assert!((s.achieved().r - 5f64.log2() / 10.0).abs() < 1e-15);
        assert!(CodeRates::new(0.1, 0.3, 0.2).is_err());
    }

    #[test]
    fn bins_partition_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cb = Codebook::generate(
            4,
            &CodeRates::new(0.25, 0.25, 0.75).unwrap(),
            &[0.5, 0.5],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &mut rng,
        )
        .unwrap();
        let k = cb.sizes.covering() as usize;
        assert_eq!(k, 8);
        let mut seen = vec![0; k];
        for ell in 0..cb.bins() {
            for idx in cb.bin(ell) {
                seen[idx] += 1;
                assert_eq!(cb.bin_of(idx), ell);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}
