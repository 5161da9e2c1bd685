//! δ-typicality of classical sequences, and the exact probability that an
//! i.i.d. random sequence is typical with a fixed context sequence.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::check_pmf;
use crate::error::{QrpsError, Result};

/// Which frequencies a candidate sequence must match.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypicalityKind {
    /// |N(c,a)/n − p(c,a)| ≤ δ for every joint symbol.
    #[default]
    Joint,
    /// |N(c,a)/n − N(c)/n · p(a|c)| ≤ δ: centred on the observed context
    /// counts, so only the candidate's own fluctuation is tested.
    Conditional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypicalityConfig {
    pub delta: f64,
    pub pmf: Vec<f64>,
}

impl TypicalityConfig {
    pub fn new(delta: f64, pmf: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(QrpsError::validation(format!(
                "typicality slack must be positive, got {delta}"
            )));
        }
        check_pmf(&pmf, "typicality reference")?;
        Ok(Self { delta, pmf })
    }
}

/// True iff every empirical frequency is within δ of the pmf and symbols of
/// probability zero never occur.
pub fn typical_set_test(seq: &[usize], cfg: &TypicalityConfig) -> Result<bool> {
    if seq.is_empty() {
        return Err(QrpsError::validation("empty sequence"));
    }
    let mut counts = vec![0usize; cfg.pmf.len()];
    for &a in seq {
        *counts
            .get_mut(a)
            .ok_or_else(|| QrpsError::validation(format!("symbol {a} not in the alphabet")))? += 1;
    }
    let n = seq.len() as f64;
    Ok(counts.iter().zip(&cfg.pmf).all(|(&c, &p)| {
        if p == 0.0 {
            c == 0
        } else {
            (c as f64 / n - p).abs() <= cfg.delta
        }
    }))
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// A candidate sequence over `n_sym` symbols tested against a context
/// sequence over `n_cells` cells. The candidate is drawn i.i.d. from
/// `gen[c][a]` given the context symbol c.
#[derive(Clone, Debug)]
pub(crate) struct CellModel {
    pub n_cells: usize,
    pub n_sym: usize,
    /// p(c, a), flat `c * n_sym + a`
    pub target: Vec<f64>,
    /// g(a | c), flat
    pub gen: Vec<f64>,
    pub delta: f64,
    pub kind: TypicalityKind,
}

impl CellModel {
    pub fn new(
        n_cells: usize,
        n_sym: usize,
        target: Vec<f64>,
        gen: Vec<f64>,
        delta: f64,
        kind: TypicalityKind,
    ) -> Result<Self> {
        if target.len() != n_cells * n_sym || gen.len() != n_cells * n_sym {
            return Err(QrpsError::dimension(
                "cell model tables have the wrong size",
            ));
        }
        if !(delta > 0.0) {
            return Err(QrpsError::validation(format!(
                "typicality slack must be positive, got {delta}"
            )));
        }
        Ok(Self {
            n_cells,
            n_sym,
            target,
            gen,
            delta,
            kind,
        })
    }

    pub fn cell_counts(&self, cells: &[usize]) -> Vec<usize> {
        let mut nc = vec![0usize; self.n_cells];
        for &c in cells {
            nc[c] += 1;
        }
        nc
    }

    /// Allowed count range of symbol a inside cell c, or None if the cell
    /// cannot be filled typically at all.
    fn band(&self, c: usize, a: usize, n_c: usize, n: usize) -> Option<(usize, usize)> {
        let p = self.target[c * self.n_sym + a];
        if p == 0.0 {
            return Some((0, 0));
        }
        let center = match self.kind {
            TypicalityKind::Joint => n as f64 * p,
            TypicalityKind::Conditional => {
                let pc: f64 = self.target[c * self.n_sym..(c + 1) * self.n_sym]
                    .iter()
                    .sum();
                n_c as f64 * p / pc
            }
        };
        let slack = self.delta * n as f64;
        // tiny guard so exact-type sequences are not lost to rounding
        let lo = (center - slack - 1e-9).ceil().max(0.0) as usize;
        let hi = (center + slack + 1e-9).floor();
        if hi < 0.0 || lo > n_c {
            return None;
        }
        Some((lo, (hi as usize).min(n_c)))
    }

    fn cell_possible(&self, c: usize, n_c: usize) -> bool {
        if n_c == 0 {
            return true;
        }
        let pc: f64 = self.target[c * self.n_sym..(c + 1) * self.n_sym]
            .iter()
            .sum();
        pc > 0.0
    }

    pub fn is_typical(&self, cells: &[usize], seq: &[usize]) -> bool {
        let n = cells.len();
        let nc = self.cell_counts(cells);
        let mut counts = vec![0usize; self.n_cells * self.n_sym];
        for (&c, &a) in cells.iter().zip(seq) {
            counts[c * self.n_sym + a] += 1;
        }
        (0..self.n_cells).all(|c| {
            self.cell_possible(c, nc[c])
                && (0..self.n_sym).all(|a| match self.band(c, a, nc[c], n) {
                    Some((lo, hi)) => (lo..=hi).contains(&counts[c * self.n_sym + a]),
                    None => false,
                })
        })
    }

    /// Forward DP over symbols for one cell: table[a][r] = ln Σ over counts
    /// of the first a symbols summing to r of Π g^k / k!.
    fn cell_table(&self, c: usize, n_c: usize, n: usize, lf: &[f64]) -> Option<Vec<Vec<f64>>> {
        let mut table = vec![vec![f64::NEG_INFINITY; n_c + 1]; self.n_sym + 1];
        table[0][0] = 0.0;
        for a in 0..self.n_sym {
            let (lo, hi) = self.band(c, a, n_c, n)?;
            let g = self.gen[c * self.n_sym + a];
            let lg = if g > 0.0 { g.ln() } else { f64::NEG_INFINITY };
            for r in 0..=n_c {
                let base = table[a][r];
                if base == f64::NEG_INFINITY {
                    continue;
                }
                for k in lo..=hi.min(n_c - r) {
                    let term = if k == 0 { 0.0 } else { k as f64 * lg } - lf[k];
                    if term == f64::NEG_INFINITY {
                        continue;
                    }
                    table[a + 1][r + k] = log_add(table[a + 1][r + k], base + term);
                }
            }
        }
        Some(table)
    }

    /// ln P(an i.i.d. candidate is typical with `cells`).
    pub fn log_prob_typical(&self, cells: &[usize]) -> f64 {
        let n = cells.len();
        let nc = self.cell_counts(cells);
        let lf = log_factorials(n);
        let mut total = 0.0;
        for c in 0..self.n_cells {
            if !self.cell_possible(c, nc[c]) {
                return f64::NEG_INFINITY;
            }
            match self.cell_table(c, nc[c], n, &lf) {
                Some(t) => total += lf[nc[c]] + t[self.n_sym][nc[c]],
                None => return f64::NEG_INFINITY,
            }
            if total == f64::NEG_INFINITY {
                return total;
            }
        }
        total
    }

    /// An i.i.d. candidate conditioned on being typical with `cells`; None
    /// when no typical candidate exists.
    pub fn sample_typical(&self, cells: &[usize], rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let n = cells.len();
        let nc = self.cell_counts(cells);
        let lf = log_factorials(n);
        let mut seq = vec![0usize; n];
        for c in 0..self.n_cells {
            if nc[c] == 0 {
                continue;
            }
            if !self.cell_possible(c, nc[c]) {
                return None;
            }
            let table = self.cell_table(c, nc[c], n, &lf)?;
            if table[self.n_sym][nc[c]] == f64::NEG_INFINITY {
                return None;
            }
            // backward sampling of the per-symbol counts
            let mut counts = vec![0usize; self.n_sym];
            let mut r = nc[c];
            for a in (0..self.n_sym).rev() {
                let (lo, hi) = self.band(c, a, nc[c], n)?;
                let g = self.gen[c * self.n_sym + a];
                let lg = if g > 0.0 { g.ln() } else { f64::NEG_INFINITY };
                let mut weights = Vec::new();
                for k in lo..=hi.min(r) {
                    let term = if k == 0 { 0.0 } else { k as f64 * lg } - lf[k];
                    weights.push((k, table[a][r - k] + term));
                }
                let m = weights
                    .iter()
                    .map(|w| w.1)
                    .fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = weights.iter().map(|w| (w.1 - m).exp()).sum();
                let mut u = rng.gen::<f64>() * total;
                let mut pick = weights.last()?.0;
                for &(k, lw) in &weights {
                    let w = (lw - m).exp();
                    if u < w {
                        pick = k;
                        break;
                    }
                    u -= w;
                }
                counts[a] = pick;
                r -= pick;
            }
            // uniform arrangement of the counts over the cell's positions
            let mut symbols: Vec<usize> = counts
                .iter()
                .enumerate()
                .flat_map(|(a, &k)| std::iter::repeat_n(a, k))
                .collect();
            shuffle(&mut symbols, rng);
            let positions = cells
                .iter()
                .enumerate()
                .filter(|(_, &cc)| cc == c)
                .map(|(i, _)| i);
            for (i, a) in positions.zip(symbols) {
                seq[i] = a;
            }
        }
        Some(seq)
    }

    /// An unconditioned i.i.d. candidate.
    pub fn sample_free(&self, cells: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
        cells
            .iter()
            .map(|&c| sample_index(&self.gen[c * self.n_sym..(c + 1) * self.n_sym], rng))
            .collect()
    }
}

pub(crate) fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = Vec::with_capacity(n + 1);
    lf.push(0.0);
    for k in 1..=n {
        lf.push(lf[k - 1] + (k as f64).ln());
    }
    lf
}

pub(crate) fn sample_index(p: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut u = rng.gen::<f64>() * p.iter().sum::<f64>();
    for (i, &w) in p.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn shuffle<T>(v: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}
