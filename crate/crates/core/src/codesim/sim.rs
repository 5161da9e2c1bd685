//! Monte-Carlo runs of the block-Markov (strictly-causal / causal) and
//! binning (non-causal / no CSI) schemes over measurement channels.
//!
//! Codebooks are random and fresh per trial, so a trial samples the random
//! code ensemble. Only the transmitted codewords are drawn explicitly: for
//! the exponentially many other codewords the simulator computes the exact
//! probability that one of them is typical with the observed sequences and
//! samples the resulting search/decoding outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::codebook::{CodeRates, CodeSizes};
use super::typical::{sample_index, CellModel, TypicalityKind};
use crate::channels::{ChannelKind, DistortionFunction, RandomParameterChannel};
use crate::error::{QrpsError, Result};
use crate::parallel::worker_pool;
use crate::regions::{CsiMode, EstimationPovm, Strategy};

/// Upper bound on n·T per trial.
pub const MAX_SYMBOLS: usize = 10_000;

// At n of a few hundred the joint δn band leaves the (s, x) pair itself
// atypical often enough to mask the rate threshold; conditional bands with
// small δ separate the two sides of the covering rate cleanly.
pub const DEFAULT_DELTA_COVER: f64 = 0.01;
pub const DEFAULT_DELTA_DECODE: f64 = 0.05;
pub const DEFAULT_TYPICALITY: TypicalityKind = TypicalityKind::Conditional;

/// Independent random substreams per trial.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
enum Substream {
    Params = 0,
    Codebook = 1,
    Channel = 2,
    Estimation = 3,
}

fn substream(seed: u64, trial: usize, which: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 2) | which as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    /// Transmission blocks T (block-Markov only; binning uses one block).
    pub blocks: usize,
    pub trials: usize,
    pub rates: CodeRates,
    /// Typicality slack of the covering / binning search.
    pub delta_cover: f64,
    /// Typicality slack of the decoder.
    pub delta_decode: f64,
    pub typicality: TypicalityKind,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, blocks: usize, trials: usize, rates: CodeRates, seed: u64) -> Self {
        Self {
            n,
            blocks,
            trials,
            rates,
            delta_cover: DEFAULT_DELTA_COVER,
            delta_decode: DEFAULT_DELTA_DECODE,
            typicality: DEFAULT_TYPICALITY,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(QrpsError::validation("trials must be positive"));
        }
        if self.n == 0 || self.blocks == 0 {
            return Err(QrpsError::validation(
                "blocklength and block count must be positive",
            ));
        }
        if self.n.saturating_mul(self.blocks) > MAX_SYMBOLS {
            return Err(QrpsError::validation(format!(
                "n*T = {} exceeds the limit {MAX_SYMBOLS}",
                self.n * self.blocks
            )));
        }
        if !(self.delta_cover > 0.0) || !(self.delta_decode > 0.0) {
            return Err(QrpsError::validation("typicality slacks must be positive"));
        }
        CodeRates::new(self.rates.r, self.rates.r_s, self.rates.r_s_tilde)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub scheme: String,
    pub trials: usize,
    /// Fraction of trials with at least one message decoded wrongly.
    pub error_rate: f64,
    /// Fraction of message blocks decoded wrongly.
    pub block_error_rate: f64,
    pub avg_distortion: f64,
    /// Fraction of covering (or bin) searches that found no typical index.
    pub covering_failure_rate: f64,
    pub seed: u64,
    pub config: SimConfig,
    pub achieved_rates: CodeRates,
}

/// Single-letter classical description of strategy + measurement channel.
struct LetterModel {
    ns: usize,
    nx: usize,
    nz: usize,
    ny: usize,
    q: Vec<f64>,
    p_x: Vec<f64>,
    /// [s][x]
    p_x_given_s: Vec<Vec<f64>>,
    /// [x][s][z]
    p_z_given_xs: Vec<Vec<Vec<f64>>>,
    /// [x][z]
    p_z_given_x: Vec<Vec<f64>>,
    /// [x][s][y]
    p_y: Vec<Vec<Vec<f64>>>,
    /// [(x * nz + z) * ny + y][ŝ]
    est: Vec<Vec<f64>>,
    distortion: DistortionFunction,
}

impl LetterModel {
    fn build(
        rpc: &RandomParameterChannel,
        strategy: &Strategy,
        est: &EstimationPovm,
    ) -> Result<Self> {
        let (povms, basis) = match rpc.kind() {
            ChannelKind::Measurement { povms, basis } => (povms, basis),
            other => {
                return Err(QrpsError::validation(format!(
                    "coding simulation decodes classical measurement outcomes and needs a measurement channel, got a {} channel",
                    other.tag()
                )))
            }
        };
        strategy.check_channel(rpc)?;
        let (ns, nx, nz, ny) = (rpc.num_params(), strategy.nx(), strategy.nz(), basis.len());
        if est.nx() != nx || est.nz() != nz {
            return Err(QrpsError::dimension(
                "estimator contexts do not match the strategy",
            ));
        }
        if est.povm(0, 0).dim() != ny {
            return Err(QrpsError::dimension(
                "estimator acts on the wrong output dimension",
            ));
        }
        let q = rpc.q().to_vec();
        let p_x_given_s: Vec<Vec<f64>> = (0..ns)
            .map(|s| match strategy.mode {
                CsiMode::NonCausal => strategy.p_x_given_s[s].clone(),
                _ => strategy.p_x.clone(),
            })
            .collect();
        let p_x: Vec<f64> = (0..nx)
            .map(|x| (0..ns).map(|s| q[s] * p_x_given_s[s][x]).sum())
            .collect();
        let p_z_given_xs: Vec<Vec<Vec<f64>>> = if strategy.mode.has_z() {
            strategy.p_z_given_xs.clone()
        } else {
            vec![vec![vec![1.0]; ns]; nx]
        };
        let p_z_given_x = (0..nx)
            .map(|x| {
                (0..nz)
                    .map(|z| (0..ns).map(|s| q[s] * p_z_given_xs[x][s][z]).sum())
                    .collect()
            })
            .collect();
        let mut p_y = vec![vec![Vec::new(); ns]; nx];
        for (x, row) in p_y.iter_mut().enumerate() {
            for (s, cell) in row.iter_mut().enumerate() {
                *cell = povms[s].probabilities(&strategy.channel_input(x, s))?;
            }
        }
        let mut table = Vec::with_capacity(nx * nz * ny);
        for x in 0..nx {
            for z in 0..nz {
                let povm = est.povm(x, z);
                for b in basis {
                    table.push(
                        povm.elements()
                            .iter()
                            .map(|e| e.expectation(b.amplitudes()).re.max(0.0))
                            .collect(),
                    );
                }
            }
        }
        Ok(Self {
            ns,
            nx,
            nz,
            ny,
            q,
            p_x,
            p_x_given_s,
            p_z_given_xs,
            p_z_given_x,
            p_y,
            est: table,
            distortion: est.distortion().clone(),
        })
    }

    fn draw_s(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        (0..n).map(|_| sample_index(&self.q, rng)).collect()
    }

    fn draw_y(&self, x: &[usize], s: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
        x.iter()
            .zip(s)
            .map(|(&xi, &si)| sample_index(&self.p_y[xi][si], rng))
            .collect()
    }

    fn estimate(&self, x: usize, z: usize, y: usize, rng: &mut ChaCha8Rng) -> usize {
        sample_index(&self.est[(x * self.nz + z) * self.ny + y], rng)
    }

    /// Cells (s, x), candidate z ~ p(z|x); target q(s)p(x)p(z|x,s).
    fn cover_model(&self, delta: f64, kind: TypicalityKind) -> Result<CellModel> {
        let (ns, nx, nz) = (self.ns, self.nx, self.nz);
        let mut target = Vec::with_capacity(ns * nx * nz);
        let mut gen = Vec::with_capacity(ns * nx * nz);
        for s in 0..ns {
            for x in 0..nx {
                for z in 0..nz {
                    target.push(self.q[s] * self.p_x[x] * self.p_z_given_xs[x][s][z]);
                    gen.push(self.p_z_given_x[x][z]);
                }
            }
        }
        CellModel::new(ns * nx, nz, target, gen, delta, kind)
    }

    /// Cells s, candidate x ~ p(x); target q(s)p(x|s).
    fn bin_model(&self, delta: f64, kind: TypicalityKind) -> Result<CellModel> {
        let mut target = Vec::new();
        let mut gen = Vec::new();
        for s in 0..self.ns {
            for x in 0..self.nx {
                target.push(self.q[s] * self.p_x_given_s[s][x]);
                gen.push(self.p_x[x]);
            }
        }
        CellModel::new(self.ns, self.nx, target, gen, delta, kind)
    }

    /// Cells y, candidate x ~ p(x); target p(y, x).
    fn message_model(&self, delta: f64, kind: TypicalityKind) -> Result<CellModel> {
        let mut target = vec![0.0; self.ny * self.nx];
        for y in 0..self.ny {
            for x in 0..self.nx {
                target[y * self.nx + x] = (0..self.ns)
                    .map(|s| self.q[s] * self.p_x_given_s[s][x] * self.p_y[x][s][y])
                    .sum();
            }
        }
        let gen = (0..self.ny)
            .flat_map(|_| self.p_x.iter().copied())
            .collect();
        CellModel::new(self.ny, self.nx, target, gen, delta, kind)
    }

    /// Cells (x, y), candidate z ~ p(z|x); target p(x, y, z).
    fn index_model(&self, delta: f64, kind: TypicalityKind) -> Result<CellModel> {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let mut target = vec![0.0; nx * ny * nz];
        let mut gen = vec![0.0; nx * ny * nz];
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let i = (x * ny + y) * nz + z;
                    target[i] = (0..self.ns)
                        .map(|s| {
                            self.q[s] * self.p_x[x] * self.p_z_given_xs[x][s][z] * self.p_y[x][s][y]
                        })
                        .sum();
                    gen[i] = self.p_z_given_x[x][z];
                }
            }
        }
        CellModel::new(nx * ny, nz, target, gen, delta, kind)
    }
}

/// How a unique-typical decoder resolved a list of candidates.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Decision {
    /// The transmitted candidate was the unique typical one.
    True,
    /// A single wrong candidate was typical and the true one was not.
    Competitor,
    /// No unique typical candidate: the first index was chosen.
    Fallback,
}

/// `others` i.i.d. wrong candidates, each typical with probability e^{ln_p}.
fn decide(rng: &mut ChaCha8Rng, others: f64, true_typical: bool, ln_p: f64) -> Decision {
    // counts of typical competitors: 0, 1 or more
    let (p0, p1) = if others <= 0.0 || ln_p == f64::NEG_INFINITY {
        (1.0, 0.0)
    } else {
        let p = ln_p.exp();
        let l1m = (-p).ln_1p();
        let p0 = (others * l1m).exp();
        let p1 = if others >= 1.0 {
            (others.ln() + ln_p + (others - 1.0) * l1m).exp()
        } else {
            0.0
        };
        (p0, p1.min(1.0 - p0))
    };
    let u: f64 = rng.gen();
    let competitors = if u < p0 {
        0
    } else if u < p0 + p1 {
        1
    } else {
        2
    };
    match (true_typical, competitors) {
        (true, 0) => Decision::True,
        (false, 1) => Decision::Competitor,
        _ => Decision::Fallback,
    }
}

/// First success index (0-based) among `tries` i.i.d. Bernoulli(e^{ln_p})
/// trials, or None if all fail.
fn first_success(rng: &mut ChaCha8Rng, tries: f64, ln_p: f64) -> Option<f64> {
    if ln_p == f64::NEG_INFINITY {
        return None;
    }
    let p = ln_p.exp();
    let l1m = (-p).ln_1p();
    let fail = (tries * l1m).exp();
    if rng.gen::<f64>() < fail {
        return None;
    }
    if l1m == f64::NEG_INFINITY {
        return Some(0.0);
    }
    let v: f64 = rng.gen::<f64>() * (1.0 - fail);
    Some(((-v).ln_1p() / l1m).floor().clamp(0.0, tries - 1.0))
}

#[derive(Clone, Copy, Debug, Default)]
struct TrialOutcome {
    blocks_wrong: usize,
    distortion: f64,
    cover_attempts: usize,
    cover_failures: usize,
}

fn aggregate(
    scheme: &str,
    cfg: &SimConfig,
    achieved: CodeRates,
    message_blocks: usize,
    outcomes: &[TrialOutcome],
) -> SimReport {
    let trials = outcomes.len() as f64;
    let errors = outcomes.iter().filter(|o| o.blocks_wrong > 0).count();
    let wrong: usize = outcomes.iter().map(|o| o.blocks_wrong).sum();
    let attempts: usize = outcomes.iter().map(|o| o.cover_attempts).sum();
    let failures: usize = outcomes.iter().map(|o| o.cover_failures).sum();
    let symbols = (cfg.n * message_blocks) as f64;
    let dist: f64 = outcomes.iter().map(|o| o.distortion).sum::<f64>() / (symbols * trials);
    SimReport {
        scheme: scheme.into(),
        trials: outcomes.len(),
        error_rate: errors as f64 / trials,
        block_error_rate: wrong as f64 / (trials * message_blocks as f64),
        avg_distortion: dist,
        covering_failure_rate: if attempts == 0 {
            0.0
        } else {
            failures as f64 / attempts as f64
        },
        seed: cfg.seed,
        config: cfg.clone(),
        achieved_rates: achieved,
    }
}

fn run_trials(
    trials: usize,
    f: impl Fn(usize) -> Result<TrialOutcome> + Sync + Send,
) -> Result<Vec<TrialOutcome>> {
    worker_pool()?.install(|| (0..trials).into_par_iter().map(f).collect())
}

/// Block-Markov scheme with strictly-causal CSI; a causal strategy is run on
/// the virtual channel N^(s) ∘ F^(s). Block j carries a fresh message and
/// the bin index of the covering index chosen for block j−1. The decoder
/// estimates block j after decoding block j+1; the last block's parameters
/// are never described and get the blind Bayes guess.
pub fn simulate_block_markov_sc(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
    cfg: &SimConfig,
) -> Result<SimReport> {
    cfg.validate()?;
    let (rpc, strategy) = match strategy.mode {
        CsiMode::StrictlyCausal => (rpc.clone(), strategy.clone()),
        CsiMode::Causal => {
            strategy.check_channel(rpc)?;
            (
                rpc.precompose(&strategy.shannon_strategies)?,
                strategy.without_shannon_strategies()?,
            )
        }
        other => {
            return Err(QrpsError::validation(format!(
                "block-Markov simulation needs an sc or causal strategy, got {other}"
            )))
        }
    };
    let model = LetterModel::build(&rpc, &strategy, est)?;
    let sizes = CodeSizes::new(cfg.n, &cfg.rates)?;
    let cover = model.cover_model(cfg.delta_cover, cfg.typicality)?;
    let message = model.message_model(cfg.delta_decode, cfg.typicality)?;
    let index = model.index_model(cfg.delta_decode, cfg.typicality)?;
    let (blind, _) = model.distortion.blind_cost(&model.q);

    let outcomes = run_trials(cfg.trials, |trial| {
        block_markov_trial(&model, &sizes, cfg, trial, &cover, &message, &index, blind)
    })?;
    Ok(aggregate(
        "block-markov",
        cfg,
        sizes.achieved(),
        cfg.blocks,
        &outcomes,
    ))
}

#[allow(clippy::too_many_arguments)]
fn block_markov_trial(
    model: &LetterModel,
    sizes: &CodeSizes,
    cfg: &SimConfig,
    trial: usize,
    cover: &CellModel,
    message: &CellModel,
    index: &CellModel,
    blind: usize,
) -> Result<TrialOutcome> {
    let mut rs = substream(cfg.seed, trial, Substream::Params);
    let mut rc = substream(cfg.seed, trial, Substream::Codebook);
    let mut rch = substream(cfg.seed, trial, Substream::Channel);
    let mut re = substream(cfg.seed, trial, Substream::Estimation);
    let (n, t) = (cfg.n, cfg.blocks);
    let mut out = TrialOutcome::default();

    let mut s = Vec::with_capacity(t);
    let mut x = Vec::with_capacity(t);
    let mut z = Vec::with_capacity(t);
    let mut y = Vec::with_capacity(t);
    // covering index chosen in block j (0-based), which fixes ℓ_j
    let mut k_idx = vec![0.0f64; t];
    for j in 0..t {
        let sj = model.draw_s(n, &mut rs);
        let xj: Vec<usize> = (0..n).map(|_| sample_index(&model.p_x, &mut rc)).collect();
        let cells: Vec<usize> = sj
            .iter()
            .zip(&xj)
            .map(|(&a, &b)| a * model.nx + b)
            .collect();
        let zj = if j + 1 < t {
            out.cover_attempts += 1;
            match first_success(&mut rc, sizes.covering(), cover.log_prob_typical(&cells)) {
                Some(k) => {
                    k_idx[j] = k;
                    cover.sample_typical(&cells, &mut rc).ok_or_else(|| {
                        QrpsError::Numerical("typical set vanished while sampling".into())
                    })?
                }
                None => {
                    out.cover_failures += 1;
                    cover.sample_free(&cells, &mut rc)
                }
            }
        } else {
            cover.sample_free(&cells, &mut rc)
        };
        y.push(model.draw_y(&xj, &sj, &mut rch));
        s.push(sj);
        x.push(xj);
        z.push(zj);
    }

    // (m_j, ℓ_{j-1}) decoding
    let ell_of = |j: usize| (k_idx[j] / sizes.bin_size).floor();
    let mut x_hat = Vec::with_capacity(t);
    let mut x_true = vec![false; t];
    let mut ell_ok = vec![false; t];
    for j in 0..t {
        let l_here = if j == 0 { 1.0 } else { sizes.bins };
        let total = sizes.messages * l_here;
        let cells = &y[j];
        let decision = decide(
            &mut rc,
            total - 1.0,
            message.is_typical(cells, &x[j]),
            message.log_prob_typical(cells),
        );
        let (m_ok, l_ok) = match decision {
            Decision::True => (true, true),
            Decision::Competitor => {
                let u: f64 = rc.gen::<f64>() * (total - 1.0);
                (
                    u < l_here - 1.0,
                    u >= l_here - 1.0 && u < l_here - 1.0 + sizes.messages - 1.0,
                )
            }
            Decision::Fallback => {
                let m_first = rc.gen::<f64>() * sizes.messages < 1.0;
                let l_first = j == 0 || ell_of(j - 1) == 0.0;
                (m_first, l_first)
            }
        };
        if !m_ok {
            out.blocks_wrong += 1;
        }
        x_true[j] = m_ok && l_ok;
        ell_ok[j] = l_ok;
        x_hat.push(if x_true[j] {
            x[j].clone()
        } else if decision == Decision::Competitor {
            message
                .sample_typical(cells, &mut rc)
                .unwrap_or_else(|| message.sample_free(cells, &mut rc))
        } else {
            message.sample_free(cells, &mut rc)
        });
    }

    // k_j within the decoded bin, then per-symbol estimation
    for j in 0..t {
        if j + 1 == t {
            out.distortion += s[j]
                .iter()
                .map(|&si| model.distortion.d(si, blind))
                .sum::<f64>();
            continue;
        }
        let cells: Vec<usize> = x_hat[j]
            .iter()
            .zip(&y[j])
            .map(|(&a, &b)| a * model.ny + b)
            .collect();
        let present = x_true[j] && ell_ok[j + 1];
        let true_typical = present && index.is_typical(&cells, &z[j]);
        let others = if present {
            sizes.bin_size - 1.0
        } else {
            sizes.bin_size
        };
        let decision = decide(
            &mut rc,
            others,
            true_typical,
            index.log_prob_typical(&cells),
        );
        let first_of_bin = k_idx[j] == ell_of(j) * sizes.bin_size;
        let z_hat = match decision {
            Decision::True => z[j].clone(),
            Decision::Fallback if present && first_of_bin => z[j].clone(),
            Decision::Competitor => index
                .sample_typical(&cells, &mut rc)
                .unwrap_or_else(|| index.sample_free(&cells, &mut rc)),
            Decision::Fallback => index.sample_free(&cells, &mut rc),
        };
        for i in 0..cfg.n {
            let h = model.estimate(x_hat[j][i], z_hat[i], y[j][i], &mut re);
            out.distortion += model.distortion.d(s[j][i], h);
        }
    }
    Ok(out)
}

/// Single-block Gel'fand–Pinsker binning (non-causal CSI): message m picks a
/// bin of 2^{nR̃_s} codewords x^n(m, ℓ) ~ p(x) and the encoder sends the
/// first one typical with s^n. R_s is not used. A no-CSI strategy runs the
/// same code with a single codeword per message and no search.
pub fn simulate_binning_nc(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    est: &EstimationPovm,
    cfg: &SimConfig,
) -> Result<SimReport> {
    cfg.validate()?;
    let searching = match strategy.mode {
        CsiMode::NonCausal => true,
        CsiMode::NoCsi => false,
        other => {
            return Err(QrpsError::validation(format!(
                "binning simulation needs an nc or none strategy, got {other}"
            )))
        }
    };
    let model = LetterModel::build(rpc, strategy, est)?;
    let rates = if searching {
        CodeRates::new(cfg.rates.r, 0.0, cfg.rates.r_s_tilde)?
    } else {
        CodeRates::new(cfg.rates.r, 0.0, 0.0)?
    };
    // one bin of 2^{nR̃_s} codewords per message
    let sizes = CodeSizes::new(cfg.n, &rates)?;
    let bins = sizes.covering();
    let binner = model.bin_model(cfg.delta_cover, cfg.typicality)?;
    let message = model.message_model(cfg.delta_decode, cfg.typicality)?;
    let scheme = if searching { "binning" } else { "no-csi" };

    let outcomes = run_trials(cfg.trials, |trial| {
        let mut rs = substream(cfg.seed, trial, Substream::Params);
        let mut rc = substream(cfg.seed, trial, Substream::Codebook);
        let mut rch = substream(cfg.seed, trial, Substream::Channel);
        let mut re = substream(cfg.seed, trial, Substream::Estimation);
        let mut out = TrialOutcome::default();
        let s = model.draw_s(cfg.n, &mut rs);
        let mut ell = 0.0;
        let x = if searching {
            out.cover_attempts = 1;
            match first_success(&mut rc, bins, binner.log_prob_typical(&s)) {
                Some(k) => {
                    ell = k;
                    binner.sample_typical(&s, &mut rc).ok_or_else(|| {
                        QrpsError::Numerical("typical set vanished while sampling".into())
                    })?
                }
                None => {
                    out.cover_failures = 1;
                    binner.sample_free(&s, &mut rc)
                }
            }
        } else {
            (0..cfg.n)
                .map(|_| sample_index(&model.p_x, &mut rc))
                .collect()
        };
        let y = model.draw_y(&x, &s, &mut rch);
        let total = sizes.messages * bins;
        let decision = decide(
            &mut rc,
            total - 1.0,
            message.is_typical(&y, &x),
            message.log_prob_typical(&y),
        );
        let (m_ok, x_ok) = match decision {
            Decision::True => (true, true),
            Decision::Competitor => (rc.gen::<f64>() * (total - 1.0) < bins - 1.0, false),
            Decision::Fallback => {
                let m_first = rc.gen::<f64>() * sizes.messages < 1.0;
                (m_first, m_first && ell == 0.0)
            }
        };
        if !m_ok {
            out.blocks_wrong = 1;
        }
        let x_hat = if x_ok {
            x
        } else if decision == Decision::Competitor {
            message
                .sample_typical(&y, &mut rc)
                .unwrap_or_else(|| message.sample_free(&y, &mut rc))
        } else {
            message.sample_free(&y, &mut rc)
        };
        for i in 0..cfg.n {
            let h = model.estimate(x_hat[i], 0, y[i], &mut re);
            out.distortion += model.distortion.d(s[i], h);
        }
        Ok(out)
    })?;
    let achieved = CodeRates {
        r: sizes.achieved().r,
        r_s: 0.0,
        r_s_tilde: bins.log2() / cfg.n as f64,
    };
    Ok(aggregate(scheme, cfg, achieved, 1, &outcomes))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    pub trials: usize,
    pub failure_rate: f64,
    pub n: usize,
    pub r_s_tilde: f64,
    pub delta: f64,
    pub typicality: TypicalityKind,
    pub seed: u64,
}

/// Covering experiment alone: draws (s^n, x^n) and searches 2^{nR̃_s}
/// codewords z^n ~ p(z|x) for one typical with them.
#[allow(clippy::too_many_arguments)]
pub fn simulate_covering(
    rpc: &RandomParameterChannel,
    strategy: &Strategy,
    n: usize,
    r_s_tilde: f64,
    trials: usize,
    delta: f64,
    typicality: TypicalityKind,
    seed: u64,
) -> Result<CoveringReport> {
    if trials == 0 || n == 0 {
        return Err(QrpsError::validation(
            "trials and blocklength must be positive",
        ));
    }
    if !strategy.mode.has_z() {
        return Err(QrpsError::validation(
            "covering needs an sc or causal strategy",
        ));
    }
    strategy.check_channel(rpc)?;
    let q = rpc.q();
    let ns = rpc.num_params();
    let (nx, nz) = (strategy.nx(), strategy.nz());
    let p_z_given_x: Vec<Vec<f64>> = (0..nx)
        .map(|x| {
            (0..nz)
                .map(|z| (0..ns).map(|s| q[s] * strategy.p_z_given_xs[x][s][z]).sum())
                .collect()
        })
        .collect();
    let mut target = Vec::new();
    let mut gen = Vec::new();
    for s in 0..ns {
        for x in 0..nx {
            for z in 0..nz {
                target.push(q[s] * strategy.p_x[x] * strategy.p_z_given_xs[x][s][z]);
                gen.push(p_z_given_x[x][z]);
            }
        }
    }
    let model = CellModel::new(ns * nx, nz, target, gen, delta, typicality)?;
    let sizes = CodeSizes::new(n, &CodeRates::new(0.0, 0.0, r_s_tilde)?)?;
    let fails: Vec<bool> = worker_pool()?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rs = substream(seed, trial, Substream::Params);
                let mut rc = substream(seed, trial, Substream::Codebook);
                let cells: Vec<usize> = (0..n)
                    .map(|_| {
                        let s = sample_index(q, &mut rs);
                        let x = sample_index(&strategy.p_x, &mut rc);
                        s * nx + x
                    })
                    .collect();
                first_success(&mut rc, sizes.covering(), model.log_prob_typical(&cells)).is_none()
            })
            .collect()
    });
    Ok(CoveringReport {
        trials,
        failure_rate: fails.iter().filter(|&&f| f).count() as f64 / trials as f64,
        n,
        r_s_tilde: sizes.achieved().r_s_tilde,
        delta,
        typicality,
        seed,
    })
}
