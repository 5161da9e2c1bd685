//! Frontier sweeps: for each distortion budget D0, maximize the rate over
//! strategies by multi-start cyclic coordinate ascent on the penalized
//! objective R − λ·max(0, D − D0).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::evaluate::{evaluate_with_optimal_estimator, Ensemble, RatePoint};
use super::strategy::{polar_isometry, CsiMode, InputStates, Strategy};
use crate::channels::{DistortionFunction, RandomParameterChannel};
use crate::error::{QrpsError, Result};
use crate::optim::grid_then_golden;
use crate::qlinalg::{CMatrix, Ket, KrausChannel, C64};

use crate::parallel::worker_pool;
pub use crate::parallel::THREADS_ENV;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Random restarts per grid point.
    pub starts: usize,
    /// Coordinate-ascent sweeps per restart.
    pub max_cycles: usize,
    /// Coarse line-search points per coordinate before golden refinement.
    pub line_grid: usize,
    /// Golden-section bracket width for the line search.
    pub line_tol: f64,
    /// Quadratic weight ρ of the augmented Lagrangian on D ≤ D0.
    pub penalty: f64,
    /// Accepted distortion excess D − D0 for a feasible point.
    pub feasibility_tol: f64,
    /// Stop a restart once a full sweep gains less than this.
    pub cycle_tol: f64,
    /// |X| override; defaults to the cardinality bound.
    pub x_card: Option<usize>,
    /// |Z| override; defaults to the cardinality bound.
    pub z_card: Option<usize>,
    /// Channel uses per letter (1 or 2).
    pub k: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            max_cycles: 40,
            line_grid: 8,
            line_tol: 1e-5,
            penalty: 200.0,
            feasibility_tol: 1e-6,
            cycle_tol: 1e-9,
            x_card: None,
            z_card: None,
            k: 1,
        }
    }
}

/// Alphabet sizes allowed for a d-dimensional input and |S| parameters.
pub fn cardinality_bounds(mode: CsiMode, d: usize, ns: usize) -> (usize, usize) {
    let x = match mode {
        CsiMode::NonCausal => d * d + ns,
        _ => d * d + 1,
    };
    let z = if mode.has_z() { d * d + ns } else { 1 };
    (x, z)
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(QrpsError::Config(m.into()));
        if self.starts == 0 {
            return bad("optimizer needs at least one start");
        }
        if self.max_cycles == 0 {
            return bad("optimizer needs at least one cycle");
        }
        if self.line_grid < 2 {
            return bad("line search grid needs at least two points");
        }
        if !(self.line_tol > 0.0) {
            return bad("line tolerance must be positive");
        }
        if !(self.penalty > 0.0) || !self.penalty.is_finite() {
            return bad("penalty weight must be positive and finite");
        }
        if !(self.feasibility_tol >= 0.0) {
            return bad("feasibility tolerance must be non-negative");
        }
        if !(1..=2).contains(&self.k) {
            return Err(QrpsError::Config(format!(
                "only k = 1 or k = 2 channel uses are supported, got {}",
                self.k
            )));
        }
        if self.x_card == Some(0) || self.z_card == Some(0) {
            return bad("alphabet sizes must be positive");
        }
        Ok(())
    }

    fn alphabets(&self, mode: CsiMode, d: usize, ns: usize) -> Result<(usize, usize)> {
        let (bx, bz) = cardinality_bounds(mode, d, ns);
        let nx = self.x_card.unwrap_or(bx);
        let nz = if mode.has_z() {
            self.z_card.unwrap_or(bz)
        } else {
            1
        };
        if nx > bx || nz > bz {
            return Err(QrpsError::Config(format!(
                "alphabet sizes |X|={nx}, |Z|={nz} exceed the bounds {bx}, {bz}"
            )));
        }
        Ok((nx, nz))
    }
}

/// Best strategy found for one distortion budget.
#[derive(Clone, Debug)]
pub struct FrontierPoint {
    pub d_target: f64,
    /// Running maximum of per-use rates up to this budget.
    pub rate: f64,
    /// Point achieving `rate`, possibly found at a smaller budget.
    pub point: Option<RatePoint>,
    /// `point` was inherited from an earlier grid entry by the running max.
    pub carried: bool,
}

impl FrontierPoint {
    pub fn clamped(&self) -> bool {
        self.point.as_ref().is_none_or(|p| p.clamped)
    }

    pub fn povm_restricted(&self) -> bool {
        self.point.as_ref().is_some_and(|p| p.povm_restricted)
    }
}

#[derive(Clone, Debug)]
pub struct RegionFrontier {
    pub mode: CsiMode,
    pub k: usize,
    pub seed: u64,
    pub points: Vec<FrontierPoint>,
}

#[derive(Clone, Debug)]
struct Params {
    px: Vec<f64>,
    /// [x * ns + s] over z
    pz: Vec<Vec<f64>>,
    /// [s] over x
    pxs: Vec<Vec<f64>>,
    /// [x], 2d real components
    states: Vec<Vec<f64>>,
    /// [s], 2d² real components of the unnormalized isometry
    iso: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug)]
enum Coord {
    Px(usize),
    Pz(usize, usize),
    Pxs(usize, usize),
    State(usize, usize),
    Iso(usize, usize),
}

const ISO_RANGE: f64 = 1.5;
const MULTIPLIER_UPDATES: usize = 8;
const MULTIPLIER_TOL: f64 = 1e-3;
const POLISH_STAGES: usize = 3;

#[derive(Clone, Copy, Debug)]
enum Penalty {
    /// μg + ρg²/2 for g ≥ −μ/ρ, else −μ²/2ρ
    Augmented { mu: f64, rho: f64 },
    /// λ·max(0, g)
    Exact(f64),
}

impl Penalty {
    fn cost(self, g: f64) -> f64 {
        match self {
            Penalty::Augmented { mu, rho } => {
                if mu + rho * g >= 0.0 {
                    mu * g + 0.5 * rho * g * g
                } else {
                    -mu * mu / (2.0 * rho)
                }
            }
            Penalty::Exact(w) => w * g.max(0.0),
        }
    }
}

fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

fn set_simplex(p: &mut [f64], i: usize, v: f64) {
    let rest = 1.0 - p[i];
    let new_rest = 1.0 - v;
    let n = p.len();
    if rest > 1e-12 {
        let f = new_rest / rest;
        for (j, pj) in p.iter_mut().enumerate() {
            if j != i {
                *pj *= f;
            }
        }
    } else {
        for (j, pj) in p.iter_mut().enumerate() {
            if j != i {
                *pj = new_rest / (n - 1) as f64;
            }
        }
    }
    p[i] = v;
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return false;
    }
    v.iter_mut().for_each(|a| *a /= norm);
    true
}

struct Problem<'a> {
    rpc: &'a RandomParameterChannel,
    distortion: &'a DistortionFunction,
    mode: CsiMode,
    d: usize,
    ns: usize,
    nx: usize,
    nz: usize,
    cfg: &'a OptimizerConfig,
}

impl Problem<'_> {
    fn random_params(&self, rng: &mut ChaCha8Rng) -> Params {
        let has_z = self.mode.has_z();
        Params {
            px: if self.mode == CsiMode::NonCausal {
                Vec::new()
            } else {
                random_simplex(self.nx, rng)
            },
            pz: if has_z {
                (0..self.nx * self.ns)
                    .map(|_| random_simplex(self.nz, rng))
                    .collect()
            } else {
                Vec::new()
            },
            pxs: if self.mode == CsiMode::NonCausal {
                (0..self.ns).map(|_| random_simplex(self.nx, rng)).collect()
            } else {
                Vec::new()
            },
            states: (0..self.nx).map(|_| random_unit(2 * self.d, rng)).collect(),
            iso: if self.mode == CsiMode::Causal {
                (0..self.ns)
                    .map(|_| {
                        (0..2 * self.d * self.d)
                            .map(|_| rng.gen_range(-1.0..1.0))
                            .collect()
                    })
                    .collect()
            } else {
                Vec::new()
            },
        }
    }

    fn coords(&self, p: &Params) -> Vec<Coord> {
        let mut c = Vec::new();
        if p.px.len() > 1 {
            c.extend((0..p.px.len()).map(Coord::Px));
        }
        for (r, row) in p.pz.iter().enumerate() {
            if row.len() > 1 {
                c.extend((0..row.len()).map(|i| Coord::Pz(r, i)));
            }
        }
        for (r, row) in p.pxs.iter().enumerate() {
            if row.len() > 1 {
                c.extend((0..row.len()).map(|i| Coord::Pxs(r, i)));
            }
        }
        for (x, st) in p.states.iter().enumerate() {
            // the first component's imaginary part only sets a global phase
            c.extend(
                (0..st.len())
                    .filter(|&i| i != 1)
                    .map(|i| Coord::State(x, i)),
            );
        }
        for (s, m) in p.iso.iter().enumerate() {
            c.extend((0..m.len()).map(|i| Coord::Iso(s, i)));
        }
        c
    }

    fn range(c: Coord) -> (f64, f64) {
        match c {
            Coord::Px(_) | Coord::Pz(..) | Coord::Pxs(..) => (0.0, 1.0),
            Coord::State(..) => (-1.0, 1.0),
            Coord::Iso(..) => (-ISO_RANGE, ISO_RANGE),
        }
    }

    fn with(p: &Params, c: Coord, v: f64) -> Option<Params> {
        let mut q = p.clone();
        match c {
            Coord::Px(i) => set_simplex(&mut q.px, i, v),
            Coord::Pz(r, i) => set_simplex(&mut q.pz[r], i, v),
            Coord::Pxs(r, i) => set_simplex(&mut q.pxs[r], i, v),
            Coord::State(x, i) => {
                q.states[x][i] = v;
                if !normalize(&mut q.states[x]) {
                    return None;
                }
            }
            Coord::Iso(s, i) => q.iso[s][i] = v,
        }
        Some(q)
    }

    fn strategy(&self, p: &Params) -> Result<Strategy> {
        let kets = p
            .states
            .iter()
            .map(|v| Ket::normalized(v.chunks(2).map(|c| C64::new(c[0], c[1])).collect()))
            .collect::<Result<Vec<_>>>()?;
        let pz = || -> Vec<Vec<Vec<f64>>> {
            (0..self.nx)
                .map(|x| {
                    (0..self.ns)
                        .map(|s| p.pz[x * self.ns + s].clone())
                        .collect()
                })
                .collect()
        };
        match self.mode {
            CsiMode::StrictlyCausal => Strategy::strictly_causal(p.px.clone(), pz(), kets),
            CsiMode::Causal => {
                let f = p
                    .iso
                    .iter()
                    .map(|m| {
                        let raw = CMatrix::from_vec(
                            self.d,
                            self.d,
                            m.chunks(2).map(|c| C64::new(c[0], c[1])).collect(),
                        )?;
                        KrausChannel::unitary(polar_isometry(&raw)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Strategy::causal(p.px.clone(), pz(), kets, f)
            }
            CsiMode::NonCausal => Strategy::non_causal(p.pxs.clone(), InputStates::PerSymbol(kets)),
            CsiMode::NoCsi => Strategy::no_csi(p.px.clone(), kets),
        }
    }

    /// (objective, raw rate, distortion)
    fn objective(&self, p: &Params, d0: f64, penalty: Penalty) -> (f64, f64, f64) {
        let eval = || -> Result<(f64, f64, f64)> {
            let st = self.strategy(p)?;
            let ens = Ensemble::from_strategy(self.rpc, &st)?;
            let t = ens.rate_terms(self.mode)?;
            let raw = t.information - t.penalty;
            if d0 >= self.distortion.d_max() {
                return Ok((raw, raw, 0.0));
            }
            let (dist, _) = ens.optimal_distortion(self.distortion)?;
            Ok((raw - penalty.cost(dist - d0), raw, dist))
        };
        eval().unwrap_or((f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY))
    }

    fn ascend(&self, d0: f64, rng: &mut ChaCha8Rng) -> (Params, f64, f64) {
        let mut p = self.random_params(rng);
        let coords = self.coords(&p);
        // augmented Lagrangian on the constraint D ≤ D0
        let tol = self.cfg.feasibility_tol;
        let rho = self.cfg.penalty;
        let mut mu = 0.0;
        let (mut raw, mut dist) = (f64::NEG_INFINITY, f64::INFINITY);
        for _ in 0..MULTIPLIER_UPDATES {
            (p, raw, dist) = self.ascend_stage(p, &coords, d0, Penalty::Augmented { mu, rho });
            let g = dist - d0;
            let next = (mu + rho * g).max(0.0);
            if g <= tol && (next - mu).abs() < MULTIPLIER_TOL {
                break;
            }
            mu = next;
        }
        // exact-penalty polish for points still slightly outside the budget
        let mut weight = (2.0 * mu).max(rho);
        for _ in 0..POLISH_STAGES {
            if dist <= d0 + tol {
                break;
            }
            (p, raw, dist) = self.ascend_stage(p, &coords, d0, Penalty::Exact(weight));
            weight *= 10.0;
        }
        (p, raw, dist)
    }

    fn ascend_stage(
        &self,
        mut p: Params,
        coords: &[Coord],
        d0: f64,
        penalty: Penalty,
    ) -> (Params, f64, f64) {
        let (mut val, mut raw, mut dist) = self.objective(&p, d0, penalty);
        for _ in 0..self.cfg.max_cycles {
            let before = val;
            for &c in coords {
                let (lo, hi) = Self::range(c);
                let f = |v: f64| match Self::with(&p, c, v) {
                    Some(q) => self.objective(&q, d0, penalty).0,
                    None => f64::NEG_INFINITY,
                };
                if let Some((v, _)) =
                    grid_then_golden(f, lo, hi, self.cfg.line_grid, self.cfg.line_tol, val)
                {
                    if let Some(q) = Self::with(&p, c, v) {
                        let (nv, nr, nd) = self.objective(&q, d0, penalty);
                        if nv > val {
                            p = q;
                            (val, raw, dist) = (nv, nr, nd);
                        }
                    }
                }
            }
            if val - before < self.cfg.cycle_tol {
                break;
            }
        }
        (p, raw, dist)
    }
}

/// Maximizes the rate at each budget in `grid` (ascending). With `cfg.k = 2`
/// the channel and distortion are replaced by their two-fold tensor powers
/// and rates are reported per channel use. Same seed, same frontier.
pub fn sweep_region(
    rpc: &RandomParameterChannel,
    distortion: &DistortionFunction,
    mode: CsiMode,
    grid: &[f64],
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<RegionFrontier> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(QrpsError::validation("distortion grid is empty"));
    }
    if grid.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(QrpsError::validation(
            "distortion grid entries must be finite and non-negative",
        ));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(QrpsError::validation(
            "distortion grid must be sorted ascending",
        ));
    }
    if distortion.num_s() != rpc.num_params() {
        return Err(QrpsError::dimension(format!(
            "distortion table has {} rows, channel has {} parameters",
            distortion.num_s(),
            rpc.num_params()
        )));
    }
    let (rpc_k, dist_k) = if cfg.k == 1 {
        (rpc.clone(), distortion.clone())
    } else {
        (rpc.tensor_power(cfg.k)?, distortion.tensor_power(cfg.k)?)
    };
    let d = rpc_k.in_dim();
    let ns = rpc_k.num_params();
    let (nx, nz) = cfg.alphabets(mode, d, ns)?;
    let problem = Problem {
        rpc: &rpc_k,
        distortion: &dist_k,
        mode,
        d,
        ns,
        nx,
        nz,
        cfg,
    };

    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..cfg.starts).map(move |r| (g, r)))
        .collect();
    let run = |&(g, r): &(usize, usize)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((g * cfg.starts + r) as u64);
        problem.ascend(grid[g], &mut rng)
    };
    let results: Vec<_> = worker_pool()?.install(|| tasks.par_iter().map(run).collect());

    let mut points: Vec<FrontierPoint> = Vec::with_capacity(grid.len());
    for (g, &d0) in grid.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..cfg.starts {
            let (_, raw, dist) = &results[g * cfg.starts + r];
            if *dist <= d0 + cfg.feasibility_tol
                && raw.is_finite()
                && best.is_none_or(|(_, b)| *raw > b)
            {
                best = Some((r, *raw));
            }
        }
        let found = match best {
            Some((r, _)) => {
                let strategy = problem.strategy(&results[g * cfg.starts + r].0)?;
                let (mut pt, _) = evaluate_with_optimal_estimator(&rpc_k, &strategy, &dist_k)?;
                pt.k = cfg.k;
                pt.rate /= cfg.k as f64;
                pt.raw_rate /= cfg.k as f64;
                Some(pt)
            }
            None => None,
        };
        let prev = points.last();
        let found_rate = found.as_ref().map_or(f64::NEG_INFINITY, |p| p.rate);
        let point = match prev {
            Some(pp) if pp.point.is_some() && pp.rate > found_rate => FrontierPoint {
                d_target: d0,
                rate: pp.rate,
                point: pp.point.clone(),
                carried: true,
            },
            _ => FrontierPoint {
                d_target: d0,
                rate: found.as_ref().map_or(0.0, |p| p.rate),
                point: found,
                carried: false,
            },
        };
        points.push(point);
    }
    Ok(RegionFrontier {
        mode,
        k: cfg.k,
        seed,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_move_keeps_normalization() {
        let mut p = vec![0.2, 0.3, 0.5];
        set_simplex(&mut p, 1, 0.9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(p[1], 0.9);
        let mut q = vec![1.0, 0.0, 0.0];
        set_simplex(&mut q, 0, 0.4);
        assert!((q[1] - 0.3).abs() < 1e-15 && (q[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn config_rejects_bad_budget() {
        let mut cfg = OptimizerConfig::default();
        cfg.starts = 0;
        assert!(matches!(cfg.validate(), Err(QrpsError::Config(_))));
        cfg = OptimizerConfig::default();
        cfg.k = 3;
        assert!(matches!(cfg.validate(), Err(QrpsError::Config(_))));
    }

    #[test]
    fn cardinality_bound_values() {
        assert_eq!(cardinality_bounds(CsiMode::StrictlyCausal, 2, 2), (5, 6));
        assert_eq!(cardinality_bounds(CsiMode::NoCsi, 2, 2), (5, 1));
    }
}
