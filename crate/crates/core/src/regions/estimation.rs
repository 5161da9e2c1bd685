//! Parameter-estimation measurements Γ^{ŝ}_{B|x,z} and their optimization.

use crate::channels::DistortionFunction;
use crate::error::{QrpsError, Result};
use crate::qlinalg::{eigh, pinv_sqrt, CMatrix, DensityOperator, Povm};

/// One POVM per decoder context (x, z), outcomes indexed by ŝ.
#[derive(Clone, Debug)]
pub struct EstimationPovm {
    nx: usize,
    nz: usize,
    gamma: Vec<Povm>,
    distortion: DistortionFunction,
    restricted: bool,
}

impl EstimationPovm {
    /// `gamma[x * nz + z]` must have one element per estimate ŝ.
    pub fn new(
        nx: usize,
        nz: usize,
        gamma: Vec<Povm>,
        distortion: DistortionFunction,
    ) -> Result<Self> {
        if gamma.len() != nx * nz || gamma.is_empty() {
            return Err(QrpsError::dimension(format!(
                "{} POVMs for {nx}x{nz} decoder contexts",
                gamma.len()
            )));
        }
        let nh = distortion.num_s_hat();
        if gamma.iter().any(|p| p.len() != nh) {
            return Err(QrpsError::dimension(format!(
                "every estimation POVM needs {nh} outcomes, one per estimate"
            )));
        }
        let d = gamma[0].dim();
        if gamma.iter().any(|p| p.dim() != d) {
            return Err(QrpsError::dimension("estimation POVMs differ in dimension"));
        }
        Ok(Self {
            nx,
            nz,
            gamma,
            distortion,
            restricted: false,
        })
    }

    /// No measurement: ŝ = f(x, z).
    pub fn deterministic(
        nx: usize,
        nz: usize,
        dim: usize,
        distortion: DistortionFunction,
        f: impl Fn(usize, usize) -> usize,
    ) -> Result<Self> {
        let nh = distortion.num_s_hat();
        let mut gamma = Vec::with_capacity(nx * nz);
        for x in 0..nx {
            for z in 0..nz {
                let pick = f(x, z);
                if pick >= nh {
                    return Err(QrpsError::dimension(format!(
                        "estimate {pick} out of range"
                    )));
                }
                let els = (0..nh)
                    .map(|h| {
                        if h == pick {
                            CMatrix::identity(dim)
                        } else {
                            CMatrix::zeros(dim, dim)
                        }
                    })
                    .collect();
                gamma.push(Povm::from_elements(els)?);
            }
        }
        Self::new(nx, nz, gamma, distortion)
    }

    /// Measure `measurement`, then map each outcome y to ŝ with probability
    /// `relabel(x, z, y)[ŝ]`.
    pub fn relabeled(
        nx: usize,
        nz: usize,
        measurement: &Povm,
        distortion: DistortionFunction,
        relabel: impl Fn(usize, usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let nh = distortion.num_s_hat();
        let d = measurement.dim();
        let mut gamma = Vec::with_capacity(nx * nz);
        for x in 0..nx {
            for z in 0..nz {
                let mut els = vec![CMatrix::zeros(d, d); nh];
                for (y, e) in measurement.elements().iter().enumerate() {
                    let w = relabel(x, z, y);
                    if w.len() != nh {
                        return Err(QrpsError::dimension("relabeling has the wrong length"));
                    }
                    for (h, &p) in w.iter().enumerate() {
                        if p != 0.0 {
                            els[h].add_scaled(p, e);
                        }
                    }
                }
                gamma.push(Povm::from_elements(els)?);
            }
        }
        Self::new(nx, nz, gamma, distortion)
    }

    pub fn povm(&self, x: usize, z: usize) -> &Povm {
        &self.gamma[x * self.nz + z]
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn distortion(&self) -> &DistortionFunction {
        &self.distortion
    }

    /// True when the POVM came from the restricted candidate search rather
    /// than an exact optimization, so its distortion is only an upper bound.
    pub fn restricted(&self) -> bool {
        self.restricted
    }
}

/// Weighted conditional states ρ^{s,x} per decoder context (x, z).
///
/// `groups[x * nz + z]` lists `(s, weight, state)`; weights need not be
/// normalized (the optimal measurement is scale invariant per context).
#[derive(Clone, Debug)]
pub struct ConditionalFamily {
    pub nx: usize,
    pub nz: usize,
    pub groups: Vec<Vec<(usize, f64, DensityOperator)>>,
}

/// Expected distortion Σ_ŝ Tr(Γ^ŝ C_ŝ) of one context's optimized POVM,
/// plus the elements and whether the candidate search was restricted.
pub(crate) struct GroupSolution {
    pub cost: f64,
    pub elements: Vec<CMatrix>,
    pub restricted: bool,
}

/// C_ŝ = Σ_s w_s d(s, ŝ) ρ_s
fn cost_operators(
    members: &[(usize, f64, &CMatrix)],
    distortion: &DistortionFunction,
    dim: usize,
) -> Vec<CMatrix> {
    (0..distortion.num_s_hat())
        .map(|h| {
            let mut c = CMatrix::zeros(dim, dim);
            for &(s, w, rho) in members {
                let dd = distortion.d(s, h);
                if w > 0.0 && dd != 0.0 {
                    c.add_scaled(w * dd, rho);
                }
            }
            c
        })
        .collect()
}

/// Assign each measurement outcome to the estimate with least expected cost.
fn bayes_relabel(outcomes: &[CMatrix], costs: &[CMatrix], dim: usize) -> (f64, Vec<CMatrix>) {
    let mut els = vec![CMatrix::zeros(dim, dim); costs.len()];
    let mut total = 0.0;
    for lam in outcomes {
        let mut best = (0, f64::INFINITY);
        for (h, c) in costs.iter().enumerate() {
            let v = lam.trace_product(c).re;
            if v < best.1 - 1e-15 {
                best = (h, v);
            }
        }
        total += best.1;
        els[best.0] = &els[best.0] + lam;
    }
    (total, els)
}

fn projective_outcomes(eig: &crate::qlinalg::HermitianEigen) -> Vec<CMatrix> {
    (0..eig.values.len())
        .map(|k| {
            let v = eig.vector(k);
            CMatrix::outer(&v, &v)
        })
        .collect()
}

pub(crate) fn solve_group(
    members: &[(usize, f64, &CMatrix)],
    distortion: &DistortionFunction,
    dim: usize,
) -> Result<GroupSolution> {
    let nh = distortion.num_s_hat();
    let costs = cost_operators(members, distortion, dim);
    if nh == 1 {
        return Ok(GroupSolution {
            cost: costs[0].trace().re,
            elements: vec![CMatrix::identity(dim)],
            restricted: false,
        });
    }
    if nh == 2 {
        // Helstrom: Γ¹ projects onto the negative part of C₁ − C₀
        let eig = eigh(&(&costs[1] - &costs[0]))?;
        let g1 = eig.spectral_projector(|l| l < 0.0);
        let g0 = &CMatrix::identity(dim) - &g1;
        let cost = g0.trace_product(&costs[0]).re + g1.trace_product(&costs[1]).re;
        return Ok(GroupSolution {
            cost,
            elements: vec![g0, g1],
            restricted: false,
        });
    }

    let mut best: Option<(f64, Vec<CMatrix>)> = None;
    let mut consider = |cand: (f64, Vec<CMatrix>)| {
        if best.as_ref().is_none_or(|b| cand.0 < b.0 - 1e-15) {
            best = Some(cand);
        }
    };
    // pairwise cost-difference eigenbases
    for a in 0..nh {
        for b in (a + 1)..nh {
            let eig = eigh(&(&costs[a] - &costs[b]))?;
            consider(bayes_relabel(&projective_outcomes(&eig), &costs, dim));
        }
    }
    // pretty-good measurement of the weighted ensemble, completed on the kernel
    let mut sigma = CMatrix::zeros(dim, dim);
    for &(_, w, rho) in members {
        if w > 0.0 {
            sigma.add_scaled(w, rho);
        }
    }
    if sigma.trace().re > 0.0 {
        let root = pinv_sqrt(&sigma, 1e-10)?;
        let mut outcomes = Vec::with_capacity(members.len() + 1);
        let mut used = CMatrix::zeros(dim, dim);
        for &(_, w, rho) in members {
            if w > 0.0 {
                let lam = root.sandwich(&rho.scale(w)).hermitian_part();
                used = &used + &lam;
                outcomes.push(lam);
            }
        }
        let completion = (&CMatrix::identity(dim) - &used).hermitian_part();
        if completion.frobenius_norm() > 1e-12 {
            outcomes.push(completion);
        }
        consider(bayes_relabel(&outcomes, &costs, dim));
    }
    let (cost, elements) = best.expect("at least one candidate");
    Ok(GroupSolution {
        cost,
        elements,
        restricted: true,
    })
}

/// Minimum-distortion estimation POVM per context: exact (Helstrom) for a
/// binary estimate alphabet, otherwise the best of the cost-difference
/// eigenbasis measurements and the pretty-good measurement, each followed by
/// Bayes relabeling.
pub fn optimal_estimation_povm(
    family: &ConditionalFamily,
    distortion: &DistortionFunction,
) -> Result<EstimationPovm> {
    if family.groups.is_empty() || family.groups.iter().all(Vec::is_empty) {
        return Err(QrpsError::validation("empty conditional family"));
    }
    if family.groups.len() != family.nx * family.nz {
        return Err(QrpsError::dimension(
            "conditional family size differs from nx*nz",
        ));
    }
    let dim = family
        .groups
        .iter()
        .flatten()
        .next()
        .map(|(_, _, r)| r.dim())
        .expect("non-empty");
    let mut gamma = Vec::with_capacity(family.groups.len());
    let mut restricted = false;
    for g in &family.groups {
        if g.iter()
            .any(|&(s, w, ref r)| s >= distortion.num_s() || w < 0.0 || r.dim() != dim)
        {
            return Err(QrpsError::validation(
                "conditional family has an unknown parameter, negative weight or wrong dimension",
            ));
        }
        let members: Vec<_> = g.iter().map(|(s, w, r)| (*s, *w, r.matrix())).collect();
        let sol = solve_group(&members, distortion, dim)?;
        restricted |= sol.restricted;
        gamma.push(Povm::from_elements(sol.elements)?);
    }
    let mut est = EstimationPovm::new(family.nx, family.nz, gamma, distortion.clone())?;
    est.restricted = restricted;
    Ok(est)
}
