//! Square-root (pretty-good) measurement decoding over product states.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QrpsError, Result};
use crate::qlinalg::{eigh, pinv_sqrt, CMatrix, DensityOperator, Ket, Povm, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest total Hilbert-space dimension the decoder accepts.
pub const MAX_SRM_DIM: usize = 1 << 12;
/// Eigenvalue floor for the support projector of a mixed candidate.
pub const DOMINANT_EIGENVALUE: f64 = 0.01;
/// Cutoff for the pseudo-inverse square root of the Gram matrix.
pub const GRAM_CUTOFF: f64 = 1e-10;

/// ρ_1 ⊗ … ⊗ ρ_n, kept factored.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    factors: Vec<DensityOperator>,
}

impl ProductState {
    pub fn new(factors: Vec<DensityOperator>) -> Result<Self> {
        if factors.is_empty() {
            return Err(QrpsError::validation(
                "product state needs at least one factor",
            ));
        }
        Ok(Self { factors })
    }

    pub fn from_kets(kets: &[Ket]) -> Result<Self> {
        Self::new(kets.iter().map(DensityOperator::from_ket).collect())
    }

    pub fn factors(&self) -> &[DensityOperator] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim()).collect()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).product()
    }

    pub fn to_density(&self) -> DensityOperator {
        let mut it = self.factors.iter();
        let first = it.next().expect("non-empty").clone();
        it.fold(first, |acc, f| acc.tensor(f))
    }

    /// (ρ_1 ⊗ … ⊗ ρ_n) v without forming the full matrix.
    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let dims = self.dims();
        let mut cur = v.to_vec();
        let total = cur.len();
        let mut stride = total;
        for (f, &d) in self.factors.iter().zip(&dims) {
            stride /= d;
            let m = f.matrix();
            let mut next = vec![ZERO; total];
            let block = d * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for r in 0..d {
                        let mut acc = ZERO;
                        for c in 0..d {
                            acc += m[(r, c)] * cur[base + c * stride];
                        }
                        next[base + r * stride] = acc;
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Product eigenvectors of a candidate whose eigenvalue is at least the
/// dominant threshold; a pure candidate yields its single state vector.
fn support_vectors(state: &ProductState) -> Result<Vec<Vec<C64>>> {
    let mut partial: Vec<(f64, Vec<C64>)> = vec![(1.0, vec![C64::new(1.0, 0.0)])];
    for f in &state.factors {
        let e = eigh(f.matrix())?;
        let mut next = Vec::new();
        for (lam, v) in &partial {
            for (k, &l) in e.values.iter().enumerate() {
                let w = lam * l;
                if w >= DOMINANT_EIGENVALUE {
                    next.push((w, kron_vec(v, &e.vector(k))));
                }
            }
        }
        partial = next;
    }
    Ok(partial.into_iter().map(|(_, v)| v).collect())
}

fn check_candidates(candidates: &[ProductState]) -> Result<Vec<usize>> {
    let first = candidates
        .first()
        .ok_or_else(|| QrpsError::validation("no candidate states"))?;
    let dims = first.dims();
    if candidates.iter().any(|c| c.dims() != dims) {
        return Err(QrpsError::dimension(
            "candidates differ in their factor dimensions",
        ));
    }
    let total: usize = dims.iter().product();
    if total > MAX_SRM_DIM {
        return Err(QrpsError::Config(format!(
            "total dimension {total} exceeds the decoder limit {MAX_SRM_DIM}"
        )));
    }
    Ok(dims)
}

/// Measurement vectors μ_c = S^{-1/2} ψ_c with their owning candidate.
fn measurement_vectors(candidates: &[ProductState]) -> Result<Vec<(usize, Vec<C64>)>> {
    let mut cols = Vec::new();
    for (m, c) in candidates.iter().enumerate() {
        for v in support_vectors(c)? {
            cols.push((m, v));
        }
    }
    let k = cols.len();
    let gram = CMatrix::from_fn(k, k, |i, j| {
        cols[i]
            .1
            .iter()
            .zip(&cols[j].1)
            .map(|(a, b)| a.conj() * b)
            .sum()
    });
    let g = pinv_sqrt(&gram, GRAM_CUTOFF)?;
    let d = cols.first().map_or(0, |c| c.1.len());
    Ok((0..k)
        .map(|c| {
            let mut mu = vec![ZERO; d];
            for (j, (_, psi)) in cols.iter().enumerate() {
                let w = g[(j, c)];
                if w != ZERO {
                    for (acc, p) in mu.iter_mut().zip(psi) {
                        *acc += p * w;
                    }
                }
            }
            (cols[c].0, mu)
        })
        .collect())
}

/// Outcome probabilities of the square-root measurement on `received`: one
/// entry per candidate followed by the completion (error) outcome.
pub fn srm_probabilities(candidates: &[ProductState], received: &ProductState) -> Result<Vec<f64>> {
    let dims = check_candidates(candidates)?;
    if received.dims() != dims {
        return Err(QrpsError::dimension(
            "received state does not match the candidates",
        ));
    }
    let mut p = vec![0.0; candidates.len() + 1];
    for (m, mu) in measurement_vectors(candidates)? {
        let r = received.apply(&mu);
        let v: f64 = mu.iter().zip(&r).map(|(a, b)| (a.conj() * b).re).sum();
        p[m] += v.max(0.0);
    }
    let used: f64 = p.iter().sum();
    p[candidates.len()] = (1.0 - used).max(0.0);
    Ok(p)
}

/// Samples the square-root measurement; `None` is the error outcome.
pub fn sqrt_measurement_decoder(
    candidates: &[ProductState],
    received: &ProductState,
    rng: &mut ChaCha8Rng,
) -> Result<Option<usize>> {
    let p = srm_probabilities(candidates, received)?;
    let mut u = rng.gen::<f64>() * p.iter().sum::<f64>();
    for (i, &w) in p.iter().enumerate() {
        if u < w {
            return Ok((i < candidates.len()).then_some(i));
        }
        u -= w;
    }
    Ok(None)
}

/// The completed POVM {Λ_m} ∪ {I − Σ Λ_m} as explicit matrices.
pub fn srm_povm(candidates: &[ProductState]) -> Result<Povm> {
    let dims = check_candidates(candidates)?;
    let d: usize = dims.iter().product();
    let mut elements = vec![CMatrix::zeros(d, d); candidates.len()];
    for (m, mu) in measurement_vectors(candidates)? {
        elements[m].add_scaled(1.0, &CMatrix::outer(&mu, &mu));
    }
    let mut rest = CMatrix::identity(d);
    for e in &elements {
        rest.add_scaled(-1.0, e);
    }
    let mut outcomes: Vec<(String, CMatrix)> = elements
        .into_iter()
        .enumerate()
        .map(|(m, e)| (m.to_string(), e.hermitian_part()))
        .collect();
    outcomes.push(("error".into(), rest.hermitian_part()));
    Povm::new(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_candidates_decode_perfectly() {
        let c: Vec<_> = (0..4)
            .map(|k| {
                ProductState::from_kets(&[Ket::basis(2, k >> 1), Ket::basis(2, k & 1)]).unwrap()
            })
            .collect();
        for (m, cand) in c.iter().enumerate() {
            let p = srm_probabilities(&c, cand).unwrap();
            assert!((p[m] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_apply_matches_dense() {
        let a = DensityOperator::from_ket(&Ket::plus());
        let b = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        let ps = ProductState::new(vec![a, b]).unwrap();
        let v: Vec<C64> = (0..4).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let dense = ps.to_density().matrix().mul_vec(&v);
        let fast = ps.apply(&v);
        for (x, y) in dense.iter().zip(&fast) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
