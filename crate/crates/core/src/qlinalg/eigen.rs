//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Intended for the small dense operators this crate works with (dim <= 64 in
//! the region code, a few hundred at most for square-root-measurement Gram
//! matrices). Sweeps stop once the off-diagonal Frobenius norm falls below
//! [`JACOBI_TOL`] relative to `max(1, ||A||_F)`.

use num_complex::Complex64 as C64;

use super::matrix::CMatrix;
use crate::error::{QrpsError, Result};

pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and matching unit eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// V diag(f(λ)) V†
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                if fv[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * fv[k];
                }
            }
            acc
        })
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        self.map_spectrum(|l| if keep(l) { 1.0 } else { 0.0 })
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrised first, so tiny round-off asymmetries are harmless;
/// genuinely non-Hermitian input is the caller's responsibility.
pub fn eigh(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(QrpsError::dimension(format!(
            "eigh needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_TOL * a.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    while off_diagonal_norm(&a) >= threshold {
        if sweeps == MAX_SWEEPS {
            return Err(QrpsError::Numerical(format!(
                "Jacobi did not converge in {MAX_SWEEPS} sweeps (dim {n})"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// One Jacobi rotation zeroing a[p][q].
///
/// J restricted to (p, q) is [[c, s e^{iφ}], [-s e^{-iφ}, c]] with
/// a[p][q] = |a[p][q]| e^{iφ}; A <- J† A J, V <- V J.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let n = a.rows();
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let s_fwd = phase * s; // s e^{iφ}
    let s_bwd = phase.conj() * s; // s e^{-iφ}

    // columns: A <- A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s_bwd;
        a[(k, q)] = akp * s_fwd + akq * c;
    }
    // rows: A <- J† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s_fwd;
        a[(q, k)] = apk * s_bwd + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s_bwd;
        v[(k, q)] = vkp * s_fwd + vkq * c;
    }
}

/// Eigenvalues only, ascending. Closed form for dim <= 2.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    match m.rows() {
        0 => Ok(Vec::new()),
        1 if m.is_square() => Ok(vec![m[(0, 0)].re]),
        2 if m.is_square() => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
            let mean = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let r = (half * half + b.norm_sqr()).sqrt();
            Ok(vec![mean - r, mean + r])
        }
        _ => Ok(eigh(m)?.values),
    }
}

/// Principal square root of a PSD matrix (negative round-off eigenvalues clipped).
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    Ok(eigh(m)?.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Moore–Penrose inverse square root on the support (eigenvalues > cutoff).
pub fn pinv_sqrt(m: &CMatrix, cutoff: f64) -> Result<CMatrix> {
    Ok(eigh(m)?.map_spectrum(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 }))
}

#[cfg(test)]
pub(crate) fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square()
        && u.adjoint()
            .matmul(u)
            .max_abs_diff(&CMatrix::identity(u.rows()))
            <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        // small LCG so these tests need no RNG dependency
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        (&g + &g.adjoint()).scale(0.5)
    }

    #[test]
    fn reconstructs_random_hermitian() {
        for (n, seed) in [(3usize, 1u64), (5, 2), (8, 3), (16, 4)] {
            let h = random_hermitian(n, seed);
            let e = eigh(&h).unwrap();
            let back = e.map_spectrum(|l| l);
            assert!(back.max_abs_diff(&h) < 1e-10, "n={n}");
            assert!(is_unitary(&e.vectors, 1e-10));
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn closed_form_2x2_agrees_with_jacobi() {
        let h = random_hermitian(2, 11);
        let fast = eigvalsh(&h).unwrap();
        let slow = eigh(&h).unwrap().values;
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let d = CMatrix::diag_real(&[3.0, -1.0, 2.0]);
        let e = eigh(&d).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn sqrt_squares_back() {
        let g = random_hermitian(4, 7);
        let psd = g.matmul(&g.adjoint());
        let r = psd_sqrt(&psd).unwrap();
        assert!(r.matmul(&r).max_abs_diff(&psd) < 1e-10);
    }

    #[test]
    fn non_square_rejected() {
        assert!(eigh(&CMatrix::zeros(2, 3)).is_err());
    }
}
