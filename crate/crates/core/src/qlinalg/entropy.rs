//! Entropies in bits and partial traces over tensor-product registers.

use super::eigen::eigvalsh;
use super::matrix::{CMatrix, ZERO};
use super::state::{check_density, DensityOperator};
use super::EIGEN_CLIP;
use crate::error::{QrpsError, Result};

/// −Σ λ log2 λ over a spectrum, with λ < 1e-12 treated as exact zeros.
pub fn spectral_entropy(eigs: &[f64]) -> f64 {
    eigs.iter()
        .filter(|&&l| l >= EIGEN_CLIP)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Shannon entropy of a (possibly unnormalized) weight vector, −Σ p log2 p.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    spectral_entropy(p)
}

/// Binary entropy h(p).
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    spectral_entropy(&rho.eigenvalues()).max(0.0)
}

/// Entropy of a raw matrix, validating the density-operator invariants first.
pub fn entropy_of_matrix(m: &CMatrix) -> Result<f64> {
    check_density(m)?;
    Ok(spectral_entropy(&eigvalsh(&m.hermitian_part())?))
}

/// −Tr M log2 M for a PSD operator of arbitrary trace (the unnormalized blocks
/// of a cq-state). No validation; callers build M from valid states.
pub(crate) fn psd_entropy(m: &CMatrix) -> f64 {
    spectral_entropy(&eigvalsh(m).expect("square PSD block"))
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(QrpsError::dimension("subsystem dims must be positive"));
    }
    let prod: usize = dims.iter().product();
    if prod != total {
        return Err(QrpsError::dimension(format!(
            "subsystem dims {dims:?} multiply to {prod}, operator has dim {total}"
        )));
    }
    Ok(())
}

/// Reduced operator on the subsystems listed in `keep` (in the given order
/// of `dims`, duplicates rejected).
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(QrpsError::dimension(
            "partial trace needs a square operator",
        ));
    }
    check_dims(m.rows(), dims)?;
    let n = dims.len();
    let mut kept = vec![false; n];
    for &k in keep {
        if k >= n || kept[k] {
            return Err(QrpsError::dimension(format!(
                "invalid kept subsystem index {k} for {n} subsystems"
            )));
        }
        kept[k] = true;
    }
    let keep_dims: Vec<usize> = (0..n).filter(|&i| kept[i]).map(|i| dims[i]).collect();
    let trace_dims: Vec<usize> = (0..n).filter(|&i| !kept[i]).map(|i| dims[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = trace_dims.iter().product();

    // row-major strides of the full index
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_idx: Vec<usize> = (0..n).filter(|&i| kept[i]).collect();
    let traced_idx: Vec<usize> = (0..n).filter(|&i| !kept[i]).collect();
    let offset = |local: usize, which: &[usize]| -> usize {
        let mut rem = local;
        let mut off = 0;
        for &sys in which.iter().rev() {
            off += (rem % dims[sys]) * strides[sys];
            rem /= dims[sys];
        }
        off
    };
    let kept_off: Vec<usize> = (0..dk).map(|i| offset(i, &kept_idx)).collect();
    let traced_off: Vec<usize> = (0..dt).map(|i| offset(i, &traced_idx)).collect();

    let mut out = CMatrix::zeros(dk, dk);
    for (i, &oi) in kept_off.iter().enumerate() {
        for (j, &oj) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub fn partial_trace(
    rho: &DensityOperator,
    dims: &[usize],
    keep: &[usize],
) -> Result<DensityOperator> {
    let m = partial_trace_matrix(rho.matrix(), dims, keep)?;
    if keep.is_empty() {
        // trace over everything: the 1x1 operator [1]
        return Ok(DensityOperator::from_trusted(m));
    }
    Ok(DensityOperator::from_trusted(m.hermitian_part()))
}

fn subsystem_entropy(rho: &DensityOperator, dims: &[usize], keep: &[usize]) -> Result<f64> {
    if keep.is_empty() {
        return Ok(0.0);
    }
    Ok(psd_entropy(&partial_trace_matrix(
        rho.matrix(),
        dims,
        keep,
    )?))
}

/// I(A;B) with A the subsystems in `a` and B the complement.
pub fn quantum_mutual_information(
    rho: &DensityOperator,
    dims: &[usize],
    a: &[usize],
) -> Result<f64> {
    check_dims(rho.dim(), dims)?;
    let b: Vec<usize> = (0..dims.len()).filter(|i| !a.contains(i)).collect();
    let all: Vec<usize> = (0..dims.len()).collect();
    Ok(
        subsystem_entropy(rho, dims, a)? + subsystem_entropy(rho, dims, &b)?
            - subsystem_entropy(rho, dims, &all)?,
    )
}

/// I(A;B|C) = H(AC) + H(BC) − H(ABC) − H(C) on explicit subsystem lists.
pub fn conditional_quantum_mutual_information(
    rho: &DensityOperator,
    dims: &[usize],
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64> {
    check_dims(rho.dim(), dims)?;
    let join = |x: &[usize], y: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = x.iter().chain(y).copied().collect();
        v.sort_unstable();
        v
    };
    let ac = join(a, c);
    let bc = join(b, c);
    let abc = join(&ac, b);
    let mut cs = c.to_vec();
    cs.sort_unstable();
    Ok(
        subsystem_entropy(rho, dims, &ac)? + subsystem_entropy(rho, dims, &bc)?
            - subsystem_entropy(rho, dims, &abc)?
            - subsystem_entropy(rho, dims, &cs)?,
    )
}

#[cfg(test)]
mod tests {
    use super::super::matrix::{C64, ONE};
    use super::super::state::Ket;
    use super::*;

    fn bell() -> DensityOperator {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = Ket::new(vec![C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)]).unwrap();
        DensityOperator::from_ket(&k)
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&bell(), &[2, 2], &[0]).unwrap();
        assert!(r.matrix().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < 1e-15);
        assert!((quantum_mutual_information(&bell(), &[2, 2], &[0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_product_on_three_systems() {
        let a = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let b = DensityOperator::maximally_mixed(3);
        let c = DensityOperator::from_ket(&Ket::plus());
        let abc = a.tensor(&b).tensor(&c);
        let ac = partial_trace(&abc, &[2, 3, 2], &[0, 2]).unwrap();
        assert!(ac.matrix().max_abs_diff(a.tensor(&c).matrix()) < 1e-14);
        let b_only = partial_trace(&abc, &[2, 3, 2], &[1]).unwrap();
        assert!(b_only.matrix().max_abs_diff(b.matrix()) < 1e-14);
    }

    #[test]
    fn bad_dims_rejected() {
        assert!(partial_trace(&bell(), &[2, 3], &[0]).is_err());
        assert!(partial_trace(&bell(), &[2, 2], &[2]).is_err());
    }

    #[test]
    fn entropy_of_matrix_validates() {
        let m = CMatrix::diag_real(&[0.5, 0.6]);
        assert!(entropy_of_matrix(&m).is_err());
        let mut h = CMatrix::diag_real(&[0.5, 0.5]);
        h[(0, 1)] = ONE;
        assert!(entropy_of_matrix(&h).is_err());
    }
}
