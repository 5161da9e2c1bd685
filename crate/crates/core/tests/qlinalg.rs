use proptest::prelude::*;
use qrps_core::qlinalg::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityOperator {
    let a = random_matrix(rng, d);
    let m = a.matmul(&a.adjoint());
    let tr = m.trace().re;
    DensityOperator::new(m.scale(1.0 / tr)).unwrap()
}

/// Unitary from the eigenvectors of a random Hermitian matrix.
fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let e = eigh(&random_matrix(rng, d).hermitian_part()).unwrap();
    CMatrix::from_fn(d, d, |i, j| e.vector(j)[i])
}

/// Random channel from an isometry V: K_k = rows k·d..(k+1)·d of V.
fn random_channel(rng: &mut ChaCha8Rng, d: usize, kraus: usize) -> KrausChannel {
    let u = random_unitary(rng, d * kraus);
    let ops = (0..kraus)
        .map(|k| CMatrix::from_fn(d, d, |i, j| u[(k * d + i, j)]))
        .collect();
    KrausChannel::new(ops).unwrap()
}

fn h(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[test]
fn entropy_examples() {
    assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(2)) - 1.0).abs() < 1e-12);
    assert!(von_neumann_entropy(&DensityOperator::from_ket(&Ket::plus())).abs() < 1e-12);
    let s = von_neumann_entropy(&DensityOperator::diagonal(&[0.89, 0.11]).unwrap());
    assert!((s - h(0.11)).abs() < 1e-12);
    assert!((s - 0.49999).abs() < 1e-4);
}

fn bell() -> DensityOperator {
    let r = 0.5f64.sqrt();
    let k = Ket::new(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]).unwrap();
    DensityOperator::from_ket(&k)
}

#[test]
fn mutual_information_examples() {
    let prod = DensityOperator::diagonal(&[0.3, 0.7])
        .unwrap()
        .tensor(&DensityOperator::from_ket(&Ket::plus()));
    assert!(
        quantum_mutual_information(&prod, &[2, 2], &[0])
            .unwrap()
            .abs()
            < 1e-10
    );
    assert!((quantum_mutual_information(&bell(), &[2, 2], &[0]).unwrap() - 2.0).abs() < 1e-10);

    let p = 0.15;
    let flip = |x: usize| {
        DensityOperator::diagonal(&if x == 0 { [1.0 - p, p] } else { [p, 1.0 - p] }).unwrap()
    };
    let cq = ClassicalQuantumState::new(
        vec![Axis::new("X", 2)],
        vec![0.5, 0.5],
        vec![flip(0), flip(1)],
    )
    .unwrap();
    let i = cq
        .mutual_information(&[Part::Classical(0)], &[Part::Quantum])
        .unwrap();
    assert!((i - (1.0 - h(p))).abs() < 1e-10);
}

#[test]
fn channel_examples() {
    let rho = DensityOperator::diagonal(&[0.2, 0.8]).unwrap();
    let out = apply_channel(&KrausChannel::identity(2), &rho).unwrap();
    assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-12);

    let z = KrausChannel::unitary(pauli::z()).unwrap();
    let out = apply_channel(&z, &DensityOperator::from_ket(&Ket::plus())).unwrap();
    assert!(out.matrix().max_abs_diff(&Ket::minus().projector()) < 1e-12);

    let eps: f64 = 0.3;
    let deph = KrausChannel::new(vec![
        CMatrix::identity(2).scale((1.0 - eps).sqrt()),
        pauli::z().scale(eps.sqrt()),
    ])
    .unwrap();
    let out = apply_channel(&deph, &DensityOperator::from_ket(&Ket::plus())).unwrap();
    let pp = out.expectation(&Ket::plus().projector());
    let mm = out.expectation(&Ket::minus().projector());
    assert!((pp - (1.0 - eps)).abs() < 1e-12 && (mm - eps).abs() < 1e-12);
    assert!(KrausChannel::new(vec![CMatrix::identity(2).scale(0.5)]).is_err());
}

#[test]
fn partial_trace_examples() {
    let a = partial_trace(&bell(), &[2, 2], &[0]).unwrap();
    assert!(
        a.matrix()
            .max_abs_diff(DensityOperator::maximally_mixed(2).matrix())
            < 1e-12
    );

    let ra = DensityOperator::from_ket(&Ket::plus());
    let rb = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
    let t = partial_trace(&ra.tensor(&rb), &[2, 2], &[0]).unwrap();
    assert!(t.matrix().max_abs_diff(ra.matrix()) < 1e-12);

    // Σ p(x)|x⟩⟨x| ⊗ ρ_x with the register traced out
    let p = [0.6, 0.4];
    let rhos = [
        DensityOperator::from_ket(&Ket::plus()),
        DensityOperator::diagonal(&[0.1, 0.9]).unwrap(),
    ];
    let mut joint = CMatrix::zeros(4, 4);
    let mut oracle = CMatrix::zeros(2, 2);
    for x in 0..2 {
        let reg = DensityOperator::from_ket(&Ket::basis(2, x));
        joint.add_scaled(p[x], reg.tensor(&rhos[x]).matrix());
        oracle.add_scaled(p[x], rhos[x].matrix());
    }
    let t = partial_trace(&DensityOperator::new(joint).unwrap(), &[2, 2], &[1]).unwrap();
    assert!(t.matrix().max_abs_diff(&oracle) < 1e-12);
}

#[test]
fn povm_validation() {
    let half = CMatrix::identity(2).scale(0.5);
    assert!(Povm::from_elements(vec![half.clone(), half.clone()]).is_ok());
    assert!(Povm::from_elements(vec![half.clone()]).is_err());
    let mut neg = CMatrix::identity(2);
    neg.add_scaled(-1.5, &Ket::basis(2, 0).projector());
    let mut rest = CMatrix::identity(2);
    rest.add_scaled(-1.0, &neg);
    assert!(Povm::from_elements(vec![neg, rest]).is_err());
    assert!(DensityOperator::new(CMatrix::identity(2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entropy_bounds_and_unitary_invariance(seed in any::<u64>(), d in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, d);
        let s = von_neumann_entropy(&rho);
        prop_assert!(s >= -1e-12 && s <= (d as f64).log2() + 1e-9);
        let u = random_unitary(&mut rng, d);
        let rot = rho.conjugate(&u);
        prop_assert!((von_neumann_entropy(&rot) - s).abs() < 1e-9);
    }

    #[test]
    fn entropy_additive_on_products(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 3);
        let joint = von_neumann_entropy(&a.tensor(&b));
        prop_assert!((joint - von_neumann_entropy(&a) - von_neumann_entropy(&b)).abs() < 1e-9);
    }

    #[test]
    fn channels_preserve_states(seed in any::<u64>(), d in 2usize..4, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(&mut rng, d, k);
        prop_assert!(ch.completeness_defect() < 1e-10);
        let out = apply_channel(&ch, &random_density(&mut rng, d)).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.eigenvalues().iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn data_processing_on_cq_states(seed in any::<u64>(), nx in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p: Vec<f64> = (0..nx).map(|_| rng.gen_range(0.05..1.0)).collect();
        let tot: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= tot);
        let blocks: Vec<DensityOperator> = (0..nx).map(|_| random_density(&mut rng, 2)).collect();
        let ch = random_channel(&mut rng, 2, 2);
        let before = ClassicalQuantumState::new(vec![Axis::new("X", nx)], p.clone(), blocks.clone()).unwrap();
        let after_blocks = blocks.iter().map(|b| apply_channel(&ch, b).unwrap()).collect();
        let after = ClassicalQuantumState::new(vec![Axis::new("X", nx)], p, after_blocks).unwrap();
        let x = [Part::Classical(0)];
        let q = [Part::Quantum];
        prop_assert!(after.mutual_information(&x, &q).unwrap() <= before.mutual_information(&x, &q).unwrap() + 1e-9);
    }
}
