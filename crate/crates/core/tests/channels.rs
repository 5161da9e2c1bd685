use proptest::prelude::*;
use qrps_core::channels::*;
use qrps_core::qlinalg::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn test_states() -> Vec<DensityOperator> {
    let r = 0.5f64.sqrt();
    let y_plus = Ket::new(vec![C64::new(r, 0.0), C64::new(0.0, r)]).unwrap();
    vec![
        DensityOperator::from_ket(&Ket::basis(2, 0)),
        DensityOperator::from_ket(&Ket::basis(2, 1)),
        DensityOperator::from_ket(&Ket::plus()),
        DensityOperator::from_ket(&y_plus),
        DensityOperator::diagonal(&[0.3, 0.7]).unwrap(),
    ]
}

fn random_density(rng: &mut ChaCha8Rng) -> DensityOperator {
    let a = CMatrix::from_fn(2, 2, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = a.matmul(&a.adjoint());
    let tr = m.trace().re;
    DensityOperator::new(m.scale(1.0 / tr)).unwrap()
}

fn mixture(rpc: &RandomParameterChannel, rho: &DensityOperator) -> CMatrix {
    let mut acc = CMatrix::zeros(rpc.out_dim(), rpc.out_dim());
    for (s, &q) in rpc.q().iter().enumerate() {
        acc.add_scaled(q, rpc.map(s).apply(rho).unwrap().matrix());
    }
    acc
}

#[test]
fn dephasing_family() {
    let id = make_dephasing_rpc(0.0).unwrap().average_channel();
    for rho in test_states() {
        assert!(id.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }
    let eps = 0.25;
    let rpc = make_dephasing_rpc(eps).unwrap();
    let avg = rpc.average_channel();
    for rho in test_states() {
        let mut expect = rho.matrix().scale(1.0 - eps);
        expect.add_scaled(eps, &rho.conjugate(&pauli::z()).into_matrix());
        assert!(avg.apply(&rho).unwrap().matrix().max_abs_diff(&expect) < 1e-12);
        assert!(
            avg.apply(&rho)
                .unwrap()
                .matrix()
                .max_abs_diff(&mixture(&rpc, &rho))
                < 1e-12
        );
    }
    let out = avg.apply(&DensityOperator::from_ket(&Ket::plus())).unwrap();
    assert!((out.expectation(&Ket::plus().projector()) - 0.75).abs() < 1e-12);
    assert!((out.expectation(&Ket::minus().projector()) - 0.25).abs() < 1e-12);
    assert!(make_dephasing_rpc(1.5).is_err());
}

#[test]
fn depolarizing_family() {
    let rpc = make_depolarizing_rpc(0.0).unwrap();
    for rho in test_states() {
        for s in 0..rpc.num_params() {
            if rpc.q()[s] > 0.0 {
                assert!(
                    rpc.map(s)
                        .apply(&rho)
                        .unwrap()
                        .matrix()
                        .max_abs_diff(rho.matrix())
                        < 1e-12
                );
            }
        }
    }
    let eps = 0.3;
    let p = 4.0 * eps / 3.0;
    let avg = make_depolarizing_rpc(eps).unwrap().average_channel();
    for rho in test_states() {
        let mut expect = rho.matrix().scale(1.0 - p);
        expect.add_scaled(p, DensityOperator::maximally_mixed(2).matrix());
        assert!(avg.apply(&rho).unwrap().matrix().max_abs_diff(&expect) < 1e-12);
    }
    let out = avg
        .apply(&DensityOperator::from_ket(&Ket::basis(2, 0)))
        .unwrap();
    assert!(out.matrix().max_abs_diff(&CMatrix::diag_real(&[0.8, 0.2])) < 1e-12);
}

#[test]
fn projection_family() {
    let psi = Ket::plus();
    let rpc = make_projection_rpc(0.4, &psi).unwrap();
    for rho in test_states() {
        assert!(
            rpc.map(0)
                .apply(&rho)
                .unwrap()
                .matrix()
                .max_abs_diff(rho.matrix())
                < 1e-12
        );
        assert!(
            rpc.map(1)
                .apply(&rho)
                .unwrap()
                .matrix()
                .max_abs_diff(&psi.projector())
                < 1e-12
        );
    }
    let avg = make_projection_rpc(0.5, &Ket::basis(2, 0))
        .unwrap()
        .average_channel();
    let out = avg
        .apply(&DensityOperator::from_ket(&Ket::basis(2, 1)))
        .unwrap();
    assert!(out.matrix().max_abs_diff(&CMatrix::diag_real(&[0.5, 0.5])) < 1e-12);
}

#[test]
fn measurement_family() {
    let rpc = make_measurement_rpc(vec![1.0], vec![Povm::computational(2)], None).unwrap();
    assert!(rpc.is_measurement());
    let rho = DensityOperator::diagonal(&[0.35, 0.65]).unwrap();
    assert!(
        rpc.map(0)
            .apply(&rho)
            .unwrap()
            .matrix()
            .max_abs_diff(rho.matrix())
            < 1e-12
    );
    // single-parameter average is the map itself
    let avg = rpc.average_channel();
    for rho in test_states() {
        let a = avg.apply(&rho).unwrap();
        assert!(
            a.matrix()
                .max_abs_diff(rpc.map(0).apply(&rho).unwrap().matrix())
                < 1e-12
        );
    }

    let pm = Povm::projective(&[Ket::plus(), Ket::minus()]).unwrap();
    let rpc = make_measurement_rpc(vec![1.0], vec![pm], None).unwrap();
    let out = rpc
        .map(0)
        .apply(&DensityOperator::from_ket(&Ket::basis(2, 0)))
        .unwrap();
    assert!(out.matrix().max_abs_diff(&CMatrix::diag_real(&[0.5, 0.5])) < 1e-12);

    let trivial = Povm::from_elements(vec![CMatrix::identity(2)]).unwrap();
    let rpc = make_measurement_rpc(vec![1.0], vec![trivial], None).unwrap();
    let out = rpc
        .map(0)
        .apply(&DensityOperator::from_ket(&Ket::plus()))
        .unwrap();
    assert_eq!(out.dim(), 1);
    assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
}

#[test]
fn constructor_validation() {
    let id = KrausChannel::identity(2);
    assert!(RandomParameterChannel::new(vec![0.5, 0.4], vec![id.clone(), id.clone()]).is_err());
    assert!(RandomParameterChannel::new(vec![1.0], vec![id.clone(), id.clone()]).is_err());
    assert!(
        RandomParameterChannel::new(vec![0.5, 0.5], vec![id, KrausChannel::identity(3)]).is_err()
    );
    assert!(DistortionFunction::from_table(vec![vec![0.0, -1.0]]).is_err());
    let d = DistortionFunction::from_table(vec![vec![0.0, 2.0], vec![0.5, 0.0]]).unwrap();
    assert_eq!(d.d_max(), 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn average_channel_is_the_mixture(seed in any::<u64>(), eps in 0.0f64..1.0, family in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rpc = match family {
            0 => make_dephasing_rpc(eps).unwrap(),
            1 => make_depolarizing_rpc(0.375 * eps).unwrap(),
            _ => make_projection_rpc(eps, &Ket::plus()).unwrap(),
        };
        for m in rpc.maps() {
            prop_assert!(m.completeness_defect() < 1e-10);
        }
        let rho = random_density(&mut rng);
        let avg = rpc.average_channel().apply(&rho).unwrap();
        prop_assert!(avg.matrix().max_abs_diff(&mixture(&rpc, &rho)) < 1e-10);
    }

    #[test]
    fn measurement_outputs_are_diagonal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_density(&mut rng).into_matrix().scale(0.9);
        let mut rest = CMatrix::identity(2);
        rest.add_scaled(-1.0, &e);
        let povm = Povm::from_elements(vec![e, rest]).unwrap();
        let rpc = make_dephasing_rpc(0.3).unwrap().measured(&povm).unwrap();
        let out = rpc.map(1).apply(&random_density(&mut rng)).unwrap();
        let m = out.matrix();
        prop_assert!(m[(0, 1)].norm() < 1e-10 && m[(1, 0)].norm() < 1e-10);
    }
}

#[test]
fn explicit_measurement_maps_are_recognized() {
    // dephasing followed by a computational readout, written as Kraus maps
    let readout = KrausChannel::new(vec![
        Ket::basis(2, 0).projector(),
        Ket::basis(2, 1).projector(),
    ])
    .unwrap();
    let rpc = measurement_from_maps(vec![0.8, 0.2], vec![readout.clone(), readout]).unwrap();
    assert!(rpc.is_measurement());
    let reference = make_dephasing_rpc(0.2)
        .unwrap()
        .measured(&Povm::computational(2))
        .unwrap();
    for rho in test_states() {
        for s in 0..2 {
            let a = rpc.map(s).apply(&rho).unwrap();
            let b = reference.map(s).apply(&rho).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        }
    }
    let deph = make_dephasing_rpc(0.2).unwrap();
    let err = measurement_from_maps(vec![0.8, 0.2], deph.maps().to_vec()).unwrap_err();
    assert!(err.to_string().contains("coherences"));
}
