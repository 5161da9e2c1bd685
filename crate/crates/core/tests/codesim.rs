use proptest::prelude::*;
use qrps_core::channels::{make_dephasing_rpc, make_projection_rpc, RandomParameterChannel};
use qrps_core::codesim::*;
use qrps_core::qlinalg::{CMatrix, DensityOperator, Ket, Povm, C64};
use qrps_core::regions::constructions::*;
use qrps_core::regions::{sc_information, Strategy};
use qrps_core::QrpsError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn h(p: f64) -> f64 {
    let t = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    t(p) + t(1.0 - p)
}

/// Dephasing read out in the computational basis: a measurement channel
/// that agrees with the dephasing channel on computational inputs.
fn measured_dephasing(eps: f64) -> RandomParameterChannel {
    make_dephasing_rpc(eps)
        .unwrap()
        .measured(&Povm::computational(2))
        .unwrap()
}

fn two_sigma(p: f64, trials: usize) -> f64 {
    2.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[test]
fn typical_set_examples() {
    let bern = TypicalityConfig::new(0.1, vec![0.5, 0.5]).unwrap();
    assert!(!typical_set_test(&[0; 100], &bern).unwrap());
    let exact: Vec<usize> = (0..100).map(|i| i % 2).collect();
    assert!(typical_set_test(
        &exact,
        &TypicalityConfig::new(1e-6, vec![0.5, 0.5]).unwrap()
    )
    .unwrap());
    let zero = TypicalityConfig::new(0.9, vec![0.5, 0.5, 0.0]).unwrap();
    let mut seq = exact.clone();
    seq[0] = 2;
    assert!(!typical_set_test(&seq, &zero).unwrap());
    seq[0] = 3;
    assert!(matches!(
        typical_set_test(&seq, &zero),
        Err(QrpsError::Validation(_))
    ));
    assert!(TypicalityConfig::new(0.0, vec![1.0]).is_err());
}

#[test]
fn covering_encode_finds_exact_codeword() {
    // s = x = z pattern with an exact-type triple
    let n = 4;
    let cb = Codebook {
        sizes: CodeSizes::new(n, &CodeRates::new(0.0, 0.0, 0.0).unwrap()).unwrap(),
        x: vec![vec![0, 1, 0, 1]],
        z: vec![vec![vec![0, 1, 0, 1]]],
    };
    let mut pmf = vec![0.0; 8];
    pmf[0] = 0.25; // (s0, x0, z0)
    pmf[3] = 0.25; // (s0, x1, z1)
    pmf[4] = 0.25; // (s1, x0, z0)
    pmf[7] = 0.25; // (s1, x1, z1)
    let cfg = TypicalityConfig::new(0.01, pmf).unwrap();
    let out = covering_encode(&[0, 0, 1, 1], &cb, 0, 0, 2, 2, &cfg).unwrap();
    assert_eq!(
        out,
        CoverOutcome {
            k: 0,
            failed: false
        }
    );
    let out = covering_encode(&[0, 0, 0, 0], &cb, 0, 0, 2, 2, &cfg).unwrap();
    assert!(out.failed && out.k == 0);
}

#[test]
fn covering_threshold_at_conditional_mutual_information() {
    let c = dephasing_sc_compression(0.2, 0.1).unwrap();
    let info = sc_information(&c.rpc, &c.strategy).unwrap();
    let i = info.i_z_s_given_x;
    let (n, trials) = (200, 2000);
    let run = |r: f64| {
        simulate_covering(
            &c.rpc,
            &c.strategy,
            n,
            r,
            trials,
            0.01,
            TypicalityKind::Conditional,
            5,
        )
        .unwrap()
        .failure_rate
    };
    let above = run(i + 0.15);
    let below = run((i - 0.15).max(0.02));
    let mid = run(i);
    assert!(
        above + two_sigma(above.max(0.05), trials) < 0.05,
        "above {above}"
    );
    assert!(
        below - two_sigma(below.min(0.5), trials) > 0.5,
        "below {below}"
    );
    assert!(below + two_sigma(0.5, trials) >= mid && mid + two_sigma(0.5, trials) >= above);
}

#[test]
fn block_markov_inside_region() {
    let c = dephasing_sc_compression(0.2, 0.1).unwrap();
    let rpc = measured_dephasing(0.2);
    // R~_s = R_s just above I(Z;S|X) = 0.358; bins of size one since I(Z;B|X) = 0
    let cfg = SimConfig::new(150, 8, 500, CodeRates::new(0.44, 0.46, 0.46).unwrap(), 11);
    let rep = simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &cfg).unwrap();
    assert!(rep.error_rate < 0.1, "{rep:?}");
    assert!((rep.avg_distortion - 0.1).abs() <= 0.05, "{rep:?}");
    assert!(rep.covering_failure_rate < 0.05);
    let again = simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &cfg).unwrap();
    assert_eq!(rep, again);
}

#[test]
fn block_markov_above_region_fails() {
    let c = dephasing_sc_compression(0.2, 0.1).unwrap();
    let rpc = measured_dephasing(0.2);
    let r = 1.0 - (h(0.1 * 0.8 + 0.9 * 0.2) - h(0.1)) + 0.15;
    let cfg = SimConfig::new(150, 8, 500, CodeRates::new(r, 0.46, 0.46).unwrap(), 11);
    let rep = simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &cfg).unwrap();
    assert!(rep.error_rate > 0.5, "{rep:?}");
}

#[test]
fn single_block_falls_back_to_blind_guess() {
    let c = dephasing_sc_compression(0.2, 0.1).unwrap();
    let rpc = measured_dephasing(0.2);
    let cfg = SimConfig::new(100, 1, 200, CodeRates::new(0.2, 0.0, 0.0).unwrap(), 2);
    let rep = simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &cfg).unwrap();
    // blind guess ŝ = 0 costs P(S = 1) = 0.2; the sample mean of 2·10⁴ draws
    assert!((rep.avg_distortion - 0.2).abs() < 4.0 * (0.16f64 / 2e4).sqrt());
    assert_eq!(rep.covering_failure_rate, 0.0);
}

#[test]
fn distortion_gap_shrinks_with_blocklength() {
    let c = dephasing_sc_compression(0.2, 0.1).unwrap();
    let rpc = measured_dephasing(0.2);
    // long runs make the blind last block negligible; δ·√n held fixed
    let run = |n: usize, t: usize| {
        let mut cfg = SimConfig::new(n, t, 100, CodeRates::new(0.3, 0.5, 0.5).unwrap(), 4);
        cfg.delta_cover = 0.1 / (n as f64).sqrt();
        cfg.delta_decode = cfg.delta_cover;
        let rep = simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &cfg).unwrap();
        let blind = 0.2 / t as f64;
        (rep.avg_distortion - blind) * t as f64 / (t - 1) as f64 - 0.1
    };
    let small = run(100, 40);
    let large = run(400, 20);
    assert!(large < small, "gap n=100 {small}, n=400 {large}");
}

#[test]
fn block_markov_rejects_bad_input() {
    let c = dephasing_sc_compression(0.2, 0.1).unwrap();
    let cfg = SimConfig::new(50, 2, 10, CodeRates::new(0.1, 0.2, 0.2).unwrap(), 0);
    let err = simulate_block_markov_sc(&c.rpc, &c.strategy, &c.estimator, &cfg).unwrap_err();
    assert!(matches!(err, QrpsError::Validation(_)));
    let rpc = measured_dephasing(0.2);
    let mut bad = cfg.clone();
    bad.rates.r_s = 0.3;
    assert!(simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &bad).is_err());
    let mut bad = cfg.clone();
    bad.n = 5000;
    bad.blocks = 3;
    assert!(simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &bad).is_err());
    let mut bad = cfg;
    bad.trials = 0;
    assert!(simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &bad).is_err());
}

#[test]
fn causal_strategy_runs_on_virtual_channel() {
    let c = dephasing_causal_identity(0.2).unwrap();
    let rpc = make_dephasing_rpc(0.2)
        .unwrap()
        .measured(&Povm::projective(&[Ket::plus(), Ket::minus()]).unwrap())
        .unwrap();
    // ± inputs through the dephasing channel: a BSC(0.2), capacity 0.278
    let cfg = SimConfig::new(200, 2, 100, CodeRates::new(0.1, 0.0, 0.0).unwrap(), 9);
    let rep = simulate_block_markov_sc(&rpc, &c.strategy, &c.estimator, &cfg).unwrap();
    assert!(rep.error_rate < 0.1, "{rep:?}");
}

fn measured_projection(eps: f64) -> RandomParameterChannel {
    make_projection_rpc(eps, &Ket::basis(2, 0))
        .unwrap()
        .measured(&Povm::computational(2))
        .unwrap()
}

#[test]
fn binning_example_five() {
    let (eps, alpha) = (0.25, 0.25);
    let c = projection_nc(eps, alpha, &Ket::basis(2, 0)).unwrap();
    let rpc = measured_projection(eps);
    // I(X;S) for p(x|s=0) = (α, 1−α), p(x|s=1) = (1, 0)
    let px0 = (1.0 - eps) * alpha + eps;
    let i_xs = h(px0) - (1.0 - eps) * h(alpha);
    let r_tilde = i_xs + 0.1;
    let r = (1.0 - eps) * h(alpha) - r_tilde - 0.1;
    assert!(r > 0.0);
    let cfg = SimConfig::new(200, 1, 500, CodeRates::new(r, 0.0, r_tilde).unwrap(), 21);
    let rep = simulate_binning_nc(&rpc, &c.strategy, &c.estimator, &cfg).unwrap();
    assert!(rep.error_rate < 0.1, "{rep:?}");
    assert!(rep.avg_distortion <= (1.0 - eps) * alpha + 0.05, "{rep:?}");
}

#[test]
fn state_independent_binning_tracks_no_csi() {
    let eps = 0.25;
    let rpc = measured_projection(eps);
    let states = vec![Ket::basis(2, 0), Ket::basis(2, 1)];
    let c = projection_nc(eps, 0.5, &Ket::basis(2, 0)).unwrap();
    let nc = Strategy::non_causal(
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        qrps_core::regions::InputStates::PerSymbol(states.clone()),
    )
    .unwrap();
    let none = Strategy::no_csi(vec![0.5, 0.5], states).unwrap();
    for r in [0.2, 0.6] {
        let cfg = SimConfig::new(200, 1, 400, CodeRates::new(r, 0.0, 0.02).unwrap(), 8);
        let a = simulate_binning_nc(&rpc, &nc, &c.estimator, &cfg).unwrap();
        let b = simulate_binning_nc(&rpc, &none, &c.estimator, &cfg).unwrap();
        assert_eq!(b.scheme, "no-csi");
        assert!(
            (a.error_rate - b.error_rate).abs() <= 0.05,
            "R={r}: {a:?} {b:?}"
        );
    }
}

#[test]
fn zero_rate_code_never_errs() {
    let c = projection_nc(0.25, 0.25, &Ket::basis(2, 0)).unwrap();
    let rpc = measured_projection(0.25);
    let none = Strategy::no_csi(vec![0.5, 0.5], vec![Ket::basis(2, 0), Ket::basis(2, 1)]).unwrap();
    let cfg = SimConfig::new(50, 1, 100, CodeRates::new(0.0, 0.0, 0.0).unwrap(), 1);
    assert_eq!(
        simulate_binning_nc(&rpc, &none, &c.estimator, &cfg)
            .unwrap()
            .error_rate,
        0.0
    );
}

fn random_density(rng: &mut ChaCha8Rng) -> DensityOperator {
    use rand::Rng;
    let a = CMatrix::from_fn(2, 2, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = a.matmul(&a.adjoint());
    let tr = m.trace().re;
    DensityOperator::new(m.scale(1.0 / tr)).unwrap()
}

fn random_effect(rng: &mut ChaCha8Rng) -> CMatrix {
    use rand::Rng;
    let v = Ket::normalized(vec![
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ])
    .unwrap();
    let w = v.qubit_orthogonal().unwrap();
    let mut m = v.projector().scale(rng.gen_range(0.0..=1.0));
    m.add_scaled(rng.gen_range(0.0..=1.0), &w.projector());
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn gentle_measurement_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng);
        let lambda = random_effect(&mut rng);
        if rho.expectation(&lambda) > 1e-6 {
            let g = gentle_measurement_check(&rho, &lambda).unwrap();
            prop_assert!(g.trace_distance <= 2.0 * (1.0 - g.success_prob).max(0.0).sqrt() + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn srm_povm_is_complete(seed in any::<u64>(), count in 1usize..6, n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cands: Vec<ProductState> = (0..count)
            .map(|_| {
                let f = (0..n).map(|_| random_density(&mut rng)).collect();
                ProductState::new(f).unwrap()
            })
            .collect();
        let povm = srm_povm(&cands).unwrap();
        let d = 1 << n;
        let mut sum = CMatrix::zeros(d, d);
        for e in povm.elements() {
            sum.add_scaled(1.0, e);
        }
        prop_assert!(sum.max_abs_diff(&CMatrix::identity(d)) < 1e-8);
    }
}

#[test]
fn srm_near_helstrom_for_overlap_half() {
    let cands = vec![
        ProductState::from_kets(&[Ket::basis(2, 0)]).unwrap(),
        ProductState::from_kets(&[Ket::plus()]).unwrap(),
    ];
    let helstrom = 0.5 * (1.0 + 0.5f64.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let trials = 10_000;
    let mut hits = 0;
    for t in 0..trials {
        let m = t % 2;
        if sqrt_measurement_decoder(&cands, &cands[m], &mut rng).unwrap() == Some(m) {
            hits += 1;
        }
    }
    let rate = hits as f64 / trials as f64;
    // sampling noise only above the optimum: 4σ keeps the check seed-robust
    assert!(
        rate >= helstrom - 0.02 && rate <= helstrom + 2.0 * two_sigma(helstrom, trials),
        "{rate}"
    );
    for (m, c) in cands.iter().enumerate() {
        let p = srm_probabilities(&cands, c).unwrap();
        assert!(p[m] <= helstrom + 1e-9 && p[m] >= helstrom - 0.02);
    }
}

#[test]
fn srm_decodes_computational_codewords_through_dephasing() {
    let rpc = make_dephasing_rpc(0.1).unwrap();
    let words: Vec<Vec<usize>> = vec![
        vec![0, 0, 0, 0],
        vec![0, 1, 1, 0],
        vec![1, 0, 1, 1],
        vec![1, 1, 0, 1],
    ];
    let cands: Vec<ProductState> = words
        .iter()
        .map(|w| {
            ProductState::from_kets(&w.iter().map(|&b| Ket::basis(2, b)).collect::<Vec<_>>())
                .unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (m, w) in words.iter().enumerate() {
        for s in 0..2 {
            let out: Vec<DensityOperator> = w
                .iter()
                .map(|&b| {
                    rpc.map(s)
                        .apply(&DensityOperator::from_ket(&Ket::basis(2, b)))
                        .unwrap()
                })
                .collect();
            let recv = ProductState::new(out).unwrap();
            assert_eq!(
                sqrt_measurement_decoder(&cands, &recv, &mut rng).unwrap(),
                Some(m)
            );
        }
    }
}

#[test]
fn srm_dimension_guard() {
    let cand = ProductState::from_kets(&vec![Ket::basis(2, 0); 13]).unwrap();
    assert!(matches!(
        srm_probabilities(std::slice::from_ref(&cand), &cand),
        Err(QrpsError::Config(_))
    ));
}
