use nitk_core::codes::stacked::{e1_bound, listener_network, repetition_code};
use nitk_core::codes::{
    binning_coordination, binning_feasibility_factor, brute_force_point_to_point, exact_error_probability, good_message_set,
    lemma1_transform, mds_pipeline, oracle_instances, sample_error_probability, search_best_code, stacked_correction_sim,
    BinningConfig, SearchBudget, StackedConfig,
};
use nitk_core::model::{Channel, Code, CodeLayout, Network};
use proptest::prelude::*;

/// Every encoder and pipe table for one pipe bit, n = 1 and four messages
/// over a noiseless bit, with a spread of decoders over (y, bit).
#[test]
fn lemma1_guarantee_over_code_family() {
    let net = Network::point_to_point(&Channel::noiseless(2));
    let layout = CodeLayout::new(&net, 1, &[4, 1], &[0, 1], 1).unwrap();
    let mut code = layout.zero_code().unwrap();
    let (mut count, mut equality) = (0u32, 0u32);
    for enc in 0..16usize {
        code.encoders[0][0] = (0..4).map(|w| enc >> w & 1).collect();
        for pipe in 0..256u64 {
            code.pipe.as_mut().unwrap().tables[0] = (0..8).map(|s| pipe >> s & 1).collect();
            for dec in [0usize, 0b11_10_01_00, 0b10_11_00_01, 0b01_01_00_00] {
                code.decoders[0].table = (0..4).map(|i| dec >> (2 * i) & 3).collect();
                let r = lemma1_transform(&net, &code).unwrap();
                assert!(r.holds, "enc {enc} pipe {pipe} dec {dec}");
                equality += ((r.error_prob - r.guarantee).abs() < 1e-12) as u32;
                count += 1;
            }
        }
    }
    assert!(count >= 1 << 12);
    assert!(equality > 0);
}

#[test]
fn exhaustive_search_matches_brute_force() {
    for (k, inst) in oracle_instances(17, 20).iter().enumerate() {
        let net = Network::point_to_point(&inst.channel);
        let (brute, cb, dec) = brute_force_point_to_point(&inst.channel, inst.n, inst.messages).unwrap();
        let found = search_best_code(&net, inst.n, &[inst.messages, 1], &SearchBudget::Exhaustive { cap: 1 << 24 }, 0).unwrap();
        assert_eq!(found.error_prob, brute, "instance {k}");
        assert_eq!(exact_error_probability(&net, &found.code).unwrap().error_prob, brute);
        let brute_code = Code::block_point_to_point(&net, &cb, dec).unwrap();
        assert_eq!(exact_error_probability(&net, &brute_code).unwrap().error_prob, brute);
    }
}

#[test]
fn search_on_two_flow_network() {
    // two independent noiseless bits 0 -> 2 and 1 -> 2; a joint decoder sees both
    let net = Network::deterministic_from_fn(vec![2, 2, 0], vec![0, 0, 4], vec![vec![2], vec![2], vec![]], |x| {
        vec![0, 0, 2 * x[0] + x[1]]
    })
    .unwrap();
    let r = search_best_code(&net, 1, &[2, 2, 1], &SearchBudget::Exhaustive { cap: 1 << 24 }, 0).unwrap();
    assert_eq!(r.error_prob, 0.0);
}

#[test]
fn monte_carlo_error_brackets_exact() {
    let net = Network::point_to_point(&Channel::bsc(0.2));
    let code = repetition_code(&net, 5).unwrap();
    let exact = exact_error_probability(&net, &code).unwrap();
    let mc = sample_error_probability(&net, &code, 100_000, 11).unwrap();
    assert!((mc.error_prob - exact.error_prob).abs() <= mc.ci);
    let good = good_message_set(&exact, exact.error_prob).unwrap();
    assert!(good.holds && good.size == 2);
}

#[test]
fn binning_acceptance_instance() {
    let cfg = BinningConfig { d: 2, eps: 0.5, eps_tilde: 0.1, message_bits: vec![12, 12], trials: 1000, checks: 4, seed: 42 };
    let r = binning_coordination(&cfg).unwrap();
    assert_eq!(r.k, 6);
    assert!(r.holds, "{:?}", r.estimates);
    for k in 1..=30 {
        assert!(binning_feasibility_factor(k) <= 4.0);
    }
}

#[test]
fn mds_pipeline_matches_formula() {
    for (eps, n) in [(0.1, 3), (0.1, 4), (0.3, 4)] {
        let r = mds_pipeline(eps, n, 100_000, 8).unwrap();
        assert!(r.within_3_sigma, "{r:?}");
        assert!(r.data_error <= r.empirical_error);
    }
}

#[test]
fn stacked_instances() {
    let det = listener_network(&Channel::noiseless(2));
    let code = repetition_code(&det, 3).unwrap();
    let r = stacked_correction_sim(&det, &code, &StackedConfig { runs: 200, seed: 5, ..Default::default() }).unwrap();
    assert_eq!(r.decode_errors, 0);
    assert_eq!(r.payload_bits, 0);
    assert_eq!(r.max_correction_bits, 3);

    let noisy = listener_network(&Channel::bsc(0.1));
    let code = repetition_code(&noisy, 5).unwrap();
    let r = stacked_correction_sim(&noisy, &code, &StackedConfig { runs: 400, seed: 5, ..Default::default() }).unwrap();
    assert!(r.e1_holds);
    assert!(r.bound_comparison_valid);
    assert_eq!(r.e1_bound, e1_bound(r.gamma_n, 8.0, 2));
    assert_eq!(r.z_outside_q, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn good_set_certificate_always_holds(p in 0.0f64..0.5, n in 1usize..6) {
        let net = Network::point_to_point(&Channel::bsc(p));
        let code = repetition_code(&net, n).unwrap();
        let rep = exact_error_probability(&net, &code).unwrap();
        let good = good_message_set(&rep, rep.error_prob).unwrap();
        prop_assert!(good.holds);
    }

    #[test]
    fn lemma1_bound_on_random_tables(enc in 0usize..16, pipe in 0u64..256, dec in 0usize..256) {
        let net = Network::point_to_point(&Channel::bsc(0.125));
        let layout = CodeLayout::new(&net, 1, &[4, 1], &[0, 1], 1).unwrap();
        let mut code = layout.zero_code().unwrap();
        code.encoders[0][0] = (0..4).map(|w| enc >> w & 1).collect();
        code.pipe.as_mut().unwrap().tables[0] = (0..8).map(|s| pipe >> s & 1).collect();
        code.decoders[0].table = (0..4).map(|i| dec >> (2 * i) & 3).collect();
        let r = lemma1_transform(&net, &code).unwrap();
        prop_assert!(r.holds);
    }
}
