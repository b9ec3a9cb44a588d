use nitk_core::coupling::{
    blowup_bound, blowup_corollary, blowup_set, causal_blowup_coupling, sample_blowup_bound, verify_blowup_bound, EventSet,
    MarkovSource,
};
use nitk_core::model::Distribution;
use proptest::prelude::*;

fn markov3() -> MarkovSource {
    let init = Distribution::new(vec![0.6, 0.4]).unwrap();
    MarkovSource::markov(&init, &[vec![0.8, 0.2], vec![0.3, 0.7]], 3).unwrap()
}

#[test]
fn markov_source_every_subset() {
    let src = markov3();
    for mask in 1u64..256 {
        let set = EventSet::from_mask(3, mask).unwrap();
        let r = verify_blowup_bound(&src, &set).unwrap();
        assert!(r.z_in_a, "mask {mask:#x}");
        assert!((r.z_mass_in_a - 1.0).abs() < 1e-12);
        assert!(r.expected_hamming <= r.bound + 1e-12, "mask {mask:#x}: {} > {}", r.expected_hamming, r.bound);
        assert_eq!(r.bound, blowup_bound(3, r.p_a));
    }
}

#[test]
fn iid_uniform_corollary() {
    let src = MarkovSource::iid(&Distribution::uniform(2), 3).unwrap();
    for mask in 1u64..256 {
        let set = EventSet::from_mask(3, mask).unwrap();
        for ell in 1..=3 {
            let c = blowup_corollary(&src, &set, ell).unwrap();
            assert!(c.holds, "mask {mask:#x} ell {ell}");
            assert!(c.p_blown_up + 1e-12 >= c.lower_bound);
        }
    }
}

#[test]
fn full_set_needs_no_change() {
    let src = markov3();
    let r = verify_blowup_bound(&src, &EventSet::full(2, 3).unwrap()).unwrap();
    assert_eq!(r.expected_hamming, 0.0);
    assert!(r.bound < 1e-6);
}

#[test]
fn sampled_distance_agrees_with_exact() {
    let src = markov3();
    let set = EventSet::from_mask(3, 0b1000_0001).unwrap();
    let exact = verify_blowup_bound(&src, &set).unwrap();
    let mc = sample_blowup_bound(&src, &set, 200_000, 5).unwrap();
    assert!(mc.z_in_a);
    assert!((mc.expected_hamming - exact.expected_hamming).abs() <= mc.ci);
}

#[test]
fn blown_up_radius_covers_everything() {
    let set = EventSet::from_ranks(2, 3, &[0]).unwrap();
    assert_eq!(blowup_set(&set, 3).len(), 8);
    assert_eq!(blowup_set(&set, 1).len(), 4);
}

fn source_strategy() -> impl Strategy<Value = (MarkovSource, u64)> {
    (0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95, 1u64..256).prop_map(|(p0, a, b, mask)| {
        let init = Distribution::new(vec![p0, 1.0 - p0]).unwrap();
        (MarkovSource::markov(&init, &[vec![a, 1.0 - a], vec![b, 1.0 - b]], 3).unwrap(), mask)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_stays_in_set_and_obeys_bound((src, mask) in source_strategy()) {
        let set = EventSet::from_mask(3, mask).unwrap();
        let r = verify_blowup_bound(&src, &set).unwrap();
        prop_assert!(r.z_in_a);
        prop_assert!(r.expected_hamming <= r.bound + 1e-12);
    }

    #[test]
    fn kernel_rows_are_stochastic((src, mask) in source_strategy()) {
        let set = EventSet::from_mask(3, mask).unwrap();
        let k = causal_blowup_coupling(&src, &set).unwrap();
        let mut prefixes = 1;
        for t in 0..3 {
            for p in 0..prefixes {
                for y in 0..2 {
                    let s: f64 = k.row(t, p, y).iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-12);
                }
            }
            prefixes *= 2;
        }
    }
}
