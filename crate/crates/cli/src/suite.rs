//! Acceptance checks, one function per criterion.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use nitk_core::codes::stacked::{listener_network, repetition_code};
use nitk_core::codes::{
    binning_coordination, binning_feasibility_factor, brute_force_point_to_point, exact_error_probability, lemma1_transform,
    mds_pipeline, oracle_instances, search_best_code, stacked_correction_sim, BinningConfig, SearchBudget, StackedConfig,
};
use nitk_core::coupling::{blowup_corollary, verify_blowup_bound, EventSet, MarkovSource};
use nitk_core::exponents::{channel_capacity, check_exponent_condition, exponent_slope_at_capacity, DueckSearch, DueckSolver};
use nitk_core::measures::binary_entropy;
use nitk_core::model::{cumulative_bits, schedule_vector, Channel, CodeLayout, Distribution, Network};
use nitk_core::regions::{
    cutset_bound, ic_region_point, ic_strong_interference_check, input_distribution_grid, random_pmf, wringing, WringingInput,
};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub suite: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const SUITES: [(&str, &[u8]); 12] = [
    ("capacity", &[1]),
    ("dueck", &[2, 3]),
    ("coupling", &[4, 5]),
    ("lemma1", &[6]),
    ("binning", &[7]),
    ("mds", &[8]),
    ("cutset", &[9]),
    ("ic", &[10]),
    ("wringing", &[11]),
    ("stacked", &[12]),
    ("oracle", &[13]),
    ("schedule", &[14]),
];

/// Criteria run by a suite id, or `None` for an unknown id.
pub fn criteria_for(id: &str) -> Option<Vec<u8>> {
    if id == "all" {
        return Some((1..=14).collect());
    }
    SUITES.iter().find(|(name, _)| *name == id).map(|(_, c)| c.to_vec())
}

fn suite_of(criterion: u8) -> &'static str {
    SUITES.iter().find(|(_, c)| c.contains(&criterion)).map(|(n, _)| *n).unwrap_or("?")
}

pub fn run_criterion(criterion: u8) -> Check {
    let start = Instant::now();
    let outcome = match criterion {
        1 => capacity(),
        2 => dueck_condition_holds(),
        3 => dueck_condition_fails(),
        4 => causal_blowup(),
        5 => blowup_corollary_iid(),
        6 => lemma1_family(),
        7 => binning(),
        8 => mds(),
        9 => cutset(),
        10 => interference(),
        11 => wringing_random(),
        12 => stacked(),
        13 => oracle(),
        14 => schedule(),
        _ => Err(format!("no criterion {criterion}")),
    };
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check { criterion, suite: suite_of(criterion), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn format_line(c: &Check) -> String {
    format!(
        "{} [{:>2}] {:<9} {} ({:.2}s)",
        if c.passed { "PASS" } else { "FAIL" },
        c.criterion,
        c.suite,
        c.detail,
        c.seconds
    )
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn capacity() -> Outcome {
    let t0 = Instant::now();
    let r = channel_capacity(&Channel::bsc(0.11), 1e-6).map_err(e)?;
    let secs = t0.elapsed().as_secs_f64();
    let want = 1.0 - binary_entropy(0.11);
    let gap = (r.capacity - want).abs();
    ensure(gap <= 1e-4 && secs < 1.0, || format!("C={} want {want} in {secs:.3}s", r.capacity))?;
    Ok(format!("BSC(0.11) C={:.9} |C-(1-H)|={gap:.2e} in {secs:.3}s", r.capacity))
}

fn dueck_condition_holds() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for (name, ch) in [("noisy binary", Channel::completely_noisy(2, 2)), ("4-ary typewriter", Channel::noisy_typewriter(4, &[0, 1]))] {
        let t0 = Instant::now();
        let solver = DueckSolver::new(&ch, DueckSearch::default()).map_err(e)?;
        let c = solver.capacity().capacity;
        let top = (ch.inputs() as f64).log2();
        for j in 1..=10 {
            let r = c + (top + 0.5 - c) * j as f64 / 10.0;
            let a = solver.solve(r).map_err(e)?.alpha;
            let gap = (a - (r - c)).abs();
            ensure(gap <= 1e-3, || format!("{name}: R={r} alpha={a} C={c}"))?;
            worst = worst.max(gap);
        }
        let secs = t0.elapsed().as_secs_f64();
        ensure(secs < 60.0, || format!("{name} took {secs:.1}s"))?;
        slowest = slowest.max(secs);
    }
    Ok(format!("max |alpha-(R-C)|={worst:.2e} over 2x10 rates, slowest channel {slowest:.2}s"))
}

fn dueck_condition_fails() -> Outcome {
    let bsc = Channel::bsc(0.25);
    let cond = check_exponent_condition(&bsc, 1e-9).map_err(e)?;
    ensure(!cond.holds, || "condition reported as holding for BSC(0.25)".into())?;
    let deltas = [0.04, 0.02, 0.01];
    let d = exponent_slope_at_capacity(&bsc, &deltas, &DueckSearch::default()).map_err(e)?;
    let ratios: Vec<f64> = d.alphas.iter().zip(deltas).map(|(a, dl)| a / dl).collect();
    ensure(ratios.windows(2).all(|w| w[1] < w[0]), || format!("ratios {ratios:?} not strictly decreasing"))?;
    Ok(format!("condition fails (margin {:.3e}); alpha/delta = {:.6}, {:.6}, {:.6}", cond.margin, ratios[0], ratios[1], ratios[2]))
}

fn causal_blowup() -> Outcome {
    let t0 = Instant::now();
    let init = Distribution::new(vec![0.6, 0.4]).map_err(e)?;
    let src = MarkovSource::markov(&init, &[vec![0.8, 0.2], vec![0.3, 0.7]], 3).map_err(e)?;
    let mut tightest = f64::INFINITY;
    for mask in 1u64..256 {
        let set = EventSet::from_mask(3, mask).map_err(e)?;
        let r = verify_blowup_bound(&src, &set).map_err(e)?;
        ensure(r.z_in_a, || format!("A={mask:#04x}: Z leaves A"))?;
        ensure(r.expected_hamming <= r.bound + 1e-12, || format!("A={mask:#04x}: E d_H={} > {}", r.expected_hamming, r.bound))?;
        tightest = tightest.min(r.bound - r.expected_hamming);
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!("255 subsets, Z in A exactly, smallest slack {tightest:.4}"))
}

fn blowup_corollary_iid() -> Outcome {
    let src = MarkovSource::iid(&Distribution::uniform(2), 3).map_err(e)?;
    let mut checks = 0;
    for mask in 1u64..256 {
        let set = EventSet::from_mask(3, mask).map_err(e)?;
        for ell in 1..=3 {
            let c = blowup_corollary(&src, &set, ell).map_err(e)?;
            ensure(c.holds, || format!("A={mask:#04x} l={ell}: P(A_l)={} < {}", c.p_blown_up, c.lower_bound))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} (A, l) pairs hold"))
}

fn lemma1_family() -> Outcome {
    let net = Network::point_to_point(&Channel::noiseless(2));
    let layout = CodeLayout::new(&net, 1, &[4, 1], &[0, 1], 1).map_err(e)?;
    let mut code = layout.zero_code().map_err(e)?;
    let (mut count, mut equality) = (0u64, 0u64);
    for enc in 0..16usize {
        code.encoders[0][0] = (0..4).map(|w| enc >> w & 1).collect();
        for pipe in 0..256u64 {
            code.pipe.as_mut().expect("layout has a pipe").tables[0] = (0..8).map(|s| pipe >> s & 1).collect();
            for dec in 0..256usize {
                code.decoders[0].table = (0..4).map(|i| dec >> (2 * i) & 3).collect();
                let r = lemma1_transform(&net, &code).map_err(e)?;
                ensure(r.holds, || format!("enc {enc} pipe {pipe} dec {dec}: {} > {}", r.error_prob, r.guarantee))?;
                equality += ((r.error_prob - r.guarantee).abs() < 1e-12) as u64;
                count += 1;
            }
        }
    }
    Ok(format!("{count} codes, 0 violations, {equality} at equality"))
}

fn binning() -> Outcome {
    let cfg = BinningConfig { d: 2, eps: 0.5, eps_tilde: 0.1, message_bits: vec![12, 12], trials: 1000, checks: 4, seed: 7 };
    let r = binning_coordination(&cfg).map_err(e)?;
    ensure(r.k == 6, || format!("k={}", r.k))?;
    for est in &r.estimates {
        ensure(est.holds, || format!("cell {:?}: q_hat={} ci={}", est.w_tilde, est.q_hat, est.ci))?;
    }
    for k in 1..=30 {
        let f = binning_feasibility_factor(k);
        ensure(f <= 4.0, || format!("k={k}: factor {f}"))?;
    }
    let worst = r.estimates.iter().map(|x| x.q_hat).fold(0.0, f64::max);
    Ok(format!("k=6, eta={:.4}, max q_hat={worst:.3} over {} cells, factor <= 4 for k=1..30", r.eta, r.estimates.len()))
}

fn mds() -> Outcome {
    let mut parts = Vec::new();
    for (eps, n) in [(0.1, 3), (0.1, 4), (0.3, 4)] {
        let r = mds_pipeline(eps, n, 100_000, 11).map_err(e)?;
        let z = (r.empirical_error - r.formula_error) / r.sigma;
        ensure(r.within_3_sigma, || format!("eps={eps} N={n}: {} vs {} ({z:.2} sigma)", r.empirical_error, r.formula_error))?;
        parts.push(format!("({eps},{n}) {:.4} vs {:.4} ({z:+.2} sd)", r.empirical_error, r.formula_error));
    }
    Ok(parts.join("; "))
}

fn cutset() -> Outcome {
    let net = Network::point_to_point(&Channel::bsc(0.11));
    let grid = input_distribution_grid(&net, 200).map_err(e)?;
    let base = cutset_bound(&net, &grid, 0.0).map_err(e)?;
    let cap = 1.0 - binary_entropy(0.11);
    let gap = (base[0].bound - cap).abs();
    ensure(gap <= 5e-3, || format!("bound {} vs capacity {cap}", base[0].bound))?;
    let edge = cutset_bound(&net, &grid, 0.1).map_err(e)?;
    ensure(edge[0].total == edge[0].bound + 0.1, || format!("total {} != {} + 0.1", edge[0].total, edge[0].bound))?;
    Ok(format!("bound {:.6} vs C {cap:.6}; with edge rate 0.1 total {:.6}", base[0].bound, edge[0].total))
}

fn ic_net(f: fn(&[usize]) -> Vec<usize>) -> Result<Network, String> {
    Network::deterministic_from_fn(vec![2, 2, 0, 0], vec![0, 0, 2, 2], vec![vec![2], vec![3], vec![], vec![]], f).map_err(e)
}

fn interference() -> Outcome {
    let xor = ic_net(|x| vec![0, 0, x[0] ^ x[1], x[0] ^ x[1]])?;
    let direct = ic_net(|x| vec![0, 0, x[0], x[1]])?;
    let a = ic_strong_interference_check(&xor, 20, 100, 1).map_err(e)?;
    ensure(a.holds && a.worst_margin.abs() <= 1e-9, || format!("XOR: holds={} margin={}", a.holds, a.worst_margin))?;
    let b = ic_strong_interference_check(&direct, 20, 0, 1).map_err(e)?;
    ensure(!b.holds, || "no-cross-link channel passed".into())?;
    let u = Distribution::uniform(2);
    let s = ic_region_point(&xor, &Distribution::uniform(1), std::slice::from_ref(&u), std::slice::from_ref(&u)).map_err(e)?;
    ensure((s.sum_bound - 1.0).abs() <= 1e-9, || format!("sum rate {}", s.sum_bound))?;
    Ok(format!("XOR margin {:.1e}; no-cross-link margin {:.3}; XOR sum rate {:.12}", a.worst_margin, b.worst_margin, s.sum_bound))
}

fn wringing_random() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut selected = 0;
    for case in 0..100 {
        let n = rng.random_range(1..=4usize);
        let joint = random_pmf(&mut rng, 1 << (2 * n));
        let inp = WringingInput { n, a1: 2, a2: 2, z_dist: Distribution::uniform(1), conditionals: vec![joint.probs().to_vec()] };
        let mi = wringing(&inp, f64::MAX).map_err(e)?.initial_mi;
        let k_n = mi * (1.0 + rng.random::<f64>());
        let r = wringing(&inp, k_n).map_err(e)?;
        ensure(r.count_bound_holds && r.residuals_hold && r.block_bound_holds, || format!("case {case}: {r:?}"))?;
        selected += r.m;
    }
    Ok(format!("100 joints, {selected} coordinates wrung in total, all bounds hold"))
}

fn stacked() -> Outcome {
    let det = listener_network(&Channel::noiseless(2));
    let code = repetition_code(&det, 3).map_err(e)?;
    let a = stacked_correction_sim(&det, &code, &StackedConfig { runs: 200, seed: 3, ..Default::default() }).map_err(e)?;
    ensure(a.decode_errors == 0 && a.payload_bits == 0, || {
        format!("deterministic: errors {} payload {}", a.decode_errors, a.payload_bits)
    })?;
    let noisy = listener_network(&Channel::bsc(0.1));
    let code = repetition_code(&noisy, 5).map_err(e)?;
    let b = stacked_correction_sim(&noisy, &code, &StackedConfig { delta: 8.0, runs: 400, seed: 3, ..Default::default() }).map_err(e)?;
    ensure(b.bound_comparison_valid && b.runs >= 200, || "noisy run not comparable with the bound".into())?;
    ensure(b.e1_holds, || format!("E1 rate {} > {} (ci {})", b.e1_rate, b.e1_bound, b.e1_ci))?;
    Ok(format!(
        "deterministic: 0 errors, {} correction bits max; noisy (eps_n={:.4}, gamma_n={:.4}, N={}): E1 {}/{} vs bound {:.4}",
        a.max_correction_bits, b.base_error, b.gamma_n, b.layers, b.e1_count, b.runs, b.e1_bound
    ))
}

fn oracle() -> Outcome {
    let mut lines = 0;
    for (k, inst) in oracle_instances(13, 20).iter().enumerate() {
        let net = Network::point_to_point(&inst.channel);
        let (brute, _, _) = brute_force_point_to_point(&inst.channel, inst.n, inst.messages).map_err(e)?;
        let found = search_best_code(&net, inst.n, &[inst.messages, 1], &SearchBudget::Exhaustive { cap: 1 << 24 }, 0).map_err(e)?;
        ensure(found.error_prob == brute, || format!("instance {k}: search {} vs brute force {brute}", found.error_prob))?;
        let again = exact_error_probability(&net, &found.code).map_err(e)?.error_prob;
        ensure(again == brute, || format!("instance {k}: re-evaluated {again} vs {brute}"))?;
        lines += 1;
    }
    Ok(format!("{lines} instances identical to the bit"))
}

fn schedule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let k = rng.random_range(0..=1_000_000u64);
        let n = rng.random_range(1..=2000u64);
        let v = schedule_vector(k, n).map_err(e)?;
        let mut cum = 0u64;
        for (t, &b) in v.iter().enumerate() {
            cum += b;
            ensure(cum == cumulative_bits(k, n, t as u64 + 1) && cum == k * (t as u64 + 1) / n, || format!("k={k} n={n} t={}", t + 1))?;
        }
        ensure(cum == k && v.len() as u64 == n, || format!("k={k} n={n}: sum {cum}"))?;
    }
    Ok("1000 (k, n) pairs: terms nonnegative, sum k, prefix sums floor(kt/n)".into())
}
