use nitk_core::exponents::{
    channel_capacity, check_exponent_condition, dueck_curve, exponent_objective, exponent_slope_at_capacity,
    DueckSearch, DueckSolver,
};
use nitk_core::model::Channel;
use std::time::Instant;

/// Arimoto's form of the exponent for an input law `p`:
/// `sup_{-1 < rho <= 0} -rho R - log2 sum_y (sum_x p(x) P(y|x)^{1/(1+rho)})^{1+rho}`.
fn arimoto(ch: &Channel, p: &[f64], rate: f64) -> f64 {
    let e0 = |rho: f64| -> f64 {
        let a = 1.0 / (1.0 + rho);
        let mut terms = Vec::new();
        for y in 0..ch.outputs() {
            let logs: Vec<f64> = (0..ch.inputs())
                .filter(|&x| p[x] > 0.0 && ch.prob(x, y) > 0.0)
                .map(|x| p[x].log2() + a * ch.prob(x, y).log2())
                .collect();
            if logs.is_empty() {
                continue;
            }
            let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let inner = m + logs.iter().map(|l| (l - m).exp2()).sum::<f64>().log2();
            terms.push((1.0 + rho) * inner);
        }
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|l| (l - m).exp2()).sum::<f64>().log2()
    };
    let f = |rho: f64| -rho * rate - e0(rho);
    let (mut best_rho, mut best) = (0.0, f(0.0));
    for k in 1..2000 {
        let rho = -(k as f64) / 2000.0;
        let v = f(rho);
        if v > best {
            best = v;
            best_rho = rho;
        }
    }
    let (mut lo, mut hi) = ((best_rho - 1e-3f64).max(-1.0 + 1e-12), (best_rho + 1e-3f64).min(0.0));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.max(f(0.5 * (lo + hi)))
}

#[test]
fn arimoto_oracle_matches_frozen_values() {
    let bsc = Channel::bsc(0.25);
    let c = 0.18872187554086717;
    for (d, want) in [(0.04, 0.0022333390826882), (0.02, 0.0005838136444569), (0.01, 0.0001494359955521)] {
        assert!((arimoto(&bsc, &[0.5, 0.5], c + d) - want).abs() < 1e-10);
    }
}

#[test]
fn bsc_exponent_matches_dual() {
    let bsc = Channel::bsc(0.25);
    let c = channel_capacity(&bsc, 1e-12).unwrap().capacity;
    assert!((c - 0.18872187554086717).abs() < 1e-10);
    let rates: Vec<f64> = [0.01, 0.02, 0.04, 0.1, 0.3, 0.6].iter().map(|d| c + d).collect();
    let res = dueck_curve(&bsc, &rates, &DueckSearch::default()).unwrap();
    for r in &res {
        let want = arimoto(&bsc, &[0.5, 0.5], r.rate);
        assert!((r.alpha - want).abs() < 1e-7, "R={} got {} want {}", r.rate, r.alpha, want);
        let (kl, rp, _) = exponent_objective(&bsc, &r.minimizer, r.rate).unwrap();
        assert_eq!(r.alpha, kl + rp);
        assert!(r.alpha <= r.grid_alpha);
    }
    for w in res.windows(2) {
        assert!(w[1].alpha >= w[0].alpha);
    }
}

#[test]
fn condition_holds_channels_follow_r_minus_c() {
    let chans = [Channel::completely_noisy(2, 2), Channel::noisy_typewriter(4, &[0, 1])];
    for ch in chans {
        let t0 = Instant::now();
        let solver = DueckSolver::new(&ch, DueckSearch::default()).unwrap();
        let c = solver.capacity().capacity;
        let top = (ch.inputs() as f64).log2();
        for j in 1..=10 {
            let r = c + (top + 0.5 - c) * j as f64 / 10.0;
            let a = solver.solve(r).unwrap().alpha;
            assert!((a - (r - c)).abs() <= 1e-3, "R={r} alpha={a} C={c}");
        }
        assert!(t0.elapsed().as_secs() < 60);
    }
}

#[test]
fn typewriter_midpoint_value() {
    let ch = Channel::noisy_typewriter(4, &[0, 1]);
    let solver = DueckSolver::new(&ch, DueckSearch::default()).unwrap();
    assert!((solver.solve(1.5).unwrap().alpha - 0.5).abs() < 1e-9);
    assert!((solver.capacity().capacity - 1.0).abs() < 1e-9);
}

#[test]
fn bsc_slope_diagnostics() {
    let bsc = Channel::bsc(0.25);
    assert!(!check_exponent_condition(&bsc, 1e-9).unwrap().holds);
    let d = exponent_slope_at_capacity(&bsc, &[0.04, 0.02, 0.01], &DueckSearch::default()).unwrap();
    assert!(d.strictly_decreasing, "{:?}", d.slope_estimates);
    for (a, want) in d.alphas.iter().zip([0.0022333390826882, 0.0005838136444569, 0.0001494359955521]) {
        assert!((a - want).abs() < 1e-7);
    }
    let zeta = d.zeta.unwrap();
    // log2(0.75/0.5) - log2(0.25/0.5)
    assert!((zeta - 3f64.log2()).abs() < 1e-9);
    assert!(d.lambda_max.unwrap() <= 0.5 * 0.25 + 1e-12);
    for w in d.perturbation.windows(2) {
        assert!(w[1].ratio < w[0].ratio);
        assert!(w[0].alpha <= w[0].perturbed_objective + 1e-12);
    }
}

#[test]
fn condition_channels_have_unit_slope() {
    for ch in [Channel::completely_noisy(2, 2), Channel::noiseless(2)] {
        let d = exponent_slope_at_capacity(&ch, &[0.2, 0.1, 0.05], &DueckSearch::default()).unwrap();
        assert!(d.condition_holds);
        for s in &d.slope_estimates {
            assert!((s - 1.0).abs() < 1e-6, "{s}");
        }
    }
}
