//! Outer bounds: cut-set with extra-edge slack, the strong-interference
//! interference channel, and wringing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::JointTable;
use crate::model::{checked_pow, Distribution, Network};

/// Joint table of `(X_0..X_{d-1}, Y_0..Y_{d-1})` for an input-tuple pmf.
pub fn network_joint_table(net: &Network, input: &Distribution) -> Result<JointTable> {
    let n_in = net.kernel().len();
    if input.len() != n_in {
        return Err(Error::DimensionMismatch { what: "input distribution", expected: n_in, found: input.len() });
    }
    let n_out = net.kernel()[0].len();
    let mut probs = Vec::with_capacity(n_in * n_out);
    for (r, row) in net.kernel().iter().enumerate() {
        let px = input.get(r);
        probs.extend(row.iter().map(|p| px * p));
    }
    let mut dims = net.input_sizes();
    dims.extend(net.output_sizes());
    JointTable::new(dims, probs)
}

/// Product of per-node input marginals, as a pmf over input-tuple ranks.
pub fn product_input(marginals: &[Distribution]) -> Distribution {
    let mut probs = vec![1.0];
    for m in marginals {
        probs = probs.iter().flat_map(|&a| m.probs().iter().map(move |&b| a * b)).collect();
    }
    Distribution::from_vec_unchecked(probs)
}

/// All pmfs on `size` symbols whose masses are multiples of `1/res`.
pub fn simplex_grid(size: usize, res: usize) -> Vec<Distribution> {
    fn rec(size: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Distribution>) {
        if cur.len() == size - 1 {
            cur.push(left);
            out.push(Distribution::from_vec_unchecked(cur.iter().map(|&c| c as f64 / res as f64).collect()));
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(size, left - c, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(size, res, res, &mut Vec::new(), &mut out);
    out
}

/// Largest number of product points [`input_distribution_grid`] will produce.
pub const MAX_GRID_SAMPLES: usize = 1 << 20;

/// Product input distributions with each node's marginal on a `1/res` grid.
pub fn input_distribution_grid(net: &Network, res: usize) -> Result<Vec<Distribution>> {
    if res == 0 {
        return Err(Error::Precondition("grid resolution must be positive".into()));
    }
    let per_node: Vec<Vec<Distribution>> = net.input_sizes().iter().map(|&s| simplex_grid(s, res)).collect();
    let total = per_node.iter().try_fold(1usize, |a, v| a.checked_mul(v.len()));
    match total {
        Some(t) if t <= MAX_GRID_SAMPLES => {}
        _ => return Err(Error::CapExceeded { needed: total.unwrap_or(usize::MAX) as u128, cap: MAX_GRID_SAMPLES as u128 }),
    }
    let mut out = vec![Vec::<Distribution>::new()];
    for choices in &per_node {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect();
    }
    Ok(out.iter().map(|ms| product_input(ms)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutConstraint {
    pub cut: Vec<usize>,
    /// Nodes in the cut with a destination outside it; their rates are summed.
    pub crossing_flows: Vec<usize>,
    /// `max` over samples of `I(X_S; Y_{S^c} | X_{S^c})`.
    pub bound: f64,
    pub slack: f64,
    /// `bound + slack`, the right-hand side of the constraint.
    pub total: f64,
    /// Index of the sample attaining `bound`.
    pub certificate: usize,
}

/// Cut-set constraints `sum_{i in T} R_i <= I(X_S; Y_{S^c} | X_{S^c}) + k_rate`.
///
/// Cuts are enumerated as bitmasks in increasing order; only cuts with a
/// crossing flow are reported. Ties between samples go to the lowest index.
pub fn cutset_bound(net: &Network, samples: &[Distribution], k_rate: f64) -> Result<Vec<CutConstraint>> {
    if samples.is_empty() {
        return Err(Error::Precondition("empty distribution sample set".into()));
    }
    if !(k_rate >= 0.0) {
        return Err(Error::OutOfRange { what: "extra edge rate", value: k_rate, lo: 0.0, hi: f64::INFINITY });
    }
    let d = net.d();
    if d >= 20 {
        return Err(Error::CapExceeded { needed: 1u128 << d, cap: 1 << 20 });
    }
    let mut cuts = Vec::new();
    for mask in 1u32..(1 << d) - 1 {
        let s: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let crossing: Vec<usize> = s
            .iter()
            .copied()
            .filter(|&i| net.demands()[i].iter().any(|&j| mask >> j & 1 == 0))
            .collect();
        if !crossing.is_empty() {
            cuts.push((mask, s, crossing));
        }
    }
    let values: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|p| {
            let table = network_joint_table(net, p)?;
            cuts.iter()
                .map(|(mask, s, _)| {
                    let sc: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 0).collect();
                    let ysc: Vec<usize> = sc.iter().map(|i| d + i).collect();
                    table.conditional_mi(s, &ysc, &sc)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cuts
        .into_iter()
        .enumerate()
        .map(|(c, (_, s, crossing))| {
            let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
            for (k, v) in values.iter().enumerate() {
                if v[c] > best {
                    best = v[c];
                    arg = k;
                }
            }
            CutConstraint { cut: s, crossing_flows: crossing, bound: best, slack: k_rate, total: best + k_rate, certificate: arg }
        })
        .collect())
}

/// Node roles of an interference channel: transmitters 0, 1 and receivers 2, 3,
/// with node 0 talking to node 2 and node 1 to node 3.
pub fn check_ic_shape(net: &Network) -> Result<()> {
    let ok = net.d() == 4
        && net.output_alphabets()[0] == 0
        && net.output_alphabets()[1] == 0
        && net.input_alphabets()[2] == 0
        && net.input_alphabets()[3] == 0
        && net.demands()[0] == [2]
        && net.demands()[1] == [3]
        && net.demands()[2].is_empty()
        && net.demands()[3].is_empty();
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(
            "not an interference channel: need 4 nodes, outputs only at nodes 2,3, inputs only at nodes 0,1, demands 0->2 and 1->3".into(),
        ))
    }
}

/// The two strong-interference margins for an input pmf over `(x_0, x_1)`:
/// `I(X0;Y3|X1) - I(X0;Y2|X1)` and `I(X1;Y2|X0) - I(X1;Y3|X0)`.
pub fn ic_margins(net: &Network, input: &Distribution) -> Result<(f64, f64)> {
    let t = network_joint_table(net, input)?;
    let (x0, x1, y2, y3) = (0, 1, 6, 7);
    let m1 = t.conditional_mi(&[x0], &[y3], &[x1])? - t.conditional_mi(&[x0], &[y2], &[x1])?;
    let m2 = t.conditional_mi(&[x1], &[y2], &[x0])? - t.conditional_mi(&[x1], &[y3], &[x0])?;
    Ok((m1, m2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ICCheck {
    pub holds: bool,
    /// Smallest margin over the product grid; negative means a violation.
    pub worst_margin: f64,
    pub worst_dist: (Distribution, Distribution),
    pub grid_points: usize,
    /// Smallest margin over seeded random joint (non-product) inputs.
    pub joint_worst_margin: f64,
    pub joint_samples: usize,
    pub joint_holds: bool,
}

/// Margin tolerance used by the strong-interference check.
pub const IC_TOL: f64 = 1e-9;

pub fn ic_strong_interference_check(net: &Network, res: usize, joint_samples: usize, seed: u64) -> Result<ICCheck> {
    check_ic_shape(net)?;
    let a0 = simplex_grid(net.input_size(0), res);
    let a1 = simplex_grid(net.input_size(1), res);
    let pairs: Vec<(usize, usize)> = (0..a0.len()).flat_map(|i| (0..a1.len()).map(move |j| (i, j))).collect();
    let margins = pairs
        .par_iter()
        .map(|&(i, j)| ic_margins(net, &product_input(&[a0[i].clone(), a1[j].clone()])).map(|(m1, m2)| m1.min(m2)))
        .collect::<Result<Vec<f64>>>()?;
    let (mut worst, mut arg) = (f64::INFINITY, 0);
    for (k, &m) in margins.iter().enumerate() {
        if m < worst {
            worst = m;
            arg = k;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_in = net.input_size(0) * net.input_size(1);
    let mut joint_worst = f64::INFINITY;
    for _ in 0..joint_samples {
        let p = random_pmf(&mut rng, n_in);
        let (m1, m2) = ic_margins(net, &p)?;
        joint_worst = joint_worst.min(m1.min(m2));
    }
    let (i, j) = pairs[arg];
    Ok(ICCheck {
        holds: worst >= -IC_TOL,
        worst_margin: worst,
        worst_dist: (a0[i].clone(), a1[j].clone()),
        grid_points: pairs.len(),
        joint_worst_margin: joint_worst,
        joint_samples,
        joint_holds: joint_worst >= -IC_TOL,
    })
}

/// Random pmf with exponential weights; sparse corners are hit with some probability.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Distribution {
    let mut w: Vec<f64> = (0..size).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    if size > 1 && rng.random::<f64>() < 0.2 {
        let k = rng.random_range(0..size);
        w[k] = 0.0;
    }
    Distribution::from_weights(w.clone()).unwrap_or_else(|_| Distribution::uniform(size))
}

/// Auxiliary cardinality of the strong-interference region.
pub const IC_Q_SIZE: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ICRegionSample {
    pub q_dist: Distribution,
    pub x1_given_q: Vec<Distribution>,
    pub x2_given_q: Vec<Distribution>,
    pub r1_bound: f64,
    pub r2_bound: f64,
    pub sum_bound: f64,
}

/// Bounds of one `(P_Q, P_{X1|Q}, P_{X2|Q})` choice; `Q` is padded to four atoms.
pub fn ic_region_point(
    net: &Network,
    q_dist: &Distribution,
    x1_given_q: &[Distribution],
    x2_given_q: &[Distribution],
) -> Result<ICRegionSample> {
    check_ic_shape(net)?;
    let q = q_dist.len();
    if q > IC_Q_SIZE || x1_given_q.len() != q || x2_given_q.len() != q {
        return Err(Error::Precondition(format!("need |Q| <= {IC_Q_SIZE} and one conditional per atom")));
    }
    let (x0, x1, y2, y3) = (0, 1, 6, 7);
    let (mut r1, mut r2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..q {
        let w = q_dist.get(k);
        if w == 0.0 {
            continue;
        }
        let t = network_joint_table(net, &product_input(&[x1_given_q[k].clone(), x2_given_q[k].clone()]))?;
        r1 += w * t.conditional_mi(&[x0], &[y2], &[x1])?;
        r2 += w * t.conditional_mi(&[x1], &[y3], &[x0])?;
        s3 += w * t.conditional_mi(&[x0, x1], &[y2], &[])?;
        s4 += w * t.conditional_mi(&[x0, x1], &[y3], &[])?;
    }
    let pad = |v: &[Distribution], size: usize| {
        let mut v = v.to_vec();
        v.resize(IC_Q_SIZE, Distribution::uniform(size));
        v
    };
    Ok(ICRegionSample {
        q_dist: q_dist.padded(IC_Q_SIZE),
        x1_given_q: pad(x1_given_q, net.input_size(0)),
        x2_given_q: pad(x2_given_q, net.input_size(1)),
        r1_bound: r1,
        r2_bound: r2,
        sum_bound: s3.min(s4),
    })
}

/// Seeded random region samples. Sample `k` uses its own generator derived
/// from `(seed, k)`.
pub fn ic_strong_region(net: &Network, samples: usize, seed: u64) -> Result<Vec<ICRegionSample>> {
    check_ic_shape(net)?;
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            let q = random_pmf(&mut rng, IC_Q_SIZE);
            let a: Vec<Distribution> = (0..IC_Q_SIZE).map(|_| random_pmf(&mut rng, net.input_size(0))).collect();
            let b: Vec<Distribution> = (0..IC_Q_SIZE).map(|_| random_pmf(&mut rng, net.input_size(1))).collect();
            ic_region_point(net, &q, &a, &b)
        })
        .collect()
}

/// Joint law of `(X1^n, X2^n)` given each value of `Z`:
/// `conditionals[z][rank(x1^n) * a2^n + rank(x2^n)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WringingInput {
    pub n: usize,
    pub a1: usize,
    pub a2: usize,
    pub z_dist: Distribution,
    pub conditionals: Vec<Vec<f64>>,
}

/// Largest table wringing will enumerate.
pub const WRINGING_CAP: usize = 1 << 22;

impl WringingInput {
    /// Builds the joint table with variables `[Z, X1_0..X1_{n-1}, X2_0..X2_{n-1}]`.
    pub fn table(&self) -> Result<JointTable> {
        let s1 = checked_pow(self.a1, self.n);
        let s2 = checked_pow(self.a2, self.n);
        let block = match (s1, s2) {
            (Some(a), Some(b)) => a.checked_mul(b),
            _ => None,
        };
        let total = block.and_then(|b| b.checked_mul(self.z_dist.len()));
        let (block, total) = match (block, total) {
            (Some(b), Some(t)) if t <= WRINGING_CAP => (b, t),
            _ => return Err(Error::CapExceeded { needed: total.unwrap_or(usize::MAX) as u128, cap: WRINGING_CAP as u128 }),
        };
        if self.conditionals.len() != self.z_dist.len() {
            return Err(Error::DimensionMismatch { what: "conditionals", expected: self.z_dist.len(), found: self.conditionals.len() });
        }
        let mut probs = Vec::with_capacity(total);
        for (z, c) in self.conditionals.iter().enumerate() {
            if c.len() != block {
                return Err(Error::DimensionMismatch { what: "conditional table", expected: block, found: c.len() });
            }
            crate::model::check_stochastic("conditional table", z, c, 1e-9)?;
            probs.extend(c.iter().map(|p| p * self.z_dist.get(z)));
        }
        let mut dims = vec![self.z_dist.len()];
        dims.extend(std::iter::repeat_n(self.a1, self.n));
        dims.extend(std::iter::repeat_n(self.a2, self.n));
        JointTable::new(dims, probs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WringingResult {
    /// Selected coordinates, 0-based, in selection order.
    pub t_list: Vec<usize>,
    pub m: usize,
    pub threshold: f64,
    /// `I(X1_t; X2_t | Q')` for every `t` at termination.
    pub residual_mi: Vec<f64>,
    pub initial_mi: f64,
    /// `I(X1^n; X2^n | Q')` at termination.
    pub final_mi: f64,
    pub k_n: f64,
    pub count_bound_holds: bool,
    pub residuals_hold: bool,
    pub block_bound_holds: bool,
}

/// Tolerance of every comparison in [`wringing`].
pub const WRINGING_TOL: f64 = 1e-12;

/// Repeatedly conditions on the coordinate pair with the largest
/// `I(X1_t; X2_t | Q')` strictly above `sqrt(k_n / n)`, lowest `t` on ties.
pub fn wringing(input: &WringingInput, k_n: f64) -> Result<WringingResult> {
    if !(k_n >= 0.0) {
        return Err(Error::OutOfRange { what: "k_n", value: k_n, lo: 0.0, hi: f64::INFINITY });
    }
    let table = input.table()?;
    let n = input.n;
    let x1: Vec<usize> = (1..=n).collect();
    let x2: Vec<usize> = (n + 1..=2 * n).collect();
    let mut cond = vec![0usize];
    let initial_mi = table.conditional_mi(&x1, &x2, &cond)?;
    if initial_mi > k_n + WRINGING_TOL {
        return Err(Error::Precondition(format!("I(X1^n; X2^n | Z) = {initial_mi} exceeds k_n = {k_n}")));
    }
    let threshold = (k_n / n as f64).sqrt();
    let mut t_list = Vec::new();
    let residual_mi = loop {
        let mis = (0..n)
            .map(|t| table.conditional_mi(&[1 + t], &[n + 1 + t], &cond))
            .collect::<Result<Vec<f64>>>()?;
        let mut pick: Option<usize> = None;
        for (t, &v) in mis.iter().enumerate() {
            if v > threshold + WRINGING_TOL && pick.is_none_or(|p| v > mis[p]) {
                pick = Some(t);
            }
        }
        match pick {
            Some(t) => {
                t_list.push(t);
                cond.push(1 + t);
                cond.push(n + 1 + t);
            }
            None => break mis,
        }
    };
    let final_mi = table.conditional_mi(&x1, &x2, &cond)?;
    let m = t_list.len();
    Ok(WringingResult {
        m,
        threshold,
        residuals_hold: residual_mi.iter().all(|&r| r <= threshold + WRINGING_TOL),
        count_bound_holds: m as f64 <= (n as f64 * k_n).sqrt() + WRINGING_TOL,
        block_bound_holds: final_mi <= k_n - m as f64 * threshold + WRINGING_TOL,
        t_list,
        residual_mi,
        initial_mi,
        final_mi,
        k_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;

    fn xor_ic() -> Network {
        Network::deterministic_from_fn(vec![2, 2, 0, 0], vec![0, 0, 2, 2], vec![vec![2], vec![3], vec![], vec![]], |x| {
            vec![0, 0, x[0] ^ x[1], x[0] ^ x[1]]
        })
        .unwrap()
    }

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(2, 4).len(), 5);
        assert_eq!(simplex_grid(3, 4).len(), 15);
    }

    #[test]
    fn noiseless_cutset() {
        let net = Network::point_to_point(&Channel::noiseless(2));
        let grid = input_distribution_grid(&net, 10).unwrap();
        let cs = cutset_bound(&net, &grid, 0.0).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].cut, vec![0]);
        assert_eq!(cs[0].crossing_flows, vec![0]);
        assert!((cs[0].bound - 1.0).abs() < 1e-12);
        assert_eq!(cs[0].slack, 0.0);
        assert!(cutset_bound(&net, &[], 0.0).is_err());
    }

    #[test]
    fn ic_examples() {
        let net = xor_ic();
        let c = ic_strong_interference_check(&net, 10, 20, 1).unwrap();
        assert!(c.holds && c.worst_margin.abs() <= 1e-9);
        let s = ic_region_point(&net, &Distribution::point_mass(1, 0), &[Distribution::uniform(2)], &[Distribution::uniform(2)]).unwrap();
        assert!((s.sum_bound - 1.0).abs() < 1e-12);
        assert_eq!(s.q_dist.len(), 4);
        let s = ic_region_point(&net, &Distribution::uniform(1), &[Distribution::point_mass(2, 1)], &[Distribution::uniform(2)]).unwrap();
        assert!(s.r1_bound.abs() < 1e-12);
    }

    #[test]
    fn wringing_boundary() {
        // n = 1, X1 = X2 uniform, k_n = 1: I = 1 is not > 1
        let inp = WringingInput { n: 1, a1: 2, a2: 2, z_dist: Distribution::uniform(1), conditionals: vec![vec![0.5, 0.0, 0.0, 0.5]] };
        let r = wringing(&inp, 1.0).unwrap();
        assert_eq!(r.m, 0);
        assert!((r.residual_mi[0] - 1.0).abs() < 1e-12);
        assert!(r.residuals_hold);
        assert!(wringing(&inp, 0.5).is_err());
    }

    #[test]
    fn wringing_selects_a_copied_coordinate() {
        // X2_0 = X1_0, second coordinate independent; I = 1 and sqrt(1/2) < 1
        let probs = (0..16).map(|i| if (i >> 3) == ((i >> 1) & 1) { 0.125 } else { 0.0 }).collect();
        let inp = WringingInput { n: 2, a1: 2, a2: 2, z_dist: Distribution::uniform(1), conditionals: vec![probs] };
        let r = wringing(&inp, 1.0).unwrap();
        assert_eq!((r.m, r.t_list.clone()), (1, vec![0]));
        assert!(r.final_mi.abs() < 1e-12);
        assert!(r.count_bound_holds && r.residuals_hold && r.block_bound_holds);
    }
}
