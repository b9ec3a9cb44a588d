use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Code, CodeLayout, Network};

/// Default cap on message vectors times channel realizations.
pub const DEFAULT_EVAL_CAP: u128 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error_prob: f64,
    /// Half-width of a three-sigma interval; 0 for exact evaluation.
    pub ci: f64,
    pub exact: bool,
    /// `P_c(w)` per message vector rank (node 0 most significant); exact mode only.
    pub per_message_success: Option<Vec<f64>>,
    pub samples: usize,
}

/// Precomputed view of a network and a code for repeated simulation.
pub struct Evaluator<'a> {
    pub net: &'a Network,
    pub code: &'a Code,
    pub layout: CodeLayout,
    out_tuples: Vec<Vec<usize>>,
    support: Vec<Vec<(usize, f64)>>,
    in_sizes: Vec<usize>,
    v_state_radix: Vec<usize>,
}

/// One channel realization reached by [`Evaluator::for_each_leaf`].
pub struct Leaf<'s> {
    /// Rank of `y_i^n` per node.
    pub hist: &'s [usize],
    /// All pipe bits, most significant first.
    pub side: u64,
    pub prob: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a Network, code: &'a Code) -> Result<Self> {
        let layout = code.validate(net)?;
        let out_tuples = (0..net.kernel()[0].len()).map(|o| net.output_tuple(o)).collect();
        let support = net
            .kernel()
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(o, &p)| (o, p)).collect())
            .collect();
        let v_state_radix = layout.v_set.iter().map(|&v| code.message_sizes[v]).collect();
        Ok(Self { net, code, in_sizes: net.input_sizes(), layout, out_tuples, support, v_state_radix })
    }

    pub fn message_count(&self) -> usize {
        self.code.message_sizes.iter().product()
    }

    pub fn message_vector(&self, mut rank: usize) -> Vec<usize> {
        let sizes = &self.code.message_sizes;
        let mut w = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            w[i] = rank % sizes[i];
            rank /= sizes[i];
        }
        w
    }

    /// Upper bound on leaves over all message vectors.
    pub fn leaf_bound(&self) -> u128 {
        let branch = self.support.iter().map(Vec::len).max().unwrap_or(1) as u128;
        let mut total = self.message_count() as u128;
        for _ in 0..self.layout.n {
            total = total.saturating_mul(branch);
        }
        total
    }

    pub fn encode(&self, i: usize, t: usize, w: usize, hist: usize, side: u64) -> usize {
        let l = &self.layout;
        let hc = self.out_pow(i, t);
        let sc = l.side_count(i, t);
        let s = if l.hears_pipe(i) { side as usize } else { 0 };
        self.code.encoders[i][t][(w * hc + hist) * sc + s]
    }

    fn out_pow(&self, i: usize, t: usize) -> usize {
        self.layout.out_sizes[i].pow(t as u32)
    }

    /// `(estimate == w_source)` for every decoder.
    pub fn decoders_correct(&self, w: &[usize], hist: &[usize], side: u64) -> bool {
        self.code.decoders.iter().all(|d| self.decode(d.dest, &d.table, w[d.dest], hist[d.dest], side) == w[d.source])
    }

    pub fn decode(&self, dest: usize, table: &[usize], w_dest: usize, hist: usize, side: u64) -> usize {
        let l = &self.layout;
        let hc = self.out_pow(dest, l.n);
        let sc = l.side_count(dest, l.n);
        let s = if l.hears_pipe(dest) { side as usize } else { 0 };
        table[(w_dest * hc + hist) * sc + s]
    }

    fn pipe_bits(&self, t: usize, w: &[usize], hist: &[usize]) -> u64 {
        let l = &self.layout;
        let mut idx = 0usize;
        for (&v, &m) in l.v_set.iter().zip(&self.v_state_radix) {
            idx = idx * m + w[v];
        }
        for &v in &l.v_set {
            idx = idx * self.out_pow(v, t + 1) + hist[v];
        }
        self.code.pipe.as_ref().map(|p| p.tables[t][idx]).unwrap_or(0)
    }

    /// Visits every channel realization of positive probability for message vector `w`.
    pub fn for_each_leaf(&self, w: &[usize], f: &mut impl FnMut(Leaf<'_>)) {
        let mut hist = vec![0usize; self.in_sizes.len()];
        let mut xs = vec![0usize; self.in_sizes.len()];
        self.dfs(0, w, &mut hist, &mut xs, 0, 1.0, f);
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(&self, t: usize, w: &[usize], hist: &mut [usize], xs: &mut [usize], side: u64, prob: f64, f: &mut impl FnMut(Leaf<'_>)) {
        if t == self.layout.n {
            f(Leaf { hist, side, prob });
            return;
        }
        let mut r = 0;
        for i in 0..xs.len() {
            xs[i] = self.encode(i, t, w[i], hist[i], side);
            r = r * self.in_sizes[i] + xs[i];
        }
        let saved: Vec<usize> = hist.to_vec();
        let sched = self.layout.schedule[t];
        for &(o, p) in &self.support[r] {
            let ys = &self.out_tuples[o];
            for i in 0..hist.len() {
                hist[i] = saved[i] * self.layout.out_sizes[i] + ys[i];
            }
            let next_side = if self.layout.has_pipe() && sched > 0 {
                (side << sched) | self.pipe_bits(t, w, hist)
            } else {
                side
            };
            self.dfs(t + 1, w, hist, xs, next_side, prob * p, f);
        }
        hist.copy_from_slice(&saved);
    }

    /// `P_c(w)`: all decoders correct given message vector `w`.
    pub fn success(&self, w: &[usize]) -> f64 {
        let mut s = 0.0;
        self.for_each_leaf(w, &mut |leaf| {
            if self.decoders_correct(w, leaf.hist, leaf.side) {
                s += leaf.prob;
            }
        });
        s
    }

    /// One random run; returns whether every decoder was correct.
    pub fn simulate<R: Rng + ?Sized>(&self, w: &[usize], rng: &mut R) -> bool {
        let d = self.in_sizes.len();
        let mut hist = vec![0usize; d];
        let mut side = 0u64;
        for t in 0..self.layout.n {
            let mut r = 0;
            for i in 0..d {
                r = r * self.in_sizes[i] + self.encode(i, t, w[i], hist[i], side);
            }
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let support = &self.support[r];
            let mut o = support.last().map(|s| s.0).unwrap_or(0);
            for &(cand, p) in support {
                acc += p;
                if u < acc {
                    o = cand;
                    break;
                }
            }
            let ys = &self.out_tuples[o];
            for i in 0..d {
                hist[i] = hist[i] * self.layout.out_sizes[i] + ys[i];
            }
            let sched = self.layout.schedule[t];
            if self.layout.has_pipe() && sched > 0 {
                side = (side << sched) | self.pipe_bits(t, w, &hist);
            }
        }
        self.decoders_correct(w, &hist, side)
    }
}

/// Exact average error probability over uniform messages and all channel outputs.
pub fn exact_error_probability(net: &Network, code: &Code) -> Result<ErrorReport> {
    exact_error_probability_capped(net, code, DEFAULT_EVAL_CAP)
}

pub fn exact_error_probability_capped(net: &Network, code: &Code, cap: u128) -> Result<ErrorReport> {
    let ev = Evaluator::new(net, code)?;
    let needed = ev.leaf_bound();
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let count = ev.message_count();
    let per: Vec<f64> = (0..count).into_par_iter().map(|r| ev.success(&ev.message_vector(r))).collect();
    let mean = per.iter().sum::<f64>() / count as f64;
    Ok(ErrorReport { error_prob: (1.0 - mean).clamp(0.0, 1.0), ci: 0.0, exact: true, per_message_success: Some(per), samples: 0 })
}

/// Samples per independent generator stream in Monte Carlo evaluation.
pub const MC_BLOCK: usize = 4096;

/// Monte Carlo estimate with a three-sigma interval. Block `b` of
/// [`MC_BLOCK`] samples uses stream `b` of the seeded generator.
pub fn sample_error_probability(net: &Network, code: &Code, samples: usize, seed: u64) -> Result<ErrorReport> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let ev = Evaluator::new(net, code)?;
    let count = ev.message_count();
    let blocks = samples.div_ceil(MC_BLOCK);
    let failures: usize = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = MC_BLOCK.min(samples - b * MC_BLOCK);
            (0..len)
                .filter(|_| {
                    let w = ev.message_vector(rng.random_range(0..count));
                    !ev.simulate(&w, &mut rng)
                })
                .count()
        })
        .sum();
    let p = failures as f64 / samples as f64;
    Ok(ErrorReport {
        error_prob: p,
        ci: 3.0 * (p * (1.0 - p) / samples as f64).sqrt(),
        exact: false,
        per_message_success: None,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodMessageSet {
    /// Message vector ranks with `P_c(w) >= (1 - eps) / 2`.
    pub members: Vec<usize>,
    pub threshold: f64,
    pub size: usize,
    /// `(total messages) (1 - eps) / 2`.
    pub bound: f64,
    pub holds: bool,
}

pub fn good_message_set(report: &ErrorReport, eps: f64) -> Result<GoodMessageSet> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange { what: "epsilon", value: eps, lo: 0.0, hi: 1.0 });
    }
    let per = report
        .per_message_success
        .as_ref()
        .ok_or_else(|| Error::Precondition("per-message success table required".into()))?;
    let threshold = (1.0 - eps) / 2.0;
    let members: Vec<usize> = per.iter().enumerate().filter(|(_, &p)| p >= threshold).map(|(w, _)| w).collect();
    let bound = per.len() as f64 * threshold;
    let size = members.len();
    Ok(GoodMessageSet { members, threshold, size, bound, holds: size as f64 >= bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;

    #[test]
    fn identity_and_bsc() {
        let net = Network::point_to_point(&Channel::noiseless(2));
        let code = Code::block_point_to_point(&net, &[vec![0], vec![1]], vec![0, 1]).unwrap();
        assert_eq!(exact_error_probability(&net, &code).unwrap().error_prob, 0.0);
        let net = Network::point_to_point(&Channel::bsc(0.11));
        let code = Code::block_point_to_point(&net, &[vec![0], vec![1]], vec![0, 1]).unwrap();
        assert!((exact_error_probability(&net, &code).unwrap().error_prob - 0.11).abs() < 1e-15);
    }

    #[test]
    fn constant_decoder() {
        let net = Network::point_to_point(&Channel::noiseless(2));
        let code = Code::block_point_to_point(&net, &[vec![0], vec![1], vec![0], vec![1]], vec![1, 1]).unwrap();
        assert!((exact_error_probability(&net, &code).unwrap().error_prob - 0.75).abs() < 1e-15);
    }

    #[test]
    fn repetition_over_bsc() {
        let net = Network::point_to_point(&Channel::bsc(0.1));
        let code = Code::block_point_to_point(&net, &[vec![0, 0, 0], vec![1, 1, 1]], vec![0, 0, 0, 1, 0, 1, 1, 1]).unwrap();
        let r = exact_error_probability(&net, &code).unwrap();
        assert!((r.error_prob - 0.028).abs() < 1e-12);
        let mc = sample_error_probability(&net, &code, 50_000, 3).unwrap();
        assert!((mc.error_prob - 0.028).abs() <= mc.ci.max(1e-3));
    }

    #[test]
    fn good_set_examples() {
        let rep = |v: Vec<f64>| ErrorReport { error_prob: 0.0, ci: 0.0, exact: true, per_message_success: Some(v), samples: 0 };
        let g = good_message_set(&rep(vec![1.0, 1.0, 0.0, 0.0]), 0.5).unwrap();
        assert_eq!(g.members, vec![0, 1]);
        assert!(g.holds && g.bound == 1.0);
        let g = good_message_set(&rep(vec![1.0; 4]), 0.0).unwrap();
        assert_eq!(g.size, 4);
        let g = good_message_set(&rep(vec![0.0; 4]), 1.0).unwrap();
        assert_eq!(g.size, 4);
    }
}
