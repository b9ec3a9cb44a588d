//! N-layer stacking of an n-step code with per-timestep correction over the
//! extra link `(a, b)` and a final hashing phase.
//!
//! `V` is the set of nodes with a nonempty input alphabet; every other node is
//! a pure receiver. Node `a` sees `Y_V` after each timestep, draws corrected
//! values `Z_V` from the causal coupling toward `Q(w)`, and sends each changed
//! layer as `0`, layer index and value, then a stop bit. Receivers outside `V`
//! decode with a Hamming ball around their observations and the hash of the
//! message vector, which a genie delivers (the bits are still counted).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::binning_k;
use super::eval::{exact_error_probability, good_message_set, Evaluator};
use crate::coupling::{blowup_bound, causal_blowup_coupling, draw, CouplingKernel, EventSet, MarkovSource};
use crate::error::{Error, Result};
use crate::model::{checked_pow, Channel, Code, Network, NetworkDescription, validate_network};

/// Sequence-space cap for `|Y_V|^n` and `|Y_j|^n`.
pub const STACKED_SEQUENCE_CAP: usize = 1 << 16;
/// Cap on candidate message vectors examined by one hash decoder.
pub const HASH_CANDIDATE_CAP: u128 = 1 << 22;

/// `((-log2((1 - eps) / 4)) / n)^{1/4}`.
pub fn stacked_gamma(eps: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::OutOfRange { what: "base code error", value: eps, lo: 0.0, hi: 1.0 });
    }
    if n == 0 {
        return Err(Error::Precondition("blocklength must be positive".into()));
    }
    Ok((-((1.0 - eps) / 4.0).log2() / n as f64).powf(0.25))
}

/// `(gamma / delta)(-2 log2 gamma + log2 |Y| + 3)`.
pub fn e1_bound(gamma: f64, delta: f64, y_size: usize) -> f64 {
    gamma / delta * (-2.0 * gamma.log2() + (y_size as f64).log2() + 3.0)
}

/// Bits on the link for one correction phase: each changed layer costs a
/// flag bit plus `ceil(log2(N |Y_V|))` bits, and the phase ends with a stop bit.
pub fn correction_bits(changed: u64, layers: usize, y_v: usize) -> u64 {
    changed * (ceil_log2((layers * y_v) as u128) + 1) + 1
}

fn ceil_log2(x: u128) -> u64 {
    if x <= 1 {
        0
    } else {
        (128 - (x - 1).leading_zeros()) as u64
    }
}

/// Two nodes where the receiver also has a one-letter input, so it sits in
/// `V` and its observations can be corrected. Node 1 wants node 0's message.
pub fn listener_network(ch: &Channel) -> Network {
    let kernel = ch.rows().iter().map(|r| r.probs().to_vec()).collect();
    validate_network(NetworkDescription {
        d: Some(2),
        input_alphabets: vec![ch.inputs(), 1],
        output_alphabets: vec![0, ch.outputs()],
        kernel,
        demands: vec![vec![1], vec![]],
    })
    .expect("channel rows are stochastic")
}

/// Binary repetition code of length `n` with a majority decoder (ties to 0),
/// for a two-node network whose node 1 observes binary outputs.
pub fn repetition_code(net: &Network, n: usize) -> Result<Code> {
    let codebook = vec![vec![0; n], vec![1; n]];
    let decoder = (0..1usize << n).map(|r| (2 * r.count_ones() as usize > n) as usize).collect();
    Code::block_point_to_point(net, &codebook, decoder)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackedConfig {
    /// Link rate in bits per channel use.
    pub delta: f64,
    pub runs: usize,
    /// Replaces `N = round(gamma^{-2})`; the E1 bound comparison is then flagged invalid.
    pub layers: Option<usize>,
    /// Coordination failure target used to size the binning cells.
    pub eps_tilde: f64,
    pub seed: u64,
}

impl Default for StackedConfig {
    fn default() -> Self {
        Self { delta: 8.0, runs: 200, layers: None, eps_tilde: 0.1, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackedSimReport {
    pub v_set: Vec<usize>,
    pub base_error: f64,
    pub gamma_n: f64,
    pub layers: usize,
    pub layers_overridden: bool,
    pub n: usize,
    pub runs: usize,
    pub good_messages: usize,
    /// `delta N n gamma_n`.
    pub correction_budget: f64,
    pub mean_correction_bits: f64,
    pub max_correction_bits: u64,
    /// Correction bits excluding stop bits, summed over runs.
    pub payload_bits: u64,
    /// `n` per run.
    pub stop_bits: u64,
    pub coordination_bits: u64,
    /// `ceil(d sqrt(gamma_n) n N)`.
    pub hash_bits: u64,
    pub e1_count: usize,
    pub e1_rate: f64,
    /// `3 sqrt(p (1 - p) / runs)` with `p = max(e1_rate, 1/runs)`.
    pub e1_ci: f64,
    pub e1_bound: f64,
    pub e1_holds: bool,
    pub bound_comparison_valid: bool,
    pub decode_errors: usize,
    pub decode_error_rate: f64,
    /// Layers whose corrected `Z_V^n` fell outside `Q(w)`; the coupling makes this 0.
    pub z_outside_q: usize,
    pub mean_layer_hamming: f64,
    /// Mean over drawn layers of `sqrt(n / (2 log2 e) log2(1 / P(Q(w))))`.
    pub mean_layer_hamming_bound: f64,
    /// `exp2(-n N sqrt(gamma_n) / 2)`.
    pub hash_error_bound: f64,
}

/// Everything the protocol needs about one good message vector.
struct MessagePlan {
    w: Vec<usize>,
    kernel: CouplingKernel,
    q_set: EventSet,
    hamming_bound: f64,
}

struct Setup<'a> {
    net: &'a Network,
    code: &'a Code,
    v_set: Vec<usize>,
    y_v: usize,
    n: usize,
    layers: usize,
    budget: f64,
    /// Hamming-ball radius `N n gamma_n`.
    radius: f64,
    hash_bits_each: u64,
    plans: Vec<MessagePlan>,
    /// `(decoder index, source, dest)` for decoders outside `V`.
    outside_flows: Vec<(usize, usize, usize)>,
}

fn yv_symbol(v_set: &[usize], out_sizes: &[usize], ys: &[usize]) -> usize {
    v_set.iter().fold(0, |acc, &v| acc * out_sizes[v] + ys[v])
}

fn yv_split(v_set: &[usize], out_sizes: &[usize], mut sym: usize) -> Vec<usize> {
    let mut out = vec![0; v_set.len()];
    for k in (0..v_set.len()).rev() {
        out[k] = sym % out_sizes[v_set[k]];
        sym /= out_sizes[v_set[k]];
    }
    out
}

pub fn stacked_correction_sim(net: &Network, code: &Code, cfg: &StackedConfig) -> Result<StackedSimReport> {
    if !(cfg.delta > 0.0) {
        return Err(Error::OutOfRange { what: "delta", value: cfg.delta, lo: 0.0, hi: f64::INFINITY });
    }
    if cfg.runs == 0 {
        return Err(Error::Precondition("need at least one run".into()));
    }
    if code.pipe.is_some() {
        return Err(Error::Precondition("base code must not use a bit pipe".into()));
    }
    let report = exact_error_probability(net, code)?;
    let eps = report.error_prob;
    if eps >= 1.0 {
        return Err(Error::Precondition("base code never decodes correctly".into()));
    }
    let n = code.n;
    let gamma = stacked_gamma(eps, n)?;
    let natural = (gamma.powi(-2)).round().max(1.0) as usize;
    let layers = cfg.layers.unwrap_or(natural);
    if layers == 0 {
        return Err(Error::Precondition("need at least one layer".into()));
    }
    let good = good_message_set(&report, eps)?;
    let ev = Evaluator::new(net, code)?;
    let v_set: Vec<usize> = (0..net.d()).filter(|&i| net.input_alphabets()[i] > 0).collect();
    let out_sizes = net.output_sizes();
    for i in 0..net.d() {
        if !v_set.contains(&i) && code.message_sizes[i] > 1 {
            return Err(Error::Precondition(format!("node {i} has no input but sends a message")));
        }
    }
    let y_v: usize = v_set.iter().map(|&v| out_sizes[v]).product();
    let seq = checked_pow(y_v, n).filter(|&s| s <= STACKED_SEQUENCE_CAP).ok_or(Error::CapExceeded {
        needed: (y_v as u128).saturating_pow(n as u32),
        cap: STACKED_SEQUENCE_CAP as u128,
    })?;
    let q_threshold = (1.0 - eps) / 4.0;
    let mut plans = Vec::with_capacity(good.members.len());
    for &rank in &good.members {
        let w = ev.message_vector(rank);
        let mut total = vec![0.0; seq];
        let mut correct = vec![0.0; seq];
        ev.for_each_leaf(&w, &mut |leaf| {
            let mut r = 0usize;
            for t in 0..n {
                let ys: Vec<usize> = (0..net.d())
                    .map(|i| (leaf.hist[i] / out_sizes[i].pow((n - 1 - t) as u32)) % out_sizes[i])
                    .collect();
                r = r * y_v + yv_symbol(&v_set, &out_sizes, &ys);
            }
            total[r] += leaf.prob;
            if ev.decoders_correct(&w, leaf.hist, 0) {
                correct[r] += leaf.prob;
            }
        });
        let src = MarkovSource::from_sequence_pmf(y_v, n, &total, None)?;
        let q_set = EventSet::from_predicate(y_v, n, |r| total[r] > 0.0 && correct[r] / total[r] >= q_threshold)?;
        let p_q = src.probability(&q_set)?;
        let kernel = causal_blowup_coupling(&src, &q_set)?;
        plans.push(MessagePlan { w, kernel, q_set, hamming_bound: blowup_bound(n, p_q) });
    }
    let outside_flows: Vec<(usize, usize, usize)> = code
        .decoders
        .iter()
        .enumerate()
        .filter(|(_, d)| !v_set.contains(&d.dest))
        .map(|(k, d)| (k, d.source, d.dest))
        .collect();
    for &(_, _, dest) in &outside_flows {
        if checked_pow(out_sizes[dest], n).is_none_or(|s| s > STACKED_SEQUENCE_CAP) {
            return Err(Error::CapExceeded { needed: (out_sizes[dest] as u128).saturating_pow(n as u32), cap: STACKED_SEQUENCE_CAP as u128 });
        }
    }
    for &(_, src, _) in &outside_flows {
        let count = (code.message_sizes[src] as u128).saturating_pow(layers as u32);
        if count > HASH_CANDIDATE_CAP {
            return Err(Error::CapExceeded { needed: count, cap: HASH_CANDIDATE_CAP });
        }
    }
    let d = net.d();
    let nn = (n * layers) as f64;
    let setup = Setup {
        net,
        code,
        v_set: v_set.clone(),
        y_v,
        n,
        layers,
        budget: cfg.delta * nn * gamma,
        radius: nn * gamma,
        hash_bits_each: (nn * gamma.sqrt()).ceil() as u64,
        plans,
        outside_flows,
    };
    let outcomes: Vec<RunOutcome> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(run as u64);
            setup.run(&ev, &mut rng)
        })
        .collect();
    let runs = cfg.runs as f64;
    let e1_count = outcomes.iter().filter(|o| o.e1).count();
    let e1_rate = e1_count as f64 / runs;
    let p = e1_rate.max(1.0 / runs);
    let e1_ci = 3.0 * (p * (1.0 - p) / runs).sqrt();
    let bound = e1_bound(gamma, cfg.delta, y_v);
    let decode_errors = outcomes.iter().filter(|o| o.e1 || o.decode_error).count();
    let total_layers = runs * layers as f64;
    let k = binning_k(d, (1.0 + eps) / 2.0, cfg.eps_tilde)?;
    Ok(StackedSimReport {
        v_set,
        base_error: eps,
        gamma_n: gamma,
        layers,
        layers_overridden: cfg.layers.is_some_and(|l| l != natural),
        n,
        runs: cfg.runs,
        good_messages: good.size,
        correction_budget: setup.budget,
        mean_correction_bits: outcomes.iter().map(|o| o.bits as f64).sum::<f64>() / runs,
        max_correction_bits: outcomes.iter().map(|o| o.bits).max().unwrap_or(0),
        payload_bits: outcomes.iter().map(|o| o.bits - n as u64).sum(),
        stop_bits: n as u64,
        coordination_bits: (layers * d) as u64 * k as u64,
        hash_bits: (d as f64 * gamma.sqrt() * nn).ceil() as u64,
        e1_count,
        e1_rate,
        e1_ci,
        e1_bound: bound,
        e1_holds: e1_rate <= bound + e1_ci,
        bound_comparison_valid: !cfg.layers.is_some_and(|l| l != natural),
        decode_errors,
        decode_error_rate: decode_errors as f64 / runs,
        z_outside_q: outcomes.iter().map(|o| o.z_outside).sum(),
        mean_layer_hamming: outcomes.iter().map(|o| o.hamming as f64).sum::<f64>() / total_layers,
        mean_layer_hamming_bound: outcomes.iter().map(|o| o.bound_sum).sum::<f64>() / total_layers,
        hash_error_bound: (-nn * gamma.sqrt() / 2.0).exp2(),
    })
}

struct RunOutcome {
    bits: u64,
    e1: bool,
    decode_error: bool,
    z_outside: usize,
    hamming: u64,
    bound_sum: f64,
}

impl Setup<'_> {
    fn run<R: Rng + ?Sized>(&self, ev: &Evaluator<'_>, rng: &mut R) -> RunOutcome {
        let d = self.net.d();
        let out_sizes = self.net.output_sizes();
        let in_sizes = self.net.input_sizes();
        let plans: Vec<&MessagePlan> = (0..self.layers).map(|_| &self.plans[rng.random_range(0..self.plans.len())]).collect();
        // per layer: node histories (corrected inside V), and rank of z_V^t
        let mut hist = vec![vec![0usize; d]; self.layers];
        let mut z_rank = vec![0usize; self.layers];
        let mut bits = 0u64;
        let mut hamming = 0u64;
        for t in 0..self.n {
            let mut changed = 0u64;
            for (l, plan) in plans.iter().enumerate() {
                let mut r = 0usize;
                for i in 0..d {
                    r = r * in_sizes[i] + ev.encode(i, t, plan.w[i], hist[l][i], 0);
                }
                let o = draw(rng, &self.net.kernel()[r]);
                let ys = self.net.output_tuple(o);
                let y = yv_symbol(&self.v_set, &out_sizes, &ys);
                let z = draw(rng, plan.kernel.row(t, z_rank[l], y));
                if z != y {
                    changed += 1;
                }
                let zs = yv_split(&self.v_set, &out_sizes, z);
                let mut obs = ys;
                for (k, &v) in self.v_set.iter().enumerate() {
                    obs[v] = zs[k];
                }
                for i in 0..d {
                    hist[l][i] = hist[l][i] * out_sizes[i] + obs[i];
                }
                z_rank[l] = z_rank[l] * self.y_v + z;
            }
            hamming += changed;
            bits += correction_bits(changed, self.layers, self.y_v);
        }
        let e1 = bits as f64 > self.budget;
        let z_outside = plans.iter().zip(&z_rank).filter(|(p, &z)| !p.q_set.contains(z)).count();
        let mut decode_error = false;
        for (k, dec) in self.code.decoders.iter().enumerate() {
            if self.v_set.contains(&dec.dest) {
                decode_error |= plans
                    .iter()
                    .zip(&hist)
                    .any(|(p, h)| ev.decode(dec.dest, &dec.table, p.w[dec.dest], h[dec.dest], 0) != p.w[dec.source]);
            } else if self.outside_flows.iter().any(|f| f.0 == k) {
                decode_error |= !self.hash_decode(ev, dec.dest, &dec.table, dec.source, &plans, &hist, rng);
            }
        }
        RunOutcome { bits, e1, decode_error, z_outside, hamming, bound_sum: plans.iter().map(|p| p.hamming_bound).sum() }
    }

    /// Hamming-ball decoding of message `source` at receiver `dest` outside `V`.
    #[allow(clippy::too_many_arguments)]
    fn hash_decode<R: Rng + ?Sized>(
        &self,
        ev: &Evaluator<'_>,
        dest: usize,
        table: &[usize],
        source: usize,
        plans: &[&MessagePlan],
        hist: &[Vec<usize>],
        rng: &mut R,
    ) -> bool {
        let m = self.code.message_sizes[source];
        let size = self.net.output_size(dest);
        let seqs = size.pow(self.n as u32);
        // dist[l][msg]: distance from the layer's observation to the nearest
        // sequence the decoder maps to msg
        let dist: Vec<Vec<usize>> = hist
            .iter()
            .map(|h| {
                let mut best = vec![usize::MAX; m];
                for cand in 0..seqs {
                    let msg = ev.decode(dest, table, 0, cand, 0);
                    let dh = hamming_digits(h[dest], cand, size, self.n);
                    best[msg] = best[msg].min(dh);
                }
                best
            })
            .collect();
        let salt: u64 = rng.random();
        let truth: Vec<usize> = plans.iter().map(|p| p.w[source]).collect();
        let target = hash_vector(salt, source, &truth, self.hash_bits_each);
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut cur = Vec::with_capacity(self.layers);
        search_candidates(&dist, self.radius, 0, &mut cur, &mut |c| {
            if hash_vector(salt, source, c, self.hash_bits_each) == target {
                found.push(c.to_vec());
            }
            found.len() < 2
        });
        found.len() == 1 && found[0] == truth
    }
}

fn hamming_digits(mut a: usize, mut b: usize, base: usize, len: usize) -> usize {
    let mut d = 0;
    for _ in 0..len {
        d += (a % base != b % base) as usize;
        a /= base;
        b /= base;
    }
    d
}

fn hash_vector(salt: u64, source: usize, msgs: &[usize], bits: u64) -> u64 {
    let mut h = splitmix(salt ^ (source as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for &m in msgs {
        h = splitmix(h ^ m as u64);
    }
    if bits >= 64 {
        h
    } else {
        h & ((1u64 << bits) - 1)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Visits message vectors whose summed layer distances stay within `radius`.
/// The visitor returns false to stop.
fn search_candidates(dist: &[Vec<usize>], radius: f64, used: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize]) -> bool) -> bool {
    let l = cur.len();
    if l == dist.len() {
        return visit(cur);
    }
    for (msg, &dm) in dist[l].iter().enumerate() {
        if dm == usize::MAX || (used + dm) as f64 > radius {
            continue;
        }
        cur.push(msg);
        let go = search_candidates(dist, radius, used + dm, cur, visit);
        cur.pop();
        if !go {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_value() {
        assert!((stacked_gamma(0.5, 16).unwrap() - 0.6580370064762462).abs() < 1e-12);
        assert!(stacked_gamma(1.0, 4).is_err());
    }

    #[test]
    fn bit_accounting() {
        assert_eq!(correction_bits(0, 5, 2), 1);
        assert_eq!(correction_bits(2, 4, 2), 9);
        assert_eq!(correction_bits(1, 1, 1), 2);
        assert_eq!(correction_bits(3, 3, 3), 3 * 5 + 1);
    }

    #[test]
    fn deterministic_net_sends_only_stop_bits() {
        let net = listener_network(&Channel::noiseless(2));
        let code = repetition_code(&net, 3).unwrap();
        let r = stacked_correction_sim(&net, &code, &StackedConfig { runs: 50, seed: 1, ..Default::default() }).unwrap();
        assert_eq!(r.base_error, 0.0);
        assert_eq!(r.payload_bits, 0);
        assert_eq!(r.max_correction_bits, 3);
        assert_eq!(r.decode_errors, 0);
        assert_eq!(r.e1_count, 0);
    }

    #[test]
    fn corrections_land_in_q() {
        let net = listener_network(&Channel::bsc(0.3));
        let code = repetition_code(&net, 3).unwrap();
        let cfg = StackedConfig { delta: 0.5, runs: 300, layers: Some(4), eps_tilde: 0.1, seed: 7 };
        let r = stacked_correction_sim(&net, &code, &cfg).unwrap();
        assert!((r.base_error - 0.216).abs() < 1e-12);
        assert!(r.payload_bits > 0);
        assert_eq!(r.z_outside_q, 0);
        // nothing is decoded outside V, so only E1 can cause an error
        assert_eq!(r.decode_errors, r.e1_count);
        assert!(r.layers_overridden && !r.bound_comparison_valid);
        let again = stacked_correction_sim(&net, &code, &cfg).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn hash_decoding_outside_v() {
        let net = Network::point_to_point(&Channel::noiseless(2));
        let code = repetition_code(&net, 3).unwrap();
        let r = stacked_correction_sim(&net, &code, &StackedConfig { runs: 100, seed: 3, ..Default::default() }).unwrap();
        assert_eq!(r.v_set, vec![0]);
        assert_eq!(r.payload_bits, 0);
        // the true vector is always in the ball, so errors come only from hash collisions
        assert!(r.decode_error_rate < 0.5);
    }

    #[test]
    fn candidate_search_respects_radius() {
        let dist = vec![vec![0, 2], vec![1, 0]];
        let mut seen = Vec::new();
        search_candidates(&dist, 1.0, 0, &mut Vec::new(), &mut |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1]]);
    }
}
