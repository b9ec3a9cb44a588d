use serde::{Deserialize, Serialize};

use super::distribution::{check_stochastic, renormalize_row, Channel, PROB_TOL};
use super::schedule::schedule_vector;
use super::{checked_pow, effective_size};
use crate::error::{Error, Result};

/// Raw network description as read from a file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkDescription {
    #[serde(default)]
    pub d: Option<usize>,
    pub input_alphabets: Vec<usize>,
    pub output_alphabets: Vec<usize>,
    /// `kernel[input tuple rank][output tuple rank]`.
    pub kernel: Vec<Vec<f64>>,
    /// 0-based destination nodes for each node's message.
    pub demands: Vec<Vec<usize>>,
}

/// A memoryless stationary `d`-node network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDescription", into = "NetworkDescription")]
pub struct Network {
    input_alphabets: Vec<usize>,
    output_alphabets: Vec<usize>,
    kernel: Vec<Vec<f64>>,
    demands: Vec<Vec<usize>>,
    deterministic: bool,
}

impl TryFrom<NetworkDescription> for Network {
    type Error = Error;
    fn try_from(desc: NetworkDescription) -> Result<Self> {
        validate_network(desc)
    }
}

impl From<Network> for NetworkDescription {
    fn from(net: Network) -> Self {
        net.description()
    }
}

fn tuple_count(alphabets: &[usize], what: &'static str) -> Result<usize> {
    alphabets
        .iter()
        .try_fold(1usize, |acc, &a| acc.checked_mul(effective_size(a)))
        .ok_or_else(|| Error::Precondition(format!("{what} tuple count overflows")))
}

/// Checks a description and builds the network. Kernel rows off by more than
/// `1e-9` are rejected; smaller deviations are renormalized.
pub fn validate_network(desc: NetworkDescription) -> Result<Network> {
    let d = desc.input_alphabets.len();
    if d == 0 {
        return Err(Error::Precondition("network has no nodes".into()));
    }
    if let Some(declared) = desc.d {
        if declared != d {
            return Err(Error::DimensionMismatch { what: "input_alphabets", expected: declared, found: d });
        }
    }
    if desc.output_alphabets.len() != d {
        return Err(Error::DimensionMismatch { what: "output_alphabets", expected: d, found: desc.output_alphabets.len() });
    }
    if desc.demands.len() != d {
        return Err(Error::DimensionMismatch { what: "demands", expected: d, found: desc.demands.len() });
    }
    for dests in &desc.demands {
        for &j in dests {
            if j >= d {
                return Err(Error::InvalidNode { what: "demands", node: j, d });
            }
        }
    }
    let n_in = tuple_count(&desc.input_alphabets, "input")?;
    let n_out = tuple_count(&desc.output_alphabets, "output")?;
    if desc.kernel.len() != n_in {
        return Err(Error::DimensionMismatch { what: "kernel rows", expected: n_in, found: desc.kernel.len() });
    }
    let mut kernel = Vec::with_capacity(n_in);
    for (r, row) in desc.kernel.into_iter().enumerate() {
        if row.len() != n_out {
            return Err(Error::DimensionMismatch { what: "kernel row", expected: n_out, found: row.len() });
        }
        kernel.push(renormalize_row("kernel row", r, row)?);
    }
    let deterministic = kernel.iter().flatten().all(|&p| p == 0.0 || p == 1.0);
    let mut demands = desc.demands;
    for dests in &mut demands {
        dests.sort_unstable();
        dests.dedup();
    }
    Ok(Network {
        input_alphabets: desc.input_alphabets,
        output_alphabets: desc.output_alphabets,
        kernel,
        demands,
        deterministic,
    })
}

impl Network {
    pub fn description(&self) -> NetworkDescription {
        NetworkDescription {
            d: Some(self.d()),
            input_alphabets: self.input_alphabets.clone(),
            output_alphabets: self.output_alphabets.clone(),
            kernel: self.kernel.clone(),
            demands: self.demands.clone(),
        }
    }

    /// Two nodes: node 0 drives `ch`, node 1 observes its output and wants node 0's message.
    pub fn point_to_point(ch: &Channel) -> Self {
        let mut kernel = Vec::with_capacity(ch.inputs());
        for x in 0..ch.inputs() {
            kernel.push(ch.row(x).probs().to_vec());
        }
        validate_network(NetworkDescription {
            d: Some(2),
            input_alphabets: vec![ch.inputs(), 0],
            output_alphabets: vec![0, ch.outputs()],
            kernel,
            demands: vec![vec![1], vec![]],
        })
        .expect("channel rows are stochastic")
    }

    /// Builds a deterministic network from an output map on input tuples.
    pub fn deterministic_from_fn(
        input_alphabets: Vec<usize>,
        output_alphabets: Vec<usize>,
        demands: Vec<Vec<usize>>,
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let n_in = tuple_count(&input_alphabets, "input")?;
        let n_out = tuple_count(&output_alphabets, "output")?;
        let in_eff: Vec<usize> = input_alphabets.iter().map(|&a| effective_size(a)).collect();
        let out_eff: Vec<usize> = output_alphabets.iter().map(|&a| effective_size(a)).collect();
        let mut kernel = vec![vec![0.0; n_out]; n_in];
        for (r, row) in kernel.iter_mut().enumerate() {
            let xs = unrank(r, &in_eff);
            let ys = f(&xs);
            if ys.len() != out_eff.len() {
                return Err(Error::DimensionMismatch { what: "output tuple", expected: out_eff.len(), found: ys.len() });
            }
            row[rank(&ys, &out_eff)?] = 1.0;
        }
        validate_network(NetworkDescription { d: None, input_alphabets, output_alphabets, kernel, demands })
    }

    pub fn d(&self) -> usize {
        self.input_alphabets.len()
    }

    pub fn input_alphabets(&self) -> &[usize] {
        &self.input_alphabets
    }

    pub fn output_alphabets(&self) -> &[usize] {
        &self.output_alphabets
    }

    pub fn input_size(&self, i: usize) -> usize {
        effective_size(self.input_alphabets[i])
    }

    pub fn output_size(&self, i: usize) -> usize {
        effective_size(self.output_alphabets[i])
    }

    pub fn input_sizes(&self) -> Vec<usize> {
        (0..self.d()).map(|i| self.input_size(i)).collect()
    }

    pub fn output_sizes(&self) -> Vec<usize> {
        (0..self.d()).map(|i| self.output_size(i)).collect()
    }

    pub fn kernel(&self) -> &[Vec<f64>] {
        &self.kernel
    }

    pub fn demands(&self) -> &[Vec<usize>] {
        &self.demands
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// All `(source, destination)` pairs in canonical order.
    pub fn flows(&self) -> Vec<(usize, usize)> {
        self.demands
            .iter()
            .enumerate()
            .flat_map(|(i, ds)| ds.iter().map(move |&j| (i, j)))
            .collect()
    }

    pub fn input_rank(&self, xs: &[usize]) -> Result<usize> {
        rank(xs, &self.input_sizes())
    }

    pub fn output_tuple(&self, rank_: usize) -> Vec<usize> {
        unrank(rank_, &self.output_sizes())
    }

    /// Output-tuple distribution for one input tuple.
    pub fn row(&self, xs: &[usize]) -> Result<&[f64]> {
        Ok(&self.kernel[self.input_rank(xs)?])
    }

    /// Checks that `v_set` names distinct valid nodes.
    pub fn check_node_set(&self, v_set: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.d()];
        for &v in v_set {
            if v >= self.d() {
                return Err(Error::InvalidNode { what: "node set", node: v, d: self.d() });
            }
            if seen[v] {
                return Err(Error::Precondition(format!("node {v} repeated in node set")));
            }
            seen[v] = true;
        }
        Ok(())
    }

    #[allow(dead_code)]
    pub(crate) fn assert_stochastic(&self) -> Result<()> {
        for (r, row) in self.kernel.iter().enumerate() {
            check_stochastic("kernel row", r, row, PROB_TOL)?;
        }
        Ok(())
    }
}

/// Mixed-radix rank with the first coordinate most significant.
pub(crate) fn rank(digits: &[usize], radices: &[usize]) -> Result<usize> {
    if digits.len() != radices.len() {
        return Err(Error::DimensionMismatch { what: "tuple", expected: radices.len(), found: digits.len() });
    }
    let mut r = 0usize;
    for (&x, &b) in digits.iter().zip(radices) {
        if x >= b {
            return Err(Error::OutOfRange { what: "symbol", value: x as f64, lo: 0.0, hi: (b - 1) as f64 });
        }
        r = r * b + x;
    }
    Ok(r)
}

pub(crate) fn unrank(mut r: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (o, &b) in out.iter_mut().zip(radices).rev() {
        *o = r % b;
        r /= b;
    }
    out
}

/// Per-node rates in bits per channel use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        for &r in &rates {
            if !(r >= 0.0) {
                return Err(Error::OutOfRange { what: "rate", value: r, lo: 0.0, hi: f64::INFINITY });
            }
        }
        Ok(Self(rates))
    }

    /// `R_i = log2(M_i) / n`.
    pub fn from_message_sizes(sizes: &[usize], n: usize) -> Self {
        Self(sizes.iter().map(|&m| (m as f64).log2() / n as f64).collect())
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    /// Adds `s` to every entry.
    pub fn plus_scalar(&self, s: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|r| r + s).collect())
    }
}

/// A network with an extra bit pipe from node `a` (seeing all of `v_set`)
/// to node `b` (heard by all of `v_set`).
///
/// Within step `t`: nodes encode using the pipe bits of steps `< t`, the
/// channel fires, `a` reads messages and outputs of `v_set` through `t`,
/// and emits `schedule[t-1]` bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModifiedNetwork {
    pub base: Network,
    pub v_set: Vec<usize>,
    pub k: u64,
    pub n: usize,
    pub schedule: Vec<u64>,
}

impl ModifiedNetwork {
    pub fn new(base: Network, v_set: Vec<usize>, k: u64, n: usize) -> Result<Self> {
        base.check_node_set(&v_set)?;
        if v_set.is_empty() && k > 0 {
            return Err(Error::Precondition("bit pipe needs a nonempty node set".into()));
        }
        let schedule = schedule_vector(k, n as u64)?;
        Ok(Self { base, v_set, k, n, schedule })
    }

    /// Bits available to `v_set` before encoding at 0-based step `t`.
    pub fn bits_before(&self, t: usize) -> u64 {
        self.schedule[..t].iter().sum()
    }

    /// Number of distinct values the whole pipe can carry.
    pub fn edge_code_domain(&self) -> Option<usize> {
        checked_pow(2, self.k as usize)
    }

    pub fn in_v(&self, node: usize) -> bool {
        self.v_set.contains(&node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn identity_desc() -> NetworkDescription {
        NetworkDescription {
            d: Some(2),
            input_alphabets: vec![2, 0],
            output_alphabets: vec![0, 2],
            kernel: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            demands: vec![vec![1], vec![]],
        }
    }

    #[test]
    fn identity_is_deterministic() {
        assert!(validate_network(identity_desc()).unwrap().is_deterministic());
        assert!(!Network::point_to_point(&Channel::bsc(0.11)).is_deterministic());
    }

    #[test]
    fn rejects_bad_kernels_and_demands() {
        let mut desc = identity_desc();
        desc.kernel[0] = vec![0.9, 0.0];
        assert!(matches!(validate_network(desc), Err(Error::NonStochastic { .. })));
        let mut desc = identity_desc();
        desc.demands[0] = vec![2];
        assert!(matches!(validate_network(desc), Err(Error::InvalidNode { .. })));
        let mut desc = identity_desc();
        desc.kernel.pop();
        assert!(matches!(validate_network(desc), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn idempotent() {
        let mut desc = identity_desc();
        desc.kernel[0] = vec![0.3, 0.7 + 4e-10];
        let once = validate_network(desc).unwrap();
        let twice = validate_network(once.description()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn ranks_roundtrip() {
        let radices = [3, 1, 2];
        for r in 0..6 {
            assert_eq!(rank(&unrank(r, &radices), &radices).unwrap(), r);
        }
        assert_eq!(unrank(1, &radices), vec![0, 0, 1]);
    }

    #[test]
    fn modified_schedule() {
        let net = Network::point_to_point(&Channel::bsc(0.1));
        let m = ModifiedNetwork::new(net.clone(), vec![0], 2, 4).unwrap();
        assert_eq!(m.schedule, vec![0, 1, 0, 1]);
        let m = ModifiedNetwork::new(net.clone(), vec![0, 1], 1, 1).unwrap();
        assert_eq!(m.edge_code_domain(), Some(2));
        assert!(ModifiedNetwork::new(net, vec![2], 1, 1).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let net = Network::point_to_point(&Channel::bsc(0.11));
        let text = serde_json::to_string(&net).unwrap();
        let back: Network = serde_json::from_str(&text).unwrap();
        assert_eq!(net, back);
    }
}
