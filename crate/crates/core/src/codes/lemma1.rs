use serde::{Deserialize, Serialize};

use super::eval::exact_error_probability;
use crate::error::{Error, Result};
use crate::model::{cumulative_bits, Code, Network};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Result {
    pub code: Code,
    /// Pipe content every node assumes in the returned code.
    pub x_star: u64,
    pub error_prob: f64,
    pub original_error: f64,
    /// `1 - (1 - eps) 2^{-k}` with `eps` the original error.
    pub guarantee: f64,
    pub holds: bool,
    /// Error of the base code built from each candidate pipe content.
    pub per_candidate: Vec<f64>,
}

/// `1 - (1 - eps) 2^{-k}`.
pub fn lemma1_guarantee(eps: f64, k: u32) -> f64 {
    1.0 - (1.0 - eps) * (-(k as f64)).exp2()
}

/// Base-network code in which every node pretends the pipe carried `x_star`.
pub fn fix_pipe(net: &Network, code: &Code, x_star: u64) -> Result<Code> {
    let layout = code.validate(net)?;
    let k = layout.k;
    if k < 64 && x_star >> k != 0 {
        return Err(Error::Precondition(format!("pipe content {x_star} exceeds {k} bits")));
    }
    let n = layout.n;
    let mut out = code.clone();
    out.pipe = None;
    for &v in &layout.v_set {
        for t in 0..n {
            let cum = cumulative_bits(k, n as u64, t as u64);
            let prefix = (x_star >> (k - cum)) as usize;
            let sc = layout.side_count(v, t);
            out.encoders[v][t] = code.encoders[v][t].chunks(sc).map(|c| c[prefix]).collect();
        }
    }
    let sc_n = 1usize << k;
    for dec in out.decoders.iter_mut() {
        if layout.hears_pipe(dec.dest) {
            dec.table = dec.table.chunks(sc_n).map(|c| c[x_star as usize]).collect();
        }
    }
    out.validate(net)?;
    Ok(out)
}

/// Removes the bit pipe by trying every pipe content and keeping the best
/// resulting code (lowest content on ties).
pub fn lemma1_transform(net: &Network, code: &Code) -> Result<Lemma1Result> {
    let k = code.pipe.as_ref().map(|p| p.k).unwrap_or(0);
    if k >= 24 {
        return Err(Error::CapExceeded { needed: 1u128 << k, cap: 1 << 24 });
    }
    let original_error = exact_error_probability(net, code)?.error_prob;
    let mut per_candidate = Vec::with_capacity(1 << k);
    let mut best: Option<(f64, u64, Code)> = None;
    for x in 0..(1u64 << k) {
        let c = if code.pipe.is_some() { fix_pipe(net, code, x)? } else { code.clone() };
        let e = exact_error_probability(net, &c)?.error_prob;
        per_candidate.push(e);
        if best.as_ref().is_none_or(|(b, _, _)| e < *b) {
            best = Some((e, x, c));
        }
    }
    let (error_prob, x_star, code) = best.expect("at least one candidate");
    let guarantee = lemma1_guarantee(original_error, k as u32);
    Ok(Lemma1Result { code, x_star, error_prob, original_error, guarantee, holds: error_prob <= guarantee + 1e-12, per_candidate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Channel, CodeLayout};

    #[test]
    fn guarantee_formula() {
        assert!((lemma1_guarantee(0.2, 2) - 0.8).abs() < 1e-15);
        assert!((lemma1_guarantee(0.3, 0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_budget_is_identity() {
        let net = Network::point_to_point(&Channel::bsc(0.2));
        let code = Code::block_point_to_point(&net, &[vec![0, 0], vec![1, 1]], vec![0, 0, 1, 1]).unwrap();
        let r = lemma1_transform(&net, &code).unwrap();
        assert_eq!(r.code, code);
        assert_eq!(r.error_prob, r.original_error);
    }

    #[test]
    fn unused_pipe_keeps_error() {
        // noiseless binary link, M = 4 over n = 1: pipe tables filled but ignored
        let net = Network::point_to_point(&Channel::noiseless(2));
        let layout = CodeLayout::new(&net, 1, &[4, 1], &[0, 1], 1).unwrap();
        let mut code = layout.zero_code().unwrap();
        code.encoders[0][0] = vec![0, 1, 0, 1];
        // decoder ignores the bit: index (y * 2 + bit)
        code.decoders[0].table = vec![0, 0, 1, 1];
        code.pipe.as_mut().unwrap().tables[0] = vec![0, 1, 1, 0, 1, 1, 0, 0];
        let r = lemma1_transform(&net, &code).unwrap();
        assert!((r.original_error - 0.5).abs() < 1e-15);
        assert_eq!(r.error_prob, r.original_error);
        assert!(r.holds);
    }

    #[test]
    fn pipe_that_helps() {
        // the pipe carries the high bit of w; the transform can only guess it
        let net = Network::point_to_point(&Channel::noiseless(2));
        let layout = CodeLayout::new(&net, 1, &[4, 1], &[0, 1], 1).unwrap();
        let mut code = layout.zero_code().unwrap();
        code.encoders[0][0] = vec![0, 1, 0, 1];
        code.decoders[0].table = vec![0, 2, 1, 3];
        // state (w, y) ranked w * 2 + y
        code.pipe.as_mut().unwrap().tables[0] = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let r = lemma1_transform(&net, &code).unwrap();
        assert_eq!(r.original_error, 0.0);
        assert!((r.error_prob - 0.5).abs() < 1e-15);
        assert!((r.guarantee - 0.5).abs() < 1e-15);
        assert!(r.holds);
    }
}
