use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{exact_error_probability, Evaluator};
use crate::error::{Error, Result};
use crate::model::{Code, CodeLayout, Network};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SearchBudget {
    /// Every code, refusing when the family exceeds `cap`.
    Exhaustive { cap: u128 },
    /// Seeded random restarts, each followed by coordinate improvement.
    Random { restarts: usize, sweeps: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub code: Code,
    pub error_prob: f64,
    pub exhaustive: bool,
    /// Encoder (and, with several decoders, decoder) configurations visited.
    pub evaluated: u128,
}

/// Every encoder table entry that has more than one possible value.
fn encoder_slots(layout: &CodeLayout) -> Result<Vec<(usize, usize, usize, usize)>> {
    let mut slots = Vec::new();
    for i in 0..layout.in_sizes.len() {
        let a = layout.in_sizes[i];
        if a < 2 {
            continue;
        }
        for t in 0..layout.n {
            for idx in 0..layout.encoder_len(i, t)? {
                slots.push((i, t, idx, a));
            }
        }
    }
    Ok(slots)
}

fn family_size(radices: impl Iterator<Item = usize>) -> u128 {
    radices.fold(1u128, |acc, r| acc.saturating_mul(r as u128))
}

/// Optimal decoders for the encoders in `code`, written into `code`.
///
/// With one decoder the MAP rule is exact. With several, each flow gets its
/// own MAP decoder, which is what random search uses as a heuristic.
pub fn map_decoders(net: &Network, code: &mut Code) -> Result<f64> {
    let ev = Evaluator::new(net, code)?;
    let count = ev.message_count();
    let mut new_tables = Vec::with_capacity(code.decoders.len());
    let mut single_success = 0.0;
    for dec in &code.decoders {
        let ms = code.message_sizes[dec.source];
        let len = ev.layout.decoder_len(dec.dest)?;
        let mut score = vec![0.0; len * ms];
        let hc = ev.layout.history_count(dec.dest, ev.layout.n)?;
        let sc = ev.layout.side_count(dec.dest, ev.layout.n);
        let hears = ev.layout.hears_pipe(dec.dest);
        for r in 0..count {
            let w = ev.message_vector(r);
            ev.for_each_leaf(&w, &mut |leaf| {
                let s = if hears { leaf.side as usize } else { 0 };
                let idx = (w[dec.dest] * hc + leaf.hist[dec.dest]) * sc + s;
                score[idx * ms + w[dec.source]] += leaf.prob;
            });
        }
        let mut table = vec![0; len];
        let mut total = 0.0;
        for (idx, slot) in table.iter_mut().enumerate() {
            let row = &score[idx * ms..(idx + 1) * ms];
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            *slot = best;
            total += row[best];
        }
        single_success = total / count as f64;
        new_tables.push(table);
    }
    drop(ev);
    for (dec, table) in code.decoders.iter_mut().zip(new_tables) {
        dec.table = table;
    }
    if code.decoders.len() == 1 {
        Ok((1.0 - single_success).clamp(0.0, 1.0))
    } else {
        Ok(exact_error_probability(net, code)?.error_prob)
    }
}

/// Minimum-error code without a bit pipe for the given blocklength and message sizes.
///
/// Exhaustive mode is an exact oracle: it enumerates every encoder and pairs
/// it with its MAP decoder when there is one flow, or enumerates all decoder
/// tables jointly when there are several. Ties keep the first code found.
pub fn search_best_code(net: &Network, n: usize, message_sizes: &[usize], budget: &SearchBudget, seed: u64) -> Result<SearchResult> {
    let layout = CodeLayout::new(net, n, message_sizes, &[], 0)?;
    if layout.flows.is_empty() {
        return Err(Error::Precondition("network has no demands".into()));
    }
    let slots = encoder_slots(&layout)?;
    match budget {
        SearchBudget::Exhaustive { cap } => exhaustive(net, &layout, &slots, *cap),
        SearchBudget::Random { restarts, sweeps } => random_search(net, &layout, &slots, *restarts, *sweeps, seed),
    }
}

fn exhaustive(net: &Network, layout: &CodeLayout, slots: &[(usize, usize, usize, usize)], cap: u128) -> Result<SearchResult> {
    let enc_count = family_size(slots.iter().map(|s| s.3));
    let joint = layout.flows.len() > 1;
    let dec_count = if joint {
        let mut c = 1u128;
        for &(src, dest) in &layout.flows {
            let len = layout.decoder_len(dest)?;
            c = c.saturating_mul(family_size(std::iter::repeat_n(layout.message_sizes[src], len)));
        }
        c
    } else {
        1
    };
    let total = enc_count.saturating_mul(dec_count);
    if total > cap {
        return Err(Error::CapExceeded { needed: total, cap });
    }
    let mut code = layout.zero_code()?;
    let mut digits = vec![0usize; slots.len()];
    let mut best: Option<(f64, Code)> = None;
    let mut evaluated = 0u128;
    loop {
        for (k, &(i, t, idx, _)) in slots.iter().enumerate() {
            code.encoders[i][t][idx] = digits[k];
        }
        if joint {
            evaluated += joint_decoders(net, layout, &mut code, &mut best)?;
        } else {
            let e = map_decoders(net, &mut code)?;
            evaluated += 1;
            if best.as_ref().is_none_or(|(b, _)| e < *b) {
                best = Some((e, code.clone()));
            }
        }
        if !odometer(&mut digits, slots.iter().map(|s| s.3)) {
            break;
        }
    }
    let (error_prob, code) = best.expect("family is nonempty");
    Ok(SearchResult { code, error_prob, exhaustive: true, evaluated })
}

/// Advances a mixed-radix counter, last digit fastest. Returns false on wrap-around.
fn odometer(digits: &mut [usize], radices: impl DoubleEndedIterator<Item = usize> + ExactSizeIterator) -> bool {
    let radices: Vec<usize> = radices.collect();
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radices[k] {
            return true;
        }
        digits[k] = 0;
    }
    false
}

fn joint_decoders(net: &Network, layout: &CodeLayout, code: &mut Code, best: &mut Option<(f64, Code)>) -> Result<u128> {
    // realizations per message vector: (decoder indices, prob)
    let ev = Evaluator::new(net, code)?;
    let count = ev.message_count();
    let mut leaves: Vec<Vec<(Vec<usize>, f64)>> = Vec::with_capacity(count);
    let mut msgs = Vec::with_capacity(count);
    for r in 0..count {
        let w = ev.message_vector(r);
        let mut v = Vec::new();
        ev.for_each_leaf(&w, &mut |leaf| {
            let idxs = code
                .decoders
                .iter()
                .map(|d| {
                    let hc = layout.out_sizes[d.dest].pow(layout.n as u32);
                    w[d.dest] * hc + leaf.hist[d.dest]
                })
                .collect();
            v.push((idxs, leaf.prob));
        });
        leaves.push(v);
        msgs.push(w);
    }
    drop(ev);
    let mut radices = Vec::new();
    let mut owner = Vec::new();
    for (k, &(src, dest)) in layout.flows.iter().enumerate() {
        let len = layout.decoder_len(dest)?;
        radices.extend(std::iter::repeat_n(layout.message_sizes[src], len));
        owner.extend((0..len).map(|idx| (k, idx)));
    }
    let mut digits = vec![0usize; radices.len()];
    let mut evaluated = 0u128;
    loop {
        for (pos, &(k, idx)) in owner.iter().enumerate() {
            code.decoders[k].table[idx] = digits[pos];
        }
        let mut success = 0.0;
        for (w, v) in msgs.iter().zip(&leaves) {
            for (idxs, p) in v {
                if code.decoders.iter().zip(idxs).all(|(d, &ix)| d.table[ix] == w[d.source]) {
                    success += p;
                }
            }
        }
        let e = (1.0 - success / count as f64).clamp(0.0, 1.0);
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            *best = Some((e, code.clone()));
        }
        if !odometer(&mut digits, radices.iter().copied()) {
            break;
        }
    }
    Ok(evaluated)
}

fn random_search(
    net: &Network,
    layout: &CodeLayout,
    slots: &[(usize, usize, usize, usize)],
    restarts: usize,
    sweeps: usize,
    seed: u64,
) -> Result<SearchResult> {
    if restarts == 0 {
        return Err(Error::Precondition("need at least one restart".into()));
    }
    let mut best: Option<(f64, Code)> = None;
    let mut evaluated = 0u128;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let mut code = layout.zero_code()?;
        for &(i, t, idx, a) in slots {
            code.encoders[i][t][idx] = rng.random_range(0..a);
        }
        let mut cur = map_decoders(net, &mut code)?;
        evaluated += 1;
        for _ in 0..sweeps {
            let mut improved = false;
            for &(i, t, idx, a) in slots {
                let keep = code.encoders[i][t][idx];
                let mut best_sym = keep;
                for s in 0..a {
                    if s == keep {
                        continue;
                    }
                    code.encoders[i][t][idx] = s;
                    let mut trial = code.clone();
                    let e = map_decoders(net, &mut trial)?;
                    evaluated += 1;
                    if e < cur - 1e-15 {
                        cur = e;
                        best_sym = s;
                        improved = true;
                    }
                }
                code.encoders[i][t][idx] = best_sym;
            }
            if !improved {
                break;
            }
        }
        map_decoders(net, &mut code)?;
        let e = exact_error_probability(net, &code)?.error_prob;
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, code));
        }
    }
    let (error_prob, code) = best.expect("at least one restart");
    Ok(SearchResult { code, error_prob, exhaustive: false, evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;

    #[test]
    fn noiseless_sizes() {
        let net = Network::point_to_point(&Channel::noiseless(2));
        let b = SearchBudget::Exhaustive { cap: 1 << 20 };
        assert_eq!(search_best_code(&net, 1, &[2, 1], &b, 0).unwrap().error_prob, 0.0);
        let r = search_best_code(&net, 1, &[3, 1], &b, 0).unwrap();
        assert!((r.error_prob - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(exact_error_probability(&net, &r.code).unwrap().error_prob, r.error_prob);
    }

    #[test]
    fn random_mode_finds_repetition() {
        let net = Network::point_to_point(&Channel::bsc(0.1));
        let r = search_best_code(&net, 3, &[2, 1], &SearchBudget::Random { restarts: 4, sweeps: 4 }, 9).unwrap();
        assert!((r.error_prob - 0.028).abs() < 1e-12);
        let again = search_best_code(&net, 3, &[2, 1], &SearchBudget::Random { restarts: 4, sweeps: 4 }, 9).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn refuses_over_cap() {
        let net = Network::point_to_point(&Channel::bsc(0.1));
        assert!(matches!(
            search_best_code(&net, 4, &[4, 1], &SearchBudget::Exhaustive { cap: 100 }, 0),
            Err(Error::CapExceeded { .. })
        ));
    }
}
