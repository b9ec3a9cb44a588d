//! Brute-force minimum error for point-to-point block codes, written without
//! the evaluator or the search machinery so it can check them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Channel;

/// Largest `codebooks * decoders` this enumerator accepts.
pub const BRUTE_FORCE_CAP: u128 = 1 << 24;

/// Minimum average error over every codebook `[M] -> X^n` and every
/// decoder `Y^n -> [M]`, with the first codebook and decoder found on ties.
/// Returns `(error, codebook, decoder)`.
pub fn brute_force_point_to_point(ch: &Channel, n: usize, m: usize) -> Result<(f64, Vec<Vec<usize>>, Vec<usize>)> {
    let (nx, ny) = (ch.inputs(), ch.outputs());
    if m == 0 || n == 0 {
        return Err(Error::Precondition("need n >= 1 and M >= 1".into()));
    }
    let seqs_x = (nx as u128).pow(n as u32);
    let seqs_y = (ny as u128).pow(n as u32);
    let codebooks = seqs_x.pow(m as u32);
    let decoders = (m as u128).checked_pow(seqs_y as u32).unwrap_or(u128::MAX);
    let total = codebooks.saturating_mul(decoders);
    if total > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded { needed: total, cap: BRUTE_FORCE_CAP });
    }
    let (seqs_x, seqs_y) = (seqs_x as usize, seqs_y as usize);
    // likelihood[xs][ys] = prod_t W(y_t | x_t), sequences ranked first symbol most significant
    let digits = |mut r: usize, base: usize| {
        let mut d = vec![0; n];
        for t in (0..n).rev() {
            d[t] = r % base;
            r /= base;
        }
        d
    };
    let likelihood: Vec<Vec<f64>> = (0..seqs_x)
        .map(|xs| {
            let x = digits(xs, nx);
            (0..seqs_y)
                .map(|ys| {
                    let y = digits(ys, ny);
                    (0..n).map(|t| ch.prob(x[t], y[t])).product()
                })
                .collect()
        })
        .collect();
    let mut best: Option<(f64, usize, usize)> = None;
    for cb in 0..codebooks as usize {
        let words = digits_of(cb, seqs_x, m);
        for dec in 0..decoders as usize {
            let psi = digits_of(dec, m, seqs_y);
            let mut success = 0.0;
            for (w, &xs) in words.iter().enumerate() {
                for (ys, &hat) in psi.iter().enumerate() {
                    if hat == w {
                        success += likelihood[xs][ys];
                    }
                }
            }
            let err = 1.0 - success / m as f64;
            if best.is_none_or(|(b, _, _)| err < b) {
                best = Some((err, cb, dec));
            }
        }
    }
    let (err, cb, dec) = best.expect("nonempty family");
    let codebook = digits_of(cb, seqs_x, m).into_iter().map(|xs| digits(xs, nx)).collect();
    Ok((err, codebook, digits_of(dec, m, seqs_y)))
}

/// Channel whose entries are multiples of 1/8, so every code's error is a
/// dyadic rational and both enumerators add it up without rounding.
pub fn random_dyadic_channel<R: Rng + ?Sized>(rng: &mut R, inputs: usize, outputs: usize) -> Channel {
    let rows = (0..inputs)
        .map(|_| {
            let mut eighths = vec![0u32; outputs];
            for _ in 0..8 {
                eighths[rng.random_range(0..outputs)] += 1;
            }
            eighths.into_iter().map(|e| e as f64 / 8.0).collect()
        })
        .collect();
    Channel::new(rows).expect("rows sum to one")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub channel: Channel,
    pub n: usize,
    pub messages: usize,
}

/// `(|X|, |Y|, n, M)` shapes small enough for full enumeration.
const SHAPES: [(usize, usize, usize, usize); 10] = [
    (2, 2, 1, 2),
    (2, 2, 2, 2),
    (3, 2, 1, 2),
    (2, 3, 1, 2),
    (2, 2, 1, 4),
    (3, 3, 1, 2),
    (2, 3, 2, 2),
    (3, 2, 2, 2),
    (2, 2, 2, 4),
    (3, 3, 1, 4),
];

/// Seeded tiny point-to-point instances with dyadic channels.
pub fn oracle_instances(seed: u64, count: usize) -> Vec<OracleInstance> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let (nx, ny, n, m) = SHAPES[rng.random_range(0..SHAPES.len())];
            OracleInstance { channel: random_dyadic_channel(&mut rng, nx, ny), n, messages: m }
        })
        .collect()
}

fn digits_of(mut r: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for k in (0..len).rev() {
        d[k] = r % base;
        r /= base;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_three_messages() {
        let (e, _, _) = brute_force_point_to_point(&Channel::noiseless(2), 1, 3).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn repetition_is_optimal_for_two_messages() {
        let (e, cb, _) = brute_force_point_to_point(&Channel::bsc(0.125), 3, 2).unwrap();
        // P(at least 2 of 3 flips) = 3 (1/8)^2 (7/8) + (1/8)^3 = 22/512
        assert_eq!(e, 22.0 / 512.0);
        assert_ne!(cb[0], cb[1]);
    }
}
