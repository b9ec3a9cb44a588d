//! Outer (N, N-2) MDS code over repeated inner-code blocks.
//!
//! Parity checks are `sum c_j = 0` and `sum a_j c_j = 0` with distinct
//! evaluation points `a_j = j`, so any two columns are independent and the
//! minimum distance is 3. The last two positions hold parity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gf::GaloisField;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MdsCode {
    field: GaloisField,
    len: usize,
}

impl MdsCode {
    pub fn new(len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::Precondition(format!("need N >= 3, got {len}")));
        }
        if len > 1 << 16 {
            return Err(Error::Precondition(format!("no MDS code of length {len} in the supported fields")));
        }
        Ok(Self { field: GaloisField::with_at_least(len)?, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn data_len(&self) -> usize {
        self.len - 2
    }

    pub fn field_order(&self) -> usize {
        self.field.order()
    }

    fn syndromes(&self, word: &[u16]) -> (u16, u16) {
        let f = &self.field;
        word.iter().enumerate().fold((0, 0), |(s0, s1), (j, &c)| (s0 ^ c, s1 ^ f.mul(j as u16, c)))
    }

    pub fn encode(&self, data: &[u16]) -> Result<Vec<u16>> {
        if data.len() != self.data_len() {
            return Err(Error::DimensionMismatch { what: "MDS data", expected: self.data_len(), found: data.len() });
        }
        if data.iter().any(|&s| s as usize >= self.field.order()) {
            return Err(Error::Precondition("data symbol outside the field".into()));
        }
        let f = &self.field;
        let mut word = data.to_vec();
        word.extend([0, 0]);
        let (s0, s1) = self.syndromes(&word);
        let (a, b) = ((self.len - 2) as u16, (self.len - 1) as u16);
        // c_a + c_b = s0, a c_a + b c_b = s1
        let cb = f.div(f.add(s1, f.mul(a, s0)), f.add(a, b))?;
        let ca = f.add(s0, cb);
        word[self.len - 2] = ca;
        word[self.len - 1] = cb;
        Ok(word)
    }

    /// Corrects up to one symbol error. `None` when the syndrome matches no single error.
    pub fn decode(&self, received: &[u16]) -> Option<Vec<u16>> {
        let (s0, s1) = self.syndromes(received);
        if s0 == 0 && s1 == 0 {
            return Some(received.to_vec());
        }
        if s0 == 0 {
            return None;
        }
        let pos = self.field.div(s1, s0).ok()? as usize;
        if pos >= self.len {
            return None;
        }
        let mut out = received.to_vec();
        out[pos] ^= s0;
        Some(out)
    }
}

/// `1 - (1 - eps)^N - N eps (1 - eps)^{N-1}`.
pub fn mds_formula(eps: f64, n: usize) -> f64 {
    let q = 1.0 - eps;
    (1.0 - q.powi(n as i32) - n as f64 * eps * q.powi(n as i32 - 1)).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsReport {
    pub n: usize,
    pub eps: f64,
    pub field_order: usize,
    pub trials: u64,
    pub formula_error: f64,
    /// Decoded codeword differs from the one sent.
    pub empirical_error: f64,
    /// Decoded data symbols differ from the data sent.
    pub data_error: f64,
    /// One binomial standard deviation at the formula value.
    pub sigma: f64,
    pub within_3_sigma: bool,
}

const MDS_BLOCK: u64 = 4096;

pub fn mds_pipeline(eps: f64, n: usize, trials: u64, seed: u64) -> Result<MdsReport> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange { what: "inner error", value: eps, lo: 0.0, hi: 1.0 });
    }
    if trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let code = MdsCode::new(n)?;
    let q = code.field_order() as u16;
    let blocks = trials.div_ceil(MDS_BLOCK);
    let (word_err, data_err) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MDS_BLOCK.min(trials - b * MDS_BLOCK);
            let (mut we, mut de) = (0u64, 0u64);
            for _ in 0..count {
                let data: Vec<u16> = (0..code.data_len()).map(|_| rng.random_range(0..q)).collect();
                let sent = code.encode(&data).expect("valid data");
                let mut recv = sent.clone();
                for s in recv.iter_mut() {
                    if rng.random::<f64>() < eps {
                        *s ^= rng.random_range(1..q);
                    }
                }
                match code.decode(&recv) {
                    Some(w) => {
                        we += (w != sent) as u64;
                        de += (w[..code.data_len()] != data[..]) as u64;
                    }
                    None => {
                        we += 1;
                        de += 1;
                    }
                }
            }
            (we, de)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let formula_error = mds_formula(eps, n);
    let t = trials as f64;
    let empirical_error = word_err as f64 / t;
    let sigma = (formula_error * (1.0 - formula_error) / t).sqrt();
    Ok(MdsReport {
        n,
        eps,
        field_order: code.field_order(),
        trials,
        formula_error,
        empirical_error,
        data_error: data_err as f64 / t,
        sigma,
        within_3_sigma: (empirical_error - formula_error).abs() <= 3.0 * sigma + 1e-15,
    })
}
