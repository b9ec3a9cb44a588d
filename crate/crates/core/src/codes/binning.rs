//! Deterministic message coordination by random binning.
//!
//! Each message set `W_i` (of size `2^{b_i}`) is split uniformly at random into
//! cells of `2^k` messages. For a vector of cell indices `w~`, the product cell
//! `P(w~)` should meet the good set `Gamma` with high probability; this module
//! estimates `q(w~) = P(Gamma ∩ P(w~) = ∅)` over partition draws.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `k = ceil(d + log2 ln(4d/eps_tilde) - log2(1 - eps))`.
pub fn binning_k(d: usize, eps: f64, eps_tilde: f64) -> Result<u32> {
    check_params(d, eps, eps_tilde)?;
    let v = d as f64 + (4.0 * d as f64 / eps_tilde).ln().log2() - (1.0 - eps).log2();
    Ok(v.ceil().max(1.0) as u32)
}

/// `eta = 3d(d+1) + 3d log2 ln(4d/eps_tilde)`.
pub fn binning_eta(d: usize, eps_tilde: f64) -> Result<f64> {
    check_params(d, 0.0, eps_tilde)?;
    let d_ = d as f64;
    Ok(3.0 * d_ * (d_ + 1.0) + 3.0 * d_ * (4.0 * d_ / eps_tilde).ln().log2())
}

fn check_params(d: usize, eps: f64, eps_tilde: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::Precondition("need at least one node".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::OutOfRange { what: "epsilon", value: eps, lo: 0.0, hi: 1.0 });
    }
    if !(eps_tilde > 0.0 && eps_tilde < 1.0) {
        return Err(Error::OutOfRange { what: "epsilon tilde", value: eps_tilde, lo: 0.0, hi: 1.0 });
    }
    Ok(())
}

/// `(1 - 2^{-k})^{-2^k}`, which stays below 4 for every `k >= 1`.
pub fn binning_feasibility_factor(k: u32) -> f64 {
    let m = (k as f64).exp2();
    (-m * (-(1.0 / m)).ln_1p()).exp()
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Pseudorandom subset of the message vectors with density `density`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGamma {
    pub density: f64,
    pub seed: u64,
}

impl SyntheticGamma {
    pub fn contains(&self, rank: u64) -> bool {
        if self.density >= 1.0 {
            return true;
        }
        let h = splitmix(splitmix(self.seed) ^ rank);
        ((h >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < self.density
    }
}

/// Random equal-size partition; each cell lists its members in increasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub cell_size: usize,
    pub cells: Vec<Vec<u64>>,
}

impl Partition {
    pub fn random<R: Rng + ?Sized>(set_size: usize, cell_size: usize, rng: &mut R) -> Self {
        let mut perm: Vec<u64> = (0..set_size as u64).collect();
        perm.shuffle(rng);
        let cells = perm
            .chunks(cell_size)
            .map(|c| {
                let mut c = c.to_vec();
                c.sort_unstable();
                c
            })
            .collect();
        Self { cell_size, cells }
    }
}

/// Lowest-rank member of `Gamma ∩ P(w~)`, scanning the product cell in
/// lexicographic order of its coordinates.
pub fn coordinate(partitions: &[Partition], bits: &[u32], w_tilde: &[usize], gamma: &SyntheticGamma) -> Option<Vec<u64>> {
    let cells: Vec<&Vec<u64>> = partitions.iter().zip(w_tilde).map(|(p, &c)| &p.cells[c]).collect();
    let mut idx = vec![0usize; cells.len()];
    loop {
        let w: Vec<u64> = cells.iter().zip(&idx).map(|(c, &j)| c[j]).collect();
        let mut rank = 0u64;
        for (&wi, &b) in w.iter().zip(bits) {
            rank = (rank << b) | wi;
        }
        if gamma.contains(rank) {
            return Some(w);
        }
        let mut k = cells.len();
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < cells[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinningConfig {
    pub d: usize,
    pub eps: f64,
    pub eps_tilde: f64,
    /// `n R_i` per node, so `|W_i| = 2^{bits_i}`.
    pub message_bits: Vec<u32>,
    pub trials: usize,
    /// Number of cell-index vectors `w~` checked.
    pub checks: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub w_tilde: Vec<usize>,
    pub empty: usize,
    pub q_hat: f64,
    /// `3 sqrt(q (1 - q) / T)` with `q = max(q_hat, 1/T)`.
    pub ci: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinningReport {
    pub k: u32,
    pub eta: f64,
    pub trials: usize,
    pub estimates: Vec<QEstimate>,
    pub holds: bool,
    /// Bits spent by node `a` on the cell choice, `d k`.
    pub coordination_bits: u64,
}

pub fn binning_coordination(cfg: &BinningConfig) -> Result<BinningReport> {
    let k = binning_k(cfg.d, cfg.eps, cfg.eps_tilde)?;
    let eta = binning_eta(cfg.d, cfg.eps_tilde)?;
    if cfg.message_bits.len() != cfg.d {
        return Err(Error::DimensionMismatch { what: "message bits", expected: cfg.d, found: cfg.message_bits.len() });
    }
    if cfg.trials == 0 || cfg.checks == 0 {
        return Err(Error::Precondition("need at least one trial and one check".into()));
    }
    for &b in &cfg.message_bits {
        if b < 2 * k {
            return Err(Error::Precondition(format!("n R_i = {b} is below 2k = {}", 2 * k)));
        }
        if b > 24 {
            return Err(Error::CapExceeded { needed: 1u128 << b, cap: 1 << 24 });
        }
    }
    if cfg.message_bits.iter().sum::<u32>() > 63 {
        return Err(Error::Precondition("message vector ranks must fit in 64 bits".into()));
    }
    let gamma = SyntheticGamma { density: 1.0 - cfg.eps, seed: cfg.seed };
    let cells_per: Vec<usize> = cfg.message_bits.iter().map(|&b| 1usize << (b - k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let w_tildes: Vec<Vec<usize>> = (0..cfg.checks).map(|_| cells_per.iter().map(|&c| rng.random_range(0..c)).collect()).collect();
    let mut empty = vec![0usize; cfg.checks];
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial as u64 + 2);
        let parts: Vec<Partition> = cfg.message_bits.iter().map(|&b| Partition::random(1 << b, 1 << k, &mut rng)).collect();
        for (c, wt) in w_tildes.iter().enumerate() {
            if coordinate(&parts, &cfg.message_bits, wt, &gamma).is_none() {
                empty[c] += 1;
            }
        }
    }
    let t = cfg.trials as f64;
    let estimates: Vec<QEstimate> = w_tildes
        .into_iter()
        .zip(empty)
        .map(|(w_tilde, e)| {
            let q_hat = e as f64 / t;
            let q = q_hat.max(1.0 / t);
            let ci = 3.0 * (q * (1.0 - q) / t).sqrt();
            QEstimate { w_tilde, empty: e, q_hat, ci, holds: q_hat <= cfg.eps_tilde + ci }
        })
        .collect();
    let holds = estimates.iter().all(|e| e.holds);
    Ok(BinningReport { k, eta, trials: cfg.trials, estimates, holds, coordination_bits: cfg.d as u64 * k as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(binning_k(2, 0.5, 0.1).unwrap(), 6);
        assert!((binning_eta(2, 0.1).unwrap() - 30.789589519745824).abs() < 1e-9);
    }

    #[test]
    fn feasibility_factor_below_four() {
        for k in 1..=30 {
            let f = binning_feasibility_factor(k);
            assert!(f <= 4.0 && f > 2.0, "k={k} factor={f}");
        }
        assert!((binning_feasibility_factor(1) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn everything_good_means_never_empty() {
        let cfg = BinningConfig { d: 2, eps: 0.0, eps_tilde: 0.1, message_bits: vec![10, 10], trials: 50, checks: 3, seed: 4 };
        let r = binning_coordination(&cfg).unwrap();
        assert!(r.estimates.iter().all(|e| e.q_hat == 0.0));
    }

    #[test]
    fn refuses_small_messages() {
        let cfg = BinningConfig { d: 2, eps: 0.5, eps_tilde: 0.1, message_bits: vec![11, 12], trials: 5, checks: 1, seed: 0 };
        assert!(binning_coordination(&cfg).is_err());
    }

    #[test]
    fn gamma_density() {
        let g = SyntheticGamma { density: 0.5, seed: 11 };
        let hits = (0..100_000u64).filter(|&r| g.contains(r)).count();
        assert!((hits as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn coordinate_picks_lowest_member() {
        let parts = vec![
            Partition { cell_size: 2, cells: vec![vec![1, 3], vec![0, 2]] },
            Partition { cell_size: 2, cells: vec![vec![0, 1], vec![2, 3]] },
        ];
        let all = SyntheticGamma { density: 1.0, seed: 0 };
        assert_eq!(coordinate(&parts, &[2, 2], &[0, 1], &all), Some(vec![1, 2]));
        let none = SyntheticGamma { density: 0.0, seed: 0 };
        assert_eq!(coordinate(&parts, &[2, 2], &[0, 1], &none), None);
    }
}
