//! Information measures on finite alphabets, in bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Channel, Distribution, JointDistribution};

/// `log2(e)`.
pub const LOG2_E: f64 = std::f64::consts::LOG2_E;

fn same_len(what: &'static str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { what, expected: a, found: b });
    }
    Ok(())
}

/// `-p log p` with the `0 log 0 = 0` convention.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plogp(p)).sum()
}

pub fn entropy(p: &Distribution) -> f64 {
    entropy_of(p.probs())
}

pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// KL divergence on raw slices; `+inf` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_of(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).log2();
        }
    }
    s.max(0.0)
}

pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_len("distribution", p.len(), q.len())?;
    Ok(kl_of(p.probs(), q.probs()))
}

/// `sum_x r(x) D(P(.|x) || Q(.|x))`.
pub fn conditional_kl(p: &Channel, q: &Channel, r: &Distribution) -> Result<f64> {
    same_len("channel inputs", p.inputs(), q.inputs())?;
    same_len("channel outputs", p.outputs(), q.outputs())?;
    same_len("input distribution", p.inputs(), r.len())?;
    let mut s = 0.0;
    for (x, &rx) in r.probs().iter().enumerate() {
        if rx > 0.0 {
            s += rx * kl_of(p.row(x).probs(), q.row(x).probs());
        }
    }
    Ok(s)
}

pub fn tv_of(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_len("distribution", p.len(), q.len())?;
    Ok(tv_of(p.probs(), q.probs()).min(1.0))
}

/// `I(X;Y)` of a joint pmf.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    let px = j.marginal_x();
    let py = j.marginal_y();
    let mut s = 0.0;
    for x in 0..j.rows() {
        for y in 0..j.cols() {
            let q = j.get(x, y);
            if q > 0.0 {
                s += q * (q / (px.get(x) * py.get(y))).log2();
            }
        }
    }
    s.max(0.0)
}

pub fn hamming_distance(x: &[usize], y: &[usize]) -> Result<usize> {
    same_len("sequence", x.len(), y.len())?;
    Ok(x.iter().zip(y).filter(|(a, b)| a != b).count())
}

/// Lower bound on `P(X > tau)` for `X` in `[0, x_max]` with the given mean.
pub fn reverse_markov_bound(mean: f64, x_max: f64, tau: f64) -> Result<f64> {
    if tau > mean {
        return Err(Error::Precondition(format!("tau {tau} exceeds mean {mean}")));
    }
    if tau >= x_max {
        return Err(Error::Precondition(format!("tau {tau} is not below x_max {x_max}")));
    }
    Ok(((mean - tau) / (x_max - tau)).clamp(0.0, 1.0))
}

/// Sequences of a fixed length over `{0, .., base_size-1}`, ranked with the
/// first symbol most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceAlphabet {
    pub base_size: usize,
    pub length: usize,
}

impl SequenceAlphabet {
    pub fn new(base_size: usize, length: usize) -> Result<Self> {
        if base_size == 0 || length == 0 {
            return Err(Error::Precondition("sequence alphabet needs base_size >= 1 and length >= 1".into()));
        }
        Ok(Self { base_size, length })
    }

    pub fn count(&self) -> Option<usize> {
        crate::model::checked_pow(self.base_size, self.length)
    }

    pub fn rank(&self, seq: &[usize]) -> Result<usize> {
        same_len("sequence", self.length, seq.len())?;
        let mut r = 0usize;
        for &s in seq {
            if s >= self.base_size {
                return Err(Error::OutOfRange { what: "symbol", value: s as f64, lo: 0.0, hi: (self.base_size - 1) as f64 });
            }
            r = r
                .checked_mul(self.base_size)
                .and_then(|r| r.checked_add(s))
                .ok_or_else(|| Error::Precondition("sequence rank overflows".into()))?;
        }
        Ok(r)
    }

    pub fn unrank(&self, mut r: usize) -> Vec<usize> {
        let mut out = vec![0; self.length];
        for o in out.iter_mut().rev() {
            *o = r % self.base_size;
            r /= self.base_size;
        }
        out
    }

    /// Symbol at position `t` of the sequence with rank `r`.
    pub fn symbol(&self, r: usize, t: usize) -> usize {
        let mut r = r;
        for _ in 0..(self.length - 1 - t) {
            r /= self.base_size;
        }
        r % self.base_size
    }
}

/// A pmf over several finite variables, stored row-major with the first
/// variable most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let size = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Error::Precondition("joint table too large".into()))?;
        if dims.iter().any(|&d| d == 0) || size != probs.len() {
            return Err(Error::DimensionMismatch { what: "joint table", expected: size, found: probs.len() });
        }
        crate::model::check_stochastic("joint table", 0, &probs, 1e-9)?;
        Ok(Self { dims, probs })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (o, &d) in out.iter_mut().zip(&self.dims).rev() {
            *o = idx % d;
            idx /= d;
        }
        out
    }

    /// Marginal over `vars` (in the given order).
    pub fn marginal(&self, vars: &[usize]) -> Result<JointTable> {
        for &v in vars {
            if v >= self.dims.len() {
                return Err(Error::OutOfRange { what: "variable", value: v as f64, lo: 0.0, hi: (self.dims.len() - 1) as f64 });
            }
        }
        let sub_dims: Vec<usize> = vars.iter().map(|&v| self.dims[v]).collect();
        let size: usize = sub_dims.iter().product();
        let mut out = vec![0.0; size];
        let mut digits = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            if p != 0.0 {
                let mut r = 0;
                for &v in vars {
                    r = r * self.dims[v] + digits[v];
                }
                out[r] += p;
            }
            increment(&mut digits, &self.dims);
        }
        Ok(JointTable { dims: sub_dims, probs: out })
    }

    /// Joint entropy of `vars`.
    pub fn entropy(&self, vars: &[usize]) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of(&self.marginal(vars)?.probs))
    }

    /// `I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)`, clamped at 0.
    pub fn conditional_mi(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let cat = |xs: &[&[usize]]| xs.concat();
        let v = self.entropy(&cat(&[a, c]))? + self.entropy(&cat(&[b, c]))?
            - self.entropy(&cat(&[a, b, c]))?
            - self.entropy(c)?;
        Ok(v.max(0.0))
    }
}

/// Advances a mixed-radix counter (last digit fastest).
pub(crate) fn increment(digits: &mut [usize], dims: &[usize]) {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < dims[i] {
            return;
        }
        digits[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn kl_cases() {
        assert_eq!(kl_divergence(&dist(&[0.5, 0.5]), &dist(&[0.5, 0.5])).unwrap(), 0.0);
        assert!((kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert!(kl_divergence(&dist(&[1.0]), &dist(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn conditional_kl_cases() {
        let p = Channel::noiseless(2);
        let q = Channel::completely_noisy(2, 2);
        let r = Distribution::uniform(2);
        assert!((conditional_kl(&p, &q, &r).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(conditional_kl(&p, &p, &r).unwrap(), 0.0);
        let bsc = Channel::bsc(0.2);
        let pm = Distribution::point_mass(2, 1);
        let direct = kl_divergence(bsc.row(1), q.row(1)).unwrap();
        assert!((conditional_kl(&bsc, &q, &pm).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn tv_cases() {
        assert!((tv_distance(&dist(&[0.7, 0.3]), &dist(&[0.4, 0.6])).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(tv_distance(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn mi_cases() {
        let u = Distribution::uniform(2);
        assert!(mutual_information(&JointDistribution::independent(&u, &dist(&[0.3, 0.7]))).abs() < 1e-15);
        let j = JointDistribution::product(&u, &Channel::noiseless(2)).unwrap();
        assert!((mutual_information(&j) - 1.0).abs() < 1e-15);
        let j = JointDistribution::product(&u, &Channel::bsc(0.11)).unwrap();
        assert!((mutual_information(&j) - 0.500084041835472).abs() < 1e-12);
    }

    #[test]
    fn hamming_and_markov() {
        assert_eq!(hamming_distance(&[0, 0, 0], &[1, 1, 1]).unwrap(), 3);
        assert_eq!(hamming_distance(&[0, 1, 0, 1], &[0, 1, 1, 1]).unwrap(), 1);
        assert!(hamming_distance(&[0], &[0, 1]).is_err());
        assert!((reverse_markov_bound(0.5, 1.0, 0.25).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(reverse_markov_bound(1.0, 1.0, 0.2).unwrap(), 1.0);
        assert_eq!(reverse_markov_bound(0.3, 1.0, 0.3).unwrap(), 0.0);
        assert!(reverse_markov_bound(0.3, 1.0, 0.4).is_err());
        assert!(reverse_markov_bound(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn joint_table_mi() {
        // X uniform, Y = X, Z independent uniform
        let mut probs = vec![0.0; 8];
        for x in 0..2 {
            for z in 0..2 {
                probs[x * 4 + x * 2 + z] = 0.25;
            }
        }
        let t = JointTable::new(vec![2, 2, 2], probs).unwrap();
        assert!((t.conditional_mi(&[0], &[1], &[]).unwrap() - 1.0).abs() < 1e-12);
        assert!(t.conditional_mi(&[0], &[1], &[0]).unwrap().abs() < 1e-12);
        assert!(t.conditional_mi(&[0], &[2], &[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sequence_rank() {
        let a = SequenceAlphabet::new(3, 4).unwrap();
        assert_eq!(a.count(), Some(81));
        for r in 0..81 {
            let s = a.unrank(r);
            assert_eq!(a.rank(&s).unwrap(), r);
            for t in 0..4 {
                assert_eq!(a.symbol(r, t), s[t]);
            }
        }
    }

    fn pmf(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, len).prop_filter_map("zero mass", |w| {
            let s: f64 = w.iter().sum();
            (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn pinsker(p in pmf(4), q in pmf(4)) {
            let kl = kl_of(&p, &q);
            let tv = tv_of(&p, &q);
            prop_assert!(tv <= (kl / (2.0 * LOG2_E)).sqrt() + 1e-12);
        }

        #[test]
        fn kl_nonnegative(p in pmf(5), q in pmf(5)) {
            prop_assert!(kl_of(&p, &q) >= 0.0);
            prop_assert!(kl_of(&p, &p).abs() < 1e-12);
        }

        #[test]
        fn mi_relabel_invariant(w in pmf(6), perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
            let j = JointDistribution::new(2, 3, w.clone()).unwrap();
            let mut t = vec![0.0; 6];
            for x in 0..2 {
                for y in 0..3 {
                    t[(1 - x) * 3 + perm[y]] = w[x * 3 + y];
                }
            }
            let k = JointDistribution::new(2, 3, t).unwrap();
            prop_assert!((mutual_information(&j) - mutual_information(&k)).abs() < 1e-12);
        }

        #[test]
        fn reverse_markov_holds(w in pmf(5), frac in 0.0f64..1.0) {
            // X takes values 0, 0.25, .., 1 with pmf w
            let mean: f64 = w.iter().enumerate().map(|(i, p)| p * i as f64 / 4.0).sum();
            let tau = frac * mean;
            prop_assume!(tau < 1.0);
            let tail: f64 = w.iter().enumerate().filter(|(i, _)| *i as f64 / 4.0 > tau).map(|(_, p)| p).sum();
            prop_assert!(tail + 1e-12 >= reverse_markov_bound(mean, 1.0, tau).unwrap());
        }
    }
}
