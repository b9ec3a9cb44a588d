//! Causal blowing-up couplings.
//!
//! Given a source `X^n` and a set `A` with `P(A) > 0`, [`causal_blowup_coupling`]
//! builds kernels `K_t(z | y, z^{t-1})` such that, when `Y_t` is drawn from
//! `P_{X_t|X^{t-1}}(. | z^{t-1})` and `Z_t` from `K_t`, the sequence `Z^n`
//! follows `X^n` conditioned on `A`. Each kernel is the conditional of the
//! maximal coupling between the source and tilted step laws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{tv_of, LOG2_E};
use crate::model::{checked_pow, Distribution, JointDistribution};

/// Default enumeration cap on `base^n`.
pub const DEFAULT_SEQUENCE_CAP: usize = 1 << 20;

/// A finite-alphabet source with memory, `kernels[t][prefix * base + x]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovSource {
    pub n: usize,
    pub base: usize,
    pub kernels: Vec<Vec<f64>>,
}

fn space_size(base: usize, n: usize) -> Result<usize> {
    let size = checked_pow(base, n).ok_or(Error::CapExceeded { needed: u128::MAX, cap: DEFAULT_SEQUENCE_CAP as u128 })?;
    if size > DEFAULT_SEQUENCE_CAP {
        return Err(Error::CapExceeded { needed: size as u128, cap: DEFAULT_SEQUENCE_CAP as u128 });
    }
    Ok(size)
}

impl MarkovSource {
    pub fn new(n: usize, base: usize, kernels: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || base == 0 {
            return Err(Error::Precondition("source needs n >= 1 and base >= 1".into()));
        }
        space_size(base, n)?;
        if kernels.len() != n {
            return Err(Error::DimensionMismatch { what: "kernels", expected: n, found: kernels.len() });
        }
        let mut prefixes = 1;
        for (t, k) in kernels.iter().enumerate() {
            if k.len() != prefixes * base {
                return Err(Error::DimensionMismatch { what: "kernel", expected: prefixes * base, found: k.len() });
            }
            for (p, row) in k.chunks(base).enumerate() {
                crate::model::check_stochastic("source kernel row", t * prefixes + p, row, 1e-9)?;
            }
            prefixes *= base;
        }
        Ok(Self { n, base, kernels })
    }

    pub fn iid(p: &Distribution, n: usize) -> Result<Self> {
        let base = p.len();
        space_size(base, n)?;
        let mut kernels = Vec::with_capacity(n);
        let mut prefixes = 1;
        for _ in 0..n {
            kernels.push(p.probs().repeat(prefixes));
            prefixes *= base;
        }
        Self::new(n, base, kernels)
    }

    /// First-order chain with `transition[prev][next]`.
    pub fn markov(initial: &Distribution, transition: &[Vec<f64>], n: usize) -> Result<Self> {
        let base = initial.len();
        if transition.len() != base || transition.iter().any(|r| r.len() != base) {
            return Err(Error::DimensionMismatch { what: "transition matrix", expected: base, found: transition.len() });
        }
        space_size(base, n)?;
        let mut kernels = vec![initial.probs().to_vec()];
        let mut prefixes = base;
        for _ in 1..n {
            let mut k = Vec::with_capacity(prefixes * base);
            for prefix in 0..prefixes {
                k.extend_from_slice(&transition[prefix % base]);
            }
            kernels.push(k);
            prefixes *= base;
        }
        Self::new(n, base, kernels)
    }

    /// Factorises a pmf on sequences into per-step kernels. Prefixes of zero
    /// mass get `fallback`'s kernel when given, else the uniform one.
    pub fn from_sequence_pmf(base: usize, n: usize, pmf: &[f64], fallback: Option<&MarkovSource>) -> Result<Self> {
        let size = space_size(base, n)?;
        if pmf.len() != size {
            return Err(Error::DimensionMismatch { what: "sequence pmf", expected: size, found: pmf.len() });
        }
        // prefix masses, level by level from the full sequences up
        let mut levels = vec![pmf.to_vec()];
        for _ in 0..n {
            let last = levels.last().unwrap();
            let up: Vec<f64> = last.chunks(base).map(|c| c.iter().sum()).collect();
            levels.push(up);
        }
        levels.reverse(); // levels[t] = masses of prefixes of length t
        let mut kernels = Vec::with_capacity(n);
        for t in 0..n {
            let parent = &levels[t];
            let child = &levels[t + 1];
            let mut k = vec![0.0; child.len()];
            for (p, &m) in parent.iter().enumerate() {
                let row = &mut k[p * base..(p + 1) * base];
                if m > 0.0 {
                    for (x, r) in row.iter_mut().enumerate() {
                        *r = child[p * base + x] / m;
                    }
                } else if let Some(f) = fallback {
                    row.copy_from_slice(&f.kernels[t][p * base..(p + 1) * base]);
                } else {
                    row.iter_mut().for_each(|r| *r = 1.0 / base as f64);
                }
            }
            kernels.push(k);
        }
        Self::new(n, base, kernels)
    }

    pub fn sequence_count(&self) -> usize {
        checked_pow(self.base, self.n).expect("checked at construction")
    }

    /// Probability of every sequence, indexed by rank.
    pub fn sequence_pmf(&self) -> Vec<f64> {
        let mut level = vec![1.0];
        for k in &self.kernels {
            let mut next = Vec::with_capacity(level.len() * self.base);
            for (p, &m) in level.iter().enumerate() {
                for x in 0..self.base {
                    next.push(m * k[p * self.base + x]);
                }
            }
            level = next;
        }
        level
    }

    /// `P(X_t = . | X^{t-1} = prefix)`, `t` 0-based.
    pub fn step(&self, t: usize, prefix: usize) -> &[f64] {
        &self.kernels[t][prefix * self.base..(prefix + 1) * self.base]
    }

    pub fn probability(&self, set: &EventSet) -> Result<f64> {
        self.check_set(set)?;
        Ok(self.sequence_pmf().iter().enumerate().filter(|(r, _)| set.contains(*r)).map(|(_, p)| p).sum())
    }

    fn check_set(&self, set: &EventSet) -> Result<()> {
        if set.base != self.base || set.n != self.n {
            return Err(Error::DimensionMismatch { what: "event set", expected: self.sequence_count(), found: set.members.len() });
        }
        Ok(())
    }
}

/// A subset of `{0..base}^n` as a membership bitmap over sequence ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSet {
    pub base: usize,
    pub n: usize,
    members: Vec<bool>,
}

impl EventSet {
    pub fn empty(base: usize, n: usize) -> Result<Self> {
        Ok(Self { base, n, members: vec![false; space_size(base, n)?] })
    }

    pub fn full(base: usize, n: usize) -> Result<Self> {
        Ok(Self { base, n, members: vec![true; space_size(base, n)?] })
    }

    pub fn from_ranks(base: usize, n: usize, ranks: &[usize]) -> Result<Self> {
        let mut s = Self::empty(base, n)?;
        for &r in ranks {
            if r >= s.members.len() {
                return Err(Error::OutOfRange { what: "sequence rank", value: r as f64, lo: 0.0, hi: (s.members.len() - 1) as f64 });
            }
            s.members[r] = true;
        }
        Ok(s)
    }

    pub fn from_sequences(base: usize, n: usize, seqs: &[Vec<usize>]) -> Result<Self> {
        let alpha = crate::measures::SequenceAlphabet::new(base, n)?;
        let ranks = seqs.iter().map(|s| alpha.rank(s)).collect::<Result<Vec<_>>>()?;
        Self::from_ranks(base, n, &ranks)
    }

    pub fn from_predicate(base: usize, n: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        let mut s = Self::empty(base, n)?;
        for (r, m) in s.members.iter_mut().enumerate() {
            *m = f(r);
        }
        Ok(s)
    }

    /// Members of a `bits`-bit mask over all `2^n` binary sequences.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        Self::from_predicate(2, n, |r| (mask >> r) & 1 == 1)
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.members.get(rank).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(r, _)| r).collect()
    }

    pub fn space_size(&self) -> usize {
        self.members.len()
    }
}

/// `X^n` conditioned on `A`.
pub fn tilted_distribution(src: &MarkovSource, set: &EventSet) -> Result<MarkovSource> {
    src.check_set(set)?;
    let mut pmf = src.sequence_pmf();
    for (r, p) in pmf.iter_mut().enumerate() {
        if !set.contains(r) {
            *p = 0.0;
        }
    }
    let mass: f64 = pmf.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::ZeroProbability);
    }
    pmf.iter_mut().for_each(|p| *p /= mass);
    MarkovSource::from_sequence_pmf(src.base, src.n, &pmf, Some(src))
}

/// The canonical maximal coupling: diagonal `min(P, Q)`, off-diagonal
/// `(P - Q)^+(x) (Q - P)^+(y) / TV`.
pub fn maximal_coupling(p: &Distribution, q: &Distribution) -> Result<JointDistribution> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { what: "distribution", expected: p.len(), found: q.len() });
    }
    Ok(JointDistribution::from_vec_unchecked(p.len(), p.len(), coupling_table(p.probs(), q.probs())))
}

fn coupling_table(p: &[f64], q: &[f64]) -> Vec<f64> {
    let k = p.len();
    let mut t = vec![0.0; k * k];
    let tv = tv_of(p, q);
    for x in 0..k {
        t[x * k + x] = p[x].min(q[x]);
    }
    if tv > 0.0 {
        for x in 0..k {
            let ex = (p[x] - q[x]).max(0.0);
            if ex == 0.0 {
                continue;
            }
            for y in 0..k {
                let ey = (q[y] - p[y]).max(0.0);
                if ey > 0.0 {
                    t[x * k + y] = ex * ey / tv;
                }
            }
        }
    }
    t
}

/// `tables[t][(prefix_z * base + y) * base + z] = K_t(z | y, z^{t-1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingKernel {
    pub n: usize,
    pub base: usize,
    pub tables: Vec<Vec<f64>>,
}

impl CouplingKernel {
    pub fn row(&self, t: usize, prefix: usize, y: usize) -> &[f64] {
        let b = self.base;
        let start = (prefix * b + y) * b;
        &self.tables[t][start..start + b]
    }
}

/// Step kernels for the source `src` steered into `set`. Prefixes the tilted
/// law never reaches, and `y` values of zero probability, copy `y` through.
pub fn causal_blowup_coupling(src: &MarkovSource, set: &EventSet) -> Result<CouplingKernel> {
    let tilted = tilted_distribution(src, set)?;
    coupling_between(src, &tilted, set)
}

fn coupling_between(src: &MarkovSource, tilted: &MarkovSource, set: &EventSet) -> Result<CouplingKernel> {
    let b = src.base;
    let reach = prefix_reach(src, set);
    let mut tables = Vec::with_capacity(src.n);
    let mut prefixes = 1;
    for t in 0..src.n {
        let mut table = vec![0.0; prefixes * b * b];
        for prefix in 0..prefixes {
            let p = src.step(t, prefix);
            let q = tilted.step(t, prefix);
            let joint = if reach[t][prefix] { Some(coupling_table(p, q)) } else { None };
            for y in 0..b {
                let row = &mut table[(prefix * b + y) * b..(prefix * b + y + 1) * b];
                match &joint {
                    Some(j) if p[y] > 0.0 => {
                        for z in 0..b {
                            row[z] = j[y * b + z] / p[y];
                        }
                    }
                    _ => row[y] = 1.0,
                }
            }
        }
        tables.push(table);
        prefixes *= b;
    }
    Ok(CouplingKernel { n: src.n, base: b, tables })
}

/// `reach[t][prefix]`: the prefix has positive mass under `src` restricted to `set`.
fn prefix_reach(src: &MarkovSource, set: &EventSet) -> Vec<Vec<bool>> {
    let mut level: Vec<f64> = src.sequence_pmf().iter().enumerate().map(|(r, &p)| if set.contains(r) { p } else { 0.0 }).collect();
    let mut out = vec![Vec::new(); src.n];
    for t in (0..src.n).rev() {
        level = level.chunks(src.base).map(|c| c.iter().sum()).collect();
        out[t] = level.iter().map(|&m| m > 0.0).collect();
    }
    out
}

/// `sqrt(n / (2 log2 e) * log2(1 / p_a))`.
pub fn blowup_bound(n: usize, p_a: f64) -> f64 {
    (n as f64 / (2.0 * LOG2_E) * (1.0 / p_a).log2()).max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub n: usize,
    pub p_a: f64,
    pub exact: bool,
    pub expected_hamming: f64,
    /// Half-width of a 99.7% interval in Monte Carlo mode, 0 when exact.
    pub ci: f64,
    pub bound: f64,
    pub holds: bool,
    /// Every sequence `Z^n` can take lies in `A`.
    pub z_in_a: bool,
    pub z_mass_in_a: f64,
    /// TV distance between the law of `Z^n` and the tilted law (exact mode).
    pub z_law_tv: Option<f64>,
    /// `P(d_H = j)` for `j = 0..=n` (exact mode).
    pub distance_pmf: Vec<f64>,
    pub samples: usize,
}

/// Exact joint of `(Z^n, d_H(Y^n, Z^n))` by dynamic programming over prefixes.
fn exact_z_distance(src: &MarkovSource, k: &CouplingKernel) -> Vec<Vec<f64>> {
    let b = src.base;
    let n = src.n;
    // state[prefix][distance]
    let mut state = vec![vec![1.0]];
    for t in 0..n {
        let mut next = vec![vec![0.0; t + 2]; state.len() * b];
        for (prefix, dist) in state.iter().enumerate() {
            let p = src.step(t, prefix);
            for y in 0..b {
                if p[y] == 0.0 {
                    continue;
                }
                let row = k.row(t, prefix, y);
                for z in 0..b {
                    let w = p[y] * row[z];
                    if w == 0.0 {
                        continue;
                    }
                    let slot = &mut next[prefix * b + z];
                    let step = usize::from(y != z);
                    for (d, &m) in dist.iter().enumerate() {
                        if m != 0.0 {
                            slot[d + step] += m * w;
                        }
                    }
                }
            }
        }
        state = next;
    }
    state
}

/// Checks `E d_H(Y^n, Z^n) <= sqrt(n/(2 log2 e) log2(1/P(A)))` and `Z^n in A`
/// exactly, by enumeration.
pub fn verify_blowup_bound(src: &MarkovSource, set: &EventSet) -> Result<BlowupReport> {
    let p_a = src.probability(set)?;
    if !(p_a > 0.0) {
        return Err(Error::ZeroProbability);
    }
    let tilted = tilted_distribution(src, set)?;
    let k = coupling_between(src, &tilted, set)?;
    let joint = exact_z_distance(src, &k);
    let mut distance_pmf = vec![0.0; src.n + 1];
    let mut z_law = vec![0.0; joint.len()];
    for (z, dist) in joint.iter().enumerate() {
        for (d, &m) in dist.iter().enumerate() {
            distance_pmf[d] += m;
            z_law[z] += m;
        }
    }
    let expected_hamming: f64 = distance_pmf.iter().enumerate().map(|(d, m)| d as f64 * m).sum();
    let z_in_a = z_law.iter().enumerate().all(|(z, &m)| m == 0.0 || set.contains(z));
    let z_mass_in_a = z_law.iter().enumerate().filter(|(z, _)| set.contains(*z)).map(|(_, m)| m).sum();
    let z_law_tv = tv_of(&z_law, &tilted.sequence_pmf());
    let bound = blowup_bound(src.n, p_a);
    Ok(BlowupReport {
        n: src.n,
        p_a,
        exact: true,
        expected_hamming,
        ci: 0.0,
        bound,
        holds: expected_hamming <= bound + 1e-12,
        z_in_a,
        z_mass_in_a,
        z_law_tv: Some(z_law_tv),
        distance_pmf,
        samples: 0,
    })
}

/// Monte Carlo version of [`verify_blowup_bound`] with a seeded generator.
pub fn sample_blowup_bound(src: &MarkovSource, set: &EventSet, samples: usize, seed: u64) -> Result<BlowupReport> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let p_a = src.probability(set)?;
    if !(p_a > 0.0) {
        return Err(Error::ZeroProbability);
    }
    let k = causal_blowup_coupling(src, set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = src.base;
    let (mut sum, mut sum_sq, mut in_a) = (0.0, 0.0, 0usize);
    let mut distance_pmf = vec![0.0; src.n + 1];
    for _ in 0..samples {
        let mut prefix = 0;
        let mut d = 0usize;
        for t in 0..src.n {
            let y = draw(&mut rng, src.step(t, prefix));
            let z = draw(&mut rng, k.row(t, prefix, y));
            d += usize::from(y != z);
            prefix = prefix * b + z;
        }
        sum += d as f64;
        sum_sq += (d * d) as f64;
        distance_pmf[d] += 1.0;
        in_a += usize::from(set.contains(prefix));
    }
    let s = samples as f64;
    let mean = sum / s;
    let var = (sum_sq / s - mean * mean).max(0.0);
    distance_pmf.iter_mut().for_each(|c| *c /= s);
    let ci = 3.0 * (var / s).sqrt();
    let bound = blowup_bound(src.n, p_a);
    Ok(BlowupReport {
        n: src.n,
        p_a,
        exact: false,
        expected_hamming: mean,
        ci,
        bound,
        holds: mean - ci <= bound,
        z_in_a: in_a == samples,
        z_mass_in_a: in_a as f64 / s,
        z_law_tv: None,
        distance_pmf,
        samples,
    })
}

pub(crate) fn draw<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Hamming enlargement `{x : d_H(x, a) <= ell for some a in A}`.
pub fn blowup_set(set: &EventSet, ell: usize) -> EventSet {
    let b = set.base;
    let n = set.n;
    let mut cur = set.members.clone();
    let mut frontier: Vec<usize> = set.ranks();
    let mut pow = vec![1usize; n];
    for t in (0..n.saturating_sub(1)).rev() {
        pow[t] = pow[t + 1] * b;
    }
    for _ in 0..ell.min(n) {
        let mut next = Vec::new();
        for &r in &frontier {
            for &w in &pow {
                let digit = (r / w) % b;
                for s in 0..b {
                    if s != digit {
                        let nr = r - digit * w + s * w;
                        if !cur[nr] {
                            cur[nr] = true;
                            next.push(nr);
                        }
                    }
                }
            }
        }
        frontier = next;
    }
    EventSet { base: b, n, members: cur }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryCheck {
    pub ell: usize,
    pub p_a: f64,
    pub p_blown_up: f64,
    /// `P(d_H(Y^n, Z^n) <= ell)` under the causal coupling.
    pub p_within: f64,
    /// `1 - bound / ell`.
    pub lower_bound: f64,
    pub holds: bool,
}

/// `P(A_ell) >= P(d_H <= ell) >= 1 - E d_H / ell >= 1 - bound / ell`.
pub fn blowup_corollary(src: &MarkovSource, set: &EventSet, ell: usize) -> Result<CorollaryCheck> {
    if ell == 0 {
        return Err(Error::Precondition("radius must be at least 1".into()));
    }
    let rep = verify_blowup_bound(src, set)?;
    let big = blowup_set(set, ell);
    let p_blown_up = src.probability(&big)?;
    let p_within: f64 = rep.distance_pmf.iter().take(ell + 1).sum();
    let lower_bound = 1.0 - rep.bound / ell as f64;
    let tol = 1e-12;
    let holds = p_blown_up + tol >= p_within
        && p_within + tol >= 1.0 - rep.expected_hamming / ell as f64
        && p_blown_up + tol >= lower_bound;
    Ok(CorollaryCheck { ell, p_a: rep.p_a, p_blown_up, p_within, lower_bound, holds })
}
