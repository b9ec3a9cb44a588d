use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const PROB_TOL: f64 = 1e-12;

/// Tolerance applied by file loaders; rows within it are renormalized.
pub const LOAD_TOL: f64 = 1e-9;

pub(crate) fn check_stochastic(what: &'static str, index: usize, probs: &[f64], tol: f64) -> Result<f64> {
    let mut sum = 0.0;
    for &p in probs {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::NegativeProbability { what, index, value: p });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::NonStochastic { what, index, sum });
    }
    Ok(sum)
}

/// A probability mass function on `{0, .., len-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::DimensionMismatch { what: "distribution", expected: 1, found: 0 });
        }
        check_stochastic("distribution", 0, &probs, PROB_TOL)?;
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights with positive total.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeProbability { what: "weights", index: i, value: w });
            }
            total += w;
        }
        if !(total > 0.0) {
            return Err(Error::ZeroProbability);
        }
        Ok(Self { probs: weights.into_iter().map(|w| w / total).collect() })
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution on an empty alphabet");
        Self { probs: vec![1.0 / size as f64; size] }
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        assert!(at < size);
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| i)
    }

    /// Pads with zero-mass atoms up to `size`.
    pub fn padded(&self, size: usize) -> Self {
        let mut probs = self.probs.clone();
        if probs.len() < size {
            probs.resize(size, 0.0);
        }
        Self { probs }
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

/// A discrete memoryless channel `P_{Y|X}` stored as row-stochastic matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRows", into = "ChannelRows")]
pub struct Channel {
    rows: Vec<Distribution>,
    outputs: usize,
}

#[derive(Serialize, Deserialize)]
struct ChannelRows {
    kernel: Vec<Vec<f64>>,
}

impl TryFrom<ChannelRows> for Channel {
    type Error = Error;
    fn try_from(r: ChannelRows) -> Result<Self> {
        Channel::new(r.kernel)
    }
}

impl From<Channel> for ChannelRows {
    fn from(c: Channel) -> Self {
        ChannelRows { kernel: c.rows.into_iter().map(Vec::from).collect() }
    }
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let outputs = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || outputs == 0 {
            return Err(Error::DimensionMismatch { what: "channel", expected: 1, found: 0 });
        }
        let mut out = Vec::with_capacity(rows.len());
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::DimensionMismatch { what: "channel row", expected: outputs, found: row.len() });
            }
            check_stochastic("channel row", x, &row, PROB_TOL)?;
            out.push(Distribution::from_vec_unchecked(row));
        }
        Ok(Self { rows: out, outputs })
    }

    /// Loader entry point: rejects rows off by more than [`LOAD_TOL`],
    /// renormalizes smaller deviations.
    pub fn from_loaded(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(x, row)| renormalize_row("channel row", x, row))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn bsc(p: f64) -> Self {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).expect("crossover probability in [0,1]")
    }

    pub fn noiseless(size: usize) -> Self {
        let rows = (0..size)
            .map(|x| Distribution::point_mass(size, x).probs)
            .collect();
        Self::new(rows).unwrap()
    }

    pub fn completely_noisy(inputs: usize, outputs: usize) -> Self {
        Self::new(vec![vec![1.0 / outputs as f64; outputs]; inputs]).unwrap()
    }

    /// `Y = X + Z mod size` with `Z` uniform on `shifts`.
    pub fn noisy_typewriter(size: usize, shifts: &[usize]) -> Self {
        let w = 1.0 / shifts.len() as f64;
        let rows = (0..size)
            .map(|x| {
                let mut row = vec![0.0; size];
                for &s in shifts {
                    row[(x + s) % size] += w;
                }
                row
            })
            .collect();
        Self::new(rows).unwrap()
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, x: usize) -> &Distribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x].probs[y]
    }

    /// Output distribution induced by an input distribution.
    pub fn output_distribution(&self, input: &Distribution) -> Result<Distribution> {
        if input.len() != self.inputs() {
            return Err(Error::DimensionMismatch { what: "input distribution", expected: self.inputs(), found: input.len() });
        }
        let mut out = vec![0.0; self.outputs];
        for (x, &px) in input.probs().iter().enumerate() {
            for (y, o) in out.iter_mut().enumerate() {
                *o += px * self.prob(x, y);
            }
        }
        Ok(Distribution::from_vec_unchecked(out))
    }

    pub fn is_deterministic(&self) -> bool {
        self.rows.iter().all(|r| r.probs.iter().all(|&p| p == 0.0 || p == 1.0))
    }
}

pub(crate) fn renormalize_row(what: &'static str, index: usize, mut row: Vec<f64>) -> Result<Vec<f64>> {
    let sum = check_stochastic(what, index, &row, LOAD_TOL)?;
    if (sum - 1.0).abs() > PROB_TOL {
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(row)
}

/// A joint pmf `Q_{X,Y}` stored row-major by `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, table: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || table.len() != rows * cols {
            return Err(Error::DimensionMismatch { what: "joint table", expected: rows * cols, found: table.len() });
        }
        check_stochastic("joint distribution", 0, &table, PROB_TOL)?;
        Ok(Self { rows, cols, table })
    }

    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, table: Vec<f64>) -> Self {
        debug_assert_eq!(table.len(), rows * cols);
        Self { rows, cols, table }
    }

    /// `Q_X x Q_{Y|X}`.
    pub fn product(input: &Distribution, channel: &Channel) -> Result<Self> {
        if input.len() != channel.inputs() {
            return Err(Error::DimensionMismatch { what: "input distribution", expected: channel.inputs(), found: input.len() });
        }
        let cols = channel.outputs();
        let mut table = Vec::with_capacity(input.len() * cols);
        for x in 0..input.len() {
            for y in 0..cols {
                table.push(input.get(x) * channel.prob(x, y));
            }
        }
        Ok(Self { rows: input.len(), cols, table })
    }

    /// Independent pair `P x Q`.
    pub fn independent(p: &Distribution, q: &Distribution) -> Self {
        let table = p
            .probs()
            .iter()
            .flat_map(|&a| q.probs().iter().map(move |&b| a * b))
            .collect();
        Self { rows: p.len(), cols: q.len(), table }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.cols + y]
    }

    pub fn marginal_x(&self) -> Distribution {
        let probs = self.table.chunks(self.cols).map(|r| r.iter().sum()).collect();
        Distribution::from_vec_unchecked(probs)
    }

    pub fn marginal_y(&self) -> Distribution {
        let mut probs = vec![0.0; self.cols];
        for row in self.table.chunks(self.cols) {
            for (o, &p) in probs.iter_mut().zip(row) {
                *o += p;
            }
        }
        Distribution::from_vec_unchecked(probs)
    }

    /// `Q_{Y|X=x}`, or `None` when `Q_X(x) = 0`.
    pub fn conditional_row(&self, x: usize) -> Option<Distribution> {
        let row = &self.table[x * self.cols..(x + 1) * self.cols];
        let mass: f64 = row.iter().sum();
        (mass > 0.0).then(|| Distribution::from_vec_unchecked(row.iter().map(|p| p / mass).collect()))
    }

    /// Probability that the two coordinates differ (square tables only).
    pub fn mismatch_probability(&self) -> f64 {
        let mut s = 0.0;
        for x in 0..self.rows {
            for y in 0..self.cols {
                if x != y {
                    s += self.get(x, y);
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(Distribution::new(vec![0.5, 0.4]), Err(Error::NonStochastic { .. })));
        assert!(matches!(Distribution::new(vec![1.5, -0.5]), Err(Error::NegativeProbability { .. })));
        assert!(Channel::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    }

    #[test]
    fn loader_renormalizes_small_deviation() {
        let c = Channel::from_loaded(vec![vec![0.5, 0.5 + 5e-10], vec![0.0, 1.0]]).unwrap();
        let s: f64 = c.row(0).probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(Channel::from_loaded(vec![vec![0.5, 0.5 + 1e-6]]).is_err());
    }

    #[test]
    fn joint_marginals() {
        let j = JointDistribution::product(&Distribution::uniform(2), &Channel::bsc(0.25)).unwrap();
        assert_eq!(j.marginal_y().probs(), &[0.5, 0.5]);
        assert_eq!(j.conditional_row(1).unwrap().probs(), &[0.25, 0.75]);
        assert!((j.mismatch_probability() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn typewriter_rows() {
        let c = Channel::noisy_typewriter(4, &[0, 1]);
        assert_eq!(c.row(3).probs(), &[0.5, 0.0, 0.0, 0.5]);
    }
}
