//! Capacity and the above-capacity exponent of the success probability.
//!
//! The exponent at rate `R` is
//! `alpha(R) = min_Q D(Q_{Y|X} || P_{Y|X} | Q_X) + |R - I_Q(X;Y)|^+`.
//! [`DueckSolver`] minimises it with a coarse grid over the joint simplex,
//! reduced to a Pareto frontier of `(D, I)` pairs, followed by a local search
//! over `Q_X` whose inner problem is solved through its `s`-dual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{kl_of, mutual_information};
use crate::model::{Channel, Distribution, JointDistribution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub input_dist: Distribution,
    pub output_dist: Distribution,
    pub iterations: usize,
    /// Upper bound minus lower bound at termination.
    pub gap: f64,
}

/// Iteration cap of [`channel_capacity`].
pub const CAPACITY_MAX_ITERATIONS: usize = 1_000_000;

/// Blahut–Arimoto. Stops once `max_x D(P_x || P_Y) - I(P_X; P)` is at most `tol`
/// and reports the lower bound `I` as the capacity.
pub fn channel_capacity(ch: &Channel, tol: f64) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange { what: "tolerance", value: tol, lo: 0.0, hi: f64::INFINITY });
    }
    let nx = ch.inputs();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut div = vec![0.0; nx];
    let mut gap = f64::INFINITY;
    for it in 0..CAPACITY_MAX_ITERATIONS {
        let q = ch.output_distribution(&Distribution::from_vec_unchecked(p.clone()))?;
        for (x, dx) in div.iter_mut().enumerate() {
            *dx = kl_of(ch.row(x).probs(), q.probs());
        }
        let lower: f64 = p.iter().zip(&div).map(|(a, b)| a * b).sum();
        let upper = div.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap = (upper - lower).max(0.0);
        if gap <= tol {
            let input_dist = Distribution::from_vec_unchecked(p);
            return Ok(CapacityResult { capacity: lower.max(0.0), input_dist, output_dist: q, iterations: it, gap });
        }
        let dmax = upper;
        let mut z = 0.0;
        for (px, dx) in p.iter_mut().zip(&div) {
            *px *= (dx - dmax).exp2();
            z += *px;
        }
        p.iter_mut().for_each(|px| *px /= z);
    }
    Err(Error::NonConvergence { iterations: CAPACITY_MAX_ITERATIONS, gap })
}

/// Search parameters for [`DueckSolver`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DueckSearch {
    /// Grid denominator: joint masses are multiples of `1/grid`. 0 skips the grid.
    pub grid: usize,
    /// Number of grid points used as refinement starts.
    pub refine: usize,
    /// Largest grid the solver agrees to enumerate.
    pub max_grid_points: u64,
    /// Smallest step of the local search over `Q_X`.
    pub min_step: f64,
}

impl Default for DueckSearch {
    fn default() -> Self {
        Self { grid: 32, refine: 4, max_grid_points: 1 << 24, min_step: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub rate: f64,
    pub alpha: f64,
    pub minimizer: JointDistribution,
    pub kl_part: f64,
    pub rate_part: f64,
    pub mutual_information: f64,
    /// Best value seen on the grid alone (`+inf` when the grid was skipped).
    pub grid_alpha: f64,
}

/// `(D(Q_{Y|X} || P | Q_X), |R - I_Q|^+, I_Q)` for a joint `Q`.
pub fn exponent_objective(ch: &Channel, q: &JointDistribution, rate: f64) -> Result<(f64, f64, f64)> {
    if q.rows() != ch.inputs() || q.cols() != ch.outputs() {
        return Err(Error::DimensionMismatch { what: "joint distribution", expected: ch.inputs() * ch.outputs(), found: q.table().len() });
    }
    let qx = q.marginal_x();
    let mut kl = 0.0;
    for x in 0..q.rows() {
        for y in 0..q.cols() {
            let m = q.get(x, y);
            if m > 0.0 {
                let p = ch.prob(x, y);
                if p <= 0.0 {
                    kl = f64::INFINITY;
                } else {
                    kl += m * (m / (qx.get(x) * p)).log2();
                }
            }
        }
    }
    let i = mutual_information(q);
    Ok((kl.max(0.0), (rate - i).max(0.0), i))
}

#[derive(Clone, Debug)]
struct FrontierPoint {
    d: f64,
    i: f64,
    counts: Vec<u32>,
}

/// Pareto frontier (small `D`, large `I`) sorted by `I` ascending, hence by `D` ascending.
#[derive(Clone, Debug, Default)]
struct Frontier {
    pts: Vec<FrontierPoint>,
}

impl Frontier {
    fn insert(&mut self, d: f64, i: f64, counts: &[u32]) {
        let pos = self.pts.partition_point(|p| p.i < i);
        if let Some(p) = self.pts.get(pos) {
            if p.d <= d {
                return;
            }
        }
        // drop points with I <= i and D >= d; they sit right before `pos`
        let mut start = pos;
        while start > 0 && self.pts[start - 1].d >= d {
            start -= 1;
        }
        let end = if self.pts.get(pos).is_some_and(|p| p.i == i) { pos + 1 } else { pos };
        self.pts.splice(start..end, [FrontierPoint { d, i, counts: counts.to_vec() }]);
    }

    fn merge(mut self, other: Frontier) -> Frontier {
        for p in other.pts {
            self.insert(p.d, p.i, &p.counts);
        }
        self
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let mut r: u128 = 1;
    for j in 0..k {
        r = r * (n - j) as u128 / (j + 1) as u128;
        if r > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    r as u64
}

/// Reusable solver for one channel: the grid frontier does not depend on `R`.
pub struct DueckSolver {
    ch: Channel,
    search: DueckSearch,
    cells: Vec<(usize, usize)>,
    frontier: Vec<FrontierPoint>,
    capacity: CapacityResult,
}

impl DueckSolver {
    pub fn new(ch: &Channel, search: DueckSearch) -> Result<Self> {
        if !(search.min_step > 0.0 && search.min_step < 1.0) {
            return Err(Error::Precondition("min_step must lie in (0, 1)".into()));
        }
        let mut cells = Vec::new();
        for x in 0..ch.inputs() {
            for y in 0..ch.outputs() {
                if ch.prob(x, y) > 0.0 {
                    cells.push((x, y));
                }
            }
        }
        let capacity = channel_capacity(ch, 1e-10)?;
        let mut solver = Self { ch: ch.clone(), search, cells, frontier: Vec::new(), capacity };
        if solver.search.grid > 0 {
            solver.build_grid()?;
        }
        Ok(solver)
    }

    pub fn capacity(&self) -> &CapacityResult {
        &self.capacity
    }

    fn build_grid(&mut self) -> Result<()> {
        let g = self.search.grid;
        let m = self.cells.len();
        if self.ch.inputs() > MAX_GRID_SYMBOLS || self.ch.outputs() > MAX_GRID_SYMBOLS {
            return Err(Error::Precondition(format!("grid stage supports at most {MAX_GRID_SYMBOLS} symbols per side")));
        }
        let points = binomial((g + m - 1) as u64, (m - 1) as u64);
        if points > self.search.max_grid_points {
            return Err(Error::Precondition(format!(
                "grid 1/{g} over {m} cells has {points} points, above the limit {}",
                self.search.max_grid_points
            )));
        }
        let log_c: Vec<f64> = (0..=g).map(|c| if c == 0 { 0.0 } else { (c as f64).log2() }).collect();
        let log_p: Vec<f64> = self.cells.iter().map(|&(x, y)| self.ch.prob(x, y).log2()).collect();
        let ctx = GridCtx {
            g,
            cells: &self.cells,
            log_c: &log_c,
            log_p: &log_p,
            log_g: (g as f64).log2(),
        };
        let partials: Vec<Frontier> = (0..=g)
            .into_par_iter()
            .map(|c0| {
                let mut f = Frontier::default();
                let mut counts = vec![0u32; m];
                counts[0] = c0 as u32;
                if m == 1 {
                    if c0 == g {
                        ctx.visit(&counts, &mut f);
                    }
                } else {
                    ctx.recurse(&mut counts, 1, g - c0, &mut f);
                }
                f
            })
            .collect();
        let merged = partials.into_iter().fold(Frontier::default(), Frontier::merge);
        self.frontier = merged.pts;
        Ok(())
    }

    fn grid_joint(&self, counts: &[u32]) -> JointDistribution {
        let g = self.search.grid as f64;
        let mut table = vec![0.0; self.ch.inputs() * self.ch.outputs()];
        for (&(x, y), &c) in self.cells.iter().zip(counts) {
            table[x * self.ch.outputs() + y] = c as f64 / g;
        }
        JointDistribution::from_vec_unchecked(self.ch.inputs(), self.ch.outputs(), table)
    }

    /// Number of points on the grid frontier.
    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    pub fn solve(&self, rate: f64) -> Result<ExponentResult> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::OutOfRange { what: "rate", value: rate, lo: 0.0, hi: f64::INFINITY });
        }
        let ny = self.ch.outputs();
        let nx = self.ch.inputs();

        // grid stage: best frontier points for this rate, lexicographic on ties
        let mut scored: Vec<(f64, usize)> = self
            .frontier
            .iter()
            .enumerate()
            .map(|(k, p)| (p.d + (rate - p.i).max(0.0), k))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut best: Option<(f64, JointDistribution)> = None;
        let consider = |q: JointDistribution, best: &mut Option<(f64, JointDistribution)>| -> Result<()> {
            let (kl, rp, _) = exponent_objective(&self.ch, &q, rate)?;
            let v = kl + rp;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                *best = Some((v, q));
            }
            Ok(())
        };

        let mut grid_alpha = f64::INFINITY;
        let mut starts: Vec<Vec<f64>> = Vec::new();
        for &(_, k) in scored.iter().take(self.search.refine.max(1)) {
            let q = self.grid_joint(&self.frontier[k].counts);
            starts.push(q.marginal_x().probs().to_vec());
            let (kl, rp, _) = exponent_objective(&self.ch, &q, rate)?;
            grid_alpha = grid_alpha.min(kl + rp);
            consider(q, &mut best)?;
        }
        starts.push(self.capacity.input_dist.probs().to_vec());
        starts.push(vec![1.0 / nx as f64; nx]);

        let mut seen: Vec<Vec<f64>> = Vec::new();
        for s in starts {
            if seen.iter().any(|t| t.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-12)) {
                continue;
            }
            seen.push(s.clone());
            let (_, qx, v) = self.pattern_search(s, rate);
            consider(self.joint_from(&qx, &v), &mut best)?;
        }

        let (_, minimizer) = best.ok_or_else(|| Error::Internal("no candidate evaluated".into()))?;
        let (kl_part, rate_part, mi) = exponent_objective(&self.ch, &minimizer, rate)?;
        debug_assert_eq!(minimizer.cols(), ny);
        Ok(ExponentResult {
            rate,
            alpha: kl_part + rate_part,
            minimizer,
            kl_part,
            rate_part,
            mutual_information: mi,
            grid_alpha,
        })
    }

    fn joint_from(&self, qx: &[f64], v: &[f64]) -> JointDistribution {
        let ny = self.ch.outputs();
        let table = (0..qx.len() * ny).map(|k| qx[k / ny] * v[k]).collect();
        JointDistribution::from_vec_unchecked(qx.len(), ny, table)
    }

    /// Local search over `Q_X` by pairwise mass transfers with step halving.
    fn pattern_search(&self, mut qx: Vec<f64>, rate: f64) -> (f64, Vec<f64>, Vec<f64>) {
        let nx = qx.len();
        let (mut val, mut v) = self.inner(&qx, rate);
        let mut step = 0.25;
        while step >= self.search.min_step {
            let mut improved = false;
            for i in 0..nx {
                for j in 0..nx {
                    if i == j || qx[i] <= 0.0 {
                        continue;
                    }
                    let mv = step.min(qx[i]);
                    let mut cand = qx.clone();
                    cand[i] -= mv;
                    cand[j] += mv;
                    if cand[i] < 1e-15 {
                        cand[i] = 0.0;
                    }
                    let (cv, cvv) = self.inner(&cand, rate);
                    if cv < val - 1e-15 {
                        val = cv;
                        v = cvv;
                        qx = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        (val, qx, v)
    }

    /// `min_V D(V || P | Q_X) + |R - I(Q_X, V)|^+` through the saddle point in
    /// `s` of `sR + min_V [D - s I]`. Returns the best objective value met and its `V`.
    fn inner(&self, qx: &[f64], rate: f64) -> (f64, Vec<f64>) {
        let p: Vec<f64> = (0..self.ch.inputs()).flat_map(|x| self.ch.row(x).probs().to_vec()).collect();
        let eval = |v: &[f64]| -> f64 {
            let q = self.joint_from(qx, v);
            let (kl, rp, _) = exponent_objective(&self.ch, &q, rate).expect("shapes match");
            kl + rp
        };
        let mi_of = |v: &[f64]| mutual_information(&self.joint_from(qx, v));

        let mut best_v = p.clone();
        let mut best = eval(&p);
        if mi_of(&p) >= rate {
            return (best, best_v);
        }
        let track = |v: &Vec<f64>, best: &mut f64, best_v: &mut Vec<f64>| {
            let e = eval(v);
            if e < *best {
                *best = e;
                *best_v = v.clone();
            }
        };

        let v1 = self.tilt(qx, &p, 1.0, &p);
        track(&v1, &mut best, &mut best_v);
        if mi_of(&v1) <= rate {
            return (best, best_v);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut warm = p.clone();
        for _ in 0..48 {
            let s = 0.5 * (lo + hi);
            let v = self.tilt(qx, &p, s, &warm);
            track(&v, &mut best, &mut best_v);
            if mi_of(&v) < rate {
                lo = s;
            } else {
                hi = s;
            }
            warm = v;
            if hi - lo < 1e-12 {
                break;
            }
        }
        (best, best_v)
    }

    /// Minimiser of `D(V || P | Q_X) - s I(Q_X, V)` by the fixed-point map
    /// `V(y|x) <- P(y|x) (V(y|x) / Q_Y(y))^s`, row-normalised.
    fn tilt(&self, qx: &[f64], p: &[f64], s: f64, warm: &[f64]) -> Vec<f64> {
        let nx = qx.len();
        let ny = self.ch.outputs();
        let mut v = warm.to_vec();
        let mut qy = vec![0.0; ny];
        for _ in 0..20_000 {
            qy.iter_mut().for_each(|q| *q = 0.0);
            for x in 0..nx {
                for y in 0..ny {
                    qy[y] += qx[x] * v[x * ny + y];
                }
            }
            let mut change = 0.0f64;
            for x in 0..nx {
                if qx[x] <= 0.0 {
                    continue;
                }
                let row = &mut v[x * ny..(x + 1) * ny];
                let mut next = vec![0.0; ny];
                let mut z = 0.0;
                for y in 0..ny {
                    if p[x * ny + y] > 0.0 && row[y] > 0.0 {
                        next[y] = p[x * ny + y] * (row[y] / qy[y]).powf(s);
                        z += next[y];
                    }
                }
                for y in 0..ny {
                    let nv = next[y] / z;
                    change = change.max((nv - row[y]).abs());
                    row[y] = nv;
                }
            }
            if change < 1e-14 {
                break;
            }
        }
        v
    }
}

const MAX_GRID_SYMBOLS: usize = 64;

struct GridCtx<'a> {
    g: usize,
    cells: &'a [(usize, usize)],
    log_c: &'a [f64],
    log_p: &'a [f64],
    log_g: f64,
}

impl GridCtx<'_> {
    fn recurse(&self, counts: &mut [u32], pos: usize, left: usize, f: &mut Frontier) {
        if pos == counts.len() - 1 {
            counts[pos] = left as u32;
            self.visit(counts, f);
            return;
        }
        for c in 0..=left {
            counts[pos] = c as u32;
            self.recurse(counts, pos + 1, left - c, f);
        }
    }

    fn visit(&self, counts: &[u32], f: &mut Frontier) {
        let mut cx = [0usize; MAX_GRID_SYMBOLS];
        let mut cy = [0usize; MAX_GRID_SYMBOLS];
        for (&(x, y), &c) in self.cells.iter().zip(counts) {
            cx[x] += c as usize;
            cy[y] += c as usize;
        }
        let mut d = 0.0;
        let mut i = 0.0;
        for (k, (&(x, y), &c)) in self.cells.iter().zip(counts).enumerate() {
            if c > 0 {
                let c_ = c as usize;
                let lc = self.log_c[c_];
                let lx = self.log_c[cx[x]];
                d += c as f64 * (lc - lx - self.log_p[k]);
                i += c as f64 * (lc + self.log_g - lx - self.log_c[cy[y]]);
            }
        }
        let g = self.g as f64;
        f.insert((d / g).max(0.0), (i / g).max(0.0), counts);
    }
}

/// Single-rate convenience wrapper.
pub fn dueck_exponent(ch: &Channel, rate: f64, search: &DueckSearch) -> Result<ExponentResult> {
    DueckSolver::new(ch, search.clone())?.solve(rate)
}

/// Exponent at several rates, sharing one grid.
pub fn dueck_curve(ch: &Channel, rates: &[f64], search: &DueckSearch) -> Result<Vec<ExponentResult>> {
    let solver = DueckSolver::new(ch, search.clone())?;
    rates.par_iter().map(|&r| solver.solve(r)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub capacity: f64,
    /// Worst pair `(x, y)` and its `log P(y|x)/P_Y(y) - C`.
    pub x: usize,
    pub y: usize,
    pub margin: f64,
    pub log_ratio: f64,
}

/// `log P(y|x) / P_Y(y)` over reachable pairs, with `P_Y` capacity-achieving.
fn log_ratios(ch: &Channel, cap: &CapacityResult) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    for x in 0..ch.inputs() {
        for y in 0..ch.outputs() {
            let p = ch.prob(x, y);
            if p > 0.0 {
                let py = cap.output_dist.get(y);
                if py <= 0.0 {
                    return Err(Error::Internal(format!("output {y} reachable but has zero capacity-achieving mass")));
                }
                out.push((x, y, (p / py).log2()));
            }
        }
    }
    Ok(out)
}

/// Whether every `log P(y|x)/P_Y(y)` is at most `C + tol`.
pub fn check_exponent_condition(ch: &Channel, tol: f64) -> Result<ConditionReport> {
    let cap = channel_capacity(ch, 1e-10)?;
    condition_from(ch, &cap, tol)
}

fn condition_from(ch: &Channel, cap: &CapacityResult, tol: f64) -> Result<ConditionReport> {
    let ratios = log_ratios(ch, cap)?;
    let mut worst = ratios[0];
    for &r in &ratios[1..] {
        if r.2 > worst.2 {
            worst = r;
        }
    }
    let margin = worst.2 - cap.capacity;
    Ok(ConditionReport { holds: margin <= tol, capacity: cap.capacity, x: worst.0, y: worst.1, margin, log_ratio: worst.2 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPoint {
    pub lambda: f64,
    pub rate: f64,
    /// Objective at the perturbed joint, an upper bound on `alpha(rate)`.
    pub perturbed_objective: f64,
    pub alpha: f64,
    /// `alpha / (zeta * lambda)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationDiagnostics {
    pub capacity: f64,
    pub condition_holds: bool,
    pub x0: usize,
    pub y0: usize,
    pub x1: Option<usize>,
    pub y1: Option<usize>,
    pub zeta: Option<f64>,
    pub lambda_max: Option<f64>,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `alpha(C + delta) / delta` for each delta.
    pub slope_estimates: Vec<f64>,
    pub strictly_decreasing: bool,
    pub perturbation: Vec<PerturbationPoint>,
}

/// Slope diagnostics of `alpha` just above capacity.
pub fn exponent_slope_at_capacity(ch: &Channel, deltas: &[f64], search: &DueckSearch) -> Result<PerturbationDiagnostics> {
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Precondition("deltas must be positive".into()));
    }
    let solver = DueckSolver::new(ch, search.clone())?;
    let cap = solver.capacity().clone();
    let cond = condition_from(ch, &cap, 1e-9)?;
    let c = cap.capacity;

    let alphas = deltas
        .par_iter()
        .map(|&d| solver.solve(c + d).map(|r| r.alpha))
        .collect::<Result<Vec<_>>>()?;
    let slope_estimates: Vec<f64> = alphas.iter().zip(deltas).map(|(a, d)| a / d).collect();
    let strictly_decreasing = slope_estimates.windows(2).all(|w| w[1] < w[0]);

    let mut diag = PerturbationDiagnostics {
        capacity: c,
        condition_holds: cond.holds,
        x0: cond.x,
        y0: cond.y,
        x1: None,
        y1: None,
        zeta: None,
        lambda_max: None,
        deltas: deltas.to_vec(),
        alphas,
        slope_estimates,
        strictly_decreasing,
        perturbation: Vec::new(),
    };
    if cond.holds {
        return Ok(diag);
    }

    let px = cap.input_dist.probs();
    let ratios = log_ratios(ch, &cap)?;
    let (x1, y1, r1) = ratios
        .iter()
        .filter(|&&(x, y, r)| r <= c + 1e-12 && px[x] * ch.prob(x, y) > 0.0)
        .fold(None::<(usize, usize, f64)>, |acc, &t| match acc {
            Some(a) if a.2 <= t.2 => Some(a),
            _ => Some(t),
        })
        .ok_or_else(|| Error::Internal("no pair with ratio at most capacity and positive mass".into()))?;
    let zeta = cond.log_ratio - r1;
    let lambda_max = px[x1] * ch.prob(x1, y1);
    diag.x1 = Some(x1);
    diag.y1 = Some(y1);
    diag.zeta = Some(zeta);
    diag.lambda_max = Some(lambda_max);

    let ny = ch.outputs();
    let base = JointDistribution::product(&cap.input_dist, ch)?;
    for j in 1..=4 {
        let lambda = lambda_max / f64::from(1u32 << j);
        let mut t = base.table().to_vec();
        t[cond.x * ny + cond.y] += lambda;
        t[x1 * ny + y1] -= lambda;
        let q = JointDistribution::from_vec_unchecked(ch.inputs(), ny, t);
        let rate = c + zeta * lambda;
        let (kl, rp, _) = exponent_objective(ch, &q, rate)?;
        let alpha = solver.solve(rate)?.alpha;
        diag.perturbation.push(PerturbationPoint {
            lambda,
            rate,
            perturbed_objective: kl + rp,
            alpha,
            ratio: alpha / (zeta * lambda),
        });
    }
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::binary_entropy;

    #[test]
    fn capacity_cases() {
        let c = channel_capacity(&Channel::bsc(0.11), 1e-6).unwrap();
        assert!((c.capacity - 0.500084041835472).abs() < 1e-6);
        assert!((c.capacity - (1.0 - binary_entropy(0.11))).abs() < 1e-6);
        let c = channel_capacity(&Channel::completely_noisy(2, 2), 1e-9).unwrap();
        assert!(c.capacity.abs() < 1e-12);
        let c = channel_capacity(&Channel::noiseless(2), 1e-9).unwrap();
        assert!((c.capacity - 1.0).abs() < 1e-12);
        assert_eq!(c.input_dist.probs(), &[0.5, 0.5]);
        assert!(channel_capacity(&Channel::bsc(0.1), 0.0).is_err());
    }

    #[test]
    fn capacity_asymmetric_z_channel() {
        // Z channel with crossover 1/2: capacity log2(5/4)
        let z = Channel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let c = channel_capacity(&z, 1e-10).unwrap();
        assert!((c.capacity - (1.25f64).log2()).abs() < 1e-9);
        assert!((c.input_dist.get(1) - 0.4).abs() < 1e-4);
    }

    #[test]
    fn frontier_keeps_nondominated() {
        let mut f = Frontier::default();
        f.insert(1.0, 1.0, &[0]);
        f.insert(2.0, 0.5, &[1]);
        f.insert(0.5, 0.5, &[2]);
        f.insert(0.5, 0.5, &[3]);
        f.insert(0.7, 2.0, &[4]);
        let got: Vec<u32> = f.pts.iter().map(|p| p.counts[0]).collect();
        assert_eq!(got, vec![2, 4]);
    }

    #[test]
    fn below_capacity_is_zero() {
        let s = DueckSolver::new(&Channel::bsc(0.25), DueckSearch { grid: 16, ..Default::default() }).unwrap();
        let r = s.solve(0.1).unwrap();
        assert!(r.alpha.abs() < 1e-12);
    }

    #[test]
    fn noiseless_counting_bound() {
        let r = dueck_exponent(&Channel::noiseless(2), 1.5, &DueckSearch::default()).unwrap();
        assert!((r.alpha - 0.5).abs() < 1e-9);
        assert!((r.alpha - (r.kl_part + r.rate_part)).abs() < 1e-12);
    }

    #[test]
    fn condition_cases() {
        let r = check_exponent_condition(&Channel::bsc(0.1), 1e-9).unwrap();
        assert!(!r.holds);
        assert!((r.log_ratio - 0.8479969065549501).abs() < 1e-9);
        assert!((r.capacity - 0.5310044064107188).abs() < 1e-9);
        assert!(check_exponent_condition(&Channel::completely_noisy(2, 2), 1e-9).unwrap().holds);
        let r = check_exponent_condition(&Channel::noiseless(2), 1e-9).unwrap();
        assert!(r.holds && r.margin.abs() < 1e-12);
    }
}
