use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use nitk_core::codes::{
    binning_coordination, binning_k, good_message_set, lemma1_transform, mds_pipeline,
    sample_error_probability, search_best_code, stacked_correction_sim, BinningConfig, SearchBudget, StackedConfig,
};
use nitk_core::codes::eval::exact_error_probability_capped;
use nitk_core::coupling::{blowup_corollary, sample_blowup_bound, verify_blowup_bound};
use nitk_core::exponents::{channel_capacity, check_exponent_condition, dueck_curve, exponent_slope_at_capacity, DueckSearch};
use nitk_core::regions::{cutset_bound, ic_strong_interference_check, ic_strong_region, input_distribution_grid, wringing};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::files::{load_channel, load_code, load_joint, load_network, load_set, load_source, write_json};
use crate::record::{num, Table};

/// What a command produced, before timing and serialization.
pub struct Outcome {
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub parameters: Value,
    pub outputs: Value,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn new(parameters: Value, outputs: impl Serialize) -> CliResult<Self> {
        Ok(Self { inputs: BTreeMap::new(), seed: None, parameters, outputs: to_value(outputs)?, table: None })
    }

    fn input(mut self, name: &str, digest: &str) -> Self {
        self.inputs.insert(name.to_string(), digest.to_string());
        self
    }

    fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    fn table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }
}

fn to_value(v: impl Serialize) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Invalid(e.to_string()))
}

fn need_seed(seed: Option<u64>, what: &'static str) -> CliResult<u64> {
    seed.ok_or(CliError::MissingSeed(what))
}

fn search(grid: usize, refine: usize) -> DueckSearch {
    DueckSearch { grid, refine, ..DueckSearch::default() }
}

pub fn capacity(a: &CapacityArgs) -> CliResult<Outcome> {
    let ch = load_channel(&a.channel)?;
    let r = channel_capacity(&ch.value, a.tol)?;
    Ok(Outcome::new(json!({ "tol": a.tol }), r)?.input("channel", &ch.digest))
}

pub fn dueck(a: &DueckArgs) -> CliResult<Outcome> {
    let ch = load_channel(&a.channel)?;
    let res = dueck_curve(&ch.value, &a.rate, &search(a.grid, a.refine))?;
    let mut t = Table::new(&["rate", "alpha", "kl_part", "rate_part", "mutual_information"]);
    for r in &res {
        t.push(vec![num(r.rate), num(r.alpha), num(r.kl_part), num(r.rate_part), num(r.mutual_information)]);
    }
    let outputs = if res.len() == 1 { to_value(&res[0])? } else { to_value(&res)? };
    Ok(Outcome::new(json!({ "rate": a.rate, "grid": a.grid, "refine": a.refine }), outputs)?
        .input("channel", &ch.digest)
        .table(t))
}

pub fn condition(a: &ConditionArgs) -> CliResult<Outcome> {
    let ch = load_channel(&a.channel)?;
    let r = check_exponent_condition(&ch.value, a.tol)?;
    Ok(Outcome::new(json!({ "tol": a.tol }), r)?.input("channel", &ch.digest))
}

pub fn slope(a: &SlopeArgs) -> CliResult<Outcome> {
    let ch = load_channel(&a.channel)?;
    let r = exponent_slope_at_capacity(&ch.value, &a.deltas, &search(a.grid, a.refine))?;
    let mut t = Table::new(&["delta", "alpha", "ratio"]);
    for ((d, al), s) in r.deltas.iter().zip(&r.alphas).zip(&r.slope_estimates) {
        t.push(vec![num(*d), num(*al), num(*s)]);
    }
    Ok(Outcome::new(json!({ "deltas": a.deltas, "grid": a.grid, "refine": a.refine }), r)?
        .input("channel", &ch.digest)
        .table(t))
}

pub fn blowup(a: &BlowupArgs) -> CliResult<Outcome> {
    let src = load_source(&a.source)?;
    let set = load_set(&a.set, src.value.base, src.value.n)?;
    let (report, seed) = match a.samples {
        Some(s) => {
            let seed = need_seed(a.seed, "blowup --samples")?;
            (sample_blowup_bound(&src.value, &set.value, s, seed)?, Some(seed))
        }
        None => (verify_blowup_bound(&src.value, &set.value)?, None),
    };
    let corollary = a.ell.map(|ell| blowup_corollary(&src.value, &set.value, ell)).transpose()?;
    let mut t = Table::new(&["distance", "probability"]);
    for (d, p) in report.distance_pmf.iter().enumerate() {
        t.push(vec![d.to_string(), num(*p)]);
    }
    Ok(Outcome::new(
        json!({ "samples": a.samples, "ell": a.ell }),
        json!({ "report": to_value(&report)?, "corollary": to_value(&corollary)? }),
    )?
    .input("source", &src.digest)
    .input("set", &set.digest)
    .seed(seed)
    .table(t))
}

pub fn cutset(a: &CutsetArgs) -> CliResult<Outcome> {
    let net = load_network(&a.network)?;
    let grid = input_distribution_grid(&net.value, a.grid)?;
    let cs = cutset_bound(&net.value, &grid, a.extra_edge_rate)?;
    let mut t = Table::new(&["cut", "crossing", "bound", "slack", "total"]);
    for c in &cs {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        t.push(vec![join(&c.cut), join(&c.crossing_flows), num(c.bound), num(c.slack), num(c.total)]);
    }
    Ok(Outcome::new(
        json!({ "grid": a.grid, "extra_edge_rate": a.extra_edge_rate, "grid_points": grid.len() }),
        json!({ "constraints": to_value(&cs)? }),
    )?
    .input("network", &net.digest)
    .table(t))
}

pub fn ic_check(a: &IcCheckArgs) -> CliResult<Outcome> {
    let net = load_network(&a.network)?;
    let seed = if a.joint_samples > 0 { Some(need_seed(a.seed, "ic-check --joint-samples")?) } else { a.seed };
    let r = ic_strong_interference_check(&net.value, a.grid, a.joint_samples, seed.unwrap_or(0))?;
    Ok(Outcome::new(json!({ "grid": a.grid, "joint_samples": a.joint_samples }), r)?
        .input("network", &net.digest)
        .seed(seed))
}

pub fn ic_region(a: &IcRegionArgs) -> CliResult<Outcome> {
    let net = load_network(&a.network)?;
    let seed = need_seed(a.seed, "ic-region")?;
    let samples = ic_strong_region(&net.value, a.samples, seed)?;
    let mut t = Table::new(&["sample", "r1", "r2", "sum"]);
    for (k, s) in samples.iter().enumerate() {
        t.push(vec![k.to_string(), num(s.r1_bound), num(s.r2_bound), num(s.sum_bound)]);
    }
    Ok(Outcome::new(json!({ "samples": a.samples }), json!({ "samples": to_value(&samples)? }))?
        .input("network", &net.digest)
        .seed(Some(seed))
        .table(t))
}

pub fn wringing_cmd(a: &WringingArgs) -> CliResult<Outcome> {
    let joint = load_joint(&a.joint)?;
    let r = wringing(&joint.value, a.kn)?;
    let mut t = Table::new(&["t", "residual_mi"]);
    for (k, v) in r.residual_mi.iter().enumerate() {
        t.push(vec![k.to_string(), num(*v)]);
    }
    Ok(Outcome::new(json!({ "kn": a.kn }), r)?.input("joint", &joint.digest).table(t))
}

pub fn eval_code(a: &EvalCodeArgs) -> CliResult<Outcome> {
    let net = load_network(&a.network)?;
    let code = load_code(&a.code, &net.value)?;
    let (report, seed) = match a.samples {
        Some(s) => {
            let seed = need_seed(a.seed, "eval-code --samples")?;
            (sample_error_probability(&net.value, &code.value, s, seed)?, Some(seed))
        }
        None => (exact_error_probability_capped(&net.value, &code.value, a.cap)?, None),
    };
    let good = match a.eps {
        Some(eps) => Some(good_message_set(&report, eps)?),
        None => None,
    };
    let mut t = Table::new(&["message", "success"]);
    if let Some(per) = &report.per_message_success {
        for (w, p) in per.iter().enumerate() {
            t.push(vec![w.to_string(), num(*p)]);
        }
    }
    Ok(Outcome::new(
        json!({ "samples": a.samples, "cap": a.cap.to_string(), "eps": a.eps }),
        json!({ "report": to_value(&report)?, "good_set": to_value(&good)? }),
    )?
    .input("network", &net.digest)
    .input("code", &code.digest)
    .seed(seed)
    .table(t))
}

pub fn search_code(a: &SearchCodeArgs) -> CliResult<Outcome> {
    let net = load_network(&a.network)?;
    let (budget, seed) = match a.restarts {
        Some(restarts) => (SearchBudget::Random { restarts, sweeps: a.sweeps }, Some(need_seed(a.seed, "search-code --restarts")?)),
        None => (SearchBudget::Exhaustive { cap: a.cap }, None),
    };
    let r = search_best_code(&net.value, a.n, &a.messages, &budget, seed.unwrap_or(0))?;
    if let Some(out) = &a.out {
        write_json(out, &r.code)?;
    }
    Ok(Outcome::new(
        json!({ "n": a.n, "messages": a.messages, "budget": to_value(&budget)? }),
        json!({ "error_prob": r.error_prob, "exhaustive": r.exhaustive, "evaluated": r.evaluated.to_string(), "code": to_value(&r.code)? }),
    )?
    .input("network", &net.digest)
    .seed(seed))
}

pub fn lemma1(a: &Lemma1Args) -> CliResult<Outcome> {
    let net = load_network(&a.network)?;
    let code = load_code(&a.code, &net.value)?;
    let k = code.value.pipe.as_ref().map(|p| p.k).unwrap_or(0);
    if k != a.k {
        return Err(CliError::Invalid(format!("code carries a {k}-bit pipe but --k is {}", a.k)));
    }
    let r = lemma1_transform(&net.value, &code.value)?;
    if let Some(out) = &a.out {
        write_json(out, &r.code)?;
    }
    let mut t = Table::new(&["pipe_content", "error"]);
    for (x, e) in r.per_candidate.iter().enumerate() {
        t.push(vec![x.to_string(), num(*e)]);
    }
    Ok(Outcome::new(json!({ "k": a.k }), r)?.input("network", &net.digest).input("code", &code.digest).table(t))
}

pub fn binning(a: &BinningArgs) -> CliResult<Outcome> {
    let seed = need_seed(a.seed, "binning")?;
    let bits = if a.message_bits.is_empty() {
        vec![2 * binning_k(a.d, a.eps, a.eps_tilde)?; a.d]
    } else {
        a.message_bits.clone()
    };
    let cfg = BinningConfig { d: a.d, eps: a.eps, eps_tilde: a.eps_tilde, message_bits: bits, trials: a.trials, checks: a.checks, seed };
    let r = binning_coordination(&cfg)?;
    let mut t = Table::new(&["check", "q_hat", "ci"]);
    for (k, e) in r.estimates.iter().enumerate() {
        t.push(vec![k.to_string(), num(e.q_hat), num(e.ci)]);
    }
    Ok(Outcome::new(to_value(&cfg)?, r)?.seed(Some(seed)).table(t))
}

pub fn mds(a: &MdsArgs) -> CliResult<Outcome> {
    let seed = need_seed(a.seed, "mds")?;
    let r = mds_pipeline(a.eps, a.big_n, a.trials, seed)?;
    Ok(Outcome::new(json!({ "eps": a.eps, "N": a.big_n, "trials": a.trials }), r)?.seed(Some(seed)))
}

pub fn stacked(a: &StackedArgs) -> CliResult<Outcome> {
    let net = load_network(&a.network)?;
    let code = load_code(&a.code, &net.value)?;
    let seed = need_seed(a.seed, "stacked-sim")?;
    let cfg = StackedConfig { delta: a.delta, runs: a.runs, layers: a.layers, eps_tilde: a.eps_tilde, seed };
    let r = stacked_correction_sim(&net.value, &code.value, &cfg)?;
    Ok(Outcome::new(to_value(&cfg)?, r)?.input("network", &net.digest).input("code", &code.digest).seed(Some(seed)))
}
