use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nitk", version, about = "Finite-alphabet network information theory toolkit")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "NITK_THREADS")]
    pub threads: Option<usize>,
    /// Also write a plot-ready CSV table here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Channel capacity by alternating maximisation.
    Capacity(CapacityArgs),
    /// Strong-converse exponent alpha(R) above capacity. CSV: rate,alpha,kl_part,rate_part,mutual_information
    Dueck(DueckArgs),
    /// Whether alpha(R) = R - C near capacity.
    Condition(ConditionArgs),
    /// Slope diagnostics of alpha at capacity. CSV: delta,alpha,ratio
    Slope(SlopeArgs),
    /// Causal blowing-up coupling for a source and a set. CSV: distance,probability
    Blowup(BlowupArgs),
    /// Cut-set outer bound. CSV: cut,crossing,bound,slack,total
    Cutset(CutsetArgs),
    /// Strong-interference condition for a two-user interference channel.
    IcCheck(IcCheckArgs),
    /// Random samples of the strong-interference region. CSV: sample,r1,r2,sum
    IcRegion(IcRegionArgs),
    /// Coordinate wringing on a joint law. CSV: t,residual_mi
    Wringing(WringingArgs),
    /// Error probability of a code. CSV: message,success
    EvalCode(EvalCodeArgs),
    /// Minimum-error code search.
    SearchCode(SearchCodeArgs),
    /// Remove the bit pipe from a code on a modified network. CSV: pipe_content,error
    Lemma1(Lemma1Args),
    /// Random binning coordination. CSV: check,q_hat,ci
    Binning(BinningArgs),
    /// MDS outer code over repeated inner blocks.
    Mds(MdsArgs),
    /// Stacked correction and hashing protocol.
    StackedSim(StackedArgs),
    /// Run an acceptance suite: capacity dueck coupling lemma1 binning mds cutset ic wringing stacked oracle schedule all
    Suite(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct DueckArgs {
    #[arg(long)]
    pub channel: PathBuf,
    /// One or more rates, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub rate: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    #[arg(long, default_value_t = 4)]
    pub refine: usize,
}

#[derive(Debug, Args)]
pub struct ConditionArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SlopeArgs {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01")]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    #[arg(long, default_value_t = 4)]
    pub refine: usize,
}

#[derive(Debug, Args)]
pub struct BlowupArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub set: PathBuf,
    /// Exact evaluation (the default).
    #[arg(long, conflicts_with = "samples")]
    pub exact: bool,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also check the blown-up set of this radius.
    #[arg(long)]
    pub ell: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CutsetArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Simplex grid resolution per input marginal.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.0)]
    pub extra_edge_rate: f64,
}

#[derive(Debug, Args)]
pub struct IcCheckArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Random non-product inputs checked in addition to the grid.
    #[arg(long, default_value_t = 0)]
    pub joint_samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IcRegionArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct WringingArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub kn: f64,
}

#[derive(Debug, Args)]
pub struct EvalCodeArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub code: PathBuf,
    /// Monte Carlo instead of exact evaluation.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leaf cap for exact evaluation.
    #[arg(long, default_value_t = 1 << 26)]
    pub cap: u128,
    /// Also report the good message set at this epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SearchCodeArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Message set size per node, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub messages: Vec<usize>,
    /// Random restarts; without it the search is exhaustive.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1 << 24)]
    pub cap: u128,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the best code here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Lemma1Args {
    #[arg(long)]
    pub network: PathBuf,
    /// Code on the network with the bit pipe.
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub k: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BinningArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps_tilde: f64,
    #[arg(long)]
    pub trials: usize,
    /// n R_i per node, comma separated; defaults to 2k for every node.
    #[arg(long, value_delimiter = ',')]
    pub message_bits: Vec<u32>,
    #[arg(long, default_value_t = 4)]
    pub checks: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MdsArgs {
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "N")]
    pub big_n: usize,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StackedArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps_tilde: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    pub id: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mds_takes_capital_n() {
        let cli = Cli::try_parse_from(["nitk", "mds", "--eps", "0.1", "--N", "4", "--trials", "10", "--seed", "1"]).unwrap();
        assert!(matches!(cli.command, Command::Mds(MdsArgs { big_n: 4, seed: Some(1), .. })));
    }

    #[test]
    fn rates_split_on_commas() {
        let cli = Cli::try_parse_from(["nitk", "dueck", "--channel", "c.json", "--rate", "0.1,0.2"]).unwrap();
        let Command::Dueck(d) = cli.command else { panic!() };
        assert_eq!(d.rate, vec![0.1, 0.2]);
    }

    #[test]
    fn blowup_modes_conflict() {
        assert!(Cli::try_parse_from(["nitk", "blowup", "--source", "s", "--set", "a", "--exact", "--samples", "5"]).is_err());
    }
}
