//! Flag and config-file records. Every field is optional so a flag can
//! override the file field by field.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Pbm,
}

/// Field-wise `self.or(other)` over named fields.
macro_rules! merge_fields {
    ($ty:ident { $($f:ident),* $(,)? }) => {
        impl $ty {
            pub fn merge(self, file: $ty) -> $ty {
                $ty { $($f: self.$f.or(file.$f)),* }
            }
        }
    };
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct Global {
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (or directory for PBM snapshots); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}
merge_fields!(Global { seed, threads, out, format });

/// Rule selection shared by `simulate` and `scan`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct RuleArgs {
    /// oriented (alias h), family, twophase-gprime, twophase-g, twophase-h, twophase-f.
    #[arg(long)]
    pub rule: Option<String>,
    /// Neighbor family JSON for `--rule family`.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Block side of the two-phase rules.
    #[arg(long)]
    pub n_block: Option<usize>,
    #[arg(long)]
    pub eps1: Option<String>,
    #[arg(long)]
    pub eps2: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Derive eps2 = eps/2, eps1 = eps2/2, delta = eps2/4.
    #[arg(long)]
    pub epsilon: Option<String>,
}
merge_fields!(RuleArgs { rule, family, n_block, eps1, eps2, delta, epsilon });

#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyArgs {
    /// Neighbor family JSON file.
    pub family_file: Option<PathBuf>,
}
merge_fields!(ClassifyArgs { family_file });

#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rule: RuleArgs,
    /// bernoulli or file.
    #[arg(long)]
    pub init: Option<String>,
    /// Density of 1s for bernoulli init, e.g. 0.3 or 3/10.
    #[arg(long)]
    pub p: Option<String>,
    /// PBM or JSON window for file init.
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Largest number of changing steps.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Emit a frame every k steps; 0 keeps only the final frame.
    #[arg(long)]
    pub snapshots_every: Option<usize>,
    /// zero, one or periodic.
    #[arg(long)]
    pub boundary: Option<String>,
    /// Also report when the origin cell first reaches the top state.
    #[arg(long)]
    pub origin_query: Option<bool>,
}

impl SimulateArgs {
    pub fn merge(self, file: SimulateArgs) -> SimulateArgs {
        SimulateArgs {
            rule: self.rule.merge(file.rule),
            init: self.init.or(file.init),
            p: self.p.or(file.p),
            init_file: self.init_file.or(file.init_file),
            width: self.width.or(file.width),
            height: self.height.or(file.height),
            horizon: self.horizon.or(file.horizon),
            snapshots_every: self.snapshots_every.or(file.snapshots_every),
            boundary: self.boundary.or(file.boundary),
            origin_query: self.origin_query.or(file.origin_query),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default)]
pub struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub rule: RuleArgs,
    /// Comma list `0.1,0.3` or range `start:stop:step`.
    #[arg(long)]
    pub p_grid: Option<String>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
}

impl ScanArgs {
    pub fn merge(self, file: ScanArgs) -> ScanArgs {
        ScanArgs {
            rule: self.rule.merge(file.rule),
            p_grid: self.p_grid.or(file.p_grid),
            width: self.width.or(file.width),
            height: self.height.or(file.height),
            horizon: self.horizon.or(file.horizon),
            trials: self.trials.or(file.trials),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct TmcaArgs {
    /// Turing machine JSON file.
    pub tm_file: Option<PathBuf>,
    /// Step budget for the machine run.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Wrap the machine so it halts on its rightmost visited cell.
    #[arg(long)]
    pub normalize: Option<bool>,
    /// Random contexts for the obstacle check.
    #[arg(long)]
    pub contexts: Option<usize>,
    /// Steps per obstacle context.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Random M-bordered windows for the fill-in check.
    #[arg(long)]
    pub fill_windows: Option<usize>,
    /// Side of the fill-in windows.
    #[arg(long)]
    pub fill_side: Option<usize>,
    /// Coarse windows for the block-encoding commutation check.
    #[arg(long)]
    pub commutation_windows: Option<usize>,
}
merge_fields!(TmcaArgs { tm_file, budget, normalize, contexts, steps, fill_windows, fill_side, commutation_windows });

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub global: Global,
    pub classify: ClassifyArgs,
    pub simulate: SimulateArgs,
    pub scan: ScanArgs,
    pub tmca: TmcaArgs,
}
