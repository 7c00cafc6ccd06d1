//! Seeded sweeps over R&D network structures.
//!
//! Each experiment takes a config with its grids and replication counts,
//! returns typed results, and converts them into a long-format CSV table plus
//! a JSON manifest describing every default used. Random draws come from
//! per-task streams derived from `(seed, cell, replication)`, so output bytes
//! do not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

pub mod density;
pub mod error;
pub mod link;
pub mod output;
pub mod regions;
pub mod structures;

pub use error::{Error, Result};
pub use output::{ExperimentOutput, Manifest, Table};

/// Seed used when neither a flag nor `RDNET_SEED` supplies one.
pub const DEFAULT_SEED: u64 = 20260101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    FigA1,
    FigA2,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Fig1,
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
        ExperimentId::FigA1,
        ExperimentId::FigA2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig1 => "fig1",
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
            ExperimentId::FigA1 => "figA1",
            ExperimentId::FigA2 => "figA2",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Run-wide settings shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    /// Also emit one row per replication.
    pub raw: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            threads: 0,
            raw: false,
        }
    }
}

/// Runs an experiment with its default configuration.
pub fn run(id: ExperimentId, opts: &RunOptions) -> Result<ExperimentOutput> {
    match id {
        ExperimentId::Fig1 => link::Fig1Config::default().output(opts),
        ExperimentId::Fig2 => regions::Fig2Config::default().output(opts),
        ExperimentId::Fig3 => structures::Fig3Config::default().output(opts),
        ExperimentId::Fig4 => structures::Fig4Config::default().output(opts),
        ExperimentId::Fig5 => density::Fig5Config::default().output(opts),
        ExperimentId::Fig6 => density::Fig6Config::default().output(opts),
        ExperimentId::FigA1 => structures::FigA1Config::default().output(opts),
        ExperimentId::FigA2 => regions::FigA2Config::default().output(opts),
    }
}
