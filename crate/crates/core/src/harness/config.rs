use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::correlation::MuSource;
use crate::error::{Error, Result};
use crate::fourier::HConvention;
use crate::signal::{HitRule, Window};

/// Which certified count fills the `twins` column of table 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivorRange {
    /// Every member above the basis bound.
    #[default]
    Strict,
    /// Every member at or above the anchor.
    Inclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    /// Hit rule behind the table 1 signal statistics.
    pub table1_rule: HitRule,
    pub survivor_range: SurvivorRange,
    pub mu_source: MuSource,
    pub h_convention: HConvention,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            table1_rule: HitRule::ProperDivisor,
            survivor_range: SurvivorRange::Strict,
            mu_source: MuSource::Observed,
            h_convention: HConvention::Direct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub m0_list: Vec<u64>,
    pub tuple: Constellation,
    pub anchor: u64,
    pub conventions: Conventions,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    /// Adds the inclusive and strict counts as extra table 1 columns.
    pub diagnostic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m0_list: vec![30, 50, 100, 200, 500, 1000],
            tuple: Constellation::twins(),
            anchor: 7,
            conventions: Conventions::default(),
            workers: 1,
            output_dir: PathBuf::from("."),
            formats: vec![Format::Csv],
            diagnostic: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m0_list.is_empty() {
            return Err(Error::Config("m0 list is empty".into()));
        }
        if let Some(m0) = self.m0_list.iter().find(|&&m| m < 5) {
            return Err(Error::Config(format!("every m0 must be >= 5, got {m0}")));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::Config("no output format selected".into()));
        }
        if !self.tuple.is_admissible() {
            return Err(Error::Config(format!(
                "tuple {} is not admissible",
                self.tuple
            )));
        }
        for &m0 in &self.m0_list {
            Window::certification(self.anchor, m0).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// The m0 values in ascending order without repeats.
    pub fn sweep(&self) -> Vec<u64> {
        let mut v = self.m0_list.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Runs `f` on a pool of `workers` threads.
    pub(crate) fn install<T: Send>(&self, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(f)
    }
}
