use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, SurvivorRange};
use crate::correlation::{fano_theoretical, mean_field, variance_decomposition, MomentReport};
use crate::error::{Error, Result};
use crate::fourier::{
    fit_decay_exponent, weighted_ergodic_sum, DecayFit, EquidistReport, HConvention,
};
use crate::signal::{
    certify, composite_signal_with, signal_summary, HitRule, SieveBasis, SignalOptions,
    SignalSummary, TraceMode, Window,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub m0: u64,
    /// Window end `m0²`.
    pub window: u64,
    pub twins: u64,
    pub mean: f64,
    pub var: f64,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twins_inclusive: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twins_strict: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub m0: u64,
    #[serde(rename = "L")]
    pub l: u64,
    pub twins: u64,
    #[serde(rename = "mu_N")]
    pub mu_n: f64,
    pub sigma_diag: f64,
    pub sigma_off: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Row {
    pub m0: u64,
    #[serde(rename = "L")]
    pub l: u64,
    pub weighted_sum: f64,
    pub theory: f64,
    pub rel_error_pct: f64,
}

impl From<&EquidistReport> for Table3Row {
    fn from(r: &EquidistReport) -> Self {
        Self {
            m0: r.m0,
            l: r.l,
            weighted_sum: r.weighted_sum,
            theory: r.theory,
            rel_error_pct: r.rel_error_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Report {
    pub convention: HConvention,
    pub rows: Vec<Table3Row>,
    /// Decay exponent of the relative error; needs three distinct m0.
    pub fit: Option<DecayFit>,
}

struct Scale {
    basis: SieveBasis,
    window: Window,
}

fn scale(cfg: &RunConfig, m0: u64) -> Result<Scale> {
    Ok(Scale {
        basis: SieveBasis::for_bound(m0)?,
        window: Window::certification(cfg.anchor, m0)?,
    })
}

fn strict_count(cfg: &RunConfig, s: &Scale) -> Result<u64> {
    let opts = SignalOptions {
        mode: TraceMode::Survivors,
        ..Default::default()
    };
    Ok(certify(&composite_signal_with(
        &s.basis, &s.window, &cfg.tuple, &opts,
    )?)
    .count)
}

fn summary(cfg: &RunConfig, s: &Scale, rule: HitRule) -> Result<SignalSummary> {
    signal_summary(&s.basis, &s.window, &cfg.tuple, rule)
}

/// Runs one job per m0 on the configured pool; rows come back in ascending m0.
fn sweep<T: Send>(cfg: &RunConfig, job: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    cfg.validate()?;
    let m0s = cfg.sweep();
    cfg.install(|| m0s.par_iter().map(|&m0| job(m0)).collect())
}

/// Distribution of `S_C` per m0 together with the certified count.
pub fn run_table1(cfg: &RunConfig) -> Result<Vec<Table1Row>> {
    let rule = cfg.conventions.table1_rule;
    sweep(cfg, |m0| {
        let s = scale(cfg, m0)?;
        let stats = summary(cfg, &s, rule)?;
        let strict = strict_count(cfg, &s)?;
        let inclusive = if rule == HitRule::ProperDivisor {
            stats.zeros
        } else {
            summary(cfg, &s, HitRule::ProperDivisor)?.zeros
        };
        Ok(Table1Row {
            m0,
            window: s.window.end(),
            twins: match cfg.conventions.survivor_range {
                SurvivorRange::Strict => strict,
                SurvivorRange::Inclusive => inclusive,
            },
            mean: stats.mean(),
            var: stats.variance(),
            ratio: stats.fano(),
            twins_inclusive: cfg.diagnostic.then_some(inclusive),
            twins_strict: cfg.diagnostic.then_some(strict),
        })
    })
}

/// Relative disagreement tolerated between two off-diagonal evaluations.
const OFF_DIAGONAL_AGREEMENT: f64 = 1e-6;

fn check_off_diagonal(r: &MomentReport) -> Result<()> {
    let alternatives = [r.sigma_off_exact, r.sigma_off_direct, r.sigma_off_split];
    for alt in alternatives.into_iter().flatten() {
        let scale = r.sigma_off.abs().max(1.0);
        if (alt - r.sigma_off).abs() > OFF_DIAGONAL_AGREEMENT * scale {
            return Err(Error::Invariant(format!(
                "off-diagonal sums disagree at m0 = {}: {} vs {}",
                r.m0, alt, r.sigma_off
            )));
        }
    }
    Ok(())
}

/// Full moment reports per m0, labelled with the requested bound rather than
/// the odd basis capacity. The off-diagonal evaluations must agree.
pub fn run_moments(cfg: &RunConfig) -> Result<Vec<MomentReport>> {
    sweep(cfg, |m0| {
        let s = scale(cfg, m0)?;
        let mut r =
            variance_decomposition(&s.basis, &s.window, &cfg.tuple, cfg.conventions.mu_source)?;
        check_off_diagonal(&r)?;
        r.m0 = m0;
        Ok(r)
    })
}

pub fn run_table2(cfg: &RunConfig) -> Result<Vec<Table2Row>> {
    Ok(run_moments(cfg)?
        .iter()
        .map(|r| Table2Row {
            m0: r.m0,
            l: r.l,
            twins: r.count,
            mu_n: r.mu_n,
            sigma_diag: r.sigma_diag,
            sigma_off: r.sigma_off,
            variance: r.variance,
        })
        .collect())
}

pub fn run_table3(cfg: &RunConfig) -> Result<Table3Report> {
    if let Some(m0) = cfg.m0_list.iter().find(|&&m| m < 11) {
        return Err(Error::Config(format!("table 3 needs m0 >= 11, got {m0}")));
    }
    let convention = cfg.conventions.h_convention;
    let reports = sweep(cfg, |m0| weighted_ergodic_sum(m0, convention))?;
    let rows: Vec<Table3Row> = reports.iter().map(Table3Row::from).collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.m0 as f64, r.rel_error_pct))
        .collect();
    let fit = if rows.len() >= 3 {
        Some(fit_decay_exponent(&points)?)
    } else {
        None
    };
    Ok(Table3Report {
        convention,
        rows,
        fit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoPoint {
    pub m0: u64,
    pub fano_observed: f64,
    pub fano_theoretical: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountPoint {
    pub m0: u64,
    pub count_observed: u64,
    pub count_theory: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub m0: u64,
    pub cv_observed: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub fano: Vec<FanoPoint>,
    pub count: Vec<CountPoint>,
    pub cv: Vec<CvPoint>,
}

/// Series for the variance-ratio, count and relative-error plots.
/// The relative error is `|N_P − μ|/μ` against the mean-field count and the
/// reference curve is `L^(−1/2)` with `L = m0²`.
pub fn run_figures(cfg: &RunConfig) -> Result<FigureData> {
    let rule = cfg.conventions.table1_rule;
    let points = sweep(cfg, |m0| {
        let s = scale(cfg, m0)?;
        let stats = summary(cfg, &s, rule)?;
        let count = strict_count(cfg, &s)?;
        let theory = mean_field(&cfg.tuple, s.basis.m0(), s.window.positions())?;
        let l = s.window.end() as f64;
        Ok((
            FanoPoint {
                m0,
                fano_observed: stats.fano(),
                fano_theoretical: fano_theoretical(m0)?,
            },
            CountPoint {
                m0,
                count_observed: count,
                count_theory: theory,
            },
            CvPoint {
                m0,
                cv_observed: (count as f64 - theory).abs() / theory,
                reference: l.powf(-0.5),
            },
        ))
    })?;
    Ok(FigureData {
        fano: points.iter().map(|p| p.0).collect(),
        count: points.iter().map(|p| p.1).collect(),
        cv: points.iter().map(|p| p.2).collect(),
    })
}
