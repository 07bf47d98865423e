use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::SieveBasis;
use super::window::Window;
use crate::arith::inv2;
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Full traces are refused for windows ending beyond this bound squared.
pub const MAX_FULL_TRACE_M0: u64 = 31_623;

/// Default segment length in positions; a multiple of 64 so survivor masks
/// concatenate on word boundaries.
const SEGMENT_LEN: usize = 1 << 16;

/// When a basis prime counts as hitting a tuple member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitRule {
    /// `p | N`. A member equal to a basis prime is hit by itself, so
    /// survivors are exactly the tuples with every member above `m0`.
    #[default]
    Divisor,
    /// `p | N` and `N ≠ p`: a gear only locks proper multiples of its modulus.
    ProperDivisor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    /// One saturating 8-bit counter per position.
    #[default]
    Full,
    /// One bit per position, set where `S_C = 0`.
    Survivors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SignalOptions {
    pub rule: HitRule,
    pub mode: TraceMode,
    /// Number of contiguous segments to split the window into. `None` uses a
    /// fixed segment length.
    pub segments: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TraceData {
    Full(Vec<u8>),
    Survivors(Vec<u64>),
}

/// `S_C(r)` over a window, or its zero set in survivor mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalTrace {
    window: Window,
    constellation: Constellation,
    rule: HitRule,
    data: TraceData,
}

impl SignalTrace {
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn rule(&self) -> HitRule {
        self.rule
    }

    /// Per-position counters, if the trace was built in full mode.
    pub fn values(&self) -> Option<&[u8]> {
        match &self.data {
            TraceData::Full(v) => Some(v),
            TraceData::Survivors(_) => None,
        }
    }

    pub fn value(&self, r: u64) -> Option<u8> {
        self.values().and_then(|v| v.get(r as usize).copied())
    }

    pub fn is_zero(&self, r: u64) -> bool {
        match &self.data {
            TraceData::Full(v) => v[r as usize] == 0,
            TraceData::Survivors(w) => w[(r / 64) as usize] >> (r % 64) & 1 == 1,
        }
    }

    /// Positions eligible for certification.
    pub fn in_range(&self) -> u64 {
        self.window
            .in_range_positions(self.constellation.max_offset())
    }

    fn zero_positions(&self) -> impl Iterator<Item = u64> + '_ {
        let n = self.in_range();
        let boxed: Box<dyn Iterator<Item = u64>> = match &self.data {
            TraceData::Full(v) => Box::new(
                v[..n as usize]
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s == 0)
                    .map(|(r, _)| r as u64),
            ),
            TraceData::Survivors(words) => {
                Box::new(words.iter().enumerate().flat_map(move |(i, &w)| {
                    let mut w = w;
                    std::iter::from_fn(move || {
                        if w == 0 {
                            return None;
                        }
                        let b = w.trailing_zeros() as u64;
                        w &= w - 1;
                        Some(64 * i as u64 + b)
                    })
                    .take_while(move |&r| r < n)
                }))
            }
        };
        boxed
    }
}

/// Number of certified tuples and, on request, their starting integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedResult {
    pub count: u64,
    pub survivors: Option<Vec<u64>>,
}

/// One `(prime, offset)` pair: hits at `r ≡ residue (mod p)`, except at
/// `skip` when the member there equals `p` under [`HitRule::ProperDivisor`].
#[derive(Debug, Clone, Copy)]
struct Stride {
    p: u64,
    residue: u64,
    skip: Option<u64>,
}

fn strides(basis: &SieveBasis, window: &Window, c: &Constellation, rule: HitRule) -> Vec<Stride> {
    let anchor = window.anchor();
    let mut out = Vec::with_capacity(basis.len() * c.size());
    for &p in basis.primes() {
        let half = inv2(p);
        for &h in c.offsets() {
            // anchor + h + 2r ≡ 0  ⇔  r ≡ −(anchor + h)/2
            let a = (anchor + h) % p;
            let residue = ((p - a) % p) * half % p;
            let skip = match rule {
                HitRule::Divisor => None,
                HitRule::ProperDivisor => (p >= anchor + h && (p - anchor - h).is_multiple_of(2))
                    .then(|| (p - anchor - h) / 2),
            };
            out.push(Stride { p, residue, skip });
        }
    }
    out
}

/// Adds the hits of every stride to positions `[r0, r0 + out.len())`.
fn fill_segment(strides: &[Stride], r0: u64, out: &mut [u8]) {
    let len = out.len() as u64;
    for s in strides {
        let first = (s.residue + s.p - r0 % s.p) % s.p;
        let step = s.p as usize;
        let mut i = first as usize;
        while i < out.len() {
            out[i] = out[i].saturating_add(1);
            i += step;
        }
        if let Some(skip) = s.skip.filter(|&k| k >= r0 && k < r0 + len) {
            let slot = &mut out[(skip - r0) as usize];
            if *slot < u8::MAX {
                *slot -= 1;
            }
        }
    }
}

fn segment_len(positions: usize, opts: &SignalOptions) -> Result<usize> {
    let len = match opts.segments {
        None => SEGMENT_LEN,
        Some(0) => return Err(Error::domain("segment count must be positive")),
        Some(s) => positions.div_ceil(s).max(1),
    };
    Ok(match opts.mode {
        TraceMode::Full => len,
        TraceMode::Survivors => len.div_ceil(64) * 64,
    })
}

/// Evaluates `S_C` with the default options: divisor rule, full trace.
pub fn composite_signal(
    basis: &SieveBasis,
    window: &Window,
    c: &Constellation,
) -> Result<SignalTrace> {
    composite_signal_with(basis, window, c, &SignalOptions::default())
}

/// Evaluates `S_C` segment by segment. Each segment derives its stride
/// starts from its own base, so the result does not depend on how the window
/// is split or how many threads run.
pub fn composite_signal_with(
    basis: &SieveBasis,
    window: &Window,
    c: &Constellation,
    opts: &SignalOptions,
) -> Result<SignalTrace> {
    c.require_admissible()?;
    let positions = window.positions() as usize;
    let chunk = segment_len(positions, opts)?;
    let strides = strides(basis, window, c, opts.rule);
    let data = match opts.mode {
        TraceMode::Full => {
            if window.end() > MAX_FULL_TRACE_M0 * MAX_FULL_TRACE_M0 {
                return Err(Error::domain(format!(
                    "full traces are limited to windows ending at {}²; use survivor mode",
                    MAX_FULL_TRACE_M0
                )));
            }
            let mut values = vec![0u8; positions];
            values
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, seg)| fill_segment(&strides, (i * chunk) as u64, seg));
            TraceData::Full(values)
        }
        TraceMode::Survivors => {
            let mut words = vec![0u64; positions.div_ceil(64)];
            words
                .par_chunks_mut(chunk / 64)
                .enumerate()
                .for_each(|(i, out)| {
                    let r0 = i * chunk;
                    let len = chunk.min(positions - r0);
                    let mut scratch = vec![0u8; len];
                    fill_segment(&strides, r0 as u64, &mut scratch);
                    for (j, &s) in scratch.iter().enumerate() {
                        if s == 0 {
                            out[j / 64] |= 1 << (j % 64);
                        }
                    }
                });
            TraceData::Survivors(words)
        }
    };
    Ok(SignalTrace {
        window: *window,
        constellation: c.clone(),
        rule: opts.rule,
        data,
    })
}

/// Counts positions with `S_C = 0` among in-range positions.
pub fn certify(trace: &SignalTrace) -> CertifiedResult {
    CertifiedResult {
        count: trace.zero_positions().count() as u64,
        survivors: None,
    }
}

/// Like [`certify`], also listing the starting integers `N_r` in ascending order.
pub fn certify_with_survivors(trace: &SignalTrace) -> CertifiedResult {
    let survivors: Vec<u64> = trace
        .zero_positions()
        .map(|r| trace.window.candidate(r))
        .collect();
    CertifiedResult {
        count: survivors.len() as u64,
        survivors: Some(survivors),
    }
}

/// Distribution of `S_C` over the in-range positions of a window, computed
/// without storing the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSummary {
    pub positions: u64,
    pub zeros: u64,
    pub sum: u64,
    pub sum_sq: u64,
    /// `histogram[s]` = number of positions with `S_C = s`.
    pub histogram: Vec<u64>,
}

impl SignalSummary {
    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.positions as f64
    }

    /// Population variance, formed from exact integer moments.
    pub fn variance(&self) -> f64 {
        let n = self.positions as u128;
        let s = self.sum as u128;
        let numer = n * self.sum_sq as u128 - s * s;
        numer as f64 / (n * n) as f64
    }

    /// Variance-to-mean ratio.
    pub fn fano(&self) -> f64 {
        self.variance() / self.mean()
    }
}

pub fn signal_summary(
    basis: &SieveBasis,
    window: &Window,
    c: &Constellation,
    rule: HitRule,
) -> Result<SignalSummary> {
    c.require_admissible()?;
    let n = window.in_range_positions(c.max_offset()) as usize;
    if n == 0 {
        return Err(Error::domain("window has no in-range positions"));
    }
    let strides = strides(basis, window, c, rule);
    let partials: Vec<[u64; 256]> = (0..n.div_ceil(SEGMENT_LEN))
        .into_par_iter()
        .map(|i| {
            let r0 = i * SEGMENT_LEN;
            let mut scratch = vec![0u8; SEGMENT_LEN.min(n - r0)];
            fill_segment(&strides, r0 as u64, &mut scratch);
            let mut hist = [0u64; 256];
            for &s in &scratch {
                hist[s as usize] += 1;
            }
            hist
        })
        .collect();
    let mut histogram = vec![0u64; 256];
    for part in &partials {
        for (acc, x) in histogram.iter_mut().zip(part) {
            *acc += x;
        }
    }
    while histogram.len() > 1 && histogram.last() == Some(&0) {
        histogram.pop();
    }
    let sum = histogram
        .iter()
        .enumerate()
        .map(|(s, &k)| s as u64 * k)
        .sum();
    let sum_sq = histogram
        .iter()
        .enumerate()
        .map(|(s, &k)| (s * s) as u64 * k)
        .sum();
    Ok(SignalSummary {
        positions: n as u64,
        zeros: histogram[0],
        sum,
        sum_sq,
        histogram,
    })
}
