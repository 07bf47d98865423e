//! Pair statistics on the residue torus: the local survival `τ_p(d)` of two
//! positions `d` apart, its exact averages, the mean-field count and the
//! variance of the certified count split into diagonal and off-diagonal parts.
//!
//! Distances are measured in positions, so positions `r` and `r + d` are
//! `2d` apart as integers.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime_trial, primes_between};
use crate::constellation::{density_product, Constellation};
use crate::error::{Error, Result};
use crate::signal::{certify, composite_signal_with, SieveBasis, SignalOptions, TraceMode, Window};
use crate::sum::CompensatedSum;

/// Position counts up to this size get an exact rational off-diagonal sum.
pub const EXACT_OFF_DIAGONAL_LIMIT: u64 = 20_000;

/// Position counts up to this size get the direct floating-point sum.
pub const DIRECT_OFF_DIAGONAL_LIMIT: u64 = 1_000_000;

const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurvivalCase {
    /// `p | d`
    C,
    /// `d ≡ ±1 (mod p)`
    B,
    /// any other distance
    A,
    /// `τ = 0`
    Blocked,
}

impl SurvivalCase {
    pub fn label(&self) -> &'static str {
        match self {
            SurvivalCase::C => "C",
            SurvivalCase::B => "B",
            SurvivalCase::A => "A",
            SurvivalCase::Blocked => "BLOCKED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSurvival {
    pub p: u64,
    pub d: u64,
    pub tau: Ratio<u64>,
    pub case_label: SurvivalCase,
}

/// `p − |F_p(d)|` for `d = 0..p`, where `F_p(d)` is the set of residues `r`
/// at which some member of position `r` or `r + d` is divisible by `p`.
///
/// Positions step by 2, so for odd `p` a lag of `d` positions is `2d` in the
/// integers. At `p = 2` that doubling collapses every lag onto 0, so the lag is
/// taken in integer units there instead.
pub(crate) fn open_counts(c: &Constellation, p: u64) -> Vec<u64> {
    let step = if p == 2 { 1 } else { 2 };
    let mut stamp = vec![u64::MAX; p as usize];
    (0..p)
        .map(|d| {
            let mut forbidden = 0;
            for &h in c.offsets() {
                for shift in [h % p, (h + step * d) % p] {
                    let slot = &mut stamp[((p - shift) % p) as usize];
                    if *slot != d {
                        *slot = d;
                        forbidden += 1;
                    }
                }
            }
            p - forbidden
        })
        .collect()
}

fn require_prime(p: u64) -> Result<()> {
    if is_prime_trial(p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{p} is not prime")))
    }
}

pub fn tau(c: &Constellation, p: u64, d: u64) -> Result<LocalSurvival> {
    require_prime(p)?;
    let open = open_counts(c, p)[(d % p) as usize];
    let r = d % p;
    let case_label = if open == 0 {
        SurvivalCase::Blocked
    } else if r == 0 {
        SurvivalCase::C
    } else if r == 1 || r == p - 1 {
        SurvivalCase::B
    } else {
        SurvivalCase::A
    };
    Ok(LocalSurvival {
        p,
        d,
        tau: Ratio::new(open, p),
        case_label,
    })
}

fn require_open(c: &Constellation, p: u64) -> Result<u64> {
    require_prime(p)?;
    let w = c.omega(p);
    if w >= p {
        return Err(Error::Inadmissible {
            offsets: c.offsets().to_vec(),
            prime: p,
        });
    }
    Ok(w)
}

/// `Σ_{d=0}^{p−1} τ_p(d)` as an exact fraction.
pub fn tau_period_sum(c: &Constellation, p: u64) -> Result<Ratio<u64>> {
    require_prime(p)?;
    Ok(Ratio::new(open_counts(c, p).iter().sum(), p))
}

/// `(1/p)·Σ_d τ_p(d)/μ_p²` with `μ_p = (p − ω(p))/p`.
pub fn universal_average(c: &Constellation, p: u64) -> Result<Ratio<u64>> {
    let w = require_open(c, p)?;
    let s: u64 = open_counts(c, p).iter().sum();
    Ok(Ratio::new(s, (p - w) * (p - w)))
}

/// Largest modulus enumerated by [`crt_average`].
const MAX_CRT_MODULUS: u64 = 1_000_000;

/// `(1/Q)·Σ_{d=0}^{Q−1} ∏_p τ_p(d)` by enumerating every `d mod Q`.
pub fn crt_average(c: &Constellation, primes: &[u64]) -> Result<Ratio<u128>> {
    let mut q: u64 = 1;
    for &p in primes {
        require_open(c, p)?;
        q = q
            .checked_mul(p)
            .filter(|&q| q <= MAX_CRT_MODULUS)
            .ok_or_else(|| Error::domain(format!("modulus exceeds {MAX_CRT_MODULUS}")))?;
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("primes must be strictly increasing"));
    }
    let tables: Vec<Vec<u64>> = primes.iter().map(|&p| open_counts(c, p)).collect();
    let mut idx = vec![0usize; primes.len()];
    let mut total: u128 = 0;
    for _ in 0..q {
        total += idx
            .iter()
            .zip(&tables)
            .map(|(&i, t)| t[i] as u128)
            .product::<u128>();
        for (i, t) in idx.iter_mut().zip(&tables) {
            *i += 1;
            if *i == t.len() {
                *i = 0;
            }
        }
    }
    Ok(Ratio::new(total, q as u128 * q as u128))
}

/// `∏ μ_p²` as an exact fraction, for comparison with [`crt_average`].
pub fn squared_density(c: &Constellation, primes: &[u64]) -> Ratio<u128> {
    primes
        .iter()
        .map(|&p| {
            let m = (p - c.omega(p)) as u128;
            Ratio::new(m * m, p as u128 * p as u128)
        })
        .product()
}

/// `positions × ∏_{3≤p≤m0} (1 − ω(p)/p)`.
pub fn mean_field(c: &Constellation, m0: u64, positions: u64) -> Result<f64> {
    Ok(positions as f64 * density_product(c, m0)?.partial_product)
}

/// `μ_N·(1 − μ_N/positions)`, the Bernoulli variance summed over positions.
pub fn sigma_diag(mu_n: f64, positions: u64) -> f64 {
    mu_n * (1.0 - mu_n / positions as f64)
}

/// `Σ_{1≤d<l, p∤d} (l − d)`, the weight removed by a blocking prime `p`.
pub fn blocked_weight_sum(l: u64, p: u64) -> u128 {
    if l < 2 {
        return 0;
    }
    let (l, p) = (l as u128, p as u128);
    let all = l * (l - 1) / 2;
    let k = (l - 1) / p;
    all - (k * l - p * k * (k + 1) / 2)
}

/// Per-prime data for off-diagonal sums over the primes of a basis.
struct Torus {
    primes: Vec<u64>,
    open: Vec<Vec<u64>>,
    /// `∏ (1 − ω(p)/p)`
    mu: f64,
}

impl Torus {
    fn new(c: &Constellation, primes: &[u64]) -> Result<Self> {
        for &p in primes {
            require_open(c, p)?;
        }
        let mu = primes
            .iter()
            .map(|&p| 1.0 - c.omega(p) as f64 / p as f64)
            .product();
        Ok(Self {
            primes: primes.to_vec(),
            open: primes.iter().map(|&p| open_counts(c, p)).collect(),
            mu,
        })
    }

    /// `∏ τ_p(d)` for `d = start, start + step, …`, `count` values, in floating point,
    /// skipping the primes in `skip`.
    fn products(&self, start: u64, step: u64, count: usize, skip: Option<u64>) -> Vec<f64> {
        let mut out = vec![1.0f64; count];
        for (&p, open) in self.primes.iter().zip(&self.open) {
            if Some(p) == skip {
                continue;
            }
            let inv = 1.0 / p as f64;
            let taus: Vec<f64> = open.iter().map(|&o| o as f64 * inv).collect();
            let stride = (step % p) as usize;
            let mut i = (start % p) as usize;
            for x in out.iter_mut() {
                *x *= taus[i];
                i += stride;
                if i >= taus.len() {
                    i -= taus.len();
                }
            }
        }
        out
    }
}

/// Ordered-pair off-diagonal sum `2·Σ_{d=1}^{n−1} (n − d)(∏_p τ_p(d) − μ²)`
/// in exact rational arithmetic.
pub fn off_diagonal_exact(c: &Constellation, primes: &[u64], n: u64) -> Result<BigRational> {
    let torus = Torus::new(c, primes)?;
    let q: BigInt = primes.iter().map(|&p| BigInt::from(p)).product();
    let open_mu: BigInt = primes
        .iter()
        .map(|&p| BigInt::from(p - c.omega(p)))
        .product();
    // Σ (n − d)·∏ (p − |F_p(d)|), partitioned by d-blocks.
    let weighted: BigInt = (1..n.max(1))
        .step_by(BLOCK as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|d0| {
            let mut acc = BigInt::zero();
            for d in d0..(d0 + BLOCK).min(n) {
                let mut prod = BigInt::from(n - d);
                let mut small: u128 = 1;
                for (&p, open) in torus.primes.iter().zip(&torus.open) {
                    let o = open[(d % p) as usize] as u128;
                    if o == 0 {
                        small = 0;
                        break;
                    }
                    small *= o;
                    if small > u64::MAX as u128 {
                        prod *= small;
                        small = 1;
                    }
                }
                if small != 0 {
                    acc += prod * small;
                }
            }
            acc
        })
        .reduce(BigInt::zero, |a, b| a + b);
    let pair_weight = BigInt::from(n as u128 * n.saturating_sub(1) as u128 / 2);
    let numer = BigInt::from(2) * (&q * weighted - pair_weight * &open_mu * &open_mu);
    Ok(BigRational::new(numer, &q * &q))
}

/// The same sum accumulated directly in floating point.
pub fn off_diagonal_direct(c: &Constellation, primes: &[u64], n: u64) -> Result<f64> {
    let torus = Torus::new(c, primes)?;
    let mu2 = torus.mu * torus.mu;
    let partials: Vec<CompensatedSum> = (1..n.max(1))
        .step_by(BLOCK as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|d0| {
            let count = (BLOCK.min(n - d0)) as usize;
            let prods = torus.products(d0, 1, count, None);
            prods
                .iter()
                .enumerate()
                .map(|(i, &h)| (n - d0 - i as u64) as f64 * (h - mu2))
                .collect()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for part in &partials {
        total.merge(part);
    }
    Ok(2.0 * total.value())
}

/// The same sum via the smallest blocking prime `p_b`: distances with
/// `p_b ∤ d` contribute `−μ²(n − d)` in closed form and the rest reduce to a
/// weighted sum over `d = p_b·d'`. `None` when nothing blocks.
pub fn off_diagonal_split(c: &Constellation, primes: &[u64], n: u64) -> Result<Option<f64>> {
    let torus = Torus::new(c, primes)?;
    let Some(pb) = c.smallest_blocking_prime().filter(|p| primes.contains(p)) else {
        return Ok(None);
    };
    let mu2 = torus.mu * torus.mu;
    let blocked = -2.0 * mu2 * blocked_weight_sum(n, pb) as f64;
    let k = n.saturating_sub(1) / pb;
    let partials: Vec<CompensatedSum> = (1..k + 1)
        .step_by(BLOCK as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|j0| {
            let count = (BLOCK.min(k + 1 - j0)) as usize;
            let h = torus.products(pb * j0, pb, count, Some(pb));
            h.iter()
                .enumerate()
                .map(|(i, &h)| (n - pb * (j0 + i as u64)) as f64 * h)
                .collect()
        })
        .collect();
    let mut w = CompensatedSum::new();
    for part in &partials {
        w.merge(part);
    }
    let tau_pb = (pb - c.omega(pb)) as f64 / pb as f64;
    let surviving_weight =
        (k as u128 * n as u128 - pb as u128 * k as u128 * (k as u128 + 1) / 2) as f64;
    let surviving = 2.0 * (w.value() * tau_pb - mu2 * surviving_weight);
    Ok(Some(blocked + surviving))
}

/// Which count stands in for `μ_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    /// The certified count of the window.
    #[default]
    Observed,
    /// `positions × ∏ (1 − ω(p)/p)`.
    MeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub m0: u64,
    #[serde(rename = "L")]
    pub l: u64,
    pub positions: u64,
    pub count: u64,
    pub mu_source: MuSource,
    pub mu_n: f64,
    pub sigma_diag: f64,
    pub sigma_off: f64,
    pub sigma_off_exact: Option<f64>,
    pub sigma_off_direct: Option<f64>,
    pub sigma_off_split: Option<f64>,
    pub variance: f64,
    pub fano: f64,
    pub snr: f64,
    pub cv: f64,
    pub chebyshev_desert_bound: f64,
    pub paley_zygmund_bound: f64,
    pub dc_energy: f64,
}

/// Moments of the certified count over the window, with the off-diagonal
/// term computed every way the window size allows.
pub fn variance_decomposition(
    basis: &SieveBasis,
    window: &Window,
    c: &Constellation,
    mu_source: MuSource,
) -> Result<MomentReport> {
    let opts = SignalOptions {
        mode: TraceMode::Survivors,
        ..Default::default()
    };
    let count = certify(&composite_signal_with(basis, window, c, &opts)?).count;
    let n = window.positions();
    let primes = basis.primes();
    let mu_n = match mu_source {
        MuSource::Observed => count as f64,
        MuSource::MeanField => mean_field(c, basis.m0(), n)?,
    };
    let sigma_diag = sigma_diag(mu_n, n);
    let sigma_off_exact = if n <= EXACT_OFF_DIAGONAL_LIMIT {
        off_diagonal_exact(c, primes, n)?.to_f64()
    } else {
        None
    };
    let sigma_off_direct = if sigma_off_exact.is_none() && n <= DIRECT_OFF_DIAGONAL_LIMIT {
        Some(off_diagonal_direct(c, primes, n)?)
    } else {
        None
    };
    let sigma_off_split = off_diagonal_split(c, primes, n)?;
    let sigma_off = sigma_off_split
        .or(sigma_off_exact)
        .or(sigma_off_direct)
        .ok_or_else(|| {
            Error::domain(format!(
                "no blocking prime and {n} positions exceed the direct-sum limit"
            ))
        })?;
    let variance = sigma_diag + sigma_off;
    let mu2 = mu_n * mu_n;
    let snr = mu_n / variance.sqrt();
    Ok(MomentReport {
        m0: basis.m0(),
        l: window.length(),
        positions: n,
        count,
        mu_source,
        mu_n,
        sigma_diag,
        sigma_off,
        sigma_off_exact,
        sigma_off_direct,
        sigma_off_split,
        variance,
        fano: variance / mu_n,
        snr,
        cv: 1.0 / snr,
        chebyshev_desert_bound: (variance / mu2).clamp(0.0, 1.0),
        paley_zygmund_bound: mu2 / (variance + mu2),
        dc_energy: mu2 / n as f64,
    })
}

/// `1 − 2·Σ p⁻² / Σ p⁻¹` over the odd primes up to `m0`.
pub fn fano_theoretical(m0: u64) -> Result<f64> {
    if m0 < 3 {
        return Err(Error::domain(format!("m0 must be >= 3, got {m0}")));
    }
    let (s1, s2) = primes_between(3, m0)
        .into_iter()
        .map(|p| 1.0 / p as f64)
        .fold((0.0, 0.0), |(a, b), x| (a + x, b + x * x));
    Ok(1.0 - 2.0 * s2 / s1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub mu_n: f64,
    pub snr: f64,
    pub cv: f64,
    pub paley_zygmund_bound: f64,
}

impl AsymptoticReport {
    /// Treats the variance as `C·μ_N`.
    pub fn from_mean(mu_n: f64, c: f64) -> Self {
        let snr = mu_n / (c * mu_n).sqrt();
        Self {
            mu_n,
            snr,
            cv: 1.0 / snr,
            paley_zygmund_bound: mu_n / (c + mu_n),
        }
    }
}

/// Mean-field scaling for the window `[7, m0²)` with variance proxy `μ_N`.
pub fn asymptotic_report(m0: u64, c: &Constellation) -> Result<AsymptoticReport> {
    let positions = Window::certification(7, m0)?.positions();
    Ok(AsymptoticReport::from_mean(
        mean_field(c, m0, positions)?,
        1.0,
    ))
}
