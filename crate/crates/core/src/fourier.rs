//! Fourier side of the twin local survival function `τ_p` for `p >= 5`:
//! closed-form coefficients against a direct DFT, local and product
//! variances, the weighted ergodic sum and the exponential-sum and two-prime
//! frequency checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime_trial, primes_between};
use crate::constellation::Constellation;
use crate::correlation::open_counts;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

const BLOCK: u64 = 1 << 14;

fn require_prime_at_least_5(p: u64) -> Result<()> {
    if p < 5 || !is_prime_trial(p) {
        return Err(Error::domain(format!("expected a prime >= 5, got {p}")));
    }
    Ok(())
}

fn twin_taus(p: u64) -> Vec<f64> {
    open_counts(&Constellation::twins(), p)
        .into_iter()
        .map(|o| o as f64 / p as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierRow {
    pub p: u64,
    pub k: u64,
    pub coeff_closed: f64,
    pub dft_re: f64,
    pub dft_im: f64,
}

impl FourierRow {
    pub fn dft(&self) -> Complex64 {
        Complex64::new(self.dft_re, self.dft_im)
    }
}

/// Closed-form coefficient `τ̂_p(k)`.
pub fn closed_coefficient(p: u64, k: u64) -> f64 {
    let pf = p as f64;
    if k.is_multiple_of(p) {
        let m = (pf - 2.0) / pf;
        m * m
    } else {
        let c = (PI * k as f64 / pf).cos();
        4.0 * c * c / (pf * pf)
    }
}

/// `τ̂_p(k) = (1/p)·Σ_d τ_p(d)·e^{−2πikd/p}` for every `k`, both ways.
pub fn tau_fourier(p: u64) -> Result<Vec<FourierRow>> {
    require_prime_at_least_5(p)?;
    let taus = twin_taus(p);
    let pf = p as f64;
    Ok((0..p)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (d, &t) in taus.iter().enumerate() {
                // reduce the phase before scaling to keep the angle small
                let angle = -2.0 * PI * ((k * d as u64) % p) as f64 / pf;
                acc += Complex64::from_polar(t, angle);
            }
            acc /= pf;
            FourierRow {
                p,
                k,
                coeff_closed: closed_coefficient(p, k),
                dft_re: acc.re,
                dft_im: acc.im,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceStats {
    pub p: u64,
    /// `2(3p − 8)/p⁴`
    pub var_closed: f64,
    /// `Σ_{k≠0} |τ̂_p(k)|²` over the closed-form coefficients.
    pub var_parseval: f64,
    /// `E[τ²]/E[τ]² = 1 + 2(3p − 8)/(p − 2)⁴`
    pub ratio: f64,
}

pub fn variance_stats(p: u64) -> Result<VarianceStats> {
    require_prime_at_least_5(p)?;
    let pf = p as f64;
    let var_parseval: CompensatedSum = (1..p)
        .map(|k| {
            let c = closed_coefficient(p, k);
            c * c
        })
        .collect();
    Ok(VarianceStats {
        p,
        var_closed: 2.0 * (3.0 * pf - 8.0) / pf.powi(4),
        var_parseval: var_parseval.value(),
        ratio: 1.0 + local_excess(p),
    })
}

fn local_excess(p: u64) -> f64 {
    let pf = p as f64;
    2.0 * (3.0 * pf - 8.0) / (pf - 2.0).powi(4)
}

/// `∏_{5≤p≤pmax} (1 + 2(3p − 8)/(p − 2)⁴) − 1`.
pub fn product_variance_constant(pmax: u64) -> Result<f64> {
    if pmax < 5 {
        return Err(Error::domain(format!("pmax must be >= 5, got {pmax}")));
    }
    let log: f64 = primes_between(5, pmax)
        .into_iter()
        .map(|p| local_excess(p).ln_1p())
        .sum();
    Ok(log.exp_m1())
}

/// How the distance enters `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HConvention {
    /// `h(d) = ∏ τ_p(d mod p)`
    #[default]
    Direct,
    /// `h(d) = ∏ τ_p(3d mod p)`
    Tripled,
}

impl HConvention {
    pub fn name(&self) -> &'static str {
        match self {
            HConvention::Direct => "direct",
            HConvention::Tripled => "tripled",
        }
    }

    fn step(&self) -> u64 {
        match self {
            HConvention::Direct => 1,
            HConvention::Tripled => 3,
        }
    }
}

impl std::str::FromStr for HConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(HConvention::Direct),
            "tripled" => Ok(HConvention::Tripled),
            _ => Err(Error::domain(format!(
                "unknown convention {s:?} (expected direct or tripled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    pub m0: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub convention: HConvention,
    pub weighted_sum: f64,
    pub theory: f64,
    pub rel_error_pct: f64,
}

/// `Σ_{d=1}^{N} (L − 3d)·h(d)` with `L = m0²`, `N = ⌊L/3⌋` and `h` the
/// product of `τ_p` over the primes `5 <= p <= m0`, against `h̄·L²/6`.
///
/// The range of `d` is cut into fixed blocks; each block seeds one rolling
/// index per prime from its base and partial sums merge in block order.
pub fn weighted_ergodic_sum(m0: u64, convention: HConvention) -> Result<EquidistReport> {
    if m0 < 11 {
        return Err(Error::domain(format!("m0 must be >= 11, got {m0}")));
    }
    let l = m0
        .checked_mul(m0)
        .filter(|&l| l <= 1 << 40)
        .ok_or_else(|| Error::domain(format!("m0 = {m0} is too large")))?;
    let n = l / 3;
    let primes = primes_between(5, m0);
    let tables: Vec<Vec<f64>> = primes.iter().map(|&p| twin_taus(p)).collect();
    let step = convention.step();

    let partials: Vec<CompensatedSum> = (1..n + 1)
        .step_by(BLOCK as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|d0| {
            let count = BLOCK.min(n + 1 - d0) as usize;
            let mut h = vec![1.0f64; count];
            for (&p, taus) in primes.iter().zip(&tables) {
                let stride = (step % p) as usize;
                let mut i = ((step % p) * (d0 % p) % p) as usize;
                for x in h.iter_mut() {
                    *x *= taus[i];
                    i += stride;
                    if i >= taus.len() {
                        i -= taus.len();
                    }
                }
            }
            h.iter()
                .enumerate()
                .map(|(j, &h)| (l - 3 * (d0 + j as u64)) as f64 * h)
                .collect()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for part in &partials {
        total.merge(part);
    }
    let weighted_sum = total.value();

    let log_mean: f64 = primes
        .iter()
        .map(|&p| 2.0 * (-2.0 / p as f64).ln_1p())
        .sum();
    let lf = l as f64;
    let theory = log_mean.exp() * lf * lf / 6.0;
    Ok(EquidistReport {
        m0,
        l,
        n,
        convention,
        weighted_sum,
        theory,
        rel_error_pct: 100.0 * (weighted_sum - theory).abs() / theory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub intercept: f64,
}

/// Least-squares fit of `log err = intercept − alpha·log m0`.
pub fn fit_decay_exponent(points: &[(f64, f64)]) -> Result<DecayFit> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::domain(
            "decay fit needs at least 3 distinct m0 values",
        ));
    }
    if points
        .iter()
        .any(|&(m, e)| !(m > 0.0 && e > 0.0 && e.is_finite()))
    {
        return Err(Error::domain("decay fit needs positive m0 and errors"));
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(m, e)| (a + m.ln(), b + e.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), &(m, e)| {
        let dx = m.ln() - mx;
        (a + dx * (e.ln() - my), b + dx * dx)
    });
    let slope = sxy / sxx;
    Ok(DecayFit {
        alpha: -slope,
        intercept: my - slope * mx,
    })
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

/// `W(θ) = Σ_{d=1}^{⌊L/3⌋} (L − 3d)·e^{2πidθ}`.
pub fn weighted_exp_sum(theta: f64, l: u64) -> Result<Complex64> {
    if l < 3 {
        return Err(Error::domain(format!("L must be >= 3, got {l}")));
    }
    let frac = theta - theta.floor();
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    for d in 1..=l / 3 {
        let phase = d as f64 * frac;
        let z = Complex64::from_polar((l - 3 * d) as f64, 2.0 * PI * (phase - phase.floor()));
        re += z.re;
        im += z.im;
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// `L/(2‖θ‖)`, or `None` for integer `θ`.
pub fn exp_sum_bound(theta: f64, l: u64) -> Option<f64> {
    let dist = dist_to_integer(theta);
    (dist > 0.0).then(|| l as f64 / (2.0 * dist))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPrimeReport {
    pub p: u64,
    pub q: u64,
    pub injective: bool,
    pub freq_sum: f64,
    pub full_sum_bound: f64,
}

/// Checks that `(j, k) ↦ jq + kp mod pq` is injective on `[1, p) × [1, q)`
/// and compares `Σ 1/‖j/p + k/q‖` with the majorant over all nonzero residues.
pub fn two_prime_checks(p: u64, q: u64) -> Result<TwoPrimeReport> {
    if !(p < q && is_prime_trial(p) && is_prime_trial(q)) {
        return Err(Error::domain(format!(
            "expected primes p < q, got ({p}, {q})"
        )));
    }
    let m = p
        .checked_mul(q)
        .filter(|&m| m <= 10_000_000)
        .ok_or_else(|| Error::domain("pq must not exceed 10^7"))?;
    let mut seen = vec![false; m as usize];
    let mut injective = true;
    let mut freq = CompensatedSum::new();
    for j in 1..p {
        for k in 1..q {
            let r = (j * q + k * p) % m;
            if std::mem::replace(&mut seen[r as usize], true) {
                injective = false;
            }
            freq += m as f64 / r.min(m - r) as f64;
        }
    }
    let full: CompensatedSum = (1..m).map(|r| m as f64 / r.min(m - r) as f64).collect();
    Ok(TwoPrimeReport {
        p,
        q,
        injective,
        freq_sum: freq.value(),
        full_sum_bound: full.value(),
    })
}
