//! Offset sets, admissibility, per-prime occupancy and the density constants
//! built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime_trial, primes_between, primes_up_to};
use crate::error::{Error, Result};

/// A prime constellation `0 = h_1 < h_2 < … < h_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Constellation {
    offsets: Vec<u64>,
}

impl Constellation {
    pub fn new(offsets: Vec<u64>) -> Result<Self> {
        if offsets.first() != Some(&0) {
            return Err(Error::domain(format!(
                "constellation offsets must start at 0, got {offsets:?}"
            )));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!(
                "constellation offsets must be strictly increasing, got {offsets:?}"
            )));
        }
        Ok(Self { offsets })
    }

    pub fn twins() -> Self {
        Self {
            offsets: vec![0, 2],
        }
    }

    pub fn cousins() -> Self {
        Self {
            offsets: vec![0, 4],
        }
    }

    pub fn sexy() -> Self {
        Self {
            offsets: vec![0, 6],
        }
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn size(&self) -> usize {
        self.offsets.len()
    }

    pub fn max_offset(&self) -> u64 {
        *self.offsets.last().expect("non-empty by construction")
    }

    /// ω(p): number of distinct residues of the offsets mod `p`.
    pub fn omega(&self, p: u64) -> u64 {
        let residues: BTreeSet<u64> = self.offsets.iter().map(|h| h % p).collect();
        residues.len() as u64
    }

    /// ν(q) = q − ω(q): residue classes left open.
    pub fn nu(&self, q: u64) -> u64 {
        q - self.omega(q)
    }

    pub fn is_admissible(&self) -> bool {
        primes_up_to(self.size() as u64)
            .into_iter()
            .all(|p| self.omega(p) < p)
    }

    /// First prime at which every residue class is occupied, if any.
    pub fn first_covered_prime(&self) -> Option<u64> {
        primes_up_to(self.size() as u64)
            .into_iter()
            .find(|&p| self.omega(p) >= p)
    }

    pub(crate) fn require_admissible(&self) -> Result<()> {
        match self.first_covered_prime() {
            None => Ok(()),
            Some(prime) => Err(Error::Inadmissible {
                offsets: self.offsets.clone(),
                prime,
            }),
        }
    }

    /// Odd primes with ω(p) = p − 1, ascending.
    pub fn blocking_primes(&self) -> Vec<u64> {
        primes_between(3, self.max_offset() + 2)
            .into_iter()
            .filter(|&p| self.omega(p) == p - 1)
            .collect()
    }

    pub fn smallest_blocking_prime(&self) -> Option<u64> {
        self.blocking_primes().first().copied()
    }
}

impl TryFrom<Vec<u64>> for Constellation {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Constellation::new(v)
    }
}

impl From<Constellation> for Vec<u64> {
    fn from(c: Constellation) -> Self {
        c.offsets
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.offsets.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `0,2,6`; the offsets are sorted and a missing leading 0 is an error.
impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut offsets = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::domain(format!("bad offset {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        offsets.sort_unstable();
        Constellation::new(offsets)
    }
}

pub fn omega(c: &Constellation, p: u64) -> u64 {
    c.omega(p)
}

pub fn nu(c: &Constellation, q: u64) -> u64 {
    c.nu(q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub constellation: Constellation,
    /// ω(p) for every prime `p <= max(offsets) + 2`.
    pub per_prime: BTreeMap<u64, u64>,
    pub admissible: bool,
    pub blocking_primes: Vec<u64>,
}

pub fn is_admissible(c: &Constellation) -> AdmissibilityReport {
    let scan = (c.max_offset() + 2).max(c.size() as u64);
    let per_prime = primes_up_to(scan)
        .into_iter()
        .map(|p| (p, c.omega(p)))
        .collect();
    AdmissibilityReport {
        constellation: c.clone(),
        per_prime,
        admissible: c.is_admissible(),
        blocking_primes: c.blocking_primes(),
    }
}

/// Truncated density products over the odd primes `3 <= p <= m0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConstants {
    /// ∏ (1 − ω(p)/p).
    pub partial_product: f64,
    /// ∏ ν(q)·q^(k−1)/(q−1)^k, the normalized singular-series truncation.
    pub singular_constant: f64,
}

/// Both products are accumulated as sums of logarithms.
pub fn density_product(c: &Constellation, m0: u64) -> Result<DensityConstants> {
    c.require_admissible()?;
    if m0 < 3 {
        return Err(Error::domain(format!(
            "density product needs m0 >= 3, got {m0}"
        )));
    }
    let k = c.size() as i32;
    let mut log_partial = 0.0f64;
    let mut log_singular = 0.0f64;
    for q in primes_between(3, m0) {
        let w = c.omega(q);
        let qf = q as f64;
        log_partial += (-(w as f64) / qf).ln_1p();
        // ν·q^(k−1)/(q−1)^k = (1 − ω/q) / (1 − 1/q)^k
        log_singular += (-(w as f64) / qf).ln_1p() - k as f64 * (-1.0 / qf).ln_1p();
    }
    Ok(DensityConstants {
        partial_product: log_partial.exp(),
        singular_constant: log_singular.exp(),
    })
}

/// ω for the Goldbach pair `{n, E − n}` at an odd prime: 1 if `p | E`, else 2.
pub fn goldbach_omega(e: u64, p: u64) -> Result<u64> {
    if e % 2 == 1 {
        return Err(Error::domain(format!(
            "Goldbach target must be even, got {e}"
        )));
    }
    if e <= 4 {
        return Err(Error::domain(format!(
            "Goldbach target must exceed 4, got {e}"
        )));
    }
    if p < 3 || !is_prime_trial(p) {
        return Err(Error::domain(format!("{p} is not an odd prime")));
    }
    Ok(if e.is_multiple_of(p) { 1 } else { 2 })
}

/// ∏ (q−1)/(q−2) over odd primes `q | E` with `q <= m0`.
pub fn goldbach_oscillating_factor(e: u64, m0: u64) -> Result<f64> {
    if e % 2 == 1 {
        return Err(Error::domain(format!(
            "Goldbach target must be even, got {e}"
        )));
    }
    Ok(primes_between(3, m0)
        .into_iter()
        .filter(|q| e.is_multiple_of(*q))
        .map(|q| (q - 1) as f64 / (q - 2) as f64)
        .product())
}
