//! The `N = 2n + 3m` generator: canonical seeds, the candidate filter, the gear
//! sequence and the structural primality test.
//!
//! Every integer `n >= 4` has exactly one decomposition `n = 2·n0 + 3·m0` with
//! `n0 ∈ {0, 1, 2}`; `m0` is then the largest possible `m` and is called the
//! spectral capacity. Descending from the seed, the gears `(n0 + 3k, m0 − 2k)`
//! keep `2·n_k + 3·m_k = n` fixed while the modulus walks through every odd
//! integer in `[3, m0]`, so `m_k | n_k` exactly when `m_k | n`.

use serde::{Deserialize, Serialize};

use crate::arith::isqrt;
use crate::error::{Error, Result};

/// The unique decomposition `n = 2·n0 + 3·m0` with `n0 ∈ {0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalSeed {
    pub n: u64,
    pub n0: u64,
    pub m0: u64,
}

/// One `(phase, modulus)` pair of the gear sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gear {
    pub k: u64,
    pub n_k: u64,
    pub m_k: u64,
}

impl Gear {
    /// A gear locks when its phase is a multiple of its modulus.
    pub fn is_locked(&self) -> bool {
        self.n_k.is_multiple_of(self.m_k)
    }
}

/// Supported range is `4 <= n < 2^62`.
pub const MAX_TARGET: u64 = 1 << 62;

pub fn canonical_seed(n: u64) -> Result<CanonicalSeed> {
    if n < 4 {
        return Err(Error::domain(format!(
            "canonical seed needs n >= 4, got {n}"
        )));
    }
    if n >= MAX_TARGET {
        return Err(Error::domain(format!("n = {n} exceeds 2^62")));
    }
    // 2·n0 ≡ n (mod 3)  ⇔  n0 ≡ 2n (mod 3)
    let n0 = (2 * (n % 3)) % 3;
    let m0 = (n - 2 * n0) / 3;
    Ok(CanonicalSeed { n, n0, m0 })
}

impl CanonicalSeed {
    /// `m0` odd and `n0 ≠ 0`, i.e. `gcd(n, 6) = 1`.
    pub fn is_prime_candidate(&self) -> bool {
        self.m0 % 2 == 1 && self.n0 != 0
    }

    /// Gears for `k = 0, 1, …` while `m_k >= 3`.
    ///
    /// Only meaningful for odd `m0`; for even `m0` the moduli run through the
    /// even numbers instead and the sequence is returned as-is.
    pub fn gears(&self) -> impl Iterator<Item = Gear> + '_ {
        self.gears_from(0)
    }

    fn gears_from(&self, first_k: u64) -> impl Iterator<Item = Gear> + '_ {
        let count = if self.m0 >= 3 {
            (self.m0 - 3) / 2 + 1
        } else {
            0
        };
        (first_k.min(count)..count).map(move |k| Gear {
            k,
            n_k: self.n0 + 3 * k,
            m_k: self.m0 - 2 * k,
        })
    }
}

pub fn is_prime_candidate(seed: &CanonicalSeed) -> bool {
    seed.is_prime_candidate()
}

pub fn gear_sequence(seed: &CanonicalSeed) -> Vec<Gear> {
    seed.gears().collect()
}

/// Structural primality: `n` is prime iff it is a candidate and no gear with
/// `1 < m_k <= isqrt(n)` is locked.
pub fn structural_is_prime(n: u64) -> Result<bool> {
    if n <= 3 {
        return Err(Error::domain(format!(
            "structural primality is defined for n > 3, got {n}"
        )));
    }
    let seed = canonical_seed(n)?;
    if !seed.is_prime_candidate() {
        return Ok(false);
    }
    let root = isqrt(n);
    // Gears descend from m0, so skip straight to the first one with m_k <= root.
    let first_k = if seed.m0 > root {
        (seed.m0 - root).div_ceil(2)
    } else {
        0
    };
    let locked = seed
        .gears_from(first_k)
        .take_while(|g| g.m_k > 1)
        .any(|g| g.is_locked());
    Ok(!locked)
}
