//! Small integer helpers shared by every module: exact square roots, a cached
//! prime table and primality by trial division.

use std::sync::OnceLock;

/// Primes below this bound are served from a table built once per process.
const TABLE_LIMIT: u64 = 1 << 21;

static PRIME_TABLE: OnceLock<Vec<u64>> = OnceLock::new();

/// Exact floor square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    // Float seed, then correct in integers.
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Smallest integer `r` with `r * r >= n`.
pub fn ceil_sqrt(n: u64) -> u64 {
    let r = isqrt(n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// Sieve of Eratosthenes over odd numbers; returns all primes `<= limit`.
fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut primes = vec![2];
    if limit < 3 {
        return primes;
    }
    // index i represents 2i + 3
    let len = ((limit - 3) / 2 + 1) as usize;
    let mut composite = vec![false; len];
    let mut i = 0usize;
    loop {
        let p = 2 * i as u64 + 3;
        if p * p > limit {
            break;
        }
        if !composite[i] {
            let mut j = ((p * p - 3) / 2) as usize;
            while j < len {
                composite[j] = true;
                j += p as usize;
            }
        }
        i += 1;
    }
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 3),
    );
    primes
}

fn table() -> &'static [u64] {
    PRIME_TABLE.get_or_init(|| sieve_primes(TABLE_LIMIT))
}

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit <= TABLE_LIMIT {
        let t = table();
        let end = t.partition_point(|&p| p <= limit);
        t[..end].to_vec()
    } else {
        sieve_primes(limit)
    }
}

/// Primes `p` with `lo <= p <= hi`.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    let mut v = primes_up_to(hi);
    v.retain(|&p| p >= lo);
    v
}

/// Primality by trial division. Used for validation and small arguments.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Inverse of 2 modulo an odd modulus `m > 1`.
#[inline]
pub(crate) fn inv2(m: u64) -> u64 {
    m.div_ceil(2)
}
