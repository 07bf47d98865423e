use num_rational::Ratio;

use super::window::Window;
use crate::arith::{isqrt, primes_up_to};
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Oracle windows must end at or below this bound.
const MAX_ORACLE_END: u64 = 1_000_000_000;

/// Largest primorial enumerated by [`torus_average`].
const MAX_TORUS_MODULUS: u64 = 100_000_000;

const SEGMENT: u64 = 1 << 18;

/// Counts odd candidates `N_r` of the window, with `N_r + max_offset` below
/// the window end, whose members are all prime.
pub fn classical_oracle_count(window: &Window, c: &Constellation) -> Result<u64> {
    let starts = classical_oracle_starts(window.anchor(), window.end(), c)?;
    Ok(starts
        .iter()
        .filter(|&&n| n % 2 == window.anchor() % 2)
        .count() as u64)
}

/// Counts integers `n >= lo` with `n + max_offset < hi` and every `n + h` prime.
pub fn classical_oracle_window(lo: u64, hi: u64, c: &Constellation) -> Result<u64> {
    Ok(classical_oracle_starts(lo, hi, c)?.len() as u64)
}

/// Segmented sieve of Eratosthenes over `[lo, hi)`. Each segment is sieved
/// together with a tail of `max_offset` integers so tuples can straddle
/// segment boundaries.
fn classical_oracle_starts(lo: u64, hi: u64, c: &Constellation) -> Result<Vec<u64>> {
    if hi > MAX_ORACLE_END {
        return Err(Error::domain(format!(
            "oracle window end {hi} exceeds {MAX_ORACLE_END}"
        )));
    }
    let hmax = c.max_offset();
    if hi <= lo + hmax {
        return Ok(Vec::new());
    }
    let base = primes_up_to(isqrt(hi - 1));
    let last_start = hi - hmax; // exclusive
    let mut found = Vec::new();
    let mut prime = Vec::new();
    let mut s = lo;
    while s < last_start {
        let seg_end = (s + SEGMENT).min(last_start);
        let sieve_end = seg_end + hmax;
        prime.clear();
        prime.resize((sieve_end - s) as usize, true);
        for n in s..sieve_end.min(2) {
            prime[(n - s) as usize] = false;
        }
        for &p in &base {
            let mut m = (s.div_ceil(p) * p).max(p * p);
            while m < sieve_end {
                prime[(m - s) as usize] = false;
                m += p;
            }
        }
        for n in s..seg_end {
            let i = (n - s) as usize;
            if c.offsets().iter().all(|&h| prime[i + h as usize]) {
                found.push(n);
            }
        }
        s = seg_end;
    }
    Ok(found)
}

/// Fraction of residues `a mod Q`, `Q = ∏ primes`, with `a + h ≢ 0 (mod p)`
/// for every prime and offset, by enumerating all `Q` residues.
pub fn torus_average(primes: &[u64], c: &Constellation) -> Result<Ratio<u64>> {
    let mut q: u64 = 1;
    for w in primes.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::domain("torus primes must be strictly increasing"));
        }
    }
    for &p in primes {
        if p < 2 || !crate::arith::is_prime_trial(p) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        q = q
            .checked_mul(p)
            .filter(|&q| q <= MAX_TORUS_MODULUS)
            .ok_or_else(|| Error::domain(format!("primorial exceeds {MAX_TORUS_MODULUS}")))?;
    }
    let open: Vec<Vec<bool>> = primes
        .iter()
        .map(|&p| {
            (0..p)
                .map(|a| c.offsets().iter().all(|h| (a + h) % p != 0))
                .collect()
        })
        .collect();
    let mut residues = vec![0usize; primes.len()];
    let mut hits = 0u64;
    for _ in 0..q {
        if residues.iter().zip(&open).all(|(&a, ok)| ok[a]) {
            hits += 1;
        }
        for (a, ok) in residues.iter_mut().zip(&open) {
            *a += 1;
            if *a == ok.len() {
                *a = 0;
            }
        }
    }
    Ok(Ratio::new(hits, q))
}
