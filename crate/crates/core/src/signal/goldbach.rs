use super::engine::CertifiedResult;
use crate::arith::{ceil_sqrt, primes_between};
use crate::error::{Error, Result};

/// Largest Goldbach target accepted (the sieve holds one byte per odd integer).
const MAX_TARGET: u64 = 2_000_000_000;

/// Counts `n ∈ [3, E/2]` with `n` and `E − n` both prime.
pub fn goldbach_count(e: u64) -> Result<CertifiedResult> {
    let mut res = goldbach_count_with_pairs(e)?;
    res.survivors = None;
    Ok(res)
}

/// Like [`goldbach_count`], listing the smaller member `n` of every pair.
///
/// The basis is the odd primes up to the smallest odd integer `>= √E`. A
/// basis prime marks its proper multiples, so members at or below the basis
/// bound are classified by the same pass.
pub fn goldbach_count_with_pairs(e: u64) -> Result<CertifiedResult> {
    if e % 2 == 1 {
        return Err(Error::domain(format!(
            "Goldbach target must be even, got {e}"
        )));
    }
    if e < 8 {
        return Err(Error::domain(format!(
            "Goldbach target must be >= 8, got {e}"
        )));
    }
    if e > MAX_TARGET {
        return Err(Error::domain(format!(
            "Goldbach target {e} exceeds {MAX_TARGET}"
        )));
    }
    let root = ceil_sqrt(e);
    let m0 = if root.is_multiple_of(2) {
        root + 1
    } else {
        root
    };
    // odd[i] stands for 2i + 1, i.e. the odd integers below E
    let len = (e / 2) as usize;
    let mut composite = vec![false; len];
    composite[0] = true;
    for p in primes_between(3, m0) {
        let mut n = 3 * p;
        while n < e {
            composite[(n / 2) as usize] = true;
            n += 2 * p;
        }
    }
    let pairs: Vec<u64> = (3..=e / 2)
        .step_by(2)
        .filter(|&n| !composite[(n / 2) as usize] && !composite[((e - n) / 2) as usize])
        .collect();
    Ok(CertifiedResult {
        count: pairs.len() as u64,
        survivors: Some(pairs),
    })
}
