use serde::{Deserialize, Serialize};

use crate::arith::primes_between;
use crate::error::{Error, Result};

/// The odd primes `3 <= p <= m0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveBasis {
    m0: u64,
    primes: Vec<u64>,
}

impl SieveBasis {
    pub fn m0(&self) -> u64 {
        self.m0
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Basis for an arbitrary bound `>= 3`: primes `<= bound`, with the
    /// capacity set to the largest odd integer not above it.
    pub fn for_bound(bound: u64) -> Result<Self> {
        if bound < 3 {
            return Err(Error::domain(format!(
                "basis bound must be >= 3, got {bound}"
            )));
        }
        build_basis(if bound.is_multiple_of(2) {
            bound - 1
        } else {
            bound
        })
    }
}

pub fn build_basis(m0: u64) -> Result<SieveBasis> {
    if m0 < 3 || m0.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "basis capacity must be odd and >= 3, got {m0}"
        )));
    }
    Ok(SieveBasis {
        m0,
        primes: primes_between(3, m0),
    })
}
