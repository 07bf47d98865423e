use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported window end.
pub const MAX_WINDOW_END: u64 = 10_000_000_000;

/// The odd candidates `N_r = anchor + 2r` in `[anchor, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    anchor: u64,
    end: u64,
}

impl Window {
    /// Certification window `[anchor, m0²)`; the anchor must be coprime to 6.
    pub fn certification(anchor: u64, m0: u64) -> Result<Self> {
        if anchor.is_multiple_of(2) || anchor.is_multiple_of(3) {
            return Err(Error::domain(format!(
                "window anchor must be coprime to 6, got {anchor}"
            )));
        }
        let end = m0
            .checked_mul(m0)
            .filter(|&e| e <= MAX_WINDOW_END)
            .ok_or_else(|| Error::domain(format!("window end {m0}² exceeds {MAX_WINDOW_END}")))?;
        if anchor >= end {
            return Err(Error::domain(format!(
                "window anchor {anchor} must lie below m0² = {end}"
            )));
        }
        Ok(Self { anchor, end })
    }

    /// `positions` consecutive odd candidates from an odd anchor. Used for
    /// averaging over anchors, so the anchor may share a factor with 3.
    pub fn span(anchor: u64, positions: u64) -> Result<Self> {
        if anchor.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "window anchor must be odd, got {anchor}"
            )));
        }
        let end = anchor
            .checked_add(2 * positions)
            .filter(|&e| e <= MAX_WINDOW_END)
            .ok_or_else(|| Error::domain("window end out of range"))?;
        Ok(Self { anchor, end })
    }

    pub fn anchor(&self) -> u64 {
        self.anchor
    }

    pub fn end(&self) -> u64 {
        self.end
    }

    /// Integer length `L = end − anchor`.
    pub fn length(&self) -> u64 {
        self.end - self.anchor
    }

    /// Number of odd candidates, `ceil(L / 2)`.
    pub fn positions(&self) -> u64 {
        self.length().div_ceil(2)
    }

    /// Positions whose largest member `N_r + max_offset` stays below `end`.
    pub fn in_range_positions(&self, max_offset: u64) -> u64 {
        let reach = self.anchor + max_offset;
        if reach >= self.end {
            0
        } else {
            (self.end - reach).div_ceil(2)
        }
    }

    /// `N_r` for position `r`.
    pub fn candidate(&self, r: u64) -> u64 {
        self.anchor + 2 * r
    }
}
