//! Special functions for the multipole engine.

mod factorial;
mod harmonics;
mod spheroidal;
mod wigner;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use factorial::{ln_double_factorial_odd, ln_factorial, ln_gamma_half};
pub use harmonics::{sph_harm, HarmonicTable};
pub(crate) use spheroidal::ln_h_far;
pub use spheroidal::{h_at_disk, h_fn, h_fn_deriv, j_fn, j_fn_deriv, j_fn_with_deriv};
pub use wigner::wigner3j;

/// Partial-wave label `(n, m)` with `|m| <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultipoleIndex {
    pub n: u32,
    pub m: i32,
}

impl MultipoleIndex {
    pub fn new(n: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > n {
            return Err(Error::InvalidIndex { n, m });
        }
        Ok(Self { n, m })
    }

    /// Position in the lexicographic ordering (n ascending, m from -n to n).
    pub fn flat(self) -> usize {
        let n = self.n as usize;
        n * n + (self.m + self.n as i32) as usize
    }

    pub fn from_flat(i: usize) -> Self {
        let n = (i as f64).sqrt() as usize;
        // guard against rounding in the square root
        let n = if (n + 1) * (n + 1) <= i { n + 1 } else if n * n > i { n - 1 } else { n };
        Self { n: n as u32, m: (i - n * n) as i32 - n as i32 }
    }

    /// Number of indices with degree `<= n_max`.
    pub fn count(n_max: u32) -> usize {
        let k = n_max as usize + 1;
        k * k
    }

    pub fn iter_up_to(n_max: u32) -> impl Iterator<Item = MultipoleIndex> {
        (0..=n_max).flat_map(|n| (-(n as i32)..=n as i32).map(move |m| MultipoleIndex { n, m }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_invalid() {
        assert_eq!(MultipoleIndex::new(1, 2), Err(Error::InvalidIndex { n: 1, m: 2 }));
        assert!(MultipoleIndex::new(3, -3).is_ok());
    }

    #[test]
    fn ordering_is_lexicographic() {
        let all: Vec<_> = MultipoleIndex::iter_up_to(3).collect();
        assert_eq!(all.len(), MultipoleIndex::count(3));
        for (i, idx) in all.iter().enumerate() {
            assert_eq!(idx.flat(), i);
        }
        assert_eq!(all[1], MultipoleIndex { n: 1, m: -1 });
    }

    proptest! {
        #[test]
        fn flat_round_trip(i in 0usize..200_000) {
            let idx = MultipoleIndex::from_flat(i);
            prop_assert!(idx.m.unsigned_abs() <= idx.n);
            prop_assert_eq!(idx.flat(), i);
        }
    }
}
