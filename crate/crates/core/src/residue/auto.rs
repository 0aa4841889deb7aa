//! Ring automorphisms given by their action on element codes.

use crate::chain::ChainRing;
use crate::error::{Error, Result};

use super::ring::{ResidueRing, RingKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingAutomorphism {
    pub map: Vec<u32>,
}

impl RingAutomorphism {
    pub fn identity(n: usize) -> Self {
        RingAutomorphism {
            map: (0..n as u32).collect(),
        }
    }

    pub fn apply(&self, a: u32) -> u32 {
        self.map[a as usize]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RingAutomorphism) -> RingAutomorphism {
        RingAutomorphism {
            map: other.map.iter().map(|&a| self.apply(a)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &a)| i as u32 == a)
    }

    /// Order in the automorphism group.
    pub fn order(&self) -> u64 {
        let mut cur = self.clone();
        let mut k = 1;
        while !cur.is_identity() {
            cur = self.compose(&cur);
            k += 1;
        }
        k
    }

    /// Exhaustive check that the map is a bijective ring endomorphism.
    pub fn is_ring_automorphism(&self, ring: &ResidueRing) -> bool {
        let n = ring.size() as usize;
        if self.map.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &a in &self.map {
            if a as usize >= n || std::mem::replace(&mut seen[a as usize], true) {
                return false;
            }
        }
        let n = n as u32;
        (0..n).all(|a| {
            (0..n).all(|b| {
                self.apply(ring.add(a, b)) == ring.add(self.apply(a), self.apply(b))
                    && self.apply(ring.mul(a, b)) == ring.mul(self.apply(a), self.apply(b))
            })
        })
    }
}

/// The lift of `z -> z^p` to an unramified residue ring `GR(p^R, f)`.
pub fn frobenius_lift(ring: &ResidueRing) -> Result<RingAutomorphism> {
    if ring.kind() != RingKind::Unramified {
        return Err(Error::InvalidInput(format!(
            "frobenius_lift needs an unramified residue ring, got {:?}",
            ring.kind()
        )));
    }
    Ok(RingAutomorphism {
        map: ring
            .elements()
            .into_iter()
            .map(|a| ring.frobenius_coefficients(a, 1))
            .collect(),
    })
}
