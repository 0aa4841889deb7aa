//! The finite chain ring interface shared by module and building code.

use std::fmt::Debug;
use std::hash::Hash;

/// A finite chain ring `O_R`: local, maximal ideal generated by a uniformizer
/// `π` with `π^R = 0`, every ideal of the form `π^k O_R` (two-sided).
///
/// Elements carry a digit normal form: digit `m` lives in the residue field
/// `k = O_R / π` and sits at valuation `m`. The valuation of an element is the
/// position of its lowest nonzero digit, and zeroing all digits at positions
/// `>= k` gives a canonical representative of the coset modulo `π^k`.
pub trait ChainRing: Sync {
    type Elem: Copy + Eq + Ord + Hash + Debug + Send + Sync;

    /// Nilpotency index `R` of the uniformizer.
    fn nilpotency(&self) -> u32;
    /// Size of the residue field.
    fn residue_size(&self) -> u64;
    fn is_commutative(&self) -> bool;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn uniformizer(&self) -> Self::Elem;

    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;

    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.add(a, self.neg(b))
    }

    /// `v(a)` in `0..=R`, with `v(0) = R`.
    fn valuation(&self, a: Self::Elem) -> u32;

    fn is_unit(&self, a: Self::Elem) -> bool {
        self.valuation(a) == 0
    }

    fn is_zero(&self, a: Self::Elem) -> bool {
        a == self.zero()
    }

    /// Canonical representative of `a + π^k O_R`.
    fn truncate(&self, a: Self::Elem, k: u32) -> Self::Elem;

    /// Some `c` with `c · π^k = a`; requires `v(a) >= k`.
    fn div_pi_right(&self, a: Self::Elem, k: u32) -> Self::Elem;

    /// Two-sided inverse of a unit.
    fn inverse(&self, a: Self::Elem) -> Self::Elem {
        assert!(self.is_unit(a), "inverse of a non-unit");
        // residue inverse by exhaustive search over lifts, then Newton
        let q = self.residue_size() as u32;
        let target = self.residue_digit(self.one());
        let mut y = (1..q)
            .map(|d| self.residue_lift(d))
            .find(|&y| self.residue_digit(self.mul(y, a)) == target)
            .expect("residue field element has an inverse");
        let two = self.add(self.one(), self.one());
        for _ in 0..=self.nilpotency() {
            y = self.mul(self.sub(two, self.mul(y, a)), y);
        }
        debug_assert_eq!(self.mul(y, a), self.one());
        y
    }

    fn pow(&self, a: Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn pi_pow(&self, k: u32) -> Self::Elem {
        self.pow(self.uniformizer(), k as u64)
    }

    /// Digit at position 0, i.e. the image in the residue field.
    fn residue_digit(&self, a: Self::Elem) -> u32;
    /// The element with digit `d` at position 0 and zeros elsewhere.
    fn residue_lift(&self, d: u32) -> Self::Elem;

    fn elements(&self) -> Vec<Self::Elem>;

    fn format_elem(&self, a: Self::Elem) -> String;
}
