//! Residue rings `O/π^R` of local fields and their comparison.

pub mod auto;
pub mod galois;
pub mod irreducible;
pub mod iso;
pub mod ring;

pub use crate::budget::Budget;
pub use auto::{frobenius_lift, RingAutomorphism};
pub use galois::GaloisRing;
pub use iso::{krasner_witness, rings_isomorphic, IsoOutcome, RingIsomorphism};
pub use ring::{ResidueRing, RingKind, TABLE_LIMIT};
