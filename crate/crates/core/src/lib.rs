//! Residue rings of local fields, lattice balls in their Bruhat-Tits
//! buildings, and exact combinatorial checks on those balls.

pub mod budget;
pub mod building;
pub mod canon;
pub mod chain;
pub mod error;
pub mod field;
pub mod geometry;
pub mod germs;
pub mod graph;
pub mod lattice;
pub mod residue;

pub use budget::Budget;
pub use chain::ChainRing;
pub use error::{Error, Result};
pub use field::{closeness, parse_descriptor, validate, FieldDescriptor, Ramification};
pub use residue::{
    frobenius_lift, krasner_witness, rings_isomorphic, IsoOutcome, ResidueRing, RingAutomorphism,
    RingIsomorphism, RingKind,
};
