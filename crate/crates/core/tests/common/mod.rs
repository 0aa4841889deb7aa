#![allow(dead_code)]

use std::collections::BTreeSet;

use btlab_core::field::{FieldDescriptor, Ramification};
use btlab_core::{Budget, ChainRing, ResidueRing};

/// `Z/p^n` with plain integer arithmetic, written without any of the
/// library's ring code.
pub struct IntegerMod {
    pub p: u32,
    pub n: u32,
    pub modulus: u32,
}

impl IntegerMod {
    pub fn new(p: u32, n: u32) -> Self {
        IntegerMod {
            p,
            n,
            modulus: p.pow(n),
        }
    }
}

impl ChainRing for IntegerMod {
    type Elem = u32;

    fn nilpotency(&self) -> u32 {
        self.n
    }
    fn residue_size(&self) -> u64 {
        self.p as u64
    }
    fn is_commutative(&self) -> bool {
        true
    }
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1 % self.modulus
    }
    fn uniformizer(&self) -> u32 {
        self.p % self.modulus
    }
    fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.modulus
    }
    fn neg(&self, a: u32) -> u32 {
        (self.modulus - a) % self.modulus
    }
    fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.modulus as u64) as u32
    }
    fn valuation(&self, a: u32) -> u32 {
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        let mut x = a;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }
    fn truncate(&self, a: u32, k: u32) -> u32 {
        a % self.p.pow(k)
    }
    fn div_pi_right(&self, a: u32, k: u32) -> u32 {
        assert!(self.valuation(a) >= k);
        a / self.p.pow(k)
    }
    fn residue_digit(&self, a: u32) -> u32 {
        a % self.p
    }
    fn residue_lift(&self, d: u32) -> u32 {
        d
    }
    fn elements(&self) -> Vec<u32> {
        (0..self.modulus).collect()
    }
    fn format_elem(&self, a: u32) -> String {
        a.to_string()
    }
}

pub fn ring(desc: &FieldDescriptor, r: u32) -> ResidueRing {
    ResidueRing::build(desc, r, &Budget::default()).unwrap()
}

pub fn skew(p: u64, f: u32, e: Ramification, delta: u32, r: u32) -> FieldDescriptor {
    FieldDescriptor::new(p, f, e, delta, r)
}

/// Descriptor/precision pairs with `|O_R| <= 256`, covering all four kinds.
pub fn small_ring_fixtures() -> Vec<(FieldDescriptor, u32)> {
    vec![
        (FieldDescriptor::laurent(2, 1), 1),
        (FieldDescriptor::laurent(2, 1), 4),
        (FieldDescriptor::laurent(2, 2), 3),
        (FieldDescriptor::laurent(3, 1), 3),
        (FieldDescriptor::laurent(5, 1), 2),
        (FieldDescriptor::qp(2), 5),
        (FieldDescriptor::qp(3), 4),
        (FieldDescriptor::qp(7), 2),
        (FieldDescriptor::ramified_root(2, 2, 1), 3),
        (FieldDescriptor::ramified_root(3, 2, 1), 2),
        (FieldDescriptor::ramified_root(2, 1, 2), 6),
        (FieldDescriptor::ramified_root(2, 1, 3), 5),
        (FieldDescriptor::ramified_root(3, 1, 2), 4),
        (FieldDescriptor::ramified_root(2, 2, 2), 4),
        (skew(2, 1, Ramification::Finite(1), 2, 1), 4),
        (skew(2, 1, Ramification::Finite(2), 2, 1), 4),
        (skew(2, 1, Ramification::Infinite, 2, 1), 3),
        (skew(3, 1, Ramification::Finite(1), 2, 1), 2),
        (skew(2, 1, Ramification::Finite(1), 3, 1), 2),
        (skew(2, 1, Ramification::Finite(1), 3, 2), 2),
    ]
}

/// The left span of `gens` in `R^d` as an explicit element set.
pub fn span_set<R: ChainRing>(ring: &R, d: usize, gens: &[Vec<R::Elem>]) -> BTreeSet<Vec<R::Elem>> {
    let mut set: BTreeSet<Vec<R::Elem>> = BTreeSet::new();
    set.insert(vec![ring.zero(); d]);
    let elems = ring.elements();
    for g in gens {
        let mut next = BTreeSet::new();
        for v in &set {
            for &c in &elems {
                let w: Vec<R::Elem> = v
                    .iter()
                    .zip(g)
                    .map(|(&a, &b)| ring.add(a, ring.mul(c, b)))
                    .collect();
                next.insert(w);
            }
        }
        set = next;
    }
    set
}

/// Every vector of `R^d`.
pub fn all_vectors<R: ChainRing>(ring: &R, d: usize) -> Vec<Vec<R::Elem>> {
    let elems = ring.elements();
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                elems.iter().map(move |&e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    out
}
