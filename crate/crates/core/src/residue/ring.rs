//! Construction of `O_R = O / π^R O` for every kind of local field.
//!
//! The presentation is layered:
//!
//! * a coefficient ring `A`: the Galois ring `GR(p^N, f·delta)` in
//!   characteristic zero, or `F_{p^{f·delta}}[t]/(t^N)` in characteristic p;
//! * an Eisenstein layer `B = A[X]/(P)` when `e > 1`;
//! * a twisted layer `K = B<x>/(x^delta = π_L, b x = x σ^{f r}(b))` when
//!   `delta > 1`, σ the Frobenius lift on `A`.
//!
//! An element `sum_s x^s b_s`, `b_s = sum_i c_{s,i} X^i`,
//! `c_{s,i} = sum_j [d] p^j` (or `t^j`) stores digit `d` at position
//! `m = s + delta (i + e j)`, which is exactly the valuation of that monomial.
//! Products are computed at the uniform precision `N = ceil(R / (e delta))`
//! and then truncated per position, so coefficient `c_{s,i}` effectively
//! lives modulo `p^{ceil((R - s - delta i) / (e delta))}`.
//!
//! Elements are `u32` codes `sum_m digit_m q^m`, `q` the residue field size.

use std::sync::OnceLock;

use super::galois::GaloisRing;
use crate::budget::Budget;
use crate::chain::ChainRing;
use crate::error::{Error, Result};
use crate::field::{validate, EisensteinCoeff, FieldDescriptor, Ramification};

/// Rings with at most this many elements get full addition and
/// multiplication tables.
pub const TABLE_LIMIT: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RingKind {
    EqualChar,
    Unramified,
    Eisenstein,
    Skew,
}

type CElem = Vec<u64>;
type BElem = Vec<CElem>;
type KElem = Vec<BElem>;

#[derive(Debug, Clone)]
enum Coeff {
    Galois(GaloisRing),
    /// `F_q[t]/(t^len)`; element layout is `len` blocks of field coordinates.
    Series { field: GaloisRing, len: usize },
}

impl Coeff {
    fn width(&self) -> usize {
        match self {
            Coeff::Galois(g) => g.degree(),
            Coeff::Series { field, len } => field.degree() * len,
        }
    }

    fn zero(&self) -> CElem {
        vec![0; self.width()]
    }

    fn one(&self) -> CElem {
        let mut a = self.zero();
        a[0] = 1;
        a
    }

    fn from_int(&self, n: i64) -> CElem {
        match self {
            Coeff::Galois(g) => g.from_int(n),
            Coeff::Series { field, .. } => {
                let mut a = self.zero();
                a[0] = n.rem_euclid(field.p() as i64) as u64;
                a
            }
        }
    }

    fn add(&self, a: &[u64], b: &[u64]) -> CElem {
        match self {
            Coeff::Galois(g) => g.add(a, b),
            Coeff::Series { field, .. } => field.add(a, b),
        }
    }

    fn neg(&self, a: &[u64]) -> CElem {
        match self {
            Coeff::Galois(g) => g.neg(a),
            Coeff::Series { field, .. } => field.neg(a),
        }
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> CElem {
        match self {
            Coeff::Galois(g) => g.mul(a, b),
            Coeff::Series { field, len } => {
                let w = field.degree();
                let mut out = self.zero();
                for i in 0..*len {
                    let ai = &a[i * w..(i + 1) * w];
                    if ai.iter().all(|&c| c == 0) {
                        continue;
                    }
                    for j in 0..(*len - i) {
                        let bj = &b[j * w..(j + 1) * w];
                        if bj.iter().all(|&c| c == 0) {
                            continue;
                        }
                        let prod = field.mul(ai, bj);
                        let k = i + j;
                        let sum = field.add(&out[k * w..(k + 1) * w], &prod);
                        out[k * w..(k + 1) * w].copy_from_slice(&sum);
                    }
                }
                out
            }
        }
    }

    fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    /// σ^k, σ reducing to the p-th power map on the residue field.
    fn frobenius(&self, a: &[u64], k: usize) -> CElem {
        match self {
            Coeff::Galois(g) => g.frobenius(a, k),
            Coeff::Series { field, len } => {
                let w = field.degree();
                let mut out = Vec::with_capacity(a.len());
                for i in 0..*len {
                    out.extend(field.frobenius(&a[i * w..(i + 1) * w], k));
                }
                out
            }
        }
    }

    fn digit(&self, a: &[u64], j: u32) -> u32 {
        match self {
            Coeff::Galois(g) => g.digit(a, j),
            Coeff::Series { field, .. } => {
                let w = field.degree();
                let j = j as usize;
                field.digit(&a[j * w..(j + 1) * w], 0)
            }
        }
    }

    fn add_digit(&self, a: &mut [u64], code: u32, j: u32) {
        match self {
            Coeff::Galois(g) => g.add_digit(a, code, j),
            Coeff::Series { field, .. } => {
                let w = field.degree();
                let j = j as usize;
                field.add_digit(&mut a[j * w..(j + 1) * w], code, 0)
            }
        }
    }

    /// p (characteristic zero) or t.
    fn uniformizer(&self) -> CElem {
        match self {
            Coeff::Galois(g) => g.from_int(g.p() as i64),
            Coeff::Series { field, len } => {
                let mut a = self.zero();
                if *len > 1 {
                    a[field.degree()] = 1;
                }
                a
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Presentation {
    coeff: Coeff,
    e: usize,
    /// `a_0 .. a_{e-1}` of the Eisenstein polynomial, embedded in `A`.
    eis: Vec<CElem>,
    delta: usize,
    /// exponent of σ in the twist `b x = x σ^twist(b)`
    twist: usize,
    pi_center: BElem,
}

impl Presentation {
    fn b_zero(&self) -> BElem {
        vec![self.coeff.zero(); self.e]
    }

    fn b_add(&self, a: &BElem, b: &BElem) -> BElem {
        a.iter().zip(b).map(|(x, y)| self.coeff.add(x, y)).collect()
    }

    fn b_neg(&self, a: &BElem) -> BElem {
        a.iter().map(|x| self.coeff.neg(x)).collect()
    }

    fn b_mul(&self, a: &BElem, b: &BElem) -> BElem {
        let e = self.e;
        if e == 1 {
            return vec![self.coeff.mul(&a[0], &b[0])];
        }
        let mut prod = vec![self.coeff.zero(); 2 * e - 1];
        for (i, x) in a.iter().enumerate() {
            if self.coeff.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if self.coeff.is_zero(y) {
                    continue;
                }
                let t = self.coeff.mul(x, y);
                prod[i + j] = self.coeff.add(&prod[i + j], &t);
            }
        }
        // X^e = -(a_0 + a_1 X + .. + a_{e-1} X^{e-1})
        for top in (e..2 * e - 1).rev() {
            let c = std::mem::replace(&mut prod[top], self.coeff.zero());
            if self.coeff.is_zero(&c) {
                continue;
            }
            for k in 0..e {
                let t = self.coeff.mul(&c, &self.eis[k]);
                let idx = top - e + k;
                prod[idx] = self.coeff.add(&prod[idx], &self.coeff.neg(&t));
            }
        }
        prod.truncate(e);
        prod
    }

    fn b_frobenius(&self, a: &BElem, k: usize) -> BElem {
        a.iter().map(|c| self.coeff.frobenius(c, k)).collect()
    }

    fn k_add(&self, a: &KElem, b: &KElem) -> KElem {
        a.iter().zip(b).map(|(x, y)| self.b_add(x, y)).collect()
    }

    fn k_neg(&self, a: &KElem) -> KElem {
        a.iter().map(|x| self.b_neg(x)).collect()
    }

    /// `(x^s b)(x^t b') = x^{s+t} σ^{twist t}(b) b'`, with `x^delta = π_L`.
    fn k_mul(&self, a: &KElem, b: &KElem) -> KElem {
        let d = self.delta;
        if d == 1 {
            return vec![self.b_mul(&a[0], &b[0])];
        }
        let mut out = vec![self.b_zero(); d];
        for (s, bs) in a.iter().enumerate() {
            if bs.iter().all(|c| self.coeff.is_zero(c)) {
                continue;
            }
            for (t, bt) in b.iter().enumerate() {
                if bt.iter().all(|c| self.coeff.is_zero(c)) {
                    continue;
                }
                let twisted = self.b_frobenius(bs, self.twist * t);
                let mut term = self.b_mul(&twisted, bt);
                let mut idx = s + t;
                if idx >= d {
                    idx -= d;
                    term = self.b_mul(&self.pi_center, &term);
                }
                out[idx] = self.b_add(&out[idx], &term);
            }
        }
        out
    }
}

#[derive(Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
}

/// The residue ring `O_R` of a local field.
#[derive(Debug)]
pub struct ResidueRing {
    descriptor: FieldDescriptor,
    nilpotency: u32,
    q: u64,
    size: u64,
    kind: RingKind,
    pres: Presentation,
    tables: OnceLock<Option<Tables>>,
    pi_right: OnceLock<Vec<u32>>,
}

impl Clone for ResidueRing {
    fn clone(&self) -> Self {
        ResidueRing {
            descriptor: self.descriptor.clone(),
            nilpotency: self.nilpotency,
            q: self.q,
            size: self.size,
            kind: self.kind,
            pres: self.pres.clone(),
            tables: OnceLock::new(),
            pi_right: OnceLock::new(),
        }
    }
}

fn embed_coefficient(g: &GaloisRing, f: u32, c: &EisensteinCoeff) -> CElem {
    match c {
        EisensteinCoeff::Int(n) => g.from_int(*n),
        EisensteinCoeff::Digits(digits) => {
            let eta = g.subring_generator(f as usize);
            let p = g.p();
            let mut eta_pows = vec![g.one()];
            for _ in 1..f {
                let next = g.mul(eta_pows.last().unwrap(), &eta);
                eta_pows.push(next);
            }
            let mut acc = g.zero();
            let mut pj = 1u64;
            for (j, &d) in digits.iter().enumerate() {
                if j as u32 >= g.precision() {
                    break;
                }
                let mut code = d as u64;
                for pow in &eta_pows {
                    let coord = code % p;
                    code /= p;
                    if coord != 0 {
                        acc = g.add(&acc, &g.scale(pow, coord * pj));
                    }
                }
                pj *= p;
            }
            acc
        }
    }
}

impl ResidueRing {
    /// Builds `O_R` for a valid descriptor.
    pub fn build(desc: &FieldDescriptor, r: u32, budget: &Budget) -> Result<Self> {
        let report = validate(desc);
        if !report.is_empty() {
            return Err(Error::InvalidDescriptor(report));
        }
        if r == 0 {
            return Err(Error::InvalidInput("R must be positive".into()));
        }
        let big_f = (desc.f * desc.delta) as usize;
        let q = desc
            .p
            .checked_pow(big_f as u32)
            .ok_or_else(|| Error::budget("residue field", u64::MAX, budget.max_ring))?;
        let size = q
            .checked_pow(r)
            .filter(|&s| s <= u32::MAX as u64)
            .unwrap_or(u64::MAX);
        if size > budget.max_ring {
            return Err(Error::budget("residue ring size", size, budget.max_ring));
        }
        let delta = desc.delta as usize;
        let (coeff, e, eis, kind) = match desc.e {
            Ramification::Infinite => {
                let len = (r as usize).div_ceil(delta);
                let field = GaloisRing::new(desc.p, big_f, 1);
                let kind = if delta > 1 {
                    RingKind::Skew
                } else {
                    RingKind::EqualChar
                };
                (Coeff::Series { field, len }, 1, Vec::new(), kind)
            }
            Ramification::Finite(e) => {
                let e = e as usize;
                let n = (r as usize).div_ceil(e * delta) as u32;
                let g = GaloisRing::new(desc.p, big_f, n);
                let kind = if delta > 1 {
                    RingKind::Skew
                } else if e > 1 {
                    RingKind::Eisenstein
                } else {
                    RingKind::Unramified
                };
                let eis = if e > 1 {
                    desc.eisenstein_coefficients()
                        .expect("finite e")
                        .iter()
                        .map(|c| embed_coefficient(&g, desc.f, c))
                        .collect()
                } else {
                    Vec::new()
                };
                (Coeff::Galois(g), e, eis, kind)
            }
        };
        let pi_center = {
            let mut b = vec![coeff.zero(); e];
            if e > 1 {
                b[1] = coeff.one();
            } else {
                b[0] = coeff.uniformizer();
            }
            b
        };
        let pres = Presentation {
            coeff,
            e,
            eis,
            delta,
            twist: (desc.f * desc.r) as usize,
            pi_center,
        };
        Ok(ResidueRing {
            descriptor: desc.clone(),
            nilpotency: r,
            q,
            size,
            kind,
            pres,
            tables: OnceLock::new(),
            pi_right: OnceLock::new(),
        })
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.descriptor
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn p(&self) -> u64 {
        self.descriptor.p
    }

    /// Ramification index of the center; `None` in positive characteristic.
    pub fn center_ramification(&self) -> Option<usize> {
        self.descriptor.e.finite().map(|e| e as usize)
    }

    fn position(&self, m: u32) -> (usize, usize, u32) {
        let d = self.pres.delta as u32;
        let e = self.pres.e as u32;
        let s = m % d;
        let u = m / d;
        (s as usize, (u % e) as usize, u / e)
    }

    fn decode(&self, code: u32) -> KElem {
        let mut k = vec![self.pres.b_zero(); self.pres.delta];
        let mut c = code as u64;
        for m in 0..self.nilpotency {
            let digit = (c % self.q) as u32;
            c /= self.q;
            if digit != 0 {
                let (s, i, j) = self.position(m);
                self.pres.coeff.add_digit(&mut k[s][i], digit, j);
            }
        }
        k
    }

    fn encode(&self, k: &KElem) -> u32 {
        let mut code = 0u64;
        let mut qm = 1u64;
        for m in 0..self.nilpotency {
            let (s, i, j) = self.position(m);
            code += self.pres.coeff.digit(&k[s][i], j) as u64 * qm;
            qm *= self.q;
        }
        code as u32
    }

    fn tables(&self) -> Option<&Tables> {
        self.tables
            .get_or_init(|| {
                if self.size > TABLE_LIMIT {
                    return None;
                }
                let n = self.size as usize;
                let decoded: Vec<KElem> = (0..n as u32).map(|c| self.decode(c)).collect();
                let mut add = vec![0u32; n * n];
                let mut mul = vec![0u32; n * n];
                for a in 0..n {
                    for b in 0..n {
                        add[a * n + b] = self.encode(&self.pres.k_add(&decoded[a], &decoded[b]));
                        mul[a * n + b] = self.encode(&self.pres.k_mul(&decoded[a], &decoded[b]));
                    }
                }
                let neg = decoded
                    .iter()
                    .map(|a| self.encode(&self.pres.k_neg(a)))
                    .collect();
                Some(Tables { add, mul, neg })
            })
            .as_ref()
    }

    fn structured_add(&self, a: u32, b: u32) -> u32 {
        self.encode(&self.pres.k_add(&self.decode(a), &self.decode(b)))
    }

    fn structured_mul(&self, a: u32, b: u32) -> u32 {
        self.encode(&self.pres.k_mul(&self.decode(a), &self.decode(b)))
    }

    /// `n · 1`.
    pub fn from_int(&self, n: i64) -> u32 {
        let mut k = vec![self.pres.b_zero(); self.pres.delta];
        k[0][0] = self.pres.coeff.from_int(n);
        self.encode(&k)
    }

    /// Digit vector, little-endian.
    pub fn digits(&self, a: u32) -> Vec<u32> {
        let mut c = a as u64;
        (0..self.nilpotency)
            .map(|_| {
                let d = (c % self.q) as u32;
                c /= self.q;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> Result<u32> {
        if digits.len() > self.nilpotency as usize {
            return Err(Error::Parse(format!(
                "element has {} digits, ring has R = {}",
                digits.len(),
                self.nilpotency
            )));
        }
        let mut code = 0u64;
        for &d in digits.iter().rev() {
            if d as u64 >= self.q {
                return Err(Error::Parse(format!("digit {d} outside [0, {})", self.q)));
            }
            code = code * self.q + d as u64;
        }
        Ok(code as u32)
    }

    pub fn parse_elem(&self, s: &str) -> Result<u32> {
        let digits = s
            .split('.')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad element `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.from_digits(&digits)
    }

    /// The twisting generator `x` of a skew ring (`x^delta = π_L`).
    pub fn skew_generator(&self) -> Option<u32> {
        (self.pres.delta > 1 && self.nilpotency > 1).then(|| self.uniformizer())
    }

    /// Image of the center's uniformizer `π_L`.
    pub fn center_uniformizer(&self) -> u32 {
        let mut k = vec![self.pres.b_zero(); self.pres.delta];
        k[0] = self.pres.pi_center.clone();
        self.encode(&k)
    }

    /// Elements of the commutative coefficient subring (digits only at
    /// positions divisible by delta).
    pub fn coefficient_elements(&self) -> Vec<u32> {
        let d = self.pres.delta as u32;
        (0..self.size as u32)
            .filter(|&a| {
                self.digits(a)
                    .iter()
                    .enumerate()
                    .all(|(m, &dg)| dg == 0 || m as u32 % d == 0)
            })
            .collect()
    }

    /// The twist `σ^{f r}` applied to a coefficient element.
    pub fn twist(&self, a: u32) -> u32 {
        let k = self.decode(a);
        let twisted: KElem = k
            .iter()
            .map(|b| self.pres.b_frobenius(b, self.pres.twist))
            .collect();
        self.encode(&twisted)
    }

    /// σ^k applied coefficientwise (the Frobenius lift on the unramified
    /// coefficients, fixing X and x).
    pub(crate) fn frobenius_coefficients(&self, a: u32, k: usize) -> u32 {
        let kk = self.decode(a);
        let out: KElem = kk.iter().map(|b| self.pres.b_frobenius(b, k)).collect();
        self.encode(&out)
    }

    fn pi_right_table(&self) -> &Vec<u32> {
        self.pi_right.get_or_init(|| {
            let n = self.size as usize;
            let pi = self.uniformizer();
            let mut table = vec![u32::MAX; n];
            for c in 0..n as u32 {
                let z = self.mul(c, pi);
                if table[z as usize] == u32::MAX {
                    table[z as usize] = c;
                }
            }
            table
        })
    }

    pub fn elem_string(&self, a: u32) -> String {
        self.digits(a)
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl ChainRing for ResidueRing {
    type Elem = u32;

    fn nilpotency(&self) -> u32 {
        self.nilpotency
    }

    fn residue_size(&self) -> u64 {
        self.q
    }

    fn is_commutative(&self) -> bool {
        self.pres.delta == 1
    }

    fn zero(&self) -> u32 {
        0
    }

    fn one(&self) -> u32 {
        1
    }

    fn uniformizer(&self) -> u32 {
        if self.nilpotency > 1 {
            self.q as u32
        } else {
            0
        }
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        match self.tables() {
            Some(t) => t.add[a as usize * self.size as usize + b as usize],
            None => self.structured_add(a, b),
        }
    }

    fn neg(&self, a: u32) -> u32 {
        match self.tables() {
            Some(t) => t.neg[a as usize],
            None => self.encode(&self.pres.k_neg(&self.decode(a))),
        }
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        match self.tables() {
            Some(t) => t.mul[a as usize * self.size as usize + b as usize],
            None => self.structured_mul(a, b),
        }
    }

    fn valuation(&self, a: u32) -> u32 {
        let mut c = a as u64;
        for m in 0..self.nilpotency {
            if c % self.q != 0 {
                return m;
            }
            c /= self.q;
        }
        self.nilpotency
    }

    fn truncate(&self, a: u32, k: u32) -> u32 {
        if k >= self.nilpotency {
            return a;
        }
        (a as u64 % self.q.pow(k)) as u32
    }

    fn div_pi_right(&self, a: u32, k: u32) -> u32 {
        debug_assert!(self.valuation(a) >= k);
        let table = self.pi_right_table();
        let mut c = a;
        for _ in 0..k {
            c = table[c as usize];
            debug_assert_ne!(c, u32::MAX);
        }
        c
    }

    fn residue_digit(&self, a: u32) -> u32 {
        (a as u64 % self.q) as u32
    }

    fn residue_lift(&self, d: u32) -> u32 {
        d
    }

    fn elements(&self) -> Vec<u32> {
        (0..self.size as u32).collect()
    }

    fn format_elem(&self, a: u32) -> String {
        self.elem_string(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(desc: FieldDescriptor, r: u32) -> ResidueRing {
        ResidueRing::build(&desc, r, &Budget::default()).unwrap()
    }

    #[test]
    fn equal_char_ring() {
        let r = ring(FieldDescriptor::laurent(2, 1), 2);
        assert_eq!(r.kind(), RingKind::EqualChar);
        assert_eq!(r.size(), 4);
        let t = r.uniformizer();
        assert_eq!(r.mul(t, t), 0);
        assert_eq!(r.add(1, 1), 0);
        assert_eq!(r.elements().iter().map(|&a| r.elem_string(a)).collect::<Vec<_>>(),
            vec!["0.0", "1.0", "0.1", "1.1"]);
    }

    #[test]
    fn z_mod_8() {
        let r = ring(FieldDescriptor::qp(2), 3);
        assert_eq!(r.kind(), RingKind::Unramified);
        assert_eq!(r.size(), 8);
        // codes coincide with integers mod 8 for p = 2, f = 1
        for a in 0..8u32 {
            for b in 0..8u32 {
                assert_eq!(r.add(a, b), (a + b) % 8);
                assert_eq!(r.mul(a, b), (a * b) % 8);
            }
        }
        assert_eq!(r.valuation(6), 1);
        assert_eq!(r.valuation(4), 2);
        assert_eq!(r.valuation(0), 3);
        assert_eq!(r.from_int(-1), 7);
    }

    #[test]
    fn sqrt2_ring_has_pi_squared_zero_at_r2() {
        let r = ring(FieldDescriptor::ramified_root(2, 1, 2), 2);
        assert_eq!(r.kind(), RingKind::Eisenstein);
        let pi = r.uniformizer();
        assert_eq!(r.mul(pi, pi), 0);
        assert_eq!(r.from_int(2), 0);
        let r3 = ring(FieldDescriptor::ramified_root(2, 1, 2), 3);
        let pi = r3.uniformizer();
        assert_eq!(r3.mul(pi, pi), r3.from_int(2));
        assert_ne!(r3.from_int(2), 0);
    }

    #[test]
    fn skew_relations() {
        let desc = FieldDescriptor::new(2, 1, Ramification::Finite(1), 2, 1);
        let r = ring(desc, 4);
        assert_eq!(r.kind(), RingKind::Skew);
        let x = r.skew_generator().unwrap();
        assert_eq!(r.mul(x, x), r.center_uniformizer());
        assert_eq!(r.center_uniformizer(), r.from_int(2));
        for a in r.coefficient_elements() {
            assert_eq!(r.mul(a, x), r.mul(x, r.twist(a)));
        }
        assert!(!r.is_commutative());
    }

    #[test]
    fn rejects_oversized_ring() {
        let budget = Budget {
            max_ring: 100,
            ..Budget::default()
        };
        let err = ResidueRing::build(&FieldDescriptor::qp(3), 5, &budget).unwrap_err();
        assert!(err.is_budget());
    }
}
