//! Isomorphism testing between residue rings.
//!
//! A finite chain ring with residue field `F_q` is generated by a Teichmüller
//! lift `ζ` of a primitive residue element and a uniformizer `π`: every
//! element is uniquely `sum_{m<R} t_m π^m` with `t_m` Teichmüller. An
//! isomorphism is therefore fixed by the images of `ζ` (a Teichmüller element
//! over a Galois conjugate of the residue of `ζ`) and `π` (any element of
//! valuation one). The search enumerates those pairs and verifies each
//! induced map on all pairs of elements.

use crate::budget::Budget;
use crate::chain::ChainRing;
use crate::error::{Error, Result};
use crate::field::{positive_char_limit, validate, FieldDescriptor};

use super::ring::ResidueRing;

/// An explicit bijection `source code -> target code` that preserves
/// addition and multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingIsomorphism {
    pub map: Vec<u32>,
}

impl RingIsomorphism {
    pub fn apply(&self, a: u32) -> u32 {
        self.map[a as usize]
    }

    /// Exhaustive check of bijectivity and both operations.
    pub fn verify(&self, a: &ResidueRing, b: &ResidueRing) -> bool {
        verify_map(a, b, &self.map)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoOutcome {
    Witness(RingIsomorphism),
    Mismatch {
        invariant: String,
        left: String,
        right: String,
    },
}

impl IsoOutcome {
    pub fn is_mismatch(&self) -> bool {
        matches!(self, IsoOutcome::Mismatch { .. })
    }

    pub fn witness(&self) -> Option<&RingIsomorphism> {
        match self {
            IsoOutcome::Witness(w) => Some(w),
            IsoOutcome::Mismatch { .. } => None,
        }
    }
}

fn verify_map(a: &ResidueRing, b: &ResidueRing, map: &[u32]) -> bool {
    if map.len() as u64 != a.size() || a.size() != b.size() {
        return false;
    }
    let mut seen = vec![false; map.len()];
    for &y in map {
        if y as u64 >= b.size() || seen[y as usize] {
            return false;
        }
        seen[y as usize] = true;
    }
    if map[1] != b.one() {
        return false;
    }
    let n = a.size() as u32;
    for x in 0..n {
        for y in 0..n {
            if map[a.add(x, y) as usize] != b.add(map[x as usize], map[y as usize]) {
                return false;
            }
            if map[a.mul(x, y) as usize] != b.mul(map[x as usize], map[y as usize]) {
                return false;
            }
        }
    }
    true
}

fn additive_order_of_one(r: &ResidueRing) -> u64 {
    let mut acc = r.one();
    let mut k = 1;
    while acc != r.zero() {
        acc = r.add(acc, r.one());
        k += 1;
    }
    k
}

fn element_order(r: &ResidueRing, u: u32) -> u64 {
    let mut acc = u;
    let mut k = 1;
    while acc != r.one() {
        acc = r.mul(acc, u);
        k += 1;
    }
    k
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn unit_exponent(r: &ResidueRing) -> u64 {
    r.elements()
        .into_iter()
        .filter(|&u| r.is_unit(u))
        .fold(1, |acc, u| {
            let o = element_order(r, u);
            acc / gcd(acc, o) * o
        })
}

/// Multiplicative structure of the residue field seen through digit codes.
struct ResidueField<'a> {
    ring: &'a ResidueRing,
}

impl ResidueField<'_> {
    fn mul(&self, a: u32, b: u32) -> u32 {
        let r = self.ring;
        r.residue_digit(r.mul(r.residue_lift(a), r.residue_lift(b)))
    }

    fn pow(&self, a: u32, e: u64) -> u32 {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    fn order(&self, a: u32) -> u64 {
        let mut acc = a;
        let mut k = 1;
        while acc != 1 {
            acc = self.mul(acc, a);
            k += 1;
        }
        k
    }

    fn primitive(&self) -> u32 {
        let q = self.ring.residue_size();
        (1..q as u32)
            .find(|&a| self.order(a) == q - 1)
            .expect("the multiplicative group of a finite field is cyclic")
    }
}

fn teichmuller(r: &ResidueRing, a: u32) -> u32 {
    let q = r.residue_size();
    let mut y = a;
    loop {
        let next = r.pow(y, q);
        if next == y {
            return y;
        }
        y = next;
    }
}

/// Teichmüller expansion coefficients (as residue digits) of every element.
fn expansions(r: &ResidueRing, teich: &[u32]) -> Vec<Vec<u32>> {
    let big_r = r.nilpotency();
    r.elements()
        .into_iter()
        .map(|a| {
            let mut out = Vec::with_capacity(big_r as usize);
            let mut cur = a;
            for m in 0..big_r {
                let d = r.residue_digit(cur);
                out.push(d);
                if m + 1 < big_r {
                    let rest = r.sub(cur, teich[d as usize]);
                    cur = r.div_pi_right(rest, 1);
                }
            }
            out
        })
        .collect()
}

/// Searches for a ring isomorphism, or returns the first distinguishing
/// invariant.
pub fn rings_isomorphic(a: &ResidueRing, b: &ResidueRing, budget: &Budget) -> Result<IsoOutcome> {
    macro_rules! check {
        ($name:expr, $x:expr, $y:expr) => {{
            let (x, y) = ($x, $y);
            if x != y {
                return Ok(IsoOutcome::Mismatch {
                    invariant: $name.to_string(),
                    left: x.to_string(),
                    right: y.to_string(),
                });
            }
        }};
    }
    check!("size", a.size(), b.size());
    check!("residue field size", a.residue_size(), b.residue_size());
    check!("nilpotency index", a.nilpotency(), b.nilpotency());
    let n = a.size();
    if n > budget.max_iso {
        return Err(Error::budget("ring isomorphism search", n, budget.max_iso));
    }
    check!(
        "additive order of 1",
        additive_order_of_one(a),
        additive_order_of_one(b)
    );
    let pa = a.from_int(a.p() as i64);
    let pb = b.from_int(b.p() as i64);
    check!("valuation of p", a.valuation(pa), b.valuation(pb));
    check!("commutative", a.is_commutative(), b.is_commutative());
    check!("unit group exponent", unit_exponent(a), unit_exponent(b));

    let q = a.residue_size();
    let field = ResidueField { ring: a };
    let alpha = field.primitive();
    let mut log = vec![u64::MAX; q as usize];
    {
        let mut acc = 1u32;
        for j in 0..q - 1 {
            log[acc as usize] = j;
            acc = field.mul(acc, alpha);
        }
    }
    let teich_a: Vec<u32> = (0..q as u32)
        .map(|d| teichmuller(a, a.residue_lift(d)))
        .collect();
    let exp_a = expansions(a, &teich_a);
    let p = a.p();
    let big_f = {
        let mut k = 1;
        let mut acc = p;
        while acc < q {
            acc *= p;
            k += 1;
        }
        k
    };
    let conjugates: Vec<u32> = (0..big_f).map(|i| field.pow(alpha, p.pow(i))).collect();

    let zeta_candidates: Vec<u32> = b
        .elements()
        .into_iter()
        .filter(|&y| conjugates.contains(&b.residue_digit(y)) && b.pow(y, q) == y)
        .collect();
    let pi_candidates: Vec<u32> = b
        .elements()
        .into_iter()
        .filter(|&y| b.valuation(y) == 1.min(b.nilpotency()))
        .collect();

    let pi_a = a.uniformizer();
    let zeta_a = teich_a[alpha as usize];
    let big_r = a.nilpotency();
    for &zeta_b in &zeta_candidates {
        // images of Teichmüller elements: ζ^j -> ζ_b^j
        let mut teich_image = vec![b.zero(); q as usize];
        let mut acc = b.one();
        let mut powers = Vec::with_capacity(q as usize);
        for _ in 0..q - 1 {
            powers.push(acc);
            acc = b.mul(acc, zeta_b);
        }
        for d in 1..q as usize {
            teich_image[d] = powers[log[d] as usize];
        }
        for &pi_b in &pi_candidates {
            let mut pi_pows = vec![b.one()];
            for _ in 1..big_r {
                pi_pows.push(b.mul(*pi_pows.last().unwrap(), pi_b));
            }
            let image = |x: u32| -> u32 {
                exp_a[x as usize]
                    .iter()
                    .enumerate()
                    .fold(b.zero(), |acc, (m, &d)| {
                        b.add(acc, b.mul(teich_image[d as usize], pi_pows[m]))
                    })
            };
            // cheap relations before the exhaustive check
            if image(pa) != pb {
                continue;
            }
            if image(a.mul(pi_a, zeta_a)) != b.mul(pi_b, zeta_b) {
                continue;
            }
            if image(a.mul(zeta_a, pi_a)) != b.mul(zeta_b, pi_b) {
                continue;
            }
            let map: Vec<u32> = (0..n as u32).map(image).collect();
            if verify_map(a, b, &map) {
                return Ok(IsoOutcome::Witness(RingIsomorphism { map }));
            }
        }
    }
    Ok(IsoOutcome::Mismatch {
        invariant: "no isomorphism (exhaustive search)".into(),
        left: a.descriptor().to_string(),
        right: b.descriptor().to_string(),
    })
}

/// The isomorphism `O_e ≅ F_q[t]/(t^e)` for a commutative field of finite
/// ramification index `e`: `X -> t`, each digit passed through the residue
/// field. Verified on all pairs before being returned.
pub fn krasner_witness(desc: &FieldDescriptor, budget: &Budget) -> Result<RingIsomorphism> {
    let report = validate(desc);
    if !report.is_empty() {
        return Err(Error::InvalidDescriptor(report));
    }
    let e = desc
        .e
        .finite()
        .ok_or_else(|| Error::InvalidInput("krasner_witness needs finite e".into()))?;
    if desc.delta != 1 {
        return Err(Error::InvalidInput(
            "krasner_witness needs a commutative field (delta = 1)".into(),
        ));
    }
    let source = ResidueRing::build(desc, e, budget)?;
    let target = ResidueRing::build(&positive_char_limit(desc), e, budget)?;
    if source.size() > budget.max_iso {
        return Err(Error::budget("krasner witness check", source.size(), budget.max_iso));
    }
    // digit m of O_e is the coefficient of X^m (no p-adic digits below
    // position e), digit m of F_q[t]/(t^e) the coefficient of t^m
    let map: Vec<u32> = source
        .elements()
        .into_iter()
        .map(|a| target.from_digits(&source.digits(a)))
        .collect::<Result<_>>()?;
    if !verify_map(&source, &target, &map) {
        return Err(Error::Verification(format!(
            "digitwise map O_{e} -> F_q[t]/(t^{e}) is not a ring isomorphism for {desc}"
        )));
    }
    Ok(RingIsomorphism { map })
}
