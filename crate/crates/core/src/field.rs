//! Non-archimedean local fields described by their type `(p, f, e, delta, r)`.
//!
//! `p` is the residual characteristic, `f` the absolute residual degree of the
//! center, `e` the absolute ramification index of the center (`Infinite` in
//! positive characteristic), `delta` the residual degree over the center and
//! `r` the Hasse invariant, stored reduced modulo `delta`. Finite `e` fields
//! may carry an explicit Eisenstein polynomial; without one the field is
//! `Q_{p^f}[p^{1/e}]`, i.e. `P = X^e - p`.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::residue::irreducible::is_prime;
use crate::residue::{rings_isomorphic, Budget, ResidueRing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ramification {
    Finite(u32),
    Infinite,
}

impl Ramification {
    pub fn finite(self) -> Option<u32> {
        match self {
            Ramification::Finite(e) => Some(e),
            Ramification::Infinite => None,
        }
    }
}

impl fmt::Display for Ramification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ramification::Finite(e) => write!(f, "{e}"),
            Ramification::Infinite => f.write_str("inf"),
        }
    }
}

/// Coefficient of the Eisenstein polynomial, an element of the unramified
/// coefficient ring `Z_{p^f}`.
///
/// `Digits` are little-endian base-p digits, each digit a residue-field code
/// `sum_l c_l p^l` on the polynomial basis of F_{p^f}; missing high digits are
/// zero. `Int` is an ordinary (possibly negative) integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EisensteinCoeff {
    Int(i64),
    Digits(Vec<u32>),
}

impl EisensteinCoeff {
    /// p-adic valuation; `None` for zero.
    pub fn valuation(&self, p: u64) -> Option<u32> {
        match self {
            EisensteinCoeff::Int(0) => None,
            EisensteinCoeff::Int(n) => {
                let mut n = n.unsigned_abs();
                let mut v = 0;
                while n % p == 0 {
                    n /= p;
                    v += 1;
                }
                Some(v)
            }
            EisensteinCoeff::Digits(d) => d.iter().position(|&x| x != 0).map(|v| v as u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldDescriptor {
    pub p: u64,
    pub f: u32,
    pub e: Ramification,
    pub delta: u32,
    pub r: u32,
    pub eisenstein: Option<Vec<EisensteinCoeff>>,
}

impl FieldDescriptor {
    pub fn new(p: u64, f: u32, e: Ramification, delta: u32, r: u32) -> Self {
        FieldDescriptor {
            p,
            f,
            e,
            delta,
            r,
            eisenstein: None,
        }
    }

    /// `Q_p`.
    pub fn qp(p: u64) -> Self {
        Self::new(p, 1, Ramification::Finite(1), 1, 0)
    }

    /// `Q_{p^f}[p^{1/e}]`.
    pub fn ramified_root(p: u64, f: u32, e: u32) -> Self {
        Self::new(p, f, Ramification::Finite(e), 1, 0)
    }

    /// `F_{p^f}((t))`.
    pub fn laurent(p: u64, f: u32) -> Self {
        Self::new(p, f, Ramification::Infinite, 1, 0)
    }

    pub fn with_eisenstein(mut self, coeffs: Vec<EisensteinCoeff>) -> Self {
        self.eisenstein = Some(coeffs);
        self
    }

    pub fn is_commutative(&self) -> bool {
        self.delta == 1
    }

    pub fn characteristic_zero(&self) -> bool {
        matches!(self.e, Ramification::Finite(_))
    }

    /// Size of the residue field of K (not of its center).
    pub fn residue_field_size(&self) -> u64 {
        self.p.pow(self.f * self.delta)
    }

    /// Coefficients `a_0 .. a_{e-1}` of the Eisenstein polynomial, explicit or
    /// the default `X^e - p`. `None` in positive characteristic.
    pub fn eisenstein_coefficients(&self) -> Option<Vec<EisensteinCoeff>> {
        let e = self.e.finite()?;
        Some(match &self.eisenstein {
            Some(c) => c.clone(),
            None => {
                let mut c = vec![EisensteinCoeff::Int(0); e as usize];
                c[0] = EisensteinCoeff::Int(-(self.p as i64));
                c
            }
        })
    }

    pub fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("p".into(), Value::from(self.p));
        map.insert("f".into(), Value::from(self.f));
        map.insert(
            "e".into(),
            match self.e {
                Ramification::Finite(e) => Value::from(e),
                Ramification::Infinite => Value::from("inf"),
            },
        );
        map.insert("delta".into(), Value::from(self.delta));
        map.insert("r".into(), Value::from(self.r));
        if let Some(coeffs) = &self.eisenstein {
            let arr = coeffs
                .iter()
                .map(|c| match c {
                    EisensteinCoeff::Int(n) => Value::from(*n),
                    EisensteinCoeff::Digits(d) => Value::from(
                        d.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
                    ),
                })
                .collect();
            map.insert("eisenstein".into(), Value::Array(arr));
        }
        Value::Object(map)
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.p, self.f, self.e, self.delta, self.r
        )?;
        if let Some(c) = &self.eisenstein {
            write!(f, "[P:")?;
            for (i, a) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                match a {
                    EisensteinCoeff::Int(n) => write!(f, "{n}")?,
                    EisensteinCoeff::Digits(d) => write!(f, "{d:?}")?,
                }
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl Serialize for FieldDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        descriptor_from_value(&v).map_err(serde::de::Error::custom)
    }
}

fn field_u64(obj: &serde_json::Map<String, Value>, key: &str) -> Result<u64> {
    obj.get(key)
        .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))?
        .as_u64()
        .ok_or_else(|| Error::Parse(format!("`{key}` must be a non-negative integer")))
}

fn parse_coeff(v: &Value) -> Result<EisensteinCoeff> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(EisensteinCoeff::Int)
            .ok_or_else(|| Error::Parse(format!("eisenstein coefficient {n} is not an integer"))),
        Value::String(s) => {
            let digits = s
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad digit `{t}` in `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EisensteinCoeff::Digits(digits))
        }
        other => Err(Error::Parse(format!(
            "eisenstein coefficient must be an integer or digit string, got {other}"
        ))),
    }
}

/// Reads a descriptor from an already parsed JSON value. Structural problems
/// are `Parse` errors; the result is not yet validated.
pub fn descriptor_from_value(v: &Value) -> Result<FieldDescriptor> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("descriptor must be a JSON object".into()))?;
    for key in obj.keys() {
        if !["p", "f", "e", "delta", "r", "eisenstein"].contains(&key.as_str()) {
            return Err(Error::Parse(format!("unknown key `{key}`")));
        }
    }
    let p = field_u64(obj, "p")?;
    let f = field_u64(obj, "f")? as u32;
    let delta = field_u64(obj, "delta")? as u32;
    let r = field_u64(obj, "r")? as u32;
    let e = match obj.get("e") {
        Some(Value::String(s)) if s.eq_ignore_ascii_case("inf") => Ramification::Infinite,
        Some(Value::Number(n)) => Ramification::Finite(
            n.as_u64()
                .ok_or_else(|| Error::Parse("`e` must be a positive integer or \"inf\"".into()))?
                as u32,
        ),
        Some(_) => return Err(Error::Parse("`e` must be a positive integer or \"inf\"".into())),
        None => return Err(Error::Parse("missing key `e`".into())),
    };
    if delta >= 1 && r >= delta {
        return Err(Error::Parse(format!(
            "r = {r} is not reduced modulo delta = {delta}"
        )));
    }
    let eisenstein = match obj.get("eisenstein") {
        None | Some(Value::Null) => None,
        Some(Value::Array(a)) => Some(a.iter().map(parse_coeff).collect::<Result<Vec<_>>>()?),
        Some(_) => return Err(Error::Parse("`eisenstein` must be an array".into())),
    };
    Ok(FieldDescriptor {
        p,
        f,
        e,
        delta,
        r,
        eisenstein,
    })
}

/// Parses and validates a descriptor document.
pub fn parse_descriptor(text: &str) -> Result<FieldDescriptor> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let desc = descriptor_from_value(&v)?;
    let report = validate(&desc);
    if !report.is_empty() {
        return Err(Error::InvalidDescriptor(report));
    }
    Ok(desc)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lists every violated descriptor invariant; empty means valid.
pub fn validate(desc: &FieldDescriptor) -> Vec<String> {
    let mut out = Vec::new();
    if !is_prime(desc.p) {
        out.push(format!("p not prime ({})", desc.p));
    }
    if desc.f == 0 {
        out.push("f must be at least 1".into());
    }
    if desc.delta == 0 {
        out.push("delta must be at least 1".into());
    } else if desc.r >= desc.delta {
        out.push(format!(
            "r = {} not reduced modulo delta = {}",
            desc.r, desc.delta
        ));
    } else if desc.delta == 1 && desc.r != 0 {
        out.push("r must be 0 when delta = 1".into());
    } else if desc.delta > 1 && gcd(desc.r, desc.delta) != 1 {
        out.push(format!(
            "r = {} does not generate Z/{}Z",
            desc.r, desc.delta
        ));
    }
    match (desc.e, &desc.eisenstein) {
        (Ramification::Finite(0), _) => out.push("e must be at least 1".into()),
        (Ramification::Infinite, Some(_)) => {
            out.push("eisenstein data given for e = inf (the field is unique)".into())
        }
        (Ramification::Finite(e), Some(coeffs)) => {
            if coeffs.len() != e as usize {
                out.push(format!(
                    "eisenstein polynomial needs {e} coefficients, got {}",
                    coeffs.len()
                ));
            }
            if is_prime(desc.p) && desc.f >= 1 {
                let q = desc.p.checked_pow(desc.f).unwrap_or(u64::MAX);
                for (i, c) in coeffs.iter().enumerate() {
                    if let EisensteinCoeff::Digits(d) = c {
                        if d.iter().any(|&x| x as u64 >= q) {
                            out.push(format!("a_{i} has a digit outside [0, {q})"));
                        }
                    }
                    let v = c.valuation(desc.p);
                    if i == 0 {
                        if v != Some(1) {
                            out.push("a_0 must have valuation exactly 1".into());
                        }
                    } else if v == Some(0) {
                        out.push(format!("a_{i} must have valuation at least 1"));
                    }
                }
            }
        }
        _ => {}
    }
    out
}

/// The positive-characteristic field of the same `(p, f, delta, r)`, which
/// the finite-`e` fields of that type converge to.
pub fn positive_char_limit(desc: &FieldDescriptor) -> FieldDescriptor {
    FieldDescriptor {
        e: Ramification::Infinite,
        eisenstein: None,
        ..desc.clone()
    }
}

/// Largest `R <= r_max` such that `O/π^R` of `a` and `b` are isomorphic.
///
/// Rings are compared for `R = 1, 2, ..` and the scan stops at the first
/// mismatch; a ring larger than `budget.max_iso` aborts with
/// `BudgetExceeded`. The distance between the fields is `exp(-R)`, capped at
/// `exp(-r_max)`.
pub fn closeness(
    a: &FieldDescriptor,
    b: &FieldDescriptor,
    r_max: u32,
    budget: &Budget,
) -> Result<u32> {
    if r_max == 0 {
        return Err(Error::InvalidInput("r_max must be positive".into()));
    }
    for r in 1..=r_max {
        let ra = ResidueRing::build(a, r, budget)?;
        let rb = ResidueRing::build(b, r, budget)?;
        if rings_isomorphic(&ra, &rb, budget)?.is_mismatch() {
            return Ok(r - 1);
        }
    }
    Ok(r_max)
}
