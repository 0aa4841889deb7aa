//! Submodules of `(O_R)^d` in Howell echelon form.
//!
//! Modules are spanned by row vectors with scalars acting on the left, so
//! row operations are left multiplications. A canonical matrix has strictly
//! increasing pivot columns, each pivot equal to `π^k` with `k < R`, zeros to
//! the left of every pivot, and every entry sitting in a later pivot column
//! reduced to its digit truncation below that pivot's valuation. Together
//! with the Howell closure (every module element with zeros in the first `c`
//! columns is a combination of rows pivoting at or after `c`) this makes the
//! matrix a function of the module.

use std::fmt;

use rayon::prelude::*;

use crate::budget::Budget;
use crate::chain::ChainRing;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Submodule<E> {
    d: usize,
    /// `(column, valuation)` of each row's pivot.
    pivots: Vec<(usize, u32)>,
    rows: Vec<Vec<E>>,
}

impl<E: Copy> Submodule<E> {
    pub fn rank_ambient(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[Vec<E>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// `log_q |M|`.
    pub fn log_size(&self, nilpotency: u32) -> u32 {
        self.pivots.iter().map(|&(_, k)| nilpotency - k).sum()
    }

    /// Entries separated by `,`, rows by `;`, elements in the ring's digit
    /// notation. The zero module is the empty string.
    pub fn to_matrix_string<R: ChainRing<Elem = E>>(&self, ring: &R) -> String {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&a| ring.format_elem(a))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl<E: fmt::Debug> fmt::Display for Submodule<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows)
    }
}

fn scale_row<R: ChainRing>(ring: &R, c: R::Elem, row: &[R::Elem]) -> Vec<R::Elem> {
    row.iter().map(|&a| ring.mul(c, a)).collect()
}

/// `row -= c * other`
fn sub_scaled<R: ChainRing>(ring: &R, row: &mut [R::Elem], c: R::Elem, other: &[R::Elem]) {
    for (a, &b) in row.iter_mut().zip(other) {
        *a = ring.sub(*a, ring.mul(c, b));
    }
}

/// Canonical form of the left span of `generators` in `(O_R)^d`.
pub fn canonical_span<R: ChainRing>(ring: &R, d: usize, generators: &[Vec<R::Elem>]) -> Submodule<R::Elem> {
    let big_r = ring.nilpotency();
    let zero = ring.zero();
    let mut work: Vec<Vec<R::Elem>> = generators
        .iter()
        .inspect(|g| assert_eq!(g.len(), d, "generator of wrong length"))
        .filter(|g| g.iter().any(|&a| a != zero))
        .cloned()
        .collect();
    let mut pivots = Vec::new();
    let mut rows: Vec<Vec<R::Elem>> = Vec::new();
    for col in 0..d {
        if work.is_empty() {
            break;
        }
        let (best, k) = work
            .iter()
            .enumerate()
            .map(|(i, row)| (i, ring.valuation(row[col])))
            .min_by_key(|&(i, v)| (v, i))
            .unwrap();
        if k == big_r {
            continue;
        }
        let mut piv = work.swap_remove(best);
        let unit = ring.div_pi_right(piv[col], k);
        piv = scale_row(ring, ring.inverse(unit), &piv);
        debug_assert_eq!(piv[col], ring.pi_pow(k));
        for row in work.iter_mut() {
            let y = row[col];
            if y != zero {
                let c = ring.div_pi_right(y, k);
                sub_scaled(ring, row, c, &piv);
            }
        }
        if k > 0 {
            work.push(scale_row(ring, ring.pi_pow(big_r - k), &piv));
        }
        work.retain(|row| row.iter().any(|&a| a != zero));
        pivots.push((col, k));
        rows.push(piv);
    }
    debug_assert!(work.is_empty());
    for j in 0..rows.len() {
        let (col, k) = pivots[j];
        let (above, rest) = rows.split_at_mut(j);
        let pivot_row = &rest[0];
        for row in above.iter_mut() {
            let y = row[col];
            let t = ring.truncate(y, k);
            if t != y {
                let c = ring.div_pi_right(ring.sub(y, t), k);
                sub_scaled(ring, row, c, pivot_row);
            }
        }
    }
    Submodule { d, pivots, rows }
}

/// The full module `(O_R)^d`.
pub fn full_module<R: ChainRing>(ring: &R, d: usize) -> Submodule<R::Elem> {
    let rows: Vec<Vec<R::Elem>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { ring.one() } else { ring.zero() })
                .collect()
        })
        .collect();
    canonical_span(ring, d, &rows)
}

/// Whether `v` lies in `a`.
pub fn contains_vector<R: ChainRing>(ring: &R, a: &Submodule<R::Elem>, v: &[R::Elem]) -> bool {
    let mut v = v.to_vec();
    let mut next = 0;
    for col in 0..a.d {
        match a.pivots.get(next) {
            Some(&(pc, k)) if pc == col => {
                let y = v[col];
                if ring.valuation(y) < k {
                    return false;
                }
                if y != ring.zero() {
                    let c = ring.div_pi_right(y, k);
                    sub_scaled(ring, &mut v, c, &a.rows[next]);
                }
                next += 1;
            }
            _ => {
                if v[col] != ring.zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// `b ⊆ a`.
pub fn contains<R: ChainRing>(ring: &R, a: &Submodule<R::Elem>, b: &Submodule<R::Elem>) -> Result<bool> {
    if a.d != b.d {
        return Err(Error::InvalidInput(format!(
            "rank mismatch: {} vs {}",
            a.d, b.d
        )));
    }
    Ok(b.rows.iter().all(|row| contains_vector(ring, a, row)))
}

/// `π · a`.
pub fn scale_by_pi<R: ChainRing>(ring: &R, a: &Submodule<R::Elem>) -> Submodule<R::Elem> {
    let pi = ring.uniformizer();
    let rows: Vec<_> = a.rows.iter().map(|r| scale_row(ring, pi, r)).collect();
    canonical_span(ring, a.d, &rows)
}

/// Whether some element of the module has a unit coordinate, i.e. the
/// module is not inside `π (O_R)^d`.
pub fn is_vertex_module<R: ChainRing>(ring: &R, a: &Submodule<R::Elem>) -> bool {
    a.rows.iter().flatten().any(|&x| ring.is_unit(x))
}

/// Invariant factors `n_1 <= .. <= n_d` of a submodule of `(O_R)^d`,
/// missing rank padded with `R`. Only defined over commutative rings.
pub fn invariant_factors<R: ChainRing>(ring: &R, a: &Submodule<R::Elem>) -> Result<Vec<u32>> {
    if !ring.is_commutative() {
        return Err(Error::Unsupported(
            "invariant factors over a non-commutative ring".into(),
        ));
    }
    let big_r = ring.nilpotency();
    let mut m: Vec<Vec<R::Elem>> = a.rows.clone();
    let rows = m.len();
    let cols = a.d;
    let mut out = Vec::with_capacity(cols);
    for t in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = ring.valuation(x);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (k, i, j) = best.unwrap();
        if k == big_r {
            break;
        }
        m.swap(t, i);
        for row in m.iter_mut() {
            row.swap(t, j);
        }
        let unit = ring.div_pi_right(m[t][t], k);
        let inv = ring.inverse(unit);
        m[t] = scale_row(ring, inv, &m[t]);
        let pivot_row = m[t].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != t && row[t] != ring.zero() {
                let c = ring.div_pi_right(row[t], k);
                sub_scaled(ring, row, c, &pivot_row);
            }
        }
        // column clearing: entries of the pivot row beyond t are multiples
        // of π^k, and column operations act on the right
        for j in t + 1..cols {
            let y = m[t][j];
            if y != ring.zero() {
                let c = ring.div_pi_right(y, k);
                for row in m.iter_mut() {
                    let s = ring.mul(row[t], c);
                    row[j] = ring.sub(row[j], s);
                }
            }
        }
        out.push(k);
    }
    out.resize(cols, big_r);
    out.sort_unstable();
    Ok(out)
}

/// A shape of candidate echelon matrices: pivot columns and valuations.
fn shapes(d: usize, big_r: u32) -> Vec<Vec<(usize, u32)>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << d) {
        let cols: Vec<usize> = (0..d).filter(|c| mask & (1 << c) != 0).collect();
        let count = (big_r as usize).pow(cols.len() as u32);
        for idx in 0..count {
            let mut rest = idx;
            let mut shape = Vec::with_capacity(cols.len());
            for &c in &cols {
                shape.push((c, (rest % big_r as usize) as u32));
                rest /= big_r as usize;
            }
            out.push(shape);
        }
    }
    out.sort();
    out
}

/// Free entries of a shape as `(row, column, choices)`.
fn slots<E: Copy>(
    shape: &[(usize, u32)],
    d: usize,
    all: &[E],
    reduced: &[Vec<E>],
) -> Vec<(usize, usize, Vec<E>)> {
    let mut out = Vec::new();
    for (i, &(pc, _)) in shape.iter().enumerate() {
        for col in pc + 1..d {
            let choices = match shape.iter().find(|&&(c, _)| c == col) {
                Some(&(_, k)) => reduced[k as usize].clone(),
                None => all.to_vec(),
            };
            out.push((i, col, choices));
        }
    }
    out
}

/// All submodules of `(O_R)^d` not contained in `π (O_R)^d`, in canonical
/// form and sorted.
///
/// Candidates are enumerated per echelon shape and kept when they are a
/// fixed point of `canonical_span`; the candidate count is checked against
/// `budget.max_vertices` before any work starts.
pub fn enumerate_vertex_modules<R: ChainRing>(
    ring: &R,
    d: usize,
    budget: &Budget,
) -> Result<Vec<Submodule<R::Elem>>> {
    if d == 0 {
        return Err(Error::InvalidInput("rank must be positive".into()));
    }
    let big_r = ring.nilpotency();
    let all = ring.elements();
    let reduced: Vec<Vec<R::Elem>> = (0..=big_r)
        .map(|k| all.iter().copied().filter(|&a| ring.truncate(a, k) == a).collect())
        .collect();
    let shapes: Vec<_> = shapes(d, big_r)
        .into_iter()
        .map(|s| {
            let sl = slots(&s, d, &all, &reduced);
            (s, sl)
        })
        .collect();
    let mut total: u64 = 0;
    for (_, sl) in &shapes {
        let c = sl.iter().fold(1u64, |acc, (_, _, ch)| acc.saturating_mul(ch.len() as u64));
        total = total.saturating_add(c);
    }
    if total > budget.max_vertices {
        return Err(Error::budget("candidate module matrices", total, budget.max_vertices));
    }
    let per_shape: Vec<Vec<Submodule<R::Elem>>> = shapes
        .par_iter()
        .map(|(shape, sl)| {
            let mut found = Vec::new();
            let mut rows: Vec<Vec<R::Elem>> = shape
                .iter()
                .map(|&(pc, k)| {
                    let mut row = vec![ring.zero(); d];
                    row[pc] = ring.pi_pow(k);
                    row
                })
                .collect();
            let mut idx = vec![0usize; sl.len()];
            loop {
                for (s, &(i, col, ref ch)) in sl.iter().enumerate() {
                    rows[i][col] = ch[idx[s]];
                }
                let candidate = Submodule {
                    d,
                    pivots: shape.clone(),
                    rows: rows.clone(),
                };
                if is_vertex_module(ring, &candidate) && canonical_span(ring, d, &rows) == candidate {
                    found.push(candidate);
                }
                // odometer
                let mut s = 0;
                loop {
                    if s == sl.len() {
                        return found;
                    }
                    idx[s] += 1;
                    if idx[s] < sl[s].2.len() {
                        break;
                    }
                    idx[s] = 0;
                    s += 1;
                }
            }
        })
        .collect();
    let mut out: Vec<_> = per_shape.into_iter().flatten().collect();
    out.sort();
    Ok(out)
}
