//! Balls in the building of `SL_d` over a local field, read off from the
//! submodules of `(O_R)^d`.
//!
//! A vertex is a submodule not contained in `π (O_R)^d`; the origin is the
//! full module. Two vertices `x, y` are adjacent when `π x ⊊ y ⊊ x` (or the
//! same with roles swapped). Edges are produced per vertex by walking the
//! subspaces of `x / π x` rather than by testing all pairs.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::chain::ChainRing;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::lattice::{
    canonical_span, enumerate_vertex_modules, full_module, invariant_factors, is_vertex_module,
    scale_by_pi, Submodule,
};

#[derive(Clone, Debug)]
pub struct Ball<E> {
    pub d: usize,
    pub radius: u32,
    pub modules: Vec<Submodule<E>>,
    pub origin: usize,
    /// Colors are the type labels (commutative rings only); distances are
    /// always present.
    pub graph: LabeledGraph,
    pub invariant_factors: Option<Vec<Vec<u32>>>,
}

impl<E> Ball<E> {
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn center_degree(&self) -> usize {
        self.graph.degree(self.origin)
    }

    /// Vertices at distance at most `radius` from the origin.
    pub fn within(&self, radius: u32) -> Vec<usize> {
        let dist = self.graph.dist.as_ref().expect("ball distances");
        (0..dist.len()).filter(|&v| dist[v] <= radius).collect()
    }
}

/// `(-sum n_i) mod d`.
pub fn type_label<R: ChainRing>(ring: &R, module: &Submodule<R::Elem>, d: usize) -> Result<u32> {
    let n = invariant_factors(ring, module)?;
    let total: u64 = n.iter().map(|&x| x as u64).sum();
    let d = d as u64;
    Ok(((d - total % d) % d) as u32)
}

/// Largest invariant factor.
pub fn distance_origin<R: ChainRing>(ring: &R, module: &Submodule<R::Elem>) -> Result<u32> {
    let n = invariant_factors(ring, module)?;
    if n.first() != Some(&0) {
        return Err(Error::InvalidInput(
            "module lies in π(O_R)^d and is not a vertex".into(),
        ));
    }
    Ok(*n.last().unwrap())
}

pub fn gaussian_binomial(n: u32, k: u32, q: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (q as u128).pow(n - i) - 1;
        den *= (q as u128).pow(i + 1) - 1;
    }
    (num / den) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeFormula {
    /// Number of proper nonzero subspaces of `F_q^d`.
    pub subspace_count: u64,
    /// `prod_{i=1}^d (q^i - 1)/(q - 1)`, kept for comparison.
    pub product_formula: u64,
}

pub fn degree_closed_form(q: u64, d: u32) -> DegreeFormula {
    let subspace_count = (1..d).map(|k| gaussian_binomial(d, k, q)).sum();
    let product_formula = (1..=d).map(|i| (q.pow(i) - 1) / (q - 1)).product();
    DegreeFormula {
        subspace_count,
        product_formula,
    }
}

/// Basis of `x / π x` chosen greedily among the rows of `x`.
fn quotient_basis<R: ChainRing>(ring: &R, x: &Submodule<R::Elem>) -> (Submodule<R::Elem>, Vec<Vec<R::Elem>>) {
    let pix = scale_by_pi(ring, x);
    let mut basis: Vec<Vec<R::Elem>> = Vec::new();
    let mut current = pix.clone();
    for row in x.rows() {
        let mut gens = current.rows().to_vec();
        gens.push(row.clone());
        let next = canonical_span(ring, x.rank_ambient(), &gens);
        if next != current {
            basis.push(row.clone());
            current = next;
        }
    }
    debug_assert_eq!(&current, x);
    (pix, basis)
}

/// Row-reduced echelon matrices over `F_q` (as residue digits) of every
/// subspace of `F_q^m`, the zero space included.
pub fn subspaces(q: u32, m: usize) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        let pivots: Vec<usize> = (0..m).filter(|c| mask & (1 << c) != 0).collect();
        // free slots: row i, columns after its pivot that are not pivots
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| {
                let pivots = &pivots;
                (p + 1..m).filter(move |c| !pivots.contains(c)).map(move |c| (i, c))
            })
            .collect();
        let count = (q as u64).pow(free.len() as u32);
        for idx in 0..count {
            let mut rows = vec![vec![0u32; m]; pivots.len()];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = 1;
            }
            let mut rest = idx;
            for &(i, c) in &free {
                rows[i][c] = (rest % q as u64) as u32;
                rest /= q as u64;
            }
            out.push(rows);
        }
    }
    out
}

/// Submodules `y` with `π x ⊆ y ⊆ x`, one per subspace of `x / π x`.
pub fn intermediate_modules<R: ChainRing>(ring: &R, x: &Submodule<R::Elem>) -> Vec<Submodule<R::Elem>> {
    let (pix, basis) = quotient_basis(ring, x);
    let q = ring.residue_size() as u32;
    let m = basis.len();
    let d = x.rank_ambient();
    subspaces(q, m)
        .into_iter()
        .map(|rref| {
            let mut gens = pix.rows().to_vec();
            for coeffs in rref {
                let mut v = vec![ring.zero(); d];
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0 {
                        let lift = ring.residue_lift(c);
                        for (t, &b) in basis[j].iter().enumerate() {
                            v[t] = ring.add(v[t], ring.mul(lift, b));
                        }
                    }
                }
                gens.push(v);
            }
            canonical_span(ring, d, &gens)
        })
        .collect()
}

/// Builds the ball of radius `R = nilpotency(ring)` in the rank-`d` building.
pub fn build_ball<R: ChainRing>(ring: &R, d: usize, budget: &Budget) -> Result<Ball<R::Elem>> {
    if d < 2 {
        return Err(Error::InvalidInput("building rank d must be at least 2".into()));
    }
    let modules = enumerate_vertex_modules(ring, d, budget)?;
    if modules.len() as u64 > budget.max_vertices {
        return Err(Error::budget("ball vertices", modules.len() as u64, budget.max_vertices));
    }
    let index: HashMap<&Submodule<R::Elem>, usize> =
        modules.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let origin = index[&full_module(ring, d)];

    let down: Vec<Vec<usize>> = modules
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut nb: Vec<usize> = intermediate_modules(ring, x)
                .iter()
                .filter(|y| is_vertex_module(ring, y))
                .filter_map(|y| index.get(y).copied())
                .filter(|&j| j != i)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    let mut graph = LabeledGraph::new(modules.len());
    for (i, nb) in down.iter().enumerate() {
        for &j in nb {
            graph.add_edge(i, j)?;
        }
    }
    let bfs = graph.bfs(origin);
    if bfs.contains(&u32::MAX) {
        return Err(Error::Verification("ball is not connected".into()));
    }
    let invariants = if ring.is_commutative() {
        let inv: Vec<Vec<u32>> = modules
            .par_iter()
            .map(|m| invariant_factors(ring, m))
            .collect::<Result<_>>()?;
        for (v, n) in inv.iter().enumerate() {
            if *n.last().unwrap() != bfs[v] {
                return Err(Error::Verification(format!(
                    "vertex {v}: largest invariant factor {} but BFS distance {}",
                    n.last().unwrap(),
                    bfs[v]
                )));
            }
        }
        let labels = inv
            .iter()
            .map(|n| {
                let s: u64 = n.iter().map(|&x| x as u64).sum();
                ((d as u64 - s % d as u64) % d as u64) as u32
            })
            .collect();
        graph.color = Some(labels);
        Some(inv)
    } else {
        None
    };
    graph.dist = Some(bfs);
    graph.payload = Some(modules.iter().map(|m| m.to_matrix_string(ring)).collect());
    Ok(Ball {
        d,
        radius: ring.nilpotency(),
        modules,
        origin,
        graph,
        invariant_factors: invariants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldDescriptor;
    use crate::lattice::contains;
    use crate::residue::ResidueRing;

    fn ring(desc: FieldDescriptor, r: u32) -> ResidueRing {
        ResidueRing::build(&desc, r, &Budget::default()).unwrap()
    }

    #[test]
    fn gaussian_binomials() {
        assert_eq!(gaussian_binomial(3, 1, 2), 7);
        assert_eq!(gaussian_binomial(4, 2, 2), 35);
        assert_eq!(gaussian_binomial(3, 1, 3), 13);
        assert_eq!(degree_closed_form(2, 2).subspace_count, 3);
        assert_eq!(degree_closed_form(2, 2).product_formula, 3);
        assert_eq!(degree_closed_form(3, 2).subspace_count, 4);
        let f = degree_closed_form(2, 3);
        assert_eq!((f.subspace_count, f.product_formula), (14, 21));
        assert_eq!(degree_closed_form(2, 4).subspace_count, 65);
    }

    #[test]
    fn subspace_counts() {
        let total = |q: u32, m: usize| subspaces(q, m).len() as u64;
        assert_eq!(total(2, 3), 16);
        assert_eq!(total(3, 2), 6);
        assert_eq!(total(2, 4), 1 + 15 + 35 + 15 + 1);
    }

    #[test]
    fn tree_ball_of_radius_two() {
        let b = build_ball(&ring(FieldDescriptor::laurent(2, 1), 2), 2, &Budget::default()).unwrap();
        assert_eq!(b.vertex_count(), 10);
        assert!(b.graph.is_forest());
        assert_eq!(b.center_degree(), 3);
    }

    #[test]
    fn residue_field_ball() {
        let b = build_ball(&ring(FieldDescriptor::laurent(2, 1), 1), 3, &Budget::default()).unwrap();
        assert_eq!(b.vertex_count(), 15);
        assert_eq!(b.center_degree(), 14);
    }

    #[test]
    fn labels_and_distances() {
        let z8 = ring(FieldDescriptor::qp(2), 3);
        let origin = full_module(&z8, 3);
        assert_eq!(type_label(&z8, &origin, 3).unwrap(), 0);
        assert_eq!(distance_origin(&z8, &origin).unwrap(), 0);
        let nb = canonical_span(&z8, 3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]);
        assert_eq!(type_label(&z8, &nb, 3).unwrap(), 2);
        let deep = canonical_span(&z8, 3, &[vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 4]]);
        assert_eq!(type_label(&z8, &deep, 3).unwrap(), 0);
        let z4 = ring(FieldDescriptor::qp(2), 2);
        let line = canonical_span(&z4, 2, &[vec![1, 0], vec![0, 2]]);
        assert_eq!(distance_origin(&z4, &line).unwrap(), 1);
        let far = canonical_span(&z4, 2, &[vec![1, 1]]);
        assert_eq!(distance_origin(&z4, &far).unwrap(), 2);
    }

    #[test]
    fn neighbor_generation_matches_pairwise_test() {
        for (desc, r, d) in [
            (FieldDescriptor::qp(2), 2, 3),
            (FieldDescriptor::laurent(2, 1), 3, 2),
            (FieldDescriptor::qp(3), 2, 2),
            (FieldDescriptor::new(2, 1, crate::field::Ramification::Finite(1), 2, 1), 2, 2),
        ] {
            let rg = ring(desc, r);
            let ball = build_ball(&rg, d, &Budget::default()).unwrap();
            let pis: Vec<_> = ball.modules.iter().map(|m| scale_by_pi(&rg, m)).collect();
            let n = ball.modules.len();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let (x, y) = (&ball.modules[i], &ball.modules[j]);
                    let below = contains(&rg, x, y).unwrap() && contains(&rg, y, &pis[i]).unwrap();
                    let above = contains(&rg, y, x).unwrap() && contains(&rg, x, &pis[j]).unwrap();
                    assert_eq!(ball.graph.has_edge(i, j), below || above, "{i} {j}");
                }
            }
        }
    }
}
