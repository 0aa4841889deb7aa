//! Coxeter diagrams and the axioms of a geometry of type `M` on a colored
//! graph.
//!
//! A flag is a clique; its residue is the set of vertices outside the flag
//! adjacent to every flag vertex. For a flag of type `J` the residue must be
//! nonempty when `|I \ J| >= 1`, connected when `|I \ J| >= 2`, and a
//! generalized `M(i,j)`-gon when `I \ J = {i, j}`.

use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, ShapeStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Entry {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Finite(m) => write!(f, "{m}"),
            Entry::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Entry::Finite(m) => s.serialize_u32(*m),
            Entry::Infinite => s.serialize_str("inf"),
        }
    }
}

/// A Coxeter diagram over `I = {0, .., n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoxeterDiagram {
    m: Vec<Vec<Entry>>,
}

impl CoxeterDiagram {
    pub fn new(m: Vec<Vec<Entry>>) -> Result<Self> {
        let n = m.len();
        for (i, row) in m.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput("diagram matrix is not square".into()));
            }
            if row[i] != Entry::Finite(1) {
                return Err(Error::InvalidInput(format!("M({i},{i}) must be 1")));
            }
            for (j, &e) in row.iter().enumerate() {
                if e != m[j][i] {
                    return Err(Error::InvalidInput(format!("M({i},{j}) != M({j},{i})")));
                }
                if i != j && matches!(e, Entry::Finite(x) if x < 2) {
                    return Err(Error::InvalidInput(format!("M({i},{j}) must be at least 2")));
                }
            }
        }
        Ok(CoxeterDiagram { m })
    }

    /// Two colors joined by `m`.
    pub fn rank_two(m: Entry) -> Result<Self> {
        CoxeterDiagram::new(vec![vec![Entry::Finite(1), m], vec![m, Entry::Finite(1)]])
    }

    pub fn rank(&self) -> usize {
        self.m.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Entry {
        self.m[i][j]
    }

    /// Parses `atilde:d` or `rank2:m`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("diagram '{spec}': expected kind:arg")))?;
        match kind {
            "atilde" => atilde_diagram(
                arg.parse()
                    .map_err(|_| Error::Parse(format!("diagram rank '{arg}'")))?,
            ),
            "rank2" => CoxeterDiagram::rank_two(if arg == "inf" {
                Entry::Infinite
            } else {
                Entry::Finite(
                    arg.parse()
                        .map_err(|_| Error::Parse(format!("diagram entry '{arg}'")))?,
                )
            }),
            _ => Err(Error::Parse(format!("unknown diagram kind '{kind}'"))),
        }
    }
}

/// `Ã_{d-1}` over `Z/d`: 3 between cyclic neighbors, 2 otherwise.
pub fn atilde_diagram(d: usize) -> Result<CoxeterDiagram> {
    if d < 3 {
        return Err(Error::InvalidInput(format!(
            "affine diagram needs d >= 3, got {d}"
        )));
    }
    let m = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let diff = (i + d - j) % d;
                    match diff {
                        0 => Entry::Finite(1),
                        1 => Entry::Finite(3),
                        x if x == d - 1 => Entry::Finite(3),
                        _ => Entry::Finite(2),
                    }
                })
                .collect()
        })
        .collect();
    CoxeterDiagram::new(m)
}

/// Permutations `σ` of `I` with `M(σi, σj) = M(i, j)`.
pub fn diagram_symmetries(m: &CoxeterDiagram) -> Vec<Vec<usize>> {
    let n = m.rank();
    (0..n)
        .permutations(n)
        .filter(|s| (0..n).all(|i| (0..n).all(|j| m.get(s[i], s[j]) == m.get(i, j))))
        .collect()
}

/// Why a graph fails to be a generalized polygon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MgonFailure(pub String);

impl fmt::Display for MgonFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The polygon test on precomputed statistics.
pub fn mgon_from_stats(s: &ShapeStats, m: u32) -> std::result::Result<(), MgonFailure> {
    let fail = |msg: String| Err(MgonFailure(msg));
    if s.vertices == 0 {
        return fail("empty graph".into());
    }
    if !s.connected {
        return fail("not connected".into());
    }
    if !s.bipartite {
        return fail("not bipartite".into());
    }
    if s.min_degree < 2 {
        return fail(format!("minimum degree {} < 2", s.min_degree));
    }
    if s.diameter != Some(m) {
        return fail(format!("diameter {:?} != {m}", s.diameter));
    }
    if s.girth != Some(2 * m) {
        return fail(format!("girth {:?} != {}", s.girth, 2 * m));
    }
    Ok(())
}

/// Connected, bipartite, diameter `m`, girth `2m`, minimum degree 2.
pub fn is_generalized_mgon(g: &LabeledGraph, m: u32) -> std::result::Result<(), MgonFailure> {
    mgon_from_stats(&g.shape_stats(), m)
}

/// Checks that `flag` is a clique of distinct colors.
pub fn check_flag(g: &LabeledGraph, tau: &[u32], flag: &[usize]) -> Result<()> {
    for (a, &u) in flag.iter().enumerate() {
        if u >= g.vertex_count() {
            return Err(Error::InvalidInput(format!("flag vertex {u} out of range")));
        }
        for &v in &flag[a + 1..] {
            if u == v || !g.has_edge(u, v) || tau[u] == tau[v] {
                return Err(Error::InvalidInput(format!(
                    "{flag:?} is not a flag ({u}, {v})"
                )));
            }
        }
    }
    Ok(())
}

/// Vertices adjacent to every vertex of `flag`; all vertices for the empty
/// flag.
pub fn residue_vertices(g: &LabeledGraph, flag: &[usize]) -> Vec<usize> {
    match flag.split_first() {
        None => (0..g.vertex_count()).collect(),
        Some((&first, rest)) => g
            .neighbors(first)
            .iter()
            .copied()
            .filter(|&w| rest.iter().all(|&u| g.has_edge(u, w)))
            .collect(),
    }
}

/// The residue of a flag as a colored graph, with the vertex ids it came
/// from.
pub fn residue_of_flag(g: &LabeledGraph, tau: &[u32], flag: &[usize]) -> Result<(Vec<usize>, LabeledGraph)> {
    check_flag(g, tau, flag)?;
    let verts = residue_vertices(g, flag);
    let mut h = g.induced(&verts);
    h.color = Some(verts.iter().map(|&v| tau[v]).collect());
    Ok((verts, h))
}

/// Which flags `verify_geometry` inspects on a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// Every flag.
    Full,
    /// Flags within distance `R - 2` of the origin.
    Interior,
    /// Flags within the given distance of the origin.
    Within(u32),
}

impl Scope {
    pub fn radius(self, ball_radius: u32) -> Option<u32> {
        match self {
            Scope::Full => None,
            Scope::Interior => Some(ball_radius.saturating_sub(2)),
            Scope::Within(r) => Some(r),
        }
    }

    /// Vertex predicate for a graph carrying distances.
    pub fn predicate(self, g: &LabeledGraph, ball_radius: u32) -> Vec<bool> {
        match (self.radius(ball_radius), &g.dist) {
            (Some(r), Some(dist)) => dist.iter().map(|&x| x <= r).collect(),
            _ => vec![true; g.vertex_count()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub flag: Vec<usize>,
    pub flag_type: Vec<u32>,
    /// 0 for an improper coloring, otherwise the axiom number.
    pub condition: u8,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeometryReport {
    pub flags_checked: usize,
    pub violations: Vec<Violation>,
}

impl GeometryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All cliques among `allowed` vertices (the empty one first), each sorted,
/// in lexicographic order.
pub fn cliques(g: &LabeledGraph, allowed: &[bool], max_size: usize) -> Vec<Vec<usize>> {
    fn grow(
        g: &LabeledGraph,
        max_size: usize,
        current: &mut Vec<usize>,
        candidates: &[usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(current.clone());
        if current.len() == max_size {
            return;
        }
        for (i, &v) in candidates.iter().enumerate() {
            let next: Vec<usize> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&w| g.has_edge(v, w))
                .collect();
            current.push(v);
            grow(g, max_size, current, &next, out);
            current.pop();
        }
    }
    let start: Vec<usize> = (0..g.vertex_count()).filter(|&v| allowed[v]).collect();
    let mut out = Vec::new();
    grow(g, max_size, &mut Vec::new(), &start, &mut out);
    out
}

/// The colors of `I` missing from `flag_type`, in increasing order.
pub fn cotype(rank: usize, flag_type: &[u32]) -> Vec<usize> {
    (0..rank).filter(|&i| !flag_type.contains(&(i as u32))).collect()
}

/// Checks the three axioms on the residue of one flag, given its residue
/// vertex set. Residue statistics are computed lazily.
pub fn flag_violations(
    g: &LabeledGraph,
    m: &CoxeterDiagram,
    flag: &[usize],
    flag_type: &[u32],
    residue: &[usize],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let rest = cotype(m.rank(), flag_type);
    let violation = |condition: u8, detail: String| Violation {
        flag: flag.to_vec(),
        flag_type: flag_type.to_vec(),
        condition,
        detail,
    };
    if rest.is_empty() {
        return out;
    }
    if residue.is_empty() {
        out.push(violation(1, "empty residue".into()));
        return out;
    }
    if rest.len() < 2 {
        return out;
    }
    let h = g.induced(residue);
    if rest.len() == 2 {
        let s = h.shape_stats();
        if !s.connected {
            out.push(violation(2, "residue not connected".into()));
        }
        match m.get(rest[0], rest[1]) {
            Entry::Infinite => out.push(violation(
                3,
                format!("M({},{}) = inf has no polygon test", rest[0], rest[1]),
            )),
            Entry::Finite(mm) => {
                if let Err(e) = mgon_from_stats(&s, mm) {
                    out.push(violation(3, format!("not a generalized {mm}-gon: {e}")));
                }
            }
        }
    } else if !h.is_connected() {
        out.push(violation(2, "residue not connected".into()));
    }
    out
}

/// Checks the geometry axioms for every flag whose vertices all satisfy
/// `in_scope`, plus properness of the coloring on in-scope edges.
pub fn verify_geometry(
    g: &LabeledGraph,
    tau: &[u32],
    m: &CoxeterDiagram,
    in_scope: &[bool],
) -> Result<GeometryReport> {
    let n = g.vertex_count();
    if tau.len() != n || in_scope.len() != n {
        return Err(Error::InvalidInput("coloring or scope has the wrong length".into()));
    }
    if let Some(&bad) = tau.iter().find(|&&c| c as usize >= m.rank()) {
        return Err(Error::InvalidInput(format!("color {bad} outside the diagram")));
    }
    let mut violations = Vec::new();
    for (u, v) in g.edges() {
        if in_scope[u] && in_scope[v] && tau[u] == tau[v] {
            violations.push(Violation {
                flag: vec![u, v],
                flag_type: vec![tau[u], tau[v]],
                condition: 0,
                detail: "adjacent vertices share a color".into(),
            });
        }
    }
    if !violations.is_empty() {
        return Ok(GeometryReport {
            flags_checked: 0,
            violations,
        });
    }
    let flags = cliques(g, in_scope, m.rank());
    let found: Vec<Vec<Violation>> = flags
        .par_iter()
        .map(|flag| {
            let ty: Vec<u32> = flag.iter().map(|&v| tau[v]).collect();
            flag_violations(g, m, flag, &ty, &residue_vertices(g, flag))
        })
        .collect();
    violations.extend(found.into_iter().flatten());
    Ok(GeometryReport {
        flags_checked: flags.len(),
        violations,
    })
}
