//! Germs of geometry and their propagation along a graph.
//!
//! A germ at `x` colors the closed neighborhood `V(x)` so that the induced
//! colored graph is proper and every flag of `V(x)` through `x` satisfies the
//! geometry axioms, with residues taken inside `V(x)`. Across an edge
//! `x ~ x'` a germ at `x` should extend uniquely to a germ at `x'` agreeing
//! on `V(x) ∩ V(x')`; propagating from a basepoint along a spanning tree and
//! checking every other edge either produces a global coloring or exhibits a
//! cycle with nontrivial holonomy.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::geometry::{cliques, mgon_from_stats, CoxeterDiagram, Entry};
use crate::graph::{LabeledGraph, ShapeStats};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Germ {
    pub center: usize,
    /// `V(center)` in increasing vertex order.
    pub vertices: Vec<usize>,
    /// Color of each entry of `vertices`.
    pub colors: Vec<u32>,
}

impl Germ {
    pub fn color_of(&self, v: usize) -> Option<u32> {
        self.vertices.binary_search(&v).ok().map(|i| self.colors[i])
    }

    pub fn center_color(&self) -> u32 {
        self.color_of(self.center).unwrap()
    }

    /// `σ ∘ germ`.
    pub fn permuted(&self, sigma: &[usize]) -> Germ {
        Germ {
            colors: self.colors.iter().map(|&c| sigma[c as usize] as u32).collect(),
            ..self.clone()
        }
    }
}

struct LocalFlag {
    size: usize,
    residue_nonempty: bool,
    residue_connected: bool,
    /// Only for flags of corank two.
    stats: Option<ShapeStats>,
}

/// Coloring-independent data of `V(x)`.
struct Local {
    vertices: Vec<usize>,
    adj: Vec<Vec<usize>>,
    /// Local indices in assignment order: each vertex after the first has as
    /// many previously placed neighbors as possible.
    order: Vec<usize>,
    flags: Vec<(Vec<usize>, LocalFlag)>,
}

impl Local {
    fn new(g: &LabeledGraph, x: usize, rank: usize) -> Local {
        let mut vertices = g.neighbors(x).to_vec();
        vertices.push(x);
        vertices.sort_unstable();
        let h = g.induced(&vertices);
        let adj: Vec<Vec<usize>> = (0..vertices.len()).map(|i| h.neighbors(i).to_vec()).collect();
        let center = vertices.binary_search(&x).unwrap();

        let n = vertices.len();
        let mut placed = vec![false; n];
        let mut weight = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        let mut next = Some(center);
        while let Some(v) = next {
            placed[v] = true;
            order.push(v);
            for &w in &adj[v] {
                weight[w] += 1;
            }
            next = (0..n)
                .filter(|&w| !placed[w])
                .max_by_key(|&w| (weight[w], std::cmp::Reverse(w)));
        }

        // flags through x: cliques of the link, plus x itself
        let link: Vec<usize> = adj[center].clone();
        let mut allowed = vec![false; n];
        for &w in &link {
            allowed[w] = true;
        }
        let flags = cliques(&h, &allowed, rank.saturating_sub(1))
            .into_iter()
            .map(|mut c| {
                c.push(center);
                c.sort_unstable();
                let residue: Vec<usize> = (0..n)
                    .filter(|w| !c.contains(w) && c.iter().all(|&u| adj[u].contains(w)))
                    .collect();
                let corank = rank.saturating_sub(c.len());
                let r = h.induced(&residue);
                let stats = (corank == 2).then(|| r.shape_stats());
                let info = LocalFlag {
                    size: c.len(),
                    residue_nonempty: !residue.is_empty(),
                    residue_connected: corank < 2 || r.is_connected(),
                    stats,
                };
                (c, info)
            })
            .collect();
        Local {
            vertices,
            adj,
            order,
            flags,
        }
    }

    fn satisfies_axioms(&self, colors: &[u32], m: &CoxeterDiagram) -> bool {
        let rank = m.rank();
        self.flags.iter().all(|(members, f)| {
            if f.size > rank {
                return false;
            }
            let corank = rank - f.size;
            if corank >= 1 && !f.residue_nonempty {
                return false;
            }
            if corank >= 2 && !f.residue_connected {
                return false;
            }
            if corank == 2 {
                let rest: Vec<usize> = (0..rank)
                    .filter(|&i| members.iter().all(|&u| colors[u] as usize != i))
                    .collect();
                match m.get(rest[0], rest[1]) {
                    Entry::Infinite => return false,
                    Entry::Finite(mm) => {
                        if mgon_from_stats(f.stats.as_ref().unwrap(), mm).is_err() {
                            return false;
                        }
                    }
                }
            }
            true
        })
    }

    /// Germs compatible with `fixed`, stopping after `limit` results.
    fn search(
        &self,
        m: &CoxeterDiagram,
        fixed: &[Option<u32>],
        limit: usize,
        budget: u64,
    ) -> Result<Vec<Vec<u32>>> {
        let rank = m.rank() as u32;
        let n = self.vertices.len();
        let mut colors = vec![u32::MAX; n];
        let mut out = Vec::new();
        let mut nodes = 0u64;
        // explicit stack of (depth, next color to try)
        let mut depth = 0usize;
        let mut next_color = vec![0u32; n + 1];
        loop {
            if depth == n {
                if self.satisfies_axioms(&colors, m) {
                    out.push(colors.clone());
                    if out.len() >= limit {
                        return Ok(out);
                    }
                }
                if depth == 0 {
                    return Ok(out);
                }
                depth -= 1;
                continue;
            }
            let v = self.order[depth];
            let mut placed = false;
            while next_color[depth] < rank {
                let c = next_color[depth];
                next_color[depth] += 1;
                if fixed[v].is_some_and(|f| f != c) {
                    continue;
                }
                if self.adj[v].iter().any(|&w| colors[w] == c) {
                    continue;
                }
                nodes += 1;
                if nodes > budget {
                    return Err(Error::budget("germ search nodes", nodes, budget));
                }
                colors[v] = c;
                placed = true;
                break;
            }
            if placed {
                depth += 1;
                next_color[depth] = 0;
            } else {
                colors[v] = u32::MAX;
                next_color[depth] = 0;
                if depth == 0 {
                    return Ok(out);
                }
                depth -= 1;
                let u = self.order[depth];
                colors[u] = u32::MAX;
            }
        }
    }
}

/// Lazily computed local data and germ lists for one graph and diagram.
pub struct GermAtlas<'a> {
    graph: &'a LabeledGraph,
    diagram: &'a CoxeterDiagram,
    budget: Budget,
    locals: Vec<OnceLock<Local>>,
    germs: Vec<OnceLock<Result<Vec<Germ>>>>,
}

impl<'a> GermAtlas<'a> {
    pub fn new(graph: &'a LabeledGraph, diagram: &'a CoxeterDiagram, budget: &Budget) -> Self {
        let n = graph.vertex_count();
        GermAtlas {
            graph,
            diagram,
            budget: *budget,
            locals: (0..n).map(|_| OnceLock::new()).collect(),
            germs: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn graph(&self) -> &LabeledGraph {
        self.graph
    }

    pub fn diagram(&self) -> &CoxeterDiagram {
        self.diagram
    }

    fn local(&self, x: usize) -> &Local {
        self.locals[x].get_or_init(|| Local::new(self.graph, x, self.diagram.rank()))
    }

    fn make_germ(&self, x: usize, colors: Vec<u32>) -> Germ {
        Germ {
            center: x,
            vertices: self.local(x).vertices.clone(),
            colors,
        }
    }

    /// All germs at `x`, sorted by their color vectors.
    pub fn germs_at(&self, x: usize) -> Result<Vec<Germ>> {
        if x >= self.graph.vertex_count() {
            return Err(Error::InvalidInput(format!("vertex {x} out of range")));
        }
        self.germs[x]
            .get_or_init(|| {
                let local = self.local(x);
                let fixed = vec![None; local.vertices.len()];
                let mut found = local.search(self.diagram, &fixed, usize::MAX, self.budget.max_search)?;
                found.sort();
                Ok(found.into_iter().map(|c| self.make_germ(x, c)).collect())
            })
            .clone()
    }

    /// The unique germ at `to` agreeing with `germ` on `V(from) ∩ V(to)`.
    pub fn transport(&self, germ: &Germ, to: usize) -> Result<Germ> {
        let from = germ.center;
        if !self.graph.has_edge(from, to) {
            return Err(Error::InvalidInput(format!("{from} and {to} are not adjacent")));
        }
        let local = self.local(to);
        let fixed: Vec<Option<u32>> = local.vertices.iter().map(|&v| germ.color_of(v)).collect();
        let found = local.search(self.diagram, &fixed, 2, self.budget.max_search)?;
        match found.len() {
            0 => Err(Error::NoExtension { from, to }),
            1 => Ok(self.make_germ(to, found.into_iter().next().unwrap())),
            count => Err(Error::NotUnique { from, to, count }),
        }
    }
}

pub fn germs_at(g: &LabeledGraph, x: usize, m: &CoxeterDiagram, budget: &Budget) -> Result<Vec<Germ>> {
    GermAtlas::new(g, m, budget).germs_at(x)
}

pub fn transport(
    g: &LabeledGraph,
    m: &CoxeterDiagram,
    germ: &Germ,
    to: usize,
    budget: &Budget,
) -> Result<Germ> {
    GermAtlas::new(g, m, budget).transport(germ, to)
}

/// Whether `germs` is exactly the orbit of its first element under `syms`.
pub fn is_single_orbit(germs: &[Germ], syms: &[Vec<usize>]) -> bool {
    let Some(first) = germs.first() else {
        return true;
    };
    let orbit: HashSet<Vec<u32>> = syms.iter().map(|s| first.permuted(s).colors).collect();
    let have: HashSet<Vec<u32>> = germs.iter().map(|g| g.colors.clone()).collect();
    orbit == have
}

/// A symmetry `σ` with `σ(a[v]) = b[v]` wherever both are defined.
pub fn align_to_symmetry(a: &[Option<u32>], b: &[Option<u32>], syms: &[Vec<usize>]) -> Option<Vec<usize>> {
    syms.iter()
        .find(|s| {
            a.iter().zip(b).all(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => s[*x as usize] as u32 == *y,
                _ => true,
            })
        })
        .cloned()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Propagation {
    /// Colors of the scope vertices and their neighbors.
    Labelling {
        tau: Vec<Option<u32>>,
        tree_edges: usize,
        checked_edges: usize,
    },
    /// A closed walk (consecutive vertices adjacent, last adjacent to first)
    /// along which transport does not return to the starting germ.
    Obstruction { cycle: Vec<usize>, edge: (usize, usize) },
}

impl Propagation {
    pub fn labelling(&self) -> Option<&[Option<u32>]> {
        match self {
            Propagation::Labelling { tau, .. } => Some(tau),
            Propagation::Obstruction { .. } => None,
        }
    }
}

fn tree_path(parent: &[usize], mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while parent[v] != v {
        v = parent[v];
        out.push(v);
    }
    out
}

/// `u .. lca .. v` along the tree.
fn tree_route(parent: &[usize], u: usize, v: usize) -> Vec<usize> {
    let pu = tree_path(parent, u);
    let pv = tree_path(parent, v);
    let mut i = pu.len();
    let mut j = pv.len();
    while i > 0 && j > 0 && pu[i - 1] == pv[j - 1] {
        i -= 1;
        j -= 1;
    }
    let mut out: Vec<usize> = pu[..=i.min(pu.len() - 1)].to_vec();
    out.extend(pv[..j].iter().rev());
    out
}

/// Transports `seed` over a BFS tree of the scope and checks every other
/// scope edge.
pub fn propagate(atlas: &GermAtlas<'_>, seed: &Germ, in_scope: &[bool]) -> Result<Propagation> {
    let g = atlas.graph();
    let n = g.vertex_count();
    let base = seed.center;
    if !in_scope[base] {
        return Err(Error::InvalidInput(format!("basepoint {base} outside the scope")));
    }
    let mut germ: Vec<Option<Germ>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    parent[base] = base;
    germ[base] = Some(seed.clone());
    let mut queue = VecDeque::from([base]);
    let mut tree_edges = 0;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if in_scope[v] && parent[v] == usize::MAX {
                let next = atlas.transport(germ[u].as_ref().unwrap(), v)?;
                germ[v] = Some(next);
                parent[v] = u;
                tree_edges += 1;
                queue.push_back(v);
            }
        }
    }
    if (0..n).any(|v| in_scope[v] && parent[v] == usize::MAX) {
        return Err(Error::InvalidInput("scope is not connected".into()));
    }
    let mut checked_edges = 0;
    for (u, v) in g.edges() {
        if !(in_scope[u] && in_scope[v]) || parent[v] == u || parent[u] == v {
            continue;
        }
        checked_edges += 1;
        let moved = atlas.transport(germ[u].as_ref().unwrap(), v)?;
        if moved.colors != germ[v].as_ref().unwrap().colors {
            return Ok(Propagation::Obstruction {
                cycle: tree_route(&parent, u, v),
                edge: (u, v),
            });
        }
    }
    // colors of scope vertices and their neighbors; neighbors shared by two
    // non-adjacent scope vertices must agree as well
    let mut tau: Vec<Option<u32>> = vec![None; n];
    let mut source = vec![usize::MAX; n];
    for x in 0..n {
        let Some(gx) = &germ[x] else { continue };
        for (&v, &c) in gx.vertices.iter().zip(&gx.colors) {
            match tau[v] {
                None => {
                    tau[v] = Some(c);
                    source[v] = x;
                }
                Some(prev) if prev != c => {
                    let mut cycle = tree_route(&parent, source[v], x);
                    if !cycle.contains(&v) {
                        cycle.push(v);
                    }
                    return Ok(Propagation::Obstruction {
                        cycle,
                        edge: (x, v),
                    });
                }
                _ => {}
            }
        }
    }
    for x in 0..n {
        if let Some(gx) = &germ[x] {
            if gx.vertices.iter().zip(&gx.colors).any(|(&v, &c)| tau[v] != Some(c)) {
                return Err(Error::Verification(format!(
                    "labelling disagrees with the germ at {x}"
                )));
            }
        }
    }
    Ok(Propagation::Labelling {
        tau,
        tree_edges,
        checked_edges,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CycleClass {
    pub checked: usize,
    pub failures: usize,
    /// Up to a few failing cycles, for inspection.
    pub examples: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleCertificate {
    pub max_length: usize,
    /// Keyed by cycle length; length 2 is the round trip over an edge.
    pub classes: BTreeMap<usize, CycleClass>,
}

impl CycleCertificate {
    pub fn passed(&self) -> bool {
        self.classes.values().all(|c| c.failures == 0)
    }
}

const EXAMPLE_LIMIT: usize = 5;

/// Simple cycles of length `3..=k` inside the scope, each listed once
/// starting from its smallest vertex.
fn short_cycles(g: &LabeledGraph, in_scope: &[bool], k: usize) -> Vec<Vec<usize>> {
    fn extend(
        g: &LabeledGraph,
        in_scope: &[bool],
        k: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let start = path[0];
        let last = *path.last().unwrap();
        for &w in g.neighbors(last) {
            if w == start && path.len() >= 3 && path[1] < last {
                out.push(path.clone());
            }
            if w > start && in_scope[w] && path.len() < k && !path.contains(&w) {
                path.push(w);
                extend(g, in_scope, k, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..g.vertex_count() {
        if in_scope[s] {
            extend(g, in_scope, k, &mut vec![s], &mut out);
        }
    }
    out
}

/// Checks that transport around every closed path of length at most `k`
/// inside the scope returns each germ to itself.
pub fn short_cycle_certificate(atlas: &GermAtlas<'_>, k: usize, in_scope: &[bool]) -> Result<CycleCertificate> {
    let g = atlas.graph();
    let mut classes: BTreeMap<usize, CycleClass> = BTreeMap::new();
    let mut loops: Vec<Vec<usize>> = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| in_scope[u] && in_scope[v])
        .map(|(u, v)| vec![u, v])
        .collect();
    if k >= 3 {
        loops.extend(short_cycles(g, in_scope, k));
    }
    let results: Vec<(usize, bool)> = loops
        .par_iter()
        .map(|cycle| -> Result<(usize, bool)> {
            let mut ok = true;
            for start in atlas.germs_at(cycle[0])? {
                let mut cur = start.clone();
                for &v in cycle[1..].iter().chain(std::iter::once(&cycle[0])) {
                    cur = atlas.transport(&cur, v)?;
                }
                ok &= cur.colors == start.colors;
            }
            Ok((cycle.len(), ok))
        })
        .collect::<Result<_>>()?;
    for (cycle, (len, ok)) in loops.iter().zip(results) {
        let class = classes.entry(len).or_default();
        class.checked += 1;
        if !ok {
            class.failures += 1;
            if class.examples.len() < EXAMPLE_LIMIT {
                class.examples.push(cycle.clone());
            }
        }
    }
    Ok(CycleCertificate {
        max_length: k,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{atilde_diagram, diagram_symmetries};
    use crate::graph::fixtures::*;

    fn rank2(m: u32) -> CoxeterDiagram {
        CoxeterDiagram::rank_two(Entry::Finite(m)).unwrap()
    }

    #[test]
    fn hexagon_germs() {
        let g = cycle(6);
        let m = rank2(3);
        let germs = germs_at(&g, 0, &m, &Budget::default()).unwrap();
        assert_eq!(germs.len(), 2);
        assert!(is_single_orbit(&germs, &diagram_symmetries(&m)));
        let moved = transport(&g, &m, &germs[0], 1, &Budget::default()).unwrap();
        assert_eq!(moved.color_of(0), germs[0].color_of(0));
        assert_eq!(moved.color_of(1), germs[0].color_of(1));
    }

    #[test]
    fn single_edge_has_no_germs() {
        let g = path(2);
        let m = atilde_diagram(3).unwrap();
        assert!(germs_at(&g, 0, &m, &Budget::default()).unwrap().is_empty());
    }

    #[test]
    fn star_has_no_extension() {
        let g = star(3);
        let m = atilde_diagram(3).unwrap();
        let germ = Germ {
            center: 0,
            vertices: vec![0, 1, 2, 3],
            colors: vec![0, 1, 2, 1],
        };
        assert_eq!(
            transport(&g, &m, &germ, 1, &Budget::default()),
            Err(Error::NoExtension { from: 0, to: 1 })
        );
    }

    #[test]
    fn odd_cycle_obstruction() {
        let m = rank2(4);
        for (n, obstructed) in [(8, false), (9, true)] {
            let g = cycle(n);
            let atlas = GermAtlas::new(&g, &m, &Budget::default());
            let seed = atlas.germs_at(0).unwrap()[0].clone();
            let out = propagate(&atlas, &seed, &vec![true; n]).unwrap();
            match out {
                Propagation::Obstruction { cycle, .. } => {
                    assert!(obstructed);
                    assert_eq!(cycle.len(), 9);
                }
                Propagation::Labelling { tau, .. } => {
                    assert!(!obstructed);
                    for (u, v) in g.edges() {
                        assert_ne!(tau[u], tau[v]);
                    }
                }
            }
            let cert = short_cycle_certificate(&atlas, 3, &vec![true; n]).unwrap();
            assert!(cert.passed());
        }
    }

    #[test]
    fn hexagon_certificate() {
        let g = cycle(6);
        let m = rank2(3);
        let atlas = GermAtlas::new(&g, &m, &Budget::default());
        let cert = short_cycle_certificate(&atlas, 6, &[true; 6]).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.classes[&6].checked, 1);
        assert_eq!(cert.classes[&2].checked, 6);
    }

    #[test]
    fn tree_route_goes_through_lca() {
        // 0 - 1 - 2, 0 - 3 - 4
        let parent = vec![0, 0, 1, 0, 3];
        assert_eq!(tree_route(&parent, 2, 4), vec![2, 1, 0, 3, 4]);
        assert_eq!(tree_route(&parent, 2, 1), vec![2, 1]);
    }
}
