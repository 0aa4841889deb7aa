//! Canonical labelling of connected graphs by color refinement and
//! individualization.
//!
//! Refinement splits cells by (cell, multiset of neighbor cells) until the
//! partition is equitable; cells are ordered by their signatures, so the
//! result depends only on the isomorphism class of the input. The search
//! individualizes each vertex of the first smallest non-singleton cell in
//! turn and keeps the leaf whose relabelled edge list is lexicographically
//! smallest. Leaves that reproduce an earlier encoding give automorphisms,
//! which prune children lying in one orbit of the prefix stabilizer; a leaf
//! equivalent to the first leaf abandons its whole subtree.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalCertificate {
    pub n: usize,
    /// Vertex count, colors (when used) and the canonical edge list, as
    /// little-endian `u32` words.
    #[serde(serialize_with = "as_hex")]
    pub encoding: Vec<u8>,
    /// Orbits of the automorphisms met during the search, in canonical
    /// positions. Informational; not part of equality.
    pub orbits: Vec<Vec<usize>>,
}

fn as_hex<S: serde::Serializer>(bytes: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&hex::encode(bytes))
}

impl PartialEq for CanonicalCertificate {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.encoding == other.encoding
    }
}

impl Eq for CanonicalCertificate {}

impl CanonicalCertificate {
    pub fn hex(&self) -> String {
        hex::encode(&self.encoding)
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(&self.encoding))
    }
}

impl fmt::Display for CanonicalCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} sha256={}", self.n, self.digest())
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub certificate: CanonicalCertificate,
    /// `labeling[v]` is the canonical position of vertex `v`.
    pub labeling: Vec<usize>,
    /// Automorphisms found during the search, as vertex maps.
    pub automorphisms: Vec<Vec<usize>>,
    pub nodes: u64,
}

type Cells = Vec<Vec<usize>>;

fn initial_cells(n: usize, colors: Option<&[u32]>) -> Cells {
    match colors {
        None => vec![(0..n).collect()],
        Some(c) => {
            let mut keys: Vec<u32> = c.to_vec();
            keys.sort_unstable();
            keys.dedup();
            keys.iter()
                .map(|&k| (0..n).filter(|&v| c[v] == k).collect())
                .collect()
        }
    }
}

/// Splits cells to the coarsest equitable refinement, keeping sub-cells
/// ordered by signature.
fn refine(g: &LabeledGraph, mut cells: Cells) -> Cells {
    let n = g.vertex_count();
    let mut cell_of = vec![0u32; n];
    loop {
        for (i, cell) in cells.iter().enumerate() {
            for &v in cell {
                cell_of[v] = i as u32;
            }
        }
        let mut next: Cells = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<u32>, usize)> = cell
                .iter()
                .map(|&v| {
                    let mut sig: Vec<u32> = g.neighbors(v).iter().map(|&w| cell_of[w]).collect();
                    sig.sort_unstable();
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|&(_, v)| v).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            return next;
        }
        cells = next;
    }
}

fn individualize(cells: &Cells, target: usize, v: usize) -> Cells {
    let mut out = Vec::with_capacity(cells.len() + 1);
    for (i, cell) in cells.iter().enumerate() {
        if i == target {
            out.push(vec![v]);
            out.push(cell.iter().copied().filter(|&w| w != v).collect());
        } else {
            out.push(cell.clone());
        }
    }
    out
}

fn encode(g: &LabeledGraph, colors: Option<&[u32]>, lab: &[usize]) -> Vec<u32> {
    let n = g.vertex_count();
    let mut words = Vec::with_capacity(1 + n + 2 * g.edge_count());
    words.push(n as u32);
    if let Some(c) = colors {
        let mut by_pos = vec![0u32; n];
        for v in 0..n {
            by_pos[lab[v]] = c[v];
        }
        words.extend(by_pos);
    }
    let mut edges: Vec<(u32, u32)> = g
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (lab[u] as u32, lab[v] as u32);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    for (a, b) in edges {
        words.push(a);
        words.push(b);
    }
    words
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

enum Flow {
    Continue,
    /// The subtree is an automorphic image of the first path.
    BackToFirstPath,
}

struct Search<'a> {
    g: &'a LabeledGraph,
    colors: Option<&'a [u32]>,
    first: Option<(Vec<u32>, Vec<usize>)>,
    best: Option<(Vec<u32>, Vec<usize>)>,
    autos: Vec<Vec<usize>>,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    /// The vertex map sending the leaf `from` onto the leaf `to`.
    fn automorphism(from: &[usize], to: &[usize]) -> Vec<usize> {
        let mut at = vec![0; to.len()];
        for (v, &p) in to.iter().enumerate() {
            at[p] = v;
        }
        from.iter().map(|&p| at[p]).collect()
    }

    fn leaf(&mut self, cells: &Cells) -> Flow {
        let mut lab = vec![0; self.g.vertex_count()];
        for (pos, cell) in cells.iter().enumerate() {
            lab[cell[0]] = pos;
        }
        let enc = encode(self.g, self.colors, &lab);
        let Some((first_enc, first_lab)) = &self.first else {
            self.first = Some((enc.clone(), lab.clone()));
            self.best = Some((enc, lab));
            return Flow::Continue;
        };
        if &enc == first_enc {
            let a = Search::automorphism(&lab, first_lab);
            self.autos.push(a);
            return Flow::BackToFirstPath;
        }
        let (best_enc, best_lab) = self.best.as_ref().unwrap();
        match enc.cmp(best_enc) {
            Ordering::Less => self.best = Some((enc, lab)),
            Ordering::Equal => {
                let a = Search::automorphism(&lab, best_lab);
                self.autos.push(a);
            }
            Ordering::Greater => {}
        }
        Flow::Continue
    }

    fn visit(&mut self, cells: Cells, prefix: &mut Vec<usize>, on_first_path: bool) -> Result<Flow> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(Error::budget("canonical form search nodes", self.nodes, self.limit));
        }
        let target = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() > 1)
            .min_by_key(|&(i, c)| (c.len(), i))
            .map(|(i, _)| i);
        let Some(target) = target else {
            return Ok(self.leaf(&cells));
        };
        let mut members = cells[target].clone();
        members.sort_unstable();
        let mut explored: Vec<usize> = Vec::new();
        for (k, &v) in members.iter().enumerate() {
            if !explored.is_empty() && self.same_orbit(prefix, &explored, v, &members) {
                continue;
            }
            explored.push(v);
            let child = refine(self.g, individualize(&cells, target, v));
            prefix.push(v);
            let flow = self.visit(child, prefix, on_first_path && k == 0)?;
            prefix.pop();
            if let Flow::BackToFirstPath = flow {
                if !on_first_path {
                    return Ok(Flow::BackToFirstPath);
                }
            }
        }
        Ok(Flow::Continue)
    }

    /// Whether `v` is in the orbit of an explored vertex under the found
    /// automorphisms that fix `prefix` pointwise.
    fn same_orbit(&self, prefix: &[usize], explored: &[usize], v: usize, members: &[usize]) -> bool {
        let index: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut uf = UnionFind::new(members.len());
        for a in &self.autos {
            if prefix.iter().all(|&p| a[p] == p) {
                for (i, &m) in members.iter().enumerate() {
                    if let Some(&j) = index.get(&a[m]) {
                        uf.union(i, j);
                    }
                }
            }
        }
        let rv = uf.find(index[&v]);
        explored.iter().any(|e| uf.find(index[e]) == rv)
    }
}

fn canonical_labeling_inner(g: &LabeledGraph, colors: Option<&[u32]>, budget: &Budget) -> Result<CanonicalForm> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidInput("empty graph".into()));
    }
    if !g.is_connected() {
        return Err(Error::InvalidInput("graph is not connected".into()));
    }
    if let Some(c) = colors {
        if c.len() != n {
            return Err(Error::InvalidInput("coloring has the wrong length".into()));
        }
    }
    let mut search = Search {
        g,
        colors,
        first: None,
        best: None,
        autos: Vec::new(),
        nodes: 0,
        limit: budget.max_search,
    };
    let root = refine(g, initial_cells(n, colors));
    search.visit(root, &mut Vec::new(), true)?;
    let (enc, lab) = search.best.unwrap();
    let mut uf = UnionFind::new(n);
    for a in &search.autos {
        for v in 0..n {
            uf.union(lab[v], lab[a[v]]);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for p in 0..n {
        let root = uf.find(p);
        groups.entry(root).or_default().push(p);
    }
    let mut orbits: Vec<Vec<usize>> = groups.into_values().collect();
    orbits.sort();
    Ok(CanonicalForm {
        certificate: CanonicalCertificate {
            n,
            encoding: enc.iter().flat_map(|w| w.to_le_bytes()).collect(),
            orbits,
        },
        labeling: lab,
        automorphisms: search.autos,
        nodes: search.nodes,
    })
}

/// Canonical labelling, optionally respecting the graph's colors.
pub fn canonical_labeling(g: &LabeledGraph, use_colors: bool, budget: &Budget) -> Result<CanonicalForm> {
    let colors = if use_colors {
        Some(
            g.color
                .as_deref()
                .ok_or_else(|| Error::InvalidInput("graph has no colors".into()))?,
        )
    } else {
        None
    };
    canonical_labeling_inner(g, colors, budget)
}

pub fn canonical_form(g: &LabeledGraph, use_colors: bool, budget: &Budget) -> Result<CanonicalCertificate> {
    Ok(canonical_labeling(g, use_colors, budget)?.certificate)
}

/// Certificate of a ball with the distance to its center used as a color,
/// so only center-fixing isomorphisms are seen.
pub fn canonical_form_centered(g: &LabeledGraph, budget: &Budget) -> Result<CanonicalCertificate> {
    let dist = g
        .dist
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("graph has no distances".into()))?;
    Ok(canonical_labeling_inner(g, Some(dist), budget)?.certificate)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum IsoCheck {
    /// `map[v]` is the image in the second graph of vertex `v` of the first.
    Isomorphic(Vec<usize>),
    Mismatch(String),
}

fn histogram(cells: &Cells) -> Vec<usize> {
    cells.iter().map(Vec::len).collect()
}

/// An explicit isomorphism, verified edge by edge, or the first invariant
/// that tells the graphs apart.
pub fn are_isomorphic(g: &LabeledGraph, h: &LabeledGraph, use_colors: bool, budget: &Budget) -> Result<IsoCheck> {
    if g.vertex_count() != h.vertex_count() {
        return Ok(IsoCheck::Mismatch(format!(
            "vertex count {} vs {}",
            g.vertex_count(),
            h.vertex_count()
        )));
    }
    if g.edge_count() != h.edge_count() {
        return Ok(IsoCheck::Mismatch(format!(
            "edge count {} vs {}",
            g.edge_count(),
            h.edge_count()
        )));
    }
    let degrees = |x: &LabeledGraph| {
        let mut d: Vec<usize> = (0..x.vertex_count()).map(|v| x.degree(v)).collect();
        d.sort_unstable();
        d
    };
    if degrees(g) != degrees(h) {
        return Ok(IsoCheck::Mismatch("degree sequence".into()));
    }
    let pick = |x: &LabeledGraph| -> Result<Option<Vec<u32>>> {
        if use_colors {
            x.color
                .clone()
                .map(Some)
                .ok_or_else(|| Error::InvalidInput("graph has no colors".into()))
        } else {
            Ok(None)
        }
    };
    let (cg, ch) = (pick(g)?, pick(h)?);
    if let (Some(a), Some(b)) = (&cg, &ch) {
        let (mut a, mut b) = (a.clone(), b.clone());
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Ok(IsoCheck::Mismatch("color histogram".into()));
        }
    }
    let rg = refine(g, initial_cells(g.vertex_count(), cg.as_deref()));
    let rh = refine(h, initial_cells(h.vertex_count(), ch.as_deref()));
    if histogram(&rg) != histogram(&rh) {
        return Ok(IsoCheck::Mismatch("refinement histogram".into()));
    }
    let fg = canonical_labeling_inner(g, cg.as_deref(), budget)?;
    let fh = canonical_labeling_inner(h, ch.as_deref(), budget)?;
    if fg.certificate != fh.certificate {
        return Ok(IsoCheck::Mismatch("canonical form".into()));
    }
    let n = g.vertex_count();
    let mut at = vec![0; n];
    for (v, &p) in fh.labeling.iter().enumerate() {
        at[p] = v;
    }
    let map: Vec<usize> = fg.labeling.iter().map(|&p| at[p]).collect();
    let edges_ok = g.edges().iter().all(|&(u, v)| h.has_edge(map[u], map[v]));
    let colors_ok = match (&cg, &ch) {
        (Some(a), Some(b)) => (0..n).all(|v| a[v] == b[map[v]]),
        _ => true,
    };
    if !(edges_ok && colors_ok) {
        return Err(Error::Verification(
            "equal certificates but the induced map is not an isomorphism".into(),
        ));
    }
    Ok(IsoCheck::Isomorphic(map))
}
