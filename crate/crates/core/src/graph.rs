//! Finite simple graphs with optional module payloads, colors and distances.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    adj: Vec<Vec<usize>>,
    pub payload: Option<Vec<String>>,
    pub color: Option<Vec<u32>>,
    pub dist: Option<Vec<u32>>,
    pub meta: Option<Value>,
}

/// Exact distance statistics of a graph, as needed by the polygon test.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ShapeStats {
    pub vertices: usize,
    pub connected: bool,
    pub bipartite: bool,
    pub diameter: Option<u32>,
    pub girth: Option<u32>,
    pub min_degree: usize,
}

impl LabeledGraph {
    pub fn new(n: usize) -> Self {
        LabeledGraph {
            adj: vec![Vec::new(); n],
            ..Default::default()
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = LabeledGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.adj.len();
        if u >= n || v >= n {
            return Err(Error::InvalidInput(format!("edge ({u},{v}) out of range")));
        }
        if u == v {
            return Err(Error::InvalidInput(format!("loop at {u}")));
        }
        match self.adj[u].binary_search(&v) {
            Ok(_) => Err(Error::InvalidInput(format!("duplicate edge ({u},{v})"))),
            Err(pos) => {
                self.adj[u].insert(pos, v);
                let pos = self.adj[v].binary_search(&u).unwrap_err();
                self.adj[v].insert(pos, u);
                Ok(())
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// BFS distances from `src`; `u32::MAX` marks unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.adj.len()];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.adj.is_empty() || self.bfs(0).iter().all(|&d| d != u32::MAX)
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.adj.len()];
        let mut count = 0;
        for s in 0..self.adj.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    pub fn is_forest(&self) -> bool {
        self.edge_count() + self.component_count() == self.vertex_count()
    }

    pub fn is_bipartite(&self) -> bool {
        let mut side = vec![u8::MAX; self.adj.len()];
        for s in 0..self.adj.len() {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if side[v] == u8::MAX {
                        side[v] = 1 - side[u];
                        queue.push_back(v);
                    } else if side[v] == side[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Length of a shortest cycle, by BFS from every vertex.
    pub fn girth(&self) -> Option<u32> {
        let n = self.adj.len();
        let mut best = u32::MAX;
        for s in 0..n {
            let mut dist = vec![u32::MAX; n];
            let mut parent = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 1 >= best {
                    break;
                }
                for &v in &self.adj[u] {
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else if parent[u] != v {
                        best = best.min(dist[u] + dist[v] + 1);
                    }
                }
            }
        }
        (best != u32::MAX).then_some(best)
    }

    /// Largest BFS distance; `None` when disconnected or empty.
    pub fn diameter(&self) -> Option<u32> {
        if self.adj.is_empty() {
            return None;
        }
        let mut best = 0;
        for s in 0..self.adj.len() {
            let far = *self.bfs(s).iter().max().unwrap();
            if far == u32::MAX {
                return None;
            }
            best = best.max(far);
        }
        Some(best)
    }

    pub fn shape_stats(&self) -> ShapeStats {
        ShapeStats {
            vertices: self.vertex_count(),
            connected: self.is_connected(),
            bipartite: self.is_bipartite(),
            diameter: self.diameter(),
            girth: self.girth(),
            min_degree: self.adj.iter().map(Vec::len).min().unwrap_or(0),
        }
    }

    /// Induced subgraph on `vertices` (kept in the given order), carrying
    /// the annotations along.
    pub fn induced(&self, vertices: &[usize]) -> LabeledGraph {
        let mut index = vec![usize::MAX; self.adj.len()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut g = LabeledGraph::new(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            let mut nb: Vec<usize> = self.adj[v]
                .iter()
                .filter_map(|&w| (index[w] != usize::MAX).then_some(index[w]))
                .collect();
            nb.sort_unstable();
            g.adj[i] = nb;
        }
        let pick = |xs: &Vec<u32>| vertices.iter().map(|&v| xs[v]).collect();
        g.color = self.color.as_ref().map(pick);
        g.dist = self.dist.as_ref().map(pick);
        g.payload = self
            .payload
            .as_ref()
            .map(|p| vertices.iter().map(|&v| p[v].clone()).collect());
        g
    }

    /// The graph with vertex `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> LabeledGraph {
        let n = self.adj.len();
        assert_eq!(perm.len(), n);
        let mut g = LabeledGraph::new(n);
        for (u, nb) in self.adj.iter().enumerate() {
            let mut row: Vec<usize> = nb.iter().map(|&v| perm[v]).collect();
            row.sort_unstable();
            g.adj[perm[u]] = row;
        }
        let move_all = |xs: &Vec<u32>| {
            let mut out = vec![0; n];
            for (v, &x) in xs.iter().enumerate() {
                out[perm[v]] = x;
            }
            out
        };
        g.color = self.color.as_ref().map(move_all);
        g.dist = self.dist.as_ref().map(move_all);
        g.payload = self.payload.as_ref().map(|p| {
            let mut out = vec![String::new(); n];
            for (v, s) in p.iter().enumerate() {
                out[perm[v]] = s.clone();
            }
            out
        });
        g.meta = self.meta.clone();
        g
    }

    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = (0..self.adj.len())
            .map(|v| {
                json!({
                    "id": v,
                    "module": self.payload.as_ref().map(|p| p[v].clone()),
                    "tau": self.color.as_ref().map(|c| c[v]),
                    "dist": self.dist.as_ref().map(|d| d[v]),
                })
            })
            .collect();
        let edges: Vec<Value> = self.edges().into_iter().map(|(u, v)| json!([u, v])).collect();
        json!({
            "meta": self.meta.clone().unwrap_or(Value::Null),
            "vertices": vertices,
            "edges": edges,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("graph json: {msg}"));
        let vertices = value
            .get("vertices")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing vertices"))?;
        let n = vertices.len();
        let mut g = LabeledGraph::new(n);
        let mut payload = Vec::with_capacity(n);
        let mut colors = Vec::with_capacity(n);
        let mut dists = Vec::with_capacity(n);
        for (i, v) in vertices.iter().enumerate() {
            let id = v.get("id").and_then(Value::as_u64).ok_or_else(|| bad("vertex id"))?;
            if id as usize != i {
                return Err(bad("vertex ids must be 0..n in order"));
            }
            payload.push(v.get("module").and_then(Value::as_str).map(str::to_owned));
            colors.push(v.get("tau").and_then(Value::as_u64).map(|c| c as u32));
            dists.push(v.get("dist").and_then(Value::as_u64).map(|c| c as u32));
        }
        fn all_or_none<T>(xs: Vec<Option<T>>) -> Option<Vec<T>> {
            xs.into_iter().collect()
        }
        g.payload = all_or_none(payload);
        g.color = all_or_none(colors);
        g.dist = all_or_none(dists);
        let edges = value
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing edges"))?;
        for e in edges {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("edge"))?;
            let u = pair[0].as_u64().ok_or_else(|| bad("edge endpoint"))? as usize;
            let v = pair[1].as_u64().ok_or_else(|| bad("edge endpoint"))? as usize;
            g.add_edge(u, v)?;
        }
        g.meta = value.get("meta").filter(|m| !m.is_null()).cloned();
        Ok(g)
    }

    /// Graphviz rendering; colors become `colorscheme` indices.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph ball {\n  node [style=filled, colorscheme=set19];\n");
        for v in 0..self.adj.len() {
            let mut attrs = Vec::new();
            if let Some(c) = &self.color {
                attrs.push(format!("fillcolor={}", c[v] % 9 + 1));
                attrs.push(format!("tau={}", c[v]));
            }
            if let Some(d) = &self.dist {
                attrs.push(format!("dist={}", d[v]));
            }
            if let Some(p) = &self.payload {
                attrs.push(format!("module=\"{}\"", p[v]));
            }
            let _ = writeln!(out, "  {v} [{}];", attrs.join(", "));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }
}

/// Small graphs used in tests and examples.
pub mod fixtures {
    use super::LabeledGraph;

    pub fn cycle(n: usize) -> LabeledGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        LabeledGraph::from_edges(n, &edges).unwrap()
    }

    pub fn path(n: usize) -> LabeledGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        LabeledGraph::from_edges(n, &edges).unwrap()
    }

    /// `K_{1,k}` with center 0.
    pub fn star(k: usize) -> LabeledGraph {
        let edges: Vec<_> = (1..=k).map(|i| (0, i)).collect();
        LabeledGraph::from_edges(k + 1, &edges).unwrap()
    }

    /// Point-line incidence graph of the Fano plane: points `0..7`, lines
    /// `7..14`, line `i` = `{i, i+1, i+3} mod 7`.
    pub fn fano_incidence() -> LabeledGraph {
        let mut edges = Vec::new();
        for i in 0..7 {
            for s in [0, 1, 3] {
                edges.push(((i + s) % 7, 7 + i));
            }
        }
        LabeledGraph::from_edges(14, &edges).unwrap()
    }

    /// Alternating 2-coloring of an even cycle.
    pub fn alternating(n: usize) -> Vec<u32> {
        (0..n).map(|i| (i % 2) as u32).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn cycle_stats() {
        let s = cycle(6).shape_stats();
        assert!(s.connected && s.bipartite);
        assert_eq!((s.diameter, s.girth, s.min_degree), (Some(3), Some(6), 2));
        assert!(!cycle(7).is_bipartite());
        assert_eq!(cycle(7).girth(), Some(7));
    }

    #[test]
    fn fano_stats() {
        let g = fano_incidence();
        assert_eq!((g.vertex_count(), g.edge_count()), (14, 21));
        let s = g.shape_stats();
        assert_eq!((s.diameter, s.girth, s.min_degree), (Some(3), Some(6), 3));
    }

    #[test]
    fn trees() {
        assert!(path(5).is_forest());
        assert!(star(3).is_forest());
        assert_eq!(path(5).girth(), None);
        assert!(!cycle(4).is_forest());
    }

    #[test]
    fn rejects_loops_and_duplicates() {
        let mut g = LabeledGraph::new(3);
        assert!(g.add_edge(1, 1).is_err());
        g.add_edge(0, 1).unwrap();
        assert!(g.add_edge(1, 0).is_err());
        assert!(g.add_edge(0, 3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut g = cycle(4);
        g.color = Some(alternating(4));
        g.dist = Some(vec![0, 1, 2, 1]);
        g.payload = Some(vec!["a".into(), "b".into(), "c".into(), "d".into()]);
        let back = LabeledGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(g.to_dot().contains("0 -- 1;"));
    }

    #[test]
    fn relabel_and_induced() {
        let g = path(4);
        let h = g.relabel(&[3, 2, 1, 0]);
        assert_eq!(h.edges(), vec![(0, 1), (1, 2), (2, 3)]);
        let sub = cycle(6).induced(&[0, 1, 2]);
        assert_eq!(sub.edges(), vec![(0, 1), (1, 2)]);
    }
}
