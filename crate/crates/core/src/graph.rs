//! Undirected proximity graph and the independent-set / clique predicates
//! used by presolve and verification.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityGraph {
    n: usize,
    adj: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl ProximityGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![false; n * n],
            neighbors: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j).expect("in range");
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `{i, j}`; repeated edges are ignored, self-loops rejected.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::Validation(format!("self-loop on vertex {i}")));
        }
        if !self.adj[i * self.n + j] {
            self.adj[i * self.n + j] = true;
            self.adj[j * self.n + i] = true;
            self.neighbors[i].push(j);
            self.neighbors[j].push(i);
            self.neighbors[i].sort_unstable();
            self.neighbors[j].sort_unstable();
        }
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adj[i * self.n + j]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors[i]
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i, j))
        })
    }

    pub fn complement(&self) -> Self {
        let mut g = Self::new(self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.has_edge(i, j) {
                    g.add_edge(i, j).expect("in range");
                }
            }
        }
        g
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::Validation(format!(
                "vertex {v} out of range for graph on {} vertices",
                self.n
            )));
        }
        Ok(())
    }

    /// Edge-list text: vertex count on the first line, then one `i j` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}").expect("string write");
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("missing vertex count".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Format(format!("bad vertex count {header:?}")))?;
        let mut g = Self::new(n);
        for line in lines {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize> {
                it.next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Format(format!("bad edge line {line:?}")))
            };
            let (i, j) = (next()?, next()?);
            g.add_edge(i, j)?;
        }
        Ok(g)
    }
}

/// Greedy minimum-degree independent set.
///
/// Repeatedly picks the vertex of smallest degree in the residual graph
/// (lowest index on ties), keeps it, and deletes it together with its
/// residual neighbours. The result is a maximal independent set.
pub fn greedy_independent_set(g: &ProximityGraph) -> Vec<usize> {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut remaining = n;
    let mut chosen = Vec::new();
    while remaining > 0 {
        let pick = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("remaining > 0");
        chosen.push(pick);
        let mut removed = vec![pick];
        removed.extend(g.neighbors(pick).iter().copied().filter(|&u| alive[u]));
        for &v in &removed {
            alive[v] = false;
            remaining -= 1;
        }
        for &v in &removed {
            for &u in g.neighbors(v) {
                if alive[u] {
                    degree[u] -= 1;
                }
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

fn check_vertices(g: &ProximityGraph, s: &[usize]) -> Result<()> {
    s.iter().try_for_each(|&v| g.check_vertex(v))
}

pub fn is_independent(g: &ProximityGraph, s: &[usize]) -> Result<bool> {
    check_vertices(g, s)?;
    Ok(s.iter()
        .enumerate()
        .all(|(k, &u)| s[k + 1..].iter().all(|&v| u != v && !g.has_edge(u, v))))
}

pub fn is_clique(g: &ProximityGraph, s: &[usize]) -> Result<bool> {
    check_vertices(g, s)?;
    Ok(s.iter()
        .enumerate()
        .all(|(k, &u)| s[k + 1..].iter().all(|&v| u == v || g.has_edge(u, v))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> ProximityGraph {
        ProximityGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_independent_set(&ProximityGraph::new(5)), vec![0, 1, 2, 3, 4]);
        assert_eq!(greedy_independent_set(&ProximityGraph::complete(4)).len(), 1);
        assert_eq!(greedy_independent_set(&path3()), vec![0, 2]);
    }

    #[test]
    fn greedy_recomputes_residual_degrees() {
        // Star centre 0 with leaves 1..=3, leaf 3 also tied to a pendant 4.
        // Initial minimum degree is vertex 1 (deg 1); after removing {1, 0}
        // vertex 2 is isolated (deg 0) and is picked before 3 and 4.
        let g = ProximityGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap();
        assert_eq!(greedy_independent_set(&g), vec![1, 2, 3]);
    }

    #[test]
    fn predicates() {
        let g = path3();
        assert!(is_independent(&g, &[]).unwrap());
        assert!(is_independent(&g, &[1]).unwrap());
        assert!(!is_independent(&g, &[0, 1]).unwrap());
        assert!(is_clique(&g, &[]).unwrap());
        assert!(is_clique(&g, &[2]).unwrap());
        assert!(is_clique(&g, &[1, 2]).unwrap());
        assert!(!is_clique(&g, &[0, 2]).unwrap());
        assert!(matches!(is_clique(&g, &[3]), Err(Error::Validation(_))));
        assert!(is_independent(&g, &[0, 7]).is_err());
    }

    #[test]
    fn edge_list_roundtrip_and_errors() {
        let g = ProximityGraph::from_edges(4, &[(0, 3), (1, 2), (2, 3)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "4\n0 3\n1 2\n2 3\n");
        assert_eq!(ProximityGraph::parse_edge_list(&text).unwrap(), g);
        assert!(ProximityGraph::parse_edge_list("").is_err());
        assert!(ProximityGraph::parse_edge_list("3\n0 x\n").is_err());
        assert!(ProximityGraph::parse_edge_list("3\n0 3\n").is_err());
        assert!(ProximityGraph::parse_edge_list("3\n1 1\n").is_err());
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = ProximityGraph> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let mut g = ProximityGraph::new(n);
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if bits[k] {
                            g.add_edge(i, j).unwrap();
                        }
                        k += 1;
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn greedy_output_is_independent_and_maximal(g in arb_graph(12)) {
            let s = greedy_independent_set(&g);
            prop_assert!(!s.is_empty());
            prop_assert!(is_independent(&g, &s).unwrap());
            for v in 0..g.n() {
                prop_assert!(s.contains(&v) || s.iter().any(|&u| g.has_edge(u, v)));
            }
        }

        #[test]
        fn adjacency_symmetric_irreflexive(g in arb_graph(12)) {
            for i in 0..g.n() {
                prop_assert!(!g.has_edge(i, i));
                for j in 0..g.n() {
                    prop_assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                }
            }
        }

        #[test]
        fn clique_iff_independent_in_complement(g in arb_graph(12), mask in any::<u16>()) {
            let s: Vec<usize> = (0..g.n()).filter(|&v| mask & (1 << v) != 0).collect();
            // Complement built explicitly here rather than via `complement()`.
            let mut comp = ProximityGraph::new(g.n());
            for i in 0..g.n() {
                for j in i + 1..g.n() {
                    if !g.has_edge(i, j) {
                        comp.add_edge(i, j).unwrap();
                    }
                }
            }
            prop_assert_eq!(is_clique(&g, &s).unwrap(), is_independent(&comp, &s).unwrap());
            prop_assert_eq!(comp, g.complement());
        }
    }
}
