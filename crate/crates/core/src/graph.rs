//! Undirected simple graphs, matchings, an exact maximum-matching oracle and
//! generators for the instance families used by the experiments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Largest vertex count accepted by the exact matching oracle.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// A set of vertex-disjoint edges, stored as a mate table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matching {
    mate: Vec<Option<Vertex>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            mate: vec![None; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut m = Matching::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidEdge(u, v, "endpoint out of range"));
            }
            if u == v {
                return Err(Error::InvalidEdge(u, v, "self-loop"));
            }
            if m.mate[u].is_some() || m.mate[v].is_some() {
                return Err(Error::InvalidMatching(format!(
                    "edge ({u}, {v}) shares an endpoint with another edge"
                )));
            }
            m.mate[u] = Some(v);
            m.mate[v] = Some(u);
        }
        Ok(m)
    }

    pub(crate) fn pair(&mut self, u: Vertex, v: Vertex) {
        debug_assert!(self.mate[u].is_none() && self.mate[v].is_none());
        self.mate[u] = Some(v);
        self.mate[v] = Some(u);
    }

    pub fn vertex_count(&self) -> usize {
        self.mate.len()
    }

    pub fn mate(&self, v: Vertex) -> Option<Vertex> {
        self.mate.get(v).copied().flatten()
    }

    pub fn is_matched(&self, v: Vertex) -> bool {
        self.mate(v).is_some()
    }

    pub fn contains(&self, u: Vertex, v: Vertex) -> bool {
        self.mate(u) == Some(v)
    }

    pub fn size(&self) -> usize {
        self.mate.iter().flatten().count() / 2
    }

    /// Edges as canonical `(min, max)` pairs in increasing order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.mate
            .iter()
            .enumerate()
            .filter_map(|(u, m)| m.filter(|&v| u < v).map(|v| (u, v)))
            .collect()
    }

    /// Checks that every matched pair is an edge of `g`.
    pub fn check_on(&self, g: &Graph) -> Result<()> {
        if self.mate.len() != g.vertex_count() {
            return Err(Error::InvalidMatching(format!(
                "matching covers {} vertices, graph has {}",
                self.mate.len(),
                g.vertex_count()
            )));
        }
        for (u, v) in self.edges() {
            if !g.has_edge(u, v) {
                return Err(Error::InvalidMatching(format!(
                    "({u}, {v}) is not an edge of the graph"
                )));
            }
        }
        Ok(())
    }
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.edges().serialize(s)
    }
}

/// Immutable undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<Vertex>>,
    perfect_matching: Option<Matching>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[Vertex; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    perfect_matching: Option<Vec<[Vertex; 2]>>,
}

impl Graph {
    /// Builds a canonical graph; duplicate pairs collapse.
    pub fn new(n: usize, edge_list: &[(Vertex, Vertex)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edge_list {
            if u >= n || v >= n {
                return Err(Error::InvalidEdge(u, v, "endpoint out of range"));
            }
            if u == v {
                return Err(Error::InvalidEdge(u, v, "self-loop"));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges,
            adj,
            perfect_matching: None,
        })
    }

    /// Attaches a designated maximum matching M*.
    pub fn with_perfect_matching(mut self, m: Matching) -> Result<Self> {
        m.check_on(&self)?;
        self.perfect_matching = Some(m);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn designated_matching(&self) -> Option<&Matching> {
        self.perfect_matching.as_ref()
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.n
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Returns a copy with `extra` new vertices appended and the given edges added.
    pub fn extended(&self, extra: usize, new_edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.extend_from_slice(new_edges);
        Graph::new(self.n + extra, &edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing `n m` header".into()))?;
        let [n, m] = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let [u, v] = parse_pair(line)?;
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        Graph::new(n, &edges)
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            perfect_matching: self
                .perfect_matching
                .as_ref()
                .map(|m| m.edges().into_iter().map(|(u, v)| [u, v]).collect()),
        };
        serde_json::to_string(&doc).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let edges: Vec<_> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = Graph::new(doc.n, &edges)?;
        match doc.perfect_matching {
            Some(pm) => {
                let pm: Vec<_> = pm.iter().map(|e| (e[0], e[1])).collect();
                let m = Matching::from_edges(doc.n, &pm)?;
                g.with_perfect_matching(m)
            }
            None => Ok(g),
        }
    }

    fn adjacency_masks(&self) -> Vec<u32> {
        self.adj
            .iter()
            .map(|list| list.iter().fold(0u32, |m, &w| m | (1 << w)))
            .collect()
    }
}

fn parse_pair(line: &str) -> Result<[usize; 2]> {
    let mut it = line.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|e| Error::Parse(format!("`{line}`: {e}")))
    });
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok([a?, b?]),
        _ => Err(Error::Parse(format!("expected two integers, got `{line}`"))),
    }
}

/// Exact maximum matching by memoized search over vertex subsets.
pub fn maximum_matching(g: &Graph) -> Result<Matching> {
    let n = g.vertex_count();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let adj = g.adjacency_masks();
    // memo[mask] = 1 + best size, 0 = not computed yet
    let mut memo = vec![0u8; 1usize << n];
    fn best(mask: u32, adj: &[u32], memo: &mut [u8]) -> u8 {
        if mask == 0 {
            return 0;
        }
        if memo[mask as usize] != 0 {
            return memo[mask as usize] - 1;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut r = best(rest, adj, memo);
        let mut cand = adj[v] & rest;
        while cand != 0 {
            let w = cand.trailing_zeros();
            cand &= cand - 1;
            r = r.max(1 + best(rest & !(1 << w), adj, memo));
        }
        memo[mask as usize] = r + 1;
        r
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    best(full, &adj, &mut memo);

    let mut m = Matching::empty(n);
    let mut mask = full;
    while mask != 0 {
        let target = best(mask, &adj, &mut memo);
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        if best(rest, &adj, &mut memo) == target {
            mask = rest;
            continue;
        }
        let mut cand = adj[v] & rest;
        loop {
            let w = cand.trailing_zeros();
            cand &= cand - 1;
            let next = rest & !(1 << w);
            if 1 + best(next, &adj, &mut memo) == target {
                m.pair(v, w as usize);
                mask = next;
                break;
            }
        }
    }
    Ok(m)
}

pub fn maximum_matching_size(g: &Graph) -> Result<usize> {
    maximum_matching(g).map(|m| m.size())
}

/// Instance families; random ones are deterministic in the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Path { n: usize },
    Cycle { n: usize },
    Complete { n: usize },
    CompleteBipartite { left: usize, right: usize },
    RandomWithPerfectMatching { n: usize, density: f64, seed: u64 },
    AppendixCounterexample,
}

impl Family {
    /// Resolves a family by CLI name. Bipartite splits `n` as evenly as possible.
    pub fn from_name(name: &str, n: usize, density: f64, seed: u64) -> Result<Self> {
        Ok(match name {
            "path" => Family::Path { n },
            "cycle" => Family::Cycle { n },
            "complete" => Family::Complete { n },
            "complete_bipartite" => Family::CompleteBipartite {
                left: n / 2,
                right: n - n / 2,
            },
            "random_with_perfect_matching" => {
                Family::RandomWithPerfectMatching { n, density, seed }
            }
            "appendix_counterexample" => Family::AppendixCounterexample,
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }
}

pub fn generate_family(family: &Family) -> Result<Graph> {
    match *family {
        Family::Path { n } => {
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            Graph::new(n, &edges)
        }
        Family::Cycle { n } => {
            if n < 3 {
                return Err(Error::InvalidParameter(format!(
                    "cycle needs at least 3 vertices, got {n}"
                )));
            }
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            Graph::new(n, &edges)
        }
        Family::Complete { n } => {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            Graph::new(n, &edges)
        }
        Family::CompleteBipartite { left, right } => {
            let mut edges = Vec::new();
            for u in 0..left {
                for v in 0..right {
                    edges.push((u, left + v));
                }
            }
            Graph::new(left + right, &edges)
        }
        Family::RandomWithPerfectMatching { n, density, seed } => {
            if n == 0 || n % 2 == 1 {
                return Err(Error::OddVertexCount {
                    family: "random_with_perfect_matching",
                    n,
                });
            }
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::InvalidParameter(format!(
                    "density {density} outside [0, 1]"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<Vertex> = (0..n).collect();
            perm.shuffle(&mut rng);
            let planted: Vec<_> = perm
                .chunks(2)
                .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
                .collect();
            let mut edges = planted.clone();
            for u in 0..n {
                for v in u + 1..n {
                    if planted.contains(&(u, v)) {
                        continue;
                    }
                    if rng.random::<f64>() < density {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::new(n, &edges)?;
            let m = Matching::from_edges(n, &planted)?;
            g.with_perfect_matching(m)
        }
        Family::AppendixCounterexample => appendix_counterexample(),
    }
}

/// Vertex ids of the backup counterexample graph.
pub mod appendix {
    use super::Vertex;
    pub const U: Vertex = 0;
    pub const U1: Vertex = 1;
    pub const V: Vertex = 2;
    pub const V1: Vertex = 3;
    pub const W: Vertex = 4;
}

/// Five vertices where u's backup is itself matched under the order (u, u1, v, v1, w).
pub fn appendix_counterexample() -> Result<Graph> {
    use appendix::*;
    Graph::new(5, &[(U, V), (U, V1), (U, W), (U1, V1)])
}

/// All connected graphs on `n` vertices, one per isomorphism class, in a
/// deterministic order.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!((1..=7).contains(&n), "connected_graphs supports 1..=7 vertices");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let mut index = vec![vec![0usize; n]; n];
    for (i, &(u, v)) in pairs.iter().enumerate() {
        index[u][v] = i;
        index[v][u] = i;
    }
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        if !mask_connected(n, &pairs, mask) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut out = 0u64;
                for (i, &(u, v)) in pairs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        out |= 1 << index[p[u]][p[v]];
                    }
                }
                out
            })
            .min()
            .unwrap_or(0);
        seen.insert(canon);
    }
    seen.into_iter()
        .map(|mask| {
            let edges: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            Graph::new(n, &edges).expect("canonical edges are valid")
        })
        .collect()
}

fn mask_connected(n: usize, pairs: &[(usize, usize)], mask: u64) -> bool {
    let mut reach = 1u32;
    loop {
        let mut next = reach;
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 && (reach >> u & 1 == 1 || reach >> v & 1 == 1) {
                next |= 1 << u | 1 << v;
            }
        }
        if next == reach {
            return reach.count_ones() as usize == n;
        }
        reach = next;
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_max_matching(g: &Graph) -> usize {
        let e = g.edges();
        let mut best = 0;
        for mask in 0u32..(1 << e.len()) {
            let mut used = 0u64;
            let mut ok = true;
            for (i, &(u, v)) in e.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if used >> u & 1 == 1 || used >> v & 1 == 1 {
                        ok = false;
                        break;
                    }
                    used |= 1 << u | 1 << v;
                }
            }
            if ok {
                best = best.max(mask.count_ones() as usize);
            }
        }
        best
    }

    #[test]
    fn make_graph_examples() {
        let k2 = Graph::new(2, &[(0, 1)]).unwrap();
        assert_eq!(k2.edge_count(), 1);
        let dup = Graph::new(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(dup, k2);
        assert_eq!(
            Graph::new(3, &[(0, 3)]),
            Err(Error::InvalidEdge(0, 3, "endpoint out of range"))
        );
        assert_eq!(
            Graph::new(3, &[(1, 1)]),
            Err(Error::InvalidEdge(1, 1, "self-loop"))
        );
        let a = appendix_counterexample().unwrap();
        assert_eq!(a.edges(), &[(0, 2), (0, 3), (0, 4), (1, 3)]);
    }

    #[test]
    fn maximum_matching_examples() {
        let p4 = generate_family(&Family::Path { n: 4 }).unwrap();
        assert_eq!(maximum_matching_size(&p4).unwrap(), 2);
        let c5 = generate_family(&Family::Cycle { n: 5 }).unwrap();
        assert_eq!(maximum_matching_size(&c5).unwrap(), 2);
        let a = appendix_counterexample().unwrap();
        assert_eq!(maximum_matching_size(&a).unwrap(), naive_max_matching(&a));
        assert_eq!(maximum_matching_size(&a).unwrap(), 2);
        let big = generate_family(&Family::Path { n: 25 }).unwrap();
        assert!(matches!(
            maximum_matching_size(&big),
            Err(Error::SizeLimit { n: 25, .. })
        ));
    }

    #[test]
    fn maximum_matching_returns_valid_matching() {
        let g = generate_family(&Family::Complete { n: 7 }).unwrap();
        let m = maximum_matching(&g).unwrap();
        m.check_on(&g).unwrap();
        assert_eq!(m.size(), 3);
    }

    #[test]
    fn families() {
        let k4 = generate_family(&Family::Complete { n: 4 }).unwrap();
        assert_eq!(k4.edge_count(), 6);
        let kb = generate_family(&Family::CompleteBipartite { left: 2, right: 3 }).unwrap();
        assert_eq!(kb.edge_count(), 6);
        let family = Family::RandomWithPerfectMatching {
            n: 8,
            density: 0.3,
            seed: 7,
        };
        let g = generate_family(&family).unwrap();
        assert_eq!(g, generate_family(&family).unwrap());
        assert_eq!(g.designated_matching().unwrap().size(), 4);
        assert_eq!(maximum_matching_size(&g).unwrap(), 4);
        assert!(matches!(
            generate_family(&Family::RandomWithPerfectMatching {
                n: 5,
                density: 0.3,
                seed: 1
            }),
            Err(Error::OddVertexCount { .. })
        ));
        assert!(matches!(
            Family::from_name("petersen", 10, 0.0, 0),
            Err(Error::UnknownFamily(_))
        ));
    }

    #[test]
    fn text_and_json_round_trip() {
        let g = generate_family(&Family::RandomWithPerfectMatching {
            n: 6,
            density: 0.5,
            seed: 3,
        })
        .unwrap();
        let plain = Graph::new(g.vertex_count(), g.edges()).unwrap();
        assert_eq!(Graph::from_text(&g.to_text()).unwrap(), plain);
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
        assert!(Graph::from_text("3 2\n0 1\n").is_err());
    }

    #[test]
    fn connected_graph_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21]);
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_graph() -> impl Strategy<Value = Graph> {
            (1usize..=8).prop_flat_map(|n| {
                proptest::collection::vec((0..n, 0..n), 0..14).prop_map(move |pairs| {
                    let edges: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                    Graph::new(n, &edges).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn exact_matching_agrees_with_naive(g in small_graph()) {
                let m = maximum_matching(&g).unwrap();
                m.check_on(&g).unwrap();
                prop_assert_eq!(m.size(), naive_max_matching(&g));
            }

            #[test]
            fn planted_matching_is_maximum(n in (1usize..=5).prop_map(|h| 2 * h), density in 0.0f64..1.0, seed: u64) {
                let g = generate_family(&Family::RandomWithPerfectMatching { n, density, seed }).unwrap();
                prop_assert_eq!(maximum_matching_size(&g).unwrap(), n / 2);
            }
        }
    }
}
