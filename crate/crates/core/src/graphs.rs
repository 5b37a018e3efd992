//! Labelled graphs on up to 8 vertices.
//!
//! An edge set is a bitmask over the n(n−1)/2 vertex pairs in canonical order
//! (0,1),(0,2),…,(0,n−1),(1,2),…; iterating masks in increasing order fixes
//! the order in which every cluster sum is accumulated.

use crate::{Error, Result};

pub const MAX_VERTICES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledGraph {
    n: usize,
    edges: u64,
    /// The first `white` labels are white, the rest black.
    white: usize,
}

/// Position of the pair {i, j} (i ≠ j, 0-based) in the canonical order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl LabeledGraph {
    pub fn new(n: usize, edges: u64) -> Self {
        assert!(n <= MAX_VERTICES, "at most {MAX_VERTICES} vertices");
        assert!(pair_count(n) == 64 || edges >> pair_count(n) == 0, "edge bit out of range");
        LabeledGraph { n, edges, white: n }
    }

    /// Builds from 0-based pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut e = 0u64;
        for &(i, j) in pairs {
            assert!(i != j && i < n && j < n, "bad pair ({i},{j})");
            e |= 1 << pair_index(n, i, j);
        }
        Self::new(n, e)
    }

    pub fn with_white(mut self, white: usize) -> Self {
        assert!(white <= self.n);
        self.white = white;
        self
    }

    pub fn vertices(&self) -> usize {
        self.n
    }
    pub fn mask(&self) -> u64 {
        self.edges
    }
    pub fn white(&self) -> usize {
        self.white
    }
    pub fn edge_count(&self) -> usize {
        self.edges.count_ones() as usize
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges >> pair_index(self.n, i, j) & 1 == 1
    }

    /// 0-based edges in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Neighbour bitmask of each vertex.
    pub fn adjacency(&self) -> Vec<u32> {
        let mut adj = vec![0u32; self.n];
        for (i, j) in self.edges() {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        adj
    }

    /// One line: `n=<n> edges=<i-j,...> white=<count>`, labels 1-based.
    pub fn dump(&self) -> String {
        let e: Vec<String> = self.edges().iter().map(|(i, j)| format!("{}-{}", i + 1, j + 1)).collect();
        format!("n={} edges={} white={}", self.n, e.join(","), self.white)
    }
}

fn reach(adj: &[u32], start: usize, allowed: u32) -> u32 {
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= adj[v];
        }
        next &= allowed & !seen;
        seen |= next;
        frontier = next;
    }
    seen
}

fn full(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

/// Predicates of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub connected: bool,
    pub biconnected: bool,
    pub tree: bool,
    pub articulation_free: bool,
}

pub fn is_connected(g: &LabeledGraph) -> bool {
    g.n <= 1 || reach(&g.adjacency(), 0, full(g.n)) == full(g.n)
}

/// Connected and still connected after deleting any one vertex; the single
/// edge on two vertices counts as 2-connected.
pub fn is_biconnected(g: &LabeledGraph) -> bool {
    match g.n {
        0 | 1 => false,
        2 => g.edges == 1,
        n => {
            let adj = g.adjacency();
            let all = full(n);
            if reach(&adj, 0, all) != all {
                return false;
            }
            (0..n).all(|v| {
                let rest = all & !(1 << v);
                let s = rest.trailing_zeros() as usize;
                reach(&adj, s, rest) == rest
            })
        }
    }
}

pub fn is_tree(g: &LabeledGraph) -> bool {
    g.n >= 1 && g.edge_count() == g.n - 1 && is_connected(g)
}

/// Connected, and no vertex whose removal splits the graph into two or more
/// parts at least one of which contains no white vertex.
pub fn is_articulation_free(g: &LabeledGraph) -> bool {
    if !is_connected(g) {
        return false;
    }
    let adj = g.adjacency();
    let all = full(g.n);
    let whites = full(g.white);
    for v in 0..g.n {
        let mut rest = all & !(1 << v);
        let mut parts = Vec::new();
        while rest != 0 {
            let c = reach(&adj, rest.trailing_zeros() as usize, rest);
            parts.push(c);
            rest &= !c;
        }
        if parts.len() >= 2 && parts.iter().any(|&c| c & whites == 0) {
            return false;
        }
    }
    true
}

pub fn classify(g: &LabeledGraph) -> Classification {
    Classification {
        connected: is_connected(g),
        biconnected: is_biconnected(g),
        tree: is_tree(g),
        articulation_free: is_articulation_free(g),
    }
}

fn guard(what: &str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if n < lo || n > hi {
        return Err(Error::Guard(format!("{what} needs {lo} <= n <= {hi}, got {n}")));
    }
    Ok(())
}

/// All 2^{n(n−1)/2} labelled graphs on n vertices, in mask order.
pub fn enumerate_all(n: usize) -> impl Iterator<Item = LabeledGraph> {
    (0u64..1 << pair_count(n)).map(move |e| LabeledGraph::new(n, e))
}

pub fn enumerate_connected(n: usize) -> Result<impl Iterator<Item = LabeledGraph>> {
    guard("connected enumeration", n, 1, 6)?;
    Ok(enumerate_all(n).filter(is_connected))
}

pub fn enumerate_biconnected(n: usize) -> Result<impl Iterator<Item = LabeledGraph>> {
    guard("biconnected enumeration", n, 2, 6)?;
    Ok(enumerate_all(n).filter(is_biconnected))
}

/// Labelled trees by Prüfer decoding (n^{n−2} of them).
pub fn enumerate_trees(n: usize) -> Result<impl Iterator<Item = LabeledGraph>> {
    guard("tree enumeration", n, 1, MAX_VERTICES)?;
    let len = n.saturating_sub(2);
    let total = (n as u64).pow(len as u32);
    Ok((0..total).map(move |mut code| {
        if n == 1 {
            return LabeledGraph::new(1, 0);
        }
        let mut seq = vec![0usize; len];
        for s in seq.iter_mut().rev() {
            *s = (code % n as u64) as usize;
            code /= n as u64;
        }
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut pairs = Vec::with_capacity(n - 1);
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
            pairs.push((leaf, s));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        pairs.push((rest[0], rest[1]));
        LabeledGraph::from_pairs(n, &pairs)
    }))
}

/// Graphs with `n_white` white and `k_black` black vertices and no
/// articulation vertex in the white-stranding sense.
pub fn enumerate_af_two_colored(n_white: usize, k_black: usize) -> Result<impl Iterator<Item = LabeledGraph>> {
    if n_white == 0 {
        return Err(Error::Guard("articulation-free enumeration needs at least one white vertex".into()));
    }
    let n = n_white + k_black;
    guard("articulation-free enumeration", n, 1, 6)?;
    Ok(enumerate_all(n).map(move |g| g.with_white(n_white)).filter(is_articulation_free))
}
