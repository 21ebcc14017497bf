//! The two target Hamiltonians and their classical oracles.
//!
//! * Majumdar-Ghosh ring: `H = (J/2) sum_i s_i.s_{i+1} + (alpha J/2) sum_{i} s_i.s_{i+2}`
//!   with periodic boundaries, where `s_i.s_j = X_iX_j + Y_iY_j + Z_iZ_j`.
//! * Max-cut: `H_C = sum_{(u,v,w)} (w/2)(Z_u Z_v - I)`, so that every basis
//!   state has energy `-cut(x)`.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::rng::Rng;
use crate::statevector::bitstring;

pub const MAX_BRUTE_FORCE_NODES: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Weighted undirected simple graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(n_nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Graph("graph needs at least one node".into()));
        }
        let mut seen = HashSet::new();
        for e in &edges {
            check_edge(n_nodes, e, &mut seen).map_err(Error::Graph)?;
        }
        Ok(Self { n_nodes, edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Cut weight of the partition whose bit `i` gives node `i`'s side.
    pub fn cut_value(&self, partition: usize) -> f64 {
        self.edges
            .iter()
            .filter(|e| ((partition >> e.u) ^ (partition >> e.v)) & 1 == 1)
            .map(|e| e.w)
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Erdos-Renyi `G(n, p)`. With `weights = Some((lo, hi))` each edge gets a
    /// uniform weight from `[lo, hi)`, otherwise weight 1.
    pub fn random_gnp(n: usize, p: f64, weights: Option<(f64, f64)>, rng: &mut Rng) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "edge probability {p} not in [0, 1]"
            )));
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    let w = match weights {
                        Some((lo, hi)) => rng.random_range(lo..hi),
                        None => 1.0,
                    };
                    edges.push(Edge { u, v, w });
                }
            }
        }
        Graph::new(n, edges)
    }

    /// Resamples `G(n, p)` until the graph is connected (at most 1000 tries).
    pub fn random_connected(n: usize, p: f64, weights: Option<(f64, f64)>, rng: &mut Rng) -> Result<Self> {
        for _ in 0..1000 {
            let g = Graph::random_gnp(n, p, weights, rng)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(Error::InvalidArgument(format!(
            "no connected G({n}, {p}) sample in 1000 tries"
        )))
    }

    /// Renders the edge-list document accepted by [`parse_graph`].
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n_nodes);
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.u, e.v, e.w);
        }
        s
    }
}

fn check_edge(n: usize, e: &Edge, seen: &mut HashSet<(usize, usize)>) -> std::result::Result<(), String> {
    if e.u >= n || e.v >= n {
        return Err(format!("edge ({}, {}) references a node >= {n}", e.u, e.v));
    }
    if e.u == e.v {
        return Err(format!("self-loop on node {}", e.u));
    }
    if !e.w.is_finite() {
        return Err(format!("edge ({}, {}) has non-finite weight", e.u, e.v));
    }
    if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
        return Err(format!("duplicate edge ({}, {})", e.u, e.v));
    }
    Ok(())
}

/// Parses an edge list: first line `n_nodes`, then `u v [w]` per line
/// (weight defaults to 1). `#` starts a comment; blank lines are skipped.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut n_nodes: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| Error::GraphParse {
            line: line_no,
            message,
        };
        let Some(n) = n_nodes else {
            if fields.len() != 1 {
                return Err(err(format!("expected node count, found {line:?}")));
            }
            let n: usize = fields[0]
                .parse()
                .map_err(|_| err(format!("bad node count {:?}", fields[0])))?;
            if n == 0 {
                return Err(err("node count must be positive".into()));
            }
            n_nodes = Some(n);
            continue;
        };
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!("expected `u v [w]`, found {line:?}")));
        }
        let node = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad node index {s:?}")))
        };
        let u = node(fields[0])?;
        let v = node(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| err(format!("bad weight {s:?}")))?,
            None => 1.0,
        };
        let e = Edge { u, v, w };
        check_edge(n, &e, &mut seen).map_err(err)?;
        edges.push(e);
    }
    let n = n_nodes.ok_or(Error::GraphParse {
        line: 0,
        message: "empty document".into(),
    })?;
    Graph::new(n, edges)
}

/// Max-cut cost Hamiltonian; its ground energy is minus the maximum cut.
pub fn build_maxcut(g: &Graph) -> Result<Observable> {
    let n = g.n_nodes();
    let mut terms = Vec::with_capacity(2 * g.edges().len());
    for e in g.edges() {
        let zz = PauliString::from_sparse(n, &[(e.u, Pauli::Z), (e.v, Pauli::Z)])?;
        terms.push((e.w / 2.0, zz));
        terms.push((-e.w / 2.0, PauliString::identity(n)));
    }
    Observable::from_terms(n, terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCutSolution {
    pub value: f64,
    /// Node `i`'s side is character `i`.
    pub partition: String,
    pub index: usize,
}

/// Exhaustive Max-cut over the `2^(n-1)` partitions with node 0 on side 0.
/// Ties resolve to the smallest partition index.
pub fn brute_force_maxcut(g: &Graph) -> Result<MaxCutSolution> {
    let n = g.n_nodes();
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(Error::TooLarge {
            what: "graph nodes",
            value: n,
            limit: MAX_BRUTE_FORCE_NODES,
        });
    }
    if n == 1 {
        return Ok(MaxCutSolution {
            value: 0.0,
            partition: "0".into(),
            index: 0,
        });
    }
    let half = 1usize << (n - 1);
    let better = |a: (f64, usize), b: (f64, usize)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    const CHUNK: usize = 1 << 12;
    let best = (0..half.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for y in c * CHUNK..((c + 1) * CHUNK).min(half) {
                let x = y << 1;
                best = better(best, (g.cut_value(x), x));
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), better);
    Ok(MaxCutSolution {
        value: best.0,
        partition: bitstring(best.1, n),
        index: best.1,
    })
}

/// Parameters of the Majumdar-Ghosh ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgmParams {
    pub n_spins: usize,
    /// Nearest-neighbour coupling.
    pub j: f64,
    /// Next-nearest-neighbour ratio; the NNN coupling is `alpha * j`.
    pub alpha: f64,
    /// Include the overall factor 1/2. Without it every energy doubles.
    pub half_prefactor: bool,
}

impl MgmParams {
    pub fn new(n_spins: usize) -> Self {
        Self {
            n_spins,
            j: 1.0,
            alpha: -0.1,
            half_prefactor: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 4 {
            return Err(Error::InvalidArgument(format!(
                "n must be >= 4 (got {})",
                self.n_spins
            )));
        }
        if !self.j.is_finite() || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument("J and alpha must be finite".into()));
        }
        Ok(())
    }
}

/// NN bonds `(i, i+1 mod n)` in ascending order.
pub fn nn_bonds(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

/// Distinct unordered NNN bonds `{i, i+2 mod n}`; two for n = 4, n otherwise.
pub fn nnn_bonds(n: usize) -> Vec<(usize, usize)> {
    let mut seen = HashSet::new();
    (0..n)
        .map(|i| (i, (i + 2) % n))
        .filter(|&(a, b)| seen.insert((a.min(b), a.max(b))))
        .collect()
}

/// Majumdar-Ghosh Hamiltonian: NN bonds ascending, then NNN bonds, with
/// XX, YY, ZZ terms per bond in that order.
pub fn build_mgm(p: &MgmParams) -> Result<Observable> {
    p.validate()?;
    let n = p.n_spins;
    let scale = if p.half_prefactor { 0.5 } else { 1.0 };
    let mut terms = Vec::new();
    let bonds = nn_bonds(n)
        .into_iter()
        .map(|b| (b, scale * p.j))
        .chain(nnn_bonds(n).into_iter().map(|b| (b, scale * p.alpha * p.j)));
    for ((a, b), c) in bonds {
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push((c, PauliString::from_sparse(n, &[(a, pauli), (b, pauli)])?));
        }
    }
    Observable::from_terms(n, terms)
}

/// The strings of [`build_mgm`] in construction order.
pub fn mgm_bond_strings(n: usize) -> Result<Vec<PauliString>> {
    let mut out = Vec::new();
    for (a, b) in nn_bonds(n).into_iter().chain(nnn_bonds(n)) {
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            out.push(PauliString::from_sparse(n, &[(a, pauli), (b, pauli)])?);
        }
    }
    Ok(out)
}
