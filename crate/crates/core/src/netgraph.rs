//! Directed communication graph among DGs and the structural metrics the
//! pinning algorithms and spectral bounds are built from.
//!
//! Adjacency follows the control-law convention: `a(i, j) == true` means DG
//! `i` receives information from DG `j`. Edges are always supplied as
//! `(from, to)` pairs so callers never have to think about the transposition.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Add;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hop count along directed links. `Infinite` is absorbing under addition
/// and orders after every finite count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hops {
    Finite(usize),
    Infinite,
}

impl Hops {
    pub fn is_finite(self) -> bool {
        matches!(self, Hops::Finite(_))
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Hops::Finite(h) => Some(h),
            Hops::Infinite => None,
        }
    }
}

impl Add for Hops {
    type Output = Hops;

    fn add(self, rhs: Hops) -> Hops {
        match (self, rhs) {
            (Hops::Finite(a), Hops::Finite(b)) => Hops::Finite(a + b),
            _ => Hops::Infinite,
        }
    }
}

impl std::iter::Sum for Hops {
    fn sum<I: Iterator<Item = Hops>>(iter: I) -> Hops {
        iter.fold(Hops::Finite(0), |acc, h| acc + h)
    }
}

impl fmt::Display for Hops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hops::Finite(h) => write!(f, "{h}"),
            Hops::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommNetwork {
    n: usize,
    adj: Vec<bool>,
    labels: Vec<String>,
}

impl CommNetwork {
    /// Builds a network from `(from, to)` links. Duplicate links are
    /// idempotent; self-loops are rejected.
    pub fn build(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidNetwork("network needs at least one node".into()));
        }
        let mut adj = vec![false; n * n];
        for &(from, to) in edges {
            for index in [from, to] {
                if index >= n {
                    return Err(Error::NodeOutOfRange { index, n });
                }
            }
            if from == to {
                return Err(Error::SelfLoop(from));
            }
            adj[to * n + from] = true;
        }
        Ok(Self {
            n,
            adj,
            labels: default_labels(n),
        })
    }

    /// Builds from a 0/1 adjacency matrix in the `a[i][j] = j sends to i` orientation.
    pub fn from_adjacency(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidNetwork(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                match a {
                    0 => {}
                    1 => edges.push((j, i)),
                    other => {
                        return Err(Error::InvalidNetwork(format!(
                            "entry a[{i}][{j}] = {other} is not binary"
                        )))
                    }
                }
            }
        }
        Self::build(n, &edges)
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: Vec<S>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidNetwork(format!(
                "{} labels given for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.labels = labels.into_iter().map(Into::into).collect();
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `true` when node `i` receives from node `j`.
    pub fn a(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn node_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Directed links as `(from, to)` pairs in row-major order of the receiver.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for to in 0..self.n {
            for from in 0..self.n {
                if self.a(to, from) {
                    out.push((from, to));
                }
            }
        }
        out
    }

    /// Nodes that receive from `i`.
    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&p| self.a(p, i))
    }

    /// Nodes that `i` receives from.
    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&p| self.a(i, p))
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors(i).count()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_neighbors(i).count()
    }

    pub fn is_undirected(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.a(i, j) == self.a(j, i)))
    }

    /// `l_ij = -a_ij` off the diagonal, `l_ii` = number of incoming links.
    pub fn laplacian(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                self.in_degree(i) as f64
            } else if self.a(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Multi-source BFS along information flow.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<Hops> {
        let mut dist = vec![Hops::Infinite; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == Hops::Infinite {
                dist[s] = Hops::Finite(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + Hops::Finite(1);
            for v in self.out_neighbors(u) {
                if dist[v] == Hops::Infinite {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Length of the shortest directed path from `i` to `j`.
    pub fn path_length(&self, i: usize, j: usize) -> Hops {
        self.distances_from(&[i])[j]
    }

    /// `path(P, I)`: sum over `j` in `targets` of the distance from the nearest member of `pinned`.
    pub fn path_metric(&self, pinned: &[usize], targets: &[usize]) -> Result<Hops> {
        if pinned.is_empty() {
            return Err(Error::EmptyPinningSet);
        }
        self.check_nodes(pinned)?;
        self.check_nodes(targets)?;
        let dist = self.distances_from(pinned);
        Ok(targets.iter().map(|&j| dist[j]).sum())
    }

    /// `deg(P)`: links from members of `pinned` into nodes outside it.
    pub fn deg_metric(&self, pinned: &[usize]) -> Result<usize> {
        if pinned.is_empty() {
            return Err(Error::EmptyPinningSet);
        }
        self.check_nodes(pinned)?;
        let inside = self.membership(pinned);
        Ok(pinned
            .iter()
            .map(|&p| self.out_neighbors(p).filter(|&i| !inside[i]).count())
            .sum())
    }

    /// BFS layers `I_0 = P, I_1, ..., I_k` from the pinning set with the
    /// per-node inter-layer degrees used by the spectral bounds.
    pub fn layer_decompose(&self, pinned: &[usize]) -> Result<LayerDecomposition> {
        if pinned.is_empty() {
            return Err(Error::EmptyPinningSet);
        }
        self.check_nodes(pinned)?;
        let mut unique = pinned.to_vec();
        unique.sort_unstable();
        unique.dedup();

        let mut layer_of = vec![None; self.n];
        for &p in &unique {
            layer_of[p] = Some(0);
        }
        let mut layers = vec![unique];
        loop {
            let j = layers.len();
            let prev = &layers[j - 1];
            let next: Vec<usize> = (0..self.n)
                .filter(|&i| layer_of[i].is_none() && prev.iter().any(|&p| self.a(i, p)))
                .collect();
            if next.is_empty() {
                break;
            }
            for &i in &next {
                layer_of[i] = Some(j);
            }
            layers.push(next);
        }

        let mut d_in = vec![0; self.n];
        let mut d_out = vec![0; self.n];
        for (j, layer) in layers.iter().enumerate() {
            for &i in layer {
                if j > 0 {
                    d_in[i] = layers[j - 1].iter().filter(|&&p| self.a(i, p)).count();
                }
                if let Some(next) = layers.get(j + 1) {
                    d_out[i] = next.iter().filter(|&&p| self.a(p, i)).count();
                }
            }
        }
        let unreachable = (0..self.n).filter(|&i| layer_of[i].is_none()).collect();
        let max_in_degree = (0..self.n).map(|i| self.in_degree(i)).max().unwrap_or(0);

        Ok(LayerDecomposition {
            n_nodes: self.n,
            undirected: self.is_undirected(),
            max_in_degree,
            layers,
            layer_of,
            d_in,
            d_out,
            unreachable,
        })
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidNetwork("permutation length mismatch".into()));
        }
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(f, t)| (perm[f], perm[t]))
            .collect();
        let mut labels = vec![String::new(); self.n];
        for (i, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[i].clone();
        }
        Self::build(self.n, &edges)?.with_labels(labels)
    }

    /// Parses the plain-text network format (see [`CommNetwork::to_text`]).
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut directed: Option<bool> = None;
        let mut labels: Option<Vec<String>> = None;
        let mut edges = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            match head {
                "nodes" => {
                    let value = tokens.next().ok_or_else(|| err("missing node count".into()))?;
                    let count: usize = value
                        .parse()
                        .map_err(|_| err(format!("bad node count `{value}`")))?;
                    if count == 0 {
                        return Err(err("node count must be at least 1".into()));
                    }
                    n = Some(count);
                }
                "directed" => {
                    let value = tokens.next().ok_or_else(|| err("missing directed flag".into()))?;
                    directed = Some(match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        other => return Err(err(format!("bad directed flag `{other}`"))),
                    });
                }
                "labels" => labels = Some(tokens.map(str::to_owned).collect()),
                _ => {
                    let count = n.ok_or_else(|| err("edge before `nodes` header".into()))?;
                    if directed.is_none() {
                        return Err(err("edge before `directed` header".into()));
                    }
                    let from = parse_node(head, count).map_err(&err)?;
                    let to_tok = tokens.next().ok_or_else(|| err("edge needs `from to`".into()))?;
                    let to = parse_node(to_tok, count).map_err(&err)?;
                    if tokens.next().is_some() {
                        return Err(err("trailing tokens after edge".into()));
                    }
                    if from == to {
                        return Err(err(format!("self-loop on node {}", from + 1)));
                    }
                    edges.push((from, to));
                }
            }
        }

        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing `nodes` header".into(),
        })?;
        let directed = directed.ok_or(Error::Parse {
            line: 0,
            msg: "missing `directed` header".into(),
        })?;
        if !directed {
            let reversed: Vec<_> = edges.iter().map(|&(f, t)| (t, f)).collect();
            edges.extend(reversed);
        }
        let net = Self::build(n, &edges)?;
        match labels {
            Some(labels) => net.with_labels(labels),
            None => Ok(net),
        }
    }

    /// Serializes in the text format: header lines, then one `from to` link
    /// per line with 1-based node numbers.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes {}\ndirected true\nlabels {}\n", self.n, self.labels.join(" "));
        for (from, to) in self.edges() {
            out.push_str(&format!("{} {}\n", from + 1, to + 1));
        }
        out
    }

    fn check_nodes(&self, nodes: &[usize]) -> Result<()> {
        match nodes.iter().find(|&&i| i >= self.n) {
            Some(&index) => Err(Error::NodeOutOfRange { index, n: self.n }),
            None => Ok(()),
        }
    }

    fn membership(&self, nodes: &[usize]) -> Vec<bool> {
        let mut inside = vec![false; self.n];
        for &i in nodes {
            inside[i] = true;
        }
        inside
    }
}

fn parse_node(token: &str, n: usize) -> std::result::Result<usize, String> {
    let k: usize = token.parse().map_err(|_| format!("bad node number `{token}`"))?;
    if k == 0 || k > n {
        return Err(format!("node number {k} outside 1..={n}"));
    }
    Ok(k - 1)
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("DG{i}")).collect()
}

/// Pinning set with per-node gains. `zeta_i = 1` exactly for members of the set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinningConfig {
    pinned: Vec<usize>,
    gains: Vec<f64>,
}

impl PinningConfig {
    pub fn uniform(n: usize, pinned: &[usize], gain: f64) -> Result<Self> {
        Self::with_gains(n, pinned, vec![gain; n])
    }

    pub fn with_gains(n: usize, pinned: &[usize], gains: Vec<f64>) -> Result<Self> {
        if gains.len() != n {
            return Err(Error::InvalidPinning(format!(
                "{} gains for {n} nodes",
                gains.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in pinned {
            if p >= n {
                return Err(Error::NodeOutOfRange { index: p, n });
            }
            if seen[p] {
                return Err(Error::InvalidPinning(format!("node {p} pinned twice")));
            }
            seen[p] = true;
            if !(gains[p] > 0.0 && gains[p].is_finite()) {
                return Err(Error::InvalidPinning(format!(
                    "pinned node {p} needs a positive gain, got {}",
                    gains[p]
                )));
            }
        }
        if gains.iter().any(|g| *g < 0.0 || !g.is_finite()) {
            return Err(Error::InvalidPinning("gains must be finite and nonnegative".into()));
        }
        Ok(Self {
            pinned: pinned.to_vec(),
            gains,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.gains.len()
    }

    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned.contains(&i)
    }

    /// Effective `g_i zeta_i`: zero for nodes outside the set.
    pub fn gain(&self, i: usize) -> f64 {
        if self.is_pinned(i) {
            self.gains[i]
        } else {
            0.0
        }
    }

    pub fn max_gain(&self) -> f64 {
        self.pinned.iter().map(|&p| self.gains[p]).fold(0.0, f64::max)
    }

    /// `zeta` as 0/1 values.
    pub fn indicator(&self) -> Vec<u8> {
        (0..self.n_nodes()).map(|i| u8::from(self.is_pinned(i))).collect()
    }

    /// Diagonal of `G Z`.
    pub fn pinning_diagonal(&self) -> Vec<f64> {
        (0..self.n_nodes())
            .map(|i| self.gain(i))
            .collect()
    }
}

/// BFS layers from the pinning set. `d_in[i]` counts links into `i` from the
/// previous layer and `d_out[i]` links from `i` into the next one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerDecomposition {
    pub n_nodes: usize,
    pub undirected: bool,
    pub max_in_degree: usize,
    pub layers: Vec<Vec<usize>>,
    pub layer_of: Vec<Option<usize>>,
    pub d_in: Vec<usize>,
    pub d_out: Vec<usize>,
    pub unreachable: Vec<usize>,
}

impl LayerDecomposition {
    /// Index `k` of the farthest layer.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn pinned(&self) -> &[usize] {
        &self.layers[0]
    }

    pub fn d_in_min(&self, j: usize) -> usize {
        self.layers[j].iter().map(|&i| self.d_in[i]).min().unwrap_or(0)
    }

    pub fn d_in_max(&self, j: usize) -> usize {
        self.layers[j].iter().map(|&i| self.d_in[i]).max().unwrap_or(0)
    }

    pub fn d_out_min(&self, j: usize) -> usize {
        self.layers[j].iter().map(|&i| self.d_out[i]).min().unwrap_or(0)
    }

    pub fn d_out_max(&self, j: usize) -> usize {
        self.layers[j].iter().map(|&i| self.d_out[i]).max().unwrap_or(0)
    }

    /// Every node reached and every non-final layer feeds the next one.
    pub fn is_complete(&self) -> bool {
        self.unreachable.is_empty()
            && (0..self.depth()).all(|j| self.layers[j].iter().all(|&i| self.d_out[i] >= 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> CommNetwork {
        CommNetwork::build(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn undirected(n: usize, pairs: &[(usize, usize)]) -> CommNetwork {
        let edges: Vec<_> = pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        CommNetwork::build(n, &edges).unwrap()
    }

    #[test]
    fn single_link_sets_receiver_row() {
        let net = CommNetwork::build(2, &[(0, 1)]).unwrap();
        assert!(net.a(1, 0));
        assert!(!net.a(0, 1));
        assert!(!net.a(0, 0) && !net.a(1, 1));
    }

    #[test]
    fn duplicate_edges_are_idempotent_and_self_loops_rejected() {
        let net = CommNetwork::build(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(net.edges(), vec![(0, 1)]);
        assert!(matches!(CommNetwork::build(2, &[(1, 1)]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            CommNetwork::build(2, &[(0, 2)]),
            Err(Error::NodeOutOfRange { index: 2, n: 2 })
        ));
        assert!(CommNetwork::build(0, &[]).is_err());
    }

    #[test]
    fn empty_graph_has_zero_matrices() {
        let net = CommNetwork::build(3, &[]).unwrap();
        assert!(net.laplacian().iter().all(|&x| x == 0.0));
        assert_eq!(net.edges().len(), 0);
    }

    #[test]
    fn laplacian_small_cases() {
        let k2 = undirected(2, &[(0, 1)]);
        assert_eq!(k2.laplacian(), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let k4 = undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let l = k4.laplacian();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(l[(i, j)], if i == j { 3.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn path_length_follows_direction() {
        let net = chain3();
        assert_eq!(net.path_length(1, 1), Hops::Finite(0));
        assert_eq!(net.path_length(0, 2), Hops::Finite(2));
        assert_eq!(net.path_length(2, 0), Hops::Infinite);
    }

    #[test]
    fn hops_arithmetic() {
        assert_eq!(Hops::Finite(2) + Hops::Finite(3), Hops::Finite(5));
        assert_eq!(Hops::Finite(2) + Hops::Infinite, Hops::Infinite);
        assert!(Hops::Finite(usize::MAX) < Hops::Infinite);
        assert_eq!(Vec::<Hops>::new().into_iter().sum::<Hops>(), Hops::Finite(0));
    }

    #[test]
    fn path_metric_edge_cases() {
        let net = chain3();
        assert_eq!(net.path_metric(&[0], &[]).unwrap(), Hops::Finite(0));
        assert_eq!(net.path_metric(&[0], &[1, 2]).unwrap(), Hops::Finite(3));
        assert_eq!(net.path_metric(&[1], &[0, 2]).unwrap(), Hops::Infinite);
        assert!(matches!(net.path_metric(&[], &[1]), Err(Error::EmptyPinningSet)));
    }

    #[test]
    fn deg_metric_counts_outgoing_cut() {
        let k5 = undirected(
            5,
            &[
                (0, 1), (0, 2), (0, 3), (0, 4), (1, 2),
                (1, 3), (1, 4), (2, 3), (2, 4), (3, 4),
            ],
        );
        assert_eq!(k5.deg_metric(&[2]).unwrap(), 4);
        assert_eq!(k5.deg_metric(&[0, 1, 2, 3, 4]).unwrap(), 0);
        assert_eq!(k5.deg_metric(&[0, 1]).unwrap(), 6);
    }

    #[test]
    fn star_layers() {
        let star = undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let d = star.layer_decompose(&[0]).unwrap();
        assert_eq!(d.depth(), 1);
        assert_eq!(d.layers[1], vec![1, 2, 3, 4]);
        assert_eq!(d.d_out[0], 4);
        assert_eq!(d.d_in_min(1), 1);
        assert!(d.is_complete());
    }

    // Single pin whose farthest node sits two hops away.
    #[test]
    fn single_pin_sample_has_depth_two() {
        let net = undirected(6, &[(0, 1), (0, 2), (1, 3), (2, 3), (2, 4), (1, 5)]);
        let d = net.layer_decompose(&[0]).unwrap();
        assert_eq!(d.depth(), 2);
        assert_eq!(d.layers[1], vec![1, 2]);
        assert_eq!(d.layers[2], vec![3, 4, 5]);
        assert_eq!(d.d_in[3], 2);
        assert_eq!(d.d_out[2], 2);
    }

    // Three pins reaching everything in one hop.
    #[test]
    fn three_pin_sample_has_depth_one() {
        let net = undirected(7, &[(0, 3), (0, 4), (1, 4), (1, 5), (2, 5), (2, 6), (3, 4)]);
        let d = net.layer_decompose(&[0, 1, 2]).unwrap();
        assert_eq!(d.depth(), 1);
        assert_eq!(d.layers[1], vec![3, 4, 5, 6]);
        assert_eq!(d.d_in_max(1), 2);
    }

    #[test]
    fn unreachable_nodes_are_reported() {
        let net = chain3();
        let d = net.layer_decompose(&[1]).unwrap();
        assert_eq!(d.unreachable, vec![0]);
        assert!(!d.is_complete());
    }

    #[test]
    fn pinning_config_invariants() {
        let pin = PinningConfig::uniform(4, &[1, 3], 0.5).unwrap();
        assert_eq!(pin.indicator(), vec![0, 1, 0, 1]);
        assert_eq!(pin.pinning_diagonal(), vec![0.0, 0.5, 0.0, 0.5]);
        assert!(PinningConfig::uniform(4, &[1, 1], 0.5).is_err());
        assert!(PinningConfig::uniform(4, &[4], 0.5).is_err());
        assert!(PinningConfig::uniform(4, &[0], 0.0).is_err());
    }

    #[test]
    fn text_format_round_trip_and_diagnostics() {
        let text = "# ring\nnodes 3\ndirected false\nlabels A B C\n1 2\n2 3\n";
        let net = CommNetwork::parse(text).unwrap();
        assert!(net.is_undirected());
        assert_eq!(net.label(2), "C");
        assert_eq!(CommNetwork::parse(&net.to_text()).unwrap(), net);

        let bad = "nodes 3\ndirected true\n1 4\n";
        match CommNetwork::parse(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(CommNetwork::parse("nodes 2\ndirected true\n2 2\n").is_err());
        assert!(CommNetwork::parse("1 2\n").is_err());
    }
}
