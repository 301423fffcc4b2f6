//! Loopless k-shortest paths (Yen) on the undirected base network.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use ordered_float::OrderedFloat;

use super::{BaseNetwork, EdgeIdx, Path, VertexIdx};
use crate::error::{Error, Result};

/// Sum of `weight` along `path`, accumulated in path order.
pub fn path_weight(path: &[EdgeIdx], weight: &[f64]) -> f64 {
    path.iter().map(|&e| weight[e]).sum()
}

/// Dijkstra label ordered by distance, then by edge sequence.
#[derive(PartialEq, Eq)]
struct Label {
    dist: OrderedFloat<f64>,
    seq: Vec<EdgeIdx>,
    at: VertexIdx,
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        (other.dist, &other.seq).cmp(&(self.dist, &self.seq))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Graph<'a> {
    adj: Vec<Vec<(EdgeIdx, VertexIdx)>>,
    weight: &'a [f64],
}

impl<'a> Graph<'a> {
    fn new(net: &BaseNetwork, weight: &'a [f64]) -> Self {
        let mut adj = vec![Vec::new(); net.vertices.len()];
        for (i, e) in net.edges.iter().enumerate() {
            let (a, b) = e.endpoints;
            adj[a].push((i, b));
            adj[b].push((i, a));
        }
        Graph { adj, weight }
    }

    /// Shortest path from `from` to `to`, lexicographically smallest edge
    /// sequence among equal distances.
    fn shortest(
        &self,
        from: VertexIdx,
        to: VertexIdx,
        blocked_edge: &[bool],
        blocked_vertex: &[bool],
    ) -> Option<Path> {
        let n = self.adj.len();
        let mut best: Vec<Option<(OrderedFloat<f64>, Vec<EdgeIdx>)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        best[from] = Some((OrderedFloat(0.0), Vec::new()));
        heap.push(Label {
            dist: OrderedFloat(0.0),
            seq: Vec::new(),
            at: from,
        });
        while let Some(Label { dist, seq, at }) = heap.pop() {
            if done[at] {
                continue;
            }
            done[at] = true;
            if at == to {
                return Some(seq);
            }
            for &(e, next) in &self.adj[at] {
                if blocked_edge[e] || blocked_vertex[next] || done[next] {
                    continue;
                }
                let nd = OrderedFloat(dist.0 + self.weight[e]);
                let mut nseq = seq.clone();
                nseq.push(e);
                let better = match &best[next] {
                    None => true,
                    Some((d, s)) => (nd, &nseq) < (*d, s),
                };
                if better {
                    best[next] = Some((nd, nseq.clone()));
                    heap.push(Label {
                        dist: nd,
                        seq: nseq,
                        at: next,
                    });
                }
            }
        }
        None
    }
}

fn yen(
    net: &BaseNetwork,
    graph: &Graph<'_>,
    source: VertexIdx,
    target: VertexIdx,
    k: usize,
) -> Option<Vec<Path>> {
    let ne = net.edges.len();
    let nv = net.vertices.len();
    let first = graph.shortest(source, target, &vec![false; ne], &vec![false; nv])?;
    let mut accepted: Vec<Path> = vec![first];
    let mut candidates: BTreeSet<(OrderedFloat<f64>, Path)> = BTreeSet::new();

    while accepted.len() < k {
        let last = accepted.last().expect("non-empty").clone();
        let verts = net.walk(source, &last).expect("paths are walks");
        for i in 0..last.len() {
            let root = &last[..i];
            let spur = verts[i];
            let mut blocked_edge = vec![false; ne];
            for p in &accepted {
                if p.len() > i && &p[..i] == root {
                    blocked_edge[p[i]] = true;
                }
            }
            let mut blocked_vertex = vec![false; nv];
            for &v in &verts[..i] {
                blocked_vertex[v] = true;
            }
            if let Some(tail) = graph.shortest(spur, target, &blocked_edge, &blocked_vertex) {
                let mut full = root.to_vec();
                full.extend(tail);
                if !accepted.contains(&full) {
                    let w = OrderedFloat(path_weight(&full, graph.weight));
                    candidates.insert((w, full));
                }
            }
        }
        match candidates.pop_first() {
            Some((_, p)) => accepted.push(p),
            None => break,
        }
    }
    Some(accepted)
}

/// Up to `k` loopless shortest paths per commodity, sorted by total weight.
///
/// Equal-weight candidates are ordered by their edge-index sequence, so the
/// output is fully determined by the network and the weights.
pub fn enumerate_paths(net: &BaseNetwork, k: usize, weight: &[f64]) -> Result<Vec<Vec<Path>>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if weight.len() != net.edges.len() || weight.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Config("edge weights must be finite and non-negative, one per edge".into()));
    }
    let graph = Graph::new(net, weight);
    net.commodities
        .iter()
        .map(|c| {
            if c.source == c.target {
                return Err(Error::Disconnected(c.id.clone()));
            }
            yen(net, &graph, c.source, c.target, k).ok_or_else(|| Error::Disconnected(c.id.clone()))
        })
        .collect()
}
