//! The netlist as a directed graph over gates.
//!
//! There is an edge `u → v` whenever some net is driven by `u` and has a
//! sink on `v`. Feedback in that graph is what distinguishes state machines
//! from pipelines, so the centerpiece here is a strongly connected
//! components pass. It uses Tarjan's algorithm with an explicit stack, so
//! deep netlists cannot overflow the call stack.
//!
//! ```
//! use gatescope::graph::tarjan_scc;
//!
//! // 0 → 1 → 2 → 0, plus a tail 3 → 0.
//! let adj = vec![vec![1], vec![2], vec![0], vec![0]];
//! let sccs = tarjan_scc(&adj);
//! assert_eq!(sccs.len(), 2);
//! assert_eq!(sccs[0], vec![0, 1, 2]);
//! assert_eq!(sccs[1], vec![3]);
//! ```

mod tarjan;

use std::collections::{BTreeSet, HashMap, VecDeque};

pub use tarjan::{condensation_is_acyclic, tarjan_scc};

use crate::netlist::{Gate, GateId, Netlist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateDigraph {
    nodes: Vec<GateId>,
    index: HashMap<GateId, usize>,
    successors: Vec<Vec<usize>>,
}

impl GateDigraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    /// Gate ids in ascending order; position `i` is node `i` of
    /// [`adjacency`](Self::adjacency).
    pub fn nodes(&self) -> &[GateId] {
        &self.nodes
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.successors
    }

    pub fn node_index(&self, gate: GateId) -> Option<usize> {
        self.index.get(&gate).copied()
    }

    pub fn successors(&self, gate: GateId) -> impl Iterator<Item = GateId> + '_ {
        self.node_index(gate)
            .into_iter()
            .flat_map(move |i| self.successors[i].iter().map(|&j| self.nodes[j]))
    }

    pub fn has_edge(&self, from: GateId, to: GateId) -> bool {
        match (self.node_index(from), self.node_index(to)) {
            (Some(u), Some(v)) => self.successors[u].binary_search(&v).is_ok(),
            _ => false,
        }
    }

    /// Strongly connected components in reverse topological order of the
    /// condensation (sink components first). Loop-free singletons are
    /// dropped unless `include_trivial` is set.
    pub fn sccs(&self, include_trivial: bool) -> Vec<BTreeSet<GateId>> {
        tarjan_scc(&self.successors)
            .into_iter()
            .filter(|c| include_trivial || c.len() > 1 || self.successors[c[0]].binary_search(&c[0]).is_ok())
            .map(|c| c.into_iter().map(|i| self.nodes[i]).collect())
            .collect()
    }

    /// BFS shortest path from `from` to the nearest node of `to`; a node in
    /// `to` reaches itself with the one-element path.
    pub fn shortest_path(&self, from: GateId, to: &BTreeSet<GateId>) -> Option<Vec<GateId>> {
        let start = self.node_index(from)?;
        let targets: Vec<bool> = self.nodes.iter().map(|g| to.contains(g)).collect();
        shortest_path(&self.successors, start, |v| targets[v]).map(|p| p.into_iter().map(|i| self.nodes[i]).collect())
    }

    /// Gates within `k` hops of `seeds`, ignoring edge direction.
    pub fn k_hop_neighborhood(&self, seeds: &BTreeSet<GateId>, k: usize) -> BTreeSet<GateId> {
        let mut undirected = vec![Vec::new(); self.nodes.len()];
        for (u, succ) in self.successors.iter().enumerate() {
            for &v in succ {
                undirected[u].push(v);
                undirected[v].push(u);
            }
        }
        let mut dist = vec![usize::MAX; self.nodes.len()];
        let mut queue = VecDeque::new();
        for s in seeds.iter().filter_map(|g| self.node_index(*g)) {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            if dist[u] == k {
                continue;
            }
            for &v in &undirected[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        (0..self.nodes.len())
            .filter(|&i| dist[i] != usize::MAX)
            .map(|i| self.nodes[i])
            .collect()
    }
}

/// Build the gate digraph, optionally restricted to gates accepted by
/// `filter` (edges are then induced on the kept gates).
pub fn build_digraph(netlist: &Netlist, filter: Option<&dyn Fn(&Gate) -> bool>) -> GateDigraph {
    let nodes: Vec<GateId> = netlist
        .gates()
        .filter(|g| filter.is_none_or(|f| f(g)))
        .map(|g| g.id)
        .collect();
    let index: HashMap<GateId, usize> = nodes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut successors = vec![Vec::new(); nodes.len()];
    for net in netlist.nets() {
        let Some(src) = &net.source else { continue };
        let Some(&u) = index.get(&src.gate) else { continue };
        for sink in &net.sinks {
            if let Some(&v) = index.get(&sink.gate) {
                successors[u].push(v);
            }
        }
    }
    for succ in &mut successors {
        succ.sort_unstable();
        succ.dedup();
    }
    GateDigraph {
        nodes,
        index,
        successors,
    }
}

/// BFS over an adjacency list. Successors are explored in list order, so
/// among equally short paths the one that is lexicographically smallest in
/// successor positions is returned.
pub fn shortest_path(adj: &[Vec<usize>], from: usize, is_target: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
    if is_target(from) {
        return Some(vec![from]);
    }
    let mut parent = vec![usize::MAX; adj.len()];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if parent[v] != usize::MAX {
                continue;
            }
            parent[v] = u;
            if is_target(v) {
                let mut path = vec![v];
                let mut cur = v;
                while cur != from {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Non-trivial SCCs of the full gate graph for reports: largest first, ties
/// by smallest gate id, with names and the number of sequential members.
pub fn scc_report_json(netlist: &Netlist, include_trivial: bool) -> serde_json::Value {
    let mut sccs = build_digraph(netlist, None).sccs(include_trivial);
    sccs.sort_by(|a, b| b.len().cmp(&a.len()).then(a.first().cmp(&b.first())));
    let entries: Vec<serde_json::Value> = sccs
        .iter()
        .map(|scc| {
            let gates: Vec<&Gate> = scc.iter().filter_map(|g| netlist.gate(*g)).collect();
            serde_json::json!({
                "size": scc.len(),
                "sequential": gates.iter().filter(|g| g.category().is_sequential()).count(),
                "gates": scc,
                "names": gates.iter().map(|g| g.name.as_str()).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::json!({ "count": entries.len(), "sccs": entries })
}
