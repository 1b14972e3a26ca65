//! Enabling-key recovery for HARPOON-style FSM obfuscation.
//!
//! The obfuscated design powers up in an added "obfuscation mode" region of
//! the state graph. Only a specific input sequence, the key, moves the
//! machine into the original functional region, and once there it never
//! returns. In the enumerated state graph the original region is therefore a
//! terminal strongly connected component that does not contain the initial
//! state.
//!
//! [`analyze_harpoon`] finds that region and the shortest key into it.
//! [`apply_harpoon_patch`] rewrites the state flip-flops' init values so the
//! design powers up directly in the region's entry state, which removes the
//! need for the key.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::fsm::{brute_force_state_graph, EnumerationLimits, FsmCandidate, FsmError, StateGraph};
use crate::graph::tarjan_scc;
use crate::netlist::{Netlist, NetlistError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarpoonFinding {
    /// First state of the original region reached by the key.
    pub entry_state: u64,
    /// Input assignments to apply from power-up, one per clock cycle.
    pub key: Vec<u64>,
    /// States of the original region, ascending.
    pub original_states: Vec<u64>,
    /// Every other reachable state, ascending.
    pub obfuscation_states: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct HarpoonReport {
    pub graph: StateGraph,
    /// `None` when the state graph has no obfuscation structure.
    pub finding: Option<HarpoonFinding>,
    /// Why no finding was produced.
    pub reason: Option<String>,
}

impl HarpoonReport {
    pub fn detected(&self) -> bool {
        self.finding.is_some()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let g = &self.graph;
        let fmt_states = |v: &[u64]| v.iter().map(|s| g.format_state(*s)).collect::<Vec<_>>();
        let finding = self.finding.as_ref().map(|f| {
            serde_json::json!({
                "original_initial_state": g.format_state(f.entry_state),
                "key_length": f.key.len(),
                "key": f.key.iter().map(|a| g.format_assignment(*a)).collect::<Vec<_>>(),
                "original_states": fmt_states(&f.original_states),
                "obfuscation_states": fmt_states(&f.obfuscation_states),
                "patched_ffs": g.candidate.state_ffs.iter().zip(&g.state_vars).enumerate().map(|(i, (id, name))| {
                    serde_json::json!({"gate": id, "name": name, "init": f.entry_state >> i & 1})
                }).collect::<Vec<_>>(),
            })
        });
        serde_json::json!({
            "detected": self.detected(),
            "reason": self.reason,
            "state_vars": g.state_vars,
            "input_vars": g.input_vars,
            "initial_state": g.format_state(g.initial_state),
            "state_count": g.states.len(),
            "finding": finding,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarpoonError {
    #[error(transparent)]
    Fsm(#[from] FsmError),
    #[error("{0}")]
    NotObfuscated(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Locate the original region of an obfuscated FSM and the shortest key
/// into it.
///
/// Among equally short keys the one with the smallest assignments, compared
/// cycle by cycle, is returned. If several terminal regions qualify the
/// report carries no finding and the reason lists every region.
pub fn analyze_harpoon(
    netlist: &Netlist,
    candidate: &FsmCandidate,
    limits: &EnumerationLimits,
) -> Result<HarpoonReport, FsmError> {
    let graph = brute_force_state_graph(netlist, candidate, limits)?;
    let (finding, reason) = match locate(&graph) {
        Ok(f) => (Some(f), None),
        Err(r) => (None, Some(r)),
    };
    Ok(HarpoonReport { graph, finding, reason })
}

fn locate(graph: &StateGraph) -> Result<HarpoonFinding, String> {
    let index: HashMap<u64, usize> = graph.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let adj: Vec<Vec<usize>> = graph
        .states
        .iter()
        .map(|&s| {
            let mut succ: Vec<usize> = graph.successors(s).iter().map(|n| index[n]).collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect();
    let sccs = tarjan_scc(&adj);
    let mut comp = vec![0usize; adj.len()];
    for (c, members) in sccs.iter().enumerate() {
        for &m in members {
            comp[m] = c;
        }
    }
    let init = comp[0];
    let terminal: Vec<usize> = (0..sccs.len())
        .filter(|&c| c != init)
        .filter(|&c| sccs[c].iter().all(|&u| adj[u].iter().all(|&v| comp[v] == c)))
        .collect();
    if terminal.is_empty() {
        return Err(if sccs.len() == 1 {
            "state graph is strongly connected".into()
        } else {
            "no closed region outside the power-up region".into()
        });
    }

    // Key search: BFS over (state, assignment) with assignments tried in
    // ascending order, so the first path found is the smallest key.
    let mut parent: Vec<Option<(usize, u64)>> = vec![None; adj.len()];
    let mut discovered = vec![usize::MAX; adj.len()];
    let mut counter = 1;
    discovered[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for (a, n) in graph.successors(graph.states[u]).iter().enumerate() {
            let v = index[n];
            if discovered[v] == usize::MAX {
                parent[v] = Some((u, a as u64));
                discovered[v] = counter;
                counter += 1;
                queue.push_back(v);
            }
        }
    }
    if terminal.len() > 1 {
        let regions: Vec<String> = terminal
            .iter()
            .map(|&c| {
                let mut states: Vec<u64> = sccs[c].iter().map(|&u| graph.states[u]).collect();
                states.sort_unstable();
                let names: Vec<String> = states.iter().map(|&s| graph.format_state(s)).collect();
                format!("{{{}}}", names.join(", "))
            })
            .collect();
        return Err(format!(
            "ambiguous: {} closed regions outside the power-up region: {}",
            terminal.len(),
            regions.join(" ")
        ));
    }
    let region = terminal[0];
    let members: BTreeSet<usize> = sccs[region].iter().copied().collect();
    // BFS discovers states in order of (key length, key), so the first
    // region member discovered carries the smallest key.
    let entry = *members
        .iter()
        .min_by_key(|&&v| discovered[v])
        .expect("non-empty region");
    let mut key = Vec::new();
    let mut cur = entry;
    while let Some((p, a)) = parent[cur] {
        key.push(a);
        cur = p;
    }
    key.reverse();

    let mut original: Vec<u64> = members.iter().map(|&i| graph.states[i]).collect();
    original.sort_unstable();
    let mut obfuscation: Vec<u64> = (0..adj.len())
        .filter(|i| !members.contains(i))
        .map(|i| graph.states[i])
        .collect();
    obfuscation.sort_unstable();
    Ok(HarpoonFinding {
        entry_state: graph.states[entry],
        key,
        original_states: original,
        obfuscation_states: obfuscation,
    })
}

/// Set every state flip-flop's init value to the entry state, so the
/// design powers up inside the original region.
pub fn apply_harpoon_patch(
    netlist: &mut Netlist,
    candidate: &FsmCandidate,
    finding: &HarpoonFinding,
) -> Result<(), HarpoonError> {
    let width = candidate.state_ffs.len();
    if width < 64 && finding.entry_state >> width != 0 {
        return Err(HarpoonError::NotObfuscated(format!(
            "entry state does not fit in {width} state registers"
        )));
    }
    for (i, &ff) in candidate.state_ffs.iter().enumerate() {
        let gate = netlist.gate(ff).ok_or(NetlistError::UnknownGate(ff))?;
        let key = gate
            .gate_type
            .ff
            .as_ref()
            .map(|s| s.init_key.clone())
            .ok_or_else(|| HarpoonError::NotObfuscated(format!("`{}` is not a flip-flop", gate.name)))?;
        let bit = finding.entry_state >> i & 1;
        netlist.set_gate_data(ff, &key, &format!("1'b{bit}"))?;
    }
    Ok(())
}
