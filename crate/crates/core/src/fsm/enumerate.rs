use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;

use super::{initial_state_bits, FsmCandidate, FsmError, TransitionFunctions};
use crate::boolean::{BooleanFunction, ConeOptions};
use crate::netlist::Netlist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumerationLimits {
    pub max_inputs: usize,
    pub max_states: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_inputs: 10,
            max_states: 65536,
        }
    }
}

/// Explicit state graph of one candidate.
///
/// States are bit-packed codes: bit `i` is `state_vars[i]`. For every state
/// the successor under each input assignment is stored densely, indexed by
/// the assignment (bit `j` is `input_vars[j]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateGraph {
    pub candidate: FsmCandidate,
    pub state_vars: Vec<String>,
    pub input_vars: Vec<String>,
    pub initial_state: u64,
    /// States in breadth-first discovery order; the first is the initial state.
    pub states: Vec<u64>,
    next: HashMap<u64, Vec<u64>>,
}

impl StateGraph {
    pub fn state_bits(&self) -> usize {
        self.state_vars.len()
    }

    pub fn assignment_count(&self) -> u64 {
        1u64 << self.input_vars.len()
    }

    pub fn contains(&self, state: u64) -> bool {
        self.next.contains_key(&state)
    }

    /// Successor of `state` under input assignment `assignment`.
    pub fn successor(&self, state: u64, assignment: u64) -> Option<u64> {
        self.next.get(&state)?.get(assignment as usize).copied()
    }

    /// Successors of `state` indexed by input assignment.
    pub fn successors(&self, state: u64) -> &[u64] {
        self.next.get(&state).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Every `(state, assignment, next)` triple, states in discovery order.
    pub fn transitions(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        self.states.iter().flat_map(move |&s| {
            self.successors(s)
                .iter()
                .enumerate()
                .map(move |(a, &n)| (s, a as u64, n))
        })
    }

    /// One edge per distinct `(state, next)` pair, labelled with the input
    /// condition under which it is taken.
    pub fn condensed_edges(&self) -> BTreeMap<(u64, u64), BooleanFunction> {
        let mut out = BTreeMap::new();
        for &s in &self.states {
            let succ = self.successors(s);
            let mut targets: Vec<u64> = succ.to_vec();
            targets.sort_unstable();
            targets.dedup();
            for t in targets {
                let bits: Vec<bool> = succ.iter().map(|&n| n == t).collect();
                let cond = BooleanFunction::from_truth_table(&self.input_vars, &bits)
                    .expect("input count is within the enumeration limit");
                out.insert((s, t), cond);
            }
        }
        out
    }

    /// State code as a bit string, most significant state bit first.
    pub fn format_state(&self, state: u64) -> String {
        (0..self.state_bits())
            .rev()
            .map(|i| if state >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Input assignment as `name=value` pairs in input order.
    pub fn format_assignment(&self, assignment: u64) -> String {
        self.input_vars
            .iter()
            .enumerate()
            .map(|(j, v)| format!("{v}={}", assignment >> j & 1))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Re-evaluate every transition by name through the unbound functions.
    pub fn verify(&self, functions: &TransitionFunctions) -> bool {
        let nstate = self.state_bits();
        self.transitions().all(|(s, a, n)| {
            let value = |name: &str| {
                if let Some(i) = self.state_vars.iter().position(|v| v == name) {
                    Some(s >> i & 1 == 1)
                } else {
                    self.input_vars.iter().position(|v| v == name).map(|j| a >> j & 1 == 1)
                }
            };
            (0..nstate).all(|i| functions.next[i].evaluate_with(value).ok() == Some(n >> i & 1 == 1))
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let transitions: Vec<serde_json::Value> = self
            .condensed_edges()
            .iter()
            .map(|((s, t), cond)| {
                serde_json::json!({
                    "from": self.format_state(*s),
                    "to": self.format_state(*t),
                    "condition": cond.to_string(),
                })
            })
            .collect();
        serde_json::json!({
            "state_vars": self.state_vars,
            "input_vars": self.input_vars,
            "initial_state": self.format_state(self.initial_state),
            "states": self.states.iter().map(|s| self.format_state(*s)).collect::<Vec<_>>(),
            "transitions": transitions,
        })
    }
}

/// Enumerate every state reachable from the flip-flops' init values.
///
/// Breadth-first over states; each state is expanded under all input
/// assignments in numeric order, so the result is deterministic.
pub fn brute_force_state_graph(
    netlist: &Netlist,
    candidate: &FsmCandidate,
    limits: &EnumerationLimits,
) -> Result<StateGraph, FsmError> {
    let inputs = candidate.external_input_nets.len();
    if inputs > limits.max_inputs {
        return Err(FsmError::InputLimit {
            inputs,
            limit: limits.max_inputs,
        });
    }
    let nstate = candidate.state_ffs.len();
    if nstate + inputs > 64 {
        return Err(FsmError::TooWide {
            state_bits: nstate,
            inputs,
        });
    }
    let functions = super::extract_transition_functions(netlist, candidate, &ConeOptions::default())?;
    let init = initial_state_bits(netlist, candidate)?;
    let initial_state = candidate
        .state_ffs
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, ff)| acc | (init[ff] as u64) << i);
    let graph = enumerate(candidate.clone(), &functions, initial_state, limits)?;
    debug_assert!(graph.verify(&functions));
    Ok(graph)
}

pub(crate) fn enumerate(
    candidate: FsmCandidate,
    functions: &TransitionFunctions,
    initial_state: u64,
    limits: &EnumerationLimits,
) -> Result<StateGraph, FsmError> {
    let order = functions.variable_order();
    let bound = functions
        .next
        .iter()
        .map(|f| f.bind(&order))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| FsmError::Invalid(e.to_string()))?;
    let nstate = functions.state_vars.len();
    let assignments = 1u64 << functions.input_vars.len();

    let mut next: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut states = vec![initial_state];
    let mut queue = VecDeque::from([initial_state]);
    let mut seen = HashSet::from([initial_state]);
    while let Some(s) = queue.pop_front() {
        let mut row = Vec::with_capacity(assignments as usize);
        for a in 0..assignments {
            let bits = s | a.checked_shl(nstate as u32).unwrap_or(0);
            let n = bound
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, f)| acc | (f.eval(bits) as u64) << i);
            if seen.insert(n) {
                if states.len() == limits.max_states {
                    return Err(FsmError::StateLimit {
                        limit: limits.max_states,
                        discovered: states.len(),
                        expanded: next.len(),
                    });
                }
                states.push(n);
                queue.push_back(n);
            }
            row.push(n);
        }
        next.insert(s, row);
    }
    log::debug!(target: "fsm", "enumerated {} states over {} assignments", states.len(), assignments);
    Ok(StateGraph {
        candidate,
        state_vars: functions.state_vars.clone(),
        input_vars: functions.input_vars.clone(),
        initial_state,
        states,
        next,
    })
}
