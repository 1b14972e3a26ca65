//! Finite state machine recovery.
//!
//! A hardware FSM is a state register whose next value is computed by
//! combinational logic from the current state and some inputs. In the gate
//! digraph that shows up as a strongly connected component containing
//! flip-flops. The pipeline here is:
//!
//! 1. [`find_fsm_candidates`]: one candidate per SCC holding at least one
//!    flip-flop; structurally unsuitable SCCs are reported with a reason.
//! 2. [`extract_transition_functions`]: next-state function of every state
//!    flip-flop over state bits and external inputs.
//! 3. [`brute_force_state_graph`]: breadth-first enumeration of every state
//!    reachable from the flip-flops' init values, under every input
//!    assignment.
//! 4. [`export_dot`]: Graphviz rendering of the result.
//!
//! State bit `i` belongs to `state_ffs[i]` (ascending gate id). Input
//! assignment bit `j` belongs to `external_input_nets[j]` (ascending net
//! name).

mod dot;
mod enumerate;
mod transition;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

pub use dot::{export_dot, state_graph_dot};
pub use enumerate::{brute_force_state_graph, EnumerationLimits, StateGraph};
pub use transition::{extract_transition_functions, TransitionFunctions};

use crate::boolean::ConeError;
use crate::graph::build_digraph;
use crate::hdl::InitError;
use crate::library::GateCategory;
use crate::netlist::{GateId, NetId, Netlist};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FsmCandidate {
    pub scc_gates: BTreeSet<GateId>,
    pub state_ffs: Vec<GateId>,
    /// Combinational gates in the fan-in cones of the state flip-flops.
    pub combinational_gates: BTreeSet<GateId>,
    pub external_input_nets: Vec<NetId>,
    pub clock_net: Option<NetId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedCandidate {
    pub scc_gates: BTreeSet<GateId>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CandidateReport {
    /// Ranked: most flip-flops first, then fewest inputs, then lowest gate id.
    pub candidates: Vec<FsmCandidate>,
    pub rejected: Vec<RejectedCandidate>,
}

#[derive(Debug, thiserror::Error)]
pub enum FsmError {
    #[error("candidate has {inputs} external inputs, limit is {limit}")]
    InputLimit { inputs: usize, limit: usize },
    #[error("state limit of {limit} exceeded after discovering {discovered} states ({expanded} fully expanded)")]
    StateLimit {
        limit: usize,
        discovered: usize,
        expanded: usize,
    },
    #[error("{state_bits} state bits plus {inputs} inputs do not fit a 64-bit word")]
    TooWide { state_bits: usize, inputs: usize },
    #[error("flip-flop `{gate}` has an invalid init value: {source}")]
    InvalidInit { gate: String, source: InitError },
    #[error("candidate is not usable: {0}")]
    Invalid(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// Structural fan-in of one net, stopped at `stop` nets, global inputs,
/// sequential outputs, constants and undriven nets.
struct ConeScan {
    gates: BTreeSet<GateId>,
    leaves: BTreeSet<NetId>,
}

fn scan_cone(netlist: &Netlist, root: NetId, stop: &BTreeSet<NetId>) -> Result<ConeScan, String> {
    #[derive(PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: HashMap<NetId, Mark> = HashMap::new();
    let mut scan = ConeScan {
        gates: BTreeSet::new(),
        leaves: BTreeSet::new(),
    };
    let mut stack = vec![(root, false)];
    while let Some((net_id, expanded)) = stack.pop() {
        if expanded {
            marks.insert(net_id, Mark::Done);
            continue;
        }
        match marks.get(&net_id) {
            Some(Mark::Done) => continue,
            Some(Mark::Active) => {
                return Err(format!(
                    "combinational loop through net `{}`",
                    netlist.net(net_id).map(|n| n.name.as_str()).unwrap_or("?")
                ))
            }
            None => {}
        }
        let net = netlist.net(net_id).expect("integrity");
        let driver = net.source.as_ref().and_then(|s| netlist.gate(s.gate));
        let gate = match driver {
            _ if stop.contains(&net_id) || net.is_global_input => None,
            None => None,
            Some(g) => match g.category() {
                GateCategory::Ff => None,
                GateCategory::ConstZero | GateCategory::ConstOne => {
                    marks.insert(net_id, Mark::Done);
                    continue;
                }
                GateCategory::Latch => return Err(format!("latch `{}` in transition logic", g.name)),
                _ => Some(g),
            },
        };
        let Some(gate) = gate else {
            scan.leaves.insert(net_id);
            marks.insert(net_id, Mark::Done);
            continue;
        };
        scan.gates.insert(gate.id);
        marks.insert(net_id, Mark::Active);
        stack.push((net_id, true));
        for (pin, input) in gate.input_nets() {
            let Some(input) = input else {
                return Err(format!("gate `{}` has unconnected input `{pin}`", gate.name));
            };
            match marks.get(&input) {
                Some(Mark::Done) => {}
                Some(Mark::Active) => {
                    return Err(format!(
                        "combinational loop through net `{}`",
                        netlist.net(input).map(|n| n.name.as_str()).unwrap_or("?")
                    ))
                }
                None => stack.push((input, false)),
            }
        }
    }
    Ok(scan)
}

/// Check a set of state flip-flops and derive the candidate's cone data.
pub(crate) fn analyze_state_register(
    netlist: &Netlist,
    scc_gates: BTreeSet<GateId>,
    state_ffs: Vec<GateId>,
) -> Result<FsmCandidate, RejectedCandidate> {
    let reject = |reason: String| RejectedCandidate {
        scc_gates: scc_gates.clone(),
        reason,
    };
    if let Some(latch) = scc_gates
        .iter()
        .filter_map(|g| netlist.gate(*g))
        .find(|g| g.category() == GateCategory::Latch)
    {
        return Err(reject(format!("contains latch `{}`", latch.name)));
    }
    let mut stop = BTreeSet::new();
    let mut clocks = BTreeSet::new();
    for &ff in &state_ffs {
        let gate = netlist.gate(ff).expect("live gate");
        let spec = gate.gate_type.ff.as_ref().expect("FF category has ff spec");
        let q = gate.output_nets().next().and_then(|(_, n)| n);
        let Some(q) = q else {
            return Err(reject(format!("flip-flop `{}` has no output net", gate.name)));
        };
        stop.insert(q);
        if let Some(clk) = gate.input_net(&spec.clock_pin) {
            clocks.insert(clk);
        }
    }
    if clocks.len() > 1 {
        return Err(reject(format!("{} distinct clock nets", clocks.len())));
    }

    let mut gates = BTreeSet::new();
    let mut leaves = BTreeSet::new();
    for &ff in &state_ffs {
        let gate = netlist.gate(ff).expect("live gate");
        let spec = gate.gate_type.ff.as_ref().expect("FF spec");
        let Some(d) = gate.input_net(&spec.data_pin) else {
            return Err(reject(format!("flip-flop `{}` has an unconnected data pin", gate.name)));
        };
        let control = [spec.enable_pin.as_ref(), spec.reset_pin.as_ref()];
        let roots = std::iter::once(d).chain(control.into_iter().flatten().filter_map(|p| gate.input_net(p)));
        for root in roots {
            let scan = scan_cone(netlist, root, &stop).map_err(&reject)?;
            gates.extend(scan.gates);
            leaves.extend(scan.leaves);
        }
    }
    let mut inputs: Vec<NetId> = leaves
        .into_iter()
        .filter(|n| !stop.contains(n) && !clocks.contains(n))
        .collect();
    inputs.sort_by(|a, b| {
        netlist
            .net(*a)
            .expect("live")
            .name
            .cmp(&netlist.net(*b).expect("live").name)
    });
    Ok(FsmCandidate {
        scc_gates,
        state_ffs,
        combinational_gates: gates,
        external_input_nets: inputs,
        clock_net: clocks.into_iter().next(),
    })
}

/// One candidate per strongly connected component that contains at least
/// one flip-flop.
pub fn find_fsm_candidates(netlist: &Netlist) -> CandidateReport {
    let digraph = build_digraph(netlist, None);
    let mut report = CandidateReport::default();
    for scc in digraph.sccs(false) {
        let state_ffs: Vec<GateId> = scc
            .iter()
            .copied()
            .filter(|g| netlist.gate(*g).is_some_and(|g| g.category() == GateCategory::Ff))
            .collect();
        if state_ffs.is_empty() {
            if let Some(latch) = scc
                .iter()
                .filter_map(|g| netlist.gate(*g))
                .find(|g| g.category() == GateCategory::Latch)
            {
                report.rejected.push(RejectedCandidate {
                    scc_gates: scc.clone(),
                    reason: format!("latch-based feedback through `{}`", latch.name),
                });
            }
            continue;
        }
        match analyze_state_register(netlist, scc, state_ffs) {
            Ok(c) => report.candidates.push(c),
            Err(r) => report.rejected.push(r),
        }
    }
    report.candidates.sort_by(|a, b| {
        b.state_ffs
            .len()
            .cmp(&a.state_ffs.len())
            .then(a.external_input_nets.len().cmp(&b.external_input_nets.len()))
            .then(a.scc_gates.first().cmp(&b.scc_gates.first()))
    });
    report
        .rejected
        .sort_by(|a, b| a.scc_gates.first().cmp(&b.scc_gates.first()));
    report
}

/// Machine-readable candidate listing with gate and net names resolved.
pub fn candidate_report_json(netlist: &Netlist, report: &CandidateReport) -> serde_json::Value {
    let gate_name = |g: &GateId| netlist.gate(*g).map(|g| g.name.clone()).unwrap_or_default();
    let net_name = |n: &NetId| netlist.net(*n).map(|n| n.name.clone()).unwrap_or_default();
    let candidates: Vec<serde_json::Value> = report
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            serde_json::json!({
                "index": i,
                "scc_size": c.scc_gates.len(),
                "scc_gates": c.scc_gates,
                "state_ffs": c.state_ffs,
                "state_ff_names": c.state_ffs.iter().map(gate_name).collect::<Vec<_>>(),
                "combinational_gates": c.combinational_gates.len(),
                "external_inputs": c.external_input_nets.iter().map(net_name).collect::<Vec<_>>(),
                "clock": c.clock_net.as_ref().map(net_name),
            })
        })
        .collect();
    let rejected: Vec<serde_json::Value> = report
        .rejected
        .iter()
        .map(|r| {
            serde_json::json!({
                "scc_size": r.scc_gates.len(),
                "scc_gates": r.scc_gates,
                "reason": r.reason,
            })
        })
        .collect();
    serde_json::json!({ "candidates": candidates, "rejected": rejected })
}

/// Map from state flip-flop to its current init bit (missing inits read as 0).
pub fn initial_state_bits(netlist: &Netlist, candidate: &FsmCandidate) -> Result<BTreeMap<GateId, bool>, FsmError> {
    let mut out = BTreeMap::new();
    for &ff in &candidate.state_ffs {
        let gate = netlist
            .gate(ff)
            .ok_or_else(|| FsmError::Invalid(format!("state flip-flop {ff} no longer exists")))?;
        let bit = match gate.config() {
            Some(lit) => crate::hdl::decode_init(lit, 0).map_err(|source| FsmError::InvalidInit {
                gate: gate.name.clone(),
                source,
            })?[0],
            None => {
                log::warn!(target: "fsm", "flip-flop `{}` has no init value, assuming 0", gate.name);
                false
            }
        };
        out.insert(ff, bit);
    }
    Ok(out)
}
