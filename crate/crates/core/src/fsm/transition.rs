use std::collections::BTreeSet;

use super::{FsmCandidate, FsmError};
use crate::boolean::{cone_function_with, BooleanFunction, ConeOptions};
use crate::netlist::Netlist;

/// Next-state functions of a candidate's state register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionFunctions {
    /// Output net name of each state flip-flop; bit `i` of a state code.
    pub state_vars: Vec<String>,
    /// External input net names; bit `j` of an input assignment.
    pub input_vars: Vec<String>,
    /// `next[i]` is the value `state_vars[i]` takes on the next clock edge.
    pub next: Vec<BooleanFunction>,
}

impl TransitionFunctions {
    /// All variables, state bits first: the order used for bit-packed
    /// evaluation of `state | assignment << state_bits`.
    pub fn variable_order(&self) -> Vec<String> {
        self.state_vars.iter().chain(&self.input_vars).cloned().collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let next: serde_json::Map<String, serde_json::Value> = self
            .state_vars
            .iter()
            .zip(&self.next)
            .map(|(v, f)| (v.clone(), f.to_string().into()))
            .collect();
        serde_json::json!({
            "state_vars": self.state_vars,
            "input_vars": self.input_vars,
            "next": next,
        })
    }
}

/// Build the next-state function of every state flip-flop.
///
/// Enable and reset pins are folded in: with enable `e`, reset `r`, data
/// `d` and current value `q`, the next value is `!r & (e ? d : q)`. An
/// unconnected enable reads as 1 and an unconnected reset as 0.
pub fn extract_transition_functions(
    netlist: &Netlist,
    candidate: &FsmCandidate,
    options: &ConeOptions,
) -> Result<TransitionFunctions, FsmError> {
    let mut stop = BTreeSet::new();
    let mut state_vars = Vec::new();
    for &ff in &candidate.state_ffs {
        let gate = netlist
            .gate(ff)
            .ok_or_else(|| FsmError::Invalid(format!("state flip-flop {ff} no longer exists")))?;
        let q = gate
            .output_nets()
            .next()
            .and_then(|(_, n)| n)
            .ok_or_else(|| FsmError::Invalid(format!("flip-flop `{}` has no output net", gate.name)))?;
        stop.insert(q);
        state_vars.push(netlist.net(q).expect("live net").name.clone());
    }
    let input_vars: Vec<String> = candidate
        .external_input_nets
        .iter()
        .map(|n| {
            netlist
                .net(*n)
                .map(|n| n.name.clone())
                .ok_or_else(|| FsmError::Invalid(format!("input net {n} no longer exists")))
        })
        .collect::<Result<_, _>>()?;

    let mut next = Vec::new();
    for (i, &ff) in candidate.state_ffs.iter().enumerate() {
        let gate = netlist.gate(ff).expect("checked above");
        let spec = gate.gate_type.ff.as_ref().expect("FF spec");
        let cone = |pin: &str| -> Result<Option<BooleanFunction>, FsmError> {
            match gate.input_net(pin) {
                Some(net) => Ok(Some(cone_function_with(netlist, net, &stop, options)?)),
                None => Ok(None),
            }
        };
        let d = cone(&spec.data_pin)?
            .ok_or_else(|| FsmError::Invalid(format!("flip-flop `{}` has an unconnected data pin", gate.name)))?;
        let q = BooleanFunction::var(state_vars[i].clone());
        let mut f = match spec.enable_pin.as_deref() {
            Some(pin) => match cone(pin)? {
                Some(e) => BooleanFunction::ite(&e, &d, &q),
                None => d,
            },
            None => d,
        };
        if let Some(pin) = spec.reset_pin.as_deref() {
            if let Some(r) = cone(pin)? {
                f = r.not().and(&f);
            }
        }
        next.push(f);
    }

    let known: BTreeSet<&str> = state_vars.iter().chain(&input_vars).map(String::as_str).collect();
    for f in &next {
        if let Some(v) = f.support().iter().find(|v| !known.contains(v.as_str())) {
            return Err(FsmError::Invalid(format!(
                "transition logic depends on `{v}`, which is not a candidate input"
            )));
        }
    }
    Ok(TransitionFunctions {
        state_vars,
        input_vars,
        next,
    })
}
