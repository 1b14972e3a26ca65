//! Boolean functions of netlist structures: single LUTs, single
//! combinational gates, and whole combinational fan-in cones.

use std::collections::{BTreeSet, HashMap};

use super::{BoolError, BooleanFunction, Builder, DEFAULT_MAX_VARS};
use crate::hdl::{decode_init, InitError};
use crate::library::GateCategory;
use crate::netlist::{Gate, GateId, NetId, Netlist};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("unknown gate {0}")]
    UnknownGate(GateId),
    #[error("unknown net {0}")]
    UnknownNet(NetId),
    #[error("gate `{gate}` is not a LUT")]
    NotLut { gate: String },
    #[error("gate `{gate}` is not combinational")]
    NotCombinational { gate: String },
    #[error("LUT `{gate}` has no configuration")]
    MissingConfig { gate: String },
    #[error("LUT `{gate}`: {source}")]
    InvalidConfig { gate: String, source: InitError },
    #[error("combinational loop through net `{net}`")]
    CombinationalLoop { net: String },
    #[error("gate `{gate}` of category {category:?} cannot appear inside a combinational cone")]
    Unsupported { gate: String, category: GateCategory },
    #[error(transparent)]
    Bool(#[from] BoolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeOptions {
    /// Maximum number of distinct leaf variables a cone may have.
    pub max_vars: usize,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions {
            max_vars: DEFAULT_MAX_VARS,
        }
    }
}

/// Variable name for a gate input: the connected net's name, or
/// `g<id>.<pin>` when the pin is unconnected.
pub(crate) fn pin_variable(netlist: &Netlist, gate: &Gate, pin: &str) -> String {
    match gate.input_net(pin).and_then(|n| netlist.net(n)) {
        Some(net) => net.name.clone(),
        None => format!("{}.{pin}", gate.id),
    }
}

fn lut_bits(gate: &Gate) -> Result<Vec<bool>, ConeError> {
    let lut = gate.gate_type.lut.as_ref().ok_or_else(|| ConeError::NotLut {
        gate: gate.name.clone(),
    })?;
    let literal = gate.config().ok_or_else(|| ConeError::MissingConfig {
        gate: gate.name.clone(),
    })?;
    decode_init(literal, lut.pin_order.len()).map_err(|source| ConeError::InvalidConfig {
        gate: gate.name.clone(),
        source,
    })
}

/// Function of a LUT over the names of the nets on its input pins.
pub fn from_lut(netlist: &Netlist, gate: GateId) -> Result<BooleanFunction, ConeError> {
    let g = netlist.gate(gate).ok_or(ConeError::UnknownGate(gate))?;
    let bits = lut_bits(g)?;
    let lut = g.gate_type.lut.as_ref().expect("checked by lut_bits");
    let names: Vec<String> = lut.pin_order.iter().map(|p| pin_variable(netlist, g, p)).collect();
    let mut b = Builder::new(names.iter().cloned());
    let inputs: Vec<u32> = names.iter().map(|n| b.var_named(n).expect("registered")).collect();
    let root = b.select_table(&inputs, &bits);
    Ok(b.finish(root))
}

/// Per-output functions of a combinational (or buffer) gate, over the names
/// of the nets on its input pins.
pub fn from_combinational(
    netlist: &Netlist,
    gate: GateId,
) -> Result<std::collections::BTreeMap<String, BooleanFunction>, ConeError> {
    let g = netlist.gate(gate).ok_or(ConeError::UnknownGate(gate))?;
    if !matches!(g.category(), GateCategory::Combinational | GateCategory::Buffer) {
        return Err(ConeError::NotCombinational { gate: g.name.clone() });
    }
    let mut out = std::collections::BTreeMap::new();
    for (pin, template) in g.gate_type.functions() {
        let names: Vec<String> = template.support().iter().map(|p| pin_variable(netlist, g, p)).collect();
        let mut b = Builder::new(names.iter().cloned());
        let args: Vec<u32> = names.iter().map(|n| b.var_named(n).expect("registered")).collect();
        let root = b.apply_function(template, &args);
        out.insert(pin.clone(), b.finish(root));
    }
    Ok(out)
}

pub fn cone_function(netlist: &Netlist, root: NetId, stop: &BTreeSet<NetId>) -> Result<BooleanFunction, ConeError> {
    cone_function_with(netlist, root, stop, &ConeOptions::default())
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Signal {
    Net(NetId),
    /// An unconnected gate input pin, by gate and input index.
    Open(GateId, usize),
}

enum Source<'a> {
    Leaf(String),
    Constant(bool),
    Gate(&'a Gate, &'a str),
}

/// Function of `root` over the cone's leaves: nets in `stop`, global inputs,
/// flip-flop outputs, undriven nets and open pins. Leaves become variables
/// named after their nets.
pub fn cone_function_with(
    netlist: &Netlist,
    root: NetId,
    stop: &BTreeSet<NetId>,
    options: &ConeOptions,
) -> Result<BooleanFunction, ConeError> {
    netlist.net(root).ok_or(ConeError::UnknownNet(root))?;

    let classify = |sig: Signal| -> Result<Source<'_>, ConeError> {
        let id = match sig {
            Signal::Net(id) => id,
            Signal::Open(g, i) => {
                let gate = netlist.gate(g).expect("open pin on live gate");
                return Ok(Source::Leaf(format!("{g}.{}", gate.gate_type.input_pins[i])));
            }
        };
        let net = netlist.net(id).ok_or(ConeError::UnknownNet(id))?;
        if stop.contains(&id) || net.is_global_input {
            return Ok(Source::Leaf(net.name.clone()));
        }
        let Some(src) = &net.source else {
            return Ok(Source::Leaf(net.name.clone()));
        };
        let gate = netlist.gate(src.gate).ok_or(ConeError::UnknownGate(src.gate))?;
        match gate.category() {
            GateCategory::Ff => Ok(Source::Leaf(net.name.clone())),
            GateCategory::ConstZero => Ok(Source::Constant(false)),
            GateCategory::ConstOne => Ok(Source::Constant(true)),
            GateCategory::Combinational | GateCategory::Buffer | GateCategory::Lut => {
                Ok(Source::Gate(gate, src.pin.as_str()))
            }
            category @ GateCategory::Latch => Err(ConeError::Unsupported {
                gate: gate.name.clone(),
                category,
            }),
        }
    };
    let fanin = |gate: &Gate| -> Vec<Signal> {
        let pins: Box<dyn Iterator<Item = &String>> = match &gate.gate_type.lut {
            Some(lut) => Box::new(lut.pin_order.iter()),
            None => Box::new(gate.gate_type.input_pins.iter()),
        };
        pins.map(|p| match gate.input_net(p) {
            Some(n) => Signal::Net(n),
            None => Signal::Open(gate.id, gate.gate_type.input_index(p).expect("own pin")),
        })
        .collect()
    };

    // Pass 1: post-order over the cone, collecting leaves and rejecting cycles.
    #[derive(PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: HashMap<Signal, Mark> = HashMap::new();
    let mut order: Vec<Signal> = Vec::new();
    let mut leaves: BTreeSet<String> = BTreeSet::new();
    let mut stack = vec![(Signal::Net(root), false)];
    while let Some((sig, expanded)) = stack.pop() {
        if expanded {
            marks.insert(sig, Mark::Done);
            order.push(sig);
            continue;
        }
        match marks.get(&sig) {
            Some(Mark::Done) => continue,
            Some(Mark::Active) => {
                let Signal::Net(id) = sig else {
                    unreachable!("open pins are leaves")
                };
                return Err(ConeError::CombinationalLoop {
                    net: netlist.net(id).expect("checked").name.clone(),
                });
            }
            None => {}
        }
        match classify(sig)? {
            Source::Leaf(name) => {
                leaves.insert(name);
                marks.insert(sig, Mark::Done);
                order.push(sig);
            }
            Source::Constant(_) => {
                marks.insert(sig, Mark::Done);
                order.push(sig);
            }
            Source::Gate(gate, _) => {
                marks.insert(sig, Mark::Active);
                stack.push((sig, true));
                for child in fanin(gate).into_iter().rev() {
                    match marks.get(&child) {
                        Some(Mark::Done) => {}
                        Some(Mark::Active) => {
                            let Signal::Net(id) = child else { unreachable!() };
                            return Err(ConeError::CombinationalLoop {
                                net: netlist.net(id).expect("checked").name.clone(),
                            });
                        }
                        None => stack.push((child, false)),
                    }
                }
            }
        }
    }
    if leaves.len() > options.max_vars {
        return Err(BoolError::TooManyVariables {
            count: leaves.len(),
            limit: options.max_vars,
        }
        .into());
    }

    // Pass 2: build bottom-up in one shared table.
    let mut b = Builder::new(leaves);
    let mut value: HashMap<Signal, u32> = HashMap::with_capacity(order.len());
    for sig in order {
        let node = match classify(sig)? {
            Source::Leaf(name) => b.var_named(&name).expect("leaf registered"),
            Source::Constant(c) => Builder::constant(c),
            Source::Gate(gate, pin) => {
                let args: Vec<u32> = fanin(gate).iter().map(|s| value[s]).collect();
                if gate.category() == GateCategory::Lut {
                    let bits = lut_bits(gate)?;
                    b.select_table(&args, &bits)
                } else {
                    let template = gate.gate_type.function(pin).expect("validated library");
                    let mapped: Vec<u32> = template
                        .support()
                        .iter()
                        .map(|p| args[gate.gate_type.input_index(p).expect("template pin")])
                        .collect();
                    b.apply_function(template, &mapped)
                }
            }
        };
        value.insert(sig, node);
    }
    Ok(b.finish(value[&Signal::Net(root)]))
}
