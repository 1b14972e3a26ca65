//! The in-memory netlist graph.
//!
//! A [`Netlist`] owns gates, nets and submodules and keeps them referentially
//! consistent: every connected pin appears in exactly one net, and the net
//! records the pin as its source or as one of its sinks. Ids are handed out
//! monotonically and never reused. Each successful mutation appends exactly
//! one [`Event`] to the journal, and replaying a journal onto an empty
//! netlist reproduces the netlist.
//!
//! Mutation requires `&mut Netlist`, so the borrow checker enforces the
//! single-writer/many-readers contract; share across threads with
//! `Arc<RwLock<Netlist>>`.
//!
//! ```
//! use std::sync::Arc;
//! use gatescope::library::GateLibrary;
//! use gatescope::netlist::{Endpoint, Netlist};
//!
//! let mut nl = Netlist::new("demo", Arc::new(GateLibrary::builtin()));
//! let inv = nl.create_gate("INV", "u1").unwrap();
//! let buf = nl.create_gate("BUF", "u2").unwrap();
//! let w = nl.create_net("w").unwrap();
//! nl.connect(w, Endpoint::output(inv, "O")).unwrap();
//! nl.connect(w, Endpoint::input(buf, "I")).unwrap();
//! assert_eq!(nl.net(w).unwrap().sinks.len(), 1);
//! assert_eq!(nl.events().len(), 5);
//! nl.check_integrity().unwrap();
//! ```

mod event;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use event::{EndpointChange, Event, EventKind, ModuleState};
pub use snapshot::{
    load_snapshot, save_snapshot, SnapshotDocument, SnapshotError, SnapshotGate, SnapshotNet, SnapshotPin,
    SnapshotSubmodule, SNAPSHOT_VERSION,
};

use crate::hdl::{decode_init, InitError};
use crate::library::{GateCategory, GateLibrary, GateType};

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(GateId, "g");
id_type!(NetId, "n");
id_type!(ModuleId, "m");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub gate: GateId,
    pub pin: String,
    pub direction: Direction,
}

impl Endpoint {
    pub fn input(gate: GateId, pin: impl Into<String>) -> Self {
        Endpoint {
            gate,
            pin: pin.into(),
            direction: Direction::In,
        }
    }

    pub fn output(gate: GateId, pin: impl Into<String>) -> Self {
        Endpoint {
            gate,
            pin: pin.into(),
            direction: Direction::Out,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gate {
    pub id: GateId,
    pub name: String,
    pub gate_type: Arc<GateType>,
    /// Free-form per-gate data; LUT contents and flip-flop init values live
    /// under the type's config key.
    pub data: BTreeMap<String, String>,
    inputs: Vec<Option<NetId>>,
    outputs: Vec<Option<NetId>>,
}

impl Gate {
    pub fn type_name(&self) -> &str {
        &self.gate_type.name
    }

    pub fn category(&self) -> GateCategory {
        self.gate_type.category
    }

    pub fn input_net(&self, pin: &str) -> Option<NetId> {
        self.gate_type.input_index(pin).and_then(|i| self.inputs[i])
    }

    pub fn output_net(&self, pin: &str) -> Option<NetId> {
        self.gate_type.output_index(pin).and_then(|i| self.outputs[i])
    }

    /// Input pins paired with their nets, in type order.
    pub fn input_nets(&self) -> impl Iterator<Item = (&str, Option<NetId>)> {
        self.gate_type
            .input_pins
            .iter()
            .map(String::as_str)
            .zip(self.inputs.iter().copied())
    }

    pub fn output_nets(&self) -> impl Iterator<Item = (&str, Option<NetId>)> {
        self.gate_type
            .output_pins
            .iter()
            .map(String::as_str)
            .zip(self.outputs.iter().copied())
    }

    /// Configuration literal (LUT contents or FF init), if set.
    pub fn config(&self) -> Option<&str> {
        self.gate_type
            .config_key()
            .and_then(|k| self.data.get(k))
            .map(String::as_str)
    }

    fn slot(&mut self, pin: &str, direction: Direction) -> Option<&mut Option<NetId>> {
        match direction {
            Direction::In => {
                let i = self.gate_type.input_index(pin)?;
                Some(&mut self.inputs[i])
            }
            Direction::Out => {
                let i = self.gate_type.output_index(pin)?;
                Some(&mut self.outputs[i])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub id: NetId,
    pub name: String,
    pub source: Option<Endpoint>,
    pub sinks: BTreeSet<Endpoint>,
    pub is_global_input: bool,
    pub is_global_output: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submodule {
    pub id: ModuleId,
    pub name: String,
    pub gates: BTreeSet<GateId>,
    pub nets: BTreeSet<NetId>,
    pub color: Option<[u8; 3]>,
    pub parent: Option<ModuleId>,
}

impl Submodule {
    pub fn state(&self) -> ModuleState {
        ModuleState {
            name: self.name.clone(),
            gates: self.gates.clone(),
            nets: self.nets.clone(),
            color: self.color,
            parent: self.parent,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("unknown gate type `{0}`")]
    UnknownGateType(String),
    #[error("name must not be empty")]
    EmptyName,
    #[error("a gate named `{0}` already exists")]
    DuplicateGateName(String),
    #[error("a net named `{0}` already exists")]
    DuplicateNetName(String),
    #[error("unknown gate {0}")]
    UnknownGate(GateId),
    #[error("unknown net {0}")]
    UnknownNet(NetId),
    #[error("unknown submodule {0}")]
    UnknownModule(ModuleId),
    #[error("gate {gate} has no {direction:?} pin `{pin}`")]
    UnknownPin {
        gate: GateId,
        pin: String,
        direction: Direction,
    },
    #[error("pin {gate}.{pin} is already connected to net {net}")]
    PinAlreadyConnected { gate: GateId, pin: String, net: NetId },
    #[error("net {0} already has a source")]
    NetAlreadyDriven(NetId),
    #[error("net {0} is a global input and cannot have a source")]
    GlobalInputDriven(NetId),
    #[error("endpoint {gate}.{pin} is not attached to net {net}")]
    EndpointNotFound { net: NetId, gate: GateId, pin: String },
    #[error("invalid `{key}` value for gate {gate}: {source}")]
    InvalidConfig {
        gate: GateId,
        key: String,
        source: InitError,
    },
    #[error("submodule parent link would form a cycle")]
    ModuleCycle,
    #[error("event replay diverged: {0}")]
    ReplayMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetlistSummary {
    pub gates: usize,
    pub nets: usize,
    pub modules: usize,
}

/// Field-wise update for [`Netlist::update_submodule`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleUpdate {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub gates: Option<BTreeSet<GateId>>,
    #[serde(default)]
    pub nets: Option<BTreeSet<NetId>>,
    /// `Some(None)` clears the color.
    #[serde(default)]
    pub color: Option<Option<[u8; 3]>>,
    #[serde(default)]
    pub parent: Option<Option<ModuleId>>,
}

#[derive(Debug, Clone)]
pub struct Netlist {
    pub design_name: String,
    library: Arc<GateLibrary>,
    gates: BTreeMap<GateId, Gate>,
    nets: BTreeMap<NetId, Net>,
    modules: BTreeMap<ModuleId, Submodule>,
    gate_names: HashMap<String, GateId>,
    net_names: HashMap<String, NetId>,
    next_gate: u32,
    next_net: u32,
    next_module: u32,
    events: Vec<Event>,
    next_seq: u64,
}

impl Netlist {
    pub fn new(design_name: impl Into<String>, library: Arc<GateLibrary>) -> Self {
        Netlist {
            design_name: design_name.into(),
            library,
            gates: BTreeMap::new(),
            nets: BTreeMap::new(),
            modules: BTreeMap::new(),
            gate_names: HashMap::new(),
            net_names: HashMap::new(),
            next_gate: 1,
            next_net: 1,
            next_module: 1,
            events: Vec::new(),
            next_seq: 1,
        }
    }

    pub fn library(&self) -> &Arc<GateLibrary> {
        &self.library
    }

    pub fn gate(&self, id: GateId) -> Option<&Gate> {
        self.gates.get(&id)
    }

    pub fn net(&self, id: NetId) -> Option<&Net> {
        self.nets.get(&id)
    }

    pub fn submodule(&self, id: ModuleId) -> Option<&Submodule> {
        self.modules.get(&id)
    }

    /// Gates in ascending id order.
    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.values()
    }

    pub fn nets(&self) -> impl Iterator<Item = &Net> {
        self.nets.values()
    }

    pub fn submodules(&self) -> impl Iterator<Item = &Submodule> {
        self.modules.values()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn net_count(&self) -> usize {
        self.nets.len()
    }

    pub fn gate_by_name(&self, name: &str) -> Option<GateId> {
        self.gate_names.get(name).copied()
    }

    pub fn net_by_name(&self, name: &str) -> Option<NetId> {
        self.net_names.get(name).copied()
    }

    pub fn summary(&self) -> NetlistSummary {
        NetlistSummary {
            gates: self.gates.len(),
            nets: self.nets.len(),
            modules: self.modules.len(),
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Events with `seq > after`.
    pub fn events_after(&self, after: u64) -> &[Event] {
        let start = self.events.partition_point(|e| e.seq <= after);
        &self.events[start..]
    }

    pub fn last_seq(&self) -> u64 {
        self.next_seq - 1
    }

    /// Gate driving `net`, if any.
    pub fn driver(&self, net: NetId) -> Option<&Gate> {
        let source = self.nets.get(&net)?.source.as_ref()?;
        self.gates.get(&source.gate)
    }

    pub fn global_inputs(&self) -> impl Iterator<Item = &Net> {
        self.nets.values().filter(|n| n.is_global_input)
    }

    pub fn global_outputs(&self) -> impl Iterator<Item = &Net> {
        self.nets.values().filter(|n| n.is_global_output)
    }

    /// Nets touching the submodule's gates whose source and sinks all belong
    /// to those gates. Global ports are never internal.
    pub fn internal_nets(&self, module: ModuleId) -> Result<BTreeSet<NetId>, NetlistError> {
        let m = self.modules.get(&module).ok_or(NetlistError::UnknownModule(module))?;
        Ok(m.gates
            .iter()
            .flat_map(|g| {
                let gate = &self.gates[g];
                gate.input_nets().chain(gate.output_nets()).filter_map(|(_, n)| n)
            })
            .filter(|id| {
                let net = &self.nets[id];
                !net.is_global_input
                    && !net.is_global_output
                    && net.source.iter().chain(&net.sinks).all(|e| m.gates.contains(&e.gate))
            })
            .collect())
    }

    fn emit(&mut self, kind: EventKind) {
        self.events.push(Event {
            seq: self.next_seq,
            kind,
        });
        self.next_seq += 1;
    }

    pub fn create_gate(&mut self, type_name: &str, name: &str) -> Result<GateId, NetlistError> {
        let gate_type = self
            .library
            .gate_type(type_name)
            .ok_or_else(|| NetlistError::UnknownGateType(type_name.to_string()))?
            .clone();
        if name.is_empty() {
            return Err(NetlistError::EmptyName);
        }
        if self.gate_names.contains_key(name) {
            return Err(NetlistError::DuplicateGateName(name.to_string()));
        }
        let id = GateId(self.next_gate);
        self.next_gate += 1;
        let gate = Gate {
            id,
            name: name.to_string(),
            inputs: vec![None; gate_type.input_pins.len()],
            outputs: vec![None; gate_type.output_pins.len()],
            gate_type,
            data: BTreeMap::new(),
        };
        self.gate_names.insert(name.to_string(), id);
        self.gates.insert(id, gate);
        self.emit(EventKind::GateCreated {
            gate: id,
            type_name: type_name.to_string(),
            name: name.to_string(),
        });
        Ok(id)
    }

    pub fn delete_gate(&mut self, id: GateId) -> Result<(), NetlistError> {
        let gate = self.gates.remove(&id).ok_or(NetlistError::UnknownGate(id))?;
        self.gate_names.remove(&gate.name);
        for (pin, net) in gate.input_nets() {
            if let Some(net) = net {
                let n = self.nets.get_mut(&net).expect("integrity");
                n.sinks.remove(&Endpoint::input(id, pin));
            }
        }
        for (_, net) in gate.output_nets() {
            if let Some(net) = net {
                self.nets.get_mut(&net).expect("integrity").source = None;
            }
        }
        for m in self.modules.values_mut() {
            m.gates.remove(&id);
        }
        self.emit(EventKind::GateDeleted {
            gate: id,
            type_name: gate.type_name().to_string(),
            name: gate.name,
        });
        Ok(())
    }

    pub fn create_net(&mut self, name: &str) -> Result<NetId, NetlistError> {
        if name.is_empty() {
            return Err(NetlistError::EmptyName);
        }
        if self.net_names.contains_key(name) {
            return Err(NetlistError::DuplicateNetName(name.to_string()));
        }
        let id = NetId(self.next_net);
        self.next_net += 1;
        self.nets.insert(
            id,
            Net {
                id,
                name: name.to_string(),
                source: None,
                sinks: BTreeSet::new(),
                is_global_input: false,
                is_global_output: false,
            },
        );
        self.net_names.insert(name.to_string(), id);
        self.emit(EventKind::NetCreated {
            net: id,
            name: name.to_string(),
        });
        Ok(id)
    }

    pub fn delete_net(&mut self, id: NetId) -> Result<(), NetlistError> {
        let net = self.nets.remove(&id).ok_or(NetlistError::UnknownNet(id))?;
        self.net_names.remove(&net.name);
        for ep in net.source.iter().chain(&net.sinks) {
            let gate = self.gates.get_mut(&ep.gate).expect("integrity");
            *gate.slot(&ep.pin, ep.direction).expect("integrity") = None;
        }
        for m in self.modules.values_mut() {
            m.nets.remove(&id);
        }
        self.emit(EventKind::NetDeleted {
            net: id,
            name: net.name,
        });
        Ok(())
    }

    pub fn set_global_input(&mut self, id: NetId, value: bool) -> Result<(), NetlistError> {
        let net = self.nets.get_mut(&id).ok_or(NetlistError::UnknownNet(id))?;
        if value && net.source.is_some() {
            return Err(NetlistError::GlobalInputDriven(id));
        }
        net.is_global_input = value;
        self.emit(EventKind::NetEndpointChanged {
            net: id,
            change: EndpointChange::GlobalInput { value },
        });
        Ok(())
    }

    pub fn set_global_output(&mut self, id: NetId, value: bool) -> Result<(), NetlistError> {
        let net = self.nets.get_mut(&id).ok_or(NetlistError::UnknownNet(id))?;
        net.is_global_output = value;
        self.emit(EventKind::NetEndpointChanged {
            net: id,
            change: EndpointChange::GlobalOutput { value },
        });
        Ok(())
    }

    pub fn connect(&mut self, id: NetId, endpoint: Endpoint) -> Result<(), NetlistError> {
        let net = self.nets.get(&id).ok_or(NetlistError::UnknownNet(id))?;
        if endpoint.direction == Direction::Out {
            if net.is_global_input {
                return Err(NetlistError::GlobalInputDriven(id));
            }
            if net.source.is_some() {
                return Err(NetlistError::NetAlreadyDriven(id));
            }
        }
        let gate = self
            .gates
            .get_mut(&endpoint.gate)
            .ok_or(NetlistError::UnknownGate(endpoint.gate))?;
        let slot = gate
            .slot(&endpoint.pin, endpoint.direction)
            .ok_or_else(|| NetlistError::UnknownPin {
                gate: endpoint.gate,
                pin: endpoint.pin.clone(),
                direction: endpoint.direction,
            })?;
        if let Some(existing) = *slot {
            return Err(NetlistError::PinAlreadyConnected {
                gate: endpoint.gate,
                pin: endpoint.pin.clone(),
                net: existing,
            });
        }
        *slot = Some(id);
        let net = self.nets.get_mut(&id).expect("checked");
        match endpoint.direction {
            Direction::Out => net.source = Some(endpoint.clone()),
            Direction::In => {
                net.sinks.insert(endpoint.clone());
            }
        }
        self.emit(EventKind::NetEndpointChanged {
            net: id,
            change: EndpointChange::Connected { endpoint },
        });
        Ok(())
    }

    pub fn disconnect(&mut self, id: NetId, endpoint: &Endpoint) -> Result<(), NetlistError> {
        let net = self.nets.get_mut(&id).ok_or(NetlistError::UnknownNet(id))?;
        let present = match endpoint.direction {
            Direction::Out => net.source.as_ref() == Some(endpoint),
            Direction::In => net.sinks.contains(endpoint),
        };
        if !present {
            return Err(NetlistError::EndpointNotFound {
                net: id,
                gate: endpoint.gate,
                pin: endpoint.pin.clone(),
            });
        }
        match endpoint.direction {
            Direction::Out => net.source = None,
            Direction::In => {
                net.sinks.remove(endpoint);
            }
        }
        let gate = self.gates.get_mut(&endpoint.gate).expect("integrity");
        *gate.slot(&endpoint.pin, endpoint.direction).expect("integrity") = None;
        self.emit(EventKind::NetEndpointChanged {
            net: id,
            change: EndpointChange::Disconnected {
                endpoint: endpoint.clone(),
            },
        });
        Ok(())
    }

    /// Net attached to a pin, whichever direction it has.
    pub fn net_of_pin(&self, gate: GateId, pin: &str) -> Option<NetId> {
        let g = self.gates.get(&gate)?;
        g.input_net(pin).or_else(|| g.output_net(pin))
    }

    /// Store `data[key] = value`. Values under the type's config key must be
    /// literals of the right width (`2^k` bits for a k-input LUT, one bit for
    /// a flip-flop init). Writing an unchanged value still records an event.
    pub fn set_gate_data(&mut self, id: GateId, key: &str, value: &str) -> Result<(), NetlistError> {
        let gate = self.gates.get_mut(&id).ok_or(NetlistError::UnknownGate(id))?;
        if gate.gate_type.config_key() == Some(key) {
            let k = gate
                .gate_type
                .config_width_exponent()
                .expect("config types have a width");
            decode_init(value, k).map_err(|source| NetlistError::InvalidConfig {
                gate: id,
                key: key.to_string(),
                source,
            })?;
        }
        let old = gate.data.insert(key.to_string(), value.to_string());
        self.emit(EventKind::GateDataChanged {
            gate: id,
            key: key.to_string(),
            old,
            new: value.to_string(),
        });
        Ok(())
    }

    fn validate_module(&self, id: Option<ModuleId>, state: &ModuleState) -> Result<(), NetlistError> {
        if let Some(g) = state.gates.iter().find(|g| !self.gates.contains_key(g)) {
            return Err(NetlistError::UnknownGate(*g));
        }
        if let Some(n) = state.nets.iter().find(|n| !self.nets.contains_key(n)) {
            return Err(NetlistError::UnknownNet(*n));
        }
        let mut cursor = state.parent;
        let mut steps = 0;
        while let Some(p) = cursor {
            if Some(p) == id {
                return Err(NetlistError::ModuleCycle);
            }
            let parent = self.modules.get(&p).ok_or(NetlistError::UnknownModule(p))?;
            cursor = parent.parent;
            steps += 1;
            if steps > self.modules.len() {
                return Err(NetlistError::ModuleCycle);
            }
        }
        Ok(())
    }

    pub fn create_submodule(&mut self, state: ModuleState) -> Result<ModuleId, NetlistError> {
        if state.name.is_empty() {
            return Err(NetlistError::EmptyName);
        }
        self.validate_module(None, &state)?;
        let id = ModuleId(self.next_module);
        self.next_module += 1;
        self.modules.insert(
            id,
            Submodule {
                id,
                name: state.name.clone(),
                gates: state.gates.clone(),
                nets: state.nets.clone(),
                color: state.color,
                parent: state.parent,
            },
        );
        self.emit(EventKind::ModuleCreated { module: id, state });
        Ok(id)
    }

    pub fn update_submodule(&mut self, id: ModuleId, update: ModuleUpdate) -> Result<(), NetlistError> {
        let old = self.modules.get(&id).ok_or(NetlistError::UnknownModule(id))?.state();
        let mut new = old.clone();
        if let Some(name) = update.name {
            if name.is_empty() {
                return Err(NetlistError::EmptyName);
            }
            new.name = name;
        }
        if let Some(gates) = update.gates {
            new.gates = gates;
        }
        if let Some(nets) = update.nets {
            new.nets = nets;
        }
        if let Some(color) = update.color {
            new.color = color;
        }
        if let Some(parent) = update.parent {
            new.parent = parent;
        }
        self.validate_module(Some(id), &new)?;
        let m = self.modules.get_mut(&id).expect("checked");
        m.name = new.name.clone();
        m.gates = new.gates.clone();
        m.nets = new.nets.clone();
        m.color = new.color;
        m.parent = new.parent;
        self.emit(EventKind::ModuleChanged { module: id, old, new });
        Ok(())
    }

    pub fn delete_submodule(&mut self, id: ModuleId) -> Result<(), NetlistError> {
        let removed = self.modules.remove(&id).ok_or(NetlistError::UnknownModule(id))?;
        for m in self.modules.values_mut() {
            if m.parent == Some(id) {
                m.parent = removed.parent;
            }
        }
        self.emit(EventKind::ModuleDeleted {
            module: id,
            old: removed.state(),
        });
        Ok(())
    }

    /// Re-execute a journal entry recorded by another netlist. Ids assigned
    /// here must match the recorded ones.
    pub fn apply_event(&mut self, event: &Event) -> Result<(), NetlistError> {
        let mismatch = |what: String| NetlistError::ReplayMismatch(what);
        match &event.kind {
            EventKind::GateCreated { gate, type_name, name } => {
                let id = self.create_gate(type_name, name)?;
                if id != *gate {
                    return Err(mismatch(format!("gate created as {id}, recorded {gate}")));
                }
            }
            EventKind::GateDeleted { gate, .. } => self.delete_gate(*gate)?,
            EventKind::GateDataChanged { gate, key, new, .. } => self.set_gate_data(*gate, key, new)?,
            EventKind::NetCreated { net, name } => {
                let id = self.create_net(name)?;
                if id != *net {
                    return Err(mismatch(format!("net created as {id}, recorded {net}")));
                }
            }
            EventKind::NetDeleted { net, .. } => self.delete_net(*net)?,
            EventKind::NetEndpointChanged { net, change } => match change {
                EndpointChange::Connected { endpoint } => self.connect(*net, endpoint.clone())?,
                EndpointChange::Disconnected { endpoint } => self.disconnect(*net, endpoint)?,
                EndpointChange::GlobalInput { value } => self.set_global_input(*net, *value)?,
                EndpointChange::GlobalOutput { value } => self.set_global_output(*net, *value)?,
            },
            EventKind::ModuleCreated { module, state } => {
                let id = self.create_submodule(state.clone())?;
                if id != *module {
                    return Err(mismatch(format!("module created as {id}, recorded {module}")));
                }
            }
            EventKind::ModuleChanged { module, new, .. } => self.update_submodule(
                *module,
                ModuleUpdate {
                    name: Some(new.name.clone()),
                    gates: Some(new.gates.clone()),
                    nets: Some(new.nets.clone()),
                    color: Some(new.color),
                    parent: Some(new.parent),
                },
            )?,
            EventKind::ModuleDeleted { module, .. } => self.delete_submodule(*module)?,
            EventKind::SnapshotLoaded { .. } => {}
        }
        Ok(())
    }

    /// Build a netlist by replaying a journal from scratch.
    pub fn replay(
        design_name: impl Into<String>,
        library: Arc<GateLibrary>,
        events: &[Event],
    ) -> Result<Netlist, NetlistError> {
        let mut nl = Netlist::new(design_name, library);
        for e in events {
            nl.apply_event(e)?;
        }
        Ok(nl)
    }

    /// Exhaustive referential-integrity audit.
    pub fn check_integrity(&self) -> Result<(), String> {
        for (id, gate) in &self.gates {
            if *id != gate.id || id.0 >= self.next_gate {
                return Err(format!("gate {id}: bad id"));
            }
            if self.gate_names.get(&gate.name) != Some(id) {
                return Err(format!("gate {id}: name index out of sync"));
            }
            for (pin, net) in gate.input_nets() {
                if let Some(net) = net {
                    let n = self
                        .nets
                        .get(&net)
                        .ok_or(format!("gate {id}.{pin}: dangling net {net}"))?;
                    if !n.sinks.contains(&Endpoint::input(*id, pin)) {
                        return Err(format!("gate {id}.{pin}: not a sink of {net}"));
                    }
                }
            }
            for (pin, net) in gate.output_nets() {
                if let Some(net) = net {
                    let n = self
                        .nets
                        .get(&net)
                        .ok_or(format!("gate {id}.{pin}: dangling net {net}"))?;
                    if n.source.as_ref() != Some(&Endpoint::output(*id, pin)) {
                        return Err(format!("gate {id}.{pin}: not the source of {net}"));
                    }
                }
            }
        }
        if self.gate_names.len() != self.gates.len() || self.net_names.len() != self.nets.len() {
            return Err("name index size mismatch".into());
        }
        for (id, net) in &self.nets {
            if *id != net.id || id.0 >= self.next_net {
                return Err(format!("net {id}: bad id"));
            }
            if self.net_names.get(&net.name) != Some(id) {
                return Err(format!("net {id}: name index out of sync"));
            }
            if net.is_global_input && net.source.is_some() {
                return Err(format!("net {id}: global input with a source"));
            }
            if let Some(src) = &net.source {
                if src.direction != Direction::Out {
                    return Err(format!("net {id}: source is not an output"));
                }
            }
            for ep in net.source.iter().chain(&net.sinks) {
                if net.sinks.contains(ep) && ep.direction != Direction::In {
                    return Err(format!("net {id}: sink is not an input"));
                }
                let gate = self
                    .gates
                    .get(&ep.gate)
                    .ok_or(format!("net {id}: endpoint on missing gate {}", ep.gate))?;
                let attached = match ep.direction {
                    Direction::In => gate.input_net(&ep.pin),
                    Direction::Out => gate.output_net(&ep.pin),
                };
                if attached != Some(*id) {
                    return Err(format!("net {id}: endpoint {}.{} disagrees with gate", ep.gate, ep.pin));
                }
            }
        }
        for (id, m) in &self.modules {
            if id.0 >= self.next_module {
                return Err(format!("module {id}: bad id"));
            }
            if let Some(g) = m.gates.iter().find(|g| !self.gates.contains_key(g)) {
                return Err(format!("module {id}: dangling gate {g}"));
            }
            if let Some(n) = m.nets.iter().find(|n| !self.nets.contains_key(n)) {
                return Err(format!("module {id}: dangling net {n}"));
            }
            let mut cursor = m.parent;
            let mut steps = 0;
            while let Some(p) = cursor {
                cursor = self
                    .modules
                    .get(&p)
                    .ok_or(format!("module {id}: dangling parent {p}"))?
                    .parent;
                steps += 1;
                if steps > self.modules.len() {
                    return Err(format!("module {id}: parent cycle"));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn counters(&self) -> (u32, u32, u32) {
        (self.next_gate, self.next_net, self.next_module)
    }

    /// Rebuild from raw parts; used by snapshot loading after validation.
    pub(crate) fn from_parts(design_name: String, library: Arc<GateLibrary>, counters: (u32, u32, u32)) -> Netlist {
        let mut nl = Netlist::new(design_name, library);
        nl.next_gate = counters.0;
        nl.next_net = counters.1;
        nl.next_module = counters.2;
        nl
    }

    pub(crate) fn insert_raw_gate(
        &mut self,
        id: GateId,
        name: String,
        gate_type: Arc<GateType>,
        data: BTreeMap<String, String>,
    ) {
        self.gate_names.insert(name.clone(), id);
        self.gates.insert(
            id,
            Gate {
                id,
                name,
                inputs: vec![None; gate_type.input_pins.len()],
                outputs: vec![None; gate_type.output_pins.len()],
                gate_type,
                data,
            },
        );
    }

    pub(crate) fn insert_raw_net(&mut self, net: Net) {
        self.net_names.insert(net.name.clone(), net.id);
        for ep in net.source.iter().chain(&net.sinks) {
            if let Some(gate) = self.gates.get_mut(&ep.gate) {
                if let Some(slot) = gate.slot(&ep.pin, ep.direction) {
                    *slot = Some(net.id);
                }
            }
        }
        self.nets.insert(net.id, net);
    }

    pub(crate) fn insert_raw_module(&mut self, module: Submodule) {
        self.modules.insert(module.id, module);
    }

    pub(crate) fn reset_journal(&mut self) {
        self.events.clear();
        self.next_seq = 1;
        let design = self.design_name.clone();
        let summary = self.summary();
        self.emit(EventKind::SnapshotLoaded { design, summary });
    }
}

#[cfg(test)]
mod tests;
