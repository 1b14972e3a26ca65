//! Versioned JSON snapshots of a netlist.
//!
//! A snapshot captures ids, names, connections, gate data, submodules and
//! the id counters, so a restored netlist continues handing out the same
//! fresh ids. The event journal is not persisted; a restored netlist starts
//! a new journal with a `SNAPSHOT_LOADED` marker.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Direction, Endpoint, GateId, ModuleId, Net, NetId, Netlist, Submodule};
use crate::library::GateLibrary;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotDocument {
    pub version: u32,
    pub design: String,
    pub library: String,
    pub next_ids: NextIds,
    pub gates: Vec<SnapshotGate>,
    pub nets: Vec<SnapshotNet>,
    pub submodules: Vec<SnapshotSubmodule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NextIds {
    pub gate: u32,
    pub net: u32,
    pub module: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotGate {
    pub id: GateId,
    pub name: String,
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotPin {
    pub gate: GateId,
    pub pin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotNet {
    pub id: NetId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SnapshotPin>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sinks: Vec<SnapshotPin>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub global_input: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub global_output: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotSubmodule {
    pub id: ModuleId,
    pub name: String,
    pub gates: Vec<GateId>,
    pub nets: Vec<NetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[u8; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<ModuleId>,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed snapshot: {0}")]
    Format(#[from] serde_json::Error),
    #[error("snapshot version {found} is not supported (expected {SNAPSHOT_VERSION})")]
    Version { found: u32 },
    #[error("snapshot was taken with library `{found}`, loaded library is `{expected}`")]
    LibraryMismatch { found: String, expected: String },
    #[error("snapshot is inconsistent: {0}")]
    Broken(String),
}

impl Netlist {
    /// Deterministic document describing the netlist structure. Two
    /// netlists are structurally identical iff their documents are equal.
    pub fn to_snapshot(&self) -> SnapshotDocument {
        let (gate, net, module) = self.counters();
        SnapshotDocument {
            version: SNAPSHOT_VERSION,
            design: self.design_name.clone(),
            library: self.library().name.clone(),
            next_ids: NextIds { gate, net, module },
            gates: self
                .gates()
                .map(|g| SnapshotGate {
                    id: g.id,
                    name: g.name.clone(),
                    type_name: g.type_name().to_string(),
                    data: g.data.clone(),
                })
                .collect(),
            nets: self
                .nets()
                .map(|n| SnapshotNet {
                    id: n.id,
                    name: n.name.clone(),
                    source: n.source.as_ref().map(|e| SnapshotPin {
                        gate: e.gate,
                        pin: e.pin.clone(),
                    }),
                    sinks: n
                        .sinks
                        .iter()
                        .map(|e| SnapshotPin {
                            gate: e.gate,
                            pin: e.pin.clone(),
                        })
                        .collect(),
                    global_input: n.is_global_input,
                    global_output: n.is_global_output,
                })
                .collect(),
            submodules: self
                .submodules()
                .map(|m| SnapshotSubmodule {
                    id: m.id,
                    name: m.name.clone(),
                    gates: m.gates.iter().copied().collect(),
                    nets: m.nets.iter().copied().collect(),
                    color: m.color,
                    parent: m.parent,
                })
                .collect(),
        }
    }

    pub fn structurally_equal(&self, other: &Netlist) -> bool {
        self.to_snapshot() == other.to_snapshot()
    }

    pub fn from_snapshot(doc: SnapshotDocument, library: Arc<GateLibrary>) -> Result<Netlist, SnapshotError> {
        if doc.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version { found: doc.version });
        }
        if doc.library != library.name {
            return Err(SnapshotError::LibraryMismatch {
                found: doc.library,
                expected: library.name.clone(),
            });
        }
        let broken = |msg: String| SnapshotError::Broken(msg);
        let ids = &doc.next_ids;
        let mut nl = Netlist::from_parts(doc.design.clone(), library.clone(), (ids.gate, ids.net, ids.module));

        let mut names = HashSet::new();
        for g in &doc.gates {
            if g.id.0 == 0 || g.id.0 >= ids.gate || nl.gate(g.id).is_some() {
                return Err(broken(format!("bad gate id {}", g.id)));
            }
            if g.name.is_empty() || !names.insert(g.name.as_str()) {
                return Err(broken(format!("bad or duplicate gate name `{}`", g.name)));
            }
            let gate_type = library
                .gate_type(&g.type_name)
                .ok_or_else(|| broken(format!("gate type `{}` not in library", g.type_name)))?;
            nl.insert_raw_gate(g.id, g.name.clone(), gate_type.clone(), g.data.clone());
        }

        let mut used_pins = HashSet::new();
        let mut net_names = HashSet::new();
        for n in &doc.nets {
            if n.id.0 == 0 || n.id.0 >= ids.net || nl.net(n.id).is_some() {
                return Err(broken(format!("bad net id {}", n.id)));
            }
            if n.name.is_empty() || !net_names.insert(n.name.as_str()) {
                return Err(broken(format!("bad or duplicate net name `{}`", n.name)));
            }
            let mut check = |p: &SnapshotPin, dir: Direction| -> Result<Endpoint, SnapshotError> {
                let gate = nl
                    .gate(p.gate)
                    .ok_or_else(|| broken(format!("net {} references missing gate {}", n.id, p.gate)))?;
                let ok = match dir {
                    Direction::In => gate.gate_type.has_input(&p.pin),
                    Direction::Out => gate.gate_type.has_output(&p.pin),
                };
                if !ok {
                    return Err(broken(format!(
                        "net {} references unknown pin {}.{}",
                        n.id, p.gate, p.pin
                    )));
                }
                if !used_pins.insert((p.gate, p.pin.clone())) {
                    return Err(broken(format!("pin {}.{} is in two nets", p.gate, p.pin)));
                }
                Ok(Endpoint {
                    gate: p.gate,
                    pin: p.pin.clone(),
                    direction: dir,
                })
            };
            let source = n.source.as_ref().map(|p| check(p, Direction::Out)).transpose()?;
            let sinks = n
                .sinks
                .iter()
                .map(|p| check(p, Direction::In))
                .collect::<Result<BTreeSet<_>, _>>()?;
            if n.global_input && source.is_some() {
                return Err(broken(format!("net {} is a driven global input", n.id)));
            }
            nl.insert_raw_net(Net {
                id: n.id,
                name: n.name.clone(),
                source,
                sinks,
                is_global_input: n.global_input,
                is_global_output: n.global_output,
            });
        }

        for m in &doc.submodules {
            if m.id.0 == 0 || m.id.0 >= ids.module || nl.submodule(m.id).is_some() {
                return Err(broken(format!("bad submodule id {}", m.id)));
            }
            nl.insert_raw_module(Submodule {
                id: m.id,
                name: m.name.clone(),
                gates: m.gates.iter().copied().collect(),
                nets: m.nets.iter().copied().collect(),
                color: m.color,
                parent: m.parent,
            });
        }
        nl.check_integrity().map_err(broken)?;
        nl.reset_journal();
        Ok(nl)
    }
}

pub fn save_snapshot<W: Write>(netlist: &Netlist, mut destination: W) -> Result<(), SnapshotError> {
    serde_json::to_writer_pretty(&mut destination, &netlist.to_snapshot())?;
    destination.write_all(b"\n")?;
    Ok(())
}

pub fn load_snapshot<R: Read>(source: R, library: Arc<GateLibrary>) -> Result<Netlist, SnapshotError> {
    // Check the version before the full schema so newer files get a clear error.
    let value: serde_json::Value = serde_json::from_reader(source)?;
    if let Some(v) = value.get("version").and_then(|v| v.as_u64()) {
        if v != SNAPSHOT_VERSION as u64 {
            return Err(SnapshotError::Version { found: v as u32 });
        }
    }
    let doc: SnapshotDocument = serde_json::from_value(value)?;
    Netlist::from_snapshot(doc, library)
}
