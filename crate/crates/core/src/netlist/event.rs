use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Endpoint, GateId, ModuleId, NetId, NetlistSummary};

/// One entry of the netlist's append-only change journal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    GateCreated {
        gate: GateId,
        type_name: String,
        name: String,
    },
    /// Cascades: the gate's endpoints leave their nets and the gate leaves
    /// every submodule.
    GateDeleted {
        gate: GateId,
        type_name: String,
        name: String,
    },
    GateDataChanged {
        gate: GateId,
        key: String,
        old: Option<String>,
        new: String,
    },
    NetCreated {
        net: NetId,
        name: String,
    },
    NetDeleted {
        net: NetId,
        name: String,
    },
    NetEndpointChanged {
        net: NetId,
        change: EndpointChange,
    },
    ModuleCreated {
        module: ModuleId,
        state: ModuleState,
    },
    ModuleChanged {
        module: ModuleId,
        old: ModuleState,
        new: ModuleState,
    },
    /// Children of the deleted module are re-parented to its parent.
    ModuleDeleted {
        module: ModuleId,
        old: ModuleState,
    },
    /// First entry of a journal restarted by a snapshot load; carries the
    /// loaded counts so a consumer replaying the feed stays in step.
    SnapshotLoaded {
        design: String,
        summary: NetlistSummary,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::GateCreated { .. } => "GATE_CREATED",
            EventKind::GateDeleted { .. } => "GATE_DELETED",
            EventKind::GateDataChanged { .. } => "GATE_DATA_CHANGED",
            EventKind::NetCreated { .. } => "NET_CREATED",
            EventKind::NetDeleted { .. } => "NET_DELETED",
            EventKind::NetEndpointChanged { .. } => "NET_ENDPOINT_CHANGED",
            EventKind::ModuleCreated { .. } => "MODULE_CREATED",
            EventKind::ModuleChanged { .. } => "MODULE_CHANGED",
            EventKind::ModuleDeleted { .. } => "MODULE_DELETED",
            EventKind::SnapshotLoaded { .. } => "SNAPSHOT_LOADED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EndpointChange {
    Connected { endpoint: Endpoint },
    Disconnected { endpoint: Endpoint },
    GlobalInput { value: bool },
    GlobalOutput { value: bool },
}

/// Full user-visible state of a submodule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleState {
    pub name: String,
    pub gates: BTreeSet<GateId>,
    pub nets: BTreeSet<NetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[u8; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<ModuleId>,
}
