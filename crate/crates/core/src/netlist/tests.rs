use std::sync::Arc;

use super::*;
use crate::library::GateLibrary;

fn lib() -> Arc<GateLibrary> {
    Arc::new(GateLibrary::builtin())
}

/// a -> u1 (INV) -> w -> u2 (BUF) -> y
fn inverter_pair() -> (Netlist, GateId, GateId, NetId) {
    let mut nl = Netlist::new("pair", lib());
    let a = nl.create_net("a").unwrap();
    let w = nl.create_net("w").unwrap();
    let y = nl.create_net("y").unwrap();
    nl.set_global_input(a, true).unwrap();
    nl.set_global_output(y, true).unwrap();
    let u1 = nl.create_gate("INV", "u1").unwrap();
    let u2 = nl.create_gate("BUF", "u2").unwrap();
    nl.connect(a, Endpoint::input(u1, "I")).unwrap();
    nl.connect(w, Endpoint::output(u1, "O")).unwrap();
    nl.connect(w, Endpoint::input(u2, "I")).unwrap();
    nl.connect(y, Endpoint::output(u2, "O")).unwrap();
    (nl, u1, u2, w)
}

#[test]
fn create_and_connect() {
    let (nl, u1, u2, w) = inverter_pair();
    assert_eq!(
        nl.summary(),
        NetlistSummary {
            gates: 2,
            nets: 3,
            modules: 0
        }
    );
    let net = nl.net(w).unwrap();
    assert_eq!(net.source, Some(Endpoint::output(u1, "O")));
    assert_eq!(net.sinks, BTreeSet::from([Endpoint::input(u2, "I")]));
    assert_eq!(nl.gate(u2).unwrap().input_net("I"), Some(w));
    assert_eq!(nl.driver(w).unwrap().id, u1);
    assert_eq!(nl.events().len(), 11);
    nl.check_integrity().unwrap();
}

#[test]
fn ids_are_never_reused() {
    let mut nl = Netlist::new("ids", lib());
    let g1 = nl.create_gate("INV", "a").unwrap();
    nl.delete_gate(g1).unwrap();
    let g2 = nl.create_gate("INV", "a").unwrap();
    assert_ne!(g1, g2);
    assert!(nl.gate(g1).is_none());
}

#[test]
fn deleting_a_gate_detaches_its_pins() {
    let (mut nl, u1, u2, w) = inverter_pair();
    nl.delete_gate(u1).unwrap();
    let net = nl.net(w).unwrap();
    assert!(net.source.is_none());
    assert_eq!(net.sinks.len(), 1);
    assert!(nl.net(nl.net_by_name("a").unwrap()).unwrap().sinks.is_empty());
    nl.delete_net(w).unwrap();
    assert_eq!(nl.gate(u2).unwrap().input_net("I"), None);
    nl.check_integrity().unwrap();
}

#[test]
fn rejected_mutations_leave_no_trace() {
    let (mut nl, u1, u2, w) = inverter_pair();
    let before = nl.events().len();
    assert!(matches!(
        nl.create_gate("NOPE", "x"),
        Err(NetlistError::UnknownGateType(_))
    ));
    assert!(matches!(
        nl.create_gate("INV", "u1"),
        Err(NetlistError::DuplicateGateName(_))
    ));
    assert!(matches!(nl.create_net("w"), Err(NetlistError::DuplicateNetName(_))));
    assert!(matches!(
        nl.connect(w, Endpoint::output(u2, "O")),
        Err(NetlistError::NetAlreadyDriven(_))
    ));
    assert!(matches!(
        nl.connect(w, Endpoint::input(u1, "Z")),
        Err(NetlistError::UnknownPin { .. })
    ));
    assert!(matches!(
        nl.connect(w, Endpoint::input(u1, "I")),
        Err(NetlistError::PinAlreadyConnected { .. })
    ));
    assert!(matches!(
        nl.disconnect(w, &Endpoint::input(u1, "I")),
        Err(NetlistError::EndpointNotFound { .. })
    ));
    assert!(matches!(
        nl.set_global_input(w, true),
        Err(NetlistError::GlobalInputDriven(_))
    ));
    assert_eq!(nl.events().len(), before);
    nl.check_integrity().unwrap();
}

#[test]
fn disconnect_then_reconnect() {
    let (mut nl, _, u2, w) = inverter_pair();
    nl.disconnect(w, &Endpoint::input(u2, "I")).unwrap();
    assert!(nl.net(w).unwrap().sinks.is_empty());
    assert_eq!(nl.gate(u2).unwrap().input_net("I"), None);
    nl.connect(w, Endpoint::input(u2, "I")).unwrap();
    nl.check_integrity().unwrap();
}

#[test]
fn gate_data_is_validated_for_the_config_key() {
    let mut nl = Netlist::new("lut", lib());
    let l = nl.create_gate("LUT2", "l").unwrap();
    nl.set_gate_data(l, "INIT", "4'h6").unwrap();
    assert_eq!(nl.gate(l).unwrap().config(), Some("4'h6"));
    assert!(matches!(
        nl.set_gate_data(l, "INIT", "8'h06"),
        Err(NetlistError::InvalidConfig { .. })
    ));
    // Free-form keys are stored as given.
    nl.set_gate_data(l, "note", "anything").unwrap();
    match &nl.events().last().unwrap().kind {
        EventKind::GateDataChanged { old, new, .. } => {
            assert_eq!(old, &None);
            assert_eq!(new, "anything");
        }
        other => panic!("unexpected event {other:?}"),
    }
}

#[test]
fn submodules_nest_and_reparent() {
    let (mut nl, u1, u2, w) = inverter_pair();
    let outer = nl
        .create_submodule(ModuleState {
            name: "outer".into(),
            gates: BTreeSet::from([u1, u2]),
            nets: BTreeSet::from([w]),
            color: Some([255, 0, 0]),
            parent: None,
        })
        .unwrap();
    let inner = nl
        .create_submodule(ModuleState {
            name: "inner".into(),
            gates: BTreeSet::from([u1]),
            nets: BTreeSet::new(),
            color: None,
            parent: Some(outer),
        })
        .unwrap();
    assert_eq!(
        nl.update_submodule(
            outer,
            ModuleUpdate {
                parent: Some(Some(inner)),
                ..Default::default()
            }
        ),
        Err(NetlistError::ModuleCycle)
    );
    nl.update_submodule(
        inner,
        ModuleUpdate {
            name: Some("core".into()),
            color: Some(Some([0, 0, 255])),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(nl.submodule(inner).unwrap().name, "core");

    nl.delete_gate(u1).unwrap();
    assert!(!nl.submodule(inner).unwrap().gates.contains(&u1));
    nl.delete_submodule(outer).unwrap();
    assert_eq!(nl.submodule(inner).unwrap().parent, None);
    nl.check_integrity().unwrap();
}

#[test]
fn internal_nets_are_those_fully_inside() {
    let (mut nl, u1, u2, w) = inverter_pair();
    let m = nl
        .create_submodule(ModuleState {
            name: "m".into(),
            gates: BTreeSet::from([u1, u2]),
            nets: BTreeSet::new(),
            color: None,
            parent: None,
        })
        .unwrap();
    assert_eq!(nl.internal_nets(m).unwrap(), BTreeSet::from([w]));
}

#[test]
fn replay_reproduces_the_netlist() {
    let (mut nl, u1, _, _) = inverter_pair();
    nl.set_gate_data(u1, "note", "x").unwrap();
    nl.create_submodule(ModuleState {
        name: "m".into(),
        gates: BTreeSet::from([u1]),
        nets: BTreeSet::new(),
        color: None,
        parent: None,
    })
    .unwrap();
    nl.delete_gate(u1).unwrap();
    let copy = Netlist::replay("pair", lib(), nl.events()).unwrap();
    assert!(copy.structurally_equal(&nl));
    assert_eq!(copy.events().len(), nl.events().len());
}

#[test]
fn events_after_a_sequence_number() {
    let (nl, ..) = inverter_pair();
    let last = nl.last_seq();
    assert_eq!(nl.events_after(last).len(), 0);
    assert_eq!(nl.events_after(last - 2).len(), 2);
    assert_eq!(nl.events_after(0).len(), nl.events().len());
}

#[test]
fn event_json_shape() {
    let (nl, ..) = inverter_pair();
    let json = serde_json::to_value(&nl.events()[0]).unwrap();
    assert_eq!(json["kind"], "NET_CREATED");
    assert_eq!(json["seq"], 1);
    assert_eq!(json["name"], "a");
}

#[test]
fn snapshot_round_trip() {
    let (mut nl, u1, ..) = inverter_pair();
    nl.set_gate_data(u1, "note", "kept").unwrap();
    let mut buf = Vec::new();
    save_snapshot(&nl, &mut buf).unwrap();
    let back = load_snapshot(buf.as_slice(), lib()).unwrap();
    assert!(back.structurally_equal(&nl));
    // Ids keep counting from where the original left off.
    let mut back = back;
    let g = back.create_gate("INV", "fresh").unwrap();
    assert!(g.0 > u1.0 + 1);
}

#[test]
fn snapshot_rejects_future_versions() {
    let (nl, ..) = inverter_pair();
    let mut doc = serde_json::to_value(nl.to_snapshot()).unwrap();
    doc["version"] = 99.into();
    let text = serde_json::to_vec(&doc).unwrap();
    assert!(matches!(
        load_snapshot(text.as_slice(), lib()),
        Err(SnapshotError::Version { .. })
    ));
}
