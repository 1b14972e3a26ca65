use std::collections::BTreeSet;

use gatescope::netlist::{Endpoint, ModuleState, ModuleUpdate, Netlist};

/// One encoded mutation: an opcode and three selectors. Selectors index
/// into whatever currently exists, so any tuple is meaningful.
pub type Op = (u8, u32, u32, u32);

fn pick<T: Copy>(items: &[T], sel: u32) -> Option<T> {
    if items.is_empty() {
        None
    } else {
        Some(items[sel as usize % items.len()])
    }
}

/// Apply one mutation. Returns whether the netlist accepted it; a refused
/// mutation must leave no journal entry.
pub fn apply(nl: &mut Netlist, op: Op, counter: &mut u32) -> bool {
    let (code, a, b, c) = op;
    let gates: Vec<_> = nl.gates().map(|g| g.id).collect();
    let nets: Vec<_> = nl.nets().map(|n| n.id).collect();
    let modules: Vec<_> = nl.submodules().map(|m| m.id).collect();
    let types: Vec<String> = nl.library().types().map(|t| t.name.clone()).collect();
    let before = nl.events().len();
    *counter += 1;
    let result: Result<(), String> = match code % 12 {
        0 | 1 => {
            let t = &types[a as usize % types.len()];
            nl.create_gate(t, &format!("g{counter}"))
                .map(|_| ())
                .map_err(|e| e.to_string())
        }
        2 | 3 => nl
            .create_net(&format!("n{counter}"))
            .map(|_| ())
            .map_err(|e| e.to_string()),
        4 | 5 => match (pick(&nets, a), pick(&gates, b)) {
            (Some(n), Some(g)) => {
                let gate = nl.gate(g).unwrap();
                let (pins, out) = if c % 3 == 0 {
                    (&gate.gate_type.output_pins, true)
                } else {
                    (&gate.gate_type.input_pins, false)
                };
                match pick(&(0..pins.len()).collect::<Vec<_>>(), c / 3) {
                    Some(i) => {
                        let pin = pins[i].clone();
                        let ep = if out {
                            Endpoint::output(g, pin)
                        } else {
                            Endpoint::input(g, pin)
                        };
                        nl.connect(n, ep).map_err(|e| e.to_string())
                    }
                    None => Err("no pins".into()),
                }
            }
            _ => Err("empty".into()),
        },
        6 => match pick(&nets, a) {
            Some(n) => {
                let net = nl.net(n).unwrap();
                let eps: Vec<Endpoint> = net.source.iter().chain(&net.sinks).cloned().collect();
                match eps.get(b as usize % eps.len().max(1)) {
                    Some(ep) => nl.disconnect(n, &ep.clone()).map_err(|e| e.to_string()),
                    None => Err("unconnected".into()),
                }
            }
            None => Err("empty".into()),
        },
        7 => match pick(&gates, a) {
            Some(g) if b % 4 == 0 => nl.delete_gate(g).map_err(|e| e.to_string()),
            Some(g) => {
                let gate = nl.gate(g).unwrap();
                match gate.gate_type.config_key().map(str::to_string) {
                    Some(key) => {
                        let width = 1usize << gate.gate_type.config_width_exponent().unwrap();
                        // Occasionally the wrong width, which must be refused.
                        let width = if c % 5 == 0 { width + 1 } else { width };
                        let digits: String = (0..width)
                            .map(|i| if (c >> (i % 32)) & 1 == 1 { '1' } else { '0' })
                            .collect();
                        nl.set_gate_data(g, &key, &format!("{width}'b{digits}"))
                            .map_err(|e| e.to_string())
                    }
                    None => nl.set_gate_data(g, "note", &c.to_string()).map_err(|e| e.to_string()),
                }
            }
            None => Err("empty".into()),
        },
        8 => match pick(&nets, a) {
            Some(n) if b % 3 == 0 => nl.delete_net(n).map_err(|e| e.to_string()),
            Some(n) if b % 3 == 1 => nl.set_global_input(n, c % 2 == 0).map_err(|e| e.to_string()),
            Some(n) => nl.set_global_output(n, c % 2 == 0).map_err(|e| e.to_string()),
            None => Err("empty".into()),
        },
        9 => {
            let members: BTreeSet<_> = gates.iter().copied().filter(|g| (g.0 ^ b) % 3 == 0).collect();
            let net_members: BTreeSet<_> = nets.iter().copied().filter(|n| (n.0 ^ c) % 4 == 0).collect();
            nl.create_submodule(ModuleState {
                name: format!("m{counter}"),
                gates: members,
                nets: net_members,
                color: (a % 2 == 0).then_some([a as u8, b as u8, c as u8]),
                parent: if a % 3 == 0 { None } else { pick(&modules, a) },
            })
            .map(|_| ())
            .map_err(|e| e.to_string())
        }
        10 => match pick(&modules, a) {
            Some(m) => nl
                .update_submodule(
                    m,
                    ModuleUpdate {
                        name: (b % 2 == 0).then(|| format!("r{counter}")),
                        gates: (c % 2 == 0).then(|| gates.iter().copied().filter(|g| g.0 % 2 == b % 2).collect()),
                        parent: (c % 3 == 0).then(|| pick(&modules, b)),
                        ..Default::default()
                    },
                )
                .map_err(|e| e.to_string()),
            None => Err("empty".into()),
        },
        _ => match pick(&modules, a) {
            Some(m) => nl.delete_submodule(m).map_err(|e| e.to_string()),
            None => Err("empty".into()),
        },
    };
    let grew = nl.events().len() - before;
    match result {
        Ok(()) => assert_eq!(grew, 1, "accepted mutation must record exactly one event"),
        Err(_) => assert_eq!(grew, 0, "refused mutation must not record events"),
    }
    result.is_ok()
}
