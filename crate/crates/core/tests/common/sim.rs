use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use gatescope::netlist::{Gate, GateId, NetId, Netlist};

/// LSB-first bits of a sized literal such as `8'hE8` or `4'b0110`.
pub fn literal_bits(text: &str) -> Vec<bool> {
    let (width, rest) = text.split_once('\'').expect("sized literal");
    let width: usize = width.parse().expect("width");
    let mut chars = rest.chars();
    let radix = chars.next().unwrap().to_ascii_lowercase();
    let digits: String = chars.filter(|c| *c != '_').collect();
    let per_digit = match radix {
        'b' => 1,
        'h' => 4,
        other => panic!("radix {other}"),
    };
    let mut bits = Vec::new();
    for c in digits.chars().rev() {
        let v = c.to_digit(1 << per_digit).expect("digit");
        for k in 0..per_digit {
            bits.push(v >> k & 1 == 1);
        }
    }
    bits.resize(width, false);
    bits
}

fn eval_cell(gate: &Gate, pin: impl Fn(&str) -> bool) -> bool {
    let name = gate.type_name();
    if let Some(k) = name.strip_prefix("LUT") {
        let k: usize = k.parse().unwrap();
        let idx = (0..k).fold(0usize, |acc, j| acc | (pin(&format!("I{j}")) as usize) << j);
        return literal_bits(gate.data.get("INIT").expect("LUT INIT"))[idx];
    }
    match name {
        "GND" => false,
        "VCC" => true,
        "BUF" => pin("I"),
        "INV" => !pin("I"),
        "AND2" => pin("A") & pin("B"),
        "AND3" => pin("A") & pin("B") & pin("C"),
        "AND4" => pin("A") & pin("B") & pin("C") & pin("D"),
        "OR2" => pin("A") | pin("B"),
        "OR3" => pin("A") | pin("B") | pin("C"),
        "NAND2" => !(pin("A") & pin("B")),
        "NAND3" => !(pin("A") & pin("B") & pin("C")),
        "NOR2" => !(pin("A") | pin("B")),
        "XOR2" => pin("A") ^ pin("B"),
        "XNOR2" => !(pin("A") ^ pin("B")),
        "MUX2" => {
            if pin("S") {
                pin("I1")
            } else {
                pin("I0")
            }
        }
        other => panic!("simulator does not model {other}"),
    }
}

fn is_register(gate: &Gate) -> bool {
    matches!(gate.type_name(), "DFF" | "DFFE" | "DFFRE")
}

/// Cycle-accurate two-valued simulator over a parsed netlist.
pub struct Simulator<'a> {
    nl: &'a Netlist,
    /// Registers sorted by instance name.
    pub registers: Vec<GateId>,
    /// Non-clock primary inputs sorted by net name.
    pub inputs: Vec<NetId>,
}

impl<'a> Simulator<'a> {
    pub fn new(nl: &'a Netlist) -> Self {
        let mut registers: Vec<&Gate> = nl.gates().filter(|g| is_register(g)).collect();
        registers.sort_by(|a, b| a.name.cmp(&b.name));
        let clocks: BTreeSet<NetId> = registers.iter().filter_map(|g| g.input_net("C")).collect();
        let mut inputs: Vec<&_> = nl
            .nets()
            .filter(|n| n.is_global_input && !clocks.contains(&n.id))
            .collect();
        inputs.sort_by(|a, b| a.name.cmp(&b.name));
        Simulator {
            nl,
            registers: registers.iter().map(|g| g.id).collect(),
            inputs: inputs.iter().map(|n| n.id).collect(),
        }
    }

    pub fn register_names(&self) -> Vec<String> {
        self.registers
            .iter()
            .map(|g| self.nl.gate(*g).unwrap().name.clone())
            .collect()
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs
            .iter()
            .map(|n| self.nl.net(*n).unwrap().name.clone())
            .collect()
    }

    pub fn initial_state(&self) -> Vec<bool> {
        self.registers
            .iter()
            .map(|g| {
                self.nl
                    .gate(*g)
                    .unwrap()
                    .data
                    .get("INIT")
                    .map(|l| literal_bits(l)[0])
                    .unwrap_or(false)
            })
            .collect()
    }

    /// Value of `net` given register outputs and primary inputs.
    pub fn net_value(&self, net: NetId, state: &[bool], inputs: &[bool], memo: &mut HashMap<NetId, bool>) -> bool {
        if let Some(&v) = memo.get(&net) {
            return v;
        }
        let n = self.nl.net(net).unwrap();
        let v = if let Some(i) = self.inputs.iter().position(|x| *x == net) {
            inputs[i]
        } else {
            let src = n
                .source
                .as_ref()
                .unwrap_or_else(|| panic!("net {} is undriven", n.name));
            let gate = self.nl.gate(src.gate).unwrap();
            if is_register(gate) {
                state[self.registers.iter().position(|r| *r == gate.id).unwrap()]
            } else {
                let values: HashMap<&str, bool> = gate
                    .input_nets()
                    .map(|(p, net)| {
                        let net = net.unwrap_or_else(|| panic!("{}.{p} open", gate.name));
                        (p, self.net_value(net, state, inputs, memo))
                    })
                    .collect();
                eval_cell(gate, |p| values[p])
            }
        };
        memo.insert(net, v);
        v
    }

    /// Register values after one clock edge.
    pub fn step(&self, state: &[bool], inputs: &[bool]) -> Vec<bool> {
        let mut memo = HashMap::new();
        self.registers
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let gate = self.nl.gate(*g).unwrap();
                let mut value = |p: &str| {
                    gate.input_net(p)
                        .map(|net| self.net_value(net, state, inputs, &mut memo))
                };
                let d = value("D").expect("data pin");
                let enabled = value("CE").unwrap_or(true);
                let reset = value("R").unwrap_or(false);
                match gate.type_name() {
                    "DFF" => d,
                    "DFFE" => {
                        if enabled {
                            d
                        } else {
                            state[i]
                        }
                    }
                    "DFFRE" => !reset && if enabled { d } else { state[i] },
                    _ => unreachable!(),
                }
            })
            .collect()
    }

    /// Reachable transition relation from the init values, as
    /// `(state, inputs, next)` with registers keyed by instance name and
    /// inputs by net name.
    pub fn reachable_relation(&self) -> BTreeSet<Transition> {
        let regs = self.register_names();
        let ins = self.input_names();
        let label = |names: &[String], bits: &[bool]| -> BTreeMap<String, bool> {
            names.iter().cloned().zip(bits.iter().copied()).collect()
        };
        let start = self.initial_state();
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        let mut out = BTreeSet::new();
        while let Some(s) = queue.pop_front() {
            for a in 0..1u32 << ins.len() {
                let inputs: Vec<bool> = (0..ins.len()).map(|j| a >> j & 1 == 1).collect();
                let n = self.step(&s, &inputs);
                out.insert((label(&regs, &s), label(&ins, &inputs), label(&regs, &n)));
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
        out
    }
}

pub type Transition = (BTreeMap<String, bool>, BTreeMap<String, bool>, BTreeMap<String, bool>);

/// The same relation read off an extracted state graph.
pub fn graph_relation(nl: &Netlist, graph: &gatescope::fsm::StateGraph) -> BTreeSet<Transition> {
    let regs: Vec<String> = graph
        .candidate
        .state_ffs
        .iter()
        .map(|g| nl.gate(*g).unwrap().name.clone())
        .collect();
    let unpack = |code: u64| -> BTreeMap<String, bool> {
        regs.iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), code >> i & 1 == 1))
            .collect()
    };
    graph
        .transitions()
        .map(|(s, a, n)| {
            let inputs = graph
                .input_vars
                .iter()
                .enumerate()
                .map(|(j, v)| (v.clone(), a >> j & 1 == 1))
                .collect();
            (unpack(s), inputs, unpack(n))
        })
        .collect()
}
