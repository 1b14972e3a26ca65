use std::fmt::Write as _;
use std::io::{self, Write};

use crate::netlist::{NetId, Netlist};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteOptions {
    /// Emit gates with unconnected pins instead of failing.
    pub allow_dangling: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum WriteError {
    #[error("pin `{gate}.{pin}` is unconnected")]
    DanglingPin { gate: String, pin: String },
    #[error("write failed: {0}")]
    Io(#[from] io::Error),
}

const KEYWORDS: &[&str] = &[
    "always",
    "and",
    "assign",
    "begin",
    "buf",
    "case",
    "default",
    "else",
    "end",
    "endcase",
    "endfunction",
    "endmodule",
    "endtask",
    "for",
    "function",
    "if",
    "initial",
    "inout",
    "input",
    "integer",
    "module",
    "nand",
    "nor",
    "not",
    "or",
    "output",
    "parameter",
    "reg",
    "supply0",
    "supply1",
    "task",
    "tri",
    "wire",
    "xnor",
    "xor",
];

/// Identifier as it must appear in Verilog source: plain when legal,
/// backslash-escaped otherwise.
pub fn verilog_identifier(name: &str) -> String {
    let mut chars = name.chars();
    let simple = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !KEYWORDS.contains(&name);
    if simple {
        name.to_string()
    } else {
        // Escaped identifiers end at whitespace, which therefore cannot be
        // represented and is replaced.
        let body: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
        format!("\\{body} ")
    }
}

/// Render a netlist as a single flat structural Verilog module.
pub fn write_verilog_string(netlist: &Netlist, options: WriteOptions) -> Result<String, WriteError> {
    let mut out = String::new();
    let net_name = |id: NetId| verilog_identifier(&netlist.net(id).expect("integrity").name);

    let inputs: Vec<NetId> = netlist.global_inputs().map(|n| n.id).collect();
    let outputs: Vec<NetId> = netlist
        .global_outputs()
        .filter(|n| !n.is_global_input)
        .map(|n| n.id)
        .collect();
    let module_name = if netlist.design_name.is_empty() {
        "top".to_string()
    } else {
        verilog_identifier(&netlist.design_name)
    };

    let ports: Vec<String> = inputs.iter().chain(&outputs).map(|&n| net_name(n)).collect();
    if ports.is_empty() {
        writeln!(out, "module {module_name};").unwrap();
    } else {
        writeln!(out, "module {module_name} ({});", ports.join(", ")).unwrap();
    }
    for &n in &inputs {
        writeln!(out, "  input {};", net_name(n)).unwrap();
    }
    for &n in &outputs {
        writeln!(out, "  output {};", net_name(n)).unwrap();
    }
    for net in netlist.nets() {
        if !net.is_global_input && !net.is_global_output {
            writeln!(out, "  wire {};", verilog_identifier(&net.name)).unwrap();
        }
    }
    for gate in netlist.gates() {
        let mut conns = Vec::new();
        for (pin, net) in gate.input_nets().chain(gate.output_nets()) {
            match net {
                Some(n) => conns.push(format!(".{pin}({})", net_name(n))),
                None if options.allow_dangling => {}
                None => {
                    return Err(WriteError::DanglingPin {
                        gate: gate.name.clone(),
                        pin: pin.to_string(),
                    })
                }
            }
        }
        let params = match (gate.gate_type.config_key(), gate.config()) {
            (Some(key), Some(value)) => format!(" #(.{key}({value}))"),
            _ => String::new(),
        };
        writeln!(
            out,
            "  {}{params} {} ({});",
            verilog_identifier(gate.type_name()),
            verilog_identifier(&gate.name),
            conns.join(", ")
        )
        .unwrap();
    }
    out.push_str("endmodule\n");
    Ok(out)
}

pub fn write_verilog<W: Write>(netlist: &Netlist, mut destination: W, options: WriteOptions) -> Result<(), WriteError> {
    let text = write_verilog_string(netlist, options)?;
    destination.write_all(text.as_bytes())?;
    destination.flush()?;
    Ok(())
}
