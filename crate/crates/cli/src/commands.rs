use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use gatescope::boolean::ConeOptions;
use gatescope::fsm::{
    brute_force_state_graph, candidate_report_json, export_dot, extract_transition_functions, find_fsm_candidates,
    CandidateReport, EnumerationLimits, FsmCandidate,
};
use gatescope::graph::scc_report_json;
use gatescope::harpoon::{analyze_harpoon, apply_harpoon_patch};
use gatescope::hdl::{parse_verilog, write_verilog_string, WriteOptions};
use gatescope::library::{load_gate_library, GateLibrary};
use gatescope::netlist::{load_snapshot, save_snapshot, GateId, Netlist};
use gatescope::watermark::{extract_watermark, remove_watermark, scan_watermarks, WatermarkFinding};
use gatescope_server::ServerConfig;
use serde_json::json;

use crate::args::{
    Cli, Command, FsmCommand, Global, HarpoonCommand, InputFormat, Limits, SnapshotCommand, VerilogOut,
    WatermarkCommand,
};
use crate::Failure;

type Outcome = Result<(), Failure>;

fn input_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(anyhow!(msg.into()))
}

fn negative(msg: impl Into<String>) -> Failure {
    Failure::Negative(anyhow!(msg.into()))
}

fn library(global: &Global) -> Result<Arc<GateLibrary>, Failure> {
    match &global.library {
        None => Ok(Arc::new(GateLibrary::builtin())),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading library {}", path.display()))
                .map_err(input_err)?;
            let lib = load_gate_library(&text)
                .with_context(|| format!("library {}", path.display()))
                .map_err(input_err)?;
            Ok(Arc::new(lib))
        }
    }
}

fn load(global: &Global) -> Result<Netlist, Failure> {
    let path = global
        .input
        .as_deref()
        .ok_or_else(|| usage("an input design is required (-i PATH)"))?;
    let lib = library(global)?;
    let snapshot = match global.format {
        InputFormat::Snapshot => true,
        InputFormat::Verilog => false,
        InputFormat::Auto => path.extension().is_some_and(|e| e == "json"),
    };
    let ctx = || format!("loading {}", path.display());
    if snapshot {
        let file = File::open(path).with_context(ctx).map_err(input_err)?;
        load_snapshot(BufReader::new(file), lib)
            .with_context(ctx)
            .map_err(input_err)
    } else {
        let text = std::fs::read_to_string(path).with_context(ctx).map_err(input_err)?;
        parse_verilog(&text, lib).with_context(ctx).map_err(input_err)
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("values serialize"));
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    std::fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(input_err)
}

fn save(nl: &Netlist, path: &Path) -> Outcome {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).with_context(ctx).map_err(input_err)?;
    let mut w = BufWriter::new(file);
    save_snapshot(nl, &mut w).with_context(ctx).map_err(input_err)?;
    w.flush().with_context(ctx).map_err(input_err)?;
    log::info!(target: "cli", "snapshot written to {}", path.display());
    Ok(())
}

fn emit_verilog(nl: &Netlist, out: &VerilogOut) -> Outcome {
    let opts = WriteOptions {
        allow_dangling: out.allow_dangling,
    };
    let text = write_verilog_string(nl, opts).map_err(|e| Failure::Negative(e.into()))?;
    match &out.output {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn limits(l: &Limits) -> EnumerationLimits {
    EnumerationLimits {
        max_inputs: l.max_inputs,
        max_states: l.max_states,
    }
}

fn candidate(report: &CandidateReport, index: usize) -> Result<&FsmCandidate, Failure> {
    if report.candidates.is_empty() {
        return Err(negative("no FSM candidate found"));
    }
    report.candidates.get(index).ok_or_else(|| {
        usage(format!(
            "candidate {index} out of range (0..{})",
            report.candidates.len()
        ))
    })
}

fn gate_by_name(nl: &Netlist, name: &str) -> Result<GateId, Failure> {
    nl.gate_by_name(name)
        .ok_or_else(|| usage(format!("no gate named `{name}`")))
}

pub fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Parse { save: path } => {
            let nl = load(g)?;
            if let Some(path) = path {
                save(&nl, path)?;
            }
            let s = nl.summary();
            if g.json {
                print_json(&json!({ "design": nl.design_name, "summary": s }));
            } else {
                println!(
                    "{}: {} gates, {} nets, {} modules",
                    nl.design_name, s.gates, s.nets, s.modules
                );
            }
            Ok(())
        }
        Command::Stats => stats(&load(g)?, g.json),
        Command::Scc { include_trivial } => {
            let nl = load(g)?;
            let report = scc_report_json(&nl, *include_trivial);
            if g.json {
                print_json(&report);
            } else {
                println!("{} SCCs", report["count"]);
                for scc in report["sccs"].as_array().expect("list") {
                    let names: Vec<&str> = scc["names"]
                        .as_array()
                        .expect("list")
                        .iter()
                        .filter_map(|n| n.as_str())
                        .collect();
                    let shown = names.iter().take(8).copied().collect::<Vec<_>>().join(", ");
                    let more = if names.len() > 8 { ", ..." } else { "" };
                    println!(
                        "  size {:>6}  sequential {:>4}  {shown}{more}",
                        scc["size"], scc["sequential"]
                    );
                }
            }
            Ok(())
        }
        Command::Fsm(cmd) => fsm(&load(g)?, cmd, g.json),
        Command::Harpoon(cmd) => harpoon(load(g)?, cmd, g.json),
        Command::Watermark(cmd) => watermark(load(g)?, cmd, g.json),
        Command::WriteVerilog { out } => emit_verilog(&load(g)?, out),
        Command::Snapshot(SnapshotCommand::Save { output }) => save(&load(g)?, output),
        Command::Snapshot(SnapshotCommand::Load) => {
            if g.format == InputFormat::Verilog {
                return Err(usage("snapshot load reads a snapshot"));
            }
            let nl = load(&Global {
                format: InputFormat::Snapshot,
                ..g.clone()
            })?;
            let s = nl.summary();
            if g.json {
                print_json(&json!({ "design": nl.design_name, "summary": s }));
            } else {
                println!(
                    "{}: {} gates, {} nets, {} modules",
                    nl.design_name, s.gates, s.nets, s.modules
                );
            }
            Ok(())
        }
        Command::Serve { bind, static_dir } => {
            let nl = load(g)?;
            let config = ServerConfig {
                addr: *bind,
                static_dir: static_dir.clone(),
            };
            let rt = tokio::runtime::Runtime::new().map_err(input_err)?;
            rt.block_on(gatescope_server::serve(config, nl)).map_err(input_err)
        }
    }
}

fn stats(nl: &Netlist, as_json: bool) -> Outcome {
    let mut by_type: BTreeMap<&str, usize> = BTreeMap::new();
    let mut by_category: BTreeMap<String, usize> = BTreeMap::new();
    for gate in nl.gates() {
        *by_type.entry(gate.type_name()).or_default() += 1;
        let cat = serde_json::to_value(gate.category()).expect("category serializes");
        *by_category
            .entry(cat.as_str().unwrap_or_default().to_string())
            .or_default() += 1;
    }
    let s = nl.summary();
    let inputs = nl.global_inputs().count();
    let outputs = nl.global_outputs().count();
    if as_json {
        print_json(&json!({
            "design": nl.design_name,
            "gates": s.gates,
            "nets": s.nets,
            "modules": s.modules,
            "global_inputs": inputs,
            "global_outputs": outputs,
            "by_type": by_type,
            "by_category": by_category,
        }));
    } else {
        println!("design   {}", nl.design_name);
        println!("gates    {}", s.gates);
        println!("nets     {}", s.nets);
        println!("modules  {}", s.modules);
        println!("inputs   {inputs}");
        println!("outputs  {outputs}");
        for (t, n) in &by_type {
            println!("  {t:<10} {n}");
        }
    }
    Ok(())
}

fn fsm(nl: &Netlist, cmd: &FsmCommand, as_json: bool) -> Outcome {
    let report = find_fsm_candidates(nl);
    match cmd {
        FsmCommand::List => {
            if as_json {
                print_json(&candidate_report_json(nl, &report));
                return Ok(());
            }
            let name = |g: &GateId| nl.gate(*g).map_or(String::new(), |g| g.name.clone());
            println!(
                "{} candidates, {} rejected",
                report.candidates.len(),
                report.rejected.len()
            );
            for (i, c) in report.candidates.iter().enumerate() {
                let inputs: Vec<String> = c
                    .external_input_nets
                    .iter()
                    .filter_map(|n| nl.net(*n).map(|n| n.name.clone()))
                    .collect();
                println!(
                    "  #{i}  {} state registers [{}]  {} inputs [{}]  {} gates",
                    c.state_ffs.len(),
                    c.state_ffs.iter().map(name).collect::<Vec<_>>().join(", "),
                    inputs.len(),
                    inputs.join(", "),
                    c.scc_gates.len()
                );
            }
            for r in &report.rejected {
                println!("  rejected ({} gates): {}", r.scc_gates.len(), r.reason);
            }
            Ok(())
        }
        FsmCommand::Extract {
            candidate: index,
            dot,
            functions,
            limits: l,
        } => {
            let cand = candidate(&report, *index)?;
            let graph = brute_force_state_graph(nl, cand, &limits(l)).map_err(|e| Failure::Negative(e.into()))?;
            if let Some(path) = dot {
                write_file(path, &export_dot(&graph))?;
            }
            let tf = if *functions {
                Some(
                    extract_transition_functions(nl, cand, &ConeOptions::default())
                        .map_err(|e| Failure::Negative(e.into()))?,
                )
            } else {
                None
            };
            if as_json {
                let mut value = graph.to_json();
                if let Some(tf) = &tf {
                    value["functions"] = tf.to_json();
                }
                print_json(&value);
                return Ok(());
            }
            println!(
                "candidate {index}: {} states, {} state bits, inputs [{}], initial {}",
                graph.states.len(),
                graph.state_bits(),
                graph.input_vars.join(", "),
                graph.format_state(graph.initial_state)
            );
            for ((s, t), cond) in graph.condensed_edges() {
                println!("  {} -> {}  [{cond}]", graph.format_state(s), graph.format_state(t));
            }
            if let Some(tf) = &tf {
                for (v, f) in tf.state_vars.iter().zip(&tf.next) {
                    println!("  next({v}) = {f}");
                }
            }
            Ok(())
        }
    }
}

fn harpoon(mut nl: Netlist, cmd: &HarpoonCommand, as_json: bool) -> Outcome {
    let report = find_fsm_candidates(&nl);
    let (index, l) = match cmd {
        HarpoonCommand::Analyze { candidate, limits } | HarpoonCommand::Patch { candidate, limits, .. } => {
            (*candidate, limits)
        }
    };
    let cand = candidate(&report, index)?.clone();
    let analysis = analyze_harpoon(&nl, &cand, &limits(l)).map_err(|e| Failure::Negative(e.into()))?;
    match cmd {
        HarpoonCommand::Analyze { .. } => {
            if as_json {
                print_json(&analysis.to_json());
            } else {
                let g = &analysis.graph;
                println!(
                    "{} reachable states from {}",
                    g.states.len(),
                    g.format_state(g.initial_state)
                );
                match &analysis.finding {
                    Some(f) => {
                        println!(
                            "original region: {} states, entered at {}",
                            f.original_states.len(),
                            g.format_state(f.entry_state)
                        );
                        println!("obfuscation states: {}", f.obfuscation_states.len());
                        println!("key ({} cycles):", f.key.len());
                        for a in &f.key {
                            println!("  {}", g.format_assignment(*a));
                        }
                    }
                    None => println!("no obfuscation: {}", analysis.reason.clone().unwrap_or_default()),
                }
            }
            match analysis.finding {
                Some(_) => Ok(()),
                None => Err(negative("no obfuscated FSM structure found")),
            }
        }
        HarpoonCommand::Patch { out, save: snap, .. } => {
            let finding = analysis
                .finding
                .ok_or_else(|| negative(analysis.reason.unwrap_or_else(|| "nothing to patch".into())))?;
            apply_harpoon_patch(&mut nl, &cand, &finding).map_err(|e| Failure::Negative(e.into()))?;
            log::info!(target: "harpoon", "initial state set to {}", analysis.graph.format_state(finding.entry_state));
            if let Some(path) = snap {
                save(&nl, path)?;
            }
            if out.output.is_some() || snap.is_none() {
                emit_verilog(&nl, out)?;
            }
            Ok(())
        }
    }
}

fn finding_json(f: &WatermarkFinding) -> serde_json::Value {
    json!({
        "gate": f.gate,
        "name": f.gate_name,
        "init": f.init,
        "ties": f.ties.iter().map(|(p, v)| json!({"pin": p, "value": *v as u8})).collect::<Vec<_>>(),
        "unreachable": f.unreachable,
        "payload": f.payload_string(),
        "suspicious": f.suspicious(),
    })
}

fn watermark(mut nl: Netlist, cmd: &WatermarkCommand, as_json: bool) -> Outcome {
    match cmd {
        WatermarkCommand::Scan { csv } => {
            let scan = scan_watermarks(&nl);
            if *csv {
                print!("{}", scan.to_csv());
            } else if as_json {
                print_json(&scan.to_json());
            } else {
                for f in &scan.findings {
                    let flag = if f.suspicious() { "SUSPICIOUS" } else { "clean" };
                    println!(
                        "  {:<24} {:<14} payload {:<10} (0x{}) {flag}",
                        f.gate_name,
                        f.init,
                        f.payload_string(),
                        f.payload_hex()
                    );
                }
                for (g, e) in &scan.errors {
                    println!("  {g}: {e}");
                }
                println!(
                    "{} tied LUTs, {} suspicious",
                    scan.findings.len(),
                    scan.suspicious().count()
                );
            }
            Ok(())
        }
        WatermarkCommand::Extract { gate } => {
            let id = gate_by_name(&nl, gate)?;
            let f = extract_watermark(&nl, id).map_err(|e| usage(e.to_string()))?;
            if as_json {
                print_json(&finding_json(&f));
            } else {
                let ties: Vec<String> = f.ties.iter().map(|(p, v)| format!("{p}={}", *v as u8)).collect();
                println!("{} {} ties [{}]", f.gate_name, f.init, ties.join(", "));
                println!("unreachable rows {:?}", f.unreachable);
                println!(
                    "payload {} (0x{}){}",
                    f.payload_string(),
                    f.payload_hex(),
                    if f.suspicious() { " (suspicious)" } else { "" }
                );
            }
            Ok(())
        }
        WatermarkCommand::Remove { gate, out, save: snap } => {
            let targets: Vec<GateId> = match gate {
                Some(name) => vec![gate_by_name(&nl, name)?],
                None => scan_watermarks(&nl).suspicious().map(|f| f.gate).collect(),
            };
            let mut cleared = 0;
            for id in targets {
                if remove_watermark(&mut nl, id)
                    .map_err(|e| usage(e.to_string()))?
                    .is_some()
                {
                    cleared += 1;
                }
            }
            log::info!(target: "watermark", "{cleared} LUTs cleaned");
            if let Some(path) = snap {
                save(&nl, path)?;
            }
            if out.output.is_some() || snap.is_none() {
                emit_verilog(&nl, out)?;
            }
            Ok(())
        }
    }
}
