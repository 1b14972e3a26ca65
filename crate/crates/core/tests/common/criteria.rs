//! One function per acceptance criterion. Each returns a short detail line
//! on success and the reason on failure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use gatescope::boolean::{cone_function, BooleanFunction};
use gatescope::fsm::{brute_force_state_graph, find_fsm_candidates, EnumerationLimits, StateGraph};
use gatescope::graph::{build_digraph, condensation_is_acyclic, tarjan_scc};
use gatescope::harpoon::{analyze_harpoon, apply_harpoon_patch};
use gatescope::hdl::{decode_init, parse_verilog, write_verilog_string, WriteOptions};
use gatescope::netlist::{load_snapshot, save_snapshot, NetId, Netlist};
use gatescope::watermark::{extract_watermark, find_constant_tied_luts, remove_watermark, scan_watermarks};

use super::sim::{graph_relation, Simulator};
use super::{corpus_files, library, load, mutate, FSM_FIXTURES};

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub const SCC_GRAPHS: usize = 200;
pub const SCC_MAX_NODES: usize = 50;
pub const SCC_DENSITY: (f64, f64) = (0.05, 0.3);
pub const SCC_TIME_LIMIT: Duration = Duration::from_secs(5);

/// Strongly connected partition from the transitive closure.
pub fn closure_partition(adj: &[Vec<usize>]) -> BTreeSet<BTreeSet<usize>> {
    let n = adj.len();
    let mut reach = vec![vec![false; n]; n];
    for (u, succ) in adj.iter().enumerate() {
        reach[u][u] = true;
        for &v in succ {
            reach[u][v] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                let row = reach[k].clone();
                for (cell, via) in reach[i].iter_mut().zip(row) {
                    *cell |= via;
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect())
        .collect()
}

pub fn scc_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5cc);
    let start = Instant::now();
    for g in 0..SCC_GRAPHS {
        let n = rng.gen_range(1..=SCC_MAX_NODES);
        let density = rng.gen_range(SCC_DENSITY.0..=SCC_DENSITY.1);
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..n).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        let sccs = tarjan_scc(&adj);
        let got: BTreeSet<BTreeSet<usize>> = sccs.iter().map(|c| c.iter().copied().collect()).collect();
        ensure!(got.len() == sccs.len(), "graph {g}: duplicate component");
        ensure!(
            got == closure_partition(&adj),
            "graph {g} (n={n}): partition differs from closure"
        );
        ensure!(
            condensation_is_acyclic(&adj, &sccs),
            "graph {g}: components out of order"
        );
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < SCC_TIME_LIMIT, "took {elapsed:?}");
    Ok(format!("{SCC_GRAPHS} graphs in {elapsed:?}"))
}

pub const ROUND_TRIP_MIN_DESIGNS: usize = 20;
pub const CONE_VAR_LIMIT: usize = 20;
pub const SIM_SAMPLES: usize = 64;

/// Cones worth comparing: every primary output and every register input,
/// keyed by a name that survives a write/parse cycle.
fn observed_cones(nl: &Netlist) -> BTreeMap<String, NetId> {
    let mut out = BTreeMap::new();
    for net in nl.global_outputs() {
        out.insert(format!("out:{}", net.name), net.id);
    }
    for gate in nl.gates() {
        if let Some(ff) = &gate.gate_type.ff {
            if let Some(d) = gate.input_net(&ff.data_pin) {
                out.insert(format!("reg:{}", gate.name), d);
            }
        }
    }
    out
}

fn cone(nl: &Netlist, net: NetId) -> Result<BooleanFunction, String> {
    cone_function(nl, net, &BTreeSet::new()).map_err(|e| e.to_string())
}

pub fn hdl_round_trip() -> Outcome {
    let files = corpus_files();
    ensure!(files.len() >= ROUND_TRIP_MIN_DESIGNS, "only {} designs", files.len());
    let mut rng = StdRng::seed_from_u64(0xdead);
    let mut cones = 0;
    let mut largest = 0;
    for path in &files {
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
        let first = parse_verilog(&text, library()).map_err(|e| format!("{name}: {e}"))?;
        ensure!(
            (1..=500).contains(&first.gates().filter(|g| !g.category().is_constant()).count()),
            "{name}: gate count out of range"
        );
        largest = largest.max(first.gate_count());
        let written = write_verilog_string(&first, WriteOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let second = parse_verilog(&written, library()).map_err(|e| format!("{name}: reparse: {e}"))?;
        ensure!(first.summary() == second.summary(), "{name}: element counts changed");

        let before = observed_cones(&first);
        let after = observed_cones(&second);
        ensure!(before.keys().eq(after.keys()), "{name}: observed outputs changed");
        let sim = Simulator::new(&second);
        for (key, &net) in &before {
            let f = cone(&first, net)?;
            let g = cone(&second, after[key])?;
            ensure!(f.support() == g.support(), "{name} {key}: support changed");
            let vars = f.support().to_vec();
            ensure!(vars.len() <= CONE_VAR_LIMIT, "{name} {key}: {} variables", vars.len());
            let tf = f.truth_table(&vars).map_err(|e| e.to_string())?;
            let tg = g.truth_table(&vars).map_err(|e| e.to_string())?;
            ensure!(tf == tg, "{name} {key}: truth table changed");

            // Independent spot check: the simulator on the rewritten design
            // agrees with the original's truth table.
            let reg_names = sim.register_names();
            let in_names = sim.input_names();
            for _ in 0..SIM_SAMPLES.min(tf.len()) {
                let row = rng.gen_range(0..tf.len());
                let value_of = |v: &str| {
                    let j = vars.iter().position(|x| x == v);
                    j.is_some_and(|j| row >> j & 1 == 1)
                };
                let state: Vec<bool> = reg_names
                    .iter()
                    .map(|r| {
                        let q = second
                            .gate(second.gate_by_name(r).unwrap())
                            .unwrap()
                            .output_net("Q")
                            .unwrap();
                        value_of(&second.net(q).unwrap().name)
                    })
                    .collect();
                let inputs: Vec<bool> = in_names.iter().map(|n| value_of(n)).collect();
                let got = sim.net_value(after[key], &state, &inputs, &mut HashMap::new());
                ensure!(got == tf[row], "{name} {key}: simulator disagrees at row {row}");
            }
            cones += 1;
        }
    }
    Ok(format!(
        "{} designs (up to {largest} gates), {cones} cones identical",
        files.len()
    ))
}

pub const FSM_TIME_LIMIT: Duration = Duration::from_secs(1);

fn single_graph(nl: &Netlist, name: &str) -> Result<StateGraph, String> {
    let report = find_fsm_candidates(nl);
    ensure!(
        report.candidates.len() == 1,
        "{name}: {} candidates",
        report.candidates.len()
    );
    brute_force_state_graph(nl, &report.candidates[0], &EnumerationLimits::default())
        .map_err(|e| format!("{name}: {e}"))
}

pub fn fsm_oracle() -> Outcome {
    let mut details = Vec::new();
    for name in FSM_FIXTURES {
        let nl = load(name);
        let start = Instant::now();
        let graph = single_graph(&nl, name)?;
        let elapsed = start.elapsed();
        ensure!(elapsed < FSM_TIME_LIMIT, "{name}: took {elapsed:?}");
        let expected = Simulator::new(&nl).reachable_relation();
        let got = graph_relation(&nl, &graph);
        ensure!(
            got == expected,
            "{name}: relation differs ({} vs {} transitions)",
            got.len(),
            expected.len()
        );
        details.push(format!(
            "{}={}",
            name.trim_start_matches("fsm_").trim_end_matches(".v"),
            graph.states.len()
        ));
    }
    Ok(format!("states: {}", details.join(", ")))
}

pub const HARPOON_KEY_LENGTH: usize = 3;
pub const HARPOON_ORIGINAL_STATES: usize = 4;
pub const HARPOON_OBFUSCATION_STATES: usize = 8;

pub fn harpoon_end_to_end() -> Outcome {
    let mut nl = load("harpoon_fsm.v");
    let report = find_fsm_candidates(&nl);
    ensure!(report.candidates.len() == 1, "{} candidates", report.candidates.len());
    let candidate = report.candidates[0].clone();
    let analysis = analyze_harpoon(&nl, &candidate, &EnumerationLimits::default()).map_err(|e| e.to_string())?;
    let finding = analysis
        .finding
        .clone()
        .ok_or_else(|| format!("not detected: {:?}", analysis.reason))?;
    ensure!(
        finding.key.len() == HARPOON_KEY_LENGTH,
        "key length {}",
        finding.key.len()
    );
    ensure!(
        finding.original_states.len() == HARPOON_ORIGINAL_STATES,
        "{} original states",
        finding.original_states.len()
    );
    ensure!(
        finding.obfuscation_states.len() == HARPOON_OBFUSCATION_STATES,
        "{} obfuscation states",
        finding.obfuscation_states.len()
    );

    apply_harpoon_patch(&mut nl, &candidate, &finding).map_err(|e| e.to_string())?;
    let patched = single_graph(&nl, "patched")?;
    let reached: BTreeSet<u64> = patched.states.iter().copied().collect();
    let original: BTreeSet<u64> = finding.original_states.iter().copied().collect();
    ensure!(reached == original, "patched design reaches {:?}", patched.states);

    let text = write_verilog_string(&nl, WriteOptions::default()).map_err(|e| e.to_string())?;
    let reparsed = parse_verilog(&text, library()).map_err(|e| e.to_string())?;
    let again = single_graph(&reparsed, "reparsed")?;
    ensure!(again.states == patched.states, "state order differs after reparse");
    ensure!(
        again.condensed_edges() == patched.condensed_edges(),
        "edges differ after reparse"
    );
    ensure!(
        graph_relation(&reparsed, &again) == graph_relation(&nl, &patched),
        "transition relation differs after reparse"
    );
    let key: Vec<String> = finding
        .key
        .iter()
        .map(|a| analysis.graph.format_assignment(*a))
        .collect();
    Ok(format!(
        "key [{}], {} original states after patch, identical after reparse",
        key.join(" | "),
        reached.len()
    ))
}

pub const WATERMARK_PAYLOAD_ROWS: [usize; 4] = [4, 5, 6, 7];

pub fn watermark_marked_lut() -> Outcome {
    let mut nl = load("watermark_marked.v");
    let tied = find_constant_tied_luts(&nl);
    ensure!(tied.len() == 1, "{} tied LUTs", tied.len());
    let gate = tied[0].gate;
    let finding = extract_watermark(&nl, gate).map_err(|e| e.to_string())?;
    ensure!(
        finding.unreachable == WATERMARK_PAYLOAD_ROWS,
        "unreachable rows {:?}",
        finding.unreachable
    );
    ensure!(finding.suspicious(), "marked LUT not flagged");
    let before = decode_init(&finding.init, 3).map_err(|e| e.to_string())?;

    let new = remove_watermark(&mut nl, gate)
        .map_err(|e| e.to_string())?
        .ok_or("nothing removed")?;
    let after = decode_init(&new, 3).map_err(|e| e.to_string())?;
    for row in 0..8 {
        if WATERMARK_PAYLOAD_ROWS.contains(&row) {
            ensure!(!after[row], "row {row} not cleared");
        } else {
            ensure!(after[row] == before[row], "reachable row {row} changed");
        }
    }
    // Exhaustive behavioral check over the reachable inputs (I2 = 0).
    let original = load("watermark_marked.v");
    let (sim_before, sim_after) = (Simulator::new(&original), Simulator::new(&nl));
    let y0 = original.net_by_name("y").unwrap();
    let y1 = nl.net_by_name("y").unwrap();
    for a in 0..4 {
        let inputs = [a & 1 == 1, a & 2 == 2];
        let v0 = sim_before.net_value(y0, &[], &inputs, &mut HashMap::new());
        let v1 = sim_after.net_value(y1, &[], &inputs, &mut HashMap::new());
        ensure!(v0 == v1, "behavior changed for a={}, b={}", inputs[0], inputs[1]);
    }
    ensure!(
        !extract_watermark(&nl, gate).unwrap().suspicious(),
        "still suspicious after removal"
    );

    let clean = scan_watermarks(&load("watermark_clean.v"));
    ensure!(clean.suspicious().count() == 0, "clean design flagged");
    let mut tied_total = 0;
    for path in corpus_files() {
        let text = std::fs::read_to_string(&path).unwrap();
        let scan = scan_watermarks(&parse_verilog(&text, library()).unwrap());
        ensure!(scan.errors.is_empty(), "{}: {:?}", path.display(), scan.errors);
        ensure!(scan.suspicious().count() == 0, "false positive in {}", path.display());
        tied_total += scan.findings.len();
    }
    Ok(format!(
        "payload {} cleared, {new}; 0 false positives over {tied_total} tied LUTs in the corpus",
        finding.payload_string()
    ))
}

pub const SCALE_GATES: usize = 100_000;
pub const SCALE_TIME_LIMIT: Duration = Duration::from_secs(30);
pub const SCALE_MEMORY_LIMIT_KB: u64 = 4 * 1024 * 1024;

/// A flat design of `rings` register rings of 10 gates each, with some
/// cross-ring fan-out, as Verilog text.
pub fn scale_design(gates: usize) -> String {
    use std::fmt::Write;
    let rings = gates / 10;
    let mut s = String::with_capacity(gates * 80);
    s.push_str("module big (clk, x, y);\n  input clk, x;\n  output y;\n");
    for r in 0..rings {
        let prev = if r == 0 {
            "x".to_string()
        } else {
            format!("r{}_8", r - 1)
        };
        writeln!(s, "  AND2 r{r}g0 (.A(r{r}_9), .B({prev}), .O(r{r}_0));").unwrap();
        for k in 1..9 {
            let cell = if k % 2 == 0 { "INV" } else { "BUF" };
            writeln!(s, "  {cell} r{r}g{k} (.I(r{r}_{}), .O(r{r}_{k}));", k - 1).unwrap();
        }
        writeln!(s, "  DFF r{r}g9 (.D(r{r}_8), .C(clk), .Q(r{r}_9));").unwrap();
    }
    writeln!(s, "  BUF out (.I(r{}_8), .O(y));", rings - 1).unwrap();
    s.push_str("endmodule\n");
    s
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

pub fn scale_smoke() -> Outcome {
    let text = scale_design(SCALE_GATES);
    let start = Instant::now();
    let nl = parse_verilog(&text, library()).map_err(|e| e.to_string())?;
    let digraph = build_digraph(&nl, None);
    let sccs = digraph.sccs(false);
    let elapsed = start.elapsed();
    ensure!(nl.gate_count() > SCALE_GATES, "only {} gates", nl.gate_count());
    ensure!(sccs.len() == SCALE_GATES / 10, "{} loops found", sccs.len());
    ensure!(elapsed < SCALE_TIME_LIMIT, "took {elapsed:?}");
    let peak = peak_rss_kb();
    if let Some(kb) = peak {
        ensure!(kb < SCALE_MEMORY_LIMIT_KB, "peak memory {kb} kB");
    }
    Ok(format!(
        "{} gates, {} edges, {} SCCs in {elapsed:?}, peak RSS {}",
        nl.gate_count(),
        digraph.edge_count(),
        sccs.len(),
        peak.map(|kb| format!("{} MB", kb / 1024))
            .unwrap_or_else(|| "unavailable".into())
    ))
}

pub const MUTATION_SEQUENCES: usize = 20;
pub const MUTATION_STEPS: usize = 1000;

pub fn netlist_properties() -> Outcome {
    let mut accepted = 0;
    for seed in 0..MUTATION_SEQUENCES as u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut nl = Netlist::new("prop", library());
        let mut counter = 0;
        for step in 0..MUTATION_STEPS {
            let op = (rng.gen(), rng.gen(), rng.gen(), rng.gen());
            if mutate::apply(&mut nl, op, &mut counter) {
                accepted += 1;
            }
            nl.check_integrity()
                .map_err(|e| format!("seed {seed} step {step}: {e}"))?;
        }
        let replayed = Netlist::replay("prop", library(), nl.events()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(replayed.structurally_equal(&nl), "seed {seed}: replay differs");
        let mut buf = Vec::new();
        save_snapshot(&nl, &mut buf).map_err(|e| e.to_string())?;
        let back = load_snapshot(buf.as_slice(), library()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(back.structurally_equal(&nl), "seed {seed}: snapshot differs");
        let mut again = Vec::new();
        save_snapshot(&back, &mut again).map_err(|e| e.to_string())?;
        ensure!(again == buf, "seed {seed}: snapshot bytes differ");
    }
    Ok(format!(
        "{MUTATION_SEQUENCES} x {MUTATION_STEPS} steps ({accepted} accepted), replay and snapshot identical"
    ))
}
