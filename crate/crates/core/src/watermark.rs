//! LUT watermarks hidden in unreachable truth-table entries.
//!
//! When a LUT input is tied to a constant, half of its `INIT` rows can never
//! be selected. A designer can hide a signature there without changing
//! behavior. The unreachable rows are fully determined by the ties: a row
//! is unreachable exactly when its index disagrees with some tied pin. The
//! bits stored in those rows, read in ascending row order, form the payload.
//!
//! ```
//! use std::sync::Arc;
//! use gatescope::hdl::parse_verilog;
//! use gatescope::library::GateLibrary;
//! use gatescope::watermark::{extract_watermark, find_constant_tied_luts};
//!
//! let nl = parse_verilog(r#"
//!   module top (a, b, y);
//!     input a, b; output y;
//!     LUT3 #(.INIT(8'b10110101)) u (.I0(a), .I1(b), .I2(1'b0), .O(y));
//!   endmodule"#, Arc::new(GateLibrary::builtin())).unwrap();
//! let tied = find_constant_tied_luts(&nl);
//! let w = extract_watermark(&nl, tied[0].gate).unwrap();
//! assert_eq!(w.unreachable, [4, 5, 6, 7]);
//! assert_eq!(w.payload, [true, true, false, true]);
//! assert!(w.suspicious());
//! ```

use std::collections::BTreeMap;

use serde::Serialize;

use crate::hdl::{decode_init_literal, encode_init, InitError};
use crate::library::GateCategory;
use crate::netlist::{GateId, Netlist, NetlistError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TiedLut {
    pub gate: GateId,
    /// Tied input positions (in LUT pin order) and their constant values.
    pub ties: BTreeMap<usize, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WatermarkFinding {
    pub gate: GateId,
    pub gate_name: String,
    pub init: String,
    /// `(pin name, value)` for each tied input.
    pub ties: Vec<(String, bool)>,
    /// Unreachable row indices, ascending.
    pub unreachable: Vec<usize>,
    /// `INIT` bits at the unreachable rows, in the same order.
    pub payload: Vec<bool>,
}

impl WatermarkFinding {
    /// A payload with any set bit. An all-zero payload is what a clean
    /// synthesis flow leaves behind.
    pub fn suspicious(&self) -> bool {
        self.payload.iter().any(|&b| b)
    }

    pub fn payload_string(&self) -> String {
        self.payload.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Payload as hex with payload bit `i` at weight `2^i`, like `INIT`.
    pub fn payload_hex(&self) -> String {
        let digits = self.payload.len().div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4)
                    .filter(|&b| self.payload.get(d * 4 + b).copied().unwrap_or(false))
                    .fold(0u32, |acc, b| acc | 1 << b);
                char::from_digit(nibble, 16).expect("nibble")
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WatermarkError {
    #[error("unknown gate {0}")]
    UnknownGate(GateId),
    #[error("gate `{0}` is not a LUT")]
    NotLut(String),
    #[error("LUT `{0}` has no INIT value")]
    MissingInit(String),
    #[error("LUT `{gate}`: {source}")]
    Init { gate: String, source: InitError },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

fn tie_of(netlist: &Netlist, net: Option<crate::netlist::NetId>) -> Option<bool> {
    match netlist.driver(net?)?.category() {
        GateCategory::ConstZero => Some(false),
        GateCategory::ConstOne => Some(true),
        _ => None,
    }
}

/// LUTs with at least one input driven by a constant cell, in gate id order.
pub fn find_constant_tied_luts(netlist: &Netlist) -> Vec<TiedLut> {
    netlist
        .gates()
        .filter_map(|g| {
            let lut = g.gate_type.lut.as_ref()?;
            let ties: BTreeMap<usize, bool> = lut
                .pin_order
                .iter()
                .enumerate()
                .filter_map(|(j, pin)| tie_of(netlist, g.input_net(pin)).map(|v| (j, v)))
                .collect();
            (!ties.is_empty()).then_some(TiedLut { gate: g.id, ties })
        })
        .collect()
}

/// Row indices of a `k`-input LUT that no input assignment can select.
pub fn unreachable_indices(k: usize, ties: &BTreeMap<usize, bool>) -> Vec<usize> {
    (0..1usize << k)
        .filter(|&i| ties.iter().any(|(&j, &v)| (i >> j & 1 == 1) != v))
        .collect()
}

pub fn extract_watermark(netlist: &Netlist, gate: GateId) -> Result<WatermarkFinding, WatermarkError> {
    let g = netlist.gate(gate).ok_or(WatermarkError::UnknownGate(gate))?;
    let lut = g
        .gate_type
        .lut
        .as_ref()
        .ok_or_else(|| WatermarkError::NotLut(g.name.clone()))?;
    let init = g.config().ok_or_else(|| WatermarkError::MissingInit(g.name.clone()))?;
    let k = lut.pin_order.len();
    let bits = decode_init_literal(init, k)
        .map_err(|source| WatermarkError::Init {
            gate: g.name.clone(),
            source,
        })?
        .bits;
    let mut ties = BTreeMap::new();
    let mut tie_names = Vec::new();
    for (j, pin) in lut.pin_order.iter().enumerate() {
        if let Some(v) = tie_of(netlist, g.input_net(pin)) {
            ties.insert(j, v);
            tie_names.push((pin.clone(), v));
        }
    }
    let unreachable = unreachable_indices(k, &ties);
    let payload = unreachable.iter().map(|&i| bits[i]).collect();
    Ok(WatermarkFinding {
        gate,
        gate_name: g.name.clone(),
        init: init.to_string(),
        ties: tie_names,
        unreachable,
        payload,
    })
}

/// Zero the unreachable rows of a LUT's `INIT`, keeping the literal's radix.
/// The write is journaled even when no bit changes. Returns the new
/// literal, or `None` when there was nothing to clear.
pub fn remove_watermark(netlist: &mut Netlist, gate: GateId) -> Result<Option<String>, WatermarkError> {
    let finding = extract_watermark(netlist, gate)?;
    let g = netlist.gate(gate).expect("checked by extract");
    let key = g.gate_type.lut.as_ref().expect("LUT").config_key.clone();
    let k = g.gate_type.lut.as_ref().expect("LUT").pin_order.len();
    let mut lit = decode_init_literal(&finding.init, k).expect("decoded by extract");
    for &i in &finding.unreachable {
        lit.bits[i] = false;
    }
    let text = encode_init(&lit.bits, lit.radix);
    netlist.set_gate_data(gate, &key, &text)?;
    if !finding.suspicious() {
        return Ok(None);
    }
    log::info!(target: "watermark", "cleared {} rows of `{}`", finding.unreachable.len(), finding.gate_name);
    Ok(Some(text))
}

/// Every constant-tied LUT with its payload. LUTs whose `INIT` cannot be
/// decoded are reported separately.
#[derive(Debug, Clone, Default, Serialize)]
pub struct WatermarkScan {
    pub findings: Vec<WatermarkFinding>,
    pub errors: Vec<(GateId, String)>,
}

impl WatermarkScan {
    pub fn suspicious(&self) -> impl Iterator<Item = &WatermarkFinding> {
        self.findings.iter().filter(|f| f.suspicious())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let findings: Vec<serde_json::Value> = self
            .findings
            .iter()
            .map(|f| {
                serde_json::json!({
                    "gate": f.gate,
                    "name": f.gate_name,
                    "init": f.init,
                    "ties": f.ties.iter().map(|(p, v)| serde_json::json!({"pin": p, "value": *v as u8})).collect::<Vec<_>>(),
                    "unreachable": f.unreachable,
                    "payload": f.payload_string(),
                    "payload_hex": f.payload_hex(),
                    "suspicious": f.suspicious(),
                })
            })
            .collect();
        serde_json::json!({
            "tied_luts": self.findings.len(),
            "suspicious": self.suspicious().count(),
            "findings": findings,
            "errors": self.errors.iter().map(|(g, e)| serde_json::json!({"gate": g, "error": e})).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("gate,name,init,ties,payload,payload_hex,suspicious\n");
        for f in &self.findings {
            let ties: Vec<String> = f.ties.iter().map(|(p, v)| format!("{p}={}", *v as u8)).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f.gate,
                csv_field(&f.gate_name),
                f.init,
                ties.join(";"),
                f.payload_string(),
                f.payload_hex(),
                f.suspicious()
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn scan_watermarks(netlist: &Netlist) -> WatermarkScan {
    let mut scan = WatermarkScan::default();
    for tied in find_constant_tied_luts(netlist) {
        match extract_watermark(netlist, tied.gate) {
            Ok(f) => scan.findings.push(f),
            Err(e) => scan.errors.push((tied.gate, e.to_string())),
        }
    }
    log::info!(
        target: "watermark",
        "{} constant-tied LUTs, {} suspicious",
        scan.findings.len(),
        scan.suspicious().count()
    );
    scan
}
