//! Gate libraries: the catalog of cell types a netlist is built from.
//!
//! Nothing outside this module knows about concrete cells. Analyses ask a
//! [`GateType`] for its [`GateCategory`], its Boolean function templates, or
//! its LUT/flip-flop pin roles, which keeps them independent of the vendor
//! library a netlist was synthesized against.
//!
//! Libraries are loaded from a JSON document:
//!
//! ```
//! use gatescope::library::{load_gate_library, GateCategory};
//!
//! let lib = load_gate_library(r#"{
//!   "name": "tiny",
//!   "gate_types": [
//!     {"name": "GND", "inputs": [], "outputs": ["O"], "category": "CONST_ZERO"},
//!     {"name": "VCC", "inputs": [], "outputs": ["O"], "category": "CONST_ONE"},
//!     {"name": "NAND2", "inputs": ["A", "B"], "outputs": ["O"],
//!      "category": "COMBINATIONAL", "functions": {"O": "!(A & B)"}}
//!   ]
//! }"#).unwrap();
//! let nand = lib.gate_type("NAND2").unwrap();
//! assert_eq!(nand.category, GateCategory::Combinational);
//! assert_eq!(
//!     nand.function("O").unwrap().truth_table(&["A", "B"]).unwrap(),
//!     vec![true, true, true, false]
//! );
//! ```

mod expr;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boolean::BooleanFunction;
pub use expr::{parse_function_template, ExprError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateCategory {
    Combinational,
    Lut,
    Ff,
    Latch,
    ConstZero,
    ConstOne,
    Buffer,
}

impl GateCategory {
    pub fn is_constant(self) -> bool {
        matches!(self, GateCategory::ConstZero | GateCategory::ConstOne)
    }

    pub fn is_sequential(self) -> bool {
        matches!(self, GateCategory::Ff | GateCategory::Latch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutSpec {
    pub config_key: String,
    /// Input pins from least to most significant truth-table index bit.
    pub pin_order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfSpec {
    #[serde(rename = "data")]
    pub data_pin: String,
    #[serde(rename = "clock")]
    pub clock_pin: String,
    pub init_key: String,
    #[serde(rename = "enable", default, skip_serializing_if = "Option::is_none")]
    pub enable_pin: Option<String>,
    /// Synchronous reset to 0.
    #[serde(rename = "reset", default, skip_serializing_if = "Option::is_none")]
    pub reset_pin: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GateType {
    pub name: String,
    pub input_pins: Vec<String>,
    pub output_pins: Vec<String>,
    pub category: GateCategory,
    /// Template source per output pin, as written in the library document.
    pub templates: BTreeMap<String, String>,
    pub lut: Option<LutSpec>,
    pub ff: Option<FfSpec>,
    functions: BTreeMap<String, BooleanFunction>,
}

impl GateType {
    /// Parsed function of an output pin, over input pin names.
    pub fn function(&self, output_pin: &str) -> Option<&BooleanFunction> {
        self.functions.get(output_pin)
    }

    pub fn functions(&self) -> &BTreeMap<String, BooleanFunction> {
        &self.functions
    }

    pub fn input_index(&self, pin: &str) -> Option<usize> {
        self.input_pins.iter().position(|p| p == pin)
    }

    pub fn output_index(&self, pin: &str) -> Option<usize> {
        self.output_pins.iter().position(|p| p == pin)
    }

    pub fn has_input(&self, pin: &str) -> bool {
        self.input_index(pin).is_some()
    }

    pub fn has_output(&self, pin: &str) -> bool {
        self.output_index(pin).is_some()
    }

    /// Key under which a gate of this type stores its configuration literal
    /// (LUT contents or flip-flop init value).
    pub fn config_key(&self) -> Option<&str> {
        match (&self.lut, &self.ff) {
            (Some(lut), _) => Some(&lut.config_key),
            (None, Some(ff)) => Some(&ff.init_key),
            _ => None,
        }
    }

    /// Number of truth-table index bits for LUTs, 0 for flip-flop inits.
    pub fn config_width_exponent(&self) -> Option<usize> {
        match (&self.lut, &self.ff) {
            (Some(lut), _) => Some(lut.pin_order.len()),
            (None, Some(_)) => Some(0),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LibraryError {
    #[error("malformed gate library document: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("duplicate gate type `{0}`")]
    DuplicateType(String),
    #[error("gate type `{gate_type}`: duplicate pin `{pin}`")]
    DuplicatePin { gate_type: String, pin: String },
    #[error("gate type `{gate_type}`: unknown pin `{pin}`")]
    UnknownPin { gate_type: String, pin: String },
    #[error("gate type `{gate_type}`: function of `{pin}`: {source}")]
    Template {
        gate_type: String,
        pin: String,
        source: ExprError,
    },
    #[error("gate type `{gate_type}`: {reason}")]
    InvalidType { gate_type: String, reason: String },
    #[error("library defines no {0} gate type")]
    MissingConstant(&'static str),
}

#[derive(Debug, Clone)]
pub struct GateLibrary {
    pub name: String,
    types: BTreeMap<String, Arc<GateType>>,
}

impl GateLibrary {
    pub fn gate_type(&self, name: &str) -> Option<&Arc<GateType>> {
        self.types.get(name)
    }

    pub fn types(&self) -> impl Iterator<Item = &Arc<GateType>> {
        self.types.values()
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// First type (by name) of the given category.
    pub fn first_of(&self, category: GateCategory) -> Option<&Arc<GateType>> {
        self.types.values().find(|t| t.category == category)
    }

    /// A general-purpose library with constants, basic gates, LUT1..LUT6 and
    /// a few flip-flop flavors.
    pub fn builtin() -> GateLibrary {
        load_gate_library(BUILTIN_LIBRARY).expect("builtin library is valid")
    }

    pub fn to_document(&self) -> LibraryDocument {
        LibraryDocument {
            name: self.name.clone(),
            gate_types: self
                .types
                .values()
                .map(|t| GateTypeDocument {
                    name: t.name.clone(),
                    inputs: t.input_pins.clone(),
                    outputs: t.output_pins.clone(),
                    category: t.category,
                    functions: t.templates.clone(),
                    lut: t.lut.clone(),
                    ff: t.ff.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("library serializes")
    }
}

pub const BUILTIN_LIBRARY: &str = include_str!("../../libraries/generic.json");

/// On-disk form of a gate library.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibraryDocument {
    pub name: String,
    pub gate_types: Vec<GateTypeDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateTypeDocument {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub category: GateCategory,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub functions: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lut: Option<LutSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ff: Option<FfSpec>,
}

pub fn load_gate_library(source: &str) -> Result<GateLibrary, LibraryError> {
    let doc: LibraryDocument = serde_json::from_str(source)?;
    GateLibrary::from_document(doc)
}

impl GateLibrary {
    pub fn from_document(doc: LibraryDocument) -> Result<GateLibrary, LibraryError> {
        let mut types = BTreeMap::new();
        for t in doc.gate_types {
            let name = t.name.clone();
            let gate_type = validate_type(t)?;
            if types.insert(name.clone(), Arc::new(gate_type)).is_some() {
                return Err(LibraryError::DuplicateType(name));
            }
        }
        let lib = GateLibrary { name: doc.name, types };
        if lib.first_of(GateCategory::ConstZero).is_none() {
            return Err(LibraryError::MissingConstant("CONST_ZERO"));
        }
        if lib.first_of(GateCategory::ConstOne).is_none() {
            return Err(LibraryError::MissingConstant("CONST_ONE"));
        }
        Ok(lib)
    }
}

fn validate_type(doc: GateTypeDocument) -> Result<GateType, LibraryError> {
    let invalid = |reason: &str| LibraryError::InvalidType {
        gate_type: doc.name.clone(),
        reason: reason.to_string(),
    };
    let unknown = |pin: &str| LibraryError::UnknownPin {
        gate_type: doc.name.clone(),
        pin: pin.to_string(),
    };

    let mut pins = BTreeSet::new();
    for pin in doc.inputs.iter().chain(&doc.outputs) {
        if pin.is_empty() {
            return Err(invalid("empty pin name"));
        }
        if !pins.insert(pin.clone()) {
            return Err(LibraryError::DuplicatePin {
                gate_type: doc.name.clone(),
                pin: pin.clone(),
            });
        }
    }
    let inputs: BTreeSet<String> = doc.inputs.iter().cloned().collect();

    match doc.category {
        GateCategory::Lut if doc.lut.is_none() => return Err(invalid("LUT type without lut spec")),
        GateCategory::Ff if doc.ff.is_none() => return Err(invalid("FF type without ff spec")),
        c if c != GateCategory::Lut && doc.lut.is_some() => return Err(invalid("lut spec on a non-LUT type")),
        c if c != GateCategory::Ff && doc.ff.is_some() => return Err(invalid("ff spec on a non-FF type")),
        _ => {}
    }
    if doc.category.is_constant() && (!doc.inputs.is_empty() || doc.outputs.len() != 1) {
        return Err(invalid("constant types need zero inputs and exactly one output"));
    }
    if doc.outputs.is_empty() {
        return Err(invalid("no output pins"));
    }

    if let Some(lut) = &doc.lut {
        for pin in &lut.pin_order {
            if !inputs.contains(pin) {
                return Err(unknown(pin));
            }
        }
        let order: BTreeSet<&String> = lut.pin_order.iter().collect();
        if order.len() != lut.pin_order.len() || order.len() != inputs.len() {
            return Err(invalid("lut pin_order must list every input pin once"));
        }
        if doc.outputs.len() != 1 {
            return Err(invalid("LUT types need exactly one output"));
        }
        if lut.pin_order.len() > 16 {
            return Err(invalid("LUTs are limited to 16 inputs"));
        }
    }
    if let Some(ff) = &doc.ff {
        let roles = [
            Some(&ff.data_pin),
            Some(&ff.clock_pin),
            ff.enable_pin.as_ref(),
            ff.reset_pin.as_ref(),
        ];
        for pin in roles.into_iter().flatten() {
            if !inputs.contains(pin) {
                return Err(unknown(pin));
            }
        }
        if doc.outputs.len() != 1 {
            return Err(invalid("FF types need exactly one output"));
        }
    }

    let mut templates = doc.functions.clone();
    match doc.category {
        GateCategory::Combinational | GateCategory::Buffer => {
            if doc.category == GateCategory::Buffer {
                if doc.inputs.len() != 1 || doc.outputs.len() != 1 {
                    return Err(invalid("buffers need exactly one input and one output"));
                }
                templates
                    .entry(doc.outputs[0].clone())
                    .or_insert_with(|| doc.inputs[0].clone());
            }
            for out in &doc.outputs {
                if !templates.contains_key(out) {
                    return Err(invalid(&format!("missing function for output `{out}`")));
                }
            }
        }
        _ if !templates.is_empty() => return Err(invalid("functions are only allowed on COMBINATIONAL/BUFFER types")),
        _ => {}
    }
    let mut functions = BTreeMap::new();
    for (pin, text) in &templates {
        if !doc.outputs.contains(pin) {
            return Err(unknown(pin));
        }
        let f = parse_function_template(text, &inputs).map_err(|source| LibraryError::Template {
            gate_type: doc.name.clone(),
            pin: pin.clone(),
            source,
        })?;
        functions.insert(pin.clone(), f);
    }

    Ok(GateType {
        name: doc.name,
        input_pins: doc.inputs,
        output_pins: doc.outputs,
        category: doc.category,
        templates: doc.functions,
        lut: doc.lut,
        ff: doc.ff,
        functions,
    })
}
