//! Reverse engineering toolkit for flat gate-level netlists.
//!
//! The crate parses structural Verilog against a user-supplied gate
//! library into a mutable [`netlist::Netlist`] graph, analyzes it, and
//! writes it back out:
//!
//! * [`library`]: gate types, categories and function templates.
//! * [`netlist`]: gates, nets, submodules, the change journal and snapshots.
//! * [`hdl`]: the Verilog subset parser/writer and the LUT `INIT` codec.
//! * [`boolean`]: canonical Boolean functions and combinational cones.
//! * [`graph`]: the gate digraph, strongly connected components and
//!   traversal helpers.
//! * [`fsm`]: FSM candidate detection, state-graph enumeration, DOT export.
//! * [`harpoon`]: enabling-key recovery and patching for HARPOON-style
//!   FSM obfuscation.
//! * [`watermark`]: detection and removal of LUT watermarks hidden in
//!   unreachable truth-table entries.
//!
//! The guide in `book/` walks through each topic with runnable examples.

pub mod boolean;
pub mod fsm;
pub mod graph;
pub mod harpoon;
pub mod hdl;
pub mod library;
pub mod netlist;
pub mod watermark;

#[cfg(doctest)]
mod book;
