//! Structural Verilog input and output.
//!
//! The accepted language is a flat, gate-level subset: one module with
//! scalar ports and wires, cell instances with named port connections, an
//! optional `#(.<config key>(<sized literal>))` parameter, and
//! `assign <wire> = 1'b0;` / `1'b1` constant drivers. See the guide's
//! "Verilog subset" chapter for the grammar.

mod init;
mod lexer;
mod parser;
mod writer;

pub use init::{decode_init, decode_init_literal, encode_init, InitError, InitLiteral, Radix};
pub use lexer::SourceLocation;
pub use parser::{parse_verilog, ParseError, ParseErrorKind};
pub use writer::{verilog_identifier, write_verilog, write_verilog_string, WriteError, WriteOptions};
