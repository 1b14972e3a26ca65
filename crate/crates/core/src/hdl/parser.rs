use std::collections::HashMap;
use std::sync::Arc;

use super::lexer::{Lexer, SourceLocation, Token};
use crate::hdl::InitError;
use crate::library::{GateCategory, GateLibrary, GateType};
use crate::netlist::{Direction, Endpoint, GateId, NetId, Netlist, NetlistError};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("{location}: {kind}")]
pub struct ParseError {
    pub location: SourceLocation,
    pub kind: ParseErrorKind,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown cell type `{0}`")]
    UnknownCell(String),
    #[error("cell type `{cell}` has no pin `{pin}`")]
    UnknownPin { cell: String, pin: String },
    #[error("net `{0}` driven twice")]
    NetDrivenTwice(String),
    #[error("net `{0}` is a module input and cannot be driven")]
    DrivenInput(String),
    #[error("cell type `{cell}` has no parameter `{param}`")]
    UnknownParameter { cell: String, param: String },
    #[error("invalid parameter value: {0}")]
    InitValue(InitError),
    #[error("constant cannot drive output pin `{0}`")]
    ConstantOnOutput(String),
    #[error(transparent)]
    Netlist(NetlistError),
}

/// Parse a single flat structural Verilog module into a netlist.
///
/// Constant connections materialize constant cells: every
/// `assign w = 1'b0;` gets its own driver, while inline literal pin
/// connections share one constant cell and net per value.
pub fn parse_verilog(text: &str, library: Arc<GateLibrary>) -> Result<Netlist, ParseError> {
    let mut p = Parser {
        lexer: Lexer::new(text),
        look: (Token::Eof, SourceLocation { line: 1, column: 1 }),
        netlist: Netlist::new("", library),
        shared_constants: HashMap::new(),
    };
    p.bump()?;
    p.module()?;
    let s = p.netlist.summary();
    log::info!(target: "hdl", "parsed `{}`: {} gates, {} nets", p.netlist.design_name, s.gates, s.nets);
    Ok(p.netlist)
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    look: (Token, SourceLocation),
    netlist: Netlist,
    shared_constants: HashMap<bool, NetId>,
}

enum ConnTarget {
    Net(String),
    Constant(bool),
}

impl Parser<'_> {
    fn bump(&mut self) -> Result<(Token, SourceLocation), ParseError> {
        let next = self.lexer.next_token().map_err(|(location, msg)| ParseError {
            location,
            kind: ParseErrorKind::Syntax(msg),
        })?;
        Ok(std::mem::replace(&mut self.look, next))
    }

    fn err(&self, location: SourceLocation, kind: ParseErrorKind) -> ParseError {
        ParseError { location, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.err(
            self.look.1,
            ParseErrorKind::Syntax(format!("expected {expected}, found {}", self.look.0)),
        )
    }

    fn expect(&mut self, tok: Token) -> Result<SourceLocation, ParseError> {
        if self.look.0 == tok {
            Ok(self.bump()?.1)
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceLocation), ParseError> {
        match &self.look.0 {
            Token::Ident(_) | Token::Escaped(_) => match self.bump()? {
                (Token::Ident(s) | Token::Escaped(s), loc) => Ok((s, loc)),
                _ => unreachable!(),
            },
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match &self.look.0 {
            Token::Ident(s) if s == kw => {
                self.bump()?;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn netlist_err(&self, location: SourceLocation, e: NetlistError) -> ParseError {
        let kind = match e {
            NetlistError::NetAlreadyDriven(id) => {
                ParseErrorKind::NetDrivenTwice(self.netlist.net(id).map(|n| n.name.clone()).unwrap_or_default())
            }
            NetlistError::GlobalInputDriven(id) => {
                ParseErrorKind::DrivenInput(self.netlist.net(id).map(|n| n.name.clone()).unwrap_or_default())
            }
            NetlistError::InvalidConfig { source, .. } => ParseErrorKind::InitValue(source),
            other => ParseErrorKind::Netlist(other),
        };
        self.err(location, kind)
    }

    fn net(&mut self, name: &str, location: SourceLocation) -> Result<NetId, ParseError> {
        if let Some(id) = self.netlist.net_by_name(name) {
            return Ok(id);
        }
        self.netlist.create_net(name).map_err(|e| self.netlist_err(location, e))
    }

    fn module(&mut self) -> Result<(), ParseError> {
        self.keyword("module")?;
        let (name, _) = self.ident()?;
        self.netlist.design_name = name;
        if self.look.0 == Token::LParen {
            self.bump()?;
            if self.look.0 != Token::RParen {
                loop {
                    let (port, loc) = self.ident()?;
                    self.net(&port, loc)?;
                    if self.look.0 == Token::Comma {
                        self.bump()?;
                    } else {
                        break;
                    }
                }
            }
            self.expect(Token::RParen)?;
        }
        self.expect(Token::Semi)?;
        loop {
            let (word, loc, escaped) = match &self.look.0 {
                Token::Ident(w) => (w.clone(), self.look.1, false),
                Token::Escaped(w) => (w.clone(), self.look.1, true),
                _ => return Err(self.unexpected("declaration, instance or `endmodule`")),
            };
            match if escaped { "" } else { word.as_str() } {
                "endmodule" => {
                    self.bump()?;
                    break;
                }
                "input" | "output" | "wire" => {
                    self.bump()?;
                    self.declaration(&word)?;
                }
                "assign" => {
                    self.bump()?;
                    self.assign()?;
                }
                _ => {
                    self.bump()?;
                    self.instance(&word, loc)?;
                }
            }
        }
        if self.look.0 != Token::Eof {
            return Err(self.unexpected("end of input after `endmodule`"));
        }
        Ok(())
    }

    fn declaration(&mut self, kind: &str) -> Result<(), ParseError> {
        loop {
            let (name, loc) = self.ident()?;
            let id = self.net(&name, loc)?;
            let result = match kind {
                "input" => self.netlist.set_global_input(id, true),
                "output" => self.netlist.set_global_output(id, true),
                _ => Ok(()),
            };
            result.map_err(|e| self.netlist_err(loc, e))?;
            if self.look.0 == Token::Comma {
                self.bump()?;
            } else {
                break;
            }
        }
        self.expect(Token::Semi)?;
        Ok(())
    }

    fn bit_literal(&mut self) -> Result<bool, ParseError> {
        let (tok, loc) = self.bump()?;
        let Token::Literal(text) = tok else {
            return Err(self.err(
                loc,
                ParseErrorKind::Syntax(format!("expected 1'b0 or 1'b1, found {tok}")),
            ));
        };
        match super::InitLiteral::parse(&text) {
            Ok(lit) if lit.width() == 1 => Ok(lit.bits[0]),
            _ => Err(self.err(
                loc,
                ParseErrorKind::Syntax(format!("expected a 1-bit constant, found `{text}`")),
            )),
        }
    }

    fn fresh_gate_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        let mut n = 1;
        while self.netlist.gate_by_name(&name).is_some() {
            name = format!("{base}_{n}");
            n += 1;
        }
        name
    }

    fn fresh_net_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        let mut n = 1;
        while self.netlist.net_by_name(&name).is_some() {
            name = format!("{base}_{n}");
            n += 1;
        }
        name
    }

    fn constant_cell(&self, value: bool) -> Arc<GateType> {
        let category = if value {
            GateCategory::ConstOne
        } else {
            GateCategory::ConstZero
        };
        self.netlist
            .library()
            .first_of(category)
            .expect("libraries always define constants")
            .clone()
    }

    fn drive_with_constant(&mut self, net: NetId, value: bool, loc: SourceLocation) -> Result<(), ParseError> {
        let cell = self.constant_cell(value);
        let base = format!("const_{}_{}", value as u8, self.netlist.net(net).expect("live").name);
        let name = self.fresh_gate_name(&base);
        let gate = self
            .netlist
            .create_gate(&cell.name, &name)
            .map_err(|e| self.netlist_err(loc, e))?;
        self.netlist
            .connect(net, Endpoint::output(gate, cell.output_pins[0].clone()))
            .map_err(|e| self.netlist_err(loc, e))
    }

    fn shared_constant(&mut self, value: bool, loc: SourceLocation) -> Result<NetId, ParseError> {
        if let Some(&net) = self.shared_constants.get(&value) {
            return Ok(net);
        }
        let base = if value { "const_vcc" } else { "const_gnd" };
        let name = self.fresh_net_name(base);
        let net = self.net(&name, loc)?;
        self.drive_with_constant(net, value, loc)?;
        self.shared_constants.insert(value, net);
        Ok(net)
    }

    fn assign(&mut self) -> Result<(), ParseError> {
        let (name, loc) = self.ident()?;
        self.expect(Token::Equals)?;
        let value = self.bit_literal()?;
        self.expect(Token::Semi)?;
        let net = self.net(&name, loc)?;
        self.drive_with_constant(net, value, loc)
    }

    fn instance(&mut self, cell: &str, cell_loc: SourceLocation) -> Result<(), ParseError> {
        let gate_type = self
            .netlist
            .library()
            .gate_type(cell)
            .cloned()
            .ok_or_else(|| self.err(cell_loc, ParseErrorKind::UnknownCell(cell.to_string())))?;

        let mut params = Vec::new();
        if self.look.0 == Token::Hash {
            self.bump()?;
            self.expect(Token::LParen)?;
            loop {
                self.expect(Token::Dot)?;
                let (key, loc) = self.ident()?;
                self.expect(Token::LParen)?;
                let (tok, lit_loc) = self.bump()?;
                let value = match tok {
                    Token::Literal(v) => v,
                    other => {
                        return Err(self.err(
                            lit_loc,
                            ParseErrorKind::Syntax(format!("expected sized literal, found {other}")),
                        ))
                    }
                };
                self.expect(Token::RParen)?;
                if gate_type.config_key() != Some(key.as_str()) {
                    return Err(self.err(
                        loc,
                        ParseErrorKind::UnknownParameter {
                            cell: cell.to_string(),
                            param: key,
                        },
                    ));
                }
                params.push((key, value, lit_loc));
                if self.look.0 == Token::Comma {
                    self.bump()?;
                } else {
                    break;
                }
            }
            self.expect(Token::RParen)?;
        }

        let (inst_name, inst_loc) = self.ident()?;
        let gate = self
            .netlist
            .create_gate(cell, &inst_name)
            .map_err(|e| self.netlist_err(inst_loc, e))?;
        for (key, value, loc) in params {
            self.netlist
                .set_gate_data(gate, &key, &value)
                .map_err(|e| self.netlist_err(loc, e))?;
        }

        self.expect(Token::LParen)?;
        if self.look.0 != Token::RParen {
            loop {
                self.connection(gate, &gate_type)?;
                if self.look.0 == Token::Comma {
                    self.bump()?;
                } else {
                    break;
                }
            }
        }
        self.expect(Token::RParen)?;
        self.expect(Token::Semi)?;
        Ok(())
    }

    fn connection(&mut self, gate: GateId, gate_type: &GateType) -> Result<(), ParseError> {
        self.expect(Token::Dot)?;
        let (pin, pin_loc) = self.ident()?;
        let direction = if gate_type.has_input(&pin) {
            Direction::In
        } else if gate_type.has_output(&pin) {
            Direction::Out
        } else {
            return Err(self.err(
                pin_loc,
                ParseErrorKind::UnknownPin {
                    cell: gate_type.name.clone(),
                    pin,
                },
            ));
        };
        self.expect(Token::LParen)?;
        if self.look.0 == Token::RParen {
            // Explicitly unconnected.
            self.bump()?;
            return Ok(());
        }
        let target = match &self.look.0 {
            Token::Ident(_) | Token::Escaped(_) => ConnTarget::Net(self.ident()?.0),
            Token::Literal(_) => ConnTarget::Constant(self.bit_literal()?),
            _ => return Err(self.unexpected("net name or constant")),
        };
        self.expect(Token::RParen)?;
        let net = match target {
            ConnTarget::Net(name) => self.net(&name, pin_loc)?,
            ConnTarget::Constant(_) if direction == Direction::Out => {
                return Err(self.err(pin_loc, ParseErrorKind::ConstantOnOutput(pin)))
            }
            ConnTarget::Constant(value) => self.shared_constant(value, pin_loc)?,
        };
        self.netlist
            .connect(net, Endpoint { gate, pin, direction })
            .map_err(|e| self.netlist_err(pin_loc, e))
    }
}
