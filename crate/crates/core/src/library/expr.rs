//! Parser for gate function templates.
//!
//! Grammar, loosest binding first: `|`, then `^`, then `&`, then prefix `!`.
//! Parentheses group; `0` and `1` are constants; identifiers name input pins.

use std::collections::BTreeSet;

use crate::boolean::{BooleanFunction, Builder};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown variable `{name}` at column {column}")]
    UnknownVariable { name: String, column: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let column = start + 1;
        let Some(&c) = self.src.get(start) else {
            return Ok((Tok::End, column));
        };
        self.pos += 1;
        let tok = match c {
            b'!' | b'~' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'^' => Tok::Xor,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0' | b'1' if !self.ident_continues() => Tok::Const(c == b'1'),
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while self.ident_continues() {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                Tok::Ident(s.to_string())
            }
            other => {
                return Err(ExprError::Syntax {
                    column,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok((tok, column))
    }

    fn ident_continues(&self) -> bool {
        self.src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_' || *c == b'$')
    }
}

struct Parser<'a, 'b> {
    lexer: Lexer<'a>,
    look: (Tok, usize),
    allowed: &'b BTreeSet<String>,
    builder: Builder,
}

/// Parse `expr` into a function over variables drawn from `allowed`.
pub fn parse_function_template(expr: &str, allowed: &BTreeSet<String>) -> Result<BooleanFunction, ExprError> {
    let mut lexer = Lexer {
        src: expr.as_bytes(),
        pos: 0,
    };
    let look = lexer.next()?;
    let mut p = Parser {
        lexer,
        look,
        allowed,
        builder: Builder::new(allowed.iter().cloned()),
    };
    let root = p.or_expr()?;
    match &p.look {
        (Tok::End, _) => Ok(p.builder.finish(root)),
        (tok, column) => Err(ExprError::Syntax {
            column: *column,
            message: format!("unexpected {tok:?} after expression"),
        }),
    }
}

impl Parser<'_, '_> {
    fn bump(&mut self) -> Result<(), ExprError> {
        self.look = self.lexer.next()?;
        Ok(())
    }

    fn or_expr(&mut self) -> Result<u32, ExprError> {
        let mut lhs = self.xor_expr()?;
        while self.look.0 == Tok::Or {
            self.bump()?;
            let rhs = self.xor_expr()?;
            lhs = self.builder.or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn xor_expr(&mut self) -> Result<u32, ExprError> {
        let mut lhs = self.and_expr()?;
        while self.look.0 == Tok::Xor {
            self.bump()?;
            let rhs = self.and_expr()?;
            lhs = self.builder.xor(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<u32, ExprError> {
        let mut lhs = self.unary()?;
        while self.look.0 == Tok::And {
            self.bump()?;
            let rhs = self.unary()?;
            lhs = self.builder.and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<u32, ExprError> {
        let (tok, column) = self.look.clone();
        match tok {
            Tok::Not => {
                self.bump()?;
                let inner = self.unary()?;
                Ok(self.builder.not(inner))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.or_expr()?;
                if self.look.0 != Tok::RParen {
                    return Err(ExprError::Syntax {
                        column: self.look.1,
                        message: "expected `)`".into(),
                    });
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Const(value) => {
                self.bump()?;
                Ok(Builder::constant(value))
            }
            Tok::Ident(name) => {
                if !self.allowed.contains(&name) {
                    return Err(ExprError::UnknownVariable { name, column });
                }
                self.bump()?;
                Ok(self.builder.var_named(&name).expect("allowed variables registered"))
            }
            other => Err(ExprError::Syntax {
                column,
                message: format!("expected operand, found {other:?}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn table(expr: &str, order: &[&str]) -> Vec<bool> {
        parse_function_template(expr, &vars(order))
            .unwrap()
            .truth_table(order)
            .unwrap()
    }

    #[test]
    fn nand_and_xor() {
        assert_eq!(table("!(A & B)", &["A", "B"]), [true, true, true, false]);
        assert_eq!(table("A ^ B", &["A", "B"]), [false, true, true, false]);
    }

    #[test]
    fn unknown_variable_reports_column() {
        let err = parse_function_template("A & C", &vars(&["A", "B"])).unwrap_err();
        assert_eq!(
            err,
            ExprError::UnknownVariable {
                name: "C".into(),
                column: 5
            }
        );
    }

    #[test]
    fn precedence() {
        // & binds tighter than ^, which binds tighter than |.
        let order = ["a", "b", "c"];
        let f = parse_function_template("a | b ^ c & a", &vars(&order)).unwrap();
        let g = parse_function_template("a | (b ^ (c & a))", &vars(&order)).unwrap();
        assert_eq!(f, g);
        let h = parse_function_template("!a & b", &vars(&order)).unwrap();
        let k = parse_function_template("(!a) & b", &vars(&order)).unwrap();
        assert_eq!(h, k);
    }

    #[test]
    fn constants_and_errors() {
        assert_eq!(table("1 & A", &["A"]), [false, true]);
        assert!(matches!(
            parse_function_template("A &", &vars(&["A"])),
            Err(ExprError::Syntax { column: 4, .. })
        ));
        assert!(matches!(
            parse_function_template("(A", &vars(&["A"])),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(
            parse_function_template("A B", &vars(&["A", "B"])),
            Err(ExprError::Syntax { column: 3, .. })
        ));
    }
}
