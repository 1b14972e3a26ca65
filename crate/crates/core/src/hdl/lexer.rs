use std::fmt;

use serde::Serialize;

/// 1-based position in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SourceLocation {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Ident(String),
    /// Backslash-escaped identifier; never a keyword.
    Escaped(String),
    /// A sized literal such as `8'hAA`, kept verbatim.
    Literal(String),
    Number(String),
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Hash,
    Equals,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) | Token::Escaped(s) => write!(f, "identifier `{s}`"),
            Token::Literal(s) => write!(f, "literal `{s}`"),
            Token::Number(s) => write!(f, "number `{s}`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Semi => f.write_str("`;`"),
            Token::Comma => f.write_str("`,`"),
            Token::Dot => f.write_str("`.`"),
            Token::Hash => f.write_str("`#`"),
            Token::Equals => f.write_str("`=`"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

/// Streaming tokenizer; produces one token at a time without buffering the
/// token stream.
pub(crate) struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lexer {
            src: text.as_bytes(),
            pos: 0,
            line: 1,
            line_start: 0,
        }
    }

    fn location(&self) -> SourceLocation {
        SourceLocation {
            line: self.line,
            column: self.pos - self.line_start + 1,
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn advance(&mut self) -> Option<u8> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.line_start = self.pos;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), (SourceLocation, String)> {
        loop {
            match (self.peek(0), self.peek(1)) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    self.advance();
                }
                (Some(b'/'), Some(b'/')) => {
                    while let Some(c) = self.peek(0) {
                        if c == b'\n' {
                            break;
                        }
                        self.advance();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let start = self.location();
                    self.advance();
                    self.advance();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some(b'*'), Some(b'/')) => {
                                self.advance();
                                self.advance();
                                break;
                            }
                            (Some(_), _) => {
                                self.advance();
                            }
                            (None, _) => return Err((start, "unterminated block comment".into())),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    pub(crate) fn next_token(&mut self) -> Result<(Token, SourceLocation), (SourceLocation, String)> {
        self.skip_trivia()?;
        let loc = self.location();
        let Some(c) = self.advance() else {
            return Ok((Token::Eof, loc));
        };
        let tok = match c {
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b';' => Token::Semi,
            b',' => Token::Comma,
            b'.' => Token::Dot,
            b'#' => Token::Hash,
            b'=' => Token::Equals,
            b'\\' => {
                let start = self.pos;
                while self.peek(0).is_some_and(|c| !c.is_ascii_whitespace()) {
                    self.advance();
                }
                if self.pos == start {
                    return Err((loc, "empty escaped identifier".into()));
                }
                Token::Escaped(self.slice(start, self.pos)?)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos - 1;
                while self
                    .peek(0)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'$')
                {
                    self.advance();
                }
                Token::Ident(self.slice(start, self.pos)?)
            }
            c if c.is_ascii_digit() || c == b'\'' => {
                let start = self.pos - 1;
                while self.peek(0).is_some_and(|c| c.is_ascii_digit() || c == b'_') {
                    self.advance();
                }
                if c == b'\'' || self.peek(0) == Some(b'\'') {
                    if c != b'\'' {
                        self.advance();
                    }
                    match self.peek(0) {
                        Some(b'b' | b'B' | b'h' | b'H' | b'd' | b'D' | b'o' | b'O') => {
                            self.advance();
                        }
                        _ => return Err((loc, "expected radix after `'`".into())),
                    }
                    while self.peek(0).is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                        self.advance();
                    }
                    Token::Literal(self.slice(start, self.pos)?)
                } else {
                    Token::Number(self.slice(start, self.pos)?)
                }
            }
            other => {
                return Err((loc, format!("unexpected character `{}`", other as char)));
            }
        };
        Ok((tok, loc))
    }

    fn slice(&self, start: usize, end: usize) -> Result<String, (SourceLocation, String)> {
        std::str::from_utf8(&self.src[start..end])
            .map(str::to_string)
            .map_err(|_| (self.location(), "invalid UTF-8 in identifier".into()))
    }
}
