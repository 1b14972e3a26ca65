//! Sized Verilog literals used as LUT contents and flip-flop init values.
//!
//! Bit `i` of the decoded vector is the LUT output for the input assignment
//! whose index is `i = Σ pin_j · 2^j` over the LUT's pin order, pin 0 being
//! least significant. In the literal text the rightmost digit holds bit 0:
//!
//! ```
//! use gatescope::hdl::decode_init;
//!
//! // I2 I1 I0 | O  →  000:1 001:0 010:1 011:0, upper half 0
//! let bits = decode_init("8'b00000101", 3).unwrap();
//! assert_eq!(bits, [true, false, true, false, false, false, false, false]);
//! ```

use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum InitError {
    #[error("malformed literal `{literal}`: {reason}")]
    Malformed { literal: String, reason: String },
    #[error("literal `{literal}` has width {width}, expected {expected}")]
    WidthMismatch {
        literal: String,
        width: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Radix {
    Binary,
    Hex,
}

impl Radix {
    fn letter(self) -> char {
        match self {
            Radix::Binary => 'b',
            Radix::Hex => 'h',
        }
    }
}

/// A decoded literal, remembering the radix it was written in so that
/// edits can be written back in the same style.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InitLiteral {
    pub bits: Vec<bool>,
    pub radix: Radix,
}

impl InitLiteral {
    pub fn parse(literal: &str) -> Result<InitLiteral, InitError> {
        parse_literal(literal)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

impl fmt::Display for InitLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&encode_init(&self.bits, self.radix))
    }
}

const MAX_WIDTH: usize = 1 << 16;

fn parse_literal(literal: &str) -> Result<InitLiteral, InitError> {
    let malformed = |reason: &str| InitError::Malformed {
        literal: literal.to_string(),
        reason: reason.to_string(),
    };
    let text = literal.trim();
    let (width_text, rest) = text.split_once('\'').ok_or_else(|| malformed("missing `'`"))?;
    let width: usize = width_text
        .trim()
        .parse()
        .map_err(|_| malformed("width is not a decimal number"))?;
    if width == 0 || width > MAX_WIDTH {
        return Err(malformed("width out of range"));
    }
    let mut chars = rest.chars();
    let radix = match chars.next() {
        Some('b' | 'B') => Radix::Binary,
        Some('h' | 'H') => Radix::Hex,
        _ => return Err(malformed("expected radix `b` or `h`")),
    };
    let digits: Vec<char> = chars.filter(|&c| c != '_').collect();
    if digits.is_empty() {
        return Err(malformed("no digits"));
    }
    let per_digit = match radix {
        Radix::Binary => 1,
        Radix::Hex => 4,
    };
    let mut bits = vec![false; width];
    for (pos, c) in digits.iter().rev().enumerate() {
        let value = c
            .to_digit(if per_digit == 1 { 2 } else { 16 })
            .ok_or_else(|| malformed(&format!("invalid digit `{c}`")))?;
        for k in 0..per_digit {
            let bit = value >> k & 1 == 1;
            let index = pos * per_digit + k;
            if index < width {
                bits[index] = bit;
            } else if bit {
                return Err(malformed("value does not fit the declared width"));
            }
        }
    }
    Ok(InitLiteral { bits, radix })
}

/// Decode a configuration literal for a cell with `input_count` truth-table
/// inputs; the literal must be exactly `2^input_count` bits wide.
pub fn decode_init(literal: &str, input_count: usize) -> Result<Vec<bool>, InitError> {
    Ok(decode_init_literal(literal, input_count)?.bits)
}

pub fn decode_init_literal(literal: &str, input_count: usize) -> Result<InitLiteral, InitError> {
    let parsed = parse_literal(literal)?;
    let expected = 1usize
        .checked_shl(input_count as u32)
        .filter(|&w| w <= MAX_WIDTH)
        .ok_or_else(|| InitError::Malformed {
            literal: literal.to_string(),
            reason: "too many inputs".into(),
        })?;
    if parsed.width() != expected {
        return Err(InitError::WidthMismatch {
            literal: literal.to_string(),
            width: parsed.width(),
            expected,
        });
    }
    Ok(parsed)
}

/// Encode bits (index 0 first) as a sized literal with every digit written.
pub fn encode_init(bits: &[bool], radix: Radix) -> String {
    let width = bits.len();
    let mut out = format!("{width}'{}", radix.letter());
    match radix {
        Radix::Binary => {
            out.extend(bits.iter().rev().map(|&b| if b { '1' } else { '0' }));
        }
        Radix::Hex => {
            let digits = width.div_ceil(4);
            for d in (0..digits).rev() {
                let mut value = 0u32;
                for k in 0..4 {
                    if bits.get(d * 4 + k).copied().unwrap_or(false) {
                        value |= 1 << k;
                    }
                }
                out.push(char::from_digit(value, 16).expect("nibble").to_ascii_uppercase());
            }
        }
    }
    out
}
