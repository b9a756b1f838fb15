//! Tokenizer shared by the host-language and controller-language parsers.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// Unsigned decimal digits; sign handling belongs to the parsers.
    Digits(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Digits(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

// Longest symbols first so `:=` wins over `:`.
const SYMBOLS: &[&str] = &[
    ":=", "==", "=", "<", "+", "-", ";", ",", "(", ")", "{", "}", "[", "]", "@", ":", "/",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Digits(src[start..i].to_string())
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            i += sym.len();
            Tok::Sym(sym)
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(LexError {
                line,
                col,
                message: format!("unexpected character {ch:?}"),
            });
        };
        out.push(Token {
            tok,
            line,
            col,
            start,
            end: i,
        });
        col += i - start;
    }
    Ok(out)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses an optionally negated run of decimal digits into an `i64`.
pub(crate) fn parse_int(negative: bool, digits: &str) -> Option<i64> {
    if negative {
        format!("-{digits}").parse().ok()
    } else {
        digits.parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_and_positions() {
        let toks = tokenize("x := 1;\n  y==2 // note\n@L:{}").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("x".into()),
                Tok::Sym(":="),
                Tok::Digits("1".into()),
                Tok::Sym(";"),
                Tok::Ident("y".into()),
                Tok::Sym("=="),
                Tok::Digits("2".into()),
                Tok::Sym("@"),
                Tok::Ident("L".into()),
                Tok::Sym(":"),
                Tok::Sym("{"),
                Tok::Sym("}"),
            ]
        );
        assert_eq!((toks[4].line, toks[4].col), (2, 3));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("a $ b").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }

    #[test]
    fn int_edges() {
        assert_eq!(parse_int(true, "9223372036854775808"), Some(i64::MIN));
        assert_eq!(parse_int(false, "9223372036854775808"), None);
    }
}
