use crate::error::{ParseError, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub const KEYWORDS: [&str; 3] = ["beta", "mu", "ret"];

const SYMBOLS: [&str; 16] = [
    "<=", ">=", ".", "(", ")", "?", "{", "}", ",", "+", "[", "]", ";", "*", "/", "=",
];

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '#' | '\'')
}

/// True when `name` lexes as a single identifier that is not a keyword.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c))
        && chars.all(is_ident_char)
        && !KEYWORDS.contains(&name)
}

pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if text[i..].starts_with("//") {
            while i < text.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if is_ident_start(c) {
            let mut end = i;
            for ch in text[i..].chars() {
                if !is_ident_char(ch) {
                    break;
                }
                end += ch.len_utf8();
            }
            out.push(Token {
                tok: Tok::Ident(text[start..end].to_string()),
                span: SourceSpan::new(start, end),
            });
            i = end;
            continue;
        }
        if c.is_ascii_digit() {
            let mut end = i;
            while end < text.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end + 1 < text.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
                end += 1;
                while end < text.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            out.push(Token {
                tok: Tok::Num(text[start..end].to_string()),
                span: SourceSpan::new(start, end),
            });
            i = end;
            continue;
        }
        if c == '.'
            && i + 1 < text.len()
            && bytes[i + 1].is_ascii_digit()
            && after_open_bracket(&out)
        {
            let mut end = i + 1;
            while end < text.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            out.push(Token {
                tok: Tok::Num(text[start..end].to_string()),
                span: SourceSpan::new(start, end),
            });
            i = end;
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    span: SourceSpan::new(i, i + s.len()),
                });
                i += s.len();
            }
            None => {
                return Err(ParseError::new(
                    format!("unexpected character `{c}`"),
                    SourceSpan::new(i, i + c.len_utf8()),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::point(text.len()),
    });
    Ok(out)
}

/// `.5` is only a number directly inside `[`.
fn after_open_bracket(out: &[Token]) -> bool {
    matches!(
        out.last(),
        Some(Token {
            tok: Tok::Sym("["),
            ..
        })
    )
}
