use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    /// Unsigned integer literal; kept wide so `-9223372036854775808` can fold.
    Int(u128),
    Real(f64),
    Str(String),
    Ident(String),
    True,
    False,
    And,
    Or,
    Not,
    Plus,
    Minus,
    Star,
    Slash,
    SlashSlash,
    Percent,
    StarStar,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    LParen,
    RParen,
    Eof,
}

impl TokenKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokenKind::Int(v) => format!("integer `{v}`"),
            TokenKind::Real(v) => format!("number `{v:?}`"),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::True => "`True`".to_string(),
            TokenKind::False => "`False`".to_string(),
            TokenKind::And => "`and`".to_string(),
            TokenKind::Or => "`or`".to_string(),
            TokenKind::Not => "`not`".to_string(),
            TokenKind::Plus => "`+`".to_string(),
            TokenKind::Minus => "`-`".to_string(),
            TokenKind::Star => "`*`".to_string(),
            TokenKind::Slash => "`/`".to_string(),
            TokenKind::SlashSlash => "`//`".to_string(),
            TokenKind::Percent => "`%`".to_string(),
            TokenKind::StarStar => "`**`".to_string(),
            TokenKind::Lt => "`<`".to_string(),
            TokenKind::Le => "`<=`".to_string(),
            TokenKind::Gt => "`>`".to_string(),
            TokenKind::Ge => "`>=`".to_string(),
            TokenKind::EqEq => "`==`".to_string(),
            TokenKind::Ne => "`!=`".to_string(),
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    /// Byte offset of the first character.
    pub offset: usize,
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "lambda", "if", "else", "in", "is", "for", "None", "def", "return", "yield", "await",
];

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &[u8]| bytes[i..].starts_with(s);
        let kind = if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let (kind, len) = lex_number(&source[i..], start)?;
            i += len;
            kind
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &source[start..i];
            match word {
                "True" => TokenKind::True,
                "False" => TokenKind::False,
                "and" => TokenKind::And,
                "or" => TokenKind::Or,
                "not" => TokenKind::Not,
                w if UNSUPPORTED_KEYWORDS.contains(&w) => {
                    return Err(ParseError::Unsupported {
                        offset: start,
                        what: format!("keyword `{w}`"),
                    })
                }
                w => TokenKind::Ident(w.to_string()),
            }
        } else if c == b'\'' || c == b'"' {
            let (text, len) = lex_string(&source[i..], start)?;
            i += len;
            TokenKind::Str(text)
        } else {
            let (kind, len) = if two(b"**") {
                (TokenKind::StarStar, 2)
            } else if two(b"//") {
                (TokenKind::SlashSlash, 2)
            } else if two(b"<=") {
                (TokenKind::Le, 2)
            } else if two(b">=") {
                (TokenKind::Ge, 2)
            } else if two(b"==") {
                (TokenKind::EqEq, 2)
            } else if two(b"!=") {
                (TokenKind::Ne, 2)
            } else if two(b"<<") || two(b">>") {
                return Err(ParseError::Unsupported {
                    offset: start,
                    what: "bit shift".to_string(),
                });
            } else {
                let k = match c {
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'*' => TokenKind::Star,
                    b'/' => TokenKind::Slash,
                    b'%' => TokenKind::Percent,
                    b'<' => TokenKind::Lt,
                    b'>' => TokenKind::Gt,
                    b'(' => TokenKind::LParen,
                    b')' => TokenKind::RParen,
                    b'[' | b']' => {
                        return Err(ParseError::Unsupported {
                            offset: start,
                            what: "indexing".to_string(),
                        })
                    }
                    b'&' | b'|' | b'^' | b'~' => {
                        return Err(ParseError::Unsupported {
                            offset: start,
                            what: format!("bitwise operator `{}`", c as char),
                        })
                    }
                    b',' | b'.' | b':' | b'=' | b'{' | b'}' | b'@' => {
                        return Err(ParseError::Unsupported {
                            offset: start,
                            what: format!("`{}`", c as char),
                        })
                    }
                    _ => {
                        let ch = source[start..].chars().next().unwrap_or('?');
                        return Err(ParseError::Syntax {
                            offset: start,
                            expected: "an expression token".to_string(),
                            found: format!("character `{ch}`"),
                        });
                    }
                };
                (k, 1)
            };
            i += len;
            kind
        };
        tokens.push(Token { kind, offset: start });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        offset: source.len(),
    });
    Ok(tokens)
}

fn lex_number(s: &str, offset: usize) -> Result<(TokenKind, usize), ParseError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut is_real = false;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'_') {
        i += 1;
    }
    if i < b.len() && b[i] == b'.' {
        is_real = true;
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            is_real = true;
            i = j;
        }
    }
    if i < b.len() && (b[i].is_ascii_alphabetic() || b[i] == b'_') {
        return Err(ParseError::Syntax {
            offset: offset + i,
            expected: "operator or end of number".to_string(),
            found: format!("`{}`", b[i] as char),
        });
    }
    let text: String = s[..i].chars().filter(|&c| c != '_').collect();
    if is_real {
        let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset,
            expected: "a number".to_string(),
            found: format!("`{}`", &s[..i]),
        })?;
        if !v.is_finite() {
            return Err(ParseError::Syntax {
                offset,
                expected: "a finite number".to_string(),
                found: format!("`{}`", &s[..i]),
            });
        }
        Ok((TokenKind::Real(v), i))
    } else {
        let v: u128 = text.parse().map_err(|_| ParseError::Syntax {
            offset,
            expected: "an integer that fits in 64 bits".to_string(),
            found: format!("`{}`", &s[..i]),
        })?;
        Ok((TokenKind::Int(v), i))
    }
}

fn lex_string(s: &str, offset: usize) -> Result<(String, usize), ParseError> {
    let mut chars = s.char_indices();
    let (_, quote) = chars.next().expect("caller checked the quote");
    let mut out = String::new();
    while let Some((i, c)) = chars.next() {
        match c {
            c if c == quote => return Ok((out, i + c.len_utf8())),
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, e @ ('\\' | '\'' | '"'))) => out.push(e),
                Some((j, e)) => {
                    return Err(ParseError::Syntax {
                        offset: offset + j,
                        expected: "a valid escape sequence".to_string(),
                        found: format!("`\\{e}`"),
                    })
                }
                None => break,
            },
            c => out.push(c),
        }
    }
    Err(ParseError::Syntax {
        offset: offset + s.len(),
        expected: format!("closing `{quote}`"),
        found: "end of input".to_string(),
    })
}
