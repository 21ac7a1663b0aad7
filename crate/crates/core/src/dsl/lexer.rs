use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    Date(String),
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Ne,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s) | Tok::Date(s) => format!("`{s}`"),
            Tok::Colon => "`:`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Eof => "end of line".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    /// 1-based column of the token's first character.
    pub column: usize,
}

/// Tokenizes one source line. A `#` starts a comment running to the end of
/// the line. The returned stream always ends with `Eof`.
pub(crate) fn lex_line(line_no: usize, text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), column });
            continue;
        }
        if c.is_ascii_digit() {
            if let Some(len) = date_len(&chars[i..]) {
                out.push(Spanned { tok: Tok::Date(chars[i..i + len].iter().collect()), column });
                i += len;
                continue;
            }
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i == frac_start {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        column: i,
                        expected: "digit after decimal point".into(),
                        found: chars.get(i).map_or("end of line".into(), |c| format!("`{c}`")),
                    });
                }
            }
            out.push(Spanned { tok: Tok::Number(chars[start..i].iter().collect()), column });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            (':', _) => (Tok::Colon, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            _ => {
                return Err(ParseError::Syntax {
                    line: line_no,
                    column,
                    expected: "token".into(),
                    found: format!("`{c}`"),
                })
            }
        };
        out.push(Spanned { tok, column });
        i += len;
    }
    out.push(Spanned { tok: Tok::Eof, column: chars.len() + 1 });
    Ok(out)
}

/// Length of a `YYYY-MM-DD` prefix, if present and not followed by more digits.
fn date_len(chars: &[char]) -> Option<usize> {
    let shape = "dddd-dd-dd";
    if chars.len() < shape.len() {
        return None;
    }
    let ok = shape.chars().zip(chars).all(|(s, c)| match s {
        'd' => c.is_ascii_digit(),
        _ => *c == s,
    });
    let boundary = chars.get(shape.len()).is_none_or(|c| !c.is_ascii_alphanumeric() && *c != '.');
    (ok && boundary).then_some(shape.len())
}
