use super::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    /// One of `[ ] ( ) { } ,`.
    Sym(char),
    /// One of `>= > <= <`.
    Cmp(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// The non-empty lines of a source file, tokenised.
#[derive(Debug)]
pub(crate) struct Line {
    pub number: usize,
    pub tokens: Vec<Token>,
    pub len: usize,
}

impl Line {
    pub fn span(&self) -> Span {
        let first = self.tokens.first().map_or(1, |t| t.span.col);
        Span { line: self.number, col: first, end_line: self.number, end_col: self.len + 1 }
    }
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\'')
}

/// Splits `src` into lines of tokens. `#` starts a comment.
pub(crate) fn lex(src: &str) -> Result<Vec<Line>, Vec<Diagnostic>> {
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let number = i + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut tokens = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            let col = k + 1;
            let span = |end: usize| Span { line: number, col, end_line: number, end_col: end + 1 };
            if c.is_whitespace() {
                k += 1;
            } else if c == '#' {
                break;
            } else if c == '"' {
                let mut s = String::new();
                let mut j = k + 1;
                let mut closed = false;
                while j < chars.len() {
                    match chars[j] {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' if j + 1 < chars.len() => {
                            s.push(chars[j + 1]);
                            j += 2;
                        }
                        ch => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                if !closed {
                    errors.push(Diagnostic::error("unterminated string").at(span(chars.len())));
                    break;
                }
                tokens.push(Token { tok: Tok::Str(s), span: span(j + 1) });
                k = j + 1;
            } else if matches!(c, '[' | ']' | '(' | ')' | '{' | '}' | ',') {
                tokens.push(Token { tok: Tok::Sym(c), span: span(k + 1) });
                k += 1;
            } else if matches!(c, '<' | '>') {
                let eq = chars.get(k + 1) == Some(&'=');
                let op = match (c, eq) {
                    ('>', true) => ">=",
                    ('>', false) => ">",
                    ('<', true) => "<=",
                    _ => "<",
                };
                let end = k + 1 + eq as usize;
                tokens.push(Token { tok: Tok::Cmp(op), span: span(end) });
                k = end;
            } else if c.is_ascii_digit() || ((c == '-' || c == '+' || c == '.') && chars.get(k + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.')) {
                let mut j = k + 1;
                while j < chars.len() {
                    let d = chars[j];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[j - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let text: String = chars[k..j].iter().collect();
                match text.parse::<f64>() {
                    Ok(x) if x.is_finite() => {
                        tokens.push(Token { tok: Tok::Num(crate::numeric::round_sig(x)), span: span(j) })
                    }
                    _ => errors.push(Diagnostic::error(format!("malformed number `{text}`")).at(span(j))),
                }
                k = j;
            } else if ident_start(c) {
                let mut j = k + 1;
                while j < chars.len() && ident_char(chars[j]) {
                    j += 1;
                }
                tokens.push(Token { tok: Tok::Ident(chars[k..j].iter().collect()), span: span(j) });
                k = j;
            } else {
                errors.push(Diagnostic::error(format!("unexpected character `{c}`")).at(span(k + 1)));
                k += 1;
            }
        }
        if !tokens.is_empty() {
            lines.push(Line { number, tokens, len: chars.len() });
        }
    }
    if errors.is_empty() {
        Ok(lines)
    } else {
        Err(errors)
    }
}
