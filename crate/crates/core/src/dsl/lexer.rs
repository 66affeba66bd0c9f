use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Num(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eq,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Eq => "`=`".into(),
        }
    }

    fn continues_line(&self) -> bool {
        matches!(self, Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Caret | Tok::Eq | Tok::Comma)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    pub start: usize,
    pub end: usize,
}

/// Splits source text into tokens. Newlines are significant except inside
/// brackets and right after a binary operator or comma; `#` starts a comment.
pub(crate) fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out: Vec<Token> = Vec::new();
    let mut depth = 0usize;
    let mut line = 1;
    let mut line_start = 0;
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let col = src[line_start..i].chars().count() + 1;
        let single = |tok| Token { tok, line, col, start: i, end: i + c.len_utf8() };
        match c {
            '\n' => {
                chars.next();
                let continued = out.last().is_some_and(|t| t.tok.continues_line() || t.tok == Tok::Newline);
                if depth == 0 && !continued && !out.is_empty() {
                    out.push(single(Tok::Newline));
                }
                line += 1;
                line_start = i + 1;
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                    chars.next();
                }
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut end = i;
                let mut prev = ' ';
                while let Some(&(j, d)) = chars.peek() {
                    let exp_sign = (d == '-' || d == '+') && (prev == 'e' || prev == 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        end = j + d.len_utf8();
                        prev = d;
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Num(src[i..end].to_string()), line, col, start: i, end });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '\'' {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Ident(src[i..end].to_string()), line, col, start: i, end });
            }
            _ => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '=' => Tok::Eq,
                    other => return Err(ParseError::syntax(line, col, format!("unexpected character `{other}`"))),
                };
                match tok {
                    Tok::LParen | Tok::LBrack | Tok::LBrace => depth += 1,
                    Tok::RParen | Tok::RBrack | Tok::RBrace => depth = depth.saturating_sub(1),
                    _ => {}
                }
                out.push(single(tok));
                chars.next();
            }
        }
    }
    let col = src[line_start..].chars().count() + 1;
    out.push(Token { tok: Tok::Eof, line, col, start: src.len(), end: src.len() });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn continuation_rules() {
        assert_eq!(
            toks("a +\n b\nc"),
            vec![
                Tok::Ident("a".into()),
                Tok::Plus,
                Tok::Ident("b".into()),
                Tok::Newline,
                Tok::Ident("c".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("f(\n1)  # note\n"), toks("f(1)\n"));
    }

    #[test]
    fn numbers_and_positions() {
        let t = lex("x = 2.5e-3").unwrap();
        assert_eq!(t[2].tok, Tok::Num("2.5e-3".into()));
        assert_eq!((t[2].line, t[2].col), (1, 5));
        let err = lex("x $").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
