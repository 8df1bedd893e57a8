use std::fmt;

use super::SyntaxError;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Dot,
    Arrow,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(id) => return write!(f, "`{id}`"),
            Tok::Int(v) => return write!(f, "`{v}`"),
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Arrow => "`->`",
            Tok::Assign => "`:=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Eq => "`=`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut id = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    id.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(id), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let value = digits.parse::<u64>().map_err(|_| SyntaxError {
                pos,
                message: format!("integer literal `{digits}` is out of range"),
                expected: Vec::new(),
            })?;
            out.push(Token { tok: Tok::Int(value), pos });
            continue;
        }
        bump!();
        let next = chars.peek().copied();
        let two = |second: char, yes: Tok, no: Tok| -> (Tok, bool) {
            if next == Some(second) {
                (yes, true)
            } else {
                (no, false)
            }
        };
        let (tok, consumed_second) = match c {
            '{' => (Tok::LBrace, false),
            '}' => (Tok::RBrace, false),
            '(' => (Tok::LParen, false),
            ')' => (Tok::RParen, false),
            ';' => (Tok::Semi, false),
            ',' => (Tok::Comma, false),
            '.' => (Tok::Dot, false),
            '+' => (Tok::Plus, false),
            '*' => (Tok::Star, false),
            '/' => (Tok::Slash, false),
            ':' => two('=', Tok::Assign, Tok::Colon),
            '-' => two('>', Tok::Arrow, Tok::Minus),
            '=' => two('=', Tok::EqEq, Tok::Eq),
            '!' => two('=', Tok::NotEq, Tok::Bang),
            '<' => two('=', Tok::Le, Tok::Lt),
            '>' => two('=', Tok::Ge, Tok::Gt),
            '&' if next == Some('&') => (Tok::AndAnd, true),
            '|' if next == Some('|') => (Tok::OrOr, true),
            other => {
                return Err(SyntaxError {
                    pos,
                    message: format!("unexpected character `{other}`"),
                    expected: Vec::new(),
                })
            }
        };
        if consumed_second {
            bump!();
        }
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based_and_skip_comments() {
        let toks = tokenize("# header\n  state A;").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("state".into()));
        assert_eq!(toks[0].pos, Pos { line: 2, column: 3 });
        assert_eq!(toks[2].tok, Tok::Semi);
        assert_eq!(toks[2].pos, Pos { line: 2, column: 10 });
    }

    #[test]
    fn two_character_operators() {
        let toks: Vec<Tok> = tokenize("-> := == != <= >= && || - <")
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect();
        assert_eq!(
            toks,
            [
                Tok::Arrow,
                Tok::Assign,
                Tok::EqEq,
                Tok::NotEq,
                Tok::Le,
                Tok::Ge,
                Tok::AndAnd,
                Tok::OrOr,
                Tok::Minus,
                Tok::Lt,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn stray_character_is_an_error() {
        let err = tokenize("state $").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, column: 7 });
    }
}
