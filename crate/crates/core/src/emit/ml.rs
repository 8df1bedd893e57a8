//! The CPN ML fragment used in inscriptions, guards and initial markings.
//!
//! Enumeration constants are global constructors in CPN ML, so two colour
//! sets may not share one. Constants are therefore written as
//! `<colour>_<value>`; printing is type-directed and parsing strips the prefix.

use std::fmt::Write as _;

use thiserror::Error;

use crate::cpn::{ColourSet, ColouredNet, Expr, Multiset, Value};
use crate::smd::CmpOp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at offset {offset}: {message}")]
pub struct MlError {
    pub offset: usize,
    pub message: String,
}

pub fn mangle(colour: &str, value: &str) -> String {
    format!("{colour}_{value}")
}

fn op_text(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "=",
        CmpOp::Ne => "<>",
        CmpOp::Lt => "<",
        CmpOp::Le => "<=",
        CmpOp::Gt => ">",
        CmpOp::Ge => ">=",
    }
}

const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_CMP: u8 = 3;
const P_ADD: u8 = 4;
const P_MUL: u8 = 5;
const P_ATOM: u8 = 7;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Or(..) => P_OR,
        Expr::And(..) => P_AND,
        Expr::Cmp(..) => P_CMP,
        Expr::Add(..) | Expr::Sub(..) => P_ADD,
        Expr::Mul(..) => P_MUL,
        _ => P_ATOM,
    }
}

/// Type-directed printer over the declarations of one net.
pub struct Printer<'n> {
    net: &'n ColouredNet,
}

impl<'n> Printer<'n> {
    pub fn new(net: &'n ColouredNet) -> Self {
        Printer { net }
    }

    fn components(&self, colour: Option<&str>, n: usize) -> Vec<Option<&'n str>> {
        match colour.and_then(|c| self.net.colour(c)) {
            Some(ColourSet::Product(cs)) if cs.len() == n => cs.iter().map(|c| Some(c.as_str())).collect(),
            _ => vec![None; n],
        }
    }

    fn constant(&self, value: &str, colour: Option<&str>) -> String {
        match colour.and_then(|c| self.net.colour(c).map(|s| (c, s))) {
            Some((c, ColourSet::Enum(_))) => mangle(c, value),
            _ => value.to_string(),
        }
    }

    fn var_colour(&self, e: &Expr) -> Option<&'n str> {
        match e {
            Expr::Var(v) => self.net.variable_colour(v),
            _ => None,
        }
    }

    pub fn value(&self, v: &Value, colour: Option<&str>) -> String {
        match v {
            Value::Unit => "()".into(),
            Value::Int(n) if *n < 0 => format!("~{}", n.unsigned_abs()),
            Value::Int(n) => n.to_string(),
            Value::Enum(c) => self.constant(c, colour),
            Value::Tuple(vs) => {
                let cs = self.components(colour, vs.len());
                let items: Vec<String> = vs.iter().zip(cs).map(|(v, c)| self.value(v, c)).collect();
                format!("({})", items.join(","))
            }
        }
    }

    /// `1`a++2`b`; the empty multiset prints as the empty string.
    pub fn multiset(&self, m: &Multiset, colour: Option<&str>) -> String {
        let parts: Vec<String> = m.iter().map(|(v, n)| format!("{n}`{}", self.value(v, colour))).collect();
        parts.join("++")
    }

    pub fn expr(&self, e: &Expr, colour: Option<&str>) -> String {
        let mut out = String::new();
        self.write(&mut out, e, colour, 0);
        out
    }

    fn write(&self, out: &mut String, e: &Expr, colour: Option<&str>, min: u8) {
        let p = prec(e);
        let paren = p < min;
        if paren {
            out.push('(');
        }
        let binary = |out: &mut String, a: &Expr, op: &str, b: &Expr, ctx: Option<&str>, lp: u8, rp: u8| {
            self.write(out, a, ctx, lp);
            let _ = write!(out, " {op} ");
            self.write(out, b, ctx, rp);
        };
        match e {
            Expr::Unit => out.push_str("()"),
            Expr::Int(n) if *n < 0 => {
                let _ = write!(out, "~{}", n.unsigned_abs());
            }
            Expr::Int(n) => {
                let _ = write!(out, "{n}");
            }
            Expr::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Expr::Const(c) => out.push_str(&self.constant(c, colour)),
            Expr::Var(v) => out.push_str(v),
            Expr::Tuple(items) => {
                let cs = self.components(colour, items.len());
                out.push('(');
                for (i, (item, c)) in items.iter().zip(cs).enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.write(out, item, c, 0);
                }
                out.push(')');
            }
            Expr::Neg(a) => {
                out.push('~');
                // `~3` would read back as a literal, so literals keep their parentheses.
                let min = if matches!(**a, Expr::Int(_)) { u8::MAX } else { P_ATOM };
                self.write(out, a, None, min);
            }
            Expr::Not(a) => {
                out.push_str("not ");
                self.write(out, a, None, u8::MAX);
            }
            Expr::Add(a, b) => binary(out, a, "+", b, None, P_ADD, P_ADD + 1),
            Expr::Sub(a, b) => binary(out, a, "-", b, None, P_ADD, P_ADD + 1),
            Expr::Mul(a, b) => binary(out, a, "*", b, None, P_MUL, P_MUL + 1),
            Expr::Cmp(op, a, b) => {
                let ctx = self.var_colour(a).or_else(|| self.var_colour(b));
                binary(out, a, op_text(*op), b, ctx, P_CMP + 1, P_CMP + 1)
            }
            Expr::And(a, b) => binary(out, a, "andalso", b, None, P_AND, P_AND + 1),
            Expr::Or(a, b) => binary(out, a, "orelse", b, None, P_OR, P_OR + 1),
        }
        if paren {
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 15] = [
    "++", "<>", "<=", ">=", "(", ")", ",", "~", "+", "-", "*", "=", "<", ">", "`",
];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, MlError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i].parse().map_err(|_| MlError {
                offset: start,
                message: "integer literal out of range".into(),
            })?;
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if let Some(s) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            out.push((i, Tok::Sym(s)));
            i += s.len();
        } else {
            return Err(MlError {
                offset: i,
                message: format!("unexpected character `{}`", text[i..].chars().next().unwrap_or('?')),
            });
        }
    }
    Ok(out)
}

/// Recursive-descent reader for the fragment [`Printer`] writes.
pub struct Reader<'n> {
    net: &'n ColouredNet,
}

struct Cursor<'a, 'n> {
    reader: &'a Reader<'n>,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl<'n> Reader<'n> {
    /// `net` supplies colour and variable declarations for name resolution.
    pub fn new(net: &'n ColouredNet) -> Self {
        Reader { net }
    }

    pub fn expr(&self, text: &str, colour: Option<&str>) -> Result<Expr, MlError> {
        let mut c = self.cursor(text)?;
        let e = c.or(colour)?;
        c.finish()?;
        Ok(e)
    }

    pub fn multiset(&self, text: &str, colour: Option<&str>) -> Result<Multiset, MlError> {
        let mut m = Multiset::new();
        if text.trim().is_empty() {
            return Ok(m);
        }
        let mut c = self.cursor(text)?;
        loop {
            let at = c.offset();
            let n = match c.next() {
                Some(Tok::Int(n)) => n as usize,
                _ => return Err(c.error_at(at, "expected a multiplicity")),
            };
            c.expect("`")?;
            let at = c.offset();
            let e = c.unary(colour)?;
            let v = e
                .eval_value(&Default::default())
                .map_err(|err| c.error_at(at, &err.to_string()))?;
            m.add(v, n);
            if !c.eat("++") {
                break;
            }
        }
        c.finish()?;
        Ok(m)
    }

    fn cursor(&self, text: &str) -> Result<Cursor<'_, 'n>, MlError> {
        Ok(Cursor {
            reader: self,
            toks: lex(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn resolve(&self, name: &str, colour: Option<&str>) -> Option<Expr> {
        match name {
            "true" => return Some(Expr::Bool(true)),
            "false" => return Some(Expr::Bool(false)),
            _ => {}
        }
        if self.net.variables.iter().any(|v| v.name == name) {
            return Some(Expr::Var(name.to_string()));
        }
        let strip = |c: &str, set: &ColourSet| match set {
            ColourSet::Enum(values) => name
                .strip_prefix(c)
                .and_then(|r| r.strip_prefix('_'))
                .filter(|v| values.iter().any(|x| x == v))
                .map(|v| Expr::Const(v.to_string())),
            _ => None,
        };
        if let Some(c) = colour {
            if let Some(set) = self.net.colour(c) {
                return strip(c, set);
            }
        }
        self.net.colours.iter().find_map(|d| strip(&d.name, &d.set))
    }
}

impl<'a, 'n> Cursor<'a, 'n> {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn error_at(&self, offset: usize, message: &str) -> MlError {
        MlError {
            offset,
            message: message.to_string(),
        }
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), MlError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error_at(self.offset(), &format!("expected `{sym}`")))
        }
    }

    fn finish(&self) -> Result<(), MlError> {
        if self.pos < self.toks.len() {
            Err(self.error_at(self.offset(), "unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn or(&mut self, colour: Option<&str>) -> Result<Expr, MlError> {
        let mut e = self.and(colour)?;
        while self.eat_word("orelse") {
            e = Expr::Or(Box::new(e), Box::new(self.and(None)?));
        }
        Ok(e)
    }

    fn and(&mut self, colour: Option<&str>) -> Result<Expr, MlError> {
        let mut e = self.cmp(colour)?;
        while self.eat_word("andalso") {
            e = Expr::And(Box::new(e), Box::new(self.cmp(None)?));
        }
        Ok(e)
    }

    fn cmp(&mut self, colour: Option<&str>) -> Result<Expr, MlError> {
        let lhs = self.sum(colour)?;
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CmpOp::Eq,
            Some(Tok::Sym("<>")) => CmpOp::Ne,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let ctx = match &lhs {
            Expr::Var(v) => self.reader.net.variable_colour(v),
            _ => None,
        };
        let rhs = self.sum(ctx)?;
        Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self, colour: Option<&str>) -> Result<Expr, MlError> {
        let mut e = self.product(colour)?;
        loop {
            if self.eat("+") {
                e = Expr::Add(Box::new(e), Box::new(self.product(None)?));
            } else if self.eat("-") {
                e = Expr::Sub(Box::new(e), Box::new(self.product(None)?));
            } else {
                return Ok(e);
            }
        }
    }

    fn product(&mut self, colour: Option<&str>) -> Result<Expr, MlError> {
        let mut e = self.unary(colour)?;
        while self.eat("*") {
            e = Expr::Mul(Box::new(e), Box::new(self.unary(None)?));
        }
        Ok(e)
    }

    fn unary(&mut self, colour: Option<&str>) -> Result<Expr, MlError> {
        if self.eat("~") {
            if let Some(Tok::Int(n)) = self.peek().cloned() {
                let at = self.offset();
                self.pos += 1;
                let v = i64::try_from(-(n as i128)).map_err(|_| self.error_at(at, "integer literal out of range"))?;
                return Ok(Expr::Int(v));
            }
            return Ok(Expr::Neg(Box::new(self.unary(None)?)));
        }
        if self.eat_word("not") {
            return Ok(Expr::Not(Box::new(self.unary(None)?)));
        }
        self.atom(colour)
    }

    fn atom(&mut self, colour: Option<&str>) -> Result<Expr, MlError> {
        let at = self.offset();
        match self.next() {
            Some(Tok::Int(n)) => i64::try_from(n)
                .map(Expr::Int)
                .map_err(|_| self.error_at(at, "integer literal out of range")),
            Some(Tok::Ident(name)) => self
                .reader
                .resolve(&name, colour)
                .ok_or_else(|| self.error_at(at, &format!("unknown identifier `{name}`"))),
            Some(Tok::Sym("(")) => {
                if self.eat(")") {
                    return Ok(Expr::Unit);
                }
                let components: Vec<Option<String>> = match colour.and_then(|c| self.reader.net.colour(c)) {
                    Some(ColourSet::Product(cs)) => cs.iter().cloned().map(Some).collect(),
                    _ => Vec::new(),
                };
                let ctx = |i: usize| components.get(i).cloned().flatten();
                let first_ctx = if components.is_empty() { colour.map(str::to_string) } else { ctx(0) };
                let first = self.or(first_ctx.as_deref())?;
                if self.eat(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat(",") {
                    let c = ctx(items.len());
                    items.push(self.or(c.as_deref())?);
                }
                self.expect(")")?;
                Ok(Expr::Tuple(items))
            }
            _ => Err(self.error_at(at, "expected an expression")),
        }
    }
}
