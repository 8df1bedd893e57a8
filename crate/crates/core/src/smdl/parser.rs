use std::collections::HashMap;

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{SmdlDocument, SyntaxError};
use crate::smd::{
    final_state_name, Behaviour, BoolExpr, CmpOp, ElementRef, IntExpr, StateKind, StateMachine,
    StateNode, Target, TransitionDef, VariableDecl,
};

const KEYWORDS: &[&str] = &[
    "machine", "var", "int", "state", "final", "trans", "initial", "history", "entry", "exit",
    "do", "on", "if", "true", "false",
];

/// Untyped expression; guards and assignments are typed after parsing.
#[derive(Debug)]
enum Raw {
    Int(i64),
    Var(String),
    Bool(bool),
    Neg(Box<Spanned>),
    Arith(ArithOp, Box<Spanned>, Box<Spanned>),
    Cmp(CmpOp, Box<Spanned>, Box<Spanned>),
    Not(Box<Spanned>),
    And(Box<Spanned>, Box<Spanned>),
    Or(Box<Spanned>, Box<Spanned>),
}

#[derive(Debug, Clone, Copy)]
enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug)]
struct Spanned {
    raw: Raw,
    pos: Pos,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    spans: HashMap<ElementRef, Pos>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(SyntaxError {
            pos: self.pos(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.advance().pos)
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(id) if id == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.advance().pos)
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek() {
            Tok::Ident(id) if !KEYWORDS.contains(&id.as_str()) => {
                let id = id.clone();
                let pos = self.advance().pos;
                Ok((id, pos))
            }
            _ => self.error(&[what]),
        }
    }

    fn machine(&mut self) -> PResult<StateMachine> {
        self.expect_keyword("machine")?;
        let (name, pos) = self.ident("machine name")?;
        self.spans.insert(ElementRef::Machine, pos);
        self.expect(Tok::LBrace)?;
        let mut m = StateMachine::new(name);
        loop {
            if self.is_keyword("var") {
                let v = self.var()?;
                m.variables.push(v);
            } else if self.is_keyword("state") {
                self.state(None, &mut m.states)?;
            } else if self.is_keyword("final") {
                self.final_state(None, &mut m.states)?;
            } else if self.is_keyword("trans") {
                let t = self.transition()?;
                m.transitions.push(t);
            } else if *self.peek() == Tok::RBrace {
                self.advance();
                break;
            } else {
                return self.error(&["`var`", "`state`", "`final`", "`trans`", "`}`"]);
            }
        }
        self.expect(Tok::Eof)?;
        Ok(m)
    }

    fn var(&mut self) -> PResult<VariableDecl> {
        self.expect_keyword("var")?;
        let (name, pos) = self.ident("variable name")?;
        self.spans.entry(ElementRef::Variable(name.clone())).or_insert(pos);
        self.expect(Tok::Colon)?;
        self.expect_keyword("int")?;
        self.expect(Tok::Eq)?;
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.advance();
        }
        let value = self.int_literal(negative)?;
        self.expect(Tok::Semi)?;
        Ok(VariableDecl {
            name,
            initial: value,
        })
    }

    fn int_literal(&mut self, negative: bool) -> PResult<i64> {
        match *self.peek() {
            Tok::Int(v) => {
                let pos = self.pos();
                self.advance();
                let value = if negative {
                    0i64.checked_sub_unsigned(v)
                } else {
                    i64::try_from(v).ok()
                };
                value.ok_or(SyntaxError {
                    pos,
                    message: "integer literal out of range".into(),
                    expected: Vec::new(),
                })
            }
            _ => self.error(&["integer literal"]),
        }
    }

    fn state(&mut self, parent: Option<&str>, out: &mut Vec<StateNode>) -> PResult<()> {
        self.expect_keyword("state")?;
        let (name, pos) = self.ident("state name")?;
        self.spans.entry(ElementRef::State(name.clone())).or_insert(pos);
        let mut node = StateNode::simple(name.clone());
        node.parent = parent.map(str::to_string);
        loop {
            let kw_pos = self.pos();
            let duplicate = |what: &str| SyntaxError {
                pos: kw_pos,
                message: format!("`{what}` given twice"),
                expected: Vec::new(),
            };
            if self.eat_keyword("initial") {
                if node.initial {
                    return Err(duplicate("initial"));
                }
                node.initial = true;
            } else if self.eat_keyword("history") {
                if node.history {
                    return Err(duplicate("history"));
                }
                node.history = true;
            } else if self.eat_keyword("entry") {
                if node.entry.is_some() {
                    return Err(duplicate("entry"));
                }
                node.entry = Some(self.behaviour()?);
            } else if self.eat_keyword("exit") {
                if node.exit.is_some() {
                    return Err(duplicate("exit"));
                }
                node.exit = Some(self.behaviour()?);
            } else if self.eat_keyword("do") {
                if node.do_activity.is_some() {
                    return Err(duplicate("do"));
                }
                node.do_activity = Some(self.behaviour()?);
            } else {
                break;
            }
        }
        let index = out.len();
        out.push(node);
        if *self.peek() == Tok::LBrace {
            self.advance();
            out[index].kind = StateKind::Composite;
            loop {
                if self.is_keyword("state") {
                    self.state(Some(&name), out)?;
                } else if self.is_keyword("final") {
                    self.final_state(Some(&name), out)?;
                } else if *self.peek() == Tok::RBrace {
                    self.advance();
                    break;
                } else {
                    return self.error(&["`state`", "`final`", "`}`"]);
                }
            }
        } else if *self.peek() != Tok::Semi {
            return self.error(&[
                "`initial`", "`history`", "`entry`", "`exit`", "`do`", "`{`", "`;`",
            ]);
        }
        self.expect(Tok::Semi)?;
        Ok(())
    }

    fn final_state(&mut self, parent: Option<&str>, out: &mut Vec<StateNode>) -> PResult<()> {
        let pos = self.expect_keyword("final")?;
        self.expect(Tok::Semi)?;
        let node = StateNode::final_of(parent);
        self.spans.entry(ElementRef::State(node.name.clone())).or_insert(pos);
        out.push(node);
        Ok(())
    }

    fn behaviour(&mut self) -> PResult<Behaviour> {
        let (label, _) = self.ident("behaviour label")?;
        let mut b = Behaviour::new(label);
        // `{` opens an assignment block only when followed by `x :=`.
        if *self.peek() == Tok::LBrace
            && matches!(self.peek_at(1), Tok::Ident(_))
            && *self.peek_at(2) == Tok::Assign
        {
            self.advance();
            loop {
                let (var, _) = self.ident("variable name")?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                b.assignments.push((var, to_int(value)?));
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }
        Ok(b)
    }

    fn state_ref(&mut self) -> PResult<String> {
        if self.eat_keyword("final") {
            return Ok(final_state_name(None));
        }
        let (name, _) = self.ident("state name")?;
        Ok(name)
    }

    fn transition(&mut self) -> PResult<TransitionDef> {
        self.expect_keyword("trans")?;
        let (id, pos) = self.ident("transition id")?;
        self.spans.entry(ElementRef::Transition(id.clone())).or_insert(pos);
        self.expect(Tok::Colon)?;
        let source = self.state_ref()?;
        self.expect(Tok::Arrow)?;
        let dst = self.state_ref()?;
        let target = if *self.peek() == Tok::Dot {
            self.advance();
            if self.eat_keyword("final") {
                Target::State(final_state_name(Some(&dst)))
            } else if matches!(self.peek(), Tok::Ident(h) if h == "H") {
                self.advance();
                Target::History(dst)
            } else {
                return self.error(&["`H`", "`final`"]);
            }
        } else {
            Target::State(dst)
        };
        let mut t = TransitionDef {
            id,
            source,
            target,
            trigger: None,
            guard: None,
            effect: None,
        };
        if self.eat_keyword("on") {
            t.trigger = Some(self.ident("event name")?.0);
        }
        if self.eat_keyword("if") {
            self.expect(Tok::LParen)?;
            let g = self.expr()?;
            self.expect(Tok::RParen)?;
            t.guard = Some(to_bool(g)?);
        }
        if *self.peek() == Tok::Slash {
            self.advance();
            t.effect = Some(self.behaviour()?);
        }
        if *self.peek() != Tok::Semi {
            let mut expected = Vec::new();
            if t.trigger.is_none() && t.guard.is_none() && t.effect.is_none() {
                expected.push("`on`");
            }
            if t.guard.is_none() && t.effect.is_none() {
                expected.push("`if`");
            }
            if t.effect.is_none() {
                expected.push("`/`");
            }
            expected.push("`;`");
            return self.error(&expected);
        }
        self.advance();
        Ok(t)
    }

    // expression grammar, loosest first

    fn expr(&mut self) -> PResult<Spanned> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::OrOr {
            let pos = self.advance().pos;
            let rhs = self.and_expr()?;
            lhs = Spanned {
                raw: Raw::Or(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Spanned> {
        let mut lhs = self.not_expr()?;
        while *self.peek() == Tok::AndAnd {
            let pos = self.advance().pos;
            let rhs = self.not_expr()?;
            lhs = Spanned {
                raw: Raw::And(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Spanned> {
        if *self.peek() == Tok::Bang {
            let pos = self.advance().pos;
            let inner = self.not_expr()?;
            return Ok(Spanned {
                raw: Raw::Not(Box::new(inner)),
                pos,
            });
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Spanned> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        let pos = self.advance().pos;
        let rhs = self.sum()?;
        Ok(Spanned {
            raw: Raw::Cmp(op, Box::new(lhs), Box::new(rhs)),
            pos,
        })
    }

    fn sum(&mut self) -> PResult<Spanned> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.advance().pos;
            let rhs = self.term()?;
            lhs = Spanned {
                raw: Raw::Arith(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn term(&mut self) -> PResult<Spanned> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            let pos = self.advance().pos;
            let rhs = self.unary()?;
            lhs = Spanned {
                raw: Raw::Arith(ArithOp::Mul, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Spanned> {
        if *self.peek() == Tok::Minus {
            let pos = self.advance().pos;
            if matches!(self.peek(), Tok::Int(_)) {
                let v = self.int_literal(true)?;
                return Ok(Spanned { raw: Raw::Int(v), pos });
            }
            let inner = self.unary()?;
            return Ok(Spanned {
                raw: Raw::Neg(Box::new(inner)),
                pos,
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Spanned> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(_) => {
                let v = self.int_literal(false)?;
                Ok(Spanned { raw: Raw::Int(v), pos })
            }
            Tok::Ident(id) if id == "true" || id == "false" => {
                self.advance();
                Ok(Spanned {
                    raw: Raw::Bool(id == "true"),
                    pos,
                })
            }
            Tok::Ident(id) if !KEYWORDS.contains(&id.as_str()) => {
                self.advance();
                Ok(Spanned { raw: Raw::Var(id), pos })
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => self.error(&["expression"]),
        }
    }
}

fn type_error<T>(pos: Pos, want: &str) -> PResult<T> {
    Err(SyntaxError {
        pos,
        message: format!("expected {want} expression"),
        expected: Vec::new(),
    })
}

fn to_int(e: Spanned) -> PResult<IntExpr> {
    Ok(match e.raw {
        Raw::Int(v) => IntExpr::Lit(v),
        Raw::Var(v) => IntExpr::Var(v),
        Raw::Neg(inner) => IntExpr::Neg(Box::new(to_int(*inner)?)),
        Raw::Arith(op, a, b) => {
            let (a, b) = (Box::new(to_int(*a)?), Box::new(to_int(*b)?));
            match op {
                ArithOp::Add => IntExpr::Add(a, b),
                ArithOp::Sub => IntExpr::Sub(a, b),
                ArithOp::Mul => IntExpr::Mul(a, b),
            }
        }
        _ => return type_error(e.pos, "integer"),
    })
}

fn to_bool(e: Spanned) -> PResult<BoolExpr> {
    Ok(match e.raw {
        Raw::Bool(b) => BoolExpr::Lit(b),
        Raw::Cmp(op, a, b) => BoolExpr::Cmp(op, to_int(*a)?, to_int(*b)?),
        Raw::Not(inner) => BoolExpr::Not(Box::new(to_bool(*inner)?)),
        Raw::And(a, b) => BoolExpr::And(Box::new(to_bool(*a)?), Box::new(to_bool(*b)?)),
        Raw::Or(a, b) => BoolExpr::Or(Box::new(to_bool(*a)?), Box::new(to_bool(*b)?)),
        _ => return type_error(e.pos, "boolean"),
    })
}

pub(super) fn parse_document(text: &str) -> Result<SmdlDocument, SyntaxError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        spans: HashMap::new(),
    };
    let model = p.machine()?;
    Ok(SmdlDocument {
        model,
        spans: p.spans,
    })
}
