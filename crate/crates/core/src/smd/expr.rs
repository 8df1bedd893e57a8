//! Integer/boolean expression trees used in guards and behaviour assignments.

use std::collections::BTreeMap;
use std::fmt;

/// Integer-valued expression over global variables.
///
/// Arithmetic wraps on overflow so evaluation is total.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IntExpr {
    Lit(i64),
    Var(String),
    Neg(Box<IntExpr>),
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Mul(Box<IntExpr>, Box<IntExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    /// SMDL spelling of the operator.
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Lit(bool),
    Cmp(CmpOp, IntExpr, IntExpr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

/// Variable valuation. Missing variables read as zero.
pub type Valuation = BTreeMap<String, i64>;

impl IntExpr {
    pub fn var(name: &str) -> Self {
        IntExpr::Var(name.to_string())
    }

    pub fn eval(&self, env: &Valuation) -> i64 {
        match self {
            IntExpr::Lit(v) => *v,
            IntExpr::Var(name) => env.get(name).copied().unwrap_or(0),
            IntExpr::Neg(e) => e.eval(env).wrapping_neg(),
            IntExpr::Add(a, b) => a.eval(env).wrapping_add(b.eval(env)),
            IntExpr::Sub(a, b) => a.eval(env).wrapping_sub(b.eval(env)),
            IntExpr::Mul(a, b) => a.eval(env).wrapping_mul(b.eval(env)),
        }
    }

    /// Calls `f` on every variable read, in left-to-right order.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            IntExpr::Lit(_) => {}
            IntExpr::Var(name) => f(name),
            IntExpr::Neg(e) => e.for_each_var(f),
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) | IntExpr::Mul(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            IntExpr::Add(..) | IntExpr::Sub(..) => 1,
            IntExpr::Mul(..) => 2,
            IntExpr::Neg(_) => 3,
            IntExpr::Lit(v) if *v < 0 => 3,
            IntExpr::Lit(_) | IntExpr::Var(_) => 4,
        }
    }
}

impl BoolExpr {
    pub fn eval(&self, env: &Valuation) -> bool {
        match self {
            BoolExpr::Lit(b) => *b,
            BoolExpr::Cmp(op, a, b) => op.apply(a.eval(env), b.eval(env)),
            BoolExpr::Not(e) => !e.eval(env),
            BoolExpr::And(a, b) => a.eval(env) && b.eval(env),
            BoolExpr::Or(a, b) => a.eval(env) || b.eval(env),
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            BoolExpr::Lit(_) => {}
            BoolExpr::Cmp(_, a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            BoolExpr::Not(e) => e.for_each_var(f),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 1,
            BoolExpr::And(..) => 2,
            BoolExpr::Not(_) => 3,
            BoolExpr::Cmp(..) | BoolExpr::Lit(_) => 4,
        }
    }
}

fn write_int(f: &mut fmt::Formatter<'_>, e: &IntExpr, min_prec: u8) -> fmt::Result {
    let paren = e.precedence() < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match e {
        IntExpr::Lit(v) => write!(f, "{v}")?,
        IntExpr::Var(name) => f.write_str(name)?,
        IntExpr::Neg(inner) => {
            f.write_str("-")?;
            write_int(f, inner, 4)?;
        }
        IntExpr::Add(a, b) => {
            write_int(f, a, 1)?;
            f.write_str(" + ")?;
            write_int(f, b, 2)?;
        }
        IntExpr::Sub(a, b) => {
            write_int(f, a, 1)?;
            f.write_str(" - ")?;
            write_int(f, b, 2)?;
        }
        IntExpr::Mul(a, b) => {
            write_int(f, a, 2)?;
            f.write_str(" * ")?;
            write_int(f, b, 3)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

fn write_bool(f: &mut fmt::Formatter<'_>, e: &BoolExpr, min_prec: u8) -> fmt::Result {
    let paren = e.precedence() < min_prec;
    if paren {
        f.write_str("(")?;
    }
    match e {
        BoolExpr::Lit(b) => write!(f, "{b}")?,
        BoolExpr::Cmp(op, a, b) => {
            write_int(f, a, 1)?;
            write!(f, " {} ", op.symbol())?;
            write_int(f, b, 1)?;
        }
        BoolExpr::Not(inner) => {
            f.write_str("!")?;
            write_bool(f, inner, 3)?;
        }
        BoolExpr::And(a, b) => {
            write_bool(f, a, 2)?;
            f.write_str(" && ")?;
            write_bool(f, b, 3)?;
        }
        BoolExpr::Or(a, b) => {
            write_bool(f, a, 1)?;
            f.write_str(" || ")?;
            write_bool(f, b, 2)?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_int(f, self, 0)
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_bool(f, self, 0)
    }
}
