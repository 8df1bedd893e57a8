use std::collections::BTreeMap;
use std::fmt;

use crate::smd::CmpOp;

/// A token colour value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Int(i64),
    Enum(String),
    Tuple(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Enum(c) => f.write_str(c),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Variable binding of a transition occurrence.
pub type Binding = BTreeMap<String, Value>;

/// Arc inscriptions and guards.
///
/// Input-arc inscriptions are normally patterns (unit, literals, enum
/// constants, variables and tuples of those); output arcs and guards may
/// use arithmetic, comparisons and boolean connectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Unit,
    Int(i64),
    Bool(bool),
    Const(String),
    Var(String),
    Tuple(Vec<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable `{0}` is unbound")]
    Unbound(String),
    #[error("type mismatch in `{0}`")]
    Type(String),
}

/// Result of evaluating an expression: a token value or a truth value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluated {
    Value(Value),
    Bool(bool),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Self {
        Expr::Const(name.to_string())
    }

    pub fn is_pattern(&self) -> bool {
        match self {
            Expr::Unit | Expr::Int(_) | Expr::Const(_) | Expr::Var(_) => true,
            Expr::Tuple(items) => items.iter().all(Expr::is_pattern),
            _ => false,
        }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Var(v) => f(v),
            Expr::Unit | Expr::Int(_) | Expr::Bool(_) | Expr::Const(_) => {}
            Expr::Tuple(items) => items.iter().for_each(|e| e.for_each_var(f)),
            Expr::Neg(e) | Expr::Not(e) => e.for_each_var(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Cmp(_, a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.for_each_var(&mut |v| out.push(v));
        out
    }

    pub fn eval(&self, binding: &Binding) -> Result<Evaluated, EvalError> {
        let int = |e: &Expr| -> Result<i64, EvalError> {
            match e.eval(binding)? {
                Evaluated::Value(Value::Int(v)) => Ok(v),
                _ => Err(EvalError::Type(format!("{e:?}"))),
            }
        };
        let boolean = |e: &Expr| -> Result<bool, EvalError> {
            match e.eval(binding)? {
                Evaluated::Bool(b) => Ok(b),
                _ => Err(EvalError::Type(format!("{e:?}"))),
            }
        };
        Ok(match self {
            Expr::Unit => Evaluated::Value(Value::Unit),
            Expr::Int(v) => Evaluated::Value(Value::Int(*v)),
            Expr::Bool(b) => Evaluated::Bool(*b),
            Expr::Const(c) => Evaluated::Value(Value::Enum(c.clone())),
            Expr::Var(v) => Evaluated::Value(
                binding
                    .get(v)
                    .cloned()
                    .ok_or_else(|| EvalError::Unbound(v.clone()))?,
            ),
            Expr::Tuple(items) => {
                let mut values = Vec::with_capacity(items.len());
                for item in items {
                    values.push(item.eval_value(binding)?);
                }
                Evaluated::Value(Value::Tuple(values))
            }
            Expr::Neg(e) => Evaluated::Value(Value::Int(int(e)?.wrapping_neg())),
            Expr::Add(a, b) => Evaluated::Value(Value::Int(int(a)?.wrapping_add(int(b)?))),
            Expr::Sub(a, b) => Evaluated::Value(Value::Int(int(a)?.wrapping_sub(int(b)?))),
            Expr::Mul(a, b) => Evaluated::Value(Value::Int(int(a)?.wrapping_mul(int(b)?))),
            Expr::Cmp(op, a, b) => match (a.eval(binding)?, b.eval(binding)?) {
                (Evaluated::Value(Value::Int(x)), Evaluated::Value(Value::Int(y))) => {
                    Evaluated::Bool(op.apply(x, y))
                }
                (x, y) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                    Evaluated::Bool((x == y) == (*op == CmpOp::Eq))
                }
                _ => return Err(EvalError::Type(format!("{self:?}"))),
            },
            Expr::Not(e) => Evaluated::Bool(!boolean(e)?),
            Expr::And(a, b) => Evaluated::Bool(boolean(a)? && boolean(b)?),
            Expr::Or(a, b) => Evaluated::Bool(boolean(a)? || boolean(b)?),
        })
    }

    pub fn eval_value(&self, binding: &Binding) -> Result<Value, EvalError> {
        match self.eval(binding)? {
            Evaluated::Value(v) => Ok(v),
            Evaluated::Bool(_) => Err(EvalError::Type(format!("{self:?}"))),
        }
    }

    pub fn eval_bool(&self, binding: &Binding) -> Result<bool, EvalError> {
        match self.eval(binding)? {
            Evaluated::Bool(b) => Ok(b),
            Evaluated::Value(_) => Err(EvalError::Type(format!("{self:?}"))),
        }
    }

    /// Matches `value` against this inscription, extending `binding`.
    /// Non-pattern inscriptions are evaluated and compared; they need every
    /// variable already bound.
    pub fn matches(&self, value: &Value, binding: &mut Binding) -> bool {
        match (self, value) {
            (Expr::Var(v), _) => match binding.get(v) {
                Some(bound) => bound == value,
                None => {
                    binding.insert(v.clone(), value.clone());
                    true
                }
            },
            (Expr::Unit, Value::Unit) => true,
            (Expr::Int(a), Value::Int(b)) => a == b,
            (Expr::Const(a), Value::Enum(b)) => a == b,
            (Expr::Tuple(ps), Value::Tuple(vs)) if ps.len() == vs.len() => {
                ps.iter().zip(vs).all(|(p, v)| p.matches(v, binding))
            }
            (p, v) if !p.is_pattern() => p.eval_value(binding).is_ok_and(|x| &x == v),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_pattern_binds_each_component() {
        let p = Expr::Tuple(vec![Expr::var("a"), Expr::Int(3), Expr::var("b")]);
        let mut b = Binding::new();
        assert!(p.matches(
            &Value::Tuple(vec![Value::Int(1), Value::Int(3), Value::Int(7)]),
            &mut b
        ));
        assert_eq!(b["a"], Value::Int(1));
        assert_eq!(b["b"], Value::Int(7));
        let mut b = Binding::new();
        assert!(!p.matches(
            &Value::Tuple(vec![Value::Int(1), Value::Int(4), Value::Int(7)]),
            &mut b
        ));
    }

    #[test]
    fn repeated_variable_must_agree() {
        let p = Expr::Tuple(vec![Expr::var("a"), Expr::var("a")]);
        let mut b = Binding::new();
        assert!(!p.matches(&Value::Tuple(vec![Value::Int(1), Value::Int(2)]), &mut b));
    }

    #[test]
    fn guard_evaluation_and_errors() {
        let g = Expr::Cmp(CmpOp::Gt, Box::new(Expr::var("x")), Box::new(Expr::Int(5)));
        let b: Binding = [("x".to_string(), Value::Int(3))].into();
        assert_eq!(g.eval_bool(&b), Ok(false));
        assert_eq!(g.eval_bool(&Binding::new()), Err(EvalError::Unbound("x".into())));
    }
}
