use super::check::{compile, Node};
use super::{BinaryOp, CompiledExpr, Expr, ExprError, Func};
use crate::model::{DataType, Page, Schema, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum EvalValue {
    Number(f64),
    Text(String),
    Logical(bool),
}

impl EvalValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            EvalValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, EvalValue::Logical(true))
    }

    /// Converts a result into a storable value of type `target`.
    ///
    /// Numbers round half-to-even into integer types; values outside the
    /// target range (and NaN or infinities for integers) are errors. Text
    /// converts to `string`, or to `character` when it is one char in
    /// U+0000..=U+00FF.
    pub fn to_value(&self, target: DataType) -> Result<Value, String> {
        fn int(v: f64, lo: f64, hi: f64, target: DataType) -> Result<f64, String> {
            let r = v.round_ties_even();
            // hi is the exclusive power-of-two bound of the type.
            if r.is_nan() || r < lo || r >= hi {
                return Err(format!("value {v:?} overflows {target}"));
            }
            Ok(r)
        }
        match (self, target) {
            (EvalValue::Number(v), DataType::Short) => {
                int(*v, -32768.0, 32768.0, target).map(|r| Value::Short(r as i16))
            }
            (EvalValue::Number(v), DataType::Long) => {
                int(*v, -2147483648.0, 2147483648.0, target).map(|r| Value::Long(r as i32))
            }
            (EvalValue::Number(v), DataType::Long64) => {
                int(*v, -9223372036854775808.0, 9223372036854775808.0, target)
                    .map(|r| Value::Long64(r as i64))
            }
            (EvalValue::Number(v), DataType::Float) => {
                let f = *v as f32;
                if f.is_infinite() && v.is_finite() {
                    return Err(format!("value {v:?} overflows float"));
                }
                Ok(Value::Float(f))
            }
            (EvalValue::Number(v), DataType::Double) => Ok(Value::Double(*v)),
            (EvalValue::Text(s), DataType::String) => Ok(Value::Str(s.clone())),
            (EvalValue::Text(s), DataType::Character) => {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if u32::from(c) <= 0xff => Ok(Value::Char(c as u8)),
                    _ => Err(format!("text {s:?} is not a single character")),
                }
            }
            (other, _) => Err(format!("cannot store {other:?} as {target}")),
        }
    }
}

fn widen(value: &Value) -> EvalValue {
    match value {
        Value::Str(s) => EvalValue::Text(s.clone()),
        Value::Char(b) => EvalValue::Text(char::from(*b).to_string()),
        other => EvalValue::Number(other.as_f64().expect("numeric value")),
    }
}

fn call(func: Func, args: &[f64]) -> f64 {
    match func {
        Func::Abs => args[0].abs(),
        Func::Sqrt => args[0].sqrt(),
        Func::Ln => args[0].ln(),
        Func::Exp => args[0].exp(),
        Func::Floor => args[0].floor(),
        Func::Ceil => args[0].ceil(),
        Func::Pow => args[0].powf(args[1]),
        Func::Min => args[0].min(args[1]),
        Func::Max => args[0].max(args[1]),
    }
}

impl CompiledExpr {
    /// Evaluates at `row` of `page`. The page must conform to the schema the
    /// expression was compiled against, and `row < page.row_count`.
    pub fn eval(&self, page: &Page, row: usize) -> EvalValue {
        eval_node(&self.root, page, row)
    }

    /// Whether a logical expression holds at `row`.
    pub fn matches(&self, page: &Page, row: usize) -> bool {
        self.eval(page, row).is_true()
    }
}

fn eval_node(node: &Node, page: &Page, row: usize) -> EvalValue {
    match node {
        Node::Number(v) => EvalValue::Number(*v),
        Node::Text(s) => EvalValue::Text(s.clone()),
        Node::Column(i) => widen(&page.column_data[*i][row]),
        Node::Parameter(i) => widen(&page.parameter_values[*i]),
        Node::Neg(inner) => EvalValue::Number(-num(inner, page, row)),
        Node::Not(inner) => EvalValue::Logical(!eval_node(inner, page, row).is_true()),
        Node::Call(func, args) => {
            let values: Vec<f64> = args.iter().map(|a| num(a, page, row)).collect();
            EvalValue::Number(call(*func, &values))
        }
        Node::Binary(op, lhs, rhs) => {
            use BinaryOp::*;
            match op {
                Add => EvalValue::Number(num(lhs, page, row) + num(rhs, page, row)),
                Sub => EvalValue::Number(num(lhs, page, row) - num(rhs, page, row)),
                Mul => EvalValue::Number(num(lhs, page, row) * num(rhs, page, row)),
                Div => EvalValue::Number(num(lhs, page, row) / num(rhs, page, row)),
                Rem => EvalValue::Number(num(lhs, page, row) % num(rhs, page, row)),
                And => EvalValue::Logical(
                    eval_node(lhs, page, row).is_true() && eval_node(rhs, page, row).is_true(),
                ),
                Or => EvalValue::Logical(
                    eval_node(lhs, page, row).is_true() || eval_node(rhs, page, row).is_true(),
                ),
                Lt | Le | Gt | Ge | Eq | Ne => {
                    let l = eval_node(lhs, page, row);
                    let r = eval_node(rhs, page, row);
                    let ord = match (&l, &r) {
                        (EvalValue::Number(a), EvalValue::Number(b)) => a.partial_cmp(b),
                        (EvalValue::Text(a), EvalValue::Text(b)) => Some(a.cmp(b)),
                        (EvalValue::Logical(a), EvalValue::Logical(b)) => Some(a.cmp(b)),
                        _ => None,
                    };
                    EvalValue::Logical(match op {
                        Lt => ord.is_some_and(|o| o.is_lt()),
                        Le => ord.is_some_and(|o| o.is_le()),
                        Gt => ord.is_some_and(|o| o.is_gt()),
                        Ge => ord.is_some_and(|o| o.is_ge()),
                        Eq => ord.is_some_and(|o| o.is_eq()),
                        _ => !ord.is_some_and(|o| o.is_eq()),
                    })
                }
            }
        }
    }
}

fn num(node: &Node, page: &Page, row: usize) -> f64 {
    eval_node(node, page, row)
        .as_number()
        .expect("type-checked numeric operand")
}

/// Type-checks `expr` against `schema` and evaluates it at `row`.
pub fn eval_expr(expr: &Expr, schema: &Schema, page: &Page, row: usize) -> Result<EvalValue, ExprError> {
    Ok(compile(expr, schema)?.eval(page, row))
}
