use super::{BinaryOp, Expr, ExprError, ExprKind, ExprType, Func, UnaryOp};
use crate::model::{Category, DataType, Schema};

/// An expression with identifiers bound to schema slots and its result
/// type established.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    pub(super) root: Node,
    ty: ExprType,
}

impl CompiledExpr {
    pub fn result_type(&self) -> ExprType {
        self.ty
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Node {
    Number(f64),
    Text(String),
    Column(usize),
    Parameter(usize),
    Neg(Box<Node>),
    Not(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

pub(super) fn slot_type(t: DataType) -> ExprType {
    if t.is_numeric() {
        ExprType::Numeric
    } else {
        ExprType::Text
    }
}

fn mismatch(offset: usize, what: &str, found: &[ExprType]) -> ExprError {
    let found: Vec<String> = found.iter().map(ToString::to_string).collect();
    ExprError::new(
        offset,
        format!("type mismatch: {what}, found {}", found.join(" and ")),
    )
}

fn bind(expr: &Expr, schema: &Schema) -> Result<(Node, ExprType), ExprError> {
    Ok(match &expr.kind {
        ExprKind::Number(v) => (Node::Number(*v), ExprType::Numeric),
        ExprKind::Text(s) => (Node::Text(s.clone()), ExprType::Text),
        ExprKind::Ident(name) => {
            if let Some(i) = schema.find_field(Category::Column, name) {
                (Node::Column(i), slot_type(schema.columns[i].data_type))
            } else if let Some(i) = schema.find_field(Category::Parameter, name) {
                (Node::Parameter(i), slot_type(schema.parameters[i].data_type))
            } else {
                return Err(ExprError::new(
                    expr.offset,
                    format!("unknown identifier '{name}'"),
                ));
            }
        }
        ExprKind::Unary(op, operand) => {
            let (node, ty) = bind(operand, schema)?;
            match (op, ty) {
                (UnaryOp::Neg, ExprType::Numeric) => (Node::Neg(Box::new(node)), ty),
                (UnaryOp::Not, ExprType::Logical) => (Node::Not(Box::new(node)), ty),
                (UnaryOp::Neg, _) => return Err(mismatch(expr.offset, "'-' needs a numeric operand", &[ty])),
                (UnaryOp::Not, _) => return Err(mismatch(expr.offset, "'!' needs a logical operand", &[ty])),
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let (l, lt) = bind(lhs, schema)?;
            let (r, rt) = bind(rhs, schema)?;
            use BinaryOp::*;
            use ExprType::*;
            let ty = match (op, lt, rt) {
                (Add | Sub | Mul | Div | Rem, Numeric, Numeric) => Numeric,
                (Lt | Le | Gt | Ge, Numeric, Numeric) | (Lt | Le | Gt | Ge, Text, Text) => Logical,
                (Eq | Ne, a, b) if a == b => Logical,
                (And | Or, Logical, Logical) => Logical,
                _ => {
                    let need = match op {
                        Add | Sub | Mul | Div | Rem => "needs numeric operands",
                        Lt | Le | Gt | Ge => "needs two numeric or two text operands",
                        Eq | Ne => "needs operands of the same type",
                        And | Or => "needs logical operands",
                    };
                    return Err(mismatch(
                        rhs.offset.min(lhs.offset),
                        &format!("'{}' {need}", op.symbol()),
                        &[lt, rt],
                    ));
                }
            };
            (Node::Binary(*op, Box::new(l), Box::new(r)), ty)
        }
        ExprKind::Call(func, args) => {
            let mut nodes = Vec::with_capacity(args.len());
            for arg in args {
                let (node, ty) = bind(arg, schema)?;
                if ty != ExprType::Numeric {
                    return Err(mismatch(
                        arg.offset,
                        &format!("{}() needs numeric arguments", func.name()),
                        &[ty],
                    ));
                }
                nodes.push(node);
            }
            (Node::Call(*func, nodes), ExprType::Numeric)
        }
    })
}

/// Resolves identifiers against `schema` and checks operand types.
pub fn compile(expr: &Expr, schema: &Schema) -> Result<CompiledExpr, ExprError> {
    let (root, ty) = bind(expr, schema)?;
    Ok(CompiledExpr { root, ty })
}

/// The result type of `expr` under `schema`.
pub fn type_check(expr: &Expr, schema: &Schema) -> Result<ExprType, ExprError> {
    compile(expr, schema).map(|c| c.ty)
}
