use super::{BinaryOp, Expr, ExprError, ExprKind, Func, UnaryOp, MAX_DEPTH};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Text(String),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

const OPERATORS: [&str; 16] = [
    "<=", ">=", "==", "!=", "&&", "||", "+", "-", "*", "/", "%", "<", ">", "!", "(", ")",
];

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(start) else {
            return Ok((Tok::End, start));
        };
        if b.is_ascii_digit() || (b == b'.' && bytes.get(start + 1).is_some_and(u8::is_ascii_digit)) {
            let mut i = start;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if bytes.get(i) == Some(&b'.') {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(bytes.get(i), Some(b'e' | b'E')) {
                let mut j = i + 1;
                if matches!(bytes.get(j), Some(b'+' | b'-')) {
                    j += 1;
                }
                if !bytes.get(j).is_some_and(u8::is_ascii_digit) {
                    return Err(ExprError::new(i, "malformed exponent"));
                }
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
            if bytes
                .get(i)
                .is_some_and(|b| b.is_ascii_alphabetic() || *b == b'_')
            {
                return Err(ExprError::new(i, "malformed number"));
            }
            self.pos = i;
            let value = self.src[start..i]
                .parse()
                .map_err(|_| ExprError::new(start, "malformed number"))?;
            return Ok((Tok::Number(value), start));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let mut i = start + 1;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'.' | b':'))
            {
                i += 1;
            }
            self.pos = i;
            return Ok((Tok::Ident(self.src[start..i].to_string()), start));
        }
        if b == b'"' {
            let mut out = String::new();
            let mut chars = self.src[start + 1..].char_indices();
            loop {
                match chars.next() {
                    None => return Err(ExprError::new(start, "unterminated string")),
                    Some((i, '"')) => {
                        self.pos = start + 1 + i + 1;
                        return Ok((Tok::Text(out), start));
                    }
                    Some((i, '\\')) => match chars.next() {
                        Some((_, '"')) => out.push('"'),
                        Some((_, '\\')) => out.push('\\'),
                        Some((_, 'n')) => out.push('\n'),
                        Some((_, 't')) => out.push('\t'),
                        Some((_, other)) => {
                            return Err(ExprError::new(
                                start + 1 + i,
                                format!("bad escape '\\{}'", other.escape_default()),
                            ))
                        }
                        None => return Err(ExprError::new(start, "unterminated string")),
                    },
                    Some((_, c)) => out.push(c),
                }
            }
        }
        if b == b',' {
            self.pos += 1;
            return Ok((Tok::Comma, start));
        }
        for op in OPERATORS {
            if self.src[start..].starts_with(op) {
                self.pos += op.len();
                return Ok((
                    match op {
                        "(" => Tok::LParen,
                        ")" => Tok::RParen,
                        _ => Tok::Op(op),
                    },
                    start,
                ));
            }
        }
        let c = self.src[start..].chars().next().unwrap_or('?');
        Err(ExprError::new(
            start,
            format!("unexpected character '{}'", c.escape_default()),
        ))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    depth: usize,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Number(n) => format!("number {n}"),
        Tok::Text(_) => "string".to_string(),
        Tok::Ident(name) => format!("'{name}'"),
        Tok::Op(op) => format!("'{op}'"),
        Tok::LParen => "'('".to_string(),
        Tok::RParen => "')'".to_string(),
        Tok::Comma => "','".to_string(),
        Tok::End => "end of expression".to_string(),
    }
}

fn comparison(tok: &Tok) -> Option<BinaryOp> {
    Some(match tok {
        Tok::Op("<") => BinaryOp::Lt,
        Tok::Op("<=") => BinaryOp::Le,
        Tok::Op(">") => BinaryOp::Gt,
        Tok::Op(">=") => BinaryOp::Ge,
        Tok::Op("==") => BinaryOp::Eq,
        Tok::Op("!=") => BinaryOp::Ne,
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ExprError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn unexpected(&self) -> ExprError {
        ExprError::new(self.at, format!("unexpected {}", describe(&self.tok)))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ExprError> {
        if self.tok != tok {
            return Err(ExprError::new(
                self.at,
                format!("expected {}, found {}", describe(&tok), describe(&self.tok)),
            ));
        }
        self.advance()
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ExprError::new(self.at, "expression nested too deeply"));
        }
        Ok(())
    }

    fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr {
            offset: lhs.offset,
            kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        }
    }

    fn or(&mut self) -> Result<Expr, ExprError> {
        self.enter()?;
        let mark = self.depth - 1;
        let mut lhs = self.and()?;
        while self.tok == Tok::Op("||") {
            self.enter()?;
            self.advance()?;
            let rhs = self.and()?;
            lhs = Self::binary(BinaryOp::Or, lhs, rhs);
        }
        self.depth = mark;
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ExprError> {
        let mark = self.depth;
        let mut lhs = self.cmp()?;
        while self.tok == Tok::Op("&&") {
            self.enter()?;
            self.advance()?;
            let rhs = self.cmp()?;
            lhs = Self::binary(BinaryOp::And, lhs, rhs);
        }
        self.depth = mark;
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr, ExprError> {
        let lhs = self.add()?;
        let Some(op) = comparison(&self.tok) else {
            return Ok(lhs);
        };
        self.advance()?;
        let rhs = self.add()?;
        if comparison(&self.tok).is_some() {
            return Err(ExprError::new(self.at, "comparison operators cannot be chained"));
        }
        Ok(Self::binary(op, lhs, rhs))
    }

    fn add(&mut self) -> Result<Expr, ExprError> {
        let mark = self.depth;
        let mut lhs = self.mul()?;
        loop {
            let op = match self.tok {
                Tok::Op("+") => BinaryOp::Add,
                Tok::Op("-") => BinaryOp::Sub,
                _ => {
                    self.depth = mark;
                    return Ok(lhs);
                }
            };
            self.enter()?;
            self.advance()?;
            let rhs = self.mul()?;
            lhs = Self::binary(op, lhs, rhs);
        }
    }

    fn mul(&mut self) -> Result<Expr, ExprError> {
        let mark = self.depth;
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Op("*") => BinaryOp::Mul,
                Tok::Op("/") => BinaryOp::Div,
                Tok::Op("%") => BinaryOp::Rem,
                _ => {
                    self.depth = mark;
                    return Ok(lhs);
                }
            };
            self.enter()?;
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Self::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        let op = match self.tok {
            Tok::Op("-") => UnaryOp::Neg,
            Tok::Op("!") => UnaryOp::Not,
            _ => return self.primary(),
        };
        let offset = self.at;
        self.enter()?;
        self.advance()?;
        let operand = self.unary()?;
        self.depth -= 1;
        Ok(Expr {
            kind: ExprKind::Unary(op, Box::new(operand)),
            offset,
        })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let offset = self.at;
        let kind = match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Number(v) => {
                self.advance()?;
                ExprKind::Number(v)
            }
            Tok::Text(s) => {
                self.advance()?;
                ExprKind::Text(s)
            }
            Tok::Ident(name) => {
                self.advance()?;
                if self.tok != Tok::LParen {
                    ExprKind::Ident(name)
                } else {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ExprError::new(offset, format!("unknown function '{name}'")))?;
                    self.advance()?;
                    let mut args = Vec::new();
                    if self.tok != Tok::RParen {
                        args.push(self.or()?);
                        while self.tok == Tok::Comma {
                            self.advance()?;
                            args.push(self.or()?);
                        }
                    }
                    self.expect(Tok::RParen)?;
                    if args.len() != func.arity() {
                        return Err(ExprError::new(
                            offset,
                            format!(
                                "{}() takes {} argument(s), got {}",
                                func.name(),
                                func.arity(),
                                args.len()
                            ),
                        ));
                    }
                    ExprKind::Call(func, args)
                }
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.or()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            other => {
                self.tok = other;
                return Err(self.unexpected());
            }
        };
        Ok(Expr { kind, offset })
    }
}

/// Parses expression source into a tree.
pub fn parse_expr(source: &str) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        lexer: Lexer { src: source, pos: 0 },
        tok: Tok::End,
        at: 0,
        depth: 0,
    };
    parser.advance()?;
    let expr = parser.or()?;
    if parser.tok != Tok::End {
        return Err(parser.unexpected());
    }
    Ok(expr)
}
