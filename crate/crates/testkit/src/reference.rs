//! Reference interpreter for row expressions.
//!
//! Evaluates directly from source by precedence climbing, with no tree and
//! no shared code with the library's parser or evaluator. It exists to be
//! compared against the library.

use sdds::{Dataset, Page, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum RefValue {
    Num(f64),
    Str(String),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
enum T {
    Num(f64),
    Str(String),
    Name(String),
    Sym(String),
}

fn lex(src: &str) -> Result<Vec<T>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(T::Num(text.parse().map_err(|_| format!("bad number {text}"))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '.' | ':'))
            {
                i += 1;
            }
            out.push(T::Name(chars[start..i].iter().collect()));
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                let Some(&c) = chars.get(i) else {
                    return Err("unterminated string".into());
                };
                i += 1;
                match c {
                    '"' => break,
                    '\\' => {
                        let e = *chars.get(i).ok_or("bad escape")?;
                        i += 1;
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            '"' | '\\' => e,
                            _ => return Err("bad escape".into()),
                        });
                    }
                    c => s.push(c),
                }
            }
            out.push(T::Str(s));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if ["<=", ">=", "==", "!=", "&&", "||"].contains(&two.as_str()) {
                out.push(T::Sym(two));
                i += 2;
            } else if "+-*/%<>!(),".contains(c) {
                out.push(T::Sym(c.to_string()));
                i += 1;
            } else {
                return Err(format!("bad character {c:?}"));
            }
        }
    }
    Ok(out)
}

fn infix_power(sym: &str) -> Option<u8> {
    Some(match sym {
        "||" => 1,
        "&&" => 2,
        "<" | "<=" | ">" | ">=" | "==" | "!=" => 3,
        "+" | "-" => 4,
        "*" | "/" | "%" => 5,
        _ => return None,
    })
}

struct Interp<'a> {
    toks: Vec<T>,
    pos: usize,
    lookup: &'a dyn Fn(&str) -> Option<RefValue>,
}

impl Interp<'_> {
    fn peek_sym(&self) -> Option<&str> {
        match self.toks.get(self.pos) {
            Some(T::Sym(s)) => Some(s),
            _ => None,
        }
    }

    fn eat(&mut self, sym: &str) -> Result<(), String> {
        if self.peek_sym() == Some(sym) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected {sym}"))
        }
    }

    fn expr(&mut self, min_power: u8) -> Result<RefValue, String> {
        let mut lhs = self.prefix()?;
        let mut last_was_comparison = false;
        while let Some(sym) = self.peek_sym().map(str::to_owned) {
            let Some(power) = infix_power(&sym) else { break };
            if power < min_power {
                break;
            }
            if power == 3 && last_was_comparison {
                return Err("chained comparison".into());
            }
            self.pos += 1;
            let rhs = self.expr(power + 1)?;
            lhs = apply(&sym, lhs, rhs)?;
            last_was_comparison = power == 3;
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<RefValue, String> {
        match self.toks.get(self.pos).cloned() {
            Some(T::Sym(s)) if s == "-" => {
                self.pos += 1;
                match self.prefix()? {
                    RefValue::Num(v) => Ok(RefValue::Num(-v)),
                    _ => Err("negating non-number".into()),
                }
            }
            Some(T::Sym(s)) if s == "!" => {
                self.pos += 1;
                match self.prefix()? {
                    RefValue::Bool(b) => Ok(RefValue::Bool(!b)),
                    _ => Err("not of non-logical".into()),
                }
            }
            Some(T::Sym(s)) if s == "(" => {
                self.pos += 1;
                let v = self.expr(0)?;
                self.eat(")")?;
                Ok(v)
            }
            Some(T::Num(v)) => {
                self.pos += 1;
                Ok(RefValue::Num(v))
            }
            Some(T::Str(s)) => {
                self.pos += 1;
                Ok(RefValue::Str(s))
            }
            Some(T::Name(name)) => {
                self.pos += 1;
                if self.peek_sym() == Some("(") {
                    self.pos += 1;
                    let mut args = Vec::new();
                    loop {
                        match self.expr(0)? {
                            RefValue::Num(v) => args.push(v),
                            _ => return Err("non-numeric argument".into()),
                        }
                        if self.peek_sym() == Some(",") {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    self.eat(")")?;
                    let r = match (name.as_str(), args.as_slice()) {
                        ("abs", [a]) => a.abs(),
                        ("sqrt", [a]) => a.sqrt(),
                        ("ln", [a]) => a.ln(),
                        ("exp", [a]) => a.exp(),
                        ("floor", [a]) => a.floor(),
                        ("ceil", [a]) => a.ceil(),
                        ("pow", [a, b]) => a.powf(*b),
                        ("min", [a, b]) => a.min(*b),
                        ("max", [a, b]) => a.max(*b),
                        _ => return Err(format!("bad call {name}")),
                    };
                    Ok(RefValue::Num(r))
                } else {
                    (self.lookup)(&name).ok_or_else(|| format!("unknown name {name}"))
                }
            }
            other => Err(format!("unexpected {other:?}")),
        }
    }
}

fn apply(sym: &str, lhs: RefValue, rhs: RefValue) -> Result<RefValue, String> {
    use RefValue::*;
    Ok(match (sym, lhs, rhs) {
        ("+", Num(a), Num(b)) => Num(a + b),
        ("-", Num(a), Num(b)) => Num(a - b),
        ("*", Num(a), Num(b)) => Num(a * b),
        ("/", Num(a), Num(b)) => Num(a / b),
        ("%", Num(a), Num(b)) => Num(a % b),
        ("<", Num(a), Num(b)) => Bool(a < b),
        ("<=", Num(a), Num(b)) => Bool(a <= b),
        (">", Num(a), Num(b)) => Bool(a > b),
        (">=", Num(a), Num(b)) => Bool(a >= b),
        ("==", Num(a), Num(b)) => Bool(a == b),
        ("!=", Num(a), Num(b)) => Bool(a != b),
        ("<", Str(a), Str(b)) => Bool(a < b),
        ("<=", Str(a), Str(b)) => Bool(a <= b),
        (">", Str(a), Str(b)) => Bool(a > b),
        (">=", Str(a), Str(b)) => Bool(a >= b),
        ("==", Str(a), Str(b)) => Bool(a == b),
        ("!=", Str(a), Str(b)) => Bool(a != b),
        ("==", Bool(a), Bool(b)) => Bool(a == b),
        ("!=", Bool(a), Bool(b)) => Bool(a != b),
        ("&&", Bool(a), Bool(b)) => Bool(a && b),
        ("||", Bool(a), Bool(b)) => Bool(a || b),
        (op, a, b) => return Err(format!("ill-typed {a:?} {op} {b:?}")),
    })
}

/// Evaluates `src` with names resolved through `lookup`.
pub fn evaluate(src: &str, lookup: &dyn Fn(&str) -> Option<RefValue>) -> Result<RefValue, String> {
    let mut interp = Interp {
        toks: lex(src)?,
        pos: 0,
        lookup,
    };
    let v = interp.expr(0)?;
    if interp.pos != interp.toks.len() {
        return Err("trailing input".into());
    }
    Ok(v)
}

pub fn to_ref(value: &Value) -> RefValue {
    match value {
        Value::Short(v) => RefValue::Num(f64::from(*v)),
        Value::Long(v) => RefValue::Num(f64::from(*v)),
        Value::Long64(v) => RefValue::Num(*v as f64),
        Value::Float(v) => RefValue::Num(f64::from(*v)),
        Value::Double(v) => RefValue::Num(*v),
        Value::Str(s) => RefValue::Str(s.clone()),
        Value::Char(b) => RefValue::Str(char::from(*b).to_string()),
    }
}

/// Evaluates `src` at one row: columns win over parameters of the same name.
pub fn evaluate_row(src: &str, dataset: &Dataset, page: &Page, row: usize) -> Result<RefValue, String> {
    let schema = &dataset.schema;
    let lookup = |name: &str| {
        for (i, c) in schema.columns.iter().enumerate() {
            if c.name == name {
                return Some(to_ref(&page.column_data[i][row]));
            }
        }
        for (i, p) in schema.parameters.iter().enumerate() {
            if p.name == name {
                return Some(to_ref(&page.parameter_values[i]));
            }
        }
        None
    };
    evaluate(src, &lookup)
}

/// Row indices per page where `predicate` evaluates to true.
pub fn select_rows(predicate: &str, dataset: &Dataset) -> Result<Vec<Vec<usize>>, String> {
    dataset
        .pages
        .iter()
        .map(|page| {
            let mut kept = Vec::new();
            for row in 0..page.row_count as usize {
                match evaluate_row(predicate, dataset, page, row)? {
                    RefValue::Bool(true) => kept.push(row),
                    RefValue::Bool(false) => {}
                    other => return Err(format!("predicate produced {other:?}")),
                }
            }
            Ok(kept)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str) -> Result<RefValue, String> {
        evaluate(src, &|name| (name == "x").then_some(RefValue::Num(4.0)))
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3"), Ok(RefValue::Num(7.0)));
        assert_eq!(eval("10 - 4 - 3"), Ok(RefValue::Num(3.0)));
        assert_eq!(eval("-x * 2"), Ok(RefValue::Num(-8.0)));
        assert_eq!(eval("!(x < 5) || x % 3 == 1"), Ok(RefValue::Bool(true)));
        assert_eq!(eval("pow(x, 0.5) + min(3, max(1, 2))"), Ok(RefValue::Num(4.0)));
    }

    #[test]
    fn rejects_what_the_grammar_rejects() {
        assert!(eval("1 < 2 < 3").unwrap_err().contains("chained"));
        assert!(eval("\"a\" + 1").is_err());
        assert!(eval("y").is_err());
        assert!(eval("(1").is_err());
        assert!(eval("1 2").is_err());
    }
}
