//! Random well-typed expression source over a schema's columns and parameters.

use rand::seq::SliceRandom;
use rand::Rng;

use sdds::{DataType, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Numeric,
    Text,
}

/// Names visible to an expression with their kinds; a column shadows a
/// parameter of the same name.
pub fn operands(schema: &Schema) -> Vec<(String, Kind)> {
    let kind = |t: DataType| if t.is_numeric() { Kind::Numeric } else { Kind::Text };
    let mut out: Vec<(String, Kind)> = schema
        .columns
        .iter()
        .map(|c| (c.name.clone(), kind(c.data_type)))
        .collect();
    for p in &schema.parameters {
        if !out.iter().any(|(n, _)| *n == p.name) {
            out.push((p.name.clone(), kind(p.data_type)));
        }
    }
    out
}

pub struct ExprGen<'a, R> {
    rng: &'a mut R,
    numeric: Vec<String>,
    text: Vec<String>,
}

impl<'a, R: Rng> ExprGen<'a, R> {
    pub fn new(rng: &'a mut R, schema: &Schema) -> Self {
        let mut numeric = Vec::new();
        let mut text = Vec::new();
        for (name, kind) in operands(schema) {
            match kind {
                Kind::Numeric => numeric.push(name),
                Kind::Text => text.push(name),
            }
        }
        ExprGen { rng, numeric, text }
    }

    fn literal(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(0..10).to_string(),
            1 => format!("{}.{}", self.rng.gen_range(0..100), self.rng.gen_range(0..10)),
            2 => format!("{}e{}", self.rng.gen_range(1..10), self.rng.gen_range(-3..4)),
            _ => ["0", "1", "0.5", "100", "1e300"]
                .choose(self.rng)
                .unwrap()
                .to_string(),
        }
    }

    fn text_literal(&mut self) -> String {
        const POOL: &[&str] = &["", "a", "b", "ab", "c", "e", "\\\"", "\\\\", " ", "\\n", "é"];
        let n = self.rng.gen_range(0..3);
        let body: String = (0..n).map(|_| *POOL.choose(self.rng).unwrap()).collect();
        format!("\"{body}\"")
    }

    pub fn numeric(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return if !self.numeric.is_empty() && self.rng.gen_bool(0.7) {
                self.numeric.choose(self.rng).unwrap().clone()
            } else {
                self.literal()
            };
        }
        match self.rng.gen_range(0..8) {
            0 => format!("-{}", self.numeric_atom(depth - 1)),
            1 => {
                let f = *["abs", "sqrt", "ln", "exp", "floor", "ceil"]
                    .choose(self.rng)
                    .unwrap();
                format!("{f}({})", self.numeric(depth - 1))
            }
            2 => {
                let f = *["pow", "min", "max"].choose(self.rng).unwrap();
                format!("{f}({}, {})", self.numeric(depth - 1), self.numeric(depth - 1))
            }
            3 => format!("({})", self.numeric(depth - 1)),
            _ => {
                let op = *["+", "-", "*", "/", "%"].choose(self.rng).unwrap();
                format!("{} {op} {}", self.numeric(depth - 1), self.numeric(depth - 1))
            }
        }
    }

    fn numeric_atom(&mut self, depth: u32) -> String {
        let inner = self.numeric(depth);
        if inner
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.:".contains(c))
        {
            inner
        } else {
            format!("({inner})")
        }
    }

    pub fn text(&mut self) -> String {
        if !self.text.is_empty() && self.rng.gen_bool(0.7) {
            self.text.choose(self.rng).unwrap().clone()
        } else {
            self.text_literal()
        }
    }

    fn comparison(&mut self, depth: u32) -> String {
        let op = *["<", "<=", ">", ">=", "==", "!="].choose(self.rng).unwrap();
        if !self.text.is_empty() && self.rng.gen_bool(0.35) {
            format!("{} {op} {}", self.text(), self.text())
        } else {
            format!("{} {op} {}", self.numeric(depth), self.numeric(depth))
        }
    }

    /// A logical expression.
    pub fn predicate(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.comparison(depth.min(2));
        }
        match self.rng.gen_range(0..6) {
            0 => format!("!({})", self.predicate(depth - 1)),
            1 => {
                let op = *["==", "!="].choose(self.rng).unwrap();
                format!(
                    "({}) {op} ({})",
                    self.predicate(depth - 1),
                    self.predicate(depth - 1)
                )
            }
            2 => format!("({})", self.predicate(depth - 1)),
            3 => format!("{} && {}", self.predicate(depth - 1), self.predicate(depth - 1)),
            4 => format!("{} || {}", self.predicate(depth - 1), self.predicate(depth - 1)),
            _ => self.comparison(depth - 1),
        }
    }
}
