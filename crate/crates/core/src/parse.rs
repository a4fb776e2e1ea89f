//! Reader for metric and submersion definition files.
//!
//! A metric block is a sequence of `key = value` statements, optionally
//! separated by `;`:
//!
//! ```text
//! # unit round sphere
//! dim = 2
//! coords = (θ, φ)
//! domain = [(0, pi), (0, 2*pi)]
//! g = [[1, 0], [0, sin(θ)^2]]
//! ```
//!
//! A submersion file wraps two such blocks in `total { ... }` and
//! `base { ... }` and adds `pi = (<expr>, ...)` written in the total-space
//! coordinates. Whitespace (including newlines) is insignificant and `#`
//! starts a comment that runs to the end of the line. `pi` and `inf` are
//! constants.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::{Expr, Func};
use crate::manifold::{ChartedManifold, Interval};
use crate::submersion::SubmersionSpec;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num { value: f64, integer: bool },
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let mut s = String::new();
            let mut integer = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integer = false;
                s.push('.');
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integer = false;
                    s.extend(&chars[i..j]);
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        i += 1;
                    }
                }
            }
            col += s.chars().count();
            let value: f64 = s.parse().map_err(|_| Error::Parse {
                line: start_line,
                column: start_col,
                expected: vec!["number".into()],
                found: format!("`{s}`"),
            })?;
            out.push(Token {
                tok: Tok::Num { value, integer },
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if "=;,()[]{}+-*/^".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line,
                column: col,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Parse {
            line,
            column: col,
            expected: vec!["token".into()],
            found: format!("`{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

/// Expression before names are resolved.
#[derive(Clone, Debug)]
enum Raw {
    Num(f64),
    Ident {
        name: String,
        line: usize,
        column: usize,
    },
    Neg(Box<Raw>),
    Bin(char, Box<Raw>, Box<Raw>),
    Call {
        name: String,
        arg: Box<Raw>,
        line: usize,
        column: usize,
    },
}

#[derive(Default)]
struct ManifoldDef {
    name: Option<String>,
    dim: Option<(usize, usize, usize)>,
    coords: Option<Vec<String>>,
    metric: Option<Vec<Vec<Raw>>>,
    domain: Option<Vec<(Raw, Raw)>>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            tokens: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T> {
        let t = self.peek();
        Err(Error::Parse {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        })
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.error(&[&format!("`{c}`")])
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn skip_separators(&mut self) {
        while self.eat_sym(';') {}
    }

    /// Parses manifold statements until `}` or end of input.
    fn manifold_block(&mut self, def: &mut ManifoldDef, top_level_keys: &[&str]) -> Result<()> {
        loop {
            self.skip_separators();
            let key = match &self.peek().tok {
                Tok::Ident(k) => k.clone(),
                Tok::Eof | Tok::Sym('}') => return Ok(()),
                _ => {
                    let mut exp = vec!["dim", "coords", "domain", "g", "name"];
                    exp.extend_from_slice(top_level_keys);
                    return self.error(&exp);
                }
            };
            if top_level_keys.contains(&key.as_str()) {
                return Ok(());
            }
            match key.as_str() {
                "dim" => {
                    let t = self.bump();
                    self.expect_sym('=')?;
                    match self.peek().tok {
                        Tok::Num {
                            value,
                            integer: true,
                        } if value >= 1.0 => {
                            self.bump();
                            def.dim = Some((value as usize, t.line, t.column));
                        }
                        _ => return self.error(&["positive integer"]),
                    }
                }
                "coords" => {
                    self.bump();
                    self.expect_sym('=')?;
                    self.expect_sym('(')?;
                    let mut names = vec![self.expect_ident()?];
                    while self.eat_sym(',') {
                        names.push(self.expect_ident()?);
                    }
                    self.expect_sym(')')?;
                    def.coords = Some(names);
                }
                "g" => {
                    self.bump();
                    self.expect_sym('=')?;
                    def.metric = Some(self.matrix()?);
                }
                "domain" => {
                    self.bump();
                    self.expect_sym('=')?;
                    self.expect_sym('[')?;
                    let mut intervals = vec![self.interval()?];
                    while self.eat_sym(',') {
                        intervals.push(self.interval()?);
                    }
                    self.expect_sym(']')?;
                    def.domain = Some(intervals);
                }
                "name" => {
                    self.bump();
                    self.expect_sym('=')?;
                    def.name = Some(self.expect_ident()?);
                }
                _ => {
                    let mut exp = vec!["dim", "coords", "domain", "g", "name"];
                    exp.extend_from_slice(top_level_keys);
                    return self.error(&exp);
                }
            }
        }
    }

    fn interval(&mut self) -> Result<(Raw, Raw)> {
        self.expect_sym('(')?;
        let lo = self.expr()?;
        self.expect_sym(',')?;
        let hi = self.expr()?;
        self.expect_sym(')')?;
        Ok((lo, hi))
    }

    fn matrix(&mut self) -> Result<Vec<Vec<Raw>>> {
        self.expect_sym('[')?;
        let mut rows = vec![self.row()?];
        while self.eat_sym(',') {
            rows.push(self.row()?);
        }
        self.expect_sym(']')?;
        Ok(rows)
    }

    fn row(&mut self) -> Result<Vec<Raw>> {
        self.expect_sym('[')?;
        let mut row = vec![self.expr()?];
        while self.eat_sym(',') {
            row.push(self.expr()?);
        }
        self.expect_sym(']')?;
        Ok(row)
    }

    fn tuple(&mut self) -> Result<Vec<Raw>> {
        self.expect_sym('(')?;
        let mut items = vec![self.expr()?];
        while self.eat_sym(',') {
            items.push(self.expr()?);
        }
        self.expect_sym(')')?;
        Ok(items)
    }

    fn expr(&mut self) -> Result<Raw> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym(c @ ('+' | '-')) => c,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Raw> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym(c @ ('*' | '/')) => c,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Raw> {
        if self.eat_sym('-') {
            return Ok(Raw::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Raw> {
        let base = self.atom()?;
        if self.eat_sym('^') {
            let exp = self.unary()?;
            return Ok(Raw::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Raw> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Raw::Num(value))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek().tok == Tok::Sym('(') {
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    Ok(Raw::Call {
                        name,
                        arg: Box::new(arg),
                        line: t.line,
                        column: t.column,
                    })
                } else {
                    Ok(Raw::Ident {
                        name,
                        line: t.line,
                        column: t.column,
                    })
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            _ => self.error(&["number", "identifier", "`(`", "`-`"]),
        }
    }
}

fn resolve(raw: &Raw, names: &[String]) -> Result<Expr> {
    Ok(match raw {
        Raw::Num(v) => Expr::Const(*v),
        Raw::Ident { name, line, column } => {
            if let Some(i) = names.iter().position(|n| n == name) {
                Expr::Var(i)
            } else if name == "pi" {
                Expr::Const(std::f64::consts::PI)
            } else if name == "inf" {
                Expr::Const(f64::INFINITY)
            } else {
                return Err(Error::UnknownSymbol {
                    name: name.clone(),
                    line: *line,
                    column: *column,
                });
            }
        }
        Raw::Neg(a) => Expr::Neg(Box::new(resolve(a, names)?)),
        Raw::Call {
            name,
            arg,
            line,
            column,
        } => {
            let f = Func::from_name(name).ok_or_else(|| Error::UnknownSymbol {
                name: name.clone(),
                line: *line,
                column: *column,
            })?;
            Expr::Call(f, Box::new(resolve(arg, names)?))
        }
        Raw::Bin(op, a, b) => {
            let a = Box::new(resolve(a, names)?);
            let b = resolve(b, names)?;
            match op {
                '+' => Expr::Add(a, Box::new(b)),
                '-' => Expr::Sub(a, Box::new(b)),
                '*' => Expr::Mul(a, Box::new(b)),
                '/' => Expr::Div(a, Box::new(b)),
                '^' => match b.eval_const() {
                    Some(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => {
                        Expr::Powi(a, c as i32)
                    }
                    Some(c) if c.is_finite() => Expr::Powf(a, c),
                    _ => Expr::Pow(a, Box::new(b)),
                },
                _ => unreachable!("operator set is closed"),
            }
        }
    })
}

fn constant(raw: &Raw) -> Result<f64> {
    let e = resolve(raw, &[])?;
    e.eval_const()
        .ok_or_else(|| Error::Arity("domain bounds must be constant".into()))
}

fn build_manifold(def: ManifoldDef, fallback_name: &str) -> Result<ChartedManifold> {
    let rows = def
        .metric
        .ok_or_else(|| Error::Arity("missing metric `g`".into()))?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Arity(format!(
            "metric must be square; got {} rows with lengths {:?}",
            n,
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    if let Some((d, _, _)) = def.dim {
        if d != n {
            return Err(Error::Arity(format!("dim = {d} but metric is {n}x{n}")));
        }
    }
    let names = match def.coords {
        Some(c) => {
            if c.len() != n {
                return Err(Error::Arity(format!(
                    "{} coordinates declared for a {n}-dimensional metric",
                    c.len()
                )));
            }
            c
        }
        None => (1..=n).map(|i| format!("x{i}")).collect(),
    };
    for (i, a) in names.iter().enumerate() {
        if names[..i].contains(a) {
            return Err(Error::Arity(format!("duplicate coordinate `{a}`")));
        }
    }
    let metric = rows
        .iter()
        .map(|r| r.iter().map(|e| resolve(e, &names)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let domain = match def.domain {
        Some(ivs) => {
            if ivs.len() != n {
                return Err(Error::Arity(format!(
                    "{} domain intervals for {n} coordinates",
                    ivs.len()
                )));
            }
            ivs.iter()
                .map(|(lo, hi)| Ok(Interval::new(constant(lo)?, constant(hi)?)))
                .collect::<Result<Vec<_>>>()?
        }
        None => vec![Interval::unbounded(); n],
    };
    let name = def.name.unwrap_or_else(|| fallback_name.to_string());
    ChartedManifold::new(name, names, metric, domain)
}

/// Parses a single metric block into a charted manifold.
pub fn parse_metric_expression(text: &str) -> Result<ChartedManifold> {
    let mut p = Parser::new(text)?;
    let mut def = ManifoldDef::default();
    p.manifold_block(&mut def, &[])?;
    if p.peek().tok != Tok::Eof {
        return p.error(&["statement", "end of input"]);
    }
    build_manifold(def, "manifold")
}

/// Parses a submersion definition file.
pub fn parse_submersion(text: &str) -> Result<SubmersionSpec> {
    let mut p = Parser::new(text)?;
    let mut name = None;
    let mut total = None;
    let mut base = None;
    let mut projection: Option<(Vec<Raw>, usize, usize)> = None;
    loop {
        p.skip_separators();
        let t = p.peek().clone();
        match &t.tok {
            Tok::Eof => break,
            Tok::Ident(k) if (k == "total" || k == "base") && p.peek_at(1) == &Tok::Sym('{') => {
                let which = k.clone();
                p.bump();
                p.bump();
                let mut def = ManifoldDef::default();
                p.manifold_block(&mut def, &[])?;
                p.expect_sym('}')?;
                if which == "total" {
                    total = Some(def);
                } else {
                    base = Some(def);
                }
            }
            Tok::Ident(k) if k == "pi" => {
                p.bump();
                p.expect_sym('=')?;
                projection = Some((p.tuple()?, t.line, t.column));
            }
            Tok::Ident(k) if k == "name" => {
                p.bump();
                p.expect_sym('=')?;
                name = Some(p.expect_ident()?);
            }
            _ => return p.error(&["`total {`", "`base {`", "`pi`", "`name`"]),
        }
    }
    let name = name.unwrap_or_else(|| "submersion".to_string());
    let total_def = total.ok_or_else(|| Error::Arity("missing `total { ... }` block".into()))?;
    let base_def = base.ok_or_else(|| Error::Arity("missing `base { ... }` block".into()))?;
    let total = build_manifold(total_def, &format!("{name}_total"))?;
    let base = build_manifold(base_def, &format!("{name}_base"))?;
    let (raw_pi, _, _) = projection.ok_or_else(|| Error::Arity("missing `pi = (...)`".into()))?;
    if raw_pi.len() != base.dim() {
        return Err(Error::Arity(format!(
            "pi has {} components but the base has dimension {}",
            raw_pi.len(),
            base.dim()
        )));
    }
    let pi = raw_pi
        .iter()
        .map(|r| resolve(r, total.coord_names()))
        .collect::<Result<Vec<_>>>()?;
    SubmersionSpec::new(name, total, base, pi)
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

fn write_block(out: &mut String, m: &ChartedManifold) {
    let names = m.coord_names();
    let _ = writeln!(out, "  name = {}", m.name());
    let _ = writeln!(out, "  coords = ({})", names.join(", "));
    let domain: Vec<String> = m
        .domain()
        .iter()
        .map(|d| format!("({}, {})", bound(d.lo), bound(d.hi)))
        .collect();
    let _ = writeln!(out, "  domain = [{}]", domain.join(", "));
    let rows: Vec<String> = m
        .metric_exprs()
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|e| e.render(names)).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    let _ = writeln!(out, "  g = [{}]", rows.join(",\n       "));
}

/// Writes a single metric block that [`parse_metric_expression`] reads back.
pub fn render_metric(m: &ChartedManifold) -> String {
    let mut out = String::new();
    write_block(&mut out, m);
    out
}

/// Writes `spec` in the submersion file grammar. Parsing the output gives a
/// submersion whose metric and projection agree with `spec` at every point.
pub fn render_submersion(spec: &SubmersionSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}\n", spec.name());
    out.push_str("total {\n");
    write_block(&mut out, spec.total());
    out.push_str("}\n\nbase {\n");
    write_block(&mut out, spec.base());
    out.push_str("}\n\n");
    let pi: Vec<String> = spec
        .pi_exprs()
        .iter()
        .map(|e| e.render(spec.total().coord_names()))
        .collect();
    let _ = writeln!(out, "pi = ({})", pi.join(", "));
    out
}
