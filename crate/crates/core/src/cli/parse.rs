//! Text format for affine programs.
//!
//! ```text
//! vars: x1, x2;
//! init: x1 >= 0;            # optional
//! start: st;                # optional, defaults to the first node mentioned
//! node st, 1;               # optional, fixes node order
//! edge st -> 1 : [ x1 := 0 ];
//! edge 1 -> 1 : [ guard x1 <= 1000; x2 := -x1; (x2 <= -1; x1 := -2*x1 | x2 >= 0; x1 := -x1 + 1) ];
//! ```
//!
//! Statements are `;`-separated items. An item is `skip`, a parallel
//! assignment `x := e, y := e`, a guard (`guard` is optional) made of
//! comma-separated constraints with `<=`, `>=`, `=` or `==`, or a
//! parenthesized choice `( s | s | ... )`. Constants are integers, fractions
//! `p/q` or exact decimals. `#` and `//` start comments.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::arith::{parse_rational, Matrix, Rational};
use crate::error::{Error, Result};
use crate::program::{Edge, InitialStates, Program, Statement};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &[&str] = &[
    "->", ":=", "<=", ">=", "==", "<", ">", "=", ":", ";", ",", "(", ")", "[", "]", "|", "+", "-", "*", "/",
];

const KEYWORDS: &[&str] = &["vars", "init", "start", "node", "edge", "guard", "skip"];

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
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
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let s: String = chars[i..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_' || **c == '\'')
                .collect();
            Tok::Ident(s)
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let s: String = chars[i..]
                .iter()
                .take_while(|c| c.is_ascii_digit() || **c == '.')
                .collect();
            Tok::Num(s)
        } else if let Some(sym) = SYMBOLS.iter().find(|s| {
            let n = s.chars().count();
            chars[i..].iter().take(n).copied().eq(s.chars())
        }) {
            Tok::Sym(sym)
        } else {
            return Err(Error::Parse {
                line,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        };
        let width = match &tok {
            Tok::Ident(s) | Tok::Num(s) => s.chars().count(),
            Tok::Sym(s) => s.len(),
            Tok::Eof => 0,
        };
        i += width;
        col += width;
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// `coeffs · x + constant`.
struct Affine {
    coeffs: Vec<Rational>,
    constant: Rational,
}

enum Rel {
    Le,
    Ge,
    Eq,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: Vec<String>,
    var_index: BTreeMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected {what}, found {}", self.describe())),
        }
    }

    /// Node names may also be plain integers.
    fn node_name(&mut self) -> Result<String> {
        if let Tok::Num(s) = self.peek().clone() {
            if s.bytes().all(|b| b.is_ascii_digit()) {
                self.pos += 1;
                return Ok(s);
            }
        }
        self.ident("a node name")
    }

    fn number(&mut self) -> Result<Rational> {
        let Tok::Num(first) = self.peek().clone() else {
            return self.error(format!("expected a number, found {}", self.describe()));
        };
        let here = self.pos;
        self.pos += 1;
        let mut text = first;
        if self.is_sym("/") {
            if let Tok::Num(d) = self.peek_at(1).clone() {
                self.pos += 2;
                text = format!("{text}/{d}");
            }
        }
        parse_rational(&text).map_err(|e| {
            let t = &self.toks[here];
            let message = match e {
                Error::Parse { message, .. } => message,
                other => other.to_string(),
            };
            Error::Parse {
                line: t.line,
                column: t.column,
                message,
            }
        })
    }

    fn variable(&mut self) -> Result<usize> {
        let here = self.pos;
        let name = self.ident("a variable")?;
        match self.var_index.get(&name) {
            Some(&i) => Ok(i),
            None => {
                self.pos = here;
                self.error(format!("unknown variable `{name}`"))
            }
        }
    }

    fn affine(&mut self) -> Result<Affine> {
        let n = self.vars.len();
        let mut e = Affine {
            coeffs: vec![Rational::zero(); n],
            constant: Rational::zero(),
        };
        let mut first = true;
        loop {
            let sign = if self.eat_sym("-") {
                -Rational::one()
            } else if self.eat_sym("+") || first {
                Rational::one()
            } else {
                break;
            };
            first = false;
            match self.peek().clone() {
                Tok::Num(_) => {
                    let k = self.number()? * &sign;
                    let has_var = if self.eat_sym("*") {
                        true
                    } else {
                        matches!(self.peek(), Tok::Ident(s) if self.var_index.contains_key(s))
                    };
                    if has_var {
                        let v = self.variable()?;
                        e.coeffs[v] += k;
                    } else {
                        e.constant += k;
                    }
                }
                Tok::Ident(_) => {
                    let v = self.variable()?;
                    if self.eat_sym("*") {
                        let k = self.number()?;
                        e.coeffs[v] += k * &sign;
                    } else {
                        e.coeffs[v] += sign;
                    }
                }
                _ => return self.error(format!("expected a term, found {}", self.describe())),
            }
        }
        Ok(e)
    }

    fn relation(&mut self) -> Result<Rel> {
        let rel = match self.peek() {
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym("=") | Tok::Sym("==") => Rel::Eq,
            Tok::Sym("<") | Tok::Sym(">") => {
                return self.error("strict inequalities are not supported; use <= or >=")
            }
            _ => return self.error(format!("expected `<=`, `>=` or `=`, found {}", self.describe())),
        };
        self.pos += 1;
        Ok(rel)
    }

    /// One constraint as rows `a x <= b`.
    fn constraint(&mut self) -> Result<Vec<(Vec<Rational>, Rational)>> {
        let lhs = self.affine()?;
        let rel = self.relation()?;
        let rhs = self.affine()?;
        let a: Vec<Rational> = lhs.coeffs.iter().zip(&rhs.coeffs).map(|(l, r)| l - r).collect();
        let b = &rhs.constant - &lhs.constant;
        let neg = || (a.iter().map(|x| -x).collect::<Vec<_>>(), -b.clone());
        Ok(match rel {
            Rel::Le => vec![(a.clone(), b.clone())],
            Rel::Ge => vec![neg()],
            Rel::Eq => vec![(a.clone(), b.clone()), neg()],
        })
    }

    fn constraints(&mut self) -> Result<Vec<(Vec<Rational>, Rational)>> {
        let mut rows = self.constraint()?;
        while self.eat_sym(",") {
            rows.extend(self.constraint()?);
        }
        Ok(rows)
    }

    fn rows_to_guard(&self, rows: Vec<(Vec<Rational>, Rational)>) -> Result<Statement> {
        let (a, b): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        Statement::guard(Matrix::from_rows(self.vars.len(), a)?, b)
    }

    fn assignment(&mut self) -> Result<Statement> {
        let n = self.vars.len();
        let mut a = Matrix::identity(n);
        let mut b = vec![Rational::zero(); n];
        let mut seen = vec![false; n];
        loop {
            let here = self.pos;
            let v = self.variable()?;
            if seen[v] {
                self.pos = here;
                return self.error(format!("`{}` is assigned twice", self.vars[v]));
            }
            seen[v] = true;
            self.expect_sym(":=")?;
            let e = self.affine()?;
            for (j, c) in e.coeffs.into_iter().enumerate() {
                a.set(v, j, c);
            }
            b[v] = e.constant;
            let more = matches!(self.peek_at(1), Tok::Ident(_)) && matches!(self.peek_at(2), Tok::Sym(":="));
            if !(self.is_sym(",") && more) {
                break;
            }
            self.pos += 1;
        }
        Statement::assign(a, b)
    }

    fn item(&mut self) -> Result<Statement> {
        if self.eat_sym("(") {
            let mut branches = vec![self.statement()?];
            while self.eat_sym("|") {
                branches.push(self.statement()?);
            }
            self.expect_sym(")")?;
            return if branches.len() == 1 {
                Ok(branches.pop().expect("one branch"))
            } else {
                Statement::choice(branches)
            };
        }
        if self.is_keyword("skip") {
            self.pos += 1;
            return Ok(Statement::skip(self.vars.len()));
        }
        if self.is_keyword("guard") {
            self.pos += 1;
            let rows = self.constraints()?;
            return self.rows_to_guard(rows);
        }
        if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym(":=")) {
            return self.assignment();
        }
        if matches!(self.peek(), Tok::Ident(_) | Tok::Num(_) | Tok::Sym("-") | Tok::Sym("+")) {
            let rows = self.constraints()?;
            return self.rows_to_guard(rows);
        }
        self.error(format!("expected a statement, found {}", self.describe()))
    }

    fn statement(&mut self) -> Result<Statement> {
        let mut items = vec![self.item()?];
        while self.eat_sym(";") {
            if self.is_sym("]") || self.is_sym(")") || self.is_sym("|") {
                break;
            }
            items.push(self.item()?);
        }
        if items.len() == 1 {
            Ok(items.pop().expect("one item"))
        } else {
            Statement::seq(items)
        }
    }
}

/// Parses a program in the text format described in the module docs.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: Vec::new(),
        var_index: BTreeMap::new(),
    };
    if !p.is_keyword("vars") {
        return p.error("a program starts with `vars:`");
    }
    p.pos += 1;
    p.expect_sym(":")?;
    loop {
        let here = p.pos;
        let v = p.ident("a variable name")?;
        if p.var_index.insert(v.clone(), p.vars.len()).is_some() {
            p.pos = here;
            return p.error(format!("variable `{v}` declared twice"));
        }
        p.vars.push(v);
        if !p.eat_sym(",") {
            break;
        }
    }
    p.expect_sym(";")?;

    let mut nodes: Vec<String> = Vec::new();
    let node_of = |name: String, nodes: &mut Vec<String>| -> usize {
        match nodes.iter().position(|x| *x == name) {
            Some(i) => i,
            None => {
                nodes.push(name);
                nodes.len() - 1
            }
        }
    };
    let mut start: Option<(String, usize, usize)> = None;
    let mut init: Option<InitialStates> = None;
    let mut edges = Vec::new();
    while *p.peek() != Tok::Eof {
        let t = p.toks[p.pos].clone();
        match &t.tok {
            Tok::Ident(k) if k == "init" => {
                if init.is_some() {
                    return p.error("`init` given twice");
                }
                p.pos += 1;
                p.expect_sym(":")?;
                let rows = p.constraints()?;
                let (a, b): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
                init = Some(InitialStates {
                    a: Matrix::from_rows(p.vars.len(), a)?,
                    b,
                });
                p.expect_sym(";")?;
            }
            Tok::Ident(k) if k == "start" => {
                if start.is_some() {
                    return p.error("`start` given twice");
                }
                p.pos += 1;
                p.expect_sym(":")?;
                let name = p.node_name()?;
                start = Some((name, t.line, t.column));
                p.expect_sym(";")?;
            }
            Tok::Ident(k) if k == "node" => {
                p.pos += 1;
                loop {
                    let name = p.node_name()?;
                    node_of(name, &mut nodes);
                    if !p.eat_sym(",") {
                        break;
                    }
                }
                p.expect_sym(";")?;
            }
            Tok::Ident(k) if k == "edge" => {
                p.pos += 1;
                let from = p.node_name()?;
                p.expect_sym("->")?;
                let to = p.node_name()?;
                p.expect_sym(":")?;
                p.expect_sym("[")?;
                let stmt = p.statement()?;
                p.expect_sym("]")?;
                p.expect_sym(";")?;
                let from = node_of(from, &mut nodes);
                let to = node_of(to, &mut nodes);
                edges.push(Edge { from, stmt, to });
            }
            _ => return p.error(format!("expected `init`, `start`, `node` or `edge`, found {}", p.describe())),
        }
    }
    let start = match start {
        Some((name, line, column)) => match nodes.iter().position(|x| *x == name) {
            Some(i) => i,
            None => {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!("start node `{name}` has no edges and is not declared"),
                })
            }
        },
        None if nodes.is_empty() => return p.error("the program has no nodes"),
        None => 0,
    };
    Program::new(p.vars, nodes, start, edges, init)
}
