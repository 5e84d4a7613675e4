//! Client for external solvers speaking SMT-LIB2 over stdin/stdout.
//!
//! Each query runs in its own solver process: the script declares the
//! variables, asserts the formula, and asks for `(check-sat)` followed by
//! `(get-model)`. Model values are parsed as exact rationals.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};

use crate::arith::{parse_rational, Rational};
use crate::error::{Error, Result};

use super::formula::{LinExpr, LraFormula, Model};
use super::{SatResult, SmtBackend, SolverStats};

#[derive(Clone, Debug)]
pub struct SmtLib2Solver {
    program: String,
    args: Vec<String>,
    timeout: Option<Duration>,
    stats: SolverStats,
}

impl SmtLib2Solver {
    /// `command` is split on whitespace, e.g. `"z3 -in -smt2"`.
    pub fn new(command: &str) -> Result<Self> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::Backend("empty solver command".into()))?;
        Ok(SmtLib2Solver {
            program,
            args: parts.collect(),
            timeout: None,
            stats: SolverStats::default(),
        })
    }

    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }

    /// Locates a usable solver: `$STRATIMP_SMT_SOLVER` if set, otherwise
    /// `z3 -in -smt2` or `cvc5 --lang smt2` when found on `PATH`.
    pub fn discover() -> Option<Self> {
        if let Ok(cmd) = std::env::var("STRATIMP_SMT_SOLVER") {
            if !cmd.trim().is_empty() {
                return SmtLib2Solver::new(&cmd).ok();
            }
        }
        let path = std::env::var_os("PATH")?;
        for (exe, args) in [("z3", "-in -smt2"), ("cvc5", "--lang smt2")] {
            if std::env::split_paths(&path).any(|dir| dir.join(exe).is_file()) {
                return SmtLib2Solver::new(&format!("{exe} {args}")).ok();
            }
        }
        None
    }

    pub fn command_line(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn run(&self, script: &str) -> Result<String> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Backend(format!("cannot start `{}`: {e}", self.command_line())))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let write = stdin.write_all(script.as_bytes());
        drop(stdin);
        write.map_err(|e| Error::Backend(format!("writing to solver: {e}")))?;
        let started = Instant::now();
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) => {
                    if self.timeout.is_some_and(|t| started.elapsed() > t) {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(Error::Backend(format!(
                            "solver timed out after {:.1}s",
                            started.elapsed().as_secs_f64()
                        )));
                    }
                    thread::sleep(Duration::from_millis(2));
                }
                Err(e) => return Err(Error::Backend(format!("waiting for solver: {e}"))),
            }
        }
        reader
            .join()
            .map_err(|_| Error::Backend("solver reader panicked".into()))?
            .map_err(|e| Error::Backend(format!("reading solver output: {e}")))
    }
}

impl SmtBackend for SmtLib2Solver {
    fn name(&self) -> String {
        format!("smtlib2:{}", self.command_line())
    }

    fn check(&mut self, f: &LraFormula) -> Result<SatResult> {
        self.stats.queries += 1;
        let output = self.run(&to_script(f))?;
        let result = parse_response(&output)?;
        match result {
            SatResult::Sat(mut model) => {
                model.complete_for(f);
                if !f.eval(&model) {
                    return Err(Error::Backend("solver model does not satisfy the query".into()));
                }
                self.stats.sat += 1;
                Ok(SatResult::Sat(model))
            }
            SatResult::Unsat => {
                self.stats.unsat += 1;
                Ok(SatResult::Unsat)
            }
        }
    }

    fn stats(&self) -> SolverStats {
        self.stats.clone()
    }
}

fn real_literal(q: &Rational) -> String {
    let mag = q.abs();
    let body = if mag.denom().is_one() {
        format!("{}.0", mag.numer())
    } else {
        format!("(/ {}.0 {}.0)", mag.numer(), mag.denom())
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn term(e: &LinExpr) -> String {
    let mut parts: Vec<String> = e
        .terms
        .iter()
        .map(|(v, c)| {
            if c.is_one() {
                format!("r{v}")
            } else {
                format!("(* {} r{v})", real_literal(c))
            }
        })
        .collect();
    if !e.constant.is_zero() || parts.is_empty() {
        parts.push(real_literal(&e.constant));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn formula(f: &LraFormula, out: &mut String) {
    let nary = |op: &str, fs: &[LraFormula], out: &mut String| {
        out.push('(');
        out.push_str(op);
        for g in fs {
            out.push(' ');
            formula(g, out);
        }
        out.push(')');
    };
    match f {
        LraFormula::True => out.push_str("true"),
        LraFormula::False => out.push_str("false"),
        LraFormula::Bool(b) => {
            let _ = write!(out, "b{b}");
        }
        LraFormula::Leq(l, r) => {
            let _ = write!(out, "(<= {} {})", term(l), term(r));
        }
        LraFormula::Lt(l, r) => {
            let _ = write!(out, "(< {} {})", term(l), term(r));
        }
        LraFormula::Eq(l, r) => {
            let _ = write!(out, "(= {} {})", term(l), term(r));
        }
        LraFormula::Not(g) => {
            out.push_str("(not ");
            formula(g, out);
            out.push(')');
        }
        LraFormula::And(fs) if fs.is_empty() => out.push_str("true"),
        LraFormula::Or(fs) if fs.is_empty() => out.push_str("false"),
        LraFormula::And(fs) => nary("and", fs, out),
        LraFormula::Or(fs) => nary("or", fs, out),
    }
}

/// Full QF_LRA script for one query.
pub fn to_script(f: &LraFormula) -> String {
    let mut s = String::from("(set-option :produce-models true)\n(set-logic QF_LRA)\n");
    for v in f.real_vars() {
        let _ = writeln!(s, "(declare-fun r{v} () Real)");
    }
    for b in f.bool_vars() {
        let _ = writeln!(s, "(declare-fun b{b} () Bool)");
    }
    s.push_str("(assert ");
    formula(f, &mut s);
    s.push_str(")\n(check-sat)\n(get-model)\n(exit)\n");
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Result<Vec<Sexp>> {
    let chars: Vec<char> = text.chars().collect();
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().filter(|_| !stack.is_empty()).ok_or_else(|| {
                    Error::Backend("unbalanced parenthesis in solver output".into())
                })?;
                stack.last_mut().unwrap().push(Sexp::List(done));
            }
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => {}
            '"' | '|' => {
                let close = ch;
                let mut s = String::new();
                i += 1;
                while i < chars.len() && chars[i] != close {
                    s.push(chars[i]);
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
            }
            _ => {
                let mut s = String::new();
                while i < chars.len() && !chars[i].is_whitespace() && !"()\";|".contains(chars[i]) {
                    s.push(chars[i]);
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(s));
                continue;
            }
        }
        i += 1;
    }
    if stack.len() != 1 {
        return Err(Error::Backend("unbalanced parenthesis in solver output".into()));
    }
    Ok(stack.pop().unwrap())
}

fn value(e: &Sexp) -> Result<Rational> {
    let bad = || Error::Backend(format!("unsupported model value {e:?}"));
    match e {
        Sexp::Atom(a) => parse_rational(a).map_err(|_| bad()),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-value(x)?),
            [Sexp::Atom(op), x, y] if op == "-" => Ok(value(x)? - value(y)?),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = value(y)?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(value(x)? / d)
            }
            [Sexp::Atom(op), rest @ ..] if op == "+" => rest.iter().map(value).sum(),
            [Sexp::Atom(op), rest @ ..] if op == "*" => rest.iter().map(value).product(),
            _ => Err(bad()),
        },
    }
}

fn collect_definitions(e: &Sexp, model: &mut Model) -> Result<()> {
    let Sexp::List(items) = e else {
        return Ok(());
    };
    if let [Sexp::Atom(head), Sexp::Atom(name), Sexp::List(params), Sexp::Atom(sort), body] = items.as_slice() {
        if head == "define-fun" && params.is_empty() {
            let id = |prefix: char| name.strip_prefix(prefix).and_then(|r| r.parse::<usize>().ok());
            match sort.as_str() {
                "Real" | "Int" => {
                    if let Some(v) = id('r') {
                        model.reals.insert(v, value(body)?);
                    }
                }
                "Bool" => {
                    if let Some(b) = id('b') {
                        let val = match body {
                            Sexp::Atom(t) if t == "true" => true,
                            Sexp::Atom(t) if t == "false" => false,
                            _ => return Err(Error::Backend(format!("unsupported Bool value {body:?}"))),
                        };
                        model.bools.insert(b, val);
                    }
                }
                _ => {}
            }
            return Ok(());
        }
    }
    items.iter().try_for_each(|i| collect_definitions(i, model))
}

fn parse_response(text: &str) -> Result<SatResult> {
    let sexps = tokenize(text)?;
    let mut iter = sexps.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Backend("solver produced no output".into()))?;
    match first {
        Sexp::Atom(a) if a == "unsat" => Ok(SatResult::Unsat),
        Sexp::Atom(a) if a == "sat" => {
            let mut model = Model::default();
            for e in iter {
                if let Sexp::List(items) = e {
                    if matches!(items.first(), Some(Sexp::Atom(h)) if h == "error") {
                        return Err(Error::Backend(format!("solver error after sat: {e:?}")));
                    }
                }
                collect_definitions(e, &mut model)?;
            }
            Ok(SatResult::Sat(model))
        }
        Sexp::Atom(a) if a == "unknown" => Err(Error::Backend("solver answered unknown".into())),
        other => Err(Error::Backend(format!("unexpected solver response {other:?}"))),
    }
}
