//! The bound-expression language.
//!
//! ```text
//! expr    := term (('+'|'-') term)*
//! term    := factor (('*'|'/') factor)*
//! factor  := unary ('^' factor)?
//! unary   := '-' unary | primary
//! primary := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'
//! NUMBER  := digits ['.' digits] | digits '/' digits
//! ```
//!
//! `-x^2` is `-(x^2)`. A rational literal `a/b` is written without spaces
//! and is only recognized where it cannot change the value of the usual
//! reading: `x^2/6` is `(x^2)/6` and `x/1/2` is `(x/1)/2`. `a / b` with
//! spaces is always a division. Names followed by `(` are
//! functions; otherwise a name is a constant if the caller's scope knows it
//! (`pi` always), then `x`/`y`, then a parameter.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::oracle::{self, FunctionId, NumError, Precision, RefValue};
use crate::real::{Ext, Real};

pub const MAX_LEN: usize = 4096;
pub const MAX_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Exp,
    Log,
    Abs,
    Gamma,
    Beta,
    Min,
    Max,
}

impl Func {
    const ALL: [Func; 17] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Asin,
        Func::Acos,
        Func::Atan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Gamma,
        Func::Beta,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Beta => "beta",
            Func::Min => "min",
            Func::Max => "max",
            f => f.oracle().unwrap().name(),
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Beta | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    fn oracle(self) -> Option<FunctionId> {
        Some(match self {
            Func::Sin => FunctionId::Sin,
            Func::Cos => FunctionId::Cos,
            Func::Tan => FunctionId::Tan,
            Func::Asin => FunctionId::Asin,
            Func::Acos => FunctionId::Acos,
            Func::Atan => FunctionId::Atan,
            Func::Sinh => FunctionId::Sinh,
            Func::Cosh => FunctionId::Cosh,
            Func::Tanh => FunctionId::Tanh,
            Func::Sqrt => FunctionId::Sqrt,
            Func::Exp => FunctionId::Exp,
            Func::Log => FunctionId::Log,
            Func::Gamma => FunctionId::Gamma,
            Func::Abs | Func::Beta | Func::Min | Func::Max => return None,
        })
    }
}

/// A numeric literal: its reduced exact value and its source spelling.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Number {
    pub num: i128,
    pub den: i128,
    pub text: String,
}

impl Number {
    pub fn integer(n: u64) -> Self {
        Number { num: n as i128, den: 1, text: n.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Number(Number),
    Const(String),
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn depth(&self) -> usize {
        match self {
            Expr::Number(_) | Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => 1,
            Expr::Neg(e) => 1 + e.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
            Expr::Call(_, args) => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }

    pub fn uses_var(&self, v: Var) -> bool {
        let mut hit = false;
        self.visit(&mut |e| hit |= matches!(e, Expr::Var(w) if *w == v));
        hit
    }

    /// Parameter names, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                out.push(p.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    /// Constant names, sorted and deduplicated.
    pub fn constants(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Const(c) = e {
                out.push(c.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    /// True when the expression has no variables and no parameters.
    pub fn is_closed(&self) -> bool {
        let mut open = false;
        self.visit(&mut |e| open |= matches!(e, Expr::Var(_) | Expr::Param(_)));
        !open
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(e) => e.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }
}

// ------------------------------------------------------------------ parsing

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<&'static str>, found: String },
    #[error("{name} takes {expected} argument(s), found {found} (byte {offset})")]
    Arity { name: &'static str, expected: usize, found: usize, offset: usize },
    #[error("expression nests deeper than {MAX_DEPTH} (byte {offset})")]
    TooDeep { offset: usize },
    #[error("expression is {0} bytes long; the limit is {MAX_LEN}")]
    TooLong(usize),
    #[error("empty expression")]
    Empty,
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::Arity { offset, .. }
            | ParseError::TooDeep { offset } => Some(*offset),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok<'a> {
    Num(Number),
    Name(&'a str),
    Sym(char),
    End,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {}", n.text),
            Tok::Name(s) => format!("name {s}"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::End => "end of input".into(),
        }
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// `a/b` is a single literal only where reading it as a division would give
// the same value: not after `/` or `^`, and not before `^` or a decimal point.
fn rational_ok(prev: &[(Tok<'_>, usize)], b: &[u8], end: usize) -> bool {
    if matches!(prev.last(), Some((Tok::Sym('/' | '^'), _))) {
        return false;
    }
    let next = b[end..].iter().find(|c| !c.is_ascii_whitespace());
    !(matches!(next, Some(b'^')) || b.get(end) == Some(&b'.'))
}

fn lex(text: &str) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |mut j: usize| {
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    let too_big = |at: usize, s: &str| ParseError::Syntax {
        offset: at,
        expected: vec!["number with at most 36 digits"],
        found: s.to_owned(),
    };
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            let j = digits(i);
            let int = &text[start..j];
            if j + 1 < b.len() && b[j] == b'.' && b[j + 1].is_ascii_digit() {
                let k = digits(j + 1);
                let frac = &text[j + 1..k];
                let all = format!("{int}{frac}");
                if all.len() > 36 {
                    return Err(too_big(start, &text[start..k]));
                }
                let num: i128 = all.parse().unwrap();
                let den = 10i128.pow(frac.len() as u32);
                let g = gcd(num, den).max(1);
                out.push((Tok::Num(Number { num: num / g, den: den / g, text: text[start..k].to_owned() }), start));
                i = k;
            } else if j + 1 < b.len() && b[j] == b'/' && b[j + 1].is_ascii_digit() && rational_ok(&out, b, digits(j + 1)) {
                let k = digits(j + 1);
                if int.len() > 36 || k - j - 1 > 36 {
                    return Err(too_big(start, &text[start..k]));
                }
                let num: i128 = int.parse().unwrap();
                let den: i128 = text[j + 1..k].parse().unwrap();
                if den == 0 {
                    return Err(ParseError::Syntax {
                        offset: j + 1,
                        expected: vec!["nonzero denominator"],
                        found: "0".into(),
                    });
                }
                let g = gcd(num, den).max(1);
                out.push((Tok::Num(Number { num: num / g, den: den / g, text: text[start..k].to_owned() }), start));
                i = k;
            } else {
                if int.len() > 36 {
                    return Err(too_big(start, int));
                }
                out.push((Tok::Num(Number { num: int.parse().unwrap(), den: 1, text: int.to_owned() }), start));
                i = j;
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Name(&text[start..i]), start));
        } else if b"+-*/^(),".contains(&c) {
            out.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap();
            return Err(ParseError::Syntax {
                offset: i,
                expected: vec!["number", "name", "operator", "'('", "')'", "','"],
                found: format!("'{ch}'"),
            });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a, 's> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
    nest: usize,
    is_const: &'s dyn Fn(&str) -> bool,
}

const PRIMARY: [&str; 4] = ["number", "name", "'('", "'-'"];

impl<'a> Parser<'a, '_> {
    fn peek(&self) -> &Tok<'a> {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok<'a>, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax { offset: self.offset(), expected, found: self.peek().describe() }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.nest += 1;
        if self.nest > MAX_DEPTH {
            return Err(ParseError::TooDeep { offset: self.offset() });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            self.enter()?;
            let exp = self.factor()?;
            self.nest -= 1;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            self.enter()?;
            // -a^b is -(a^b): the operand of a minus is a full factor.
            let e = self.factor()?;
            self.nest -= 1;
            return Ok(Expr::Neg(Box::new(e)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(n) => Ok(Expr::Number(n)),
            Tok::Sym('(') => {
                self.enter()?;
                let e = self.expr()?;
                self.nest -= 1;
                self.expect_sym(')', vec!["operator", "')'"])?;
                Ok(e)
            }
            Tok::Name(name) => {
                if *self.peek() == Tok::Sym('(') {
                    let Some(f) = Func::from_name(name) else {
                        return Err(ParseError::Syntax { offset: at, expected: vec!["function name"], found: format!("name {name}") });
                    };
                    self.bump();
                    self.enter()?;
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Sym(',') {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.nest -= 1;
                    self.expect_sym(')', vec!["operator", "','", "')'"])?;
                    if args.len() != f.arity() {
                        return Err(ParseError::Arity { name: f.name(), expected: f.arity(), found: args.len(), offset: at });
                    }
                    return Ok(Expr::Call(f, args));
                }
                if Func::from_name(name).is_some() {
                    return Err(self.fail(vec!["'('"]));
                }
                Ok(if name == "pi" || (self.is_const)(name) {
                    Expr::Const(name.to_owned())
                } else if name == "x" {
                    Expr::Var(Var::X)
                } else if name == "y" {
                    Expr::Var(Var::Y)
                } else {
                    Expr::Param(name.to_owned())
                })
            }
            other => Err(ParseError::Syntax { offset: at, expected: PRIMARY.to_vec(), found: other.describe() }),
        }
    }

    fn expect_sym(&mut self, c: char, expected: Vec<&'static str>) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(expected))
        }
    }
}

/// Parses with only `pi` known as a constant.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    parse_expr_with(text, &|_| false)
}

/// Parses, treating names for which `is_const` holds as constant references.
pub fn parse_expr_with(text: &str, is_const: &dyn Fn(&str) -> bool) -> Result<Expr, ParseError> {
    if text.len() > MAX_LEN {
        return Err(ParseError::TooLong(text.len()));
    }
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, nest: 0, is_const };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.fail(vec!["operator", "end of input"]));
    }
    if e.depth() > MAX_DEPTH {
        return Err(ParseError::TooDeep { offset: 0 });
    }
    Ok(e)
}

// ----------------------------------------------------------------- printing

/// Canonical fully parenthesized text.
pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(e, &mut s);
    s
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Number(n) if n.text.contains('/') => {
            out.push('(');
            out.push_str(&n.text);
            out.push(')');
        }
        Expr::Number(n) => out.push_str(&n.text),
        Expr::Const(c) | Expr::Param(c) => out.push_str(c),
        Expr::Var(v) => out.push_str(v.name()),
        Expr::Neg(a) => {
            out.push_str("(-");
            write_expr(a, out);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            out.push('(');
            write_expr(a, out);
            // Keep an integer divided by an integer from reading back as a
            // rational literal.
            let spaced = *op == BinOp::Div
                && matches!(&**a, Expr::Number(n) if !n.text.contains(['.', '/']))
                && matches!(&**b, Expr::Number(_));
            if spaced {
                out.push_str(" / ");
            } else {
                out.push(op.symbol());
            }
            write_expr(b, out);
            out.push(')');
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr(a, out);
            }
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self))
    }
}

// --------------------------------------------------------------- evaluation

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound name {0}")]
    Unbound(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

impl EvalError {
    /// True for failures caused by limited precision rather than by the
    /// mathematics.
    pub fn is_unresolved(&self) -> bool {
        matches!(self, EvalError::Num(NumError::Unresolved(_) | NumError::Overflow))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Rat(i128, i128);

impl Rat {
    fn new(n: i128, d: i128) -> Option<Rat> {
        if d == 0 {
            return None;
        }
        let g = gcd(n, d).max(1);
        let (n, d) = (n / g, d / g);
        Some(if d < 0 { Rat(n.checked_neg()?, d.checked_neg()?) } else { Rat(n, d) })
    }

    fn add(self, o: Rat) -> Option<Rat> {
        Rat::new(self.0.checked_mul(o.1)?.checked_add(o.0.checked_mul(self.1)?)?, self.1.checked_mul(o.1)?)
    }

    fn mul(self, o: Rat) -> Option<Rat> {
        Rat::new(self.0.checked_mul(o.0)?, self.1.checked_mul(o.1)?)
    }

    fn recip(self) -> Option<Rat> {
        Rat::new(self.1, self.0)
    }

    fn powi(self, n: i128) -> Option<Rat> {
        let k = u32::try_from(n.unsigned_abs()).ok()?;
        if k > 256 || (self.0 == 0 && n <= 0) {
            return None;
        }
        let r = Rat::new(self.0.checked_pow(k)?, self.1.checked_pow(k)?)?;
        if n < 0 {
            r.recip()
        } else {
            Some(r)
        }
    }

    fn value<R: Real>(self) -> RefValue<R> {
        let v = R::from_i128(self.0) / R::from_i128(self.1);
        let small = |x: i128| x.unsigned_abs() < (1u128 << 53);
        let exact = self.1.unsigned_abs().is_power_of_two() && small(self.0) && small(self.1);
        let e = if exact {
            0.0
        } else if small(self.0) && small(self.1) {
            R::UNIT * v.to_f64().abs()
        } else {
            3.0 * R::UNIT * v.to_f64().abs()
        };
        RefValue::new(v, e)
    }
}

#[derive(Clone, Debug)]
enum Node<R> {
    Lit(RefValue<R>, Option<Rat>),
    Var(Var),
    Param(usize),
    Neg(usize),
    Bin(BinOp, usize, usize),
    PowRat(usize, i128, i128),
    Call(Func, usize),
    Call2(Func, usize, usize),
}

/// An expression lowered for repeated evaluation in one backend: constant
/// subtrees are folded (exactly when rational) and names bound to slots.
#[derive(Clone, Debug)]
pub struct Compiled<R> {
    nodes: Vec<Node<R>>,
    root: usize,
    params: Vec<String>,
    uses_y: bool,
}

/// Resolves constant names while compiling.
pub trait ConstLookup<R> {
    fn lookup(&self, name: &str) -> Option<RefValue<R>>;
}

impl<R: Real> ConstLookup<R> for () {
    fn lookup(&self, _: &str) -> Option<RefValue<R>> {
        None
    }
}

impl<R: Real> ConstLookup<R> for BTreeMap<String, RefValue<R>> {
    fn lookup(&self, name: &str) -> Option<RefValue<R>> {
        self.get(name).copied()
    }
}

impl<R: Real> Compiled<R> {
    /// Lowers `e`; `params` fixes the slot order of parameter values.
    pub fn new(e: &Expr, consts: &dyn ConstLookup<R>, params: &[String]) -> Result<Self, EvalError> {
        let mut c = Compiled { nodes: Vec::new(), root: 0, params: params.to_vec(), uses_y: e.uses_var(Var::Y) };
        c.root = c.lower(e, consts)?;
        Ok(c)
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    pub fn uses_y(&self) -> bool {
        self.uses_y
    }

    /// The folded value when the expression is closed.
    pub fn constant(&self) -> Option<RefValue<R>> {
        match &self.nodes[self.root] {
            Node::Lit(v, _) => Some(*v),
            _ => None,
        }
    }

    fn push(&mut self, n: Node<R>) -> usize {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn lit(&self, i: usize) -> Option<(RefValue<R>, Option<Rat>)> {
        match &self.nodes[i] {
            Node::Lit(v, r) => Some((*v, *r)),
            _ => None,
        }
    }

    fn fold_or(&mut self, n: Node<R>) -> Result<usize, EvalError> {
        let idx = self.push(n);
        let all_lit = match &self.nodes[idx] {
            Node::Neg(a) | Node::Call(_, a) | Node::PowRat(a, ..) => self.lit(*a).is_some(),
            Node::Bin(_, a, b) | Node::Call2(_, a, b) => self.lit(*a).is_some() && self.lit(*b).is_some(),
            _ => false,
        };
        if all_lit {
            let v = self.eval_node(idx, R::zero(), None, &[])?;
            self.nodes.truncate(idx);
            return Ok(self.push(Node::Lit(v, None)));
        }
        Ok(idx)
    }

    fn lower(&mut self, e: &Expr, consts: &dyn ConstLookup<R>) -> Result<usize, EvalError> {
        Ok(match e {
            Expr::Number(n) => {
                let r = Rat(n.num, n.den);
                self.push(Node::Lit(r.value(), Some(r)))
            }
            Expr::Const(name) => {
                let v = if name == "pi" {
                    RefValue::pi()
                } else {
                    consts.lookup(name).ok_or_else(|| EvalError::Unbound(name.clone()))?
                };
                self.push(Node::Lit(v, None))
            }
            Expr::Var(v) => self.push(Node::Var(*v)),
            Expr::Param(p) => {
                let slot = self.params.iter().position(|q| q == p).ok_or_else(|| EvalError::Unbound(p.clone()))?;
                self.push(Node::Param(slot))
            }
            Expr::Neg(a) => {
                let a = self.lower(a, consts)?;
                if let Some((v, r)) = self.lit(a) {
                    let r = r.and_then(|r| Rat::new(r.0.checked_neg()?, r.1));
                    return Ok(self.push(Node::Lit(v.neg(), r)));
                }
                self.push(Node::Neg(a))
            }
            Expr::Binary(op, a, b) => {
                let a = self.lower(a, consts)?;
                let b = self.lower(b, consts)?;
                let ra = self.lit(a).and_then(|l| l.1);
                let rb = self.lit(b).and_then(|l| l.1);
                if let (Some(x), Some(y)) = (ra, rb) {
                    let exact = match op {
                        BinOp::Add => x.add(y),
                        BinOp::Sub => Rat::new(y.0.checked_neg().unwrap_or(i128::MAX), y.1).and_then(|ny| x.add(ny)),
                        BinOp::Mul => x.mul(y),
                        BinOp::Div => y.recip().and_then(|iy| x.mul(iy)),
                        BinOp::Pow if y.1 == 1 => {
                            if x.0 == 0 && y.0 == 0 {
                                return Err(NumError::ZeroPowZero.into());
                            }
                            x.powi(y.0)
                        }
                        BinOp::Pow => None,
                    };
                    if let Some(r) = exact {
                        return Ok(self.push(Node::Lit(r.value(), Some(r))));
                    }
                }
                if *op == BinOp::Pow {
                    if let Some(Rat(p, q)) = rb {
                        return self.fold_or(Node::PowRat(a, p, q));
                    }
                }
                self.fold_or(Node::Bin(*op, a, b))?
            }
            Expr::Call(f, args) => {
                if f.arity() == 2 {
                    let a = self.lower(&args[0], consts)?;
                    let b = self.lower(&args[1], consts)?;
                    self.fold_or(Node::Call2(*f, a, b))?
                } else {
                    let a = self.lower(&args[0], consts)?;
                    self.fold_or(Node::Call(*f, a))?
                }
            }
        })
    }

    /// Evaluates at `x` (and `y`) with parameter values in slot order.
    pub fn eval(&self, x: R, y: Option<R>, params: &[RefValue<R>]) -> Result<RefValue<R>, EvalError> {
        if self.uses_y && y.is_none() {
            return Err(EvalError::Unbound("y".into()));
        }
        if params.len() < self.params.len() {
            return Err(EvalError::Unbound(self.params[params.len()].clone()));
        }
        self.eval_node(self.root, x, y, params)
    }

    fn eval_node(&self, i: usize, x: R, y: Option<R>, ps: &[RefValue<R>]) -> Result<RefValue<R>, EvalError> {
        let ev = |j: usize| self.eval_node(j, x, y, ps);
        Ok(match &self.nodes[i] {
            Node::Lit(v, _) => *v,
            Node::Var(Var::X) => RefValue::exact(x),
            Node::Var(Var::Y) => RefValue::exact(y.ok_or_else(|| EvalError::Unbound("y".into()))?),
            Node::Param(s) => ps[*s],
            Node::Neg(a) => ev(*a)?.neg(),
            Node::Bin(op, a, b) => {
                let (a, b) = (ev(*a)?, ev(*b)?);
                match op {
                    BinOp::Add => a.add(b)?,
                    BinOp::Sub => a.sub(b)?,
                    BinOp::Mul => a.mul(b)?,
                    BinOp::Div => a.div(b)?,
                    BinOp::Pow => a.powf(b)?,
                }
            }
            Node::PowRat(a, p, q) => ev(*a)?.pow_ratio(*p, *q)?,
            Node::Call(f, a) => {
                let a = ev(*a)?;
                match f.oracle() {
                    Some(id) => oracle::apply(id, a)?,
                    None => a.abs(),
                }
            }
            Node::Call2(f, a, b) => {
                let (a, b) = (ev(*a)?, ev(*b)?);
                match f {
                    Func::Min => a.min(b),
                    Func::Max => a.max(b),
                    _ => oracle::beta_ref(a, b)?,
                }
            }
        })
    }
}

/// Name bindings for [`eval_expr`].
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub bindings: BTreeMap<String, Ext>,
    pub constants: BTreeMap<String, RefValue<Ext>>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: Ext) -> Self {
        self.bindings.insert(name.to_owned(), v);
        self
    }
}

/// Evaluates `e` in extended precision.
pub fn eval_expr(e: &Expr, env: &Env, prec: Precision) -> Result<RefValue, EvalError> {
    let _ = prec;
    let params = e.params();
    let c = Compiled::<Ext>::new(e, &env.constants, &params)?;
    let lookup = |n: &str| env.bindings.get(n).copied().ok_or_else(|| EvalError::Unbound(n.to_owned()));
    let x = if e.uses_var(Var::X) { lookup("x")? } else { Ext::ZERO };
    let y = if e.uses_var(Var::Y) { Some(lookup("y")?) } else { None };
    let pv = params.iter().map(|p| lookup(p).map(RefValue::exact)).collect::<Result<Vec<_>, _>>()?;
    c.eval(x, y, &pv)
}
