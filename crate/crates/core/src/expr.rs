//! Scalar expressions over chart coordinates.
//!
//! The grammar is deliberately small: enough to write metric entries,
//! structure tensors and Lee forms in closed form, nothing more.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := base ('^' rational)?
//! base     := number | ident | func '(' expr ')' | '(' expr ')' | '-' base
//! func     := exp | log | sin | cos | sqrt
//! rational := uint | '(' '-'? uint ('/' uint)? ')'
//! ```
//!
//! Identifiers of the form `x1 .. xn` are chart coordinates; any other
//! identifier is a named parameter bound at evaluation time. Exponents are
//! rational literals, so `x1^2`, `x1^(-2)` and `x1^(1/2)` parse while
//! `x1^x2` does not. Note that `^` applies to a whole `base`, so `-x1^2`
//! is `(-x1)^2`; printing inserts parentheses wherever needed to keep
//! parse -> print -> parse stable.

use crate::error::{Error, Result};
use crate::jet::Jet2;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Reduced rational exponent, `den >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let s = if den < 0 { -1 } else { 1 };
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        Rational {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn is_integer(self) -> bool {
        self.den == 1
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Coord(usize),
    Param(String),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Rational),
    Neg(Box<Node>),
    Exp(Box<Node>),
    Log(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Sqrt(Box<Node>),
}

/// An expression tied to a chart dimension, with its free coordinates
/// (0-based) and free parameter names collected up front.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarExpr {
    dim: usize,
    ast: Node,
    coords: BTreeSet<usize>,
    params: BTreeSet<String>,
}

pub type Params = BTreeMap<String, f64>;

impl ScalarExpr {
    pub fn parse(text: &str, dim: usize) -> Result<ScalarExpr> {
        let tokens = lex(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            end: text.len(),
            dim,
        };
        let ast = parser.expr()?;
        if parser.pos < parser.tokens.len() {
            return Err(Error::Syntax {
                offset: parser.tokens[parser.pos].offset,
                message: "unexpected trailing input".into(),
            });
        }
        Ok(ScalarExpr::from_ast(ast, dim))
    }

    fn from_ast(ast: Node, dim: usize) -> ScalarExpr {
        let mut coords = BTreeSet::new();
        let mut params = BTreeSet::new();
        collect_free(&ast, &mut coords, &mut params);
        ScalarExpr {
            dim,
            ast,
            coords,
            params,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Free coordinate indices, 0-based.
    pub fn free_coords(&self) -> &BTreeSet<usize> {
        &self.coords
    }

    pub fn free_params(&self) -> &BTreeSet<String> {
        &self.params
    }

    pub fn number(v: f64, dim: usize) -> ScalarExpr {
        ScalarExpr::from_ast(const_node(v), dim)
    }

    /// 0-based coordinate index.
    pub fn coordinate(k: usize, dim: usize) -> ScalarExpr {
        assert!(k < dim, "coordinate index out of range");
        ScalarExpr::from_ast(Node::Coord(k), dim)
    }

    pub fn parameter(name: &str, dim: usize) -> ScalarExpr {
        ScalarExpr::from_ast(Node::Param(name.to_string()), dim)
    }

    pub fn add(&self, o: &ScalarExpr) -> ScalarExpr {
        self.combine(o, add_node)
    }

    pub fn sub(&self, o: &ScalarExpr) -> ScalarExpr {
        self.combine(o, sub_node)
    }

    pub fn mul(&self, o: &ScalarExpr) -> ScalarExpr {
        self.combine(o, mul_node)
    }

    pub fn div(&self, o: &ScalarExpr) -> ScalarExpr {
        self.combine(o, div_node)
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr::from_ast(neg_node(self.ast.clone()), self.dim)
    }

    pub fn exp(&self) -> ScalarExpr {
        ScalarExpr::from_ast(Node::Exp(Box::new(self.ast.clone())), self.dim)
    }

    pub fn sqrt(&self) -> ScalarExpr {
        ScalarExpr::from_ast(Node::Sqrt(Box::new(self.ast.clone())), self.dim)
    }

    pub fn powi(&self, p: i64) -> ScalarExpr {
        ScalarExpr::from_ast(pow_node(self.ast.clone(), Rational::new(p, 1)), self.dim)
    }

    pub fn scale(&self, c: f64) -> ScalarExpr {
        ScalarExpr::from_ast(mul_node(const_node(c), self.ast.clone()), self.dim)
    }

    fn combine(&self, o: &ScalarExpr, f: impl Fn(Node, Node) -> Node) -> ScalarExpr {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        ScalarExpr::from_ast(f(self.ast.clone(), o.ast.clone()), self.dim)
    }

    /// Exact symbolic partial derivative with respect to coordinate `k`
    /// (0-based). Trees are lightly pruned (dropped zero terms, unit
    /// factors) but never otherwise rewritten.
    pub fn derivative(&self, k: usize) -> ScalarExpr {
        assert!(k < self.dim, "coordinate index out of range");
        ScalarExpr::from_ast(derive(&self.ast, k), self.dim)
    }

    /// Reinterpret over a larger chart; free coordinates keep their index.
    pub fn promote(&self, dim: usize) -> Result<ScalarExpr> {
        if let Some(&k) = self.coords.iter().next_back() {
            if k >= dim {
                return Err(Error::CoordOutOfRange { index: k + 1, dim });
            }
        }
        Ok(ScalarExpr {
            dim,
            ast: self.ast.clone(),
            coords: self.coords.clone(),
            params: self.params.clone(),
        })
    }

    /// Re-index into a larger chart, moving coordinate `k` to `k + offset`.
    pub fn shift_coords(&self, offset: usize, dim: usize) -> Result<ScalarExpr> {
        if let Some(&k) = self.coords.iter().next_back() {
            if k + offset >= dim {
                return Err(Error::CoordOutOfRange {
                    index: k + offset + 1,
                    dim,
                });
            }
        }
        Ok(ScalarExpr::from_ast(shift(&self.ast, offset), dim))
    }

    pub fn eval_value(&self, point: &[f64], params: &Params) -> Result<f64> {
        self.check_point(point)?;
        eval_value(&self.ast, point, params)
    }

    pub fn eval_jet(&self, point: &[f64], params: &Params) -> Result<Jet2> {
        self.check_point(point)?;
        eval_jet(&self.ast, point, params)
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::Dimension(format!(
                "expression over {} coordinates evaluated at a point of length {}",
                self.dim,
                point.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.ast, 1)
    }
}

fn collect_free(node: &Node, coords: &mut BTreeSet<usize>, params: &mut BTreeSet<String>) {
    match node {
        Node::Const(_) => {}
        Node::Coord(k) => {
            coords.insert(*k);
        }
        Node::Param(name) => {
            params.insert(name.clone());
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            collect_free(a, coords, params);
            collect_free(b, coords, params);
        }
        Node::Pow(a, _) => collect_free(a, coords, params),
        Node::Neg(a) | Node::Exp(a) | Node::Log(a) | Node::Sin(a) | Node::Cos(a)
        | Node::Sqrt(a) => collect_free(a, coords, params),
    }
}

// ---------------------------------------------------------------------------
// construction helpers with light pruning

fn const_node(v: f64) -> Node {
    if v < 0.0 {
        Node::Neg(Box::new(Node::Const(-v)))
    } else {
        Node::Const(v)
    }
}

fn is_const(node: &Node, v: f64) -> bool {
    matches!(node, Node::Const(c) if *c == v)
}

fn add_node(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    Node::Add(Box::new(a), Box::new(b))
}

fn sub_node(a: Node, b: Node) -> Node {
    if is_const(&b, 0.0) {
        return a;
    }
    if is_const(&a, 0.0) {
        return neg_node(b);
    }
    Node::Sub(Box::new(a), Box::new(b))
}

fn mul_node(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Node::Const(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Node::Mul(Box::new(a), Box::new(b))
}

fn div_node(a: Node, b: Node) -> Node {
    if is_const(&a, 0.0) {
        return Node::Const(0.0);
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Node::Div(Box::new(a), Box::new(b))
}

fn neg_node(a: Node) -> Node {
    match a {
        Node::Neg(inner) => *inner,
        Node::Const(c) if c == 0.0 => Node::Const(0.0),
        other => Node::Neg(Box::new(other)),
    }
}

fn pow_node(a: Node, r: Rational) -> Node {
    if r.num == 0 {
        return Node::Const(1.0);
    }
    if r.num == 1 && r.den == 1 {
        return a;
    }
    Node::Pow(Box::new(a), r)
}

fn shift(node: &Node, offset: usize) -> Node {
    let go = |a: &Node| Box::new(shift(a, offset));
    match node {
        Node::Const(c) => Node::Const(*c),
        Node::Coord(k) => Node::Coord(k + offset),
        Node::Param(name) => Node::Param(name.clone()),
        Node::Add(a, b) => Node::Add(go(a), go(b)),
        Node::Sub(a, b) => Node::Sub(go(a), go(b)),
        Node::Mul(a, b) => Node::Mul(go(a), go(b)),
        Node::Div(a, b) => Node::Div(go(a), go(b)),
        Node::Pow(a, r) => Node::Pow(go(a), *r),
        Node::Neg(a) => Node::Neg(go(a)),
        Node::Exp(a) => Node::Exp(go(a)),
        Node::Log(a) => Node::Log(go(a)),
        Node::Sin(a) => Node::Sin(go(a)),
        Node::Cos(a) => Node::Cos(go(a)),
        Node::Sqrt(a) => Node::Sqrt(go(a)),
    }
}

// ---------------------------------------------------------------------------
// symbolic derivative

fn derive(node: &Node, k: usize) -> Node {
    match node {
        Node::Const(_) | Node::Param(_) => Node::Const(0.0),
        Node::Coord(i) => Node::Const(if *i == k { 1.0 } else { 0.0 }),
        Node::Add(a, b) => add_node(derive(a, k), derive(b, k)),
        Node::Sub(a, b) => sub_node(derive(a, k), derive(b, k)),
        Node::Mul(a, b) => add_node(
            mul_node(derive(a, k), (**b).clone()),
            mul_node((**a).clone(), derive(b, k)),
        ),
        Node::Div(a, b) => div_node(
            sub_node(
                mul_node(derive(a, k), (**b).clone()),
                mul_node((**a).clone(), derive(b, k)),
            ),
            pow_node((**b).clone(), Rational::new(2, 1)),
        ),
        Node::Pow(a, r) => {
            // d(a^r) = r a^(r-1) a'
            let da = derive(a, k);
            let coeff = mul_node(
                const_node(r.as_f64()),
                pow_node((**a).clone(), Rational::new(r.num - r.den, r.den)),
            );
            mul_node(coeff, da)
        }
        Node::Neg(a) => neg_node(derive(a, k)),
        Node::Exp(a) => mul_node(Node::Exp(a.clone()), derive(a, k)),
        Node::Log(a) => div_node(derive(a, k), (**a).clone()),
        Node::Sin(a) => mul_node(Node::Cos(a.clone()), derive(a, k)),
        Node::Cos(a) => neg_node(mul_node(Node::Sin(a.clone()), derive(a, k))),
        Node::Sqrt(a) => div_node(
            derive(a, k),
            mul_node(Node::Const(2.0), Node::Sqrt(a.clone())),
        ),
    }
}

// ---------------------------------------------------------------------------
// evaluation

fn eval_value(node: &Node, point: &[f64], params: &Params) -> Result<f64> {
    let v = match node {
        Node::Const(c) => *c,
        Node::Coord(k) => point[*k],
        Node::Param(name) => *params
            .get(name)
            .ok_or_else(|| Error::UnboundParameter { name: name.clone() })?,
        Node::Add(a, b) => eval_value(a, point, params)? + eval_value(b, point, params)?,
        Node::Sub(a, b) => eval_value(a, point, params)? - eval_value(b, point, params)?,
        Node::Mul(a, b) => eval_value(a, point, params)? * eval_value(b, point, params)?,
        Node::Div(a, b) => {
            let den = eval_value(b, point, params)?;
            check_domain(den != 0.0, node, "division by zero", point)?;
            eval_value(a, point, params)? / den
        }
        Node::Pow(a, r) => {
            let base = eval_value(a, point, params)?;
            check_pow_domain(base, *r, node, point)?;
            if r.is_integer() {
                base.powi(r.num as i32)
            } else {
                base.powf(r.as_f64())
            }
        }
        Node::Neg(a) => -eval_value(a, point, params)?,
        Node::Exp(a) => eval_value(a, point, params)?.exp(),
        Node::Log(a) => {
            let arg = eval_value(a, point, params)?;
            check_domain(arg > 0.0, node, "log of a non-positive value", point)?;
            arg.ln()
        }
        Node::Sin(a) => eval_value(a, point, params)?.sin(),
        Node::Cos(a) => eval_value(a, point, params)?.cos(),
        Node::Sqrt(a) => {
            let arg = eval_value(a, point, params)?;
            check_domain(arg >= 0.0, node, "square root of a negative value", point)?;
            arg.sqrt()
        }
    };
    check_domain(v.is_finite(), node, "non-finite result", point)?;
    Ok(v)
}

fn eval_jet(node: &Node, point: &[f64], params: &Params) -> Result<Jet2> {
    let n = point.len();
    let jet = match node {
        Node::Const(c) => Jet2::constant(*c, n),
        Node::Coord(k) => Jet2::coordinate(point[*k], n, *k),
        Node::Param(name) => {
            let v = *params
                .get(name)
                .ok_or_else(|| Error::UnboundParameter { name: name.clone() })?;
            Jet2::constant(v, n)
        }
        Node::Add(a, b) => eval_jet(a, point, params)?.add(&eval_jet(b, point, params)?),
        Node::Sub(a, b) => eval_jet(a, point, params)?.sub(&eval_jet(b, point, params)?),
        Node::Mul(a, b) => eval_jet(a, point, params)?.mul(&eval_jet(b, point, params)?),
        Node::Div(a, b) => {
            let den = eval_jet(b, point, params)?;
            check_domain(den.v != 0.0, node, "division by zero", point)?;
            eval_jet(a, point, params)?.div(&den)
        }
        Node::Pow(a, r) => {
            let base = eval_jet(a, point, params)?;
            check_pow_domain(base.v, *r, node, point)?;
            base.pow_rational(r.num, r.den)
        }
        Node::Neg(a) => eval_jet(a, point, params)?.neg(),
        Node::Exp(a) => eval_jet(a, point, params)?.exp(),
        Node::Log(a) => {
            let arg = eval_jet(a, point, params)?;
            check_domain(arg.v > 0.0, node, "log of a non-positive value", point)?;
            arg.ln()
        }
        Node::Sin(a) => eval_jet(a, point, params)?.sin(),
        Node::Cos(a) => eval_jet(a, point, params)?.cos(),
        Node::Sqrt(a) => {
            let arg = eval_jet(a, point, params)?;
            check_domain(arg.v > 0.0, node, "square root of a non-positive value", point)?;
            arg.sqrt()
        }
    };
    check_domain(jet.v.is_finite(), node, "non-finite result", point)?;
    Ok(jet)
}

fn check_pow_domain(base: f64, r: Rational, node: &Node, point: &[f64]) -> Result<()> {
    if !r.is_integer() {
        check_domain(
            base > 0.0,
            node,
            "fractional power of a non-positive value",
            point,
        )?;
    } else if r.num < 0 {
        check_domain(base != 0.0, node, "negative power of zero", point)?;
    }
    Ok(())
}

fn check_domain(ok: bool, node: &Node, message: &str, point: &[f64]) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            subexpr: render(node),
            message: message.into(),
            point: point.to_vec(),
        })
    }
}

// ---------------------------------------------------------------------------
// printing

fn render(node: &Node) -> String {
    struct Wrap<'a>(&'a Node);
    impl fmt::Display for Wrap<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_node(f, self.0, 1)
        }
    }
    Wrap(node).to_string()
}

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

/// Writes `node`, parenthesizing whenever its precedence falls below what
/// the surrounding context requires. `-` applies to a whole `base` in the
/// grammar, so negation wraps everything below atom level, and `^` bases
/// likewise.
fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, min: u8) -> fmt::Result {
    let p = precedence(node);
    if p < min {
        write!(f, "(")?;
        write_node(f, node, 1)?;
        return write!(f, ")");
    }
    match node {
        Node::Const(c) => write!(f, "{c}"),
        Node::Coord(k) => write!(f, "x{}", k + 1),
        Node::Param(name) => write!(f, "{name}"),
        Node::Add(a, b) => {
            write_node(f, a, 1)?;
            write!(f, " + ")?;
            write_node(f, b, 2)
        }
        Node::Sub(a, b) => {
            write_node(f, a, 1)?;
            write!(f, " - ")?;
            write_node(f, b, 2)
        }
        Node::Mul(a, b) => {
            write_node(f, a, 2)?;
            write!(f, "*")?;
            write_node(f, b, 3)
        }
        Node::Div(a, b) => {
            write_node(f, a, 2)?;
            write!(f, "/")?;
            write_node(f, b, 3)
        }
        Node::Pow(a, r) => {
            write_node(f, a, 5)?;
            if r.is_integer() && r.num >= 0 {
                write!(f, "^{}", r.num)
            } else if r.is_integer() {
                write!(f, "^({})", r.num)
            } else {
                write!(f, "^({}/{})", r.num, r.den)
            }
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            write_node(f, a, 5)
        }
        Node::Exp(a) => write_func(f, "exp", a),
        Node::Log(a) => write_func(f, "log", a),
        Node::Sin(a) => write_func(f, "sin", a),
        Node::Cos(a) => write_func(f, "cos", a),
        Node::Sqrt(a) => write_func(f, "sqrt", a),
    }
}

fn write_func(f: &mut fmt::Formatter<'_>, name: &str, arg: &Node) -> fmt::Result {
    write!(f, "{name}(")?;
    write_node(f, arg, 1)?;
    write!(f, ")")
}

// ---------------------------------------------------------------------------
// lexer and parser

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    offset: usize,
    text: String,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => {
                i += 1;
                Tok::Plus
            }
            '-' => {
                i += 1;
                Tok::Minus
            }
            '*' => {
                i += 1;
                Tok::Star
            }
            '/' => {
                i += 1;
                Tok::Slash
            }
            '^' => {
                i += 1;
                Tok::Caret
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            _ if c.is_ascii_digit() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let v = slice.parse::<f64>().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{slice}`"),
                })?;
                Tok::Num(v)
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_string())
            }
            _ => {
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Spanned {
            tok,
            offset: start,
            text: text[start..i].to_string(),
        });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: usize,
    dim: usize,
}

const FUNCS: [&str; 5] = ["exp", "log", "sin", "cos", "sqrt"];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|s| s.offset)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    node = Node::Div(Box::new(node), Box::new(self.factor()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let r = self.rational_value()?;
            Ok(Node::Pow(Box::new(base), r))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Node> {
        let offset = self.offset();
        match self.bump() {
            Some(Spanned { tok: Tok::Num(v), .. }) => Ok(Node::Const(v)),
            Some(Spanned {
                tok: Tok::Ident(name),
                ..
            }) => {
                if self.peek() == Some(&Tok::LParen) {
                    if !FUNCS.contains(&name.as_str()) {
                        return Err(Error::UnknownIdentifier { name, offset });
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    let arg = Box::new(arg);
                    Ok(match name.as_str() {
                        "exp" => Node::Exp(arg),
                        "log" => Node::Log(arg),
                        "sin" => Node::Sin(arg),
                        "cos" => Node::Cos(arg),
                        _ => Node::Sqrt(arg),
                    })
                } else {
                    self.name_node(&name, offset)
                }
            }
            Some(Spanned { tok: Tok::LParen, .. }) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Spanned { tok: Tok::Minus, .. }) => Ok(Node::Neg(Box::new(self.base()?))),
            _ => Err(Error::Syntax {
                offset,
                message: "expected an operand".into(),
            }),
        }
    }

    fn name_node(&self, name: &str, offset: usize) -> Result<Node> {
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().map_err(|_| Error::Syntax {
                    offset,
                    message: format!("coordinate index `{name}` too large"),
                })?;
                if index == 0 || index > self.dim {
                    return Err(Error::CoordOutOfRange {
                        index,
                        dim: self.dim,
                    });
                }
                return Ok(Node::Coord(index - 1));
            }
        }
        Ok(Node::Param(name.to_string()))
    }

    /// `uint` or `( '-'? uint ( '/' uint )? )` right after `^`.
    fn rational_value(&mut self) -> Result<Rational> {
        let offset = self.offset();
        match self.bump() {
            Some(Spanned {
                tok: Tok::Num(_),
                text,
                offset,
            }) => {
                let num: i64 = text.parse().map_err(|_| Error::Syntax {
                    offset,
                    message: "exponent must be an integer or a parenthesized ratio".into(),
                })?;
                Ok(Rational::new(num, 1))
            }
            Some(Spanned { tok: Tok::LParen, .. }) => {
                let neg = if self.peek() == Some(&Tok::Minus) {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                let num = self.integer_literal()?;
                let den = if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    self.integer_literal()?
                } else {
                    1
                };
                if den == 0 {
                    return Err(Error::Syntax {
                        offset,
                        message: "zero denominator in exponent".into(),
                    });
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Rational::new(if neg { -num } else { num }, den))
            }
            _ => Err(Error::Syntax {
                offset,
                message: "expected a rational exponent".into(),
            }),
        }
    }

    fn integer_literal(&mut self) -> Result<i64> {
        let offset = self.offset();
        match self.bump() {
            Some(Spanned {
                tok: Tok::Num(_),
                text,
                offset,
            }) => text.parse().map_err(|_| Error::Syntax {
                offset,
                message: "exponent parts must be integers".into(),
            }),
            _ => Err(Error::Syntax {
                offset,
                message: "expected an integer".into(),
            }),
        }
    }
}
