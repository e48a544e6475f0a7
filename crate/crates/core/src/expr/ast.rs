//! Expression trees over named coordinates.
//!
//! Nodes are shared through `Arc`, so repeated subterms (inverse-matrix
//! denominators, connection coefficients, ...) form a DAG rather than a tree.
//! Both differentiation and evaluation walk that DAG with per-call memo
//! tables keyed by node address, which keeps the cost proportional to the
//! number of distinct nodes.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::point::Point;

/// A scalar expression: constants, coordinates, field operations and the
/// elementary functions sin, cos, exp, log, sqrt. Powers carry a constant
/// real exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, f64),
    Neg(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
    Sqrt(Arc<Expr>),
}

pub fn constant(c: f64) -> Arc<Expr> {
    Arc::new(Expr::Const(c))
}

pub fn var(name: &str) -> Arc<Expr> {
    Arc::new(Expr::Var(name.to_string()))
}

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

// Folding constructors. They perform only local, value-preserving rewrites
// (constant folding, 0/1 identities); no canonicalization is attempted.

pub fn add(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    let (ca, cb) = (as_const(&a), as_const(&b));
    if let (Some(x), Some(y)) = (ca, cb) {
        if (x + y).is_finite() {
            return constant(x + y);
        }
    }
    if ca == Some(0.0) {
        return b;
    }
    if cb == Some(0.0) {
        return a;
    }
    Arc::new(Expr::Add(a, b))
}

pub fn sub(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    let (ca, cb) = (as_const(&a), as_const(&b));
    if let (Some(x), Some(y)) = (ca, cb) {
        if (x - y).is_finite() {
            return constant(x - y);
        }
    }
    if ca == Some(0.0) {
        return neg(b);
    }
    if cb == Some(0.0) {
        return a;
    }
    Arc::new(Expr::Sub(a, b))
}

pub fn mul(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    let (ca, cb) = (as_const(&a), as_const(&b));
    if let (Some(x), Some(y)) = (ca, cb) {
        if (x * y).is_finite() {
            return constant(x * y);
        }
    }
    if ca == Some(0.0) || cb == Some(0.0) {
        return constant(0.0);
    }
    if ca == Some(1.0) {
        return b;
    }
    if cb == Some(1.0) {
        return a;
    }
    Arc::new(Expr::Mul(a, b))
}

pub fn div(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    let (ca, cb) = (as_const(&a), as_const(&b));
    if let (Some(x), Some(y)) = (ca, cb) {
        if y != 0.0 && (x / y).is_finite() {
            return constant(x / y);
        }
    }
    if ca == Some(0.0) {
        return constant(0.0);
    }
    if cb == Some(1.0) {
        return a;
    }
    Arc::new(Expr::Div(a, b))
}

pub fn pow(base: Arc<Expr>, exponent: f64) -> Arc<Expr> {
    if exponent == 1.0 {
        return base;
    }
    if exponent == 0.0 {
        return constant(1.0);
    }
    if let Some(c) = as_const(&base) {
        let v = c.powf(exponent);
        if v.is_finite() {
            return constant(v);
        }
    }
    Arc::new(Expr::Pow(base, exponent))
}

pub fn neg(a: Arc<Expr>) -> Arc<Expr> {
    match &*a {
        Expr::Const(c) => return constant(-c),
        Expr::Neg(inner) => return inner.clone(),
        _ => {}
    }
    Arc::new(Expr::Neg(a))
}

pub fn sin(a: Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Sin(a))
}
pub fn cos(a: Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Cos(a))
}
pub fn sqrt(a: Arc<Expr>) -> Arc<Expr> {
    Arc::new(Expr::Sqrt(a))
}

fn key(e: &Arc<Expr>) -> usize {
    Arc::as_ptr(e) as usize
}

/// Exact symbolic partial derivative. Shared subterms are differentiated
/// once per call.
pub fn differentiate(expr: &Arc<Expr>, v: &str) -> Arc<Expr> {
    let mut memo: HashMap<usize, Arc<Expr>> = HashMap::new();
    diff_memo(expr, v, &mut memo)
}

fn diff_memo(e: &Arc<Expr>, v: &str, memo: &mut HashMap<usize, Arc<Expr>>) -> Arc<Expr> {
    if let Some(d) = memo.get(&key(e)) {
        return d.clone();
    }
    let d = match &**e {
        Expr::Const(_) => constant(0.0),
        Expr::Var(name) => constant(if name == v { 1.0 } else { 0.0 }),
        Expr::Add(a, b) => add(diff_memo(a, v, memo), diff_memo(b, v, memo)),
        Expr::Sub(a, b) => sub(diff_memo(a, v, memo), diff_memo(b, v, memo)),
        Expr::Mul(a, b) => {
            let da = diff_memo(a, v, memo);
            let db = diff_memo(b, v, memo);
            add(mul(da, b.clone()), mul(a.clone(), db))
        }
        Expr::Div(a, b) => {
            // a'/b - a b'/b^2
            let da = diff_memo(a, v, memo);
            let db = diff_memo(b, v, memo);
            sub(
                div(da, b.clone()),
                div(mul(a.clone(), db), mul(b.clone(), b.clone())),
            )
        }
        Expr::Pow(base, k) => {
            let db = diff_memo(base, v, memo);
            mul(mul(constant(*k), pow(base.clone(), k - 1.0)), db)
        }
        Expr::Neg(a) => neg(diff_memo(a, v, memo)),
        Expr::Sin(a) => mul(cos(a.clone()), diff_memo(a, v, memo)),
        Expr::Cos(a) => neg(mul(sin(a.clone()), diff_memo(a, v, memo))),
        Expr::Exp(a) => mul(e.clone(), diff_memo(a, v, memo)),
        Expr::Log(a) => div(diff_memo(a, v, memo), a.clone()),
        Expr::Sqrt(a) => div(diff_memo(a, v, memo), mul(constant(2.0), e.clone())),
    };
    memo.insert(key(e), d.clone());
    d
}

/// Set of coordinate names appearing in the expression.
pub fn used_vars(expr: &Arc<Expr>) -> Vec<String> {
    let mut seen: HashMap<usize, ()> = HashMap::new();
    let mut out = Vec::new();
    collect_vars(expr, &mut seen, &mut out);
    out
}

fn collect_vars(e: &Arc<Expr>, seen: &mut HashMap<usize, ()>, out: &mut Vec<String>) {
    if seen.insert(key(e), ()).is_some() {
        return;
    }
    match &**e {
        Expr::Const(_) => {}
        Expr::Var(name) => {
            if !out.iter().any(|n| n == name) {
                out.push(name.clone());
            }
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            collect_vars(a, seen, out);
            collect_vars(b, seen, out);
        }
        Expr::Pow(a, _)
        | Expr::Neg(a)
        | Expr::Sin(a)
        | Expr::Cos(a)
        | Expr::Exp(a)
        | Expr::Log(a)
        | Expr::Sqrt(a) => collect_vars(a, seen, out),
    }
}

fn domain_err(e: &Arc<Expr>, reason: &str) -> GeomError {
    GeomError::Domain {
        expr: format!("{}", DisplayExpr(e)),
        reason: reason.to_string(),
    }
}

/// Evaluate a node at a point, memoizing values of shared subterms.
///
/// The cache owns an `Arc` to every node it has seen: a cache entry must
/// keep its node alive, otherwise a later allocation could reuse the
/// address and alias the key.
pub fn eval_memo(
    e: &Arc<Expr>,
    p: &Point,
    cache: &mut HashMap<usize, (Arc<Expr>, f64)>,
) -> Result<f64> {
    if let Some((_, v)) = cache.get(&key(e)) {
        return Ok(*v);
    }
    let v = match &**e {
        Expr::Const(c) => *c,
        Expr::Var(name) => p
            .get(name)
            .ok_or_else(|| GeomError::MissingCoordinate(name.clone()))?,
        Expr::Add(a, b) => eval_memo(a, p, cache)? + eval_memo(b, p, cache)?,
        Expr::Sub(a, b) => eval_memo(a, p, cache)? - eval_memo(b, p, cache)?,
        Expr::Mul(a, b) => eval_memo(a, p, cache)? * eval_memo(b, p, cache)?,
        Expr::Div(a, b) => {
            let den = eval_memo(b, p, cache)?;
            if den == 0.0 {
                return Err(domain_err(e, "division by zero"));
            }
            eval_memo(a, p, cache)? / den
        }
        Expr::Pow(base, k) => {
            let b = eval_memo(base, p, cache)?;
            let v = b.powf(*k);
            if !v.is_finite() {
                return Err(domain_err(e, "power with undefined or non-finite value"));
            }
            v
        }
        Expr::Neg(a) => -eval_memo(a, p, cache)?,
        Expr::Sin(a) => eval_memo(a, p, cache)?.sin(),
        Expr::Cos(a) => eval_memo(a, p, cache)?.cos(),
        Expr::Exp(a) => eval_memo(a, p, cache)?.exp(),
        Expr::Log(a) => {
            let v = eval_memo(a, p, cache)?;
            if v <= 0.0 {
                return Err(domain_err(e, "logarithm of a non-positive value"));
            }
            v.ln()
        }
        Expr::Sqrt(a) => {
            let v = eval_memo(a, p, cache)?;
            if v < 0.0 {
                return Err(domain_err(e, "square root of a negative value"));
            }
            v.sqrt()
        }
    };
    if !v.is_finite() {
        return Err(domain_err(e, "non-finite result"));
    }
    cache.insert(key(e), (e.clone(), v));
    Ok(v)
}

/// Precedence-aware printer; `parse(print(e))` evaluates identically to `e`.
pub struct DisplayExpr<'a>(pub &'a Arc<Expr>);

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self.0, 0, f)
    }
}

// Precedence: +,- (1) < *,/ (2) < unary - (3) < ^ (4) < atoms (5).
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Const(c) if *c < 0.0 => 3,
        Expr::Pow(_, k) if *k < 0.0 => 2, // printed as 1 / base^|k|
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_prec(e: &Arc<Expr>, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let this = prec(e);
    let parens = this < min;
    if parens {
        write!(f, "(")?;
    }
    match &**e {
        Expr::Const(c) => write!(f, "{c}")?,
        Expr::Var(name) => write!(f, "{name}")?,
        Expr::Add(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " + ")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Sub(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " - ")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Mul(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, " * ")?;
            fmt_prec(b, 3, f)?;
        }
        Expr::Div(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, " / ")?;
            fmt_prec(b, 3, f)?;
        }
        Expr::Pow(base, k) => {
            if *k < 0.0 {
                write!(f, "1 / ")?;
                fmt_pow(base, k.abs(), f)?;
            } else {
                fmt_pow(base, *k, f)?;
            }
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            fmt_prec(a, 3, f)?;
        }
        Expr::Sin(a) => fmt_call("sin", a, f)?,
        Expr::Cos(a) => fmt_call("cos", a, f)?,
        Expr::Exp(a) => fmt_call("exp", a, f)?,
        Expr::Log(a) => fmt_call("log", a, f)?,
        Expr::Sqrt(a) => fmt_call("sqrt", a, f)?,
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

fn fmt_pow(base: &Arc<Expr>, k: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // A negative constant base must keep its parentheses: -2^2 parses as -(2^2).
    let bare = match &**base {
        Expr::Var(_) => true,
        Expr::Const(c) => *c >= 0.0,
        _ => false,
    };
    if bare {
        fmt_prec(base, 5, f)?;
    } else {
        write!(f, "(")?;
        fmt_prec(base, 0, f)?;
        write!(f, ")")?;
    }
    write!(f, "^{k}")
}

fn fmt_call(name: &str, a: &Arc<Expr>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{name}(")?;
    fmt_prec(a, 0, f)?;
    write!(f, ")")
}
