//! Scalar fields: parseable, symbolically differentiable, point-evaluable
//! functions of named chart coordinates.

mod ast;
mod parse;

use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

pub use ast::Expr;

use crate::error::Result;
use crate::point::Point;

/// A scalar function of chart coordinates, stored as an expression tree
/// together with the ordered list of coordinate names it may reference.
///
/// Fields are immutable; all operations build new fields. Evaluation at a
/// point ignores coordinates the field does not use, which is what makes
/// horizontal/vertical lifts to a product chart free of bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    expr: Arc<Expr>,
    vars: Arc<Vec<String>>,
}

impl ScalarField {
    /// Parse `text` against the ordered coordinate list `vars`.
    pub fn parse(text: &str, vars: &[String]) -> Result<Self> {
        let expr = parse::parse(text, vars)?;
        Ok(ScalarField {
            expr,
            vars: Arc::new(vars.to_vec()),
        })
    }

    pub fn constant(c: f64) -> Self {
        ScalarField {
            expr: ast::constant(c),
            vars: Arc::new(Vec::new()),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The coordinate function `name` on a single-variable domain.
    pub fn coordinate(name: &str) -> Self {
        ScalarField {
            expr: ast::var(name),
            vars: Arc::new(vec![name.to_string()]),
        }
    }

    pub fn from_expr(expr: Arc<Expr>, vars: &[String]) -> Self {
        ScalarField {
            expr,
            vars: Arc::new(vars.to_vec()),
        }
    }

    pub fn expr(&self) -> &Arc<Expr> {
        &self.expr
    }

    /// Declared coordinate names (a superset of the ones actually used).
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Coordinate names that actually occur in the expression.
    pub fn used_vars(&self) -> Vec<String> {
        ast::used_vars(&self.expr)
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(&*self.expr, Expr::Const(c) if *c == 0.0)
    }

    /// Exact partial derivative. Differentiating along a coordinate the
    /// field does not reference yields the zero field.
    pub fn differentiate(&self, var: &str) -> Self {
        ScalarField {
            expr: ast::differentiate(&self.expr, var),
            vars: self.vars.clone(),
        }
    }

    /// Evaluate at a point; every coordinate the expression uses must be
    /// assigned. Domain violations (log of a non-positive value, division
    /// by zero, ...) are reported with the offending subexpression.
    pub fn evaluate(&self, p: &Point) -> Result<f64> {
        let mut cache = HashMap::new();
        ast::eval_memo(&self.expr, p, &mut cache)
    }

    pub fn powf(&self, k: f64) -> Self {
        ScalarField {
            expr: ast::pow(self.expr.clone(), k),
            vars: self.vars.clone(),
        }
    }

    pub fn sqrt(&self) -> Self {
        ScalarField {
            expr: ast::sqrt(self.expr.clone()),
            vars: self.vars.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        ScalarField {
            expr: ast::mul(ast::constant(c), self.expr.clone()),
            vars: self.vars.clone(),
        }
    }

    fn merged_vars(&self, other: &ScalarField) -> Arc<Vec<String>> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            return self.vars.clone();
        }
        if other.vars.is_empty() {
            return self.vars.clone();
        }
        if self.vars.is_empty() {
            return other.vars.clone();
        }
        let mut merged = (*self.vars).clone();
        for v in other.vars.iter() {
            if !merged.contains(v) {
                merged.push(v.clone());
            }
        }
        Arc::new(merged)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ast::DisplayExpr(&self.expr))
    }
}

macro_rules! field_binop {
    ($trait:ident, $method:ident, $ctor:path) => {
        impl ops::$trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField {
                    vars: self.merged_vars(rhs),
                    expr: $ctor(self.expr.clone(), rhs.expr.clone()),
                }
            }
        }
    };
}

field_binop!(Add, add, ast::add);
field_binop!(Sub, sub, ast::sub);
field_binop!(Mul, mul, ast::mul);
field_binop!(Div, div, ast::div);

impl ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField {
            expr: ast::neg(self.expr.clone()),
            vars: self.vars.clone(),
        }
    }
}

/// Evaluates many fields at one point, sharing a value cache across calls.
/// Fields built from common subterms (connection coefficients, inverse
/// cometric entries) are, to a large extent, one DAG; sharing the cache is
/// what makes pointwise tensor evaluation cheap.
pub struct Evaluator<'p> {
    point: &'p Point,
    cache: HashMap<usize, (std::sync::Arc<Expr>, f64)>,
}

impl<'p> Evaluator<'p> {
    pub fn new(point: &'p Point) -> Self {
        Evaluator {
            point,
            cache: HashMap::new(),
        }
    }

    pub fn point(&self) -> &Point {
        self.point
    }

    pub fn eval(&mut self, f: &ScalarField) -> Result<f64> {
        ast::eval_memo(f.expr(), self.point, &mut self.cache)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GeomError;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parse_builds_literal_structure() {
        let f = ScalarField::parse("x^2 * sin(y)", &vars(&["x", "y"])).unwrap();
        match &**f.expr() {
            Expr::Mul(a, b) => {
                assert!(matches!(&**a, Expr::Pow(_, k) if *k == 2.0));
                assert!(matches!(&**b, Expr::Sin(_)));
            }
            other => panic!("expected product node, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_position_of_missing_operand() {
        let err = ScalarField::parse("x +", &vars(&["x"])).unwrap_err();
        match err {
            GeomError::Syntax { position, .. } => assert_eq!(position, 3),
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn parse_names_unknown_identifier() {
        let err = ScalarField::parse("x + q", &vars(&["x"])).unwrap_err();
        match err {
            GeomError::UnknownIdentifier { name, position } => {
                assert_eq!(name, "q");
                assert_eq!(position, 4);
            }
            other => panic!("expected unknown identifier, got {other}"),
        }
    }

    #[test]
    fn unknown_function_is_rejected() {
        let err = ScalarField::parse("tan(x)", &vars(&["x"])).unwrap_err();
        assert!(matches!(err, GeomError::UnknownIdentifier { name, .. } if name == "tan"));
    }

    #[test]
    fn evaluates_polynomial() {
        let f = ScalarField::parse("2*x^3", &vars(&["x"])).unwrap();
        let p = Point::from_pairs(&[("x", 2.0)]);
        assert_eq!(f.evaluate(&p).unwrap(), 16.0);
    }

    #[test]
    fn exponent_chain_is_right_associative() {
        let f = ScalarField::parse("2^3^2", &vars(&[])).unwrap();
        assert_eq!(f.evaluate(&Point::new()).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let f = ScalarField::parse("-x^2", &vars(&["x"])).unwrap();
        let p = Point::from_pairs(&[("x", 3.0)]);
        assert_eq!(f.evaluate(&p).unwrap(), -9.0);
    }

    #[test]
    fn power_rule_derivative() {
        // d/dx (x^2 y) = 2 x y
        let f = ScalarField::parse("x^2 * y", &vars(&["x", "y"])).unwrap();
        let d = f.differentiate("x");
        let p = Point::from_pairs(&[("x", 3.0), ("y", 5.0)]);
        assert_eq!(d.evaluate(&p).unwrap(), 30.0);
    }

    #[test]
    fn quotient_rule_derivative() {
        // d/dx (exp(x)/x) = exp(x)/x - exp(x)/x^2
        let f = ScalarField::parse("exp(x) / x", &vars(&["x"])).unwrap();
        let d = f.differentiate("x");
        let p = Point::from_pairs(&[("x", 1.5)]);
        let expected = 1.5f64.exp() / 1.5 - 1.5f64.exp() / (1.5 * 1.5);
        assert!((d.evaluate(&p).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn sine_derivative() {
        let f = ScalarField::parse("sin(t)", &vars(&["t"])).unwrap();
        let d = f.differentiate("t");
        let p = Point::from_pairs(&[("t", 0.7)]);
        assert!((d.evaluate(&p).unwrap() - 0.7f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_are_reported() {
        let f = ScalarField::parse("log(x)", &vars(&["x"])).unwrap();
        let err = f.evaluate(&Point::from_pairs(&[("x", -1.0)])).unwrap_err();
        assert!(matches!(err, GeomError::Domain { .. }));

        let g = ScalarField::parse("sqrt(x)", &vars(&["x"])).unwrap();
        assert_eq!(g.evaluate(&Point::from_pairs(&[("x", 4.0)])).unwrap(), 2.0);
        assert!(g.evaluate(&Point::from_pairs(&[("x", -4.0)])).is_err());

        let h = ScalarField::parse("1/x", &vars(&["x"])).unwrap();
        assert!(h.evaluate(&Point::from_pairs(&[("x", 0.0)])).is_err());
    }

    #[test]
    fn missing_coordinate_is_an_error_extra_is_ignored() {
        let f = ScalarField::parse("x*y", &vars(&["x", "y"])).unwrap();
        let missing = Point::from_pairs(&[("x", 1.0)]);
        assert!(matches!(
            f.evaluate(&missing).unwrap_err(),
            GeomError::MissingCoordinate(name) if name == "y"
        ));
        let extra = Point::from_pairs(&[("x", 2.0), ("y", 3.0), ("z", 9.0)]);
        assert_eq!(f.evaluate(&extra).unwrap(), 6.0);
    }

    #[test]
    fn printer_handles_negative_exponents_and_bases() {
        let vars = vars(&["x", "y"]);
        let f = ScalarField::parse("x^2 - y", &vars).unwrap();
        let g = ScalarField::parse("sin(x) + 2", &vars).unwrap();
        let tricky = vec![
            &(&f / &g) / &f,
            (&f - &g).powf(-2.0),
            -&(&f * &(-&g)),
            (&f + &g).powf(0.5).sqrt(),
            ScalarField::constant(-2.0).powf(3.0),
            &ScalarField::constant(3.0) * &ScalarField::parse("-2", &vars).unwrap(),
        ];
        let p = Point::from_pairs(&[("x", 0.8), ("y", -1.1)]);
        for c in tricky {
            let printed = c.to_string();
            let back = ScalarField::parse(&printed, &vars)
                .unwrap_or_else(|e| panic!("`{printed}` failed to reparse: {e}"));
            let (a, b) = (c.evaluate(&p).unwrap(), back.evaluate(&p).unwrap());
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "{printed}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn print_parse_round_trip_preserves_values() {
        let exprs = [
            "x^2 * sin(y) - 3/(x + 2) + exp(x*y)",
            "-x^2 + sqrt(x^2 + 1)",
            "log(2 + cos(x)) * 4.5e-1",
            "x/y/2 - x - y - 1",
        ];
        for text in exprs {
            let f = ScalarField::parse(text, &vars(&["x", "y"])).unwrap();
            let printed = f.to_string();
            let g = ScalarField::parse(&printed, &vars(&["x", "y"])).unwrap();
            let p = Point::from_pairs(&[("x", 0.7), ("y", 1.3)]);
            let (a, b) = (f.evaluate(&p).unwrap(), g.evaluate(&p).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{text} -> {printed}");
        }
    }
}
