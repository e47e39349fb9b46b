//! Immutable symbolic expression calculus.
//!
//! Expressions are trees over chart coordinates and real parameters, closed
//! under exact differentiation, evaluated in IEEE doubles, and compared
//! semantically only through probabilistic zero-testing on sampling boxes
//! (there is deliberately no general simplifier).

mod eval;
mod parse;
mod zero;

pub use eval::expint1;
pub use parse::ParseCtx;
pub use zero::{is_zero, Exclusion, SamplingBox, ZeroTest};

use crate::error::Result;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Exact rational constant with a positive, reduced denominator.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den);
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn int(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn num(&self) -> i64 {
        self.num
    }
    pub fn den(&self) -> i64 {
        self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num == 0
    }
    pub fn is_integer(&self) -> bool {
        self.den == 1
    }
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn checked_add(&self, o: &Rational) -> Option<Rational> {
        let n = self.num.checked_mul(o.den)?.checked_add(o.num.checked_mul(self.den)?)?;
        let d = self.den.checked_mul(o.den)?;
        Some(Rational::new(n, d))
    }

    pub fn checked_mul(&self, o: &Rational) -> Option<Rational> {
        // Cross-reduce first to keep intermediates small.
        let g1 = gcd(self.num, o.den);
        let g2 = gcd(o.num, self.den);
        let n = (self.num / g1).checked_mul(o.num / g2)?;
        let d = (self.den / g2).checked_mul(o.den / g1)?;
        Some(Rational::new(n, d))
    }

    pub fn neg(&self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }

    /// Integer power with overflow checking; negative exponents invert.
    pub fn checked_pow(&self, e: i64) -> Option<Rational> {
        if e == 0 {
            return Some(Rational::ONE);
        }
        let (base, n) = if e < 0 {
            if self.num == 0 {
                return None;
            }
            (Rational::new(self.den, self.num), e.unsigned_abs())
        } else {
            (*self, e.unsigned_abs())
        };
        let mut acc = Rational::ONE;
        for _ in 0..n {
            acc = acc.checked_mul(&base)?;
        }
        Some(acc)
    }

    /// Exact conversion from a double with a small denominator, if one exists.
    pub fn approx_f64(v: f64) -> Option<Rational> {
        if !v.is_finite() {
            return None;
        }
        for den in [1i64, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 25, 32, 50, 64, 100, 1000, 10000] {
            let num = (v * den as f64).round();
            if num.abs() < 9e15 && (num / den as f64 - v).abs() <= 1e-14 * (1.0 + v.abs()) {
                return Some(Rational::new(num as i64, den));
            }
        }
        None
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// One node of the expression tree.
#[derive(Clone, PartialEq, Debug)]
pub enum Node {
    Const(Rational),
    Var(String),
    Param(String),
    Add(Vec<Expression>),
    Mul(Vec<Expression>),
    Pow(Expression, Rational),
    Exp(Expression),
    Ln(Expression),
    Sinh(Expression),
    Cosh(Expression),
    Sin(Expression),
    Cos(Expression),
    /// The exponential integral E1; for negative arguments the real
    /// principal value -Ei(-u) (see `expint1`).
    ExpInt1(Expression),
}

/// Immutable, cheaply clonable symbolic expression.
#[derive(Clone, Debug)]
pub struct Expression(Arc<Node>);

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

/// A full binding of coordinate and parameter names to real values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    pub bindings: BTreeMap<String, f64>,
}

impl Point {
    pub fn new(bindings: BTreeMap<String, f64>) -> Self {
        Point { bindings }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings.get(name).copied()
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.bindings.insert(name.to_string(), v);
    }
}

impl Expression {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(n: Node) -> Expression {
        Expression(Arc::new(n))
    }

    pub fn constant(r: Rational) -> Expression {
        Expression::wrap(Node::Const(r))
    }

    pub fn int(n: i64) -> Expression {
        Expression::constant(Rational::int(n))
    }

    pub fn zero() -> Expression {
        Expression::int(0)
    }

    pub fn one() -> Expression {
        Expression::int(1)
    }

    pub fn var(name: &str) -> Expression {
        Expression::wrap(Node::Var(name.to_string()))
    }

    pub fn param(name: &str) -> Expression {
        Expression::wrap(Node::Param(name.to_string()))
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self.node(), Node::Const(r) if r.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self.node(), Node::Const(r) if *r == Rational::ONE)
    }

    /// n-ary sum with flattening and constant folding.
    pub fn add(terms: Vec<Expression>) -> Expression {
        let mut flat: Vec<Expression> = Vec::new();
        let mut acc = Rational::ZERO;
        let mut exact = true;
        for t in terms {
            match t.node() {
                Node::Add(inner) => {
                    for e in inner {
                        match e.node() {
                            Node::Const(r) if exact => match acc.checked_add(r) {
                                Some(s) => acc = s,
                                None => {
                                    exact = false;
                                    flat.push(e.clone());
                                }
                            },
                            _ => flat.push(e.clone()),
                        }
                    }
                }
                Node::Const(r) if exact => match acc.checked_add(r) {
                    Some(s) => acc = s,
                    None => {
                        exact = false;
                        flat.push(t.clone());
                    }
                },
                _ => flat.push(t),
            }
        }
        if !acc.is_zero() {
            flat.push(Expression::constant(acc));
        }
        match flat.len() {
            0 => Expression::zero(),
            1 => flat.pop().unwrap(),
            _ => Expression::wrap(Node::Add(flat)),
        }
    }

    /// n-ary product with flattening and constant folding.
    pub fn mul(factors: Vec<Expression>) -> Expression {
        let mut flat: Vec<Expression> = Vec::new();
        let mut acc = Rational::ONE;
        let mut exact = true;
        for t in factors {
            match t.node() {
                Node::Mul(inner) => {
                    for e in inner {
                        match e.node() {
                            Node::Const(r) if exact => match acc.checked_mul(r) {
                                Some(p) => acc = p,
                                None => {
                                    exact = false;
                                    flat.push(e.clone());
                                }
                            },
                            _ => flat.push(e.clone()),
                        }
                    }
                }
                Node::Const(r) if exact => match acc.checked_mul(r) {
                    Some(p) => acc = p,
                    None => {
                        exact = false;
                        flat.push(t.clone());
                    }
                },
                _ => flat.push(t),
            }
        }
        if exact && acc.is_zero() {
            return Expression::zero();
        }
        if acc != Rational::ONE {
            flat.insert(0, Expression::constant(acc));
        }
        match flat.len() {
            0 => Expression::one(),
            1 => flat.pop().unwrap(),
            _ => Expression::wrap(Node::Mul(flat)),
        }
    }

    pub fn neg(e: Expression) -> Expression {
        Expression::mul(vec![Expression::int(-1), e])
    }

    pub fn sub(a: Expression, b: Expression) -> Expression {
        Expression::add(vec![a, Expression::neg(b)])
    }

    pub fn pow(base: Expression, exp: Rational) -> Expression {
        if exp.is_zero() {
            return Expression::one();
        }
        if exp == Rational::ONE {
            return base;
        }
        if let Node::Const(r) = base.node() {
            if exp.is_integer() {
                if let Some(v) = r.checked_pow(exp.num()) {
                    return Expression::constant(v);
                }
            }
        }
        Expression::wrap(Node::Pow(base, exp))
    }

    pub fn recip(e: Expression) -> Expression {
        Expression::pow(e, Rational::int(-1))
    }

    pub fn div(a: Expression, b: Expression) -> Expression {
        if let Node::Const(r) = b.node() {
            if !r.is_zero() {
                return Expression::mul(vec![
                    a,
                    Expression::constant(Rational::new(r.den(), r.num())),
                ]);
            }
        }
        Expression::mul(vec![a, Expression::recip(b)])
    }

    pub fn exp(e: Expression) -> Expression {
        if e.is_zero_const() {
            return Expression::one();
        }
        Expression::wrap(Node::Exp(e))
    }

    pub fn ln(e: Expression) -> Expression {
        Expression::wrap(Node::Ln(e))
    }

    pub fn sinh(e: Expression) -> Expression {
        Expression::wrap(Node::Sinh(e))
    }

    pub fn cosh(e: Expression) -> Expression {
        Expression::wrap(Node::Cosh(e))
    }

    pub fn sin(e: Expression) -> Expression {
        Expression::wrap(Node::Sin(e))
    }

    pub fn cos(e: Expression) -> Expression {
        Expression::wrap(Node::Cos(e))
    }

    pub fn expint1(e: Expression) -> Expression {
        Expression::wrap(Node::ExpInt1(e))
    }

    /// Exact symbolic derivative with respect to coordinate `v`.
    /// Parameters differentiate to zero.
    pub fn diff(&self, v: &str) -> Expression {
        match self.node() {
            Node::Const(_) | Node::Param(_) => Expression::zero(),
            Node::Var(name) => {
                if name == v {
                    Expression::one()
                } else {
                    Expression::zero()
                }
            }
            Node::Add(terms) => Expression::add(terms.iter().map(|t| t.diff(v)).collect()),
            Node::Mul(factors) => {
                let mut sum = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    let df = f.diff(v);
                    if df.is_zero_const() {
                        continue;
                    }
                    let mut prod = vec![df];
                    for (j, g) in factors.iter().enumerate() {
                        if i != j {
                            prod.push(g.clone());
                        }
                    }
                    sum.push(Expression::mul(prod));
                }
                Expression::add(sum)
            }
            Node::Pow(base, r) => {
                let db = base.diff(v);
                if db.is_zero_const() {
                    return Expression::zero();
                }
                // d(b^r) = r * b^(r-1) * db
                let rm1 = r
                    .checked_add(&Rational::int(-1))
                    .expect("exponent arithmetic overflow");
                Expression::mul(vec![
                    Expression::constant(*r),
                    Expression::pow(base.clone(), rm1),
                    db,
                ])
            }
            Node::Exp(u) => Expression::mul(vec![self.clone(), u.diff(v)]),
            Node::Ln(u) => Expression::mul(vec![Expression::recip(u.clone()), u.diff(v)]),
            Node::Sinh(u) => Expression::mul(vec![Expression::cosh(u.clone()), u.diff(v)]),
            Node::Cosh(u) => Expression::mul(vec![Expression::sinh(u.clone()), u.diff(v)]),
            Node::Sin(u) => Expression::mul(vec![Expression::cos(u.clone()), u.diff(v)]),
            Node::Cos(u) => {
                Expression::neg(Expression::mul(vec![Expression::sin(u.clone()), u.diff(v)]))
            }
            // d/du E1(u) = -e^{-u}/u, extended by the chain rule.
            Node::ExpInt1(u) => Expression::mul(vec![
                Expression::int(-1),
                Expression::exp(Expression::neg(u.clone())),
                Expression::recip(u.clone()),
                u.diff(v),
            ]),
        }
    }

    /// All free variable and parameter names.
    pub fn free_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(n) | Node::Param(n) => {
                out.insert(n.clone());
            }
            Node::Add(v) | Node::Mul(v) => {
                for e in v {
                    e.collect_names(out);
                }
            }
            Node::Pow(b, _) => b.collect_names(out),
            Node::Exp(u)
            | Node::Ln(u)
            | Node::Sinh(u)
            | Node::Cosh(u)
            | Node::Sin(u)
            | Node::Cos(u)
            | Node::ExpInt1(u) => u.collect_names(out),
        }
    }

    /// Evaluate at a point binding every free name.
    pub fn eval(&self, p: &Point) -> Result<f64> {
        eval::eval(self, p)
    }

    /// Evaluate together with a first-order propagated roundoff bound; the
    /// second component bounds the absolute f64 error of the first.
    pub fn eval_with_err(&self, p: &Point) -> Result<(f64, f64)> {
        eval::eval_err(self, p)
    }

    /// Fully parenthesized infix rendering; parses back to an equal tree.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }

    fn render_into(&self, s: &mut String) {
        match self.node() {
            Node::Const(r) => {
                if r.num() < 0 || !r.is_integer() {
                    s.push('(');
                    if r.is_integer() {
                        s.push_str(&format!("{}", r.num()));
                    } else {
                        s.push_str(&format!("{}/{}", r.num(), r.den()));
                    }
                    s.push(')');
                } else {
                    s.push_str(&format!("{}", r.num()));
                }
            }
            Node::Var(n) | Node::Param(n) => s.push_str(n),
            Node::Add(terms) => {
                s.push('(');
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        s.push_str(" + ");
                    }
                    t.render_into(s);
                }
                s.push(')');
            }
            Node::Mul(factors) => {
                s.push('(');
                for (i, t) in factors.iter().enumerate() {
                    if i > 0 {
                        s.push_str(" * ");
                    }
                    t.render_into(s);
                }
                s.push(')');
            }
            Node::Pow(b, r) => {
                s.push('(');
                b.render_into(s);
                s.push_str(" ^ ");
                if r.is_integer() && r.num() >= 0 {
                    s.push_str(&format!("{}", r.num()));
                } else if r.is_integer() {
                    s.push_str(&format!("({})", r.num()));
                } else {
                    s.push_str(&format!("({}/{})", r.num(), r.den()));
                }
                s.push(')');
            }
            Node::Exp(u) => Self::render_fn(s, "exp", u),
            Node::Ln(u) => Self::render_fn(s, "ln", u),
            Node::Sinh(u) => Self::render_fn(s, "sinh", u),
            Node::Cosh(u) => Self::render_fn(s, "cosh", u),
            Node::Sin(u) => Self::render_fn(s, "sin", u),
            Node::Cos(u) => Self::render_fn(s, "cos", u),
            Node::ExpInt1(u) => Self::render_fn(s, "Ei1", u),
        }
    }

    fn render_fn(s: &mut String, name: &str, u: &Expression) {
        s.push_str(name);
        s.push('(');
        u.render_into(s);
        s.push(')');
    }

    /// Parse `text` against a declaration context.
    pub fn parse(text: &str, ctx: &ParseCtx) -> Result<Expression> {
        parse::parse(text, ctx)
    }

    /// The additive terms at the top level (the expression itself if it is
    /// not a sum). Used for the relative scale in zero-testing.
    pub fn additive_terms(&self) -> Vec<Expression> {
        match self.node() {
            Node::Add(terms) => terms.clone(),
            _ => vec![self.clone()],
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// Convenience constructor used throughout tests.
pub fn ex(text: &str, vars: &[&str], params: &[&str]) -> Expression {
    let ctx = ParseCtx::new(
        vars.iter().map(|s| s.to_string()).collect(),
        params.iter().map(|s| s.to_string()).collect(),
    );
    Expression::parse(text, &ctx).expect("test expression parses")
}

#[allow(unused)]
fn _assert_send_sync() {
    fn f<T: Send + Sync>() {}
    f::<Expression>();
}
