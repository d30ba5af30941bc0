//! Closed-form scalar fields `psi(u1, ..., un)`.
//!
//! Fields are parsed from infix text over a fixed grammar (see [`parser`]) and
//! evaluated on second-order [`Jet`]s, giving value, gradient and Hessian at a
//! point. Anything outside a function's domain is a hard [`Error::Domain`].

mod jet;
mod parser;
mod tape;

use std::fmt;

pub use jet::{Gradient, Hessian, Jet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Asinh,
}

impl Func {
    const ALL: [Func; 8] = [
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Asinh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Asinh => "asinh",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sqrt => x.sqrt(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Asinh => x.asinh(),
        }
    }

    fn check_domain(self, x: f64) -> std::result::Result<(), &'static str> {
        match self {
            Func::Sqrt if x < 0.0 => Err("square root of a negative number"),
            Func::Sqrt if x == 0.0 => Err("square root is not differentiable at 0"),
            Func::Log if x <= 0.0 => Err("logarithm of a non-positive number"),
            _ => Ok(()),
        }
    }

    /// Value and first two derivatives at `x`; `x` must be in the domain.
    fn derivatives(self, x: f64) -> (f64, f64, f64) {
        match self {
            Func::Sqrt => {
                let s = x.sqrt();
                (s, 0.5 / s, -0.25 / (x * s))
            }
            Func::Exp => {
                let e = x.exp();
                (e, e, e)
            }
            Func::Log => (x.ln(), 1.0 / x, -1.0 / (x * x)),
            Func::Sin => {
                let (s, c) = x.sin_cos();
                (s, c, -s)
            }
            Func::Cos => {
                let (s, c) = x.sin_cos();
                (c, -s, -c)
            }
            Func::Sinh => {
                let (s, c) = (x.sinh(), x.cosh());
                (s, c, s)
            }
            Func::Cosh => {
                let (s, c) = (x.sinh(), x.cosh());
                (c, s, c)
            }
            Func::Asinh => {
                let q = 1.0 + x * x;
                let r = q.sqrt();
                (x.asinh(), 1.0 / r, -x / (q * r))
            }
        }
    }
}

/// Expression tree. Variables are stored 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Pi,
    E,
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    /// Power with a constant exponent.
    Pow(Box<Node>, f64),
    Call(Func, Box<Node>),
}

fn is_integer(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() < i32::MAX as f64
}

fn pow_derivatives(x: f64, p: f64) -> std::result::Result<(f64, f64, f64), &'static str> {
    if is_integer(p) {
        let k = p as i32;
        if x == 0.0 && k < 0 {
            return Err("negative power of zero");
        }
        let f0 = x.powi(k);
        let f1 = if k == 0 { 0.0 } else { p * x.powi(k - 1) };
        let f2 = if k == 0 || k == 1 {
            0.0
        } else {
            p * (p - 1.0) * x.powi(k - 2)
        };
        return Ok((f0, f1, f2));
    }
    if x < 0.0 {
        return Err("non-integer power of a negative number");
    }
    if x == 0.0 {
        if p < 2.0 {
            return Err("non-integer power is not twice differentiable at 0");
        }
        return Ok((0.0, 0.0, 0.0));
    }
    Ok((
        x.powf(p),
        p * x.powf(p - 1.0),
        p * (p - 1.0) * x.powf(p - 2.0),
    ))
}

impl Node {
    /// Value when the subtree contains no variables.
    pub fn constant_value(&self) -> Option<f64> {
        Some(match self {
            Node::Const(c) => *c,
            Node::Pi => std::f64::consts::PI,
            Node::E => std::f64::consts::E,
            Node::Var(_) => return None,
            Node::Neg(a) => -a.constant_value()?,
            Node::Add(a, b) => a.constant_value()? + b.constant_value()?,
            Node::Sub(a, b) => a.constant_value()? - b.constant_value()?,
            Node::Mul(a, b) => a.constant_value()? * b.constant_value()?,
            Node::Div(a, b) => a.constant_value()? / b.constant_value()?,
            Node::Pow(a, p) => {
                let x = a.constant_value()?;
                if is_integer(*p) {
                    x.powi(*p as i32)
                } else {
                    x.powf(*p)
                }
            }
            Node::Call(f, a) => f.apply(a.constant_value()?),
        })
    }

    fn max_variable(&self) -> Option<usize> {
        match self {
            Node::Const(_) | Node::Pi | Node::E => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.max_variable(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_variable().max(b.max_variable())
            }
        }
    }

    fn collect_variables(&self, out: &mut Vec<usize>) {
        match self {
            Node::Const(_) | Node::Pi | Node::E => {}
            Node::Var(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.collect_variables(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }

    /// Value of a literal leaf, without folding larger constant subtrees.
    fn literal(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Pi => Some(std::f64::consts::PI),
            Node::E => Some(std::f64::consts::E),
            _ => None,
        }
    }

    fn jet(&self, point: &[f64]) -> Result<Jet> {
        let n = point.len();
        let out = match self {
            Node::Const(_) | Node::Pi | Node::E => {
                Jet::constant(self.constant_value().unwrap_or_default(), n)
            }
            Node::Var(i) => Jet::variable(point[*i], *i, n),
            Node::Neg(a) => {
                let mut j = a.jet(point)?;
                j.neg_in_place();
                j
            }
            Node::Add(a, b) => match (a.literal(), b.literal()) {
                (_, Some(c)) => {
                    let mut j = a.jet(point)?;
                    j.value += c;
                    j
                }
                (Some(c), _) => {
                    let mut j = b.jet(point)?;
                    j.value += c;
                    j
                }
                _ => {
                    let mut j = a.jet(point)?;
                    j.add_assign(&b.jet(point)?);
                    j
                }
            },
            Node::Sub(a, b) => {
                let mut j = a.jet(point)?;
                j.sub_assign(&b.jet(point)?);
                j
            }
            Node::Mul(a, b) => match (a.literal(), b.literal()) {
                (Some(c), _) => {
                    let mut j = b.jet(point)?;
                    j.scale_in_place(c);
                    j
                }
                (_, Some(c)) => {
                    let mut j = a.jet(point)?;
                    j.scale_in_place(c);
                    j
                }
                _ => {
                    let mut j = a.jet(point)?;
                    j.mul_assign(&b.jet(point)?);
                    j
                }
            },
            Node::Div(a, b) => {
                let mut num = a.jet(point)?;
                let den = b.jet(point)?;
                if den.value == 0.0 {
                    return Err(Error::domain(self.to_string(), "division by zero"));
                }
                num.div_assign(&den);
                num
            }
            Node::Pow(a, p) => {
                let mut base = a.jet(point)?;
                let (f0, f1, f2) = pow_derivatives(base.value, *p)
                    .map_err(|m| Error::domain(self.to_string(), m))?;
                base.chain_in_place(f0, f1, f2);
                base
            }
            Node::Call(f, a) => {
                let mut arg = a.jet(point)?;
                f.check_domain(arg.value)
                    .map_err(|m| Error::domain(self.to_string(), m))?;
                let (f0, f1, f2) = f.derivatives(arg.value);
                arg.chain_in_place(f0, f1, f2);
                arg
            }
        };
        if !out.is_finite() {
            return Err(Error::domain(self.to_string(), "non-finite result"));
        }
        Ok(out)
    }

    fn value(&self, point: &[f64]) -> Result<f64> {
        let v = match self {
            Node::Const(_) | Node::Pi | Node::E => self.constant_value().unwrap_or_default(),
            Node::Var(i) => point[*i],
            Node::Neg(a) => -a.value(point)?,
            Node::Add(a, b) => a.value(point)? + b.value(point)?,
            Node::Sub(a, b) => a.value(point)? - b.value(point)?,
            Node::Mul(a, b) => a.value(point)? * b.value(point)?,
            Node::Div(a, b) => {
                let num = a.value(point)?;
                let den = b.value(point)?;
                if den == 0.0 {
                    return Err(Error::domain(self.to_string(), "division by zero"));
                }
                num / den
            }
            Node::Pow(a, p) => {
                let x = a.value(point)?;
                pow_derivatives(x, *p)
                    .map_err(|m| Error::domain(self.to_string(), m))?
                    .0
            }
            Node::Call(f, a) => {
                let x = a.value(point)?;
                f.check_domain(x)
                    .map_err(|m| Error::domain(self.to_string(), m))?;
                f.apply(x)
            }
        };
        if !v.is_finite() {
            return Err(Error::domain(self.to_string(), "non-finite result"));
        }
        Ok(v)
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        f.write_str("(-")?;
        write_number(f, -v)?;
        return f.write_str(")");
    }
    // Both forms are shortest round-trip representations; Display avoids
    // exponents, which is only readable for moderate magnitudes.
    if v == 0.0 || (1e-5..1e16).contains(&v) {
        write!(f, "{v}")
    } else {
        write!(f, "{v:?}")
    }
}

impl Node {
    /// Like `Display`, without the outer parentheses of a binary operation.
    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Add(a, b) => write!(f, "{a} + {b}"),
            Node::Sub(a, b) => write!(f, "{a} - {b}"),
            Node::Mul(a, b) => write!(f, "{a} * {b}"),
            Node::Div(a, b) => write!(f, "{a} / {b}"),
            other => fmt::Display::fmt(other, f),
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write_number(f, *c),
            Node::Pi => f.write_str("pi"),
            Node::E => f.write_str("e"),
            Node::Var(i) => write!(f, "u{}", i + 1),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, p) => {
                write!(f, "({a}^")?;
                write_number(f, *p)?;
                f.write_str(")")
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_bare(f)?;
                f.write_str(")")
            }
        }
    }
}

/// A parsed scalar field of fixed arity.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    arity: usize,
    tape: tape::Tape,
}

impl Expression {
    /// Parse `text` as a field in the variables `u1..un`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("arity must be at least 1".into()));
        }
        let root = parser::parse(text, n)?;
        Ok(Expression::build(root, n))
    }

    pub fn from_node(root: Node, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("arity must be at least 1".into()));
        }
        if let Some(i) = root.max_variable() {
            if i >= n {
                return Err(Error::VariableOutOfRange {
                    index: i + 1,
                    arity: n,
                    position: 0,
                });
            }
        }
        Ok(Expression::build(root, n))
    }

    fn build(root: Node, arity: usize) -> Self {
        let tape = tape::Tape::compile(&root);
        Expression { root, arity, tape }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Same tree viewed as a field of higher arity.
    pub fn with_arity(&self, n: usize) -> Result<Self> {
        Expression::from_node(self.root.clone(), n)
    }

    /// 1-based indices of the variables that occur in the tree, sorted.
    pub fn variables(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.root.collect_variables(&mut v);
        v.sort_unstable();
        v.into_iter().map(|i| i + 1).collect()
    }

    /// Fully parenthesised text that parses back to an identical tree.
    pub fn render(&self) -> String {
        self.to_string()
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: point.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        self.root.value(point)
    }

    pub fn evaluate_jet(&self, point: &[f64]) -> Result<Jet> {
        self.check_point(point)?;
        match self.tape.jet(point) {
            Some(j) => Ok(j),
            None => self.root.jet(point),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt_bare(f)
    }
}

impl std::str::FromStr for Func {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Func::from_name(s).ok_or_else(|| Error::InvalidParameter(format!("unknown function `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(text: &str, n: usize, p: &[f64]) -> Jet {
        Expression::parse(text, n).unwrap().evaluate_jet(p).unwrap()
    }

    #[test]
    fn sum_of_two_variables() {
        let e = Expression::parse("u1 + u2", 2).unwrap();
        assert_eq!(
            e.root(),
            &Node::Add(Box::new(Node::Var(0)), Box::new(Node::Var(1)))
        );
    }

    #[test]
    fn hyperboloid_text_parses_to_nested_sqrt() {
        let e = Expression::parse("sqrt(u1^2 + u2^2 + 1)", 2).unwrap();
        match e.root() {
            Node::Call(Func::Sqrt, inner) => assert!(matches!(**inner, Node::Add(_, _))),
            other => panic!("unexpected tree {other:?}"),
        }
        assert_eq!(e.variables(), vec![1, 2]);
    }

    #[test]
    fn variable_out_of_range() {
        let err = Expression::parse("u3", 2).unwrap_err();
        assert_eq!(
            err,
            Error::VariableOutOfRange {
                index: 3,
                arity: 2,
                position: 1
            }
        );
        assert!(matches!(
            Expression::parse("u0", 2),
            Err(Error::VariableOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(
            Expression::parse("u1 + * u2", 2),
            Err(Error::Syntax { position: 6, .. })
        ));
        assert!(matches!(
            Expression::parse("foo(u1)", 1),
            Err(Error::Syntax { position: 1, .. })
        ));
        assert!(matches!(
            Expression::parse("(u1 + 1", 1),
            Err(Error::Syntax { position: 8, .. })
        ));
        assert!(matches!(
            Expression::parse("u1^u1", 1),
            Err(Error::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            Expression::parse("sqrt(u1, u1)", 1),
            Err(Error::Arity { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn rational_exponents_fold() {
        let e = Expression::parse("u1^(1/2) + u1^-1 + 2^3^2", 1).unwrap();
        let v = e.evaluate(&[4.0]).unwrap();
        assert_eq!(v, 2.0 + 0.25 + 512.0);
    }

    #[test]
    fn hyperboloid_jet_at_origin() {
        let j = jet("sqrt(u1^2 + u2^2 + 1)", 2, &[0.0, 0.0]);
        assert_eq!(j.value, 1.0);
        assert_eq!(j.gradient.to_vec(), vec![0.0, 0.0]);
        assert_eq!(j.hessian.to_vec(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn linear_field_jet() {
        let j = jet("u1 + u2", 2, &[3.0, 4.0]);
        assert_eq!(j.value, 7.0);
        assert_eq!(j.gradient.to_vec(), vec![1.0, 1.0]);
        assert_eq!(j.hessian.to_vec(), vec![0.0; 4]);
    }

    #[test]
    fn translation_field_jet() {
        let j = jet("u2 + exp(u1)", 2, &[0.0, 0.0]);
        assert_eq!(j.value, 1.0);
        assert_eq!(j.gradient.to_vec(), vec![1.0, 1.0]);
        assert_eq!(j.hessian.to_vec(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn domain_errors_name_the_subterm() {
        let e = Expression::parse("sqrt(u1 - 2)", 1).unwrap();
        match e.evaluate_jet(&[1.0]) {
            Err(Error::Domain { subterm, .. }) => assert_eq!(subterm, "sqrt(u1 - 2)"),
            other => panic!("expected domain error, got {other:?}"),
        }
        let e = Expression::parse("log(u1) + 1/u1", 1).unwrap();
        assert!(matches!(e.evaluate_jet(&[0.0]), Err(Error::Domain { .. })));
        let e = Expression::parse("u1^0.5", 1).unwrap();
        assert!(matches!(e.evaluate_jet(&[-1.0]), Err(Error::Domain { .. })));
        assert!(matches!(e.evaluate_jet(&[0.0]), Err(Error::Domain { .. })));
        let e = Expression::parse("u1^2.5", 1).unwrap();
        assert_eq!(e.evaluate_jet(&[0.0]).unwrap().hessian.to_vec(), vec![0.0]);
    }

    #[test]
    fn point_length_is_checked() {
        let e = Expression::parse("u1", 2).unwrap();
        assert_eq!(
            e.evaluate_jet(&[1.0]),
            Err(Error::Arity {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn render_round_trips_structurally() {
        for text in [
            "-u1^2 + 3*u2 - 0.1/u1",
            "sqrt(u1^2 + u2^2 + 0.25) * pi - e",
            "asinh(u1) + cosh(u2)^(-0.5) + 1e-30",
            "exp(-u1) / (1 + log(u2^2 + 1))",
        ] {
            let e = Expression::parse(text, 2).unwrap();
            let again = Expression::parse(&e.render(), 2).unwrap();
            assert_eq!(e, again, "{text} -> {}", e.render());
        }
    }
}
